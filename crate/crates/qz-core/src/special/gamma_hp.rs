use std::cell::RefCell;

use super::BERNOULLI_2N;
use crate::dd::DdComplex;
use crate::hp::{Hp, HpComplex};

// Stirling with argument lifted to re >= 50 and 20 Bernoulli terms keeps
// the series tail near the 192-bit noise floor; the consumers (kernel
// seeding, series Gamma(s)) need far less.
const SHIFT_RE: f64 = 50.0;
const STIRLING_TERMS: usize = 20;

struct StirlingTable {
    // B_{2j} / (2j (2j-1)) for j = 1..=20
    coef: Vec<Hp>,
    half_ln_2pi: Hp,
}

thread_local! {
    static TABLE: RefCell<Option<StirlingTable>> = const { RefCell::new(None) };
}

fn build_table() -> StirlingTable {
    let coef = BERNOULLI_2N
        .iter()
        .take(STIRLING_TERMS)
        .enumerate()
        .map(|(i, &(num, den))| {
            let j = (i + 1) as i128;
            Hp::from_i128(num).div(&Hp::from_i128(den * (2 * j) * (2 * j - 1)))
        })
        .collect();
    let two_pi = Hp::pi().mul_f64(2.0);
    let half_ln_2pi = two_pi.ln().mul_f64(0.5);
    StirlingTable { coef, half_ln_2pi }
}

// Principal log of a complex number with positive real part.
fn ln_right_half(w: &HpComplex) -> HpComplex {
    HpComplex {
        re: w.norm_sqr().ln().mul_f64(0.5),
        im: w.im.div(&w.re).atan(),
    }
}

/// Gamma(s) at 192-bit working precision by the shifted Stirling series.
/// Intended box: s away from the non-positive integers, |s| moderate
/// (the engine uses re(s) in [1/4, 260], |im(s)| <= 1).
pub fn gamma_hp(s: &HpComplex) -> HpComplex {
    TABLE.with(|slot| {
        let mut slot = slot.borrow_mut();
        let table = slot.get_or_insert_with(build_table);

        let mut prod = HpComplex::one();
        let mut w = s.clone();
        let bound = Hp::from_f64(SHIFT_RE);
        while w.re.lt(&bound) {
            prod = prod.mul(&w);
            w = w.add_real(&Hp::one());
        }
        let lnw = ln_right_half(&w);
        let half = Hp::from_f64(0.5);
        let mut lng = HpComplex {
            re: w.re.sub(&half),
            im: w.im.clone(),
        }
        .mul(&lnw)
        .sub(&w);
        lng.re = lng.re.add(&table.half_ln_2pi);

        let winv = w.recip();
        let winv2 = winv.mul(&winv);
        let mut p = winv;
        for c in &table.coef {
            lng = lng.add(&p.scale(c));
            p = p.mul(&winv2);
        }
        lng.exp().div(&prod)
    })
}

/// Gamma(s) rounded to double-double, for the engine's head-term path.
pub fn gamma_complete_dd(s: DdComplex) -> DdComplex {
    gamma_hp(&HpComplex::from_dd(s)).to_dd()
}
