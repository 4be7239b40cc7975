//! 192-bit working precision on top of `astro-float`, wrapped so the rest of
//! the crate never spells out precision, rounding mode, or the constants
//! cache. The kernel recursion amplifies its seed by factors up to ~F_T/x per
//! step; 192 significand bits leave ~1e-39 at the end of the longest chain,
//! comfortably inside every stated 1e-18 contract.

use std::cell::RefCell;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};

use crate::dd::{ldexp, Dd};
use crate::scaled::ScaledFloat;

pub const PREC: usize = 192;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

#[derive(Clone, Debug)]
pub struct Hp(pub BigFloat);

impl Hp {
    pub fn zero() -> Hp {
        Hp(BigFloat::from_i8(0, PREC))
    }

    pub fn one() -> Hp {
        Hp(BigFloat::from_i8(1, PREC))
    }

    pub fn from_f64(x: f64) -> Hp {
        Hp(BigFloat::from_f64(x, PREC))
    }

    pub fn from_u64(n: u64) -> Hp {
        Hp(BigFloat::from_u64(n, PREC))
    }

    pub fn from_i64(n: i64) -> Hp {
        Hp(BigFloat::from_i64(n, PREC))
    }

    pub fn from_i128(n: i128) -> Hp {
        Hp(BigFloat::from_i128(n, PREC))
    }

    pub fn from_dd(d: Dd) -> Hp {
        // add_full_prec misbehaves when one operand is zero.
        if d.lo == 0.0 {
            return Hp::from_f64(d.hi);
        }
        Hp(BigFloat::from_f64(d.hi, PREC).add(&BigFloat::from_f64(d.lo, PREC), PREC, RM))
    }

    /// Decimal scientific notation; for frozen constants.
    pub fn parse(s: &str) -> Hp {
        CONSTS.with(|cc| Hp(BigFloat::parse(s, Radix::Dec, PREC, RM, &mut cc.borrow_mut())))
    }

    pub fn pi() -> Hp {
        CONSTS.with(|cc| Hp(cc.borrow_mut().pi(PREC, RM)))
    }

    pub fn add(&self, rhs: &Hp) -> Hp {
        Hp(self.0.add(&rhs.0, PREC, RM))
    }

    pub fn sub(&self, rhs: &Hp) -> Hp {
        Hp(self.0.sub(&rhs.0, PREC, RM))
    }

    pub fn mul(&self, rhs: &Hp) -> Hp {
        Hp(self.0.mul(&rhs.0, PREC, RM))
    }

    pub fn div(&self, rhs: &Hp) -> Hp {
        Hp(self.0.div(&rhs.0, PREC, RM))
    }

    pub fn add_f64(&self, rhs: f64) -> Hp {
        self.add(&Hp::from_f64(rhs))
    }

    pub fn mul_f64(&self, rhs: f64) -> Hp {
        self.mul(&Hp::from_f64(rhs))
    }

    pub fn div_f64(&self, rhs: f64) -> Hp {
        self.div(&Hp::from_f64(rhs))
    }

    pub fn recip(&self) -> Hp {
        Hp(self.0.reciprocal(PREC, RM))
    }

    pub fn neg(&self) -> Hp {
        Hp(self.0.neg())
    }

    pub fn abs(&self) -> Hp {
        let mut v = self.0.clone();
        v.set_sign(Sign::Pos);
        Hp(v)
    }

    pub fn sqrt(&self) -> Hp {
        Hp(self.0.sqrt(PREC, RM))
    }

    pub fn exp(&self) -> Hp {
        CONSTS.with(|cc| Hp(self.0.exp(PREC, RM, &mut cc.borrow_mut())))
    }

    pub fn ln(&self) -> Hp {
        CONSTS.with(|cc| Hp(self.0.ln(PREC, RM, &mut cc.borrow_mut())))
    }

    pub fn sin(&self) -> Hp {
        CONSTS.with(|cc| Hp(self.0.sin(PREC, RM, &mut cc.borrow_mut())))
    }

    pub fn cos(&self) -> Hp {
        CONSTS.with(|cc| Hp(self.0.cos(PREC, RM, &mut cc.borrow_mut())))
    }

    pub fn atan(&self) -> Hp {
        CONSTS.with(|cc| Hp(self.0.atan(PREC, RM, &mut cc.borrow_mut())))
    }

    pub fn powi(&self, n: usize) -> Hp {
        Hp(self.0.powi(n, PREC, RM))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// self < rhs (NaNs considered unordered -> false).
    pub fn lt(&self, rhs: &Hp) -> bool {
        matches!(self.0.cmp(&rhs.0), Some(c) if c < 0)
    }

    fn raw_pieces(&self) -> Option<(Dd, i64, bool)> {
        let (words, _n, sign, e, _inexact) = self.0.as_raw_parts()?;
        // value = 0.mantissa * 2^e, words little-endian, MSB-normalized
        let k = words.len();
        if k == 0 {
            return None;
        }
        let w1 = words[k - 1];
        let w0 = if k >= 2 { words[k - 2] } else { 0 };
        // three exact f64 pieces covering the top 117 bits
        let a = ldexp((w1 >> 11) as f64, -53);
        let b = ldexp((w1 & 0x7ff) as f64, -64);
        let c = ldexp(w0 as f64, -128);
        let frac = Dd::from_f64(a).add_f64(b).add(Dd::from_f64(c));
        Some((frac, e as i64, sign == Sign::Neg))
    }

    pub fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf() {
            return if self.0.is_inf_neg() { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        match self.raw_pieces() {
            Some((frac, e, neg)) => {
                let v = ldexp(frac.to_f64(), e);
                if neg {
                    -v
                } else {
                    v
                }
            }
            None => f64::NAN,
        }
    }

    /// Top ~106 bits as a double-double. Saturates outside f64 range.
    pub fn to_dd(&self) -> Dd {
        if self.0.is_zero() {
            return Dd::ZERO;
        }
        match self.raw_pieces() {
            Some((frac, e, neg)) => {
                let v = frac.scale2(e);
                if neg {
                    v.neg()
                } else {
                    v
                }
            }
            None => Dd::from_f64(f64::NAN),
        }
    }

    /// Exact-exponent view; never over- or underflows.
    pub fn to_scaled(&self) -> ScaledFloat {
        if self.0.is_zero() {
            return ScaledFloat::ZERO;
        }
        match self.raw_pieces() {
            Some((frac, e, neg)) => {
                let s = ScaledFloat::new(frac.hi, frac.lo, e);
                if neg {
                    s.neg()
                } else {
                    s
                }
            }
            None => ScaledFloat::from_f64(f64::NAN),
        }
    }
}

/// Complex value over [`Hp`]. Only what the kernel paths use.
#[derive(Clone, Debug)]
pub struct HpComplex {
    pub re: Hp,
    pub im: Hp,
}

impl HpComplex {
    pub fn new(re: Hp, im: Hp) -> HpComplex {
        HpComplex { re, im }
    }

    pub fn zero() -> HpComplex {
        HpComplex { re: Hp::zero(), im: Hp::zero() }
    }

    pub fn one() -> HpComplex {
        HpComplex { re: Hp::one(), im: Hp::zero() }
    }

    pub fn from_dd(z: crate::dd::DdComplex) -> HpComplex {
        HpComplex { re: Hp::from_dd(z.re), im: Hp::from_dd(z.im) }
    }

    pub fn recip(&self) -> HpComplex {
        let n = self.norm_sqr();
        HpComplex { re: self.re.div(&n), im: self.im.neg().div(&n) }
    }

    pub fn from_f64(re: f64, im: f64) -> HpComplex {
        HpComplex { re: Hp::from_f64(re), im: Hp::from_f64(im) }
    }

    pub fn add(&self, rhs: &HpComplex) -> HpComplex {
        HpComplex { re: self.re.add(&rhs.re), im: self.im.add(&rhs.im) }
    }

    pub fn sub(&self, rhs: &HpComplex) -> HpComplex {
        HpComplex { re: self.re.sub(&rhs.re), im: self.im.sub(&rhs.im) }
    }

    pub fn mul(&self, rhs: &HpComplex) -> HpComplex {
        HpComplex {
            re: self.re.mul(&rhs.re).sub(&self.im.mul(&rhs.im)),
            im: self.re.mul(&rhs.im).add(&self.im.mul(&rhs.re)),
        }
    }

    pub fn div(&self, rhs: &HpComplex) -> HpComplex {
        let den = rhs.re.mul(&rhs.re).add(&rhs.im.mul(&rhs.im));
        let num = self.mul(&rhs.conj());
        HpComplex { re: num.re.div(&den), im: num.im.div(&den) }
    }

    pub fn conj(&self) -> HpComplex {
        HpComplex { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn neg(&self) -> HpComplex {
        HpComplex { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn scale(&self, k: &Hp) -> HpComplex {
        HpComplex { re: self.re.mul(k), im: self.im.mul(k) }
    }

    pub fn scale_f64(&self, k: f64) -> HpComplex {
        self.scale(&Hp::from_f64(k))
    }

    pub fn add_real(&self, k: &Hp) -> HpComplex {
        HpComplex { re: self.re.add(k), im: self.im.clone() }
    }

    pub fn norm_sqr(&self) -> Hp {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    /// e^{self}: real exp times (cos, sin) of the imaginary part.
    pub fn exp(&self) -> HpComplex {
        let m = self.re.exp();
        HpComplex { re: m.mul(&self.im.cos()), im: m.mul(&self.im.sin()) }
    }

    pub fn to_dd(&self) -> crate::dd::DdComplex {
        crate::dd::DdComplex { re: self.re.to_dd(), im: self.im.to_dd() }
    }

    pub fn to_complex64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}
