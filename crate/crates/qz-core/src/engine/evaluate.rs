//! Z(t, chi) evaluation: a reference direct sum over n, and the fast path
//! that replaces each tail interval by its Taylor expansion against the
//! precomputed integer coefficients.

use super::plan::{CriticalLinePoint, T_BOX};
use super::precompute::CoefficientTable;
use crate::dd::{Dd, DdComplex};
use crate::disc::FundamentalDiscriminant;
use crate::engine::plan::refined_truncation;
use crate::hp::HpComplex;
use crate::scaled::ScaledFloat;
use crate::special::{g_kernel_dd, gamma_complete_dd, kernel_re_sequence_hp};
use crate::{QzError, Result};
use std::sync::OnceLock;

/// Work counters for a single evaluation.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvalStats {
    /// Kernel values produced: one per direct term, plus the seed and every
    /// recursion emission per tail interval.
    pub kernel_evals: u64,
    pub head_terms: u64,
    pub taylor_terms: u64,
}

const MAX_COEFF: usize = 256;

// 2 (-1)^k / k!, k = 0..=MAX_COEFF.
fn taylor_coeffs() -> &'static [Dd] {
    static COEFFS: OnceLock<Vec<Dd>> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let mut v = Vec::with_capacity(MAX_COEFF + 1);
        let mut c = Dd::from_f64(2.0);
        v.push(c);
        for k in 1..=MAX_COEFF {
            c = c.div_f64(-(k as f64));
            v.push(c);
        }
        v
    })
}

fn check_point(point: &CriticalLinePoint, parity: u8) -> Result<()> {
    if !(point.t.abs() <= T_BOX) {
        return Err(QzError::Domain("t outside the validated evaluation box"));
    }
    if point.a != parity {
        return Err(QzError::Domain("point parity does not match the character"));
    }
    Ok(())
}

/// Fast evaluation of Z(t, chi) from a coefficient table.
pub fn evaluate_fast(table: &CoefficientTable, point: CriticalLinePoint) -> Result<f64> {
    evaluate_fast_with_stats(table, point).map(|(z, _)| z)
}

pub fn evaluate_fast_with_stats(
    table: &CoefficientTable,
    point: CriticalLinePoint,
) -> Result<(f64, EvalStats)> {
    check_point(&point, table.plan.parity)?;
    let mut stats = EvalStats::default();
    let s = DdComplex::from_f64(point.s.re, point.s.im);
    let gamma_s = gamma_complete_dd(s);

    let mut head_sum = Dd::ZERO;
    for term in &table.head_cache {
        let g = g_kernel_dd(s, term.x, term.lnx, term.emx, Some(&gamma_s))?;
        head_sum = head_sum.add(g.re.mul_f64(2.0 * term.weight));
        stats.kernel_evals += 1;
        stats.head_terms += 1;
    }

    // Tail: 106-bit seeds are ample against the 10^-D budget, and the
    // recursion itself runs at 192 bits because G(s+k, x_j) overflows any
    // fixed-exponent format long before k reaches B(j).
    let coeffs = taylor_coeffs();
    let s_hp = HpComplex::from_dd(s);
    let mut re_buf: Vec<ScaledFloat> = Vec::new();
    let mut total = ScaledFloat::from_dd(head_sum);
    for (si, cache) in table.tail.iter().enumerate() {
        let g0 = g_kernel_dd(s, cache.x, cache.lnx, cache.emx, Some(&gamma_s))?;
        kernel_re_sequence_hp(
            &s_hp,
            &cache.x_hp,
            &cache.emx_hp,
            HpComplex::from_dd(g0),
            cache.order as usize,
            &mut re_buf,
        );
        stats.kernel_evals += 1 + re_buf.len() as u64;
        let row = &table.c_scaled[si];
        for (k, re_g) in re_buf.iter().enumerate() {
            total = total.add(re_g.mul_dd(coeffs[k]).mul(row[k]));
            stats.taylor_terms += 1;
        }
    }
    Ok((total.to_f64(), stats))
}

/// Reference evaluation: every term n = 1..=N summed individually, N chosen
/// from the tail criterion at the requested digit count.
pub fn evaluate_direct(
    chi: &FundamentalDiscriminant,
    point: CriticalLinePoint,
    digits: u32,
) -> Result<f64> {
    check_point(&point, chi.parity())?;
    let n_max = refined_truncation(chi.modulus(), digits)?;
    let chi_vals = chi.chi_table(n_max as usize);
    let s = DdComplex::from_f64(point.s.re, point.s.im);
    let gamma_s = gamma_complete_dd(s);
    let d = Dd::from_u64(chi.modulus());
    let mut sum = Dd::ZERO;
    for n in 1..=n_max {
        let cv = chi_vals[n as usize];
        if cv == 0 {
            continue;
        }
        let x = Dd::PI.mul(Dd::from_u64(n * n)).div(d);
        let g = g_kernel_dd(s, x, x.ln(), x.neg().exp(), Some(&gamma_s))?;
        let w = cv as f64 * if chi.parity() == 1 { n as f64 } else { 1.0 };
        sum = sum.add(g.re.mul_f64(2.0 * w));
    }
    Ok(sum.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::{enumerate_range, DiscriminantRange, Sign as DSign};
    use crate::engine::plan::build_plan;
    use crate::engine::precompute::{precompute, SharedPowerTable};
    use std::sync::Arc;

    // Multiprecision direct sums at the same truncation criterion.
    const Z0_DISC_M4: f64 = 0.9807136140577135040713719491; // N=7
    const Z0_DISC_M3: f64 = 0.5692300384422751311538546612; // N=6
    const Z_DISC_M115147_T03: f64 = -1245.224048272250115994042241; // N=1231
    const Z_DISC_M175990483_T05: f64 = 776207.7418105921362591; // N=52124

    fn fast_for(disc: i64, t: f64, digits: u32) -> f64 {
        let chi = FundamentalDiscriminant::new(disc).unwrap();
        let plan = Arc::new(build_plan(chi.modulus(), digits, chi.parity()).unwrap());
        let shared = SharedPowerTable::build(&plan);
        let table = precompute(&chi, &plan, &shared).unwrap();
        evaluate_fast(&table, CriticalLinePoint::new(t, chi.parity())).unwrap()
    }

    #[test]
    fn normalization_pins() {
        let m4 = FundamentalDiscriminant::new(-4).unwrap();
        let got = evaluate_direct(&m4, CriticalLinePoint::new(0.0, 1), 15).unwrap();
        assert!((got - Z0_DISC_M4).abs() < 1e-15, "direct {got:.17}");
        assert!((fast_for(-4, 0.0, 15) - Z0_DISC_M4).abs() < 1e-15);

        let m3 = FundamentalDiscriminant::new(-3).unwrap();
        let got = evaluate_direct(&m3, CriticalLinePoint::new(0.0, 1), 15).unwrap();
        assert!((got - Z0_DISC_M3).abs() < 1e-15, "direct {got:.17}");
        assert!((fast_for(-3, 0.0, 15) - Z0_DISC_M3).abs() < 1e-15);
    }

    #[test]
    fn frozen_value_mid_modulus() {
        let chi = FundamentalDiscriminant::new(-115147).unwrap();
        let direct = evaluate_direct(&chi, CriticalLinePoint::new(0.3, 1), 15).unwrap();
        let rel = (direct - Z_DISC_M115147_T03).abs() / Z_DISC_M115147_T03.abs();
        assert!(rel < 1e-13, "direct rel {rel:.2e}");
        let fast = fast_for(-115147, 0.3, 15);
        let rel = (fast - Z_DISC_M115147_T03).abs() / Z_DISC_M115147_T03.abs();
        assert!(rel < 1e-13, "fast rel {rel:.2e}");
    }

    #[test]
    fn frozen_value_large_modulus() {
        let chi = FundamentalDiscriminant::new(-175990483).unwrap();
        let direct = evaluate_direct(&chi, CriticalLinePoint::new(0.5, 1), 15).unwrap();
        let rel = (direct - Z_DISC_M175990483_T05).abs() / Z_DISC_M175990483_T05;
        assert!(rel < 1e-13, "direct rel {rel:.2e}");
        let fast = fast_for(-175990483, 0.5, 15);
        let rel = (fast - Z_DISC_M175990483_T05).abs() / Z_DISC_M175990483_T05;
        assert!(rel < 1e-13, "fast rel {rel:.2e}");
    }

    #[test]
    fn fast_matches_direct_on_grid() {
        let range = DiscriminantRange { x_min: 1_000_000, span: 40, sign: DSign::Negative };
        let discs = enumerate_range(&range).unwrap();
        let plan = Arc::new(build_plan(1_000_040, 15, 1).unwrap());
        let shared = SharedPowerTable::build(&plan);
        for chi in discs.iter().take(2) {
            let table = precompute(chi, &plan, &shared).unwrap();
            // 1.13 exercises the box beyond t = 1, where the histogram scans run
            for t in [0.0, 0.31, 0.77, 1.0, 1.13] {
                let p = CriticalLinePoint::new(t, 1);
                let fast = evaluate_fast(&table, p).unwrap();
                let direct = evaluate_direct(chi, p, 15).unwrap();
                let tol = 1e-12 * direct.abs().max(1.0);
                assert!(
                    (fast - direct).abs() < tol,
                    "disc {} t={t}: fast {fast:.15e} direct {direct:.15e}",
                    chi.disc()
                );
            }
        }
    }

    #[test]
    fn even_in_t() {
        let range = DiscriminantRange { x_min: 1_000_000, span: 40, sign: DSign::Negative };
        let chi = enumerate_range(&range).unwrap()[0];
        let plan = Arc::new(build_plan(chi.modulus(), 15, 1).unwrap());
        let shared = SharedPowerTable::build(&plan);
        let table = precompute(&chi, &plan, &shared).unwrap();
        for t in [0.43, 0.91] {
            let plus = evaluate_fast(&table, CriticalLinePoint::new(t, 1)).unwrap();
            let minus = evaluate_fast(&table, CriticalLinePoint::new(-t, 1)).unwrap();
            assert!((plus - minus).abs() <= 1e-13 * plus.abs().max(1.0));
        }
    }

    #[test]
    fn kernel_budget_holds() {
        let range = DiscriminantRange { x_min: 1_000_000, span: 40, sign: DSign::Negative };
        let chi = enumerate_range(&range).unwrap()[0];
        let plan = Arc::new(build_plan(chi.modulus(), 15, 1).unwrap());
        let shared = SharedPowerTable::build(&plan);
        let table = precompute(&chi, &plan, &shared).unwrap();
        let (_, stats) =
            evaluate_fast_with_stats(&table, CriticalLinePoint::new(0.6, 1)).unwrap();
        let bound = 2 * plan.interval_count as u64 * (plan.max_order() as u64 + 1);
        assert!(stats.kernel_evals <= bound, "{} > {bound}", stats.kernel_evals);
        assert_eq!(stats.head_terms as usize, table.head_cache.len());
        assert!(stats.taylor_terms > 0);
    }

    #[test]
    fn rejects_bad_points() {
        let chi = FundamentalDiscriminant::new(-4).unwrap();
        assert!(evaluate_direct(&chi, CriticalLinePoint::new(1.3, 1), 15).is_err());
        assert!(evaluate_direct(&chi, CriticalLinePoint::new(f64::NAN, 1), 15).is_err());
        // parity mismatch: a = 0 point against an odd character
        assert!(evaluate_direct(&chi, CriticalLinePoint::new(0.3, 0), 15).is_err());
        let pos = FundamentalDiscriminant::new(5).unwrap();
        assert!(evaluate_direct(&pos, CriticalLinePoint::new(0.3, 1), 15).is_err());
    }
}
