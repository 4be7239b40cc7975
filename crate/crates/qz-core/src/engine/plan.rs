//! Evaluation planning: truncation length, Fibonacci interval partition,
//! and the per-interval Taylor order schedule.

use crate::special::{ln_gamma_real, ln_upper_gamma_real};
use crate::{QzError, Result};
use num_complex::Complex64;

pub const GOLDEN: f64 = 1.618033988749895;

/// Evaluation stays inside |t| <= T_BOX; the kernel branch switches were
/// validated on that window only. 1.25 covers rescaled ordinates up to 3
/// for every modulus from 1e8 up.
pub const T_BOX: f64 = 1.25;

const MAX_ORDER: u32 = 256;
const LN_10: f64 = std::f64::consts::LN_10;

/// Point s = (1/2 + it + a)/2 on the critical line of the completed
/// L-function, where a is the character parity.
#[derive(Debug, Clone, Copy)]
pub struct CriticalLinePoint {
    pub t: f64,
    pub a: u8,
    pub s: Complex64,
}

impl CriticalLinePoint {
    pub fn new(t: f64, a: u8) -> CriticalLinePoint {
        CriticalLinePoint {
            t,
            a,
            s: Complex64::new((0.5 + a as f64) / 2.0, t / 2.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvaluationPlan {
    pub digits: u32,
    /// Series truncation N.
    pub truncation: u64,
    /// T: intervals I_j = [F_j, F_{j+1}) for j = 1..=T partition [1, N^2].
    pub interval_count: usize,
    /// F_1..F_{T+1} with the classical seed F_1 = F_2 = 1; I_1 is empty,
    /// which keeps the interval indexing aligned with T = 65 at d = 1e12.
    pub fib: Vec<u64>,
    /// n_direct: largest n summed term by term.
    pub head_cutoff: u64,
    /// B(j) for j = 1..=T at orders[j-1]; 0 marks head intervals.
    pub orders: Vec<u32>,
    pub golden: f64,
    pub parity: u8,
    /// Modulus the schedule was sized for; valid for all d' <= this
    /// (the tail and interval errors only shrink as d decreases).
    pub modulus_bound: u64,
}

impl EvaluationPlan {
    pub fn max_order(&self) -> u32 {
        self.orders.iter().copied().max().unwrap_or(0)
    }

    /// Tail intervals as (j, f_lo, f_hi, order), 1-indexed j.
    pub fn tail_intervals(&self) -> impl Iterator<Item = (usize, u64, u64, u32)> + '_ {
        (1..=self.interval_count).filter_map(move |j| {
            let b = self.orders[j - 1];
            (b > 0).then(|| (j, self.fib[j - 1], self.fib[j], b))
        })
    }
}

fn check_args(d: u64, digits: u32) -> Result<()> {
    if d < 3 {
        return Err(QzError::Domain("modulus must be at least 3"));
    }
    if digits == 0 || digits > 18 {
        return Err(QzError::Domain("digits must lie in 1..=18"));
    }
    Ok(())
}

/// Closed-form truncation ceil(sqrt(d log(d^2 10^D) / pi)).
pub fn crude_truncation(d: u64, digits: u32) -> Result<u64> {
    check_args(d, digits)?;
    let df = d as f64;
    let ln_arg = 2.0 * df.ln() + digits as f64 * LN_10;
    Ok((df * ln_arg / std::f64::consts::PI).sqrt().ceil() as u64)
}

// Tail criterion: d^2 exp(-n^2 pi/d) / (pi n)^2 < 10^{-D}, in logs.
fn tail_small_enough(d: u64, digits: u32, n: u64) -> bool {
    let df = d as f64;
    let nf = n as f64;
    2.0 * df.ln() - nf * nf * std::f64::consts::PI / df
        - 2.0 * (std::f64::consts::PI * nf).ln()
        < -(digits as f64) * LN_10
}

/// Smallest N satisfying the tail criterion, by bisection under the crude
/// bound; minimality is verified by direct substitution at N and N - 1.
pub fn refined_truncation(d: u64, digits: u32) -> Result<u64> {
    let mut hi = crude_truncation(d, digits)?;
    while !tail_small_enough(d, digits, hi) {
        hi *= 2; // crude bound drops log factors; never observed, kept safe
    }
    if tail_small_enough(d, digits, 1) {
        return Ok(1);
    }
    let mut lo = 1u64;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if tail_small_enough(d, digits, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    debug_assert!(tail_small_enough(d, digits, hi) && !tail_small_enough(d, digits, hi - 1));
    Ok(hi)
}

/// Fibonacci prefix F_1..F_{T+1} with minimal T such that N^2 < F_{T+1}.
pub fn build_partition(n: u64) -> Result<(usize, Vec<u64>)> {
    if n < 2 {
        return Err(QzError::Domain("partition requires N >= 2"));
    }
    let n2 = n
        .checked_mul(n)
        .ok_or(QzError::Overflow("truncation squared"))?;
    let mut fib = vec![1u64, 1];
    while *fib.last().unwrap() <= n2 {
        let t = fib.len();
        fib.push(fib[t - 1] + fib[t - 2]);
    }
    Ok((fib.len() - 1, fib))
}

// I(B, a) = \int_1^{sqrt(golden)} u^{2a} (u^2-1)^{2B} du
//         = (1/2) sum_m C(a - 1/2, m) (golden - 1)^{2B + m + 1} / (2B + m + 1)
// after v = u^2 and the binomial expansion of v^{a - 1/2} about 1.
fn interval_integral(b: u32, a: u8) -> f64 {
    let z = GOLDEN - 1.0;
    let alpha = a as f64 - 0.5;
    let mut binom = 1.0;
    let mut zpow = z.powi(2 * b as i32 + 1);
    let mut sum = 0.0;
    for m in 0..200 {
        let term = binom * zpow / (2.0 * b as f64 + m as f64 + 1.0);
        sum += term;
        if term.abs() < 1e-20 * sum.abs() {
            break;
        }
        binom *= (alpha - m as f64) / (m as f64 + 1.0);
        zpow *= z;
    }
    0.5 * sum
}

// ln of the interval error estimate Gamma(B, x_j)/B! * F_j^{(2a+1)/4} * sqrt(I(B,a)).
fn interval_error_ln(d: u64, a: u8, f_j: u64, b: u32) -> Result<f64> {
    let x_j = std::f64::consts::PI * f_j as f64 / d as f64;
    let bf = b as f64;
    Ok(ln_upper_gamma_real(bf, x_j)? - ln_gamma_real(bf + 1.0)
        + 0.25 * (2.0 * a as f64 + 1.0) * (f_j as f64).ln()
        + 0.5 * interval_integral(b, a).ln())
}

// Head absorption: an interval whose square count (as sqrt F_{j+1} - sqrt F_j)
// stays below this multiple of its Taylor order is cheaper to sum directly.
// 3.5 lands n_direct on the reference 1160 at d = 1e12, D = 15, a = 1.
const HEAD_FACTOR: f64 = 3.5;

/// Per-interval Taylor orders against the root-sum-square budget
/// 10^{-D}/sqrt(T), plus the head cutoff. Orders are nondecreasing by
/// construction (each search starts at the previous interval's order).
pub fn taylor_order_schedule(
    d: u64,
    digits: u32,
    a: u8,
    fib: &[u64],
) -> Result<(u64, Vec<u32>)> {
    check_args(d, digits)?;
    let t = fib.len() - 1;
    let budget_ln = -(digits as f64) * LN_10 - 0.5 * (t as f64).ln();
    let mut orders = Vec::with_capacity(t);
    let mut prev = 1u32;
    for j in 1..=t {
        let b = order_for_interval(d, a, fib[j - 1], prev, budget_ln)
            .map_err(|e| match e {
                QzError::ScheduleInfeasible { max_order, .. } => {
                    QzError::ScheduleInfeasible { interval: j, max_order }
                }
                other => other,
            })?;
        orders.push(b);
        prev = b;
    }
    // Absorb leading intervals into the direct head while they hold few
    // squares relative to their order.
    let mut head_end = 0usize;
    for j in 1..=t {
        let width = (fib[j] as f64).sqrt() - (fib[j - 1] as f64).sqrt();
        if width < HEAD_FACTOR * orders[j - 1] as f64 {
            head_end = j;
        } else {
            break;
        }
    }
    let n_direct = if head_end == 0 { 0 } else { (fib[head_end] - 1).isqrt() };
    for o in orders.iter_mut().take(head_end) {
        *o = 0;
    }
    Ok((n_direct, orders))
}

fn order_for_interval(d: u64, a: u8, f_lo: u64, start: u32, budget_ln: f64) -> Result<u32> {
    for b in start..=MAX_ORDER {
        if interval_error_ln(d, a, f_lo, b)? <= budget_ln {
            return Ok(b);
        }
    }
    Err(QzError::ScheduleInfeasible { interval: 0, max_order: MAX_ORDER })
}

/// Full plan for moduli up to d at the requested digit count.
pub fn build_plan(d: u64, digits: u32, parity: u8) -> Result<EvaluationPlan> {
    check_args(d, digits)?;
    let n = refined_truncation(d, digits)?;
    if n < 2 {
        return Err(QzError::Domain("modulus too small for a Taylor plan"));
    }
    let (t, fib) = build_partition(n)?;
    let (head_cutoff, orders) = taylor_order_schedule(d, digits, parity, &fib)?;
    let head_cutoff = head_cutoff.min(n);
    Ok(EvaluationPlan {
        digits,
        truncation: n,
        interval_count: t,
        fib,
        head_cutoff,
        orders,
        golden: GOLDEN,
        parity,
        modulus_bound: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // (d, digits, crude, refined) pinned against a multiprecision
    // bisection of the tail criterion.
    const TRUNCATION_TABLE: [(u64, u32, u64, u64); 7] = [
        (1000000000000, 15, 5346447, 4258878),
        (1000000, 15, 4449, 3719),
        (1000000, 10, 4016, 3203),
        (115147, 15, 1457, 1231),
        (175990483, 15, 63734, 52124),
        (1000008582815, 15, 5346470, 4258897),
        (100100000, 15, 47692, 39086),
    ];

    #[test]
    fn truncation_oracle_rows() {
        for &(d, digits, crude, refined) in TRUNCATION_TABLE.iter() {
            assert_eq!(crude_truncation(d, digits).unwrap(), crude, "crude d={d} D={digits}");
            assert_eq!(refined_truncation(d, digits).unwrap(), refined, "refined d={d} D={digits}");
        }
    }

    #[test]
    fn refined_saves_a_fifth_at_flagship_scale() {
        let crude = crude_truncation(1_000_000_000_000, 15).unwrap();
        let refined = refined_truncation(1_000_000_000_000, 15).unwrap();
        assert!((5_300_000..5_500_000).contains(&crude));
        assert!((4_200_000..4_400_000).contains(&refined));
        assert!((refined as f64) < 0.8 * crude as f64);
    }

    #[test]
    fn crude_monotone_in_digits() {
        for d in [3u64, 47, 115_147, 1_000_000, 1_000_000_000_000] {
            for digits in 1..18 {
                assert!(
                    crude_truncation(d, digits + 1).unwrap() >= crude_truncation(d, digits).unwrap()
                );
            }
        }
    }

    #[test]
    fn refined_is_minimal() {
        for &(d, digits) in &[(3u64, 15u32), (4, 15), (115_147, 15), (1_000_000, 10), (98_765_431, 12)] {
            let n = refined_truncation(d, digits).unwrap();
            assert!(tail_small_enough(d, digits, n));
            if n > 1 {
                assert!(!tail_small_enough(d, digits, n - 1));
            }
        }
    }

    #[test]
    fn partition_is_minimal_and_covers() {
        let n = refined_truncation(1_000_000_000_000, 15).unwrap();
        let (t, fib) = build_partition(n).unwrap();
        assert_eq!(t, 65);
        assert!(fib[t] > n * n && fib[t - 1] <= n * n);

        let (t10, fib10) = build_partition(10).unwrap();
        assert_eq!(t10, 11);
        assert_eq!(*fib10.last().unwrap(), 144);
        // every square lands in exactly one interval
        for n in 1..=10u64 {
            let hits = (1..=t10)
                .filter(|&j| fib10[j - 1] <= n * n && n * n < fib10[j])
                .count();
            assert_eq!(hits, 1, "n={n}");
        }
    }

    #[test]
    fn schedule_matches_reference_orders() {
        // tail order lists pinned against a 30-digit reference scheduler
        const TAIL_A1: &[u32] = &[
            83, 84, 85, 85, 86, 87, 87, 88, 89, 90, 90, 91, 92, 93, 93, 94, 95, 95, 96, 97,
            98, 98, 99, 100, 101, 101, 102, 103, 103, 104, 105, 106, 106, 107, 108,
        ];
        const TAIL_A0: &[u32] = &[
            68, 69, 69, 69, 69, 70, 70, 70, 70, 71, 71, 71, 71, 71, 72, 72, 72, 72, 73, 73,
            73, 73, 74, 74, 74, 74, 75, 75, 75, 75, 76, 76, 76, 76, 76, 77,
        ];

        let plan = build_plan(1_000_000_000_000, 15, 1).unwrap();
        assert_eq!(plan.interval_count, 65);
        assert_eq!(plan.head_cutoff, 1160);
        assert!(plan.orders[..30].iter().all(|&b| b == 0));
        assert_eq!(&plan.orders[30..], TAIL_A1);

        let plan0 = build_plan(1_000_000_000_000, 15, 0).unwrap();
        assert_eq!(plan0.head_cutoff, 912);
        assert!(plan0.orders[..29].iter().all(|&b| b == 0));
        assert_eq!(&plan0.orders[29..], TAIL_A0);
    }

    #[test]
    fn schedule_error_budget_is_met() {
        for (d, a) in [(1_000_000_000_000u64, 1u8), (1_000_000, 1), (115_147, 0)] {
            let plan = build_plan(d, 15, a).unwrap();
            let mut rss = 0.0f64;
            for (_, f_lo, _, b) in plan.tail_intervals() {
                rss += interval_error_ln(d, a, f_lo, b).unwrap().exp().powi(2);
            }
            assert!(rss.sqrt() <= 1e-15, "d={d} a={a}: {:.3e}", rss.sqrt());
        }
    }

    #[test]
    fn orders_nondecreasing_and_remainder_bounded() {
        use crate::special::taylor_remainder_bound;
        let plan = build_plan(1_000_000_000_000, 15, 1).unwrap();
        let budget = 1e-15 / (plan.interval_count as f64).sqrt();
        let mut prev = 0;
        for (_, f_lo, f_hi, b) in plan.tail_intervals() {
            assert!(b >= prev);
            prev = b;
            let x0 = std::f64::consts::PI * f_lo as f64 / plan.modulus_bound as f64;
            let x1 = std::f64::consts::PI * f_hi as f64 / plan.modulus_bound as f64;
            assert!(taylor_remainder_bound(b, x1, x0).unwrap() <= budget);
        }
    }

    #[test]
    fn schedule_reports_infeasible_budgets() {
        let err = order_for_interval(1_000_000_000_000, 1, 1_346_269, 1, -2000.0);
        assert!(matches!(err, Err(QzError::ScheduleInfeasible { .. })));
    }

    #[test]
    fn head_absorbs_empty_and_small_intervals() {
        // moduli small enough that every interval collapses into the head
        let plan = build_plan(4, 15, 1).unwrap();
        assert_eq!(plan.head_cutoff, plan.truncation);
        assert!(plan.tail_intervals().next().is_none());
    }

    #[test]
    fn critical_line_point_coordinates() {
        let p = CriticalLinePoint::new(0.6, 1);
        assert_eq!(p.s.re, 0.75);
        assert_eq!(p.s.im, 0.3);
        let q = CriticalLinePoint::new(-0.5, 0);
        assert_eq!(q.s.re, 0.25);
        assert_eq!(q.s.im, -0.25);
    }

    #[test]
    fn argument_guards() {
        assert!(crude_truncation(2, 15).is_err());
        assert!(crude_truncation(100, 0).is_err());
        assert!(crude_truncation(100, 19).is_err());
        assert!(build_partition(1).is_err());
    }
}
