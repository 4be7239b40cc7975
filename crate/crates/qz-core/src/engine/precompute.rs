//! Exact integer precomputation: C_jk = sum over n^2 in I_j of
//! chi(n) n^a (n^2 - F_j)^k, shared across a batch of discriminants.

use super::plan::EvaluationPlan;
use crate::disc::FundamentalDiscriminant;
use crate::dd::Dd;
use crate::hp::Hp;
use crate::scaled::ScaledFloat;
use crate::{QzError, Result};
use num_bigint::{BigInt, BigUint, Sign};
use num_traits::ToPrimitive;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

static SHARED_BUILDS: AtomicU64 = AtomicU64::new(0);

/// Number of `SharedPowerTable` constructions so far (process-wide); lets
/// tests pin the one-build-per-batch contract.
pub fn shared_build_count() -> u64 {
    SHARED_BUILDS.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy)]
struct IntervalSpan {
    /// 1-based interval index into the plan.
    j: usize,
    f_lo: u64,
    order: u32,
    n_lo: u64,
    n_hi: u64,
}

/// Layout of the character-independent power work: which n feed which
/// interval at which order. The powers (n^2 - F_j)^k themselves are
/// streamed during accumulation rather than materialized (at d ~ 1e12
/// they would occupy tens of gigabytes), so sharing a table across a
/// batch shares the power chain exactly once per n.
#[derive(Debug, Clone)]
pub struct SharedPowerTable {
    truncation: u64,
    parity: u8,
    spans: Vec<IntervalSpan>,
}

impl SharedPowerTable {
    pub fn build(plan: &EvaluationPlan) -> SharedPowerTable {
        SHARED_BUILDS.fetch_add(1, Ordering::Relaxed);
        let n = plan.truncation;
        let mut spans = Vec::new();
        for (j, f_lo, f_hi, order) in plan.tail_intervals() {
            let n_lo = (f_lo - 1).isqrt() + 1;
            let n_hi = (f_hi - 1).isqrt().min(n);
            if n_lo > n_hi {
                continue;
            }
            debug_assert!(n_lo > plan.head_cutoff);
            spans.push(IntervalSpan { j, f_lo, order, n_lo, n_hi });
        }
        SharedPowerTable { truncation: n, parity: plan.parity, spans }
    }
}

/// Per-discriminant exact coefficients plus everything evaluation needs
/// per interval, cached once: C_jk, the scaled products C_jk (pi/d)^k, and
/// the kernel arguments x_j = pi F_j / d at both working precisions.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    pub owner: FundamentalDiscriminant,
    pub plan: Arc<EvaluationPlan>,
    /// (n, chi(n)) for n = 1..=n_direct.
    pub head: Vec<(u32, i8)>,
    /// Exact C_jk per tail interval, row k = 0..=B(j).
    pub c: Vec<Vec<BigInt>>,
    /// C_jk (pi/d)^k rows aligned with `c`.
    pub c_scaled: Vec<Vec<ScaledFloat>>,
    pub(super) tail: Vec<TailCache>,
    pub(super) head_cache: Vec<HeadTerm>,
    power_mults: u64,
}

#[derive(Debug, Clone)]
pub(super) struct TailCache {
    pub order: u32,
    pub x: Dd,
    pub lnx: Dd,
    pub emx: Dd,
    pub x_hp: Hp,
    pub emx_hp: Hp,
}

#[derive(Debug, Clone, Copy)]
pub(super) struct HeadTerm {
    pub weight: f64, // chi(n) * n^a
    pub x: Dd,
    pub lnx: Dd,
    pub emx: Dd,
}

impl CoefficientTable {
    /// Big-integer multiplications spent building this table (the shared
    /// power chains; additions are not counted).
    pub fn power_mults(&self) -> u64 {
        self.power_mults
    }
}

fn check_compatible(
    chi: &FundamentalDiscriminant,
    plan: &EvaluationPlan,
    shared: &SharedPowerTable,
) -> Result<()> {
    if shared.truncation != plan.truncation || shared.parity != plan.parity {
        return Err(QzError::Domain("shared power table built for a different plan"));
    }
    if chi.parity() != plan.parity {
        return Err(QzError::Domain("plan parity does not match the discriminant"));
    }
    if chi.modulus() > plan.modulus_bound {
        return Err(QzError::Domain("modulus exceeds the plan's bound"));
    }
    Ok(())
}

/// ScaledFloat holding the integer exactly up to 106 significand bits
/// (relative error below 2^-105 past that).
fn bigint_to_scaled(v: &BigInt) -> ScaledFloat {
    let mag = v.magnitude();
    let bits = mag.bits();
    if bits == 0 {
        return ScaledFloat::ZERO;
    }
    let take = bits.min(106);
    let top: BigUint = mag >> (bits - take);
    let top = top.to_u128().expect("106 bits fit u128");
    let hi = (top >> 53) as u64 as f64;
    let lo = (top & ((1u128 << 53) - 1)) as u64 as f64;
    let dd = Dd::from_f64(hi).scale2(53).add(Dd::from_f64(lo));
    let s = ScaledFloat::new(dd.hi, dd.lo, (bits - take) as i64);
    if v.sign() == Sign::Minus {
        s.neg()
    } else {
        s
    }
}

struct Accumulator {
    pos: Vec<Vec<BigUint>>,
    neg: Vec<Vec<BigUint>>,
}

fn build_table(
    chi: &FundamentalDiscriminant,
    plan: &Arc<EvaluationPlan>,
    shared: &SharedPowerTable,
    acc: Accumulator,
    power_mults: u64,
    chi_vals: &[i8],
) -> CoefficientTable {
    let d = chi.modulus();
    let a = chi.parity();
    let pi_over_d = ScaledFloat::from_dd(Dd::PI.div(Dd::from_u64(d)));

    let mut c = Vec::with_capacity(shared.spans.len());
    let mut c_scaled = Vec::with_capacity(shared.spans.len());
    for (si, span) in shared.spans.iter().enumerate() {
        debug_assert_eq!(span.order, plan.orders[span.j - 1]);
        let mut row = Vec::with_capacity(span.order as usize + 1);
        let mut srow = Vec::with_capacity(span.order as usize + 1);
        let mut pow = ScaledFloat::from_f64(1.0);
        for k in 0..=span.order as usize {
            let v = BigInt::from_biguint(Sign::Plus, acc.pos[si][k].clone())
                - BigInt::from_biguint(Sign::Plus, acc.neg[si][k].clone());
            srow.push(bigint_to_scaled(&v).mul(pow));
            row.push(v);
            pow = pow.mul(pi_over_d);
        }
        c.push(row);
        c_scaled.push(srow);
    }

    let tail = shared
        .spans
        .iter()
        .map(|span| {
            let x = Dd::PI.mul(Dd::from_u64(span.f_lo)).div(Dd::from_u64(d));
            let x_hp = Hp::pi().mul(&Hp::from_u64(span.f_lo)).div(&Hp::from_u64(d));
            TailCache {
                order: span.order,
                x,
                lnx: x.ln(),
                emx: x.neg().exp(),
                emx_hp: x_hp.neg().exp(),
                x_hp,
            }
        })
        .collect();

    let mut head = Vec::with_capacity(plan.head_cutoff as usize);
    let mut head_cache = Vec::new();
    for n in 1..=plan.head_cutoff {
        let cv = chi_vals[n as usize];
        head.push((n as u32, cv));
        if cv == 0 {
            continue;
        }
        let x = Dd::PI.mul(Dd::from_u64(n * n)).div(Dd::from_u64(d));
        let weight = cv as f64 * if a == 1 { n as f64 } else { 1.0 };
        head_cache.push(HeadTerm { weight, x, lnx: x.ln(), emx: x.neg().exp() });
    }

    CoefficientTable {
        owner: *chi,
        plan: Arc::clone(plan),
        head,
        c,
        c_scaled,
        tail,
        head_cache,
        power_mults,
    }
}

/// Exact coefficient tables for a batch sharing one plan and one power
/// table; the power chain for each n is computed once and accumulated
/// into every discriminant's C_jk.
pub fn precompute_batch(
    chis: &[FundamentalDiscriminant],
    plan: &Arc<EvaluationPlan>,
    shared: &SharedPowerTable,
) -> Result<Vec<CoefficientTable>> {
    for chi in chis {
        check_compatible(chi, plan, shared)?;
    }
    let a = plan.parity;
    let chi_tables: Vec<Vec<i8>> = chis
        .iter()
        .map(|chi| chi.chi_table(plan.truncation as usize))
        .collect();

    let mut accs: Vec<Accumulator> = chis
        .iter()
        .map(|_| Accumulator {
            pos: shared
                .spans
                .iter()
                .map(|s| vec![BigUint::default(); s.order as usize + 1])
                .collect(),
            neg: shared
                .spans
                .iter()
                .map(|s| vec![BigUint::default(); s.order as usize + 1])
                .collect(),
        })
        .collect();

    let mut mults = 0u64;
    for (si, span) in shared.spans.iter().enumerate() {
        for n in span.n_lo..=span.n_hi {
            if chi_tables.iter().all(|t| t[n as usize] == 0) {
                continue;
            }
            let delta = n * n - span.f_lo;
            let mut power = BigUint::from(if a == 1 { n } else { 1 });
            for k in 0..=span.order as usize {
                for (ci, t) in chi_tables.iter().enumerate() {
                    match t[n as usize] {
                        1 => accs[ci].pos[si][k] += &power,
                        -1 => accs[ci].neg[si][k] += &power,
                        _ => {}
                    }
                }
                if delta == 0 {
                    break; // higher powers vanish
                }
                if k < span.order as usize {
                    power *= delta;
                    mults += 1;
                }
            }
        }
    }

    Ok(chis
        .iter()
        .zip(accs)
        .zip(&chi_tables)
        .map(|((chi, acc), chi_vals)| build_table(chi, plan, shared, acc, mults, chi_vals))
        .collect())
}

/// Single-discriminant table; identical to a batch of one.
pub fn precompute(
    chi: &FundamentalDiscriminant,
    plan: &Arc<EvaluationPlan>,
    shared: &SharedPowerTable,
) -> Result<CoefficientTable> {
    Ok(precompute_batch(std::slice::from_ref(chi), plan, shared)?
        .pop()
        .expect("batch of one"))
}
