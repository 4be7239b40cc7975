//! Evaluation of completed quadratic Dirichlet L-functions near the central
//! point, for fundamental discriminants up to ~1e12, together with the
//! one-level-density statistics their low-lying zeros are compared against.
//!
//! The crate is organized bottom-up: extended-precision scalar types
//! ([`dd`], [`scaled`], [`hp`]), special functions built on them
//! ([`special`]), discriminant enumeration and characters ([`disc`]), the
//! interval-kernel evaluation engine ([`engine`]), zero location ([`zeros`]),
//! and density predictions ([`density`]).

pub mod dd;
pub mod density;
pub mod disc;
pub mod engine;
pub mod hp;
pub mod scaled;
pub mod special;
pub mod zeros;

pub use dd::{Dd, DdComplex};
pub use density::{
    a_prime, explicit_curve, explicit_terms, integrate_against_test, main_term, ratios_curve,
    ratios_r_est, re_r_est_extrema, sinc_extrema, ExplicitTerms, Histogram, HistogramRow,
    TestFunction, INTEGRAL_CUTOFF, TAU_MIN,
};
pub use disc::{enumerate_range, DiscriminantRange, FundamentalDiscriminant, Sign};
pub use engine::{
    build_plan, evaluate_direct, evaluate_fast, evaluate_fast_with_stats, precompute,
    precompute_batch, CoefficientTable, CriticalLinePoint, EvalStats, EvaluationPlan,
    SharedPowerTable,
};
pub use scaled::ScaledFloat;
pub use zeros::{grid_step, scan_zeros, scan_zeros_with, ScanConfig};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QzError {
    #[error("argument outside supported domain: {0}")]
    Domain(&'static str),
    #[error("continued fraction for the incomplete gamma did not converge within {0} iterations")]
    CfDivergence(usize),
    #[error("value overflowed the target type during {0}")]
    Overflow(&'static str),
    #[error("no admissible Taylor order <= {max_order} for interval {interval}")]
    ScheduleInfeasible { interval: usize, max_order: u32 },
    #[error("zeta is too close to a zero at the requested point (|zeta| = {0:.3e})")]
    NearZetaZero(f64),
    #[error("prediction curve is singular for |tau| < {0}")]
    TauTooSmall(f64),
    #[error("central value check failed: Z(0) = {0:.6e} is not positive")]
    CenterNotPositive(f64),
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("zero refinement did not converge within {0} iterations")]
    RefineDivergence(usize),
}

pub type Result<T> = std::result::Result<T, QzError>;
