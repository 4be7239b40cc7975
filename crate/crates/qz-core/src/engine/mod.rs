//! The interval-kernel evaluation engine: plan construction, exact integer
//! precomputation, and fast evaluation of Z(t, chi) with a direct-summation
//! oracle.

mod evaluate;
mod plan;
mod precompute;

pub use evaluate::{evaluate_direct, evaluate_fast, evaluate_fast_with_stats, EvalStats};
pub use plan::{
    build_partition, build_plan, crude_truncation, refined_truncation, taylor_order_schedule,
    CriticalLinePoint, EvaluationPlan, GOLDEN, T_BOX,
};
pub use precompute::{
    precompute, precompute_batch, shared_build_count, CoefficientTable, SharedPowerTable,
};
