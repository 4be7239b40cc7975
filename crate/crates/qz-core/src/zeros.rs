//! Zero location on the critical line: a sign-change scan over a grid tied
//! to the local mean zero spacing, with Ridder refinement of each bracket.

use crate::engine::{evaluate_fast, CoefficientTable, CriticalLinePoint, T_BOX};
use crate::{QzError, Result};

const RIDDER_ITER_CAP: usize = 100;

#[derive(Debug, Clone, Copy)]
pub struct ScanConfig {
    pub t_max: f64,
    /// Grid points per mean spacing 2 pi / ln(d / 2 pi).
    pub step_divisor: u32,
    /// Absolute tolerance on the refined ordinate.
    pub refine_tolerance: f64,
    /// Require Z(0) > 0 before scanning.
    pub center_check: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            t_max: 1.0,
            step_divisor: 50,
            refine_tolerance: 1e-12,
            center_check: true,
        }
    }
}

/// Scan step for the given modulus: the mean spacing divided by `divisor`.
pub fn grid_step(modulus: u64, divisor: u32) -> Result<f64> {
    if divisor == 0 {
        return Err(QzError::Domain("step divisor must be positive"));
    }
    let ln = (modulus as f64 / std::f64::consts::TAU).ln();
    if !(ln > 0.0) {
        return Err(QzError::Domain("modulus too small for the spacing heuristic"));
    }
    Ok(std::f64::consts::TAU / ln / divisor as f64)
}

fn check_config(config: &ScanConfig) -> Result<()> {
    if !(config.t_max > 0.0) {
        return Err(QzError::Domain("scan needs t_max > 0"));
    }
    if !(config.refine_tolerance > 0.0) {
        return Err(QzError::Domain("refine tolerance must be positive"));
    }
    Ok(())
}

/// All zeros of `f` in (0, t_max], located by sign changes on the grid for
/// `modulus` and refined to the configured tolerance. `f(0)` anchors the
/// scan so a crossing inside the first step is still caught.
pub fn scan_zeros_with(
    modulus: u64,
    config: &ScanConfig,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<Vec<f64>> {
    check_config(config)?;
    let step = grid_step(modulus, config.step_divisor)?;
    let z0 = f(0.0)?;
    if config.center_check && !(z0 > 0.0) {
        return Err(QzError::CenterNotPositive(z0));
    }
    let mut zeros = Vec::new();
    let mut prev_t = 0.0f64;
    let mut prev_v = z0;
    let mut k = 1u64;
    loop {
        let t = (step * k as f64).min(config.t_max);
        let v = f(t)?;
        if v == 0.0 {
            zeros.push(t);
        } else if prev_v.signum() * v.signum() < 0.0 {
            zeros.push(ridder(&mut f, prev_t, t, prev_v, v, config.refine_tolerance)?);
        }
        if t >= config.t_max {
            break;
        }
        prev_t = t;
        prev_v = v;
        k += 1;
    }
    Ok(zeros)
}

/// Zeros of Z(t, chi) for the table's discriminant.
pub fn scan_zeros(table: &CoefficientTable, config: &ScanConfig) -> Result<Vec<f64>> {
    if config.t_max > T_BOX {
        return Err(QzError::Domain("t_max exceeds the validated evaluation box"));
    }
    let parity = table.plan.parity;
    scan_zeros_with(table.owner.modulus(), config, |t| {
        evaluate_fast(table, CriticalLinePoint::new(t, parity))
    })
}

// Ridder's method on a sign-change bracket. Each iteration evaluates the
// midpoint and the exponentially corrected point, keeping a sign change.
fn ridder(
    f: &mut impl FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    mut flo: f64,
    mut fhi: f64,
    tol: f64,
) -> Result<f64> {
    debug_assert!(flo.signum() * fhi.signum() < 0.0);
    for _ in 0..RIDDER_ITER_CAP {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid)?;
        if fmid == 0.0 {
            return Ok(mid);
        }
        let s = (fmid * fmid - flo * fhi).sqrt();
        let dir = if flo > fhi { 1.0 } else { -1.0 };
        let next = mid + (mid - lo) * dir * fmid / s;
        let fnext = f(next)?;
        if fnext == 0.0 {
            return Ok(next);
        }
        // keep the tightest bracket among lo, mid, next, hi
        if fmid.signum() != fnext.signum() {
            if mid < next {
                (lo, flo, hi, fhi) = (mid, fmid, next, fnext);
            } else {
                (lo, flo, hi, fhi) = (next, fnext, mid, fmid);
            }
        } else if flo.signum() != fnext.signum() {
            (hi, fhi) = (next, fnext);
        } else {
            (lo, flo) = (next, fnext);
        }
        if hi - lo <= tol {
            return Ok(next);
        }
    }
    Err(QzError::RefineDivergence(RIDDER_ITER_CAP))
}
