//! Analysis subcommands operating on zero files or on the prediction
//! formulas directly. Everything writes through a generic sink so tests
//! can capture output without touching the filesystem.

use crate::error::CliError;
use crate::zerofile::{self, Dataset};
use qz_core::{
    build_plan, enumerate_range, evaluate_direct, evaluate_fast, explicit_terms,
    integrate_against_test, main_term, precompute, ratios_r_est, CoefficientTable,
    CriticalLinePoint, DiscriminantRange, FundamentalDiscriminant, Histogram, SharedPowerTable,
    Sign, TestFunction, TAU_MIN,
};
use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

pub fn write_discriminants(
    range: &DiscriminantRange,
    header: &zerofile::Header,
    out: &mut dyn Write,
) -> Result<u64, CliError> {
    let discs = enumerate_range(range)?;
    let mut text = header.serialize();
    for d in &discs {
        text.push_str(&format!("{}\n", d.disc()));
    }
    text.push_str(&format!("# count={}\n", discs.len()));
    out.write_all(text.as_bytes())?;
    Ok(discs.len() as u64)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Deterministic sample of `take` indices from 0..n without replacement.
fn sample_indices(n: usize, take: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut state = seed;
    for i in 0..take.min(n) {
        let j = i + (splitmix64(&mut state) as usize) % (n - i);
        idx.swap(i, j);
    }
    idx.truncate(take);
    idx.sort_unstable();
    idx
}

pub struct VerifyReport {
    pub sampled: usize,
    pub max_abs_z: f64,
    pub max_deviation: f64,
    pub threshold: f64,
}

/// Re-evaluate a sample of recorded zeros through both the direct series
/// and the fast pipeline. Known cross-check discriminants are always
/// included when the file covers them.
pub fn verify_sample(
    ds: &Dataset,
    sample: usize,
    seed: u64,
    out: &mut dyn Write,
) -> Result<VerifyReport, CliError> {
    let pairs: Vec<(i64, f64)> = ds
        .records
        .iter()
        .flat_map(|r| r.zeros.iter().map(|&t| (r.disc, t)))
        .collect();
    if sample > pairs.len() {
        return Err(CliError::usage(format!(
            "sample {} exceeds the {} recorded zeros",
            sample,
            pairs.len()
        )));
    }
    let mut chosen: Vec<(i64, f64)> = sample_indices(pairs.len(), sample, seed)
        .into_iter()
        .map(|i| pairs[i])
        .collect();
    for landmark in [-115_147i64, -175_990_483] {
        if sample > 0 {
            chosen.extend(
                pairs
                    .iter()
                    .filter(|(d, _)| *d == landmark)
                    .filter(|p| !chosen.contains(p))
                    .copied()
                    .collect::<Vec<_>>(),
            );
        }
    }

    let digits = ds.header.digits;
    let threshold = 10f64.powi(3 - digits as i32);
    let mut report = VerifyReport {
        sampled: chosen.len(),
        max_abs_z: 0.0,
        max_deviation: 0.0,
        threshold,
    };
    if !chosen.is_empty() {
        let parity = match ds.header.sign {
            Sign::Negative => 1,
            Sign::Positive => 0,
        };
        let plan = Arc::new(build_plan(
            ds.header.x_min + ds.header.span - 1,
            digits,
            parity,
        )?);
        let shared = SharedPowerTable::build(&plan);
        let mut tables: HashMap<i64, CoefficientTable> = HashMap::new();
        for &(disc, t) in &chosen {
            let fd = FundamentalDiscriminant::new(disc)?;
            if !tables.contains_key(&disc) {
                tables.insert(disc, precompute(&fd, &plan, &shared)?);
            }
            let point = CriticalLinePoint::new(t, parity);
            let direct = evaluate_direct(&fd, point, digits)?;
            let fast = evaluate_fast(&tables[&disc], point)?;
            report.max_abs_z = report.max_abs_z.max(direct.abs());
            report.max_deviation = report.max_deviation.max((fast - direct).abs());
        }
    }

    writeln!(
        out,
        "sampled={} max_abs_z={:.3e} max_fast_vs_direct={:.3e} threshold={:.1e}",
        report.sampled, report.max_abs_z, report.max_deviation, report.threshold
    )?;
    if report.max_deviation > threshold {
        return Err(CliError::verify(format!(
            "fast/direct deviation {:.3e} exceeds {:.1e}",
            report.max_deviation, threshold
        )));
    }
    writeln!(out, "status=ok")?;
    Ok(report)
}

/// Bin the dataset's rescaled ordinates and emit the density CSV.
pub fn write_histogram(
    ds: &Dataset,
    bin_width: f64,
    tau_max: f64,
    out: &mut dyn Write,
) -> Result<Histogram, CliError> {
    let mut hist = Histogram::new(tau_max, bin_width, ds.header.x_min)?;
    for rec in &ds.records {
        hist.record(&rec.zeros);
    }
    let mut text = ds.header.serialize();
    text.push_str("tau,density_all,density_lowest\n");
    for row in hist.rows() {
        text.push_str(&format!(
            "{:?},{:?},{:?}\n",
            row.tau, row.density_all, row.density_lowest
        ));
    }
    out.write_all(text.as_bytes())?;
    Ok(hist)
}

pub const CURVE_COLUMNS: [&str; 7] = [
    "main",
    "explicit",
    "ratios",
    "re_r_est",
    "term_gamma",
    "term_zeta",
    "term_aprime",
];

pub struct PredictGrid {
    pub tau_min: f64,
    pub tau_max: f64,
    pub step: f64,
}

/// Prediction-curve CSV over a tau grid. `columns` selects a subset of
/// CURVE_COLUMNS; tau itself is always first.
pub fn write_predict(
    x: u64,
    dx: u64,
    grid: &PredictGrid,
    columns: &[String],
    out: &mut dyn Write,
) -> Result<(), CliError> {
    for c in columns {
        if !CURVE_COLUMNS.contains(&c.as_str()) {
            return Err(CliError::usage(format!("unknown curve column '{c}'")));
        }
    }
    if !(grid.step > 0.0 && grid.tau_max >= grid.tau_min) {
        return Err(CliError::usage("grid must be increasing with positive step"));
    }
    let wants = |name: &str| columns.iter().any(|c| c == name);
    let needs_ratios = wants("ratios") || wants("re_r_est");
    if needs_ratios && grid.tau_min < TAU_MIN {
        return Err(CliError::usage(format!(
            "ratios columns are singular near the center; --tau-min must be >= {TAU_MIN}"
        )));
    }
    let lx = (x as f64).ln();
    let mut text = format!("# family X={x} DX={dx}\n");
    text.push_str("tau");
    for c in CURVE_COLUMNS.iter().filter(|c| wants(c)) {
        text.push(',');
        text.push_str(c);
    }
    text.push('\n');
    let steps = ((grid.tau_max - grid.tau_min) / grid.step + 1e-9).floor() as usize;
    for k in 0..=steps {
        let tau = grid.tau_min + k as f64 * grid.step;
        let terms = explicit_terms(tau, x)?;
        let r_re = if needs_ratios { ratios_r_est(tau, x, dx)?.re } else { 0.0 };
        let main = main_term(tau);
        text.push_str(&format!("{tau:?}"));
        for c in CURVE_COLUMNS.iter().filter(|c| wants(c)) {
            let v = match *c {
                "main" => main,
                "explicit" => main + terms.bracket() / lx,
                "ratios" => 1.0 + r_re + terms.bracket() / lx,
                "re_r_est" => r_re,
                "term_gamma" => terms.gamma,
                "term_zeta" => terms.zeta,
                "term_aprime" => terms.aprime,
                _ => unreachable!(),
            };
            text.push_str(&format!(",{v:?}"));
        }
        text.push('\n');
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

pub const EXCISION_DELTAS: [f64; 5] = [0.8, 0.4, 0.2, 0.1, 0.05];

/// Convergence table for the excised prediction integral against the
/// -g(0)/2 reference.
pub fn write_integral_check(
    x: u64,
    dx: u64,
    sigma: f64,
    out: &mut dyn Write,
) -> Result<Vec<(f64, f64)>, CliError> {
    if !(sigma > 0.0 && sigma < 0.5) {
        return Err(CliError::usage("--sigma must lie in (0, 1/2)"));
    }
    let g = TestFunction::new(sigma)?;
    let reference = -g.eval(0.0) / 2.0;
    let mut rows = Vec::new();
    let mut text = format!("# integral-check X={x} DX={dx} sigma={sigma:?}\n");
    text.push_str(&format!("# reference -g(0)/2 = {reference:?}\n"));
    text.push_str("delta,integral,offset_from_reference\n");
    for &delta in EXCISION_DELTAS.iter() {
        let val = integrate_against_test(x, dx, delta, &g)?;
        text.push_str(&format!("{delta:?},{val:?},{:?}\n", val - reference));
        rows.push((delta, val));
    }
    out.write_all(text.as_bytes())?;
    Ok(rows)
}
