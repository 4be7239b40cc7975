//! One-level density of low-lying zeros: rescaled histograms over a
//! discriminant window and the three predictions they are compared with
//! (symplectic main term, explicit-formula correction, ratios estimate).

use crate::disc::primes_to_trial_limit;
use crate::special::{digamma, log_gamma, riemann_zeta, zeta_log_derivative};
use crate::{QzError, Result};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

/// The ratios estimate blows up like 1/tau at the center; everything built
/// on it is restricted to |tau| >= TAU_MIN.
pub const TAU_MIN: f64 = 0.05;

/// Upper truncation of the prediction integrals; past this point the
/// sinc^2 weight has damped the integrand below 1e-12.
pub const INTEGRAL_CUTOFF: f64 = 230.0;

fn log_x(x: u64) -> Result<f64> {
    if x < 8 {
        return Err(QzError::Domain("reference scale X must be at least 8"));
    }
    Ok((x as f64).ln())
}

/// Symplectic main term 1 - sin(2 pi tau)/(2 pi tau), continuous at 0.
pub fn main_term(tau: f64) -> f64 {
    let x = TAU * tau;
    if x.abs() < 1e-4 {
        // 1 - sin(x)/x = x^2/6 (1 - x^2/20 + ...)
        return x * x / 6.0 * (1.0 - x * x / 20.0);
    }
    1.0 - x.sin() / x
}

/// A'(r) = sum_p ln p / ((p+1)(p^{1+2r} - 1)) over p <= 1e6, Kahan-summed
/// in prime order. The truncation error is below (ln 1e6 + 1)/1e6.
pub fn a_prime(r: Complex64) -> Complex64 {
    let two_r = 2.0 * r;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    for &p in primes_to_trial_limit() {
        let pf = p as f64;
        let lp = pf.ln();
        let pow = pf * (two_r * lp).exp();
        let term = lp / ((pf + 1.0) * (pow - 1.0));
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

fn zeta_two() -> Complex64 {
    static Z2: OnceLock<Complex64> = OnceLock::new();
    *Z2.get_or_init(|| riemann_zeta(Complex64::new(2.0, 0.0)).expect("zeta(2)"))
}

// e^z - 1 without cancellation for small z.
fn expm1_complex(z: Complex64) -> Complex64 {
    let half = (0.5 * z.im).sin();
    let cos_im = 1.0 - 2.0 * half * half;
    Complex64::new(
        z.re.exp_m1() * cos_im - 2.0 * half * half,
        z.re.exp() * z.im.sin(),
    )
}

/// Ratios estimate R(tau) for the window [X, X + dX]: the secondary term
/// of the one-level density before the 1 + R + bracket/log X assembly.
pub fn ratios_r_est(tau: f64, x: u64, dx: u64) -> Result<Complex64> {
    let lx = log_x(x)?;
    if dx == 0 {
        return Err(QzError::Domain("window width dX must be positive"));
    }
    if !(tau.abs() >= TAU_MIN) {
        return Err(QzError::TauTooSmall(TAU_MIN));
    }
    let c = TAU * tau / lx;
    let ci = Complex64::new(0.0, c);
    let one_m_ci = Complex64::new(1.0, -c);

    // [S(X+dX) - S(X)]/dX for S(Y) = pi^{ci} Y^{1-ci} / (1-ci), the dX -> 0
    // cancellation routed through expm1
    let xf = x as f64;
    let u = dx as f64 / xf;
    let head = (ci * PI.ln()).exp() * (one_m_ci * xf.ln()).exp() / one_m_ci;
    let sdiff = head * expm1_complex(one_m_ci * u.ln_1p()) / dx as f64;

    // Gamma(3/4 - ci/2)/Gamma(3/4 + ci/2) has unit modulus: the arguments
    // are conjugate
    let lg = log_gamma(Complex64::new(0.75, c / 2.0))?;
    let gr = Complex64::new(0.0, -2.0 * lg.im).exp();

    let zr = zeta_two() * riemann_zeta(Complex64::new(1.0, -2.0 * c))?
        / riemann_zeta(Complex64::new(2.0, -2.0 * c))?;

    Ok(-2.0 / lx * sdiff * gr * zr)
}

/// The three components of the lower-order bracket, each before the final
/// division by log X.
#[derive(Debug, Clone, Copy)]
pub struct ExplicitTerms {
    /// -ln pi + Re psi(3/4 + i pi tau / log X)
    pub gamma: f64,
    /// 2 Re zeta'/zeta(1 + 4 pi i tau / log X)
    pub zeta: f64,
    /// 2 Re A'(2 pi i tau / log X)
    pub aprime: f64,
}

impl ExplicitTerms {
    pub fn bracket(&self) -> f64 {
        self.gamma + self.zeta + self.aprime
    }
}

pub fn explicit_terms(tau: f64, x: u64) -> Result<ExplicitTerms> {
    let lx = log_x(x)?;
    let c = TAU * tau / lx;
    let gamma = -PI.ln() + digamma(Complex64::new(0.75, PI * tau / lx))?.re;
    let zeta = if tau == 0.0 {
        // zeta'/zeta(1 + i eps) = -1/(i eps) + gamma_0 + O(eps): the pole is
        // purely imaginary, so the real part tends to Euler's constant
        -2.0 * digamma(Complex64::new(1.0, 0.0))?.re
    } else {
        2.0 * zeta_log_derivative(Complex64::new(1.0, 2.0 * c))?.re
    };
    let aprime = 2.0 * a_prime(Complex64::new(0.0, c)).re;
    Ok(ExplicitTerms { gamma, zeta, aprime })
}

/// Explicit-formula prediction: main term plus bracket / log X.
pub fn explicit_curve(tau: f64, x: u64) -> Result<f64> {
    Ok(main_term(tau) + explicit_terms(tau, x)?.bracket() / log_x(x)?)
}

/// Ratios-conjecture prediction: 1 + Re R(tau) + bracket / log X.
pub fn ratios_curve(tau: f64, x: u64, dx: u64) -> Result<f64> {
    Ok(1.0 + ratios_r_est(tau, x, dx)?.re + explicit_terms(tau, x)?.bracket() / log_x(x)?)
}

/// Even test function g(tau) = sinc^2(pi sigma tau); its Fourier transform
/// is supported in [-sigma, sigma].
#[derive(Debug, Clone, Copy)]
pub struct TestFunction {
    pub sigma: f64,
}

impl TestFunction {
    pub fn new(sigma: f64) -> Result<TestFunction> {
        if !(sigma > 0.0) {
            return Err(QzError::Domain("test function needs sigma > 0"));
        }
        Ok(TestFunction { sigma })
    }

    pub fn eval(&self, tau: f64) -> f64 {
        let w = PI * self.sigma * tau;
        if w.abs() < 1e-6 {
            return 1.0 - w * w / 3.0;
        }
        let s = w.sin() / w;
        s * s
    }
}

// Adaptive Simpson with Richardson correction; depth-capped, which the
// smooth integrands here never reach.
fn simpson_adaptive(
    f: &mut impl FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(
        simpson_adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + simpson_adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?,
    )
}

fn integrate(f: &mut impl FnMut(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    let fa = f(a)?;
    let fm = f(0.5 * (a + b))?;
    let fb = f(b)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_adaptive(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// 2 int_delta^{cutoff} g(u) Re R(u) du: the ratios secondary term paired
/// with the test function over both halves of the spectrum.
pub fn integrate_against_test(
    x: u64,
    dx: u64,
    delta: f64,
    test: &TestFunction,
) -> Result<f64> {
    if !(delta >= TAU_MIN) {
        return Err(QzError::TauTooSmall(TAU_MIN));
    }
    let mut f = |u: f64| Ok(test.eval(u) * ratios_r_est(u, x, dx)?.re);
    let mut total = 0.0;
    let mut lo = delta;
    while lo < INTEGRAL_CUTOFF {
        let hi = (lo + 1.0).min(INTEGRAL_CUTOFF);
        total += integrate(&mut f, lo, hi, 1e-11)?;
        lo = hi;
    }
    Ok(2.0 * total)
}

/// First `count` interior extrema of Re R on a fixed grid, as (tau, value)
/// pairs; grid granularity bounds the location error.
pub fn re_r_est_extrema(
    x: u64,
    dx: u64,
    lo: f64,
    hi: f64,
    step: f64,
    count: usize,
) -> Result<Vec<(f64, f64)>> {
    if !(step > 0.0 && hi > lo && lo >= TAU_MIN) {
        return Err(QzError::Domain("extrema grid must be increasing and past TAU_MIN"));
    }
    let n = ((hi - lo) / step).floor() as usize;
    let mut vals = Vec::with_capacity(n + 1);
    for i in 0..=n {
        vals.push(ratios_r_est(lo + i as f64 * step, x, dx)?.re);
    }
    let mut out = Vec::with_capacity(count);
    for i in 1..n {
        if (vals[i] - vals[i - 1]) * (vals[i + 1] - vals[i]) < 0.0 {
            out.push((lo + i as f64 * step, vals[i]));
            if out.len() >= count {
                break;
            }
        }
    }
    Ok(out)
}

/// Extrema locations of -sin(2 pi tau)/(2 pi tau): roots of tan u = u
/// rescaled by 2 pi. Newton from the (k + 1/2) pi asymptote.
pub fn sinc_extrema(count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    for k in 1..=count {
        let asymptote = (k as f64 + 0.5) * PI;
        let mut u = asymptote - 1.0 / asymptote;
        for _ in 0..60 {
            let t = u.tan();
            let step = (t - u) / (t * t);
            u -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        out.push(u / TAU);
    }
    out
}

/// Zero counts over rescaled ordinates tau = t log X / (2 pi), binned for
/// the whole zero set and for each discriminant's lowest zero.
#[derive(Debug, Clone)]
pub struct Histogram {
    pub tau_max: f64,
    pub bin_width: f64,
    log_x: f64,
    counts_all: Vec<u64>,
    counts_lowest: Vec<u64>,
    discriminants: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct HistogramRow {
    /// Bin midpoint.
    pub tau: f64,
    pub count_all: u64,
    pub count_lowest: u64,
    pub density_all: f64,
    pub density_lowest: f64,
}

impl Histogram {
    pub fn new(tau_max: f64, bin_width: f64, x: u64) -> Result<Histogram> {
        if !(tau_max > 0.0) || !(bin_width > 0.0) || bin_width > tau_max {
            return Err(QzError::Domain("histogram needs 0 < bin width <= tau_max"));
        }
        let bins = (tau_max / bin_width - 1e-9).ceil().max(1.0) as usize;
        Ok(Histogram {
            tau_max,
            bin_width,
            log_x: log_x(x)?,
            counts_all: vec![0; bins],
            counts_lowest: vec![0; bins],
            discriminants: 0,
        })
    }

    fn bin_of(&self, t: f64) -> Option<usize> {
        let tau = t * self.log_x / TAU;
        let idx = (tau / self.bin_width).floor();
        (tau >= 0.0 && idx < self.counts_all.len() as f64).then(|| idx as usize)
    }

    /// Fold in one discriminant's ordinates (ascending). A discriminant
    /// with no zeros in range still widens the denominator.
    pub fn record(&mut self, ordinates: &[f64]) {
        debug_assert!(ordinates.windows(2).all(|w| w[0] <= w[1]));
        self.discriminants += 1;
        for &t in ordinates {
            if let Some(i) = self.bin_of(t) {
                self.counts_all[i] += 1;
            }
        }
        if let Some(i) = ordinates.first().and_then(|&t| self.bin_of(t)) {
            self.counts_lowest[i] += 1;
        }
    }

    pub fn discriminants(&self) -> u64 {
        self.discriminants
    }

    pub fn rows(&self) -> Vec<HistogramRow> {
        let card = self.discriminants.max(1) as f64;
        self.counts_all
            .iter()
            .zip(&self.counts_lowest)
            .enumerate()
            .map(|(i, (&all, &lowest))| HistogramRow {
                tau: (i as f64 + 0.5) * self.bin_width,
                count_all: all,
                count_lowest: lowest,
                density_all: all as f64 / (card * self.bin_width),
                density_lowest: lowest as f64 / (card * self.bin_width),
            })
            .collect()
    }
}
