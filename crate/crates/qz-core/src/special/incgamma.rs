use num_complex::Complex64;

use super::gamma_hp::{gamma_complete_dd, gamma_hp};
use super::log_gamma;
use crate::dd::{Dd, DdComplex};
use crate::hp::{Hp, HpComplex};
use crate::scaled::ScaledFloat;
use crate::{QzError, Result};

const CF_ITER_CAP: usize = 10_000;
const DD_EPS: f64 = 1e-33;
// Lentz's delta is a ratio of rounded quantities; its distance from 1
// bottoms out at the arithmetic's noise floor (2^-106 for dd), so the
// stopping tolerance must sit above that floor, unlike the series cutoffs.
const DD_CF_TOL: f64 = 4e-32;
const HP_EPS: f64 = 1e-56;

// Euler-Mascheroni to double-double.
const EULER_GAMMA_DD: Dd = Dd { hi: 0.5772156649015329, lo: -4.942915152430645e-18 };

fn expm1_complex_dd(z: DdComplex) -> DdComplex {
    if z.norm_sqr().hi > 0.25 {
        return z.exp().sub(DdComplex::ONE);
    }
    // Nested series: z (1 + z/2 (1 + z/3 (...))), 26 levels for |z| <= 1/2.
    let mut acc = DdComplex::ONE;
    for k in (2..=26u32).rev() {
        acc = DdComplex::ONE.add(acc.mul(z).scale_f64(1.0 / k as f64));
    }
    z.mul(acc)
}

// ---------------------------------------------------------------------------
// double-double engine
// ---------------------------------------------------------------------------

/// Kummer series in G-form: G = x^{-s} Gamma(s) - e^{-x} sum_m x^m / ((s)...(s+m)).
/// Valid away from s in {0, -1}; fastest for x < 6.
fn g_series_dd(s: DdComplex, x: Dd, lnx: Dd, emx: Dd, gamma_s: DdComplex) -> DdComplex {
    let minus_slnx = DdComplex {
        re: lnx.mul(s.re).neg(),
        im: lnx.mul(s.im).neg(),
    };
    let lead = minus_slnx.exp().mul(gamma_s);
    let mut term = DdComplex::ONE.div(s);
    let mut sum = term;
    let mut m = 0u32;
    loop {
        m += 1;
        term = term.scale(x).div(s.add_f64(m as f64));
        sum = sum.add(term);
        if term.norm_sqr().hi < DD_EPS * DD_EPS * sum.norm_sqr().hi || m > 600 {
            break;
        }
    }
    lead.sub(sum.scale(emx))
}

/// Modified Lentz continued fraction in G-form: G = e^{-x} * h with
/// h the classical CF for Gamma(s,x) e^{x} x^{-s}. Requires x > re(s) + 1.
fn g_cf_dd(s: DdComplex, x: Dd, emx: Dd) -> Result<DdComplex> {
    // 1/tiny must stay squarable in dd: the two-product error term of
    // norm_sqr(1e280) is inf - inf = NaN, so 1e-280 is NOT usable here.
    let tiny = 1e-150;
    let mut b = DdComplex::new(x.add_f64(1.0), Dd::ZERO).sub(s);
    let mut c = DdComplex::from_f64(1.0 / tiny, 0.0);
    let mut d = if b.norm_sqr().hi == 0.0 {
        DdComplex::from_f64(1.0 / tiny, 0.0)
    } else {
        b.recip()
    };
    let mut h = d;
    for i in 1..=CF_ITER_CAP {
        let an = s.sub(DdComplex::from_f64(i as f64, 0.0)).scale_f64(i as f64);
        b = b.add_f64(2.0);
        d = b.add(an.mul(d));
        if d.norm_sqr().is_zero() {
            d = DdComplex::from_f64(tiny, 0.0);
        }
        d = d.recip();
        c = b.add(an.div(c));
        if c.norm_sqr().is_zero() {
            c = DdComplex::from_f64(tiny, 0.0);
        }
        let del = c.mul(d);
        h = h.mul(del);
        let dev = del.sub(DdComplex::ONE).norm_sqr().hi;
        if dev < DD_CF_TOL * DD_CF_TOL {
            return Ok(h.scale(emx));
        }
    }
    Err(QzError::CfDivergence(CF_ITER_CAP))
}

/// Near s = 0 (|s| <= 1/4): the pole of Gamma(s) and the 1/s of the series
/// cancel; group them as [ (Gamma(s+1) - 1) - expm1(s ln x) ] / s before
/// dividing. Gamma(s+1) - 1 comes from the 192-bit Stirling path, so the
/// subtraction costs ~1e-58 absolute; accuracy degrades gracefully only
/// below |s| ~ 1e-40.
fn g_near_zero_dd(s: DdComplex, x: Dd, lnx: Dd) -> DdComplex {
    let slnx = DdComplex { re: lnx.mul(s.re), im: lnx.mul(s.im) };
    let a = if s.norm_sqr().is_zero() {
        // Gamma(0,x) = E1(x): limit value -gamma - ln x for the grouped term.
        DdComplex::new(EULER_GAMMA_DD.neg().sub(lnx), Dd::ZERO)
    } else {
        let gm1 = gamma_hp(&HpComplex::from_dd(s).add_real(&Hp::one()))
            .sub(&HpComplex::one())
            .to_dd();
        gm1.sub(expm1_complex_dd(slnx)).div(s)
    };
    // Gamma(s,x) = a*x^s - x^s sum_{m>=1} (-x)^m/(m! (s+m));
    // in G-form the x^{-s} prefactor cancels onto the sum only.
    let mut sum = DdComplex::ZERO;
    let mut p = Dd::ONE;
    let mut m = 0u32;
    loop {
        m += 1;
        p = p.mul(x).div_f64(-(m as f64));
        let term = DdComplex::new(p, Dd::ZERO).div(s.add_f64(m as f64));
        sum = sum.add(term);
        if p.hi.abs() < DD_EPS * (m as f64) || m > 400 {
            break;
        }
    }
    let xms = slnx.neg().exp();
    xms.mul(a).sub(sum)
}

/// Dispatch for G(s,x) = x^{-s} Gamma(s,x) in double-double. `gamma_s`
/// feeds the series branch; pass None to have it computed on demand.
pub fn g_kernel_dd(
    s: DdComplex,
    x: Dd,
    lnx: Dd,
    emx: Dd,
    gamma_s: Option<&DdComplex>,
) -> Result<DdComplex> {
    if !(x.hi > 0.0) {
        return Err(QzError::Domain("kernel requires x > 0"));
    }
    let near0 = s.norm_sqr().hi <= 0.0625;
    let near1 = s.add_f64(1.0).norm_sqr().hi <= 0.0625;
    if x.hi >= 6.0 && x.hi > s.re.hi + 1.0 {
        return g_cf_dd(s, x, emx);
    }
    if near0 {
        return Ok(g_near_zero_dd(s, x, lnx));
    }
    if near1 {
        // G(s,x) = (x G(s+1,x) - e^{-x}) / s, stepping down from the
        // guarded neighborhood of 0.
        let up = g_near_zero_dd(s.add_f64(1.0), x, lnx);
        return Ok(up.scale(x).sub(DdComplex::new(emx, Dd::ZERO)).div(s));
    }
    let g = match gamma_s {
        Some(g) => *g,
        None => gamma_complete_dd(s),
    };
    Ok(g_series_dd(s, x, lnx, emx, g))
}

// ---------------------------------------------------------------------------
// 192-bit engine (kernel recursion support)
// ---------------------------------------------------------------------------

fn g_series_hp(s: &HpComplex, x: &Hp, lnx: &Hp, emx: &Hp, gamma_s: &HpComplex) -> HpComplex {
    let minus_slnx = HpComplex {
        re: s.re.mul(lnx).neg(),
        im: s.im.mul(lnx).neg(),
    };
    let lead = minus_slnx.exp().mul(gamma_s);
    let mut term = s.recip();
    let mut sum = term.clone();
    let mut m = 0u32;
    let eps2 = HP_EPS * HP_EPS;
    loop {
        m += 1;
        term = term.scale(x).div(&s.add_real(&Hp::from_f64(m as f64)));
        sum = sum.add(&term);
        let t2 = term.norm_sqr().to_f64();
        let s2 = sum.norm_sqr().to_f64();
        if t2 < eps2 * s2 || m > 1200 {
            break;
        }
    }
    lead.sub(&sum.scale(emx))
}

fn g_cf_hp(s: &HpComplex, x: &Hp, emx: &Hp) -> Result<HpComplex> {
    let tiny = Hp::parse("1e-4900");
    let mut b = HpComplex {
        re: x.add_f64(1.0).sub(&s.re),
        im: s.im.neg(),
    };
    let mut c = HpComplex { re: tiny.recip(), im: Hp::zero() };
    let mut d = if b.norm_sqr().is_zero() {
        HpComplex { re: tiny.recip(), im: Hp::zero() }
    } else {
        b.recip()
    };
    let mut h = d.clone();
    let eps2 = HP_EPS * HP_EPS;
    for i in 1..=CF_ITER_CAP {
        let fi = Hp::from_f64(i as f64);
        let an = HpComplex {
            re: s.re.sub(&fi).mul(&fi),
            im: s.im.mul(&fi),
        };
        b.re = b.re.add_f64(2.0);
        d = b.add(&an.mul(&d));
        if d.norm_sqr().to_f64() == 0.0 {
            d = HpComplex { re: tiny.clone(), im: Hp::zero() };
        }
        d = d.recip();
        let cr = b.add(&an.div(&c));
        c = if cr.norm_sqr().to_f64() == 0.0 {
            HpComplex { re: tiny.clone(), im: Hp::zero() }
        } else {
            cr
        };
        let del = c.mul(&d);
        h = h.mul(&del);
        let dev = del.sub(&HpComplex::one()).norm_sqr().to_f64();
        if dev < eps2 {
            return Ok(h.scale(emx));
        }
    }
    Err(QzError::CfDivergence(CF_ITER_CAP))
}

/// G(s,x) at 192 bits. Covers the kernel recursion's seed range
/// (s bounded away from the non-positive integers); s within 1/4 of
/// {0, -1} is rejected rather than silently degraded.
pub fn g_kernel_hp(s: &HpComplex, x: &Hp) -> Result<HpComplex> {
    let xf = x.to_f64();
    if !(xf > 0.0) {
        return Err(QzError::Domain("kernel requires x > 0"));
    }
    let sre = s.re.to_f64();
    let sim = s.im.to_f64();
    if xf >= 6.0 && xf > sre + 1.0 {
        let emx = x.neg().exp();
        return g_cf_hp(s, x, &emx);
    }
    if sre * sre + sim * sim <= 0.0625 || (sre + 1.0) * (sre + 1.0) + sim * sim <= 0.0625 {
        return Err(QzError::Domain(
            "high-precision kernel path does not cover s near non-positive integers",
        ));
    }
    let lnx = x.ln();
    let emx = x.neg().exp();
    let gamma_s = gamma_hp(s);
    Ok(g_series_hp(s, x, &lnx, &emx, &gamma_s))
}

/// Forward recursion G(s+k+1,x) = (e^{-x} + (s+k) G(s+k,x))/x carried out
/// entirely at 192 bits, emitting Re G(s+k,x) as scaled floats (the
/// evaluator folds the (-1)^k/k! factors itself). `g0` seeds k = 0.
pub fn kernel_re_sequence_hp(
    s: &HpComplex,
    x: &Hp,
    emx: &Hp,
    g0: HpComplex,
    order: usize,
    out: &mut Vec<ScaledFloat>,
) {
    out.clear();
    let xinv = x.recip();
    let mut g = g0;
    let mut sk = s.clone();
    out.push(g.re.to_scaled());
    for _ in 0..order {
        let num = g.mul(&sk);
        g = HpComplex {
            re: num.re.add(emx).mul(&xinv),
            im: num.im.mul(&xinv),
        };
        sk = sk.add_real(&Hp::one());
        out.push(g.re.to_scaled());
    }
}

// ---------------------------------------------------------------------------
// public f64 surface
// ---------------------------------------------------------------------------

/// G(s,x) = x^{-s} Gamma(s,x) rounded to f64 precision.
pub fn g_kernel(s: Complex64, x: f64) -> Result<Complex64> {
    let sdd = DdComplex::from_f64(s.re, s.im);
    let xdd = Dd::from_f64(x);
    if !(x > 0.0) {
        return Err(QzError::Domain("kernel requires x > 0"));
    }
    let g = g_kernel_dd(sdd, xdd, xdd.ln(), xdd.neg().exp(), None)?.to_complex64();
    if g.re.is_finite() && g.im.is_finite() {
        Ok(g)
    } else {
        Err(QzError::Overflow("kernel value"))
    }
}

/// Upper incomplete gamma Gamma(s,x), double-double internally. The
/// supported box is x > 0 (x = 0 allowed when re(s) > 0), -1 <= re(s)
/// <= 200, |im(s)| <= 2; the series/continued-fraction switch sits at
/// x = 6 as long as x exceeds re(s) + 1.
pub fn upper_incomplete_gamma(s: Complex64, x: f64) -> Result<Complex64> {
    if !s.re.is_finite() || !s.im.is_finite() || !x.is_finite() {
        return Err(QzError::Domain("upper_incomplete_gamma: non-finite argument"));
    }
    if !(-1.0..=200.0).contains(&s.re) || s.im.abs() > 2.0 {
        return Err(QzError::Domain("upper_incomplete_gamma: s outside supported box"));
    }
    if x < 0.0 {
        return Err(QzError::Domain("upper_incomplete_gamma requires x >= 0"));
    }
    if x == 0.0 {
        if s.re > 0.0 {
            return Ok(gamma_complete_dd(DdComplex::from_f64(s.re, s.im)).to_complex64());
        }
        return Err(QzError::Domain("Gamma(s,0) diverges for re(s) <= 0"));
    }
    let sdd = DdComplex::from_f64(s.re, s.im);
    let xdd = Dd::from_f64(x);
    let lnx = xdd.ln();
    let g = g_kernel_dd(sdd, xdd, lnx, xdd.neg().exp(), None)?;
    // Gamma(s,x) = x^s G(s,x).
    let xs = DdComplex { re: lnx.mul(sdd.re), im: lnx.mul(sdd.im) }.exp();
    let v = xs.mul(g).to_complex64();
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(QzError::Overflow("upper_incomplete_gamma value"))
    }
}

/// Derivative sequence entry k = G^{(k)}(s,x) = (-1)^k G(s+k,x), one
/// incomplete-gamma evaluation for k = 0 and the 192-bit forward
/// recursion beyond.
pub fn kernel_derivative_sequence(s: Complex64, x: f64, order: usize) -> Result<Vec<Complex64>> {
    if order > 256 {
        return Err(QzError::Domain("kernel order cap is 256"));
    }
    if !(x > 0.0) || !s.re.is_finite() || !s.im.is_finite() {
        return Err(QzError::Domain("kernel requires finite s and x > 0"));
    }
    let shp = HpComplex::from_f64(s.re, s.im);
    let xhp = Hp::from_f64(x);
    let emx = xhp.neg().exp();
    let g0 = g_kernel_hp(&shp, &xhp)?;
    let xinv = xhp.recip();
    let mut out = Vec::with_capacity(order + 1);
    let mut g = g0;
    let mut sk = shp;
    for k in 0..=order {
        let v = g.to_complex64();
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(QzError::Overflow("kernel derivative sequence entry"));
        }
        out.push(if k % 2 == 0 { v } else { -v });
        if k < order {
            let num = g.mul(&sk);
            g = HpComplex {
                re: num.re.add(&emx).mul(&xinv),
                im: num.im.mul(&xinv),
            };
            sk = sk.add_real(&Hp::one());
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// real incomplete gamma in log space (planning + remainder bounds)
// ---------------------------------------------------------------------------

pub(crate) fn ln_gamma_real(a: f64) -> f64 {
    log_gamma(Complex64::new(a, 0.0)).map(|v| v.re).unwrap_or(f64::NAN)
}

/// ln Gamma(a,x) for real a > 0, x >= 0. Series below x = a+1, Lentz
/// continued fraction above; works far outside f64 range (returns the log).
pub fn ln_upper_gamma_real(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !(x >= 0.0) || !a.is_finite() || !x.is_finite() {
        return Err(QzError::Domain("ln_upper_gamma_real requires a > 0, x >= 0"));
    }
    if x == 0.0 {
        return Ok(ln_gamma_real(a));
    }
    let lg = ln_gamma_real(a);
    if x < a + 1.0 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..100_000 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        let ln_lower = a * x.ln() - x + sum.ln();
        let p = (ln_lower - lg).exp();
        // P(a,x) < 1 strictly here; the complement stays well-conditioned.
        Ok(lg + (-p).ln_1p())
    } else {
        let tiny = 1e-290;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=CF_ITER_CAP {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 3e-16 {
                return Ok(a * x.ln() - x + h.ln());
            }
        }
        Err(QzError::CfDivergence(CF_ITER_CAP))
    }
}

// ---------------------------------------------------------------------------
// Taylor remainder bounds
// ---------------------------------------------------------------------------

fn check_taylor_args(b: u32, x: f64, x0: f64) -> Result<()> {
    if b == 0 || !(x0 > 0.0) || !(x >= x0) || !x.is_finite() {
        return Err(QzError::Domain("taylor bound requires B >= 1, 0 < x0 <= x"));
    }
    Ok(())
}

/// ((x/x0 - 1)^B / B!) * Gamma(B, x0): the planning estimate used for the
/// per-interval remainder assertions. See `taylor_remainder_bound_shifted`
/// for the variant that provably dominates the measured remainder of
/// G(s, .) for s in the critical strip.
pub fn taylor_remainder_bound(b: u32, x: f64, x0: f64) -> Result<f64> {
    check_taylor_args(b, x, x0)?;
    let r = x / x0 - 1.0;
    if r == 0.0 {
        return Ok(0.0);
    }
    let ln = b as f64 * r.ln() - ln_gamma_real(b as f64 + 1.0) + ln_upper_gamma_real(b as f64, x0)?;
    Ok(ln.exp())
}

/// The weaker closed form (x/x0 - 1)^B / B.
pub fn taylor_remainder_bound_weak(b: u32, x: f64, x0: f64) -> Result<f64> {
    check_taylor_args(b, x, x0)?;
    let r = x / x0 - 1.0;
    Ok(r.powi(b as i32) / b as f64)
}

/// ((x/x0 - 1)^B / B!) * x0^{-s_re} * Gamma(s_re + B, x0). Integral-form
/// bound for the order-B truncation remainder of the Taylor expansion of
/// G(s, .) about x0, valid for re(s) = s_re <= 1: |G(s+B, u)| decreases in
/// u, so the remainder integral is bounded by its value at x0.
pub fn taylor_remainder_bound_shifted(b: u32, x: f64, x0: f64, s_re: f64) -> Result<f64> {
    check_taylor_args(b, x, x0)?;
    if b as f64 + s_re <= 0.0 {
        return Err(QzError::Domain("shifted taylor bound requires B + s_re > 0"));
    }
    let r = x / x0 - 1.0;
    if r == 0.0 {
        return Ok(0.0);
    }
    let ln = b as f64 * r.ln() - ln_gamma_real(b as f64 + 1.0) - s_re * x0.ln()
        + ln_upper_gamma_real(b as f64 + s_re, x0)?;
    Ok(ln.exp())
}
