//! Double-double arithmetic: each value is an unevaluated sum `hi + lo`
//! with `|lo| <= ulp(hi)/2`, giving ~106 significand bits. The error-free
//! transformations are the classical ones (Dekker splitting replaced by FMA).
//!
//! This is the working precision for direct L-sums and head terms, where f64
//! alone would lose the 1e-12 agreement targets to cancellation across
//! thousands of terms. It is not a substitute for [`crate::hp`]: anything the
//! kernel recursion touches stays at 192 bits.

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline(always)]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline(always)]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    // requires |a| >= |b| or a == 0
    let s = a + b;
    (s, b - (s - a))
}

#[inline(always)]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// ldexp without libm: scaling by 2^e, exact while the result stays normal.
#[inline]
pub fn ldexp(mut x: f64, e: i64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    // beyond +-2200 every nonzero finite f64 has already saturated
    let mut e = e.clamp(-2200, 2200);
    while e > 1023 {
        x *= f64::from_bits(2046u64 << 52); // 2^1023
        e -= 1023;
    }
    while e < -1022 {
        x *= f64::from_bits(1u64 << 52); // 2^-1022
        e += 1022;
    }
    x * f64::from_bits(((e + 1023) as u64) << 52)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const PI: Dd = Dd { hi: 3.141592653589793, lo: 1.2246467991473532e-16 };
    pub const TWO_PI: Dd = Dd { hi: 6.283185307179586, lo: 2.4492935982947064e-16 };
    pub const FRAC_PI_2: Dd = Dd { hi: 1.5707963267948966, lo: 6.123233995736766e-17 };
    pub const LN_2: Dd = Dd { hi: 0.6931471805599453, lo: 2.3190468138462996e-17 };

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (s, e) = two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact for |n| < 2^106; everything this crate feeds through here
    /// (moduli, Fibonacci boundaries, squares up to ~2e13) is far below 2^53
    /// anyway, but the two-limb split keeps the constructor total.
    #[inline]
    pub fn from_u64(n: u64) -> Dd {
        let hi = n as f64;
        let lo = if hi as u64 >= n { -((hi as u64 - n) as f64) } else { (n - hi as u64) as f64 };
        Dd::new(hi, lo)
    }

    #[inline]
    pub fn from_i64(n: i64) -> Dd {
        let m = Dd::from_u64(n.unsigned_abs());
        if n < 0 { m.neg() } else { m }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Exact product of two f64s.
    #[inline]
    pub fn mul_exact(a: f64, b: f64) -> Dd {
        let (p, e) = two_prod(a, b);
        Dd { hi: p, lo: e }
    }

    #[inline]
    pub fn add(self, rhs: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let (s1, s2b) = quick_two_sum(s1, s2 + t1);
        let (r1, r2) = quick_two_sum(s1, s2b + t2);
        Dd { hi: r1, lo: r2 }
    }

    #[inline]
    pub fn add_f64(self, rhs: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, rhs);
        let (r1, r2) = quick_two_sum(s1, s2 + self.lo);
        Dd { hi: r1, lo: r2 }
    }

    #[inline]
    pub fn sub(self, rhs: Dd) -> Dd {
        self.add(rhs.neg())
    }

    #[inline]
    pub fn sub_f64(self, rhs: f64) -> Dd {
        self.add_f64(-rhs)
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn mul(self, rhs: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, rhs.hi);
        let p2 = p2 + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (r1, r2) = quick_two_sum(p1, p2);
        Dd { hi: r1, lo: r2 }
    }

    #[inline]
    pub fn mul_f64(self, rhs: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, rhs);
        let (r1, r2) = quick_two_sum(p1, p2 + self.lo * rhs);
        Dd { hi: r1, lo: r2 }
    }

    #[inline]
    pub fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self.sub(rhs.mul_f64(q1));
        let q2 = r.hi / rhs.hi;
        let r = r.sub(rhs.mul_f64(q2));
        let q3 = r.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd::new(s, e + q3)
    }

    #[inline]
    pub fn div_f64(self, rhs: f64) -> Dd {
        self.div(Dd::from_f64(rhs))
    }

    #[inline]
    pub fn recip(self) -> Dd {
        Dd::ONE.div(self)
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) { self.neg() } else { self }
    }

    #[inline]
    pub fn scale2(self, e: i64) -> Dd {
        Dd { hi: ldexp(self.hi, e), lo: ldexp(self.lo, e) }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        debug_assert!(self.hi > 0.0);
        // one Newton step on y0 = sqrt(hi): y1 = (y0 + a/y0)/2
        let y0 = self.hi.sqrt();
        let y = Dd::from_f64(y0).add(self.div_f64(y0)).scale2(-1);
        y
    }

    pub fn powi(self, n: i64) -> Dd {
        if n == 0 {
            return Dd::ONE;
        }
        let mut base = if n < 0 { self.recip() } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(base);
            }
        }
        acc
    }

    /// exp with ~1e-31 relative error for |x| <= 700.
    pub fn exp(self) -> Dd {
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        if self.hi > 709.7 {
            return Dd { hi: f64::INFINITY, lo: 0.0 };
        }
        let m = (self.hi / Dd::LN_2.hi).round();
        let r = self.sub(Dd::LN_2.mul_f64(m)).scale2(-5); // |r| <= ln2/64
        // Taylor to degree 13: next term < (ln2/64)^14/14! ~ 3e-38; five
        // squarings below amplify rounding by only ~2^5
        let mut sum = Dd::ONE;
        let mut term = Dd::ONE;
        for k in 1..=13 {
            term = term.mul(r).div_f64(k as f64);
            sum = sum.add(term);
        }
        for _ in 0..5 {
            sum = sum.mul(sum);
        }
        sum.scale2(m as i64)
    }

    /// natural log; one dd Newton step on the f64 estimate.
    pub fn ln(self) -> Dd {
        debug_assert!(self.hi > 0.0);
        let y = Dd::from_f64(self.hi.ln());
        // y' = y + x*exp(-y) - 1
        y.add(self.mul(y.neg().exp())).sub(Dd::ONE)
    }

    /// expm1 without cancellation for small |x|.
    pub fn expm1(self) -> Dd {
        if self.hi.abs() > 0.4 {
            return self.exp().sub(Dd::ONE);
        }
        // Taylor: x(1 + x/2 + x^2/6 + ...) up to degree 24
        let mut sum = Dd::ONE;
        let mut term = Dd::ONE;
        for k in 2..=24 {
            term = term.mul(self).div_f64(k as f64);
            sum = sum.add(term);
        }
        sum.mul(self)
    }

    /// (sin x, cos x) with argument reduction good to |x| ~ 1e6.
    pub fn sin_cos(self) -> (Dd, Dd) {
        // reduce mod 2pi, then mod pi/2
        let q2 = (self.hi / Dd::TWO_PI.hi).round();
        let r = self.sub(Dd::TWO_PI.mul_f64(q2));
        let q = (r.hi / Dd::FRAC_PI_2.hi).round();
        let u = r.sub(Dd::FRAC_PI_2.mul_f64(q));
        let (s, c) = sin_cos_taylor(u);
        match (q as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, s.neg()),
            2 => (s.neg(), c.neg()),
            _ => (c.neg(), s),
        }
    }

    pub fn sin(self) -> Dd {
        self.sin_cos().0
    }

    pub fn cos(self) -> Dd {
        self.sin_cos().1
    }

    #[inline]
    pub fn lt(self, rhs: Dd) -> bool {
        self.hi < rhs.hi || (self.hi == rhs.hi && self.lo < rhs.lo)
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.hi == 0.0
    }
}

/// Taylor sin/cos on |u| <= pi/4 + epsilon; degree 29/28 keeps the truncation
/// below 4e-35.
fn sin_cos_taylor(u: Dd) -> (Dd, Dd) {
    let u2 = u.mul(u);
    let mut s = Dd::ONE;
    let mut term = Dd::ONE;
    for k in 1..=14 {
        term = term.mul(u2).div_f64((2 * k) as f64 * (2 * k + 1) as f64).neg();
        s = s.add(term);
    }
    let s = s.mul(u);
    let mut c = Dd::ONE;
    term = Dd::ONE;
    for k in 1..=14 {
        term = term.mul(u2).div_f64((2 * k - 1) as f64 * (2 * k) as f64).neg();
        c = c.add(term);
    }
    (s, c)
}

/// Complex double-double. Only the operations the evaluation paths need.
#[derive(Clone, Copy, Debug, Default)]
pub struct DdComplex {
    pub re: Dd,
    pub im: Dd,
}

impl DdComplex {
    pub const ZERO: DdComplex = DdComplex { re: Dd::ZERO, im: Dd::ZERO };
    pub const ONE: DdComplex = DdComplex { re: Dd::ONE, im: Dd::ZERO };

    #[inline]
    pub fn new(re: Dd, im: Dd) -> DdComplex {
        DdComplex { re, im }
    }

    #[inline]
    pub fn from_f64(re: f64, im: f64) -> DdComplex {
        DdComplex { re: Dd::from_f64(re), im: Dd::from_f64(im) }
    }

    #[inline]
    pub fn to_complex64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    #[inline]
    pub fn add(self, rhs: DdComplex) -> DdComplex {
        DdComplex { re: self.re.add(rhs.re), im: self.im.add(rhs.im) }
    }

    #[inline]
    pub fn sub(self, rhs: DdComplex) -> DdComplex {
        DdComplex { re: self.re.sub(rhs.re), im: self.im.sub(rhs.im) }
    }

    #[inline]
    pub fn neg(self) -> DdComplex {
        DdComplex { re: self.re.neg(), im: self.im.neg() }
    }

    #[inline]
    pub fn conj(self) -> DdComplex {
        DdComplex { re: self.re, im: self.im.neg() }
    }

    #[inline]
    pub fn mul(self, rhs: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re.mul(rhs.re).sub(self.im.mul(rhs.im)),
            im: self.re.mul(rhs.im).add(self.im.mul(rhs.re)),
        }
    }

    #[inline]
    pub fn scale(self, k: Dd) -> DdComplex {
        DdComplex { re: self.re.mul(k), im: self.im.mul(k) }
    }

    #[inline]
    pub fn scale_f64(self, k: f64) -> DdComplex {
        DdComplex { re: self.re.mul_f64(k), im: self.im.mul_f64(k) }
    }

    pub fn div(self, rhs: DdComplex) -> DdComplex {
        let den = rhs.re.mul(rhs.re).add(rhs.im.mul(rhs.im));
        let num = self.mul(rhs.conj());
        DdComplex { re: num.re.div(den), im: num.im.div(den) }
    }

    #[inline]
    pub fn add_f64(self, rhs: f64) -> DdComplex {
        DdComplex { re: self.re.add_f64(rhs), im: self.im }
    }

    pub fn recip(self) -> DdComplex {
        let n = self.norm_sqr();
        DdComplex { re: self.re.div(n), im: self.im.neg().div(n) }
    }

    pub fn norm_sqr(self) -> Dd {
        self.re.mul(self.re).add(self.im.mul(self.im))
    }

    /// e^{self} via real exp and sin_cos.
    pub fn exp(self) -> DdComplex {
        let m = self.re.exp();
        let (s, c) = self.im.sin_cos();
        DdComplex { re: m.mul(c), im: m.mul(s) }
    }
}
