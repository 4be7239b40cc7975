//! Software-scaled floating point: value = (hi + lo) * 2^exp with the
//! double-double significand normalized so |hi| is in [1, 2). Products of
//! interval coefficients, power-ratio weights and kernel derivatives span
//! thousands of binary orders of magnitude in both directions; this type
//! keeps every intermediate representable while the final assembled sums
//! collapse back into f64 range.

use crate::dd::{ldexp, Dd};

#[derive(Clone, Copy, Debug, Default)]
pub struct ScaledFloat {
    pub hi: f64,
    pub lo: f64,
    pub exp: i64,
}

impl ScaledFloat {
    pub const ZERO: ScaledFloat = ScaledFloat { hi: 0.0, lo: 0.0, exp: 0 };

    pub fn from_dd(d: Dd) -> ScaledFloat {
        ScaledFloat { hi: d.hi, lo: d.lo, exp: 0 }.normalized()
    }

    pub fn from_f64(x: f64) -> ScaledFloat {
        ScaledFloat { hi: x, lo: 0.0, exp: 0 }.normalized()
    }

    pub fn new(hi: f64, lo: f64, exp: i64) -> ScaledFloat {
        ScaledFloat { hi, lo, exp }.normalized()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.hi == 0.0
    }

    #[inline]
    pub fn significand(&self) -> Dd {
        Dd { hi: self.hi, lo: self.lo }
    }

    /// Restore |hi| in [1, 2). The shift is read off the exponent bits, so
    /// this costs no transcendental calls.
    fn normalized(self) -> ScaledFloat {
        if self.hi == 0.0 {
            return ScaledFloat::ZERO;
        }
        let e = ((self.hi.abs().to_bits() >> 52) & 0x7ff) as i64 - 1023;
        debug_assert!(e > -1023, "significand drifted subnormal");
        if e == 0 {
            return self;
        }
        ScaledFloat {
            hi: ldexp(self.hi, -e),
            lo: ldexp(self.lo, -e),
            exp: self.exp + e,
        }
    }

    pub fn neg(self) -> ScaledFloat {
        ScaledFloat { hi: -self.hi, lo: -self.lo, exp: self.exp }
    }

    pub fn mul(self, rhs: ScaledFloat) -> ScaledFloat {
        if self.is_zero() || rhs.is_zero() {
            return ScaledFloat::ZERO;
        }
        let sig = self.significand().mul(rhs.significand());
        ScaledFloat { hi: sig.hi, lo: sig.lo, exp: self.exp + rhs.exp }.normalized()
    }

    pub fn mul_dd(self, rhs: Dd) -> ScaledFloat {
        if self.is_zero() || rhs.is_zero() {
            return ScaledFloat::ZERO;
        }
        let sig = self.significand().mul(rhs);
        ScaledFloat { hi: sig.hi, lo: sig.lo, exp: self.exp }.normalized()
    }

    pub fn add(self, rhs: ScaledFloat) -> ScaledFloat {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.exp >= rhs.exp { (self, rhs) } else { (rhs, self) };
        let shift = small.exp - big.exp; // <= 0
        if shift < -110 {
            return big; // below one ulp of the double-double significand
        }
        let sig = big
            .significand()
            .add(Dd { hi: ldexp(small.hi, shift), lo: ldexp(small.lo, shift) });
        ScaledFloat { hi: sig.hi, lo: sig.lo, exp: big.exp }.normalized()
    }

    pub fn sub(self, rhs: ScaledFloat) -> ScaledFloat {
        self.add(rhs.neg())
    }

    /// Collapse to f64; saturates to 0 / +-inf outside the representable range.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        if self.exp > 1025 {
            return if self.hi > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        if self.exp < -1080 {
            return 0.0;
        }
        ldexp(self.hi + self.lo, self.exp)
    }

    /// log2 of |value|, for diagnostics and envelope comparisons.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.exp as f64 + (self.hi + self.lo).abs().log2()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_roundtrip() {
        let v = ScaledFloat::from_f64(0.0078125); // 2^-7
        assert_eq!(v.hi, 1.0);
        assert_eq!(v.exp, -7);
        assert_eq!(v.to_f64(), 0.0078125);
        let w = ScaledFloat::from_f64(-1536.0);
        assert_eq!(w.hi, -1.5);
        assert_eq!(w.exp, 10);
        assert_eq!(w.to_f64(), -1536.0);
    }

    #[test]
    fn mul_far_out_of_f64_range() {
        // (2^900)^3 = 2^2700 overflows f64 but must survive here
        let v = ScaledFloat::new(1.0, 0.0, 900);
        let c = v.mul(v).mul(v);
        assert_eq!(c.exp, 2700);
        assert_eq!(c.hi, 1.0);
        assert!(c.to_f64().is_infinite());
        let inv = ScaledFloat::new(1.0, 0.0, -2700);
        assert_eq!(c.mul(inv).to_f64(), 1.0);
    }

    #[test]
    fn add_alignment() {
        let a = ScaledFloat::from_f64(3.0);
        let b = ScaledFloat::from_f64(0.1875);
        assert_eq!(a.add(b).to_f64(), 3.1875);
        // swallowing a value below the significand width
        let tiny = ScaledFloat::new(1.0, 0.0, -200);
        assert_eq!(a.add(tiny).to_f64(), 3.0);
        // cancellation renormalizes
        let c = a.sub(ScaledFloat::from_f64(2.999999999999999));
        assert!((c.to_f64() - (3.0 - 2.999999999999999)).abs() < 1e-30);
    }

    #[test]
    fn sum_accuracy_relative_1e18() {
        // alternating ill-scaled sum, checked against exact rational bookkeeping
        let mut acc = ScaledFloat::ZERO;
        for k in 0..60i64 {
            let term = ScaledFloat::new(if k % 2 == 0 { 1.25 } else { -1.25 }, 0.0, k - 30);
            acc = acc.add(term);
        }
        // sum = 1.25 * sum_{k=0}^{59} (-1)^k 2^{k-30} = 1.25 * (2^30 - 2^-30) * (2^60... )
        // geometric: sum (-2)^k = (1 - 2^60)/(1 + 2) -> exact value 1.25*2^-30*(1-2^60)/3
        let exact = 1.25 * 2f64.powi(-30) * (1.0 - 2f64.powi(60)) / 3.0;
        let got = acc.to_f64();
        assert!(((got - exact) / exact).abs() < 1e-18);
    }
}
