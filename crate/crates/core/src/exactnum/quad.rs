use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Exact scalar `a + b*sqrt(q)` with rational `a`, `b`, for a fixed prime `q`.
///
/// This is the value domain for Laurent polynomials in `v` evaluated at
/// `v = sqrt(q)`: even powers of `v` land in the rational part, odd powers in
/// the `sqrt(q)` part. Division is exact (conjugate trick), so the type is a
/// field.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QuadScalar {
    pub q: u32,
    pub a: BigRational,
    pub b: BigRational,
}

impl QuadScalar {
    pub fn zero(q: u32) -> Self {
        QuadScalar { q, a: BigRational::zero(), b: BigRational::zero() }
    }

    pub fn one(q: u32) -> Self {
        QuadScalar { q, a: BigRational::one(), b: BigRational::zero() }
    }

    pub fn from_rational(q: u32, a: BigRational) -> Self {
        QuadScalar { q, a, b: BigRational::zero() }
    }

    pub fn from_int(q: u32, n: i64) -> Self {
        Self::from_rational(q, BigRational::from_integer(BigInt::from(n)))
    }

    /// `sqrt(q)^e`, also for negative `e`.
    pub fn v_pow(q: u32, e: i64) -> Self {
        let qi = BigInt::from(q);
        let half = e.div_euclid(2);
        let rem = e.rem_euclid(2);
        let scale = if half >= 0 {
            BigRational::from_integer(qi.pow(half as u32))
        } else {
            BigRational::new(BigInt::one(), qi.pow((-half) as u32))
        };
        if rem == 0 {
            QuadScalar { q, a: scale, b: BigRational::zero() }
        } else {
            QuadScalar { q, a: BigRational::zero(), b: scale }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// True when the `sqrt(q)` part vanishes.
    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// The rational part; panics if the scalar has a `sqrt(q)` component.
    pub fn expect_rational(&self) -> BigRational {
        assert!(self.b.is_zero(), "scalar {} has an irrational part", self);
        self.a.clone()
    }

    pub fn scaled(&self, r: &BigRational) -> Self {
        QuadScalar { q: self.q, a: &self.a * r, b: &self.b * r }
    }

    pub fn scaled_int(&self, n: &BigInt) -> Self {
        self.scaled(&BigRational::from_integer(n.clone()))
    }

    pub fn inverse(&self) -> Option<Self> {
        // (a + b s)^-1 = (a - b s) / (a^2 - q b^2); the norm is nonzero for
        // nonzero input because q is not a rational square.
        if self.is_zero() {
            return None;
        }
        let qr = BigRational::from_integer(BigInt::from(self.q));
        let norm = &(&self.a * &self.a) - &(&(&self.b * &self.b) * &qr);
        debug_assert!(!norm.is_zero());
        Some(QuadScalar { q: self.q, a: &self.a / &norm, b: -(&self.b / &norm) })
    }

    pub fn div(&self, rhs: &QuadScalar) -> Option<Self> {
        rhs.inverse().map(|inv| self * &inv)
    }

    fn check_base(&self, other: &QuadScalar) {
        assert_eq!(self.q, other.q, "mixed base fields: q={} vs q={}", self.q, other.q);
    }
}

impl<'a> Add for &'a QuadScalar {
    type Output = QuadScalar;
    fn add(self, rhs: &'a QuadScalar) -> QuadScalar {
        self.check_base(rhs);
        QuadScalar { q: self.q, a: &self.a + &rhs.a, b: &self.b + &rhs.b }
    }
}

impl<'a> Sub for &'a QuadScalar {
    type Output = QuadScalar;
    fn sub(self, rhs: &'a QuadScalar) -> QuadScalar {
        self.check_base(rhs);
        QuadScalar { q: self.q, a: &self.a - &rhs.a, b: &self.b - &rhs.b }
    }
}

impl<'a> Mul for &'a QuadScalar {
    type Output = QuadScalar;
    fn mul(self, rhs: &'a QuadScalar) -> QuadScalar {
        self.check_base(rhs);
        let qr = BigRational::from_integer(BigInt::from(self.q));
        QuadScalar {
            q: self.q,
            a: &(&self.a * &rhs.a) + &(&(&self.b * &rhs.b) * &qr),
            b: &(&self.a * &rhs.b) + &(&self.b * &rhs.a),
        }
    }
}

impl<'a> Neg for &'a QuadScalar {
    type Output = QuadScalar;
    fn neg(self) -> QuadScalar {
        QuadScalar { q: self.q, a: -self.a.clone(), b: -self.b.clone() }
    }
}

impl fmt::Display for QuadScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if self.a.is_zero() {
            return write!(f, "{}*sqrt({})", self.b, self.q);
        }
        write!(f, "{} + {}*sqrt({})", self.a, self.b, self.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn v_powers() {
        let s = QuadScalar::v_pow(2, 2);
        assert_eq!(s, QuadScalar::from_int(2, 2));
        let s = QuadScalar::v_pow(2, 3);
        assert_eq!(s.a, rat(0, 1));
        assert_eq!(s.b, rat(2, 1)); // 2*sqrt(2)
        let s = QuadScalar::v_pow(3, -2);
        assert_eq!(s.a, rat(1, 3));
        let s = QuadScalar::v_pow(3, -1);
        assert_eq!(s.b, rat(1, 3)); // 1/sqrt(3) = sqrt(3)/3
        assert_eq!(&s * &QuadScalar::v_pow(3, 1), QuadScalar::one(3));
    }

    #[test]
    fn field_ops() {
        let x = QuadScalar { q: 5, a: rat(1, 2), b: rat(3, 1) };
        let y = x.inverse().unwrap();
        assert_eq!(&x * &y, QuadScalar::one(5));
        assert!(QuadScalar::zero(5).inverse().is_none());
        let z = &x - &x;
        assert!(z.is_zero());
    }

    #[test]
    fn rational_extraction() {
        let x = QuadScalar::from_rational(7, rat(22, 7));
        assert!(x.is_rational());
        assert_eq!(x.expect_rational(), rat(22, 7));
    }
}
