use super::{LaurentPoly, QuadScalar};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Quotient of integer Laurent polynomials in `v`, kept in lowest terms.
///
/// Canonical form: `num/den` with `gcd(num, den)` a unit, the denominator
/// shifted to minimal exponent 0, and its leading coefficient positive.
/// Construction with a zero denominator panics; use [`RationalFn::checked_new`]
/// when the denominator comes from outside.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalFn {
    num: LaurentPoly,
    den: LaurentPoly,
}

impl RationalFn {
    pub fn zero() -> Self {
        RationalFn { num: LaurentPoly::zero(), den: LaurentPoly::one() }
    }

    pub fn one() -> Self {
        RationalFn { num: LaurentPoly::one(), den: LaurentPoly::one() }
    }

    pub fn from_laurent(p: LaurentPoly) -> Self {
        RationalFn { num: p, den: LaurentPoly::one() }
    }

    pub fn from_big_rational(r: &BigRational) -> Self {
        Self::new(
            LaurentPoly::monomial(0, r.numer().clone()),
            LaurentPoly::monomial(0, r.denom().clone()),
        )
    }

    pub fn new(num: LaurentPoly, den: LaurentPoly) -> Self {
        Self::checked_new(num, den).expect("zero denominator")
    }

    pub fn checked_new(num: LaurentPoly, den: LaurentPoly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        if num.is_zero() {
            return Some(Self::zero());
        }
        let g = num.gcd(&den);
        let mut num = num.exact_div(&g).expect("gcd divides");
        let mut den = den.exact_div(&g).expect("gcd divides");
        // Absorb the unit: force den to start at exponent 0 with positive lead.
        let k = den.min_exp().unwrap();
        den = den.shifted(-k);
        num = num.shifted(-k);
        if den.coeff(den.max_exp().unwrap()).is_negative() {
            num = -num;
            den = -den;
        }
        Some(RationalFn { num, den })
    }

    pub fn num(&self) -> &LaurentPoly {
        &self.num
    }

    pub fn den(&self) -> &LaurentPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `Some` exactly when the value is a Laurent polynomial.
    pub fn as_laurent(&self) -> Option<LaurentPoly> {
        if self.den.is_one() {
            Some(self.num.clone())
        } else {
            None
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        Self::checked_new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, rhs: &RationalFn) -> Option<Self> {
        rhs.inverse().map(|inv| self * &inv)
    }

    pub fn scaled(&self, r: &BigRational) -> Self {
        self * &Self::from_big_rational(r)
    }

    /// Value at `v = sqrt(q)`; `None` when the denominator vanishes there.
    pub fn eval_sqrt(&self, q: u32) -> Option<QuadScalar> {
        let d = self.den.eval_sqrt(q);
        self.num.eval_sqrt(q).div(&d)
    }

    /// The constant term as a rational number, when the value is a rational
    /// constant (no dependence on `v`).
    pub fn as_constant(&self) -> Option<BigRational> {
        let nc = match self.num.max_exp() {
            None => return Some(BigRational::zero()),
            Some(0) if self.num.min_exp() == Some(0) => self.num.coeff(0),
            _ => return None,
        };
        if self.den.max_exp() == Some(0) {
            Some(BigRational::new(nc, self.den.coeff(0)))
        } else {
            None
        }
    }

    /// Power-series expansion at `v = ∞`: the coefficients of
    /// `v^0, v^-1, …, v^-order`. `None` when the function has a pole there
    /// (numerator degree exceeding denominator degree).
    pub fn expand_at_infinity(&self, order: usize) -> Option<Vec<BigRational>> {
        if self.num.is_zero() {
            return Some(vec![BigRational::zero(); order + 1]);
        }
        let nd = self.num.max_exp().unwrap();
        let dd = self.den.max_exp().unwrap();
        if nd > dd {
            return None;
        }
        // In u = 1/v both become ordinary power series once shifted by the
        // denominator degree; the quotient is then a series division with an
        // invertible constant term.
        let num_u = |k: i64| BigRational::from_integer(self.num.coeff(dd - k));
        let den_u = |k: i64| BigRational::from_integer(self.den.coeff(dd - k));
        let d0 = den_u(0);
        debug_assert!(!d0.is_zero());
        let mut out: Vec<BigRational> = Vec::with_capacity(order + 1);
        for k in 0..=order as i64 {
            let mut c = num_u(k);
            for (j, prev) in out.iter().enumerate() {
                c -= prev * den_u(k - j as i64);
            }
            out.push(c / &d0);
        }
        Some(out)
    }
}

impl Default for RationalFn {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<LaurentPoly> for RationalFn {
    fn from(p: LaurentPoly) -> Self {
        Self::from_laurent(p)
    }
}

impl From<i64> for RationalFn {
    fn from(n: i64) -> Self {
        Self::from_laurent(LaurentPoly::constant(n))
    }
}

impl<'a> Add for &'a RationalFn {
    type Output = RationalFn;
    fn add(self, rhs: &'a RationalFn) -> RationalFn {
        RationalFn::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl<'a> Sub for &'a RationalFn {
    type Output = RationalFn;
    fn sub(self, rhs: &'a RationalFn) -> RationalFn {
        RationalFn::new(
            &(&self.num * &rhs.den) - &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl<'a> Mul for &'a RationalFn {
    type Output = RationalFn;
    fn mul(self, rhs: &'a RationalFn) -> RationalFn {
        RationalFn::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl<'a> Neg for &'a RationalFn {
    type Output = RationalFn;
    fn neg(self) -> RationalFn {
        RationalFn { num: -&self.num, den: self.den.clone() }
    }
}

impl Neg for RationalFn {
    type Output = RationalFn;
    fn neg(self) -> RationalFn {
        -&self
    }
}

impl fmt::Display for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}
