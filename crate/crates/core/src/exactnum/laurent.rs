use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Integer Laurent polynomial in the variable `v`.
///
/// Canonical form: sorted exponent map with no zero coefficients, so equality
/// and hashing are structural. Exponents may be negative.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::monomial(0, BigInt::one())
    }

    /// `c * v^exp`.
    pub fn monomial(exp: i64, coeff: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exp, coeff);
        }
        LaurentPoly { terms }
    }

    /// `v^exp`.
    pub fn v_pow(exp: i64) -> Self {
        Self::monomial(exp, BigInt::one())
    }

    pub fn from_terms(terms: &[(i64, i64)]) -> Self {
        let mut p = LaurentPoly::zero();
        for &(e, c) in terms {
            p.add_term(e, BigInt::from(c));
        }
        p
    }

    pub fn constant(c: i64) -> Self {
        Self::monomial(0, BigInt::from(c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).map_or(false, |c| c.is_one())
    }

    pub fn coeff(&self, exp: i64) -> BigInt {
        self.terms.get(&exp).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Iterate `(exponent, coefficient)` in ascending exponent order.
    pub fn iter(&self) -> impl Iterator<Item = (&i64, &BigInt)> {
        self.terms.iter()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn add_term(&mut self, exp: i64, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(BigInt::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    /// Multiply by `v^k`.
    pub fn shifted(&self, k: i64) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    /// Substitute `v -> v^-1`.
    pub fn bar(&self) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (-e, c.clone())).collect(),
        }
    }

    pub fn pow(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = LaurentPoly::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            n >>= 1;
        }
        acc
    }

    /// Gcd of all coefficients (nonnegative); zero for the zero polynomial.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Exact division; `None` when `other` is zero or does not divide `self`.
    pub fn exact_div(&self, other: &LaurentPoly) -> Option<LaurentPoly> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(LaurentPoly::zero());
        }
        let a_min = self.min_exp().unwrap();
        let b_min = other.min_exp().unwrap();
        let a = self.to_dense(a_min);
        let b = other.to_dense(b_min);
        let (quot, rem) = dense_divmod(&a, &b)?;
        if !rem.iter().all(|c| c.is_zero()) {
            return None;
        }
        let mut out = LaurentPoly::zero();
        for (i, c) in quot.iter().enumerate() {
            if !c.is_zero() {
                if !c.is_integer() {
                    return None;
                }
                out.add_term(a_min - b_min + i as i64, c.to_integer());
            }
        }
        Some(out)
    }

    /// Gcd in `Z[v, v^-1]`, normalized to minimal exponent 0 and positive
    /// leading coefficient. Includes the integer content gcd.
    pub fn gcd(&self, other: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() {
            return other.normalized_assoc();
        }
        if other.is_zero() {
            return self.normalized_assoc();
        }
        let ca = self.content();
        let cb = other.content();
        let c = ca.gcd(&cb);
        let a = self.primitive_dense();
        let b = other.primitive_dense();
        let g = dense_gcd(a, b);
        let mut out = LaurentPoly::zero();
        for (i, coeff) in g.iter().enumerate() {
            out.add_term(i as i64, coeff * &c);
        }
        out.normalized_assoc()
    }

    /// The associate with minimal exponent 0 and positive leading coefficient.
    fn normalized_assoc(&self) -> LaurentPoly {
        if self.is_zero() {
            return LaurentPoly::zero();
        }
        let mut p = self.shifted(-self.min_exp().unwrap());
        if p.terms.values().next_back().unwrap().is_negative() {
            p = -&p;
        }
        p
    }

    /// Dense rational coefficient vector starting at exponent `from`.
    fn to_dense(&self, from: i64) -> Vec<BigRational> {
        let hi = self.max_exp().unwrap();
        let mut v = vec![BigRational::zero(); (hi - from + 1) as usize];
        for (e, c) in &self.terms {
            v[(e - from) as usize] = BigRational::from_integer(c.clone());
        }
        v
    }

    fn primitive_dense(&self) -> Vec<BigInt> {
        let c = self.content();
        let lo = self.min_exp().unwrap();
        let hi = self.max_exp().unwrap();
        let mut v = vec![BigInt::zero(); (hi - lo + 1) as usize];
        for (e, coeff) in &self.terms {
            v[(e - lo) as usize] = coeff / &c;
        }
        v
    }

    /// Value at `v = sqrt q`, exact in `Q(sqrt q)`.
    pub fn eval_sqrt(&self, q: u32) -> super::QuadScalar {
        let mut s = super::QuadScalar::zero(q);
        for (e, c) in &self.terms {
            s = &s + &super::QuadScalar::v_pow(q, *e).scaled_int(c);
        }
        s
    }
}

/// Long division over `Q[v]` on dense ascending coefficient vectors.
/// Returns `(quotient, remainder)`; `None` if the quotient would have negative
/// degree while the dividend is nonzero of smaller degree (still a valid
/// division: quotient 0, remainder = dividend).
fn dense_divmod(a: &[BigRational], b: &[BigRational]) -> Option<(Vec<BigRational>, Vec<BigRational>)> {
    let db = b.iter().rposition(|c| !c.is_zero())?;
    let mut rem: Vec<BigRational> = a.to_vec();
    let da = match rem.iter().rposition(|c| !c.is_zero()) {
        Some(d) => d,
        None => return Some((vec![BigRational::zero()], vec![BigRational::zero()])),
    };
    if da < db {
        return Some((vec![BigRational::zero()], rem));
    }
    let mut quot = vec![BigRational::zero(); da - db + 1];
    for k in (0..=da - db).rev() {
        let lead = rem[db + k].clone();
        if lead.is_zero() {
            continue;
        }
        let f = &lead / &b[db];
        quot[k] = f.clone();
        for j in 0..=db {
            let sub = &f * &b[j];
            rem[j + k] = &rem[j + k] - &sub;
        }
    }
    Some((quot, rem))
}

/// Primitive-PRS gcd of two primitive integer polynomials (dense, ascending).
fn dense_gcd(mut a: Vec<BigInt>, mut b: Vec<BigInt>) -> Vec<BigInt> {
    fn deg(p: &[BigInt]) -> Option<usize> {
        p.iter().rposition(|c| !c.is_zero())
    }
    fn primitive(mut p: Vec<BigInt>) -> Vec<BigInt> {
        let mut g = BigInt::zero();
        for c in &p {
            g = g.gcd(c);
        }
        if !g.is_zero() && !g.is_one() {
            for c in &mut p {
                *c = &*c / &g;
            }
        }
        p
    }
    loop {
        let (da, db) = match (deg(&a), deg(&b)) {
            (None, _) => return primitive(b),
            (_, None) => return primitive(a),
            (Some(da), Some(db)) => (da, db),
        };
        if da < db {
            std::mem::swap(&mut a, &mut b);
            continue;
        }
        // pseudo-remainder of a by b
        let lb = b[db].clone();
        let mut r = a.clone();
        for k in (0..=da - db).rev() {
            let lead = r[db + k].clone();
            for c in r.iter_mut() {
                *c = &*c * &lb;
            }
            for j in 0..=db {
                r[j + k] = &r[j + k] - &(&lead * &b[j]);
            }
        }
        r.truncate(db.max(1));
        a = b;
        b = primitive(r);
    }
}

impl<'a> Add for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &'a LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl<'a> Sub for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &'a LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl<'a> Mul for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &'a LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

impl<'a> Neg for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

/// Renders ascending in the exponent, e.g. `v^-2 + 2 + v^2`.
impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let neg = c.is_negative();
            let mag = c.magnitude();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let unit = mag.is_one();
            match (*e, unit) {
                (0, _) => write!(f, "{}", mag)?,
                (1, true) => write!(f, "v")?,
                (1, false) => write!(f, "{}v", mag)?,
                (_, true) => write!(f, "v^{}", e)?,
                (_, false) => write!(f, "{}v^{}", mag, e)?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}
