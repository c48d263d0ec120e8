//! Elements of the Hall algebra and of its tensor square.

use std::collections::BTreeMap;

use crate::exactnum::QuadScalar;

/// A finite `Q(sqrt q)`-linear combination of isomorphism classes.
///
/// Keys are class indices interned by the owning context's registry. Zero
/// coefficients are never stored, so map equality is element equality.
#[derive(Clone, PartialEq, Debug)]
pub struct HallElt {
    q: u32,
    terms: BTreeMap<usize, QuadScalar>,
}

impl HallElt {
    pub fn zero(q: u32) -> Self {
        HallElt { q, terms: BTreeMap::new() }
    }

    /// The basis element `[class]`.
    pub fn from_class(q: u32, class: usize) -> Self {
        let mut e = Self::zero(q);
        e.add_term(class, QuadScalar::one(q));
        e
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, class: usize) -> QuadScalar {
        self.terms.get(&class).cloned().unwrap_or_else(|| QuadScalar::zero(self.q))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &QuadScalar)> + '_ {
        self.terms.iter().map(|(&c, x)| (c, x))
    }

    /// Adds `c * [class]`, dropping the entry if the sum cancels.
    pub fn add_term(&mut self, class: usize, c: QuadScalar) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(class).or_insert_with(|| QuadScalar::zero(self.q));
        *entry = &*entry + &c;
        if entry.is_zero() {
            self.terms.remove(&class);
        }
    }

    pub fn add(&self, other: &HallElt) -> HallElt {
        assert_eq!(self.q, other.q);
        let mut out = self.clone();
        for (c, x) in other.iter() {
            out.add_term(c, x.clone());
        }
        out
    }

    pub fn sub(&self, other: &HallElt) -> HallElt {
        self.add(&other.scaled(&QuadScalar::from_int(self.q, -1)))
    }

    pub fn scaled(&self, c: &QuadScalar) -> HallElt {
        let mut out = Self::zero(self.q);
        for (cls, x) in self.iter() {
            out.add_term(cls, x * c);
        }
        out
    }
}

/// An element of the tensor square, keyed by ordered pairs of classes.
#[derive(Clone, PartialEq, Debug)]
pub struct TensorElt {
    q: u32,
    terms: BTreeMap<(usize, usize), QuadScalar>,
}

impl TensorElt {
    pub fn zero(q: u32) -> Self {
        TensorElt { q, terms: BTreeMap::new() }
    }

    /// The decomposable tensor `x (x) y`.
    pub fn pure(x: &HallElt, y: &HallElt) -> Self {
        assert_eq!(x.q(), y.q());
        let mut out = Self::zero(x.q());
        for (a, xa) in x.iter() {
            for (b, yb) in y.iter() {
                out.add_term(a, b, xa * yb);
            }
        }
        out
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, left: usize, right: usize) -> QuadScalar {
        self.terms.get(&(left, right)).cloned().unwrap_or_else(|| QuadScalar::zero(self.q))
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &QuadScalar)> + '_ {
        self.terms.iter().map(|(&k, x)| (k, x))
    }

    pub fn add_term(&mut self, left: usize, right: usize, c: QuadScalar) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry((left, right)).or_insert_with(|| QuadScalar::zero(self.q));
        *entry = &*entry + &c;
        if entry.is_zero() {
            self.terms.remove(&(left, right));
        }
    }

    pub fn add(&self, other: &TensorElt) -> TensorElt {
        assert_eq!(self.q, other.q);
        let mut out = self.clone();
        for ((a, b), x) in other.iter() {
            out.add_term(a, b, x.clone());
        }
        out
    }

    pub fn scaled(&self, c: &QuadScalar) -> TensorElt {
        let mut out = Self::zero(self.q);
        for ((a, b), x) in self.iter() {
            out.add_term(a, b, x * c);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coefficients_are_dropped() {
        let mut e = HallElt::from_class(5, 3);
        e.add_term(3, QuadScalar::from_int(5, -1));
        assert!(e.is_zero());
        assert_eq!(e.coeff(3), QuadScalar::zero(5));
    }

    #[test]
    fn addition_and_scaling() {
        let a = HallElt::from_class(2, 0);
        let b = HallElt::from_class(2, 1);
        let s = a.add(&b).scaled(&QuadScalar::v_pow(2, 2));
        assert_eq!(s.coeff(0), QuadScalar::from_int(2, 2));
        assert_eq!(s.coeff(1), QuadScalar::from_int(2, 2));
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn pure_tensor_expands_bilinearly() {
        let a = HallElt::from_class(3, 0).add(&HallElt::from_class(3, 1));
        let b = HallElt::from_class(3, 2);
        let t = TensorElt::pure(&a, &b);
        assert_eq!(t.coeff(0, 2), QuadScalar::one(3));
        assert_eq!(t.coeff(1, 2), QuadScalar::one(3));
        assert!(t.coeff(2, 0).is_zero());
    }
}
