//! The symbolic side: a free algebra on level generators `e(i,l)` over exact
//! rational functions in `v`, equipped with the twisted coproduct and the
//! bilinear form it induces.
//!
//! Everything here is prime-free. The generator `e(i,l)` is a formal symbol
//! of degree `l·α_i`; words in these symbols span the algebra, the coproduct
//! acts on a letter by the level-binomial rule
//!
//! ```text
//! δ(e(i,l)) = Σ_{m+n=l} v^{(1-g_i)·m·n} e(i,m) ⊗ e(i,n)
//! ```
//!
//! and extends to words through the twisted tensor product
//! `(a⊗b)(c⊗d) = v^{(|b|,|c|)} ac ⊗ bd`. The bilinear form is determined by
//! the norms `ν(i,l)` of the letters together with the two adjunction rules
//! `(x, yz) = (δ(x), y⊗z)` and `(xy, z) = (x⊗y, δ(z))`; [`SymCtx::pair_words`]
//! evaluates it by structural recursion. Orthogonalizing `e(i,l)` against
//! products of lower-level generators yields the primitive generators
//! `s(i,l)`, whose Gram blocks carry all the structure this crate compares
//! against the interpolated Hall side.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::exactnum::{quantum_factorial, LaurentPoly, RationalFn};
use crate::quiver::{DimVec, Quiver};
use crate::{comp, Error, Result};

/// A generator symbol: vertex index and level.
pub type Letter = (usize, u32);

/// A monomial in the generators, stored as its sequence of letters.
/// The empty word is the unit.
pub type Word = Vec<Letter>;

/// Coarse weight of a word: the dimension vector `Σ l·α_i` over its letters.
pub fn word_weight(quiver: &Quiver, word: &[Letter]) -> DimVec {
    let mut w = vec![0u32; quiver.vertex_count()];
    for &(i, l) in word {
        w[i] += l;
    }
    w
}

/// Refined weight of a word: its multiset of letters, in sorted order.
pub fn refined_weight(word: &[Letter]) -> Vec<Letter> {
    let mut beta = word.to_vec();
    beta.sort_unstable();
    beta
}

/// Checks that every letter names a real vertex at level 1 or an imaginary
/// vertex at level >= 1.
pub fn validate_word(quiver: &Quiver, word: &[Letter]) -> Result<()> {
    for &(i, l) in word {
        if i >= quiver.vertex_count() {
            return Err(Error::BadInput(format!("letter vertex {i} out of range")));
        }
        if l == 0 {
            return Err(Error::BadInput("letter level must be positive".into()));
        }
        if l > 1 && !quiver.kind(i).is_imaginary() {
            return Err(Error::BadInput(format!(
                "vertex {} is loop-free, so only level 1 exists (got level {l})",
                quiver.name(i)
            )));
        }
    }
    Ok(())
}

/// Human-readable form of a word, e.g. `e(i,1)·e(j,2)`; the empty word is `1`.
pub fn word_label(quiver: &Quiver, word: &[Letter]) -> String {
    if word.is_empty() {
        return "1".into();
    }
    word.iter()
        .map(|&(i, l)| format!("e({},{})", quiver.name(i), l))
        .collect::<Vec<_>>()
        .join("·")
}

// ---------------------------------------------------------------------------
// Enumeration of weights and words
// ---------------------------------------------------------------------------

/// All dimension vectors with total height exactly `height`, in lexicographic
/// order.
pub fn coarse_weights_of_height(quiver: &Quiver, height: u32) -> Vec<DimVec> {
    fn rec(n: usize, pos: usize, left: u32, prefix: &mut DimVec, out: &mut Vec<DimVec>) {
        if pos == n {
            if left == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(n, pos + 1, left - c, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(
        quiver.vertex_count(),
        0,
        height,
        &mut Vec::new(),
        &mut out,
    );
    out
}

/// All words of the given coarse weight, letters capped at level `l_max`
/// (loop-free vertices always cap at 1), in lexicographic order.
pub fn words_of_coarse(quiver: &Quiver, gamma: &[u32], l_max: u32) -> Vec<Word> {
    fn rec(
        quiver: &Quiver,
        l_max: u32,
        left: &mut DimVec,
        prefix: &mut Word,
        out: &mut Vec<Word>,
    ) {
        if left.iter().all(|&c| c == 0) {
            out.push(prefix.clone());
            return;
        }
        for i in 0..quiver.vertex_count() {
            if left[i] == 0 {
                continue;
            }
            let cap = if quiver.kind(i).is_imaginary() {
                l_max.min(left[i])
            } else {
                1
            };
            for l in 1..=cap {
                left[i] -= l;
                prefix.push((i, l));
                rec(quiver, l_max, left, prefix, out);
                prefix.pop();
                left[i] += l;
            }
        }
    }
    assert_eq!(gamma.len(), quiver.vertex_count());
    let mut out = Vec::new();
    rec(
        quiver,
        l_max,
        &mut gamma.to_vec(),
        &mut Vec::new(),
        &mut out,
    );
    out
}

fn partitions(n: u32, max_part: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in (1..=max_part.min(n)).rev() {
        for rest in partitions(n - first, first) {
            let mut p = Vec::with_capacity(rest.len() + 1);
            p.push(first);
            p.extend(rest);
            out.push(p);
        }
    }
    out
}

/// All refined weights (sorted letter multisets) over the given coarse
/// weight, letter levels capped at `l_max`. Sorted for determinism.
pub fn refined_weights_of_coarse(
    quiver: &Quiver,
    gamma: &[u32],
    l_max: u32,
) -> Vec<Vec<Letter>> {
    assert_eq!(gamma.len(), quiver.vertex_count());
    let mut combos: Vec<Vec<Letter>> = vec![vec![]];
    for i in 0..quiver.vertex_count() {
        let cap = if quiver.kind(i).is_imaginary() { l_max } else { 1 };
        let parts = partitions(gamma[i], cap.max(1));
        let mut next = Vec::with_capacity(combos.len() * parts.len());
        for c in &combos {
            for p in &parts {
                let mut beta = c.clone();
                beta.extend(p.iter().map(|&l| (i, l)));
                next.push(beta);
            }
        }
        combos = next;
    }
    for beta in &mut combos {
        beta.sort_unstable();
    }
    combos.sort();
    combos
}

/// All refined weights with exactly `height` letters drawn from the quiver's
/// generator index set at level cap `l_max`, in lexicographic order.
pub fn refined_weights_of_height(quiver: &Quiver, height: u32, l_max: u32) -> Vec<Vec<Letter>> {
    fn rec(
        letters: &[Letter],
        start: usize,
        left: u32,
        prefix: &mut Vec<Letter>,
        out: &mut Vec<Vec<Letter>>,
    ) {
        if left == 0 {
            out.push(prefix.clone());
            return;
        }
        for k in start..letters.len() {
            prefix.push(letters[k]);
            rec(letters, k, left - 1, prefix, out);
            prefix.pop();
        }
    }
    let letters = quiver.index_levels(l_max);
    let mut out = Vec::new();
    rec(&letters, 0, height, &mut Vec::new(), &mut out);
    out
}

/// All distinct arrangements of a letter multiset, in lexicographic order.
pub fn words_of_refined(beta: &[Letter]) -> Vec<Word> {
    fn rec(
        counts: &mut BTreeMap<Letter, u32>,
        left: usize,
        prefix: &mut Word,
        out: &mut Vec<Word>,
    ) {
        if left == 0 {
            out.push(prefix.clone());
            return;
        }
        let keys: Vec<Letter> = counts.keys().copied().collect();
        for k in keys {
            let c = counts[&k];
            if c == 0 {
                continue;
            }
            counts.insert(k, c - 1);
            prefix.push(k);
            rec(counts, left - 1, prefix, out);
            prefix.pop();
            counts.insert(k, c);
        }
    }
    let mut counts: BTreeMap<Letter, u32> = BTreeMap::new();
    for &k in beta {
        *counts.entry(k).or_insert(0) += 1;
    }
    let mut out = Vec::new();
    rec(&mut counts, beta.len(), &mut Word::new(), &mut out);
    out
}

// ---------------------------------------------------------------------------
// Elements and tensors
// ---------------------------------------------------------------------------

/// A finitely supported linear combination of words with `RationalFn`
/// coefficients. The product is concatenation of words (the algebra is free).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymElt {
    terms: BTreeMap<Word, RationalFn>,
}

impl SymElt {
    pub fn zero() -> Self {
        SymElt::default()
    }

    /// The unit: the empty word with coefficient 1.
    pub fn one() -> Self {
        SymElt::word(&[])
    }

    /// A single generator `e(i,l)`.
    pub fn letter(i: usize, l: u32) -> Self {
        SymElt::word(&[(i, l)])
    }

    /// A single word with coefficient 1.
    pub fn word(w: &[Letter]) -> Self {
        let mut e = SymElt::zero();
        e.add_term(w.to_vec(), RationalFn::one());
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &[Letter]) -> RationalFn {
        self.terms.get(w).cloned().unwrap_or_else(RationalFn::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &RationalFn)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, word: Word, coeff: RationalFn) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(word) {
            Entry::Occupied(mut o) => {
                let s = o.get() + &coeff;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
        }
    }

    pub fn plus(&self, other: &SymElt) -> SymElt {
        let mut out = self.clone();
        for (w, c) in other.iter() {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn minus(&self, other: &SymElt) -> SymElt {
        let mut out = self.clone();
        for (w, c) in other.iter() {
            out.add_term(w.clone(), -c);
        }
        out
    }

    pub fn scaled(&self, c: &RationalFn) -> SymElt {
        let mut out = SymElt::zero();
        for (w, k) in self.iter() {
            out.add_term(w.clone(), k * c);
        }
        out
    }

    /// Free product: concatenate words, multiply coefficients.
    pub fn times(&self, other: &SymElt) -> SymElt {
        let mut out = SymElt::zero();
        for (wa, ca) in self.iter() {
            for (wb, cb) in other.iter() {
                let mut w = wa.clone();
                w.extend_from_slice(wb);
                out.add_term(w, ca * cb);
            }
        }
        out
    }

    /// Splits into coarse-weight-homogeneous components.
    pub fn coarse_components(&self, quiver: &Quiver) -> BTreeMap<DimVec, SymElt> {
        let mut out: BTreeMap<DimVec, SymElt> = BTreeMap::new();
        for (w, c) in self.iter() {
            out.entry(word_weight(quiver, w))
                .or_default()
                .add_term(w.clone(), c.clone());
        }
        out
    }
}

impl fmt::Display for SymElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| {
                let word = if w.is_empty() {
                    "1".to_string()
                } else {
                    w.iter()
                        .map(|&(i, l)| format!("e({i},{l})"))
                        .collect::<Vec<_>>()
                        .join("·")
                };
                format!("[{c}]·{word}")
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// An element of the twofold tensor square: a linear combination of pairs of
/// words. Multiplication twists by `v^{(|b|,|c|)}` when the right factor of
/// the first operand passes the left factor of the second.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymTensor {
    terms: BTreeMap<(Word, Word), RationalFn>,
}

impl SymTensor {
    pub fn zero() -> Self {
        SymTensor::default()
    }

    /// The unit `1 ⊗ 1`.
    pub fn unit() -> Self {
        let mut t = SymTensor::zero();
        t.add_term(Word::new(), Word::new(), RationalFn::one());
        t
    }

    /// The tensor product of two elements, with no twist.
    pub fn pure(a: &SymElt, b: &SymElt) -> Self {
        let mut t = SymTensor::zero();
        for (wa, ca) in a.iter() {
            for (wb, cb) in b.iter() {
                t.add_term(wa.clone(), wb.clone(), ca * cb);
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Word, Word), &RationalFn)> {
        self.terms.iter()
    }

    pub fn coeff(&self, a: &[Letter], b: &[Letter]) -> RationalFn {
        self.terms
            .get(&(a.to_vec(), b.to_vec()))
            .cloned()
            .unwrap_or_else(RationalFn::zero)
    }

    pub fn add_term(&mut self, a: Word, b: Word, coeff: RationalFn) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry((a, b)) {
            Entry::Occupied(mut o) => {
                let s = o.get() + &coeff;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
        }
    }

    pub fn plus(&self, other: &SymTensor) -> SymTensor {
        let mut out = self.clone();
        for ((a, b), c) in other.iter() {
            out.add_term(a.clone(), b.clone(), c.clone());
        }
        out
    }

    pub fn minus(&self, other: &SymTensor) -> SymTensor {
        let mut out = self.clone();
        for ((a, b), c) in other.iter() {
            out.add_term(a.clone(), b.clone(), -c);
        }
        out
    }

    /// Twisted componentwise product:
    /// `(a⊗b)(c⊗d) = v^{(|b|,|c|)} ac ⊗ bd` with `( , )` the symmetrized form.
    pub fn times(&self, other: &SymTensor, quiver: &Quiver) -> SymTensor {
        let mut out = SymTensor::zero();
        for ((a, b), cab) in self.iter() {
            let wb = word_weight(quiver, b);
            for ((c, d), ccd) in other.iter() {
                let wc = word_weight(quiver, c);
                let twist = vp(quiver.sym_form(&wb, &wc));
                let mut ac = a.clone();
                ac.extend_from_slice(c);
                let mut bd = b.clone();
                bd.extend_from_slice(d);
                out.add_term(ac, bd, &(cab * ccd) * &twist);
            }
        }
        out
    }
}

fn vp(exp: i64) -> RationalFn {
    RationalFn::from_laurent(LaurentPoly::v_pow(exp))
}

/// Generic norm of `e(i,l)`: `v^{2l²} / (v^{3l(l-1)/2} (v²-1)^l [l]!)`.
///
/// This depends only on the level: the level-`l` class has all arrow maps
/// zero, so its automorphisms form `GL_l` no matter how many loops sit at
/// the vertex. Substituting `v = sqrt q` recovers `v^{2l²}/|GL_l(F_q)|`.
pub fn nu_closed_form(l: u32) -> RationalFn {
    let li = i64::from(l);
    let num = LaurentPoly::v_pow(2 * li * li);
    let vsq_minus_one = LaurentPoly::from_terms(&[(2, 1), (0, -1)]);
    let den = &(&LaurentPoly::v_pow(3 * li * (li - 1) / 2) * &vsq_minus_one.pow(l))
        * &quantum_factorial(l);
    RationalFn::new(num, den)
}

// ---------------------------------------------------------------------------
// The pairing context
// ---------------------------------------------------------------------------

/// Shared state for the symbolic computations on one quiver: the norm
/// assignment and memo tables for coproducts, pairings, and primitive
/// generators.
///
/// Norms default to [`nu_closed_form`] so that the bilinear form matches the
/// Hall-side Green form; [`SymCtx::with_nu`] overrides individual norms
/// (useful both for the general theory and as a negative control).
pub struct SymCtx {
    quiver: Quiver,
    nu_overrides: BTreeMap<Letter, RationalFn>,
    delta_memo: HashMap<Word, SymTensor>,
    pair_memo: HashMap<(Word, Word), RationalFn>,
    s_memo: BTreeMap<Letter, SymElt>,
    s_word_memo: HashMap<Word, SymElt>,
    s_pair_memo: HashMap<(Word, Word), RationalFn>,
}

impl SymCtx {
    pub fn new(quiver: Quiver) -> Self {
        SymCtx {
            quiver,
            nu_overrides: BTreeMap::new(),
            delta_memo: HashMap::new(),
            pair_memo: HashMap::new(),
            s_memo: BTreeMap::new(),
            s_word_memo: HashMap::new(),
            s_pair_memo: HashMap::new(),
        }
    }

    /// Overrides the norm of one generator. Clears memo tables, since every
    /// cached value may depend on the assignment.
    pub fn with_nu(mut self, i: usize, l: u32, nu: RationalFn) -> Self {
        assert!(!nu.is_zero(), "norms must be nonzero");
        self.nu_overrides.insert((i, l), nu);
        self.delta_memo.clear();
        self.pair_memo.clear();
        self.s_memo.clear();
        self.s_word_memo.clear();
        self.s_pair_memo.clear();
        self
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    /// The norm `(e(i,l), e(i,l))` in force.
    pub fn nu(&self, i: usize, l: u32) -> RationalFn {
        self.nu_overrides
            .get(&(i, l))
            .cloned()
            .unwrap_or_else(|| nu_closed_form(l))
    }

    /// Coproduct of a single generator:
    /// `δ(e(i,l)) = Σ_{m+n=l} v^{(1-g_i)mn} e(i,m) ⊗ e(i,n)`.
    pub fn delta_letter(&self, i: usize, l: u32) -> SymTensor {
        let vexp = 1 - self.quiver.loop_count(i) as i64;
        let mut t = SymTensor::zero();
        for m in 0..=l {
            let n = l - m;
            let left: Word = if m > 0 { vec![(i, m)] } else { vec![] };
            let right: Word = if n > 0 { vec![(i, n)] } else { vec![] };
            t.add_term(left, right, vp(vexp * i64::from(m) * i64::from(n)));
        }
        t
    }

    /// Coproduct of a word: the letter coproducts multiplied out with the
    /// twisted tensor product, left to right.
    pub fn delta_word(&mut self, word: &[Letter]) -> SymTensor {
        if let Some(hit) = self.delta_memo.get(word) {
            return hit.clone();
        }
        let mut acc = SymTensor::unit();
        for &(i, l) in word {
            let step = self.delta_letter(i, l);
            acc = acc.times(&step, &self.quiver);
        }
        self.delta_memo.insert(word.to_vec(), acc.clone());
        acc
    }

    /// Coproduct of a general element, by linearity.
    pub fn delta(&mut self, x: &SymElt) -> SymTensor {
        let mut out = SymTensor::zero();
        for (w, c) in x.clone().iter() {
            for ((a, b), k) in self.delta_word(w).iter() {
                out.add_term(a.clone(), b.clone(), c * k);
            }
        }
        out
    }

    /// The bilinear form on two words.
    ///
    /// Words of different coarse weights pair to zero; the empty word pairs
    /// to 1 with itself and letters pair by `nu`. Longer arguments reduce by
    /// the two adjunctions: for `|y| >= 2` split `y = y'·z` with `z` a single
    /// letter and use `(x, y'z) = (δ(x), y'⊗z)`; for `|y| = 1 < |x|` split
    /// `x = u·w` and use `(uw, e(j,m)) = (u⊗w, δ(e(j,m)))`. Both tensor
    /// pairings are componentwise. The pair `(|y|, |x|)` drops
    /// lexicographically at every recursive call, so the recursion
    /// terminates; agreement of the two rules is the symmetry property
    /// checked by the test suite, not an assumption used here.
    pub fn pair_words(&mut self, x: &[Letter], y: &[Letter]) -> RationalFn {
        if word_weight(&self.quiver, x) != word_weight(&self.quiver, y) {
            return RationalFn::zero();
        }
        if y.is_empty() {
            // Equal weights force x to be empty too.
            return RationalFn::one();
        }
        if x.len() == 1 && y.len() == 1 {
            // Equal weights force equal letters.
            let (j, m) = y[0];
            return self.nu(j, m);
        }
        let key = (x.to_vec(), y.to_vec());
        if let Some(hit) = self.pair_memo.get(&key) {
            return hit.clone();
        }
        let val = if y.len() >= 2 {
            let (y_head, z) = y.split_at(y.len() - 1);
            let wt_head = word_weight(&self.quiver, y_head);
            let dx = self.delta_word(x);
            let mut acc = RationalFn::zero();
            for ((x1, x2), c) in dx.iter() {
                if word_weight(&self.quiver, x1) != wt_head {
                    continue;
                }
                let p1 = self.pair_words(x1, y_head);
                if p1.is_zero() {
                    continue;
                }
                let p2 = self.pair_words(x2, z);
                if p2.is_zero() {
                    continue;
                }
                acc = &acc + &(&(c * &p1) * &p2);
            }
            acc
        } else {
            // y is a single letter and x has at least two.
            let (j, m) = y[0];
            let (u, w) = x.split_at(x.len() - 1);
            let vexp = 1 - self.quiver.loop_count(j) as i64;
            let mut acc = RationalFn::zero();
            for a in 0..=m {
                let b = m - a;
                let ya: Word = if a > 0 { vec![(j, a)] } else { vec![] };
                let yb: Word = if b > 0 { vec![(j, b)] } else { vec![] };
                let p1 = self.pair_words(u, &ya);
                if p1.is_zero() {
                    continue;
                }
                let p2 = self.pair_words(w, &yb);
                if p2.is_zero() {
                    continue;
                }
                let twist = vp(vexp * i64::from(a) * i64::from(b));
                acc = &acc + &(&(&twist * &p1) * &p2);
            }
            acc
        };
        self.pair_memo.insert(key, val.clone());
        val
    }

    /// The bilinear form on two elements, by bilinearity.
    pub fn pair(&mut self, x: &SymElt, y: &SymElt) -> RationalFn {
        let mut acc = RationalFn::zero();
        for (wx, cx) in x.iter() {
            for (wy, cy) in y.iter() {
                let p = self.pair_words(wx, wy);
                if p.is_zero() {
                    continue;
                }
                acc = &acc + &(&(cx * cy) * &p);
            }
        }
        acc
    }

    /// The primitive generator `s(i,l)`: `e(i,l)` minus its projection onto
    /// the span of products of lower-level generators at the same vertex.
    ///
    /// The lower Gram system is solved in spanning form: when the lower Gram
    /// matrix is singular (isotropic vertices) any consistent projection is
    /// taken, which is unique up to the radical and therefore has the same
    /// pairings with everything.
    pub fn s_gen(&mut self, i: usize, l: u32) -> Result<SymElt> {
        if let Some(hit) = self.s_memo.get(&(i, l)) {
            return Ok(hit.clone());
        }
        if i >= self.quiver.vertex_count() {
            return Err(Error::BadInput(format!("vertex {i} out of range")));
        }
        if l == 0 {
            return Err(Error::BadInput("level must be positive".into()));
        }
        if l > 1 && !self.quiver.kind(i).is_imaginary() {
            return Err(Error::BadInput(format!(
                "vertex {} is loop-free; no generator at level {l}",
                self.quiver.name(i)
            )));
        }
        let s = if l == 1 {
            SymElt::letter(i, 1)
        } else {
            let monomials: Vec<Word> = comp::lower_words(l)
                .into_iter()
                .map(|parts| parts.into_iter().map(|p| (i, p)).collect())
                .collect();
            let n = monomials.len();
            let mut gram = vec![vec![RationalFn::zero(); n]; n];
            let mut rhs = vec![RationalFn::zero(); n];
            for a in 0..n {
                for b in a..n {
                    let p = self.pair_words(&monomials[a], &monomials[b]);
                    gram[a][b] = p.clone();
                    gram[b][a] = p;
                }
                rhs[a] = self.pair_words(&[(i, l)], &monomials[a]);
            }
            let coeffs = solve_spanning(gram, rhs, "lower-span projection")?;
            let mut s = SymElt::letter(i, l);
            for (word, c) in monomials.into_iter().zip(coeffs) {
                s.add_term(word, -&c);
            }
            s
        };
        self.s_memo.insert((i, l), s.clone());
        Ok(s)
    }

    /// The product `s(i_1,l_1)···s(i_r,l_r)` over the letters of a word.
    pub fn s_word(&mut self, word: &[Letter]) -> Result<SymElt> {
        if let Some(hit) = self.s_word_memo.get(word) {
            return Ok(hit.clone());
        }
        let mut acc = SymElt::one();
        for &(i, l) in word {
            let s = self.s_gen(i, l)?;
            acc = acc.times(&s);
        }
        self.s_word_memo.insert(word.to_vec(), acc.clone());
        Ok(acc)
    }

    /// Pairing of two `s`-monomials given by their letter sequences,
    /// evaluated by peeling the first letter of `ys`.
    ///
    /// Because each `s(i,l)` is primitive, the coproduct of the product
    /// `s(x_1)···s(x_r)` expands over subsets: each factor goes left or
    /// right, and a factor passing an earlier right-bound factor twists by
    /// `v^{(|earlier|, |factor|)}`. Pairing against `s(y_1) ⊗ rest`
    /// componentwise leaves one base pairing per subset — a monomial of
    /// coarse weight `l_1·α_{j_1}` against a single generator, which the word
    /// recursion evaluates cheaply — times the same recursion on the rest.
    /// Agreement with the direct expansion of [`SymCtx::pair`] is a test,
    /// since the two evaluations split the arguments differently.
    pub fn pair_s_words(&mut self, xs: &[Letter], ys: &[Letter]) -> Result<RationalFn> {
        if word_weight(&self.quiver, xs) != word_weight(&self.quiver, ys) {
            return Ok(RationalFn::zero());
        }
        if ys.is_empty() {
            return Ok(RationalFn::one());
        }
        let key = (xs.to_vec(), ys.to_vec());
        if let Some(hit) = self.s_pair_memo.get(&key) {
            return Ok(hit.clone());
        }
        let (j, m) = ys[0];
        let rest = &ys[1..];
        let mut wt_y1 = vec![0u32; self.quiver.vertex_count()];
        wt_y1[j] = m;
        let weights: Vec<DimVec> = xs
            .iter()
            .map(|&(i, l)| {
                let mut w = vec![0u32; self.quiver.vertex_count()];
                w[i] = l;
                w
            })
            .collect();
        let mut acc = RationalFn::zero();
        for mask in 0u32..(1 << xs.len()) {
            // Bit k set: factor k goes right and stays for the tail.
            let mut comp_wt = vec![0u32; self.quiver.vertex_count()];
            for (k, &(i, l)) in xs.iter().enumerate() {
                if mask & (1 << k) == 0 {
                    comp_wt[i] += l;
                }
            }
            if comp_wt != wt_y1 {
                continue;
            }
            let mut texp = 0i64;
            let mut passed = vec![0u32; self.quiver.vertex_count()];
            let mut comp_word = Word::new();
            let mut rest_word = Word::new();
            for (k, &letter) in xs.iter().enumerate() {
                if mask & (1 << k) == 0 {
                    texp += self.quiver.sym_form(&passed, &weights[k]);
                    comp_word.push(letter);
                } else {
                    for (p, w) in passed.iter_mut().zip(weights[k].iter()) {
                        *p += w;
                    }
                    rest_word.push(letter);
                }
            }
            let base = {
                let a = self.s_word(&comp_word)?;
                let b = self.s_gen(j, m)?;
                self.pair(&a, &b)
            };
            if base.is_zero() {
                continue;
            }
            let tail = self.pair_s_words(&rest_word, rest)?;
            if tail.is_zero() {
                continue;
            }
            acc = &acc + &(&(&vp(texp) * &base) * &tail);
        }
        self.s_pair_memo.insert(key, acc.clone());
        Ok(acc)
    }

    /// Gram matrix of the `s`-monomials over one refined weight, along with
    /// the word order used for rows and columns.
    pub fn gram_block(&mut self, beta: &[Letter]) -> Result<(Vec<Word>, Vec<Vec<RationalFn>>)> {
        let words = words_of_refined(&refined_weight(beta));
        let n = words.len();
        let mut gram = vec![vec![RationalFn::zero(); n]; n];
        for a in 0..n {
            for b in a..n {
                let p = self.pair_s_words(&words[a], &words[b])?;
                gram[a][b] = p.clone();
                gram[b][a] = p;
            }
        }
        Ok((words, gram))
    }

    /// Gram block divided by the product of the `s`-norms of the letters:
    /// the entries are the pairing polynomials, which must be integer
    /// Laurent polynomials whenever the norms match the Hall side.
    pub fn normalized_gram_block(
        &mut self,
        beta: &[Letter],
    ) -> Result<(Vec<Word>, Vec<Vec<RationalFn>>)> {
        let (words, gram) = self.gram_block(beta)?;
        let mut norm = RationalFn::one();
        for &(i, l) in beta {
            let s = self.s_gen(i, l)?;
            norm = &norm * &self.pair(&s, &s);
        }
        let inv = norm.inverse().ok_or_else(|| {
            Error::DegenerateGram("a primitive generator has vanishing norm".into())
        })?;
        let scaled = gram
            .into_iter()
            .map(|row| row.into_iter().map(|e| &e * &inv).collect())
            .collect();
        Ok((words, scaled))
    }

    /// Dimension of the quotient by the radical at one coarse weight: the sum
    /// of the ranks of the refined Gram blocks lying over it. Distinct
    /// refined blocks pair to zero, so the full Gram matrix at the coarse
    /// weight is block diagonal and ranks add.
    pub fn graded_dim(&mut self, gamma: &[u32], l_max: u32) -> Result<usize> {
        let mut total = 0;
        for beta in refined_weights_of_coarse(&self.quiver, gamma, l_max) {
            let (_, gram) = self.gram_block(&beta)?;
            total += matrix_rank(gram);
        }
        Ok(total)
    }

    /// Whether the element pairs to zero with every word of its weight — that
    /// is, whether it lies in the radical of the form.
    pub fn in_radical(&mut self, z: &SymElt) -> bool {
        for (gamma, component) in z.coarse_components(&self.quiver.clone()) {
            let cap = gamma.iter().copied().max().unwrap_or(0);
            for w in words_of_coarse(&self.quiver.clone(), &gamma, cap) {
                if !self.pair(&component, &SymElt::word(&w)).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Rewrites an element in the `s`-monomial basis. The change of basis is
    /// unitriangular (each `s`-monomial is its own word plus words with
    /// strictly finer level multisets), hence uniquely solvable.
    pub fn to_s_basis(&mut self, z: &SymElt) -> Result<BTreeMap<Word, RationalFn>> {
        let mut out = BTreeMap::new();
        for (gamma, component) in z.coarse_components(&self.quiver.clone()) {
            let cap = gamma.iter().copied().max().unwrap_or(0);
            let words = words_of_coarse(&self.quiver.clone(), &gamma, cap);
            let index: BTreeMap<&Word, usize> =
                words.iter().enumerate().map(|(k, w)| (w, k)).collect();
            let n = words.len();
            let mut mat = vec![vec![RationalFn::zero(); n]; n];
            for (col, w) in words.iter().enumerate() {
                for (u, c) in self.s_word(w)?.iter() {
                    let row = *index.get(u).ok_or_else(|| {
                        Error::BadInput("element contains an invalid word".into())
                    })?;
                    mat[row][col] = c.clone();
                }
            }
            let mut rhs = vec![RationalFn::zero(); n];
            for (u, c) in component.iter() {
                let row = *index
                    .get(u)
                    .ok_or_else(|| Error::BadInput("element contains an invalid word".into()))?;
                rhs[row] = c.clone();
            }
            let coeffs = solve_spanning(mat, rhs, "s-basis conversion")?;
            for (w, c) in words.into_iter().zip(coeffs) {
                if !c.is_zero() {
                    out.insert(w, c);
                }
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Relation elements
// ---------------------------------------------------------------------------

/// The alternating sum `Σ_k (-1)^k e(i)^(k) e(j,l) e(i)^(N-k)` with
/// `N = 1 - l·a_ij` and divided powers `e^(k) = e^k/[k]!`, for a loop-free
/// vertex `i` and a different vertex `j`.
pub fn serre_element(quiver: &Quiver, i: usize, j: usize, l: u32) -> Result<SymElt> {
    if i >= quiver.vertex_count() || j >= quiver.vertex_count() {
        return Err(Error::BadInput("vertex out of range".into()));
    }
    if i == j {
        return Err(Error::BadInput("the two vertices must differ".into()));
    }
    if quiver.kind(i).is_imaginary() {
        return Err(Error::BadInput(format!(
            "vertex {} carries loops; the alternating-sum relation needs a loop-free vertex",
            quiver.name(i)
        )));
    }
    validate_word(quiver, &[(j, l)])?;
    let n = quiver.vertex_count();
    let mut alpha_i = vec![0u32; n];
    alpha_i[i] = 1;
    let mut alpha_j = vec![0u32; n];
    alpha_j[j] = 1;
    let a_ij = quiver.sym_form(&alpha_i, &alpha_j);
    let top = 1 - i64::from(l) * a_ij;
    debug_assert!(top >= 1);
    let top = top as u32;
    let mut acc = SymElt::zero();
    for k in 0..=top {
        let mut word = Word::with_capacity(top as usize + 1);
        word.extend(std::iter::repeat((i, 1)).take(k as usize));
        word.push((j, l));
        word.extend(std::iter::repeat((i, 1)).take((top - k) as usize));
        let den = &quantum_factorial(k) * &quantum_factorial(top - k);
        let mut c = RationalFn::new(LaurentPoly::one(), den);
        if k % 2 == 1 {
            c = -c;
        }
        acc.add_term(word, c);
    }
    Ok(acc)
}

/// The commutator `e(i,k)e(j,l) - e(j,l)e(i,k)`, defined when the symmetrized
/// form pairs the two vertices to zero (orthogonal vertices, or an isotropic
/// vertex with itself).
pub fn commutator_element(quiver: &Quiver, i: usize, k: u32, j: usize, l: u32) -> Result<SymElt> {
    validate_word(quiver, &[(i, k), (j, l)])?;
    let n = quiver.vertex_count();
    let mut alpha_i = vec![0u32; n];
    alpha_i[i] = 1;
    let mut alpha_j = vec![0u32; n];
    alpha_j[j] = 1;
    if quiver.sym_form(&alpha_i, &alpha_j) != 0 {
        return Err(Error::BadInput(
            "the commutation relation needs vertices pairing to zero".into(),
        ));
    }
    let xy = SymElt::word(&[(i, k), (j, l)]);
    let yx = SymElt::word(&[(j, l), (i, k)]);
    Ok(xy.minus(&yx))
}

// ---------------------------------------------------------------------------
// Exact linear algebra over rational functions
// ---------------------------------------------------------------------------

/// Solves `G c = rhs` by Gauss-Jordan elimination. Free coordinates are set
/// to zero; an inconsistent system reports a degenerate-Gram error tagged
/// with `what`.
fn solve_spanning(
    mut g: Vec<Vec<RationalFn>>,
    mut rhs: Vec<RationalFn>,
    what: &str,
) -> Result<Vec<RationalFn>> {
    let n = g.len();
    debug_assert!(g.iter().all(|row| row.len() == n));
    let mut pivot_row_of_col: Vec<Option<usize>> = vec![None; n];
    let mut row = 0;
    for col in 0..n {
        let Some(pr) = (row..n).find(|&r| !g[r][col].is_zero()) else {
            continue;
        };
        g.swap(row, pr);
        rhs.swap(row, pr);
        let inv = g[row][col].inverse().expect("pivot entry is nonzero");
        for x in g[row].iter_mut() {
            *x = &*x * &inv;
        }
        rhs[row] = &rhs[row] * &inv;
        for r in 0..n {
            if r == row || g[r][col].is_zero() {
                continue;
            }
            let f = g[r][col].clone();
            for c in 0..n {
                let delta = &f * &g[row][c];
                g[r][c] = &g[r][c] - &delta;
            }
            let delta = &f * &rhs[row];
            rhs[r] = &rhs[r] - &delta;
        }
        pivot_row_of_col[col] = Some(row);
        row += 1;
        if row == n {
            break;
        }
    }
    for r in row..n {
        if !rhs[r].is_zero() {
            return Err(Error::DegenerateGram(format!(
                "{what}: the system is inconsistent"
            )));
        }
    }
    Ok((0..n)
        .map(|c| match pivot_row_of_col[c] {
            Some(r) => rhs[r].clone(),
            None => RationalFn::zero(),
        })
        .collect())
}

/// Rank of a matrix over the rational-function field.
pub fn matrix_rank(mut m: Vec<Vec<RationalFn>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&k| !m[k][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = m[r][c].inverse().expect("pivot entry is nonzero");
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for k in (r + 1)..rows {
            if m[k][c].is_zero() {
                continue;
            }
            let f = m[k][c].clone();
            for j in 0..cols {
                let delta = &f * &m[r][j];
                m[k][j] = &m[k][j] - &delta;
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// Normalization of a Gram block by letter norms, exposed for reuse by the
/// interpolated side: `Π (s(i,l), s(i,l))^{multiplicity in beta}`.
pub fn s_norm_product(ctx: &mut SymCtx, beta: &[Letter]) -> Result<RationalFn> {
    let mut norm = RationalFn::one();
    for &(i, l) in beta {
        let s = ctx.s_gen(i, l)?;
        norm = &norm * &ctx.pair(&s, &s);
    }
    Ok(norm)
}
