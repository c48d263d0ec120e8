use super::decompose::{decompose, indec_iso, is_nilpotent, residue_degree};
use super::fqmat::FqMat;
use super::rep::{hom_basis, Rep};
use crate::quiver::{DimVec, Quiver};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::One;
use std::collections::{BTreeMap, HashMap};

/// `|GL_m(F_Q)|` for `Q = base^deg`.
pub fn gl_order(base: u32, deg: u32, m: u32) -> BigInt {
    let q = BigInt::from(base).pow(deg);
    let qm = q.pow(m);
    let mut out = BigInt::one();
    for k in 0..m {
        out *= &qm - q.pow(k);
    }
    out
}

/// Cheap isomorphism invariants used to cut down candidate classes before an
/// exact test.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Fingerprint {
    dims: DimVec,
    arrow_ranks: Vec<usize>,
    dim_end: usize,
}

struct IndecInfo {
    rep: Rep,
    /// Degree over `F_p` of the residue field `End/rad`.
    res_deg: u32,
}

/// An isomorphism class, named by its indecomposable content.
pub struct ClassInfo {
    /// Sorted `(indecomposable index, multiplicity)` pairs.
    pub key: Vec<(usize, u32)>,
    pub dims: DimVec,
    /// Order of the automorphism group.
    pub aut: BigInt,
    /// A concrete representative.
    pub witness: Rep,
}

/// Identification of representations up to isomorphism for one quiver and one
/// prime, with interned class indices that are stable for a fixed sequence of
/// queries.
///
/// Identification runs in layers: a byte-level memo of points seen before, a
/// fingerprint filter, a complete invertible-morphism test against known
/// indecomposables, and finally a full Krull-Schmidt decomposition. Class
/// indices are assigned in first-seen order, so any deterministic caller gets
/// deterministic indices. Automorphism group orders come from the
/// decomposition: `End(M)/rad` is a product of matrix rings over the residue
/// fields of the distinct summands, and the radical contributes a power of
/// `p`.
pub struct ClassRegistry {
    pub quiver: Quiver,
    pub p: u32,
    indecs: Vec<IndecInfo>,
    /// `hom_dims[s][t] = dim Hom(W_s, W_t)` for registered indecomposables.
    hom_dims: Vec<Vec<usize>>,
    classes: Vec<ClassInfo>,
    class_lookup: HashMap<Vec<(usize, u32)>, usize>,
    indec_by_fp: HashMap<Fingerprint, Vec<usize>>,
    point_memo: HashMap<Vec<u8>, usize>,
    indec_memo: HashMap<Vec<u8>, usize>,
}

impl ClassRegistry {
    pub fn new(quiver: Quiver, p: u32) -> Self {
        ClassRegistry {
            quiver,
            p,
            indecs: Vec::new(),
            hom_dims: Vec::new(),
            classes: Vec::new(),
            class_lookup: HashMap::new(),
            indec_by_fp: HashMap::new(),
            point_memo: HashMap::new(),
            indec_memo: HashMap::new(),
        }
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn indec_count(&self) -> usize {
        self.indecs.len()
    }

    pub fn class(&self, idx: usize) -> &ClassInfo {
        &self.classes[idx]
    }

    pub fn indec_rep(&self, idx: usize) -> &Rep {
        &self.indecs[idx].rep
    }

    pub fn indec_residue_degree(&self, idx: usize) -> u32 {
        self.indecs[idx].res_deg
    }

    /// Human-readable name of a class, e.g. `I0 + 2*I3`.
    pub fn describe(&self, idx: usize) -> String {
        let key = &self.classes[idx].key;
        if key.is_empty() {
            return "0".to_string();
        }
        key.iter()
            .map(|&(i, m)| if m == 1 { format!("I{i}") } else { format!("{m}*I{i}") })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    fn fingerprint(&self, rep: &Rep) -> Fingerprint {
        Fingerprint {
            dims: rep.dims.clone(),
            arrow_ranks: rep.maps.iter().map(FqMat::rank).collect(),
            dim_end: hom_basis(&self.quiver, rep, rep).len(),
        }
    }

    /// The class index of `rep`.
    pub fn identify(&mut self, rep: &Rep) -> usize {
        self.identify_with(rep, true)
    }

    /// Like `identify`, but without recording the point in the byte-level
    /// memo. Use this from bulk enumeration loops, where memoizing millions
    /// of distinct points would only cost memory.
    pub fn identify_transient(&mut self, rep: &Rep) -> usize {
        self.identify_with(rep, false)
    }

    fn identify_with(&mut self, rep: &Rep, remember: bool) -> usize {
        assert_eq!(rep.p, self.p);
        let bytes = rep.to_bytes();
        if let Some(&c) = self.point_memo.get(&bytes) {
            return c;
        }
        let fp = self.fingerprint(rep);
        // complete test against known indecomposables with the same invariants
        let mut key: Option<Vec<(usize, u32)>> = None;
        if let Some(cands) = self.indec_by_fp.get(&fp) {
            for &i in cands {
                if indec_iso(&self.quiver, rep, &self.indecs[i].rep) {
                    key = Some(vec![(i, 1)]);
                    break;
                }
            }
        }
        let key = key.unwrap_or_else(|| {
            let pieces = decompose(&self.quiver, rep);
            let mut mult: BTreeMap<usize, u32> = BTreeMap::new();
            for piece in &pieces {
                *mult.entry(self.identify_indec(piece)).or_insert(0) += 1;
            }
            mult.into_iter().collect()
        });
        let c = self.intern_class(key, rep);
        if remember {
            self.point_memo.insert(bytes, c);
        }
        c
    }

    fn identify_indec(&mut self, w: &Rep) -> usize {
        let bytes = w.to_bytes();
        if let Some(&i) = self.indec_memo.get(&bytes) {
            return i;
        }
        let fp = self.fingerprint(w);
        if let Some(cands) = self.indec_by_fp.get(&fp) {
            for &i in cands {
                if indec_iso(&self.quiver, w, &self.indecs[i].rep) {
                    self.indec_memo.insert(bytes, i);
                    return i;
                }
            }
        }
        // new indecomposable: record it and its hom dimensions to the others
        let t = self.indecs.len();
        let res_deg = residue_degree(&self.quiver, w);
        let mut own_row: Vec<usize> = Vec::with_capacity(t + 1);
        for s in 0..t {
            let fwd = hom_basis(&self.quiver, &self.indecs[s].rep, w).len();
            self.hom_dims[s].push(fwd);
            own_row.push(hom_basis(&self.quiver, w, &self.indecs[s].rep).len());
        }
        own_row.push(fp.dim_end);
        self.hom_dims.push(own_row);
        self.indecs.push(IndecInfo { rep: w.clone(), res_deg });
        self.indec_by_fp.entry(fp).or_default().push(t);
        self.indec_memo.insert(bytes, t);
        t
    }

    fn intern_class(&mut self, key: Vec<(usize, u32)>, witness: &Rep) -> usize {
        if let Some(&c) = self.class_lookup.get(&key) {
            return c;
        }
        let aut = self.aut_from_key(&key);
        let c = self.classes.len();
        self.classes.push(ClassInfo {
            key: key.clone(),
            dims: witness.dims.clone(),
            aut,
            witness: witness.clone(),
        });
        self.class_lookup.insert(key, c);
        c
    }

    /// `|Aut(M)|` for `M = ⊕ W_t^{m_t}`: the radical of `End(M)` has
    /// `p^(dim End - sum m_t^2 d_t)` elements and the reductive quotient is
    /// `prod GL_{m_t}(F_{p^{d_t}})`.
    fn aut_from_key(&self, key: &[(usize, u32)]) -> BigInt {
        let mut dim_end: i64 = 0;
        for &(s, ms) in key {
            for &(t, mt) in key {
                dim_end += ms as i64 * mt as i64 * self.hom_dims[s][t] as i64;
            }
        }
        let mut reductive_dim: i64 = 0;
        let mut order = BigInt::one();
        for &(t, m) in key {
            let d = self.indecs[t].res_deg;
            reductive_dim += (m * m * d) as i64;
            order *= gl_order(self.p, d, m);
        }
        let rad_dim = dim_end - reductive_dim;
        assert!(rad_dim >= 0, "radical dimension cannot be negative");
        order * BigInt::from(self.p).pow(rad_dim as u32)
    }

    /// Order of the base-change group `prod_i GL_{d_i}(F_p)`.
    pub fn group_order(&self, dims: &[u32]) -> BigInt {
        dims.iter().map(|&d| gl_order(self.p, 1, d)).product()
    }

    /// Classify every representation with the given dimension vector by brute
    /// enumeration of all map tuples. Returns `(class index, point count)`
    /// pairs sorted by class index. With `nilpotent_only`, points that are not
    /// nilpotent are skipped.
    pub fn classify(
        &mut self,
        dims: &[u32],
        nilpotent_only: bool,
        budget: u128,
    ) -> Result<Vec<(usize, u128)>> {
        let arrows = self.quiver.arrows();
        assert_eq!(dims.len(), self.quiver.vertex_count());
        let mut entries: u64 = 0;
        for &(s, t) in &arrows {
            entries += dims[t] as u64 * dims[s] as u64;
        }
        let needed = u32::try_from(entries)
            .ok()
            .and_then(|e| (self.p as u128).checked_pow(e))
            .unwrap_or(u128::MAX);
        if needed > budget {
            return Err(Error::Budget {
                what: format!("classify dimension vector {dims:?}"),
                needed,
                budget,
            });
        }
        let quiver = self.quiver.clone();
        let mut counts: BTreeMap<usize, u128> = BTreeMap::new();
        let mut rep = Rep::zero_maps(&quiver, self.p, dims.to_vec());
        loop {
            if !nilpotent_only || is_nilpotent(&quiver, &rep) {
                let c = self.identify_transient(&rep);
                *counts.entry(c).or_insert(0) += 1;
            }
            if !advance_point(&mut rep) {
                break;
            }
        }
        Ok(counts.into_iter().collect())
    }
}

/// Advance through all map tuples like an odometer; returns false after the
/// last one wraps back to all zeros.
fn advance_point(rep: &mut Rep) -> bool {
    let p = rep.p;
    for a in 0..rep.maps.len() {
        let m = &mut rep.maps[a];
        for i in 0..m.rows {
            for j in 0..m.cols {
                let x = m.get(i, j) + 1;
                if x < p {
                    m.set(i, j, x);
                    return true;
                }
                m.set(i, j, 0);
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repmod::rep::is_iso_map;

    /// Independent automorphism count: enumerate all of `End(M)` as linear
    /// combinations of a hom basis and count the invertible ones.
    fn aut_bruteforce(q: &Quiver, rep: &Rep) -> u128 {
        let basis = hom_basis(q, rep, rep);
        let p = rep.p;
        let k = basis.len();
        assert!((p as u128).pow(k as u32) <= 1 << 24, "brute force too large");
        let mut count = 0u128;
        let mut coeffs = vec![0u32; k];
        loop {
            let f: Vec<FqMat> = (0..rep.dims.len())
                .map(|i| {
                    let mut acc = FqMat::zero(
                        p,
                        rep.dims[i] as usize,
                        rep.dims[i] as usize,
                    );
                    for (c, b) in coeffs.iter().zip(&basis) {
                        acc = acc.add(&b[i].scale(*c));
                    }
                    acc
                })
                .collect();
            if is_iso_map(&f) {
                count += 1;
            }
            // odometer
            let mut pos = 0;
            loop {
                if pos == k {
                    return count;
                }
                coeffs[pos] += 1;
                if coeffs[pos] < p {
                    break;
                }
                coeffs[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn gl_orders() {
        assert_eq!(gl_order(2, 1, 2), BigInt::from(6));
        assert_eq!(gl_order(3, 1, 2), BigInt::from(48));
        assert_eq!(gl_order(2, 2, 1), BigInt::from(3)); // |GL_1(F_4)|
        assert_eq!(gl_order(5, 1, 0), BigInt::one());
        // |GL_2(F_4)| = (16-1)(16-4)
        assert_eq!(gl_order(2, 2, 2), BigInt::from(180));
    }

    #[test]
    fn loop_vertex_classification_satisfies_mass_formula() {
        // all 2x2 matrices over F_2 and F_3 up to conjugacy: q^2 + q classes
        for p in [2u32, 3] {
            let mut reg = ClassRegistry::new(Quiver::jordan(), p);
            let counts = reg.classify(&[2], false, 1 << 20).unwrap();
            assert_eq!(counts.len(), (p * p + p) as usize);
            let g = reg.group_order(&[2]);
            let total: u128 = counts.iter().map(|&(_, n)| n).sum();
            assert_eq!(total, (p as u128).pow(4));
            for &(c, n) in &counts {
                // orbit-stabilizer: |orbit| * |Aut| = |GL_2(F_p)|
                assert_eq!(BigInt::from(n) * &reg.class(c).aut, g, "class {c}");
            }
        }
    }

    #[test]
    fn nilpotent_classification_of_a_loop() {
        let mut reg = ClassRegistry::new(Quiver::jordan(), 2);
        let counts = reg.classify(&[2], true, 1 << 20).unwrap();
        // nilpotent 2x2 over F_2: the zero matrix and three conjugates of J_2
        assert_eq!(counts.len(), 2);
        let total: u128 = counts.iter().map(|&(_, n)| n).sum();
        assert_eq!(total, 4);
        let auts: Vec<BigInt> = counts.iter().map(|&(c, _)| reg.class(c).aut.clone()).collect();
        let mut auts_u: Vec<u128> = auts.iter().map(|a| a.try_into().unwrap()).collect();
        auts_u.sort_unstable();
        assert_eq!(auts_u, vec![2, 6]); // |Aut(J_2)| = 2, |GL_2(F_2)| = 6
    }

    #[test]
    fn aut_counts_match_bruteforce() {
        let q = Quiver::jordan();
        for p in [2u32, 3] {
            let mut reg = ClassRegistry::new(q.clone(), p);
            // J_2 nilpotent block
            let mut j2 = FqMat::zero(p, 2, 2);
            j2.set(0, 1, 1);
            let rep = Rep::new(&q, p, vec![2], vec![j2]);
            let c = reg.identify(&rep);
            assert_eq!(
                BigInt::from(aut_bruteforce(&q, &rep)),
                reg.class(c).aut,
                "J_2 over F_{p}"
            );
            // semisimple of dimension 2
            let triv = Rep::zero_maps(&q, p, vec![2]);
            let c = reg.identify(&triv);
            assert_eq!(BigInt::from(aut_bruteforce(&q, &triv)), reg.class(c).aut);
            assert_eq!(reg.class(c).aut, gl_order(p, 1, 2));
        }
        // the indecomposable with residue field F_9
        let c_mat = FqMat::from_rows(3, &[vec![0, 2], vec![1, 0]]);
        let rep = Rep::new(&q, 3, vec![2], vec![c_mat]);
        let mut reg = ClassRegistry::new(q.clone(), 3);
        let c = reg.identify(&rep);
        assert_eq!(reg.class(c).aut, BigInt::from(8)); // |F_9^x|
        assert_eq!(BigInt::from(aut_bruteforce(&q, &rep)), reg.class(c).aut);
    }

    #[test]
    fn identify_is_stable_across_presentations() {
        // the same module met through different matrices lands in one class
        let q = Quiver::jordan();
        let p = 3;
        let mut reg = ClassRegistry::new(q.clone(), p);
        let a = Rep::new(&q, p, vec![2], vec![FqMat::from_rows(p, &[vec![0, 1], vec![0, 0]])]);
        let b = Rep::new(&q, p, vec![2], vec![FqMat::from_rows(p, &[vec![0, 0], vec![2, 0]])]);
        let ca = reg.identify(&a);
        let cb = reg.identify(&b);
        assert_eq!(ca, cb);
        // direct sums in either order agree
        let s1 = a.direct_sum(&Rep::level(&q, p, 0, 1));
        let s2 = Rep::level(&q, p, 0, 1).direct_sum(&a);
        assert_eq!(reg.identify(&s1), reg.identify(&s2));
    }

    #[test]
    fn empty_module_has_trivial_class() {
        let q = Quiver::a2();
        let mut reg = ClassRegistry::new(q.clone(), 2);
        let zero = Rep::zero_maps(&q, 2, vec![0, 0]);
        let c = reg.identify(&zero);
        assert_eq!(reg.class(c).aut, BigInt::one());
        assert_eq!(reg.describe(c), "0");
    }

    #[test]
    fn arrow_quiver_classes() {
        // maps F -> F over F_2: zero map (split) and the full extension
        let mut reg = ClassRegistry::new(Quiver::a2(), 2);
        let counts = reg.classify(&[1, 1], false, 1 << 20).unwrap();
        assert_eq!(counts.len(), 2);
        for &(c, n) in &counts {
            assert_eq!(n, 1);
            assert_eq!(reg.class(c).aut, BigInt::one());
        }
        let descriptions: Vec<String> =
            counts.iter().map(|&(c, _)| reg.describe(c)).collect();
        // one class splits into two indecomposables, the other is one piece
        assert!(descriptions.iter().any(|d| d.contains(" + ")));
        assert!(descriptions.iter().any(|d| !d.contains(" + ")));
    }

    #[test]
    fn budget_guard_fires() {
        let mut reg = ClassRegistry::new(Quiver::jordan(), 11);
        let err = reg.classify(&[4], false, 1000).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
    }
}
