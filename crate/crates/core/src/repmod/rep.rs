use super::fqmat::{FqMat, SubspaceIter};
use crate::quiver::{DimVec, Quiver};

/// A finite-dimensional representation of a quiver over `F_p`.
///
/// `maps[a]` is the matrix of the arrow `a` (in `Quiver::arrows()` order)
/// acting on column vectors, so its shape is `dims[target] x dims[source]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rep {
    pub p: u32,
    pub dims: DimVec,
    pub maps: Vec<FqMat>,
}

impl Rep {
    pub fn new(q: &Quiver, p: u32, dims: DimVec, maps: Vec<FqMat>) -> Self {
        let arrows = q.arrows();
        assert_eq!(dims.len(), q.vertex_count());
        assert_eq!(maps.len(), arrows.len());
        for (m, &(s, t)) in maps.iter().zip(&arrows) {
            assert_eq!(m.rows as u32, dims[t], "map shape mismatch");
            assert_eq!(m.cols as u32, dims[s], "map shape mismatch");
            assert_eq!(m.p, p);
        }
        Rep { p, dims, maps }
    }

    /// The representation with dimension vector `dims` and every arrow acting
    /// as zero.
    pub fn zero_maps(q: &Quiver, p: u32, dims: DimVec) -> Self {
        let maps = q
            .arrows()
            .iter()
            .map(|&(s, t)| FqMat::zero(p, dims[t] as usize, dims[s] as usize))
            .collect();
        Rep { p, dims, maps }
    }

    /// The simple module concentrated at vertex `i` (loops act by zero).
    pub fn simple(q: &Quiver, p: u32, i: usize) -> Self {
        Self::level(q, p, i, 1)
    }

    /// The level-`l` module at vertex `i`: dimension `l` at `i`, zero
    /// elsewhere, all arrows (loops included) acting by zero.
    pub fn level(q: &Quiver, p: u32, i: usize, l: u32) -> Self {
        let mut dims = vec![0; q.vertex_count()];
        dims[i] = l;
        Self::zero_maps(q, p, dims)
    }

    pub fn total_dim(&self) -> u32 {
        self.dims.iter().sum()
    }

    pub fn direct_sum(&self, other: &Rep) -> Rep {
        assert_eq!(self.p, other.p);
        assert_eq!(self.dims.len(), other.dims.len());
        assert_eq!(self.maps.len(), other.maps.len());
        let dims: DimVec = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        let maps = self
            .maps
            .iter()
            .zip(&other.maps)
            .map(|(a, b)| {
                let mut m = FqMat::zero(self.p, a.rows + b.rows, a.cols + b.cols);
                for i in 0..a.rows {
                    for j in 0..a.cols {
                        m.set(i, j, a.get(i, j));
                    }
                }
                for i in 0..b.rows {
                    for j in 0..b.cols {
                        m.set(a.rows + i, a.cols + j, b.get(i, j));
                    }
                }
                m
            })
            .collect();
        Rep { p: self.p, dims, maps }
    }

    /// Stable byte image for memoization keys.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.p.to_le_bytes());
        out.extend_from_slice(&(self.dims.len() as u32).to_le_bytes());
        for &d in &self.dims {
            out.extend_from_slice(&d.to_le_bytes());
        }
        for m in &self.maps {
            m.to_bytes(&mut out);
        }
        out
    }
}

/// A tuple of subspaces, one per vertex, each stored as a reduced-echelon
/// basis (rows) with its pivot columns.
#[derive(Clone, PartialEq, Eq)]
pub struct SubTuple {
    pub basis: Vec<FqMat>,
    pub pivots: Vec<Vec<usize>>,
}

impl SubTuple {
    pub fn from_bases(bases: Vec<FqMat>) -> Self {
        let mut basis = Vec::with_capacity(bases.len());
        let mut pivots = Vec::with_capacity(bases.len());
        for b in bases {
            let (r, pv) = b.rref();
            basis.push(r);
            pivots.push(pv);
        }
        SubTuple { basis, pivots }
    }

    pub fn dims(&self) -> DimVec {
        self.basis.iter().map(|b| b.rows as u32).collect()
    }

    pub fn total_dim(&self) -> u32 {
        self.basis.iter().map(|b| b.rows as u32).sum()
    }

    /// The full space of `rep`, as a subspace tuple.
    pub fn full(rep: &Rep) -> Self {
        let basis: Vec<FqMat> = rep
            .dims
            .iter()
            .map(|&d| FqMat::identity(rep.p, d as usize))
            .collect();
        let pivots = rep.dims.iter().map(|&d| (0..d as usize).collect()).collect();
        SubTuple { basis, pivots }
    }
}

/// Is the subspace tuple `u` stable under every arrow map of `rep`?
pub fn is_stable(q: &Quiver, rep: &Rep, u: &SubTuple) -> bool {
    for (m, &(s, t)) in rep.maps.iter().zip(&q.arrows()) {
        let src = &u.basis[s];
        for r in 0..src.rows {
            let img = m.mul(&FqMat::from_rows(rep.p, &[src.row(r).to_vec()]).transpose());
            let img_row: Vec<u32> = (0..img.rows).map(|i| img.get(i, 0)).collect();
            if !u.basis[t].rowspace_contains(&u.pivots[t], &img_row) {
                return false;
            }
        }
    }
    true
}

/// The subrepresentation carried by a stable subspace tuple, in the basis
/// given by its rows.
pub fn sub_rep(q: &Quiver, rep: &Rep, u: &SubTuple) -> Rep {
    let dims: DimVec = u.dims();
    let maps = rep
        .maps
        .iter()
        .zip(&q.arrows())
        .map(|(m, &(s, t))| {
            let src = &u.basis[s];
            let dst = &u.basis[t];
            let mut out = FqMat::zero(rep.p, dst.rows, src.rows);
            for c in 0..src.rows {
                let img = m.mul(&FqMat::from_rows(rep.p, &[src.row(c).to_vec()]).transpose());
                let img_row: Vec<u32> = (0..img.rows).map(|i| img.get(i, 0)).collect();
                debug_assert!(dst.rowspace_contains(&u.pivots[t], &img_row));
                // reduced echelon rows: the coefficient of row r is the image
                // entry at r's pivot column
                for (r, &pc) in u.pivots[t].iter().enumerate() {
                    out.set(r, c, img_row[pc]);
                }
            }
            out
        })
        .collect();
    Rep { p: rep.p, dims, maps }
}

/// The quotient representation by a stable subspace tuple, in the coordinates
/// of the non-pivot columns.
pub fn quotient_rep(q: &Quiver, rep: &Rep, u: &SubTuple) -> Rep {
    let n = rep.dims.len();
    let cobasis: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..rep.dims[i] as usize)
                .filter(|c| !u.pivots[i].contains(c))
                .collect()
        })
        .collect();
    let dims: DimVec = cobasis.iter().map(|c| c.len() as u32).collect();
    let maps = rep
        .maps
        .iter()
        .zip(&q.arrows())
        .map(|(m, &(s, t))| {
            let mut out = FqMat::zero(rep.p, cobasis[t].len(), cobasis[s].len());
            for (c, &src_col) in cobasis[s].iter().enumerate() {
                // image of the section of the c-th quotient basis vector
                let mut e = vec![0u32; rep.dims[s] as usize];
                e[src_col] = 1;
                let img = m.mul(&FqMat::from_rows(rep.p, &[e]).transpose());
                let img_row: Vec<u32> = (0..img.rows).map(|i| img.get(i, 0)).collect();
                let reduced = u.basis[t].reduce_mod_rows(&u.pivots[t], &img_row);
                for (r, &dst_col) in cobasis[t].iter().enumerate() {
                    out.set(r, c, reduced[dst_col]);
                }
            }
            out
        })
        .collect();
    Rep { p: rep.p, dims, maps }
}

/// All subspace tuples of `rep` with the given dimension vector (stable or
/// not), as a lazily advancing product of per-vertex Grassmannians.
pub struct SubTupleIter {
    per_vertex: Vec<Vec<(FqMat, Vec<usize>)>>,
    indices: Vec<usize>,
    done: bool,
}

impl SubTupleIter {
    pub fn new(rep: &Rep, target: &[u32]) -> Self {
        assert_eq!(target.len(), rep.dims.len());
        if target.iter().zip(&rep.dims).any(|(&k, &d)| k > d) {
            return SubTupleIter { per_vertex: Vec::new(), indices: Vec::new(), done: true };
        }
        let per_vertex: Vec<Vec<(FqMat, Vec<usize>)>> = target
            .iter()
            .zip(&rep.dims)
            .map(|(&k, &d)| {
                SubspaceIter::new(rep.p, d as usize, k as usize)
                    .map(|m| {
                        let (r, pv) = m.rref();
                        debug_assert_eq!(r, m);
                        (m, pv)
                    })
                    .collect()
            })
            .collect();
        let done = per_vertex.iter().any(Vec::is_empty);
        let indices = vec![0; per_vertex.len()];
        SubTupleIter { per_vertex, indices, done }
    }
}

impl Iterator for SubTupleIter {
    type Item = SubTuple;

    fn next(&mut self) -> Option<SubTuple> {
        if self.done {
            return None;
        }
        let basis: Vec<FqMat> = self
            .indices
            .iter()
            .zip(&self.per_vertex)
            .map(|(&i, v)| v[i].0.clone())
            .collect();
        let pivots: Vec<Vec<usize>> = self
            .indices
            .iter()
            .zip(&self.per_vertex)
            .map(|(&i, v)| v[i].1.clone())
            .collect();
        // odometer advance
        let mut pos = 0;
        loop {
            if pos == self.indices.len() {
                self.done = true;
                break;
            }
            self.indices[pos] += 1;
            if self.indices[pos] < self.per_vertex[pos].len() {
                break;
            }
            self.indices[pos] = 0;
            pos += 1;
        }
        Some(SubTuple { basis, pivots })
    }
}

/// A basis of the space of homomorphisms `m -> n`, each element a tuple of
/// per-vertex matrices `f_i : m_i -> n_i` with `f_t X_a = Y_a f_s` for every
/// arrow.
pub fn hom_basis(q: &Quiver, m: &Rep, n: &Rep) -> Vec<Vec<FqMat>> {
    assert_eq!(m.p, n.p);
    let p = m.p;
    let nv = q.vertex_count();
    // variable layout: per vertex i, the entries of f_i, row-major
    let mut offset = vec![0usize; nv + 1];
    for i in 0..nv {
        offset[i + 1] = offset[i] + (n.dims[i] * m.dims[i]) as usize;
    }
    let nvars = offset[nv];
    let arrows = q.arrows();
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for (a, &(s, t)) in arrows.iter().enumerate() {
        let xm = &m.maps[a]; // m_t x m_s
        let xn = &n.maps[a]; // n_t x n_s
        let (ms, nt) = (m.dims[s] as usize, n.dims[t] as usize);
        let (mt, ns) = (m.dims[t] as usize, n.dims[s] as usize);
        // constraint: f_t * xm - xn * f_s = 0, an (n_t x m_s) block
        for r in 0..nt {
            for c in 0..ms {
                let mut row = vec![0u32; nvars];
                for k in 0..mt {
                    // f_t[r, k] * xm[k, c]
                    let var = offset[t] + r * mt + k;
                    row[var] = (row[var] + xm.get(k, c)) % p;
                }
                for k in 0..ns {
                    // - xn[r, k] * f_s[k, c]
                    let var = offset[s] + k * ms + c;
                    row[var] = (row[var] + p - xn.get(r, k) % p) % p;
                }
                if row.iter().any(|&x| x != 0) {
                    rows.push(row);
                }
            }
        }
    }
    let system = if rows.is_empty() {
        FqMat::zero(p, 0, nvars)
    } else {
        FqMat::from_rows(p, &rows)
    };
    let kernel = system.kernel_basis();
    (0..kernel.rows)
        .map(|b| {
            (0..nv)
                .map(|i| {
                    let (rows_i, cols_i) = (n.dims[i] as usize, m.dims[i] as usize);
                    let mut f = FqMat::zero(p, rows_i, cols_i);
                    for r in 0..rows_i {
                        for c in 0..cols_i {
                            f.set(r, c, kernel.get(b, offset[i] + r * cols_i + c));
                        }
                    }
                    f
                })
                .collect()
        })
        .collect()
}

pub fn dim_hom(q: &Quiver, m: &Rep, n: &Rep) -> usize {
    hom_basis(q, m, n).len()
}

pub fn dim_end(q: &Quiver, m: &Rep) -> usize {
    dim_hom(q, m, m)
}

/// Is the morphism tuple an isomorphism?
pub fn is_iso_map(f: &[FqMat]) -> bool {
    f.iter().all(FqMat::is_invertible)
}

/// Try to split `rep` along an endomorphism `f`: for large `N`,
/// `rep = ker(f^N) ⊕ im(f^N)`, both stable. Returns the two stable tuples
/// when the split is nontrivial.
pub fn fitting_split(rep: &Rep, f: &[FqMat]) -> Option<(SubTuple, SubTuple)> {
    let nbig = rep.dims.iter().copied().max().unwrap_or(0);
    let mut ker_bases = Vec::new();
    let mut im_bases = Vec::new();
    for (i, fi) in f.iter().enumerate() {
        debug_assert!(fi.is_square());
        let g = fi.pow(nbig);
        let k = g.kernel_basis();
        let (im, _) = g.transpose().rref(); // rows span the column space of g
        if k.rows + im.rows != rep.dims[i] as usize {
            // cannot happen for a power high enough to stabilize
            return None;
        }
        ker_bases.push(k);
        im_bases.push(im);
    }
    let ker = SubTuple::from_bases(ker_bases);
    let im = SubTuple::from_bases(im_bases);
    let (dk, di) = (ker.total_dim(), im.total_dim());
    if dk == 0 || di == 0 {
        return None;
    }
    Some((ker, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jordan_block(p: u32, n: usize) -> FqMat {
        let mut m = FqMat::zero(p, n, n);
        for i in 0..n - 1 {
            m.set(i, i + 1, 1);
        }
        m
    }

    /// Single-loop quiver, one Jordan block of size `n` (nilpotent).
    fn jordan_rep(p: u32, n: usize) -> (Quiver, Rep) {
        let q = Quiver::jordan();
        let rep = Rep::new(&q, p, vec![n as u32], vec![jordan_block(p, n)]);
        (q, rep)
    }

    #[test]
    fn hom_between_simples() {
        let q = Quiver::a2();
        let si = Rep::simple(&q, 3, 0);
        let sj = Rep::simple(&q, 3, 1);
        assert_eq!(dim_hom(&q, &si, &si), 1);
        assert_eq!(dim_hom(&q, &si, &sj), 0);
        assert_eq!(dim_hom(&q, &sj, &si), 0);
    }

    #[test]
    fn end_of_jordan_block_is_polynomial_algebra() {
        // End(F[x]/x^n with x acting as J_n) has dimension n
        for n in 1..=4usize {
            let (q, rep) = jordan_rep(5, n);
            assert_eq!(dim_end(&q, &rep), n);
        }
    }

    #[test]
    fn hom_maps_commute_with_action() {
        let q = Quiver::arrow_to_loop();
        let p = 3;
        // dims (1, 2): arrow embeds, loop acts as J_2
        let rep = Rep::new(
            &q,
            p,
            vec![1, 2],
            vec![
                FqMat::from_rows(p, &[vec![1], vec![0]]),
                jordan_block(p, 2),
            ],
        );
        let basis = hom_basis(&q, &rep, &rep);
        assert!(!basis.is_empty());
        for f in &basis {
            for (a, &(s, t)) in q.arrows().iter().enumerate() {
                assert_eq!(f[t].mul(&rep.maps[a]), rep.maps[a].mul(&f[s]));
            }
        }
    }

    #[test]
    fn invariant_subspaces_of_a_jordan_block() {
        // J_n has exactly one invariant subspace in each dimension
        let (q, rep) = jordan_rep(3, 3);
        for k in 0..=3u32 {
            let stable: Vec<SubTuple> = SubTupleIter::new(&rep, &[k])
                .filter(|u| is_stable(&q, &rep, u))
                .collect();
            assert_eq!(stable.len(), 1, "k={k}");
        }
    }

    #[test]
    fn sub_and_quotient_of_jordan_block() {
        let (q, rep) = jordan_rep(5, 3);
        // the invariant 1-dim subspace is the kernel of J (first coordinate)
        let u = SubTupleIter::new(&rep, &[1])
            .find(|u| is_stable(&q, &rep, u))
            .unwrap();
        let s = sub_rep(&q, &rep, &u);
        assert_eq!(s.dims, vec![1]);
        assert!(s.maps[0].is_zero());
        let quot = quotient_rep(&q, &rep, &u);
        assert_eq!(quot.dims, vec![2]);
        // quotient is a size-2 Jordan block: nilpotent of rank 1
        assert_eq!(quot.maps[0].rank(), 1);
        assert!(quot.maps[0].pow(2).is_zero());
    }

    #[test]
    fn direct_sum_block_structure() {
        let (q, a) = jordan_rep(3, 2);
        let b = Rep::level(&q, 3, 0, 1);
        let s = a.direct_sum(&b);
        assert_eq!(s.dims, vec![3]);
        assert_eq!(s.maps[0].rank(), 1);
        assert_eq!(dim_end(&q, &s), 2 + 1 + 1 + 1); // End(J2)+Hom both ways+End(triv)
    }

    #[test]
    fn fitting_splits_zero_times_invertible() {
        let q = Quiver::jordan();
        let p = 5;
        // loop acts as diag(0, 1): splits into nilpotent and invertible parts
        let rep = Rep::new(
            &q,
            p,
            vec![2],
            vec![FqMat::from_rows(p, &[vec![0, 0], vec![0, 1]])],
        );
        let f = vec![rep.maps[0].clone()];
        let (ker, im) = fitting_split(&rep, &f).unwrap();
        assert_eq!(ker.total_dim(), 1);
        assert_eq!(im.total_dim(), 1);
        assert!(is_stable(&q, &rep, &ker));
        assert!(is_stable(&q, &rep, &im));
        // a nilpotent endomorphism gives no split
        let (_, nil) = jordan_rep(5, 2);
        assert!(fitting_split(&nil, &[nil.maps[0].clone()]).is_none());
    }

    #[test]
    fn subtuple_iter_counts() {
        let q = Quiver::a2();
        let rep = Rep::zero_maps(&q, 2, vec![2, 1]);
        // subspaces of dim (1, 1): Gr(1,2)(F_2) x Gr(1,1) = 3 x 1
        assert_eq!(SubTupleIter::new(&rep, &[1, 1]).count(), 3);
        // all of them are stable for zero maps
        assert!(SubTupleIter::new(&rep, &[1, 1]).all(|u| is_stable(&q, &rep, &u)));
        let _ = rep;
    }
}
