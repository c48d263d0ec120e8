use std::fmt;

/// Inverse of `a` modulo the prime `p`, for `a != 0`.
pub fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(a % p != 0, "division by zero mod {p}");
    // extended Euclid on (a, p)
    let (mut old_r, mut r) = (a as i64, p as i64);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    old_s.rem_euclid(p as i64) as u32
}

/// Dense matrix over the prime field `F_p`, entries stored reduced mod `p`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FqMat {
    pub p: u32,
    pub rows: usize,
    pub cols: usize,
    data: Vec<u32>,
}

impl FqMat {
    pub fn zero(p: u32, rows: usize, cols: usize) -> Self {
        FqMat { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zero(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(p: u32, rows: &[Vec<u32>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zero(p, r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &x) in row.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: u32) {
        self.data[i * self.cols + j] = x % self.p;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[u32] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn add(&self, rhs: &FqMat) -> FqMat {
        assert_eq!((self.rows, self.cols, self.p), (rhs.rows, rhs.cols, rhs.p));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a = (*a + b) % self.p;
        }
        out
    }

    pub fn sub(&self, rhs: &FqMat) -> FqMat {
        assert_eq!((self.rows, self.cols, self.p), (rhs.rows, rhs.cols, rhs.p));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a = (*a + self.p - b) % self.p;
        }
        out
    }

    pub fn neg(&self) -> FqMat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = (self.p - *a) % self.p;
        }
        out
    }

    pub fn scale(&self, c: u32) -> FqMat {
        let c = c % self.p;
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = ((*a as u64 * c as u64) % self.p as u64) as u32;
        }
        out
    }

    pub fn mul(&self, rhs: &FqMat) -> FqMat {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in matrix product");
        assert_eq!(self.p, rhs.p);
        let mut out = FqMat::zero(self.p, self.rows, rhs.cols);
        let p64 = self.p as u64;
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k) as u64;
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let cur = out.get(i, j) as u64;
                    out.data[i * out.cols + j] = ((cur + a * rhs.get(k, j) as u64) % p64) as u32;
                }
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> FqMat {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = FqMat::identity(self.p, self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn transpose(&self) -> FqMat {
        let mut out = FqMat::zero(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hstack(&self, rhs: &FqMat) -> FqMat {
        assert_eq!(self.rows, rhs.rows);
        assert_eq!(self.p, rhs.p);
        let mut out = FqMat::zero(self.p, self.rows, self.cols + rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
            for j in 0..rhs.cols {
                out.set(i, self.cols + j, rhs.get(i, j));
            }
        }
        out
    }

    /// Vertical concatenation.
    pub fn vstack(&self, rhs: &FqMat) -> FqMat {
        assert_eq!(self.cols, rhs.cols);
        assert_eq!(self.p, rhs.p);
        let mut out = FqMat::zero(self.p, self.rows + rhs.rows, self.cols);
        out.data[..self.data.len()].copy_from_slice(&self.data);
        out.data[self.data.len()..].copy_from_slice(&rhs.data);
        out
    }

    /// Reduced row echelon form with zero rows dropped; returns the matrix and
    /// the pivot column of each remaining row.
    pub fn rref(&self) -> (FqMat, Vec<usize>) {
        let mut m = self.clone();
        let p64 = m.p as u64;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            let Some(pr) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    let (a, b) = (m.get(r, j), m.get(pr, j));
                    m.set(r, j, b);
                    m.set(pr, j, a);
                }
            }
            let inv = inv_mod(m.get(r, c), m.p) as u64;
            for j in c..m.cols {
                let x = (m.get(r, j) as u64 * inv % p64) as u32;
                m.set(r, j, x);
            }
            for i in 0..m.rows {
                if i != r && m.get(i, c) != 0 {
                    let f = m.get(i, c) as u64;
                    for j in c..m.cols {
                        let x = (m.get(i, j) as u64 + p64 * p64 - f * m.get(r, j) as u64) % p64;
                        m.set(i, j, x as u32);
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == m.rows {
                break;
            }
        }
        m.rows = r;
        m.data.truncate(r * m.cols);
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel `{x : self * x = 0}`, one vector per row.
    pub fn kernel_basis(&self) -> FqMat {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = FqMat::zero(self.p, free.len(), self.cols);
        for (k, &fc) in free.iter().enumerate() {
            out.set(k, fc, 1);
            for (row, &pc) in pivots.iter().enumerate() {
                let x = r.get(row, fc);
                if x != 0 {
                    out.set(k, pc, self.p - x);
                }
            }
        }
        out
    }

    /// One solution `X` of `self * X = b`, if any.
    pub fn solve(&self, b: &FqMat) -> Option<FqMat> {
        assert_eq!(self.rows, b.rows);
        let aug = self.hstack(b);
        let (r, pivots) = aug.rref();
        // a pivot in the right block means an inconsistent row
        if pivots.iter().any(|&c| c >= self.cols) {
            return None;
        }
        let mut x = FqMat::zero(self.p, self.cols, b.cols);
        for (row, &pc) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.set(pc, j, r.get(row, self.cols + j));
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<FqMat> {
        if !self.is_square() {
            return None;
        }
        let inv = self.solve(&FqMat::identity(self.p, self.rows))?;
        if self.mul(&inv) == FqMat::identity(self.p, self.rows) {
            Some(inv)
        } else {
            None
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// Reduce `vec` modulo the row space of an RREF matrix with the given
    /// pivot columns.
    pub fn reduce_mod_rows(&self, pivots: &[usize], vec: &[u32]) -> Vec<u32> {
        assert_eq!(vec.len(), self.cols);
        let p64 = self.p as u64;
        let mut v: Vec<u32> = vec.to_vec();
        for (row, &pc) in pivots.iter().enumerate() {
            let f = v[pc] as u64;
            if f != 0 {
                for j in 0..self.cols {
                    v[j] = ((v[j] as u64 + p64 * p64 - f * self.get(row, j) as u64) % p64) as u32;
                }
            }
        }
        v
    }

    /// Does the row space of this RREF matrix contain `vec`?
    pub fn rowspace_contains(&self, pivots: &[usize], vec: &[u32]) -> bool {
        self.reduce_mod_rows(pivots, vec).iter().all(|&x| x == 0)
    }

    /// Raw little-endian byte image, prefixed by the shape; stable across runs.
    pub fn to_bytes(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        for &x in &self.data {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
}

impl fmt::Debug for FqMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FqMat {}x{} mod {}", self.rows, self.cols, self.p)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

/// Iterator over all `k`-dimensional subspaces of `F_p^n`, each produced as a
/// `k x n` matrix in reduced row echelon form (unique per subspace).
pub struct SubspaceIter {
    p: u32,
    n: usize,
    k: usize,
    pivots: Option<Vec<usize>>,
    free_positions: Vec<(usize, usize)>,
    counter: Vec<u32>,
    exhausted_free: bool,
}

impl SubspaceIter {
    pub fn new(p: u32, n: usize, k: usize) -> Self {
        let pivots = if k <= n { Some((0..k).collect()) } else { None };
        let mut it = SubspaceIter {
            p,
            n,
            k,
            pivots,
            free_positions: Vec::new(),
            counter: Vec::new(),
            exhausted_free: false,
        };
        it.reset_free();
        it
    }

    fn reset_free(&mut self) {
        self.free_positions.clear();
        if let Some(pv) = &self.pivots {
            for (r, &pc) in pv.iter().enumerate() {
                for c in (pc + 1)..self.n {
                    if !pv.contains(&c) {
                        self.free_positions.push((r, c));
                    }
                }
            }
        }
        self.counter = vec![0; self.free_positions.len()];
        self.exhausted_free = false;
    }

    fn advance_pivots(&mut self) {
        // next k-combination of 0..n in lexicographic order
        let pv = self.pivots.as_mut().unwrap();
        let (n, k) = (self.n, self.k);
        let mut i = k;
        loop {
            if i == 0 {
                self.pivots = None;
                return;
            }
            i -= 1;
            if pv[i] + 1 <= n - (k - i) {
                pv[i] += 1;
                for j in i + 1..k {
                    pv[j] = pv[j - 1] + 1;
                }
                break;
            }
        }
        self.reset_free();
    }

    fn advance_free(&mut self) {
        for digit in self.counter.iter_mut() {
            *digit += 1;
            if *digit < self.p {
                return;
            }
            *digit = 0;
        }
        self.exhausted_free = true;
    }
}

impl Iterator for SubspaceIter {
    type Item = FqMat;

    fn next(&mut self) -> Option<FqMat> {
        loop {
            let pv = self.pivots.as_ref()?;
            if self.exhausted_free {
                self.advance_pivots();
                continue;
            }
            let mut m = FqMat::zero(self.p, self.k, self.n);
            for (r, &pc) in pv.iter().enumerate() {
                m.set(r, pc, 1);
            }
            for (idx, &(r, c)) in self.free_positions.iter().enumerate() {
                m.set(r, c, self.counter[idx]);
            }
            self.advance_free();
            return Some(m);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modular_inverse() {
        for p in [2u32, 3, 5, 7, 11, 13] {
            for a in 1..p {
                assert_eq!(a as u64 * inv_mod(a, p) as u64 % p as u64, 1);
            }
        }
    }

    #[test]
    fn rref_and_rank() {
        // middle row is 2x the first, so the pivot skips to the last column
        let m = FqMat::from_rows(5, &[vec![1, 2, 0], vec![2, 4, 1], vec![3, 6, 2]]);
        let (r, pivots) = m.rref();
        assert_eq!(pivots, vec![0, 2]);
        assert_eq!(r.rows, 2);
        assert_eq!(m.rank(), 2);
        // rows of the rref stay in the original row space: rank of the stack
        // cannot grow
        assert_eq!(m.vstack(&r).rank(), 2);
    }

    #[test]
    fn kernel_solves_to_zero() {
        let m = FqMat::from_rows(7, &[vec![1, 2, 3, 4], vec![0, 1, 2, 3]]);
        let k = m.kernel_basis();
        assert_eq!(k.rows, 2); // 4 columns, rank 2
        let prod = m.mul(&k.transpose());
        assert!(prod.is_zero());
    }

    #[test]
    fn solve_and_inverse() {
        let a = FqMat::from_rows(11, &[vec![1, 2], vec![3, 4]]);
        let b = FqMat::from_rows(11, &[vec![5], vec![6]]);
        let x = a.solve(&b).unwrap();
        assert_eq!(a.mul(&x), b);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), FqMat::identity(11, 2));
        // singular system with no solution
        let s = FqMat::from_rows(3, &[vec![1, 1], vec![2, 2]]);
        let bad = FqMat::from_rows(3, &[vec![0], vec![1]]);
        assert!(s.solve(&bad).is_none());
        assert!(s.inverse().is_none());
        // singular but consistent
        let ok = FqMat::from_rows(3, &[vec![1], vec![2]]);
        let x = s.solve(&ok).unwrap();
        assert_eq!(s.mul(&x), ok);
    }

    #[test]
    fn subspace_iterator_counts_match_grassmannians() {
        // |Gr(k, n)(F_p)| via the iterator, against the q-binomial evaluation
        use crate::exactnum::gauss_binomial;
        for p in [2u32, 3] {
            for n in 0..=4usize {
                for k in 0..=n {
                    let count = SubspaceIter::new(p, n, k).count() as u64;
                    let poly = gauss_binomial(n as u32, k as u32)
                        .shifted((k * (n - k)) as i64);
                    let expected = poly.eval_sqrt(p).expect_rational();
                    assert_eq!(
                        num_rational::BigRational::from_integer(count.into()),
                        expected,
                        "p={p} n={n} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn subspaces_are_distinct_rref() {
        let all: Vec<FqMat> = SubspaceIter::new(3, 4, 2).collect();
        for m in &all {
            let (r, pv) = m.rref();
            assert_eq!(&r, m, "iterator must emit reduced echelon matrices");
            assert_eq!(pv.len(), 2);
        }
        let mut seen = std::collections::HashSet::new();
        for m in &all {
            let mut b = Vec::new();
            m.to_bytes(&mut b);
            assert!(seen.insert(b), "duplicate subspace emitted");
        }
    }

    #[test]
    fn reduce_mod_rows_detects_membership() {
        let m = FqMat::from_rows(5, &[vec![1, 0, 2], vec![0, 1, 3]]);
        let (r, pv) = m.rref();
        assert!(r.rowspace_contains(&pv, &[1, 1, 0]));
        assert!(r.rowspace_contains(&pv, &[2, 0, 4]));
        assert!(!r.rowspace_contains(&pv, &[0, 0, 1]));
    }
}
