//! Quivers with loops, their Euler forms, and the index set for generators.
//!
//! A quiver here is a finite vertex set with a multiset of arrows; arrows from
//! a vertex to itself (loops) are allowed and drive the whole theory: a vertex
//! with no loops behaves like a vertex of a Kac-Moody diagram, a vertex with
//! one loop like an isotropic imaginary simple root, and a vertex with two or
//! more loops like a non-isotropic imaginary one.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dimension vector, indexed by vertex index.
pub type DimVec = Vec<u32>;

/// Sum of two dimension vectors.
pub fn dim_add(a: &[u32], b: &[u32]) -> DimVec {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// The dimension vector of the simple module at vertex `i`, scaled by `l`.
pub fn dim_unit(n: usize, i: usize, l: u32) -> DimVec {
    let mut d = vec![0; n];
    d[i] = l;
    d
}

pub fn dim_total(a: &[u32]) -> u64 {
    a.iter().map(|&x| x as u64).sum()
}

/// How a vertex enters the root theory, determined by its loop count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexKind {
    /// No loops: `a_ii = 2`.
    Real,
    /// Exactly one loop: `a_ii = 0`.
    IsotropicImaginary,
    /// Two or more loops: `a_ii < 0`.
    NonIsotropicImaginary,
}

impl VertexKind {
    pub fn is_imaginary(self) -> bool {
        !matches!(self, VertexKind::Real)
    }
}

impl std::fmt::Display for VertexKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            VertexKind::Real => "real",
            VertexKind::IsotropicImaginary => "imaginary (isotropic)",
            VertexKind::NonIsotropicImaginary => "imaginary (non-isotropic)",
        };
        write!(f, "{s}")
    }
}

#[derive(Serialize, Deserialize)]
struct QuiverData {
    vertices: Vec<String>,
    arrows: Vec<(String, String)>,
}

/// A finite quiver, possibly with loops and multiple arrows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quiver {
    names: Vec<String>,
    /// `counts[i][j]` = number of arrows from `i` to `j`; the diagonal holds
    /// the loop counts.
    counts: Vec<Vec<u32>>,
}

impl Quiver {
    pub fn from_parts<S: Into<String>>(vertices: Vec<S>, arrows: &[(usize, usize)]) -> Result<Self> {
        let names: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let n = names.len();
        if n == 0 {
            return Err(Error::BadInput("quiver needs at least one vertex".into()));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(Error::BadInput(format!("duplicate vertex name {name:?}")));
            }
        }
        let mut counts = vec![vec![0u32; n]; n];
        for &(s, t) in arrows {
            if s >= n || t >= n {
                return Err(Error::BadInput(format!("arrow ({s}, {t}) out of range")));
            }
            counts[s][t] += 1;
        }
        Ok(Quiver { names, counts })
    }

    /// Parse the interchange form
    /// `{"vertices": ["i", "j"], "arrows": [["i", "j"], ["j", "j"]]}`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let data: QuiverData =
            serde_json::from_str(s).map_err(|e| Error::BadInput(format!("bad quiver JSON: {e}")))?;
        let index = |name: &str| -> Result<usize> {
            data.vertices
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::BadInput(format!("arrow endpoint {name:?} is not a vertex")))
        };
        let mut arrows = Vec::with_capacity(data.arrows.len());
        for (s, t) in &data.arrows {
            arrows.push((index(s)?, index(t)?));
        }
        Self::from_parts(data.vertices.clone(), &arrows)
    }

    pub fn to_json_string(&self) -> String {
        let mut arrows = Vec::new();
        for i in 0..self.vertex_count() {
            for j in 0..self.vertex_count() {
                for _ in 0..self.counts[i][j] {
                    arrows.push((self.names[i].clone(), self.names[j].clone()));
                }
            }
        }
        serde_json::to_string(&QuiverData { vertices: self.names.clone(), arrows })
            .expect("quiver serializes")
    }

    /// Single vertex with one loop.
    pub fn jordan() -> Self {
        Self::from_parts(vec!["i"], &[(0, 0)]).unwrap()
    }

    /// Single vertex with `g` loops.
    pub fn loops(g: u32) -> Self {
        let arrows = vec![(0, 0); g as usize];
        Self::from_parts(vec!["i"], &arrows).unwrap()
    }

    /// Two vertices joined by one arrow, no loops.
    pub fn a2() -> Self {
        Self::from_parts(vec!["i", "j"], &[(0, 1)]).unwrap()
    }

    /// Two vertices, one arrow `i -> j`, one loop at `j`.
    pub fn arrow_to_loop() -> Self {
        Self::from_parts(vec!["i", "j"], &[(0, 1), (1, 1)]).unwrap()
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::BadInput(format!("no vertex named {name:?}")))
    }

    /// Number of loops at vertex `i`.
    pub fn loop_count(&self, i: usize) -> u32 {
        self.counts[i][i]
    }

    /// Number of arrows from `i` to `j` (the loop count when `i == j`).
    pub fn arrow_count(&self, i: usize, j: usize) -> u32 {
        self.counts[i][j]
    }

    /// All arrows as (source, target) pairs with multiplicity, loops included.
    pub fn arrows(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.vertex_count() {
            for j in 0..self.vertex_count() {
                for _ in 0..self.counts[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn kind(&self, i: usize) -> VertexKind {
        match self.loop_count(i) {
            0 => VertexKind::Real,
            1 => VertexKind::IsotropicImaginary,
            _ => VertexKind::NonIsotropicImaginary,
        }
    }

    /// Euler form
    /// `<a, b> = sum_i (1 - g_i) a_i b_i - sum_{i != j} c_ij a_i b_j`,
    /// where `g_i` counts loops and `c_ij` counts arrows `i -> j`.
    pub fn euler_form(&self, a: &[u32], b: &[u32]) -> i64 {
        assert_eq!(a.len(), self.vertex_count());
        assert_eq!(b.len(), self.vertex_count());
        let mut s: i64 = 0;
        for i in 0..self.vertex_count() {
            s += (1 - self.counts[i][i] as i64) * a[i] as i64 * b[i] as i64;
            for j in 0..self.vertex_count() {
                if i != j {
                    s -= self.counts[i][j] as i64 * a[i] as i64 * b[j] as i64;
                }
            }
        }
        s
    }

    /// Symmetrized Euler form `(a, b) = <a, b> + <b, a>`.
    pub fn sym_form(&self, a: &[u32], b: &[u32]) -> i64 {
        self.euler_form(a, b) + self.euler_form(b, a)
    }

    /// The generalized Cartan matrix: `a_ii = 2(1 - g_i)`,
    /// `a_ij = -(c_ij + c_ji)` off the diagonal.
    pub fn cartan_matrix(&self) -> Vec<Vec<i64>> {
        let n = self.vertex_count();
        let mut m = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in 0..n {
                m[i][j] = if i == j {
                    2 * (1 - self.counts[i][i] as i64)
                } else {
                    -(self.counts[i][j] as i64 + self.counts[j][i] as i64)
                };
            }
        }
        m
    }

    /// The generator index set truncated at level `l_max`: real vertices
    /// contribute level 1 only, imaginary vertices levels `1..=l_max`.
    pub fn index_levels(&self, l_max: u32) -> Vec<(usize, u32)> {
        let mut out = Vec::new();
        for i in 0..self.vertex_count() {
            let top = if self.kind(i).is_imaginary() { l_max } else { 1 };
            for l in 1..=top {
                out.push((i, l));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_interchange_json() {
        let q = Quiver::from_json_str(
            r#"{"vertices": ["i", "j"], "arrows": [["i", "j"], ["j", "j"]]}"#,
        )
        .unwrap();
        assert_eq!(q, Quiver::arrow_to_loop());
        assert_eq!(q.loop_count(0), 0);
        assert_eq!(q.loop_count(1), 1);
        assert_eq!(q.arrow_count(0, 1), 1);
        let round = Quiver::from_json_str(&q.to_json_string()).unwrap();
        assert_eq!(round, q);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Quiver::from_json_str(r#"{"vertices": [], "arrows": []}"#).is_err());
        assert!(Quiver::from_json_str(r#"{"vertices": ["i"], "arrows": [["i", "k"]]}"#).is_err());
        assert!(Quiver::from_json_str(r#"{"vertices": ["i", "i"], "arrows": []}"#).is_err());
        assert!(Quiver::from_json_str("{").is_err());
    }

    #[test]
    fn vertex_kinds_follow_loop_count() {
        assert_eq!(Quiver::a2().kind(0), VertexKind::Real);
        assert_eq!(Quiver::jordan().kind(0), VertexKind::IsotropicImaginary);
        assert_eq!(Quiver::loops(2).kind(0), VertexKind::NonIsotropicImaginary);
        assert_eq!(Quiver::arrow_to_loop().kind(1), VertexKind::IsotropicImaginary);
    }

    #[test]
    fn euler_form_values() {
        let a2 = Quiver::a2();
        assert_eq!(a2.euler_form(&[1, 0], &[0, 1]), -1);
        assert_eq!(a2.euler_form(&[0, 1], &[1, 0]), 0);
        assert_eq!(a2.euler_form(&[1, 0], &[1, 0]), 2 - 2 + 1); // = 1
        assert_eq!(a2.sym_form(&[1, 0], &[0, 1]), -1);

        let j = Quiver::jordan();
        assert_eq!(j.euler_form(&[1], &[1]), 0);
        assert_eq!(j.sym_form(&[1], &[1]), 0);

        let two = Quiver::loops(2);
        assert_eq!(two.euler_form(&[1], &[1]), -1);
        assert_eq!(two.sym_form(&[1], &[1]), -2);

        let b = Quiver::arrow_to_loop();
        assert_eq!(b.euler_form(&[1, 0], &[0, 1]), -1);
        assert_eq!(b.euler_form(&[0, 1], &[0, 1]), 0);
        // bilinearity spot check
        let x = [2, 1];
        let y = [1, 3];
        let lhs = b.euler_form(&x, &y);
        let mut rhs = 0;
        for i in 0..2 {
            for j in 0..2 {
                let mut ei = [0, 0];
                ei[i] = 1;
                let mut ej = [0, 0];
                ej[j] = 1;
                rhs += x[i] as i64 * y[j] as i64 * b.euler_form(&ei, &ej);
            }
        }
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn cartan_matrices() {
        assert_eq!(Quiver::a2().cartan_matrix(), vec![vec![2, -1], vec![-1, 2]]);
        assert_eq!(Quiver::jordan().cartan_matrix(), vec![vec![0]]);
        assert_eq!(Quiver::loops(2).cartan_matrix(), vec![vec![-2]]);
        assert_eq!(
            Quiver::arrow_to_loop().cartan_matrix(),
            vec![vec![2, -1], vec![-1, 0]]
        );
    }

    #[test]
    fn index_levels_respect_kinds() {
        assert_eq!(Quiver::a2().index_levels(3), vec![(0, 1), (1, 1)]);
        assert_eq!(Quiver::jordan().index_levels(3), vec![(0, 1), (0, 2), (0, 3)]);
        assert_eq!(
            Quiver::arrow_to_loop().index_levels(2),
            vec![(0, 1), (1, 1), (1, 2)]
        );
    }
}
