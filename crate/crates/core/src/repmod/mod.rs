//! Representations of a quiver over a prime field, up to isomorphism.
//!
//! The submodules provide, in order: exact linear algebra over `F_p`
//! ([`fqmat`]), representations with their hom spaces and stable subspaces
//! ([`rep`]), Krull-Schmidt decomposition and isomorphism testing
//! ([`decompose`]), and interned isomorphism classes with automorphism counts
//! ([`registry`]).

mod decompose;
mod fqmat;
mod rep;
mod registry;

pub use decompose::{compose, decompose, indec_iso, is_nilpotent, min_poly, residue_degree, retraction};
pub use fqmat::{inv_mod, FqMat, SubspaceIter};
pub use registry::{gl_order, ClassInfo, ClassRegistry, Fingerprint};
pub use rep::{
    dim_end, dim_hom, fitting_split, hom_basis, is_iso_map, is_stable, quotient_rep, sub_rep,
    Rep, SubTuple, SubTupleIter,
};
