//! The Ringel-Hall algebra of a quiver over a prime field: exact structure
//! constants from subrepresentation counts, the twisted bialgebra structure,
//! and Green's bilinear form.

mod cache;
mod ctx;
mod elt;

pub use ctx::{grassmann_count, HallCtx, DEFAULT_BUDGET};
pub use elt::{HallElt, TensorElt};
