//! Exact computational algebra for Ringel-Hall algebras of quivers with loops.
//!
//! The library is organized bottom-up:
//!
//! * [`exactnum`] — exact scalar arithmetic: integer Laurent polynomials in `v`,
//!   reduced rational functions, values in `Q(sqrt q)`, balanced quantum
//!   integers/binomials, and Laurent interpolation from per-prime samples.
//! * [`quiver`] — quivers with loops, Euler and symmetrized forms, the
//!   associated Borcherds-Cartan matrix and generator index set.
//! * [`repmod`] — representations of a quiver over a prime field: class
//!   enumeration, isomorphism testing, automorphism counts, Hom/Ext.
//! * [`hall`] — the Hall algebra of a (quiver, prime) pair: twisted
//!   multiplication, twisted comultiplication, Green's bilinear form.
//! * [`comp`] — the composition subalgebra: `e` generators, primitive `s`
//!   generators by Gram orthogonalization, Serre/commutation checks.
//! * [`generic`] — generic (prime-independent) behavior by exact interpolation
//!   across primes: pairing polynomials, Gram blocks, radical tests.
//! * [`uq`] — the symbolic side: the free algebra on generators with a twisted
//!   coproduct and bilinear form over rational functions, and the degreewise
//!   comparison against the interpolated Hall side.
//!
//! All arithmetic is exact; nothing in the crate uses floating point.

pub mod comp;
pub mod error;
pub mod exactnum;
pub mod hall;
pub mod quiver;
pub mod repmod;
pub mod generic;
pub mod uq;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
