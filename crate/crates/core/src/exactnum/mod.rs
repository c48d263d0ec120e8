//! Exact scalar arithmetic.
//!
//! Three scalar domains show up throughout the crate:
//!
//! * [`LaurentPoly`] — `Z[v, v^-1]`, the home of quantum integers, Gauss
//!   binomials and interpolated pairing polynomials;
//! * [`RationalFn`] — reduced fractions of Laurent polynomials, the coefficient
//!   field for the symbolic algebra;
//! * [`QuadScalar`] — `Q(sqrt q)` for a fixed prime `q`, the value domain of
//!   every per-prime Hall computation (`v` evaluates to `sqrt q`).
//!
//! No floating point anywhere: coefficients are `BigInt` / `BigRational`.

mod interp;
mod laurent;
mod qcombinat;
mod quad;
mod rational;

pub use interp::{
    interpolate_laurent, interpolate_laurent_support, interpolate_laurent_window,
    interpolate_quotient, interpolate_rational_window, Sample,
};
pub use laurent::LaurentPoly;
pub use qcombinat::{gauss_binomial, quantum_factorial, quantum_integer, vanishing_sum};
pub use quad::QuadScalar;
pub use rational::RationalFn;
