//! Even-denominator Farey fractions and their limiting pair density.
//!
//! The library is organized around one story: take the Farey sequence `F_Q`
//! of order `Q`, keep the fractions with even denominator, normalize each
//! pair of consecutive denominators `(q', q'')` to `(q'/Q, q''/Q)`, and ask
//! how these points distribute in the unit square as `Q` grows. The answer
//! is a limiting local density `g(u, v)` which this crate evaluates exactly
//! (in arbitrary-precision rationals) by two independent routes, and
//! reproduces empirically from raw enumeration.
//!
//! Module map:
//! - [`numtheory`]: gcd/modular inverse, a Möbius sieve, and exact counts of
//!   coprime lattice points with parity constraints (with their `2·Area/π²`
//!   main terms).
//! - [`geometry`]: an exact-rational convex geometry kernel — half-plane
//!   clipping, areas, point location, and vertex tangent-cone areas.
//! - [`farey`]: generation and local navigation of `F_Q` (next-term
//!   recurrence, indices, numerator recovery, denominator chains).
//! - [`pairs`]: consecutive even-denominator pairs, their type `r`
//!   (number of odd-denominator fractions in between), and empirical
//!   statistics over the unit square.
//! - [`tess`]: the tessellation machinery — index polynomials `p_r`, the
//!   interval map `T`, cell polygons indexed by admissible tuples, probe
//!   parallelograms, and vertex weights `α`.
//! - [`density`]: the density `g(u, v)` via a closed form and via per-level
//!   cell sums, support classification, puzzle regions, and numerical
//!   integration.

pub mod density;
pub mod farey;
pub mod geometry;
pub mod numtheory;
pub mod pairs;
pub mod tess;

pub use num::BigRational;

/// Shorthand used across the crate for exact rational scalars.
pub type Rat = num::BigRational;

/// Build an exact rational from a small integer pair.
pub fn rat(num: i64, den: i64) -> Rat {
    use num::BigInt;
    Rat::new(BigInt::from(num), BigInt::from(den))
}
