//! Exact computation with Schur rings over `Z x Z_n`.
//!
//! A Schur ring over a group `G` is determined by a partition of `G` into
//! finite classes whose simple quantities `C-bar = sum_{g in C} g` span a
//! subring of the rational group algebra: the partition contains `{1}`, is
//! closed under elementwise inversion, and the product of any two simple
//! quantities is an integer combination of simple quantities. This crate
//! provides the machinery to build, verify, enumerate, and probe such
//! partitions over the infinite family `Z x Z_n` and over finite cyclic
//! groups, with every computation exact.
//!
//! The main layers:
//!
//! - [`group`]: rational group-algebra arithmetic over `Z x Z_n` (convolution,
//!   Hadamard product, star involution, Frobenius maps, coordinate
//!   projections, stabilizers).
//! - [`aut`]: the affine automorphism group of `Z x Z_n`, subgroup closure,
//!   orbits, and full subgroup enumeration for small `n`.
//! - [`oracle`]: lazily evaluated partitions of `Z x Z_n` (discrete,
//!   symmetric, automorphic, wedge, finite lift, and deliberately corrupted
//!   variants) with window-bounded verification, structure constants, and
//!   product decomposition.
//! - [`finite`]: explicit partitions of `Z_n`, exhaustive and merge-driven
//!   enumeration of the Schur partitions, and classification into the
//!   traditional families.
//! - [`diffset`] and [`cover`]: difference sets, difference partitions, and
//!   the exact-cover search supporting them.
//! - [`lab`]: consistency experiments that sweep the constructions above
//!   against each other and report machine-checkable verdicts.
//!
//! ```
//! use schur::group::{AlgebraElement, FiniteSubset, GroupContext};
//!
//! let ctx = GroupContext::new(4)?;
//! let c = FiniteSubset::new(ctx, [ctx.element(0, 1), ctx.element(0, 3)]);
//! // {a, a^3} is inverse-closed and its square is 2*1 + 2*a^2.
//! assert_eq!(c.star(), c);
//! let two = schur::group::Rational::from_integer(2.into());
//! let square = c.simple().convolve(&c.simple())?;
//! assert_eq!(square.coeff(&ctx.identity()), two);
//! assert_eq!(square.coeff(&ctx.element(0, 2)), two);
//! # Ok::<(), schur::group::GroupError>(())
//! ```

pub mod aut;
pub mod cover;
pub mod diffset;
pub mod finite;
pub mod group;
pub mod lab;
pub mod oracle;

/// Version string embedded in emitted certificates.
pub const TOOL_VERSION: &str = concat!("schur ", env!("CARGO_PKG_VERSION"));
