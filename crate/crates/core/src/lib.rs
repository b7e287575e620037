//! Normalized trigonometric and hyperbolic B-splines.
//!
//! Both families are defined by half-angle recurrences over a nondecreasing
//! knot sequence. In their raw form they do not sum to one; for odd order
//! `m = 2n + 1` a per-function normalization weight fixes that, and this
//! crate computes those weights by several independent routes that
//! cross-validate each other. On top of the normalized basis sit curve
//! utilities (exact circles of any odd order, knot insertion) and a banded
//! least-squares fitting harness with convergence reporting.
//!
//! Module map:
//!
//! * [`knots`]: knot vectors, families, basis specs, spacing validation.
//! * [`weights`]: the normalization weights, four strategies plus two
//!   cross-check identities, q-binomial tables, index-set cardinalities.
//! * [`basis`]: unnormalized and normalized evaluation, tabulation.
//! * [`curve`]: curves in `R^d`, circle constructions, knot insertion.
//! * [`fit`]: least-squares approximation and convergence studies.

pub mod basis;
pub mod curve;
pub mod error;
pub mod fit;
pub mod knots;
pub mod weights;

pub use error::{Error, Result};
pub use knots::{BasisSpec, Enforcement, Family, KnotVector, ValidationReport};
pub use weights::{Strategy, WeightSet};
