//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by knot validation, weight computation, evaluation,
/// curve construction, and fitting.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("knot sequence must be nondecreasing (violated at index {index})")]
    KnotsNotNondecreasing { index: usize },

    #[error("knot values must be finite (index {index})")]
    KnotNotFinite { index: usize },

    #[error("need at least {needed} knots, got {count}")]
    TooFewKnots { count: usize, needed: usize },

    #[error("order must be an odd positive integer, got {order}")]
    EvenOrder { order: usize },

    #[error("window [{j}, {j}+{m}] exceeds the knot sequence (length {count})")]
    WindowOutOfRange { j: usize, m: usize, count: usize },

    #[error("{strategy} weights are capped at half-degree n = {max}, got n = {n}")]
    OrderTooLarge {
        strategy: &'static str,
        n: usize,
        max: usize,
    },

    #[error("window starting at knot {j} is not uniformly spaced")]
    NonUniformWindow { j: usize },

    #[error("the quadrature identity has no hyperbolic counterpart")]
    HyperbolicUnsupported,

    #[error("cardinalities require 1 <= n <= {max}, got {n}")]
    CardinalityRange { n: usize, max: usize },

    #[error("integer overflow while computing {what}")]
    CounterOverflow { what: &'static str },

    #[error("evaluation order must satisfy 1 <= m_eval <= {max}, got {m_eval}")]
    BadEvalOrder { m_eval: usize, max: usize },

    #[error("x = {x} is outside the evaluation domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("{count} sample(s) outside the evaluation domain, first indices {first:?}")]
    OutOfDomainSamples { count: usize, first: Vec<usize> },

    #[error("expected {expected} control points, got {got}")]
    ControlPointCount { expected: usize, got: usize },

    #[error("control points must share one dimension >= 1")]
    ControlPointDim,

    #[error("normalization weight w_{j} = {value} is not positive; the spec is outside the usable range")]
    WeightNotPositive { j: usize, value: f64 },

    #[error("invalid circle parameters: {reason}")]
    InvalidCircle { reason: String },

    #[error("knot insertion point must lie inside the curve domain [{lo}, {hi})")]
    InsertionOutOfDomain { lo: f64, hi: f64 },

    #[error("least-squares problem needs at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("collocation matrix is rank deficient at column {column}")]
    RankDeficient { column: usize },

    #[error("cannot parse knot specification: {reason}")]
    KnotParse { reason: String },

    #[error("unknown family {value:?}; expected \"trig\" or \"hyp\"")]
    UnknownFamily { value: String },
}

pub type Result<T> = std::result::Result<T, Error>;
