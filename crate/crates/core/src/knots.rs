//! Knot sequences, spline families, and basis specifications.
//!
//! A [`KnotVector`] is an immutable nondecreasing sequence of reals. A
//! [`BasisSpec`] pairs a knot vector with a spline [`Family`] and an odd
//! order `m = 2n + 1`. Validation distinguishes a strict spacing bound
//! (every window of `m + 1` consecutive knots spans less than pi) from a
//! relaxed one (the `2n` interior knots of each window span less than pi);
//! the relaxed bound is what guarantees positive normalization weights,
//! and even it is sufficient rather than necessary.

use crate::error::{Error, Result};

/// Which pair of half-angle functions drives the recurrences: circular
/// (`sin`/`cos`) or hyperbolic (`sinh`/`cosh`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Trigonometric,
    Hyperbolic,
}

impl Family {
    /// `sin((a - b) / 2)` resp. `sinh((a - b) / 2)`.
    #[inline]
    pub fn sin_half_diff(self, a: f64, b: f64) -> f64 {
        match self {
            Family::Trigonometric => ((a - b) / 2.0).sin(),
            Family::Hyperbolic => ((a - b) / 2.0).sinh(),
        }
    }

    /// `cos(y / 2)` resp. `cosh(y / 2)`.
    #[inline]
    pub fn cos_half(self, y: f64) -> f64 {
        match self {
            Family::Trigonometric => (y / 2.0).cos(),
            Family::Hyperbolic => (y / 2.0).cosh(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Trigonometric => "trig",
            Family::Hyperbolic => "hyp",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "trig" | "trigonometric" | "t" => Ok(Family::Trigonometric),
            "hyp" | "hyperbolic" | "h" => Ok(Family::Hyperbolic),
            other => Err(Error::UnknownFamily {
                value: other.to_string(),
            }),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Nondecreasing sequence of at least two finite knot values.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    values: Vec<f64>,
}

impl KnotVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewKnots {
                count: values.len(),
                needed: 2,
            });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::KnotNotFinite { index: i });
            }
        }
        for i in 1..values.len() {
            if values[i] < values[i - 1] {
                return Err(Error::KnotsNotNondecreasing { index: i });
            }
        }
        Ok(KnotVector { values })
    }

    /// Open sequence: the first and last breakpoints repeated `m` times,
    /// interior breakpoints kept as given.
    pub fn open(m: usize, breakpoints: &[f64]) -> Result<Self> {
        if m == 0 {
            return Err(Error::EvenOrder { order: 0 });
        }
        if breakpoints.len() < 2 {
            return Err(Error::TooFewKnots {
                count: breakpoints.len(),
                needed: 2,
            });
        }
        let mut values = Vec::with_capacity(breakpoints.len() + 2 * (m - 1));
        let first = breakpoints[0];
        let last = *breakpoints.last().unwrap();
        values.extend(std::iter::repeat(first).take(m));
        values.extend_from_slice(&breakpoints[1..breakpoints.len() - 1]);
        values.extend(std::iter::repeat(last).take(m));
        KnotVector::new(values)
    }

    /// `{start + k * step : k = 0, ..., count - 1}`.
    pub fn uniform(start: f64, step: f64, count: usize) -> Result<Self> {
        if step < 0.0 {
            return Err(Error::KnotParse {
                reason: format!("uniform step must be nonnegative, got {step}"),
            });
        }
        let values = (0..count).map(|k| start + k as f64 * step).collect();
        KnotVector::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees len >= 2
    }

    /// Number of knots exactly equal to `value`. Knots are taken as given;
    /// there is no fuzzy merging.
    pub fn multiplicity(&self, value: f64) -> usize {
        self.values.iter().filter(|&&v| v == value).count()
    }

    /// Detects uniform spacing over the window `[j, j + m]`. Returns the
    /// first gap when all gaps agree with it to within `1e-14 * max(1, |h|)`.
    pub fn uniform_spacing(&self, j: usize, m: usize) -> Option<f64> {
        if m == 0 || j + m >= self.values.len() {
            return None;
        }
        let h = self.values[j + 1] - self.values[j];
        let tol = 1e-14 * h.abs().max(1.0);
        for k in 1..m {
            let gap = self.values[j + k + 1] - self.values[j + k];
            if (gap - h).abs() > tol {
                return None;
            }
        }
        Some(h)
    }

    /// Parses an inline knot description: either a comma/whitespace separated
    /// value list, or one of the generators `open(m; b0, b1, ..., bk)` and
    /// `uniform(start, step, count)`. Values may be decimals, fractions
    /// (`5/2`), or pi multiples (`pi`, `2pi`, `-3pi/8`).
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        if let Some(rest) = trimmed.strip_prefix("open") {
            let args = generator_args(rest)?;
            let (head, tail) = args.split_once(';').ok_or_else(|| Error::KnotParse {
                reason: "open(...) needs `open(m; breakpoints...)`".into(),
            })?;
            let m: usize = head.trim().parse().map_err(|_| Error::KnotParse {
                reason: format!("invalid multiplicity {head:?} in open(...)"),
            })?;
            let breakpoints = parse_value_list(tail)?;
            return KnotVector::open(m, &breakpoints);
        }
        if let Some(rest) = trimmed.strip_prefix("uniform") {
            let args = generator_args(rest)?;
            let parts = parse_token_list(&args);
            if parts.len() != 3 {
                return Err(Error::KnotParse {
                    reason: "uniform(...) needs `uniform(start, step, count)`".into(),
                });
            }
            let start = parse_value(&parts[0])?;
            let step = parse_value(&parts[1])?;
            let count: usize = parts[2].parse().map_err(|_| Error::KnotParse {
                reason: format!("invalid count {:?} in uniform(...)", parts[2]),
            })?;
            return KnotVector::uniform(start, step, count);
        }
        let values = parse_value_list(trimmed)?;
        KnotVector::new(values)
    }
}

impl std::ops::Index<usize> for KnotVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

fn generator_args(rest: &str) -> Result<String> {
    let rest = rest.trim();
    let inner = rest
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| Error::KnotParse {
            reason: "generator arguments must be parenthesized".into(),
        })?;
    Ok(inner.to_string())
}

fn parse_token_list(text: &str) -> Vec<String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_value_list(text: &str) -> Result<Vec<f64>> {
    let tokens = parse_token_list(text);
    if tokens.is_empty() {
        return Err(Error::KnotParse {
            reason: "empty knot list".into(),
        });
    }
    tokens.iter().map(|t| parse_value(t)).collect()
}

/// Parses one scalar token: `1.5`, `5/2`, `pi`, `2pi`, `pi/4`, `-3pi/8`,
/// `2*pi/3`.
pub fn parse_value(token: &str) -> Result<f64> {
    let bad = |reason: String| Error::KnotParse { reason };
    let t = token.trim();
    if t.is_empty() {
        return Err(bad("empty token".into()));
    }
    let (sign, body) = match t.as_bytes()[0] {
        b'-' => (-1.0, &t[1..]),
        b'+' => (1.0, &t[1..]),
        _ => (1.0, t),
    };
    let (num_part, den_part) = match body.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (body, None),
    };
    let num = if let Some(coef) = num_part.strip_suffix("pi") {
        let coef = coef.trim().trim_end_matches('*').trim();
        let c: f64 = if coef.is_empty() {
            1.0
        } else {
            coef.parse()
                .map_err(|_| bad(format!("invalid pi coefficient in {token:?}")))?
        };
        c * std::f64::consts::PI
    } else {
        num_part
            .parse()
            .map_err(|_| bad(format!("invalid number {token:?}")))?
    };
    let value = match den_part {
        Some(d) => {
            let den: f64 = d
                .parse()
                .map_err(|_| bad(format!("invalid denominator in {token:?}")))?;
            if den == 0.0 {
                return Err(bad(format!("zero denominator in {token:?}")));
            }
            num / den
        }
        None => num,
    };
    if !value.is_finite() {
        return Err(bad(format!("non-finite value {token:?}")));
    }
    Ok(sign * value)
}

/// Enforcement level for the trigonometric spacing bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enforcement {
    /// Every window spans less than pi: `x[j+m] - x[j] < pi`.
    Strict,
    /// Interior window knots span less than pi: `x[j+2n] - x[j+1] < pi`.
    /// Guarantees positive weights; still only sufficient.
    Relaxed,
}

/// Per-invariant outcome of [`BasisSpec::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub nondecreasing: bool,
    pub count_ok: bool,
    pub order_odd: bool,
    /// `x[j+m] - x[j] < pi` for every window (vacuously true for hyperbolic).
    pub strict_ok: bool,
    /// `x[j+2n] - x[j+1] < pi` for every window (vacuously true for hyperbolic).
    pub relaxed_ok: bool,
    /// Window start indices violating the strict bound.
    pub strict_violations: Vec<usize>,
    /// Window start indices violating the relaxed bound.
    pub relaxed_violations: Vec<usize>,
}

impl ValidationReport {
    pub fn hard_ok(&self) -> bool {
        self.nondecreasing && self.count_ok && self.order_odd
    }

    pub fn passes(&self, level: Enforcement) -> bool {
        self.hard_ok()
            && match level {
                Enforcement::Strict => self.strict_ok,
                Enforcement::Relaxed => self.relaxed_ok,
            }
    }
}

/// A spline family plus an odd order `m = 2n + 1` over a knot vector.
///
/// Construction enforces the hard invariants (odd order, enough knots,
/// nondecreasing values). The trigonometric spacing bounds are reported by
/// [`BasisSpec::validate`] rather than enforced here: the relaxed bound is
/// sufficient but not necessary for positive weights, and useful specs
/// (large-span circle constructions) violate it.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec {
    family: Family,
    order: usize,
    knots: KnotVector,
}

impl BasisSpec {
    pub fn new(family: Family, order: usize, knots: KnotVector) -> Result<Self> {
        if order == 0 || order % 2 == 0 {
            return Err(Error::EvenOrder { order });
        }
        if knots.len() < order + 1 {
            return Err(Error::TooFewKnots {
                count: knots.len(),
                needed: order + 1,
            });
        }
        Ok(BasisSpec {
            family,
            order,
            knots,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Odd order `m`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// `n` with `m = 2n + 1`.
    pub fn half_degree(&self) -> usize {
        (self.order - 1) / 2
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    /// Number of basis functions: `knots.len() - m`.
    pub fn basis_count(&self) -> usize {
        self.knots.len() - self.order
    }

    /// Evaluation domain `[x[m-1], x[len-m]]`; the right end is treated as
    /// closed (closure of the last nonempty interval). Empty when the knot
    /// vector is too short to support a partition-of-unity frame.
    pub fn domain(&self) -> (f64, f64) {
        let m = self.order;
        let k = self.knots.values();
        (k[m - 1], k[k.len() - m])
    }

    pub fn validate(&self) -> ValidationReport {
        let values = self.knots.values();
        let m = self.order;
        let n = self.half_degree();
        let mut strict_violations = Vec::new();
        let mut relaxed_violations = Vec::new();
        if self.family == Family::Trigonometric {
            for j in 0..values.len() - m {
                if values[j + m] - values[j] >= std::f64::consts::PI {
                    strict_violations.push(j);
                }
                if n >= 1 && values[j + 2 * n] - values[j + 1] >= std::f64::consts::PI {
                    relaxed_violations.push(j);
                }
            }
        }
        ValidationReport {
            nondecreasing: true,
            count_ok: true,
            order_odd: true,
            strict_ok: strict_violations.is_empty(),
            relaxed_ok: relaxed_violations.is_empty(),
            strict_violations,
            relaxed_violations,
        }
    }
}
