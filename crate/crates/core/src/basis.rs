//! B-spline evaluation: the order-1 base case, the two-term recurrence for
//! unnormalized splines, the rescaled (normalized) basis, and a three-term
//! recurrence that works directly on normalized values.
//!
//! Support is half-open, `[x[j], x[j+m])`, with one exception: the right
//! end of the evaluation domain is closed, so open knot sequences are
//! interpolatory at both ends. Zero-length spans follow the usual spline
//! convention: any term whose span vanishes contributes nothing.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::knots::BasisSpec;
use crate::weights::{weight_sign_vectors, WeightSet};

/// The point at which the half-open convention flips to a closed interval,
/// if the spec has a nonempty evaluation domain.
fn closure_point(spec: &BasisSpec) -> Option<f64> {
    let (lo, hi) = spec.domain();
    (hi > lo).then_some(hi)
}

/// Index of the knot span containing `x` under the closure convention:
/// `x` in `[x[i], x[i+1])`, or the last nonempty span when `x` equals the
/// domain end. `None` when `x` lies outside the domain.
pub(crate) fn span_index(spec: &BasisSpec, x: f64) -> Option<usize> {
    let (lo, hi) = spec.domain();
    if !(x >= lo && x <= hi) || hi <= lo {
        return None;
    }
    let values = spec.knots().values();
    if x == hi {
        // last nonempty span ending at the domain end
        let i = values.partition_point(|v| *v < hi);
        debug_assert!(i > 0 && values[i] == hi);
        return Some(i - 1);
    }
    Some(values.partition_point(|v| *v <= x) - 1)
}

/// Evaluates the unnormalized B-spline of order `m_eval <= m` starting at
/// knot `j`, by the two-term recurrence. Returns 0 outside the support;
/// even intermediate orders are legal here but cannot be normalized.
pub fn eval_unnormalized(spec: &BasisSpec, j: usize, m_eval: usize, x: f64) -> Result<f64> {
    if m_eval < 1 || m_eval > spec.order() {
        return Err(Error::BadEvalOrder {
            m_eval,
            max: spec.order(),
        });
    }
    let count = spec.knots().len();
    if j + m_eval >= count {
        return Err(Error::WindowOutOfRange {
            j,
            m: m_eval,
            count,
        });
    }
    if !x.is_finite() {
        return Err(Error::OutOfDomain {
            x,
            lo: spec.knots()[0],
            hi: spec.knots()[count - 1],
        });
    }
    Ok(unnormalized_rec(
        spec,
        closure_point(spec),
        j,
        m_eval,
        x,
    ))
}

fn unnormalized_rec(spec: &BasisSpec, closure: Option<f64>, j: usize, m: usize, x: f64) -> f64 {
    let k = spec.knots().values();
    let family = spec.family();
    if m == 1 {
        if k[j] == k[j + 1] {
            return 0.0;
        }
        let inside = k[j] <= x && x < k[j + 1];
        let closed_end = closure == Some(x) && x == k[j + 1];
        if inside || closed_end {
            return 1.0 / family.sin_half_diff(k[j + 1], k[j]);
        }
        return 0.0;
    }
    if k[j + m] == k[j] {
        return 0.0;
    }
    let den = family.sin_half_diff(k[j + m], k[j]);
    family.sin_half_diff(x, k[j]) / den * unnormalized_rec(spec, closure, j, m - 1, x)
        + family.sin_half_diff(k[j + m], x) / den * unnormalized_rec(spec, closure, j + 1, m - 1, x)
}

/// All (at most `m`) unnormalized order-`m` values that can be nonzero at
/// `x`, computed bottom-up across orders. Returns the first active index
/// and the values `T[first..first+m]`; `None` when `x` is outside the
/// evaluation domain.
pub(crate) fn active_unnormalized(spec: &BasisSpec, x: f64) -> Option<(usize, Vec<f64>)> {
    let mu = span_index(spec, x)?;
    let k = spec.knots().values();
    let family = spec.family();
    let m = spec.order();
    let mut cur = vec![0.0; m];
    cur[0] = 1.0 / family.sin_half_diff(k[mu + 1], k[mu]);
    for order in 2..=m {
        let mut next = vec![0.0; m];
        for t in 0..order {
            let j = mu as isize - order as isize + 1 + t as isize;
            if j < 0 || (j as usize) + order >= k.len() {
                continue;
            }
            let j = j as usize;
            if k[j + order] == k[j] {
                continue;
            }
            let den = family.sin_half_diff(k[j + order], k[j]);
            let left = if t >= 1 { cur[t - 1] } else { 0.0 };
            let right = if t < order - 1 { cur[t] } else { 0.0 };
            next[t] = family.sin_half_diff(x, k[j]) / den * left
                + family.sin_half_diff(k[j + order], x) / den * right;
        }
        cur = next;
    }
    Some((mu + 1 - m, cur))
}

/// Normalized value by its definition: `w[j] * s(x[j+m], x[j]) * T[j,m](x)`.
pub fn eval_normalized(weights: &WeightSet, j: usize, x: f64) -> Result<f64> {
    let spec = weights.spec();
    let m = spec.order();
    let raw = eval_unnormalized(spec, j, m, x)?;
    let k = spec.knots().values();
    Ok(weights.get(j) * spec.family().sin_half_diff(k[j + m], k[j]) * raw)
}

/// All normalized order-`m` values active at `x`: `(first index, values)`.
pub(crate) fn active_normalized(weights: &WeightSet, x: f64) -> Option<(usize, Vec<f64>)> {
    let spec = weights.spec();
    let (first, mut vals) = active_unnormalized(spec, x)?;
    let k = spec.knots().values();
    let m = spec.order();
    let count = spec.basis_count();
    for (t, v) in vals.iter_mut().enumerate() {
        let j = first + t;
        if j < count {
            *v *= weights.get(j) * spec.family().sin_half_diff(k[j + m], k[j]);
        }
    }
    Some((first, vals))
}

/// Evaluator for the three-term recurrence on normalized values. Holds the
/// weight ladder `w[j, o]` for every odd order `o <= m`, so repeated
/// evaluations do not recompute weights.
#[derive(Debug, Clone)]
pub struct NormalizedRecurrence {
    spec: BasisSpec,
    /// `ladder[t][j]` is the weight of order `2t + 1` starting at knot `j`.
    ladder: Vec<Vec<f64>>,
}

impl NormalizedRecurrence {
    pub fn new(spec: &BasisSpec) -> Result<Self> {
        let n = spec.half_degree();
        let count = spec.knots().len();
        let mut ladder = Vec::with_capacity(n + 1);
        for t in 0..=n {
            let order = 2 * t + 1;
            let sub = BasisSpec::new(spec.family(), order, spec.knots().clone())?;
            let mut row = Vec::with_capacity(count - order);
            for j in 0..count - order {
                row.push(weight_sign_vectors(&sub, j)?);
            }
            ladder.push(row);
        }
        Ok(NormalizedRecurrence {
            spec: spec.clone(),
            ladder,
        })
    }

    /// Normalized value of basis function `j` at `x` via the three-term
    /// recurrence over orders `m, m-2, ..., 1`.
    pub fn eval(&self, j: usize, x: f64) -> Result<f64> {
        let spec = &self.spec;
        let count = spec.knots().len();
        let m = spec.order();
        if j + m >= count {
            return Err(Error::WindowOutOfRange { j, m, count });
        }
        if !x.is_finite() {
            return Err(Error::OutOfDomain {
                x,
                lo: spec.knots()[0],
                hi: spec.knots()[count - 1],
            });
        }
        Ok(self.rec(j, m, x, closure_point(spec)))
    }

    fn weight(&self, j: usize, order: usize) -> f64 {
        self.ladder[(order - 1) / 2][j]
    }

    fn rec(&self, j: usize, order: usize, x: f64, closure: Option<f64>) -> f64 {
        let k = self.spec.knots().values();
        if order == 1 {
            if k[j] == k[j + 1] {
                return 0.0;
            }
            let inside = k[j] <= x && x < k[j + 1];
            let closed_end = closure == Some(x) && x == k[j + 1];
            return if inside || closed_end { 1.0 } else { 0.0 };
        }
        let family = self.spec.family();
        let s = |a: f64, b: f64| family.sin_half_diff(a, b);
        // each fraction evaluates to 0 whenever a factor of its denominator
        // vanishes (the matching numerator vanishes on the support)
        let frac = |n1: f64, n2: f64, d1: f64, d2: f64| {
            if d1 == 0.0 || d2 == 0.0 {
                0.0
            } else {
                n1 * n2 / (d1 * d2)
            }
        };
        let w_top = self.weight(j, order);
        let mut acc = 0.0;

        let c0 = frac(
            s(x, k[j]),
            s(x, k[j]),
            s(k[j + order - 1], k[j]),
            s(k[j + order - 2], k[j]),
        );
        if c0 != 0.0 {
            acc += c0 * (w_top / self.weight(j, order - 2)) * self.rec(j, order - 2, x, closure);
        }

        let c1 = frac(
            s(x, k[j]),
            s(k[j + order - 1], x),
            s(k[j + order - 1], k[j]),
            s(k[j + order - 1], k[j + 1]),
        ) + frac(
            s(k[j + order], x),
            s(x, k[j + 1]),
            s(k[j + order], k[j + 1]),
            s(k[j + order - 1], k[j + 1]),
        );
        if c1 != 0.0 {
            acc +=
                c1 * (w_top / self.weight(j + 1, order - 2)) * self.rec(j + 1, order - 2, x, closure);
        }

        let c2 = frac(
            s(k[j + order], x),
            s(k[j + order], x),
            s(k[j + order], k[j + 1]),
            s(k[j + order], k[j + 2]),
        );
        if c2 != 0.0 {
            acc +=
                c2 * (w_top / self.weight(j + 2, order - 2)) * self.rec(j + 2, order - 2, x, closure);
        }
        acc
    }
}

/// One-shot wrapper around [`NormalizedRecurrence`]. The order-`m` weights
/// of `weights` are used as the top rung of the ladder.
pub fn eval_normalized_recurrence(weights: &WeightSet, j: usize, x: f64) -> Result<f64> {
    let mut rec = NormalizedRecurrence::new(weights.spec())?;
    let top = rec.ladder.len() - 1;
    rec.ladder[top] = weights.weights().to_vec();
    rec.eval(j, x)
}

/// Tabulates every normalized basis function at every sample: one row per
/// sample, one column per basis function. Samples outside the evaluation
/// domain are reported by index. Rows are computed independently (and in
/// parallel), so the result does not depend on scheduling.
pub fn tabulate(weights: &WeightSet, samples: &[f64]) -> Result<Vec<Vec<f64>>> {
    let spec = weights.spec();
    let count = spec.basis_count();
    let rows: Vec<Option<Vec<f64>>> = samples
        .par_iter()
        .map(|&x| {
            active_normalized(weights, x).map(|(first, vals)| {
                let mut row = vec![0.0; count];
                for (t, v) in vals.into_iter().enumerate() {
                    let j = first + t;
                    if j < count {
                        row[j] = v;
                    }
                }
                row
            })
        })
        .collect();
    let bad: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.is_none().then_some(i))
        .collect();
    if !bad.is_empty() {
        return Err(Error::OutOfDomainSamples {
            count: bad.len(),
            first: bad.into_iter().take(8).collect(),
        });
    }
    Ok(rows.into_iter().map(Option::unwrap).collect())
}
