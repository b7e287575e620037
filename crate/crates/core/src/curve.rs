//! Normalized B-spline curves in `R^d`: evaluation, single knot insertion,
//! and exact circle constructions of arbitrary odd order.

use std::f64::consts::PI;

use crate::basis::active_normalized;
use crate::error::{Error, Result};
use crate::knots::{BasisSpec, Family, KnotVector};
use crate::weights::{Strategy, WeightSet};

/// A spline curve: control points combined with the normalized basis.
///
/// Immutable; [`CurveModel::insert_knot`] returns a refined copy. The
/// weights must all be positive, which is what makes the basis a
/// nonnegative partition of unity and gives the convex hull property.
#[derive(Debug, Clone)]
pub struct CurveModel {
    spec: BasisSpec,
    weights: WeightSet,
    control_points: Vec<Vec<f64>>,
    dim: usize,
}

impl CurveModel {
    pub fn new(spec: BasisSpec, control_points: Vec<Vec<f64>>) -> Result<Self> {
        let weights = WeightSet::compute(&spec, Strategy::SignVectors)?;
        CurveModel::with_weights(spec, weights, control_points)
    }

    pub fn with_weights(
        spec: BasisSpec,
        weights: WeightSet,
        control_points: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if control_points.len() != spec.basis_count() {
            return Err(Error::ControlPointCount {
                expected: spec.basis_count(),
                got: control_points.len(),
            });
        }
        let dim = control_points.first().map_or(0, Vec::len);
        if dim == 0 || control_points.iter().any(|p| p.len() != dim) {
            return Err(Error::ControlPointDim);
        }
        for (j, &w) in weights.weights().iter().enumerate() {
            if !(w > 0.0) {
                return Err(Error::WeightNotPositive { j, value: w });
            }
        }
        Ok(CurveModel {
            spec,
            weights,
            control_points,
            dim,
        })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn weights(&self) -> &WeightSet {
        &self.weights
    }

    pub fn control_points(&self) -> &[Vec<f64>] {
        &self.control_points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> (f64, f64) {
        self.spec.domain()
    }

    /// Curve point at `x`: the convex combination of the active control
    /// points by the normalized basis values.
    pub fn eval(&self, x: f64) -> Result<Vec<f64>> {
        let (first, vals) = active_normalized(&self.weights, x).ok_or_else(|| {
            let (lo, hi) = self.domain();
            Error::OutOfDomain { x, lo, hi }
        })?;
        let mut point = vec![0.0; self.dim];
        for (t, v) in vals.into_iter().enumerate() {
            let j = first + t;
            if j < self.control_points.len() && v != 0.0 {
                for (d, coord) in point.iter_mut().enumerate() {
                    *coord += v * self.control_points[j][d];
                }
            }
        }
        Ok(point)
    }

    /// Inserts one knot at `x_new` (inside the evaluation domain) without
    /// changing the curve. Control point count grows by one; weights are
    /// recomputed for the refined knots.
    ///
    /// The update works on the coefficients of the sine-scaled basis
    /// `s(x[j+m], x[j]) T[j,m]`, where an inserted knot replaces each
    /// affected coefficient by
    /// `(s(xh, x[j]) d[j] + s(x[j+m-1], xh) d[j-1]) / s(x[j+m-1], x[j])`.
    /// The two sine ratios do not sum to one; using `1 - alpha` as in the
    /// polynomial rule would not reproduce the curve.
    pub fn insert_knot(&self, x_new: f64) -> Result<CurveModel> {
        let (lo, hi) = self.domain();
        if !(x_new >= lo && x_new < hi) {
            return Err(Error::InsertionOutOfDomain { lo, hi });
        }
        let k = self.spec.knots().values();
        let m = self.spec.order();
        let family = self.spec.family();
        let s = |a: f64, b: f64| family.sin_half_diff(a, b);
        // span with x[span] <= x_new < x[span + 1]
        let span = k.partition_point(|v| *v <= x_new) - 1;

        // normalized control points -> sine-scaled coefficients
        let scaled: Vec<Vec<f64>> = self
            .control_points
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let w = self.weights.get(j);
                p.iter().map(|c| c * w).collect()
            })
            .collect();

        let mut new_knots: Vec<f64> = Vec::with_capacity(k.len() + 1);
        new_knots.extend_from_slice(&k[..=span]);
        new_knots.push(x_new);
        new_knots.extend_from_slice(&k[span + 1..]);

        let new_count = scaled.len() + 1;
        let mut refined: Vec<Vec<f64>> = Vec::with_capacity(new_count);
        for j in 0..new_count {
            if j + m <= span + 1 {
                refined.push(scaled[j].clone());
            } else if j > span {
                refined.push(scaled[j - 1].clone());
            } else {
                let den = s(k[j + m - 1], k[j]);
                let a = s(x_new, k[j]) / den;
                let b = s(k[j + m - 1], x_new) / den;
                let mut p = vec![0.0; self.dim];
                for d in 0..self.dim {
                    p[d] = a * scaled[j][d] + b * scaled[j - 1][d];
                }
                refined.push(p);
            }
        }

        let spec = BasisSpec::new(family, m, KnotVector::new(new_knots)?)?;
        let weights = WeightSet::compute(&spec, Strategy::SignVectors)?;
        let control_points: Vec<Vec<f64>> = refined
            .into_iter()
            .enumerate()
            .map(|(j, p)| {
                let w = weights.get(j);
                p.into_iter().map(|c| c / w).collect()
            })
            .collect();
        CurveModel::with_weights(spec, weights, control_points)
    }
}

/// Parameters of the circle constructions: odd order `m = 2n + 1 >= 3`, a
/// regular polygon with `p >= m` sides, a phase, and optionally a segment
/// `[2 a pi / p, 2 b pi / p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleSpec {
    pub order: usize,
    pub sides: usize,
    pub theta: f64,
    pub segment: Option<(usize, usize)>,
}

impl CircleSpec {
    /// Full circle with the default phase `theta = pi / p`.
    pub fn new(order: usize, sides: usize) -> Result<Self> {
        let spec = CircleSpec {
            order,
            sides,
            theta: PI / sides as f64,
            segment: None,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_segment(mut self, a: usize, b: usize) -> Result<Self> {
        self.segment = Some((a, b));
        self.check()?;
        Ok(self)
    }

    pub fn check(&self) -> Result<()> {
        if self.order < 3 || self.order % 2 == 0 {
            return Err(Error::InvalidCircle {
                reason: format!("order must be odd and >= 3, got {}", self.order),
            });
        }
        if self.sides < self.order {
            return Err(Error::InvalidCircle {
                reason: format!(
                    "polygon needs at least as many sides as the order ({} < {})",
                    self.sides, self.order
                ),
            });
        }
        if let Some((a, b)) = self.segment {
            if a >= b || b > self.sides {
                return Err(Error::InvalidCircle {
                    reason: format!("segment needs 0 <= a < b <= p, got ({a}, {b})"),
                });
            }
        }
        Ok(())
    }
}

/// Builds the closed circle curve of odd order `m = 2n + 1` on the uniform
/// knots `{2 k pi / p : k = -2n, ..., p + 2n}` with control points at the
/// corners of a regular `p`-gon scaled by `1 / cos(pi / p)`. The result
/// traces a circle exactly on `[0, 2 pi)`; its radius is 1 for `m = 3` and
/// shrinks below 1 for higher orders (the polygon stays tangent to the
/// unit circle, not to the traced one).
pub fn make_circle(circle: &CircleSpec) -> Result<CurveModel> {
    circle.check()?;
    if circle.segment.is_some() {
        return Err(Error::InvalidCircle {
            reason: "segment given; use make_circle_segment".into(),
        });
    }
    circle_curve(circle)
}

fn circle_curve(circle: &CircleSpec) -> Result<CurveModel> {
    let m = circle.order;
    let n = (m - 1) / 2;
    let p = circle.sides;
    let scale = 1.0 / (PI / p as f64).cos();
    let knots: Vec<f64> = (-(2 * n as i64)..=(p + 2 * n) as i64)
        .map(|k| circle_knot(k, p))
        .collect();
    let control_points: Vec<Vec<f64>> = (1..=p + 2 * n)
        .map(|j| {
            let angle = circle.theta + 2.0 * j as f64 * PI / p as f64;
            vec![scale * angle.cos(), scale * angle.sin()]
        })
        .collect();
    let spec = BasisSpec::new(Family::Trigonometric, m, KnotVector::new(knots)?)?;
    CurveModel::new(spec, control_points)
}

#[inline]
fn circle_knot(k: i64, p: usize) -> f64 {
    2.0 * k as f64 * PI / p as f64
}

/// Builds the circle segment on `[2 a pi / p, 2 b pi / p)` by inserting
/// knots at both parameters until they reach multiplicity `m` and cutting
/// out the open knot sequence between them. The segment keeps the full
/// circle's parameterization. Requires `b < p` (the right cut must stay
/// inside the closed curve's domain).
pub fn make_circle_segment(circle: &CircleSpec) -> Result<CurveModel> {
    circle.check()?;
    let (a, b) = circle.segment.ok_or_else(|| Error::InvalidCircle {
        reason: "missing segment bounds".into(),
    })?;
    let p = circle.sides;
    if b >= p {
        return Err(Error::InvalidCircle {
            reason: format!("segment end b = {b} must be < p = {p} for knot insertion"),
        });
    }
    let m = circle.order;
    let full = circle_curve(&CircleSpec {
        segment: None,
        ..*circle
    })?;

    let xa = circle_knot(a as i64, p);
    let xb = circle_knot(b as i64, p);
    let mut refined = full;
    for cut in [xa, xb] {
        while refined.spec().knots().multiplicity(cut) < m {
            refined = refined.insert_knot(cut)?;
        }
    }

    let values = refined.spec().knots().values();
    let i0 = values.partition_point(|v| *v < xa);
    let i1 = values.partition_point(|v| *v <= xb) - 1;
    debug_assert_eq!(values[i0], xa);
    debug_assert_eq!(values[i1], xb);
    let seg_knots = KnotVector::new(values[i0..=i1].to_vec())?;
    let seg_points = refined.control_points()[i0..=i1 - m].to_vec();
    let seg_spec = BasisSpec::new(Family::Trigonometric, m, seg_knots)?;
    CurveModel::new(seg_spec, seg_points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn norm2(p: &[f64]) -> f64 {
        p.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    fn open_cubic_curve() -> CurveModel {
        let kv = KnotVector::open(3, &[0.0, 0.5, 1.0, 2.0, 2.5, 3.0]).unwrap();
        let spec = BasisSpec::new(Family::Trigonometric, 3, kv).unwrap();
        let pts = (0..spec.basis_count())
            .map(|j| vec![j as f64, (j as f64).sin()])
            .collect();
        CurveModel::new(spec, pts).unwrap()
    }

    #[test]
    fn constant_control_points_give_a_constant_curve() {
        let kv = KnotVector::open(5, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        let spec = BasisSpec::new(Family::Hyperbolic, 5, kv).unwrap();
        let pts = vec![vec![2.5, -1.0]; spec.basis_count()];
        let curve = CurveModel::new(spec, pts).unwrap();
        for i in 0..=50 {
            let x = 3.0 * i as f64 / 50.0;
            let p = curve.eval(x).unwrap();
            assert_relative_eq!(p[0], 2.5, epsilon = 1e-12);
            assert_relative_eq!(p[1], -1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn cubic_circle_has_unit_radius_and_cosine_weights() {
        for p in [4usize, 8] {
            let curve = make_circle(&CircleSpec::new(3, p).unwrap()).unwrap();
            let expected_w = (PI / p as f64).cos();
            for &w in curve.weights().weights() {
                assert!((w - expected_w).abs() <= 1e-15);
            }
            for i in 0..1000 {
                let x = 2.0 * PI * i as f64 / 1000.0;
                let r = norm2(&curve.eval(x).unwrap());
                assert!((r - 1.0).abs() <= 1e-12, "p={p} x={x}: r={r}");
            }
        }
    }

    #[test]
    fn higher_order_circles_have_constant_radius() {
        // the traced circle is exact for every odd order, but its radius
        // drops below 1 once m > 3
        for (m, expected_r) in [(5usize, 2.0 * 2f64.sqrt() / 3.0), (7, 3.0 - 1.5 * 2f64.sqrt())] {
            let curve = make_circle(&CircleSpec::new(m, 8).unwrap()).unwrap();
            for i in 0..500 {
                let x = 2.0 * PI * i as f64 / 500.0;
                let r = norm2(&curve.eval(x).unwrap());
                assert!(
                    (r - expected_r).abs() <= 1e-12,
                    "m={m} x={x}: r={r} vs {expected_r}"
                );
            }
        }
    }

    #[test]
    fn open_knot_curve_interpolates_its_ends() {
        let curve = open_cubic_curve();
        let start = curve.eval(0.0).unwrap();
        assert_relative_eq!(start[0], 0.0, epsilon = 1e-12);
        let end = curve.eval(3.0).unwrap();
        let last = curve.control_points().last().unwrap();
        assert_relative_eq!(end[0], last[0], epsilon = 1e-12);
        assert_relative_eq!(end[1], last[1], epsilon = 1e-12);
    }

    #[test]
    fn insertion_preserves_the_curve() {
        let curve = open_cubic_curve();
        // a fresh value and an existing one (multiplicity raise)
        for x_new in [1.3, 2.0] {
            let refined = curve.insert_knot(x_new).unwrap();
            assert_eq!(refined.control_points().len(), curve.control_points().len() + 1);
            for i in 0..=1000 {
                let x = 3.0 * i as f64 / 1000.0;
                let p0 = curve.eval(x).unwrap();
                let p1 = refined.eval(x).unwrap();
                let dev = p0
                    .iter()
                    .zip(&p1)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(dev <= 1e-10, "x_new={x_new} x={x}: dev={dev}");
            }
        }
    }

    #[test]
    fn insertion_keeps_partition_of_unity() {
        let curve = open_cubic_curve();
        let refined = curve.insert_knot(1.5).unwrap();
        let w = refined.weights();
        for i in 0..=200 {
            let x = 3.0 * i as f64 / 200.0;
            let total: f64 = (0..refined.spec().basis_count())
                .map(|j| crate::basis::eval_normalized(w, j, x).unwrap())
                .sum();
            assert!((total - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn repeated_insertions_stay_on_the_curve() {
        let mut curve = make_circle(&CircleSpec::new(5, 8).unwrap()).unwrap();
        let probes: Vec<f64> = (0..200).map(|i| 2.0 * PI * i as f64 / 200.0).collect();
        let reference: Vec<Vec<f64>> = probes.iter().map(|&x| curve.eval(x).unwrap()).collect();
        for x_new in [0.9, 2.2, 2.2, 4.9, 0.9] {
            curve = curve.insert_knot(x_new).unwrap();
        }
        for (x, want) in probes.iter().zip(&reference) {
            let got = curve.eval(*x).unwrap();
            let dev = want
                .iter()
                .zip(&got)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(dev <= 1e-9, "x={x}: dev={dev}");
        }
    }

    #[test]
    fn insertion_outside_the_domain_is_rejected() {
        let curve = open_cubic_curve();
        assert!(matches!(
            curve.insert_knot(3.0),
            Err(Error::InsertionOutOfDomain { .. })
        ));
        assert!(curve.insert_knot(-0.5).is_err());
    }

    #[test]
    fn segment_interpolates_its_endpoints() {
        let circle = CircleSpec::new(5, 8).unwrap().with_segment(1, 7).unwrap();
        let seg = make_circle_segment(&circle).unwrap();
        let (lo, hi) = seg.domain();
        assert_relative_eq!(lo, PI / 4.0, epsilon = 1e-15);
        assert_relative_eq!(hi, 7.0 * PI / 4.0, epsilon = 1e-15);
        let start = seg.eval(lo).unwrap();
        let first = &seg.control_points()[0];
        assert!((start[0] - first[0]).abs() <= 1e-12);
        assert!((start[1] - first[1]).abs() <= 1e-12);
        let almost_end = seg.eval(hi - 1e-9).unwrap();
        let last = seg.control_points().last().unwrap();
        assert!((almost_end[0] - last[0]).abs() <= 1e-7);
        assert!((almost_end[1] - last[1]).abs() <= 1e-7);
    }

    #[test]
    fn segment_matches_the_full_circle() {
        let circle = CircleSpec::new(5, 8).unwrap().with_segment(1, 7).unwrap();
        let seg = make_circle_segment(&circle).unwrap();
        let full = make_circle(&CircleSpec::new(5, 8).unwrap()).unwrap();
        let (lo, hi) = seg.domain();
        for i in 0..1000 {
            let x = lo + (hi - lo) * i as f64 / 1000.0;
            let a = seg.eval(x).unwrap();
            let b = full.eval(x).unwrap();
            let dev = a
                .iter()
                .zip(&b)
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max);
            assert!(dev <= 1e-10, "x={x}: dev={dev}");
        }
    }

    #[test]
    fn convex_hull_coefficients() {
        let curve = make_circle(&CircleSpec::new(7, 8).unwrap()).unwrap();
        let w = curve.weights();
        for i in 0..200 {
            let x = 2.0 * PI * i as f64 / 200.0;
            let (_, vals) = crate::basis::active_normalized(w, x).unwrap();
            let sum: f64 = vals.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-10);
            for v in vals {
                assert!(v >= -1e-14);
            }
        }
    }

    #[test]
    fn invalid_circle_parameters() {
        assert!(CircleSpec::new(4, 8).is_err());
        assert!(CircleSpec::new(5, 4).is_err());
        assert!(CircleSpec::new(3, 4).unwrap().with_segment(2, 2).is_err());
        let with_seg = CircleSpec::new(3, 4).unwrap().with_segment(1, 3).unwrap();
        assert!(make_circle(&with_seg).is_err());
        let full = CircleSpec::new(3, 4).unwrap();
        assert!(make_circle_segment(&full).is_err());
        // b = p would need an insertion at the domain end
        let at_end = CircleSpec::new(3, 4).unwrap().with_segment(0, 4).unwrap();
        assert!(make_circle_segment(&at_end).is_err());
    }
}
