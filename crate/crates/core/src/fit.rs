//! Least-squares approximation in normalized spline spaces and a
//! convergence-rate study harness.
//!
//! The collocation matrix has bandwidth `m` (one active window per
//! sample), so the normal-equation route is avoided in favor of a
//! sequential Givens QR that keeps `R` banded: each sample row is rotated
//! into the triangle in `O(m^2)`.

use std::time::Instant;

use crate::basis::active_normalized;
use crate::error::{Error, Result};
use crate::knots::{BasisSpec, Family, KnotVector};
use crate::weights::{Strategy, WeightSet};

/// Oscillatory benchmark target on `[0, 10]`:
/// `sin(10 x) (4 (x/5 - 1)^2 + 1) / 5`.
pub fn builtin_target(x: f64) -> f64 {
    (10.0 * x).sin() * (4.0 * (x / 5.0 - 1.0).powi(2) + 1.0) / 5.0
}

/// Open knot sequence `{k / p}` on `[0, 10]` with `p` spans per unit:
/// `k = 0` and `k = 10 p` repeated `m` times. Dimension `10 p + m - 1`.
pub fn make_fit_knots(m: usize, p: usize) -> Result<KnotVector> {
    if p == 0 {
        return Err(Error::KnotParse {
            reason: "subdivision count p must be >= 1".into(),
        });
    }
    let mut values = Vec::with_capacity(10 * p - 1 + 2 * m);
    values.extend(std::iter::repeat(0.0).take(m));
    for k in 1..10 * p {
        values.push(k as f64 / p as f64);
    }
    values.extend(std::iter::repeat(10.0).take(m));
    KnotVector::new(values)
}

/// A least-squares problem: a basis spec plus `(x, f(x))` samples.
#[derive(Debug, Clone)]
pub struct FitProblem {
    pub spec: BasisSpec,
    pub samples: Vec<(f64, f64)>,
}

impl FitProblem {
    /// Samples `target` at `count` equispaced points across the spec's
    /// evaluation domain, endpoints included.
    pub fn sampled(spec: BasisSpec, target: impl Fn(f64) -> f64, count: usize) -> Self {
        let (lo, hi) = spec.domain();
        let samples = (0..count)
            .map(|i| {
                let x = if count > 1 {
                    lo + (hi - lo) * i as f64 / (count - 1) as f64
                } else {
                    lo
                };
                (x, target(x))
            })
            .collect();
        FitProblem { spec, samples }
    }
}

/// Result of a least-squares fit.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub coefficients: Vec<f64>,
    /// Max absolute residual over the sample grid.
    pub linf_error: f64,
    pub ndof: usize,
    pub runtime_seconds: f64,
}

/// Banded sequential Givens QR. `R` is stored by diagonals: row `i` holds
/// `R[i, i..i+band]`.
struct BandedGivens {
    ncols: usize,
    band: usize,
    r: Vec<f64>,
    qtb: Vec<f64>,
}

impl BandedGivens {
    fn new(ncols: usize, band: usize) -> Self {
        BandedGivens {
            ncols,
            band,
            r: vec![0.0; ncols * band],
            qtb: vec![0.0; ncols],
        }
    }

    /// Rotates one sample row (nonzeros `vals` starting at column `first`)
    /// into the triangle.
    fn push_row(&mut self, first: usize, vals: &[f64], y: f64) {
        debug_assert!(vals.len() <= self.band);
        let mut row = [0.0; 64];
        row[..vals.len()].copy_from_slice(vals);
        let mut lead = first;
        let mut rhs = y;
        let width = self.band;
        for _ in 0..width {
            if lead >= self.ncols {
                break;
            }
            if row[..width].iter().all(|v| *v == 0.0) {
                return;
            }
            let a = row[0];
            if a == 0.0 {
                row.copy_within(1..width, 0);
                row[width - 1] = 0.0;
                lead += 1;
                continue;
            }
            let base = lead * width;
            let pivot = self.r[base];
            let (c, s) = givens(pivot, a);
            for t in 0..width {
                let rv = self.r[base + t];
                let xv = row[t];
                self.r[base + t] = c * rv + s * xv;
                row[t] = -s * rv + c * xv;
            }
            row[0] = 0.0;
            let q = self.qtb[lead];
            self.qtb[lead] = c * q + s * rhs;
            rhs = -s * q + c * rhs;
            row.copy_within(1..width, 0);
            row[width - 1] = 0.0;
            lead += 1;
        }
    }

    fn solve(&self) -> Result<Vec<f64>> {
        let width = self.band;
        let scale = (0..self.ncols)
            .map(|i| self.r[i * width].abs())
            .fold(0.0, f64::max);
        let tol = 1e-12 * scale.max(1e-300);
        let mut x = vec![0.0; self.ncols];
        for i in (0..self.ncols).rev() {
            let diag = self.r[i * width];
            if diag.abs() <= tol {
                return Err(Error::RankDeficient { column: i });
            }
            let mut acc = self.qtb[i];
            for t in 1..width {
                if i + t < self.ncols {
                    acc -= self.r[i * width + t] * x[i + t];
                }
            }
            x[i] = acc / diag;
        }
        Ok(x)
    }
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let h = a.hypot(b);
        (a / h, b / h)
    }
}

/// Solves the least-squares problem by banded QR and reports the max
/// residual over the sample grid.
pub fn least_squares_fit(problem: &FitProblem) -> Result<FitReport> {
    let start = Instant::now();
    let spec = &problem.spec;
    let ndof = spec.basis_count();
    let m = spec.order();
    if m > 63 {
        return Err(Error::OrderTooLarge {
            strategy: "banded least squares",
            n: spec.half_degree(),
            max: 31,
        });
    }
    if problem.samples.len() < ndof {
        return Err(Error::TooFewSamples {
            needed: ndof,
            got: problem.samples.len(),
        });
    }
    let weights = WeightSet::compute(spec, Strategy::SignVectors)?;

    // evaluate every row once; rows sorted by x keep R inside its band
    let mut order: Vec<usize> = (0..problem.samples.len()).collect();
    order.sort_by(|&a, &b| {
        problem.samples[a]
            .0
            .partial_cmp(&problem.samples[b].0)
            .unwrap()
    });
    let mut rows: Vec<(usize, Vec<f64>, f64)> = Vec::with_capacity(problem.samples.len());
    let mut bad: Vec<usize> = Vec::new();
    for &i in &order {
        let (x, y) = problem.samples[i];
        match active_normalized(&weights, x) {
            Some((first, vals)) => rows.push((first, vals, y)),
            None => bad.push(i),
        }
    }
    if !bad.is_empty() {
        bad.sort_unstable();
        return Err(Error::OutOfDomainSamples {
            count: bad.len(),
            first: bad.into_iter().take(8).collect(),
        });
    }

    let mut qr = BandedGivens::new(ndof, m);
    for (first, vals, y) in &rows {
        qr.push_row(*first, vals, *y);
    }
    let coefficients = qr.solve()?;

    let mut linf = 0.0f64;
    for (first, vals, y) in &rows {
        let mut fitted = 0.0;
        for (t, v) in vals.iter().enumerate() {
            let j = first + t;
            if j < ndof {
                fitted += v * coefficients[j];
            }
        }
        linf = linf.max((fitted - y).abs());
    }
    Ok(FitReport {
        coefficients,
        linf_error: linf,
        ndof,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Error below which rate estimation is meaningless in double precision.
pub const ERROR_FLOOR: f64 = 1e-13;

/// One row of a convergence study table.
#[derive(Debug, Clone)]
pub struct StudyRow {
    pub family: Family,
    pub order: usize,
    pub level: usize,
    /// Spans per unit: `p = 2^(level + 1)`.
    pub subdivisions: usize,
    pub ndof: usize,
    pub linf_error: f64,
    /// `log2(e_prev / e_this)`; `None` on the first level or at the
    /// precision floor.
    pub rate: Option<f64>,
    pub at_floor: bool,
}

/// Runs least-squares fits for each order at levels `1..=levels`
/// (`p = 2^(level+1)`) and reports errors with fitted rates between
/// consecutive levels.
pub fn convergence_study(
    family: Family,
    orders: &[usize],
    levels: usize,
    target: &dyn Fn(f64) -> f64,
    samples_per_fit: usize,
) -> Result<Vec<StudyRow>> {
    let mut out = Vec::new();
    for &m in orders {
        let mut prev_error: Option<f64> = None;
        for level in 1..=levels {
            let p = 1usize << (level + 1);
            let spec = BasisSpec::new(family, m, make_fit_knots(m, p)?)?;
            let problem = FitProblem::sampled(spec, target, samples_per_fit);
            let report = least_squares_fit(&problem)?;
            let at_floor = report.linf_error < ERROR_FLOOR;
            let rate = match prev_error {
                Some(e_prev) if !at_floor && e_prev >= ERROR_FLOOR => {
                    Some((e_prev / report.linf_error).log2())
                }
                _ => None,
            };
            out.push(StudyRow {
                family,
                order: m,
                level,
                subdivisions: p,
                ndof: report.ndof,
                linf_error: report.linf_error,
                rate,
                at_floor,
            });
            prev_error = Some(report.linf_error);
        }
    }
    Ok(out)
}
