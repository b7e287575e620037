//! Smoothness probes: at a knot of multiplicity `mu`, one-sided
//! divided-difference estimates of the derivatives up to order `2n - mu`
//! must agree from both sides, and the next derivative must jump.

use thsplines::basis::eval_normalized;
use thsplines::knots::{BasisSpec, Family, KnotVector};
use thsplines::weights::{Strategy, WeightSet};

/// Finite-difference weights on arbitrary nodes (Fornberg's recurrence):
/// `w[d][i]` reproduces the `d`-th derivative at `z` from samples at
/// `nodes[i]`.
fn difference_weights(z: f64, nodes: &[f64], max_d: usize) -> Vec<Vec<f64>> {
    let n = nodes.len() - 1;
    let mut c = vec![vec![0.0; n + 1]; max_d + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..=n {
        let mn = i.min(max_d);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

fn one_sided_estimate(f: &dyn Fn(f64) -> f64, x0: f64, d: usize, delta: f64, side: f64) -> f64 {
    let npts = d + 8;
    let nodes: Vec<f64> = (1..=npts).map(|i| x0 + side * delta * i as f64).collect();
    let w = difference_weights(x0, &nodes, d);
    nodes.iter().zip(&w[d]).map(|(&x, &wi)| wi * f(x)).sum()
}

/// Richardson-extrapolated one-sided derivative estimate.
fn probe(f: &dyn Fn(f64) -> f64, x0: f64, d: usize, delta: f64, side: f64) -> f64 {
    let coarse = one_sided_estimate(f, x0, d, delta, side);
    let fine = one_sided_estimate(f, x0, d, delta / 2.0, side);
    let q = 8i32; // leading error order of the (d + 8)-point stencil
    (2f64.powi(q) * fine - coarse) / (2f64.powi(q) - 1.0)
}

/// Uniform gap-`h` knots with one knot of multiplicity `mu` in the middle;
/// returns the spec and the multiple knot.
fn spec_with_multiple_knot(family: Family, m: usize, mu: usize, h: f64) -> (BasisSpec, f64) {
    let mut values: Vec<f64> = (0..m).map(|i| i as f64 * h).collect();
    let x0 = m as f64 * h;
    values.extend(std::iter::repeat(x0).take(mu));
    values.extend((0..m).map(|i| (m + 1 + i) as f64 * h));
    let spec = BasisSpec::new(family, m, KnotVector::new(values).unwrap()).unwrap();
    (spec, x0)
}

#[test]
fn one_sided_derivatives_agree_up_to_the_smoothness_order() {
    let h = 0.4;
    // half the adjacent span, split over the widest stencil
    let cases: &[(usize, usize)] = &[(3, 1), (3, 2), (5, 1), (5, 2), (5, 3), (7, 2), (7, 3)];
    for family in [Family::Trigonometric, Family::Hyperbolic] {
        for &(m, mu) in cases {
            let n = (m - 1) / 2;
            let d_max = 2 * n - mu;
            let (spec, x0) = spec_with_multiple_knot(family, m, mu, h);
            let weights = WeightSet::compute(&spec, Strategy::SignVectors).unwrap();
            // a basis function whose support straddles the multiple knot
            let j = (m - n).min(spec.basis_count() - 1);
            let j = if eval_normalized(&weights, j, x0).unwrap() != 0.0 {
                j
            } else {
                j - 1
            };
            let f = |x: f64| eval_normalized(&weights, j, x).unwrap();

            for d in 0..=d_max {
                let delta = 0.9 * h / (d + 8) as f64;
                let left = probe(&f, x0, d, delta, -1.0);
                let right = probe(&f, x0, d, delta, 1.0);
                let scale = left.abs().max(right.abs()).max(1.0);
                assert!(
                    (left - right).abs() <= 1e-6 * scale,
                    "{family} m={m} mu={mu} d={d}: left={left} right={right}"
                );
            }

            // one order higher the derivative must actually jump
            let d = d_max + 1;
            let delta = 0.9 * h / (d + 8) as f64;
            let left = probe(&f, x0, d, delta, -1.0);
            let right = probe(&f, x0, d, delta, 1.0);
            let scale = left.abs().max(right.abs()).max(1.0);
            assert!(
                (left - right).abs() >= 1e-2 * scale,
                "{family} m={m} mu={mu}: no jump at d={d} ({left} vs {right})"
            );
        }
    }
}
