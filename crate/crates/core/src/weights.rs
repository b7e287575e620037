//! Normalization weights for odd-order trigonometric and hyperbolic
//! B-splines.
//!
//! Four independent strategies compute the same scalar `w[j]`:
//!
//! * [`weight_full_permutations`]: averages cosine products over all
//!   `(2n)!` permutations of the interior window knots. Exact reference
//!   oracle, factorial cost, capped at [`MAX_HALF_DEGREE_FULL`].
//! * [`weight_canonical_pairings`]: the same average restricted to the
//!   `(2n-1)!!` canonical pairings, capped at [`MAX_HALF_DEGREE_PAIRINGS`].
//! * [`weight_sign_vectors`]: depth-first sum over signed knot
//!   combinations with `n - 1` minus signs and `n` plus signs; the
//!   production path, `binom(2n-1, n-1)` terms.
//! * [`weight_uniform`]: closed form for uniformly spaced windows built
//!   from the coefficient table of a Gaussian (q-)binomial.
//!
//! Two further identities cross-check the trigonometric case:
//! [`weight_by_quadrature`] (an exact equally spaced periodic rule) and
//! [`uniform_weight_subset_products`] (a subset-product expansion for
//! uniform spacing).

use std::collections::HashMap;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::knots::{BasisSpec, Family};

/// Cap on the half-degree for the full-permutation oracle ((2n)! terms).
pub const MAX_HALF_DEGREE_FULL: usize = 5;
/// Cap on the half-degree for the pairing oracle ((2n-1)!! terms).
pub const MAX_HALF_DEGREE_PAIRINGS: usize = 8;
/// Cap for exact integer cardinalities.
pub const MAX_CARDINALITY_HALF_DEGREE: usize = 20;

/// How a [`WeightSet`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Average over all permutations of the interior window knots.
    FullPermutations,
    /// Average over canonical pairings only.
    CanonicalPairings,
    /// Signed-combination sum (general production path).
    SignVectors,
    /// Uniform-spacing closed form via q-binomial coefficients.
    UniformClosedForm,
    /// Uniform closed form where a window is uniform, signed sum otherwise.
    Auto,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::FullPermutations => "q",
            Strategy::CanonicalPairings => "qhat",
            Strategy::SignVectors => "s",
            Strategy::UniformClosedForm => "uniform",
            Strategy::Auto => "auto",
        }
    }
}

/// Normalization weights for every basis function of a spec.
#[derive(Debug, Clone)]
pub struct WeightSet {
    spec: BasisSpec,
    weights: Vec<f64>,
    strategy: Strategy,
}

impl WeightSet {
    /// Computes `w[j]` for `j = 0, ..., basis_count - 1` with the given
    /// strategy.
    pub fn compute(spec: &BasisSpec, strategy: Strategy) -> Result<Self> {
        let count = spec.basis_count();
        let mut weights = Vec::with_capacity(count);
        for j in 0..count {
            let w = match strategy {
                Strategy::FullPermutations => weight_full_permutations(spec, j)?,
                Strategy::CanonicalPairings => weight_canonical_pairings(spec, j)?,
                Strategy::SignVectors => weight_sign_vectors(spec, j)?,
                Strategy::UniformClosedForm => {
                    let h = spec
                        .knots()
                        .uniform_spacing(j, spec.order())
                        .ok_or(Error::NonUniformWindow { j })?;
                    weight_uniform(spec, j, h)?
                }
                Strategy::Auto => match spec.knots().uniform_spacing(j, spec.order()) {
                    Some(h) => weight_uniform(spec, j, h)?,
                    None => weight_sign_vectors(spec, j)?,
                },
            };
            weights.push(w);
        }
        Ok(WeightSet {
            spec: spec.clone(),
            weights,
            strategy,
        })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn get(&self, j: usize) -> f64 {
        self.weights[j]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

fn check_window(spec: &BasisSpec, j: usize) -> Result<()> {
    let count = spec.knots().len();
    if j + spec.order() >= count {
        return Err(Error::WindowOutOfRange {
            j,
            m: spec.order(),
            count,
        });
    }
    Ok(())
}

/// Exact binomial coefficient in `u64`, or `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    u64::try_from(acc).ok()
}

/// `|{sign vectors for half-degree n}| = binom(2n - 1, n - 1)`.
pub fn sign_vector_count(n: usize) -> Result<u64> {
    if n == 0 {
        return Ok(1);
    }
    binomial(2 * n as u64 - 1, n as u64 - 1).ok_or(Error::CounterOverflow {
        what: "sign vector count",
    })
}

// ---------------------------------------------------------------------------
// full-permutation reference oracle
// ---------------------------------------------------------------------------

/// Averages the cosine products over all `(2n)!` permutations of the
/// interior window knots `x[j+1..=j+2n]`. Reference oracle; cost guard at
/// [`MAX_HALF_DEGREE_FULL`].
pub fn weight_full_permutations(spec: &BasisSpec, j: usize) -> Result<f64> {
    weight_full_permutations_counted(spec, j).map(|(w, _)| w)
}

/// As [`weight_full_permutations`], also returning the number of
/// enumerated permutations (always `(2n)!`).
pub fn weight_full_permutations_counted(spec: &BasisSpec, j: usize) -> Result<(f64, u64)> {
    check_window(spec, j)?;
    let n = spec.half_degree();
    if n == 0 {
        return Ok((1.0, 1));
    }
    if n > MAX_HALF_DEGREE_FULL {
        return Err(Error::OrderTooLarge {
            strategy: "full-permutation",
            n,
            max: MAX_HALF_DEGREE_FULL,
        });
    }
    let x = &spec.knots().values()[j..];
    let family = spec.family();
    // all products reuse the same pairwise cosine values
    let size = 2 * n + 1;
    let mut pair = vec![0.0; size * size];
    for a in 1..size {
        for b in 1..size {
            pair[a * size + b] = family.cos_half(x[b] - x[a]);
        }
    }
    let mut perm: Vec<usize> = (1..size).collect();
    let mut sum = 0.0;
    let mut count: u64 = 0;
    heap_permutations(&mut perm, &mut |q| {
        let mut prod = 1.0;
        for k in 0..n {
            prod *= pair[q[2 * k] * size + q[2 * k + 1]];
        }
        sum += prod;
        count += 1;
    });
    debug_assert_eq!(count, factorial_u64(2 * n as u64));
    Ok((sum / count as f64, count))
}

fn factorial_u64(n: u64) -> u64 {
    (1..=n).product()
}

/// Heap's algorithm; calls `visit` once per permutation of `items`.
fn heap_permutations<F: FnMut(&[usize])>(items: &mut [usize], visit: &mut F) {
    fn rec<F: FnMut(&[usize])>(k: usize, items: &mut [usize], visit: &mut F) {
        if k <= 1 {
            visit(items);
            return;
        }
        for i in 0..k {
            rec(k - 1, items, visit);
            if i < k - 1 {
                if k % 2 == 0 {
                    items.swap(i, k - 1);
                } else {
                    items.swap(0, k - 1);
                }
            }
        }
    }
    rec(items.len(), items, visit);
}

// ---------------------------------------------------------------------------
// canonical pairings
// ---------------------------------------------------------------------------

/// Same average as [`weight_full_permutations`] over the `(2n-1)!!`
/// canonical pairings: first slots increasing, each pair increasing.
pub fn weight_canonical_pairings(spec: &BasisSpec, j: usize) -> Result<f64> {
    weight_canonical_pairings_counted(spec, j).map(|(w, _)| w)
}

/// As [`weight_canonical_pairings`], also returning the number of
/// enumerated pairings (always `(2n-1)!!`).
pub fn weight_canonical_pairings_counted(spec: &BasisSpec, j: usize) -> Result<(f64, u64)> {
    check_window(spec, j)?;
    let n = spec.half_degree();
    if n == 0 {
        return Ok((1.0, 1));
    }
    if n > MAX_HALF_DEGREE_PAIRINGS {
        return Err(Error::OrderTooLarge {
            strategy: "canonical-pairing",
            n,
            max: MAX_HALF_DEGREE_PAIRINGS,
        });
    }
    let x = &spec.knots().values()[j..];
    let family = spec.family();
    let mut sum = 0.0;
    let mut count: u64 = 0;
    // indices 1..=2n; always pair the smallest unused index
    let mut used = vec![false; 2 * n + 1];
    pairing_rec(family, x, &mut used, 1.0, &mut sum, &mut count);
    debug_assert_eq!(count, double_factorial(2 * n as u64 - 1));
    Ok((sum / count as f64, count))
}

fn pairing_rec(
    family: Family,
    x: &[f64],
    used: &mut [bool],
    prod: f64,
    sum: &mut f64,
    count: &mut u64,
) {
    let first = match (1..used.len()).find(|&i| !used[i]) {
        Some(i) => i,
        None => {
            *sum += prod;
            *count += 1;
            return;
        }
    };
    used[first] = true;
    for second in first + 1..used.len() {
        if used[second] {
            continue;
        }
        used[second] = true;
        pairing_rec(
            family,
            x,
            used,
            prod * family.cos_half(x[second] - x[first]),
            sum,
            count,
        );
        used[second] = false;
    }
    used[first] = false;
}

fn double_factorial(n: u64) -> u64 {
    let mut acc = 1;
    let mut k = n;
    while k > 1 {
        acc *= k;
        k -= 2;
    }
    acc
}

// ---------------------------------------------------------------------------
// signed-combination sum (production path)
// ---------------------------------------------------------------------------

/// Signed combinations of the interior window knots: `n - 1` minus signs
/// and `n` plus signs over `x[j+2..=j+2n]`, seeded with `-x[j+1]`. The
/// prefactor is the exact rational `1 / binom(2n-1, n-1)` evaluated once
/// in floating point.
pub fn weight_sign_vectors(spec: &BasisSpec, j: usize) -> Result<f64> {
    check_window(spec, j)?;
    let n = spec.half_degree();
    if n == 0 {
        return Ok(1.0);
    }
    let x = &spec.knots().values()[j..];
    let sum = signed_sum(spec.family(), x, n);
    Ok(sum / sign_vector_count(n)? as f64)
}

/// The raw signed sum used by [`weight_sign_vectors`]; `x` is the slice
/// starting at the window origin. Minus branch explored before plus
/// branch.
pub(crate) fn signed_sum(family: Family, x: &[f64], n: usize) -> f64 {
    fn rec(family: Family, x: &[f64], n: usize, k: usize, minus: usize, plus: usize, y: f64) -> f64 {
        if k == 2 * n {
            return family.cos_half(y);
        }
        let mut acc = 0.0;
        if minus + 1 < n {
            acc += rec(family, x, n, k + 1, minus + 1, plus, y - x[k + 1]);
        }
        if plus < n {
            acc += rec(family, x, n, k + 1, minus, plus + 1, y + x[k + 1]);
        }
        acc
    }
    rec(family, x, n, 1, 0, 0, -x[1])
}

/// One vector of `2n - 1` signs with `n - 1` entries equal to `-1` and `n`
/// entries equal to `+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignVector {
    entries: Vec<i8>,
}

impl SignVector {
    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    pub fn sum(&self) -> i32 {
        self.entries.iter().map(|&s| s as i32).sum()
    }
}

/// Enumerates all sign vectors for half-degree `n >= 1` in depth-first
/// order, minus branch before plus branch. Returns exactly
/// `binom(2n-1, n-1)` vectors.
pub fn sign_vectors(n: usize) -> Vec<SignVector> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut current = Vec::with_capacity(2 * n - 1);
    fn rec(n: usize, minus: usize, plus: usize, current: &mut Vec<i8>, out: &mut Vec<SignVector>) {
        if current.len() == 2 * n - 1 {
            out.push(SignVector {
                entries: current.clone(),
            });
            return;
        }
        if minus + 1 < n {
            current.push(-1);
            rec(n, minus + 1, plus, current, out);
            current.pop();
        }
        if plus < n {
            current.push(1);
            rec(n, minus, plus + 1, current, out);
            current.pop();
        }
    }
    rec(n, 0, 0, &mut current, &mut out);
    out
}

// ---------------------------------------------------------------------------
// q-binomial coefficients and the uniform closed form
// ---------------------------------------------------------------------------

/// Coefficient vector of the Gaussian binomial `[a + b choose a]_q`:
/// `coefficients[i]` counts the ways of throwing `i` indistinguishable
/// balls into `a` bins that hold at most `b` balls each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QBinomialTable {
    a: usize,
    b: usize,
    coefficients: Vec<u64>,
}

impl QBinomialTable {
    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coefficients
    }

    pub fn coefficient(&self, i: usize) -> u64 {
        self.coefficients[i]
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        false // always a*b + 1 >= 1 entries
    }

    pub fn sum(&self) -> u64 {
        self.coefficients.iter().sum()
    }
}

/// Computes the q-binomial coefficient table by the two-term recurrence
/// with top-down memoization. Bases `a <= 1` or `b <= 1` are all-ones
/// vectors of length `a*b + 1`.
pub fn qbinomial_table(a: usize, b: usize) -> Result<QBinomialTable> {
    let mut memo: HashMap<(usize, usize), Vec<u64>> = HashMap::new();
    let coefficients = qbinomial_rec(a, b, &mut memo)?;
    Ok(QBinomialTable { a, b, coefficients })
}

fn qbinomial_rec(
    a: usize,
    b: usize,
    memo: &mut HashMap<(usize, usize), Vec<u64>>,
) -> Result<Vec<u64>> {
    if let Some(v) = memo.get(&(a, b)) {
        return Ok(v.clone());
    }
    let mut v = vec![1u64; a * b + 1];
    if a >= 2 && b >= 2 {
        let left = qbinomial_rec(a - 1, b, memo)?;
        let down = qbinomial_rec(a, b - 1, memo)?;
        for i in 0..a {
            v[i] = left[i];
        }
        for i in a..=(a - 1) * b {
            v[i] = left[i]
                .checked_add(down[i - a])
                .ok_or(Error::CounterOverflow {
                    what: "q-binomial coefficient",
                })?;
        }
        for i in (a - 1) * b + 1..=a * b {
            v[i] = down[i - a];
        }
    }
    memo.insert((a, b), v.clone());
    Ok(v)
}

/// Closed-form weight for a uniformly spaced window with gap `h`. The
/// window must actually be uniform (checked against the knots); the value
/// depends only on `n` and `h`, not on `j`. Symmetric cosine arguments are
/// merged pairwise.
pub fn weight_uniform(spec: &BasisSpec, j: usize, h: f64) -> Result<f64> {
    check_window(spec, j)?;
    let detected = spec
        .knots()
        .uniform_spacing(j, spec.order())
        .ok_or(Error::NonUniformWindow { j })?;
    if (detected - h).abs() > 1e-14 * h.abs().max(1.0) {
        return Err(Error::NonUniformWindow { j });
    }
    uniform_weight_value(spec.family(), spec.half_degree(), h)
}

/// Compensated (Neumaier) accumulator; the head-minus-tail structure of
/// the trigonometric sums cancels heavily for large `n h`.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(self) -> f64 {
        self.sum + self.compensation
    }
}

/// `j`-independent uniform weight for half-degree `n` and gap `h`.
pub fn uniform_weight_value(family: Family, n: usize, h: f64) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    let table = qbinomial_table(n - 1, n)?;
    let rho = table.coefficients();
    let top = n * (n - 1);
    let nn = n * n;
    let mut acc = CompensatedSum::default();
    // arguments (n^2 - 2i) h / 2; the mirror of i is n^2 - i, out of the
    // table for i < n, so the first n terms stand alone
    for (i, &c) in rho.iter().enumerate().take(n.min(top + 1)) {
        acc.add(c as f64 * family.cos_half((nn - 2 * i) as f64 * h));
    }
    let mut i1 = n;
    while 2 * i1 < nn {
        let i2 = nn - i1;
        debug_assert!(i2 <= top);
        // one cosine evaluation per mirror pair; the products stay separate
        // so the sum carries exactly the terms of the unmerged form
        let c = family.cos_half((nn - 2 * i1) as f64 * h);
        acc.add(rho[i1] as f64 * c);
        acc.add(rho[i2] as f64 * c);
        i1 += 1;
    }
    if nn % 2 == 0 && nn / 2 <= top {
        acc.add(rho[nn / 2] as f64); // cos(0) = cosh(0) = 1
    }
    Ok(acc.value() / sign_vector_count(n)? as f64)
}

// ---------------------------------------------------------------------------
// trigonometric cross-checks
// ---------------------------------------------------------------------------

/// Weight via the periodic integral identity, evaluated with the equally
/// spaced rectangle rule on `4n + 8` nodes. The integrand is a
/// trigonometric polynomial of degree `n`, so the rule is exact and the
/// result matches [`weight_sign_vectors`] to rounding error.
/// Trigonometric family only.
pub fn weight_by_quadrature(spec: &BasisSpec, j: usize) -> Result<f64> {
    weight_by_quadrature_with_nodes(spec, j, 4 * spec.half_degree() + 8)
}

/// Same as [`weight_by_quadrature`] with an explicit node count
/// (`nodes > n` required for exactness).
pub fn weight_by_quadrature_with_nodes(spec: &BasisSpec, j: usize, nodes: usize) -> Result<f64> {
    if spec.family() == Family::Hyperbolic {
        return Err(Error::HyperbolicUnsupported);
    }
    check_window(spec, j)?;
    let n = spec.half_degree();
    if n == 0 {
        return Ok(1.0);
    }
    let x = &spec.knots().values()[j..];
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut mean = 0.0;
    for i in 0..nodes {
        let y = two_pi * i as f64 / nodes as f64;
        let mut prod = 1.0;
        for k in 1..=2 * n {
            prod *= ((y - x[k]) / 2.0).sin();
        }
        mean += prod;
    }
    mean /= nodes as f64;
    let scale = 2f64.powi(2 * n as i32 - 1) / sign_vector_count(n)? as f64;
    Ok(scale * mean)
}

/// Result of the uniform subset-product expansion: the weight and the
/// number of enumerated product terms (always `2^(n-1)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsetProductWeight {
    pub value: f64,
    pub terms: u64,
}

/// Alternative uniform-spacing expression for the trigonometric weight:
/// a double sum over subsets of odd half-multiples of `h`. Exponentially
/// many terms, so useful as a cross-check only.
pub fn uniform_weight_subset_products(n: usize, h: f64) -> Result<SubsetProductWeight> {
    if n == 0 {
        return Ok(SubsetProductWeight {
            value: 1.0,
            terms: 1,
        });
    }
    if n > 62 {
        return Err(Error::CounterOverflow {
            what: "subset-product term count",
        });
    }
    let mut total = 0.0;
    let mut terms: u64 = 0;
    let factors: Vec<f64> = (1..=n)
        .map(|q| ((2.0 * q as f64 - 1.0) * h / 2.0).cos())
        .collect();
    for i in 0..=n / 2 {
        let r = n - 2 * i;
        let coef = binomial(2 * i as u64, i as u64).ok_or(Error::CounterOverflow {
            what: "subset-product coefficient",
        })? as f64
            / 4f64.powi(i as i32);
        let mut inner = 0.0;
        subset_products(&factors, r, 0, 1.0, &mut |prod| {
            inner += prod;
            terms += 1;
        });
        total += coef * inner;
    }
    let scale = 2f64.powi(n as i32 - 1) / sign_vector_count(n)? as f64;
    Ok(SubsetProductWeight {
        value: scale * total,
        terms,
    })
}

fn subset_products<F: FnMut(f64)>(factors: &[f64], r: usize, start: usize, prod: f64, emit: &mut F) {
    if r == 0 {
        emit(prod);
        return;
    }
    for i in start..=factors.len().saturating_sub(r) {
        subset_products(factors, r - 1, i + 1, prod * factors[i], emit);
    }
}

// ---------------------------------------------------------------------------
// index-set cardinalities
// ---------------------------------------------------------------------------

/// Sizes of the three index sets behind the weight formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cardinalities {
    /// `(2n)!` full permutations.
    pub permutations: BigUint,
    /// `(2n - 1)!!` canonical pairings.
    pub pairings: BigUint,
    /// `binom(2n - 1, n - 1)` sign vectors.
    pub sign_vectors: BigUint,
}

/// Exact cardinalities for `1 <= n <= 20`.
pub fn cardinalities(n: usize) -> Result<Cardinalities> {
    if n == 0 || n > MAX_CARDINALITY_HALF_DEGREE {
        return Err(Error::CardinalityRange {
            n,
            max: MAX_CARDINALITY_HALF_DEGREE,
        });
    }
    let mut permutations = BigUint::from(1u32);
    for k in 1..=2 * n {
        permutations *= BigUint::from(k);
    }
    let mut pairings = BigUint::from(1u32);
    let mut k = 2 * n - 1;
    while k > 1 {
        pairings *= BigUint::from(k);
        k -= 2;
    }
    let mut sign_vectors = BigUint::from(1u32);
    // binom(2n-1, n-1) by incremental exact division
    for i in 0..n - 1 {
        sign_vectors *= BigUint::from(2 * n - 1 - i);
        sign_vectors /= BigUint::from(i + 1);
    }
    Ok(Cardinalities {
        permutations,
        pairings,
        sign_vectors,
    })
}
