//! Perron roots and nonnegative eigenvectors of nonnegative matrices.
//!
//! The primary method is power iteration on `M + I` from the all-ones
//! vector. The shift makes every irreducible block aperiodic, so for
//! matrices whose dominant class is unique the iteration converges
//! geometrically. When it does not converge (several dominant classes
//! chained together, or nearly equal class radii) we fall back to the
//! Frobenius normal form: pick a dominant class that no other dominant
//! class can reach, take its Perron vector, and extend it to the states
//! upstream of it by one linear solve.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Settings for [`perron_right`] / [`perron_left`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    /// Target for `‖Mv − λv‖∞ / (λ ‖v‖∞)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            max_iter: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerronMethod {
    PowerIteration,
    ClassDecomposition,
}

/// A Perron root with a nonnegative eigenvector normalized to sum 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronVector {
    pub lambda: f64,
    pub vector: Vec<f64>,
    /// `‖Mv − λv‖∞ / ‖v‖∞` at the returned vector.
    pub residual: f64,
    pub iterations: usize,
    pub method: PerronMethod,
}

/// Residuals this far above `tol` are still accepted once the iteration stagnates.
const STAGNATION_ACCEPT: f64 = 1e-11;
const STAGNATION_WINDOW: usize = 200;

/// Right eigenvector: `M q = λ q`, `λ = ρ(M)`.
pub fn perron_right(m: &Matrix, opts: PowerOptions) -> Result<PerronVector> {
    match power_iterate(m, opts) {
        Ok(pv) => Ok(pv),
        Err(Error::NoConvergence { iterations, .. }) => {
            let mut pv = class_decomposition(m, opts)?;
            pv.iterations += iterations;
            Ok(pv)
        }
        Err(e) => Err(e),
    }
}

/// Left eigenvector: `u M = λ u`.
pub fn perron_left(m: &Matrix, opts: PowerOptions) -> Result<PerronVector> {
    perron_right(&m.transpose(), opts)
}

fn residual(m: &Matrix, v: &[f64], lambda: f64) -> f64 {
    let mv = m.mul_vec(v);
    let r = mv
        .iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).abs())
        .fold(0.0, f64::max);
    r / linalg::max_abs(v)
}

/// Shifted power iteration without fallback.
pub(crate) fn power_iterate(m: &Matrix, opts: PowerOptions) -> Result<PerronVector> {
    let d = m.dim();
    if d == 0 {
        return Err(Error::EmptyStateSpace);
    }
    let mut v = vec![1.0 / d as f64; d];
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    for it in 0..opts.max_iter {
        let mv = m.mul_vec(&v);
        let total: f64 = v.iter().sum();
        let lambda = mv.iter().sum::<f64>() / total;
        let vmax = linalg::max_abs(&v);
        let r = mv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).abs())
            .fold(0.0, f64::max)
            / vmax;
        let scale = lambda.max(f64::MIN_POSITIVE);
        if r <= opts.tol * scale
            || (since_best >= STAGNATION_WINDOW && r <= STAGNATION_ACCEPT * scale)
        {
            return Ok(PerronVector {
                lambda,
                vector: v.iter().map(|x| x / total).collect(),
                residual: r,
                iterations: it + 1,
                method: PerronMethod::PowerIteration,
            });
        }
        if r < best * (1.0 - 1e-3) {
            best = r;
            since_best = 0;
        } else {
            since_best += 1;
        }
        let mut next: Vec<f64> = mv.iter().zip(&v).map(|(a, b)| a + b).collect();
        let s: f64 = next.iter().sum();
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::DegenerateEigenvector);
        }
        next.iter_mut().for_each(|x| *x /= s);
        v = next;
    }
    Err(Error::NoConvergence {
        what: "power iteration",
        iterations: opts.max_iter,
    })
}

fn class_decomposition(m: &Matrix, opts: PowerOptions) -> Result<PerronVector> {
    let d = m.dim();
    let adj: Vec<Vec<bool>> = (0..d)
        .map(|i| m.row(i).iter().map(|&x| x > 0.0).collect())
        .collect();
    let reach = linalg::reachability(&adj);
    let classes = linalg::strong_components(&adj);

    let mut radii = Vec::with_capacity(classes.len());
    let mut iterations = 0;
    for class in &classes {
        let block = m.submatrix(class);
        if class.len() == 1 {
            radii.push((block[(0, 0)], vec![1.0]));
        } else {
            let pv = power_iterate(&block, opts)?;
            iterations += pv.iterations;
            radii.push((pv.lambda, pv.vector));
        }
    }
    let rho = radii.iter().map(|(r, _)| *r).fold(0.0, f64::max);
    if rho <= 0.0 {
        return Err(Error::DegenerateEigenvector);
    }
    let is_basic = |c: usize| radii[c].0 >= rho * (1.0 - 1e-12);
    let reaches = |a: usize, b: usize| reach[classes[a][0]][classes[b][0]];
    let basic = (0..classes.len())
        .find(|&c| is_basic(c) && !(0..classes.len()).any(|o| o != c && is_basic(o) && reaches(o, c)))
        .ok_or(Error::DegenerateEigenvector)?;

    let base = &classes[basic];
    let upstream: Vec<usize> = (0..d)
        .filter(|&i| !base.contains(&i) && base.iter().any(|&b| reach[i][b]))
        .collect();
    let mut q = vec![0.0; d];
    for (k, &i) in base.iter().enumerate() {
        q[i] = radii[basic].1[k];
    }
    if !upstream.is_empty() {
        let mut lhs = m.submatrix(&upstream);
        for a in 0..upstream.len() {
            for b in 0..upstream.len() {
                lhs[(a, b)] = if a == b { rho } else { 0.0 } - lhs[(a, b)];
            }
        }
        let rhs: Vec<f64> = upstream
            .iter()
            .map(|&i| base.iter().map(|&j| m[(i, j)] * q[j]).sum())
            .collect();
        let sol = linalg::solve(&lhs, &rhs).ok_or(Error::DegenerateEigenvector)?;
        for (k, &i) in upstream.iter().enumerate() {
            q[i] = sol[k].max(0.0);
        }
    }
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|x| *x /= total);
    let r = residual(m, &q, rho);
    Ok(PerronVector {
        lambda: rho,
        vector: q,
        residual: r,
        iterations,
        method: PerronMethod::ClassDecomposition,
    })
}
