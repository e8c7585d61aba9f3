//! Transition probability kernels on a finite state space.
//!
//! A kernel is a row-stochastic matrix `P = (p_ij)`; together with an initial
//! distribution it defines a Markov measure on the orbit space. When a
//! support correspondence is attached, `p_ij = 0` off its edges, i.e. the
//! kernel is a stochastic selection of the correspondence.
//!
//! Natural logarithms throughout, with `0 · log 0 = 0`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::correspondence::FiniteCorrespondence;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Tolerance on `Σ = 1` for probability vectors and kernel rows.
pub const MASS_TOL: f64 = 1e-12;
/// Largest `‖pP − p‖∞` accepted by the entropy formulas.
pub const STATIONARITY_TOL: f64 = 1e-8;
/// Identifier of the random generator behind [`sample_path`] and the complex samplers.
pub const GENERATOR_ID: &str = "chacha20";

/// Seeded generator used for every random draw in the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// `x log x` with the `0 log 0 = 0` convention.
fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Shannon entropy of a finite distribution.
pub fn shannon_entropy(dist: &[f64]) -> f64 {
    -dist.iter().map(|&x| xlogx(x)).sum::<f64>()
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Nonnegative vector of total mass 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::NotProbability("empty vector".into()));
        }
        if let Some(i) = entries.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::NotProbability(format!("entry {i} is {}", entries[i])));
        }
        let total: f64 = entries.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::NotProbability(format!("total mass {total}")));
        }
        Ok(Self(entries))
    }

    /// Rescales a nonnegative vector with positive total to mass 1.
    pub fn normalized(entries: Vec<f64>) -> Result<Self> {
        let total: f64 = entries.iter().sum();
        if !(total.is_finite() && total > 0.0) || entries.iter().any(|x| *x < 0.0) {
            return Err(Error::NotProbability("cannot normalize".into()));
        }
        Ok(Self(entries.into_iter().map(|x| x / total).collect()))
    }

    pub fn uniform(d: usize) -> Self {
        Self(vec![1.0 / d as f64; d])
    }

    pub fn dirac(d: usize, i: usize) -> Self {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Row-stochastic matrix, optionally tied to a support correspondence.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    rows: Matrix,
    support: Option<FiniteCorrespondence>,
}

impl TransitionKernel {
    pub fn new(rows: Matrix) -> Result<Self> {
        for i in 0..rows.dim() {
            let r = rows.row(i);
            if let Some(j) = r.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::NotStochastic {
                    row: i,
                    reason: format!("has entry {} in column {j}", r[j]),
                });
            }
            let s: f64 = r.iter().sum();
            if (s - 1.0).abs() > MASS_TOL {
                return Err(Error::NotStochastic {
                    row: i,
                    reason: format!("sums to {s}"),
                });
            }
        }
        Ok(Self {
            rows,
            support: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// A kernel that must vanish off the edges of `support`.
    pub fn with_support(rows: Matrix, support: &FiniteCorrespondence) -> Result<Self> {
        check_dim(support.dim(), rows.dim())?;
        let mut k = Self::new(rows)?;
        k.attach_support(support)?;
        Ok(k)
    }

    /// Checks the support condition and records `support`.
    pub fn attach_support(&mut self, support: &FiniteCorrespondence) -> Result<()> {
        check_dim(support.dim(), self.dim())?;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if self.rows[(i, j)] > 0.0 && !support.allows(i, j) {
                    return Err(Error::SupportViolation(i, j));
                }
            }
        }
        self.support = Some(support.clone());
        Ok(())
    }

    /// Rows rescaled to sum 1; used where rows are exact up to roundoff.
    pub(crate) fn from_unnormalized(mut rows: Matrix) -> Result<Self> {
        for i in 0..rows.dim() {
            let s: f64 = rows.row(i).iter().sum();
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::NotStochastic {
                    row: i,
                    reason: "has no mass".into(),
                });
            }
            rows.row_mut(i).iter_mut().for_each(|x| *x /= s);
        }
        Self::new(rows)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            rows: Matrix::identity(d),
            support: None,
        }
    }

    /// Dirac kernel `x ↦ δ_{f(x)}` of a self-map (0-based table).
    pub fn from_map(f: &[usize]) -> Result<Self> {
        let corr = FiniteCorrespondence::from_map(f)?;
        Ok(Self {
            rows: corr.to_matrix(),
            support: Some(corr),
        })
    }

    /// `p_ij = a_ij / #T(i)`.
    pub fn uniform_on(corr: &FiniteCorrespondence) -> Self {
        let mut rows = corr.to_matrix();
        for i in 0..corr.dim() {
            let deg = corr.out_degree(i) as f64;
            rows.row_mut(i).iter_mut().for_each(|x| *x /= deg);
        }
        Self {
            rows,
            support: Some(corr.clone()),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.rows
    }

    pub fn support(&self) -> Option<&FiniteCorrespondence> {
        self.support.as_ref()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[(i, j)]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.rows.row(i)
    }

    /// `μQ`: `(μQ)_j = Σ_i μ_i p_ij`.
    pub fn pushforward(&self, mu: &ProbabilityVector) -> Result<ProbabilityVector> {
        check_dim(self.dim(), mu.dim())?;
        Ok(ProbabilityVector(self.rows.vec_mul(mu.entries())))
    }

    /// `Qf`: `(Qf)_i = Σ_j p_ij f_j`.
    pub fn pullback(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), f.len())?;
        Ok(self.rows.mul_vec(f))
    }

    /// `self · next` as matrices: first step by `self`, then by `next`.
    pub fn compose(&self, next: &TransitionKernel) -> Result<TransitionKernel> {
        check_dim(self.dim(), next.dim())?;
        Ok(TransitionKernel {
            rows: self.rows.mul(&next.rows),
            support: None,
        })
    }

    /// `‖pP − p‖∞`.
    pub fn stationarity_residual(&self, p: &ProbabilityVector) -> Result<f64> {
        check_dim(self.dim(), p.dim())?;
        let pp = self.rows.vec_mul(p.entries());
        Ok(pp
            .iter()
            .zip(p.entries())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// A stationary distribution `pP = p`.
    pub fn stationary(&self) -> Result<ProbabilityVector> {
        self.stationary_with(StationaryOptions::default())
    }

    pub fn stationary_with(&self, opts: StationaryOptions) -> Result<ProbabilityVector> {
        if opts.method == StationaryMethod::PowerIteration {
            if let Some(p) = self.stationary_power(opts) {
                return Ok(p);
            }
        }
        if self.dim() <= opts.direct_max_dim || opts.method == StationaryMethod::Direct {
            return self.stationary_direct();
        }
        Err(Error::NoConvergence {
            what: "stationary distribution",
            iterations: opts.max_iter,
        })
    }

    /// Power iteration with the lazy chain `(P + I)/2`, started from uniform.
    fn stationary_power(&self, opts: StationaryOptions) -> Option<ProbabilityVector> {
        let d = self.dim();
        let mut p = vec![1.0 / d as f64; d];
        let mut best = f64::INFINITY;
        let mut since_best = 0;
        for _ in 0..opts.max_iter {
            let pp = self.rows.vec_mul(&p);
            let r = pp
                .iter()
                .zip(&p)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if r <= opts.tol || (since_best > 200 && r <= opts.accept) {
                return Some(ProbabilityVector(p));
            }
            if r < best * (1.0 - 1e-3) {
                best = r;
                since_best = 0;
            } else {
                since_best += 1;
            }
            let mut next: Vec<f64> = pp.iter().zip(&p).map(|(a, b)| 0.5 * (a + b)).collect();
            let s: f64 = next.iter().sum();
            next.iter_mut().for_each(|x| *x /= s);
            p = next;
        }
        None
    }

    /// Solves `(Pᵀ − I) p = 0` with the last equation replaced by `Σ p = 1`.
    fn stationary_direct(&self) -> Result<ProbabilityVector> {
        let d = self.dim();
        let mut m = self.rows.transpose();
        for i in 0..d {
            m[(i, i)] -= 1.0;
        }
        for j in 0..d {
            m[(d - 1, j)] = 1.0;
        }
        let mut rhs = vec![0.0; d];
        rhs[d - 1] = 1.0;
        let sol = linalg::solve(&m, &rhs).ok_or(Error::NoConvergence {
            what: "stationary linear solve (singular system)",
            iterations: 0,
        })?;
        ProbabilityVector::normalized(sol.into_iter().map(|x| x.max(0.0)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationaryMethod {
    /// Lazy power iteration, falling back to a direct solve.
    PowerIteration,
    /// Direct linear solve only.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryOptions {
    pub method: StationaryMethod,
    /// Residual target for `‖pP − p‖∞`.
    pub tol: f64,
    /// Residual accepted once the iteration stagnates.
    pub accept: f64,
    pub max_iter: usize,
    /// Direct-solve fallback is used up to this dimension.
    pub direct_max_dim: usize,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        Self {
            method: StationaryMethod::PowerIteration,
            tol: 1e-14,
            accept: 1e-12,
            max_iter: 100_000,
            direct_max_dim: 64,
        }
    }
}

/// Mass `μ(x₁) p_{x₁x₂} ⋯ p_{x_{n−1}xₙ}` of the cylinder `[x₁ … xₙ]`.
pub fn cylinder_measure(mu: &ProbabilityVector, q: &TransitionKernel, orbit: &[usize]) -> f64 {
    let Some(&first) = orbit.first() else {
        return 0.0;
    };
    orbit
        .windows(2)
        .fold(mu[first], |acc, w| acc * q.get(w[0], w[1]))
}

fn ensure_stationary(p: &ProbabilityVector, q: &TransitionKernel) -> Result<()> {
    let residual = q.stationarity_residual(p)?;
    if residual > STATIONARITY_TOL {
        return Err(Error::NotStationary {
            residual,
            tolerance: STATIONARITY_TOL,
        });
    }
    Ok(())
}

/// `−Σ p_i p_ij log p_ij` for a stationary pair.
pub fn entropy_rate(p: &ProbabilityVector, q: &TransitionKernel) -> Result<f64> {
    ensure_stationary(p, q)?;
    Ok(entropy_rate_unchecked(p, q))
}

pub(crate) fn entropy_rate_unchecked(p: &ProbabilityVector, q: &TransitionKernel) -> f64 {
    (0..q.dim())
        .map(|i| p[i] * shannon_entropy(q.row(i)))
        .sum()
}

/// Time-reversal kernel of a stationary pair, with the rows that had to be
/// filled in by convention.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardKernel {
    pub kernel: TransitionKernel,
    /// States `j` with `p_j = 0`. Their rows are uniform over the
    /// predecessors `i` with `p_i > 0` and `p_ij > 0`, or uniform over all
    /// states when there is none; they carry no mass and are excluded from
    /// the reversal identity.
    pub zero_states: Vec<usize>,
}

/// `R_ji = p_i p_ij / (pP)_j`, so that `p_j R_ji = p_i p_ij`.
pub fn backward_kernel(p: &ProbabilityVector, q: &TransitionKernel) -> Result<BackwardKernel> {
    ensure_stationary(p, q)?;
    let d = q.dim();
    let pp = q.matrix().vec_mul(p.entries());
    let mut rows = Matrix::zeros(d);
    let mut zero_states = Vec::new();
    for j in 0..d {
        if p[j] == 0.0 || pp[j] == 0.0 {
            zero_states.push(j);
            let preds: Vec<usize> = (0..d).filter(|&i| p[i] > 0.0 && q.get(i, j) > 0.0).collect();
            if preds.is_empty() {
                rows.row_mut(j).iter_mut().for_each(|x| *x = 1.0 / d as f64);
            } else {
                for &i in &preds {
                    rows[(j, i)] = 1.0 / preds.len() as f64;
                }
            }
            continue;
        }
        for i in 0..d {
            rows[(j, i)] = p[i] * q.get(i, j) / pp[j];
        }
    }
    Ok(BackwardKernel {
        kernel: TransitionKernel::from_unnormalized(rows)?,
        zero_states,
    })
}

/// `Σ_j p_j H(R_j)`: entropy as the mean uncertainty of the predecessor.
pub fn rokhlin_entropy(p: &ProbabilityVector, backward: &TransitionKernel) -> Result<f64> {
    check_dim(backward.dim(), p.dim())?;
    Ok((0..p.dim())
        .map(|j| p[j] * shannon_entropy(backward.row(j)))
        .sum())
}

/// Nonnegative matrix of total mass 1 on pairs of states.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution(Matrix);

impl JointDistribution {
    pub fn new(m: Matrix) -> Result<Self> {
        let data = m.as_row_major();
        if let Some(k) = data.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::NotProbability(format!("entry {k} is {}", data[k])));
        }
        let total: f64 = data.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::NotProbability(format!("total mass {total}")));
        }
        Ok(Self(m))
    }

    /// `ν_ij = μ_i p_ij`, the law of the first two coordinates.
    pub fn from_markov(mu: &ProbabilityVector, q: &TransitionKernel) -> Result<Self> {
        check_dim(q.dim(), mu.dim())?;
        let d = q.dim();
        let mut m = Matrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = mu[i] * q.get(i, j);
            }
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }
}

/// Splits `ν` into its first marginal `μ` and a kernel `Q` with `μ_i Q_ij = ν_ij`.
///
/// Rows with `μ_i = 0` are uniform over the support row (or over all states
/// without a support).
pub fn factor_joint(
    nu: &JointDistribution,
    support: Option<&FiniteCorrespondence>,
) -> Result<(ProbabilityVector, TransitionKernel)> {
    let m = nu.matrix();
    let d = m.dim();
    if let Some(s) = support {
        check_dim(s.dim(), d)?;
        for i in 0..d {
            for j in 0..d {
                if m[(i, j)] > 0.0 && !s.allows(i, j) {
                    return Err(Error::SupportViolation(i, j));
                }
            }
        }
    }
    let mu: Vec<f64> = (0..d).map(|i| m.row(i).iter().sum()).collect();
    let mut rows = Matrix::zeros(d);
    for i in 0..d {
        if mu[i] > 0.0 {
            for j in 0..d {
                rows[(i, j)] = m[(i, j)] / mu[i];
            }
        } else {
            match support {
                Some(s) => {
                    let deg = s.out_degree(i) as f64;
                    for j in s.images(i) {
                        rows[(i, j)] = 1.0 / deg;
                    }
                }
                None => rows.row_mut(i).iter_mut().for_each(|x| *x = 1.0 / d as f64),
            }
        }
    }
    let mut kernel = TransitionKernel::from_unnormalized(rows)?;
    if let Some(s) = support {
        kernel.attach_support(s)?;
    }
    Ok((ProbabilityVector::normalized(mu)?, kernel))
}

/// A finite realization of the Markov chain, with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    pub states: Vec<usize>,
    pub dim: usize,
    pub seed: u64,
    pub generator: &'static str,
}

impl SampledPath {
    /// Header `# seed=… generator=… dim=… len=…`, then one 1-based state per line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# seed={} generator={} dim={} len={}\n",
            self.seed,
            self.generator,
            self.dim,
            self.states.len()
        );
        for s in &self.states {
            out.push_str(&(s + 1).to_string());
            out.push('\n');
        }
        out
    }
}

fn sample_index(rng: &mut impl Rng, weights: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // roundoff left u above the accumulated mass: take the last positive entry
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Draws `x₁ ~ μ`, then `xₖ₊₁ ~ Q(xₖ, ·)`, for `len` states in total.
pub fn sample_path(
    mu: &ProbabilityVector,
    q: &TransitionKernel,
    len: usize,
    seed: u64,
) -> Result<SampledPath> {
    check_dim(q.dim(), mu.dim())?;
    if len == 0 {
        return Err(Error::InvalidParameter("path length must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut states = Vec::with_capacity(len);
    let mut x = sample_index(&mut rng, mu.entries());
    states.push(x);
    for _ in 1..len {
        x = sample_index(&mut rng, q.row(x));
        states.push(x);
    }
    Ok(SampledPath {
        states,
        dim: q.dim(),
        seed,
        generator: GENERATOR_ID,
    })
}

/// Empirical entropy of the `k`-blocks starting at positions `0..blocks`.
fn block_entropy(states: &[usize], dim: usize, k: usize, blocks: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let top = dim.pow(k as u32 - 1);
    let mut counts: HashMap<usize, usize> = HashMap::new();
    let mut code = 0usize;
    for (t, &s) in states[..blocks + k - 1].iter().enumerate() {
        if t >= k {
            code -= states[t - k] * top;
        }
        code = code * dim + s;
        if t + 1 >= k {
            *counts.entry(code).or_default() += 1;
        }
    }
    let n = blocks as f64;
    -counts
        .values()
        .map(|&c| {
            let f = c as f64 / n;
            f * f.ln()
        })
        .sum::<f64>()
}

/// Plug-in entropy-rate estimate `Ĥ_k − Ĥ_{k−1}` from empirical `k`-block
/// frequencies (overlapping blocks). Both terms use the same block start
/// positions, so the difference is the empirical conditional entropy of a
/// symbol given its `k − 1` predecessors.
pub fn block_entropy_estimate(path: &SampledPath, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("block length must be at least 1".into()));
    }
    let required = (path.dim as u128)
        .checked_pow(k as u32)
        .and_then(|x| x.checked_mul(50))
        .map_or(usize::MAX, |x| x.min(usize::MAX as u128) as usize);
    let blocks = (path.states.len() + 1).saturating_sub(k);
    if blocks < required {
        return Err(Error::InsufficientData { blocks, required });
    }
    Ok(block_entropy(&path.states, path.dim, k, blocks)
        - block_entropy(&path.states, path.dim, k - 1, blocks))
}
