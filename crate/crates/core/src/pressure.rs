//! Topological pressure of finite correspondences and their equilibrium states.
//!
//! For `T = C_A` and a potential `φ` on its edges, the pressure is
//! `log ρ(A_φ)` with `A_φ = (a_ij e^{φ(i,j)})`. It is computed three
//! independent ways here:
//!
//! * spectrally, from the Perron root of `A_φ`;
//! * combinatorially, as `(1/n) log Σ exp(Sₙφ)` over orbits with `n + 1`
//!   states (by enumeration and by matrix powers);
//! * variationally, as the supremum of `h + ∫φ` over kernels supported by `T`.
//!
//! [`equilibrium_construct`] builds a kernel and stationary vector that attain
//! the supremum from the Perron eigenvector, and [`variational_optimize`]
//! searches for the supremum numerically without using that construction.

use serde::Serialize;

use crate::correspondence::{EdgePotential, FiniteCorrespondence, DEFAULT_ORBIT_BUDGET};
use crate::error::{Error, Result};
use crate::kernels::{
    self, ProbabilityVector, StationaryMethod, StationaryOptions, TransitionKernel,
};
use crate::linalg::{self, Matrix};
use crate::perron::{self, PerronMethod, PerronVector, PowerOptions};

/// Relative threshold below which a Perron-vector entry counts as zero.
pub const SUPPORT_EPS: f64 = 1e-12;
/// Slack allowed when checking that no kernel beats the pressure.
pub const VP_SLACK: f64 = 1e-9;
/// Largest accepted `|value − pressure|` for the constructed equilibrium state.
pub const CONSTRUCTION_TOL: f64 = 1e-8;

/// Fails unless `phi` lives on exactly the edges of `corr`.
pub(crate) fn check_potential(corr: &FiniteCorrespondence, phi: &EdgePotential) -> Result<()> {
    if phi.dim() != corr.dim() {
        return Err(Error::DimensionMismatch {
            expected: corr.dim(),
            found: phi.dim(),
        });
    }
    let other = phi.correspondence();
    for i in 0..corr.dim() {
        for j in 0..corr.dim() {
            if corr.allows(i, j) != other.allows(i, j) {
                return Err(Error::DisallowedEdge(i, j));
            }
        }
    }
    Ok(())
}

/// `A_φ = (a_ij e^{φ(i,j)})`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMatrix(Matrix);

impl WeightedMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

pub fn weighted_matrix(corr: &FiniteCorrespondence, phi: &EdgePotential) -> Result<WeightedMatrix> {
    check_potential(corr, phi)?;
    let mut m = Matrix::zeros(corr.dim());
    for (i, j) in corr.edges() {
        m[(i, j)] = phi.value(i, j).exp();
    }
    Ok(WeightedMatrix(m))
}

/// Perron root and right eigenvector of `A_φ`.
pub fn spectral_data(corr: &FiniteCorrespondence, phi: &EdgePotential) -> Result<PerronVector> {
    let a = weighted_matrix(corr, phi)?;
    perron::perron_right(a.matrix(), PowerOptions::default())
}

/// `log ρ(A_φ)`.
pub fn pressure_spectral(corr: &FiniteCorrespondence, phi: &EdgePotential) -> Result<f64> {
    Ok(spectral_data(corr, phi)?.lambda.ln())
}

/// `(1/n) log 1ᵀ A_φⁿ 1`, with the iterates rescaled at every step.
pub fn pressure_combinatorial_matrix(
    corr: &FiniteCorrespondence,
    phi: &EdgePotential,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let a = weighted_matrix(corr, phi)?;
    let mut v = vec![1.0; corr.dim()];
    let mut log_scale = 0.0;
    for _ in 0..n {
        v = a.matrix().mul_vec(&v);
        let s = linalg::max_abs(&v);
        v.iter_mut().for_each(|x| *x /= s);
        log_scale += s.ln();
    }
    Ok((log_scale + v.iter().sum::<f64>().ln()) / n as f64)
}

/// `(1/n) log Σ exp(Sₙφ)` summed over every orbit with `n + 1` states.
pub fn pressure_combinatorial_enumerated(
    corr: &FiniteCorrespondence,
    phi: &EdgePotential,
    n: usize,
    budget: u128,
) -> Result<f64> {
    check_potential(corr, phi)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let orbits = corr.enumerate_orbits(n + 1, budget)?;
    let sums = orbits
        .iter()
        .map(|o| phi.birkhoff_sum(o.states()))
        .collect::<Result<Vec<_>>>()?;
    Ok(linalg::log_sum_exp(sums) / n as f64)
}

/// Both combinatorial estimates at one `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CombinatorialEstimate {
    pub n: usize,
    pub matrix_power: f64,
    /// `None` when enumeration would exceed the orbit budget.
    pub enumeration: Option<f64>,
}

pub fn pressure_combinatorial(
    corr: &FiniteCorrespondence,
    phi: &EdgePotential,
    n: usize,
    budget: u128,
) -> Result<CombinatorialEstimate> {
    let matrix_power = pressure_combinatorial_matrix(corr, phi, n)?;
    let enumeration = match pressure_combinatorial_enumerated(corr, phi, n, budget) {
        Ok(v) => Some(v),
        Err(Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(CombinatorialEstimate {
        n,
        matrix_power,
        enumeration,
    })
}

/// `Σ p_i p_ij φ(i,j)`.
pub fn potential_energy(p: &ProbabilityVector, kernel: &TransitionKernel, phi: &EdgePotential) -> f64 {
    let d = kernel.dim();
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            let w = p[i] * kernel.get(i, j);
            if w > 0.0 {
                total += w * phi.value(i, j);
            }
        }
    }
    total
}

fn check_support(corr: &FiniteCorrespondence, kernel: &TransitionKernel) -> Result<()> {
    if kernel.dim() != corr.dim() {
        return Err(Error::DimensionMismatch {
            expected: corr.dim(),
            found: kernel.dim(),
        });
    }
    for i in 0..corr.dim() {
        for j in 0..corr.dim() {
            if kernel.get(i, j) > 0.0 && !corr.allows(i, j) {
                return Err(Error::SupportViolation(i, j));
            }
        }
    }
    Ok(())
}

/// `h_p(P) + Σ p_i p_ij φ(i,j)` where `p` is the stationary vector of `P`.
pub fn variational_objective(
    corr: &FiniteCorrespondence,
    phi: &EdgePotential,
    kernel: &TransitionKernel,
) -> Result<f64> {
    check_potential(corr, phi)?;
    check_support(corr, kernel)?;
    let p = kernel.stationary()?;
    Ok(kernels::entropy_rate(&p, kernel)? + potential_energy(&p, kernel, phi))
}

/// Objective with a direct stationary solve, for the optimizer's inner loop.
fn objective_fast(kernel: &TransitionKernel, phi: &EdgePotential) -> Result<f64> {
    let direct = StationaryOptions {
        method: StationaryMethod::Direct,
        ..Default::default()
    };
    let p = match kernel.stationary_with(direct) {
        Ok(p) => p,
        Err(_) => kernel.stationary()?,
    };
    Ok(kernels::entropy_rate_unchecked(&p, kernel) + potential_energy(&p, kernel, phi))
}

/// A stationary pair attaining (up to roundoff) the pressure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumState {
    #[serde(serialize_with = "ser_prob")]
    pub p: ProbabilityVector,
    #[serde(rename = "P", serialize_with = "ser_kernel")]
    pub kernel: TransitionKernel,
    /// `h_p(P) + Σ p_i p_ij φ(i,j)`.
    pub value: f64,
    /// `log λ`.
    pub pressure: f64,
    /// `pressure − value`.
    pub gap: f64,
    pub lambda: f64,
    /// Right Perron vector of `A_φ`, normalized to sum 1.
    pub eigenvector: Vec<f64>,
    /// `L`: states where the eigenvector is nonzero (0-based).
    pub support: Vec<usize>,
    /// False when `A` is reducible: other equilibrium states may exist.
    pub unique: bool,
    pub eigen_residual: f64,
    pub eigen_method: PerronMethod,
}

fn ser_prob<S: serde::Serializer>(p: &ProbabilityVector, s: S) -> std::result::Result<S::Ok, S::Error> {
    p.entries().serialize(s)
}

fn ser_kernel<S: serde::Serializer>(k: &TransitionKernel, s: S) -> std::result::Result<S::Ok, S::Error> {
    k.matrix().to_rows().serialize(s)
}

/// Builds the equilibrium state from the Perron eigenvector `A_φ q = λ q`:
/// `p_ij = q_j a_ij e^{φ(i,j)} / (λ q_i)` on `L = {q_i ≠ 0}`, uniform rows
/// `a_ij / #T(i)` elsewhere, and `p` a stationary vector of the `L`-block
/// padded with zeros: `p_i ∝ u_i q_i` for the left Perron vector `u`.
pub fn equilibrium_construct(corr: &FiniteCorrespondence, phi: &EdgePotential) -> Result<EquilibriumState> {
    let a = weighted_matrix(corr, phi)?;
    let pv = perron::perron_right(a.matrix(), PowerOptions::default())?;
    let d = corr.dim();
    let lambda = pv.lambda;
    let qmax = linalg::max_abs(&pv.vector);
    let support: Vec<usize> = (0..d).filter(|&i| pv.vector[i] > SUPPORT_EPS * qmax).collect();
    if support.is_empty() {
        return Err(Error::DegenerateEigenvector);
    }
    let q: Vec<f64> = (0..d)
        .map(|i| if support.contains(&i) { pv.vector[i] } else { 0.0 })
        .collect();

    let mut rows = Matrix::zeros(d);
    for i in 0..d {
        if q[i] > 0.0 {
            for j in corr.images(i) {
                rows[(i, j)] = q[j] * a.matrix()[(i, j)] / (lambda * q[i]);
            }
            // a q_i slightly off the true eigenvector can leave the row without mass
            if rows.row(i).iter().sum::<f64>() > 0.0 {
                continue;
            }
        }
        let deg = corr.out_degree(i) as f64;
        for j in corr.images(i) {
            rows[(i, j)] = 1.0 / deg;
        }
    }
    let mut kernel = TransitionKernel::from_unnormalized(rows)?;
    kernel.attach_support(corr)?;

    // p_i ∝ u_i q_i with u the left Perron vector is stationary for the
    // kernel and picks the dominant class even when the L-block is reducible;
    // the block's own stationary vector is the fallback.
    let u = perron::perron_left(a.matrix(), PowerOptions::default())?.vector;
    let uq: Vec<f64> = (0..d).map(|i| u[i] * q[i]).collect();
    let from_uq = ProbabilityVector::normalized(uq)
        .ok()
        .filter(|p| kernel.stationarity_residual(p).is_ok_and(|r| r <= kernels::STATIONARITY_TOL));
    let p = match from_uq {
        Some(p) => p,
        None => {
            let block = TransitionKernel::from_unnormalized(kernel.matrix().submatrix(&support))?;
            let p_block = block.stationary()?;
            let mut p = vec![0.0; d];
            for (k, &i) in support.iter().enumerate() {
                p[i] = p_block[k];
            }
            ProbabilityVector::normalized(p)?
        }
    };
    let value = kernels::entropy_rate(&p, &kernel)? + potential_energy(&p, &kernel, phi);
    let pressure = lambda.ln();
    Ok(EquilibriumState {
        p,
        kernel,
        value,
        pressure,
        gap: pressure - value,
        lambda,
        eigenvector: pv.vector,
        support,
        unique: corr.is_irreducible(),
        eigen_residual: pv.residual,
        eigen_method: pv.method,
    })
}

/// Settings for [`variational_optimize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizeOptions {
    pub max_iter: usize,
    /// Central-difference step on the logits.
    pub fd_step: f64,
    /// Stop once `‖∇‖∞` falls below this.
    pub grad_tol: f64,
    pub initial_step: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            fd_step: 1e-5,
            grad_tol: 1e-9,
            initial_step: 1.0,
        }
    }
}

/// Result of the numerical search for the variational supremum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeOutcome {
    #[serde(skip)]
    pub kernel: TransitionKernel,
    pub value: f64,
    pub start_value: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit before the gradient test passed.
    pub converged: bool,
}

struct LogitModel<'a> {
    corr: &'a FiniteCorrespondence,
    edges: Vec<(usize, usize)>,
}

impl LogitModel<'_> {
    fn kernel(&self, theta: &[f64]) -> TransitionKernel {
        let d = self.corr.dim();
        let mut rows = Matrix::zeros(d);
        let mut row_max = vec![f64::NEG_INFINITY; d];
        for (&(i, _), t) in self.edges.iter().zip(theta) {
            row_max[i] = row_max[i].max(*t);
        }
        for (&(i, j), t) in self.edges.iter().zip(theta) {
            rows[(i, j)] = (t - row_max[i]).exp();
        }
        TransitionKernel::from_unnormalized(rows).expect("every row has an allowed edge")
    }
}

/// Maximizes `h + ∫φ` over kernels supported by `corr`, starting from the
/// uniform kernel `a_ij / #T(i)`.
pub fn variational_optimize(
    corr: &FiniteCorrespondence,
    phi: &EdgePotential,
    opts: OptimizeOptions,
) -> Result<OptimizeOutcome> {
    variational_optimize_from(corr, phi, &TransitionKernel::uniform_on(corr), opts)
}

/// Gradient ascent on edge logits `p_ij ∝ exp θ_ij` with central-difference
/// gradients and a backtracking step. Zero entries of `start` on allowed
/// edges are replaced by a tiny positive weight.
pub fn variational_optimize_from(
    corr: &FiniteCorrespondence,
    phi: &EdgePotential,
    start: &TransitionKernel,
    opts: OptimizeOptions,
) -> Result<OptimizeOutcome> {
    check_potential(corr, phi)?;
    check_support(corr, start)?;
    let model = LogitModel {
        corr,
        edges: corr.edges().collect(),
    };
    let mut theta: Vec<f64> = model
        .edges
        .iter()
        .map(|&(i, j)| start.get(i, j).max(1e-30).ln())
        .collect();
    let eval = |t: &[f64]| objective_fast(&model.kernel(t), phi);
    let mut value = eval(&theta)?;
    let start_value = value;
    let mut step = opts.initial_step;
    let h = opts.fd_step;
    let mut converged = false;
    let mut iterations = 0;
    let mut grad = vec![0.0; theta.len()];
    while iterations < opts.max_iter {
        iterations += 1;
        for k in 0..theta.len() {
            let orig = theta[k];
            theta[k] = orig + h;
            let up = eval(&theta)?;
            theta[k] = orig - h;
            let down = eval(&theta)?;
            theta[k] = orig;
            grad[k] = (up - down) / (2.0 * h);
        }
        let gnorm = linalg::max_abs(&grad);
        if gnorm < opts.grad_tol {
            converged = true;
            break;
        }
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        let mut accepted = false;
        while step > 1e-14 {
            let trial: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t + step * g).collect();
            let v = eval(&trial)?;
            if v >= value + 1e-4 * step * g2 {
                theta = trial;
                value = v;
                step *= 2.0;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // no ascent direction at finite-difference resolution
            converged = true;
            break;
        }
    }
    let mut kernel = model.kernel(&theta);
    kernel.attach_support(corr)?;
    Ok(OptimizeOutcome {
        kernel,
        value,
        start_value,
        iterations,
        converged,
    })
}

/// One asserted property in a [`PressureReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub power_iterations: usize,
    pub eigen_residual: f64,
    pub eigen_method: PerronMethod,
    pub stationary_residual: f64,
}

/// Everything [`verify_vp`] computes, with the checks it asserted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureReport {
    pub spectral: f64,
    pub combinatorial: Vec<CombinatorialEstimate>,
    pub constructed: EquilibriumState,
    pub optimizer: OptimizeOutcome,
    pub variational: f64,
    pub diagnostics: Diagnostics,
    pub checks: Vec<Check>,
}

impl PressureReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Computes the pressure every available way and checks the agreements
/// that must hold for finite correspondences.
pub fn verify_vp(corr: &FiniteCorrespondence, phi: &EdgePotential, n_max: usize) -> Result<PressureReport> {
    verify_vp_with(corr, phi, n_max, DEFAULT_ORBIT_BUDGET, OptimizeOptions::default())
}

pub fn verify_vp_with(
    corr: &FiniteCorrespondence,
    phi: &EdgePotential,
    n_max: usize,
    budget: u128,
    opts: OptimizeOptions,
) -> Result<PressureReport> {
    let pv = spectral_data(corr, phi)?;
    let spectral = pv.lambda.ln();
    let combinatorial = (1..=n_max)
        .map(|n| pressure_combinatorial(corr, phi, n, budget))
        .collect::<Result<Vec<_>>>()?;
    let constructed = equilibrium_construct(corr, phi)?;
    let optimizer = variational_optimize(corr, phi, opts)?;
    let variational = constructed.value.max(optimizer.value);

    let mut checks = Vec::new();
    let lower = -phi.sup_norm();
    checks.push(Check {
        name: "pressure_lower_bound",
        passed: spectral >= lower - 1e-12,
        detail: format!("spectral {spectral} >= -sup|phi| = {lower}"),
    });
    checks.push(Check {
        name: "construction_attains_pressure",
        passed: constructed.gap.abs() <= CONSTRUCTION_TOL,
        detail: format!("gap {:e} (tolerance {CONSTRUCTION_TOL:e})", constructed.gap),
    });
    checks.push(Check {
        name: "optimizer_below_pressure",
        passed: optimizer.value <= spectral + VP_SLACK,
        detail: format!(
            "optimizer {} <= spectral {} + {VP_SLACK:e}",
            optimizer.value, spectral
        ),
    });
    let worst = combinatorial
        .iter()
        .filter_map(|c| c.enumeration.map(|e| (e - c.matrix_power).abs()))
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "enumeration_matches_matrix_power",
        passed: worst <= 1e-9,
        detail: format!("max difference {worst:e}"),
    });
    let stationary_residual = constructed.kernel.stationarity_residual(&constructed.p)?;
    Ok(PressureReport {
        spectral,
        combinatorial,
        diagnostics: Diagnostics {
            power_iterations: pv.iterations,
            eigen_residual: pv.residual,
            eigen_method: pv.method,
            stationary_residual,
        },
        constructed,
        optimizer,
        variational,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn golden() -> f64 {
        (1.0 + 5f64.sqrt()) / 2.0
    }

    fn diag_potential(corr: &FiniteCorrespondence, beta: f64) -> EdgePotential {
        EdgePotential::from_fn(corr, |i, j| if i == j { beta } else { 0.0 }).unwrap()
    }

    #[test]
    fn near_tied_diagonal_classes() {
        let two = FiniteCorrespondence::from_map(&[0, 1]).unwrap();
        let phi = EdgePotential::from_entries(&two, [(0, 0, 0.30), (1, 1, 0.2999)]).unwrap();
        let eq = equilibrium_construct(&two, &phi).unwrap();
        assert!(eq.gap.abs() < 1e-10, "{}", eq.gap);
        assert!(eq.p[0] > 1.0 - 1e-9);
    }

    #[test]
    fn weighted_matrix_examples() {
        let g = FiniteCorrespondence::golden_mean();
        let a = weighted_matrix(&g, &EdgePotential::zero(&g)).unwrap();
        assert_eq!(a.matrix(), &g.to_matrix());
        let full = FiniteCorrespondence::full_shift(2).unwrap();
        let a = weighted_matrix(&full, &diag_potential(&full, 1.0)).unwrap();
        assert_eq!(a.matrix().to_rows(), vec![vec![E, 1.0], vec![1.0, E]]);
        let wrong = EdgePotential::zero(&full);
        assert_eq!(weighted_matrix(&g, &wrong), Err(Error::DisallowedEdge(1, 1)));
    }

    #[test]
    fn spectral_examples() {
        for d in 1..6 {
            let full = FiniteCorrespondence::full_shift(d).unwrap();
            let p = pressure_spectral(&full, &EdgePotential::zero(&full)).unwrap();
            assert!((p - (d as f64).ln()).abs() < 1e-13);
        }
        let g = FiniteCorrespondence::golden_mean();
        let p = pressure_spectral(&g, &EdgePotential::zero(&g)).unwrap();
        assert!((p - 0.481_211_825_059_603_4).abs() < 1e-13);
        let full = FiniteCorrespondence::full_shift(2).unwrap();
        let p = pressure_spectral(&full, &diag_potential(&full, 1.0)).unwrap();
        assert!((p - (E + 1.0).ln()).abs() < 1e-13);
        assert!((p - 1.313_261_687_518_222_8).abs() < 1e-12);
    }

    #[test]
    fn combinatorial_examples() {
        let full = FiniteCorrespondence::full_shift(2).unwrap();
        let zero = EdgePotential::zero(&full);
        for n in 1..12 {
            let est = pressure_combinatorial(&full, &zero, n, DEFAULT_ORBIT_BUDGET).unwrap();
            let exact = 2f64.ln() + 2f64.ln() / n as f64;
            assert!((est.matrix_power - exact).abs() < 1e-13);
            assert!((est.enumeration.unwrap() - exact).abs() < 1e-13);
        }
        let g = FiniteCorrespondence::golden_mean();
        let est = pressure_combinatorial(&g, &EdgePotential::zero(&g), 10, DEFAULT_ORBIT_BUDGET).unwrap();
        // 1ᵀA¹⁰1 = F(12) + 2F(11) ... = 233 (orbits of 11 states)
        assert_eq!(g.count_orbits(10).unwrap(), 233);
        assert!((est.matrix_power - 233f64.ln() / 10.0).abs() < 1e-13);
        assert!((est.matrix_power - golden().ln()).abs() < 0.08);
    }

    #[test]
    fn combinatorial_shift_by_constant() {
        let g = FiniteCorrespondence::golden_mean();
        let phi = EdgePotential::from_entries(&g, [(0, 0, 0.3), (0, 1, -0.7), (1, 0, 1.1)]).unwrap();
        let base = pressure_combinatorial(&g, &phi, 7, DEFAULT_ORBIT_BUDGET).unwrap();
        let shifted = pressure_combinatorial(&g, &phi.shifted(0.25), 7, DEFAULT_ORBIT_BUDGET).unwrap();
        assert!((shifted.matrix_power - base.matrix_power - 0.25).abs() < 1e-13);
        assert!((shifted.enumeration.unwrap() - base.enumeration.unwrap() - 0.25).abs() < 1e-13);
    }

    #[test]
    fn combinatorial_budget_drops_enumeration() {
        let full = FiniteCorrespondence::full_shift(3).unwrap();
        let est = pressure_combinatorial(&full, &EdgePotential::zero(&full), 10, 1000).unwrap();
        assert!(est.enumeration.is_none());
        assert!(matches!(
            pressure_combinatorial_enumerated(&full, &EdgePotential::zero(&full), 10, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn variational_objective_examples() {
        let perm = FiniteCorrespondence::from_map(&[1, 2, 0]).unwrap();
        let k = TransitionKernel::from_map(&[1, 2, 0]).unwrap();
        assert_eq!(variational_objective(&perm, &EdgePotential::zero(&perm), &k).unwrap(), 0.0);
        let full = FiniteCorrespondence::full_shift(2).unwrap();
        let u = TransitionKernel::uniform_on(&full);
        let v = variational_objective(&full, &EdgePotential::zero(&full), &u).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-15);
        let g = FiniteCorrespondence::golden_mean();
        assert_eq!(
            variational_objective(&g, &EdgePotential::zero(&g), &u),
            Err(Error::SupportViolation(1, 1))
        );
    }

    #[test]
    fn construction_full_shift() {
        let full = FiniteCorrespondence::full_shift(2).unwrap();
        let eq = equilibrium_construct(&full, &EdgePotential::zero(&full)).unwrap();
        assert_eq!(eq.kernel.matrix().to_rows(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert_eq!(eq.p.entries(), &[0.5, 0.5]);
        assert!((eq.value - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn construction_golden_mean_is_parry() {
        let g = golden();
        let gm = FiniteCorrespondence::golden_mean();
        let eq = equilibrium_construct(&gm, &EdgePotential::zero(&gm)).unwrap();
        let expect = [[1.0 / g, 1.0 / (g * g)], [1.0, 0.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((eq.kernel.get(i, j) - expect[i][j]).abs() < 1e-13);
            }
        }
        assert!((eq.p[0] - g * g / (g * g + 1.0)).abs() < 1e-13);
        assert!((eq.value - g.ln()).abs() < 1e-10);
        assert!(eq.gap.abs() < 1e-10);
        assert!(eq.unique);
    }

    #[test]
    fn construction_weighted_full_shift() {
        let full = FiniteCorrespondence::full_shift(2).unwrap();
        let eq = equilibrium_construct(&full, &diag_potential(&full, 1.0)).unwrap();
        let stay = E / (E + 1.0);
        assert!((eq.kernel.get(0, 0) - stay).abs() < 1e-13);
        assert!((eq.kernel.get(1, 0) - (1.0 - stay)).abs() < 1e-13);
        assert!((eq.p[0] - 0.5).abs() < 1e-13);
        assert!((eq.value - (E + 1.0).ln()).abs() < 1e-10);
    }

    #[test]
    fn construction_identity_map_is_dirac_on_argmax() {
        let id = FiniteCorrespondence::from_map(&[0, 1, 2]).unwrap();
        let c = [0.3, 1.2, -0.5];
        let phi = EdgePotential::from_fn(&id, |i, _| c[i]).unwrap();
        let p = pressure_spectral(&id, &phi).unwrap();
        assert!((p - 1.2).abs() < 1e-12);
        let eq = equilibrium_construct(&id, &phi).unwrap();
        assert_eq!(eq.support, vec![1]);
        assert_eq!(eq.p.entries(), &[0.0, 1.0, 0.0]);
        assert!(eq.gap.abs() < 1e-10);
        assert!(!eq.unique);
    }

    #[test]
    fn construction_on_reducible_matrix() {
        // state 0 feeds the golden-mean block {1, 2}; transient state gets p = 0
        let t = FiniteCorrespondence::from_01(&[[1, 1, 0], [0, 1, 1], [0, 1, 0]]).unwrap();
        let eq = equilibrium_construct(&t, &EdgePotential::zero(&t)).unwrap();
        assert!((eq.pressure - golden().ln()).abs() < 1e-12);
        assert!(eq.gap.abs() < 1e-8);
        assert!(eq.p[0].abs() < 1e-12);
        assert!(!eq.unique);
    }

    #[test]
    fn optimizer_examples() {
        let full = FiniteCorrespondence::full_shift(2).unwrap();
        let out = variational_optimize(&full, &EdgePotential::zero(&full), OptimizeOptions::default()).unwrap();
        assert!((out.value - 2f64.ln()).abs() < 1e-4);
        let g = FiniteCorrespondence::golden_mean();
        let zero = EdgePotential::zero(&g);
        let out = variational_optimize(&g, &zero, OptimizeOptions::default()).unwrap();
        assert!((out.value - golden().ln()).abs() < 1e-3, "{}", out.value);
        assert!(out.value <= golden().ln() + VP_SLACK);
    }

    #[test]
    fn optimizer_started_at_optimum_stays_put() {
        let full = FiniteCorrespondence::full_shift(3).unwrap();
        let phi = EdgePotential::from_fn(&full, |i, j| 0.3 * i as f64 - 0.2 * j as f64 + 0.1 * (i * j) as f64).unwrap();
        let eq = equilibrium_construct(&full, &phi).unwrap();
        let out = variational_optimize_from(&full, &phi, &eq.kernel, OptimizeOptions::default()).unwrap();
        assert!(out.value - out.start_value <= 1e-9, "improved by {}", out.value - out.start_value);
        assert!((out.start_value - eq.pressure).abs() < 1e-10);
    }

    #[test]
    fn verify_vp_golden_mean() {
        let g = FiniteCorrespondence::golden_mean();
        let report = verify_vp(&g, &EdgePotential::zero(&g), 12).unwrap();
        assert!(report.all_passed(), "{:?}", report.checks);
        let lg = golden().ln();
        assert!((report.spectral - lg).abs() < 1e-12);
        assert!((report.constructed.value - lg).abs() < 1e-8);
        assert!((report.optimizer.value - lg).abs() < 1e-3);
        assert!((report.combinatorial[11].matrix_power - lg).abs() < 5.0 / 12.0);
    }
}
