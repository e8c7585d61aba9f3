//! The Ruelle transfer operator of a finite correspondence.
//!
//! On functions of one coordinate the operator is
//! `(Lv)(x₁) = Σ_{x₀ ∈ T⁻¹(x₁)} v(x₀) e^{φ(x₀,x₁)}`, i.e. `L = A_φᵀ`. Its
//! leading eigendata give the equilibrium state directly:
//!
//! * `q` with `A_φ q = λ q` is the eigenmeasure of `L*`; its cylinder masses
//!   are `m[x₁…xₙ₊₁] = λ⁻ⁿ e^{Sₙφ} q_{xₙ₊₁}`;
//! * `u` with `u A_φ = λ u` is the eigenfunction of `L`;
//! * `μ = u·m` is the equilibrium measure, a Markov measure that coincides
//!   with the one from [`crate::pressure::equilibrium_construct`].

use serde::Serialize;

use crate::correspondence::{EdgePotential, FiniteCorrespondence, Orbit};
use crate::error::{Error, Result};
use crate::linalg;
use crate::perron::{self, PowerOptions};
use crate::pressure::{check_potential, weighted_matrix};

/// Cap on the number of cylinders visited by exhaustive scans.
pub const CYLINDER_SCAN_CAP: u128 = 1_000_000;

/// `L v = A_φᵀ v`.
pub fn transfer_apply(corr: &FiniteCorrespondence, phi: &EdgePotential, v: &[f64]) -> Result<Vec<f64>> {
    check_potential(corr, phi)?;
    if v.len() != corr.dim() {
        return Err(Error::DimensionMismatch {
            expected: corr.dim(),
            found: v.len(),
        });
    }
    let mut out = vec![0.0; corr.dim()];
    for (x1, slot) in out.iter_mut().enumerate() {
        *slot = corr
            .preimages(x1)
            .map(|x0| v[x0] * phi.value(x0, x1).exp())
            .sum();
    }
    Ok(out)
}

/// Leading eigendata of the transfer operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferSpectrum {
    pub lambda: f64,
    /// `A_φ q = λ q`, `Σ q = 1`.
    pub right: Vec<f64>,
    /// `u A_φ = λ u`, `Σ u = 1`.
    pub left: Vec<f64>,
    pub right_residual: f64,
    pub left_residual: f64,
    pub right_iterations: usize,
    pub left_iterations: usize,
    /// True when the adjacency matrix is primitive, so that the eigendata
    /// and the equilibrium measure are unique.
    pub unique: bool,
}

impl TransferSpectrum {
    pub fn pressure(&self) -> f64 {
        self.lambda.ln()
    }
}

pub fn pf_spectrum(corr: &FiniteCorrespondence, phi: &EdgePotential) -> Result<TransferSpectrum> {
    let a = weighted_matrix(corr, phi)?;
    let opts = PowerOptions::default();
    let right = perron::perron_right(a.matrix(), opts)?;
    let left = perron::perron_left(a.matrix(), opts)?;
    let lambda = right.lambda;
    let ua = a.matrix().vec_mul(&left.vector);
    let left_residual = ua
        .iter()
        .zip(&left.vector)
        .map(|(x, y)| (x - lambda * y).abs())
        .fold(0.0, f64::max)
        / linalg::max_abs(&left.vector);
    Ok(TransferSpectrum {
        lambda,
        right: right.vector,
        left: left.vector,
        right_residual: right.residual,
        left_residual,
        right_iterations: right.iterations,
        left_iterations: left.iterations,
        unique: corr.is_primitive(),
    })
}

/// Iterates `λ⁻ᵏ Lᵏ 1` and their distance to the limit `Φ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerConvergence {
    pub iterates: Vec<Vec<f64>>,
    /// `sup |λ⁻ᵏLᵏ1 − Φ|` for `k = 1..=n`.
    pub distances: Vec<f64>,
    /// `Φ = u / ⟨m, u⟩` with `m = q / Σq`, so that `⟨m, Φ⟩ = ⟨m, 1⟩ = 1`.
    pub limit: Vec<f64>,
    /// Geometric-mean ratio of successive distances above roundoff.
    pub decay_ratio: Option<f64>,
    /// Primitive adjacency and final distance below `1e-8 ‖Φ‖∞`. Without
    /// primitivity the iterates need not converge, so this stays false.
    pub converged: bool,
}

pub fn power_convergence(corr: &FiniteCorrespondence, phi: &EdgePotential, n: usize) -> Result<PowerConvergence> {
    let spec = pf_spectrum(corr, phi)?;
    let m_dot_u = linalg::dot(&spec.right, &spec.left);
    let limit: Vec<f64> = spec.left.iter().map(|u| u / m_dot_u).collect();
    let mut v = vec![1.0; corr.dim()];
    let mut iterates = Vec::with_capacity(n);
    let mut distances = Vec::with_capacity(n);
    for _ in 0..n {
        v = transfer_apply(corr, phi, &v)?
            .into_iter()
            .map(|x| x / spec.lambda)
            .collect();
        let dist = v
            .iter()
            .zip(&limit)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        iterates.push(v.clone());
        distances.push(dist);
    }
    let scale = linalg::max_abs(&limit);
    let floor = 1e-10 * scale;
    let ratios: Vec<f64> = distances
        .windows(2)
        .filter(|w| w[0] > floor && w[1] > floor)
        .map(|w| w[1] / w[0])
        .collect();
    let decay_ratio = (!ratios.is_empty())
        .then(|| (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp());
    let converged = spec.unique && distances.last().is_some_and(|&d| d <= 1e-8 * scale);
    Ok(PowerConvergence {
        iterates,
        distances,
        limit,
        decay_ratio,
        converged,
    })
}

fn log_cylinder_core(spec: &TransferSpectrum, phi: &EdgePotential, orbit: &[usize]) -> Result<f64> {
    if orbit.is_empty() {
        return Err(Error::InvalidOrbit("an orbit has at least one state".into()));
    }
    let n = (orbit.len() - 1) as f64;
    Ok(phi.birkhoff_sum(orbit)? - n * spec.lambda.ln())
}

/// `m[x₁…xₙ₊₁] = λ⁻ⁿ e^{Sₙφ} q_{xₙ₊₁}` (with `Σq = 1`).
pub fn eigenmeasure_cylinder(
    spec: &TransferSpectrum,
    corr: &FiniteCorrespondence,
    phi: &EdgePotential,
    orbit: &[usize],
) -> Result<f64> {
    check_potential(corr, phi)?;
    let core = log_cylinder_core(spec, phi, orbit)?;
    let last = orbit[orbit.len() - 1];
    Ok(core.exp() * spec.right[last])
}

/// `μ[x₁…xₙ₊₁] = u_{x₁} λ⁻ⁿ e^{Sₙφ} q_{xₙ₊₁} / Σ_k u_k q_k`.
pub fn equilibrium_cylinder(
    spec: &TransferSpectrum,
    corr: &FiniteCorrespondence,
    phi: &EdgePotential,
    orbit: &[usize],
) -> Result<f64> {
    check_potential(corr, phi)?;
    let core = log_cylinder_core(spec, phi, orbit)?;
    let norm = linalg::dot(&spec.left, &spec.right);
    let (first, last) = (orbit[0], orbit[orbit.len() - 1]);
    Ok(core.exp() * spec.left[first] * spec.right[last] / norm)
}

/// Smallest `c` with `|log m[C] − (Sₙφ − nP)| ≤ c` over the scanned cylinders.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsConstant {
    pub constant: f64,
    /// 1-based label of a cylinder attaining the constant.
    pub witness: String,
    /// Largest deviation among cylinders with `n + 1` states, `n = 0..=n_max`.
    pub per_length: Vec<f64>,
}

/// Scans every cylinder with at most `n_max + 1` states.
pub fn gibbs_constant(corr: &FiniteCorrespondence, phi: &EdgePotential, n_max: usize) -> Result<GibbsConstant> {
    if !corr.is_primitive() {
        return Err(Error::NotPrimitive);
    }
    let spec = pf_spectrum(corr, phi)?;
    let pressure = spec.pressure();
    let mut constant = 0.0;
    let mut witness = String::new();
    let mut per_length = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut worst: f64 = 0.0;
        for orbit in corr.enumerate_orbits(n + 1, CYLINDER_SCAN_CAP)? {
            let mass = eigenmeasure_cylinder(&spec, corr, phi, orbit.states())?;
            let dev = (mass.ln() - (phi.birkhoff_sum(orbit.states())? - n as f64 * pressure)).abs();
            if dev > worst {
                worst = dev;
            }
            if dev > constant || witness.is_empty() {
                constant = dev;
                witness = orbit.label();
            }
        }
        per_length.push(worst);
    }
    Ok(GibbsConstant {
        constant,
        witness,
        per_length,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderRow {
    pub orbit: Orbit,
    pub m_mass: f64,
    pub mu_mass: f64,
    pub gibbs_dev: f64,
}

impl Serialize for Orbit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

/// Eigenmeasure, equilibrium mass and Gibbs deviation of every cylinder
/// with `1..=max_len` states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderTable {
    pub rows: Vec<CylinderRow>,
}

impl CylinderTable {
    pub fn build(corr: &FiniteCorrespondence, phi: &EdgePotential, max_len: usize) -> Result<Self> {
        let spec = pf_spectrum(corr, phi)?;
        let pressure = spec.pressure();
        let mut rows = Vec::new();
        for len in 1..=max_len {
            for orbit in corr.enumerate_orbits(len, CYLINDER_SCAN_CAP)? {
                let s = orbit.states();
                let m_mass = eigenmeasure_cylinder(&spec, corr, phi, s)?;
                let mu_mass = equilibrium_cylinder(&spec, corr, phi, s)?;
                let gibbs_dev =
                    (m_mass.ln() - (phi.birkhoff_sum(s)? - (len - 1) as f64 * pressure)).abs();
                rows.push(CylinderRow {
                    orbit,
                    m_mass,
                    mu_mass,
                    gibbs_dev,
                });
            }
        }
        Ok(Self { rows })
    }

    /// Comma-separated table with header `orbit,m_mass,mu_mass,gibbs_dev`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("orbit,m_mass,mu_mass,gibbs_dev\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:e},{:e},{:e}\n",
                r.orbit.label(),
                r.m_mass,
                r.mu_mass,
                r.gibbs_dev
            ));
        }
        out
    }
}
