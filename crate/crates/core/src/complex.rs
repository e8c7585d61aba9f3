//! The holomorphic correspondences `f_c(z) = z^{q/p} + c`, i.e. the relation
//! `(w − c)^p = z^q`, with `p < q`.
//!
//! A point `z` has the `p` forward images `w` and a point `w` has the `q`
//! backward images `z`. Backward orbits `(y₀, …, yₙ = x)` with
//! `yᵢ₊₁ ∈ f_c(yᵢ)` carry the weight `exp Σ φ(yᵢ, yᵢ₊₁)`; their normalized
//! sums give the partition function `Zₙ(x)` and the two equidistribution
//! measures. All weights are kept in log domain.
//!
//! Roots follow the principal convention: the `k`-th root of `r e^{iθ}`,
//! `θ ∈ (−π, π]`, is `r^{1/k} e^{iθ/k}`, siblings differ by powers of
//! `e^{2πi/k}`, and they are listed by increasing argument of the extracted
//! root in `(−π, π]`. A zero target has one root of full multiplicity.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{compensated_sum, log_sum_exp};

/// Relative tolerance on the defining relation of every computed root.
pub const ROOT_TOL: f64 = 1e-10;
/// The geometric potential is rejected this close to its singularities.
pub const SINGULAR_EPS: f64 = 1e-8;
/// Largest admissible `|t|` for the geometric potential.
pub const MAX_GEOMETRIC_T: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolomorphicCorrespondence {
    p: u32,
    q: u32,
    c: Complex64,
}

/// A root together with how many times it solves the relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: u32,
}

/// `k` roots of `a` ordered by argument, each offset by `shift`. A zero
/// target yields the single root `shift` with multiplicity `k`.
fn roots(a: Complex64, k: u32, shift: Complex64) -> Vec<Root> {
    if a == Complex64::new(0.0, 0.0) {
        return vec![Root {
            value: shift,
            multiplicity: k,
        }];
    }
    let r = a.norm().powf(1.0 / k as f64);
    let mut theta = a.arg();
    if theta <= -PI {
        theta = PI;
    }
    let mut angles: Vec<f64> = (0..k)
        .map(|m| {
            let t = (theta + 2.0 * PI * m as f64) / k as f64;
            if t > PI {
                t - 2.0 * PI
            } else {
                t
            }
        })
        .collect();
    angles.sort_by(f64::total_cmp);
    angles
        .into_iter()
        .map(|t| Root {
            value: shift + Complex64::from_polar(r, t),
            multiplicity: 1,
        })
        .collect()
}

/// All `k` roots with repetition, in the order of [`roots`].
fn raw_roots(a: Complex64, k: u32, shift: Complex64) -> Vec<Complex64> {
    roots(a, k, shift)
        .into_iter()
        .flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity as usize))
        .collect()
}

impl HolomorphicCorrespondence {
    pub fn new(p: u32, q: u32, c: Complex64) -> Result<Self> {
        if p == 0 || p >= q {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= p < q, got p={p}, q={q}"
            )));
        }
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::InvalidParameter("c must be finite".into()));
        }
        Ok(Self { p, q, c })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }

    /// The `w` with `(w − c)^p = z^q`.
    pub fn forward_images(&self, z: Complex64) -> Vec<Root> {
        roots(z.powu(self.q), self.p, self.c)
    }

    /// The `z` with `z^q = (w − c)^p`.
    pub fn backward_images(&self, w: Complex64) -> Vec<Root> {
        roots((w - self.c).powu(self.p), self.q, Complex64::new(0.0, 0.0))
    }

    fn raw_backward(&self, w: Complex64) -> Vec<Complex64> {
        raw_roots((w - self.c).powu(self.p), self.q, Complex64::new(0.0, 0.0))
    }

    /// `|(w − c)^p − z^q| / max(1, |z|^q)`.
    pub fn defect(&self, z: Complex64, w: Complex64) -> f64 {
        let zq = z.powu(self.q);
        ((w - self.c).powu(self.p) - zq).norm() / zq.norm().max(1.0)
    }
}

/// Potential on pairs `(z, w)` with `w ∈ f_c(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialSpec {
    Zero,
    Constant(f64),
    /// `φ_t(z, w) = −t log |q z^{q−1} / (p (w − c)^{p−1})|`.
    Geometric(f64),
}

impl PotentialSpec {
    /// Geometric potential with `t` clamped to `[−4, 4]`.
    pub fn geometric(t: f64) -> Self {
        Self::Geometric(t.clamp(-MAX_GEOMETRIC_T, MAX_GEOMETRIC_T))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Constant(_) => "constant",
            Self::Geometric(_) => "geometric",
        }
    }

    pub fn t(&self) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Constant(t) | Self::Geometric(t) => t,
        }
    }

    pub fn eval(&self, corr: &HolomorphicCorrespondence, z: Complex64, w: Complex64) -> Result<f64> {
        match *self {
            Self::Zero => Ok(0.0),
            Self::Constant(t) => Ok(t),
            Self::Geometric(t) => {
                let (p, q) = (corr.p as f64, corr.q as f64);
                let zn = z.norm();
                let wn = (w - corr.c).norm();
                if zn < SINGULAR_EPS {
                    return Err(Error::SingularPotential(format!("z = {z} is too close to 0")));
                }
                if corr.p > 1 && wn < SINGULAR_EPS {
                    return Err(Error::SingularPotential(format!("w = {w} is too close to c")));
                }
                let mut log_deriv = q.ln() + (q - 1.0) * zn.ln() - p.ln();
                if corr.p > 1 {
                    log_deriv -= (p - 1.0) * wn.ln();
                }
                Ok(-t * log_deriv)
            }
        }
    }
}

/// A backward orbit `(y₀, …, yₙ = x)`. `multiplicity` counts how many
/// orbits collapse onto it at critical points.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardPath {
    pub points: Vec<Complex64>,
    pub multiplicity: u64,
}

impl BackwardPath {
    pub fn leaf(&self) -> Complex64 {
        self.points[0]
    }

    /// `Σ φ(yᵢ, yᵢ₊₁)`.
    pub fn birkhoff_sum(&self, corr: &HolomorphicCorrespondence, phi: &PotentialSpec) -> Result<f64> {
        self.points
            .windows(2)
            .map(|w| phi.eval(corr, w[0], w[1]))
            .sum()
    }

    /// Birkhoff sum plus the log of the multiplicity.
    pub fn log_weight(&self, corr: &HolomorphicCorrespondence, phi: &PotentialSpec) -> Result<f64> {
        Ok(self.birkhoff_sum(corr, phi)? + (self.multiplicity as f64).ln())
    }
}

fn check_budget(q: u32, n: usize, budget: u128) -> Result<()> {
    let count = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > budget {
        return Err(Error::BudgetExceeded { count, budget });
    }
    Ok(())
}

/// All backward orbits of length `n` ending at `x`, in depth-first order
/// by branch index. Fails if `qⁿ > budget`.
pub fn enumerate_backward(
    corr: &HolomorphicCorrespondence,
    x: Complex64,
    n: usize,
    budget: u128,
) -> Result<Vec<BackwardPath>> {
    check_budget(corr.q, n, budget)?;
    // build reversed paths x = yₙ, yₙ₋₁, … then flip
    let mut level = vec![(vec![x], 1u64)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(level.len() * corr.q as usize);
        for (path, mult) in level {
            let tip = *path.last().expect("paths are nonempty");
            for root in corr.backward_images(tip) {
                let mut p = path.clone();
                p.push(root.value);
                next.push((p, mult * root.multiplicity as u64));
            }
        }
        level = next;
    }
    Ok(level
        .into_iter()
        .map(|(mut points, multiplicity)| {
            points.reverse();
            BackwardPath {
                points,
                multiplicity,
            }
        })
        .collect())
}

/// A sampled backward orbit with its importance weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPath {
    pub points: Vec<Complex64>,
    /// `n log q + Sₙφ − log samples`.
    pub logweight: f64,
}

/// Random stream of sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `samples` backward orbits of length `n` from `x`, each branch chosen
/// uniformly among the `q` preimages (with repetition at critical points).
///
/// Sample `i` draws its branch indices `r₁, r₂, …` from stream `i` of a
/// ChaCha20 generator seeded with `seed`, and `rₖ` selects the branch `k`
/// steps above the leaf, so `rₙ` is applied first, at `x`. Results do not
/// depend on how samples are distributed over workers, and runs at depths
/// `n` and `n + 1` with one seed share the branches nearest the leaf.
pub fn sample_backward(
    corr: &HolomorphicCorrespondence,
    phi: &PotentialSpec,
    x: Complex64,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<WeightedPath>> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let base = n as f64 * (corr.q as f64).ln() - (samples as f64).ln();
    let mut out = Vec::with_capacity(samples);
    let mut draws = vec![0usize; n];
    for i in 0..samples {
        let mut rng = sample_rng(seed, i as u64);
        for d in draws.iter_mut() {
            *d = rng.random_range(0..corr.q as usize);
        }
        let mut points = vec![x; n + 1];
        for k in (0..n).rev() {
            // points[k] is the preimage of points[k + 1] chosen by draws[k]
            points[k] = corr.raw_backward(points[k + 1])[draws[k]];
        }
        let s: f64 = points
            .windows(2)
            .map(|w| phi.eval(corr, w[0], w[1]))
            .sum::<Result<f64>>()?;
        out.push(WeightedPath {
            points,
            logweight: base + s,
        });
    }
    Ok(out)
}

/// How the backward tree is traversed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TreeMode {
    Exact { budget: u128 },
    Sampled { samples: usize, seed: u64 },
}

impl TreeMode {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Exact { .. } => "exact",
            Self::Sampled { .. } => "sampled",
        }
    }
}

/// Points with the log-weights of a backward tree traversal.
fn weighted_paths(
    corr: &HolomorphicCorrespondence,
    phi: &PotentialSpec,
    x: Complex64,
    n: usize,
    mode: TreeMode,
) -> Result<Vec<WeightedPath>> {
    match mode {
        TreeMode::Exact { budget } => enumerate_backward(corr, x, n, budget)?
            .into_iter()
            .map(|p| {
                let logweight = p.log_weight(corr, phi)?;
                Ok(WeightedPath {
                    points: p.points,
                    logweight,
                })
            })
            .collect(),
        TreeMode::Sampled { samples, seed } => sample_backward(corr, phi, x, n, samples, seed),
    }
}

/// `log Zₙ(x)`, exact or as the log of an unbiased estimate of `Zₙ(x)`.
pub fn partition_function(
    corr: &HolomorphicCorrespondence,
    phi: &PotentialSpec,
    x: Complex64,
    n: usize,
    mode: TreeMode,
) -> Result<f64> {
    let paths = weighted_paths(corr, phi, x, n, mode)?;
    Ok(log_sum_exp(paths.iter().map(|p| p.logweight)))
}

/// Weighted atoms in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    pub points: Vec<Complex64>,
    pub logweights: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(points: Vec<Complex64>, logweights: Vec<f64>) -> Result<Self> {
        if points.len() != logweights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: logweights.len(),
            });
        }
        Ok(Self { points, logweights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn log_total(&self) -> f64 {
        log_sum_exp(self.logweights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.weights())
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.logweights.iter().map(|l| l.exp())
    }

    /// Shifts the log-weights so that the total mass is 1.
    pub fn normalize(&mut self) {
        let z = self.log_total();
        if z.is_finite() {
            self.logweights.iter_mut().for_each(|l| *l -= z);
        }
    }

    /// One line `re im logweight` per atom.
    pub fn to_points_text(&self) -> String {
        let mut out = String::new();
        for (z, l) in self.points.iter().zip(&self.logweights) {
            out.push_str(&format!("{:e} {:e} {:e}\n", z.re, z.im, l));
        }
        out
    }
}

/// Normalized measure with atoms at every `yⱼ`, each carrying its path
/// weight divided by `n + 1`.
pub fn equidist_measure_a(
    corr: &HolomorphicCorrespondence,
    phi: &PotentialSpec,
    x: Complex64,
    n: usize,
    mode: TreeMode,
) -> Result<EmpiricalMeasure> {
    let paths = weighted_paths(corr, phi, x, n, mode)?;
    let share = ((n + 1) as f64).ln();
    let mut points = Vec::with_capacity(paths.len() * (n + 1));
    let mut logweights = Vec::with_capacity(points.capacity());
    for p in paths {
        for y in p.points {
            points.push(y);
            logweights.push(p.logweight - share);
        }
    }
    let mut m = EmpiricalMeasure { points, logweights };
    m.normalize();
    Ok(m)
}

/// Normalized measure with atoms at the leaves `y₀`.
pub fn equidist_measure_b(
    corr: &HolomorphicCorrespondence,
    phi: &PotentialSpec,
    x: Complex64,
    n: usize,
    mode: TreeMode,
) -> Result<EmpiricalMeasure> {
    let paths = weighted_paths(corr, phi, x, n, mode)?;
    let (points, logweights) = paths.into_iter().map(|p| (p.points[0], p.logweight)).unzip();
    let mut m = EmpiricalMeasure { points, logweights };
    m.normalize();
    Ok(m)
}

/// Random backward iteration: `samples` chains of `n` steps from `start`,
/// keeping the iterates after the first `burn`. Chain `i` uses stream `i`.
pub fn julia_cloud(
    corr: &HolomorphicCorrespondence,
    start: Complex64,
    n: usize,
    burn: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<Complex64>> {
    if burn >= n {
        return Err(Error::InvalidParameter(format!("burn ({burn}) must be below n ({n})")));
    }
    let mut out = Vec::with_capacity(samples * (n - burn));
    for i in 0..samples {
        let mut rng = sample_rng(seed, i as u64);
        let mut z = start;
        for step in 1..=n {
            let pre = corr.raw_backward(z);
            z = pre[rng.random_range(0..pre.len())];
            if step > burn {
                out.push(z);
            }
        }
    }
    Ok(out)
}

/// Axis-aligned rectangle split into `nx × ny` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(re: (f64, f64), im: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        let ok = re.0 < re.1 && im.0 < im.1 && nx > 0 && ny > 0 && [re.0, re.1, im.0, im.1].iter().all(|v| v.is_finite());
        if !ok {
            return Err(Error::InvalidParameter("grid needs finite increasing bounds and positive resolution".into()));
        }
        Ok(Self {
            re_min: re.0,
            re_max: re.1,
            im_min: im.0,
            im_max: im.1,
            nx,
            ny,
        })
    }

    /// `(row, col)` of `z`, row 0 being the top (largest imaginary part).
    /// Points on the upper or right edge fall in the last cell.
    pub fn cell(&self, z: Complex64) -> Option<(usize, usize)> {
        if !(z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max) {
            return None;
        }
        let fx = (z.re - self.re_min) / (self.re_max - self.re_min);
        let fy = (self.im_max - z.im) / (self.im_max - self.im_min);
        let col = ((fx * self.nx as f64) as usize).min(self.nx - 1);
        let row = ((fy * self.ny as f64) as usize).min(self.ny - 1);
        Some((row, col))
    }

    pub fn center(&self, row: usize, col: usize) -> Complex64 {
        let dx = (self.re_max - self.re_min) / self.nx as f64;
        let dy = (self.im_max - self.im_min) / self.ny as f64;
        Complex64::new(
            self.re_min + (col as f64 + 0.5) * dx,
            self.im_max - (row as f64 + 0.5) * dy,
        )
    }
}

/// Binned mass, row-major with row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub grid: Grid,
    pub bins: Vec<f64>,
    /// Mass of atoms outside the rectangle.
    pub out_of_bounds: f64,
}

/// Bins the normalized weights of `measure`.
pub fn rasterize(measure: &EmpiricalMeasure, grid: Grid) -> DensityGrid {
    let z = measure.log_total();
    let mut bins = vec![0.0; grid.nx * grid.ny];
    let mut out_of_bounds = 0.0;
    for (p, l) in measure.points.iter().zip(&measure.logweights) {
        let w = (l - z).exp();
        match grid.cell(*p) {
            Some((r, c)) => bins[r * grid.nx + c] += w,
            None => out_of_bounds += w,
        }
    }
    DensityGrid {
        grid,
        bins,
        out_of_bounds,
    }
}

/// Half the L1 distance between the bin vectors.
pub fn compare_measures(a: &DensityGrid, b: &DensityGrid) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    Ok(0.5 * a.bins.iter().zip(&b.bins).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

impl DensityGrid {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.bins[row * self.grid.nx + col]
    }

    /// Plain graymap, maximum value 65535, the heaviest bin mapped to white.
    pub fn to_pgm(&self) -> String {
        let max = self.bins.iter().copied().fold(0.0, f64::max);
        let mut out = format!("P2\n{} {}\n65535\n", self.grid.nx, self.grid.ny);
        for row in self.bins.chunks(self.grid.nx) {
            let line: Vec<String> = row
                .iter()
                .map(|&m| {
                    let v = if max > 0.0 { (m / max * 65535.0).round() } else { 0.0 };
                    (v as u32).to_string()
                })
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// One comma-separated line of masses per grid row, top row first.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.bins.chunks(self.grid.nx) {
            let line: Vec<String> = row.iter().map(|m| format!("{m:e}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Kolmogorov–Smirnov distance between the weighted arguments of the atoms,
/// taken in `[0, 2π)`, and the uniform distribution on the circle.
pub fn angular_ks(measure: &EmpiricalMeasure) -> f64 {
    let z = measure.log_total();
    let mut atoms: Vec<(f64, f64)> = measure
        .points
        .iter()
        .zip(&measure.logweights)
        .map(|(p, l)| (p.arg().rem_euclid(2.0 * PI) / (2.0 * PI), (l - z).exp()))
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cdf = 0.0;
    let mut ks: f64 = 0.0;
    for (u, w) in atoms {
        ks = ks.max((u - cdf).abs());
        cdf += w;
        ks = ks.max((cdf - u).abs());
    }
    ks
}
