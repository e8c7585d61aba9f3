//! Command-line front end for `thermoform`.
//!
//! Every subcommand writes one artifact (a JSON report, a table, a point
//! cloud or a graymap) and one summary line. With `--output` the artifact
//! goes to the file and the summary to stdout; otherwise the artifact goes
//! to stdout and the summary to stderr.
//!
//! Exit codes: 0 on success, 1 for invalid input, 2 when a numerical method
//! fails to converge or an asserted identity does not hold.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use thermoform::complex::{
    angular_ks, equidist_measure_a, equidist_measure_b, julia_cloud, partition_function, rasterize,
    EmpiricalMeasure, Grid, HolomorphicCorrespondence,
};
use thermoform::error::Error;
use thermoform::kernels::{
    backward_kernel, entropy_rate, rokhlin_entropy, sample_path, ProbabilityVector, TransitionKernel,
};
use thermoform::model::{ComplexConfig, Model, ModeName, PotentialDoc, DEFAULT_SEED};
use thermoform::pressure::{
    equilibrium_construct, potential_energy, pressure_combinatorial, pressure_spectral, verify_vp_with,
    OptimizeOptions,
};
use thermoform::ruelle::{gibbs_constant, pf_spectrum, power_convergence, CylinderTable};

const HYPERBOLICITY_NOTE: &str =
    "note: hyperbolicity of c is not verified; convergence of the backward-orbit measures is only expected in the hyperbolic regime";

#[derive(Debug, Parser)]
#[command(name = "thermoform", version, about = "Pressure, equilibrium states and backward-orbit measures of correspondences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Largest number of orbits an exact enumeration may visit.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    budget: u128,
    /// Seed of every random choice [default: 20240601].
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Report,
    Csv,
    Pgm,
    Points,
}

#[derive(Debug, Args)]
struct ModelInput {
    /// Model file.
    #[arg(value_name = "MODEL")]
    path: Option<PathBuf>,
    #[arg(long = "input", value_name = "MODEL")]
    input: Option<PathBuf>,
}

impl ModelInput {
    fn resolve(&self) -> Result<&Path, Error> {
        self.input
            .as_deref()
            .or(self.path.as_deref())
            .ok_or_else(|| Error::InvalidParameter("a model file is required".into()))
    }
}

#[derive(Debug, Args)]
struct ComplexArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    q: Option<u32>,
    /// `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    c: Option<Complex64>,
    /// Base point, `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    x: Option<Complex64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    samples: Option<usize>,
    /// zero, constant or geometric.
    #[arg(long)]
    potential: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MeasureKind {
    /// Atoms at every point of every backward orbit.
    A,
    /// Atoms at the endpoints of the backward orbits.
    B,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// `re_min,re_max,im_min,im_max` of the raster.
    #[arg(long, allow_hyphen_values = true, default_value = "-2,2,-2,2")]
    bounds: String,
    /// `nx,ny` or a single size.
    #[arg(long, default_value = "256")]
    resolution: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a model and describe its correspondence.
    Validate(ModelInput),
    /// Spectral and combinatorial pressure.
    Pressure {
        #[command(flatten)]
        model: ModelInput,
        /// Orbit length of the combinatorial estimate.
        #[arg(long, default_value_t = 12)]
        n: usize,
    },
    /// Equilibrium state, transfer-operator data and cylinder masses.
    Equilibrium {
        #[command(flatten)]
        model: ModelInput,
        /// Longest cylinder in the csv table.
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// Compare every pressure computation.
    VerifyVp {
        #[command(flatten)]
        model: ModelInput,
        #[arg(long = "n-max", default_value_t = 12)]
        n_max: usize,
    },
    /// Entropy rate and free energy of the model's Markov pair.
    Entropy(ModelInput),
    /// Backward kernel and the reversal entropy identity.
    Rokhlin(ModelInput),
    /// Sample a path of the model's Markov pair.
    Sample {
        #[command(flatten)]
        model: ModelInput,
        /// Number of states in the path.
        #[arg(long, default_value_t = 10_000)]
        n: usize,
    },
    /// Weighted backward-orbit tree of z^(q/p) + c.
    Backward {
        #[command(flatten)]
        args: ComplexArgs,
        #[arg(long, value_enum, default_value_t = MeasureKind::B)]
        measure: MeasureKind,
    },
    /// Random backward iteration towards the Julia set.
    Julia {
        #[command(flatten)]
        args: ComplexArgs,
        /// Iterates discarded at the start of each chain.
        #[arg(long, default_value_t = 20)]
        burn: usize,
    },
    /// Bin a point file (`re im [logweight]` per line).
    Rasterize {
        #[arg(value_name = "POINTS")]
        path: Option<PathBuf>,
        #[arg(long = "input", value_name = "POINTS")]
        input: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
    },
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re` or `re,im`, got {s:?}")),
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidParameter(format!("{what}: {t:?}: {e}")))
        })
        .collect()
}

impl GridArgs {
    fn grid(&self) -> Result<Grid, Error> {
        let b = parse_list(&self.bounds, "bounds")?;
        if b.len() != 4 {
            return Err(Error::InvalidParameter("bounds needs four numbers".into()));
        }
        let r = parse_list(&self.resolution, "resolution")?;
        let (nx, ny) = match r.as_slice() {
            [n] => (*n, *n),
            [nx, ny] => (*nx, *ny),
            _ => return Err(Error::InvalidParameter("resolution needs one or two numbers".into())),
        };
        if nx.fract() != 0.0 || ny.fract() != 0.0 || nx < 1.0 || ny < 1.0 {
            return Err(Error::InvalidParameter("resolution must be positive integers".into()));
        }
        Grid::new((b[0], b[1]), (b[2], b[3]), nx as usize, ny as usize)
    }

    fn config(&self) -> Value {
        json!({ "bounds": self.bounds, "resolution": self.resolution })
    }
}

/// What a subcommand produced.
struct Outcome {
    artifact: String,
    summary: String,
    warnings: Vec<String>,
    /// Exit with code 2 even though the computation finished.
    failed_check: bool,
}

impl Outcome {
    fn ok(artifact: String, summary: String) -> Self {
        Self {
            artifact,
            summary,
            warnings: Vec::new(),
            failed_check: false,
        }
    }
}

fn report(command: &str, config: Value, result: Value, warnings: &[String]) -> String {
    let mut doc = json!({ "command": command, "config": config, "result": result });
    if !warnings.is_empty() {
        doc["warnings"] = json!(warnings);
    }
    let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
    s.push('\n');
    s
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn unsupported(cmd: &str, f: Format) -> Error {
    Error::InvalidParameter(format!("{cmd} does not support --format {}", to_value(&f).as_str().unwrap_or("?")))
}

struct Globals {
    format: Option<Format>,
    budget: u128,
    seed: Option<u64>,
    tol: f64,
}

impl Globals {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    fn config(&self, input: &Path) -> Value {
        json!({
            "input": input.display().to_string(),
            "budget": self.budget.to_string(),
            "seed": self.seed(),
            "tol": self.tol,
        })
    }
}

/// The Markov pair of a model: its own kernel if present, otherwise the
/// equilibrium state.
fn markov_pair(model: &Model) -> Result<(ProbabilityVector, TransitionKernel, &'static str), Error> {
    match &model.kernel {
        Some(k) => {
            let p = match &model.distribution {
                Some(p) => p.clone(),
                None => k.stationary()?,
            };
            Ok((p, k.clone(), "model"))
        }
        None => {
            let eq = equilibrium_construct(&model.corr, &model.phi)?;
            Ok((eq.p, eq.kernel, "equilibrium"))
        }
    }
}

fn cmd_validate(g: &Globals, path: &Path) -> Result<Outcome, Error> {
    let m = Model::load(path)?;
    let c = &m.corr;
    let result = json!({
        "states": c.dim(),
        "edges": c.edge_count(),
        "irreducible": c.is_irreducible(),
        "primitive": c.is_primitive(),
        "sup_phi": m.phi.sup_norm(),
        "has_kernel": m.kernel.is_some(),
        "has_distribution": m.distribution.is_some(),
    });
    let summary = format!(
        "valid: {} states, {} edges, irreducible={}, primitive={}",
        c.dim(),
        c.edge_count(),
        c.is_irreducible(),
        c.is_primitive()
    );
    match g.format.unwrap_or(Format::Report) {
        Format::Report => Ok(Outcome::ok(report("validate", g.config(path), result, &[]), summary)),
        f => Err(unsupported("validate", f)),
    }
}

fn cmd_pressure(g: &Globals, path: &Path, n: usize) -> Result<Outcome, Error> {
    let m = Model::load(path)?;
    let spectral = pressure_spectral(&m.corr, &m.phi)?;
    let estimates = (1..=n)
        .map(|k| pressure_combinatorial(&m.corr, &m.phi, k, g.budget))
        .collect::<Result<Vec<_>, _>>()?;
    let last = estimates.last().map(|e| e.matrix_power);
    let summary = match last {
        Some(c) => format!("pressure: spectral={spectral:.12} combinatorial(n={n})={c:.12}"),
        None => format!("pressure: spectral={spectral:.12}"),
    };
    match g.format.unwrap_or(Format::Report) {
        Format::Report => {
            let mut config = g.config(path);
            config["n"] = json!(n);
            let result = json!({ "spectral": spectral, "combinatorial": to_value(&estimates) });
            Ok(Outcome::ok(report("pressure", config, result, &[]), summary))
        }
        Format::Csv => {
            let mut out = String::from("n,matrix_power,enumeration\n");
            for e in &estimates {
                let en = e.enumeration.map(|v| format!("{v:e}")).unwrap_or_default();
                out.push_str(&format!("{},{:e},{}\n", e.n, e.matrix_power, en));
            }
            Ok(Outcome::ok(out, summary))
        }
        f => Err(unsupported("pressure", f)),
    }
}

fn cmd_equilibrium(g: &Globals, path: &Path, n: usize) -> Result<Outcome, Error> {
    let m = Model::load(path)?;
    let eq = equilibrium_construct(&m.corr, &m.phi)?;
    let mut warnings = Vec::new();
    if !m.corr.is_primitive() {
        warnings.push(
            "warning: the adjacency matrix is not primitive; the equilibrium state need not be unique".to_string(),
        );
    }
    let summary = format!(
        "equilibrium: pressure={:.12} value={:.12} gap={:.3e}",
        eq.pressure, eq.value, eq.gap
    );
    let format = g.format.unwrap_or(Format::Report);
    let mut out = match format {
        Format::Report => {
            let spec = pf_spectrum(&m.corr, &m.phi)?;
            let decay = power_convergence(&m.corr, &m.phi, 60)?;
            let gibbs = if m.corr.is_primitive() {
                Some(gibbs_constant(&m.corr, &m.phi, n.min(12))?)
            } else {
                None
            };
            let mut config = g.config(path);
            config["n"] = json!(n);
            let mut state = to_value(&eq);
            state["support"] = json!(one_based(&eq.support));
            let result = json!({
                "equilibrium": state,
                "transfer": {
                    "lambda": spec.lambda,
                    "eigenmeasure": spec.right,
                    "eigenfunction": spec.left,
                    "decay_ratio": decay.decay_ratio,
                    "converged": decay.converged,
                },
                "gibbs": gibbs.map(|c| to_value(&c)),
            });
            Outcome::ok(report("equilibrium", config, result, &warnings), summary)
        }
        Format::Csv => Outcome::ok(CylinderTable::build(&m.corr, &m.phi, n)?.to_csv(), summary),
        f => return Err(unsupported("equilibrium", f)),
    };
    out.warnings = warnings;
    Ok(out)
}

fn cmd_verify_vp(g: &Globals, path: &Path, n_max: usize) -> Result<Outcome, Error> {
    let m = Model::load(path)?;
    let r = verify_vp_with(&m.corr, &m.phi, n_max, g.budget, OptimizeOptions::default())?;
    let passed = r.checks.iter().filter(|c| c.passed).count();
    let comb = r.combinatorial.last().map(|c| c.matrix_power).unwrap_or(f64::NAN);
    let summary = format!(
        "verify-vp: spectral={:.9} combinatorial(n={})={:.9} constructed={:.9} optimizer={:.9}; {}/{} checks passed",
        r.spectral,
        n_max,
        comb,
        r.constructed.value,
        r.optimizer.value,
        passed,
        r.checks.len()
    );
    let mut config = g.config(path);
    config["n_max"] = json!(n_max);
    let mut result = to_value(&r);
    result["constructed"]["support"] = json!(one_based(&r.constructed.support));
    match g.format.unwrap_or(Format::Report) {
        Format::Report => Ok(Outcome {
            failed_check: !r.all_passed(),
            ..Outcome::ok(report("verify-vp", config, result, &[]), summary)
        }),
        f => Err(unsupported("verify-vp", f)),
    }
}

fn cmd_entropy(g: &Globals, path: &Path) -> Result<Outcome, Error> {
    let m = Model::load(path)?;
    let (p, k, source) = markov_pair(&m)?;
    let h = entropy_rate(&p, &k)?;
    let energy = potential_energy(&p, &k, &m.phi);
    let pressure = pressure_spectral(&m.corr, &m.phi)?;
    let summary = format!(
        "entropy: rate={h:.12} energy={energy:.12} free={:.12} pressure={pressure:.12}",
        h + energy
    );
    match g.format.unwrap_or(Format::Report) {
        Format::Report => {
            let result = json!({
                "kernel_source": source,
                "entropy_rate": h,
                "potential_energy": energy,
                "free_energy": h + energy,
                "pressure": pressure,
                "pressure_gap": pressure - h - energy,
                "stationary_residual": k.stationarity_residual(&p)?,
            });
            Ok(Outcome::ok(report("entropy", g.config(path), result, &[]), summary))
        }
        f => Err(unsupported("entropy", f)),
    }
}

fn cmd_rokhlin(g: &Globals, path: &Path) -> Result<Outcome, Error> {
    let m = Model::load(path)?;
    let (p, k, source) = markov_pair(&m)?;
    let h = entropy_rate(&p, &k)?;
    let back = backward_kernel(&p, &k)?;
    let r = rokhlin_entropy(&p, &back.kernel)?;
    let diff = (r - h).abs();
    let ok = diff <= g.tol;
    let summary = format!(
        "rokhlin: entropy_rate={h:.12} rokhlin={r:.12} difference={diff:.2e} ({})",
        if ok { "agree" } else { "DISAGREE" }
    );
    match g.format.unwrap_or(Format::Report) {
        Format::Report => {
            let result = json!({
                "kernel_source": source,
                "entropy_rate": h,
                "rokhlin_entropy": r,
                "difference": diff,
                "passed": ok,
                "backward_kernel": back.kernel.matrix().to_rows(),
                "zero_states": one_based(&back.zero_states),
            });
            Ok(Outcome {
                failed_check: !ok,
                ..Outcome::ok(report("rokhlin", g.config(path), result, &[]), summary)
            })
        }
        f => Err(unsupported("rokhlin", f)),
    }
}

fn cmd_sample(g: &Globals, path: &Path, n: usize) -> Result<Outcome, Error> {
    let m = Model::load(path)?;
    let (p, k, source) = markov_pair(&m)?;
    let sp = sample_path(&p, &k, n, g.seed())?;
    let mut freq = vec![0.0; sp.dim];
    for s in &sp.states {
        freq[*s] += 1.0 / n as f64;
    }
    let summary = format!("sample: {n} states, seed={}, generator={}", sp.seed, sp.generator);
    match g.format.unwrap_or(Format::Points) {
        Format::Points => Ok(Outcome::ok(sp.to_text(), summary)),
        Format::Report => {
            let mut config = g.config(path);
            config["n"] = json!(n);
            let result = json!({
                "kernel_source": source,
                "generator": sp.generator,
                "length": n,
                "frequencies": freq,
                "stationary": p.entries(),
            });
            Ok(Outcome::ok(report("sample", config, result, &[]), summary))
        }
        f => Err(unsupported("sample", f)),
    }
}

/// Config file merged with the flags, flags taking precedence.
fn resolve_complex(g: &Globals, a: &ComplexArgs) -> Result<ComplexConfig, Error> {
    let mut cfg = match &a.input {
        Some(path) => ComplexConfig::load(path)?,
        None => {
            let (p, q) = match (a.p, a.q) {
                (Some(p), Some(q)) => (p, q),
                _ => return Err(Error::InvalidParameter("--p and --q are required without --input".into())),
            };
            ComplexConfig::new(p, q, a.c.unwrap_or_default())
        }
    };
    if let Some(p) = a.p {
        cfg.p = p;
    }
    if let Some(q) = a.q {
        cfg.q = q;
    }
    if let Some(c) = a.c {
        cfg.c = [c.re, c.im];
    }
    if let Some(x) = a.x {
        cfg.x = [x.re, x.im];
    }
    if let Some(n) = a.n {
        cfg.n = n;
    }
    if let Some(mode) = a.mode {
        cfg.mode = match mode {
            ModeArg::Exact => ModeName::Exact,
            ModeArg::Sampled => ModeName::Sampled,
        };
    }
    if let Some(s) = a.samples {
        cfg.samples = s;
    }
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(kind) = &a.potential {
        cfg.potential.kind = kind.clone();
    }
    if let Some(t) = a.t {
        cfg.potential.t = t;
    }
    cfg.potential = PotentialDoc::from(cfg.potential_spec()?);
    cfg.correspondence()?;
    Ok(cfg)
}

fn complex_config_value(g: &Globals, cfg: &ComplexConfig, grid: &GridArgs) -> Value {
    let mut v = to_value(cfg);
    v["budget"] = json!(g.budget.to_string());
    v["grid"] = grid.config();
    v
}

fn measure_artifact(
    cmd: &str,
    format: Format,
    measure: &EmpiricalMeasure,
    grid: &GridArgs,
    config: Value,
    result: Value,
    summary: String,
) -> Result<Outcome, Error> {
    let warnings = vec![HYPERBOLICITY_NOTE.to_string()];
    let artifact = match format {
        Format::Points => measure.to_points_text(),
        Format::Pgm => rasterize(measure, grid.grid()?).to_pgm(),
        Format::Csv => rasterize(measure, grid.grid()?).to_csv(),
        Format::Report => {
            let mut result = result;
            let raster = rasterize(measure, grid.grid()?);
            result["out_of_bounds"] = json!(raster.out_of_bounds);
            report(cmd, config, result, &warnings)
        }
    };
    Ok(Outcome {
        warnings,
        ..Outcome::ok(artifact, summary)
    })
}

fn cmd_backward(g: &Globals, a: &ComplexArgs, kind: MeasureKind) -> Result<Outcome, Error> {
    let cfg = resolve_complex(g, a)?;
    let corr = cfg.correspondence()?;
    let phi = cfg.potential_spec()?;
    let mode = cfg.tree_mode(g.budget);
    let log_z = partition_function(&corr, &phi, cfg.x(), cfg.n, mode)?;
    let measure = match kind {
        MeasureKind::A => equidist_measure_a(&corr, &phi, cfg.x(), cfg.n, mode)?,
        MeasureKind::B => equidist_measure_b(&corr, &phi, cfg.x(), cfg.n, mode)?,
    };
    let summary = format!(
        "backward: {} atoms, log Z_{} = {:.12} ({} mode)",
        measure.len(),
        cfg.n,
        log_z,
        mode.name()
    );
    let mut config = complex_config_value(g, &cfg, &a.grid);
    config["measure"] = to_value(&kind);
    let result = json!({
        "atoms": measure.len(),
        "log_partition": log_z,
        "total_mass": measure.total_mass(),
        "angular_ks": angular_ks(&measure),
    });
    let format = g.format.unwrap_or(Format::Points);
    measure_artifact("backward", format, &measure, &a.grid, config, result, summary)
}

fn cmd_julia(g: &Globals, a: &ComplexArgs, burn: usize) -> Result<Outcome, Error> {
    let cfg = resolve_complex(g, a)?;
    let corr: HolomorphicCorrespondence = cfg.correspondence()?;
    let n = a.n.unwrap_or(200);
    let samples = a.samples.unwrap_or(100);
    let pts = julia_cloud(&corr, cfg.x(), n, burn, samples, cfg.seed)?;
    let w = -(pts.len() as f64).ln();
    let measure = EmpiricalMeasure::new(pts.clone(), vec![w; pts.len()])?;
    let max_modulus = pts.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let summary = format!("julia: {} points, max modulus {max_modulus:.6}", pts.len());
    let mut config = complex_config_value(g, &cfg, &a.grid);
    config["n"] = json!(n);
    config["samples"] = json!(samples);
    config["burn"] = json!(burn);
    config["start"] = json!(cfg.x);
    let result = json!({ "points": pts.len(), "max_modulus": max_modulus });
    let format = g.format.unwrap_or(Format::Points);
    measure_artifact("julia", format, &measure, &a.grid, config, result, summary)
}

/// Reads `re im [logweight]` lines; blank lines and `#` comments are skipped.
fn read_points(path: &Path) -> Result<EmpiricalMeasure, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        reason: format!("{}: {e}", path.display()),
    })?;
    let (mut points, mut logweights) = (Vec::new(), Vec::new());
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
        let bad = |reason: String| Error::Parse { line: k + 1, reason };
        let fields = fields.map_err(|e| bad(e.to_string()))?;
        match fields.as_slice() {
            [re, im] => {
                points.push(Complex64::new(*re, *im));
                logweights.push(0.0);
            }
            [re, im, l] => {
                points.push(Complex64::new(*re, *im));
                logweights.push(*l);
            }
            _ => return Err(bad(format!("expected 2 or 3 columns, found {}", fields.len()))),
        }
    }
    let mut m = EmpiricalMeasure::new(points, logweights)?;
    m.normalize();
    Ok(m)
}

fn cmd_rasterize(g: &Globals, path: &Path, grid: &GridArgs) -> Result<Outcome, Error> {
    let m = read_points(path)?;
    let raster = rasterize(&m, grid.grid()?);
    let summary = format!(
        "rasterize: {} atoms into {}x{} bins, out-of-bounds mass {:.3e}",
        m.len(),
        raster.grid.nx,
        raster.grid.ny,
        raster.out_of_bounds
    );
    match g.format.unwrap_or(Format::Pgm) {
        Format::Pgm => Ok(Outcome::ok(raster.to_pgm(), summary)),
        Format::Csv => Ok(Outcome::ok(raster.to_csv(), summary)),
        Format::Report => {
            let mut config = g.config(path);
            config["grid"] = grid.config();
            let result = json!({
                "atoms": m.len(),
                "out_of_bounds": raster.out_of_bounds,
                "max_bin": raster.bins.iter().copied().fold(0.0, f64::max),
            });
            Ok(Outcome::ok(report("rasterize", config, result, &[]), summary))
        }
        f => Err(unsupported("rasterize", f)),
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, Error> {
    let g = Globals {
        format: cli.format,
        budget: cli.budget,
        seed: cli.seed,
        tol: cli.tol,
    };
    if !(g.tol > 0.0 && g.tol.is_finite()) {
        return Err(Error::InvalidParameter("--tol must be positive".into()));
    }
    match &cli.command {
        Command::Validate(m) => cmd_validate(&g, m.resolve()?),
        Command::Pressure { model, n } => cmd_pressure(&g, model.resolve()?, *n),
        Command::Equilibrium { model, n } => cmd_equilibrium(&g, model.resolve()?, *n),
        Command::VerifyVp { model, n_max } => cmd_verify_vp(&g, model.resolve()?, *n_max),
        Command::Entropy(m) => cmd_entropy(&g, m.resolve()?),
        Command::Rokhlin(m) => cmd_rokhlin(&g, m.resolve()?),
        Command::Sample { model, n } => cmd_sample(&g, model.resolve()?, *n),
        Command::Backward { args, measure } => cmd_backward(&g, args, *measure),
        Command::Julia { args, burn } => cmd_julia(&g, args, *burn),
        Command::Rasterize { path, input, grid } => {
            let p = input
                .as_deref()
                .or(path.as_deref())
                .ok_or_else(|| Error::InvalidParameter("a point file is required".into()))?;
            cmd_rasterize(&g, p, grid)
        }
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(out) => {
            for w in &out.warnings {
                let _ = writeln!(stderr, "{w}");
            }
            match &cli.output {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &out.artifact) {
                        let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                        return 1;
                    }
                    let _ = writeln!(stdout, "{}", out.summary);
                }
                None => {
                    let _ = stdout.write_all(out.artifact.as_bytes());
                    let _ = writeln!(stderr, "{}", out.summary);
                }
            }
            if out.failed_check {
                let _ = writeln!(stderr, "error: an asserted identity failed");
                2
            } else {
                0
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}
