//! JSON documents for finite models and for holomorphic-correspondence runs.
//!
//! A model lists the states and the allowed edges with their potential
//! values, 1-based:
//!
//! ```json
//! {
//!   "states": 2,
//!   "edges": [
//!     { "from": 1, "to": 1, "phi": 0.0 },
//!     { "from": 1, "to": 2, "phi": 0.0 },
//!     { "from": 2, "to": 1 }
//!   ]
//! }
//! ```
//!
//! An edge that is not listed is disallowed and a missing `phi` is 0. The
//! optional `kernel` (a row-major `states × states` array) and
//! `distribution` fields carry a Markov pair. Unknown fields are rejected.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::{HolomorphicCorrespondence, PotentialSpec, TreeMode};
use crate::correspondence::{EdgePotential, FiniteCorrespondence};
use crate::error::{Error, Result};
use crate::kernels::{ProbabilityVector, TransitionKernel};
use crate::linalg::Matrix;

/// Default seed of every seeded computation.
pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    from: usize,
    to: usize,
    #[serde(default)]
    phi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    states: usize,
    edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kernel: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distribution: Option<Vec<f64>>,
}

/// A validated model.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub corr: FiniteCorrespondence,
    pub phi: EdgePotential,
    pub kernel: Option<TransitionKernel>,
    pub distribution: Option<ProbabilityVector>,
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        reason: e.to_string(),
    }
}

/// Line of the `k`-th `"from"` key, a good enough locator for edge entries.
fn edge_line(text: &str, k: usize) -> usize {
    text.match_indices("\"from\"")
        .nth(k)
        .map(|(pos, _)| text[..pos].lines().count().max(1))
        .unwrap_or(0)
}

impl Model {
    pub fn new(corr: FiniteCorrespondence, phi: EdgePotential) -> Self {
        Self {
            corr,
            phi,
            kernel: None,
            distribution: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(text).map_err(json_error)?;
        let d = doc.states;
        if d == 0 {
            return Err(Error::EmptyStateSpace);
        }
        let mut adj = vec![vec![false; d]; d];
        let mut values = Vec::with_capacity(doc.edges.len());
        for (k, e) in doc.edges.iter().enumerate() {
            for idx in [e.from, e.to] {
                if idx == 0 || idx > d {
                    return Err(Error::Parse {
                        line: edge_line(text, k),
                        reason: format!("state {idx} is outside 1..={d}"),
                    });
                }
            }
            let (i, j) = (e.from - 1, e.to - 1);
            if adj[i][j] {
                return Err(Error::Parse {
                    line: edge_line(text, k),
                    reason: format!("duplicate edge {} -> {}", e.from, e.to),
                });
            }
            adj[i][j] = true;
            values.push((i, j, e.phi));
        }
        let corr = FiniteCorrespondence::validate(adj)?;
        let phi = EdgePotential::from_entries(&corr, values)?;
        let kernel = match doc.kernel {
            Some(flat) => {
                if flat.len() != d * d {
                    return Err(Error::DimensionMismatch {
                        expected: d * d,
                        found: flat.len(),
                    });
                }
                Some(TransitionKernel::with_support(Matrix::from_row_major(d, flat)?, &corr)?)
            }
            None => None,
        };
        let distribution = match doc.distribution {
            Some(v) => {
                if v.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: v.len(),
                    });
                }
                Some(ProbabilityVector::new(v)?)
            }
            None => None,
        };
        Ok(Self {
            corr,
            phi,
            kernel,
            distribution,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Parse {
            line: 0,
            reason: format!("{}: {e}", path.as_ref().display()),
        })?;
        Self::parse(&text)
    }

    /// Canonical form: pretty-printed, edges in lexicographic order, every
    /// `phi` written out, trailing newline.
    pub fn to_json(&self) -> String {
        let edges = self
            .corr
            .edges()
            .map(|(i, j)| EdgeDoc {
                from: i + 1,
                to: j + 1,
                phi: self.phi.get(i, j).unwrap_or(0.0),
            })
            .collect();
        let doc = ModelDoc {
            states: self.corr.dim(),
            edges,
            kernel: self.kernel.as_ref().map(|k| k.matrix().as_row_major().to_vec()),
            distribution: self.distribution.as_ref().map(|p| p.entries().to_vec()),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("plain data serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialDoc {
    pub kind: String,
    #[serde(default)]
    pub t: f64,
}

/// Run configuration for a holomorphic correspondence. Missing optional
/// fields resolve to `potential = zero`, `x = [2, 0]`, `n = 10`,
/// `mode = exact`, `samples = 10000`, `seed = 20240601`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexConfig {
    pub p: u32,
    pub q: u32,
    pub c: [f64; 2],
    #[serde(default = "default_potential")]
    pub potential: PotentialDoc,
    #[serde(default = "default_x")]
    pub x: [f64; 2],
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_mode")]
    pub mode: ModeName,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_potential() -> PotentialDoc {
    PotentialDoc {
        kind: "zero".into(),
        t: 0.0,
    }
}

fn default_x() -> [f64; 2] {
    [2.0, 0.0]
}

fn default_n() -> usize {
    10
}

fn default_mode() -> ModeName {
    ModeName::Exact
}

fn default_samples() -> usize {
    10_000
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl ComplexConfig {
    pub fn new(p: u32, q: u32, c: Complex64) -> Self {
        Self {
            p,
            q,
            c: [c.re, c.im],
            potential: default_potential(),
            x: default_x(),
            n: default_n(),
            mode: default_mode(),
            samples: default_samples(),
            seed: default_seed(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg: Self = serde_json::from_str(text).map_err(json_error)?;
        cfg.potential = cfg.potential_spec()?.into();
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Parse {
            line: 0,
            reason: format!("{}: {e}", path.as_ref().display()),
        })?;
        Self::parse(&text)
    }

    pub fn correspondence(&self) -> Result<HolomorphicCorrespondence> {
        HolomorphicCorrespondence::new(self.p, self.q, Complex64::new(self.c[0], self.c[1]))
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec> {
        let t = self.potential.t;
        if !t.is_finite() {
            return Err(Error::InvalidParameter("potential t must be finite".into()));
        }
        match self.potential.kind.as_str() {
            "zero" => Ok(PotentialSpec::Zero),
            "constant" => Ok(PotentialSpec::Constant(t)),
            "geometric" => Ok(PotentialSpec::geometric(t)),
            other => Err(Error::InvalidParameter(format!(
                "unknown potential kind {other:?} (expected zero, constant or geometric)"
            ))),
        }
    }

    pub fn x(&self) -> Complex64 {
        Complex64::new(self.x[0], self.x[1])
    }

    pub fn tree_mode(&self, budget: u128) -> TreeMode {
        match self.mode {
            ModeName::Exact => TreeMode::Exact { budget },
            ModeName::Sampled => TreeMode::Sampled {
                samples: self.samples,
                seed: self.seed,
            },
        }
    }
}

impl From<PotentialSpec> for PotentialDoc {
    fn from(p: PotentialSpec) -> Self {
        Self {
            kind: p.kind().into(),
            t: p.t(),
        }
    }
}
