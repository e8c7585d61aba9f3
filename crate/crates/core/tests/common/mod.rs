#![allow(dead_code)]

use proptest::prelude::*;
use thermoform::correspondence::{EdgePotential, FiniteCorrespondence};
use thermoform::kernels::{ProbabilityVector, TransitionKernel};
use thermoform::linalg::Matrix;

fn fix_rows(mut adj: Vec<Vec<bool>>, cycle: bool) -> FiniteCorrespondence {
    let d = adj.len();
    for i in 0..d {
        if cycle {
            adj[i][(i + 1) % d] = true;
        }
        if !adj[i].iter().any(|&a| a) {
            adj[i][i] = true;
        }
    }
    FiniteCorrespondence::validate(adj).unwrap()
}

/// Any correspondence on `1..=max_dim` states.
pub fn correspondence(max_dim: usize) -> impl Strategy<Value = FiniteCorrespondence> {
    (1..=max_dim)
        .prop_flat_map(|d| prop::collection::vec(prop::collection::vec(any::<bool>(), d), d))
        .prop_map(|adj| fix_rows(adj, false))
}

/// Irreducible correspondences: random edges plus the cycle `i -> i + 1`.
pub fn irreducible(max_dim: usize) -> impl Strategy<Value = FiniteCorrespondence> {
    (1..=max_dim)
        .prop_flat_map(|d| prop::collection::vec(prop::collection::vec(any::<bool>(), d), d))
        .prop_map(|adj| fix_rows(adj, true))
}

/// Primitive correspondences: irreducible with a self-loop at state 0.
pub fn primitive(max_dim: usize) -> impl Strategy<Value = FiniteCorrespondence> {
    (1..=max_dim)
        .prop_flat_map(|d| prop::collection::vec(prop::collection::vec(any::<bool>(), d), d))
        .prop_map(|mut adj| {
            adj[0][0] = true;
            fix_rows(adj, true)
        })
}

pub fn with_potential(
    corr: impl Strategy<Value = FiniteCorrespondence>,
    bound: f64,
) -> impl Strategy<Value = (FiniteCorrespondence, EdgePotential)> {
    corr.prop_flat_map(move |c| {
        let d = c.dim();
        (Just(c), prop::collection::vec(-bound..bound, d * d))
    })
    .prop_map(|(c, v)| {
        let d = c.dim();
        let phi = EdgePotential::from_fn(&c, |i, j| v[i * d + j]).unwrap();
        (c, phi)
    })
}

/// A kernel on `corr` with every allowed edge given positive mass.
pub fn kernel_on(corr: FiniteCorrespondence) -> impl Strategy<Value = (FiniteCorrespondence, TransitionKernel)> {
    let d = corr.dim();
    (Just(corr), prop::collection::vec(0.01f64..1.0, d * d)).prop_map(|(c, w)| {
        let d = c.dim();
        let mut m = Matrix::zeros(d);
        for i in 0..d {
            let total: f64 = c.images(i).map(|j| w[i * d + j]).sum();
            for j in c.images(i) {
                m[(i, j)] = w[i * d + j] / total;
            }
        }
        let k = TransitionKernel::with_support(m, &c).unwrap();
        (c, k)
    })
}

pub fn distribution(d: usize) -> impl Strategy<Value = ProbabilityVector> {
    prop::collection::vec(0.01f64..1.0, d).prop_map(|v| ProbabilityVector::normalized(v).unwrap())
}
