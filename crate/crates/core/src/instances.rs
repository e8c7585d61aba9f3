//! Seeded random correspondences, potentials and kernels for experiments
//! and regression fixtures.

use rand::Rng;

use crate::correspondence::{EdgePotential, FiniteCorrespondence};
use crate::error::Result;
use crate::kernels::{rng_from_seed, TransitionKernel};
use crate::linalg::Matrix;

/// Parameters of a random instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceSpec {
    pub dim: usize,
    /// Probability that a given edge is present.
    pub density: f64,
    /// Potential values are uniform on `[-phi_bound, phi_bound]`.
    pub phi_bound: f64,
}

/// Random correspondence and potential. Each edge is present independently
/// with probability `density`; a row left empty gets one uniformly chosen edge.
pub fn random_instance(spec: InstanceSpec, seed: u64) -> Result<(FiniteCorrespondence, EdgePotential)> {
    let mut rng = rng_from_seed(seed);
    let d = spec.dim;
    let mut adj = vec![vec![false; d]; d];
    for row in adj.iter_mut() {
        for a in row.iter_mut() {
            *a = rng.random::<f64>() < spec.density;
        }
        if !row.iter().any(|&a| a) {
            row[rng.random_range(0..d)] = true;
        }
    }
    let corr = FiniteCorrespondence::validate(adj)?;
    let b = spec.phi_bound;
    let phi = EdgePotential::from_fn(&corr, |_, _| {
        if b > 0.0 {
            rng.random_range(-b..=b)
        } else {
            0.0
        }
    })?;
    Ok((corr, phi))
}

/// Like [`random_instance`], retrying successive seeds until the adjacency
/// matrix is primitive. Returns the seed that was used.
pub fn random_primitive_instance(
    spec: InstanceSpec,
    seed: u64,
) -> Result<(FiniteCorrespondence, EdgePotential, u64)> {
    let mut s = seed;
    loop {
        let (corr, phi) = random_instance(spec, s)?;
        if corr.is_primitive() {
            return Ok((corr, phi, s));
        }
        s = s.wrapping_add(0x9E37_79B9_7F4A_7C15);
    }
}

/// Random kernel supported by `corr`. With `sparse`, each row keeps a random
/// nonempty subset of its allowed edges; otherwise every allowed edge gets
/// positive probability.
pub fn random_kernel(corr: &FiniteCorrespondence, sparse: bool, rng: &mut impl Rng) -> TransitionKernel {
    let d = corr.dim();
    let mut m = Matrix::zeros(d);
    for i in 0..d {
        let images: Vec<usize> = corr.images(i).collect();
        let keep: Vec<usize> = if sparse {
            let mut k: Vec<usize> = images.iter().copied().filter(|_| rng.random::<bool>()).collect();
            if k.is_empty() {
                k.push(images[rng.random_range(0..images.len())]);
            }
            k
        } else {
            images
        };
        // exponential weights give a uniform point on the simplex
        let w: Vec<f64> = keep.iter().map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = w.iter().sum();
        for (j, wj) in keep.iter().zip(&w) {
            m[(i, *j)] = wj / total;
        }
    }
    let mut k = TransitionKernel::from_unnormalized(m).expect("rows have positive mass");
    k.attach_support(corr).expect("built on the support");
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_reproducible() {
        let spec = InstanceSpec {
            dim: 6,
            density: 0.5,
            phi_bound: 2.0,
        };
        let a = random_instance(spec, 7).unwrap();
        let b = random_instance(spec, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.1.sup_norm() <= 2.0);
        let (p, _, _) = random_primitive_instance(spec, 7).unwrap();
        assert!(p.is_primitive());
    }

    #[test]
    fn random_kernels_are_supported() {
        let (corr, _) = random_instance(
            InstanceSpec {
                dim: 5,
                density: 0.4,
                phi_bound: 0.0,
            },
            3,
        )
        .unwrap();
        let mut rng = rng_from_seed(1);
        for sparse in [false, true] {
            let k = random_kernel(&corr, sparse, &mut rng);
            for i in 0..5 {
                for j in 0..5 {
                    assert!(k.get(i, j) == 0.0 || corr.allows(i, j));
                }
            }
        }
    }
}
