mod common;

use proptest::prelude::*;
use thermoform::kernels::{
    backward_kernel, cylinder_measure, entropy_rate, rokhlin_entropy, ProbabilityVector, TransitionKernel,
};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn kernel_and_dist(max_dim: usize) -> impl Strategy<Value = (TransitionKernel, ProbabilityVector)> {
    common::correspondence(max_dim)
        .prop_flat_map(common::kernel_on)
        .prop_flat_map(|(c, k)| (Just(k), common::distribution(c.dim())))
}

fn ergodic(max_dim: usize) -> impl Strategy<Value = TransitionKernel> {
    common::irreducible(max_dim).prop_flat_map(common::kernel_on).prop_map(|(_, k)| k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjoint_identity((q, mu) in kernel_and_dist(6), f in prop::collection::vec(-5.0f64..5.0, 6)) {
        let d = q.dim();
        let f = &f[..d];
        let lhs = dot(q.pushforward(&mu).unwrap().entries(), f);
        let rhs = dot(mu.entries(), &q.pullback(f).unwrap());
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn composition_is_associative(
        (c, q1) in common::correspondence(5).prop_flat_map(common::kernel_on),
        w in prop::collection::vec(0.01f64..1.0, 50),
    ) {
        let d = c.dim();
        let rows: Vec<Vec<f64>> = (0..d).map(|i| w[i * d..(i + 1) * d].to_vec()).collect();
        let q2 = TransitionKernel::from_rows(&rows.iter().map(|r| {
            let s: f64 = r.iter().sum();
            r.iter().map(|x| x / s).collect()
        }).collect::<Vec<_>>()).unwrap();
        let mu = ProbabilityVector::normalized(w[..d].to_vec()).unwrap();
        let a = q1.compose(&q2).unwrap().pushforward(&mu).unwrap();
        let b = q2.pushforward(&q1.pushforward(&mu).unwrap()).unwrap();
        for i in 0..d {
            prop_assert!((a[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn cylinders_are_consistent((q, mu) in kernel_and_dist(4), n in 1usize..=5) {
        let support = q.support().unwrap().clone();
        for orbit in support.enumerate_orbits(n, 1 << 16).unwrap() {
            let parent = cylinder_measure(&mu, &q, orbit.states());
            let children: f64 = (0..q.dim())
                .map(|j| {
                    let mut s = orbit.states().to_vec();
                    s.push(j);
                    cylinder_measure(&mu, &q, &s)
                })
                .sum();
            prop_assert!((parent - children).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_markov_measure_is_shift_invariant(q in ergodic(4), n in 1usize..=4) {
        let p = q.stationary().unwrap();
        let support = q.support().unwrap().clone();
        for orbit in support.enumerate_orbits(n, 1 << 16).unwrap() {
            let mass = cylinder_measure(&p, &q, orbit.states());
            let shifted: f64 = (0..q.dim())
                .map(|x0| {
                    let mut s = vec![x0];
                    s.extend_from_slice(orbit.states());
                    cylinder_measure(&p, &q, &s)
                })
                .sum();
            prop_assert!((mass - shifted).abs() < 1e-12);
        }
    }

    #[test]
    fn rokhlin_identity(q in ergodic(8)) {
        let p = q.stationary().unwrap();
        let h = entropy_rate(&p, &q).unwrap();
        let back = backward_kernel(&p, &q).unwrap();
        prop_assert!(back.zero_states.is_empty());
        let r = rokhlin_entropy(&p, &back.kernel).unwrap();
        prop_assert!((r - h).abs() < 1e-12, "{} vs {}", r, h);
    }

    #[test]
    fn entropy_bounds(q in ergodic(8)) {
        let p = q.stationary().unwrap();
        let h = entropy_rate(&p, &q).unwrap();
        let support = q.support().unwrap();
        let m = (0..q.dim()).map(|i| support.out_degree(i)).max().unwrap();
        prop_assert!(h >= -1e-15);
        prop_assert!(h <= (m as f64).ln() + 1e-12);
    }
}
