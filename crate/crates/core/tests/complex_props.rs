use num_complex::Complex64;
use proptest::prelude::*;
use thermoform::complex::{
    equidist_measure_a, equidist_measure_b, partition_function, HolomorphicCorrespondence, PotentialSpec, TreeMode,
    ROOT_TOL,
};
use thermoform::linalg::log_sum_exp;

fn family() -> impl Strategy<Value = HolomorphicCorrespondence> {
    (1u32..=3, 1u32..=3, -1.0f64..1.0, -1.0f64..1.0)
        .prop_map(|(p, extra, re, im)| HolomorphicCorrespondence::new(p, p + extra, Complex64::new(re, im)).unwrap())
}

fn point() -> impl Strategy<Value = Complex64> {
    (0.05f64..3.0, -3.2f64..3.2).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn roots_satisfy_the_relation(f in family(), z in point()) {
        let fw = f.forward_images(z);
        prop_assert_eq!(fw.len(), f.p() as usize);
        for w in &fw {
            prop_assert!(f.defect(z, w.value) <= ROOT_TOL);
        }
        let bw = f.backward_images(z);
        prop_assert_eq!(bw.len(), f.q() as usize);
        for y in &bw {
            prop_assert!(f.defect(y.value, z) <= ROOT_TOL);
        }
    }

    #[test]
    fn forward_and_backward_are_dual(f in family(), z in point()) {
        for w in f.forward_images(z) {
            prop_assert!(f.backward_images(w.value).iter().any(|y| (y.value - z).norm() <= 1e-9));
        }
        for y in f.backward_images(z) {
            prop_assert!(f.forward_images(y.value).iter().any(|w| (w.value - z).norm() <= 1e-9));
        }
    }

    #[test]
    fn partition_recursion(f in family(), x in point(), t in -1.0f64..1.0, n in 0usize..=4) {
        let phi = PotentialSpec::geometric(t);
        let mode = TreeMode::Exact { budget: 1 << 20 };
        let lhs = partition_function(&f, &phi, x, n + 1, mode);
        let terms: Result<Vec<f64>, _> = f
            .backward_images(x)
            .into_iter()
            .map(|y| Ok::<f64, thermoform::error::Error>(
                phi.eval(&f, y.value, x)? + (y.multiplicity as f64).ln() + partition_function(&f, &phi, y.value, n, mode)?,
            ))
            .collect();
        // geometric potentials refuse points next to their singularities
        if let (Ok(lhs), Ok(terms)) = (lhs, terms) {
            prop_assert!((lhs - log_sum_exp(terms)).abs() < 1e-9);
        }
    }

    #[test]
    fn measures_are_normalized(f in family(), x in point(), n in 0usize..=4, seed in any::<u64>()) {
        let phi = PotentialSpec::Constant(0.3);
        for mode in [TreeMode::Exact { budget: 1 << 20 }, TreeMode::Sampled { samples: 64, seed }] {
            let a = equidist_measure_a(&f, &phi, x, n, mode).unwrap();
            let b = equidist_measure_b(&f, &phi, x, n, mode).unwrap();
            prop_assert!((a.total_mass() - 1.0).abs() < 1e-12);
            prop_assert!((b.total_mass() - 1.0).abs() < 1e-12);
        }
    }
}
