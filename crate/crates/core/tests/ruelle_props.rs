mod common;

use proptest::prelude::*;
use thermoform::pressure::{equilibrium_construct, pressure_spectral, weighted_matrix};
use thermoform::ruelle::{eigenmeasure_cylinder, equilibrium_cylinder, pf_spectrum, transfer_apply};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn iterated_transfer_sums_orbit_weights((corr, phi) in common::with_potential(common::correspondence(5), 1.0), n in 1usize..=8) {
        let mut v = vec![1.0; corr.dim()];
        for _ in 0..n {
            v = transfer_apply(&corr, &phi, &v).unwrap();
        }
        let a = weighted_matrix(&corr, &phi).unwrap();
        let mut w = vec![1.0; corr.dim()];
        for _ in 0..n {
            w = a.matrix().mul_vec(&w);
        }
        let lhs: f64 = v.iter().sum();
        let rhs: f64 = w.iter().sum();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1.0));
    }

    #[test]
    fn lambda_is_exp_pressure((corr, phi) in common::with_potential(common::correspondence(6), 2.0)) {
        let s = pf_spectrum(&corr, &phi).unwrap();
        let p = pressure_spectral(&corr, &phi).unwrap();
        prop_assert!((p.exp() - s.lambda).abs() <= 1e-10 * s.lambda);
    }

    #[test]
    fn cylinder_masses((corr, phi) in common::with_potential(common::primitive(4), 2.0), len in 1usize..=6) {
        let s = pf_spectrum(&corr, &phi).unwrap();
        let orbits = corr.enumerate_orbits(len, 1 << 16).unwrap();
        let total: f64 = orbits
            .iter()
            .map(|o| eigenmeasure_cylinder(&s, &corr, &phi, o.states()).unwrap())
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        for o in &orbits {
            let mass = equilibrium_cylinder(&s, &corr, &phi, o.states()).unwrap();
            let shifted: f64 = corr
                .preimages(o.first())
                .map(|x0| {
                    let mut st = vec![x0];
                    st.extend_from_slice(o.states());
                    equilibrium_cylinder(&s, &corr, &phi, &st).unwrap()
                })
                .sum();
            prop_assert!((mass - shifted).abs() < 1e-10);
        }
    }

    #[test]
    fn marginal_matches_construction((corr, phi) in common::with_potential(common::primitive(5), 2.0)) {
        let s = pf_spectrum(&corr, &phi).unwrap();
        let eq = equilibrium_construct(&corr, &phi).unwrap();
        for i in 0..corr.dim() {
            let m = equilibrium_cylinder(&s, &corr, &phi, &[i]).unwrap();
            prop_assert!((m - eq.p[i]).abs() < 1e-10);
        }
    }
}
