mod common;

use proptest::prelude::*;
use thermoform::correspondence::FiniteCorrespondence;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumeration_matches_count(corr in common::correspondence(4), n in 1usize..=8) {
        let orbits = corr.enumerate_orbits(n, 1 << 20).unwrap();
        prop_assert_eq!(orbits.len() as u128, corr.count_orbits(n - 1).unwrap());
        for w in orbits.windows(2) {
            prop_assert!(w[0].states() < w[1].states());
        }
    }

    #[test]
    fn inverse_is_an_involution(corr in common::correspondence(5)) {
        if let Ok(inv) = corr.inverse() {
            prop_assert_eq!(inv.inverse().unwrap(), corr);
        }
    }

    #[test]
    fn primitive_implies_irreducible(corr in common::correspondence(5)) {
        prop_assert!(!corr.is_primitive() || corr.is_irreducible());
    }

    #[test]
    fn maps_have_one_orbit_per_start(f in (1usize..=6).prop_flat_map(|d| prop::collection::vec(0..d, d)), n in 1usize..=6) {
        let corr = FiniteCorrespondence::from_map(&f).unwrap();
        let orbits = corr.enumerate_orbits(n, 1 << 20).unwrap();
        prop_assert_eq!(orbits.len(), f.len());
        for (x, orbit) in orbits.iter().enumerate() {
            let mut expected = vec![x];
            while expected.len() < n {
                expected.push(f[*expected.last().unwrap()]);
            }
            prop_assert_eq!(orbit.states(), &expected[..]);
        }
    }

    #[test]
    fn birkhoff_sum_is_additive((corr, phi) in common::with_potential(common::irreducible(4), 2.0), a in 1usize..=5, b in 1usize..=5) {
        let orbits = corr.enumerate_orbits(a + b - 1, 1 << 20).unwrap();
        let o = orbits[orbits.len() / 2].states();
        let whole = phi.birkhoff_sum(o).unwrap();
        let split = phi.birkhoff_sum(&o[..a]).unwrap() + phi.birkhoff_sum(&o[a - 1..]).unwrap();
        prop_assert!((whole - split).abs() < 1e-12);
    }
}
