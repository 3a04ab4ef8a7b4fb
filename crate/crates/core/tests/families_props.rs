use mbqt_core::entanglement::dense_rdm_spectrum;
use mbqt_core::families::{
    build_dense_reference, direct_sum_mps, local_entangler, EntanglerKind, FamilySpec, SumFamilySpec, ThetaFamilySpec,
};
use mbqt_core::numerics::{c64, re, state_fidelity};
use mbqt_core::{DenseState, C64};
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

fn boundary() -> impl Strategy<Value = [C64; 2]> {
    ((0.1f64..1.0, -1.0f64..1.0), (0.1f64..1.0, -1.0f64..1.0)).prop_map(|((a, b), (c, d))| [c64(a, b), c64(c, d)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn theta_family_matches_circuit(
        thetas in (2usize..=10).prop_flat_map(|n| prop::collection::vec(0.0f64..FRAC_PI_2, n)),
        l in boundary(),
        r in boundary(),
    ) {
        let spec = FamilySpec::Theta(ThetaFamilySpec::new(thetas, l, r).unwrap());
        let a = spec.build_mps().unwrap().to_dense().unwrap();
        let b = build_dense_reference(&spec).unwrap();
        prop_assert!(state_fidelity(a.amplitudes(), b.amplitudes()).unwrap() >= 1.0 - 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn diagonal_entanglers_commute(
        thetas in prop::collection::vec(0.1f64..1.4, 5),
        order in Just((0usize..4).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let plus = [re(1.0), re(1.0)];
        let start = DenseState::product(&[plus; 5]).unwrap();
        let apply = |ord: &[usize]| {
            ord.iter().fold(start.clone(), |s, &j| {
                s.apply(&local_entangler(EntanglerKind::CTheta(thetas[j]), j).unwrap()).unwrap()
            })
        };
        // equal up to the rounding of reordered products
        let diff = apply(&order).amplitudes().max_abs_diff(apply(&[0, 1, 2, 3]).amplitudes());
        prop_assert!(diff <= 1e-15, "diff {}", diff);
    }

    #[test]
    fn junk_sector_output_qubit_is_free(
        n in 3usize..=8,
        gammas in prop::collection::vec(0.0f64..3.0, 8),
        deltas in prop::collection::vec(0.0f64..3.0, 8),
        junk in boundary(),
        jr in boundary(),
    ) {
        let (mut g, mut d) = (gammas[..n].to_vec(), deltas[..n].to_vec());
        g[n - 2] = FRAC_PI_4;
        d[n - 2] = FRAC_PI_4;
        let zero = re(0.0);
        let spec = SumFamilySpec::new(g, d, vec![zero, zero, junk[0], junk[1]], vec![zero, zero, jr[0], jr[1]]).unwrap();
        let dense = direct_sum_mps(&spec).unwrap().to_dense().unwrap();
        prop_assume!(dense.norm() > 1e-6);
        let es = dense_rdm_spectrum(&dense, n - 1).unwrap();
        let entropy: f64 = es.iter().filter(|&&p| p > 1e-300).map(|&p| -p * p.ln()).sum();
        prop_assert!(entropy.abs() <= 1e-10, "entropy {}", entropy);
    }
}
