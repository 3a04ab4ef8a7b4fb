use mbqt_core::families::{theta_family_mps, ThetaFamilySpec};
use mbqt_core::spt::*;
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

fn thetas() -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![Just(4usize), Just(6), Just(8)]
        .prop_flat_map(|n| prop::collection::vec(0.05f64..FRAC_PI_2 - 0.05, n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn stabilizers_fix_the_state_and_commute(t in thetas()) {
        let spec = ThetaFamilySpec::symmetric(t.clone()).unwrap();
        let state = theta_family_mps(&spec).unwrap().to_dense().unwrap();
        let set = StabilizerSet::for_chain(&t).unwrap();
        let report = verify_stabilizer_invariance(&state, &set, 1e-10).unwrap();
        prop_assert!(report.passed, "{:?}", report.checks);
        let named = set.named();
        for (i, (_, a)) in named.iter().enumerate() {
            prop_assert!(square_defect(a) <= 1e-12);
            for (_, b) in &named[i + 1..] {
                prop_assert!(local_commutator_norm(a, b).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn symmetry_operators_fix_the_state(t in thetas()) {
        let spec = ThetaFamilySpec::symmetric(t.clone()).unwrap();
        let state = theta_family_mps(&spec).unwrap().to_dense().unwrap();
        for g in SymmetryElement::all() {
            prop_assert!(symmetry_residual(&state, g, &t, LastBondAngle::Bond).unwrap() <= 1e-10);
            prop_assert!(construction_agreement(g, &t).unwrap() <= 1e-10);
            let o = symmetry_operator(g, &t, t.len()).unwrap();
            let sq = &o.matmul(&o) - &mbqt_core::CMatrix::identity(o.rows());
            prop_assert!(sq.max_abs() <= 1e-10);
        }
    }

    #[test]
    fn boundary_signs(t in thetas()) {
        for side in [Side::Left, Side::Right] {
            for g in SymmetryElement::all() {
                let expected = expected_signs(g, side);
                let bare = effective_pauli_signs_with(&t, g, side, EffectiveForm::Bare).unwrap();
                prop_assert_eq!(bare, expected);
                // the stabilizer-form X_bar is a factor of O(g) and commutes with it
                let (s_z, s_x) = effective_pauli_signs(&t, g, side).unwrap();
                prop_assert_eq!((s_z, s_x), (expected.0, 1));
            }
        }
    }

    #[test]
    fn cocycle_is_closed_form(theta in 0.05f64..FRAC_PI_2 - 0.05) {
        let table = cocycle_table_at(theta).unwrap();
        prop_assert_eq!(&table, &CocycleTable::closed_form());
        prop_assert_eq!(table.consistency_violations(), 0);
    }

    #[test]
    fn pauli_symmetry_of_blocks_at_any_angle(theta in 0.05f64..FRAC_PI_2 - 0.05) {
        let spec = ThetaFamilySpec::symmetric(vec![theta; 4]).unwrap();
        for g in SymmetryElement::all() {
            // the block relation alone holds at every angle; the chain
            // operator is what stops being on-site
            let r = onsite_symmetry_check(&spec, g).unwrap();
            prop_assert!(r.v.is_some());
            if g.g1 != g.g2 {
                prop_assert_eq!(r.onsite, (theta - FRAC_PI_4).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn non_onsite_away_from_cluster_point() {
    let gens = [SymmetryElement::new(1, 0), SymmetryElement::new(0, 1)];
    for g in gens {
        assert!(non_onsite_violation(g, &[FRAC_PI_4; 6]).unwrap() < 1e-12);
        for d in [-0.2, 0.2] {
            assert!(non_onsite_violation(g, &[FRAC_PI_4 + d; 6]).unwrap() >= 1e-3);
        }
    }
}
