use mbqt_core::numerics::{c64, eig_general_small, eig_hermitian, kron, re, state_fidelity, CMatrix, CVector};
use proptest::prelude::*;

fn int_matrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-3i32..=3, -3i32..=3), rows * cols).prop_map(move |v| {
        let data = v.into_iter().map(|(a, b)| c64(a as f64, b as f64)).collect();
        CMatrix::from_vec(rows, cols, data).unwrap()
    })
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<num_complex::Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_map(|v| v.into_iter().map(|(a, b)| c64(a, b)).collect())
}

fn random_matrix(dim: usize) -> impl Strategy<Value = CMatrix> {
    complex_vec(dim * dim).prop_map(move |v| CMatrix::from_vec(dim, dim, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kron_is_associative(a in int_matrix(2, 3), b in int_matrix(3, 2), c in int_matrix(2, 2)) {
        let left = kron(&kron(&a, &b).unwrap(), &c).unwrap();
        let right = kron(&a, &kron(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn hermitian_eigenvalues_sum_to_trace(dim in 1usize..=24, seed in complex_vec(24 * 24)) {
        let m = CMatrix::from_vec(dim, dim, seed[..dim * dim].to_vec()).unwrap();
        let h = &m + &m.adjoint();
        let e = eig_hermitian(&h).unwrap();
        let sum: f64 = e.values.iter().sum();
        prop_assert!((sum - h.trace().re).abs() < 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn general_eigenvalue_product_is_determinant(m in (1usize..=4).prop_flat_map(random_matrix)) {
        let eigs = eig_general_small(&m).unwrap();
        let prod = eigs.iter().fold(re(1.0), |acc, &z| acc * z);
        prop_assert!((prod - m.determinant()).norm() < 1e-9);
    }

    #[test]
    fn fidelity_is_symmetric(u in complex_vec(8), v in complex_vec(8)) {
        let (u, v) = (CVector::from_vec(u), CVector::from_vec(v));
        prop_assume!(u.norm() > 1e-3 && v.norm() > 1e-3);
        let f1 = state_fidelity(&u, &v).unwrap();
        let f2 = state_fidelity(&v, &u).unwrap();
        prop_assert!((f1 - f2).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f1));
    }
}

#[test]
fn hermitian_eigensolver_at_full_size() {
    let dim = 128;
    let data: Vec<_> = (0..dim * dim).map(|k| c64(((k * 37) % 101) as f64 / 101.0 - 0.5, ((k * 53) % 97) as f64 / 97.0 - 0.5)).collect();
    let m = CMatrix::from_vec(dim, dim, data).unwrap();
    let h = &m + &m.adjoint();
    let e = eig_hermitian(&h).unwrap();
    let sum: f64 = e.values.iter().sum();
    assert!((sum - h.trace().re).abs() < 1e-10);
}
