mod common;

use common::*;
use proptest::prelude::*;
use sdcnn::{CsrMatrix, DenseMatrix};

#[test]
fn stochastic_square_matches_dense_oracle() {
    let mut r = rng(8);
    for _ in 0..20 {
        let p = random_stochastic(&mut r, 8, 0.4);
        let sparse = p.matmul(&p).unwrap();
        sparse.validate().unwrap();
        let oracle = dense_matmul(&p.to_dense(), &p.to_dense());
        assert!(max_abs_diff(&sparse.to_dense(), &oracle) <= 1e-12);
    }
}

#[test]
fn sparse_dense_product_matches_oracle() {
    let mut r = rng(21);
    for _ in 0..20 {
        let a = random_sparse(&mut r, 9, 7, 0.3);
        let x = random_dense(&mut r, 7, 4);
        let got = a.matmul_dense(&x).unwrap();
        assert!(max_abs_diff(&got, &dense_matmul(&a.to_dense(), &x)) <= 1e-12);
        let y = random_dense(&mut r, 4, 9);
        let back = y.matmul_sparse(&a).unwrap();
        let oracle = dense_matmul(&y, &a.to_dense());
        assert!(max_abs_diff(&back, &oracle) <= 1e-12);
    }
}

fn arb_sparse(max_n: usize) -> impl Strategy<Value = CsrMatrix> {
    (1..=max_n, 1..=max_n, any::<u64>(), 0.0..0.6f64).prop_map(|(rows, cols, seed, density)| {
        random_sparse(&mut rng(seed), rows, cols, density)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_equals_triple_loop(a in arb_sparse(32), seed in any::<u64>(), density in 0.0..0.6f64, cols in 1usize..32) {
        let b = random_sparse(&mut rng(seed), a.n_cols(), cols, density);
        let c = a.matmul(&b).unwrap();
        c.validate().unwrap();
        let oracle = dense_matmul(&a.to_dense(), &b.to_dense());
        prop_assert!(max_abs_diff(&c.to_dense(), &oracle) <= 1e-12);
    }

    #[test]
    fn threshold_properties(a in arb_sparse(20), t in 0.0..1.0f64, dt in 0.0..0.5f64) {
        prop_assert_eq!(&a.threshold(0.0).unwrap(), &a);
        let once = a.threshold(t).unwrap();
        once.validate().unwrap();
        prop_assert_eq!(&once.threshold(t).unwrap(), &once);
        prop_assert!(once.values().iter().all(|v| *v >= t));
        prop_assert!(a.threshold(t + dt).unwrap().nnz() <= once.nnz());
    }

    #[test]
    fn canonical_outputs(a in arb_sparse(16)) {
        a.validate().unwrap();
        a.transpose().validate().unwrap();
        CsrMatrix::from_dense(&a.to_dense()).validate().unwrap();
        prop_assert_eq!(CsrMatrix::from_dense(&a.to_dense()), a.clone());
        let id = CsrMatrix::identity(a.n_cols());
        prop_assert_eq!(a.matmul(&id).unwrap(), a.clone());
        let x = DenseMatrix::identity(a.n_cols());
        prop_assert_eq!(a.matmul_dense(&x).unwrap(), a.to_dense());
    }
}
