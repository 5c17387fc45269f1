#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdcnn::{CsrMatrix, DenseMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random non-negative sparse matrix with roughly `density` fill.
pub fn random_sparse(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> CsrMatrix {
    let mut t = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if rng.random::<f64>() < density {
                t.push((i, j, rng.random_range(0.05..1.0)));
            }
        }
    }
    CsrMatrix::from_triplets(&t, rows, cols).unwrap()
}

/// Random row-stochastic matrix; rows may be empty (sink nodes).
pub fn random_stochastic(rng: &mut ChaCha8Rng, n: usize, density: f64) -> CsrMatrix {
    sdcnn::transition_matrix(&random_sparse(rng, n, n, density)).unwrap()
}

pub fn random_dense(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let v = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    DenseMatrix::from_vec(rows, cols, v).unwrap()
}

/// Naive triple loop.
pub fn dense_matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(a.n_rows(), b.n_cols());
    for i in 0..a.n_rows() {
        for j in 0..b.n_cols() {
            let mut s = 0.0;
            for k in 0..a.n_cols() {
                s += a.get(i, k) * b.get(k, j);
            }
            out.set(i, j, s);
        }
    }
    out
}

/// `{I, P, ..., P^H}` by repeated dense multiplication.
pub fn dense_power_series(p: &DenseMatrix, hops: usize) -> Vec<DenseMatrix> {
    let mut out = vec![DenseMatrix::identity(p.n_rows())];
    for _ in 0..hops {
        let next = dense_matmul(out.last().unwrap(), p);
        out.push(next);
    }
    out
}

pub fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    assert_eq!((a.n_rows(), a.n_cols()), (b.n_rows(), b.n_cols()));
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
