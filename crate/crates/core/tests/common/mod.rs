#![allow(dead_code)]

use greduce::oracle::DenseMatrix;
use greduce::DirectedGraph;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Erdős–Rényi-style digraph with roughly `mean_out` links per node and a
/// sprinkling of dangling nodes.
pub fn random_graph(n: usize, mean_out: f64, seed: u64) -> DirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = (mean_out / n as f64).min(1.0);
    let mut edges = Vec::new();
    for s in 0..n {
        if rng.gen::<f64>() < 0.1 {
            continue;
        }
        for t in 0..n {
            if rng.gen::<f64>() < p {
                edges.push((s, t));
            }
        }
    }
    DirectedGraph::from_edges(n, edges, None).unwrap()
}

/// `count` distinct nodes in random order.
pub fn random_subset(n: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut nodes: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = rng.gen_range(i..n);
        nodes.swap(i, j);
    }
    nodes.truncate(count);
    nodes
}

pub fn to_nalgebra(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j))
}

/// Right null vector of a (numerically) singular square matrix via SVD.
pub fn null_vector(m: &DMatrix<f64>) -> Vec<f64> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.unwrap();
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    v_t.row(k).iter().copied().collect()
}

/// Leading real eigenvalue with right and left eigenvectors of a positive
/// matrix, from a Schur decomposition plus SVD null spaces. Vectors are
/// normalized like the production code: `Σ ψ_R = 1`, `ψ_Lᵀ ψ_R = 1`.
pub fn dense_eigentriple(a: &DMatrix<f64>) -> (f64, Vec<f64>, Vec<f64>) {
    let lambda = a
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() < 1e-12)
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let n = a.nrows();
    let shifted = a - DMatrix::identity(n, n) * lambda;
    let mut right = null_vector(&shifted);
    let s: f64 = right.iter().sum();
    right.iter_mut().for_each(|x| *x /= s);
    let mut left = null_vector(&shifted.transpose());
    let overlap: f64 = left.iter().zip(&right).map(|(a, b)| a * b).sum();
    left.iter_mut().for_each(|x| *x /= overlap);
    (lambda, right, left)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
