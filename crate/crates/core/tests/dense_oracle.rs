mod common;

use common::{max_abs_diff, random_graph};
use greduce::oracle::{
    dense_google, dense_reduced, raw_series_terms, solve, DenseMatrix, DEFAULT_CAP,
};
use greduce::{reduce, DirectedGraph, Error, GoogleOperator, ReduceConfig, SubsetSelection};

const ALPHA: f64 = 0.85;

// Members 0 and 1 feed a 298-node ring; only two ring nodes link back.
fn nearly_closed() -> DirectedGraph {
    let n = 300;
    let mut edges = vec![(0, 2), (0, 1), (1, 150), (1, 0)];
    for s in 2..n {
        edges.push((s, if s + 1 == n { 2 } else { s + 1 }));
        edges.push((s, 2 + (s * 37) % (n - 2)));
    }
    edges.push((77, 0));
    edges.push((211, 1));
    DirectedGraph::from_edges(n, edges, None).unwrap()
}

#[test]
fn deflated_series_beats_raw_series_near_closure() {
    let g = nearly_closed();
    let op = GoogleOperator::new(&g, ALPHA).unwrap();
    let subset = SubsetSelection::from_indices(&g, &[0, 1]).unwrap();
    let decomp = reduce(&op, &subset, ReduceConfig::default()).unwrap();
    assert!(decomp.lambda_c >= 0.99, "lambda_c = {}", decomp.lambda_c);
    assert!(!decomp.series_truncated);

    let dense = dense_google(&g, ALPHA, DEFAULT_CAP).unwrap();
    let raw = raw_series_terms(&dense, &[0, 1], 1e-12, 200_000)
        .unwrap()
        .expect("raw series converges");
    assert!(
        raw > 5 * decomp.series_terms_used,
        "raw {raw} vs deflated {}",
        decomp.series_terms_used
    );

    let exact = dense_reduced(&dense, &[0, 1]).unwrap();
    let got: Vec<f64> = decomp.gr.as_slice().to_vec();
    let want: Vec<f64> = exact.to_rows().concat();
    assert!(max_abs_diff(&got, &want) <= 1e-10);
}

#[test]
fn gaussian_elimination_matches_nalgebra() {
    for seed in 0..6u64 {
        let g = random_graph(60, 3.0, seed);
        let dense = dense_google(&g, ALPHA, DEFAULT_CAP).unwrap();
        let head: Vec<usize> = (0..50).collect();
        let a = DenseMatrix::identity(50).sub(&dense.select(&head, &head));
        let b = dense.select(&head, &[50, 51, 52]);
        let x = solve(&a, &b).unwrap();
        let na = common::to_nalgebra(&a);
        let nb = common::to_nalgebra(&b);
        let nx = na.lu().solve(&nb).unwrap();
        let ours: Vec<f64> = x.to_rows().concat();
        let theirs: Vec<f64> = (0..50)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| nx[(i, j)])
            .collect();
        assert!(max_abs_diff(&ours, &theirs) <= 1e-12, "seed {seed}");
    }
}

#[test]
fn singular_system_reported() {
    let a = DenseMatrix::zeros(3, 3);
    let b = DenseMatrix::identity(3);
    assert!(matches!(solve(&a, &b), Err(Error::SingularSystem { .. })));
}

#[test]
fn cap_guards_large_graphs() {
    let g = random_graph(40, 2.0, 1);
    assert!(matches!(
        dense_google(&g, ALPHA, 30),
        Err(Error::CapExceeded { size: 40, cap: 30 })
    ));
}
