//! Dense brute-force reference routines for small networks.
//!
//! Nothing here shares numerical code with the sparse modules: the Google
//! matrix is built explicitly from the adjacency, reduced matrices come from
//! Gaussian elimination or the raw power series, and PageRank is checked
//! against a seeded random surfer. Sizes are capped to keep the `O(N³)` work
//! small.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

pub const DEFAULT_CAP: usize = 500;

/// Row-major real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, x) in sums.iter_mut().zip(self.row(i)) {
                *s += x;
            }
        }
        sums
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j));
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Explicit `G = α S + (1 − α)/N`.
pub fn dense_google(g: &DirectedGraph, alpha: f64, cap: usize) -> Result<DenseMatrix> {
    let n = g.node_count();
    if n > cap {
        return Err(Error::CapExceeded { size: n, cap });
    }
    let nf = n as f64;
    let mut m = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let targets = g.out_edges(j);
        for i in 0..n {
            let s = if targets.is_empty() {
                1.0 / nf
            } else if targets.contains(&i) {
                1.0 / targets.len() as f64
            } else {
                0.0
            };
            m.set(i, j, alpha * s + (1.0 - alpha) / nf);
        }
    }
    Ok(m)
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting.
pub fn solve(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows;
    assert_eq!(a.cols, n, "system matrix must be square");
    assert_eq!(b.rows, n, "right-hand side has the wrong height");
    let m = b.cols;
    let mut lhs = a.clone();
    let mut rhs = b.clone();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&x, &y| lhs.get(x, col).abs().total_cmp(&lhs.get(y, col).abs()))
            .expect("non-empty range");
        let pivot = lhs.get(pivot_row, col);
        if pivot.abs() < 1e-300 {
            return Err(Error::SingularSystem { column: col, pivot });
        }
        if pivot_row != col {
            for k in 0..n {
                let t = lhs.get(col, k);
                lhs.set(col, k, lhs.get(pivot_row, k));
                lhs.set(pivot_row, k, t);
            }
            for k in 0..m {
                let t = rhs.get(col, k);
                rhs.set(col, k, rhs.get(pivot_row, k));
                rhs.set(pivot_row, k, t);
            }
        }
        for row in col + 1..n {
            let factor = lhs.get(row, col) / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                lhs.set(row, k, lhs.get(row, k) - factor * lhs.get(col, k));
            }
            for k in 0..m {
                rhs.set(row, k, rhs.get(row, k) - factor * rhs.get(col, k));
            }
        }
    }
    let mut x = DenseMatrix::zeros(n, m);
    for k in 0..m {
        for row in (0..n).rev() {
            let mut acc = rhs.get(row, k);
            for c in row + 1..n {
                acc -= lhs.get(row, c) * x.get(c, k);
            }
            x.set(row, k, acc / lhs.get(row, row));
        }
    }
    Ok(x)
}

struct Blocks {
    rr: DenseMatrix,
    rs: DenseMatrix,
    sr: DenseMatrix,
    ss: DenseMatrix,
}

fn blocks(g: &DenseMatrix, subset: &[usize]) -> Result<Blocks> {
    let n = g.rows;
    let mut in_subset = vec![false; n];
    for &m in subset {
        if m >= n || std::mem::replace(&mut in_subset[m], true) {
            return Err(Error::InvalidSubset(format!("bad or repeated member {m}")));
        }
    }
    if subset.is_empty() || subset.len() >= n {
        return Err(Error::InvalidSubset(format!(
            "subset size {} for {n} nodes",
            subset.len()
        )));
    }
    let rest: Vec<usize> = (0..n).filter(|&i| !in_subset[i]).collect();
    Ok(Blocks {
        rr: g.select(subset, subset),
        rs: g.select(subset, &rest),
        sr: g.select(&rest, subset),
        ss: g.select(&rest, &rest),
    })
}

/// `G_rr + G_rs (1 − G_ss)⁻¹ G_sr` by direct solve.
pub fn dense_reduced(g: &DenseMatrix, subset: &[usize]) -> Result<DenseMatrix> {
    let b = blocks(g, subset)?;
    let system = DenseMatrix::identity(b.ss.rows).sub(&b.ss);
    let x = solve(&system, &b.sr)?;
    Ok(b.rr.add(&b.rs.matmul(&x)))
}

/// Same as [`dense_reduced`] with the inverse replaced by `Σ_{l=0}^{l_max} G_ss^l`.
pub fn dense_series_reduced(
    g: &DenseMatrix,
    subset: &[usize],
    l_max: usize,
) -> Result<DenseMatrix> {
    let b = blocks(g, subset)?;
    let mut term = b.sr.clone();
    let mut acc = term.clone();
    for _ in 0..l_max {
        term = b.ss.matmul(&term);
        acc = acc.add(&term);
    }
    Ok(b.rr.add(&b.rs.matmul(&acc)))
}

/// Terms of the raw series `Σ_l G_ss^l G_sr e_j` needed, over all columns,
/// before the latest term's L1 norm is at most `tol` times the partial sum's.
/// `None` if some column needs more than `l_max + 1` terms.
pub fn raw_series_terms(
    g: &DenseMatrix,
    subset: &[usize],
    tol: f64,
    l_max: usize,
) -> Result<Option<usize>> {
    let b = blocks(g, subset)?;
    let l1 = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
    let mut worst = 0;
    for j in 0..b.sr.cols {
        let mut term: Vec<f64> = (0..b.sr.rows).map(|i| b.sr.get(i, j)).collect();
        let mut sum = term.clone();
        let mut terms = 1;
        while l1(&term) > tol * l1(&sum) {
            if terms > l_max {
                return Ok(None);
            }
            term = b.ss.mul_vec(&term);
            sum.iter_mut().zip(&term).for_each(|(s, t)| *s += t);
            terms += 1;
        }
        worst = worst.max(terms);
    }
    Ok(Some(worst))
}

/// PageRank as the null vector of `1 − G`, normalized to unit sum.
pub fn dense_pagerank(g: &DenseMatrix) -> Result<Vec<f64>> {
    let n = g.rows;
    let mut system = DenseMatrix::identity(n).sub(g);
    // Rows of 1 − G are linearly dependent; swap one for the normalization.
    for j in 0..n {
        system.set(n - 1, j, 1.0);
    }
    let mut rhs = DenseMatrix::zeros(n, 1);
    rhs.set(n - 1, 0, 1.0);
    let x = solve(&system, &rhs)?;
    Ok((0..n).map(|i| x.get(i, 0)).collect())
}

/// Visit frequencies of one long random-surfer walk.
#[derive(Clone, Debug, PartialEq)]
pub struct SurferEstimate {
    pub probabilities: Vec<f64>,
    pub steps: u64,
    pub seed: u64,
}

impl SurferEstimate {
    /// Binomial standard error `sqrt(p (1 − p) / steps)` of the estimate `p`.
    pub fn binomial_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.steps as f64).sqrt()
    }
}

/// Each step follows a uniformly chosen outlink with probability `alpha`
/// (any node if the current one is dangling), otherwise jumps to a uniformly
/// chosen node. The start node is drawn uniformly and not counted.
pub fn random_surfer(g: &DirectedGraph, alpha: f64, steps: u64, seed: u64) -> SurferEstimate {
    let n = g.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; n];
    let mut node = rng.gen_range(0..n);
    for _ in 0..steps {
        let targets = g.out_edges(node);
        node = if rng.gen::<f64>() < alpha && !targets.is_empty() {
            targets[rng.gen_range(0..targets.len())]
        } else {
            rng.gen_range(0..n)
        };
        counts[node] += 1;
    }
    let total = steps.max(1) as f64;
    SurferEstimate {
        probabilities: counts.into_iter().map(|c| c as f64 / total).collect(),
        steps,
        seed,
    }
}
