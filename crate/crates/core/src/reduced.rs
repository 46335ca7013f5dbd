//! Reduced Google matrix of a node subset.
//!
//! With the nodes split into the subset `r` and the scattering nodes `s`,
//!
//! ```text
//! G_R = G_rr + G_rs (1 − G_ss)⁻¹ G_sr
//! ```
//!
//! The inverse is never formed. The leading eigentriple `(λ_c, ψ_R, ψ_L)` of
//! `G_ss` is found by power iteration and split off with the projector
//! `P_c = ψ_R ψ_Lᵀ`:
//!
//! ```text
//! (1 − G_ss)⁻¹ = P_c / (1 − λ_c) + Q_c Σ_l (Q_c G_ss Q_c)^l,   Q_c = 1 − P_c
//! ```
//!
//! which gives `G_R = G_rr + G_pr + G_qr`. The first term of the split is a
//! rank-one matrix; the deflated series converges at the rate of the second
//! eigenvalue of `G_ss` instead of `λ_c`, which is typically close to 1.
//! Everything in the scattering space is touched only through matrix-vector
//! products with the sparse Google operator.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{GoogleOperator, SubsetSelection};
use crate::matrix::SquareMatrix;
use crate::rank::{PowerConfig, RankVector};

/// `λ_c` at or above this is treated as 1.
const SINGULAR_MARGIN: f64 = 1e-14;
/// Largest tolerated disagreement between the left and right estimates of `λ_c`.
const DEGENERACY_TOL: f64 = 1e-8;
/// Column sums of `G_R` further than this from 1 signal an upstream failure.
const COLUMN_SUM_TOL: f64 = 1e-8;

/// A real square linear map that can also apply its transpose.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], out: &mut [f64]);
    fn apply_transpose(&self, x: &[f64], out: &mut [f64]);
}

impl LinearOperator for SquareMatrix {
    fn dim(&self) -> usize {
        SquareMatrix::dim(self)
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Reduced(usize),
    Scattering(usize),
}

/// The four blocks of `G` for a subset: `G_rr` dense, the rest as products.
pub struct BlockPartition<'a, 'g> {
    op: &'a GoogleOperator<'g>,
    subset: SubsetSelection,
    r_nodes: Vec<usize>,
    s_nodes: Vec<usize>,
    slots: Vec<Slot>,
    grr: SquareMatrix,
}

pub fn partition<'a, 'g>(
    op: &'a GoogleOperator<'g>,
    subset: &SubsetSelection,
) -> Result<BlockPartition<'a, 'g>> {
    let g = op.graph();
    let n = g.node_count();
    let r_nodes = subset.indices();
    if r_nodes.len() >= n {
        return Err(Error::InvalidSubset("subset covers every node".into()));
    }
    let mut slots = vec![Slot::Scattering(usize::MAX); n];
    for (i, &node) in r_nodes.iter().enumerate() {
        if node >= n {
            return Err(Error::InvalidSubset(format!("node {node} out of range")));
        }
        slots[node] = Slot::Reduced(i);
    }
    let mut s_nodes = Vec::with_capacity(n - r_nodes.len());
    for (node, slot) in slots.iter_mut().enumerate() {
        if !matches!(slot, Slot::Reduced(_)) {
            *slot = Slot::Scattering(s_nodes.len());
            s_nodes.push(node);
        }
    }

    let alpha = op.alpha();
    let nf = n as f64;
    let teleport = (1.0 - alpha) / nf;
    let nr = r_nodes.len();
    let mut grr = SquareMatrix::zeros(nr);
    for (j, &src) in r_nodes.iter().enumerate() {
        if g.is_dangling(src) {
            for i in 0..nr {
                grr[(i, j)] = alpha / nf + teleport;
            }
            continue;
        }
        for i in 0..nr {
            grr[(i, j)] = teleport;
        }
        let share = alpha / g.out_degree(src) as f64;
        for &t in g.out_edges(src) {
            if let Slot::Reduced(i) = slots[t] {
                grr[(i, j)] += share;
            }
        }
    }

    Ok(BlockPartition {
        op,
        subset: subset.clone(),
        r_nodes,
        s_nodes,
        slots,
        grr,
    })
}

impl<'a, 'g> BlockPartition<'a, 'g> {
    pub fn subset(&self) -> &SubsetSelection {
        &self.subset
    }

    pub fn operator(&self) -> &'a GoogleOperator<'g> {
        self.op
    }

    pub fn grr(&self) -> &SquareMatrix {
        &self.grr
    }

    pub fn reduced_size(&self) -> usize {
        self.r_nodes.len()
    }

    pub fn scattering_size(&self) -> usize {
        self.s_nodes.len()
    }

    /// Global node of each scattering index.
    pub fn scattering_nodes(&self) -> &[usize] {
        &self.s_nodes
    }

    /// Local position of a global node.
    pub fn locate(&self, node: usize) -> (bool, usize) {
        match self.slots[node] {
            Slot::Reduced(i) => (true, i),
            Slot::Scattering(i) => (false, i),
        }
    }

    fn embed(&self, nodes: &[usize], x: &[f64], full: &mut [f64]) {
        full.iter_mut().for_each(|v| *v = 0.0);
        for (&node, &v) in nodes.iter().zip(x) {
            full[node] = v;
        }
    }

    fn restrict(nodes: &[usize], full: &[f64], out: &mut [f64]) {
        for (o, &node) in out.iter_mut().zip(nodes) {
            *o = full[node];
        }
    }

    fn block_apply(
        &self,
        from: &[usize],
        to: &[usize],
        x: &[f64],
        out: &mut [f64],
        transpose: bool,
        scratch: &mut Scratch,
    ) {
        assert_eq!(x.len(), from.len());
        assert_eq!(out.len(), to.len());
        self.embed(from, x, &mut scratch.input);
        if transpose {
            self.op
                .apply_transpose_into(&scratch.input, &mut scratch.output);
        } else {
            self.op.apply_into(&scratch.input, &mut scratch.output);
        }
        Self::restrict(to, &scratch.output, out);
    }

    fn scratch(&self) -> Scratch {
        let n = self.op.node_count();
        Scratch {
            input: vec![0.0; n],
            output: vec![0.0; n],
        }
    }

    /// `G_rs x` for an s-space vector.
    pub fn apply_rs(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.reduced_size()];
        self.block_apply(
            &self.s_nodes,
            &self.r_nodes,
            x,
            &mut out,
            false,
            &mut self.scratch(),
        );
        out
    }

    /// `G_sr y` for an r-space vector.
    pub fn apply_sr(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.scattering_size()];
        self.block_apply(
            &self.r_nodes,
            &self.s_nodes,
            y,
            &mut out,
            false,
            &mut self.scratch(),
        );
        out
    }

    /// `G_ss x`.
    pub fn apply_ss(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.scattering_size()];
        self.block_apply(
            &self.s_nodes,
            &self.s_nodes,
            x,
            &mut out,
            false,
            &mut self.scratch(),
        );
        out
    }

    /// `G_srᵀ x` for an s-space vector; an r-space result.
    pub fn apply_sr_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.reduced_size()];
        self.block_apply(
            &self.s_nodes,
            &self.r_nodes,
            x,
            &mut out,
            true,
            &mut self.scratch(),
        );
        out
    }

    /// Column `j` of `G_sr`.
    pub fn sr_column(&self, j: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.reduced_size()];
        e[j] = 1.0;
        self.apply_sr(&e)
    }

    /// `G_ss` as a standalone operator on the scattering space.
    pub fn scattering(&self) -> ScatteringBlock<'_, 'a, 'g> {
        ScatteringBlock { bp: self }
    }
}

struct Scratch {
    input: Vec<f64>,
    output: Vec<f64>,
}

/// `G_ss` restricted to the scattering space.
pub struct ScatteringBlock<'p, 'a, 'g> {
    bp: &'p BlockPartition<'a, 'g>,
}

impl LinearOperator for ScatteringBlock<'_, '_, '_> {
    fn dim(&self) -> usize {
        self.bp.scattering_size()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let s = &self.bp.s_nodes;
        self.bp
            .block_apply(s, s, x, out, false, &mut self.bp.scratch());
    }

    fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        let s = &self.bp.s_nodes;
        self.bp
            .block_apply(s, s, x, out, true, &mut self.bp.scratch());
    }
}

/// Leading eigentriple of the scattering block.
///
/// `ψ_R` has unit element sum and `ψ_Lᵀ ψ_R = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeflationData {
    pub lambda_c: f64,
    pub psi_right: Vec<f64>,
    pub psi_left: Vec<f64>,
    pub iterations_right: usize,
    pub iterations_left: usize,
    /// `‖G_ss ψ_R − λ_c ψ_R‖₁`.
    pub residual_right: f64,
    /// `‖ψ_Lᵀ G_ss − λ_c ψ_Lᵀ‖₁`.
    pub residual_left: f64,
}

impl DeflationData {
    /// `x ← Q_c x = x − ψ_R (ψ_Lᵀ x)`.
    pub fn project_out(&self, x: &mut [f64]) {
        let weight: f64 = self.psi_left.iter().zip(x.iter()).map(|(l, v)| l * v).sum();
        for (v, r) in x.iter_mut().zip(&self.psi_right) {
            *v -= weight * r;
        }
    }
}

struct Dominant {
    vector: Vec<f64>,
    growth: f64,
    iterations: usize,
}

fn dominant_vector<O: LinearOperator + ?Sized>(
    op: &O,
    config: PowerConfig,
    transpose: bool,
    what: &'static str,
) -> Result<Dominant> {
    let n = op.dim();
    let mut current = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut change = f64::INFINITY;
    for iteration in 1..=config.max_iter {
        if transpose {
            op.apply_transpose(&current, &mut next);
        } else {
            op.apply(&current, &mut next);
        }
        // Nonnegative operator and iterate: the L1 norm is the plain sum.
        let growth: f64 = next.iter().sum();
        if !(growth > 0.0 && growth.is_finite()) {
            return Err(Error::Consistency(format!(
                "scattering block has no positive leading eigenvalue (growth {growth})"
            )));
        }
        next.iter_mut().for_each(|x| *x /= growth);
        change = current.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut current, &mut next);
        if change <= config.tol {
            return Ok(Dominant {
                vector: current,
                growth,
                iterations: iteration,
            });
        }
    }
    Err(Error::NotConverged {
        what,
        iterations: config.max_iter,
        residual: change,
        last: current,
    })
}

/// Right and left power iterations on a nonnegative operator, biorthonormalized.
pub fn leading_eigentriple<O: LinearOperator + ?Sized>(
    op: &O,
    config: PowerConfig,
) -> Result<DeflationData> {
    config.validate()?;
    if op.dim() == 0 {
        return Err(Error::InvalidSubset("scattering space is empty".into()));
    }
    let right = dominant_vector(op, config, false, "right eigenvector of G_ss")?;
    let left = dominant_vector(op, config, true, "left eigenvector of G_ss")?;
    if (right.growth - left.growth).abs() > DEGENERACY_TOL {
        return Err(Error::Degenerate {
            left: left.growth,
            right: right.growth,
        });
    }

    let psi_right = right.vector;
    let overlap: f64 = left.vector.iter().zip(&psi_right).map(|(a, b)| a * b).sum();
    if overlap.is_nan() || overlap <= 0.0 {
        return Err(Error::Degenerate {
            left: left.growth,
            right: right.growth,
        });
    }
    let psi_left: Vec<f64> = left.vector.iter().map(|x| x / overlap).collect();

    let n = op.dim();
    let mut g_right = vec![0.0; n];
    op.apply(&psi_right, &mut g_right);
    let lambda_c: f64 = psi_left.iter().zip(&g_right).map(|(a, b)| a * b).sum();
    if lambda_c >= 1.0 - SINGULAR_MARGIN {
        return Err(Error::Singular(lambda_c));
    }
    if lambda_c.is_nan() || lambda_c <= 0.0 {
        return Err(Error::Consistency(format!(
            "leading eigenvalue {lambda_c} is not positive"
        )));
    }
    let residual_right = g_right
        .iter()
        .zip(&psi_right)
        .map(|(g, v)| (g - lambda_c * v).abs())
        .sum();
    let mut g_left = vec![0.0; n];
    op.apply_transpose(&psi_left, &mut g_left);
    let residual_left = g_left
        .iter()
        .zip(&psi_left)
        .map(|(g, v)| (g - lambda_c * v).abs())
        .sum();

    Ok(DeflationData {
        lambda_c,
        psi_right,
        psi_left,
        iterations_right: right.iterations,
        iterations_left: left.iterations,
        residual_right,
        residual_left,
    })
}

fn check_not_singular(defl: &DeflationData) -> Result<()> {
    if defl.lambda_c >= 1.0 - SINGULAR_MARGIN {
        return Err(Error::Singular(defl.lambda_c));
    }
    Ok(())
}

/// Projector component `(G_rs ψ_R)(ψ_Lᵀ G_sr) / (1 − λ_c)`.
pub fn compute_gpr(bp: &BlockPartition<'_, '_>, defl: &DeflationData) -> Result<SquareMatrix> {
    check_not_singular(defl)?;
    check_len(&defl.psi_right, bp.scattering_size())?;
    check_len(&defl.psi_left, bp.scattering_size())?;
    let (towards_r, from_r) = rayon::join(
        || bp.apply_rs(&defl.psi_right),
        || bp.apply_sr_transpose(&defl.psi_left),
    );
    SquareMatrix::outer(&towards_r, &from_r, 1.0 / (1.0 - defl.lambda_c))
}

fn check_len(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    Ok(())
}

/// Truncation rule for the deflated series: stop once the L1 norm of the
/// latest term is at most `tol` times that of the partial sum, or at order
/// `l_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesConfig {
    pub tol: f64,
    pub l_max: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            tol: 1e-12,
            l_max: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesOutcome {
    pub matrix: SquareMatrix,
    /// Largest number of series terms summed over all columns.
    pub terms_used: usize,
    /// Some column hit `l_max` before meeting the tolerance.
    pub truncated: bool,
    /// L1 norm of every series term, per column.
    pub term_norms: Vec<Vec<f64>>,
}

struct ColumnSeries {
    column: Vec<f64>,
    norms: Vec<f64>,
    truncated: bool,
}

fn l1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

/// Hidden-link component `G_rs [Q_c Σ_l Ḡ_ss^l] G_sr`, `Ḡ_ss = Q_c G_ss Q_c`.
pub fn compute_gqr(
    bp: &BlockPartition<'_, '_>,
    defl: &DeflationData,
    config: SeriesConfig,
) -> Result<SeriesOutcome> {
    if config.tol.is_nan() || config.tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "series tolerance {} must be positive",
            config.tol
        )));
    }
    check_len(&defl.psi_right, bp.scattering_size())?;
    check_len(&defl.psi_left, bp.scattering_size())?;

    let columns: Vec<ColumnSeries> = (0..bp.reduced_size())
        .into_par_iter()
        .map(|j| series_column(bp, defl, config, j))
        .collect();

    let term_norms: Vec<Vec<f64>> = columns.iter().map(|c| c.norms.clone()).collect();
    let terms_used = term_norms.iter().map(Vec::len).max().unwrap_or(0);
    let truncated = columns.iter().any(|c| c.truncated);
    let matrix =
        SquareMatrix::from_columns(&columns.into_iter().map(|c| c.column).collect::<Vec<_>>())?;
    Ok(SeriesOutcome {
        matrix,
        terms_used,
        truncated,
        term_norms,
    })
}

fn series_column(
    bp: &BlockPartition<'_, '_>,
    defl: &DeflationData,
    config: SeriesConfig,
    j: usize,
) -> ColumnSeries {
    let ns = bp.scattering_size();
    let mut scratch = bp.scratch();
    let mut term = bp.sr_column(j);
    defl.project_out(&mut term);
    let mut sum = term.clone();
    let mut norms = vec![l1(&term)];
    let mut next = vec![0.0; ns];
    let mut order = 0;
    let mut truncated = false;
    while norms[order] > config.tol * l1(&sum) {
        if order == config.l_max {
            truncated = true;
            break;
        }
        // Q_c is idempotent, so projecting the input again only removes drift.
        defl.project_out(&mut term);
        bp.block_apply(
            &bp.s_nodes,
            &bp.s_nodes,
            &term,
            &mut next,
            false,
            &mut scratch,
        );
        defl.project_out(&mut next);
        std::mem::swap(&mut term, &mut next);
        sum.iter_mut().zip(&term).for_each(|(s, t)| *s += t);
        norms.push(l1(&term));
        order += 1;
    }
    let mut column = vec![0.0; bp.reduced_size()];
    bp.block_apply(
        &bp.s_nodes,
        &bp.r_nodes,
        &sum,
        &mut column,
        false,
        &mut scratch,
    );
    ColumnSeries {
        column,
        norms,
        truncated,
    }
}

/// Element sums of each component divided by `N_r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Weights {
    pub rr: f64,
    pub pr: f64,
    pub qr: f64,
}

impl Weights {
    pub fn total(&self) -> f64 {
        self.rr + self.pr + self.qr
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDecomposition {
    pub gr: SquareMatrix,
    pub grr: SquareMatrix,
    pub gpr: SquareMatrix,
    pub gqr: SquareMatrix,
    /// Diagonal of `G_qr`.
    pub gqrd: SquareMatrix,
    /// Off-diagonal part of `G_qr`.
    pub gqrnd: SquareMatrix,
    pub weights: Weights,
    /// Summed magnitude of the negative entries of `G_qr`, divided by `N_r`.
    pub negative_weight: f64,
    pub lambda_c: f64,
    pub series_terms_used: usize,
    pub series_truncated: bool,
    pub deflation: DeflationData,
}

impl ReducedDecomposition {
    pub fn dim(&self) -> usize {
        self.gr.dim()
    }

    /// Cosine between each column of `G_pr` and the given subset PageRank.
    pub fn projector_alignment(&self, pagerank_r: &[f64]) -> Vec<f64> {
        let norm_p = pagerank_r.iter().map(|x| x * x).sum::<f64>().sqrt();
        (0..self.dim())
            .map(|j| {
                let col = self.gpr.column(j);
                let dot: f64 = col.iter().zip(pagerank_r).map(|(a, b)| a * b).sum();
                let norm_c = col.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm_c == 0.0 || norm_p == 0.0 {
                    0.0
                } else {
                    dot / (norm_c * norm_p)
                }
            })
            .collect()
    }
}

/// `G_R = G_rr + G_pr + G_qr`, with weights, diagnostics and consistency checks.
pub fn assemble(
    bp: &BlockPartition<'_, '_>,
    defl: &DeflationData,
    gpr: SquareMatrix,
    series: SeriesOutcome,
) -> Result<ReducedDecomposition> {
    let nr = bp.reduced_size();
    for m in [&gpr, &series.matrix] {
        if m.dim() != nr {
            return Err(Error::DimensionMismatch {
                expected: nr,
                got: m.dim(),
            });
        }
    }
    let grr = bp.grr().clone();
    let gqr = series.matrix;
    let gr = SquareMatrix::sum_of(&[&grr, &gpr, &gqr])?;

    for (j, s) in gr.column_sums().into_iter().enumerate() {
        if s.is_nan() || (s - 1.0).abs() > COLUMN_SUM_TOL {
            return Err(Error::Consistency(format!("column {j} of G_R sums to {s}")));
        }
    }
    let min = gr.min_entry();
    if min < -COLUMN_SUM_TOL {
        return Err(Error::Consistency(format!(
            "G_R has a negative entry {min}"
        )));
    }

    let nrf = nr as f64;
    let weights = Weights {
        rr: grr.total() / nrf,
        pr: gpr.total() / nrf,
        qr: gqr.total() / nrf,
    };
    let negative_weight = gqr
        .as_slice()
        .iter()
        .filter(|&&x| x < 0.0)
        .map(|x| -x)
        .sum::<f64>()
        / nrf;
    let (gqrd, gqrnd) = gqr.split_diagonal();

    Ok(ReducedDecomposition {
        gr,
        grr,
        gpr,
        gqr,
        gqrd,
        gqrnd,
        weights,
        negative_weight,
        lambda_c: defl.lambda_c,
        series_terms_used: series.terms_used,
        series_truncated: series.truncated,
        deflation: defl.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReduceConfig {
    pub deflation: PowerConfig,
    pub series: SeriesConfig,
}

impl Default for ReduceConfig {
    fn default() -> Self {
        ReduceConfig {
            deflation: PowerConfig {
                tol: 1e-12,
                max_iter: 10_000,
            },
            series: SeriesConfig::default(),
        }
    }
}

/// Full pipeline: partition, deflate, both indirect components, assemble.
pub fn reduce(
    op: &GoogleOperator<'_>,
    subset: &SubsetSelection,
    config: ReduceConfig,
) -> Result<ReducedDecomposition> {
    let bp = partition(op, subset)?;
    let defl = leading_eigentriple(&bp.scattering(), config.deflation)?;
    let gpr = compute_gpr(&bp, &defl)?;
    let series = compute_gqr(&bp, &defl, config.series)?;
    assemble(&bp, &defl, gpr, series)
}

/// `‖G_R P_r − P_r‖₁ / ‖P_r‖₁` with `P_r` the raw restriction of the global
/// PageRank to the subset.
pub fn reduced_pagerank_residual(
    decomp: &ReducedDecomposition,
    pagerank: &RankVector,
    subset: &SubsetSelection,
) -> Result<f64> {
    if subset.len() != decomp.dim() {
        return Err(Error::DimensionMismatch {
            expected: decomp.dim(),
            got: subset.len(),
        });
    }
    let pr: Vec<f64> = subset
        .indices()
        .into_iter()
        .map(|m| {
            pagerank
                .probabilities
                .get(m)
                .copied()
                .ok_or(Error::InvalidSubset(format!("node {m} out of range")))
        })
        .collect::<Result<_>>()?;
    let image = decomp.gr.mul_vec(&pr);
    Ok(l1(&image
        .iter()
        .zip(&pr)
        .map(|(a, b)| a - b)
        .collect::<Vec<_>>())
        / l1(&pr))
}
