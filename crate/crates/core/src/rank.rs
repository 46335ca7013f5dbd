//! PageRank and CheiRank by power iteration, plus local ordering indices for
//! a node subset.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, GoogleOperator, SubsetSelection};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RankKind {
    PageRank,
    CheiRank,
}

/// Stopping rule for a power iteration: L1 change between successive
/// iterates at most `tol`, within `max_iter` steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig {
            tol: 1e-12,
            max_iter: 1000,
        }
    }
}

impl PowerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tolerance {} must be positive",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter(
                "max_iter must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankVector {
    pub probabilities: Vec<f64>,
    pub kind: RankKind,
    pub iterations_used: usize,
    pub final_residual: f64,
}

impl RankVector {
    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Node indices by decreasing probability, ties by ascending index.
    pub fn order(&self) -> Vec<usize> {
        order_by_probability(&self.probabilities, (0..self.len()).collect())
    }

    /// 1-based global rank of every node (`K` for PageRank, `K*` for CheiRank).
    pub fn global_ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.len()];
        for (pos, node) in self.order().into_iter().enumerate() {
            ranks[node] = pos + 1;
        }
        ranks
    }
}

fn order_by_probability(p: &[f64], mut nodes: Vec<usize>) -> Vec<usize> {
    nodes.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    nodes
}

/// Power iteration `P ← G P` from the uniform vector.
pub fn pagerank(op: &GoogleOperator<'_>, config: PowerConfig) -> Result<RankVector> {
    power_iterate(op, config, RankKind::PageRank)
}

/// PageRank of the network with every link inverted.
pub fn cheirank(g: &DirectedGraph, alpha: f64, config: PowerConfig) -> Result<RankVector> {
    let reversed = g.reverse();
    let op = GoogleOperator::new(&reversed, alpha)?;
    power_iterate(&op, config, RankKind::CheiRank)
}

fn power_iterate(
    op: &GoogleOperator<'_>,
    config: PowerConfig,
    kind: RankKind,
) -> Result<RankVector> {
    config.validate()?;
    let n = op.node_count();
    let mut current = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for iteration in 1..=config.max_iter {
        op.apply_into(&current, &mut next);
        // G is column-stochastic; renormalizing only removes rounding drift.
        let sum: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= sum);
        residual = current.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut current, &mut next);
        if residual <= config.tol {
            return Ok(RankVector {
                probabilities: current,
                kind,
                iterations_used: iteration,
                final_residual: residual,
            });
        }
    }
    Err(Error::NotConverged {
        what: match kind {
            RankKind::PageRank => "PageRank",
            RankKind::CheiRank => "CheiRank",
        },
        iterations: config.max_iter,
        residual,
        last: current,
    })
}

/// Local PageRank (`K`) and CheiRank (`K*`) indices of the subset members,
/// both in subset order and 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalIndices {
    pub k: Vec<usize>,
    pub k_star: Vec<usize>,
}

impl LocalIndices {
    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// Subset positions in ascending `K`.
    pub fn by_k(&self) -> Vec<usize> {
        let mut pos: Vec<usize> = (0..self.len()).collect();
        pos.sort_by_key(|&m| self.k[m]);
        pos
    }
}

pub fn local_indices(
    pagerank: &RankVector,
    cheirank: &RankVector,
    subset: &SubsetSelection,
) -> Result<LocalIndices> {
    if pagerank.len() != cheirank.len() {
        return Err(Error::DimensionMismatch {
            expected: pagerank.len(),
            got: cheirank.len(),
        });
    }
    let members = subset.indices();
    if let Some(&m) = members.iter().find(|&&m| m >= pagerank.len()) {
        return Err(Error::InvalidSubset(format!("node {m} out of range")));
    }
    Ok(LocalIndices {
        k: local_order(&pagerank.probabilities, &members),
        k_star: local_order(&cheirank.probabilities, &members),
    })
}

/// 1-based local index of each subset member under a single ranking.
pub fn local_index(rank: &RankVector, subset: &SubsetSelection) -> Result<Vec<usize>> {
    let members = subset.indices();
    if let Some(&m) = members.iter().find(|&&m| m >= rank.len()) {
        return Err(Error::InvalidSubset(format!("node {m} out of range")));
    }
    Ok(local_order(&rank.probabilities, &members))
}

fn local_order(p: &[f64], members: &[usize]) -> Vec<usize> {
    // Equal probabilities fall back to the global node id, not subset position.
    let mut ranked: Vec<usize> = (0..members.len()).collect();
    ranked.sort_by(|&a, &b| {
        p[members[b]]
            .total_cmp(&p[members[a]])
            .then(members[a].cmp(&members[b]))
    });
    let mut index = vec![0; members.len()];
    for (pos, m) in ranked.into_iter().enumerate() {
        index[m] = pos + 1;
    }
    index
}

/// Members not beaten in both `K` and `K*` by any other member, sorted by `K`.
pub fn nondominated_front(indices: &LocalIndices) -> Vec<usize> {
    let mut best_k_star = usize::MAX;
    let mut front = Vec::new();
    for m in indices.by_k() {
        if indices.k_star[m] < best_k_star {
            best_k_star = indices.k_star[m];
            front.push(m);
        }
    }
    front
}
