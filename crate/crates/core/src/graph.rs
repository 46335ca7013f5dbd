//! Directed graphs, edge-list ingestion and the implicit Google operator.
//!
//! Edges are stored as a compressed out-adjacency: `out_edges(j)` lists every
//! `i` with `A_ij = 1`, i.e. the links leaving `j`. The adjacency is binary,
//! so duplicate edges collapse and self-loops are dropped on construction.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Below this size matrix-vector products run on the calling thread.
const PARALLEL_THRESHOLD: usize = 1 << 14;

/// Dense node index in `[0, N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i)
    }
}

/// Bijection between node indices and display labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelTable {
    labels: Vec<String>,
    by_label: HashMap<String, usize>,
}

impl LabelTable {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        let mut by_label = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "node {i} has an empty label"
                )));
            }
            if by_label.insert(label.clone(), i).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate label `{label}`"
                )));
            }
        }
        Ok(LabelTable { labels, by_label })
    }

    /// Labels `"0"`, `"1"`, ... for graphs read in integer mode.
    pub fn numbered(n: usize) -> Self {
        let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let by_label = labels.iter().cloned().zip(0..).collect();
        LabelTable { labels, by_label }
    }

    /// Parses `id<TAB>label` lines. Ids must cover `0..n` exactly once.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<Option<String>> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let line_no = lineno + 1;
            let (id, label) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: line_no,
                message: "expected `id<TAB>label`".into(),
            })?;
            let id: usize = id.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid node id `{}`", id.trim()),
            })?;
            let label = label.trim();
            if label.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "empty label".into(),
                });
            }
            if id >= entries.len() {
                entries.resize(id + 1, None);
            }
            if entries[id].replace(label.to_string()).is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate id {id}"),
                });
            }
        }
        if entries.is_empty() {
            return Err(Error::EmptyInput("label table"));
        }
        let labels = entries
            .into_iter()
            .enumerate()
            .map(|(i, l)| {
                l.ok_or_else(|| {
                    Error::InvalidParameter(format!("label table has no entry for id {i}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        LabelTable::new(labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Resolves a token as a label first, then as an integer id in range.
    pub fn resolve(&self, token: &str) -> Option<usize> {
        if let Some(&i) = self.by_label.get(token) {
            return Some(i);
        }
        token
            .parse::<usize>()
            .ok()
            .filter(|&i| i < self.labels.len())
    }
}

/// Binary directed graph with labels and a cached dangling set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    labels: LabelTable,
    dangling: Vec<usize>,
}

impl DirectedGraph {
    /// Builds a graph on `n` nodes. Self-loops are dropped and duplicate
    /// edges collapsed.
    pub fn from_edges<I>(n: usize, edges: I, labels: Option<LabelTable>) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(Error::EmptyInput("graph has no nodes"));
        }
        let labels = match labels {
            Some(t) if t.len() != n => {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: t.len(),
                })
            }
            Some(t) => t,
            None => LabelTable::numbered(n),
        };
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (s, t) in edges {
            if s >= n || t >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({s}, {t}) out of range for {n} nodes"
                )));
            }
            if s != t {
                adjacency[s].push(t);
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut dangling = Vec::new();
        offsets.push(0);
        for (j, mut out) in adjacency.into_iter().enumerate() {
            out.sort_unstable();
            out.dedup();
            if out.is_empty() {
                dangling.push(j);
            }
            targets.extend(out);
            offsets.push(targets.len());
        }
        Ok(DirectedGraph {
            offsets,
            targets,
            labels,
            dangling,
        })
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    /// Targets of the links leaving `j`, ascending.
    pub fn out_edges(&self, j: usize) -> &[usize] {
        &self.targets[self.offsets[j]..self.offsets[j + 1]]
    }

    pub fn out_degree(&self, j: usize) -> usize {
        self.offsets[j + 1] - self.offsets[j]
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count()];
        for &t in &self.targets {
            deg[t] += 1;
        }
        deg
    }

    /// Nodes without outgoing links, ascending.
    pub fn dangling(&self) -> &[usize] {
        &self.dangling
    }

    pub fn is_dangling(&self, j: usize) -> bool {
        self.out_degree(j) == 0
    }

    pub fn labels(&self) -> &LabelTable {
        &self.labels
    }

    pub fn label(&self, j: usize) -> &str {
        self.labels.label(j)
    }

    /// All edges `(source, target)` in source-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |j| self.out_edges(j).iter().map(move |&i| (j, i)))
    }

    /// The same network with every link inverted.
    pub fn reverse(&self) -> DirectedGraph {
        DirectedGraph::from_edges(
            self.node_count(),
            self.edges().map(|(s, t)| (t, s)),
            Some(self.labels.clone()),
        )
        .expect("reversal of a valid graph is valid")
    }

    /// Serializes as `source target` lines, using labels when asked.
    pub fn to_edge_list(&self, with_labels: bool) -> String {
        let mut out = String::new();
        for (s, t) in self.edges() {
            if with_labels {
                out.push_str(self.label(s));
                out.push(' ');
                out.push_str(self.label(t));
            } else {
                out.push_str(&format!("{s} {t}"));
            }
            out.push('\n');
        }
        out
    }

    /// Serializes the label table as `id<TAB>label` lines.
    pub fn to_label_table(&self) -> String {
        self.labels
            .labels()
            .iter()
            .enumerate()
            .map(|(i, l)| format!("{i}\t{l}\n"))
            .collect()
    }
}

/// Parses whitespace-separated `source target` lines (`#` starts a comment
/// line). Without a label table the tokens must be integer ids and the node
/// universe is `[0, max_id]`; with one, tokens are resolved through it and the
/// node count is the table size.
pub fn parse_edge_list(text: &str, labels: Option<LabelTable>) -> Result<DirectedGraph> {
    let mut edges = Vec::new();
    let mut max_id = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let line_no = lineno + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 2 tokens, found {}", tokens.len()),
            });
        }
        let mut ids = [0usize; 2];
        for (slot, token) in ids.iter_mut().zip(&tokens) {
            *slot = match &labels {
                Some(table) => table
                    .resolve(token)
                    .ok_or_else(|| Error::UnknownLabel(token.to_string()))?,
                None => token.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid node id `{token}`"),
                })?,
            };
            max_id = max_id.max(*slot);
        }
        edges.push((ids[0], ids[1]));
    }
    if edges.is_empty() {
        return Err(Error::EmptyInput("edge list has no edges"));
    }
    let n = match &labels {
        Some(table) => table.len(),
        None => max_id + 1,
    };
    DirectedGraph::from_edges(n, edges, labels)
}

/// Applies the transition matrix `S`: `(Sv)_i = Σ_{j→i} v_j / k_out(j)` plus
/// `(1/N) Σ_{j dangling} v_j` on every entry.
pub fn apply_transition(g: &DirectedGraph, v: &[f64]) -> Result<Vec<f64>> {
    let n = g.node_count();
    check_vector(v, n)?;
    let dangling_mass: f64 = g.dangling().iter().map(|&j| v[j]).sum();
    let mut out = vec![dangling_mass / n as f64; n];
    for (j, &vj) in v.iter().enumerate() {
        let deg = g.out_degree(j);
        if deg == 0 {
            continue;
        }
        let share = vj / deg as f64;
        for &i in g.out_edges(j) {
            out[i] += share;
        }
    }
    Ok(out)
}

fn check_vector(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(())
}

/// Implicit Google matrix `G = α S + (1 − α)/N`.
///
/// Holds the in-adjacency so that `G v` is a gather per row; every output
/// entry is summed in the same order whether or not the product runs in
/// parallel.
#[derive(Clone, Debug)]
pub struct GoogleOperator<'g> {
    graph: &'g DirectedGraph,
    alpha: f64,
    in_offsets: Vec<usize>,
    in_sources: Vec<usize>,
    inv_out_degree: Vec<f64>,
}

impl<'g> GoogleOperator<'g> {
    pub fn new(graph: &'g DirectedGraph, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "damping factor {alpha} outside (0, 1)"
            )));
        }
        let n = graph.node_count();
        let mut in_offsets = vec![0usize; n + 1];
        for (_, t) in graph.edges() {
            in_offsets[t + 1] += 1;
        }
        for i in 0..n {
            in_offsets[i + 1] += in_offsets[i];
        }
        let mut cursor = in_offsets.clone();
        let mut in_sources = vec![0usize; graph.edge_count()];
        // Source-major edge order leaves each in-list sorted ascending.
        for (s, t) in graph.edges() {
            in_sources[cursor[t]] = s;
            cursor[t] += 1;
        }
        let inv_out_degree = (0..n)
            .map(|j| match graph.out_degree(j) {
                0 => 0.0,
                d => 1.0 / d as f64,
            })
            .collect();
        Ok(GoogleOperator {
            graph,
            alpha,
            in_offsets,
            in_sources,
            inv_out_degree,
        })
    }

    pub fn graph(&self) -> &'g DirectedGraph {
        self.graph
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// `G v`, checking dimensions and finiteness.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_vector(v, self.node_count())?;
        let mut out = vec![0.0; v.len()];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    /// `out = G v` for an arbitrary real vector (linear in `v`).
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let n = self.node_count();
        debug_assert_eq!(v.len(), n);
        debug_assert_eq!(out.len(), n);
        let nf = n as f64;
        let total: f64 = v.iter().sum();
        let dangling: f64 = self.graph.dangling().iter().map(|&j| v[j]).sum();
        let base = self.alpha * dangling / nf + (1.0 - self.alpha) * total / nf;
        let row = |i: usize| -> f64 {
            let mut acc = 0.0;
            for &j in &self.in_sources[self.in_offsets[i]..self.in_offsets[i + 1]] {
                acc += v[j] * self.inv_out_degree[j];
            }
            self.alpha * acc + base
        };
        if n >= PARALLEL_THRESHOLD {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(i, o)| *o = row(i));
        } else {
            out.iter_mut().enumerate().for_each(|(i, o)| *o = row(i));
        }
    }

    /// `out = Gᵀ u`.
    pub fn apply_transpose_into(&self, u: &[f64], out: &mut [f64]) {
        let n = self.node_count();
        debug_assert_eq!(u.len(), n);
        debug_assert_eq!(out.len(), n);
        let nf = n as f64;
        let total: f64 = u.iter().sum();
        let teleport = (1.0 - self.alpha) * total / nf;
        let dangling_col = self.alpha * total / nf + teleport;
        let col = |j: usize| -> f64 {
            let targets = self.graph.out_edges(j);
            if targets.is_empty() {
                return dangling_col;
            }
            let acc: f64 = targets.iter().map(|&i| u[i]).sum();
            self.alpha * acc * self.inv_out_degree[j] + teleport
        };
        if n >= PARALLEL_THRESHOLD {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(j, o)| *o = col(j));
        } else {
            out.iter_mut().enumerate().for_each(|(j, o)| *o = col(j));
        }
    }
}

/// Ordered subset of nodes; member order fixes the row/column order of every
/// reduced matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetSelection {
    members: Vec<NodeId>,
    labels: Vec<String>,
}

impl SubsetSelection {
    pub fn new(graph: &DirectedGraph, members: Vec<NodeId>) -> Result<Self> {
        let n = graph.node_count();
        if members.is_empty() {
            return Err(Error::InvalidSubset("subset is empty".into()));
        }
        if members.len() >= n {
            return Err(Error::InvalidSubset(format!(
                "subset of {} nodes leaves no scattering nodes in a graph of {n}",
                members.len()
            )));
        }
        let mut seen = vec![false; n];
        for m in &members {
            if m.0 >= n {
                return Err(Error::InvalidSubset(format!("node {m} out of range")));
            }
            if std::mem::replace(&mut seen[m.0], true) {
                return Err(Error::InvalidSubset(format!("node {m} listed twice")));
            }
        }
        let labels = members
            .iter()
            .map(|m| graph.label(m.0).to_string())
            .collect();
        Ok(SubsetSelection { members, labels })
    }

    pub fn from_indices(graph: &DirectedGraph, members: &[usize]) -> Result<Self> {
        SubsetSelection::new(graph, members.iter().copied().map(NodeId).collect())
    }

    /// One label or id per line, order preserved.
    pub fn parse(text: &str, graph: &DirectedGraph) -> Result<Self> {
        let members = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|token| {
                graph
                    .labels()
                    .resolve(token)
                    .map(NodeId)
                    .ok_or_else(|| Error::UnknownLabel(token.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        SubsetSelection::new(graph, members)
    }

    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Global index of each member, in subset order.
    pub fn indices(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_transition(g: &DirectedGraph) -> Vec<Vec<f64>> {
        let n = g.node_count();
        let mut s = vec![vec![0.0; n]; n];
        for j in 0..n {
            if g.is_dangling(j) {
                for row in s.iter_mut() {
                    row[j] = 1.0 / n as f64;
                }
            } else {
                for &i in g.out_edges(j) {
                    s[i][j] = 1.0 / g.out_degree(j) as f64;
                }
            }
        }
        s
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> DirectedGraph {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for s in 0..n {
            for t in 0..n {
                if rng.gen::<f64>() < p {
                    edges.push((s, t));
                }
            }
        }
        DirectedGraph::from_edges(n, edges, None).unwrap()
    }

    #[test]
    fn parses_two_cycle() {
        let g = parse_edge_list("0 1\n1 0", None).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 0)]);
        assert!(g.dangling().is_empty());
    }

    #[test]
    fn collapses_duplicates_and_self_loops() {
        let g = parse_edge_list("0 1\n0 1\n0 0", None).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(g.dangling(), &[1]);
    }

    #[test]
    fn isolated_ids_become_dangling() {
        let g = parse_edge_list("# header\n0 3\n\n3 0\n", None).unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.dangling(), &[1, 2]);
    }

    #[test]
    fn labelled_fixture_round_trips() {
        let labels = LabelTable::parse("0\tA\n1\tB\n2\tC\n3\tD\n4\tE\n").unwrap();
        let text = "A B\nB C\nC D\nD E\nE A\n";
        let g = parse_edge_list(text, Some(labels)).unwrap();
        assert_eq!(g.node_count(), 5);
        assert_eq!(
            g.edges().collect::<Vec<_>>(),
            vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]
        );
        let relabels = LabelTable::parse(&g.to_label_table()).unwrap();
        let again = parse_edge_list(&g.to_edge_list(true), Some(relabels)).unwrap();
        assert_eq!(again, g);
    }

    #[test]
    fn parse_errors() {
        match parse_edge_list("0 1\n1 2 3\n", None) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_edge_list("", None),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            parse_edge_list("# only\n\n", None),
            Err(Error::EmptyInput(_))
        ));
        let labels = LabelTable::parse("0\tA\n1\tB\n").unwrap();
        assert!(matches!(
            parse_edge_list("A Z\n", Some(labels)),
            Err(Error::UnknownLabel(l)) if l == "Z"
        ));
        assert!(matches!(
            parse_edge_list("a b\n", None),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn label_table_rejects_gaps_and_duplicates() {
        assert!(LabelTable::parse("0\tA\n2\tC\n").is_err());
        assert!(LabelTable::parse("0\tA\n1\tA\n").is_err());
        assert!(LabelTable::parse("0\tA\n0\tB\n").is_err());
        assert!(LabelTable::parse("0 A\n").is_err());
        let t = LabelTable::parse("1\tUnited States\n0\tFrance\n").unwrap();
        assert_eq!(t.resolve("United States"), Some(1));
        assert_eq!(t.resolve("0"), Some(0));
        assert_eq!(t.resolve("2"), None);
    }

    #[test]
    fn reverse_single_edge_and_cycle() {
        let g = DirectedGraph::from_edges(2, [(0, 1)], None).unwrap();
        assert_eq!(g.reverse().edges().collect::<Vec<_>>(), vec![(1, 0)]);
        assert_eq!(g.reverse().dangling(), &[0]);
        let c = parse_edge_list("0 1\n1 0", None).unwrap();
        assert_eq!(c.reverse(), c);
    }

    #[test]
    fn reverse_is_involution_and_swaps_degrees() {
        let g = random_graph(50, 0.08, 7);
        let r = g.reverse();
        assert_eq!(r.reverse(), g);
        let indeg = g.in_degrees();
        for (j, &d) in indeg.iter().enumerate() {
            assert_eq!(r.out_degree(j), d);
        }
    }

    #[test]
    fn transition_examples() {
        let c = parse_edge_list("0 1\n1 0", None).unwrap();
        assert_eq!(apply_transition(&c, &[1.0, 0.0]).unwrap(), vec![0.0, 1.0]);
        let g = DirectedGraph::from_edges(2, [(0, 1)], None).unwrap();
        assert_eq!(apply_transition(&g, &[0.0, 1.0]).unwrap(), vec![0.5, 0.5]);
        assert!(matches!(
            apply_transition(&g, &[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn transition_matches_dense() {
        for seed in 0..20 {
            let n = 5 + (seed as usize * 7) % 46;
            let g = random_graph(n, 0.1, seed);
            let s = dense_transition(&g);
            let v: Vec<f64> = (0..n).map(|i| ((i * 31 + 7) % 11) as f64 - 3.0).collect();
            let got = apply_transition(&g, &v).unwrap();
            for i in 0..n {
                let want: f64 = (0..n).map(|j| s[i][j] * v[j]).sum();
                assert!((got[i] - want).abs() <= 1e-14, "n={n} i={i}");
            }
        }
    }

    #[test]
    fn google_two_cycle() {
        let c = parse_edge_list("0 1\n1 0", None).unwrap();
        let op = GoogleOperator::new(&c, 0.85).unwrap();
        let gv = op.apply(&[1.0, 0.0]).unwrap();
        assert!((gv[0] - 0.075).abs() < 1e-15);
        assert!((gv[1] - 0.925).abs() < 1e-15);
        assert!(op.apply(&[f64::NAN, 0.0]).is_err());
        assert!(GoogleOperator::new(&c, 1.0).is_err());
        assert!(GoogleOperator::new(&c, 0.0).is_err());
    }

    #[test]
    fn google_star_matches_dense() {
        // Node 0 points at 1 and 2; both leaves are dangling.
        let g = DirectedGraph::from_edges(3, [(0, 1), (0, 2)], None).unwrap();
        let alpha = 0.85;
        let dense = [
            [0.05, 1.0 / 3.0, 1.0 / 3.0],
            [0.475, 1.0 / 3.0, 1.0 / 3.0],
            [0.475, 1.0 / 3.0, 1.0 / 3.0],
        ];
        let v = [0.2, 0.3, 0.5];
        let got = GoogleOperator::new(&g, alpha).unwrap().apply(&v).unwrap();
        for i in 0..3 {
            let want: f64 = (0..3).map(|j| dense[i][j] * v[j]).sum();
            assert!((got[i] - want).abs() <= 1e-15);
        }
    }

    #[test]
    fn transpose_is_adjoint() {
        let g = random_graph(40, 0.1, 3);
        let op = GoogleOperator::new(&g, 0.85).unwrap();
        let n = g.node_count();
        let u: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let v: Vec<f64> = (0..n).map(|i| (i as f64 * 0.11).cos()).collect();
        let mut gv = vec![0.0; n];
        let mut gtu = vec![0.0; n];
        op.apply_into(&v, &mut gv);
        op.apply_transpose_into(&u, &mut gtu);
        let lhs: f64 = u.iter().zip(&gv).map(|(a, b)| a * b).sum();
        let rhs: f64 = gtu.iter().zip(&v).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn parallel_product_matches_sequential() {
        let n = PARALLEL_THRESHOLD + 100;
        let edges: Vec<_> = (0..n)
            .flat_map(|j| [(j, (j * 7 + 1) % n), (j, (j * 13 + 5) % n)])
            .collect();
        let g = DirectedGraph::from_edges(n, edges.into_iter().filter(|&(s, _)| s % 17 != 0), None)
            .unwrap();
        let v = vec![1.0 / n as f64; n];
        let reference = apply_transition(&g, &v).unwrap();
        let op = GoogleOperator::new(&g, 0.85).unwrap();
        let got = op.apply(&v).unwrap();
        for i in 0..n {
            let want = 0.85 * reference[i] + 0.15 / n as f64;
            assert!((got[i] - want).abs() <= 1e-13);
        }
    }

    #[test]
    fn subset_validation() {
        let g = random_graph(5, 0.5, 1);
        assert!(SubsetSelection::from_indices(&g, &[]).is_err());
        assert!(SubsetSelection::from_indices(&g, &[0, 1, 2, 3, 4]).is_err());
        assert!(SubsetSelection::from_indices(&g, &[0, 0]).is_err());
        assert!(SubsetSelection::from_indices(&g, &[9]).is_err());
        let s = SubsetSelection::parse("3\n# c\n1\n", &g).unwrap();
        assert_eq!(s.indices(), vec![3, 1]);
        assert_eq!(s.labels(), &["3".to_string(), "1".to_string()]);
    }

    proptest! {
        #[test]
        fn google_preserves_probability(seed in 0u64..1000, n in 1usize..40) {
            let g = random_graph(n.max(2), 0.15, seed);
            let n = g.node_count();
            let op = GoogleOperator::new(&g, 0.85).unwrap();
            let raw: Vec<f64> = (0..n).map(|i| ((seed as usize + i * 17) % 13) as f64 + 0.5).collect();
            let sum: f64 = raw.iter().sum();
            let v: Vec<f64> = raw.iter().map(|x| x / sum).collect();
            let gv = op.apply(&v).unwrap();
            prop_assert!(gv.iter().all(|&x| x >= 0.0));
            prop_assert!((gv.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            let sv = apply_transition(&g, &v).unwrap();
            prop_assert!((sv.iter().sum::<f64>() - 1.0).abs() <= 1e-14);
        }
    }
}
