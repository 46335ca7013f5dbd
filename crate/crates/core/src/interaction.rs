//! Friends/followers extraction from reduced matrices and the recursive
//! friend-of-friend (follower-of-follower) interaction graphs built from them.
//!
//! Friends of `j` are the largest off-diagonal entries of column `j`
//! (strongest outgoing transitions); followers are the largest entries of row
//! `j`. Ties go to the member with the smaller local PageRank index, passed
//! in as `tie_rank` (any array where smaller means preferred). Negative
//! entries, which only occur in the hidden-link component, are never
//! selected.

use std::collections::{BTreeMap, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Friends,
    Followers,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Friends => "friends",
            Mode::Followers => "followers",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "friends" => Ok(Mode::Friends),
            "followers" => Ok(Mode::Followers),
            other => Err(Error::InvalidParameter(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which reduced matrix the lists are read from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceMatrix {
    Gr,
    Gqrnd,
    Grr,
}

impl SourceMatrix {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceMatrix::Gr => "gr",
            SourceMatrix::Gqrnd => "gqrnd",
            SourceMatrix::Grr => "grr",
        }
    }
}

impl FromStr for SourceMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gr" => Ok(SourceMatrix::Gr),
            "gqrnd" => Ok(SourceMatrix::Gqrnd),
            "grr" => Ok(SourceMatrix::Grr),
            other => Err(Error::InvalidParameter(format!(
                "unknown source matrix `{other}`"
            ))),
        }
    }
}

impl fmt::Display for SourceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_args(m: &SquareMatrix, j: usize, k: usize, tie_rank: &[usize]) -> Result<()> {
    let n = m.dim();
    if tie_rank.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: tie_rank.len(),
        });
    }
    if j >= n {
        return Err(Error::InvalidParameter(format!(
            "index {j} out of range for {n} members"
        )));
    }
    if k == 0 || k + 1 > n {
        return Err(Error::InvalidParameter(format!(
            "k = {k} outside [1, {}]",
            n.saturating_sub(1)
        )));
    }
    Ok(())
}

fn top_of(
    values: impl Iterator<Item = (usize, f64)>,
    k: usize,
    tie_rank: &[usize],
) -> Vec<(usize, f64)> {
    let mut candidates: Vec<(usize, f64)> = values.filter(|&(_, v)| v >= 0.0).collect();
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(tie_rank[a.0].cmp(&tie_rank[b.0])));
    candidates.truncate(k);
    candidates
}

/// The `k` largest off-diagonal entries of column `j`, descending.
pub fn top_friends(
    m: &SquareMatrix,
    j: usize,
    k: usize,
    tie_rank: &[usize],
) -> Result<Vec<(usize, f64)>> {
    check_args(m, j, k, tie_rank)?;
    Ok(top_of(
        (0..m.dim()).filter(|&i| i != j).map(|i| (i, m[(i, j)])),
        k,
        tie_rank,
    ))
}

/// The `k` largest off-diagonal entries of row `j`, descending.
pub fn top_followers(
    m: &SquareMatrix,
    j: usize,
    k: usize,
    tie_rank: &[usize],
) -> Result<Vec<(usize, f64)>> {
    check_args(m, j, k, tie_rank)?;
    Ok(top_of(
        (0..m.dim()).filter(|&i| i != j).map(|i| (i, m[(j, i)])),
        k,
        tie_rank,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeLevel {
    /// Top-k edge of a seed node.
    Seed,
    /// Added while closing the graph.
    Derived,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InteractionEdge {
    pub from: usize,
    pub to: usize,
    pub level: EdgeLevel,
    pub value: f64,
}

/// Directed friends (or followers) graph over subset positions. In friends
/// mode an edge `a → b` means `b` is a friend of `a`; in followers mode it
/// means `a` follows `b`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InteractionGraph {
    pub mode: Mode,
    pub k: usize,
    pub source: Option<SourceMatrix>,
    pub seeds: Vec<usize>,
    /// Members in the order they joined the graph.
    pub nodes: Vec<usize>,
    pub edges: Vec<InteractionEdge>,
    #[serde(skip)]
    expanded: Vec<bool>,
}

/// Seeds with their top-k edges, then every newly reached member with its
/// own, until no new edge appears. Each expansion round visits members in
/// ascending `tie_rank`.
pub fn build_interaction_graph(
    m: &SquareMatrix,
    seeds: &[usize],
    k: usize,
    mode: Mode,
    tie_rank: &[usize],
) -> Result<InteractionGraph> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("no seed members".into()));
    }
    let n = m.dim();
    for &s in seeds {
        check_args(m, s, k, tie_rank)?;
    }
    let mut graph = InteractionGraph {
        mode,
        k,
        source: None,
        seeds: Vec::new(),
        nodes: Vec::new(),
        edges: Vec::new(),
        expanded: vec![false; n],
    };
    for &s in seeds {
        if !graph.seeds.contains(&s) {
            graph.seeds.push(s);
            graph.nodes.push(s);
        }
    }
    let frontier = graph.seeds.clone();
    graph.expand_until_closed(m, frontier, EdgeLevel::Seed, tie_rank)?;
    Ok(graph)
}

impl InteractionGraph {
    pub fn with_source(mut self, source: SourceMatrix) -> Self {
        self.source = Some(source);
        self
    }

    fn neighbours(
        &self,
        m: &SquareMatrix,
        node: usize,
        tie_rank: &[usize],
    ) -> Result<Vec<(usize, f64)>> {
        match self.mode {
            Mode::Friends => top_friends(m, node, self.k, tie_rank),
            Mode::Followers => top_followers(m, node, self.k, tie_rank),
        }
    }

    fn expand_until_closed(
        &mut self,
        m: &SquareMatrix,
        mut frontier: Vec<usize>,
        mut level: EdgeLevel,
        tie_rank: &[usize],
    ) -> Result<usize> {
        let mut present: HashSet<(usize, usize)> =
            self.edges.iter().map(|e| (e.from, e.to)).collect();
        let mut in_graph = vec![false; m.dim()];
        for &v in &self.nodes {
            in_graph[v] = true;
        }
        let mut added = 0;
        while !frontier.is_empty() {
            frontier.sort_by_key(|&v| (tie_rank[v], v));
            let mut reached = Vec::new();
            for node in frontier {
                self.expanded[node] = true;
                for (other, value) in self.neighbours(m, node, tie_rank)? {
                    let (from, to) = match self.mode {
                        Mode::Friends => (node, other),
                        Mode::Followers => (other, node),
                    };
                    if present.insert((from, to)) {
                        self.edges.push(InteractionEdge {
                            from,
                            to,
                            level,
                            value,
                        });
                        added += 1;
                    }
                    if !in_graph[other] {
                        in_graph[other] = true;
                        self.nodes.push(other);
                        reached.push(other);
                    }
                }
            }
            frontier = reached.into_iter().filter(|&v| !self.expanded[v]).collect();
            level = EdgeLevel::Derived;
        }
        Ok(added)
    }

    /// Re-expands every member currently in the graph and closes again.
    /// Returns the number of edges added; zero on a closed graph.
    pub fn close(&mut self, m: &SquareMatrix, tie_rank: &[usize]) -> Result<usize> {
        if self.expanded.len() != m.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.expanded.len(),
                got: m.dim(),
            });
        }
        let frontier = self.nodes.clone();
        self.expand_until_closed(m, frontier, EdgeLevel::Derived, tie_rank)
    }

    /// Members reached from no seed along the expansion direction.
    pub fn unreachable(&self) -> Vec<usize> {
        let n = self.expanded.len();
        let mut adjacency = vec![Vec::new(); n];
        for e in &self.edges {
            match self.mode {
                Mode::Friends => adjacency[e.from].push(e.to),
                Mode::Followers => adjacency[e.to].push(e.from),
            }
        }
        let mut seen = vec![false; n];
        let mut stack = self.seeds.clone();
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut seen[v], true) {
                continue;
            }
            stack.extend(adjacency[v].iter().copied().filter(|&w| !seen[w]));
        }
        self.nodes.iter().copied().filter(|&v| !seen[v]).collect()
    }

    /// Graphviz digraph: seed edges bold black, derived edges red, nodes
    /// filled by group. `groups[i]` is the group of member `i`, if known.
    pub fn to_dot(&self, labels: &[String], groups: &[Option<String>]) -> String {
        let mut palette: BTreeMap<&str, &str> = BTreeMap::new();
        let mut names: Vec<&str> = groups.iter().flatten().map(String::as_str).collect();
        names.sort_unstable();
        names.dedup();
        for (i, name) in names.into_iter().enumerate() {
            palette.insert(name, GROUP_COLORS[i % GROUP_COLORS.len()]);
        }

        let name = match self.source {
            Some(s) => format!("{}_{}", self.mode, s),
            None => self.mode.to_string(),
        };
        let mut out = String::new();
        writeln!(out, "digraph {name} {{").unwrap();
        writeln!(out, "  node [shape=ellipse, style=filled];").unwrap();
        for &v in &self.nodes {
            let group = groups.get(v).and_then(|g| g.as_deref());
            let color = group.map_or(NEUTRAL_COLOR, |g| palette[g]);
            let shape = if self.seeds.contains(&v) {
                ", penwidth=2"
            } else {
                ""
            };
            writeln!(
                out,
                "  n{v} [label=\"{}\", group=\"{}\", fillcolor=\"{color}\"{shape}];",
                escape(&labels[v]),
                escape(group.unwrap_or(NEUTRAL_GROUP)),
            )
            .unwrap();
        }
        for e in &self.edges {
            let style = match e.level {
                EdgeLevel::Seed => "style=bold, color=black",
                EdgeLevel::Derived => "color=red",
            };
            writeln!(
                out,
                "  n{} -> n{} [{style}, value=\"{:.16e}\"];",
                e.from, e.to, e.value
            )
            .unwrap();
        }
        out.push_str("}\n");
        out
    }
}

pub const NEUTRAL_GROUP: &str = "none";
const NEUTRAL_COLOR: &str = "#d9d9d9";
const GROUP_COLORS: [&str; 8] = [
    "#ff9f40", "#4f81bd", "#e0474c", "#5cb85c", "#f5d547", "#9b59b6", "#f29ac2", "#8c8c8c",
];

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Members present in at least `m` of the given lists, with their counts,
/// by decreasing count then ascending member.
pub fn cross_source_consensus(lists: &[Vec<usize>], m: usize) -> Result<Vec<(usize, usize)>> {
    if lists.is_empty() {
        return Err(Error::InvalidParameter("no lists to compare".into()));
    }
    if m == 0 || m > lists.len() {
        return Err(Error::InvalidParameter(format!(
            "threshold {m} outside [1, {}]",
            lists.len()
        )));
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for list in lists {
        let distinct: HashSet<usize> = list.iter().copied().collect();
        for member in distinct {
            *counts.entry(member).or_default() += 1;
        }
    }
    let mut out: Vec<(usize, usize)> = counts.into_iter().filter(|&(_, c)| c >= m).collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(out)
}
