use std::collections::HashMap;
use std::fs;
use std::path::Path;

use anyhow::Context;
use greduce::{
    build_interaction_graph, cheirank, local_index, local_indices, nondominated_front, pagerank,
    reduce, reduced_pagerank_residual, top_followers, top_friends, DirectedGraph, Error,
    GoogleOperator, LabelTable, Mode, PowerConfig, RankVector, ReduceConfig, ReducedDecomposition,
    SeriesConfig, SourceMatrix, SquareMatrix, SubsetSelection,
};
use serde::Serialize;

use crate::config::{ConfigEcho, RunConfig};
use crate::output::{num, sci_vec, OutDir, Sci};

pub fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub struct Network {
    pub graph: DirectedGraph,
    pub subset: Option<SubsetSelection>,
}

impl Network {
    pub fn load(config: &RunConfig) -> anyhow::Result<Network> {
        let labels = match &config.labels {
            Some(path) => Some(
                LabelTable::parse(&read_text(path)?)
                    .with_context(|| format!("in {}", path.display()))?,
            ),
            None => None,
        };
        let edges = config.edges()?;
        let graph = greduce::parse_edge_list(&read_text(edges)?, labels)
            .with_context(|| format!("in {}", edges.display()))?;
        log::info!(
            "{}: {} nodes, {} edges, {} dangling",
            edges.display(),
            graph.node_count(),
            graph.edge_count(),
            graph.dangling().len()
        );
        let subset = match &config.subset {
            Some(path) => Some(
                SubsetSelection::parse(&read_text(path)?, &graph)
                    .with_context(|| format!("in {}", path.display()))?,
            ),
            None => None,
        };
        Ok(Network { graph, subset })
    }

    pub fn require_subset(&self, config: &RunConfig) -> anyhow::Result<&SubsetSelection> {
        config.subset()?;
        Ok(self.subset.as_ref().expect("subset loaded with its path"))
    }
}

pub fn power_config(config: &RunConfig) -> PowerConfig {
    PowerConfig {
        tol: config.pagerank_tol,
        max_iter: config.pagerank_max_iter,
    }
}

pub fn reduce_config(config: &RunConfig) -> ReduceConfig {
    ReduceConfig {
        deflation: PowerConfig {
            tol: config.deflation_tol,
            max_iter: config.deflation_max_iter,
        },
        series: SeriesConfig {
            tol: config.series_tol,
            l_max: config.series_l_max,
        },
    }
}

fn log_rank(r: &RankVector) {
    log::info!(
        "{:?} converged in {} iterations, residual {:e}",
        r.kind,
        r.iterations_used,
        r.final_residual
    );
}

pub fn decompose(
    config: &RunConfig,
    graph: &DirectedGraph,
    subset: &SubsetSelection,
) -> anyhow::Result<(RankVector, ReducedDecomposition)> {
    let op = GoogleOperator::new(graph, config.alpha)?;
    let p = pagerank(&op, power_config(config))?;
    log_rank(&p);
    let decomp = reduce(&op, subset, reduce_config(config))?;
    log::info!(
        "lambda_c = {:.16e}, series terms {}, deflation iterations {}/{}",
        decomp.lambda_c,
        decomp.series_terms_used,
        decomp.deflation.iterations_right,
        decomp.deflation.iterations_left
    );
    if decomp.series_truncated {
        log::warn!(
            "hidden-link series stopped at l_max = {} before reaching tolerance",
            config.series_l_max
        );
    }
    Ok((p, decomp))
}

pub fn cmd_rank(config: &RunConfig) -> anyhow::Result<()> {
    let net = Network::load(config)?;
    let g = &net.graph;
    let op = GoogleOperator::new(g, config.alpha)?;
    let p = pagerank(&op, power_config(config))?;
    log_rank(&p);
    let c = cheirank(g, config.alpha, power_config(config))?;
    log_rank(&c);

    let out = OutDir::create(&config.out_dir())?;
    let header = ["node_id", "label", "probability", "global_rank"];
    for (name, r) in [("pagerank.csv", &p), ("cheirank.csv", &c)] {
        let ranks = r.global_ranks();
        out.csv(
            name,
            &header,
            (0..g.node_count()).map(|i| {
                vec![
                    i.to_string(),
                    g.label(i).to_string(),
                    num(r.probabilities[i]),
                    ranks[i].to_string(),
                ]
            }),
        )?;
    }

    if let Some(subset) = &net.subset {
        let idx = local_indices(&p, &c, subset)?;
        let members = subset.indices();
        let row = |m: usize| {
            vec![
                members[m].to_string(),
                subset.labels()[m].clone(),
                idx.k[m].to_string(),
                idx.k_star[m].to_string(),
            ]
        };
        let header = ["node_id", "label", "K", "K_star"];
        out.csv("local_indices.csv", &header, (0..subset.len()).map(row))?;
        out.csv(
            "nondominated.csv",
            &header,
            nondominated_front(&idx).into_iter().map(row),
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct WeightsOut {
    rr: Sci,
    pr: Sci,
    qr: Sci,
    total: Sci,
}

#[derive(Serialize)]
struct Residuals {
    pagerank: Sci,
    reduced_pagerank: Sci,
    deflation_right: Sci,
    deflation_left: Sci,
    closure: Sci,
}

#[derive(Serialize)]
struct Iterations {
    pagerank: usize,
    deflation_right: usize,
    deflation_left: usize,
}

#[derive(Serialize)]
struct ReduceSummary<'a> {
    nodes: usize,
    edges: usize,
    subset: &'a [String],
    lambda_c: Sci,
    weights: WeightsOut,
    negative_weight: Sci,
    series_terms_used: usize,
    series_truncated: bool,
    residuals: Residuals,
    iterations: Iterations,
    projector_alignment: Vec<Sci>,
    config: ConfigEcho,
}

pub fn closure_error(d: &ReducedDecomposition) -> anyhow::Result<f64> {
    Ok(SquareMatrix::sum_of(&[&d.grr, &d.gpr, &d.gqr])?.max_abs_diff(&d.gr))
}

pub fn cmd_reduce(config: &RunConfig) -> anyhow::Result<()> {
    let net = Network::load(config)?;
    let subset = net.require_subset(config)?;
    let (p, d) = decompose(config, &net.graph, subset)?;
    let residual = reduced_pagerank_residual(&d, &p, subset)?;
    let p_r: Vec<f64> = subset
        .indices()
        .into_iter()
        .map(|m| p.probabilities[m])
        .collect();

    let out = OutDir::create(&config.out_dir())?;
    let labels = subset.labels();
    for (name, m) in [
        ("gr.csv", &d.gr),
        ("grr.csv", &d.grr),
        ("gpr.csv", &d.gpr),
        ("gqr.csv", &d.gqr),
        ("gqrd.csv", &d.gqrd),
        ("gqrnd.csv", &d.gqrnd),
    ] {
        out.matrix(name, labels, m)?;
    }
    let w = d.weights;
    let summary = ReduceSummary {
        nodes: net.graph.node_count(),
        edges: net.graph.edge_count(),
        subset: labels,
        lambda_c: Sci(d.lambda_c),
        weights: WeightsOut {
            rr: Sci(w.rr),
            pr: Sci(w.pr),
            qr: Sci(w.qr),
            total: Sci(w.total()),
        },
        negative_weight: Sci(d.negative_weight),
        series_terms_used: d.series_terms_used,
        series_truncated: d.series_truncated,
        residuals: Residuals {
            pagerank: Sci(p.final_residual),
            reduced_pagerank: Sci(residual),
            deflation_right: Sci(d.deflation.residual_right),
            deflation_left: Sci(d.deflation.residual_left),
            closure: Sci(closure_error(&d)?),
        },
        iterations: Iterations {
            pagerank: p.iterations_used,
            deflation_right: d.deflation.iterations_right,
            deflation_left: d.deflation.iterations_left,
        },
        projector_alignment: sci_vec(&d.projector_alignment(&p_r)),
        config: config.echo(),
    };
    out.json("summary.json", &summary)
}

/// Group of every subset member from a `label<TAB>group` file.
fn load_groups(
    path: &Path,
    graph: &DirectedGraph,
    subset: &SubsetSelection,
) -> anyhow::Result<Vec<Option<String>>> {
    let mut by_node: HashMap<usize, String> = HashMap::new();
    for (lineno, raw) in read_text(path)?.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (label, group) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: lineno + 1,
            message: format!("{}: expected `label<TAB>group`", path.display()),
        })?;
        match graph.labels().resolve(label.trim()) {
            Some(node) => {
                by_node.insert(node, group.trim().to_string());
            }
            None => log::warn!(
                "{}:{}: unknown label `{}` ignored",
                path.display(),
                lineno + 1,
                label.trim()
            ),
        }
    }
    let groups: Vec<Option<String>> = subset
        .indices()
        .iter()
        .map(|m| by_node.get(m).cloned())
        .collect();
    let missing: Vec<&str> = groups
        .iter()
        .zip(subset.labels())
        .filter(|(g, _)| g.is_none())
        .map(|(_, l)| l.as_str())
        .collect();
    if !missing.is_empty() {
        log::warn!(
            "no group for {}; using `{}`",
            missing.join(", "),
            greduce::interaction::NEUTRAL_GROUP
        );
    }
    Ok(groups)
}

/// Subset positions of the seed tokens.
pub fn resolve_seeds(
    seeds: &[String],
    graph: &DirectedGraph,
    subset: &SubsetSelection,
) -> anyhow::Result<Vec<usize>> {
    if seeds.is_empty() {
        return Err(crate::config::ConfigError("no seeds given (--seeds)".into()).into());
    }
    let members = subset.indices();
    seeds
        .iter()
        .map(|token| {
            let node = graph
                .labels()
                .resolve(token)
                .ok_or_else(|| Error::UnknownLabel(token.clone()))?;
            members.iter().position(|&m| m == node).ok_or_else(|| {
                Error::InvalidSubset(format!("seed `{token}` is not a subset member")).into()
            })
        })
        .collect()
}

#[derive(Serialize)]
struct NodeOut<'a> {
    id: usize,
    label: &'a str,
    group: &'a str,
    seed: bool,
}

#[derive(Serialize)]
struct EdgeOut<'a> {
    from: &'a str,
    to: &'a str,
    level: greduce::EdgeLevel,
    value: Sci,
}

#[derive(Serialize)]
struct FriendsOut<'a> {
    source: &'a str,
    mode: &'a str,
    k: usize,
    seeds: Vec<&'a str>,
    nodes: Vec<NodeOut<'a>>,
    edges: Vec<EdgeOut<'a>>,
    config: ConfigEcho,
}

pub fn select(d: &ReducedDecomposition, source: SourceMatrix) -> &SquareMatrix {
    match source {
        SourceMatrix::Gr => &d.gr,
        SourceMatrix::Gqrnd => &d.gqrnd,
        SourceMatrix::Grr => &d.grr,
    }
}

pub fn cmd_friends(config: &RunConfig, source: SourceMatrix, mode: Mode) -> anyhow::Result<()> {
    let net = Network::load(config)?;
    let subset = net.require_subset(config)?;
    let seeds = resolve_seeds(&config.seeds, &net.graph, subset)?;
    let groups = match &config.groups {
        Some(path) => load_groups(path, &net.graph, subset)?,
        None => vec![None; subset.len()],
    };
    let (p, d) = decompose(config, &net.graph, subset)?;
    let tie_rank = local_index(&p, subset)?;
    let m = select(&d, source);
    let graph =
        build_interaction_graph(m, &seeds, config.top_k, mode, &tie_rank)?.with_source(source);
    log::info!(
        "{} {mode} graph: {} nodes, {} edges",
        source,
        graph.nodes.len(),
        graph.edges.len()
    );

    let out = OutDir::create(&config.out_dir())?;
    let stem = format!("{source}_{mode}");
    let labels = subset.labels();
    let members = subset.indices();
    let mut rows = Vec::new();
    for &s in &graph.seeds {
        let list = match mode {
            Mode::Friends => top_friends(m, s, config.top_k, &tie_rank)?,
            Mode::Followers => top_followers(m, s, config.top_k, &tie_rank)?,
        };
        for (rank, (other, value)) in list.into_iter().enumerate() {
            rows.push(vec![
                members[s].to_string(),
                labels[s].clone(),
                (rank + 1).to_string(),
                members[other].to_string(),
                labels[other].clone(),
                num(value),
            ]);
        }
    }
    out.csv(
        &format!("{stem}.csv"),
        &[
            "seed_id",
            "seed_label",
            "rank",
            "member_id",
            "member_label",
            "value",
        ],
        rows,
    )?;
    out.text(&format!("{stem}.dot"), &graph.to_dot(labels, &groups))?;

    let neutral = greduce::interaction::NEUTRAL_GROUP;
    let json = FriendsOut {
        source: source.as_str(),
        mode: mode.as_str(),
        k: config.top_k,
        seeds: graph.seeds.iter().map(|&s| labels[s].as_str()).collect(),
        nodes: graph
            .nodes
            .iter()
            .map(|&v| NodeOut {
                id: members[v],
                label: &labels[v],
                group: groups[v].as_deref().unwrap_or(neutral),
                seed: graph.seeds.contains(&v),
            })
            .collect(),
        edges: graph
            .edges
            .iter()
            .map(|e| EdgeOut {
                from: &labels[e.from],
                to: &labels[e.to],
                level: e.level,
                value: Sci(e.value),
            })
            .collect(),
        config: config.echo(),
    };
    out.json(&format!("{stem}.json"), &json)
}
