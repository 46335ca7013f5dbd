//! Dense brute-force validation of the sparse pipeline on small networks.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use greduce::oracle::{
    dense_google, dense_pagerank, dense_reduced, dense_series_reduced, random_surfer,
    raw_series_terms, DenseMatrix,
};
use greduce::{reduced_pagerank_residual, SquareMatrix};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::commands::{closure_error, decompose, Network};
use crate::config::RunConfig;
use crate::output::{num, read_matrix, OutDir};

/// Raised after the report is printed when any check failed.
#[derive(Debug)]
pub struct ChecksFailed(pub usize);

impl fmt::Display for ChecksFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} oracle check(s) failed", self.0)
    }
}

impl std::error::Error for ChecksFailed {}

struct Report {
    lines: Vec<String>,
    failures: usize,
}

impl Report {
    fn check(&mut self, name: &str, measured: f64, bound: f64) {
        let pass = measured <= bound;
        if !pass {
            self.failures += 1;
        }
        let status = if pass { "PASS" } else { "FAIL" };
        self.lines.push(format!(
            "{status} {name:<24} measured={} bound={}",
            num(measured),
            num(bound)
        ));
    }

    fn info(&mut self, name: &str, value: impl fmt::Display) {
        self.lines.push(format!("INFO {name:<24} {value}"));
    }
}

fn to_square(m: &DenseMatrix) -> anyhow::Result<SquareMatrix> {
    Ok(SquareMatrix::from_rows(&m.to_rows())?)
}

fn max_column_defect(sums: &[f64]) -> f64 {
    sums.iter().fold(0.0, |m, s| m.max((s - 1.0).abs()))
}

/// Largest 2×2 minor relative to the squared largest entry.
fn rank_one_defect(m: &SquareMatrix) -> f64 {
    let n = m.dim();
    let scale = m.max_abs().powi(2);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for k in i + 1..n {
            for j in 0..n {
                for l in j + 1..n {
                    worst = worst.max((m[(i, j)] * m[(k, l)] - m[(i, l)] * m[(k, j)]).abs());
                }
            }
        }
    }
    worst / scale
}

pub fn cmd_oracle(config: &RunConfig, reference: Option<&Path>) -> anyhow::Result<()> {
    let net = Network::load(config)?;
    let subset = net.require_subset(config)?;
    let g = &net.graph;
    let members = subset.indices();
    let dense = dense_google(g, config.alpha, config.oracle_cap)?;
    let exact = to_square(&dense_reduced(&dense, &members)?)?;
    let (p, d) = decompose(config, g, subset)?;

    let mut r = Report {
        lines: Vec::new(),
        failures: 0,
    };
    r.info(
        "network",
        format!(
            "N={} N_r={} edges={}",
            g.node_count(),
            subset.len(),
            g.edge_count()
        ),
    );
    r.info("lambda_c", num(d.lambda_c));

    r.check("deflated_vs_dense", d.gr.max_abs_diff(&exact), 1e-10);
    r.check(
        "dense_column_sums",
        max_column_defect(&exact.column_sums()),
        1e-12,
    );
    r.check(
        "gr_column_sums",
        max_column_defect(&d.gr.column_sums()),
        1e-10,
    );
    r.check("gr_negative_entries", (-d.gr.min_entry()).max(0.0), 1e-12);
    r.check("closure", closure_error(&d)?, 1e-13);
    let split = SquareMatrix::sum_of(&[&d.gqrd, &d.gqrnd])?.max_abs_diff(&d.gqr);
    r.check("gqr_split", split, 0.0);
    r.check("weights_sum", (d.weights.total() - 1.0).abs(), 1e-12);
    r.check("gpr_rank_one", rank_one_defect(&d.gpr), 1e-12);
    r.check(
        "eigen_identity",
        reduced_pagerank_residual(&d, &p, subset)?,
        1e-8,
    );

    // The raw series must creep towards the direct inverse.
    let mut previous = f64::INFINITY;
    let mut increases = 0;
    for l_max in [0, 1, 2, 4, 8, 16, 32, 64] {
        let err = to_square(&dense_series_reduced(&dense, &members, l_max)?)?.max_abs_diff(&exact);
        if err >= previous && previous > 1e-13 {
            increases += 1;
        }
        previous = err;
    }
    r.check("raw_series_monotone", increases as f64, 0.0);
    match raw_series_terms(&dense, &members, config.series_tol, config.series_l_max)? {
        Some(terms) => {
            r.info(
                "series_terms",
                format!("raw={terms} deflated={}", d.series_terms_used),
            );
            let limit = to_square(&dense_series_reduced(&dense, &members, terms - 1)?)?;
            r.check("raw_series_limit", limit.max_abs_diff(&exact), 1e-8);
        }
        None => {
            r.info(
                "series_terms",
                format!(
                    "raw>{} deflated={}",
                    config.series_l_max + 1,
                    d.series_terms_used
                ),
            );
            r.check("raw_series_limit", f64::INFINITY, 1e-8);
        }
    }

    let dense_p = dense_pagerank(&dense)?;
    let p_err = p
        .probabilities
        .iter()
        .zip(&dense_p)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    r.check("pagerank_vs_dense", p_err, 1e-10);

    // One z-test per node; Bonferroni keeps the family-wise false alarm rate at 1e-3.
    let est = random_surfer(g, config.alpha, config.surfer_steps, config.surfer_seed);
    let n = g.node_count() as f64;
    let z_bound = Normal::standard()
        .inverse_cdf(1.0 - 1e-3 / (2.0 * n))
        .max(3.0);
    let z = p
        .probabilities
        .iter()
        .zip(&est.probabilities)
        .map(|(&exact, &seen)| {
            let se = est.binomial_error(exact);
            if se > 0.0 {
                (exact - seen).abs() / se
            } else if seen == exact {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max);
    r.info("surfer", format!("steps={} seed={}", est.steps, est.seed));
    r.check("surfer_max_z", z, z_bound);

    if let Some(path) = reference {
        let given = read_matrix(path, subset.labels())?;
        if given.dim() != exact.dim() {
            return Err(greduce::Error::DimensionMismatch {
                expected: exact.dim(),
                got: given.dim(),
            }
            .into());
        }
        r.info("reference", path.display());
        r.check("reference_vs_dense", given.max_abs_diff(&exact), 1e-10);
    }

    let mut text = String::new();
    for line in &r.lines {
        writeln!(text, "{line}").unwrap();
    }
    print!("{text}");
    if let Some(dir) = &config.out {
        let out = OutDir::create(dir)?;
        out.text("oracle_report.txt", &text)?;
        out.matrix("dense_gr.csv", subset.labels(), &exact)?;
    }
    if r.failures > 0 {
        return Err(ChecksFailed(r.failures).into());
    }
    Ok(())
}
