//! Run configuration: built-in defaults, then a flat `key = value` file,
//! then command-line flags.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use crate::output::Sci;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub alpha: f64,
    pub pagerank_tol: f64,
    pub pagerank_max_iter: usize,
    pub deflation_tol: f64,
    pub deflation_max_iter: usize,
    pub series_tol: f64,
    pub series_l_max: usize,
    pub top_k: usize,
    pub seeds: Vec<String>,
    pub surfer_steps: u64,
    pub surfer_seed: u64,
    pub oracle_cap: usize,
    pub edges: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub subset: Option<PathBuf>,
    pub groups: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: greduce::DEFAULT_ALPHA,
            pagerank_tol: 1e-12,
            pagerank_max_iter: 1000,
            deflation_tol: 1e-12,
            deflation_max_iter: 10_000,
            series_tol: 1e-12,
            series_l_max: 10_000,
            top_k: 4,
            seeds: Vec::new(),
            surfer_steps: 10_000_000,
            surfer_seed: 1,
            oracle_cap: greduce::oracle::DEFAULT_CAP,
            edges: None,
            labels: None,
            subset: None,
            groups: None,
            out: None,
        }
    }
}

/// Every field optional; the same shape serves the flags and the file.
#[derive(Args, Clone, Debug, Default)]
pub struct Overrides {
    /// Flat `key = value` config file; its relative paths resolve against its directory.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub pagerank_tol: Option<f64>,
    #[arg(long)]
    pub pagerank_max_iter: Option<usize>,
    #[arg(long)]
    pub deflation_tol: Option<f64>,
    #[arg(long)]
    pub deflation_max_iter: Option<usize>,
    #[arg(long)]
    pub series_tol: Option<f64>,
    #[arg(long)]
    pub series_l_max: Option<usize>,
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Comma-separated seed labels (or ids).
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<String>>,
    #[arg(long)]
    pub surfer_steps: Option<u64>,
    #[arg(long)]
    pub surfer_seed: Option<u64>,
    #[arg(long)]
    pub oracle_cap: Option<usize>,
    /// Edge list, one `source target` pair per line.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// `id<TAB>label` table; without it edge tokens are integer ids.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Subset members, one label or id per line.
    #[arg(long)]
    pub subset: Option<PathBuf>,
    /// `label<TAB>group` lines for node colouring.
    #[arg(long)]
    pub groups: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Overrides {
    fn parse_file(path: &Path) -> anyhow::Result<Overrides> {
        let text = fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut o = Overrides::default();
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = || format!("{}:{}", path.display(), lineno + 1);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("{}: expected `key = value`", at())))?;
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            if !seen.insert(key.clone()) {
                return Err(bad(format!("{}: duplicate key `{key}`", at())));
            }
            let path_value = || Some(base.join(value));
            fn num<T: std::str::FromStr>(
                key: &str,
                value: &str,
                at: String,
            ) -> anyhow::Result<Option<T>> {
                value
                    .parse()
                    .map(Some)
                    .map_err(|_| bad(format!("{at}: invalid value `{value}` for `{key}`")))
            }
            match key.as_str() {
                "alpha" => o.alpha = num(&key, value, at())?,
                "pagerank_tol" => o.pagerank_tol = num(&key, value, at())?,
                "pagerank_max_iter" => o.pagerank_max_iter = num(&key, value, at())?,
                "deflation_tol" => o.deflation_tol = num(&key, value, at())?,
                "deflation_max_iter" => o.deflation_max_iter = num(&key, value, at())?,
                "series_tol" => o.series_tol = num(&key, value, at())?,
                "series_l_max" => o.series_l_max = num(&key, value, at())?,
                "top_k" => o.top_k = num(&key, value, at())?,
                "surfer_steps" => o.surfer_steps = num(&key, value, at())?,
                "surfer_seed" => o.surfer_seed = num(&key, value, at())?,
                "oracle_cap" => o.oracle_cap = num(&key, value, at())?,
                "seeds" => {
                    o.seeds = Some(
                        value
                            .split(',')
                            .map(|s| s.trim().to_string())
                            .filter(|s| !s.is_empty())
                            .collect(),
                    )
                }
                "edges" => o.edges = path_value(),
                "labels" => o.labels = path_value(),
                "subset" => o.subset = path_value(),
                "groups" => o.groups = path_value(),
                "out" => o.out = path_value(),
                _ => return Err(bad(format!("{}: unknown key `{key}`", at()))),
            }
        }
        Ok(o)
    }

    fn apply(self, c: &mut RunConfig) {
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { c.$field = v; } )* };
        }
        take!(
            alpha,
            pagerank_tol,
            pagerank_max_iter,
            deflation_tol,
            deflation_max_iter,
            series_tol,
            series_l_max,
            top_k,
            seeds,
            surfer_steps,
            surfer_seed,
            oracle_cap
        );
        macro_rules! take_path {
            ($($field:ident),*) => { $( if self.$field.is_some() { c.$field = self.$field; } )* };
        }
        take_path!(edges, labels, subset, groups, out);
    }
}

impl RunConfig {
    /// Defaults, overlaid by the config file named in `flags` (if any), then by `flags`.
    pub fn resolve(flags: Overrides) -> anyhow::Result<RunConfig> {
        let mut config = RunConfig::default();
        if let Some(path) = &flags.config {
            Overrides::parse_file(path)?.apply(&mut config);
        }
        flags.apply(&mut config);
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(bad(format!("alpha = {} must lie in (0, 1)", self.alpha)));
        }
        for (name, tol) in [
            ("pagerank_tol", self.pagerank_tol),
            ("deflation_tol", self.deflation_tol),
            ("series_tol", self.series_tol),
        ] {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(bad(format!("{name} = {tol} must be positive")));
            }
        }
        for (name, n) in [
            ("pagerank_max_iter", self.pagerank_max_iter),
            ("deflation_max_iter", self.deflation_max_iter),
            ("top_k", self.top_k),
        ] {
            if n == 0 {
                return Err(bad(format!("{name} must be at least 1")));
            }
        }
        if self.surfer_steps == 0 {
            return Err(bad("surfer_steps must be at least 1"));
        }
        Ok(())
    }

    pub fn edges(&self) -> anyhow::Result<&Path> {
        self.edges
            .as_deref()
            .ok_or_else(|| bad("no edge list given (--edges)"))
    }

    /// Output directory; the working directory unless configured.
    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn subset(&self) -> anyhow::Result<&Path> {
        self.subset
            .as_deref()
            .ok_or_else(|| bad("this command needs a subset (--subset)"))
    }

    /// The resolved configuration as written into output metadata. The output
    /// directory is left out so relocated runs stay byte-identical.
    pub fn echo(&self) -> ConfigEcho {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        ConfigEcho {
            alpha: Sci(self.alpha),
            pagerank_tol: Sci(self.pagerank_tol),
            pagerank_max_iter: self.pagerank_max_iter,
            deflation_tol: Sci(self.deflation_tol),
            deflation_max_iter: self.deflation_max_iter,
            series_tol: Sci(self.series_tol),
            series_l_max: self.series_l_max,
            top_k: self.top_k,
            seeds: self.seeds.clone(),
            edges: path(&self.edges),
            labels: path(&self.labels),
            subset: path(&self.subset),
            groups: path(&self.groups),
        }
    }
}

#[derive(Serialize)]
pub struct ConfigEcho {
    alpha: Sci,
    pagerank_tol: Sci,
    pagerank_max_iter: usize,
    deflation_tol: Sci,
    deflation_max_iter: usize,
    series_tol: Sci,
    series_l_max: usize,
    top_k: usize,
    seeds: Vec<String>,
    edges: Option<String>,
    labels: Option<String>,
    subset: Option<String>,
    groups: Option<String>,
}
