use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use greduce::SquareMatrix;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// An `f64` serialized as a JSON number with 17 significant digits.
#[derive(Clone, Copy, Debug)]
pub struct Sci(pub f64);

impl Serialize for Sci {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(num(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

pub fn sci_vec(xs: &[f64]) -> Vec<Sci> {
    xs.iter().copied().map(Sci).collect()
}

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> anyhow::Result<OutDir> {
        fs::create_dir_all(path)
            .with_context(|| format!("creating output directory {}", path.display()))?;
        Ok(OutDir(path.to_path_buf()))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn csv(
        &self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> anyhow::Result<()> {
        let path = self.path(name);
        let mut w =
            csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()
            .with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
        Ok(())
    }

    /// Row-major matrix with the subset labels as header.
    pub fn matrix(&self, name: &str, labels: &[String], m: &SquareMatrix) -> anyhow::Result<()> {
        let header: Vec<&str> = labels.iter().map(String::as_str).collect();
        self.csv(
            name,
            &header,
            (0..m.dim()).map(|i| m.row(i).iter().copied().map(num).collect()),
        )
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.text(name, &text)
    }

    pub fn text(&self, name: &str, text: &str) -> anyhow::Result<()> {
        let path = self.path(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
        Ok(())
    }
}

/// Reads a matrix written by [`OutDir::matrix`], checking its header.
pub fn read_matrix(path: &Path, labels: &[String]) -> anyhow::Result<SquareMatrix> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != labels {
        return Err(greduce::Error::InvalidParameter(format!(
            "{}: header does not match the subset labels",
            path.display()
        ))
        .into());
    }
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|field| {
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| greduce::Error::Parse {
                        line: i + 2,
                        message: format!("{}: invalid number `{field}`", path.display()),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(SquareMatrix::from_rows(&rows)?)
}
