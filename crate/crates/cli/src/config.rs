//! Flag sets shared by the command line and JSON config files.
//!
//! Every option is optional on both sides. A config file uses the long flag
//! names as keys with the same value syntax as the command line, for example
//! `{"algos": "am,bcd", "R": "1..5", "disable-clause": "off"}`. Flags given on
//! the command line win over the file.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use boolrule::learners::Algorithm;
use boolrule::rule_model::Form;
use boolrule::sweep::default_thetas;
use clap::Args;
use serde::de::DeserializeOwned;
use serde::Deserialize;

/// Fills every `None` field of `self` from `other`.
pub trait Merge {
    fn merge(self, other: Self) -> Self;
}

macro_rules! mergeable {
    ($ty:ident { $($field:ident),* $(,)? }) => {
        impl Merge for $ty {
            fn merge(self, other: Self) -> Self {
                Self { $($field: self.$field.or(other.$field)),* }
            }
        }
    };
}

pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SweepOpts {
    /// Input CSV with a header row
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Column schema JSON
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Comma-separated algorithms (scs, scn, tlp, bcd, am)
    #[arg(long)]
    pub algos: Option<String>,
    /// Clause counts: `1..5`, `1..=5` or a comma list
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub r: Option<String>,
    /// `default` or a comma-separated list of sparsity weights
    #[arg(long)]
    pub theta_grid: Option<String>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Allow clauses to select the always-true column: on or off
    #[arg(long)]
    pub disable_clause: Option<String>,
    /// Rule form: dnf or cnf
    #[arg(long)]
    pub form: Option<String>,
    /// Quantile thresholds per continuous feature
    #[arg(long)]
    pub quantiles: Option<usize>,
    /// Fit thresholds on the whole dataset instead of each training fold
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub global_binarize: Option<bool>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Worker threads for the sweep
    #[arg(long, env = "BOOLRULE_WORKERS")]
    pub workers: Option<usize>,
    /// Run cells on the calling thread only
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub sequential: Option<bool>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

mergeable!(SweepOpts {
    data,
    schema,
    algos,
    r,
    theta_grid,
    folds,
    seed,
    disable_clause,
    form,
    quantiles,
    global_binarize,
    max_iters,
    workers,
    sequential,
    out,
});

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct TrainOpts {
    /// Input CSV with a header row (needs --schema)
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Pre-binarized dataset JSON, instead of --data/--schema
    #[arg(long)]
    pub binary: Option<PathBuf>,
    #[arg(long)]
    pub algo: Option<String>,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub r: Option<usize>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub form: Option<String>,
    #[arg(long)]
    pub disable_clause: Option<String>,
    #[arg(long)]
    pub quantiles: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Rule JSON destination; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

mergeable!(TrainOpts {
    data,
    schema,
    binary,
    algo,
    r,
    theta,
    form,
    disable_clause,
    quantiles,
    seed,
    max_iters,
    out,
});

pub fn parse_algorithms(s: &str) -> Result<Vec<Algorithm>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<Algorithm>().map_err(Into::into))
        .collect()
}

/// `a..b` and `a..=b` are both inclusive; otherwise a comma list.
pub fn parse_counts(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
        if a > b {
            bail!("empty range '{s}'");
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| Ok(t.trim().parse()?)).collect()
}

pub fn parse_thetas(s: &str) -> Result<Vec<f64>> {
    if s.trim().eq_ignore_ascii_case("default") {
        return Ok(default_thetas());
    }
    s.split(',').map(|t| Ok(t.trim().parse()?)).collect()
}

pub fn parse_switch(s: &str) -> Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => bail!("expected on or off, got '{s}'"),
    }
}

pub fn parse_form(s: &str) -> Result<Form> {
    match s.to_ascii_lowercase().as_str() {
        "dnf" => Ok(Form::Dnf),
        "cnf" => Ok(Form::Cnf),
        _ => bail!("expected dnf or cnf, got '{s}'"),
    }
}
