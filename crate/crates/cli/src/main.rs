mod config;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use boolrule::data::{
    load_csv, load_csv_maybe_unlabeled, BinarizationPlan, BinaryDataset, RawDataset, Schema, DEFAULT_QUANTILES,
};
use boolrule::learners::{learn, Algorithm, LearnConfig};
use boolrule::par::Parallelism;
use boolrule::rule_model::{error_rate, predict_all, Form, RuleDocument};
use boolrule::sweep::{
    cell_summaries, min_error_table, pareto_front, run_sweep, write_csv, write_jsonl, write_timings, Split,
    SweepGrid, SweepOptions,
};
use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{load_config, parse_algorithms, parse_counts, parse_form, parse_switch, parse_thetas, Merge, SweepOpts, TrainOpts};

#[derive(Parser)]
#[command(name = "boolrule", version, about = "Sparse two-level Boolean rule learning")]
struct Cli {
    /// Log progress (repeat for more detail)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cross-validated sweep over algorithms, sparsity weights and clause counts
    Sweep {
        #[command(flatten)]
        opts: SweepOpts,
        /// JSON file with the same keys as the long flags
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Learn one rule on a full dataset and write it as JSON
    Train {
        #[command(flatten)]
        opts: TrainOpts,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Apply a saved rule to a dataset
    Predict {
        #[arg(long)]
        rule: PathBuf,
        /// CSV input (needs --schema)
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        schema: Option<PathBuf>,
        /// Pre-binarized dataset JSON
        #[arg(long)]
        binary: Option<PathBuf>,
        /// Prediction CSV destination; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a saved rule as text
    Explain {
        #[arg(long)]
        rule: PathBuf,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match cli.command {
        Command::Sweep { opts, config } => {
            let opts = match config {
                Some(path) => opts.merge(load_config(&path)?),
                None => opts,
            };
            cmd_sweep(opts)
        }
        Command::Train { opts, config } => {
            let opts = match config {
                Some(path) => opts.merge(load_config(&path)?),
                None => opts,
            };
            cmd_train(opts)
        }
        Command::Predict {
            rule,
            data,
            schema,
            binary,
            out,
        } => cmd_predict(&rule, data.as_deref(), schema.as_deref(), binary.as_deref(), out.as_deref()),
        Command::Explain { rule } => {
            let doc = read_rule(&rule)?;
            print!("{}", doc.explain());
            Ok(())
        }
    }
}

fn load_raw(data: &Path, schema: &Path) -> Result<(RawDataset, String)> {
    let schema = Schema::from_json_file(schema)?;
    let label = schema
        .label_column()
        .context("schema has no label column")?
        .to_string();
    let raw = load_csv(data, &label, &schema).with_context(|| format!("loading {}", data.display()))?;
    Ok((raw, label))
}

fn read_rule(path: &Path) -> Result<RuleDocument> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(RuleDocument::from_json(&text)?)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn sweep_grid(opts: &SweepOpts) -> Result<SweepGrid> {
    let mut grid = SweepGrid::default();
    if let Some(a) = &opts.algos {
        grid.algorithms = parse_algorithms(a)?;
    }
    if let Some(r) = &opts.r {
        grid.rs = parse_counts(r)?;
    }
    if let Some(t) = &opts.theta_grid {
        grid.thetas = parse_thetas(t)?;
    }
    if let Some(f) = opts.folds {
        grid.folds = f;
    }
    if let Some(s) = opts.seed {
        grid.seed = s;
    }
    if let Some(d) = &opts.disable_clause {
        grid.allow_disable = parse_switch(d)?;
    }
    if let Some(f) = &opts.form {
        grid.form = parse_form(f)?;
    }
    if let Some(q) = opts.quantiles {
        grid.quantiles = q;
    }
    if let Some(g) = opts.global_binarize {
        grid.global_binarize = g;
    }
    if let Some(m) = opts.max_iters {
        grid.max_iters = m;
    }
    grid.validate()?;
    Ok(grid)
}

#[derive(Serialize)]
struct FrontRow {
    algorithm: Algorithm,
    #[serde(rename = "R")]
    r: usize,
    split: Split,
    feature_count: f64,
    error: f64,
    theta: f64,
}

fn cmd_sweep(opts: SweepOpts) -> Result<()> {
    let (Some(data), Some(schema), Some(out)) = (&opts.data, &opts.schema, &opts.out) else {
        bail!("sweep needs --data, --schema and --out");
    };
    let grid = sweep_grid(&opts)?;
    let (raw, _) = load_raw(data, schema)?;
    let sweep_opts = SweepOptions {
        parallelism: if opts.sequential.unwrap_or(false) {
            Parallelism::Sequential
        } else {
            Parallelism::Parallel
        },
        workers: opts.workers,
    };
    log::info!(
        "{} rows, {} cells, {} workers",
        raw.len(),
        grid.num_cells(),
        opts.workers.map_or("default".into(), |w| w.to_string())
    );
    let res = run_sweep(&raw, &grid, sweep_opts)?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let create = |name: &str| -> Result<BufWriter<File>> {
        let p = out.join(name);
        Ok(BufWriter::new(File::create(&p).with_context(|| format!("creating {}", p.display()))?))
    };
    fs::write(out.join("grid.json"), serde_json::to_string_pretty(&grid)?)?;
    write_jsonl(&res.records, create("results.jsonl")?)?;
    write_csv(&res.records, create("results.csv")?)?;
    write_timings(&res.records, create("timings.jsonl")?)?;
    write_csv(&cell_summaries(&res.records), create("summary.csv")?)?;
    let table = min_error_table(&res);
    write_csv(&table, create("min_error.csv")?)?;

    let mut fronts = Vec::new();
    for &algorithm in &grid.algorithms {
        for &r in &grid.rs {
            for split in [Split::Train, Split::Test] {
                let front = pareto_front(&res, algorithm, r, split);
                fronts.extend(front.points.iter().map(|p| FrontRow {
                    algorithm,
                    r,
                    split,
                    feature_count: p.feature_count,
                    error: p.error,
                    theta: p.theta,
                }));
            }
        }
    }
    write_csv(&fronts, create("pareto.csv")?)?;

    let failed = res.records.iter().filter(|r| !r.is_ok()).count();
    if failed > 0 {
        log::warn!("{failed} cells failed; see the error field in results.jsonl");
    }
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "algorithm  R  theta     test_err  train_err  features")?;
    for row in &table {
        writeln!(
            stdout,
            "{:<9} {:>2}  {:<8.0e}  {:>7.2}%  {:>8.2}%  {:>8.2}{}",
            row.algorithm.name(),
            row.r,
            row.theta,
            100.0 * row.test_error,
            100.0 * row.train_error,
            row.feature_count,
            if row.best { "  *" } else { "" }
        )?;
    }
    Ok(())
}

/// Binarizes a CSV on all of its rows, or reads a binary dataset as is.
fn training_data(opts: &TrainOpts, allow_disable: bool) -> Result<(BinaryDataset, Option<String>)> {
    let (ds, label) = match (&opts.binary, &opts.data, &opts.schema) {
        (Some(path), None, _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            (BinaryDataset::from_json(&text)?, None)
        }
        (None, Some(data), Some(schema)) => {
            let (raw, label) = load_raw(data, schema)?;
            let rows: Vec<usize> = (0..raw.len()).collect();
            let plan = BinarizationPlan::fit(&raw, &rows, opts.quantiles.unwrap_or(DEFAULT_QUANTILES))?;
            (plan.apply(&raw, &rows)?, Some(label))
        }
        _ => bail!("give either --binary or both --data and --schema"),
    };
    let ds = if allow_disable && !ds.has_disable_column() {
        ds.append_disable_column()?
    } else {
        ds
    };
    Ok((ds, label))
}

fn cmd_train(opts: TrainOpts) -> Result<()> {
    let algorithm: Algorithm = opts.algo.as_deref().unwrap_or("am").parse()?;
    let allow_disable = opts.disable_clause.as_deref().map(parse_switch).transpose()?.unwrap_or(false);
    let cfg = LearnConfig {
        theta: opts.theta.unwrap_or(1e-3),
        r: opts.r.unwrap_or(1),
        form: opts.form.as_deref().map(parse_form).transpose()?.unwrap_or(Form::Dnf),
        allow_disable,
        max_iters: opts.max_iters.unwrap_or(100),
        seed: opts.seed.unwrap_or(0),
        ..LearnConfig::default()
    };
    let (ds, label) = training_data(&opts, allow_disable)?;
    let learned = learn(&ds, algorithm, &cfg)?;
    eprintln!(
        "{algorithm}: training error {:.2}%, {} features, {} iterations",
        100.0 * error_rate(&ds, &learned.rule)?,
        learned.rule.feature_count(&ds),
        learned.trace.iterations()
    );
    let mut doc = RuleDocument::new(&learned.rule, ds.columns(), ds.origin_names())?;
    if let Some(label) = label {
        doc = doc.with_label(label);
    }
    let mut out = output(opts.out.as_deref())?;
    writeln!(out, "{}", doc.to_json()?)?;
    Ok(())
}

fn cmd_predict(
    rule: &Path,
    data: Option<&Path>,
    schema: Option<&Path>,
    binary: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let doc = read_rule(rule)?;
    let (predictions, labels) = match (binary, data, schema) {
        (Some(path), None, _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let ds = BinaryDataset::from_json(&text)?;
            let predictions = predict_all(&ds, &doc.to_rule()?)?;
            (predictions, Some(ds.labels().to_vec()))
        }
        (None, Some(data), Some(schema_path)) => {
            let schema = Schema::from_json_file(schema_path)?;
            let label = doc
                .label
                .clone()
                .or_else(|| schema.label_column().map(str::to_string))
                .unwrap_or_default();
            let (raw, labelled) = load_csv_maybe_unlabeled(data, &label, &schema)?;
            let predictions = doc.predict_raw(&raw)?;
            (predictions, labelled.then(|| raw.labels().to_vec()))
        }
        _ => bail!("give either --binary or both --data and --schema"),
    };
    if let Some(labels) = labels {
        let wrong = predictions.iter().zip(&labels).filter(|(p, y)| p != y).count();
        eprintln!(
            "error rate {:.2}% ({wrong}/{})",
            100.0 * wrong as f64 / labels.len().max(1) as f64,
            labels.len()
        );
    }
    let mut w = output(out)?;
    writeln!(w, "row,prediction")?;
    for (i, p) in predictions.iter().enumerate() {
        writeln!(w, "{i},{}", u8::from(*p))?;
    }
    w.flush()?;
    Ok(())
}
