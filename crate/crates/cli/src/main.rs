//! `setint`: run integrators, theorem suites, classifications and sweeps
//! against an instance catalog.
//!
//! Exit codes: 0 on success, 1 when a theorem suite reports a failure, 2 on
//! usage and input errors (bad flags, unknown ids, unreadable catalogs).

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use setint::integrate::{integrate_on_set, sweep, IntegralResult, SweepTable};
use setint::spaces::analysis::{classify, PropertyReport};
use setint::verify::{check_theorem, summary_csv, theorem_ids, TheoremReport, CLASSIFY_TRIALS};
use setint::{Catalog, IntegratorConfig, MeasurableSet, Method, Multifunction, SetFunction};

/// Version of the JSON envelope written by every command.
const SCHEMA_VERSION: u32 = 1;
/// Deepest refinement the command line accepts.
const MAX_DEPTH: u32 = 24;

#[derive(Parser, Debug)]
#[command(name = "setint", version, about = "Gould, Birkhoff-simple and Mc Shane integrals of box-valued multifunctions")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON manifest of multifunctions, set functions and instances (default: the built-in catalog).
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    /// Integrator configuration as a JSON document; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(0..=MAX_DEPTH as i64))]
    max_depth: Option<u32>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Either a catalog instance or a multifunction and set function by id.
#[derive(Args, Debug)]
struct Selector {
    #[arg(long, conflicts_with_all = ["f", "mu"])]
    instance: Option<String>,
    #[arg(long = "F", id = "f", requires = "mu")]
    f: Option<String>,
    #[arg(long, requires = "f")]
    mu: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one instance.
    Integrate {
        #[command(flatten)]
        selector: Selector,
        #[arg(long, value_enum, default_value_t = MethodArg::Gould)]
        method: MethodArg,
    },
    /// Run the suite of a theorem id (or `all`).
    Verify {
        #[arg(long)]
        theorem: String,
        /// Keep the instances whose label contains this text.
        #[arg(long)]
        instance: Option<String>,
    },
    /// Test the declared properties of a set function.
    Classify {
        #[arg(long)]
        mu: String,
        #[arg(long, default_value_t = CLASSIFY_TRIALS)]
        trials: usize,
    },
    /// Sums along the refinement chain, one row per depth.
    Sweep {
        #[command(flatten)]
        selector: Selector,
        /// Comma-separated depths, or a range `a..b` (inclusive).
        #[arg(long, default_value = "1..12")]
        depths: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Gould,
    BirkhoffSimple,
    #[value(name = "mcshane")]
    McShane,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Gould => Method::Gould,
            MethodArg::BirkhoffSimple => Method::BirkhoffSimple,
            MethodArg::McShane => Method::McShane,
        }
    }
}

/// Failures, by exit code.
enum Failure {
    Usage(String),
    Suite,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    #[serde(flatten)]
    body: T,
}

fn render_json<T: Serialize>(command: &str, body: T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(&Envelope { schema_version: SCHEMA_VERSION, command, body })?;
    s.push('\n');
    Ok(s)
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.to_string())?)?)
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

fn config(common: &Common) -> Result<IntegratorConfig, Failure> {
    let mut cfg = match &common.config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?)?,
        None => IntegratorConfig::default(),
    };
    if let Some(t) = common.tol {
        cfg.tol = t;
    }
    if let Some(d) = common.max_depth {
        cfg.max_depth = d;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if cfg.max_depth > MAX_DEPTH {
        return Err(Failure::Usage(format!("maxDepth must be at most {MAX_DEPTH}")));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn resolve<'a>(catalog: &'a Catalog, s: &Selector) -> Result<(&'a Multifunction, &'a SetFunction, MeasurableSet), Failure> {
    match (&s.instance, &s.f, &s.mu) {
        (Some(id), _, _) => Ok(catalog.resolve(id)?),
        (None, Some(f), Some(mu)) => {
            let (f, mu) = (catalog.multifunction(f)?, catalog.set_function(mu)?);
            Ok((f, mu, mu.space().full()))
        }
        _ => Err(Failure::Usage("select an instance with --instance, or --F together with --mu".into())),
    }
}

fn parse_depths(text: &str, max: u32) -> Result<Vec<u32>, Failure> {
    let depths: Vec<u32> = match text.split_once("..") {
        Some((a, b)) => (a.trim().parse()?..=b.trim().parse()?).collect(),
        None => text.split(',').map(|d| d.trim().parse()).collect::<Result<_, _>>()?,
    };
    if depths.is_empty() {
        return Err(Failure::Usage(format!("no depths in `{text}`")));
    }
    if let Some(d) = depths.iter().find(|&&d| d > max) {
        return Err(Failure::Usage(format!("depth {d} exceeds the maximum depth {max}")));
    }
    Ok(depths)
}

fn integral_output(r: &IntegralResult, format: Format) -> Result<String, Failure> {
    match format {
        Format::Json => render_json("integrate", r),
        Format::Csv => csv_text(
            &["partition", "sum", "hToValue", "tagOscillation", "tailBound"],
            r.trace.iter().map(|e| {
                vec![
                    e.partition.clone(),
                    e.sum.to_string(),
                    e.h_to_value.to_string(),
                    opt(e.tag_oscillation),
                    opt(e.tail_bound),
                ]
            }),
        ),
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Reports<'a> {
    reports: &'a [TheoremReport],
}

fn verify_output(reports: &[TheoremReport], format: Format) -> Result<String, Failure> {
    match format {
        Format::Json if reports.len() == 1 => render_json("verify", &reports[0]),
        Format::Json => render_json("verify", Reports { reports }),
        Format::Csv => Ok(summary_csv(reports)?),
    }
}

fn classify_output(r: &PropertyReport, format: Format) -> Result<String, Failure> {
    match format {
        Format::Json => render_json("classify", r),
        Format::Csv => csv_text(
            &["property", "declared", "observed", "evidence", "witness"],
            r.checks.iter().map(|c| {
                vec![
                    c.property.name().to_string(),
                    c.declared.to_string(),
                    c.observed.map_or(String::new(), |o| o.to_string()),
                    serde_json::to_value(c.evidence).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                    c.witness.as_ref().map_or(String::new(), |w| w.note.clone()),
                ]
            }),
        ),
    }
}

fn sweep_output(t: &SweepTable, format: Format) -> Result<String, Failure> {
    match format {
        Format::Json => render_json("sweep", t),
        Format::Csv => csv_text(
            &["depth", "cells", "sum", "h", "tagOscillation", "tailBound", "monotone", "diverging"],
            t.rows.iter().map(|r| {
                vec![
                    r.depth.to_string(),
                    r.cells.to_string(),
                    r.sum.to_string(),
                    opt(r.h),
                    r.tag_oscillation.to_string(),
                    r.tail_bound.to_string(),
                    t.monotone.to_string(),
                    t.diverging.to_string(),
                ]
            }),
        ),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = config(&cli.common)?;
    let catalog = match &cli.common.catalog {
        Some(p) => Catalog::load(p).map_err(|e| format!("{}: {e}", p.display()))?,
        None => Catalog::builtin(),
    };
    let format = cli.common.format;
    let mut suite_failed = false;
    let text = match &cli.command {
        Command::Integrate { selector, method } => {
            let (f, mu, domain) = resolve(&catalog, selector)?;
            integral_output(&integrate_on_set((*method).into(), f, mu, &domain, &cfg)?, format)?
        }
        Command::Verify { theorem, instance } => {
            let ids: Vec<&str> = if theorem == "all" { theorem_ids().collect() } else { vec![theorem.as_str()] };
            let reports = ids
                .iter()
                .map(|id| check_theorem(id, &catalog, instance.as_deref(), &cfg))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| match e {
                    setint::Error::UnknownTheorem(id) => Failure::Usage(format!(
                        "unknown theorem `{id}`; expected `all` or one of: {}",
                        theorem_ids().collect::<Vec<_>>().join(", ")
                    )),
                    e => e.into(),
                })?;
            suite_failed = reports.iter().any(|r| r.failed > 0);
            verify_output(&reports, format)?
        }
        Command::Classify { mu, trials } => {
            classify_output(&classify(catalog.set_function(mu)?, *trials, cfg.seed), format)?
        }
        Command::Sweep { selector, depths } => {
            let (f, mu, domain) = resolve(&catalog, selector)?;
            if domain != mu.space().full() {
                return Err(Failure::Usage("sweep runs on the whole space; pick an instance without a domain".into()));
            }
            sweep_output(&sweep(f, mu, &parse_depths(depths, cfg.max_depth.min(MAX_DEPTH))?, &cfg)?, format)?
        }
    };
    match &cli.common.out {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()))?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    if suite_failed {
        Err(Failure::Suite)
    } else {
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Suite) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("usage: setint [--catalog <path>] <integrate|verify|classify|sweep> [options]; see --help");
            ExitCode::from(2)
        }
    }
}
