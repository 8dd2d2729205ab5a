//! Command-line front end. `run` returns the process exit code:
//! 0 success, 1 error, 2 inconsistency (classify) or failed identity (check).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::classify::{self, DEFAULT_TOL};
use crate::dsl::{load_metric, MetricSpec};
use crate::error::{Error, Result};
use crate::geometry::{self, ConnectionBundle, CovDerivs, IdentityResidual};
use crate::sample::{SamplePlan, TangentSample};
use crate::zoo::{self, ZooParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCONSISTENT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "finsler", version, about = "Classify complex Finsler metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate every class predicate and write a classification report.
    Classify {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Run an identity suite: homogeneity, eq1.3, lemma2.1 or lemma2.2.
    Check {
        suite: String,
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Dump the connection bundle at one sample given as 4n reals.
    Dump {
        #[command(flatten)]
        source: Source,
        /// Re z1, Im z1, ..., Re eta1, Im eta1, ... (comma separated).
        #[arg(long, allow_hyphen_values = true)]
        sample: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a zoo entry in the metric-JSON format.
    Export {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Source {
    /// Metric JSON file.
    #[arg(long, conflicts_with = "zoo", required_unless_present = "zoo")]
    pub metric: Option<PathBuf>,
    /// Zoo id.
    #[arg(long)]
    pub zoo: Option<String>,
    /// Conformal factor for antonelli_shimada.
    #[arg(long, requires = "zoo", allow_hyphen_values = true)]
    pub sigma: Option<String>,
    /// Rows separated by `;`, entries by `,`.
    #[arg(long, requires = "zoo", allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Entries separated by `,`.
    #[arg(long, requires = "zoo", allow_hyphen_values = true)]
    pub b: Option<String>,
    /// Complex dimension of the zoo entry [default: 2].
    #[arg(long, requires = "zoo")]
    pub dim: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct RunOpts {
    /// Number of base points z.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
    pub samples: u32,
    /// Number of eta points per base point.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
    pub eta_samples: u32,
    /// Sampling seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Polydisc radius around the base point.
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
    /// Scaled-residual tolerance; 10x tol bounds the borderline band.
    #[arg(long, default_value_t = DEFAULT_TOL, allow_hyphen_values = true)]
    pub tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

impl RunOpts {
    fn plan(&self) -> SamplePlan {
        SamplePlan {
            seed: self.seed,
            z_count: self.samples as usize,
            eta_count: self.eta_samples as usize,
            radius: self.radius,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Schema("--tol must be positive".into()));
        }
        if !(self.radius > 0.0) {
            return Err(Error::Schema("--radius must be positive".into()));
        }
        Ok(())
    }
}

impl Source {
    pub fn load(&self) -> Result<MetricSpec> {
        match (&self.metric, &self.zoo) {
            (Some(path), _) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {}", path.display(), e)))?;
                load_metric(&text)
            }
            (None, Some(id)) => zoo::make(id, &self.params()),
            (None, None) => Err(Error::Schema("one of --metric or --zoo is required".into())),
        }
    }

    fn params(&self) -> ZooParams {
        ZooParams {
            dim: self.dim,
            sigma: self.sigma.clone(),
            a: self.a.clone(),
            b: self.b.clone(),
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {}", path.display(), e))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.write_all(b"\n"))
                .map_err(|e| Error::Io(e.to_string()))
        }
    }
}

fn threads_from_env() -> Option<usize> {
    std::env::var("FINSLER_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
}

fn cmd_classify(source: &Source, run: &RunOpts) -> Result<i32> {
    run.validate()?;
    let spec = source.load()?;
    let report = classify::classify(&spec, &run.plan(), run.tol)?;
    let text = match run.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    emit(&run.out, &text)?;
    if run.out.is_some() {
        for (class, v) in &report.lattice {
            println!("{}: {}", class, v.as_str());
        }
    }
    for c in report.crosschecks.iter().filter(|c| !c.consistent) {
        eprintln!("inconsistent: {} {:?}", c.theorem, c.members);
    }
    Ok(if report.inconsistent() {
        EXIT_INCONSISTENT
    } else {
        EXIT_OK
    })
}

/// Per-identity residuals over the plan, in sample order.
pub fn check_suite(spec: &MetricSpec, suite: &str, plan: &SamplePlan) -> Result<Vec<(usize, Vec<IdentityResidual>)>> {
    use rayon::prelude::*;
    if !geometry::SUITES.contains(&suite) {
        return Err(Error::UnknownSuite(suite.into()));
    }
    let l = spec.assemble_l();
    let flat = spec.samples(plan)?.flat();
    flat.par_iter()
        .enumerate()
        .map(|(i, s)| {
            let b = ConnectionBundle::compute(&l, s)?;
            let cd = CovDerivs::compute(&b);
            Ok((i, geometry::run_suite(suite, &l, &b, &cd)?))
        })
        .collect()
}

fn cmd_check(suite: &str, source: &Source, run: &RunOpts) -> Result<i32> {
    run.validate()?;
    if !geometry::SUITES.contains(&suite) {
        return Err(Error::UnknownSuite(suite.into()));
    }
    let spec = source.load()?;
    let rows = check_suite(&spec, suite, &run.plan())?;
    let ids: Vec<(String, bool)> = rows
        .first()
        .map(|(_, r)| r.iter().map(|x| (x.id.clone(), x.informational)).collect())
        .unwrap_or_default();
    let mut table = Vec::new();
    let mut ok = true;
    for (k, (id, informational)) in ids.iter().enumerate() {
        let worst = rows.iter().map(|(_, r)| r[k].residual).fold(0.0, f64::max);
        let passed = worst < run.tol;
        if !informational {
            ok &= passed;
        }
        table.push(json!({
            "id": id,
            "max_residual": worst,
            "informational": informational,
            "passed": passed,
        }));
    }
    let text = match run.format {
        Format::Json => serde_json::to_string_pretty(&json!({
            "suite": suite,
            "metric": spec.name,
            "plan": run.plan(),
            "tolerance": run.tol,
            "identities": table,
        }))
        .expect("serializes"),
        Format::Csv => {
            let mut s = String::from("identity_id,sample_index,residual\n");
            for (k, (id, _)) in ids.iter().enumerate() {
                for (i, r) in &rows {
                    s.push_str(&format!("{},{},{:e}\n", id, i, r[k].residual));
                }
            }
            s
        }
    };
    if run.out.is_some() || run.format == Format::Csv {
        emit(&run.out, &text)?;
    }
    if run.out.is_some() || run.format == Format::Json {
        for row in &table {
            let tag = if row["informational"].as_bool() == Some(true) {
                "info"
            } else if row["passed"].as_bool() == Some(true) {
                "ok"
            } else {
                "FAIL"
            };
            println!(
                "{:<32} {:>12.3e}  {}",
                row["id"].as_str().unwrap_or_default(),
                row["max_residual"].as_f64().unwrap_or(f64::NAN),
                tag
            );
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_INCONSISTENT })
}

fn parse_sample(text: &str) -> Result<TangentSample> {
    let values: Vec<f64> = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Schema(format!("`{}` is not a real number", t.trim())))
        })
        .collect::<Result<_>>()?;
    TangentSample::from_reals(&values)
}

fn cmd_dump(source: &Source, sample: &str, out: &Option<PathBuf>) -> Result<i32> {
    let spec = source.load()?;
    let s = parse_sample(sample)?;
    if s.dim() != spec.dim {
        return Err(Error::Shape(format!(
            "sample of dimension {} for a metric of dimension {}",
            s.dim(),
            spec.dim
        )));
    }
    if s.eta_is_zero() {
        return Err(Error::Domain { expr: "eta = 0".into() });
    }
    let bundle = ConnectionBundle::compute(&spec.assemble_l(), &s)?;
    let text = serde_json::to_string_pretty(&bundle.to_json()).expect("serializes");
    emit(out, &text)?;
    Ok(EXIT_OK)
}

fn cmd_export(source: &Source, out: &Option<PathBuf>) -> Result<i32> {
    let spec = source.load()?;
    emit(out, &spec.to_json())?;
    Ok(EXIT_OK)
}

pub fn execute(cli: &Cli) -> Result<i32> {
    classify::init_threads(threads_from_env());
    match &cli.command {
        Command::Classify { source, run } => cmd_classify(source, run),
        Command::Check { suite, source, run } => cmd_check(suite, source, run),
        Command::Dump { source, sample, out } => cmd_dump(source, sample, out),
        Command::Export { source, out } => cmd_export(source, out),
    }
}

/// Parses arguments, runs, reports errors on stderr, returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}: {}", e.kind_name(), e);
            EXIT_ERROR
        }
    }
}
