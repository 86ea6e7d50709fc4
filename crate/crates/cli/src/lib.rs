//! Front end for the `liftcut` binary. [`run`] takes the arguments and
//! returns the process exit code so the commands can be exercised in tests.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use liftcut::cutloop::{demo_loop, LoopOptions, LoopStatus, Objective};
use liftcut::generate::{seeded_instance, InstanceKind};
use liftcut::io::{
    parse_cut, parse_instance, to_pretty, CutDoc, InstanceDoc, ReportDoc, VerificationDoc, VerificationRecord,
};
use liftcut::oracle::{Validity, ValidityOptions};
use liftcut::poly::SeparationOptions;
use liftcut::{Error, Instance, SeparatedCut, Vector};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_COUNTEREXAMPLE: i32 = 4;

/// Lifting increment used by the maximality check in `verify`.
const INFLATE: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "liftcut", version, about = "Cut separation for quadratic epigraphs over region complements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for all sampling.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Sample budget of the validity oracle.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub budget: usize,
    /// Residual below `-tol` counts as a counterexample.
    #[arg(long, global = true, default_value_t = 1e-7)]
    pub tol: f64,
    /// Worker threads for per-facet subproblems.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, global = true, default_value_t = 200)]
    pub max_rounds: usize,
    /// Write the document here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Separate the instance's query point.
    Separate { instance: PathBuf },
    /// Check a cut (or the cut inside a separation report) against the
    /// instance's region.
    Verify { instance: PathBuf, cut: PathBuf },
    /// Outer-approximation loop over the instance's bounds.
    DemoLoop {
        instance: PathBuf,
        /// Comma-separated `c_x` followed by `c_q`; defaults to minimizing q.
        #[arg(long, allow_hyphen_values = true)]
        objective: Option<String>,
    },
    /// Print a random instance.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 6)]
        facets: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GenKind {
    Polyhedron,
    Ellipsoid,
    Paraboloid,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::DimensionMismatch { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::NotSymmetric { .. }
            | Error::InvalidRegion(_)
            | Error::UnboundedEllipsoid { .. }
            | Error::FacetOutOfRange { .. }
            | Error::InvalidCut(_) => Failure::Input(e.to_string()),
            _ => Failure::Solver(e.to_string()),
        }
    }
}

pub fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// SHA-256 of the instance's canonical compact serialization.
pub fn instance_hash(inst: &Instance) -> String {
    let canonical = serde_json::to_string(&InstanceDoc::from_instance(inst)).expect("finite instance data");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    parse_instance(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(doc: &T, output: &Option<PathBuf>) -> Result<(), Failure> {
    let text = to_pretty(doc);
    match output {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}").map_err(|e| Failure::Input(e.to_string()))
        }
    }
}

#[derive(Serialize)]
struct LoopDoc {
    version: String,
    instance_hash: String,
    status: String,
    monotone: bool,
    rounds: Vec<RoundDoc>,
}

#[derive(Serialize)]
struct RoundDoc {
    round: usize,
    bound: f64,
    objective: f64,
    point: Vec<f64>,
    q: f64,
    violation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    cut: Option<CutDoc>,
}

fn separate(cli: &Cli, path: &Path) -> Result<i32, Failure> {
    let inst = load_instance(path)?;
    let start = Instant::now();
    let report = inst.separate(&SeparationOptions { threads: cli.threads.max(1) })?;
    let mut doc = ReportDoc::from_report(&inst.region, &report);
    doc.elapsed_seconds = Some(start.elapsed().as_secs_f64());
    doc.version = Some(version().into());
    doc.instance_hash = Some(instance_hash(&inst));
    emit(&doc, &cli.output)?;
    Ok(EXIT_OK)
}

fn verify(cli: &Cli, inst_path: &Path, cut_path: &Path) -> Result<i32, Failure> {
    let inst = load_instance(inst_path)?;
    let cut = parse_cut(&read(cut_path)?).map_err(|e| Failure::Input(format!("{}: {e}", cut_path.display())))?;
    check_cut_dimension(&inst, &cut)?;
    let opts = ValidityOptions { budget: cli.budget, seed: cli.seed, tol: cli.tol, ..ValidityOptions::default() };
    let validity = inst.check_cut(&cut, &opts)?;
    let mut records = vec![VerificationRecord::from_validity("cut", "validity", &validity)];
    if validity.is_valid() {
        if let Some(inflated) = inst.inflate_lifting(&cut, INFLATE)? {
            let check = inst.check_cut(&inflated, &opts)?;
            let mut rec = VerificationRecord::from_validity("cut+1e-3", "maximality", &check);
            rec.verdict = if check.is_valid() { "not_maximal" } else { "maximal" }.into();
            records.push(rec);
        }
    }
    let code = match validity {
        Validity::Valid { .. } => EXIT_OK,
        Validity::CounterExample { .. } => EXIT_COUNTEREXAMPLE,
    };
    let doc = VerificationDoc {
        version: Some(version().into()),
        instance_hash: Some(instance_hash(&inst)),
        seed: cli.seed,
        records,
    };
    emit(&doc, &cli.output)?;
    Ok(code)
}

fn check_cut_dimension(inst: &Instance, cut: &SeparatedCut) -> Result<(), Failure> {
    let d = inst.dim();
    let found = match cut {
        SeparatedCut::Standard(c) => c.dim(),
        SeparatedCut::Paraboloid(c) => c.dim(),
    };
    // A standard cut over the stacked (x, w) is accepted for paraboloid regions.
    let stacked = matches!(inst.region, liftcut::Region::ParaboloidComplement(_)) && found == d + 1;
    if found != d && !stacked {
        return Err(Failure::Input(format!("cut has dimension {found}, instance has {d}")));
    }
    Ok(())
}

fn parse_objective(text: &str, d: usize) -> Result<Objective, Failure> {
    let values: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| Failure::Input(format!("objective entry {s:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    if values.len() != d + 1 {
        return Err(Failure::Input(format!("objective needs {} entries, found {}", d + 1, values.len())));
    }
    Ok(Objective { c_x: Vector::from_row_slice(&values[..d]), c_q: values[d] })
}

fn run_loop(cli: &Cli, path: &Path, objective: Option<&str>) -> Result<i32, Failure> {
    let inst = load_instance(path)?;
    let obj = match objective {
        Some(t) => parse_objective(t, inst.dim())?,
        None => Objective::min_q(inst.dim()),
    };
    let opts = LoopOptions {
        max_rounds: cli.max_rounds,
        separation: SeparationOptions { threads: cli.threads.max(1) },
        ..LoopOptions::default()
    };
    let log = demo_loop(&inst, &obj, &opts)?;
    let status = match &log.status {
        LoopStatus::Converged => "converged".to_string(),
        LoopStatus::RepeatedCut => "repeated_cut".to_string(),
        LoopStatus::RoundLimit(w) => {
            eprintln!(
                "warning: no convergence after {} rounds (last violation {:e})",
                w.rounds, w.last_violation
            );
            "round_limit".to_string()
        }
    };
    let doc = LoopDoc {
        version: version().into(),
        instance_hash: instance_hash(&inst),
        status,
        monotone: log.is_monotone(),
        rounds: log
            .rounds
            .iter()
            .enumerate()
            .map(|(k, r)| RoundDoc {
                round: k,
                bound: r.bound,
                objective: r.objective,
                point: r.point.iter().copied().collect(),
                q: r.q,
                violation: r.violation,
                cut: r.cut.clone().map(|c| CutDoc::from_cut(&SeparatedCut::Standard(c))),
            })
            .collect(),
    };
    emit(&doc, &cli.output)?;
    Ok(EXIT_OK)
}

fn gen(cli: &Cli, kind: GenKind, dim: usize, facets: usize) -> Result<i32, Failure> {
    if dim == 0 {
        return Err(Failure::Input("--dim must be positive".into()));
    }
    let (kind, min_facets) = match kind {
        GenKind::Polyhedron => (InstanceKind::Polyhedron, 1),
        GenKind::Ellipsoid => (InstanceKind::Ellipsoid, 0),
        GenKind::Paraboloid => (InstanceKind::Paraboloid, 2),
    };
    if facets < min_facets {
        return Err(Failure::Input(format!("--facets must be at least {min_facets}")));
    }
    if kind == InstanceKind::Polyhedron && dim == 1 && facets > 2 {
        return Err(Failure::Input("a polyhedron in dimension 1 has at most 2 facets".into()));
    }
    let inst = seeded_instance(cli.seed, kind, dim, facets);
    emit(&InstanceDoc::from_instance(&inst), &cli.output)?;
    Ok(EXIT_OK)
}

/// Runs the command line and returns the exit code. Errors are reported on
/// stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Separate { instance } => separate(&cli, instance),
        Command::Verify { instance, cut } => verify(&cli, instance, cut),
        Command::DemoLoop { instance, objective } => run_loop(&cli, instance, objective.as_deref()),
        Command::Gen { kind, dim, facets } => gen(&cli, *kind, *dim, *facets),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            EXIT_PARSE
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("solver error: {msg}");
            EXIT_SOLVER
        }
    }
}
