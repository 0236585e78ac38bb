//! Command-line front end.
//!
//! Every command prints one report document on stdout (key/value text by
//! default, JSON with `--output report`) and signals its verdict through
//! the exit code, so scripts can branch without parsing anything:
//!
//! * 0: success, which for analysis commands means consistent or accept
//! * 1: reject, or a search that ends with nothing found
//! * 2: inconsistency or a violated promise
//! * 3: usage, file, or format error
//! * 4: a configured resource limit refused the work
//!
//! Failure paths print a single line `error: <kind>: <message>` on stderr.
//! Output is byte-identical across runs for the same inputs and flags;
//! `--timing` opts into a wall-clock field that breaks that guarantee.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::bits::Bits;
use crate::circuit::{Circuit, ClosedCircuit};
use crate::constructions::{ConstructionError, PromiseKind, RelationSpec, VerifierPair};
use crate::ctc::{
    check_process_function, search_noncausal_process, to_closed_circuit, CtcConfig, CtcError,
    LocalOperation, PartySpec, ProcessFunction, ProcessVerdict, ViolationKind,
};
use crate::factoring::{factorize, DomainMode, FactoringError, FactorizeError};
use crate::fixedpoint::{
    check_consistency, decide, enumerate_fixed_points, DecideError, Decision, Engine,
    EngineChoice, FixedpointConfig, FixedpointError,
};
use crate::manifest::{resolve_path, ConstructManifest, ConstructSpec, CtcManifest};
use crate::netlist::report::{Report, ReportBody};
use crate::netlist::{parse, serialize};

pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const REJECT: i32 = 1;
    pub const INCONSISTENT: i32 = 2;
    pub const USAGE: i32 = 3;
    pub const RESOURCE: i32 = 4;
}

#[derive(Parser)]
#[command(
    name = "noncausal",
    version,
    about = "Fixed-point analysis of closed Boolean circuits",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Rendering: `text` key/value lines or a `report` JSON document.
    #[arg(long, global = true, default_value = "text")]
    output: String,
    /// Seed for sampling helpers. Accepted everywhere so wrappers can pass
    /// it unconditionally; no verdict-producing path reads it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Attach wall-clock milliseconds to the report.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a netlist and report its shape.
    Validate { netlist: PathBuf },
    /// Parse a netlist and close it over its matching boundary.
    Close { netlist: PathBuf },
    /// Classify a closed netlist by its fixed points.
    Fixpoints {
        netlist: PathBuf,
        /// exhaustive, functional-graph, or cnf-count; picked by state
        /// width when absent.
        #[arg(long)]
        engine: Option<String>,
        /// Also list up to this many fixed points in the report.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Read the accept/reject verdict of a consistent closed netlist.
    Decide { netlist: PathBuf },
    /// Factor an integer through its fixed-point circuit.
    Factor {
        n: u64,
        /// extended or paper-strict.
        #[arg(long, default_value = "extended")]
        mode: String,
        #[arg(long)]
        engine: Option<String>,
    },
    /// Process-function commands.
    #[command(subcommand)]
    Ctc(CtcCommand),
    /// Compile a construction manifest into a closed netlist.
    #[command(subcommand)]
    Construct(ConstructCommand),
}

#[derive(Subcommand)]
enum CtcCommand {
    /// Check a setup manifest's process map against every joint operation.
    Check { manifest: PathBuf },
    /// Sweep square process maps for a consistent one with no fixed
    /// causal order.
    SearchNoncausal {
        #[arg(long)]
        parties: usize,
        #[arg(long)]
        bits: usize,
    },
}

#[derive(Subcommand)]
enum ConstructCommand {
    /// Decision circuit from a verifier-pair manifest.
    Decision {
        manifest: PathBuf,
        /// Instance bits, leftmost character first.
        #[arg(long)]
        instance: String,
    },
    /// Search circuit from a relation manifest.
    Search {
        manifest: PathBuf,
        #[arg(long)]
        instance: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum OutputMode {
    Text,
    Report,
}

/// A failed command: exit code plus the one-line stderr diagnostic.
struct Failure {
    code: i32,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn new(code: i32, kind: &'static str, message: impl Into<String>) -> Self {
        Failure { code, kind, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure::new(exit_code::USAGE, "usage", message)
    }

    fn io(message: impl Into<String>) -> Self {
        Failure::new(exit_code::USAGE, "io", message)
    }

    fn parse_error(message: impl Into<String>) -> Self {
        Failure::new(exit_code::USAGE, "parse", message)
    }

    fn manifest(message: impl Into<String>) -> Self {
        Failure::new(exit_code::USAGE, "manifest", message)
    }

    fn shape(message: impl Into<String>) -> Self {
        Failure::new(exit_code::USAGE, "shape", message)
    }

    fn resource(message: impl Into<String>) -> Self {
        Failure::new(exit_code::RESOURCE, "resource", message)
    }

    /// The artifact broke one of its own guarantees.
    fn internal(message: impl Into<String>) -> Self {
        Failure::new(exit_code::INCONSISTENT, "internal", message)
    }
}

/// A finished command: the report to print and the verdict-driven code.
struct Outcome {
    code: i32,
    report: Report,
}

impl Outcome {
    fn success(report: Report) -> Self {
        Outcome { code: exit_code::SUCCESS, report }
    }
}

/// Runs the tool on explicit arguments and returns the process exit code.
/// The binary is a one-line wrapper around this.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => return report_clap_error(e),
    };
    let mode = match cli.common.output.as_str() {
        "text" => OutputMode::Text,
        "report" => OutputMode::Report,
        other => {
            let f = Failure::usage(format!(
                "unknown output mode {other:?}; expected text or report"
            ));
            eprintln!("error: {}: {}", f.kind, f.message);
            return f.code;
        }
    };
    let started = Instant::now();
    match dispatch(cli.command) {
        Ok(outcome) => {
            let report = if cli.common.timing {
                outcome.report.with_timing(started.elapsed().as_millis() as u64)
            } else {
                outcome.report
            };
            match mode {
                OutputMode::Text => print!("{}", report.render_text()),
                OutputMode::Report => print!("{}", report.to_json()),
            }
            outcome.code
        }
        Err(f) => {
            eprintln!("error: {}: {}", f.kind, f.message);
            f.code
        }
    }
}

fn report_clap_error(e: clap::Error) -> i32 {
    match e.kind() {
        ClapErrorKind::DisplayHelp
        | ClapErrorKind::DisplayVersion
        | ClapErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            print!("{e}");
            exit_code::SUCCESS
        }
        _ => {
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("error: usage: {first}");
            exit_code::USAGE
        }
    }
}

fn dispatch(command: Command) -> Result<Outcome, Failure> {
    match command {
        Command::Validate { netlist } => run_validate(&netlist),
        Command::Close { netlist } => run_close(&netlist),
        Command::Fixpoints { netlist, engine, limit } => {
            run_fixpoints(&netlist, engine.as_deref(), limit)
        }
        Command::Decide { netlist } => run_decide(&netlist),
        Command::Factor { n, mode, engine } => run_factor(n, &mode, engine.as_deref()),
        Command::Ctc(CtcCommand::Check { manifest }) => run_ctc_check(&manifest),
        Command::Ctc(CtcCommand::SearchNoncausal { parties, bits }) => {
            run_ctc_search(parties, bits)
        }
        Command::Construct(ConstructCommand::Decision { manifest, instance }) => {
            run_construct(ConstructKind::Decision, &manifest, &instance)
        }
        Command::Construct(ConstructCommand::Search { manifest, instance }) => {
            run_construct(ConstructKind::Search, &manifest, &instance)
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn parse_netlist(path: &Path) -> Result<Circuit, Failure> {
    let text = read_file(path)?;
    parse(&text).map_err(|e| Failure::parse_error(format!("{}: {e}", path.display())))
}

fn close_netlist(path: &Path) -> Result<ClosedCircuit, Failure> {
    parse_netlist(path)?.close().map_err(|e| Failure::shape(e.to_string()))
}

fn engine_choice(flag: Option<&str>) -> Result<EngineChoice, Failure> {
    match flag {
        None => Ok(EngineChoice::Auto),
        Some(s) => s
            .parse::<Engine>()
            .map(EngineChoice::Use)
            .map_err(|e| Failure::usage(e.to_string())),
    }
}

fn effective_engine(choice: EngineChoice, width: usize, config: &FixedpointConfig) -> Engine {
    match choice {
        EngineChoice::Use(e) => e,
        EngineChoice::Auto => {
            if width <= config.auto_sweep_max_bits as usize {
                Engine::Exhaustive
            } else {
                Engine::CnfCount
            }
        }
    }
}

/// The CNF engine reads pure gates only, so expand table gates up front
/// whenever it is the engine that will run.
fn prepare(
    closed: ClosedCircuit,
    choice: EngineChoice,
    config: &FixedpointConfig,
) -> ClosedCircuit {
    if effective_engine(choice, closed.state_width(), config) == Engine::CnfCount {
        closed
            .inner()
            .lower()
            .close()
            .expect("lowering preserves the closed shape")
    } else {
        closed
    }
}

fn engine_failure(e: FixedpointError) -> Failure {
    match e {
        FixedpointError::CapacityExceeded { .. } | FixedpointError::BudgetExhausted { .. } => {
            Failure::resource(e.to_string())
        }
        FixedpointError::TableGates => Failure::usage(e.to_string()),
    }
}

fn run_validate(path: &Path) -> Result<Outcome, Failure> {
    let circuit = parse_netlist(path)?;
    Ok(Outcome::success(Report::new(ReportBody::Validate {
        inputs: circuit.num_inputs(),
        outputs: circuit.num_outputs(),
        gates: circuit.gates().len(),
    })))
}

fn run_close(path: &Path) -> Result<Outcome, Failure> {
    let closed = close_netlist(path)?;
    Ok(Outcome::success(Report::new(ReportBody::Close {
        state_width: closed.state_width(),
    })))
}

fn run_fixpoints(
    path: &Path,
    engine: Option<&str>,
    limit: Option<usize>,
) -> Result<Outcome, Failure> {
    let choice = engine_choice(engine)?;
    let config = FixedpointConfig::default();
    let closed = prepare(close_netlist(path)?, choice, &config);
    let report = check_consistency(&closed, choice, &config).map_err(engine_failure)?;
    let listing = match limit {
        None => None,
        Some(k) => {
            let mut fps =
                enumerate_fixed_points(&closed, Some(k), choice, &config).map_err(engine_failure)?;
            fps.truncate(k);
            Some(fps.iter().map(Bits::to_string).collect())
        }
    };
    let code = if report.verdict.is_consistent() {
        exit_code::SUCCESS
    } else {
        exit_code::INCONSISTENT
    };
    Ok(Outcome { code, report: Report::from_consistency(&report, listing) })
}

fn run_decide(path: &Path) -> Result<Outcome, Failure> {
    let config = FixedpointConfig::default();
    let closed = prepare(close_netlist(path)?, EngineChoice::Auto, &config);
    match decide(&closed, EngineChoice::Auto, &config) {
        Ok(Decision::Accept(witness)) => Ok(Outcome::success(Report::new(
            ReportBody::Decision { accepted: true, witness: witness.to_string() },
        ))),
        Ok(Decision::Reject(witness)) => Ok(Outcome {
            code: exit_code::REJECT,
            report: Report::new(ReportBody::Decision {
                accepted: false,
                witness: witness.to_string(),
            }),
        }),
        Err(DecideError::Inconsistent(report)) => Ok(Outcome {
            code: exit_code::INCONSISTENT,
            report: Report::from_consistency(&report, None),
        }),
        Err(DecideError::EmptyState) => Err(Failure::shape(DecideError::EmptyState.to_string())),
        Err(DecideError::Engine(e)) => Err(engine_failure(e)),
    }
}

fn run_factor(n: u64, mode_flag: &str, engine: Option<&str>) -> Result<Outcome, Failure> {
    let mode: DomainMode = mode_flag.parse().map_err(|e| Failure::usage(format!("{e}")))?;
    let choice = engine_choice(engine)?;
    let config = FixedpointConfig::default();
    let body = |status: &str, factors, display| ReportBody::Factorization {
        n,
        mode: mode.name().to_string(),
        status: status.to_string(),
        factors,
        display,
    };
    match factorize(n, mode, choice, &config) {
        Ok(f) => {
            let display = f.to_string();
            Ok(Outcome::success(Report::new(body(
                "factored",
                Some(f.factors),
                Some(display),
            ))))
        }
        Err(FactorizeError::NoFixedPoint { .. }) => Ok(Outcome {
            code: exit_code::INCONSISTENT,
            report: Report::new(body("no_fixed_point", None, None)),
        }),
        Err(FactorizeError::Ambiguous { .. }) => Ok(Outcome {
            code: exit_code::INCONSISTENT,
            report: Report::new(body("ambiguous", None, None)),
        }),
        Err(FactorizeError::Build(e @ FactoringError::TargetTooSmall(_))) => {
            Err(Failure::usage(e.to_string()))
        }
        Err(FactorizeError::Build(e)) => Err(Failure::resource(e.to_string())),
        Err(FactorizeError::Engine(e)) => Err(engine_failure(e)),
        Err(FactorizeError::Decode(e)) => Err(Failure::internal(e.to_string())),
    }
}

fn ctc_failure(e: CtcError) -> Failure {
    match e {
        CtcError::StateTooWide { .. } | CtcError::Budget { .. } => {
            Failure::resource(e.to_string())
        }
        other => Failure::shape(other.to_string()),
    }
}

fn violation_label(kind: ViolationKind) -> &'static str {
    match kind {
        ViolationKind::NoFixedPoint => "no_fixed_point",
        ViolationKind::MultipleFixedPoints => "multiple",
    }
}

fn run_ctc_check(path: &Path) -> Result<Outcome, Failure> {
    let text = read_file(path)?;
    let m = CtcManifest::from_json(&text).map_err(|e| Failure::manifest(e.to_string()))?;
    let parties: Vec<PartySpec> = m
        .parties
        .iter()
        .map(|p| PartySpec::new(p.input_bits, p.output_bits))
        .collect();
    let map = parse_netlist(&resolve_path(path, &m.process))?;
    let w = ProcessFunction::new(parties, map).map_err(ctc_failure)?;
    if let Some(locals) = &m.locals {
        // Splicing validates count, order, and per-party shapes in one go.
        let operations: Vec<LocalOperation> = locals
            .iter()
            .enumerate()
            .map(|(j, reference)| {
                Ok(LocalOperation::from_circuit(
                    j,
                    parse_netlist(&resolve_path(path, reference))?,
                ))
            })
            .collect::<Result<_, Failure>>()?;
        to_closed_circuit(&w, &operations).map_err(ctc_failure)?;
    }
    let config = CtcConfig::default();
    match check_process_function(&w, &config).map_err(ctc_failure)? {
        ProcessVerdict::Consistent => {
            Ok(Outcome::success(Report::new(ReportBody::CtcCheck {
                parties: w.parties().len(),
                verdict: "consistent".to_string(),
                violation_kind: None,
                operations: None,
            })))
        }
        ProcessVerdict::Violation { operations, kind } => {
            let tables = operations
                .iter()
                .map(|op| (0..1u64 << op.input_bits()).map(|i| op.apply_uint(i)).collect())
                .collect();
            Ok(Outcome {
                code: exit_code::INCONSISTENT,
                report: Report::new(ReportBody::CtcCheck {
                    parties: w.parties().len(),
                    verdict: "violation".to_string(),
                    violation_kind: Some(violation_label(kind).to_string()),
                    operations: Some(tables),
                }),
            })
        }
    }
}

fn run_ctc_search(parties: usize, bits: usize) -> Result<Outcome, Failure> {
    let config = CtcConfig::default();
    let body = |found, table| ReportBody::CtcSearch {
        parties,
        bits_per_party: bits,
        found,
        table,
    };
    match search_noncausal_process(parties, bits, &config).map_err(ctc_failure)? {
        Some(w) => Ok(Outcome::success(Report::new(body(true, Some(w.value_table()))))),
        None => Ok(Outcome {
            code: exit_code::REJECT,
            report: Report::new(body(false, None)),
        }),
    }
}

#[derive(Clone, Copy)]
enum ConstructKind {
    Decision,
    Search,
}

fn construction_failure(e: ConstructionError) -> Failure {
    match e {
        ConstructionError::InstanceWidth { .. } => Failure::usage(e.to_string()),
        other => Failure::shape(other.to_string()),
    }
}

fn run_construct(kind: ConstructKind, path: &Path, instance: &str) -> Result<Outcome, Failure> {
    let text = read_file(path)?;
    let m = ConstructManifest::from_json(&text).map_err(|e| Failure::manifest(e.to_string()))?;
    let bits: Bits = instance
        .parse()
        .map_err(|e| Failure::usage(format!("instance: {e}")))?;
    let (construction, closed) = match (kind, m.spec) {
        (ConstructKind::Decision, ConstructSpec::Decision { instance_bits, witness_bits, yes, no }) => {
            let yes = parse_netlist(&resolve_path(path, &yes))?;
            let no = parse_netlist(&resolve_path(path, &no))?;
            let pair = VerifierPair::from_circuits(instance_bits, witness_bits, yes, no)
                .map_err(construction_failure)?;
            ("decision", pair.decision_circuit(&bits).map_err(construction_failure)?)
        }
        (ConstructKind::Search, ConstructSpec::Search { instance_bits, solution_bits, predicate }) => {
            let predicate = parse_netlist(&resolve_path(path, &predicate))?;
            let relation = RelationSpec::from_circuit(
                instance_bits,
                solution_bits,
                predicate,
                PromiseKind::ExactlyOne,
            )
            .map_err(construction_failure)?;
            ("search", relation.search_circuit(&bits).map_err(construction_failure)?)
        }
        (ConstructKind::Decision, ConstructSpec::Search { .. }) => {
            return Err(Failure::usage(
                "the manifest describes a search relation; use `construct search`",
            ));
        }
        (ConstructKind::Search, ConstructSpec::Decision { .. }) => {
            return Err(Failure::usage(
                "the manifest describes a verifier pair; use `construct decision`",
            ));
        }
    };
    Ok(Outcome::success(Report::new(ReportBody::Construct {
        construction: construction.to_string(),
        instance: instance.to_string(),
        state_width: closed.state_width(),
        netlist: serialize(closed.inner()),
    })))
}
