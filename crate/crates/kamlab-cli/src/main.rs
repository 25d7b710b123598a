//! `kamlab`: evaluate terms on the instrumented machines, run the growth
//! experiment suites, drive compiled machine descriptions, and read single
//! constructors out of results.
//!
//! Exit codes: 0 ok, 2 parse or input problem, 3 fuel exhausted, 4 internal
//! invariant violation, 5 differential disagreement (including a growth
//! verdict contradicting the expected class).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::rc::Rc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kamlab::code::Code;
use kamlab::experiments::{run_experiment, ExperimentError, ExperimentKind, ExperimentSpec, Row};
use kamlab::machine::{run, MachineError, MachineKind, RunOptions, RunProfile};
use kamlab::machines::{execute, SpaceKam};
use kamlab::readback::constructor_at;
use kamlab::term::{parse, parse_address, render, ParseError, Term};
use kamlab::tm::{run_encoded, SimOutcome, TmDesc, TmError, TmRunError};

#[derive(Parser)]
#[command(
    name = "kamlab",
    version,
    about = "Krivine-style abstract machines with bit-level space accounting"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a closed term to weak head normal form on one machine.
    Eval(EvalArgs),
    /// Run a growth suite over a parameter range and write its CSV.
    Experiment(ExperimentArgs),
    /// Run a machine description directly, compiled to a term, or both.
    Tm(TmArgs),
    /// Print the constructor at a tree address of a term's result.
    Addr(AddrArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// naive, space, time or lam.
    #[arg(long, value_parser = machine_kind)]
    machine: MachineKind,
    /// Term source text.
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    expr: Option<String>,
    /// File holding the term source.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Transition budget.
    #[arg(long)]
    fuel: u64,
    /// Print one line per transition with the space it reached.
    #[arg(long)]
    trace: bool,
    /// Also write the profile as a one-row CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// toy, locpy, glcpy, eta, counter or tm.
    #[arg(value_parser = experiment_kind)]
    kind: ExperimentKind,
    /// Smallest parameter value.
    #[arg(long)]
    min: u64,
    /// Largest parameter value.
    #[arg(long)]
    max: u64,
    /// Arithmetic grid step.
    #[arg(long, default_value_t = 1)]
    step: u64,
    /// Machine to profile; repeat to select several. Defaults per suite.
    #[arg(long = "machine", value_parser = machine_kind)]
    machines: Vec<MachineKind>,
    /// Transition budget per point.
    #[arg(long)]
    fuel: u64,
    /// Output CSV path.
    #[arg(long)]
    csv: PathBuf,
}

#[derive(Args)]
struct TmArgs {
    /// Machine description file.
    #[arg(long)]
    desc: PathBuf,
    /// Input over 0/1; may be empty.
    #[arg(long, default_value = "")]
    input: String,
    /// direct simulation, the compiled term on the space machine, or both.
    #[arg(long, value_enum)]
    via: Via,
    /// Budget: simulated steps for direct, machine transitions for
    /// space-kam; both get the same number.
    #[arg(long)]
    fuel: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Via {
    Direct,
    SpaceKam,
    Both,
}

#[derive(Args)]
struct AddrArgs {
    /// Term source text.
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    expr: Option<String>,
    /// File holding the term source.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Bit-string tree address; empty selects the root.
    #[arg(long, default_value = "")]
    address: String,
    /// Transition budget.
    #[arg(long)]
    fuel: u64,
}

fn machine_kind(s: &str) -> Result<MachineKind, String> {
    MachineKind::parse(s).ok_or_else(|| format!("unknown machine {s:?} (naive|space|time|lam)"))
}

fn experiment_kind(s: &str) -> Result<ExperimentKind, String> {
    ExperimentKind::parse(s)
        .ok_or_else(|| format!("unknown experiment {s:?} (toy|locpy|glcpy|eta|counter|tm)"))
}

struct Failure {
    code: u8,
    msg: String,
}

fn fail(code: u8, msg: impl Into<String>) -> Failure {
    Failure { code, msg: msg.into() }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Failure {
        fail(2, e.to_string())
    }
}

impl From<TmError> for Failure {
    fn from(e: TmError) -> Failure {
        fail(2, e.to_string())
    }
}

impl From<MachineError> for Failure {
    fn from(e: MachineError) -> Failure {
        fail(4, e.to_string())
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Failure {
        let code = match &e {
            ExperimentError::BadRange { .. } | ExperimentError::Tm(_) => 2,
            ExperimentError::Code(_) | ExperimentError::Machine(_) => 4,
        };
        fail(code, e.to_string())
    }
}

impl From<TmRunError> for Failure {
    fn from(e: TmRunError) -> Failure {
        let code = match &e {
            TmRunError::Tm(_) => 2,
            TmRunError::OutOfFuel { .. } | TmRunError::OracleOutOfFuel { .. } => 3,
            TmRunError::Mismatch { .. } => 5,
            _ => 4,
        };
        fail(code, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Experiment(a) => cmd_experiment(a),
        Cmd::Tm(a) => cmd_tm(a),
        Cmd::Addr(a) => cmd_addr(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn read_source(expr: &Option<String>, file: &Option<PathBuf>) -> Result<String, Failure> {
    match (expr, file) {
        (Some(s), _) => Ok(s.clone()),
        (None, Some(p)) => {
            fs::read_to_string(p).map_err(|e| fail(2, format!("{}: {e}", p.display())))
        }
        (None, None) => Err(fail(2, "one of --expr or --file is required")),
    }
}

fn parse_term(expr: &Option<String>, file: &Option<PathBuf>) -> Result<Rc<Term>, Failure> {
    Ok(parse(&read_source(expr, file)?)?)
}

fn build(t: &Term) -> Result<Code, Failure> {
    Code::build(t).map_err(|e| fail(4, e.to_string()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

fn print_profile(p: &RunProfile) {
    println!("beta_steps: {}", p.beta_steps);
    println!("transitions: {}", p.transitions);
    println!("max_bit_space: {}", p.max_bit_space);
    println!("max_abstract_space: {}", p.max_abstract_space.unwrap_or(0));
    println!("heap_cells: {}", p.heap_cells.unwrap_or(0));
}

fn cmd_eval(a: EvalArgs) -> Result<(), Failure> {
    let t = parse_term(&a.expr, &a.file)?;
    let code = build(&t)?;
    let opts = RunOptions { fuel: a.fuel, trace: a.trace, validate_every: None };
    let ex = execute(a.machine, &code, &opts)?;

    if let Some(rows) = &ex.profile.trace {
        for r in rows {
            println!(
                "{:>8} {:<8} bits={} closures={} heap={}",
                r.step, r.kind, r.bit_space, r.abstract_space, r.heap_cells
            );
        }
    }
    match &ex.result {
        Some(t) => println!("result: {}", render(t)),
        None => println!("result: normal-form-unreached"),
    }
    print_profile(&ex.profile);
    if let Some(path) = &a.csv {
        let row = Row::from_profile("eval", 0, &ex.profile);
        write_file(path, &format!("{}\n{}\n", kamlab::experiments::CSV_HEADER, row.csv()))?;
    }
    match ex.result {
        Some(_) => Ok(()),
        None => Err(fail(3, format!("no normal form within {} transitions", a.fuel))),
    }
}

fn cmd_experiment(a: ExperimentArgs) -> Result<(), Failure> {
    let spec = ExperimentSpec {
        kind: a.kind,
        min: a.min,
        max: a.max,
        step: a.step,
        machines: a.machines,
        fuel: a.fuel,
    };
    let report = run_experiment(&spec)?;
    write_file(&a.csv, &report.csv())?;
    println!("wrote {} rows to {}", report.rows.len(), a.csv.display());
    let starved = report.rows.iter().filter(|r| !r.completed).count();
    if starved > 0 {
        println!("fuel exhausted on {starved} rows");
    }
    for s in &report.series {
        println!("series {s}");
    }
    match report.verdicts_ok() {
        true => Ok(()),
        false => Err(fail(5, "growth verdict contradicts the expected class")),
    }
}

fn cmd_tm(a: TmArgs) -> Result<(), Failure> {
    let src = fs::read_to_string(&a.desc).map_err(|e| fail(2, format!("{}: {e}", a.desc.display())))?;
    let desc = TmDesc::parse(&src)?;

    let direct = match a.via {
        Via::Direct | Via::Both => {
            let report = desc.simulate(&a.input, a.fuel)?;
            let outcome = match report.outcome {
                SimOutcome::Accept => "accept",
                SimOutcome::Reject => "reject",
                SimOutcome::Stuck => "stuck",
                SimOutcome::OutOfFuel => "out-of-fuel",
            };
            println!(
                "direct: outcome={outcome} steps={} work_cells={}",
                report.steps, report.work_cells
            );
            if report.outcome == SimOutcome::OutOfFuel {
                return Err(fail(3, format!("simulation unfinished after {} steps", report.steps)));
            }
            Some(report)
        }
        Via::SpaceKam => None,
    };

    let encoded = match a.via {
        Via::SpaceKam | Via::Both => {
            let run = run_encoded(&desc, &a.input, MachineKind::Space, a.fuel)?;
            match run.accepted {
                Some(b) => println!(
                    "space-kam: accepted={b} beta_steps={} transitions={} max_bit_space={}",
                    run.profile.beta_steps, run.profile.transitions, run.profile.max_bit_space
                ),
                None => {
                    return Err(fail(
                        3,
                        format!("no verdict within {} transitions", run.profile.transitions),
                    ))
                }
            }
            run.accepted
        }
        Via::Direct => None,
    };

    if let Via::Both = a.via {
        let want = direct.as_ref().and_then(|r| r.accepted());
        match (want, encoded) {
            (Some(w), Some(g)) if w == g => println!("agreement: ok"),
            (None, _) => {
                return Err(fail(
                    5,
                    "the simulator got stuck but the compiled term produced a verdict",
                ))
            }
            (Some(w), Some(g)) => {
                return Err(fail(5, format!("simulator says {w}, compiled term says {g}")))
            }
            (_, None) => unreachable!("fuel exhaustion already reported"),
        }
    }
    Ok(())
}

fn cmd_addr(a: AddrArgs) -> Result<(), Failure> {
    let address = parse_address(&a.address)?;
    let t = parse_term(&a.expr, &a.file)?;
    let code = build(&t)?;
    let mut m = SpaceKam::new(&code);
    let profile = run(&mut m, &RunOptions::new(a.fuel))?;
    if !profile.completed() {
        return Err(fail(3, format!("no normal form within {} transitions", a.fuel)));
    }
    println!("{}", constructor_at(&code, &m.final_closure(), &address));
    Ok(())
}
