//! Experiment suites over the pinned program families: one profiled run per
//! parameter value and machine, CSV rows, and growth verdicts checked
//! against the class each family is expected to show.

use std::fmt;
use std::rc::Rc;

use crate::code::{Code, CodeError};
use crate::encodings::Scroller;
use crate::families::{alternating_bits, counter_term, eta_bases, eta_program, scroller_program};
use crate::growth::{classify, Growth};
use crate::machine::{MachineError, MachineKind, RunOptions, RunProfile};
use crate::machines::execute;
use crate::term::Term;
use crate::tm::{fixtures, TmDesc, TmError};

pub const CSV_HEADER: &str =
    "experiment,machine,n,beta_steps,transitions,max_bit_space,max_abstract_space,heap_cells,completed";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Scroller that rebuilds the consumed prefix in each continuation.
    Toy,
    /// Scroller copying each cell locally.
    LoCpy,
    /// Scroller accumulating a global copy of the string.
    GlCpy,
    /// A pinned program with its head eta-expanded n times.
    Eta,
    /// Nested-context tower whose unshared environments double per level.
    Counter,
    /// The parity machine compiled to a term, on alternating inputs.
    Tm,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Toy,
        ExperimentKind::LoCpy,
        ExperimentKind::GlCpy,
        ExperimentKind::Eta,
        ExperimentKind::Counter,
        ExperimentKind::Tm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Toy => "toy",
            ExperimentKind::LoCpy => "locpy",
            ExperimentKind::GlCpy => "glcpy",
            ExperimentKind::Eta => "eta",
            ExperimentKind::Counter => "counter",
            ExperimentKind::Tm => "tm",
        }
    }

    pub fn parse(s: &str) -> Option<ExperimentKind> {
        ExperimentKind::ALL.iter().copied().find(|k| k.name() == s)
    }

    /// Machines profiled when the caller selects none.
    pub fn default_machines(self) -> &'static [MachineKind] {
        match self {
            ExperimentKind::Toy => &[MachineKind::Naive, MachineKind::Space],
            ExperimentKind::LoCpy | ExperimentKind::GlCpy | ExperimentKind::Eta | ExperimentKind::Tm => {
                &[MachineKind::Space]
            }
            ExperimentKind::Counter => &[MachineKind::Space, MachineKind::Time],
        }
    }

    /// The program run at parameter `n`: string length for the scrollers,
    /// expansion count for eta, tower height for counter, input length for
    /// the machine encoding.
    pub fn program(self, n: u64) -> Result<Rc<Term>, ExperimentError> {
        match self {
            ExperimentKind::Toy => Ok(scroller_program(Scroller::Toy, n as usize)),
            ExperimentKind::LoCpy => Ok(scroller_program(Scroller::LoCpy, n as usize)),
            ExperimentKind::GlCpy => Ok(scroller_program(Scroller::GlCpy, n as usize)),
            ExperimentKind::Eta => Ok(eta_program(&eta_bases()[0], n as u32)),
            ExperimentKind::Counter => Ok(counter_term(n as u32)),
            ExperimentKind::Tm => {
                let desc = TmDesc::parse(fixtures::PARITY)?;
                Ok(desc.encode().applied_to(&alternating_bits(n as usize))?)
            }
        }
    }

    /// Growth classes the family is expected to show, per machine and
    /// metric.
    pub fn expectations(self) -> &'static [Expectation] {
        use Growth::*;
        use MachineKind::*;
        use Metric::*;
        const TOY: [Expectation; 3] = [
            Expectation::new(Naive, BitSpace, Exponential).from(6),
            Expectation::new(Space, BitSpace, Logarithmic),
            Expectation::new(Space, AbstractSpace, Constant),
        ];
        const LOCPY: [Expectation; 1] = [Expectation::new(Space, BitSpace, Linear)];
        const GLCPY: [Expectation; 2] = [
            Expectation::new(Space, AbstractSpace, Constant),
            Expectation::new(Space, BitSpace, Logarithmic).on_doublings(),
        ];
        const ETA: [Expectation; 1] = [Expectation::new(Space, AbstractSpace, Constant)];
        const COUNTER: [Expectation; 2] = [
            Expectation::new(Space, BitSpace, Exponential),
            Expectation::new(Time, HeapCells, Linear),
        ];
        const TM: [Expectation; 1] =
            [Expectation::new(Space, BitSpace, Logarithmic).on_doublings()];
        match self {
            ExperimentKind::Toy => &TOY,
            ExperimentKind::LoCpy => &LOCPY,
            ExperimentKind::GlCpy => &GLCPY,
            ExperimentKind::Eta => &ETA,
            ExperimentKind::Counter => &COUNTER,
            ExperimentKind::Tm => &TM,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which profiled maximum a series is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    BitSpace,
    AbstractSpace,
    HeapCells,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::BitSpace => "max_bit_space",
            Metric::AbstractSpace => "max_abstract_space",
            Metric::HeapCells => "heap_cells",
        }
    }

    pub fn pick(self, row: &Row) -> Option<u64> {
        match self {
            Metric::BitSpace => Some(row.max_bit_space),
            Metric::AbstractSpace => row.max_abstract_space,
            Metric::HeapCells => row.heap_cells,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An expected growth class for one machine and metric. `from_n` drops
/// leading points below the claimed regime; `doubling_only` restricts the
/// series to a chain n, 2n, 4n, .. before classifying, which is the natural
/// grid for logarithmic claims whose value is a step function of log n.
#[derive(Clone, Copy, Debug)]
pub struct Expectation {
    pub machine: MachineKind,
    pub metric: Metric,
    pub expected: Growth,
    pub from_n: u64,
    pub doubling_only: bool,
}

impl Expectation {
    const fn new(machine: MachineKind, metric: Metric, expected: Growth) -> Expectation {
        Expectation { machine, metric, expected, from_n: 0, doubling_only: false }
    }

    const fn from(mut self, n: u64) -> Expectation {
        self.from_n = n;
        self
    }

    const fn on_doublings(mut self) -> Expectation {
        self.doubling_only = true;
        self
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub min: u64,
    pub max: u64,
    pub step: u64,
    /// Empty means the kind's default machines.
    pub machines: Vec<MachineKind>,
    pub fuel: u64,
}

#[derive(Debug)]
pub enum ExperimentError {
    BadRange { min: u64, max: u64, step: u64 },
    Tm(TmError),
    Code(CodeError),
    Machine(MachineError),
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentError::BadRange { min, max, step } => {
                write!(f, "bad range: min {min}, max {max}, step {step}")
            }
            ExperimentError::Tm(e) => write!(f, "machine description: {e}"),
            ExperimentError::Code(e) => write!(f, "program: {e}"),
            ExperimentError::Machine(e) => write!(f, "run: {e}"),
        }
    }
}

impl std::error::Error for ExperimentError {}

impl From<TmError> for ExperimentError {
    fn from(e: TmError) -> ExperimentError {
        ExperimentError::Tm(e)
    }
}

impl From<CodeError> for ExperimentError {
    fn from(e: CodeError) -> ExperimentError {
        ExperimentError::Code(e)
    }
}

impl From<MachineError> for ExperimentError {
    fn from(e: MachineError) -> ExperimentError {
        ExperimentError::Machine(e)
    }
}

/// One CSV row: the profile of one run. Metrics a machine does not track
/// are printed as 0.
#[derive(Clone, Debug)]
pub struct Row {
    pub experiment: String,
    pub machine: MachineKind,
    pub n: u64,
    pub beta_steps: u64,
    pub transitions: u64,
    pub max_bit_space: u64,
    pub max_abstract_space: Option<u64>,
    pub heap_cells: Option<u64>,
    pub completed: bool,
}

impl Row {
    pub fn from_profile(experiment: impl Into<String>, n: u64, p: &RunProfile) -> Row {
        Row {
            experiment: experiment.into(),
            machine: p.machine,
            n,
            beta_steps: p.beta_steps,
            transitions: p.transitions,
            max_bit_space: p.max_bit_space,
            max_abstract_space: p.max_abstract_space,
            heap_cells: p.heap_cells,
            completed: p.completed(),
        }
    }

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.machine,
            self.n,
            self.beta_steps,
            self.transitions,
            self.max_bit_space,
            self.max_abstract_space.unwrap_or(0),
            self.heap_cells.unwrap_or(0),
            self.completed as u8,
        )
    }
}

/// A classified series with the class it was expected to fall in.
#[derive(Clone, Debug)]
pub struct SeriesReport {
    pub machine: MachineKind,
    pub metric: Metric,
    pub expected: Growth,
    pub points: Vec<(u64, u64)>,
    pub verdict: Growth,
}

impl SeriesReport {
    pub fn ok(&self) -> bool {
        self.verdict == self.expected
    }
}

impl fmt::Display for SeriesReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}: {} (expected {})",
            self.machine,
            self.metric,
            self.verdict.name(),
            self.expected.name()
        )
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub rows: Vec<Row>,
    pub series: Vec<SeriesReport>,
}

impl ExperimentReport {
    /// Header plus one line per row, newline-terminated. Identical
    /// invocations produce identical bytes.
    pub fn csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.csv());
            out.push('\n');
        }
        out
    }

    pub fn verdicts_ok(&self) -> bool {
        self.series.iter().all(SeriesReport::ok)
    }
}

/// The arithmetic grid min, min+step, .., capped at max.
pub fn grid(min: u64, max: u64, step: u64) -> Result<Vec<u64>, ExperimentError> {
    if min > max || step == 0 {
        return Err(ExperimentError::BadRange { min, max, step });
    }
    Ok((min..=max).step_by(step as usize).collect())
}

/// Longest chain n, 2n, 4n, .. present in `ns` (which is sorted). Ties keep
/// the earliest start.
fn doubling_chain(ns: &[u64]) -> Vec<u64> {
    let mut best: Vec<u64> = Vec::new();
    for &start in ns {
        if start == 0 {
            continue;
        }
        let mut chain = vec![start];
        let mut next = start.saturating_mul(2);
        while ns.binary_search(&next).is_ok() {
            chain.push(next);
            next = next.saturating_mul(2);
        }
        if chain.len() > best.len() {
            best = chain;
        }
    }
    best
}

/// Profile one family member on one machine. Fuel exhaustion is reported in
/// the row, not as an error.
pub fn run_point(
    kind: ExperimentKind,
    machine: MachineKind,
    n: u64,
    fuel: u64,
) -> Result<Row, ExperimentError> {
    let t = kind.program(n)?;
    let code = Code::build(&t)?;
    let ex = execute(machine, &code, &RunOptions::new(fuel))?;
    Ok(Row::from_profile(kind.name(), n, &ex.profile))
}

/// Rows for one machine across a parameter list, in order.
pub fn run_series(
    kind: ExperimentKind,
    machine: MachineKind,
    ns: &[u64],
    fuel: u64,
) -> Result<Vec<Row>, ExperimentError> {
    ns.iter().map(|&n| run_point(kind, machine, n, fuel)).collect()
}

/// Run the full suite: every machine on every grid point, then classify
/// each expected series. Rows appear machine-major in grid order. Fuel
/// exhaustion flags the row and drops the point from its series; a series
/// left with fewer than four points classifies as inconclusive.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, ExperimentError> {
    let ns = grid(spec.min, spec.max, spec.step)?;
    let machines: Vec<MachineKind> = match spec.machines.is_empty() {
        true => spec.kind.default_machines().to_vec(),
        false => spec.machines.clone(),
    };

    let mut rows = Vec::new();
    for &machine in &machines {
        rows.extend(run_series(spec.kind, machine, &ns, spec.fuel)?);
    }

    let mut series = Vec::new();
    for e in spec.kind.expectations() {
        if !machines.contains(&e.machine) {
            continue;
        }
        let mut points: Vec<(u64, u64)> = rows
            .iter()
            .filter(|r| r.machine == e.machine && r.completed && r.n >= e.from_n)
            .filter_map(|r| e.metric.pick(r).map(|v| (r.n, v)))
            .collect();
        if e.doubling_only {
            let ns: Vec<u64> = points.iter().map(|p| p.0).collect();
            let chain = doubling_chain(&ns);
            points.retain(|p| chain.contains(&p.0));
        }
        let verdict = classify(&points);
        series.push(SeriesReport {
            machine: e.machine,
            metric: e.metric,
            expected: e.expected,
            points,
            verdict,
        });
    }

    Ok(ExperimentReport { kind: spec.kind, rows, series })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_and_chains() {
        assert_eq!(grid(2, 14, 1).unwrap(), (2..=14).collect::<Vec<_>>());
        assert_eq!(grid(4, 20, 5).unwrap(), vec![4, 9, 14, 19]);
        assert_eq!(grid(7, 7, 3).unwrap(), vec![7]);
        assert!(grid(5, 4, 1).is_err());
        assert!(grid(4, 5, 0).is_err());

        assert_eq!(doubling_chain(&[2, 3, 4, 5, 6, 7, 8]), vec![2, 4, 8]);
        assert_eq!(doubling_chain(&[3, 4, 8, 16, 24]), vec![4, 8, 16]);
        assert_eq!(doubling_chain(&[5, 7, 11]), vec![5]);
        assert_eq!(doubling_chain(&[]), Vec::<u64>::new());
    }

    #[test]
    fn counter_suite_reports_the_separation() {
        let spec = ExperimentSpec {
            kind: ExperimentKind::Counter,
            min: 2,
            max: 12,
            step: 1,
            machines: Vec::new(),
            fuel: 1_000_000,
        };
        let report = run_experiment(&spec).unwrap();
        assert_eq!(report.rows.len(), 22);
        assert!(report.rows.iter().all(|r| r.completed));
        for s in &report.series {
            assert!(s.ok(), "{s}: points {:?}", s.points);
        }

        let again = run_experiment(&spec).unwrap();
        assert_eq!(report.csv(), again.csv());
        assert!(report.csv().starts_with(CSV_HEADER));
        let row = &report.rows[0];
        assert_eq!(row.experiment, "counter");
        assert_eq!(
            report.csv().lines().nth(1).unwrap(),
            format!(
                "counter,space,2,{},{},{},{},0,1",
                row.beta_steps,
                row.transitions,
                row.max_bit_space,
                row.max_abstract_space.unwrap()
            )
        );
    }

    #[test]
    fn scroller_suites_match_their_expected_classes() {
        for (kind, min, max, step) in [
            (ExperimentKind::Toy, 2, 14, 1),
            (ExperimentKind::LoCpy, 4, 40, 4),
            (ExperimentKind::GlCpy, 4, 64, 4),
        ] {
            let spec = ExperimentSpec {
                kind,
                min,
                max,
                step,
                machines: Vec::new(),
                fuel: 10_000_000,
            };
            let report = run_experiment(&spec).unwrap();
            assert!(report.rows.iter().all(|r| r.completed));
            for s in &report.series {
                assert!(s.ok(), "{kind} {s}: points {:?}", s.points);
            }
        }
    }

    #[test]
    fn fuel_exhaustion_flags_rows_and_weakens_the_verdict() {
        // Exactly enough fuel for the smallest tower (one extra transition
        // to observe finality), so every later point runs dry.
        let probe = run_point(ExperimentKind::Counter, MachineKind::Space, 2, 1_000_000).unwrap();
        let spec = ExperimentSpec {
            kind: ExperimentKind::Counter,
            min: 2,
            max: 7,
            step: 1,
            machines: vec![MachineKind::Space],
            fuel: probe.transitions + 1,
        };
        let report = run_experiment(&spec).unwrap();
        assert!(report.rows[0].completed);
        assert!(report.rows[1..].iter().all(|r| !r.completed));
        assert!(report.rows[1].csv().ends_with(",0"));
        let bits = report
            .series
            .iter()
            .find(|s| s.metric == Metric::BitSpace)
            .unwrap();
        assert_eq!(bits.points.len(), 1);
        assert_eq!(bits.verdict, Growth::Inconclusive);
        assert!(!report.verdicts_ok());
    }

    #[test]
    fn eta_suite_keeps_abstract_space_flat() {
        let spec = ExperimentSpec {
            kind: ExperimentKind::Eta,
            min: 0,
            max: 12,
            step: 2,
            machines: Vec::new(),
            fuel: 100_000,
        };
        let report = run_experiment(&spec).unwrap();
        let abs = report
            .series
            .iter()
            .find(|s| s.metric == Metric::AbstractSpace)
            .unwrap();
        assert_eq!(abs.verdict, Growth::Constant);
        let first = abs.points[0].1;
        assert!(abs.points.iter().all(|p| p.1 == first), "{:?}", abs.points);
    }
}
