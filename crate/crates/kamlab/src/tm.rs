//! Turing machines over a binary input: table parsing, a reference
//! simulator, and a compiler from tables to closed terms of the
//! deterministic application fragment.
//!
//! The machine model is offline. A read-only input tape holds the binary
//! input between two end delimiters, L at index 0 and R past the last bit;
//! the head position is a number, not a pointer. A read-write work tape over
//! {0, 1, _} is kept as two strings split at the head, adjacent cell first.
//! Work cells materialize when the head visits them: a push always pushes
//! (blanks included) and a pop from an exhausted side scans a blank and
//! leaves the side empty. The simulator and the compiled term share these
//! conventions exactly, so their configurations can be compared in lockstep.
//!
//! A compiled machine applied to an encoded input evaluates to the boolean
//! `\x.\y.x` (accept) or `\x.\y.y` (reject). Each step reads the input
//! unconditionally, dispatches on state, input symbol and scanned work
//! symbol, rebuilds the configuration and recurses; missing table entries
//! compile to a diverging term.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use crate::code::{Code, CodeError, NodeId, NodeKind};
use crate::encodings::{
    input_reader, pred_core_src, read_bin_number, read_bool, read_scott_string, scott_string,
    succ_core_src, theta_det, Alphabet,
};
use crate::machine::{Decoder, Machine, MachineError, MachineKind, RunOptions, RunProfile};
use crate::machines::{execute, SpaceKam};
use crate::term::{parse, render, Term};

/// Symbol seen by the input head: a bit or one of the end delimiters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InputSym {
    Zero,
    One,
    LeftEnd,
    RightEnd,
}

impl InputSym {
    pub fn as_char(self) -> char {
        match self {
            InputSym::Zero => '0',
            InputSym::One => '1',
            InputSym::LeftEnd => 'L',
            InputSym::RightEnd => 'R',
        }
    }

    fn parse(tok: &str) -> Option<InputSym> {
        match tok {
            "0" => Some(InputSym::Zero),
            "1" => Some(InputSym::One),
            "L" => Some(InputSym::LeftEnd),
            "R" => Some(InputSym::RightEnd),
            _ => None,
        }
    }

}

/// Work tape symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WorkSym {
    Zero,
    One,
    Blank,
}

impl WorkSym {
    pub fn as_char(self) -> char {
        match self {
            WorkSym::Zero => '0',
            WorkSym::One => '1',
            WorkSym::Blank => '_',
        }
    }

    fn parse(tok: &str) -> Option<WorkSym> {
        match tok {
            "0" => Some(WorkSym::Zero),
            "1" => Some(WorkSym::One),
            "_" => Some(WorkSym::Blank),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    Left,
    Right,
    Stay,
}

impl Dir {
    fn parse(tok: &str) -> Option<Dir> {
        match tok {
            "L" => Some(Dir::Left),
            "R" => Some(Dir::Right),
            "S" => Some(Dir::Stay),
            _ => None,
        }
    }
}

pub type StateId = usize;

/// Right-hand side of a table entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rule {
    pub next: StateId,
    pub write: WorkSym,
    pub input_move: Dir,
    pub work_move: Dir,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TmError {
    Syntax { line: usize, msg: String },
    UnknownState { line: usize, name: String },
    DuplicateState { name: String },
    DuplicateDirective { line: usize, directive: &'static str },
    DuplicateRule { line: usize, key: String },
    MissingDirective { directive: &'static str },
    RuleFromFinal { line: usize, state: String },
    InputNotBinary { position: usize, ch: char },
}

impl fmt::Display for TmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TmError::Syntax { line, msg } => write!(f, "line {line}: {msg}"),
            TmError::UnknownState { line, name } => {
                write!(f, "line {line}: state {name} is not declared")
            }
            TmError::DuplicateState { name } => write!(f, "state {name} declared twice"),
            TmError::DuplicateDirective { line, directive } => {
                write!(f, "line {line}: repeated {directive}: directive")
            }
            TmError::DuplicateRule { line, key } => {
                write!(f, "line {line}: second rule for ({key})")
            }
            TmError::MissingDirective { directive } => write!(f, "missing {directive}: directive"),
            TmError::RuleFromFinal { line, state } => {
                write!(f, "line {line}: final state {state} has an outgoing rule")
            }
            TmError::InputNotBinary { position, ch } => {
                write!(f, "input byte {position}: {ch:?} is not a bit")
            }
        }
    }
}

impl std::error::Error for TmError {}

/// A parsed machine description: declared states, the three distinguished
/// states, and the (partial) transition table keyed by state, input symbol
/// and scanned work symbol.
#[derive(Clone, Debug)]
pub struct TmDesc {
    names: Vec<String>,
    init: StateId,
    accept: StateId,
    reject: StateId,
    table: HashMap<(StateId, InputSym, WorkSym), Rule>,
}

fn check_binary(input: &str) -> Result<(), TmError> {
    for (position, ch) in input.chars().enumerate() {
        if ch != '0' && ch != '1' {
            return Err(TmError::InputNotBinary { position, ch });
        }
    }
    Ok(())
}

fn input_sym_at(input: &str, head: u64) -> InputSym {
    if head == 0 {
        InputSym::LeftEnd
    } else if head <= input.len() as u64 {
        match input.as_bytes()[head as usize - 1] {
            b'0' => InputSym::Zero,
            _ => InputSym::One,
        }
    } else {
        InputSym::RightEnd
    }
}

impl TmDesc {
    /// Parse a description. The grammar is line-based: `states:` declares
    /// every state and must precede the directives that reference them;
    /// `init:`, `accept:` and `reject:` name one state each; `t:` lines have
    /// the shape `state in work -> state' write imove wmove` with `in` in
    /// {0,1,L,R}, `work`/`write` in {0,1,_} and moves in {L,R,S}. `#` starts
    /// a comment. Final states must have no outgoing rules.
    pub fn parse(src: &str) -> Result<TmDesc, TmError> {
        let mut names: Option<Vec<String>> = None;
        let mut init: Option<StateId> = None;
        let mut accept: Option<StateId> = None;
        let mut reject: Option<StateId> = None;
        let mut table: HashMap<(StateId, InputSym, WorkSym), Rule> = HashMap::new();
        let mut rule_lines: Vec<(usize, StateId)> = Vec::new();

        for (idx, raw) in src.lines().enumerate() {
            let line = idx + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let (head, rest) = text.split_once(':').ok_or_else(|| TmError::Syntax {
                line,
                msg: format!("expected a directive, got {text:?}"),
            })?;
            let rest = rest.trim();
            let resolve = |tok: &str| -> Result<StateId, TmError> {
                let names = names.as_ref().ok_or(TmError::Syntax {
                    line,
                    msg: "states: must come first".to_string(),
                })?;
                names
                    .iter()
                    .position(|n| n == tok)
                    .ok_or_else(|| TmError::UnknownState { line, name: tok.to_string() })
            };
            match head.trim() {
                "states" => {
                    if names.is_some() {
                        return Err(TmError::DuplicateDirective { line, directive: "states" });
                    }
                    let mut list = Vec::new();
                    for tok in rest.split_whitespace() {
                        if list.iter().any(|n| n == tok) {
                            return Err(TmError::DuplicateState { name: tok.to_string() });
                        }
                        list.push(tok.to_string());
                    }
                    if list.is_empty() {
                        return Err(TmError::Syntax { line, msg: "states: is empty".to_string() });
                    }
                    names = Some(list);
                }
                "init" | "accept" | "reject" => {
                    let directive: &'static str = match head.trim() {
                        "init" => "init",
                        "accept" => "accept",
                        _ => "reject",
                    };
                    let slot = match directive {
                        "init" => &mut init,
                        "accept" => &mut accept,
                        _ => &mut reject,
                    };
                    if slot.is_some() {
                        return Err(TmError::DuplicateDirective { line, directive });
                    }
                    *slot = Some(resolve(rest)?);
                }
                "t" => {
                    let bad = |msg: &str| TmError::Syntax { line, msg: msg.to_string() };
                    let (lhs, rhs) = rest.split_once("->").ok_or_else(|| bad("expected ->"))?;
                    let l: Vec<&str> = lhs.split_whitespace().collect();
                    let r: Vec<&str> = rhs.split_whitespace().collect();
                    if l.len() != 3 || r.len() != 4 {
                        return Err(bad("expected: state in work -> state write imove wmove"));
                    }
                    let state = resolve(l[0])?;
                    let input =
                        InputSym::parse(l[1]).ok_or_else(|| bad("input symbol must be 0 1 L R"))?;
                    let work =
                        WorkSym::parse(l[2]).ok_or_else(|| bad("work symbol must be 0 1 _"))?;
                    let rule = Rule {
                        next: resolve(r[0])?,
                        write: WorkSym::parse(r[1]).ok_or_else(|| bad("write must be 0 1 _"))?,
                        input_move: Dir::parse(r[2]).ok_or_else(|| bad("moves are L R S"))?,
                        work_move: Dir::parse(r[3]).ok_or_else(|| bad("moves are L R S"))?,
                    };
                    if table.insert((state, input, work), rule).is_some() {
                        return Err(TmError::DuplicateRule {
                            line,
                            key: format!("{} {} {}", l[0], l[1], l[2]),
                        });
                    }
                    rule_lines.push((line, state));
                }
                other => {
                    return Err(TmError::Syntax {
                        line,
                        msg: format!("unknown directive {other}:"),
                    });
                }
            }
        }

        let names = names.ok_or(TmError::MissingDirective { directive: "states" })?;
        let init = init.ok_or(TmError::MissingDirective { directive: "init" })?;
        let accept = accept.ok_or(TmError::MissingDirective { directive: "accept" })?;
        let reject = reject.ok_or(TmError::MissingDirective { directive: "reject" })?;
        for (line, state) in rule_lines {
            if state == accept || state == reject {
                return Err(TmError::RuleFromFinal { line, state: names[state].clone() });
            }
        }
        Ok(TmDesc { names, init, accept, reject, table })
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.names[s]
    }

    pub fn init_state(&self) -> StateId {
        self.init
    }

    pub fn is_final(&self, s: StateId) -> bool {
        s == self.accept || s == self.reject
    }

    pub fn rule(&self, s: StateId, i: InputSym, w: WorkSym) -> Option<&Rule> {
        self.table.get(&(s, i, w))
    }

    pub fn initial_config(&self) -> TmConfig {
        TmConfig {
            head: 0,
            left: Vec::new(),
            scanned: WorkSym::Blank,
            right: Vec::new(),
            state: self.init,
        }
    }

    fn apply(&self, cfg: &TmConfig, rule: &Rule) -> TmConfig {
        let head = match rule.input_move {
            Dir::Stay => cfg.head,
            Dir::Right => cfg.head + 1,
            Dir::Left => cfg.head.saturating_sub(1),
        };
        let mut left = cfg.left.clone();
        let mut right = cfg.right.clone();
        let scanned = match rule.work_move {
            Dir::Stay => rule.write,
            Dir::Left => {
                right.insert(0, rule.write);
                if left.is_empty() {
                    WorkSym::Blank
                } else {
                    left.remove(0)
                }
            }
            Dir::Right => {
                left.insert(0, rule.write);
                if right.is_empty() {
                    WorkSym::Blank
                } else {
                    right.remove(0)
                }
            }
        };
        TmConfig { head, left, scanned, right, state: rule.next }
    }

    fn run_with(
        &self,
        input: &str,
        fuel: u64,
        visit: &mut dyn FnMut(&TmConfig),
    ) -> Result<SimReport, TmError> {
        check_binary(input)?;
        let mut cfg = self.initial_config();
        let mut steps = 0u64;
        let mut work_cells = cfg.work_cells();
        loop {
            visit(&cfg);
            if self.is_final(cfg.state) {
                let outcome =
                    if cfg.state == self.accept { SimOutcome::Accept } else { SimOutcome::Reject };
                return Ok(SimReport { outcome, steps, work_cells });
            }
            if steps == fuel {
                return Ok(SimReport { outcome: SimOutcome::OutOfFuel, steps, work_cells });
            }
            let sym = input_sym_at(input, cfg.head);
            match self.rule(cfg.state, sym, cfg.scanned) {
                None => return Ok(SimReport { outcome: SimOutcome::Stuck, steps, work_cells }),
                Some(rule) => {
                    cfg = self.apply(&cfg, rule);
                    steps += 1;
                    work_cells = work_cells.max(cfg.work_cells());
                }
            }
        }
    }

    /// Run the simulator for at most `fuel` steps.
    pub fn simulate(&self, input: &str, fuel: u64) -> Result<SimReport, TmError> {
        self.run_with(input, fuel, &mut |_| {})
    }

    /// Like [`simulate`](Self::simulate) but also collects every visited
    /// configuration, the initial one included.
    pub fn config_trace(
        &self,
        input: &str,
        fuel: u64,
    ) -> Result<(SimReport, Vec<TmConfig>), TmError> {
        let mut trace = Vec::new();
        let report = self.run_with(input, fuel, &mut |c| trace.push(c.clone()))?;
        Ok((report, trace))
    }
}

/// A simulator configuration. `left` and `right` hold the work tape around
/// the head, adjacent cell first; both grow only by pushes, so their joint
/// length tracks the cells the head has visited.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TmConfig {
    pub head: u64,
    pub left: Vec<WorkSym>,
    pub scanned: WorkSym,
    pub right: Vec<WorkSym>,
    pub state: StateId,
}

impl TmConfig {
    pub fn work_cells(&self) -> u64 {
        (self.left.len() + self.right.len() + 1) as u64
    }
}

fn work_string(cells: &[WorkSym]) -> String {
    cells.iter().map(|w| w.as_char()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimOutcome {
    Accept,
    Reject,
    /// No table entry for the current (state, input, work) triple.
    Stuck,
    OutOfFuel,
}

#[derive(Clone, Debug)]
pub struct SimReport {
    pub outcome: SimOutcome,
    /// Rules applied.
    pub steps: u64,
    /// Largest configuration work size reached, scanned cell included.
    pub work_cells: u64,
}

impl SimReport {
    pub fn accepted(&self) -> Option<bool> {
        match self.outcome {
            SimOutcome::Accept => Some(true),
            SimOutcome::Reject => Some(false),
            _ => None,
        }
    }
}

const WORK_NIL: &str = "(\\h0.\\h1.\\hb.\\he. he)";
const BIN_NIL: &str = "(\\b0.\\b1.\\be. be)";
/// Thunk compiled in for missing table entries; selecting it diverges.
const STUCK: &str = "(\\d. (\\o. o o) (\\o. o o))";

fn selector_src(prefix: &str, n: usize, pick: usize) -> String {
    let mut s = String::new();
    for k in 1..=n {
        s.push('\\');
        s.push_str(prefix);
        s.push_str(&k.to_string());
        s.push_str(". ");
    }
    s.push_str(prefix);
    s.push_str(&pick.to_string());
    s
}

fn work_char_src(w: WorkSym) -> String {
    let pick = match w {
        WorkSym::Zero => 1,
        WorkSym::One => 2,
        WorkSym::Blank => 3,
    };
    format!("({})", selector_src("g", 3, pick))
}

fn work_cons_src(w: WorkSym, tail: &str) -> String {
    let h = match w {
        WorkSym::Zero => "h0",
        WorkSym::One => "h1",
        WorkSym::Blank => "hb",
    };
    format!("(\\h0.\\h1.\\hb.\\he. {h} {tail})")
}

/// Compiled form of a machine description: a closed term that, applied to an
/// encoded input, runs the table to a boolean. The step function destructures
/// the configuration through a single six-binder abstraction; that subterm is
/// located in compiled code to observe configurations mid-run.
pub struct EncodedTm {
    term: Rc<Term>,
    destructor: Rc<Term>,
    n_states: usize,
}

impl TmDesc {
    fn state_lit(&self, s: StateId) -> String {
        format!("({})", selector_src("s", self.names.len(), s + 1))
    }

    /// `f2 k2 <tuple>`: recurse on a rebuilt configuration. `n`, `left` and
    /// `right` are source fragments; the input and continuation are the
    /// surrounding binders.
    fn rebuild_src(&self, n: &str, left: &str, scanned: &str, right: &str, next: StateId) -> String {
        format!("f2 k2 (\\x. x i2 {n} {left} {scanned} {right} {})", self.state_lit(next))
    }

    /// Work tape part of a rule: writes, moves, rebuilds. `nv` names the
    /// variable holding the next input index.
    fn work_move_src(&self, rule: &Rule, nv: &str) -> String {
        match rule.work_move {
            Dir::Stay => {
                self.rebuild_src(nv, "sl2", &work_char_src(rule.write), "sr2", rule.next)
            }
            Dir::Left => {
                let grown = work_cons_src(rule.write, "sr2");
                let pop = |sc: WorkSym| {
                    self.rebuild_src(nv, "t2", &work_char_src(sc), &grown, rule.next)
                };
                format!(
                    "sl2 (\\t2.\\d. {}) (\\t2.\\d. {}) (\\t2.\\d. {}) (\\d. {}) (\\v. v)",
                    pop(WorkSym::Zero),
                    pop(WorkSym::One),
                    pop(WorkSym::Blank),
                    self.rebuild_src(nv, WORK_NIL, &work_char_src(WorkSym::Blank), &grown, rule.next),
                )
            }
            Dir::Right => {
                let grown = work_cons_src(rule.write, "sl2");
                let pop = |sc: WorkSym| {
                    self.rebuild_src(nv, &grown, &work_char_src(sc), "t2", rule.next)
                };
                format!(
                    "sr2 (\\t2.\\d. {}) (\\t2.\\d. {}) (\\t2.\\d. {}) (\\d. {}) (\\v. v)",
                    pop(WorkSym::Zero),
                    pop(WorkSym::One),
                    pop(WorkSym::Blank),
                    self.rebuild_src(nv, &grown, &work_char_src(WorkSym::Blank), WORK_NIL, rule.next),
                )
            }
        }
    }

    fn rule_src(&self, rule: &Rule, succ: &str, pred: &str) -> String {
        match rule.input_move {
            Dir::Stay => self.work_move_src(rule, "n2"),
            Dir::Right => format!("({succ}) n2 (\\m2. {})", self.work_move_src(rule, "m2")),
            Dir::Left => format!("({pred}) n2 (\\m2. {})", self.work_move_src(rule, "m2")),
        }
    }

    /// Work symbol dispatch for one (state, input symbol) pair.
    fn input_branch_src(&self, s: StateId, i: InputSym, succ: &str, pred: &str) -> String {
        let arm = |w: WorkSym| match self.rule(s, i, w) {
            Some(rule) => format!("(\\d. {})", self.rule_src(rule, succ, pred)),
            None => STUCK.to_string(),
        };
        format!(
            "a2 {} {} {} (\\v. v)",
            arm(WorkSym::Zero),
            arm(WorkSym::One),
            arm(WorkSym::Blank)
        )
    }

    /// Action for one state: final states hand the rebuilt configuration to
    /// the continuation, others read the input and dispatch.
    fn state_action_src(&self, s: StateId, read: &str, succ: &str, pred: &str) -> String {
        if self.is_final(s) {
            return format!("k2 (\\x. x i2 n2 sl2 a2 sr2 {})", self.state_lit(s));
        }
        let branch = |i: InputSym| self.input_branch_src(s, i, succ, pred);
        format!(
            "({read}) i2 n2 (\\c. c (\\d. {}) (\\d. {}) (\\d. {}) (\\d. {}) (\\v. v))",
            branch(InputSym::Zero),
            branch(InputSym::One),
            branch(InputSym::LeftEnd),
            branch(InputSym::RightEnd),
        )
    }

    /// The six-binder configuration destructor at the heart of the step
    /// function. Free in the recursion handle `f2` and continuation `k2`.
    fn destructor_src(&self, read: &str, succ: &str, pred: &str) -> String {
        let mut body = String::from("q2");
        for s in 0..self.names.len() {
            body.push_str(&format!(" (\\d. {})", self.state_action_src(s, read, succ, pred)));
        }
        body.push_str(" (\\v. v)");
        format!("\\i2.\\n2.\\sl2.\\a2.\\sr2.\\q2. {body}")
    }

    fn final_src(&self) -> String {
        let mut body = String::from("q3");
        for s in 0..self.names.len() {
            body.push_str(if s == self.accept {
                " (\\kb. kb (\\x.\\y. x))"
            } else {
                " (\\kb. kb (\\x.\\y. y))"
            });
        }
        body.push_str(" kf");
        format!("\\kf.\\cf. cf (\\i3.\\n3.\\sl3.\\a3.\\sr3.\\q3. {body})")
    }

    fn init_src(&self) -> String {
        format!(
            "(\\dz.\\el.\\fr.\\kk.\\ii. kk (\\x. x ii dz el {} fr {})) {} {} {}",
            work_char_src(WorkSym::Blank),
            self.state_lit(self.init),
            BIN_NIL,
            WORK_NIL,
            WORK_NIL,
        )
    }

    /// Compile the table. The result is closed, lies in the deterministic
    /// application fragment, and applied to an encoded input runs to the
    /// accept/reject boolean of the table's verdict on that input.
    pub fn encode(&self) -> EncodedTm {
        let read = render(&input_reader());
        let succ = succ_core_src();
        let pred = pred_core_src();
        let th = render(&theta_det());
        let destr = self.destructor_src(&read, &succ, &pred);
        let taux = format!("\\f2.\\k2.\\cj. cj ({destr})");
        let src = format!(
            "({}) (\\cc. ({th}) ({th}) ({taux}) (\\c2. ({}) (\\x. x) c2) cc)",
            self.init_src(),
            self.final_src(),
        );
        let term = parse(&src).expect("compiled table parses");
        let taux_term = parse(&taux).expect("step function parses");
        let destructor = step_destructor(&taux_term);
        EncodedTm { term, destructor, n_states: self.names.len() }
    }
}

/// Extract the configuration destructor from the parsed step function
/// `\f2.\k2.\cj. cj (<destructor>)`.
fn step_destructor(taux: &Rc<Term>) -> Rc<Term> {
    let mut t = taux;
    for _ in 0..3 {
        match &**t {
            Term::Lam(_, body) => t = body,
            _ => unreachable!("step function starts with three binders"),
        }
    }
    match &**t {
        Term::App(_, d) => d.clone(),
        _ => unreachable!("step body applies the configuration"),
    }
}

impl EncodedTm {
    pub fn term(&self) -> &Rc<Term> {
        &self.term
    }

    pub fn state_count(&self) -> usize {
        self.n_states
    }

    /// The compiled machine applied to the encoded input.
    pub fn applied_to(&self, input: &str) -> Result<Rc<Term>, TmError> {
        check_binary(input)?;
        let tape = scott_string(&Alphabet::binary(), input).expect("bits encode");
        Ok(Term::app(self.term.clone(), tape))
    }

    /// Locate the configuration destructor in compiled code. The subterm
    /// occurs exactly once; `None` means the code was not built from this
    /// machine's term.
    pub fn destructor_node(&self, code: &Code) -> Option<NodeId> {
        let mut found = None;
        for id in 0..code.len() as NodeId {
            if !matches!(code.kind(id), NodeKind::Lam { .. }) || code.fv(id).len() > 2 {
                continue;
            }
            if *code.term_at(id) == *self.destructor {
                if found.is_some() {
                    return None;
                }
                found = Some(id);
            }
        }
        found
    }
}

#[derive(Debug)]
pub enum TmRunError {
    Tm(TmError),
    Code(CodeError),
    Machine(MachineError),
    /// The simulator hit a missing table entry; there is nothing to compare.
    OracleStuck { steps: u64 },
    OracleOutOfFuel { steps: u64 },
    OutOfFuel { transitions: u64, boundaries: u64 },
    MissingStepFunction,
    NotBoolean,
    Mismatch { boundary: u64, field: &'static str, got: String, want: String },
}

impl fmt::Display for TmRunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TmRunError::Tm(e) => write!(f, "{e}"),
            TmRunError::Code(e) => write!(f, "{e}"),
            TmRunError::Machine(e) => write!(f, "{e}"),
            TmRunError::OracleStuck { steps } => {
                write!(f, "simulator stuck after {steps} steps")
            }
            TmRunError::OracleOutOfFuel { steps } => {
                write!(f, "simulator out of fuel after {steps} steps")
            }
            TmRunError::OutOfFuel { transitions, boundaries } => write!(
                f,
                "machine out of fuel after {transitions} transitions ({boundaries} boundaries)"
            ),
            TmRunError::MissingStepFunction => {
                write!(f, "step function not found in compiled code")
            }
            TmRunError::NotBoolean => write!(f, "final state does not decode to a boolean"),
            TmRunError::Mismatch { boundary, field, got, want } => {
                write!(f, "boundary {boundary}: {field} is {got}, simulator has {want}")
            }
        }
    }
}

impl std::error::Error for TmRunError {}

impl From<TmError> for TmRunError {
    fn from(e: TmError) -> TmRunError {
        TmRunError::Tm(e)
    }
}

impl From<MachineError> for TmRunError {
    fn from(e: MachineError) -> TmRunError {
        TmRunError::Machine(e)
    }
}

impl From<CodeError> for TmRunError {
    fn from(e: CodeError) -> TmRunError {
        TmRunError::Code(e)
    }
}

pub struct EncodedRun {
    pub profile: RunProfile,
    /// Decoded verdict; absent when fuel ran out.
    pub accepted: Option<bool>,
}

/// Compile `desc`, apply it to `input` and run it on the chosen machine.
pub fn run_encoded(
    desc: &TmDesc,
    input: &str,
    kind: MachineKind,
    fuel: u64,
) -> Result<EncodedRun, TmRunError> {
    let prog = desc.encode().applied_to(input)?;
    let code = Code::build(&prog)?;
    let out = execute(kind, &code, &RunOptions::new(fuel))?;
    let accepted = match out.result {
        None => None,
        Some(t) => Some(read_bool(&t).ok_or(TmRunError::NotBoolean)?),
    };
    Ok(EncodedRun { profile: out.profile, accepted })
}

pub struct LockstepReport {
    /// Step-function boundaries observed; one per simulator configuration.
    pub boundaries: u64,
    pub transitions: u64,
    pub accepted: bool,
    pub steps: u64,
}

fn read_work_sel(t: &Term) -> Option<WorkSym> {
    let mut cur = t;
    for _ in 0..3 {
        match cur {
            Term::Lam(_, b) => cur = b,
            _ => return None,
        }
    }
    match cur {
        Term::Var(3) => Some(WorkSym::Zero),
        Term::Var(2) => Some(WorkSym::One),
        Term::Var(1) => Some(WorkSym::Blank),
        _ => None,
    }
}

fn read_state_sel(t: &Term, n_states: usize) -> Option<StateId> {
    let mut cur = t;
    for _ in 0..n_states {
        match cur {
            Term::Lam(_, b) => cur = b,
            _ => return None,
        }
    }
    match cur {
        Term::Var(k) if (*k as usize) <= n_states && *k >= 1 => Some(n_states - *k as usize),
        _ => None,
    }
}

fn read_work_cells(t: &Term) -> Option<Vec<WorkSym>> {
    let s = read_scott_string(t, &Alphabet::work()).ok()?;
    s.chars()
        .map(|c| match c {
            '0' => Some(WorkSym::Zero),
            '1' => Some(WorkSym::One),
            '_' => Some(WorkSym::Blank),
            _ => None,
        })
        .collect()
}

/// Run the compiled machine on the Space KAM and compare the configuration
/// against the simulator at every step-function boundary: same input, head
/// index, work strings, scanned symbol and state, then the same verdict.
pub fn lockstep(desc: &TmDesc, input: &str, fuel: u64) -> Result<LockstepReport, TmRunError> {
    let (report, trace) = desc.config_trace(input, fuel)?;
    match report.outcome {
        SimOutcome::Stuck => return Err(TmRunError::OracleStuck { steps: report.steps }),
        SimOutcome::OutOfFuel => return Err(TmRunError::OracleOutOfFuel { steps: report.steps }),
        _ => {}
    }
    let want_accept = report.outcome == SimOutcome::Accept;

    let enc = desc.encode();
    let prog = enc.applied_to(input)?;
    let code = Code::build(&prog)?;
    let destr = enc.destructor_node(&code).ok_or(TmRunError::MissingStepFunction)?;

    let mut m = SpaceKam::new(&code);
    let mut boundaries = 0u64;
    let mut transitions = 0u64;
    loop {
        if m.active_code() == destr && m.stack_closures().len() == 6 {
            if boundaries as usize >= trace.len() {
                return Err(TmRunError::Mismatch {
                    boundary: boundaries,
                    field: "boundary count",
                    got: format!("more than {}", trace.len()),
                    want: trace.len().to_string(),
                });
            }
            compare_boundary(&code, &m, input, &trace[boundaries as usize], enc.n_states, boundaries)?;
            boundaries += 1;
        }
        if transitions == fuel {
            return Err(TmRunError::OutOfFuel { transitions, boundaries });
        }
        match m.step()? {
            None => break,
            Some(_) => transitions += 1,
        }
    }
    if boundaries != trace.len() as u64 {
        return Err(TmRunError::Mismatch {
            boundary: boundaries,
            field: "boundary count",
            got: boundaries.to_string(),
            want: trace.len().to_string(),
        });
    }
    let final_term = m.decode()?;
    let accepted = read_bool(&final_term).ok_or(TmRunError::NotBoolean)?;
    if accepted != want_accept {
        return Err(TmRunError::Mismatch {
            boundary: boundaries,
            field: "verdict",
            got: accepted.to_string(),
            want: want_accept.to_string(),
        });
    }
    Ok(LockstepReport { boundaries, transitions, accepted, steps: report.steps })
}

/// The boundary state has the six configuration components on the stack,
/// innermost application argument on top: input, index, left work string,
/// scanned symbol, right work string, state selector.
fn compare_boundary(
    code: &Code,
    m: &SpaceKam<'_>,
    input: &str,
    want: &TmConfig,
    n_states: usize,
    boundary: u64,
) -> Result<(), TmRunError> {
    let stack = m.stack_closures();
    let mut dec = Decoder::new(code);
    let mut component = |i: usize| dec.closure(&stack[stack.len() - 1 - i]);
    let fail = |field: &'static str, got: String, want: String| TmRunError::Mismatch {
        boundary,
        field,
        got,
        want,
    };

    let tape = component(0)?;
    let got_input = read_scott_string(&tape, &Alphabet::binary())
        .map_err(|_| fail("input", render(&tape), input.to_string()))?;
    if got_input != input {
        return Err(fail("input", got_input, input.to_string()));
    }

    let idx = component(1)?;
    let got_head =
        read_bin_number(&idx).map_err(|_| fail("head", render(&idx), want.head.to_string()))?;
    if got_head != want.head {
        return Err(fail("head", got_head.to_string(), want.head.to_string()));
    }

    let lt = component(2)?;
    let got_left =
        read_work_cells(&lt).ok_or_else(|| fail("left", render(&lt), work_string(&want.left)))?;
    if got_left != want.left {
        return Err(fail("left", work_string(&got_left), work_string(&want.left)));
    }

    let sc = component(3)?;
    let got_scanned = read_work_sel(&sc)
        .ok_or_else(|| fail("scanned", render(&sc), want.scanned.as_char().to_string()))?;
    if got_scanned != want.scanned {
        return Err(fail(
            "scanned",
            got_scanned.as_char().to_string(),
            want.scanned.as_char().to_string(),
        ));
    }

    let rt = component(4)?;
    let got_right =
        read_work_cells(&rt).ok_or_else(|| fail("right", render(&rt), work_string(&want.right)))?;
    if got_right != want.right {
        return Err(fail("right", work_string(&got_right), work_string(&want.right)));
    }

    let st = component(5)?;
    let got_state = read_state_sel(&st, n_states)
        .ok_or_else(|| fail("state", render(&st), want.state.to_string()))?;
    if got_state != want.state {
        return Err(fail("state", got_state.to_string(), want.state.to_string()));
    }
    Ok(())
}

/// Ready-made machine tables used by tests, experiments and the command
/// line.
pub mod fixtures {
    /// Accepts everything on the first step.
    pub const ALWAYS_ACCEPT: &str = include_str!("../fixtures/always_accept.tm");
    /// Accepts inputs with an even number of 1 bits; constant work space.
    pub const PARITY: &str = include_str!("../fixtures/parity.tm");
    /// Accepts inputs containing the substring 01; constant work space.
    pub const CONTAINS_01: &str = include_str!("../fixtures/contains01.tm");
    /// Accepts palindromes; work space linear in the input.
    pub const PALINDROME: &str = include_str!("../fixtures/palindrome.tm");

    pub fn all() -> [(&'static str, &'static str); 4] {
        [
            ("always_accept", ALWAYS_ACCEPT),
            ("parity", PARITY),
            ("contains01", CONTAINS_01),
            ("palindrome", PALINDROME),
        ]
    }

    pub fn by_name(name: &str) -> Option<&'static str> {
        all().iter().find(|(n, _)| *n == name).map(|(_, src)| *src)
    }
}
