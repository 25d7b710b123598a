//! Shared machine infrastructure: sized closures, cons-list environments,
//! decoding of states back to terms, and the instrumented run driver.
//!
//! Bit sizing follows one of two models for code references. UniformLog
//! charges every reference bits(|t0|); LeftAddress charges the bit-length of
//! the occurrence's left address. Environment entries cost the name plus the
//! closure, where a name is priced as the binder distance from the position
//! that owns the environment: bits(lam_above(owner) - lam_above(binder)).
//! Closures cache their total bit size and closure count at creation, so a
//! step's accounting touches only the environment of the active pair.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use crate::bits;
use crate::code::{Code, NodeId, NodeKind};
use crate::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MachineKind {
    Naive,
    Space,
    Time,
    Lam,
}

impl MachineKind {
    pub const ALL: [MachineKind; 4] =
        [MachineKind::Naive, MachineKind::Space, MachineKind::Time, MachineKind::Lam];

    pub fn name(self) -> &'static str {
        match self {
            MachineKind::Naive => "naive",
            MachineKind::Space => "space",
            MachineKind::Time => "time",
            MachineKind::Lam => "lam",
        }
    }

    pub fn parse(s: &str) -> Option<MachineKind> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn size_model(self) -> SizeModel {
        match self {
            MachineKind::Naive | MachineKind::Time => SizeModel::UniformLog,
            MachineKind::Space | MachineKind::Lam => SizeModel::LeftAddress,
        }
    }
}

impl fmt::Display for MachineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SizeModel {
    UniformLog,
    LeftAddress,
}

#[derive(Clone, Debug)]
pub enum MachineError {
    UnboundVariable { code_id: NodeId },
    RestrictionDomain { expected: usize, got: usize },
    NonSingletonEnv { code_id: NodeId },
    EmptyDump,
    DanglingAddress { addr: u32 },
    Accounting { what: &'static str, cached: u64, actual: u64 },
}

impl fmt::Display for MachineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MachineError::UnboundVariable { code_id } => {
                write!(f, "no environment entry for the variable at code node {code_id}")
            }
            MachineError::RestrictionDomain { expected, got } => {
                write!(f, "environment restriction kept {got} entries, needed {expected}")
            }
            MachineError::NonSingletonEnv { code_id } => {
                write!(f, "sub at code node {code_id} on a non-singleton environment")
            }
            MachineError::EmptyDump => write!(f, "value with empty stack but nothing to return to"),
            MachineError::DanglingAddress { addr } => write!(f, "dangling heap address {addr}"),
            MachineError::Accounting { what, cached, actual } => {
                write!(f, "{what} accounting drifted: cached {cached}, recomputed {actual}")
            }
        }
    }
}

impl std::error::Error for MachineError {}

pub type Env = Option<Rc<EnvEntry>>;

#[derive(Debug)]
pub struct EnvEntry {
    pub binder: NodeId,
    pub value: Closure,
    pub next: Env,
}

pub fn env_iter(env: &Env) -> EnvIter<'_> {
    EnvIter(env.as_deref())
}

pub struct EnvIter<'a>(Option<&'a EnvEntry>);

impl<'a> Iterator for EnvIter<'a> {
    type Item = &'a EnvEntry;

    fn next(&mut self) -> Option<&'a EnvEntry> {
        let entry = self.0?;
        self.0 = entry.next.as_deref();
        Some(entry)
    }
}

pub fn env_len(env: &Env) -> usize {
    env_iter(env).count()
}

/// Leftmost entry for `binder`, honoring shadowing.
pub fn env_lookup<'a>(env: &'a Env, binder: NodeId) -> Option<&'a Closure> {
    env_iter(env).find(|e| e.binder == binder).map(|e| &e.value)
}

pub fn env_cons(binder: NodeId, value: Closure, next: Env) -> Env {
    Some(Rc::new(EnvEntry { binder, value, next }))
}

fn env_addr(env: &Env) -> usize {
    env.as_ref().map_or(0, |rc| Rc::as_ptr(rc) as usize)
}

/// Restrict `env` to exactly the binders in `fv` (sorted), preserving entry
/// order. The spine is rebuilt fresh; entry values are shared handles but are
/// charged in full wherever they appear. Errors when a binder is missing,
/// which would break the domain invariant.
pub fn env_restrict(env: &Env, fv: &[NodeId]) -> Result<Env, MachineError> {
    if fv.is_empty() {
        return Ok(None);
    }
    let mut kept: Vec<(NodeId, Closure)> = Vec::with_capacity(fv.len());
    for entry in env_iter(env) {
        if fv.binary_search(&entry.binder).is_ok() {
            kept.push((entry.binder, entry.value.clone()));
        }
    }
    if kept.len() != fv.len() {
        return Err(MachineError::RestrictionDomain { expected: fv.len(), got: kept.len() });
    }
    let mut out: Env = None;
    for (binder, value) in kept.into_iter().rev() {
        out = env_cons(binder, value, out);
    }
    Ok(out)
}

/// A code occurrence paired with an environment, carrying its total bit size
/// and closure count, both fixed at creation.
#[derive(Clone, Debug)]
pub struct Closure {
    pub code_id: NodeId,
    pub env: Env,
    size_bits: u64,
    count: u64,
}

impl Closure {
    pub fn size_bits(&self) -> u64 {
        self.size_bits
    }

    pub fn closure_count(&self) -> u64 {
        self.count
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PairCost {
    pub bits: u64,
    pub count: u64,
}

/// Sizing rules for one run: which code-reference model applies, against
/// which code object.
#[derive(Clone, Copy)]
pub struct Sizing<'c> {
    pub code: &'c Code,
    pub model: SizeModel,
}

impl<'c> Sizing<'c> {
    pub fn new(code: &'c Code, model: SizeModel) -> Sizing<'c> {
        Sizing { code, model }
    }

    pub fn code_bits(&self, id: NodeId) -> u64 {
        match self.model {
            SizeModel::UniformLog => self.code.uniform_bits(),
            SizeModel::LeftAddress => self.code.left_addr_bits(id),
        }
    }

    pub fn name_bits(&self, binder: NodeId, owner: NodeId) -> u64 {
        bits(self.code.binder_distance(binder, owner) as u64)
    }

    /// Cost of the pair (code at `owner`, `env`) using cached entry values.
    /// Uniform sizing compounds cached sizes through copied environments, so
    /// a long run on a duplicating term can pass u64; sums saturate instead
    /// of wrapping.
    pub fn pair_cost(&self, owner: NodeId, env: &Env) -> PairCost {
        let mut cost = PairCost { bits: self.code_bits(owner), count: 1 };
        for entry in env_iter(env) {
            cost.bits = cost
                .bits
                .saturating_add(self.name_bits(entry.binder, owner))
                .saturating_add(entry.value.size_bits);
            cost.count = cost.count.saturating_add(entry.value.count);
        }
        cost
    }

    pub fn closure(&self, code_id: NodeId, env: Env) -> Closure {
        let cost = self.pair_cost(code_id, &env);
        Closure { code_id, env, size_bits: cost.bits, count: cost.count }
    }

    /// Cache-free recomputation of a pair cost, for accounting validation.
    /// Saturates the same way `pair_cost` does, so the two agree even past
    /// the u64 range.
    pub fn pair_cost_structural(&self, owner: NodeId, env: &Env) -> PairCost {
        let mut cost = PairCost { bits: self.code_bits(owner), count: 1 };
        for entry in env_iter(env) {
            let inner = self.pair_cost_structural(entry.value.code_id, &entry.value.env);
            cost.bits = cost
                .bits
                .saturating_add(self.name_bits(entry.binder, owner))
                .saturating_add(inner.bits);
            cost.count = cost.count.saturating_add(inner.count);
        }
        cost
    }
}

/// Clamp a wide running total to the u64 reporting range.
pub(crate) fn clamp_total(total: u128) -> u64 {
    total.min(u64::MAX as u128) as u64
}

/// Tracks the largest left-address bit-size among code references that point
/// into the program region (everything left of the root application).
#[derive(Clone, Copy, Debug)]
pub struct ProgramWatch {
    region_end: NodeId,
    max_bits: u64,
}

impl ProgramWatch {
    pub fn new(code: &Code) -> ProgramWatch {
        ProgramWatch { region_end: code.program_region_end(), max_bits: 0 }
    }

    pub fn note(&mut self, code: &Code, id: NodeId) {
        if id < self.region_end {
            self.max_bits = self.max_bits.max(code.left_addr_bits(id));
        }
    }

    pub fn max_bits(&self) -> u64 {
        self.max_bits
    }
}

/// Decodes closures and machine states back to terms, substituting free
/// variables by their leftmost environment entries. Substituends are closed,
/// so no index shifting is involved. Shared environments are decoded once.
pub struct Decoder<'c> {
    code: &'c Code,
    memo: HashMap<(NodeId, usize), Rc<Term>>,
}

impl<'c> Decoder<'c> {
    pub fn new(code: &'c Code) -> Decoder<'c> {
        Decoder { code, memo: HashMap::new() }
    }

    pub fn closure(&mut self, c: &Closure) -> Result<Rc<Term>, MachineError> {
        self.pair(c.code_id, &c.env)
    }

    pub fn pair(&mut self, id: NodeId, env: &Env) -> Result<Rc<Term>, MachineError> {
        let key = (id, env_addr(env));
        if let Some(t) = self.memo.get(&key) {
            return Ok(t.clone());
        }
        let t = self.walk(id, env, 0)?;
        self.memo.insert(key, t.clone());
        Ok(t)
    }

    fn walk(&mut self, id: NodeId, env: &Env, depth: u32) -> Result<Rc<Term>, MachineError> {
        match self.code.kind(id) {
            NodeKind::Var { index, binder } => {
                if *index <= depth {
                    Ok(Term::var(*index))
                } else {
                    let c = env_lookup(env, *binder)
                        .ok_or(MachineError::UnboundVariable { code_id: id })?
                        .clone();
                    self.closure(&c)
                }
            }
            NodeKind::Lam { body, name } => {
                let name = name.clone();
                let body = self.walk(*body, env, depth + 1)?;
                Ok(Rc::new(Term::Lam(name, body)))
            }
            NodeKind::App { left, right } => {
                let l = self.walk(*left, env, depth)?;
                let r = self.walk(*right, env, depth)?;
                Ok(Term::app(l, r))
            }
        }
    }
}

/// Deep environment checks shared by the machines' `validate`:
/// binder sets must match `fv` of the code exactly (no duplicates) when
/// `exact` is set, and must cover it otherwise.
pub fn check_env_domain(
    code: &Code,
    id: NodeId,
    env: &Env,
    exact: bool,
    seen: &mut HashSet<(NodeId, usize)>,
) -> Result<(), MachineError> {
    if !seen.insert((id, env_addr(env))) {
        return Ok(());
    }
    let fv = code.fv(id);
    let mut found: Vec<NodeId> = Vec::new();
    for entry in env_iter(env) {
        if !found.contains(&entry.binder) {
            found.push(entry.binder);
        }
        check_env_domain(code, entry.value.code_id, &entry.value.env, exact, seen)?;
    }
    if exact {
        let mut found_sorted = found.clone();
        found_sorted.sort_unstable();
        if found_sorted != fv {
            return Err(MachineError::RestrictionDomain {
                expected: fv.len(),
                got: found.len(),
            });
        }
        if env_len(env) != fv.len() {
            return Err(MachineError::RestrictionDomain {
                expected: fv.len(),
                got: env_len(env),
            });
        }
    } else {
        for binder in fv {
            if !found.contains(binder) {
                return Err(MachineError::UnboundVariable { code_id: id });
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransitionKind {
    Sea,
    SeaV,
    SeaNv,
    Beta,
    BetaW,
    BetaNw,
    Sub,
    Ret,
}

impl TransitionKind {
    pub const ALL: [TransitionKind; 8] = [
        TransitionKind::Sea,
        TransitionKind::SeaV,
        TransitionKind::SeaNv,
        TransitionKind::Beta,
        TransitionKind::BetaW,
        TransitionKind::BetaNw,
        TransitionKind::Sub,
        TransitionKind::Ret,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransitionKind::Sea => "sea",
            TransitionKind::SeaV => "sea_v",
            TransitionKind::SeaNv => "sea_nv",
            TransitionKind::Beta => "beta",
            TransitionKind::BetaW => "beta_w",
            TransitionKind::BetaNw => "beta_nw",
            TransitionKind::Sub => "sub",
            TransitionKind::Ret => "ret",
        }
    }

    pub fn is_beta(self) -> bool {
        matches!(self, TransitionKind::Beta | TransitionKind::BetaW | TransitionKind::BetaNw)
    }

    fn index(self) -> usize {
        Self::ALL.iter().position(|k| *k == self).unwrap()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TransitionCounts([u64; 8]);

impl TransitionCounts {
    pub fn get(&self, kind: TransitionKind) -> u64 {
        self.0[kind.index()]
    }

    fn bump(&mut self, kind: TransitionKind) {
        self.0[kind.index()] += 1;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Final,
    FuelExhausted,
}

#[derive(Clone, Debug)]
pub struct TraceRow {
    pub step: u64,
    pub kind: &'static str,
    pub bit_space: u64,
    pub abstract_space: u64,
    pub heap_cells: u64,
}

#[derive(Clone, Debug)]
pub struct RunProfile {
    pub machine: MachineKind,
    pub transitions: u64,
    pub beta_steps: u64,
    pub counts: TransitionCounts,
    pub max_bit_space: u64,
    pub max_abstract_space: Option<u64>,
    pub heap_cells: Option<u64>,
    pub max_program_code_bits: u64,
    pub outcome: Outcome,
    pub trace: Option<Vec<TraceRow>>,
}

impl RunProfile {
    pub fn completed(&self) -> bool {
        self.outcome == Outcome::Final
    }
}

/// One of the four instrumented machines, driven by [`run`].
pub trait Machine {
    fn kind(&self) -> MachineKind;

    /// Perform one transition. `Ok(None)` means the state is final and was
    /// left untouched.
    fn step(&mut self) -> Result<Option<TransitionKind>, MachineError>;

    /// Bit size of the current state under the machine's model.
    fn bit_space(&self) -> u64;

    /// Number of closures in the current state, if the machine counts them.
    fn abstract_space(&self) -> Option<u64>;

    /// Heap cells allocated so far, if the machine has a heap.
    fn heap_cells(&self) -> Option<u64>;

    /// Decode the current state to the term it represents.
    fn decode(&self) -> Result<Rc<Term>, MachineError>;

    /// Largest program-region code reference seen, in left-address bits.
    fn program_code_bits(&self) -> u64;

    /// Deep structural check: invariants plus cache-free size recomputation.
    fn validate(&self) -> Result<(), MachineError>;
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub fuel: u64,
    pub trace: bool,
    /// Run `validate` every this many transitions (tests use this; the
    /// normal driver skips deep checks).
    pub validate_every: Option<u64>,
}

impl RunOptions {
    pub fn new(fuel: u64) -> RunOptions {
        RunOptions { fuel, trace: false, validate_every: None }
    }
}

/// Drive a machine to a final state or until fuel runs out, recording the
/// transition mix and space high-water marks. The initial state is included
/// in the maxima; a trace gets one row for it with kind `init`.
pub fn run(m: &mut dyn Machine, opts: &RunOptions) -> Result<RunProfile, MachineError> {
    let mut prof = RunProfile {
        machine: m.kind(),
        transitions: 0,
        beta_steps: 0,
        counts: TransitionCounts::default(),
        max_bit_space: 0,
        max_abstract_space: m.abstract_space().map(|_| 0),
        heap_cells: m.heap_cells().map(|_| 0),
        max_program_code_bits: 0,
        outcome: Outcome::Final,
        trace: opts.trace.then(Vec::new),
    };
    observe(&mut prof, m, "init", 0);
    if let Some(every) = opts.validate_every {
        if every > 0 {
            m.validate()?;
        }
    }
    loop {
        if prof.transitions == opts.fuel {
            prof.outcome = Outcome::FuelExhausted;
            break;
        }
        match m.step()? {
            None => {
                prof.outcome = Outcome::Final;
                break;
            }
            Some(kind) => {
                prof.transitions += 1;
                prof.counts.bump(kind);
                if kind.is_beta() {
                    prof.beta_steps += 1;
                }
                let step = prof.transitions;
                observe(&mut prof, m, kind.name(), step);
                if let Some(every) = opts.validate_every {
                    if every > 0 && prof.transitions % every == 0 {
                        m.validate()?;
                    }
                }
            }
        }
    }
    if opts.validate_every.is_some() {
        m.validate()?;
    }
    prof.max_program_code_bits = m.program_code_bits();
    Ok(prof)
}

fn observe(prof: &mut RunProfile, m: &dyn Machine, kind: &'static str, step: u64) {
    let bit_space = m.bit_space();
    let abstract_space = m.abstract_space();
    let heap = m.heap_cells();
    prof.max_bit_space = prof.max_bit_space.max(bit_space);
    if let (Some(max), Some(now)) = (prof.max_abstract_space.as_mut(), abstract_space) {
        *max = (*max).max(now);
    }
    if let (Some(max), Some(now)) = (prof.heap_cells.as_mut(), heap) {
        *max = (*max).max(now);
    }
    if let Some(rows) = prof.trace.as_mut() {
        rows.push(TraceRow {
            step,
            kind,
            bit_space,
            abstract_space: abstract_space.unwrap_or(0),
            heap_cells: heap.unwrap_or(0),
        });
    }
}
