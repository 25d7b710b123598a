//! The call-by-value machine, evaluating arguments right to left. An
//! application parks the function closure and the current stack on the dump
//! and evaluates the argument with an empty stack; a value with an empty
//! stack returns to the most recent dump entry. β and sub behave as in the
//! space-optimized machine, and so does environment restriction.

use std::collections::HashSet;
use std::rc::Rc;

use crate::code::{Code, NodeId, NodeKind};
use crate::machine::{
    check_env_domain, clamp_total, env_cons, env_restrict, Closure, Decoder, Env, Machine,
    MachineError, MachineKind, ProgramWatch, Sizing, TransitionKind,
};
use crate::term::Term;

struct Frame {
    saved: Closure,
    stack: Vec<Closure>,
    stack_bits: u128,
    stack_count: u128,
}

impl Frame {
    fn bits(&self) -> u128 {
        u128::from(self.saved.size_bits()) + self.stack_bits
    }

    fn count(&self) -> u128 {
        u128::from(self.saved.closure_count()) + self.stack_count
    }
}

pub struct SpaceLam<'c> {
    code: &'c Code,
    sizing: Sizing<'c>,
    watch: ProgramWatch,
    active: NodeId,
    env: Env,
    stack: Vec<Closure>,
    // Wide so exact sums of u64-saturated closure sizes survive pops.
    stack_bits: u128,
    stack_count: u128,
    dump: Vec<Frame>,
    dump_bits: u128,
    dump_count: u128,
}

impl<'c> SpaceLam<'c> {
    pub fn new(code: &'c Code) -> SpaceLam<'c> {
        let mut watch = ProgramWatch::new(code);
        watch.note(code, code.root());
        SpaceLam {
            code,
            sizing: Sizing::new(code, MachineKind::Lam.size_model()),
            watch,
            active: code.root(),
            env: None,
            stack: Vec::new(),
            stack_bits: 0,
            stack_count: 0,
            dump: Vec::new(),
            dump_bits: 0,
            dump_count: 0,
        }
    }

    /// The active pair packaged as a closure; on a final state this is the
    /// whole result.
    pub fn final_closure(&self) -> Closure {
        self.sizing.closure(self.active, self.env.clone())
    }

    fn push(&mut self, c: Closure) {
        self.stack_bits += u128::from(c.size_bits());
        self.stack_count += u128::from(c.closure_count());
        self.stack.push(c);
    }

    fn pop(&mut self) -> Option<Closure> {
        let c = self.stack.pop()?;
        self.stack_bits -= u128::from(c.size_bits());
        self.stack_count -= u128::from(c.closure_count());
        Some(c)
    }
}

impl Machine for SpaceLam<'_> {
    fn kind(&self) -> MachineKind {
        MachineKind::Lam
    }

    fn step(&mut self) -> Result<Option<TransitionKind>, MachineError> {
        let code = self.code;
        match *code.kind(self.active) {
            NodeKind::App { left, right } => {
                let fun_env = env_restrict(&self.env, code.fv(left))?;
                self.watch.note(code, left);
                let saved = self.sizing.closure(left, fun_env);
                let arg_env = env_restrict(&self.env, code.fv(right))?;
                let frame = Frame {
                    saved,
                    stack: std::mem::take(&mut self.stack),
                    stack_bits: self.stack_bits,
                    stack_count: self.stack_count,
                };
                self.dump_bits += frame.bits();
                self.dump_count += frame.count();
                self.dump.push(frame);
                self.stack_bits = 0;
                self.stack_count = 0;
                self.env = arg_env;
                self.active = right;
                self.watch.note(code, right);
                Ok(Some(TransitionKind::Sea))
            }
            NodeKind::Lam { body, .. } => {
                if let Some(c) = self.pop() {
                    let binder = self.active;
                    let kind = if code.fv_contains(body, binder) {
                        self.env = env_cons(binder, c, self.env.take());
                        TransitionKind::BetaNw
                    } else {
                        TransitionKind::BetaW
                    };
                    self.active = body;
                    self.watch.note(code, body);
                    Ok(Some(kind))
                } else if let Some(frame) = self.dump.pop() {
                    self.dump_bits -= frame.bits();
                    self.dump_count -= frame.count();
                    let value = self.sizing.closure(self.active, self.env.take());
                    self.active = frame.saved.code_id;
                    self.env = frame.saved.env;
                    self.stack = frame.stack;
                    self.stack_bits = frame.stack_bits;
                    self.stack_count = frame.stack_count;
                    self.push(value);
                    self.watch.note(code, self.active);
                    Ok(Some(TransitionKind::Ret))
                } else {
                    Ok(None)
                }
            }
            NodeKind::Var { binder, .. } => {
                let entry = match &self.env {
                    Some(e) if e.next.is_none() => e,
                    _ => return Err(MachineError::NonSingletonEnv { code_id: self.active }),
                };
                if entry.binder != binder {
                    return Err(MachineError::UnboundVariable { code_id: self.active });
                }
                let c = entry.value.clone();
                self.active = c.code_id;
                self.env = c.env;
                self.watch.note(code, self.active);
                Ok(Some(TransitionKind::Sub))
            }
        }
    }

    fn bit_space(&self) -> u64 {
        let active = self.sizing.pair_cost(self.active, &self.env);
        clamp_total(u128::from(active.bits) + self.stack_bits + self.dump_bits)
    }

    fn abstract_space(&self) -> Option<u64> {
        let active = self.sizing.pair_cost(self.active, &self.env);
        Some(clamp_total(u128::from(active.count) + self.stack_count + self.dump_count))
    }

    fn heap_cells(&self) -> Option<u64> {
        None
    }

    fn decode(&self) -> Result<Rc<Term>, MachineError> {
        let mut dec = Decoder::new(self.code);
        let mut acc = dec.pair(self.active, &self.env)?;
        for c in self.stack.iter().rev() {
            acc = Term::app(acc, dec.closure(c)?);
        }
        for frame in self.dump.iter().rev() {
            acc = Term::app(dec.closure(&frame.saved)?, acc);
            for c in frame.stack.iter().rev() {
                acc = Term::app(acc, dec.closure(c)?);
            }
        }
        Ok(acc)
    }

    fn program_code_bits(&self) -> u64 {
        self.watch.max_bits()
    }

    fn validate(&self) -> Result<(), MachineError> {
        let mut seen = HashSet::new();
        check_env_domain(self.code, self.active, &self.env, true, &mut seen)?;
        let active = self.sizing.pair_cost_structural(self.active, &self.env);
        let (mut bits, mut count) = (u128::from(active.bits), u128::from(active.count));
        let check = |c: &Closure, seen: &mut HashSet<(NodeId, usize)>| {
            check_env_domain(self.code, c.code_id, &c.env, true, seen)?;
            let cost = self.sizing.pair_cost_structural(c.code_id, &c.env);
            if cost.bits != c.size_bits() {
                return Err(MachineError::Accounting {
                    what: "closure bits",
                    cached: c.size_bits(),
                    actual: cost.bits,
                });
            }
            Ok(cost)
        };
        for c in &self.stack {
            let cost = check(c, &mut seen)?;
            bits += u128::from(cost.bits);
            count += u128::from(cost.count);
        }
        for frame in &self.dump {
            let cost = check(&frame.saved, &mut seen)?;
            bits += u128::from(cost.bits);
            count += u128::from(cost.count);
            for c in &frame.stack {
                let cost = check(c, &mut seen)?;
                bits += u128::from(cost.bits);
                count += u128::from(cost.count);
            }
        }
        if clamp_total(bits) != self.bit_space() {
            return Err(MachineError::Accounting {
                what: "state bits",
                cached: self.bit_space(),
                actual: clamp_total(bits),
            });
        }
        if Some(clamp_total(count)) != self.abstract_space() {
            return Err(MachineError::Accounting {
                what: "closure count",
                cached: self.abstract_space().unwrap_or(0),
                actual: clamp_total(count),
            });
        }
        Ok(())
    }
}
