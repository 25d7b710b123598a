//! The unoptimized machine: arguments capture the whole current environment,
//! environments are extended at every β and replaced wholesale at sub, and
//! nothing is ever restricted. Code references are priced uniformly.

use std::collections::HashSet;
use std::rc::Rc;

use crate::code::{Code, NodeId, NodeKind};
use crate::machine::{
    check_env_domain, clamp_total, env_cons, env_lookup, Closure, Decoder, Env, Machine,
    MachineError, MachineKind, ProgramWatch, Sizing, TransitionKind,
};
use crate::term::Term;

pub struct NaiveKam<'c> {
    code: &'c Code,
    sizing: Sizing<'c>,
    watch: ProgramWatch,
    active: NodeId,
    env: Env,
    stack: Vec<Closure>,
    // Wide so exact sums of u64-saturated closure sizes survive pops.
    stack_bits: u128,
    stack_count: u128,
}

impl<'c> NaiveKam<'c> {
    pub fn new(code: &'c Code) -> NaiveKam<'c> {
        let mut watch = ProgramWatch::new(code);
        watch.note(code, code.root());
        NaiveKam {
            code,
            sizing: Sizing::new(code, MachineKind::Naive.size_model()),
            watch,
            active: code.root(),
            env: None,
            stack: Vec::new(),
            stack_bits: 0,
            stack_count: 0,
        }
    }

    pub fn env_len(&self) -> usize {
        crate::machine::env_len(&self.env)
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

impl Machine for NaiveKam<'_> {
    fn kind(&self) -> MachineKind {
        MachineKind::Naive
    }

    fn step(&mut self) -> Result<Option<TransitionKind>, MachineError> {
        let code = self.code;
        match *code.kind(self.active) {
            NodeKind::App { left, right } => {
                self.watch.note(code, right);
                let c = self.sizing.closure(right, self.env.clone());
                self.push(c);
                self.active = left;
                self.watch.note(code, left);
                Ok(Some(TransitionKind::Sea))
            }
            NodeKind::Lam { body, .. } => match self.pop() {
                None => Ok(None),
                Some(c) => {
                    let binder = self.active;
                    self.env = env_cons(binder, c, self.env.take());
                    self.active = body;
                    self.watch.note(code, body);
                    Ok(Some(TransitionKind::Beta))
                }
            },
            NodeKind::Var { binder, .. } => {
                let c = env_lookup(&self.env, binder)
                    .ok_or(MachineError::UnboundVariable { code_id: self.active })?
                    .clone();
                self.active = c.code_id;
                self.env = c.env;
                self.watch.note(code, self.active);
                Ok(Some(TransitionKind::Sub))
            }
        }
    }

    fn bit_space(&self) -> u64 {
        let active = self.sizing.pair_cost(self.active, &self.env);
        clamp_total(u128::from(active.bits) + self.stack_bits)
    }

    fn abstract_space(&self) -> Option<u64> {
        let active = self.sizing.pair_cost(self.active, &self.env);
        Some(clamp_total(u128::from(active.count) + self.stack_count))
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
        Ok(acc)
    }

    fn program_code_bits(&self) -> u64 {
        self.watch.max_bits()
    }

    fn validate(&self) -> Result<(), MachineError> {
        let mut seen = HashSet::new();
        check_env_domain(self.code, self.active, &self.env, false, &mut seen)?;
        let active = self.sizing.pair_cost_structural(self.active, &self.env);
        let (mut bits, mut count) = (u128::from(active.bits), u128::from(active.count));
        for c in &self.stack {
            check_env_domain(self.code, c.code_id, &c.env, false, &mut seen)?;
            let cost = self.sizing.pair_cost_structural(c.code_id, &c.env);
            if cost.bits != c.size_bits() {
                return Err(MachineError::Accounting {
                    what: "stack closure bits",
                    cached: c.size_bits(),
                    actual: cost.bits,
                });
            }
            bits += u128::from(cost.bits);
            count += u128::from(cost.count);
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{run, Outcome, RunOptions};
    use crate::term::parse;

    fn compiled(src: &str) -> Code {
        Code::build(&parse(src).unwrap()).unwrap()
    }

    fn opts(fuel: u64) -> RunOptions {
        RunOptions { fuel, trace: false, validate_every: Some(1) }
    }

    #[test]
    fn identity_application() {
        let code = compiled("(\\x.x) (\\y.y)");
        let mut m = NaiveKam::new(&code);
        let prof = run(&mut m, &opts(100)).unwrap();
        assert_eq!(prof.outcome, Outcome::Final);
        assert_eq!(prof.transitions, 3, "sea, beta, sub");
        assert_eq!(prof.beta_steps, 1);
        assert_eq!(m.decode().unwrap(), parse("\\y.y").unwrap());
    }

    #[test]
    fn omega_exhausts_fuel() {
        let code = compiled("(\\o. o o) (\\o. o o)");
        let mut m = NaiveKam::new(&code);
        let prof = run(&mut m, &opts(50)).unwrap();
        assert_eq!(prof.outcome, Outcome::FuelExhausted);
        assert_eq!(prof.transitions, 50);
    }

    #[test]
    fn environments_grow_monotonically_between_subs() {
        let code = compiled("(\\f. f (f (\\z.z))) (\\w. w)");
        let mut m = NaiveKam::new(&code);
        let mut prev = m.env_len();
        for _ in 0..200 {
            match m.step().unwrap() {
                None => return,
                Some(TransitionKind::Sub) => prev = m.env_len(),
                Some(_) => {
                    assert!(m.env_len() >= prev, "entry count shrank without a sub");
                    prev = m.env_len();
                }
            }
        }
        panic!("run did not finish");
    }

    #[test]
    fn argument_env_snapshot_is_by_reference_but_priced_in_full() {
        // After one beta the env has one entry; sea then pushes a closure
        // carrying that whole env, so its bit size exceeds the bare code ref.
        let code = compiled("(\\x. x x) (\\y. y)");
        let mut m = NaiveKam::new(&code);
        // sea, beta: active is now `x x` with env [x ← (λy.y, ε)].
        m.step().unwrap();
        m.step().unwrap();
        m.step().unwrap();
        let pushed = m.stack.last().unwrap();
        assert!(pushed.size_bits() > code.uniform_bits());
        assert_eq!(pushed.closure_count(), 2);
    }

    #[test]
    fn decode_restores_the_initial_term_shape() {
        let code = compiled("(\\x. \\y. x) (\\z.z)");
        let m = NaiveKam::new(&code);
        assert_eq!(m.decode().unwrap(), parse("(\\x. \\y. x) (\\z.z)").unwrap());
    }
}
