//! The space-optimized machine. Environments are restricted to the free
//! variables of the code they accompany at every search step, unused
//! arguments are dropped at β, and variable lookup consumes a singleton
//! environment. Code references are priced by left address.

use std::collections::HashSet;
use std::rc::Rc;

use crate::code::{Code, NodeId, NodeKind};
use crate::machine::{
    check_env_domain, clamp_total, env_cons, env_lookup, env_restrict, Closure, Decoder, Env,
    Machine, MachineError, MachineKind, ProgramWatch, Sizing, TransitionKind,
};
use crate::term::Term;

pub struct SpaceKam<'c> {
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

impl<'c> SpaceKam<'c> {
    pub fn new(code: &'c Code) -> SpaceKam<'c> {
        let mut watch = ProgramWatch::new(code);
        watch.note(code, code.root());
        SpaceKam {
            code,
            sizing: Sizing::new(code, MachineKind::Space.size_model()),
            watch,
            active: code.root(),
            env: None,
            stack: Vec::new(),
            stack_bits: 0,
            stack_count: 0,
        }
    }

    pub fn active_env(&self) -> &Env {
        &self.env
    }

    pub fn active_code(&self) -> NodeId {
        self.active
    }

    pub fn stack_closures(&self) -> &[Closure] {
        &self.stack
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

impl Machine for SpaceKam<'_> {
    fn kind(&self) -> MachineKind {
        MachineKind::Space
    }

    fn step(&mut self) -> Result<Option<TransitionKind>, MachineError> {
        let code = self.code;
        match *code.kind(self.active) {
            NodeKind::App { left, right } => {
                let kind = if let NodeKind::Var { binder, .. } = *code.kind(right) {
                    let c = env_lookup(&self.env, binder)
                        .ok_or(MachineError::UnboundVariable { code_id: right })?
                        .clone();
                    self.watch.note(code, c.code_id);
                    self.push(c);
                    TransitionKind::SeaV
                } else {
                    let arg_env = env_restrict(&self.env, code.fv(right))?;
                    self.watch.note(code, right);
                    let c = self.sizing.closure(right, arg_env);
                    self.push(c);
                    TransitionKind::SeaNv
                };
                self.env = env_restrict(&self.env, code.fv(left))?;
                self.active = left;
                self.watch.note(code, left);
                Ok(Some(kind))
            }
            NodeKind::Lam { body, .. } => match self.pop() {
                None => Ok(None),
                Some(c) => {
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
                }
            },
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
        check_env_domain(self.code, self.active, &self.env, true, &mut seen)?;
        let active = self.sizing.pair_cost_structural(self.active, &self.env);
        let (mut bits, mut count) = (u128::from(active.bits), u128::from(active.count));
        for c in &self.stack {
            check_env_domain(self.code, c.code_id, &c.env, true, &mut seen)?;
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
    use crate::machine::{env_iter, env_len, run, Outcome, RunOptions};
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
        let mut m = SpaceKam::new(&code);
        let prof = run(&mut m, &opts(100)).unwrap();
        assert_eq!(prof.outcome, Outcome::Final);
        assert_eq!(prof.beta_steps, 1);
        assert_eq!(m.decode().unwrap(), parse("\\y.y").unwrap());
    }

    #[test]
    fn unused_argument_is_discarded_without_touching_the_env() {
        let code = compiled("(\\x. \\y. y) (\\o. o o) (\\z.z)");
        let mut m = SpaceKam::new(&code);
        let prof = run(&mut m, &opts(100)).unwrap();
        assert_eq!(prof.outcome, Outcome::Final, "the dropped Ω-ish arg is never run");
        assert_eq!(prof.counts.get(TransitionKind::BetaW), 1);
        assert_eq!(m.decode().unwrap(), parse("\\z.z").unwrap());
    }

    #[test]
    fn environment_stays_a_map_of_the_free_variables() {
        let code = compiled("(\\f. f ((\\a.\\b. a) (f (\\z.z)) (\\w.w))) (\\y. y)");
        let mut m = SpaceKam::new(&code);
        for _ in 0..500 {
            m.validate().unwrap();
            match m.step().unwrap() {
                None => return,
                Some(_) => {
                    assert_eq!(env_len(&m.env), code.fv(m.active).len());
                }
            }
        }
        panic!("run did not finish");
    }

    #[test]
    fn fix_point_burst_reaches_the_argument_in_four_steps() {
        // θ θ u with θ = λx.λy. y (x x y). Two searches bring both θs and u
        // onto the stack; four more transitions make u active below a single
        // recursion closure built from the first θ's inner application.
        let theta = "\\x.\\y. y (x x y)";
        let code = compiled(&format!("({theta}) ({theta}) (\\w. w)"));
        let mut m = SpaceKam::new(&code);
        for _ in 0..2 {
            m.step().unwrap();
        }
        assert_eq!(m.stack.len(), 2);
        let kinds: Vec<_> = (0..4).map(|_| m.step().unwrap().unwrap()).collect();
        assert_eq!(
            kinds,
            [
                TransitionKind::BetaNw,
                TransitionKind::BetaNw,
                TransitionKind::SeaNv,
                TransitionKind::Sub
            ]
        );
        // Active is now u with its own (empty) environment.
        let mut dec = Decoder::new(&code);
        assert_eq!(dec.pair(m.active, &m.env).unwrap(), parse("\\w.w").unwrap());
        // One recursion closure sits on the stack: the inner application of
        // the first θ, closing x over the second θ and y over u.
        assert_eq!(m.stack.len(), 1);
        let k = m.stack.last().unwrap();
        let binders: Vec<_> = env_iter(&k.env).map(|e| e.binder).collect();
        assert_eq!(binders.len(), 2);
        assert_eq!(
            dec.closure(k).unwrap(),
            parse("(\\x.\\y. y (x x y)) (\\x.\\y. y (x x y)) (\\w.w)").unwrap()
        );
    }

    #[test]
    fn decode_agrees_with_weak_head_normalization() {
        for src in [
            "(\\x.x) (\\y.y)",
            "(\\x.\\y. x) (\\z.z) (\\o. o o)",
            "(\\f. f (f (\\z.z))) (\\w. w)",
        ] {
            let code = compiled(src);
            let mut m = SpaceKam::new(&code);
            let prof = run(&mut m, &opts(1000)).unwrap();
            assert_eq!(prof.outcome, Outcome::Final);
            match crate::reduce::whnf(&parse(src).unwrap(), 1000) {
                crate::reduce::WhnfResult::Normal(t, betas) => {
                    assert_eq!(m.decode().unwrap(), t);
                    assert_eq!(prof.beta_steps, betas);
                }
                _ => panic!("oracle ran out of fuel"),
            }
        }
    }
}
