//! Parameterized term families used by the experiments.
//!
//! Each family maps a size parameter to a closed program whose run profile
//! exercises one growth regime: the scrollers walk Scott strings, the eta
//! family pads a program with expansions that unchaining consumes for free,
//! and the counter family nests applications so that restriction-based
//! environments double in accounted size at every level.

use std::rc::Rc;

use crate::encodings::{bin_number, bin_succ, identity, scott_string, scroller, Alphabet, Scroller};
use crate::term::{eta_expand, Term};

/// `len` bits alternating 0101.., the pinned experiment input.
pub fn alternating_bits(len: usize) -> String {
    (0..len).map(|k| if k % 2 == 0 { '0' } else { '1' }).collect()
}

/// A scroller applied to the alternating string of the given length.
pub fn scroller_program(kind: Scroller, len: usize) -> Rc<Term> {
    let input = scott_string(&Alphabet::binary(), &alternating_bits(len)).unwrap();
    Term::app(scroller(kind), input)
}

/// Nested-context family whose evaluation threads ever-larger stacks into
/// the environment: level k wraps the payload in `\xk. [..] (x0 .. xk)`,
/// level 0 uses `x0 x0`, the payload `\y. I` discards it all, and the whole
/// tower is applied to I. Environments without sharing double in accounted
/// size per level while only Theta(n) transitions run.
pub fn counter_term(n: u32) -> Rc<Term> {
    let mut t: Rc<Term> = Term::lam_named("y", identity());
    for k in (0..=n).rev() {
        let arg = if k == 0 {
            Term::app(Term::var(1), Term::var(1))
        } else {
            Term::apps(Term::var(k + 1), (1..=k).rev().map(Term::var))
        };
        t = Term::lam_named(&format!("x{k}"), Term::app(t, arg));
    }
    Term::app(t, identity())
}

/// A program split into a head to eta-expand and the arguments it consumes.
pub struct EtaBase {
    pub name: &'static str,
    pub head: Rc<Term>,
    pub args: Vec<Rc<Term>>,
}

/// Five pinned argument-supplying programs for the eta family.
pub fn eta_bases() -> Vec<EtaBase> {
    let bin = Alphabet::binary();
    vec![
        EtaBase { name: "identity", head: identity(), args: vec![identity()] },
        EtaBase {
            name: "toy",
            head: scroller(Scroller::Toy),
            args: vec![scott_string(&bin, "0101").unwrap()],
        },
        EtaBase {
            name: "glcpy",
            head: scroller(Scroller::GlCpy),
            args: vec![scott_string(&bin, "0110").unwrap()],
        },
        EtaBase { name: "succ", head: bin_succ(), args: vec![bin_number(6)] },
        EtaBase {
            name: "projection",
            head: crate::term::parse("\\a.\\b.a").unwrap(),
            args: vec![identity(), identity()],
        },
    ]
}

/// The base program with its head eta-expanded n times; n = 0 is the
/// original program.
pub fn eta_program(base: &EtaBase, n: u32) -> Rc<Term> {
    Term::apps(eta_expand(&base.head, n), base.args.iter().cloned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::Code;
    use crate::encodings::read_scott_string;
    use crate::machine::{MachineKind, RunOptions, RunProfile};
    use crate::machines::execute;
    use crate::term::{constructor_size, is_closed, parse, render};

    fn run(kind: MachineKind, t: &Rc<Term>, fuel: u64) -> (Rc<Term>, RunProfile) {
        let code = Code::build(t).unwrap();
        let ex = execute(kind, &code, &RunOptions::new(fuel)).unwrap();
        assert!(ex.profile.completed(), "fuel exhausted on {}", render(t));
        (ex.result.unwrap(), ex.profile)
    }

    #[test]
    fn counter_towers_have_the_pinned_shape() {
        assert_eq!(
            counter_term(0),
            parse("(\\x0. (\\y.\\w.w) (x0 x0)) (\\w.w)").unwrap()
        );
        assert_eq!(
            counter_term(2),
            parse(
                "(\\x0. (\\x1. (\\x2. (\\y.\\w.w) (x0 x1 x2)) (x0 x1)) (x0 x0)) (\\w.w)"
            )
            .unwrap()
        );
        for n in 0..=12 {
            let t = counter_term(n);
            assert!(is_closed(&t));
            // Level k adds a binder, an application pair, and k+1 (or 2)
            // argument variables; growth is quadratic overall.
            assert!(constructor_size(&t) > constructor_size(&counter_term(n.saturating_sub(1))) || n == 0);
        }
    }

    #[test]
    fn counter_runs_end_at_identity_in_linear_transitions() {
        let mut transitions = Vec::new();
        for n in 0..=10u32 {
            let (out, prof) = run(MachineKind::Space, &counter_term(n), 1 << 16);
            assert_eq!(out, identity());
            transitions.push(prof.transitions);
        }
        let diffs: Vec<u64> = transitions.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(
            diffs.windows(2).all(|w| w[0] == w[1]),
            "transition growth must be flat per level, got {transitions:?}"
        );
    }

    #[test]
    fn counter_environments_double_in_accounted_size() {
        for n in 2..=12u32 {
            let (_, prof) = run(MachineKind::Space, &counter_term(n), 1 << 16);
            assert!(
                prof.max_bit_space >= 1 << n,
                "bit space {} at n={n} is below the doubling floor",
                prof.max_bit_space
            );
        }
    }

    #[test]
    fn sharing_keeps_the_counter_family_polynomial() {
        let mut cells = Vec::new();
        for n in 2..=12u32 {
            let (out, prof) = run(MachineKind::Time, &counter_term(n), 1 << 16);
            assert_eq!(out, identity());
            cells.push(prof.heap_cells.unwrap());
        }
        let diffs: Vec<u64> = cells.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(
            diffs.windows(2).all(|w| w[0] == w[1]),
            "heap growth must be flat per level, got {cells:?}"
        );
    }

    #[test]
    fn scroller_programs_wrap_the_pinned_inputs() {
        assert_eq!(alternating_bits(5), "01010");
        assert_eq!(alternating_bits(0), "");
        let p = scroller_program(Scroller::GlCpy, 4);
        let (out, _) = run(MachineKind::Space, &p, 1 << 16);
        assert_eq!(
            read_scott_string(&out, &Alphabet::binary()).unwrap(),
            "0101"
        );
    }

    #[test]
    fn eta_padding_is_free_for_closure_counts() {
        for base in eta_bases() {
            let (base_out, base_prof) = run(MachineKind::Space, &eta_program(&base, 0), 1 << 18);
            for n in [1u32, 2, 4, 8, 16] {
                let (out, prof) = run(MachineKind::Space, &eta_program(&base, n), 1 << 18);
                assert_eq!(out, base_out, "{} at n={n}", base.name);
                assert_eq!(
                    prof.max_abstract_space, base_prof.max_abstract_space,
                    "{} at n={n}: unchaining must absorb the expansions",
                    base.name
                );
                assert_eq!(prof.beta_steps, base_prof.beta_steps + u64::from(n));
            }
        }
    }

    #[test]
    fn eta_padding_costs_at_most_a_pointer_widening() {
        // Frozen after measurement: bit growth stays within a small multiple
        // of the widened code-pointer length.
        for base in eta_bases() {
            let (_, base_prof) = run(MachineKind::Space, &eta_program(&base, 0), 1 << 18);
            for n in [1u32, 2, 4, 8, 16] {
                let (_, prof) = run(MachineKind::Space, &eta_program(&base, n), 1 << 18);
                let grown = prof.max_bit_space.saturating_sub(base_prof.max_bit_space);
                let allowance = 12 * crate::bits(u64::from(n) + 2);
                assert!(
                    grown <= allowance,
                    "{} at n={n}: bit growth {grown} exceeds allowance {allowance}",
                    base.name
                );
            }
        }
    }
}
