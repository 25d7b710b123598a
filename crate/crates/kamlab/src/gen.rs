//! Seeded random closed terms, for differential runs across machines.
//!
//! The generator is deterministic in the seed. Sizes are constructor counts
//! and stay at or below the requested budget. The `det` flag keeps every
//! application argument a variable or an abstraction, so call-by-name and
//! call-by-value agree on the generated programs.

use std::rc::Rc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::term::Term;

#[derive(Clone, Copy, Debug)]
pub struct GenOptions {
    /// Upper bound on constructor size; the smallest closed term has size 2.
    pub max_size: u64,
    /// Restrict application arguments to variables and abstractions.
    pub det: bool,
}

pub fn closed_term(seed: u64, opts: &GenOptions) -> Rc<Term> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gen(&mut rng, opts.max_size.max(2), 0, opts.det, false)
}

/// `count` terms from consecutive seeds starting at `seed`.
pub fn corpus(seed: u64, count: usize, opts: &GenOptions) -> Vec<Rc<Term>> {
    (0..count as u64).map(|i| closed_term(seed.wrapping_add(i), opts)).collect()
}

/// Smallest size at which a term can be generated: a variable under at least
/// one binder, otherwise an abstraction over one.
fn min_size(depth: u32) -> u64 {
    if depth > 0 {
        1
    } else {
        2
    }
}

fn gen(rng: &mut ChaCha8Rng, budget: u64, depth: u32, det: bool, value_only: bool) -> Rc<Term> {
    debug_assert!(budget >= min_size(depth));
    if budget == 1 {
        return Term::var(pick_index(rng, depth));
    }
    // An application spends one constructor plus both operands.
    let app_min = 1 + min_size(depth) * 2;
    let w_var = if depth > 0 && budget <= 4 { 2 } else { 0 };
    let w_lam: u32 = 4;
    let w_app = if !value_only && budget >= app_min { 5 } else { 0 };
    let roll = rng.random_range(0..w_var + w_lam + w_app);
    if roll < w_var {
        return Term::var(pick_index(rng, depth));
    }
    if roll < w_var + w_lam {
        return Term::lam(gen(rng, budget - 1, depth + 1, det, false));
    }
    let space = budget - 1;
    let right_min = if det && depth == 0 { 2 } else { min_size(depth) };
    let right_max = space - min_size(depth);
    // Sample the argument small: deep spines make longer interesting runs.
    let a = rng.random_range(right_min..=right_max);
    let b = rng.random_range(right_min..=right_max);
    let right_budget = a.min(b);
    let left = gen(rng, space - right_budget, depth, det, false);
    let right = gen(rng, right_budget, depth, det, det);
    Term::app(left, right)
}

fn pick_index(rng: &mut ChaCha8Rng, depth: u32) -> u32 {
    debug_assert!(depth > 0);
    if depth == 1 || rng.random_bool(0.5) {
        1
    } else {
        rng.random_range(1..=depth)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::Code;
    use crate::machine::{run, Outcome, RunOptions};
    use crate::machines::SpaceKam;
    use crate::term::{constructor_size, in_lambda_det};

    #[test]
    fn tight_budget_yields_the_identity() {
        let opts = GenOptions { max_size: 2, det: false };
        for seed in [1, 2] {
            assert_eq!(closed_term(seed, &opts), Term::lam(Term::var(1)));
        }
    }

    #[test]
    fn corpus_terms_are_closed_and_within_budget() {
        let opts = GenOptions { max_size: 40, det: false };
        for t in corpus(7, 100, &opts) {
            assert!(crate::term::is_closed(&t));
            assert!(constructor_size(&t) <= 40);
            Code::build(&t).unwrap();
        }
    }

    #[test]
    fn det_corpus_stays_deterministic_fragment() {
        let opts = GenOptions { max_size: 36, det: true };
        for t in corpus(11, 100, &opts) {
            assert!(crate::term::is_closed(&t));
            assert!(in_lambda_det(&t), "{t:?}");
        }
    }

    #[test]
    fn same_seed_same_term() {
        let opts = GenOptions { max_size: 50, det: false };
        assert_eq!(closed_term(99, &opts), closed_term(99, &opts));
    }

    #[test]
    fn enough_of_the_corpus_normalizes() {
        let opts = GenOptions { max_size: 30, det: false };
        let terms = corpus(42, 200, &opts);
        let mut finished = 0;
        for t in &terms {
            let code = Code::build(t).unwrap();
            let mut m = SpaceKam::new(&code);
            let prof = run(&mut m, &RunOptions::new(4000)).unwrap();
            if prof.outcome == Outcome::Final {
                finished += 1;
            }
        }
        assert!(finished >= 60, "only {finished}/200 normalized");
    }
}
