//! Reference evaluator: substitution-based weak head reduction on closed
//! terms. Used as the correctness oracle for every machine.

use std::rc::Rc;

use crate::term::Term;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WhnfResult {
    /// Weak head normal form reached, with the number of head beta steps.
    Normal(Rc<Term>, u64),
    FuelExhausted,
}

impl WhnfResult {
    pub fn normal(self) -> Option<(Rc<Term>, u64)> {
        match self {
            WhnfResult::Normal(t, n) => Some((t, n)),
            WhnfResult::FuelExhausted => None,
        }
    }
}

/// Substitute the closed term `arg` for the variable bound by the stripped
/// binder: occurrences of index `depth + 1` at nesting `depth`. Because the
/// redex sits on the left spine of a closed term, `arg` is closed and no
/// index shifting is required; subtrees without an occurrence are shared.
fn subst_closed(body: &Rc<Term>, arg: &Rc<Term>, depth: u32) -> Rc<Term> {
    match &**body {
        Term::Var(i) => {
            debug_assert!(*i <= depth + 1, "head redex body must close under one binder");
            if *i == depth + 1 {
                arg.clone()
            } else {
                body.clone()
            }
        }
        Term::Lam(n, b) => {
            let b2 = subst_closed(b, arg, depth + 1);
            if Rc::ptr_eq(&b2, b) {
                body.clone()
            } else {
                Rc::new(Term::Lam(n.clone(), b2))
            }
        }
        Term::App(f, a) => {
            let f2 = subst_closed(f, arg, depth);
            let a2 = subst_closed(a, arg, depth);
            if Rc::ptr_eq(&f2, f) && Rc::ptr_eq(&a2, a) {
                body.clone()
            } else {
                Term::app(f2, a2)
            }
        }
    }
}

/// Reduce a closed term to weak head normal form, counting head beta steps.
/// Stops after `fuel` steps.
pub fn whnf(t: &Rc<Term>, fuel: u64) -> WhnfResult {
    let mut steps = 0u64;
    // The term as head + argument spine, innermost argument last-pushed.
    let mut head = t.clone();
    let mut spine: Vec<Rc<Term>> = Vec::new();
    loop {
        match &*head.clone() {
            Term::App(f, a) => {
                spine.push(a.clone());
                head = f.clone();
            }
            Term::Lam(_, body) => match spine.pop() {
                Some(arg) => {
                    if steps == fuel {
                        return WhnfResult::FuelExhausted;
                    }
                    steps += 1;
                    head = subst_closed(body, &arg, 0);
                }
                None => return WhnfResult::Normal(head, steps),
            },
            Term::Var(i) => unreachable!("free variable {i} reached in closed reduction"),
        }
    }
}
