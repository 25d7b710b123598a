//! Constructor lookup at a tree address of a machine result, without
//! materializing the decoded term.
//!
//! The decoded term of a closure is its code occurrence with every variable
//! reaching outside that occurrence replaced by the decoding of its
//! environment entry. To read one constructor we therefore walk the code
//! along the address, and when the address crosses such a variable we jump
//! into the entry and keep walking there. The working set is a single
//! cursor: one code position, one split of the address into consumed and
//! remaining bits, one environment designation.

use crate::code::{Code, NodeId, NodeKind};
use crate::machine::{env_lookup, Closure, Env};
use crate::term::Label;

/// Usage meter for the walk. `max_live` counts cursors alive at once and
/// stays at 1; `steps` counts visited constructors; `jumps` counts moves
/// into an environment entry.
#[derive(Clone, Copy, Debug, Default)]
pub struct CursorGauge {
    live: u32,
    pub max_live: u32,
    pub steps: u64,
    pub jumps: u64,
}

impl CursorGauge {
    pub fn new() -> CursorGauge {
        CursorGauge::default()
    }

    fn alloc(&mut self) {
        self.live += 1;
        self.max_live = self.max_live.max(self.live);
    }

    fn free(&mut self) {
        self.live -= 1;
    }

    fn step(&mut self) {
        self.steps += 1;
    }

    fn jump(&mut self) {
        self.jumps += 1;
    }
}

struct Cursor {
    node: NodeId,
    /// Binders crossed inside the current code occurrence.
    crossed: u32,
    env: Env,
}

/// The constructor of `decode(closure)` at `addr`, where the closure's code
/// ids live in `code`. `Label::Undefined` when the address leaves the term.
pub fn constructor_at(code: &Code, closure: &Closure, addr: &[bool]) -> Label {
    let mut gauge = CursorGauge::new();
    constructor_at_gauged(code, closure, addr, &mut gauge)
}

/// Same walk with its usage metered into `gauge`.
pub fn constructor_at_gauged(
    code: &Code,
    closure: &Closure,
    addr: &[bool],
    gauge: &mut CursorGauge,
) -> Label {
    gauge.alloc();
    let mut cur = Cursor {
        node: closure.code_id,
        crossed: 0,
        env: closure.env.clone(),
    };
    let mut suffix = addr;
    let label = loop {
        gauge.step();
        match *code.kind(cur.node) {
            NodeKind::Var { index, binder } => {
                if index <= cur.crossed {
                    // Bound by one of the binders crossed on this walk; the
                    // decoded term keeps the index verbatim.
                    break match suffix.is_empty() {
                        true => Label::DeBruijn(index),
                        false => Label::Undefined,
                    };
                }
                match env_lookup(&cur.env, binder) {
                    Some(c) => {
                        let (node, env) = (c.code_id, c.env.clone());
                        gauge.jump();
                        cur.node = node;
                        cur.crossed = 0;
                        cur.env = env;
                    }
                    // No entry to decode into; the variable stands for
                    // itself.
                    None => {
                        break match suffix.is_empty() {
                            true => Label::DeBruijn(index),
                            false => Label::Undefined,
                        };
                    }
                }
            }
            NodeKind::Lam { body, .. } => match suffix.split_first() {
                None => break Label::Lambda,
                Some((_, rest)) => {
                    suffix = rest;
                    cur.node = body;
                    cur.crossed += 1;
                }
            },
            NodeKind::App { left, right } => match suffix.split_first() {
                None => break Label::Apply,
                Some((bit, rest)) => {
                    suffix = rest;
                    cur.node = if *bit { right } else { left };
                }
            },
        }
    };
    gauge.free();
    label
}

/// Whether two results carry the same constructor at `addr`. The closures
/// may come from different machines over different code graphs.
pub fn finals_equal_at(
    code_a: &Code,
    a: &Closure,
    code_b: &Code,
    b: &Closure,
    addr: &[bool],
) -> bool {
    constructor_at(code_a, a, addr) == constructor_at(code_b, b, addr)
}
