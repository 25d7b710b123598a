//! The heap machine: environments and stacks live in a grow-only store of
//! cells addressed by allocation order, so search and β run in constant time
//! at the price of never reclaiming space. Variable arguments are unchained
//! (search pushes the looked-up closure, not the variable). Code references
//! are priced uniformly; an address costs the bit-length of the number of
//! cells allocated so far.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use crate::bits;
use crate::code::{Code, NodeId, NodeKind};
use crate::machine::{Machine, MachineError, MachineKind, ProgramWatch, TransitionKind};
use crate::term::Term;

/// Heap address; 0 is the empty stack or environment.
type Addr = u32;

#[derive(Clone, Copy, Debug)]
enum Cell {
    Stack { code: NodeId, env: Addr, next: Addr },
    Entry { binder: NodeId, code: NodeId, env: Addr, next: Addr },
}

pub struct TimeKam<'c> {
    code: &'c Code,
    watch: ProgramWatch,
    active: NodeId,
    env: Addr,
    stack: Addr,
    heap: Vec<Cell>,
    /// Bits of all cell payloads excluding address slots.
    heap_fixed_bits: u64,
    /// Number of address slots across all cells (two per cell).
    heap_addr_slots: u64,
}

impl<'c> TimeKam<'c> {
    pub fn new(code: &'c Code) -> TimeKam<'c> {
        let mut watch = ProgramWatch::new(code);
        watch.note(code, code.root());
        TimeKam {
            code,
            watch,
            active: code.root(),
            env: 0,
            stack: 0,
            heap: Vec::new(),
            heap_fixed_bits: 0,
            heap_addr_slots: 0,
        }
    }

    fn alloc(&mut self, cell: Cell) -> Addr {
        let uniform = self.code.uniform_bits();
        self.heap_fixed_bits += match cell {
            // A stack cell holds a closure and the next address; an entry
            // cell additionally holds the variable, itself a code reference.
            Cell::Stack { .. } => uniform,
            Cell::Entry { .. } => 2 * uniform,
        };
        self.heap_addr_slots += 2;
        self.heap.push(cell);
        self.heap.len() as Addr
    }

    fn cell(&self, addr: Addr) -> Result<Cell, MachineError> {
        if addr == 0 || addr as usize > self.heap.len() {
            return Err(MachineError::DanglingAddress { addr });
        }
        Ok(self.heap[addr as usize - 1])
    }

    /// Leftmost entry for `binder` along the chain at `env`.
    fn lookup(&self, mut env: Addr, binder: NodeId, at: NodeId) -> Result<(NodeId, Addr), MachineError> {
        while env != 0 {
            match self.cell(env)? {
                Cell::Entry { binder: b, code, env: cenv, next } => {
                    if b == binder {
                        return Ok((code, cenv));
                    }
                    env = next;
                }
                Cell::Stack { .. } => return Err(MachineError::DanglingAddress { addr: env }),
            }
        }
        Err(MachineError::UnboundVariable { code_id: at })
    }

    fn addr_bits(&self) -> u64 {
        bits(self.heap.len() as u64)
    }
}

impl Machine for TimeKam<'_> {
    fn kind(&self) -> MachineKind {
        MachineKind::Time
    }

    fn step(&mut self) -> Result<Option<TransitionKind>, MachineError> {
        let code = self.code;
        match *code.kind(self.active) {
            NodeKind::App { left, right } => {
                let kind = if let NodeKind::Var { binder, .. } = *code.kind(right) {
                    let (ccode, cenv) = self.lookup(self.env, binder, right)?;
                    self.watch.note(code, ccode);
                    self.stack = self.alloc(Cell::Stack { code: ccode, env: cenv, next: self.stack });
                    TransitionKind::SeaV
                } else {
                    self.watch.note(code, right);
                    self.stack =
                        self.alloc(Cell::Stack { code: right, env: self.env, next: self.stack });
                    TransitionKind::SeaNv
                };
                self.active = left;
                self.watch.note(code, left);
                Ok(Some(kind))
            }
            NodeKind::Lam { body, .. } => {
                if self.stack == 0 {
                    return Ok(None);
                }
                let Cell::Stack { code: ccode, env: cenv, next } = self.cell(self.stack)? else {
                    return Err(MachineError::DanglingAddress { addr: self.stack });
                };
                let binder = self.active;
                self.env =
                    self.alloc(Cell::Entry { binder, code: ccode, env: cenv, next: self.env });
                self.stack = next;
                self.active = body;
                self.watch.note(code, body);
                Ok(Some(TransitionKind::Beta))
            }
            NodeKind::Var { binder, .. } => {
                let (ccode, cenv) = self.lookup(self.env, binder, self.active)?;
                self.active = ccode;
                self.env = cenv;
                self.watch.note(code, self.active);
                Ok(Some(TransitionKind::Sub))
            }
        }
    }

    fn bit_space(&self) -> u64 {
        let addr = self.addr_bits();
        self.code.uniform_bits() + 2 * addr + self.heap_fixed_bits + self.heap_addr_slots * addr
    }

    fn abstract_space(&self) -> Option<u64> {
        None
    }

    fn heap_cells(&self) -> Option<u64> {
        Some(self.heap.len() as u64)
    }

    fn decode(&self) -> Result<Rc<Term>, MachineError> {
        let mut dec = TimeDecoder { m: self, memo: HashMap::new() };
        let mut acc = dec.walk(self.active, self.env, 0)?;
        let mut s = self.stack;
        while s != 0 {
            let Cell::Stack { code, env, next } = self.cell(s)? else {
                return Err(MachineError::DanglingAddress { addr: s });
            };
            acc = Term::app(acc, dec.pair(code, env)?);
            s = next;
        }
        Ok(acc)
    }

    fn program_code_bits(&self) -> u64 {
        self.watch.max_bits()
    }

    fn validate(&self) -> Result<(), MachineError> {
        let uniform = self.code.uniform_bits();
        let mut fixed = 0u64;
        let mut slots = 0u64;
        for cell in &self.heap {
            let (env, next) = match *cell {
                Cell::Stack { env, next, .. } => {
                    fixed += uniform;
                    (env, next)
                }
                Cell::Entry { env, next, .. } => {
                    fixed += 2 * uniform;
                    (env, next)
                }
            };
            slots += 2;
            for addr in [env, next] {
                if addr as usize > self.heap.len() {
                    return Err(MachineError::DanglingAddress { addr });
                }
            }
        }
        if fixed != self.heap_fixed_bits {
            return Err(MachineError::Accounting {
                what: "heap payload bits",
                cached: self.heap_fixed_bits,
                actual: fixed,
            });
        }
        if slots != self.heap_addr_slots {
            return Err(MachineError::Accounting {
                what: "heap address slots",
                cached: self.heap_addr_slots,
                actual: slots,
            });
        }
        // Every closure reachable from the active pair or the stack chain
        // must carry entries for all its free variables.
        let mut pending: Vec<(NodeId, Addr)> = vec![(self.active, self.env)];
        let mut s = self.stack;
        while s != 0 {
            let Cell::Stack { code, env, next } = self.cell(s)? else {
                return Err(MachineError::DanglingAddress { addr: s });
            };
            pending.push((code, env));
            s = next;
        }
        let mut seen: HashSet<(NodeId, Addr)> = HashSet::new();
        while let Some((code_id, env)) = pending.pop() {
            if !seen.insert((code_id, env)) {
                continue;
            }
            for &binder in self.code.fv(code_id) {
                let (ccode, cenv) = self.lookup(env, binder, code_id)?;
                pending.push((ccode, cenv));
            }
        }
        Ok(())
    }
}

struct TimeDecoder<'a, 'c> {
    m: &'a TimeKam<'c>,
    memo: HashMap<(NodeId, Addr), Rc<Term>>,
}

impl TimeDecoder<'_, '_> {
    fn pair(&mut self, id: NodeId, env: Addr) -> Result<Rc<Term>, MachineError> {
        if let Some(t) = self.memo.get(&(id, env)) {
            return Ok(t.clone());
        }
        let t = self.walk(id, env, 0)?;
        self.memo.insert((id, env), t.clone());
        Ok(t)
    }

    fn walk(&mut self, id: NodeId, env: Addr, depth: u32) -> Result<Rc<Term>, MachineError> {
        match self.m.code.kind(id) {
            NodeKind::Var { index, binder } => {
                if *index <= depth {
                    Ok(Term::var(*index))
                } else {
                    let (ccode, cenv) = self.m.lookup(env, *binder, id)?;
                    self.pair(ccode, cenv)
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
