//! Compiled code: an immutable arena for the initial term of a machine run.
//!
//! Nodes are stored in in-order (application: left subtree, node, right
//! subtree; an abstraction node precedes its body), so a node's id is its
//! left address minus one and every subtree occupies a contiguous id range.
//! Machines reference occurrences in this arena and never copy code.

use std::rc::Rc;

use crate::bits;
use crate::term::Term;

pub type NodeId = u32;

#[derive(Clone, Debug)]
pub enum NodeKind {
    Var {
        /// De Bruijn index as written in the source term.
        index: u32,
        /// Node id of the abstraction that binds this occurrence.
        binder: NodeId,
    },
    Lam {
        body: NodeId,
        name: Option<Rc<str>>,
    },
    App {
        left: NodeId,
        right: NodeId,
    },
}

#[derive(Clone, Debug)]
pub struct Node {
    pub kind: NodeKind,
    /// Number of abstraction nodes strictly above this node.
    pub lam_above: u32,
    /// Binders of the free variables of the subterm at this node, sorted.
    fv: Box<[NodeId]>,
}

#[derive(Debug)]
pub struct Code {
    nodes: Vec<Node>,
    root: NodeId,
    uniform_bits: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodeError {
    /// The term has a free variable (smallest escaping index reported).
    Open(u32),
}

impl std::fmt::Display for CodeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CodeError::Open(i) => write!(f, "cannot compile open term (free index {i})"),
        }
    }
}

impl std::error::Error for CodeError {}

/// A step on the path from the root to a subterm, used to pin down specific
/// occurrences of interest in constructed programs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Left,
    Right,
    Body,
}

fn merge_sorted(a: &[NodeId], b: &[NodeId]) -> Box<[NodeId]> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out.into_boxed_slice()
}

impl Code {
    /// Compile a closed term, assigning in-order left addresses.
    pub fn build(t: &Term) -> Result<Code, CodeError> {
        let mut nodes: Vec<Node> = Vec::new();
        let mut binders: Vec<NodeId> = Vec::new();
        let root = build_node(t, &mut nodes, &mut binders, 0)?;
        let uniform_bits = bits(nodes.len() as u64);
        Ok(Code { nodes, root, uniform_bits })
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id as usize]
    }

    pub fn kind(&self, id: NodeId) -> &NodeKind {
        &self.nodes[id as usize].kind
    }

    /// In-order index of the node, counted from 1.
    pub fn left_addr(&self, id: NodeId) -> u64 {
        id as u64 + 1
    }

    /// Bits of a code reference under uniform-log accounting: log of the
    /// whole code size, the same for every occurrence.
    pub fn uniform_bits(&self) -> u64 {
        self.uniform_bits
    }

    /// Bits of a code reference under left-address accounting.
    pub fn left_addr_bits(&self, id: NodeId) -> u64 {
        bits(self.left_addr(id))
    }

    /// Binders of the free variables of the subterm at `id`, sorted.
    pub fn fv(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id as usize].fv
    }

    pub fn fv_contains(&self, id: NodeId, binder: NodeId) -> bool {
        self.fv(id).binary_search(&binder).is_ok()
    }

    /// Binder distance of `binder` seen from the position `pos` it encloses.
    pub fn binder_distance(&self, binder: NodeId, pos: NodeId) -> u32 {
        let d = self.nodes[pos as usize].lam_above;
        let b = self.nodes[binder as usize].lam_above;
        debug_assert!(d > b, "binder must enclose the position");
        d - b
    }

    /// If the root is an application, ids strictly below this bound form its
    /// left operand (in-order layout), e.g. the program part of `program
    /// input`. Otherwise the whole code counts as program.
    pub fn program_region_end(&self) -> NodeId {
        match self.kind(self.root) {
            NodeKind::App { .. } => self.root,
            _ => self.nodes.len() as NodeId,
        }
    }

    /// Resolve a construction path from the root.
    pub fn resolve_path(&self, path: &[Step]) -> Option<NodeId> {
        let mut id = self.root;
        for step in path {
            id = match (step, self.kind(id)) {
                (Step::Left, NodeKind::App { left, .. }) => *left,
                (Step::Right, NodeKind::App { right, .. }) => *right,
                (Step::Body, NodeKind::Lam { body, .. }) => *body,
                _ => return None,
            };
        }
        Some(id)
    }

    /// Rebuild the subterm rooted at `id`.
    pub fn term_at(&self, id: NodeId) -> Rc<Term> {
        match self.kind(id) {
            NodeKind::Var { index, .. } => Term::var(*index),
            NodeKind::Lam { body, name } => Rc::new(Term::Lam(name.clone(), self.term_at(*body))),
            NodeKind::App { left, right } => Term::app(self.term_at(*left), self.term_at(*right)),
        }
    }
}

fn build_node(
    t: &Term,
    nodes: &mut Vec<Node>,
    binders: &mut Vec<NodeId>,
    lam_above: u32,
) -> Result<NodeId, CodeError> {
    match t {
        Term::Var(index) => {
            if *index as usize > binders.len() {
                return Err(CodeError::Open(*index));
            }
            let binder = binders[binders.len() - *index as usize];
            let id = nodes.len() as NodeId;
            nodes.push(Node {
                kind: NodeKind::Var { index: *index, binder },
                lam_above,
                fv: Box::new([binder]),
            });
            Ok(id)
        }
        Term::Lam(name, body) => {
            let id = nodes.len() as NodeId;
            nodes.push(Node {
                kind: NodeKind::Lam { body: 0, name: name.clone() },
                lam_above,
                fv: Box::new([]),
            });
            binders.push(id);
            let body_id = build_node(body, nodes, binders, lam_above + 1)?;
            binders.pop();
            let mut fv: Vec<NodeId> = nodes[body_id as usize].fv.to_vec();
            if let Ok(pos) = fv.binary_search(&id) {
                fv.remove(pos);
            }
            let node = &mut nodes[id as usize];
            node.kind = NodeKind::Lam { body: body_id, name: name.clone() };
            node.fv = fv.into_boxed_slice();
            Ok(id)
        }
        Term::App(left, right) => {
            let left_id = build_node(left, nodes, binders, lam_above)?;
            let id = nodes.len() as NodeId;
            nodes.push(Node {
                kind: NodeKind::App { left: left_id, right: 0 },
                lam_above,
                fv: Box::new([]),
            });
            let right_id = build_node(right, nodes, binders, lam_above)?;
            let fv = merge_sorted(&nodes[left_id as usize].fv, &nodes[right_id as usize].fv);
            let node = &mut nodes[id as usize];
            node.kind = NodeKind::App { left: left_id, right: right_id };
            node.fv = fv;
            Ok(id)
        }
    }
}
