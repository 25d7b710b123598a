//! Scott-style data encodings and the closed combinators built over them.
//!
//! A character over an alphabet of n symbols is a selector with n binders
//! that returns the binder of its symbol. A string is a right-nested chain
//! of cells with n+1 binders, where the extra binder marks the empty string.
//! Binary numbers are canonical little-endian bit strings over {0,1}; the
//! empty string is zero, and no encoding ends in a zero bit.
//!
//! The arithmetic and tape-reading combinators are written in
//! continuation-passing style: every application argument is a variable or
//! an abstraction. Terms of that shape evaluate identically under
//! call-by-name and right-to-left call-by-value, which is what lets one
//! space analysis cover both disciplines.

use std::fmt;
use std::rc::Rc;

use crate::term::{self, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EncodeError {
    EmptyAlphabet,
    DuplicateSymbol(char),
    /// 1-based selector index outside the alphabet.
    IndexOutOfRange(usize),
    UnknownSymbol(char),
    /// The term does not have the expected constructor shape.
    Shape(&'static str),
}

impl fmt::Display for EncodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EncodeError::EmptyAlphabet => write!(f, "alphabet has no symbols"),
            EncodeError::DuplicateSymbol(c) => write!(f, "duplicate alphabet symbol '{c}'"),
            EncodeError::IndexOutOfRange(i) => write!(f, "selector index {i} out of range"),
            EncodeError::UnknownSymbol(c) => write!(f, "symbol '{c}' not in alphabet"),
            EncodeError::Shape(what) => write!(f, "unexpected term shape: {what}"),
        }
    }
}

impl std::error::Error for EncodeError {}

/// Ordered, duplicate-free set of symbols. Selector indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new(symbols: &[char]) -> Result<Alphabet, EncodeError> {
        if symbols.is_empty() {
            return Err(EncodeError::EmptyAlphabet);
        }
        for (k, c) in symbols.iter().enumerate() {
            if symbols[..k].contains(c) {
                return Err(EncodeError::DuplicateSymbol(*c));
            }
        }
        Ok(Alphabet { symbols: symbols.to_vec() })
    }

    /// Bits of a machine tape: 0, 1.
    pub fn binary() -> Alphabet {
        Alphabet::new(&['0', '1']).unwrap()
    }

    /// Answers of the input reader: a bit, left of the tape, right of it.
    pub fn input() -> Alphabet {
        Alphabet::new(&['0', '1', 'L', 'R']).unwrap()
    }

    /// Work-tape cells: a bit or the blank '_'.
    pub fn work() -> Alphabet {
        Alphabet::new(&['0', '1', '_']).unwrap()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    /// 1-based index of `c`.
    pub fn index_of(&self, c: char) -> Option<usize> {
        self.symbols.iter().position(|s| *s == c).map(|p| p + 1)
    }

    /// Symbol at the 1-based index `i`.
    pub fn symbol(&self, i: usize) -> Option<char> {
        if i == 0 { None } else { self.symbols.get(i - 1).copied() }
    }
}

fn selector_name(c: char) -> String {
    format!("x{c}")
}

/// Character selector for the i-th symbol (1-based): n binders, returns the
/// i-th one counted from the outside.
pub fn scott_char(alpha: &Alphabet, i: usize) -> Result<Rc<Term>, EncodeError> {
    let n = alpha.len();
    if i == 0 || i > n {
        return Err(EncodeError::IndexOutOfRange(i));
    }
    let mut t = Term::var((n - i + 1) as u32);
    for k in (1..=n).rev() {
        t = Term::lam_named(&selector_name(alpha.symbols[k - 1]), t);
    }
    Ok(t)
}

fn wrap_string_binders(alpha: &Alphabet, body: Rc<Term>) -> Rc<Term> {
    let mut t = Term::lam_named("xe", body);
    for k in (1..=alpha.len()).rev() {
        t = Term::lam_named(&selector_name(alpha.symbols[k - 1]), t);
    }
    t
}

/// String encoding: n+1 binders per cell, the extra innermost binder is the
/// empty-string case. A cell for the i-th symbol applies its binder to the
/// encoded tail.
pub fn scott_string(alpha: &Alphabet, s: &str) -> Result<Rc<Term>, EncodeError> {
    let n = alpha.len() as u32;
    let mut t = wrap_string_binders(alpha, Term::var(1));
    for c in s.chars().rev() {
        let i = alpha.index_of(c).ok_or(EncodeError::UnknownSymbol(c))? as u32;
        t = wrap_string_binders(alpha, Term::app(Term::var(n + 2 - i), t));
    }
    Ok(t)
}

/// Inverse of [`scott_string`]. Strict about the shape: anything that is not
/// a chain of string cells is an error.
pub fn read_scott_string(t: &Term, alpha: &Alphabet) -> Result<String, EncodeError> {
    let n = alpha.len() as u32;
    let mut out = String::new();
    let mut cell = t;
    loop {
        let mut body = cell;
        for _ in 0..=n {
            match body {
                Term::Lam(_, b) => body = b,
                _ => return Err(EncodeError::Shape("string cell is missing binders")),
            }
        }
        match body {
            Term::Var(1) => return Ok(out),
            Term::Var(_) => return Err(EncodeError::Shape("lone variable is not the empty-string binder")),
            Term::App(head, tail) => {
                let Term::Var(ix) = **head else {
                    return Err(EncodeError::Shape("cell head is not a selector variable"));
                };
                if ix < 2 || ix > n + 1 {
                    return Err(EncodeError::Shape("cell head escapes the cell binders"));
                }
                out.push(alpha.symbol((n + 2 - ix) as usize).unwrap());
                cell = tail;
            }
            Term::Lam(..) => return Err(EncodeError::Shape("cell body has too many binders")),
        }
    }
}

/// Two-binder boolean: `Some(true)` for the first projection, `Some(false)`
/// for the second.
pub fn read_bool(t: &Term) -> Option<bool> {
    let Term::Lam(_, b) = t else { return None };
    let Term::Lam(_, b) = &**b else { return None };
    match &**b {
        Term::Var(2) => Some(true),
        Term::Var(1) => Some(false),
        _ => None,
    }
}

/// Little-endian canonical bit string of `n`; zero is the empty string.
pub fn nat_to_bits(mut n: u64) -> String {
    let mut s = String::new();
    while n > 0 {
        s.push(if n & 1 == 1 { '1' } else { '0' });
        n >>= 1;
    }
    s
}

pub fn bits_to_nat(s: &str) -> Result<u64, EncodeError> {
    let mut v = 0u64;
    for (k, c) in s.chars().enumerate() {
        match c {
            '0' => {}
            '1' => v |= 1u64 << k,
            _ => return Err(EncodeError::UnknownSymbol(c)),
        }
    }
    Ok(v)
}

/// Scott string of the canonical bit representation of `n`.
pub fn bin_number(n: u64) -> Rc<Term> {
    scott_string(&Alphabet::binary(), &nat_to_bits(n)).unwrap()
}

pub fn read_bin_number(t: &Term) -> Result<u64, EncodeError> {
    bits_to_nat(&read_scott_string(t, &Alphabet::binary())?)
}

/// n-tuple as `\x. x t1 .. tn`. Components must be closed, since they are
/// spliced under the fresh binder unshifted.
pub fn scott_tuple(items: &[Rc<Term>]) -> Rc<Term> {
    debug_assert!(items.iter().all(|t| term::is_closed(t)));
    let mut body = Term::var(1);
    for it in items {
        body = Term::app(body, it.clone());
    }
    Term::lam_named("x", body)
}

/// Inverse of [`scott_tuple`] for a known arity.
pub fn read_scott_tuple(t: &Term, n: usize) -> Result<Vec<Rc<Term>>, EncodeError> {
    let Term::Lam(_, body) = t else {
        return Err(EncodeError::Shape("tuple is not an abstraction"));
    };
    let mut items: Vec<Rc<Term>> = Vec::with_capacity(n);
    let mut head: &Rc<Term> = body;
    for _ in 0..n {
        let Term::App(f, a) = &**head else {
            return Err(EncodeError::Shape("tuple body is too short"));
        };
        items.push(a.clone());
        head = f;
    }
    if !matches!(&**head, Term::Var(1)) {
        return Err(EncodeError::Shape("tuple head is not the tuple binder"));
    }
    items.reverse();
    if items.iter().any(|c| !term::is_closed(c)) {
        return Err(EncodeError::Shape("tuple component is not closed"));
    }
    Ok(items)
}

const IDENTITY_SRC: &str = "\\w.w";
const TRUE_SRC: &str = "\\x.\\y.x";
const FALSE_SRC: &str = "\\x.\\y.y";
const THETA_SRC: &str = "\\x.\\y. y (x x y)";
/// Eta-expanded variant whose self-application sits under a binder, keeping
/// recursive programs inside the variables-or-abstractions-as-arguments
/// fragment.
const THETA_DET_SRC: &str = "\\x.\\y. y (\\z. x x y z)";

fn parse_builtin(src: &str) -> Rc<Term> {
    term::parse(src).expect("builtin combinator source")
}

pub fn identity() -> Rc<Term> {
    parse_builtin(IDENTITY_SRC)
}

pub fn tru() -> Rc<Term> {
    parse_builtin(TRUE_SRC)
}

pub fn fls() -> Rc<Term> {
    parse_builtin(FALSE_SRC)
}

pub fn theta() -> Rc<Term> {
    parse_builtin(THETA_SRC)
}

pub fn theta_det() -> Rc<Term> {
    parse_builtin(THETA_DET_SRC)
}

fn fix_src() -> String {
    format!("({THETA_SRC}) ({THETA_SRC})")
}

fn fix_det_src() -> String {
    format!("({THETA_DET_SRC}) ({THETA_DET_SRC})")
}

/// Turing fix point, theta applied to itself.
pub fn fix() -> Rc<Term> {
    parse_builtin(&fix_src())
}

pub fn fix_det() -> Rc<Term> {
    parse_builtin(&fix_det_src())
}

/// The three string scrollers. `Toy` consumes its string and returns the
/// identity, `LoCpy` rebuilds the string cell by cell through an
/// accumulator, `GlCpy` returns the one copy it captured up front.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scroller {
    Toy,
    LoCpy,
    GlCpy,
}

impl Scroller {
    pub const ALL: [Scroller; 3] = [Scroller::Toy, Scroller::LoCpy, Scroller::GlCpy];

    pub fn name(&self) -> &'static str {
        match self {
            Scroller::Toy => "toy",
            Scroller::LoCpy => "locpy",
            Scroller::GlCpy => "glcpy",
        }
    }

    pub fn parse(s: &str) -> Option<Scroller> {
        Scroller::ALL.iter().copied().find(|k| k.name() == s)
    }
}

impl fmt::Display for Scroller {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn toy_src() -> String {
    format!("({THETA_SRC}) ({THETA_SRC}) (\\f.\\z. z f f (\\w.w))")
}

fn glcpy_src() -> String {
    format!("\\x. ({THETA_SRC}) ({THETA_SRC}) (\\f.\\s. s f f x) x")
}

/// CPS reverse over binary strings: `rv a s k` scrolls `s`, consing each
/// bit onto the accumulator `a`, and passes the result to `k`.
fn reverse_core_src() -> String {
    format!(
        "({fd}) (\\f.\\a.\\s.\\k. s \
         (\\r.\\j. f (\\c0.\\c1.\\ce. c0 a) r j) \
         (\\r.\\j. f (\\c0.\\c1.\\ce. c1 a) r j) \
         (\\j. j a) k)",
        fd = fix_det_src()
    )
}

fn locpy_src() -> String {
    let rv = reverse_core_src();
    format!("\\s. {rv} (\\c0.\\c1.\\ce.ce) s (\\t. {rv} (\\c0.\\c1.\\ce.ce) t (\\w.w))")
}

pub fn scroller(kind: Scroller) -> Rc<Term> {
    match kind {
        Scroller::Toy => parse_builtin(&toy_src()),
        Scroller::LoCpy => parse_builtin(&locpy_src()),
        Scroller::GlCpy => parse_builtin(&glcpy_src()),
    }
}

/// `succ_core n k` passes the canonical successor of `n` to `k`. The 0-bit
/// action flips to 1, the 1-bit action flips to 0 and carries, the empty
/// action yields the one-bit string 1.
pub(crate) fn succ_core_src() -> String {
    format!(
        "({fd}) (\\f.\\s.\\k. s \
         (\\r.\\j. j (\\c0.\\c1.\\ce. c1 r)) \
         (\\r.\\j. f r (\\m. j (\\c0.\\c1.\\ce. c0 m))) \
         (\\j. j (\\c0.\\c1.\\ce. c1 (\\d0.\\d1.\\de.de))) k)",
        fd = fix_det_src()
    )
}

/// `pred_core n k` passes the canonical predecessor to `k`, saturating at
/// zero. The 0-bit action borrows, the 1-bit action drops to 0 but re-scrolls
/// its tail so a final 1 becomes the empty string instead of a trailing 0.
pub(crate) fn pred_core_src() -> String {
    format!(
        "({fd}) (\\f.\\s.\\k. s \
         (\\r.\\j. f r (\\m. j (\\c0.\\c1.\\ce. c1 m))) \
         (\\r.\\j. r \
            (\\q.\\i. i (\\c0.\\c1.\\ce. c0 (\\d0.\\d1.\\de. d0 q))) \
            (\\q.\\i. i (\\c0.\\c1.\\ce. c0 (\\d0.\\d1.\\de. d1 q))) \
            (\\i. i (\\c0.\\c1.\\ce.ce)) j) \
         (\\j. j (\\c0.\\c1.\\ce.ce)) k)",
        fd = fix_det_src()
    )
}

fn iszero_src() -> String {
    "\\n. n (\\r.\\x.\\y.y) (\\r.\\x.\\y.y) (\\x.\\y.x)".to_string()
}

pub fn bin_succ() -> Rc<Term> {
    parse_builtin(&format!("\\n. {} n (\\w.w)", succ_core_src()))
}

pub fn bin_pred() -> Rc<Term> {
    parse_builtin(&format!("\\n. {} n (\\w.w)", pred_core_src()))
}

/// Canonical strings make zero testing a head inspection: only the empty
/// string denotes zero.
pub fn bin_iszero() -> Rc<Term> {
    parse_builtin(&iszero_src())
}

fn input_selector_src(c: char) -> &'static str {
    match c {
        '0' => "\\i0.\\i1.\\il.\\ir.i0",
        '1' => "\\i0.\\i1.\\il.\\ir.i1",
        'L' => "\\i0.\\i1.\\il.\\ir.il",
        _ => "\\i0.\\i1.\\il.\\ir.ir",
    }
}

/// `read i n k` resolves the 1-based position `n` on the tape `i` and passes
/// a four-way answer selector to `k`: the bit at that position, L when n is
/// zero, R when n is past the end. The tape copy handed in is consumed by
/// the scroll; callers keep their own copy for the next read.
fn read_src() -> String {
    let zero = iszero_src();
    let pred = pred_core_src();
    let bit_action = |sel: &str| {
        format!(
            "(\\r.\\j. {pred} m (\\m2. ({zero}) m2 (\\d. j ({sel})) (\\d. f r m2 j) (\\w.w)))"
        )
    };
    let a0 = bit_action(input_selector_src('0'));
    let a1 = bit_action(input_selector_src('1'));
    let scroll = format!(
        "(\\f.\\s.\\m.\\k. s {a0} {a1} (\\j. j ({r})) k)",
        r = input_selector_src('R')
    );
    format!(
        "\\i.\\n.\\k. ({zero}) n (\\d. k ({l})) (\\d. ({fd}) {scroll} i n k) (\\w.w)",
        l = input_selector_src('L'),
        fd = fix_det_src()
    )
}

pub fn input_reader() -> Rc<Term> {
    parse_builtin(&read_src())
}
