//! Lambda-term syntax: de Bruijn terms with display names, a parser and
//! renderer for the `\x. t` surface syntax, constructor sizes, tree
//! addresses, and eta-expansion.

use std::fmt;
use std::rc::Rc;

/// A lambda-term. Variables are de Bruijn indices counted from 1 (the
/// innermost enclosing binder). Binders keep an optional display name used
/// only for rendering; equality ignores names.
#[derive(Clone, Debug)]
pub enum Term {
    Var(u32),
    Lam(Option<Rc<str>>, Rc<Term>),
    App(Rc<Term>, Rc<Term>),
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Term::Var(a), Term::Var(b)) => a == b,
            (Term::Lam(_, a), Term::Lam(_, b)) => rc_eq(a, b),
            (Term::App(a1, a2), Term::App(b1, b2)) => rc_eq(a1, b1) && rc_eq(a2, b2),
            _ => false,
        }
    }
}

impl Eq for Term {}

fn rc_eq(a: &Rc<Term>, b: &Rc<Term>) -> bool {
    Rc::ptr_eq(a, b) || **a == **b
}

impl Term {
    pub fn var(i: u32) -> Rc<Term> {
        Rc::new(Term::Var(i))
    }

    pub fn lam(body: Rc<Term>) -> Rc<Term> {
        Rc::new(Term::Lam(None, body))
    }

    pub fn lam_named(name: &str, body: Rc<Term>) -> Rc<Term> {
        Rc::new(Term::Lam(Some(name.into()), body))
    }

    pub fn app(f: Rc<Term>, a: Rc<Term>) -> Rc<Term> {
        Rc::new(Term::App(f, a))
    }

    /// Left-associated application `f a1 a2 ...`.
    pub fn apps(f: Rc<Term>, args: impl IntoIterator<Item = Rc<Term>>) -> Rc<Term> {
        args.into_iter().fold(f, Term::app)
    }
}

/// Number of constructors: variables and abstractions count 1, applications
/// count 1 plus both sides.
pub fn constructor_size(t: &Term) -> u64 {
    // Explicit stack; decoded terms can be deep enough to overflow recursion.
    let mut total = 0u64;
    let mut work: Vec<&Term> = vec![t];
    while let Some(t) = work.pop() {
        total += 1;
        match t {
            Term::Var(_) => {}
            Term::Lam(_, b) => work.push(b),
            Term::App(f, a) => {
                work.push(f);
                work.push(a);
            }
        }
    }
    total
}

/// Largest de Bruijn index that escapes the term, i.e. 0 for closed terms.
pub fn free_width(t: &Term) -> u32 {
    fn go(t: &Term, depth: u32) -> u32 {
        match t {
            Term::Var(i) => i.saturating_sub(depth),
            Term::Lam(_, b) => go(b, depth + 1),
            Term::App(f, a) => go(f, depth).max(go(a, depth)),
        }
    }
    go(t, 0)
}

pub fn is_closed(t: &Term) -> bool {
    free_width(t) == 0
}

/// The constructor found at a tree address, where at an application `0`
/// descends left and `1` right, at an abstraction either bit descends into
/// the body, and addresses that run past a variable are undefined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Label {
    Lambda,
    Apply,
    DeBruijn(u32),
    Undefined,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Lambda => write!(f, "Lambda"),
            Label::Apply => write!(f, "Apply"),
            Label::DeBruijn(i) => write!(f, "dB({i})"),
            Label::Undefined => write!(f, "Undefined"),
        }
    }
}

/// Read the constructor at a bit-string tree address.
pub fn at_address(t: &Term, addr: &[bool]) -> Label {
    let mut cur = t;
    let mut rest = addr;
    loop {
        match (cur, rest.split_first()) {
            (Term::Var(i), None) => return Label::DeBruijn(*i),
            (Term::Var(_), Some(_)) => return Label::Undefined,
            (Term::Lam(..), None) => return Label::Lambda,
            (Term::Lam(_, b), Some((_, tail))) => {
                cur = b;
                rest = tail;
            }
            (Term::App(..), None) => return Label::Apply,
            (Term::App(f, a), Some((bit, tail))) => {
                cur = if *bit { a } else { f };
                rest = tail;
            }
        }
    }
}

/// Parse a bit-string address like "010"; empty input is the root address.
pub fn parse_address(s: &str) -> Result<Vec<bool>, ParseError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(ParseError {
                line: 1,
                col: 1,
                msg: format!("address must be over 0/1, found {c:?}"),
            }),
        })
        .collect()
}

/// Shift free variables (indices that point above `t`) by `by`.
fn shift_free(t: &Rc<Term>, by: u32) -> Rc<Term> {
    fn go(t: &Rc<Term>, depth: u32, by: u32) -> Rc<Term> {
        match &**t {
            Term::Var(i) => {
                if *i > depth {
                    Term::var(i + by)
                } else {
                    t.clone()
                }
            }
            Term::Lam(n, b) => {
                let b2 = go(b, depth + 1, by);
                if Rc::ptr_eq(&b2, b) {
                    t.clone()
                } else {
                    Rc::new(Term::Lam(n.clone(), b2))
                }
            }
            Term::App(f, a) => {
                let f2 = go(f, depth, by);
                let a2 = go(a, depth, by);
                if Rc::ptr_eq(&f2, f) && Rc::ptr_eq(&a2, a) {
                    t.clone()
                } else {
                    Term::app(f2, a2)
                }
            }
        }
    }
    if by == 0 {
        t.clone()
    } else {
        go(t, 0, by)
    }
}

/// One eta-expansion at the root: `t` becomes `\x. t x`. Applied `n` times;
/// each round adds 3 constructors.
pub fn eta_expand(t: &Rc<Term>, n: u32) -> Rc<Term> {
    let mut cur = t.clone();
    for _ in 0..n {
        cur = Term::lam(Term::app(shift_free(&cur, 1), Term::var(1)));
    }
    cur
}

/// Deterministic fragment check: every application's right subterm must be a
/// variable or an abstraction (so call-by-name and call-by-value coincide).
pub fn in_lambda_det(t: &Term) -> bool {
    let mut work: Vec<&Term> = vec![t];
    while let Some(t) = work.pop() {
        match t {
            Term::Var(_) => {}
            Term::Lam(_, b) => work.push(b),
            Term::App(f, a) => {
                if matches!(**a, Term::App(..)) {
                    return false;
                }
                work.push(f);
                work.push(a);
            }
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}:{}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Tok<'a> {
    Lambda,
    Dot,
    LParen,
    RParen,
    Ident(&'a str),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0, line: 1, col: 1 }
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: self.col, msg: msg.into() }
    }

    fn bump(&mut self, c: char) {
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.bump(c);
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Result<Option<(Tok<'a>, u32, u32)>, ParseError> {
        self.skip_ws();
        let (line, col) = (self.line, self.col);
        let rest = &self.src[self.pos..];
        let Some(c) = rest.chars().next() else {
            return Ok(None);
        };
        let tok = match c {
            '\\' | 'λ' => Tok::Lambda,
            '.' => Tok::Dot,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let end = rest
                    .char_indices()
                    .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_' || *c == '\''))
                    .map(|(i, _)| i)
                    .unwrap_or(rest.len());
                Tok::Ident(&rest[..end])
            }
            other => return Err(self.error(format!("unexpected character {other:?}"))),
        };
        Ok(Some((tok, line, col)))
    }

    fn advance(&mut self, tok: Tok<'a>) {
        match tok {
            Tok::Lambda => {
                let c = self.src[self.pos..].chars().next().unwrap();
                self.bump(c);
            }
            Tok::Dot | Tok::LParen | Tok::RParen => {
                let c = self.src[self.pos..].chars().next().unwrap();
                self.bump(c);
            }
            Tok::Ident(s) => {
                for c in s.chars() {
                    self.bump(c);
                }
            }
        }
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    scope: Vec<&'a str>,
    free: Vec<&'a str>,
    allow_free: bool,
}

impl<'a> Parser<'a> {
    fn next_tok(&mut self) -> Result<(Tok<'a>, u32, u32), ParseError> {
        match self.lex.peek()? {
            Some(t) => {
                self.lex.advance(t.0);
                Ok(t)
            }
            None => Err(self.lex.error("unexpected end of input")),
        }
    }

    fn term(&mut self) -> Result<Rc<Term>, ParseError> {
        match self.lex.peek()? {
            Some((Tok::Lambda, ..)) => self.abstraction(),
            _ => self.application(),
        }
    }

    fn abstraction(&mut self) -> Result<Rc<Term>, ParseError> {
        self.next_tok()?; // the lambda
        let (tok, line, col) = self.next_tok()?;
        let Tok::Ident(name) = tok else {
            return Err(ParseError { line, col, msg: "expected binder name".into() });
        };
        let (tok, line, col) = self.next_tok()?;
        if tok != Tok::Dot {
            return Err(ParseError { line, col, msg: "expected '.' after binder".into() });
        }
        self.scope.push(name);
        let body = self.term()?;
        self.scope.pop();
        Ok(Rc::new(Term::Lam(Some(name.into()), body)))
    }

    fn application(&mut self) -> Result<Rc<Term>, ParseError> {
        let mut acc = self.atom()?;
        loop {
            match self.lex.peek()? {
                // An abstraction in argument position extends to the end of
                // the current (parenthesised) term.
                Some((Tok::Lambda, ..)) => {
                    let arg = self.abstraction()?;
                    return Ok(Term::app(acc, arg));
                }
                Some((Tok::Ident(_) | Tok::LParen, ..)) => {
                    let arg = self.atom()?;
                    acc = Term::app(acc, arg);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn atom(&mut self) -> Result<Rc<Term>, ParseError> {
        let (tok, line, col) = self.next_tok()?;
        match tok {
            Tok::Ident(name) => {
                if let Some(pos) = self.scope.iter().rposition(|n| *n == name) {
                    Ok(Term::var((self.scope.len() - pos) as u32))
                } else if self.allow_free {
                    let slot = match self.free.iter().position(|n| *n == name) {
                        Some(i) => i,
                        None => {
                            self.free.push(name);
                            self.free.len() - 1
                        }
                    };
                    Ok(Term::var((self.scope.len() + slot + 1) as u32))
                } else {
                    Err(ParseError { line, col, msg: format!("unbound variable `{name}`") })
                }
            }
            Tok::LParen => {
                let t = self.term()?;
                let (tok, line, col) = self.next_tok()?;
                if tok != Tok::RParen {
                    return Err(ParseError { line, col, msg: "expected ')'".into() });
                }
                Ok(t)
            }
            _ => Err(ParseError { line, col, msg: "expected a term".into() }),
        }
    }

    fn finish(&mut self, t: Rc<Term>) -> Result<Rc<Term>, ParseError> {
        if let Some((_, line, col)) = self.lex.peek()? {
            return Err(ParseError { line, col, msg: "trailing input after term".into() });
        }
        Ok(t)
    }
}

fn parse_with(src: &str, allow_free: bool) -> Result<Rc<Term>, ParseError> {
    let mut p = Parser { lex: Lexer::new(src), scope: vec![], free: vec![], allow_free };
    let t = p.term()?;
    p.finish(t)
}

/// Parse a closed term; unbound names are errors.
pub fn parse(src: &str) -> Result<Rc<Term>, ParseError> {
    parse_with(src, false)
}

/// Parse a possibly open term; unbound names get indices past the binder
/// depth, numbered in order of first appearance.
pub fn parse_open(src: &str) -> Result<Rc<Term>, ParseError> {
    parse_with(src, true)
}

/// Render a term in the surface syntax. Display names are kept where they
/// cannot be confused with names already in scope; synthesized or clashing
/// binders get fresh primed names. `parse(render(t))` reproduces `t`.
pub fn render(t: &Term) -> String {
    let mut out = String::new();
    let mut scope: Vec<String> = Vec::new();
    write_term(t, &mut scope, &mut out);
    out
}

fn fresh_name(hint: Option<&str>, scope: &[String]) -> String {
    let base = hint.unwrap_or("x");
    let mut candidate = base.to_string();
    while scope.iter().any(|n| *n == candidate) {
        candidate.push('\'');
    }
    candidate
}

fn write_term(t: &Term, scope: &mut Vec<String>, out: &mut String) {
    match t {
        Term::Lam(name, body) => {
            let name = fresh_name(name.as_deref(), scope);
            out.push('\\');
            out.push_str(&name);
            out.push_str(". ");
            scope.push(name);
            write_term(body, scope, out);
            scope.pop();
        }
        _ => write_app(t, scope, out),
    }
}

fn write_app(t: &Term, scope: &mut Vec<String>, out: &mut String) {
    match t {
        Term::App(f, a) => {
            write_app(f, scope, out);
            out.push(' ');
            write_atom(a, scope, out);
        }
        _ => write_atom(t, scope, out),
    }
}

fn write_atom(t: &Term, scope: &mut Vec<String>, out: &mut String) {
    match t {
        Term::Var(i) => {
            let i = *i as usize;
            if i <= scope.len() {
                out.push_str(&scope[scope.len() - i]);
            } else {
                // Free variable: stable placeholder by slot.
                out.push_str(&format!("f{}", i - scope.len()));
            }
        }
        _ => {
            out.push('(');
            write_term(t, scope, out);
            out.push(')');
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}
