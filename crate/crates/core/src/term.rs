//! Applied lambda-calculus terms: syntax, parsing, printing, substitution.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::ParseError;
use crate::prim::{Const, PrimOp};
use crate::types::ObjectType;

#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Var(String),
    Lam(String, Option<ObjectType>, Box<Term>),
    /// `\(x, y). u`, which destructures its pair argument.
    PairLam(String, String, Option<(ObjectType, ObjectType)>, Box<Term>),
    App(Box<Term>, Box<Term>),
    Let(String, Box<Term>, Box<Term>),
    Const(Const),
    Prim(PrimOp, Vec<Term>),
    Ite(Box<Term>, Box<Term>, Box<Term>),
    Rec(Box<Term>),
    Pair(Box<Term>, Box<Term>),
}

pub fn var(x: &str) -> Term {
    Term::Var(x.to_string())
}

pub fn lam(x: &str, body: Term) -> Term {
    Term::Lam(x.to_string(), None, Box::new(body))
}

pub fn app(f: Term, a: Term) -> Term {
    Term::App(Box::new(f), Box::new(a))
}

pub fn int(n: i64) -> Term {
    Term::Const(Const::Int(n))
}

pub fn boolean(b: bool) -> Term {
    Term::Const(Const::Bool(b))
}

pub fn real(x: f64) -> Term {
    Term::Const(Const::Real(x))
}

pub fn prim(op: PrimOp, args: Vec<Term>) -> Term {
    Term::Prim(op, args)
}

pub fn let_(x: &str, u: Term, v: Term) -> Term {
    Term::Let(x.to_string(), Box::new(u), Box::new(v))
}

pub fn pair(a: Term, b: Term) -> Term {
    Term::Pair(Box::new(a), Box::new(b))
}

pub fn ite(c: Term, a: Term, b: Term) -> Term {
    Term::Ite(Box::new(c), Box::new(a), Box::new(b))
}

impl Term {
    /// Syntactic values: variables, constants, abstractions and pairs of values.
    pub fn is_value(&self) -> bool {
        match self {
            Term::Var(_) | Term::Const(_) | Term::Lam(..) | Term::PairLam(..) => true,
            Term::Pair(a, b) => a.is_value() && b.is_value(),
            _ => false,
        }
    }

    pub fn size(&self) -> usize {
        1 + match self {
            Term::Var(_) | Term::Const(_) => 0,
            Term::Lam(_, _, b) | Term::PairLam(_, _, _, b) | Term::Rec(b) => b.size(),
            Term::App(a, b) | Term::Let(_, a, b) | Term::Pair(a, b) => a.size() + b.size(),
            Term::Prim(_, args) => args.iter().map(Term::size).sum(),
            Term::Ite(a, b, c) => a.size() + b.size() + c.size(),
        }
    }

    /// All variable names occurring anywhere, bound or free.
    pub fn names(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Const(_) => {}
            Term::Lam(x, _, b) => {
                out.insert(x.clone());
                b.names(out);
            }
            Term::PairLam(x, y, _, b) => {
                out.insert(x.clone());
                out.insert(y.clone());
                b.names(out);
            }
            Term::Let(x, a, b) => {
                out.insert(x.clone());
                a.names(out);
                b.names(out);
            }
            Term::Rec(b) => b.names(out),
            Term::App(a, b) | Term::Pair(a, b) => {
                a.names(out);
                b.names(out);
            }
            Term::Prim(_, args) => args.iter().for_each(|a| a.names(out)),
            Term::Ite(a, b, c) => {
                a.names(out);
                b.names(out);
                c.names(out);
            }
        }
    }
}

pub fn free_vars(t: &Term) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fv(t, &mut Vec::new(), &mut out);
    out
}

fn fv<'a>(t: &'a Term, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(x) => {
            if !bound.contains(&x.as_str()) {
                out.insert(x.clone());
            }
        }
        Term::Const(_) => {}
        Term::Lam(x, _, b) => {
            bound.push(x);
            fv(b, bound, out);
            bound.pop();
        }
        Term::PairLam(x, y, _, b) => {
            bound.push(x);
            bound.push(y);
            fv(b, bound, out);
            bound.pop();
            bound.pop();
        }
        Term::Let(x, a, b) => {
            fv(a, bound, out);
            bound.push(x);
            fv(b, bound, out);
            bound.pop();
        }
        Term::Rec(b) => fv(b, bound, out),
        Term::App(a, b) | Term::Pair(a, b) => {
            fv(a, bound, out);
            fv(b, bound, out);
        }
        Term::Prim(_, args) => args.iter().for_each(|a| fv(a, bound, out)),
        Term::Ite(a, b, c) => {
            fv(a, bound, out);
            fv(b, bound, out);
            fv(c, bound, out);
        }
    }
}

/// Generates names `_0`, `_1`, ... avoiding a given set.
pub struct Fresh {
    avoid: BTreeSet<String>,
    next: usize,
}

impl Fresh {
    pub fn new(avoid: BTreeSet<String>) -> Self {
        Fresh { avoid, next: 0 }
    }

    pub fn name(&mut self) -> String {
        loop {
            let n = format!("_{}", self.next);
            self.next += 1;
            if self.avoid.insert(n.clone()) {
                return n;
            }
        }
    }
}

/// Capture-avoiding substitution `t[x/v]`.
pub fn subst(t: &Term, x: &str, v: &Term) -> Term {
    let mut avoid = BTreeSet::new();
    t.names(&mut avoid);
    v.names(&mut avoid);
    avoid.insert(x.to_string());
    let fv_v = free_vars(v);
    let mut fresh = Fresh::new(avoid);
    subst_in(t, x, v, &fv_v, &mut fresh)
}

fn rename_binder(y: &str, body: &Term, fv_v: &BTreeSet<String>, fresh: &mut Fresh) -> (String, Term) {
    if fv_v.contains(y) {
        let z = fresh.name();
        let body = subst(body, y, &Term::Var(z.clone()));
        (z, body)
    } else {
        (y.to_string(), body.clone())
    }
}

fn subst_in(t: &Term, x: &str, v: &Term, fv_v: &BTreeSet<String>, fresh: &mut Fresh) -> Term {
    let rec = |t: &Term, fresh: &mut Fresh| subst_in(t, x, v, fv_v, fresh);
    match t {
        Term::Var(y) => {
            if y == x {
                v.clone()
            } else {
                t.clone()
            }
        }
        Term::Const(_) => t.clone(),
        Term::Lam(y, ty, b) => {
            if y == x {
                return t.clone();
            }
            let (y, b) = rename_binder(y, b, fv_v, fresh);
            Term::Lam(y, ty.clone(), Box::new(rec(&b, fresh)))
        }
        Term::PairLam(y1, y2, ty, b) => {
            if y1 == x || y2 == x {
                return t.clone();
            }
            let (y1, b) = rename_binder(y1, b, fv_v, fresh);
            let (y2, b) = rename_binder(y2, &b, fv_v, fresh);
            Term::PairLam(y1, y2, ty.clone(), Box::new(rec(&b, fresh)))
        }
        Term::Let(y, a, b) => {
            let a = rec(a, fresh);
            if y == x {
                return Term::Let(y.clone(), Box::new(a), b.clone());
            }
            let (y, b) = rename_binder(y, b, fv_v, fresh);
            Term::Let(y, Box::new(a), Box::new(rec(&b, fresh)))
        }
        Term::Rec(b) => Term::Rec(Box::new(rec(b, fresh))),
        Term::App(a, b) => Term::App(Box::new(rec(a, fresh)), Box::new(rec(b, fresh))),
        Term::Pair(a, b) => Term::Pair(Box::new(rec(a, fresh)), Box::new(rec(b, fresh))),
        Term::Prim(op, args) => Term::Prim(*op, args.iter().map(|a| rec(a, fresh)).collect()),
        Term::Ite(a, b, c) => Term::Ite(Box::new(rec(a, fresh)), Box::new(rec(b, fresh)), Box::new(rec(c, fresh))),
    }
}

/// α-equivalence, compared in locally nameless style.
pub fn alpha_eq(t: &Term, u: &Term) -> bool {
    ae(t, u, &mut Vec::new(), &mut Vec::new())
}

fn ae<'a>(t: &'a Term, u: &'a Term, et: &mut Vec<&'a str>, eu: &mut Vec<&'a str>) -> bool {
    match (t, u) {
        (Term::Var(a), Term::Var(b)) => {
            let ia = et.iter().rposition(|n| *n == a);
            let ib = eu.iter().rposition(|n| *n == b);
            match (ia, ib) {
                (Some(i), Some(j)) => et.len() - i == eu.len() - j,
                (None, None) => a == b,
                _ => false,
            }
        }
        (Term::Const(a), Term::Const(b)) => a == b,
        (Term::Lam(x, tx, b1), Term::Lam(y, ty, b2)) => {
            if tx != ty {
                return false;
            }
            et.push(x);
            eu.push(y);
            let r = ae(b1, b2, et, eu);
            et.pop();
            eu.pop();
            r
        }
        (Term::PairLam(x1, x2, tx, b1), Term::PairLam(y1, y2, ty, b2)) => {
            if tx != ty {
                return false;
            }
            et.push(x1);
            et.push(x2);
            eu.push(y1);
            eu.push(y2);
            let r = ae(b1, b2, et, eu);
            et.truncate(et.len() - 2);
            eu.truncate(eu.len() - 2);
            r
        }
        (Term::Let(x, a1, b1), Term::Let(y, a2, b2)) => {
            if !ae(a1, a2, et, eu) {
                return false;
            }
            et.push(x);
            eu.push(y);
            let r = ae(b1, b2, et, eu);
            et.pop();
            eu.pop();
            r
        }
        (Term::Rec(a), Term::Rec(b)) => ae(a, b, et, eu),
        (Term::App(a1, b1), Term::App(a2, b2)) | (Term::Pair(a1, b1), Term::Pair(a2, b2)) => {
            ae(a1, a2, et, eu) && ae(b1, b2, et, eu)
        }
        (Term::Prim(o1, a1), Term::Prim(o2, a2)) => {
            o1 == o2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| ae(x, y, et, eu))
        }
        (Term::Ite(a1, b1, c1), Term::Ite(a2, b2, c2)) => {
            ae(a1, a2, et, eu) && ae(b1, b2, et, eu) && ae(c1, c2, et, eu)
        }
        _ => false,
    }
}

/// Replaces `let x = w in v` by `v[x/w]` whenever `w` is a value.
pub fn inline_value_lets(t: &Term) -> Term {
    map_children(t, &inline_value_lets, |t| match t {
        Term::Let(x, a, b) if a.is_value() => inline_value_lets(&subst(&b, &x, &a)),
        other => other,
    })
}

/// Rewrites every `let x = u in v` into `(\x. v) u`.
pub fn desugar_lets(t: &Term) -> Term {
    map_children(t, &desugar_lets, |t| match t {
        Term::Let(x, a, b) => app(Term::Lam(x, None, b), *a),
        other => other,
    })
}

/// Removes type annotations from binders.
pub fn erase_types(t: &Term) -> Term {
    map_children(t, &erase_types, |t| match t {
        Term::Lam(x, _, b) => Term::Lam(x, None, b),
        Term::PairLam(x, y, _, b) => Term::PairLam(x, y, None, b),
        other => other,
    })
}

fn map_children(t: &Term, f: &dyn Fn(&Term) -> Term, post: impl Fn(Term) -> Term) -> Term {
    let b = |x: &Term| Box::new(f(x));
    let t = match t {
        Term::Var(_) | Term::Const(_) => t.clone(),
        Term::Lam(x, ty, body) => Term::Lam(x.clone(), ty.clone(), b(body)),
        Term::PairLam(x, y, ty, body) => Term::PairLam(x.clone(), y.clone(), ty.clone(), b(body)),
        Term::App(x, y) => Term::App(b(x), b(y)),
        Term::Let(n, x, y) => Term::Let(n.clone(), b(x), b(y)),
        Term::Prim(op, args) => Term::Prim(*op, args.iter().map(f).collect()),
        Term::Ite(x, y, z) => Term::Ite(b(x), b(y), b(z)),
        Term::Rec(x) => Term::Rec(b(x)),
        Term::Pair(x, y) => Term::Pair(b(x), b(y)),
    };
    post(t)
}

// ---------------------------------------------------------------- printing

fn type_text(t: &ObjectType) -> String {
    t.to_string().replace(" -o ", " -> ")
}

fn prec(t: &Term) -> u8 {
    match t {
        Term::Lam(..) | Term::PairLam(..) | Term::Let(..) | Term::Ite(..) => 0,
        Term::Prim(op, _) => match op {
            PrimOp::Or => 1,
            PrimOp::And => 2,
            PrimOp::Leq | PrimOp::Eq => 3,
            PrimOp::Add | PrimOp::Sub => 4,
            PrimOp::Mul => 5,
            PrimOp::Neg | PrimOp::Not => 6,
        },
        Term::Const(Const::Int(n)) if *n < 0 => 6,
        Term::Const(Const::Real(x)) if x.is_sign_negative() => 6,
        Term::App(..) | Term::Rec(..) => 7,
        Term::Var(_) | Term::Const(_) | Term::Pair(..) => 8,
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, ctx: u8) -> fmt::Result {
    let p = prec(t);
    if p < ctx {
        write!(f, "(")?;
    }
    match t {
        Term::Var(x) => write!(f, "{x}")?,
        Term::Const(c) => write!(f, "{c}")?,
        Term::Lam(x, ty, b) => {
            match ty {
                Some(ty) => write!(f, "\\{x}: {}. ", type_text(ty))?,
                None => write!(f, "\\{x}. ")?,
            }
            write_term(f, b, 0)?;
        }
        Term::PairLam(x, y, ty, b) => {
            match ty {
                Some((a, c)) => write!(f, "\\({x}: {}, {y}: {}). ", type_text(a), type_text(c))?,
                None => write!(f, "\\({x}, {y}). ")?,
            }
            write_term(f, b, 0)?;
        }
        Term::App(a, b) => {
            write_term(f, a, 7)?;
            write!(f, " ")?;
            write_term(f, b, 8)?;
        }
        Term::Rec(b) => {
            write!(f, "rec ")?;
            write_term(f, b, 8)?;
        }
        Term::Let(x, a, b) => {
            write!(f, "let {x} = ")?;
            write_term(f, a, 0)?;
            write!(f, " in ")?;
            write_term(f, b, 0)?;
        }
        Term::Ite(a, b, c) => {
            write!(f, "if ")?;
            write_term(f, a, 0)?;
            write!(f, " then ")?;
            write_term(f, b, 0)?;
            write!(f, " else ")?;
            write_term(f, c, 0)?;
        }
        Term::Pair(a, b) => {
            write!(f, "(")?;
            write_term(f, a, 0)?;
            write!(f, ", ")?;
            write_term(f, b, 0)?;
            write!(f, ")")?;
        }
        Term::Prim(op, args) => match (op, args.as_slice()) {
            (PrimOp::Neg, [a]) => {
                write!(f, "-")?;
                let literal = matches!(a, Term::Const(Const::Int(_)) | Term::Const(Const::Real(_)));
                write_term(f, a, if literal { 9 } else { 6 })?;
            }
            (PrimOp::Not, [a]) => {
                write!(f, "!")?;
                write_term(f, a, 6)?;
            }
            (op, [a, b]) => {
                let sym = match op {
                    PrimOp::Add => "+",
                    PrimOp::Sub => "-",
                    PrimOp::Mul => "*",
                    PrimOp::And => "&&",
                    PrimOp::Or => "||",
                    PrimOp::Leq => "<=",
                    _ => "==",
                };
                let (l, r) = if p == 3 { (p + 1, p + 1) } else { (p, p + 1) };
                write_term(f, a, l)?;
                write!(f, " {sym} ")?;
                write_term(f, b, r)?;
            }
            (op, args) => {
                // Malformed arity; printed in call form.
                write!(f, "{}(", op.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write_term(f, a, 0)?;
                }
                write!(f, ")")?;
            }
        },
    }
    if p < ctx {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, 0)
    }
}

// ----------------------------------------------------------------- parsing

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Lambda,
    Dot,
    LParen,
    RParen,
    Comma,
    Colon,
    Assign,
    EqEq,
    Le,
    Plus,
    Minus,
    Star,
    AndAnd,
    OrOr,
    Bang,
    Arrow,
    Int(i64),
    Real(f64),
    Ident(String),
    Kw(&'static str),
    Eof,
}

const KEYWORDS: [&str; 12] = ["let", "in", "if", "then", "else", "rec", "true", "false", "tt", "ff", "not", "fun"];

struct Lexed {
    toks: Vec<(Tok, usize, usize)>,
}

fn lex(src: &str) -> Result<Lexed, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut adv = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '\\' | 'λ' => Some(Tok::Lambda),
            '.' => Some(Tok::Dot),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '+' => Some(Tok::Plus),
            '*' | '×' | '⊗' => Some(Tok::Star),
            '!' | '¬' => Some(Tok::Bang),
            '∧' => Some(Tok::AndAnd),
            '∨' => Some(Tok::OrOr),
            '≤' => Some(Tok::Le),
            '→' | '⊸' => Some(Tok::Arrow),
            '=' => {
                if chars.get(i + 1) == Some(&'=') {
                    adv = 2;
                    Some(Tok::EqEq)
                } else {
                    Some(Tok::Assign)
                }
            }
            '<' if chars.get(i + 1) == Some(&'=') => {
                adv = 2;
                Some(Tok::Le)
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    adv = 2;
                    Some(Tok::Arrow)
                } else {
                    Some(Tok::Minus)
                }
            }
            '&' => {
                if chars.get(i + 1) == Some(&'&') {
                    adv = 2;
                }
                Some(Tok::AndAnd)
            }
            '|' => {
                if chars.get(i + 1) == Some(&'|') {
                    adv = 2;
                }
                Some(Tok::OrOr)
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let mut is_real = false;
                if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                    is_real = true;
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '-' || chars[k] == '+') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        is_real = true;
                        j = k;
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                    }
                }
                let text: String = chars[i..j].iter().collect();
                adv = j - i;
                if is_real {
                    Some(Tok::Real(text.parse().map_err(|_| ParseError::new(l0, c0, "bad number"))?))
                } else {
                    Some(Tok::Int(text.parse().map_err(|_| ParseError::new(l0, c0, "integer literal out of range"))?))
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                adv = j - i;
                match KEYWORDS.iter().find(|k| **k == text) {
                    Some(k) => Some(Tok::Kw(k)),
                    None => Some(Tok::Ident(text)),
                }
            }
            other => return Err(ParseError::new(l0, c0, format!("unexpected character `{other}`"))),
        };
        if let Some(t) = tok {
            toks.push((t, l0, c0));
        }
        i += adv;
        col += adv;
    }
    toks.push((Tok::Eof, line, col));
    Ok(Lexed { toks })
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (_, l, c) = &self.toks[self.pos];
        ParseError::new(*l, *c, msg)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.err(format!("expected {what}, found {:?}", self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.bump() {
            Tok::Ident(x) => Ok(x),
            other => {
                self.pos -= 1;
                Err(self.err(format!("expected identifier, found {other:?}")))
            }
        }
    }

    fn starts_binder(&self) -> bool {
        matches!(self.peek(), Tok::Lambda | Tok::Kw("let") | Tok::Kw("if") | Tok::Kw("fun"))
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Tok::Lambda | Tok::Kw("fun") => {
                self.bump();
                self.lambda()
            }
            Tok::Kw("let") => {
                self.bump();
                self.let_()
            }
            Tok::Kw("if") => {
                self.bump();
                let c = self.term()?;
                self.expect(&Tok::Kw("then"), "`then`")?;
                let a = self.term()?;
                self.expect(&Tok::Kw("else"), "`else`")?;
                let b = self.term()?;
                Ok(ite(c, a, b))
            }
            _ => self.binary(1),
        }
    }

    fn ty(&mut self) -> Result<ObjectType, ParseError> {
        let mut items = vec![self.ty_atom()?];
        while self.eat(&Tok::Star) {
            items.push(self.ty_atom()?);
        }
        let mut t = items.pop().expect("non-empty");
        while let Some(prev) = items.pop() {
            t = ObjectType::tensor(prev, t);
        }
        if self.eat(&Tok::Arrow) {
            let r = self.ty()?;
            return Ok(ObjectType::arrow(t, r));
        }
        Ok(t)
    }

    fn ty_atom(&mut self) -> Result<ObjectType, ParseError> {
        if self.eat(&Tok::LParen) {
            let t = self.ty()?;
            self.expect(&Tok::RParen, "`)`")?;
            return Ok(t);
        }
        let n = self.ident()?;
        Ok(if n == "I" { ObjectType::Unit } else { ObjectType::Base(n) })
    }

    fn opt_ty(&mut self) -> Result<Option<ObjectType>, ParseError> {
        if self.eat(&Tok::Colon) {
            Ok(Some(self.ty()?))
        } else {
            Ok(None)
        }
    }

    /// One binder: `x`, `x: T`, `(x: T)` or `(x, y)`.
    fn binder(&mut self) -> Result<Binder, ParseError> {
        if self.eat(&Tok::LParen) {
            let x = self.ident()?;
            let tx = self.opt_ty()?;
            if self.eat(&Tok::Comma) {
                let y = self.ident()?;
                let ty = self.opt_ty()?;
                self.expect(&Tok::RParen, "`)`")?;
                let tys = match (tx, ty) {
                    (Some(a), Some(b)) => Some((a, b)),
                    (None, None) => None,
                    _ => return Err(self.err("annotate both or neither component of a pair binder")),
                };
                return Ok(Binder::Pair(x, y, tys));
            }
            self.expect(&Tok::RParen, "`)`")?;
            return Ok(Binder::Single(x, tx));
        }
        let x = self.ident()?;
        let tx = self.opt_ty()?;
        Ok(Binder::Single(x, tx))
    }

    fn lambda(&mut self) -> Result<Term, ParseError> {
        let mut bs = vec![self.binder()?];
        while !matches!(self.peek(), Tok::Dot) {
            bs.push(self.binder()?);
        }
        self.expect(&Tok::Dot, "`.`")?;
        let body = self.term()?;
        Ok(wrap_binders(bs, body))
    }

    fn let_(&mut self) -> Result<Term, ParseError> {
        let is_rec = self.eat(&Tok::Kw("rec"));
        if !is_rec && self.peek() == &Tok::LParen {
            let b = self.binder()?;
            self.expect(&Tok::Assign, "`=`")?;
            let u = self.term()?;
            self.expect(&Tok::Kw("in"), "`in`")?;
            let v = self.term()?;
            return Ok(match b {
                Binder::Pair(x, y, tys) => app(Term::PairLam(x, y, tys, Box::new(v)), u),
                Binder::Single(x, _) => let_(&x, u, v),
            });
        }
        let name = self.ident()?;
        let mut params = Vec::new();
        while !matches!(self.peek(), Tok::Assign | Tok::Colon) {
            params.push(self.binder()?);
        }
        let _ = self.opt_ty()?;
        self.expect(&Tok::Assign, "`=`")?;
        let u = self.term()?;
        self.expect(&Tok::Kw("in"), "`in`")?;
        let v = self.term()?;
        let mut bound = wrap_binders(params, u);
        if is_rec {
            bound = Term::Rec(Box::new(Term::Lam(name.clone(), None, Box::new(bound))));
        }
        Ok(let_(&name, bound, v))
    }

    fn binary(&mut self, level: u8) -> Result<Term, ParseError> {
        if level > 5 {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        loop {
            let op = match (level, self.peek()) {
                (1, Tok::OrOr) => PrimOp::Or,
                (2, Tok::AndAnd) => PrimOp::And,
                (3, Tok::Le) => PrimOp::Leq,
                (3, Tok::EqEq) => PrimOp::Eq,
                (4, Tok::Plus) => PrimOp::Add,
                (4, Tok::Minus) => PrimOp::Sub,
                (5, Tok::Star) => PrimOp::Mul,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = if self.starts_binder() { self.term()? } else { self.binary(level + 1)? };
            lhs = prim(op, vec![lhs, rhs]);
            if level == 3 && matches!(self.peek(), Tok::Le | Tok::EqEq) {
                return Err(self.err("comparison operators do not chain"));
            }
        }
    }

    fn unary(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                match self.peek().clone() {
                    Tok::Int(n) => {
                        self.bump();
                        let t = int(n.wrapping_neg());
                        self.app_tail(t)
                    }
                    Tok::Real(x) => {
                        self.bump();
                        let t = real(-x);
                        self.app_tail(t)
                    }
                    _ => Ok(prim(PrimOp::Neg, vec![self.unary()?])),
                }
            }
            Tok::Bang | Tok::Kw("not") => {
                self.bump();
                Ok(prim(PrimOp::Not, vec![self.unary()?]))
            }
            _ => {
                let head = self.atom()?;
                self.app_tail(head)
            }
        }
    }

    fn app_tail(&mut self, mut head: Term) -> Result<Term, ParseError> {
        loop {
            if self.starts_binder() {
                let arg = self.term()?;
                return Ok(app(head, arg));
            }
            if !self.starts_atom() {
                return Ok(head);
            }
            let arg = self.atom()?;
            head = app(head, arg);
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_)
                | Tok::Int(_)
                | Tok::Real(_)
                | Tok::LParen
                | Tok::Kw("true")
                | Tok::Kw("false")
                | Tok::Kw("tt")
                | Tok::Kw("ff")
                | Tok::Kw("rec")
        )
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.bump() {
            Tok::Ident(x) => Ok(Term::Var(x)),
            Tok::Int(n) => Ok(int(n)),
            Tok::Real(x) => Ok(real(x)),
            Tok::Kw("true") | Tok::Kw("tt") => Ok(boolean(true)),
            Tok::Kw("false") | Tok::Kw("ff") => Ok(boolean(false)),
            Tok::Kw("rec") => {
                let body = if self.starts_binder() { self.term()? } else { self.atom()? };
                Ok(Term::Rec(Box::new(body)))
            }
            Tok::LParen => {
                if self.eat(&Tok::RParen) {
                    return Ok(Term::Const(Const::Unit));
                }
                let a = self.term()?;
                if self.eat(&Tok::Comma) {
                    let b = self.term()?;
                    self.expect(&Tok::RParen, "`)`")?;
                    return Ok(pair(a, b));
                }
                self.expect(&Tok::RParen, "`)`")?;
                Ok(a)
            }
            other => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.err(format!("unexpected {other:?}")))
            }
        }
    }
}

enum Binder {
    Single(String, Option<ObjectType>),
    Pair(String, String, Option<(ObjectType, ObjectType)>),
}

fn wrap_binders(bs: Vec<Binder>, body: Term) -> Term {
    bs.into_iter().rev().fold(body, |acc, b| match b {
        Binder::Single(x, t) => Term::Lam(x, t, Box::new(acc)),
        Binder::Pair(x, y, t) => Term::PairLam(x, y, t, Box::new(acc)),
    })
}

/// Parses a term. See the README for the grammar.
pub fn parse(src: &str) -> Result<Term, ParseError> {
    let lexed = lex(src)?;
    let mut p = Parser { toks: lexed.toks, pos: 0 };
    let t = p.term()?;
    if p.peek() != &Tok::Eof {
        return Err(p.err(format!("unexpected {:?} after term", p.peek())));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Term {
        parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
    }

    #[test]
    fn parses_identity_application() {
        assert_eq!(p("(\\x.x)(\\y.y)"), app(lam("x", var("x")), lam("y", var("y"))));
    }

    #[test]
    fn parses_let_with_infix() {
        let t = p("let x=0 in x+(2+x)");
        assert_eq!(t, let_("x", int(0), prim(PrimOp::Add, vec![var("x"), prim(PrimOp::Add, vec![int(2), var("x")])])));
    }

    #[test]
    fn parses_conditional() {
        let t = p("if x then x+1 else 0");
        assert_eq!(t, ite(var("x"), prim(PrimOp::Add, vec![var("x"), int(1)]), int(0)));
    }

    #[test]
    fn application_binds_tighter_than_infix() {
        assert_eq!(p("f 1 + g 2"), prim(PrimOp::Add, vec![app(var("f"), int(1)), app(var("g"), int(2))]));
        assert_eq!(p("f (1, 2)"), p("f(1,2)"));
        assert_eq!(p("\\x. x y"), lam("x", app(var("x"), var("y"))));
    }

    #[test]
    fn negative_literals_and_negation() {
        assert_eq!(p("-3"), int(-3));
        assert_eq!(p("-(3)"), prim(PrimOp::Neg, vec![int(3)]));
        assert_eq!(p("x - 3"), prim(PrimOp::Sub, vec![var("x"), int(3)]));
    }

    #[test]
    fn let_sugar() {
        assert!(alpha_eq(&p("let f x y = x in f"), &p("let f = \\x. \\y. x in f")));
        assert!(alpha_eq(&p("let g(a, b) = a + b in g"), &p("let g = \\(a, b). a + b in g")));
        assert!(alpha_eq(&p("let rec f x = f x in f"), &p("let f = rec (\\f. \\x. f x) in f")));
    }

    #[test]
    fn printer_round_trips() {
        for s in [
            "\\x. x",
            "(\\x. x x) (\\y. y y)",
            "let x = 0 in x + (2 + x)",
            "if x then x + 1 else 0",
            "f (1, 2) * -3",
            "-(3) + -x",
            "\\(a, b). a <= b && !b",
            "rec (\\f. \\x. f x)",
            "\\x: Int -> Bool. x 1",
            "(1.5, ())",
        ] {
            let t = p(s);
            let printed = t.to_string();
            assert_eq!(p(&printed), t, "{s} printed as {printed}");
        }
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = parse("\\x.\n  (x").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse("1 <= 2 <= 3").is_err());
    }

    #[test]
    fn free_variables() {
        assert_eq!(free_vars(&p("\\x. f x")), ["f".to_string()].into_iter().collect());
        assert_eq!(free_vars(&p("x")), ["x".to_string()].into_iter().collect());
        assert!(free_vars(&p("\\x. \\y. x y")).is_empty());
    }

    #[test]
    fn substitution_avoids_capture() {
        let t = subst(&p("\\x. f x"), "f", &var("x"));
        assert!(alpha_eq(&t, &p("\\y. x y")));
        assert_eq!(subst(&var("x"), "x", &var("u")), var("u"));
        let t = p("\\x. u");
        assert_eq!(subst(&t, "x", &var("v")), t);
    }

    #[test]
    fn alpha_equivalence() {
        assert!(alpha_eq(&p("\\x. x"), &p("\\y. y")));
        assert!(alpha_eq(&p("\\x. \\x. x"), &p("\\a. \\b. b")));
        assert!(!alpha_eq(&p("\\x. \\x. x"), &p("\\a. \\b. a")));
        assert!(!alpha_eq(&p("\\x. x"), &p("\\x. \\y. x")));
    }
}
