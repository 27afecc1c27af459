//! Reading hypernets back as terms.
//!
//! Works on graphs shaped like unityped translations. Within each layer,
//! wires that are shared (copied), discarded, or captured by a bubble
//! straight from a cell become `let` bindings; everything else is read
//! as a tree. Names are `x0`, `x1`, ... in order of creation.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::graph::{EdgeId, EdgeLabel, Hypernet, Incidence, NodeId};
use crate::prim::{Const, PrimOp};
use crate::term::{free_vars, subst, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a translated term: {0}")]
pub struct ReadbackError(pub String);

fn fail<T>(msg: impl Into<String>) -> Result<T, ReadbackError> {
    Err(ReadbackError(msg.into()))
}

struct Reader<'a> {
    g: &'a Hypernet,
    inc: Incidence,
    counter: usize,
}

type Env = HashMap<NodeId, String>;

impl Reader<'_> {
    fn fresh(&mut self) -> String {
        let n = format!("x{}", self.counter);
        self.counter += 1;
        n
    }

    fn consumer_label(&self, n: NodeId) -> Option<&EdgeLabel> {
        self.inc.consumer(n).map(|(e, _)| &self.g.edge(e).label)
    }

    /// Reads the layer whose result is `root`, binding shared wires with lets.
    fn layer(&mut self, layer: Option<EdgeId>, env: &Env, root: NodeId) -> Result<Term, ReadbackError> {
        let mut env = env.clone();
        let mut patterns = Vec::new();
        for (d, e) in self.g.edges() {
            if e.label == EdgeLabel::Destrictify && e.parent == layer && !e.outs.iter().any(|o| env.contains_key(o)) {
                let (x, y) = (self.fresh(), self.fresh());
                env.insert(e.outs[0], x.clone());
                env.insert(e.outs[1], y.clone());
                patterns.push((d, vec![x, y]));
            }
        }
        let mut bound = Vec::new();
        for n in self.g.layer_nodes(layer) {
            if env.contains_key(&n) {
                continue;
            }
            let Some((p, _)) = self.inc.producer(n) else { continue };
            if matches!(self.g.edge(p).label, EdgeLabel::Copy(_)) {
                continue;
            }
            let shared = matches!(
                self.consumer_label(n),
                Some(EdgeLabel::Copy(_)) | Some(EdgeLabel::Delete) | Some(EdgeLabel::Bubble)
            );
            if shared {
                let name = self.fresh();
                env.insert(n, name.clone());
                bound.push((n, name));
            }
        }
        let mut items = Vec::new();
        for (n, name) in &bound {
            items.push((vec![name.clone()], self.define(*n, &env)?));
        }
        for (d, names) in patterns {
            items.push((names, self.term(self.g.edge(d).ins[0], &env)?));
        }
        let body = self.term(root, &env)?;
        Ok(wrap_lets(items, body))
    }

    fn term(&mut self, w: NodeId, env: &Env) -> Result<Term, ReadbackError> {
        if let Some(x) = env.get(&w) {
            return Ok(Term::Var(x.clone()));
        }
        self.define(w, env)
    }

    fn define(&mut self, w: NodeId, env: &Env) -> Result<Term, ReadbackError> {
        let Some((e, _)) = self.inc.producer(w) else {
            return fail(format!("wire {w} has no producer"));
        };
        let edge = self.g.edge(e).clone();
        match &edge.label {
            EdgeLabel::Copy(_) => match env.get(&edge.ins[0]) {
                Some(x) => Ok(Term::Var(x.clone())),
                None => fail("copy of an unbound wire"),
            },
            EdgeLabel::Iota | EdgeLabel::Rho => self.term(edge.ins[0], env),
            EdgeLabel::Eval => {
                let f = self.term(edge.ins[0], env)?;
                let a = self.term(edge.ins[1], env)?;
                Ok(Term::App(Box::new(f), Box::new(a)))
            }
            EdgeLabel::Strictify => {
                let a = self.term(edge.ins[0], env)?;
                let b = self.term(edge.ins[1], env)?;
                Ok(Term::Pair(Box::new(a), Box::new(b)))
            }
            EdgeLabel::Bubble => self.abstraction(e, env),
            EdgeLabel::Gen(name) => self.generator(name, &edge.ins, env),
            other => fail(format!("unexpected `{other}`")),
        }
    }

    fn generator(&mut self, name: &str, ins: &[NodeId], env: &Env) -> Result<Term, ReadbackError> {
        if ins.is_empty() {
            return match Const::from_label(name) {
                Some(c) => Ok(Term::Const(c)),
                None => fail(format!("unknown constant `{name}`")),
            };
        }
        match name {
            "rec" => Ok(Term::Rec(Box::new(self.term(ins[0], env)?))),
            "ite" => {
                let c = self.term(ins[0], env)?;
                let a = self.thunk(ins[1], env)?;
                let b = self.thunk(ins[2], env)?;
                Ok(Term::Ite(Box::new(c), Box::new(a), Box::new(b)))
            }
            "let" => {
                let u = self.term(ins[0], env)?;
                match self.abstraction(self.bubble_of(ins[1])?, env)? {
                    Term::Lam(x, _, v) => Ok(Term::Let(x, Box::new(u), v)),
                    pat => Ok(Term::App(Box::new(pat), Box::new(u))),
                }
            }
            _ => {
                let Some(op) = PrimOp::from_name(name) else {
                    return fail(format!("unknown operation `{name}`"));
                };
                let args = ins.iter().map(|i| self.term(*i, env)).collect::<Result<Vec<_>, _>>()?;
                Ok(Term::Prim(op, args))
            }
        }
    }

    fn bubble_of(&self, w: NodeId) -> Result<EdgeId, ReadbackError> {
        match self.inc.producer(w) {
            Some((b, _)) if self.g.edge(b).label == EdgeLabel::Bubble => Ok(b),
            _ => fail("expected an abstraction"),
        }
    }

    /// Maps a bubble's captured inner wires to the names of the outer ones.
    fn inner_env(&mut self, b: EdgeId, env: &Env) -> Result<Env, ReadbackError> {
        let edge = self.g.edge(b).clone();
        let mut inner = env.clone();
        for (o, i) in edge.ins.iter().zip(&edge.inner_in) {
            match self.term(*o, env)? {
                Term::Var(x) => {
                    inner.insert(*i, x);
                }
                _ => return fail("captured wire is not a variable"),
            }
        }
        Ok(inner)
    }

    fn thunk(&mut self, w: NodeId, env: &Env) -> Result<Term, ReadbackError> {
        let b = self.bubble_of(w)?;
        let edge = self.g.edge(b).clone();
        if edge.inner_in.len() != edge.ins.len() {
            return fail("branch takes an argument");
        }
        let inner = self.inner_env(b, env)?;
        self.layer(Some(b), &inner, edge.inner_out[0])
    }

    fn abstraction(&mut self, b: EdgeId, env: &Env) -> Result<Term, ReadbackError> {
        let edge = self.g.edge(b).clone();
        if edge.inner_in.len() != edge.ins.len() + 1 || edge.inner_out.len() != 1 {
            return fail("abstraction must bind exactly one wire");
        }
        let mut inner = self.inner_env(b, env)?;
        let p = *edge.inner_in.last().expect("bound wire");
        let destruct = self
            .inc
            .consumer(p)
            .filter(|(d, _)| self.g.edge(*d).label == EdgeLabel::Destrictify && self.g.edge(*d).parent == Some(b));
        if let Some((d, _)) = destruct {
            let outs = self.g.edge(d).outs.clone();
            let (x, y) = (self.fresh(), self.fresh());
            inner.insert(outs[0], x.clone());
            inner.insert(outs[1], y.clone());
            let body = self.layer(Some(b), &inner, edge.inner_out[0])?;
            return Ok(Term::PairLam(x, y, None, Box::new(body)));
        }
        let x = self.fresh();
        inner.insert(p, x.clone());
        let body = self.layer(Some(b), &inner, edge.inner_out[0])?;
        Ok(Term::Lam(x, None, Box::new(body)))
    }
}

/// Nests the bindings around `body`, each after the ones it mentions.
/// Two names bind the components of a pair.
fn wrap_lets(items: Vec<(Vec<String>, Term)>, body: Term) -> Term {
    let names: BTreeSet<String> = items.iter().flat_map(|(n, _)| n.iter().cloned()).collect();
    let mut pending = items;
    let mut placed: Vec<(Vec<String>, Term)> = Vec::new();
    let mut done = BTreeSet::new();
    while !pending.is_empty() {
        let ready = |(_, t): &(Vec<String>, Term)| free_vars(t).iter().all(|v| !names.contains(v) || done.contains(v));
        // Dependencies between layer bindings are acyclic in a valid graph.
        let i = pending.iter().position(ready).unwrap_or(0);
        let item = pending.remove(i);
        done.extend(item.0.iter().cloned());
        placed.push(item);
    }
    placed.into_iter().rev().fold(body, |acc, (xs, t)| match &xs[..] {
        [x] => Term::Let(x.clone(), Box::new(t), Box::new(acc)),
        [x, y] => Term::App(Box::new(Term::PairLam(x.clone(), y.clone(), None, Box::new(acc))), Box::new(t)),
        _ => unreachable!("bindings have one or two names"),
    })
}

/// Reads a closed, single-output graph back as a term.
pub fn readback(g: &Hypernet) -> Result<Term, ReadbackError> {
    readback_open(g).map(|(_, t)| t)
}

/// Reads a single-output graph back as a term; also returns the names
/// given to the left interface wires.
pub fn readback_open(g: &Hypernet) -> Result<(Vec<String>, Term), ReadbackError> {
    if g.right().len() != 1 {
        return fail(format!("expected one output, found {}", g.right().len()));
    }
    let mut r = Reader { g, inc: g.incidence(), counter: 0 };
    let mut env = Env::new();
    let mut free = Vec::new();
    for n in g.left() {
        if env.contains_key(n) {
            return fail("input wire listed twice");
        }
        let x = r.fresh();
        env.insert(*n, x.clone());
        free.push(x);
    }
    let t = r.layer(None, &env, g.right()[0])?;
    Ok((free, t))
}

/// Normal form used to compare machine results with the term evaluators:
/// lets bound to values (or to `rec` of an abstraction) are inlined, the
/// rest become applications.
pub fn comparable(t: &Term) -> Term {
    fn inlinable(t: &Term) -> bool {
        t.is_value() || matches!(t, Term::Rec(b) if b.is_value())
    }
    fn go(t: &Term) -> Term {
        match t {
            Term::Let(x, a, b) => {
                let a = go(a);
                if inlinable(&a) {
                    go(&subst(b, x, &a))
                } else {
                    Term::App(Box::new(Term::Lam(x.clone(), None, Box::new(go(b)))), Box::new(a))
                }
            }
            Term::Var(_) | Term::Const(_) => t.clone(),
            Term::Lam(x, ty, b) => Term::Lam(x.clone(), ty.clone(), Box::new(go(b))),
            Term::PairLam(x, y, ty, b) => Term::PairLam(x.clone(), y.clone(), ty.clone(), Box::new(go(b))),
            Term::App(a, b) => Term::App(Box::new(go(a)), Box::new(go(b))),
            Term::Pair(a, b) => Term::Pair(Box::new(go(a)), Box::new(go(b))),
            Term::Rec(b) => Term::Rec(Box::new(go(b))),
            Term::Prim(op, args) => Term::Prim(*op, args.iter().map(go).collect()),
            Term::Ite(a, b, c) => Term::Ite(Box::new(go(a)), Box::new(go(b)), Box::new(go(c))),
        }
    }
    go(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iso::iso_check_up_to_copies;
    use crate::machine::run;
    use crate::term::{alpha_eq, parse};
    use crate::translate::{translate_untyped, translate_untyped_ctx};

    fn round_trip(s: &str) {
        let g = translate_untyped(&parse(s).unwrap());
        let (free, t) = readback_open(&g).unwrap_or_else(|e| panic!("{s}: {e}"));
        let h = translate_untyped_ctx(&free, &t).unwrap();
        assert!(iso_check_up_to_copies(&h, &g).is_some(), "{s} read back as {t}");
    }

    #[test]
    fn smallest_abstraction() {
        let t = readback(&translate_untyped(&parse("\\y. y").unwrap())).unwrap();
        assert!(alpha_eq(&t, &parse("\\a. a").unwrap()));
    }

    #[test]
    fn translations_round_trip() {
        for s in [
            "\\y. y",
            "(\\x. x) (\\y. y)",
            "(\\x. x x)(\\y. y y)",
            "let x = 0 in x + (2 + x)",
            "\\f. \\x. f (f x)",
            "let p = (1, 2) in (\\(a, b). a + b) p",
            "let rec fact n = if n <= 0 then 1 else n * fact (n - 1) in fact 5",
            "let y = f 1 in y + y",
            "\\x. let z = 3 in \\w. z",
            "a b c",
        ] {
            round_trip(s);
        }
    }

    #[test]
    fn shared_value_becomes_a_let() {
        let t = readback(&translate_untyped(&parse("let x = 0 in x + (2 + x)").unwrap())).unwrap();
        assert!(matches!(t, Term::Let(..)));
        assert!(alpha_eq(&comparable(&t), &parse("0 + (2 + 0)").unwrap()));
    }

    #[test]
    fn machine_result_reads_back() {
        let r = run(&translate_untyped(&parse("(\\x.x)(\\y.y)").unwrap()), 20, false).unwrap();
        let t = readback(&r.outcome.value().unwrap().graph).unwrap();
        assert!(alpha_eq(&t, &parse("\\y. y").unwrap()));
    }
}
