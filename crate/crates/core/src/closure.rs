//! Closure conversion and hoisting for unityped translations.
//!
//! `convert` turns every function bubble into a closed bubble taking a pair
//! `(argument, environment)`, paired with the tuple of its captured wires:
//! a function value becomes `(env, fun)`. Applications unpack the pair with
//! a `let` whose body applies `fun` to `(argument, env)`; when the function
//! is a pair built by the conversion itself the unpack is skipped.
//!
//! Bubbles under `let`, `ite` and `rec` are control structure, not
//! function values. They are left in place and may keep their captures.
//!
//! `hoist` then moves closed function bubbles to the top level one layer at
//! a time. Each move turns the function into a captured wire of the bubble
//! it left.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{EdgeId, EdgeLabel, Hypernet, Incidence, NodeId};
use crate::types::ObjectType;
use crate::validate::validate_hypernet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CcError {
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("closure conversion needs a unityped graph; wire {0} has type {1}")]
    Typed(NodeId, ObjectType),
    #[error("application {0:?} does not go through retract-iota")]
    Application(EdgeId),
    #[error("bubble {0:?} captures a local wire")]
    Unclosed(EdgeId),
}

fn u() -> ObjectType {
    ObjectType::u()
}

/// How a function bubble's output is used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FunUse {
    /// Wrapped by `retract-rho` into a function value.
    Value(EdgeId),
    /// Applied on the spot by an `eval`.
    Applied(EdgeId),
}

fn function_use(g: &Hypernet, inc: &Incidence, b: EdgeId) -> Option<FunUse> {
    let e = g.edge(b);
    if e.label != EdgeLabel::Bubble {
        return None;
    }
    let (c, port) = inc.consumer(e.outs[0])?;
    match g.edge(c).label {
        EdgeLabel::Eval if port == 0 => Some(FunUse::Applied(c)),
        EdgeLabel::Rho => {
            let next = inc.consumer(g.edge(c).outs[0]).map(|(x, _)| g.edge(x));
            let under_rec = match next {
                Some(i) if i.label == EdgeLabel::Iota => {
                    inc.consumer(i.outs[0]).is_some_and(|(r, _)| g.edge(r).label.gen_name() == Some("rec"))
                }
                _ => false,
            };
            (!under_rec).then_some(FunUse::Value(c))
        }
        _ => None,
    }
}

/// A bubble whose output is a function value or is applied directly, as
/// opposed to the body of a `let`, a branch of `ite` or the argument of
/// `rec`.
pub fn is_function_bubble(g: &Hypernet, inc: &Incidence, b: EdgeId) -> bool {
    function_use(g, inc, b).is_some()
}

fn check_input(g: &Hypernet) -> Result<(), CcError> {
    if let Some(v) = validate_hypernet(g).first() {
        return Err(CcError::Invalid(v.to_string()));
    }
    let allowed = [u(), ObjectType::arrow(u(), u()), ObjectType::arrow(ObjectType::Unit, u())];
    for (n, node) in g.nodes() {
        if !allowed.contains(&node.ty) {
            return Err(CcError::Typed(n, node.ty.clone()));
        }
    }
    Ok(())
}

/// Right-nested tuple of `parts`; `()` when empty.
fn tuple(g: &mut Hypernet, parts: &[NodeId], layer: Option<EdgeId>) -> NodeId {
    match parts {
        [] => {
            let n = g.add_node(u(), layer);
            g.add_edge(EdgeLabel::gen("unit"), vec![], vec![n], layer);
            n
        }
        [x] => *x,
        [x, rest @ ..] => {
            let r = tuple(g, rest, layer);
            let n = g.add_node(u(), layer);
            g.add_edge(EdgeLabel::Strictify, vec![*x, r], vec![n], layer);
            n
        }
    }
}

/// Inverse of `tuple`: a wire whose destructuring feeds `parts`.
fn untuple(g: &mut Hypernet, parts: &[NodeId], layer: Option<EdgeId>) -> NodeId {
    match parts {
        [] => {
            let n = g.add_node(u(), layer);
            g.add_edge(EdgeLabel::Delete, vec![n], vec![], layer);
            n
        }
        [x] => *x,
        [x, rest @ ..] => {
            let r = untuple(g, rest, layer);
            let n = g.add_node(u(), layer);
            g.add_edge(EdgeLabel::Destrictify, vec![n], vec![*x, r], layer);
            n
        }
    }
}

pub fn convert(g: &Hypernet) -> Result<Hypernet, CcError> {
    check_input(g)?;
    let mut h = g.clone();
    let inc = h.incidence();
    let funs: Vec<(EdgeId, FunUse)> =
        h.bubbles_deepest_first().into_iter().filter_map(|b| function_use(&h, &inc, b).map(|u| (b, u))).collect();
    let mut pairs = BTreeSet::new();
    let mut direct = BTreeSet::new();
    for (b, usage) in funs {
        let env = close(&mut h, b);
        match usage {
            FunUse::Value(rho) => {
                let layer = h.edge(b).parent;
                let r = h.edge(rho).outs[0];
                let f = h.add_node(u(), layer);
                h.edge_mut(rho).outs = vec![f];
                pairs.insert(h.add_edge(EdgeLabel::Strictify, vec![env, f], vec![r], layer));
            }
            FunUse::Applied(ev) => {
                pass_environment(&mut h, ev, env);
                direct.insert(ev);
            }
        }
    }
    let evals: Vec<EdgeId> =
        h.edges().filter(|(id, e)| e.label == EdgeLabel::Eval && !direct.contains(id)).map(|(id, _)| id).collect();
    for ev in evals {
        convert_application(&mut h, ev, &pairs)?;
    }
    Ok(h)
}

/// Rebinds the captured wires of `b` through an environment argument and
/// returns the environment tuple built outside.
fn close(g: &mut Hypernet, b: EdgeId) -> NodeId {
    let e = g.edge(b).clone();
    let n = e.ins.len();
    let env = tuple(g, &e.ins, e.parent);
    let p = g.add_node(u(), Some(b));
    let k = untuple(g, &e.inner_in[..n], Some(b));
    g.add_edge(EdgeLabel::Destrictify, vec![p], vec![e.inner_in[n], k], Some(b));
    let be = g.edge_mut(b);
    be.ins.clear();
    be.inner_in = vec![p];
    env
}

/// Replaces the argument `a` of application `ev` by `(a, env)`.
fn pass_environment(g: &mut Hypernet, ev: EdgeId, env: NodeId) {
    let layer = g.edge(ev).parent;
    let a = g.edge(ev).ins[1];
    let q = g.add_node(u(), layer);
    g.add_edge(EdgeLabel::Strictify, vec![a, env], vec![q], layer);
    g.edge_mut(ev).ins[1] = q;
}

fn convert_application(g: &mut Hypernet, ev: EdgeId, pairs: &BTreeSet<EdgeId>) -> Result<(), CcError> {
    let inc = g.incidence();
    let e = g.edge(ev).clone();
    let layer = e.parent;
    let (fi, a, r) = (e.ins[0], e.ins[1], e.outs[0]);
    let iota = match inc.producer(fi) {
        Some((i, _)) if g.edge(i).label == EdgeLabel::Iota => i,
        _ => return Err(CcError::Application(ev)),
    };
    let f = g.edge(iota).ins[0];
    match inc.producer(f) {
        Some((s, _)) if pairs.contains(&s) => {
            let se = g.remove_edge(s).expect("pair");
            g.remove_node(f);
            g.edge_mut(iota).ins = vec![se.ins[1]];
            pass_environment(g, ev, se.ins[0]);
        }
        _ => {
            g.remove_edge(ev);
            g.remove_edge(iota);
            g.remove_node(fi);
            let lo = g.add_node(ObjectType::arrow(u(), u()), layer);
            let l = g.add_edge(EdgeLabel::Bubble, vec![a], vec![lo], layer);
            let a_in = g.add_node(u(), Some(l));
            let p = g.add_node(u(), Some(l));
            let env = g.add_node(u(), Some(l));
            let fun = g.add_node(u(), Some(l));
            g.add_edge(EdgeLabel::Destrictify, vec![p], vec![env, fun], Some(l));
            let fi2 = g.add_node(ObjectType::arrow(u(), u()), Some(l));
            g.add_edge(EdgeLabel::Iota, vec![fun], vec![fi2], Some(l));
            let q = g.add_node(u(), Some(l));
            g.add_edge(EdgeLabel::Strictify, vec![a_in, env], vec![q], Some(l));
            let root = g.add_node(u(), Some(l));
            g.add_edge(EdgeLabel::Eval, vec![fi2, q], vec![root], Some(l));
            g.set_inner(l, vec![a_in, p], vec![root]);
            g.add_edge(EdgeLabel::gen("let"), vec![f, lo], vec![r], layer);
        }
    }
    Ok(())
}

/// Moves every function bubble to the top level.
pub fn hoist(g: &Hypernet) -> Result<Hypernet, CcError> {
    let mut h = g.clone();
    loop {
        let inc = h.incidence();
        let next = h
            .edges()
            .filter(|(_, e)| e.parent.is_some())
            .filter_map(|(id, _)| function_use(&h, &inc, id).map(|u| (h.depth(Some(id)), id, u)))
            .min_by_key(|(d, id, _)| (*d, *id));
        let Some((_, b, usage)) = next else { return Ok(h) };
        yank(&mut h, b, usage)?;
    }
}

/// Moves bubble `b`, with its `retract-rho` if any, out of its parent
/// bubble, which captures the resulting function instead.
fn yank(g: &mut Hypernet, b: EdgeId, usage: FunUse) -> Result<(), CcError> {
    let p = g.edge(b).parent.expect("nested");
    let outer = g.edge(p).parent;
    for i in 0..g.edge(b).ins.len() {
        let c = g.edge(b).ins[i];
        let pe = g.edge(p);
        let Some(j) = pe.inner_in[..pe.ins.len()].iter().position(|x| *x == c) else {
            return Err(CcError::Unclosed(b));
        };
        let pe = g.edge_mut(p);
        let o = pe.ins.remove(j);
        pe.inner_in.remove(j);
        g.edge_mut(b).ins[i] = o;
        g.remove_node(c);
    }
    g.edge_mut(b).parent = outer;
    let o = g.edge(b).outs[0];
    let (f_in, f_out) = match usage {
        FunUse::Value(rho) => {
            g.node_mut(o).parent = outer;
            g.edge_mut(rho).parent = outer;
            let f_in = g.edge(rho).outs[0];
            let f_out = g.add_node(g.ty(f_in).clone(), outer);
            g.edge_mut(rho).outs = vec![f_out];
            (f_in, f_out)
        }
        FunUse::Applied(_) => {
            let f_out = g.add_node(g.ty(o).clone(), outer);
            g.edge_mut(b).outs = vec![f_out];
            (o, f_out)
        }
    };
    let pe = g.edge_mut(p);
    let n = pe.ins.len();
    pe.ins.push(f_out);
    pe.inner_in.insert(n, f_in);
    Ok(())
}

/// True when every function bubble sits at the top level and captures only
/// other top-level functions.
pub fn check_globalized(g: &Hypernet) -> bool {
    let inc = g.incidence();
    g.edges()
        .filter(|(id, _)| is_function_bubble(g, &inc, *id))
        .all(|(_, e)| e.parent.is_none() && e.ins.iter().all(|c| global_function(g, &inc, *c)))
}

/// `w` carries a top-level bubble whose captures are global too, possibly
/// through copies and `retract-rho`. A bubble hoisted from an application
/// is captured directly by the bubble it left.
fn global_function(g: &Hypernet, inc: &Incidence, mut w: NodeId) -> bool {
    loop {
        let Some((e, _)) = inc.producer(w) else { return false };
        let edge = g.edge(e);
        match edge.label {
            EdgeLabel::Copy(_) => w = edge.ins[0],
            EdgeLabel::Rho => w = edge.ins[0],
            EdgeLabel::Bubble => {
                return edge.parent.is_none() && edge.ins.iter().all(|c| global_function(g, inc, *c));
            }
            _ => return false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::programs;
    use crate::machine::{run, Outcome};
    use crate::readback::{comparable, readback};
    use crate::term::{alpha_eq, parse, Term};
    use crate::translate::{translate_typed, translate_untyped};

    fn graph(s: &str) -> Hypernet {
        translate_untyped(&parse(s).unwrap())
    }

    fn cc(g: &Hypernet) -> Hypernet {
        let c = convert(g).unwrap();
        assert_eq!(validate_hypernet(&c), vec![], "converted");
        let h = hoist(&c).unwrap();
        assert_eq!(validate_hypernet(&h), vec![], "hoisted");
        h
    }

    #[test]
    fn curried_example() {
        let g = graph(r"(\x. \y. x + y) 1 2");
        assert!(!check_globalized(&g));
        let c = convert(&g).unwrap();
        assert!(!check_globalized(&c), "inner function is still nested");
        let h = hoist(&c).unwrap();
        assert!(check_globalized(&h));
        let expected = parse(
            r"let x0 = 2 in
              let x1 = \(y, x). x + y in
              let x2 = \(x, e). (x, x1) in
              (\(env, k). k (x0, env)) (x2 (1, ()))",
        )
        .unwrap();
        let got = readback(&h).unwrap();
        assert!(alpha_eq(&comparable(&got), &comparable(&expected)), "{got}");
        let v = run(&h, 1000, false).unwrap();
        assert_eq!(readback(&v.outcome.value().unwrap().graph).unwrap(), parse("3").unwrap());
    }

    #[test]
    fn closed_abstraction_gets_unit_environment() {
        let h = convert(&graph(r"\x. x")).unwrap();
        assert_eq!(readback(&h).unwrap().to_string(), readback(&graph(r"((), \(x0, x1). x0)")).unwrap().to_string());
        assert!(check_globalized(&h));
    }

    #[test]
    fn constants_are_global() {
        assert!(check_globalized(&graph("1 + 2")));
        assert!(check_globalized(&cc(&graph("1 + 2"))));
    }

    #[test]
    fn hoist_is_a_fixpoint_on_global_programs() {
        let h = cc(&graph(r"(\x. \y. x + y) 1 2"));
        assert_eq!(hoist(&h).unwrap(), h);
    }

    #[test]
    fn typed_graphs_are_rejected() {
        let t = translate_typed(&[], &parse(r"\x: Int. x").unwrap()).unwrap();
        assert!(matches!(convert(&t), Err(CcError::Typed(..))));
    }

    #[test]
    fn corpus_results_agree() {
        for (name, t) in programs() {
            let g = translate_untyped(&t);
            let h = cc(&g);
            assert!(check_globalized(&h), "{name}");
            let a = run(&g, 3000, true).unwrap().outcome;
            let b = run(&h, 3000, true).unwrap().outcome;
            match (&a, &b) {
                (Outcome::Value(x), Outcome::Value(y)) => {
                    let (x, y) = (comparable(&readback(&x.graph).unwrap()), comparable(&readback(&y.graph).unwrap()));
                    if matches!(x, Term::Const(_)) {
                        assert_eq!(x, y, "{name}");
                    }
                }
                (Outcome::Diverged(_), Outcome::Diverged(_)) => {}
                _ => panic!("{name}: {a:?} vs {b:?}"),
            }
        }
    }
}
