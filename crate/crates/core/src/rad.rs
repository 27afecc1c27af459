//! Reverse-mode differentiation of first-order arithmetic graphs.
//!
//! `rad_transform` walks a foliation slice by slice. The forward graph
//! recomputes the primal and additionally outputs every primal wire a
//! reverse fragment reads ("saved" wires, in slice order). The reverse
//! graph takes the saved wires followed by one perturbation per primal
//! output and returns one perturbation per primal input.
//!
//! Structural cells: a symmetry stays a symmetry, a copy becomes an
//! addition, a delete becomes a zero, a constant's perturbation is
//! discarded. Operations use the fragments in an [`RdTable`].

use std::collections::BTreeMap;

use thiserror::Error;

use crate::eval::{eval_cbv, EvalResult};
use crate::foliation::{foliate, Cell, Foliation, FoliationError};
use crate::graph::{EdgeLabel, Hypernet, NodeId};
use crate::machine::{drop_wrappers, function_bubble, splice};
use crate::prim::{Const, PrimOp};
use crate::simplify::simplify;
use crate::term::{subst, Term};
use crate::translate::{translate_untyped_ctx, TranslateError};
use crate::types::ObjectType;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RadError {
    #[error("cannot differentiate `{cell}` (slice {slice}, cell {index})")]
    Unsupported { cell: String, slice: usize, index: usize },
    #[error("no reverse fragment for `{0}`")]
    MissingOp(String),
    #[error("expected {expected} inputs, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("evaluation failed: {0}")]
    Eval(String),
    #[error(transparent)]
    Foliation(#[from] FoliationError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
}

fn u() -> ObjectType {
    ObjectType::u()
}

/// Reverse fragments: inputs are the operation's primal inputs followed by
/// the output perturbation; outputs are one perturbation per input.
#[derive(Clone, Debug)]
pub struct RdTable {
    pub ops: BTreeMap<String, Hypernet>,
}

/// Small builder for fragments.
struct Frag {
    g: Hypernet,
}

impl Frag {
    fn new(k: usize) -> (Self, Vec<NodeId>) {
        let mut g = Hypernet::new();
        let ins: Vec<NodeId> = (0..=k).map(|_| g.add_node(u(), None)).collect();
        g.set_left(ins.clone());
        (Frag { g }, ins)
    }

    fn op(&mut self, name: &str, ins: &[NodeId]) -> NodeId {
        let o = self.g.add_node(u(), None);
        self.g.add_edge(EdgeLabel::gen(name), ins.to_vec(), vec![o], None);
        o
    }

    fn copy(&mut self, x: NodeId, n: usize) -> Vec<NodeId> {
        let outs: Vec<NodeId> = (0..n).map(|_| self.g.add_node(u(), None)).collect();
        self.g.add_edge(EdgeLabel::Copy(n), vec![x], outs.clone(), None);
        outs
    }

    fn delete(&mut self, x: NodeId) {
        self.g.add_edge(EdgeLabel::Delete, vec![x], vec![], None);
    }

    fn finish(mut self, outs: Vec<NodeId>) -> Hypernet {
        self.g.set_right(outs);
        self.g
    }
}

impl Default for RdTable {
    /// add: (δ, δ); sub: (δ, −δ); mul: (δ·y, δ·x); neg: −δ.
    fn default() -> Self {
        let mut ops = BTreeMap::new();
        let (mut f, i) = Frag::new(2);
        f.delete(i[0]);
        f.delete(i[1]);
        let d = f.copy(i[2], 2);
        ops.insert("add".into(), f.finish(d));

        let (mut f, i) = Frag::new(2);
        f.delete(i[0]);
        f.delete(i[1]);
        let d = f.copy(i[2], 2);
        let n = f.op("neg", &[d[1]]);
        ops.insert("sub".into(), f.finish(vec![d[0], n]));

        let (mut f, i) = Frag::new(2);
        let d = f.copy(i[2], 2);
        let dx = f.op("mul", &[d[0], i[1]]);
        let dy = f.op("mul", &[d[1], i[0]]);
        ops.insert("mul".into(), f.finish(vec![dx, dy]));

        let (mut f, i) = Frag::new(1);
        f.delete(i[0]);
        let n = f.op("neg", &[i[1]]);
        ops.insert("neg".into(), f.finish(vec![n]));
        RdTable { ops }
    }
}

/// Which primal inputs of a fragment are read rather than discarded.
fn reads(frag: &Hypernet, k: usize) -> Vec<bool> {
    let inc = frag.incidence();
    frag.left()[..k]
        .iter()
        .map(|n| !matches!(inc.consumer(*n), Some((e, _)) if frag.edge(e).label == EdgeLabel::Delete))
        .collect()
}

#[derive(Clone, Debug)]
pub struct AdjointResult {
    /// Primal inputs to primal outputs followed by the saved wires.
    pub forward: Hypernet,
    /// Saved wires and output perturbations to input perturbations.
    pub reverse: Hypernet,
    pub primal_outputs: usize,
    pub saved: usize,
}

enum Step {
    Id,
    Sym,
    Copy,
    Delete,
    Const,
    Op { name: String, saved: Vec<Option<usize>> },
}

pub fn rad_transform(f: &Foliation, table: &RdTable) -> Result<AdjointResult, RadError> {
    let mut fw = Hypernet::new();
    let inputs: Vec<NodeId> = f.input.iter().map(|_| fw.add_node(u(), None)).collect();
    fw.set_left(inputs.clone());
    let mut frontier = inputs;
    let mut saved: Vec<NodeId> = Vec::new();
    let mut plan: Vec<Vec<Step>> = Vec::new();
    for (si, slice) in f.slices.iter().enumerate() {
        let mut next = Vec::new();
        let mut steps = Vec::new();
        let mut off = 0;
        for (ci, cell) in slice.iter().enumerate() {
            let k = cell.ins().len();
            let ins = frontier[off..off + k].to_vec();
            off += k;
            let unsupported = || RadError::Unsupported { cell: cell.to_string(), slice: si, index: ci };
            let step = match cell {
                Cell::Id(_) => {
                    next.push(ins[0]);
                    Step::Id
                }
                Cell::Sym(..) => {
                    next.extend([ins[1], ins[0]]);
                    Step::Sym
                }
                Cell::Edge { label: EdgeLabel::Copy(n), .. } => {
                    let outs: Vec<NodeId> = (0..*n).map(|_| fw.add_node(u(), None)).collect();
                    fw.add_edge(EdgeLabel::Copy(*n), ins, outs.clone(), None);
                    next.extend(outs);
                    Step::Copy
                }
                Cell::Edge { label: EdgeLabel::Delete, .. } => {
                    fw.add_edge(EdgeLabel::Delete, ins, vec![], None);
                    Step::Delete
                }
                Cell::Edge { label: EdgeLabel::Gen(name), outs, .. } if k == 0 && outs.len() == 1 => {
                    if Const::from_label(name).and_then(|c| c.as_f64()).is_none() {
                        return Err(unsupported());
                    }
                    let o = fw.add_node(u(), None);
                    fw.add_edge(EdgeLabel::gen(name), vec![], vec![o], None);
                    next.push(o);
                    Step::Const
                }
                Cell::Edge { label: EdgeLabel::Gen(name), outs, .. } if outs.len() == 1 => {
                    let frag = table.ops.get(name).ok_or_else(|| RadError::MissingOp(name.clone()))?;
                    if frag.left().len() != k + 1 || frag.right().len() != k {
                        return Err(RadError::MissingOp(name.clone()));
                    }
                    let mut op_ins = Vec::new();
                    let mut slots = Vec::new();
                    for (x, keep) in ins.iter().zip(reads(frag, k)) {
                        if keep {
                            let (a, b) = (fw.add_node(u(), None), fw.add_node(u(), None));
                            fw.add_edge(EdgeLabel::Copy(2), vec![*x], vec![a, b], None);
                            op_ins.push(a);
                            slots.push(Some(saved.len()));
                            saved.push(b);
                        } else {
                            op_ins.push(*x);
                            slots.push(None);
                        }
                    }
                    let o = fw.add_node(u(), None);
                    fw.add_edge(EdgeLabel::gen(name), op_ins, vec![o], None);
                    next.push(o);
                    Step::Op { name: name.clone(), saved: slots }
                }
                _ => return Err(unsupported()),
            };
            steps.push(step);
        }
        frontier = next;
        plan.push(steps);
    }
    let primal_outputs = frontier.len();
    let mut right = frontier;
    right.extend(saved.iter().copied());
    fw.set_right(right);

    let mut rv = Hypernet::new();
    let saved_in: Vec<NodeId> = saved.iter().map(|_| rv.add_node(u(), None)).collect();
    let mut delta: Vec<NodeId> = (0..primal_outputs).map(|_| rv.add_node(u(), None)).collect();
    let mut left = saved_in.clone();
    left.extend(delta.iter().copied());
    rv.set_left(left);
    let mut used_saved = vec![false; saved.len()];
    for (slice, steps) in f.slices.iter().zip(&plan).rev() {
        let mut prev = Vec::new();
        let mut off = 0;
        for (cell, step) in slice.iter().zip(steps) {
            let n = cell.outs().len();
            let d = delta[off..off + n].to_vec();
            off += n;
            match step {
                Step::Id => prev.push(d[0]),
                Step::Sym => prev.extend([d[1], d[0]]),
                Step::Copy => prev.push(sum(&mut rv, &d)),
                Step::Delete => prev.push(constant(&mut rv, "0")),
                Step::Const => {
                    rv.add_edge(EdgeLabel::Delete, vec![d[0]], vec![], None);
                }
                Step::Op { name, saved: slots } => {
                    let frag = &table.ops[name];
                    let (nmap, emap) = rv.embed(frag, None);
                    let inc = frag.incidence();
                    for (i, slot) in slots.iter().enumerate() {
                        let m = nmap[&frag.left()[i]];
                        match slot {
                            Some(s) => {
                                rv.merge_nodes(saved_in[*s], m);
                                used_saved[*s] = true;
                            }
                            None => {
                                let (del, _) = inc.consumer(frag.left()[i]).expect("discarded input");
                                rv.remove_edge(emap[&del]);
                                rv.remove_node(m);
                            }
                        }
                    }
                    rv.merge_nodes(d[0], nmap[&frag.left()[slots.len()]]);
                    prev.extend(frag.right().iter().map(|o| nmap[o]));
                }
            }
        }
        delta = prev;
    }
    rv.set_right(delta);
    Ok(AdjointResult { forward: fw, reverse: rv, primal_outputs, saved: saved.len() })
}

fn constant(g: &mut Hypernet, label: &str) -> NodeId {
    let o = g.add_node(u(), None);
    g.add_edge(EdgeLabel::gen(label), vec![], vec![o], None);
    o
}

/// Left-nested sum; zero when empty.
fn sum(g: &mut Hypernet, xs: &[NodeId]) -> NodeId {
    let Some((first, rest)) = xs.split_first() else { return constant(g, "0") };
    rest.iter().fold(*first, |acc, x| {
        let o = g.add_node(u(), None);
        g.add_edge(EdgeLabel::gen("add"), vec![acc, *x], vec![o], None);
        o
    })
}

/// Evaluates a first-order graph (constants, primitives, copy, delete) on
/// the given inputs, in dependency order.
pub fn eval_dataflow(g: &Hypernet, inputs: &[Const]) -> Result<Vec<Const>, RadError> {
    if inputs.len() != g.left().len() {
        return Err(RadError::Arity { expected: g.left().len(), got: inputs.len() });
    }
    let mut val: BTreeMap<NodeId, Const> = g.left().iter().copied().zip(inputs.iter().copied()).collect();
    let mut pending: Vec<_> = g.edges().map(|(id, _)| id).collect();
    while !pending.is_empty() {
        let before = pending.len();
        let mut rest = Vec::new();
        for id in pending {
            let e = g.edge(id);
            let Some(args) = e.ins.iter().map(|n| val.get(n).copied()).collect::<Option<Vec<_>>>() else {
                rest.push(id);
                continue;
            };
            match &e.label {
                EdgeLabel::Copy(_) => {
                    for o in &e.outs {
                        val.insert(*o, args[0]);
                    }
                }
                EdgeLabel::Delete => {}
                EdgeLabel::Gen(name) if args.is_empty() => {
                    let c = Const::from_label(name).ok_or_else(|| RadError::Eval(format!("unknown constant {name}")))?;
                    val.insert(e.outs[0], c);
                }
                EdgeLabel::Gen(name) => {
                    let op = PrimOp::from_name(name).ok_or_else(|| RadError::Eval(format!("unknown operation {name}")))?;
                    let r = op.apply(&args).ok_or_else(|| RadError::Eval(format!("{name} undefined on {args:?}")))?;
                    val.insert(e.outs[0], r);
                }
                other => return Err(RadError::Eval(format!("cannot evaluate `{other}`"))),
            }
        }
        if rest.len() == before {
            return Err(RadError::Eval("cyclic or disconnected graph".into()));
        }
        pending = rest;
    }
    g.right().iter().map(|n| val.get(n).copied().ok_or_else(|| RadError::Eval(format!("wire {n} has no value")))).collect()
}

fn reals(xs: &[Const]) -> Result<Vec<f64>, RadError> {
    xs.iter().map(|c| c.as_f64().ok_or_else(|| RadError::Eval(format!("{c} is not a number")))).collect()
}

/// Runs the forward graph at `inputs`, then the reverse graph with the
/// saved wires and `delta_out` on every primal output.
pub fn eval_reverse(r: &AdjointResult, inputs: &[f64], delta_out: f64) -> Result<Vec<f64>, RadError> {
    let ins: Vec<Const> = inputs.iter().map(|x| Const::Real(*x)).collect();
    let out = eval_dataflow(&r.forward, &ins)?;
    let mut rin = out[r.primal_outputs..].to_vec();
    rin.extend(std::iter::repeat_n(Const::Real(delta_out), r.primal_outputs));
    reals(&eval_dataflow(&r.reverse, &rin)?)
}

/// Beta-reduces applications of syntactic abstractions and `let`s so that
/// only first-order cells remain.
pub fn first_order(g: &Hypernet) -> Hypernet {
    let mut h = g.clone();
    loop {
        let inc = h.incidence();
        let redex = h.edges().find_map(|(id, e)| match &e.label {
            EdgeLabel::Eval => function_bubble(&h, &inc, e.ins[0]).map(|(b, w)| (id, b, w, e.ins[0], e.ins[1])),
            EdgeLabel::Gen(n) if n == "let" => {
                function_bubble(&h, &inc, e.ins[1]).map(|(b, w)| (id, b, w, e.ins[1], e.ins[0]))
            }
            _ => None,
        });
        let Some((id, b, wrappers, fw, arg)) = redex else { return simplify(&h) };
        let out = h.edge(id).outs[0];
        h.remove_edge(id);
        drop_wrappers(&mut h, fw, &wrappers);
        splice(&mut h, b, &[arg], out);
        h = simplify(&h);
    }
}

/// Differentiates `t` with respect to `vars` (which become the inputs, in
/// order).
pub fn rad_term(t: &Term, vars: &[String], table: &RdTable) -> Result<AdjointResult, RadError> {
    let g = first_order(&translate_untyped_ctx(vars, t)?);
    rad_transform(&foliate(&g)?, table)
}

/// Gradient of `t` at `point` by reverse differentiation.
pub fn gradient(t: &Term, point: &[(String, f64)]) -> Result<Vec<f64>, RadError> {
    let vars: Vec<String> = point.iter().map(|(v, _)| v.clone()).collect();
    let r = rad_term(t, &vars, &RdTable::default())?;
    let xs: Vec<f64> = point.iter().map(|(_, x)| *x).collect();
    eval_reverse(&r, &xs, 1.0)
}

/// Central differences `(f(x+h) − f(x−h)) / 2h` per input, with `f`
/// evaluated by the call-by-value interpreter.
pub fn fd_oracle(t: &Term, point: &[(String, f64)], h: f64) -> Result<Vec<f64>, RadError> {
    let at = |shift: usize, by: f64| -> Result<f64, RadError> {
        let mut s = t.clone();
        for (i, (v, x)) in point.iter().enumerate() {
            let x = if i == shift { x + by } else { *x };
            s = subst(&s, v, &Term::Const(Const::Real(x)));
        }
        match eval_cbv(&s, 100_000) {
            EvalResult::Value(Term::Const(c)) => c.as_f64().ok_or_else(|| RadError::Eval(format!("{c} is not a number"))),
            other => Err(RadError::Eval(format!("{other:?}"))),
        }
    };
    (0..point.len()).map(|i| Ok((at(i, h)? - at(i, -h)?) / (2.0 * h))).collect()
}
