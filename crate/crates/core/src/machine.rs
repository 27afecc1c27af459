//! Token-passing call-by-value machine.
//!
//! A single token sits on a top-level wire. Pointing left (`Eval`) it asks
//! for the value of the wire's producer; pointing right (`Value`) it reports
//! that the producer is a value and hands control to the consumer.
//! Application evaluates the function first, operators and pairs evaluate
//! their operands from the last port to the first. A `rec` cell placed
//! directly in a pair counts as a value there.
//!
//! After every rule the graph is tidied: [`simplify`](crate::simplify) is
//! run with the token wire protected, deleted values are collected, and
//! shared pairs feeding a destrictifier are copied so the pair pattern can
//! cancel. `retract-iota` cells are transparent to the token.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::fmt;

use thiserror::Error;

use crate::graph::{EdgeId, EdgeLabel, Hypernet, Incidence, NodeId};
use crate::iso::iso_check_seeded;
use crate::prim::{Const, PrimOp};
use crate::simplify::{simplify_in_place, Tracker};
use crate::types::ObjectType;
use crate::validate::validate_hypernet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    Eval,
    Value,
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dir::Eval => "eval",
            Dir::Value => "value",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Token {
    pub wire: NodeId,
    pub dir: Dir,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.wire, self.dir)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MachineState {
    pub graph: Hypernet,
    pub token: Token,
    pub steps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    S1,
    S2,
    S3,
    V,
    Beta,
    C1,
    C2,
    Delta,
    Ite,
    Rec,
    Let,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::S1 => "S1",
            Rule::S2 => "S2",
            Rule::S3 => "S3",
            Rule::V => "V",
            Rule::Beta => "beta",
            Rule::C1 => "C1",
            Rule::C2 => "C2",
            Rule::Delta => "delta",
            Rule::Ite => "ite",
            Rule::Rec => "rec",
            Rule::Let => "let",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MachineError {
    #[error("open program: {0} free input wire(s)")]
    Open(usize),
    #[error("expected exactly one output wire, found {0}")]
    Outputs(usize),
    #[error("invalid graph: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepResult {
    Next(MachineState, Rule),
    Final,
    Stuck(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Divergence {
    /// The state after `step` is isomorphic to the one after `earlier`.
    Cycle { step: usize, earlier: usize },
    Budget,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Value(MachineState),
    Diverged(Divergence),
    Stuck(MachineState, String),
}

impl Outcome {
    pub fn value(&self) -> Option<&MachineState> {
        match self {
            Outcome::Value(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub step: usize,
    pub rule: Rule,
    pub token: Token,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step={} rule={} token={}", self.step, self.rule, self.token)
    }
}

#[derive(Clone, Debug)]
pub struct Run {
    pub outcome: Outcome,
    pub trace: Vec<TraceEntry>,
    /// Every state visited, starting with the initial one. Only filled when
    /// states are recorded.
    pub states: Vec<MachineState>,
}

impl Run {
    pub fn rules(&self) -> Vec<Rule> {
        self.trace.iter().map(|t| t.rule).collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RunConfig {
    pub budget: usize,
    pub detect_cycles: bool,
    pub record_states: bool,
}

/// Places the token, pointing left, on the root wire.
pub fn init(g: &Hypernet) -> Result<MachineState, MachineError> {
    if !g.left().is_empty() {
        return Err(MachineError::Open(g.left().len()));
    }
    if g.right().len() != 1 {
        return Err(MachineError::Outputs(g.right().len()));
    }
    if let Some(v) = validate_hypernet(g).first() {
        return Err(MachineError::Invalid(v.to_string()));
    }
    let mut graph = g.clone();
    let root = graph.right()[0];
    let wire = normalize(&mut graph, root).map_err(MachineError::Invalid)?;
    Ok(MachineState { graph, token: Token { wire, dir: Dir::Eval }, steps: 0 })
}

/// Fires the single applicable rule.
pub fn step(s: &MachineState) -> StepResult {
    let mut g = s.graph.clone();
    match fire(&mut g, s.token) {
        Err(reason) => StepResult::Stuck(reason),
        Ok(None) => StepResult::Final,
        Ok(Some((rule, tok))) => match normalize(&mut g, tok.wire) {
            Ok(wire) => StepResult::Next(
                MachineState { graph: g, token: Token { wire, dir: tok.dir }, steps: s.steps + 1 },
                rule,
            ),
            Err(reason) => StepResult::Stuck(reason),
        },
    }
}

/// Runs from `init(g)` for at most `budget` rule firings.
pub fn run(g: &Hypernet, budget: usize, detect_cycles: bool) -> Result<Run, MachineError> {
    run_with(g, RunConfig { budget, detect_cycles, record_states: false })
}

pub fn run_with(g: &Hypernet, cfg: RunConfig) -> Result<Run, MachineError> {
    let mut s = init(g)?;
    let mut trace = Vec::new();
    let mut states = Vec::new();
    // Cheap fingerprints to avoid most isomorphism checks.
    let mut seen: HashMap<(Dir, usize, usize, u64), Vec<usize>> = HashMap::new();
    let mut history: Vec<MachineState> = Vec::new();
    if cfg.record_states {
        states.push(s.clone());
    }
    if cfg.detect_cycles {
        seen.entry(fingerprint(&s)).or_default().push(0);
        history.push(s.clone());
    }
    loop {
        match step(&s) {
            StepResult::Final => return Ok(Run { outcome: Outcome::Value(s), trace, states }),
            StepResult::Stuck(reason) => return Ok(Run { outcome: Outcome::Stuck(s, reason), trace, states }),
            StepResult::Next(next, rule) => {
                trace.push(TraceEntry { step: next.steps, rule, token: next.token });
                s = next;
                if cfg.record_states {
                    states.push(s.clone());
                }
                if cfg.detect_cycles {
                    let fp = fingerprint(&s);
                    let earlier = seen.get(&fp).and_then(|ix| {
                        ix.iter().copied().find(|i| same_state(&history[*i], &s))
                    });
                    if let Some(earlier) = earlier {
                        let d = Divergence::Cycle { step: s.steps, earlier };
                        return Ok(Run { outcome: Outcome::Diverged(d), trace, states });
                    }
                    seen.entry(fp).or_default().push(history.len());
                    history.push(s.clone());
                }
                if s.steps >= cfg.budget {
                    return Ok(Run { outcome: Outcome::Diverged(Divergence::Budget), trace, states });
                }
            }
        }
    }
}

fn fingerprint(s: &MachineState) -> (Dir, usize, usize, u64) {
    let mut labels: Vec<String> = s.graph.edges().map(|(_, e)| e.label.to_string()).collect();
    labels.sort();
    let mut h = DefaultHasher::new();
    labels.hash(&mut h);
    (s.token.dir, s.graph.node_count(), s.graph.edge_count(), h.finish())
}

/// Graph isomorphism that also maps token to token.
pub fn same_state(a: &MachineState, b: &MachineState) -> bool {
    a.token.dir == b.token.dir && iso_check_seeded(&a.graph, &b.graph, &[(a.token.wire, b.token.wire)]).is_some()
}

/// The rules whose left-hand side matches the state. Written independently
/// of [`step`] so that tests can check that exactly one applies.
pub fn applicable_rules(s: &MachineState) -> Vec<Rule> {
    let g = &s.graph;
    let inc = g.incidence();
    let mut out = Vec::new();
    let w = s.token.wire;
    match s.token.dir {
        Dir::Eval => {
            let w = up(g, &inc, w);
            let Some((e, port)) = inc.producer(w) else { return out };
            let edge = g.edge(e);
            let delayed = delayed_rec(g, &inc, w);
            let is_value = matches!(edge.label, EdgeLabel::Bubble | EdgeLabel::Rho)
                || (edge.ins.is_empty() && matches!(edge.label, EdgeLabel::Gen(_)))
                || delayed;
            if is_value {
                out.push(Rule::V);
            }
            let has_operands = matches!(edge.label, EdgeLabel::Eval | EdgeLabel::Strictify)
                || (!edge.ins.is_empty() && matches!(edge.label, EdgeLabel::Gen(_)) && !delayed);
            if has_operands {
                out.push(Rule::S1);
            }
            if matches!(edge.label, EdgeLabel::Copy(_)) && copyable(g, &inc, edge.ins[0]) {
                out.push(if port == 0 { Rule::C1 } else { Rule::C2 });
            }
        }
        Dir::Value => {
            if g.right().first() == Some(&w) {
                return out;
            }
            let w = down(g, &inc, w);
            let Some((e, port)) = inc.consumer(w) else { return out };
            let edge = g.edge(e);
            let last = edge.ins.len().saturating_sub(1);
            match &edge.label {
                EdgeLabel::Eval if port == 0 => out.push(Rule::S2),
                EdgeLabel::Eval if port == 1 && function_bubble(g, &inc, edge.ins[0]).is_some() => {
                    out.push(Rule::Beta)
                }
                EdgeLabel::Strictify if port == 1 => out.push(Rule::S2),
                EdgeLabel::Strictify if port == 0 => out.push(Rule::V),
                EdgeLabel::Gen(n) if n == "rec" && function_bubble(g, &inc, edge.ins[0]).is_some() => {
                    out.push(Rule::Rec)
                }
                EdgeLabel::Gen(n) if n == "let" && port == 0 => out.push(Rule::Let),
                EdgeLabel::Gen(n) if n == "ite" && port == 0 => {
                    if matches!(const_of(g, &inc, edge.ins[0]), Some(Const::Bool(_))) {
                        out.push(Rule::Ite);
                    }
                }
                EdgeLabel::Gen(n) if n != "rec" && port > 0 => {
                    out.push(if port == last { Rule::S2 } else { Rule::S3 })
                }
                EdgeLabel::Gen(n) if port == 0 => {
                    if let Some(op) = PrimOp::from_name(n) {
                        let cs: Option<Vec<Const>> = edge.ins.iter().map(|i| const_of(g, &inc, *i)).collect();
                        if cs.and_then(|cs| op.apply(&cs)).is_some() {
                            out.push(Rule::Delta);
                        }
                    }
                }
                _ => {}
            }
        }
    }
    out
}

/// Moves a left-pointing token off `retract-iota` outputs.
fn up(g: &Hypernet, inc: &Incidence, mut w: NodeId) -> NodeId {
    while let Some((e, _)) = inc.producer(w) {
        if g.edge(e).label != EdgeLabel::Iota {
            break;
        }
        w = g.edge(e).ins[0];
    }
    w
}

/// Moves a right-pointing token past `retract-iota` cells.
fn down(g: &Hypernet, inc: &Incidence, mut w: NodeId) -> NodeId {
    while let Some((e, _)) = inc.consumer(w) {
        if g.edge(e).label != EdgeLabel::Iota {
            break;
        }
        w = g.edge(e).outs[0];
    }
    w
}

/// The bubble behind a function wire, looking through retractions, with
/// the retraction cells met on the way.
pub(crate) fn function_bubble(g: &Hypernet, inc: &Incidence, mut w: NodeId) -> Option<(EdgeId, Vec<EdgeId>)> {
    let mut wrappers = Vec::new();
    loop {
        let (e, _) = inc.producer(w)?;
        match g.edge(e).label {
            EdgeLabel::Iota | EdgeLabel::Rho => {
                wrappers.push(e);
                w = g.edge(e).ins[0];
            }
            EdgeLabel::Bubble => return Some((e, wrappers)),
            _ => return None,
        }
    }
}

fn const_of(g: &Hypernet, inc: &Incidence, w: NodeId) -> Option<Const> {
    let (e, _) = inc.producer(w)?;
    let edge = g.edge(e);
    if !edge.ins.is_empty() {
        return None;
    }
    Const::from_label(edge.label.gen_name()?)
}

/// A `rec` cell stored in a pair is left unfolded until it is used.
fn delayed_rec(g: &Hypernet, inc: &Incidence, w: NodeId) -> bool {
    let rec = inc.producer(w).is_some_and(|(e, _)| is_rec(&g.edge(e).label));
    rec && inc.consumer(w).is_some_and(|(c, _)| g.edge(c).label == EdgeLabel::Strictify)
}

fn is_rec(label: &EdgeLabel) -> bool {
    label.gen_name() == Some("rec")
}

/// Can the producer of `w` be duplicated by a copy rule?
fn copyable(g: &Hypernet, inc: &Incidence, w: NodeId) -> bool {
    let Some((e, _)) = inc.producer(w) else { return false };
    let edge = g.edge(e);
    match &edge.label {
        EdgeLabel::Bubble | EdgeLabel::Strictify => true,
        EdgeLabel::Rho => matches!(inc.producer(edge.ins[0]), Some((b, _)) if g.edge(b).label == EdgeLabel::Bubble),
        EdgeLabel::Gen(_) => edge.ins.is_empty() || is_rec(&edge.label),
        _ => false,
    }
}

fn eval_tok(w: NodeId) -> Token {
    Token { wire: w, dir: Dir::Eval }
}

fn value_tok(w: NodeId) -> Token {
    Token { wire: w, dir: Dir::Value }
}

type Fired = Result<Option<(Rule, Token)>, String>;

fn fire(g: &mut Hypernet, tok: Token) -> Fired {
    let inc = g.incidence();
    match tok.dir {
        Dir::Eval => {
            let w = up(g, &inc, tok.wire);
            let Some((e, port)) = inc.producer(w) else {
                return Err(format!("wire {w} has no producer"));
            };
            let edge = g.edge(e).clone();
            match &edge.label {
                EdgeLabel::Bubble | EdgeLabel::Rho => Ok(Some((Rule::V, value_tok(w)))),
                EdgeLabel::Gen(_) if edge.ins.is_empty() => Ok(Some((Rule::V, value_tok(w)))),
                EdgeLabel::Gen(_) if delayed_rec(g, &inc, w) => Ok(Some((Rule::V, value_tok(w)))),
                EdgeLabel::Eval => Ok(Some((Rule::S1, eval_tok(edge.ins[0])))),
                EdgeLabel::Gen(_) | EdgeLabel::Strictify => {
                    Ok(Some((Rule::S1, eval_tok(*edge.ins.last().expect("operator has operands")))))
                }
                EdgeLabel::Copy(_) => {
                    if !copyable(g, &inc, edge.ins[0]) {
                        return Err("copy of a value that cannot be duplicated".into());
                    }
                    copy_rule(g, &inc, e, port);
                    Ok(Some((if port == 0 { Rule::C1 } else { Rule::C2 }, eval_tok(w))))
                }
                EdgeLabel::Destrictify => Err("pair pattern applied to a non-pair".into()),
                other => Err(format!("token against `{other}`")),
            }
        }
        Dir::Value => {
            if g.right()[0] == tok.wire {
                return Ok(None);
            }
            let w = down(g, &inc, tok.wire);
            let Some((e, port)) = inc.consumer(w) else {
                return Err(format!("wire {w} has no consumer"));
            };
            let edge = g.edge(e).clone();
            let last = edge.ins.len() - 1;
            let out = edge.outs.first().copied();
            match &edge.label {
                EdgeLabel::Eval if port == 0 => Ok(Some((Rule::S2, eval_tok(edge.ins[1])))),
                EdgeLabel::Eval => {
                    let Some((b, wrappers)) = function_bubble(g, &inc, edge.ins[0]) else {
                        return Err("application of a non-function".into());
                    };
                    g.remove_edge(e);
                    drop_wrappers(g, edge.ins[0], &wrappers);
                    splice(g, b, &[edge.ins[1]], edge.outs[0]);
                    Ok(Some((Rule::Beta, eval_tok(edge.outs[0]))))
                }
                EdgeLabel::Strictify if port == 1 => Ok(Some((Rule::S2, eval_tok(edge.ins[0])))),
                EdgeLabel::Strictify => Ok(Some((Rule::V, value_tok(edge.outs[0])))),
                EdgeLabel::Gen(n) if n == "rec" => {
                    let Some((b, wrappers)) = function_bubble(g, &inc, edge.ins[0]) else {
                        return Err("rec of a non-function".into());
                    };
                    g.remove_edge(e);
                    drop_wrappers(g, edge.ins[0], &wrappers);
                    rec_rule(g, b, edge.outs[0]);
                    Ok(Some((Rule::Rec, eval_tok(edge.outs[0]))))
                }
                EdgeLabel::Gen(_) if port > 0 => {
                    let rule = if port == last { Rule::S2 } else { Rule::S3 };
                    Ok(Some((rule, eval_tok(edge.ins[port - 1]))))
                }
                EdgeLabel::Gen(n) if n == "let" => {
                    let Some((b, _)) = inc.producer(edge.ins[1]).filter(|(b, _)| g.edge(*b).label == EdgeLabel::Bubble)
                    else {
                        return Err("let body is not an abstraction".into());
                    };
                    g.remove_edge(e);
                    splice(g, b, &[edge.ins[0]], edge.outs[0]);
                    Ok(Some((Rule::Let, eval_tok(edge.outs[0]))))
                }
                EdgeLabel::Gen(n) if n == "ite" => {
                    let Some(Const::Bool(c)) = const_of(g, &inc, edge.ins[0]) else {
                        return Err("condition is not a boolean".into());
                    };
                    let (keep, discard) = if c { (edge.ins[1], edge.ins[2]) } else { (edge.ins[2], edge.ins[1]) };
                    let Some((b, _)) = inc.producer(keep).filter(|(b, _)| g.edge(*b).label == EdgeLabel::Bubble)
                    else {
                        return Err("branch is not a thunk".into());
                    };
                    g.remove_edge(e);
                    g.add_edge(EdgeLabel::Delete, vec![edge.ins[0]], vec![], None);
                    g.add_edge(EdgeLabel::Delete, vec![discard], vec![], None);
                    splice(g, b, &[], edge.outs[0]);
                    Ok(Some((Rule::Ite, eval_tok(edge.outs[0]))))
                }
                EdgeLabel::Gen(n) => {
                    let Some(op) = PrimOp::from_name(n) else {
                        return Err(format!("no rule for `{n}`"));
                    };
                    let Some(cs) = edge.ins.iter().map(|i| const_of(g, &inc, *i)).collect::<Option<Vec<_>>>() else {
                        return Err(format!("`{n}` applied to a non-constant"));
                    };
                    let Some(r) = op.apply(&cs) else {
                        return Err(format!("`{n}` undefined on its operands"));
                    };
                    let o = out.expect("operator output");
                    g.remove_edge(e);
                    for i in &edge.ins {
                        g.add_edge(EdgeLabel::Delete, vec![*i], vec![], None);
                    }
                    g.add_edge(EdgeLabel::Gen(r.label()), vec![], vec![o], None);
                    Ok(Some((Rule::Delta, eval_tok(o))))
                }
                other => Err(format!("token against `{other}`")),
            }
        }
    }
}

/// Removes the retraction cells between a function wire and its bubble.
pub(crate) fn drop_wrappers(g: &mut Hypernet, mut w: NodeId, wrappers: &[EdgeId]) {
    for x in wrappers {
        let e = g.remove_edge(*x).expect("wrapper");
        g.remove_node(w);
        w = e.ins[0];
    }
}

/// Dissolves bubble `b`: captured inner wires join the outer ones, the
/// bound wires join `args`, the body's result joins `out`. The bubble's
/// own output must already be unused.
pub(crate) fn splice(g: &mut Hypernet, b: EdgeId, args: &[NodeId], out: NodeId) {
    g.lift_children(b);
    let be = g.remove_edge(b).expect("bubble");
    g.remove_node(be.outs[0]);
    let n_cap = be.ins.len();
    let mut merges: Vec<(NodeId, NodeId)> = be.ins.iter().copied().zip(be.inner_in.iter().copied()).collect();
    merges.extend(args.iter().copied().zip(be.inner_in[n_cap..].iter().copied()));
    let mut r = be.inner_out[0];
    for (keep, drop) in merges {
        g.merge_nodes(keep, drop);
        if r == drop {
            r = keep;
        }
    }
    // `out` keeps its consumer and interface position; it takes over
    // the result's producer.
    let ty = g.ty(out).clone();
    g.merge_nodes(out, r);
    g.node_mut(out).ty = ty;
}

/// Expands `rec` over bubble `b` into the body of `b` with the recursive
/// variable bound to a fresh `rec` cell over a copy of `b`.
fn rec_rule(g: &mut Hypernet, b: EdgeId, out: NodeId) {
    let b2 = g.clone_edge_deep(b);
    share_inputs(g, b2);
    let f = g.add_node(ObjectType::u(), None);
    let b2_out = g.edge(b2).outs[0];
    g.add_edge(EdgeLabel::gen("rec"), vec![b2_out], vec![f], None);
    splice(g, b, &[f], out);
}

/// Gives each input of the freshly cloned edge `e` its own branch of a
/// new binary copy, shared with the input's original consumer.
fn share_inputs(g: &mut Hypernet, e: EdgeId) {
    let ins = g.edge(e).ins.clone();
    for (j, c) in ins.into_iter().enumerate() {
        let other = g
            .edges()
            .find(|(id, ed)| *id != e && ed.ins.contains(&c))
            .map(|(id, _)| id);
        let Some(other) = other else { continue };
        let (ty, parent) = (g.ty(c).clone(), g.node(c).parent);
        let n1 = g.add_node(ty.clone(), parent);
        let n2 = g.add_node(ty, parent);
        for i in g.edge_mut(other).ins.iter_mut() {
            if *i == c {
                *i = n1;
            }
        }
        g.edge_mut(e).ins[j] = n2;
        g.add_edge(EdgeLabel::Copy(2), vec![c], vec![n1, n2], parent);
    }
}

/// Duplicates the value behind copy `k` onto its output `port`.
fn copy_rule(g: &mut Hypernet, inc: &Incidence, k: EdgeId, port: usize) {
    let src = g.edge(k).ins[0];
    let w = g.edge(k).outs[port];
    let fresh = clone_value(g, inc, src);
    let ke = g.edge_mut(k);
    ke.outs.remove(port);
    ke.label = EdgeLabel::Copy(ke.outs.len());
    g.merge_nodes(w, fresh);
}

/// Clones the producer of `w` (a bubble under `retract-rho` is cloned with
/// it) and returns the clone's output.
fn clone_value(g: &mut Hypernet, inc: &Incidence, w: NodeId) -> NodeId {
    let (e, _) = inc.producer(w).expect("copyable value");
    if g.edge(e).label == EdgeLabel::Rho {
        let inner = g.edge(e).ins[0];
        let (b, _) = inc.producer(inner).expect("bubble under rho");
        let b2 = g.clone_edge_deep(b);
        share_inputs(g, b2);
        let b2_out = g.edge(b2).outs[0];
        let o = g.add_node(g.ty(w).clone(), None);
        g.add_edge(EdgeLabel::Rho, vec![b2_out], vec![o], None);
        o
    } else {
        let e2 = g.clone_edge_deep(e);
        share_inputs(g, e2);
        g.edge(e2).outs[0]
    }
}

fn is_value_cell(e: &crate::graph::Edge) -> bool {
    match &e.label {
        EdgeLabel::Bubble | EdgeLabel::Rho | EdgeLabel::Iota | EdgeLabel::Strictify => true,
        EdgeLabel::Gen(_) => e.ins.is_empty() || is_rec(&e.label),
        _ => false,
    }
}

/// Removes one deleted top-level value. Returns whether anything changed.
fn collect_garbage(g: &mut Hypernet, token: NodeId) -> bool {
    let inc = g.incidence();
    let dels: Vec<EdgeId> =
        g.edges().filter(|(_, e)| e.label == EdgeLabel::Delete && e.parent.is_none()).map(|(id, _)| id).collect();
    for d in dels {
        let n = g.edge(d).ins[0];
        if n == token {
            continue;
        }
        let Some((p, _)) = inc.producer(n) else { continue };
        let pe = g.edge(p).clone();
        if !is_value_cell(&pe) || pe.outs.len() != 1 {
            continue;
        }
        g.remove_edge(d);
        g.remove_edge_deep(p);
        g.remove_node(n);
        for i in pe.ins {
            g.add_edge(EdgeLabel::Delete, vec![i], vec![], None);
        }
        return true;
    }
    false
}

/// Gives every top-level destrictifier fed by a shared pair its own copy of
/// the pair. Fails on a destrictifier fed by some other value.
fn unshare_pairs(g: &mut Hypernet) -> Result<bool, String> {
    let inc = g.incidence();
    let ds: Vec<EdgeId> = g
        .edges()
        .filter(|(_, e)| e.label == EdgeLabel::Destrictify && e.parent.is_none())
        .map(|(id, _)| id)
        .collect();
    for d in ds {
        let input = g.edge(d).ins[0];
        let Some((p, port)) = inc.producer(input) else { continue };
        let pe = g.edge(p).clone();
        let src_label = match &pe.label {
            EdgeLabel::Copy(_) => inc.producer(pe.ins[0]).map(|(s, _)| g.edge(s)),
            _ => Some(&pe),
        };
        let Some(src) = src_label else { continue };
        let non_pair = matches!(src.label, EdgeLabel::Bubble | EdgeLabel::Rho)
            || (src.ins.is_empty() && matches!(src.label, EdgeLabel::Gen(_)));
        if non_pair {
            return Err("pair pattern applied to a non-pair".into());
        }
        if matches!(pe.label, EdgeLabel::Copy(_)) && src.label == EdgeLabel::Strictify {
            copy_rule(g, &inc, p, port);
            return Ok(true);
        }
    }
    Ok(false)
}

/// Tidies the graph after a rule; returns where the token wire went.
fn normalize(g: &mut Hypernet, mut token: NodeId) -> Result<NodeId, String> {
    loop {
        let mut tr = Tracker::default();
        let a = simplify_in_place(g, &[token], &mut tr);
        token = tr.resolve(token);
        let b = collect_garbage(g, token);
        let c = unshare_pairs(g)?;
        if a == 0 && !b && !c {
            return Ok(token);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse;
    use crate::translate::translate_untyped;

    fn graph(s: &str) -> Hypernet {
        translate_untyped(&parse(s).unwrap())
    }

    fn audit(r: &Run) {
        for s in &r.states {
            assert_eq!(validate_hypernet(&s.graph), vec![], "state {}", s.steps);
            assert!(s.graph.contains_node(s.token.wire));
            assert_eq!(s.graph.node(s.token.wire).parent, None);
        }
        let last = r.states.len() - 1;
        for s in &r.states[..last] {
            assert_eq!(applicable_rules(s).len(), 1, "state {}: {:?}", s.steps, applicable_rules(s));
        }
    }

    fn cfg(budget: usize) -> RunConfig {
        RunConfig { budget, detect_cycles: false, record_states: true }
    }

    #[test]
    fn identity_application_rule_order() {
        let r = run_with(&graph("(\\x.x)(\\y.y)"), cfg(20)).unwrap();
        assert!(r.outcome.value().is_some());
        use Rule::*;
        assert_eq!(r.rules(), vec![S1, V, S2, V, Beta, V]);
        audit(&r);
    }

    #[test]
    fn omega_cycles() {
        let r = run(&graph("(\\x. x x)(\\y. y y)"), 100, true).unwrap();
        match r.outcome {
            Outcome::Diverged(Divergence::Cycle { step, earlier }) => assert!(earlier < step && step <= 100),
            other => panic!("{other:?}"),
        }
        let r = run(&graph("(\\x. x x)(\\y. y y)"), 500, false).unwrap();
        assert_eq!(r.outcome, Outcome::Diverged(Divergence::Budget));
    }

    fn value_of(s: &str, budget: usize) -> String {
        let r = run_with(&graph(s), cfg(budget)).unwrap();
        audit(&r);
        let st = r.outcome.value().unwrap_or_else(|| panic!("{s}: {:?}", r.outcome));
        let root = st.graph.right()[0];
        let inc = st.graph.incidence();
        let (e, _) = inc.producer(root).unwrap();
        assert_eq!(st.graph.edge_count(), 1, "{s}: {}", crate::text::print_hypernet(&st.graph));
        st.graph.edge(e).label.to_string()
    }

    #[test]
    fn arithmetic_and_control() {
        assert_eq!(value_of("1+(2+3)", 100), "6");
        assert_eq!(value_of("if 1 <= 2 then 10 else 20", 100), "10");
        assert_eq!(value_of("let x = 3 + 4 in x * x", 100), "49");
        assert_eq!(value_of("(\\(a, b). a - b) (5, 3)", 100), "2");
        assert_eq!(value_of("let p = (1, 2) in (\\(a, b). a + b) p + (\\(a, b). a * b) p", 200), "5");
    }

    #[test]
    fn recursion() {
        let t = "let rec fact n = if n <= 0 then 1 else n * fact (n - 1) in fact 5";
        assert_eq!(value_of(t, 2_000), "120");
    }

    #[test]
    fn stuck_and_rejected() {
        let r = run(&graph("1 2"), 100, false).unwrap();
        assert!(matches!(r.outcome, Outcome::Stuck(..)));
        let r = run(&graph("(\\(a, b). 1) 3"), 100, false).unwrap();
        assert!(matches!(r.outcome, Outcome::Stuck(..)));
        assert_eq!(init(&graph("\\y. x")).unwrap_err(), MachineError::Open(1));
        let mut two = graph("1");
        let r = two.right()[0];
        two.set_right(vec![r, r]);
        assert!(init(&two).is_err());
    }

    #[test]
    fn values_finish_in_one_step() {
        let r = run(&graph("\\x. x"), 10, false).unwrap();
        assert_eq!(r.rules(), vec![Rule::V]);
    }

    #[test]
    fn divergent_argument_diverges() {
        let r = run(&graph("(\\x. 7) ((\\x. x x)(\\y. y y))"), 10_000, false).unwrap();
        assert_eq!(r.outcome, Outcome::Diverged(Divergence::Budget));
    }
}
