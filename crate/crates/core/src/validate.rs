//! Well-formedness checks: monogamy per layer, parent structure, typing.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::graph::{EdgeId, EdgeLabel, Hypernet, NodeId};
use crate::types::ObjectType;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    DuplicateOnInterface,
    InterfaceNodeLinked,
    NoProducer,
    NoConsumer,
    LinkedTwice,
    MissingReference,
    ParentCycle,
    EndpointParentDisagreement,
    LabelledParent,
    InnerInterfaceParent,
    IllTypedAbstraction,
    IllTypedEdge,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::DuplicateOnInterface => "duplicate on interface",
            ViolationKind::InterfaceNodeLinked => "interface node linked",
            ViolationKind::NoProducer => "node with no producer",
            ViolationKind::NoConsumer => "node with no consumer",
            ViolationKind::LinkedTwice => "node linked twice",
            ViolationKind::MissingReference => "missing reference",
            ViolationKind::ParentCycle => "parent cycle",
            ViolationKind::EndpointParentDisagreement => "endpoint-parent disagreement",
            ViolationKind::LabelledParent => "labelled edge used as parent",
            ViolationKind::InnerInterfaceParent => "inner interface parent",
            ViolationKind::IllTypedAbstraction => "ill-typed abstraction",
            ViolationKind::IllTypedEdge => "ill-typed edge",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub node: Option<NodeId>,
    pub edge: Option<EdgeId>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(n) = self.node {
            write!(f, " at node {n}")?;
        }
        if let Some(e) = self.edge {
            write!(f, " at edge {e}")?;
        }
        Ok(())
    }
}

fn at_node(kind: ViolationKind, n: NodeId) -> Violation {
    Violation { kind, node: Some(n), edge: None }
}

fn at_edge(kind: ViolationKind, e: EdgeId) -> Violation {
    Violation { kind, node: None, edge: Some(e) }
}

/// Checks the monogamy condition on every layer, using a bubble's inner
/// interfaces as the boundary of its layer. An empty list means ok.
pub fn check_monogamous(g: &Hypernet) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut prod: BTreeMap<NodeId, usize> = BTreeMap::new();
    let mut cons: BTreeMap<NodeId, usize> = BTreeMap::new();
    for (_, e) in g.edges() {
        for n in &e.outs {
            *prod.entry(*n).or_default() += 1;
        }
        for n in &e.ins {
            *cons.entry(*n).or_default() += 1;
        }
    }
    let mut layers = vec![None];
    layers.extend(g.edges().filter(|(_, e)| e.label == EdgeLabel::Bubble).map(|(id, _)| Some(id)));
    let mut seen_boundary: HashSet<NodeId> = HashSet::new();
    for layer in layers {
        let (inb, outb) = g.boundary(layer);
        let mut in_count: BTreeMap<NodeId, usize> = BTreeMap::new();
        let mut out_count: BTreeMap<NodeId, usize> = BTreeMap::new();
        for n in &inb {
            *in_count.entry(*n).or_default() += 1;
        }
        for n in &outb {
            *out_count.entry(*n).or_default() += 1;
        }
        for (n, c) in in_count.iter().chain(out_count.iter()) {
            if *c > 1 {
                out.push(at_node(ViolationKind::DuplicateOnInterface, *n));
            }
        }
        for n in inb.iter().chain(outb.iter()) {
            seen_boundary.insert(*n);
        }
        for n in g.layer_nodes(layer) {
            let on_in = in_count.contains_key(&n);
            let on_out = out_count.contains_key(&n);
            let p = prod.get(&n).copied().unwrap_or(0);
            let c = cons.get(&n).copied().unwrap_or(0);
            let want_p = usize::from(!on_in);
            let want_c = usize::from(!on_out);
            if p > want_p {
                out.push(at_node(if on_in { ViolationKind::InterfaceNodeLinked } else { ViolationKind::LinkedTwice }, n));
            } else if p < want_p {
                out.push(at_node(ViolationKind::NoProducer, n));
            }
            if c > want_c {
                out.push(at_node(if on_out { ViolationKind::InterfaceNodeLinked } else { ViolationKind::LinkedTwice }, n));
            } else if c < want_c {
                out.push(at_node(ViolationKind::NoConsumer, n));
            }
        }
    }
    out.sort_by_key(|v| (v.node, v.edge, v.kind));
    out.dedup();
    out
}

/// Full validation: monogamy, parent invariants and edge typing.
pub fn validate_hypernet(g: &Hypernet) -> Vec<Violation> {
    let mut out = Vec::new();
    // References.
    for (id, e) in g.edges() {
        for n in e.ins.iter().chain(&e.outs).chain(&e.inner_in).chain(&e.inner_out) {
            if !g.contains_node(*n) {
                out.push(Violation { kind: ViolationKind::MissingReference, node: Some(*n), edge: Some(id) });
            }
        }
        if let Some(p) = e.parent {
            if !g.contains_edge(p) {
                out.push(at_edge(ViolationKind::MissingReference, id));
            }
        }
    }
    for n in g.left().iter().chain(g.right()) {
        if !g.contains_node(*n) {
            out.push(at_node(ViolationKind::MissingReference, *n));
        }
    }
    for (id, n) in g.nodes() {
        if let Some(p) = n.parent {
            if !g.contains_edge(p) {
                out.push(at_node(ViolationKind::MissingReference, id));
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    // Parent structure.
    let limit = g.edge_count() + 1;
    for (id, e) in g.edges() {
        let mut cur = e.parent;
        let mut steps = 0;
        while let Some(p) = cur {
            steps += 1;
            if steps > limit || p == id {
                out.push(at_edge(ViolationKind::ParentCycle, id));
                break;
            }
            cur = g.edge(p).parent;
        }
        if let Some(p) = e.parent {
            if g.edge(p).label != EdgeLabel::Bubble {
                out.push(at_edge(ViolationKind::LabelledParent, id));
            }
        }
        for n in e.ins.iter().chain(&e.outs) {
            if g.node(*n).parent != e.parent {
                out.push(Violation { kind: ViolationKind::EndpointParentDisagreement, node: Some(*n), edge: Some(id) });
            }
        }
        if e.label != EdgeLabel::Bubble && (!e.inner_in.is_empty() || !e.inner_out.is_empty()) {
            out.push(at_edge(ViolationKind::IllTypedEdge, id));
        }
        for n in e.inner_in.iter().chain(&e.inner_out) {
            if g.node(*n).parent != Some(id) {
                out.push(Violation { kind: ViolationKind::InnerInterfaceParent, node: Some(*n), edge: Some(id) });
            }
        }
    }
    for (id, n) in g.nodes() {
        if let Some(p) = n.parent {
            if g.edge(p).label != EdgeLabel::Bubble {
                out.push(at_node(ViolationKind::LabelledParent, id));
            }
        }
    }
    for n in g.left().iter().chain(g.right()) {
        if g.node(*n).parent.is_some() {
            out.push(at_node(ViolationKind::InnerInterfaceParent, *n));
        }
    }
    if out.iter().any(|v| v.kind == ViolationKind::ParentCycle) {
        return out;
    }
    out.extend(check_monogamous(g));
    for (id, _) in g.edges() {
        if let Some(kind) = edge_typing(g, id) {
            out.push(at_edge(kind, id));
        }
    }
    out
}

pub fn is_valid(g: &Hypernet) -> bool {
    validate_hypernet(g).is_empty()
}

/// The output type of a bubble with the given inner interfaces and
/// number of captured wires.
pub fn abstraction_type(g: &Hypernet, captured: usize, inner_in: &[NodeId], inner_out: &[NodeId]) -> Option<ObjectType> {
    if inner_in.len() < captured {
        return None;
    }
    let bound: Vec<_> = inner_in[captured..].iter().map(|n| g.ty(*n).clone()).collect();
    let res: Vec<_> = inner_out.iter().map(|n| g.ty(*n).clone()).collect();
    Some(ObjectType::arrow(ObjectType::fold(&bound), ObjectType::fold(&res)))
}

fn edge_typing(g: &Hypernet, id: EdgeId) -> Option<ViolationKind> {
    let e = g.edge(id);
    let ti: Vec<&ObjectType> = e.ins.iter().map(|n| g.ty(*n)).collect();
    let to: Vec<&ObjectType> = e.outs.iter().map(|n| g.ty(*n)).collect();
    let ok = match &e.label {
        EdgeLabel::Gen(_) => true,
        EdgeLabel::Copy(n) => ti.len() == 1 && to.len() == *n && to.iter().all(|t| *t == ti[0]),
        EdgeLabel::Delete => ti.len() == 1 && to.is_empty(),
        EdgeLabel::Strictify => {
            ti.len() == 2
                && to.len() == 1
                && (*to[0] == ObjectType::tensor(ti[0].clone(), ti[1].clone())
                    || (ti.iter().all(|t| **t == ObjectType::u()) && *to[0] == ObjectType::u()))
        }
        EdgeLabel::Destrictify => {
            ti.len() == 1
                && to.len() == 2
                && (*ti[0] == ObjectType::tensor(to[0].clone(), to[1].clone())
                    || (to.iter().all(|t| **t == ObjectType::u()) && *ti[0] == ObjectType::u()))
        }
        EdgeLabel::Iota => ti.len() == 1 && to.len() == 1 && *to[0] == ObjectType::arrow(ti[0].clone(), ti[0].clone()),
        EdgeLabel::Rho => ti.len() == 1 && to.len() == 1 && *ti[0] == ObjectType::arrow(to[0].clone(), to[0].clone()),
        EdgeLabel::Eval => {
            if ti.is_empty() {
                false
            } else {
                let args: Vec<_> = ti[1..].iter().map(|t| (*t).clone()).collect();
                let res: Vec<_> = to.iter().map(|t| (*t).clone()).collect();
                *ti[0] == ObjectType::arrow(ObjectType::fold(&args), ObjectType::fold(&res))
            }
        }
        EdgeLabel::Bubble => {
            let captured_ok = e.inner_in.len() >= e.ins.len()
                && e.ins.iter().zip(&e.inner_in).all(|(a, b)| g.ty(*a) == g.ty(*b));
            let out_ok = e.outs.len() == 1
                && abstraction_type(g, e.ins.len(), &e.inner_in, &e.inner_out).as_ref() == Some(g.ty(e.outs[0]));
            if !(captured_ok && out_ok) {
                return Some(ViolationKind::IllTypedAbstraction);
            }
            true
        }
    };
    if ok {
        None
    } else {
        Some(ViolationKind::IllTypedEdge)
    }
}
