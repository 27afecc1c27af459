//! Local clean-up rules, applied to a fixpoint:
//!
//! * a copy output that is immediately deleted is dropped from the copy;
//!   `copy-1` is a wire and `copy-0` a delete;
//! * a copy feeding a copy is flattened into one n-ary copy;
//! * strictify followed by destrictify cancels;
//! * destrictify followed by strictify cancels on product-typed wires;
//! * `retract-rho` followed by `retract-iota` cancels.

use std::collections::HashSet;

use crate::graph::{EdgeId, EdgeLabel, Hypernet, Incidence, NodeId};
use crate::types::ObjectType;

/// Records node merges so that callers can follow a wire through simplification.
#[derive(Debug, Default, Clone)]
pub struct Tracker {
    merged: Vec<(NodeId, NodeId)>,
}

impl Tracker {
    pub fn record(&mut self, drop: NodeId, keep: NodeId) {
        self.merged.push((drop, keep));
    }

    /// Where node `n` ended up.
    pub fn resolve(&self, mut n: NodeId) -> NodeId {
        for (d, k) in &self.merged {
            if *d == n {
                n = *k;
            }
        }
        n
    }
}

pub fn simplify(g: &Hypernet) -> Hypernet {
    let mut h = g.clone();
    simplify_in_place(&mut h, &[], &mut Tracker::default());
    h
}

/// Simplifies `g` in place. Rules that would remove one of the `protect`
/// nodes are skipped.
pub fn simplify_in_place(g: &mut Hypernet, protect: &[NodeId], tr: &mut Tracker) -> usize {
    let mut count = 0;
    while step(g, protect, tr) {
        count += 1;
    }
    count
}

fn merge(g: &mut Hypernet, keep: NodeId, drop: NodeId, tr: &mut Tracker) {
    g.merge_nodes(keep, drop);
    tr.record(drop, keep);
}

fn step(g: &mut Hypernet, protect: &[NodeId], tr: &mut Tracker) -> bool {
    let inc = g.incidence();
    let fixed = boundary_nodes(g);
    let ids: Vec<EdgeId> = g.edges().map(|(id, _)| id).collect();
    for id in ids {
        if try_edge(g, &inc, &fixed, id, protect, tr) {
            return true;
        }
    }
    false
}

fn boundary_nodes(g: &Hypernet) -> HashSet<NodeId> {
    let mut s: HashSet<NodeId> = g.left().iter().chain(g.right()).copied().collect();
    for (_, e) in g.edges() {
        s.extend(e.inner_in.iter().chain(&e.inner_out).copied());
    }
    s
}

fn sole_consumer(inc: &Incidence, n: NodeId) -> Option<(EdgeId, usize)> {
    match inc.consumers.get(&n) {
        Some(v) if v.len() == 1 => Some(v[0]),
        _ => None,
    }
}

fn try_edge(
    g: &mut Hypernet,
    inc: &Incidence,
    fixed: &HashSet<NodeId>,
    id: EdgeId,
    protect: &[NodeId],
    tr: &mut Tracker,
) -> bool {
    let e = g.edge(id).clone();
    match e.label {
        EdgeLabel::Copy(0) => {
            g.edge_mut(id).label = EdgeLabel::Delete;
            true
        }
        EdgeLabel::Copy(1) => {
            g.remove_edge(id);
            merge(g, e.ins[0], e.outs[0], tr);
            true
        }
        EdgeLabel::Copy(n) => {
            for (i, o) in e.outs.iter().enumerate() {
                let Some((c, _)) = sole_consumer(inc, *o) else { continue };
                let ce = g.edge(c).clone();
                match ce.label {
                    EdgeLabel::Delete if !protect.contains(o) => {
                        g.remove_edge(c);
                        g.remove_node(*o);
                        let ed = g.edge_mut(id);
                        ed.outs.remove(i);
                        ed.label = EdgeLabel::Copy(n - 1);
                        return true;
                    }
                    EdgeLabel::Copy(m) if !protect.contains(o) => {
                        g.remove_edge(c);
                        g.remove_node(*o);
                        let ed = g.edge_mut(id);
                        ed.outs.splice(i..=i, ce.outs.iter().copied());
                        ed.label = EdgeLabel::Copy(n + m - 1);
                        return true;
                    }
                    _ => {}
                }
            }
            false
        }
        EdgeLabel::Strictify => {
            let p = e.outs[0];
            if protect.contains(&p) || fixed.contains(&p) {
                return false;
            }
            let Some((d, _)) = sole_consumer(inc, p) else { return false };
            let de = g.edge(d).clone();
            if de.label != EdgeLabel::Destrictify {
                return false;
            }
            g.remove_edge(id);
            g.remove_edge(d);
            g.remove_node(p);
            merge(g, e.ins[0], de.outs[0], tr);
            merge(g, e.ins[1], de.outs[1], tr);
            true
        }
        EdgeLabel::Destrictify => {
            let p = e.ins[0];
            if !matches!(g.ty(p), ObjectType::Tensor(..)) {
                return false;
            }
            let (a, b) = (e.outs[0], e.outs[1]);
            if protect.contains(&a) || protect.contains(&b) || fixed.contains(&a) || fixed.contains(&b) {
                return false;
            }
            let (Some((s1, 0)), Some((s2, 1))) = (sole_consumer(inc, a), sole_consumer(inc, b)) else { return false };
            if s1 != s2 || g.edge(s1).label != EdgeLabel::Strictify {
                return false;
            }
            let q = g.edge(s1).outs[0];
            g.remove_edge(id);
            g.remove_edge(s1);
            g.remove_node(a);
            g.remove_node(b);
            merge(g, p, q, tr);
            true
        }
        EdgeLabel::Rho => {
            let mid = e.outs[0];
            if protect.contains(&mid) || fixed.contains(&mid) {
                return false;
            }
            let Some((i, _)) = sole_consumer(inc, mid) else { return false };
            let ie = g.edge(i).clone();
            if ie.label != EdgeLabel::Iota {
                return false;
            }
            g.remove_edge(id);
            g.remove_edge(i);
            g.remove_node(mid);
            merge(g, e.ins[0], ie.outs[0], tr);
            true
        }
        _ => false,
    }
}

/// True when `n` lies on the outer interface or some bubble's inner interface.
pub fn is_boundary(g: &Hypernet, n: NodeId) -> bool {
    g.left().contains(&n)
        || g.right().contains(&n)
        || g.edges().any(|(_, e)| e.inner_in.contains(&n) || e.inner_out.contains(&n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iso::iso_check;

    #[test]
    fn copy_then_delete_is_a_wire() {
        let mut g = Hypernet::new();
        let a = ObjectType::base("A");
        let x = g.add_node(a.clone(), None);
        let y = g.add_node(a.clone(), None);
        let z = g.add_node(a.clone(), None);
        g.add_edge(EdgeLabel::Copy(2), vec![x], vec![y, z], None);
        g.add_edge(EdgeLabel::Delete, vec![z], vec![], None);
        g.set_left(vec![x]);
        g.set_right(vec![y]);
        let s = simplify(&g);
        assert_eq!(s.edge_count(), 0);
        assert_eq!(s.node_count(), 1);
        assert!(iso_check(&simplify(&s), &s).is_some());
    }

    #[test]
    fn destrictify_strictify_cancels_on_products() {
        let mut g = Hypernet::new();
        let a = ObjectType::base("A");
        let p = g.add_node(ObjectType::tensor(a.clone(), a.clone()), None);
        let x = g.add_node(a.clone(), None);
        let y = g.add_node(a.clone(), None);
        let q = g.add_node(ObjectType::tensor(a.clone(), a.clone()), None);
        g.add_edge(EdgeLabel::Destrictify, vec![p], vec![x, y], None);
        g.add_edge(EdgeLabel::Strictify, vec![x, y], vec![q], None);
        g.set_left(vec![p]);
        g.set_right(vec![q]);
        let s = simplify(&g);
        assert_eq!(s.edge_count(), 0);
    }
}
