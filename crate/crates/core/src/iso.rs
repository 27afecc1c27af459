//! Interface-preserving isomorphism of hypernets.
//!
//! Matching is seeded from the interfaces and propagated along
//! producer/consumer links; whatever stays unreached (disconnected
//! components) is resolved by backtracking over edges partitioned by
//! label, arity and depth.

use std::collections::{BTreeMap, HashMap};

use crate::graph::{EdgeId, EdgeLabel, Hypernet, NodeId};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IsoWitness {
    pub nodes: BTreeMap<NodeId, NodeId>,
    pub edges: BTreeMap<EdgeId, EdgeId>,
}

impl IsoWitness {
    pub fn inverse(&self) -> IsoWitness {
        IsoWitness {
            nodes: self.nodes.iter().map(|(a, b)| (*b, *a)).collect(),
            edges: self.edges.iter().map(|(a, b)| (*b, *a)).collect(),
        }
    }

    /// `self` then `other`.
    pub fn then(&self, other: &IsoWitness) -> IsoWitness {
        IsoWitness {
            nodes: self.nodes.iter().map(|(a, b)| (*a, other.nodes[b])).collect(),
            edges: self.edges.iter().map(|(a, b)| (*a, other.edges[b])).collect(),
        }
    }

    /// Checks that the witness really is an isomorphism from `g` to `h`.
    pub fn verify(&self, g: &Hypernet, h: &Hypernet) -> bool {
        self.verify_with(g, h, false)
    }

    fn verify_with(&self, g: &Hypernet, h: &Hypernet, copies_commute: bool) -> bool {
        if self.nodes.len() != g.node_count()
            || self.edges.len() != g.edge_count()
            || g.node_count() != h.node_count()
            || g.edge_count() != h.edge_count()
        {
            return false;
        }
        let mn = |v: &[NodeId]| v.iter().map(|n| self.nodes.get(n).copied()).collect::<Option<Vec<_>>>();
        let mp = |p: Option<EdgeId>| p.map(|p| self.edges.get(&p).copied());
        if mn(g.left()).as_deref() != Some(h.left()) || mn(g.right()).as_deref() != Some(h.right()) {
            return false;
        }
        for (a, n) in g.nodes() {
            let Some(b) = self.nodes.get(&a) else { return false };
            let Some(m) = h.try_node(*b) else { return false };
            if n.ty != m.ty || mp(n.parent) != m.parent.map(Some) {
                return false;
            }
        }
        for (a, e) in g.edges() {
            let Some(b) = self.edges.get(&a) else { return false };
            let Some(f) = h.try_edge(*b) else { return false };
            if e.label != f.label
                || mp(e.parent) != f.parent.map(Some)
                || mn(&e.ins).as_deref() != Some(&f.ins[..])
                || !outs_match(mn(&e.outs), &f.outs, copies_commute && matches!(e.label, EdgeLabel::Copy(_)))
                || mn(&e.inner_in).as_deref() != Some(&f.inner_in[..])
                || mn(&e.inner_out).as_deref() != Some(&f.inner_out[..])
            {
                return false;
            }
        }
        distinct(&self.nodes) && distinct(&self.edges)
    }
}

fn outs_match(mapped: Option<Vec<NodeId>>, target: &[NodeId], unordered: bool) -> bool {
    let Some(mut m) = mapped else { return false };
    if !unordered {
        return m == target;
    }
    let mut t = target.to_vec();
    m.sort();
    t.sort();
    m == t
}

fn distinct<K, V: Ord>(m: &BTreeMap<K, V>) -> bool {
    let mut vs: Vec<_> = m.values().collect();
    vs.sort();
    vs.dedup();
    vs.len() == m.len()
}

struct Ctx<'a> {
    g: &'a Hypernet,
    h: &'a Hypernet,
    gp: HashMap<NodeId, Vec<(EdgeId, usize)>>,
    gc: HashMap<NodeId, Vec<(EdgeId, usize)>>,
    hp: HashMap<NodeId, Vec<(EdgeId, usize)>>,
    hc: HashMap<NodeId, Vec<(EdgeId, usize)>>,
    copies_commute: bool,
}

#[derive(Clone, Default)]
struct State {
    n: HashMap<NodeId, NodeId>,
    nr: HashMap<NodeId, NodeId>,
    e: HashMap<EdgeId, EdgeId>,
    er: HashMap<EdgeId, EdgeId>,
}

enum Pair {
    N(NodeId, NodeId),
    E(EdgeId, EdgeId),
}

impl Ctx<'_> {
    fn propagate(&self, st: &mut State, mut work: Vec<Pair>) -> bool {
        while let Some(p) = work.pop() {
            match p {
                Pair::N(a, b) => {
                    match (st.n.get(&a), st.nr.get(&b)) {
                        (Some(x), _) if *x != b => return false,
                        (_, Some(y)) if *y != a => return false,
                        (Some(_), _) => continue,
                        _ => {}
                    }
                    let (Some(na), Some(nb)) = (self.g.try_node(a), self.h.try_node(b)) else { return false };
                    if na.ty != nb.ty {
                        return false;
                    }
                    match (na.parent, nb.parent) {
                        (None, None) => {}
                        (Some(x), Some(y)) => work.push(Pair::E(x, y)),
                        _ => return false,
                    }
                    st.n.insert(a, b);
                    st.nr.insert(b, a);
                    for (k, (gm, hm)) in [(&self.gp, &self.hp), (&self.gc, &self.hc)].into_iter().enumerate() {
                        let l = gm.get(&a).map(|v| &v[..]).unwrap_or(&[]);
                        let r = hm.get(&b).map(|v| &v[..]).unwrap_or(&[]);
                        if l.len() != r.len() {
                            return false;
                        }
                        if l.len() == 1 {
                            // Which output of a copy a node hangs off is irrelevant
                            // when copies commute.
                            let free_port = k == 0
                                && self.copies_commute
                                && matches!(self.g.try_edge(l[0].0).map(|e| &e.label), Some(EdgeLabel::Copy(_)));
                            if l[0].1 != r[0].1 && !free_port {
                                return false;
                            }
                            work.push(Pair::E(l[0].0, r[0].0));
                        }
                    }
                }
                Pair::E(a, b) => {
                    match (st.e.get(&a), st.er.get(&b)) {
                        (Some(x), _) if *x != b => return false,
                        (_, Some(y)) if *y != a => return false,
                        (Some(_), _) => continue,
                        _ => {}
                    }
                    let (Some(ea), Some(eb)) = (self.g.try_edge(a), self.h.try_edge(b)) else { return false };
                    if ea.label != eb.label
                        || ea.ins.len() != eb.ins.len()
                        || ea.outs.len() != eb.outs.len()
                        || ea.inner_in.len() != eb.inner_in.len()
                        || ea.inner_out.len() != eb.inner_out.len()
                    {
                        return false;
                    }
                    match (ea.parent, eb.parent) {
                        (None, None) => {}
                        (Some(x), Some(y)) => work.push(Pair::E(x, y)),
                        _ => return false,
                    }
                    st.e.insert(a, b);
                    st.er.insert(b, a);
                    let skip_outs = self.copies_commute && matches!(ea.label, EdgeLabel::Copy(_));
                    for (k, (l, r)) in [(&ea.ins, &eb.ins), (&ea.outs, &eb.outs), (&ea.inner_in, &eb.inner_in), (&ea.inner_out, &eb.inner_out)]
                        .into_iter()
                        .enumerate()
                    {
                        if k == 1 && skip_outs {
                            continue;
                        }
                        for (x, y) in l.iter().zip(r.iter()) {
                            work.push(Pair::N(*x, *y));
                        }
                    }
                }
            }
        }
        true
    }

    fn search(&self, st: State, g_edges: &[(usize, EdgeId)], h_edges: &[(usize, EdgeId)]) -> Option<State> {
        let next = g_edges.iter().find(|(_, e)| !st.e.contains_key(e));
        let Some(&(da, a)) = next else {
            return self.finish_nodes(st);
        };
        let ea = self.g.edge(a);
        for &(db, b) in h_edges {
            if da != db || st.er.contains_key(&b) {
                continue;
            }
            let eb = self.h.edge(b);
            if ea.label != eb.label
                || ea.ins.len() != eb.ins.len()
                || ea.outs.len() != eb.outs.len()
            {
                continue;
            }
            let mut trial = st.clone();
            if self.propagate(&mut trial, vec![Pair::E(a, b)]) {
                if let Some(done) = self.search(trial, g_edges, h_edges) {
                    return Some(done);
                }
            }
        }
        None
    }

    /// Matches the nodes that no edge touches, grouped by type and parent.
    fn finish_nodes(&self, mut st: State) -> Option<State> {
        let free_h: Vec<NodeId> = self.h.nodes().map(|(id, _)| id).filter(|id| !st.nr.contains_key(id)).collect();
        let mut used = vec![false; free_h.len()];
        let free_g: Vec<NodeId> = self.g.nodes().map(|(id, _)| id).filter(|id| !st.n.contains_key(id)).collect();
        for a in free_g {
            let na = self.g.node(a);
            let want_parent = match na.parent {
                None => None,
                Some(p) => Some(*st.e.get(&p)?),
            };
            let pos = free_h
                .iter()
                .enumerate()
                .position(|(i, b)| !used[i] && self.h.node(*b).ty == na.ty && self.h.node(*b).parent == want_parent)?;
            used[pos] = true;
            st.n.insert(a, free_h[pos]);
            st.nr.insert(free_h[pos], a);
        }
        if used.iter().all(|u| *u) {
            Some(st)
        } else {
            None
        }
    }
}

/// Looks for an isomorphism from `g` to `h` preserving interfaces position by position.
pub fn iso_check(g: &Hypernet, h: &Hypernet) -> Option<IsoWitness> {
    iso_check_seeded(g, h, &[])
}

/// As [`iso_check`], additionally forcing the given node pairs.
pub fn iso_check_seeded(g: &Hypernet, h: &Hypernet, seeds: &[(NodeId, NodeId)]) -> Option<IsoWitness> {
    iso_impl(g, h, seeds, false)
}

/// Isomorphism up to reordering the outputs of copy cells.
pub fn iso_check_up_to_copies(g: &Hypernet, h: &Hypernet) -> Option<IsoWitness> {
    iso_impl(g, h, &[], true)
}

fn iso_impl(g: &Hypernet, h: &Hypernet, seeds: &[(NodeId, NodeId)], copies_commute: bool) -> Option<IsoWitness> {
    if g.node_count() != h.node_count()
        || g.edge_count() != h.edge_count()
        || g.left().len() != h.left().len()
        || g.right().len() != h.right().len()
    {
        return None;
    }
    let gi = g.incidence();
    let hi = h.incidence();
    let ctx = Ctx { g, h, gp: gi.producers, gc: gi.consumers, hp: hi.producers, hc: hi.consumers, copies_commute };
    let mut st = State::default();
    let mut work = Vec::new();
    for (a, b) in g.left().iter().zip(h.left()).chain(g.right().iter().zip(h.right())) {
        work.push(Pair::N(*a, *b));
    }
    for (a, b) in seeds {
        work.push(Pair::N(*a, *b));
    }
    if !ctx.propagate(&mut st, work) {
        return None;
    }
    // Outer edges first so that parents are fixed before children.
    let by_depth = |x: &Hypernet| {
        let mut v: Vec<(usize, EdgeId)> = x.edges().map(|(id, e)| (x.depth(e.parent), id)).collect();
        v.sort();
        v
    };
    let st = ctx.search(st, &by_depth(g), &by_depth(h))?;
    let w = IsoWitness { nodes: st.n.into_iter().collect(), edges: st.e.into_iter().collect() };
    if w.verify_with(g, h, copies_commute) {
        Some(w)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_atom, compose_seq, Atom, Mode, Signature};
    use crate::types::ObjectType;

    #[test]
    fn renamed_copy_is_isomorphic() {
        let sig = Signature::new(Mode::Flat).sort("A").op("f", &["A"], &["A"]);
        let f = build_atom(&sig, &Atom::Gen("f".into())).unwrap();
        let ff = compose_seq(&f, &f).unwrap();
        let w = iso_check(&ff, &ff.compacted()).expect("iso");
        assert!(w.verify(&ff, &ff.compacted()));
    }

    #[test]
    fn identities_on_different_sorts_differ() {
        let sig = Signature::new(Mode::Flat).sort("A").sort("B");
        let a = build_atom(&sig, &Atom::Id(ObjectType::base("A"))).unwrap();
        let b = build_atom(&sig, &Atom::Id(ObjectType::base("B"))).unwrap();
        assert!(iso_check(&a, &b).is_none());
    }

    #[test]
    fn disconnected_components_need_search() {
        let mk = |names: &[&str]| {
            let mut g = Hypernet::new();
            for n in names {
                let x = g.add_node(ObjectType::base("A"), None);
                g.add_edge(EdgeLabel::gen(n), vec![], vec![x], None);
                g.add_edge(EdgeLabel::Delete, vec![x], vec![], None);
            }
            g
        };
        assert!(iso_check(&mk(&["a", "b"]), &mk(&["b", "a"])).is_some());
        assert!(iso_check(&mk(&["a", "a"]), &mk(&["b", "a"])).is_none());
    }

    #[test]
    fn copy_outputs_may_commute() {
        let mk = |swap: bool| {
            let mut g = Hypernet::new();
            let a = ObjectType::base("A");
            let x = g.add_node(a.clone(), None);
            let (y, z) = (g.add_node(a.clone(), None), g.add_node(a.clone(), None));
            let (p, q) = (g.add_node(a.clone(), None), g.add_node(a.clone(), None));
            g.add_edge(EdgeLabel::Copy(2), vec![x], if swap { vec![z, y] } else { vec![y, z] }, None);
            g.add_edge(EdgeLabel::gen("f"), vec![y], vec![p], None);
            g.add_edge(EdgeLabel::gen("g"), vec![z], vec![q], None);
            g.set_left(vec![x]);
            g.set_right(vec![p, q]);
            g
        };
        assert!(iso_check(&mk(false), &mk(true)).is_none());
        assert!(iso_check_up_to_copies(&mk(false), &mk(true)).is_some());
    }
}
