//! Convex double-pushout rewriting on hypernets.
//!
//! A rule's left-hand side is matched into a single layer of the target
//! (top level or the inside of some bubble); bubbles in the left-hand side
//! must match bubbles whose whole contents are covered. Applying a match
//! deletes the image interior and glues the right-hand side along the
//! outer interface.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::error::ParseError;
use crate::graph::{EdgeId, EdgeLabel, Hypernet, NodeId};
use crate::text::{parse_hypernet, print_hypernet};
use crate::types::ObjectType;
use crate::validate::validate_hypernet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewriteError {
    #[error("rule `{name}`: {msg}")]
    InvalidRule { name: String, msg: String },
    #[error("matching does not fit the graph: {0}")]
    Stale(String),
    #[error("matched region is not convex")]
    NonConvex,
    #[error("no normal form within {steps} steps")]
    Budget { steps: usize, graph: Box<Hypernet> },
    #[error("rule file: {0}")]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewriteRule {
    pub name: String,
    pub lhs: Hypernet,
    pub rhs: Hypernet,
}

impl RewriteRule {
    pub fn new(name: &str, lhs: Hypernet, rhs: Hypernet) -> Result<Self, RewriteError> {
        let bad = |msg: String| RewriteError::InvalidRule { name: name.to_string(), msg };
        for (side, g) in [("lhs", &lhs), ("rhs", &rhs)] {
            if let Some(v) = validate_hypernet(g).first() {
                return Err(bad(format!("{side} is not valid: {v}")));
            }
        }
        if lhs.left_types() != rhs.left_types() || lhs.right_types() != rhs.right_types() {
            return Err(bad("lhs and rhs interfaces differ".into()));
        }
        if lhs.edge_count() == 0 {
            return Err(bad("lhs has no edges".into()));
        }
        let touched: HashSet<NodeId> =
            lhs.edges().filter(|(_, e)| e.parent.is_none()).flat_map(|(_, e)| e.ins.iter().chain(&e.outs).copied()).collect();
        if let Some(n) = lhs.layer_nodes(None).into_iter().find(|n| !touched.contains(n)) {
            return Err(bad(format!("lhs node {n} is a bare wire")));
        }
        Ok(RewriteRule { name: name.to_string(), lhs, rhs })
    }

    /// Text form: a `name:` line, an `interface:` line, then the two graphs
    /// under `lhs:` and `rhs:` headers.
    pub fn to_text(&self) -> String {
        let types = |v: Vec<ObjectType>| v.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let _ = writeln!(s, "name: {}", self.name);
        let _ = writeln!(s, "interface: {} -> {}", types(self.lhs.left_types()), types(self.lhs.right_types()));
        let _ = writeln!(s, "lhs:\n{}rhs:\n{}", print_hypernet(&self.lhs), print_hypernet(&self.rhs));
        s
    }
}

/// Parses one or more rules; each starts at a `name:` line.
pub fn parse_rules(text: &str) -> Result<Vec<RewriteRule>, RewriteError> {
    let mut rules = Vec::new();
    let mut chunks: Vec<(usize, Vec<&str>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim_start().starts_with("name:") || chunks.is_empty() {
            chunks.push((i, Vec::new()));
        }
        chunks.last_mut().expect("chunk").1.push(line);
    }
    for (start, lines) in chunks {
        if lines.iter().all(|l| l.trim().is_empty() || l.trim_start().starts_with('#')) {
            continue;
        }
        rules.push(parse_rule_at(start, &lines)?);
    }
    Ok(rules)
}

fn parse_rule_at(start: usize, lines: &[&str]) -> Result<RewriteRule, RewriteError> {
    let mut name = String::from("rule");
    let mut iface = None;
    let mut section: Option<bool> = None;
    let (mut lhs, mut rhs) = (String::new(), String::new());
    let err = |i: usize, msg: &str| RewriteError::Parse(ParseError::new(start + i + 1, 1, msg));
    for (i, raw) in lines.iter().enumerate() {
        let l = raw.trim();
        if let Some(n) = l.strip_prefix("name:") {
            name = n.trim().to_string();
        } else if let Some(t) = l.strip_prefix("interface:") {
            let (a, b) = t.split_once("->").ok_or_else(|| err(i, "expected `interface: <types> -> <types>`"))?;
            let p = |s: &str| -> Result<Vec<ObjectType>, RewriteError> {
                s.split(',').filter(|x| !x.trim().is_empty()).map(|x| ObjectType::parse(x.trim()).map_err(|e| err(i, &e.msg))).collect()
            };
            iface = Some((p(a)?, p(b)?));
        } else if l == "lhs:" {
            section = Some(true);
        } else if l == "rhs:" {
            section = Some(false);
        } else {
            match section {
                Some(true) => lhs.push_str(raw),
                Some(false) => rhs.push_str(raw),
                None if l.is_empty() || l.starts_with('#') => continue,
                None => return Err(err(i, "expected `lhs:`")),
            }
            let buf = if section == Some(true) { &mut lhs } else { &mut rhs };
            buf.push('\n');
        }
    }
    let lhs = parse_hypernet(&lhs)?;
    let rhs = parse_hypernet(&rhs)?;
    if let Some((a, b)) = iface {
        if lhs.left_types() != a || lhs.right_types() != b {
            return Err(RewriteError::InvalidRule { name, msg: "declared interface does not match lhs".into() });
        }
    }
    RewriteRule::new(&name, lhs, rhs)
}

/// An embedding of a rule's lhs into a target graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub rule: String,
    pub nodes: BTreeMap<NodeId, NodeId>,
    pub edges: BTreeMap<EdgeId, EdgeId>,
    /// The target layer receiving the lhs top level.
    pub layer: Option<EdgeId>,
}

impl Matching {
    fn key(&self) -> Vec<EdgeId> {
        let mut v: Vec<EdgeId> = self.edges.values().copied().collect();
        v.sort();
        v
    }
}

/// All convex matchings of `rule` in `g`, at any layer, ordered by their
/// smallest target edge.
pub fn find_matches(rule: &RewriteRule, g: &Hypernet) -> Vec<Matching> {
    let order = edge_order(&rule.lhs);
    let mut by_label: HashMap<&EdgeLabel, Vec<EdgeId>> = HashMap::new();
    for (id, e) in g.edges() {
        by_label.entry(&e.label).or_default().push(id);
    }
    let mut s = Search {
        rule,
        g,
        order: &order,
        by_label: &by_label,
        nodes: BTreeMap::new(),
        used_nodes: HashSet::new(),
        edges: BTreeMap::new(),
        used_edges: HashSet::new(),
        layer: None,
        found: Vec::new(),
    };
    s.go(0);
    let mut found = s.found;
    found.sort_by_key(|m| (m.key(), m.nodes.values().copied().collect::<Vec<_>>()));
    found
}

/// Parents first; otherwise prefer edges sharing nodes with those already placed.
fn edge_order(lhs: &Hypernet) -> Vec<EdgeId> {
    let mut left: BTreeSet<EdgeId> = lhs.edges().map(|(id, _)| id).collect();
    let mut placed: Vec<EdgeId> = Vec::new();
    let mut seen: HashSet<NodeId> = HashSet::new();
    while !left.is_empty() {
        let ready = left.iter().copied().filter(|e| lhs.edge(*e).parent.is_none_or(|p| placed.contains(&p)));
        let best = ready
            .max_by_key(|e| {
                let ed = lhs.edge(*e);
                let shared = ed.ins.iter().chain(&ed.outs).filter(|n| seen.contains(n)).count();
                (shared, std::cmp::Reverse(*e))
            })
            .expect("parents precede children");
        left.remove(&best);
        let ed = lhs.edge(best);
        seen.extend(ed.ins.iter().chain(&ed.outs).chain(&ed.inner_in).chain(&ed.inner_out).copied());
        placed.push(best);
    }
    placed
}

struct Search<'a> {
    rule: &'a RewriteRule,
    g: &'a Hypernet,
    order: &'a [EdgeId],
    by_label: &'a HashMap<&'a EdgeLabel, Vec<EdgeId>>,
    nodes: BTreeMap<NodeId, NodeId>,
    used_nodes: HashSet<NodeId>,
    edges: BTreeMap<EdgeId, EdgeId>,
    used_edges: HashSet<EdgeId>,
    layer: Option<Option<EdgeId>>,
    found: Vec<Matching>,
}

impl Search<'_> {
    fn go(&mut self, i: usize) {
        if i == self.order.len() {
            let m = Matching {
                rule: self.rule.name.clone(),
                nodes: self.nodes.clone(),
                edges: self.edges.clone(),
                layer: self.layer.flatten(),
            };
            if m.nodes.len() == self.rule.lhs.node_count() && check(self.rule, self.g, &m).is_ok() {
                self.found.push(m);
            }
            return;
        }
        let le_id = self.order[i];
        let le = self.rule.lhs.edge(le_id);
        let Some(cands) = self.by_label.get(&le.label) else { return };
        for &te_id in cands {
            if self.used_edges.contains(&te_id) {
                continue;
            }
            let te = self.g.edge(te_id);
            let parent_ok = match le.parent {
                None => self.layer.is_none_or(|l| l == te.parent),
                Some(p) => self.edges.get(&p) == te.parent.as_ref(),
            };
            if !parent_ok
                || te.ins.len() != le.ins.len()
                || te.outs.len() != le.outs.len()
                || te.inner_in.len() != le.inner_in.len()
                || te.inner_out.len() != le.inner_out.len()
            {
                continue;
            }
            let saved_layer = self.layer;
            if le.parent.is_none() {
                self.layer = Some(te.parent);
            }
            let pairs: Vec<(NodeId, NodeId)> = le
                .ins
                .iter()
                .zip(&te.ins)
                .chain(le.outs.iter().zip(&te.outs))
                .chain(le.inner_in.iter().zip(&te.inner_in))
                .chain(le.inner_out.iter().zip(&te.inner_out))
                .map(|(a, b)| (*a, *b))
                .collect();
            let mut added = Vec::new();
            let mut ok = true;
            for (ln, tn) in pairs {
                match self.nodes.get(&ln) {
                    Some(x) if *x == tn => {}
                    Some(_) => ok = false,
                    None => {
                        if self.used_nodes.contains(&tn) || self.rule.lhs.ty(ln) != self.g.ty(tn) {
                            ok = false;
                        } else {
                            self.nodes.insert(ln, tn);
                            self.used_nodes.insert(tn);
                            added.push(ln);
                        }
                    }
                }
                if !ok {
                    break;
                }
            }
            if ok {
                self.edges.insert(le_id, te_id);
                self.used_edges.insert(te_id);
                self.go(i + 1);
                self.edges.remove(&le_id);
                self.used_edges.remove(&te_id);
            }
            for ln in added {
                let tn = self.nodes.remove(&ln).expect("added");
                self.used_nodes.remove(&tn);
            }
            self.layer = saved_layer;
        }
    }
}

/// Checks that `m` is a convex matching of `rule` into `g`.
pub fn check(rule: &RewriteRule, g: &Hypernet, m: &Matching) -> Result<(), RewriteError> {
    let stale = |s: String| Err(RewriteError::Stale(s));
    let lhs = &rule.lhs;
    if m.nodes.len() != lhs.node_count() || m.edges.len() != lhs.edge_count() {
        return stale("matching does not cover the lhs".into());
    }
    let tn: HashSet<NodeId> = m.nodes.values().copied().collect();
    let te: HashSet<EdgeId> = m.edges.values().copied().collect();
    if tn.len() != m.nodes.len() || te.len() != m.edges.len() {
        return stale("matching is not injective".into());
    }
    for (ln, t) in &m.nodes {
        match g.try_node(*t) {
            Some(n) if n.ty == *lhs.ty(*ln) => {}
            _ => return stale(format!("node {t}")),
        }
        let want = match lhs.node(*ln).parent {
            None => m.layer,
            Some(p) => m.edges.get(&p).copied(),
        };
        if g.node(*t).parent != want {
            return stale(format!("node {t} sits in the wrong layer"));
        }
    }
    let mn = |v: &[NodeId]| v.iter().map(|n| m.nodes.get(n).copied()).collect::<Option<Vec<_>>>();
    for (le, t) in &m.edges {
        let l = lhs.edge(*le);
        let Some(e) = g.try_edge(*t) else { return stale(format!("edge {t}")) };
        let parent = match l.parent {
            None => m.layer,
            Some(p) => m.edges.get(&p).copied(),
        };
        if e.label != l.label
            || e.parent != parent
            || mn(&l.ins).as_ref() != Some(&e.ins)
            || mn(&l.outs).as_ref() != Some(&e.outs)
            || mn(&l.inner_in).as_ref() != Some(&e.inner_in)
            || mn(&l.inner_out).as_ref() != Some(&e.inner_out)
        {
            return stale(format!("edge {t} does not match edge {le}"));
        }
        if l.label == EdgeLabel::Bubble {
            let (ln, lx) = lhs.descendants(*le);
            let (gn, gx) = g.descendants(*t);
            if ln.len() != gn.len() || lx.len() != gx.len() {
                return stale(format!("bubble {t} has contents outside the match"));
            }
        }
    }
    // Dangling links: only interface nodes may touch edges outside the image.
    let inc = g.incidence();
    let (gl, gr) = g.boundary(m.layer);
    for (ln, t) in &m.nodes {
        let top = lhs.node(*ln).parent.is_none();
        let on_left = top && lhs.left().contains(ln);
        let on_right = top && lhs.right().contains(ln);
        let outside = |v: Option<&Vec<(EdgeId, usize)>>| v.is_some_and(|v| v.iter().any(|(e, _)| !te.contains(e)));
        if outside(inc.producers.get(t)) && !on_left {
            return stale(format!("node {t} has a producer outside the match"));
        }
        if outside(inc.consumers.get(t)) && !on_right {
            return stale(format!("node {t} has a consumer outside the match"));
        }
        if top && !on_left && !on_right && (gl.contains(t) || gr.contains(t)) {
            return stale(format!("interior node {t} lies on the graph interface"));
        }
    }
    // Convexity: no path leaves the image and comes back.
    let mut stack: Vec<NodeId> = lhs.right().iter().map(|n| m.nodes[n]).collect();
    let mut seen: HashSet<NodeId> = HashSet::new();
    while let Some(n) = stack.pop() {
        for (e, _) in inc.consumers.get(&n).into_iter().flatten() {
            if te.contains(e) {
                continue;
            }
            for o in &g.edge(*e).outs {
                if tn.contains(o) {
                    return Err(RewriteError::NonConvex);
                }
                if seen.insert(*o) {
                    stack.push(*o);
                }
            }
        }
    }
    Ok(())
}

pub fn apply_rewrite(rule: &RewriteRule, m: &Matching, g: &Hypernet) -> Result<Hypernet, RewriteError> {
    check(rule, g, m)?;
    let lhs = &rule.lhs;
    let mut h = g.clone();
    for t in m.edges.values() {
        h.remove_edge(*t);
    }
    let boundary: HashSet<NodeId> = lhs.left().iter().chain(lhs.right()).copied().collect();
    for (ln, t) in &m.nodes {
        if !boundary.contains(ln) {
            h.remove_node(*t);
        }
    }
    let (nmap, _) = h.embed(&rule.rhs, m.layer);
    let mut renamed: HashMap<NodeId, NodeId> = HashMap::new();
    let resolve = |mut n: NodeId, r: &HashMap<NodeId, NodeId>| {
        while let Some(x) = r.get(&n) {
            n = *x;
        }
        n
    };
    let glue = lhs.left().iter().zip(rule.rhs.left()).chain(lhs.right().iter().zip(rule.rhs.right()));
    for (l, r) in glue {
        let keep = resolve(m.nodes[l], &renamed);
        let drop = resolve(nmap[r], &renamed);
        if keep != drop {
            h.merge_nodes(keep, drop);
            renamed.insert(drop, keep);
        }
    }
    Ok(h)
}

/// Rewrites with the first match of the first applicable rule until none
/// applies. Returns the normal form and the number of steps.
pub fn normalize(rules: &[RewriteRule], g: &Hypernet, budget: usize) -> Result<(Hypernet, usize), RewriteError> {
    let mut cur = g.clone();
    let mut steps = 0;
    loop {
        let next = rules.iter().find_map(|r| find_matches(r, &cur).into_iter().next().map(|m| (r, m)));
        let Some((r, m)) = next else { return Ok((cur, steps)) };
        if steps == budget {
            return Err(RewriteError::Budget { steps, graph: Box::new(cur) });
        }
        cur = apply_rewrite(r, &m, &cur)?;
        steps += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagrams::*;
    use crate::iso::iso_check;
    use crate::validate::is_valid;

    #[test]
    fn motivating_redex() {
        let ex = redex_example();
        let ms = find_matches(&ex.rule, &ex.graph);
        assert_eq!(ms.len(), 1);
        let out = apply_rewrite(&ex.rule, &ms[0], &ex.graph).unwrap();
        assert!(is_valid(&out));
        assert!(iso_check(&out, &ex.expected).is_some());
        assert_eq!(check(&ex.rule, &ex.graph, &redex_non_convex()), Err(RewriteError::NonConvex));
    }

    #[test]
    fn self_match_and_noop_rule() {
        let ex = redex_example();
        let r = RewriteRule::new("self", ex.graph.clone(), ex.graph.clone()).unwrap();
        let ms = find_matches(&r, &ex.graph);
        assert_eq!(ms.len(), 1);
        assert!(ms[0].nodes.iter().all(|(a, b)| a == b));
        let out = apply_rewrite(&r, &ms[0], &ex.graph).unwrap();
        assert!(iso_check(&out, &ex.graph).is_some());
    }

    #[test]
    fn stale_matching_is_rejected() {
        let ex = redex_example();
        let m = find_matches(&ex.rule, &ex.graph).remove(0);
        let out = apply_rewrite(&ex.rule, &m, &ex.graph).unwrap();
        assert!(matches!(apply_rewrite(&ex.rule, &m, &out), Err(RewriteError::Stale(_))));
    }

    #[test]
    fn slide_inside_a_bubble() {
        let ex = slide_example();
        let ms = find_matches(&ex.rule, &ex.graph);
        assert_eq!(ms.len(), 1);
        assert!(ms[0].layer.is_some());
        let out = apply_rewrite(&ex.rule, &ms[0], &ex.graph).unwrap();
        assert!(is_valid(&out), "{:?}", validate_hypernet(&out));
        assert!(iso_check(&out, &ex.expected).is_some());
    }

    #[test]
    fn rule_text_round_trip() {
        let ex = slide_example();
        let text = ex.rule.to_text();
        let back = parse_rules(&text).unwrap();
        assert_eq!(back, vec![ex.rule.clone()]);
        let two = format!("{text}\n{}", redex_example().rule.to_text());
        assert_eq!(parse_rules(&two).unwrap().len(), 2);
    }

    #[test]
    fn empty_rule_set_is_identity() {
        let ex = redex_example();
        let (out, steps) = normalize(&[], &ex.graph, 10).unwrap();
        assert_eq!(steps, 0);
        assert_eq!(out, ex.graph);
    }

    #[test]
    fn boolean_circuit_reduces_to_true() {
        let (out, steps) = normalize(&boolean_rules(), &boolean_circuit(), 20).unwrap();
        assert_eq!(steps, 3);
        assert_eq!(output_constants(&out), Some(vec!["t".to_string()]));
    }

    #[test]
    fn three_wire_sorter() {
        let sig = sorting_signature(3);
        let g = crate::graph::compose_seq(&constants(&sig, &[3, 1, 2]), &insertion_sorter(&sig, 3)).unwrap();
        let (out, _) = normalize(&sorting_rules(3), &g, 20).unwrap();
        assert_eq!(output_constants(&out).unwrap(), ["k3", "k2", "k1"]);
        assert!(matches!(normalize(&sorting_rules(3), &g, 1), Err(RewriteError::Budget { steps: 1, .. })));
    }

    #[test]
    fn bad_rules() {
        let ex = redex_example();
        assert!(RewriteRule::new("x", ex.rule.lhs.clone(), ex.graph.clone()).is_err());
        assert!(RewriteRule::new("x", Hypernet::new(), Hypernet::new()).is_err());
    }
}
