//! Foliations: a hypernet presented as a sequence of slices, each slice a
//! tensor of atomic cells. Bubbles become abstraction cells holding the
//! foliation of their body.
//!
//! `foliate` is maximally sequential: every slice has exactly one cell that
//! is not an identity. Wires are reordered with explicit symmetry slices.
//! `fuse` merges adjacent independent slices for display.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::error::GraphError;
use crate::graph::{compose_seq, compose_tensor, empty, identity, EdgeId, EdgeLabel, Hypernet, NodeId, Signature};
use crate::types::ObjectType;
use crate::validate::validate_hypernet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FoliationError {
    #[error("graph is not valid: {0}")]
    Invalid(String),
    #[error("layer {0:?} has a cycle or an unreachable edge")]
    Stuck(Option<EdgeId>),
    #[error(transparent)]
    Boundary(#[from] GraphError),
    #[error("relabelling `{from}` to `{to}` changes its type")]
    Relabel { from: String, to: String },
    #[error("cannot mirror an abstraction with {0} captured wires")]
    Flip(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Id(ObjectType),
    Sym(ObjectType, ObjectType),
    /// Any non-bubble hyperedge: generators and the structural cells.
    Edge { label: EdgeLabel, ins: Vec<ObjectType>, outs: Vec<ObjectType> },
    Abs { captured: Vec<ObjectType>, out: ObjectType, body: Foliation },
}

impl Cell {
    pub fn ins(&self) -> Vec<ObjectType> {
        match self {
            Cell::Id(t) => vec![t.clone()],
            Cell::Sym(a, b) => vec![a.clone(), b.clone()],
            Cell::Edge { ins, .. } => ins.clone(),
            Cell::Abs { captured, .. } => captured.clone(),
        }
    }

    pub fn outs(&self) -> Vec<ObjectType> {
        match self {
            Cell::Id(t) => vec![t.clone()],
            Cell::Sym(a, b) => vec![b.clone(), a.clone()],
            Cell::Edge { outs, .. } => outs.clone(),
            Cell::Abs { out, .. } => vec![out.clone()],
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Cell::Id(_))
    }

    /// Generator and abstraction cells; identities, symmetries and the
    /// structural edges are not.
    pub fn is_signature(&self) -> bool {
        match self {
            Cell::Edge { label, .. } => !label.is_structural(),
            Cell::Abs { .. } => true,
            _ => false,
        }
    }

    fn name(&self) -> String {
        match self {
            Cell::Id(_) => "id".into(),
            Cell::Sym(..) => "sym".into(),
            Cell::Edge { label, .. } => label.to_string(),
            Cell::Abs { body, .. } => format!("[{}]", body.inline()),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

pub type Slice = Vec<Cell>;

#[derive(Debug, Clone, PartialEq)]
pub struct Foliation {
    pub input: Vec<ObjectType>,
    pub slices: Vec<Slice>,
}

impl Foliation {
    pub fn output(&self) -> Vec<ObjectType> {
        match self.slices.last() {
            Some(s) => s.iter().flat_map(Cell::outs).collect(),
            None => self.input.clone(),
        }
    }

    /// Checks that adjacent slice boundaries agree, recursively.
    pub fn check(&self) -> Result<(), FoliationError> {
        let mut cur = self.input.clone();
        for (i, s) in self.slices.iter().enumerate() {
            let ins: Vec<_> = s.iter().flat_map(Cell::ins).collect();
            if ins != cur {
                return Err(FoliationError::Boundary(GraphError::Invalid(format!("slice {i} does not fit its input"))));
            }
            for c in s {
                if let Cell::Abs { body, .. } = c {
                    body.check()?;
                }
            }
            cur = s.iter().flat_map(Cell::outs).collect();
        }
        Ok(())
    }

    /// Every cell, slice by slice; abstraction bodies are not entered.
    pub fn cells(&self) -> impl Iterator<Item = &Cell> + '_ {
        self.slices.iter().flatten()
    }

    fn inline(&self) -> String {
        self.slices.iter().map(slice_text).collect::<Vec<_>>().join(" ; ")
    }

    /// Compact form: identities dropped, runs of equal cells written as
    /// `name^(k)`, slices joined by `;`. Only cells accepted by `keep`
    /// appear; slices left empty are skipped.
    pub fn shape(&self, keep: impl Fn(&Cell) -> bool) -> String {
        let mut out = Vec::new();
        for s in &self.slices {
            let names: Vec<String> = s.iter().filter(|c| !c.is_identity() && keep(c)).map(Cell::name).collect();
            if names.is_empty() {
                continue;
            }
            let mut runs: Vec<(String, usize)> = Vec::new();
            for n in names {
                match runs.last_mut() {
                    Some((m, k)) if *m == n => *k += 1,
                    _ => runs.push((n, 1)),
                }
            }
            let parts: Vec<String> =
                runs.into_iter().map(|(n, k)| if k == 1 { n } else { format!("{n}^({k})") }).collect();
            out.push(parts.join("⊗"));
        }
        out.join(";")
    }
}

fn slice_text(s: &Slice) -> String {
    s.iter().map(Cell::name).collect::<Vec<_>>().join(" ⊗ ")
}

/// One slice per line; cells separated by `⊗`, slices terminated by `;`
/// except the last.
impl fmt::Display for Foliation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.slices.is_empty() {
            let ids: Vec<_> = self.input.iter().map(|_| "id").collect();
            return writeln!(f, "{}", if ids.is_empty() { "empty".to_string() } else { ids.join(" ⊗ ") });
        }
        let n = self.slices.len();
        for (i, s) in self.slices.iter().enumerate() {
            writeln!(f, "{}{}", slice_text(s), if i + 1 < n { " ;" } else { "" })?;
        }
        Ok(())
    }
}

pub fn foliate(g: &Hypernet) -> Result<Foliation, FoliationError> {
    if let Some(v) = validate_hypernet(g).first() {
        return Err(FoliationError::Invalid(v.to_string()));
    }
    foliate_layer(g, None)
}

fn foliate_layer(g: &Hypernet, layer: Option<EdgeId>) -> Result<Foliation, FoliationError> {
    let (inb, outb) = g.boundary(layer);
    let ty = |n: &NodeId| g.ty(*n).clone();
    let mut remaining: BTreeSet<EdgeId> = g.layer_edges(layer).into_iter().collect();
    let mut frontier = inb.clone();
    let mut slices = Vec::new();
    while !remaining.is_empty() {
        let ready = remaining.iter().copied().find(|e| g.edge(*e).ins.iter().all(|n| frontier.contains(n)));
        let Some(id) = ready else { return Err(FoliationError::Stuck(layer)) };
        remaining.remove(&id);
        let e = g.edge(id);
        let pos = if e.ins.is_empty() {
            frontier.len()
        } else {
            let first = frontier.iter().position(|n| e.ins.contains(n)).unwrap_or(0);
            let before = frontier[..first].len();
            let mut target: Vec<NodeId> = frontier.iter().copied().filter(|n| !e.ins.contains(n)).collect();
            target.splice(before..before, e.ins.iter().copied());
            permute(g, &mut frontier, &target, &mut slices);
            before
        };
        let cell = if e.label == EdgeLabel::Bubble {
            Cell::Abs { captured: e.ins.iter().map(ty).collect(), out: ty(&e.outs[0]), body: foliate_layer(g, Some(id))? }
        } else {
            Cell::Edge { label: e.label.clone(), ins: e.ins.iter().map(ty).collect(), outs: e.outs.iter().map(ty).collect() }
        };
        let n = e.ins.len();
        let mut slice: Slice = frontier[..pos].iter().map(|x| Cell::Id(ty(x))).collect();
        slice.push(cell);
        slice.extend(frontier[pos + n..].iter().map(|x| Cell::Id(ty(x))));
        slices.push(slice);
        frontier.splice(pos..pos + n, e.outs.iter().copied());
    }
    let a: BTreeSet<_> = frontier.iter().collect();
    let b: BTreeSet<_> = outb.iter().collect();
    if a != b || frontier.len() != outb.len() {
        return Err(FoliationError::Stuck(layer));
    }
    permute(g, &mut frontier, &outb, &mut slices);
    Ok(Foliation { input: inb.iter().map(ty).collect(), slices })
}

/// Rearranges `cur` into `target` by adjacent swaps, one symmetry slice each.
fn permute(g: &Hypernet, cur: &mut [NodeId], target: &[NodeId], slices: &mut Vec<Slice>) {
    for i in 0..target.len() {
        let mut j = i + cur[i..].iter().position(|n| *n == target[i]).expect("target is a permutation");
        while j > i {
            let mut s: Slice = Vec::new();
            s.extend(cur[..j - 1].iter().map(|x| Cell::Id(g.ty(*x).clone())));
            s.push(Cell::Sym(g.ty(cur[j - 1]).clone(), g.ty(cur[j]).clone()));
            s.extend(cur[j + 1..].iter().map(|x| Cell::Id(g.ty(*x).clone())));
            slices.push(s);
            cur.swap(j - 1, j);
            j -= 1;
        }
    }
}

pub fn defoliate(f: &Foliation) -> Result<Hypernet, FoliationError> {
    let mut g = identity(&f.input);
    for s in &f.slices {
        let mut h = empty();
        for c in s {
            h = compose_tensor(&h, &cell_graph(c)?);
        }
        g = compose_seq(&g, &h)?;
    }
    Ok(g)
}

fn cell_graph(c: &Cell) -> Result<Hypernet, FoliationError> {
    let mut g = Hypernet::new();
    match c {
        Cell::Id(t) => return Ok(identity(std::slice::from_ref(t))),
        Cell::Sym(a, b) => {
            let x = g.add_node(a.clone(), None);
            let y = g.add_node(b.clone(), None);
            g.set_left(vec![x, y]);
            g.set_right(vec![y, x]);
        }
        Cell::Edge { label, ins, outs } => {
            let i: Vec<_> = ins.iter().map(|t| g.add_node(t.clone(), None)).collect();
            let o: Vec<_> = outs.iter().map(|t| g.add_node(t.clone(), None)).collect();
            g.add_edge(label.clone(), i.clone(), o.clone(), None);
            g.set_left(i);
            g.set_right(o);
        }
        Cell::Abs { captured, out, body } => {
            let inner = defoliate(body)?;
            let i: Vec<_> = captured.iter().map(|t| g.add_node(t.clone(), None)).collect();
            let o = g.add_node(out.clone(), None);
            let b = g.add_edge(EdgeLabel::Bubble, i.clone(), vec![o], None);
            let (nmap, _) = g.embed(&inner, Some(b));
            g.set_inner(b, inner.left().iter().map(|n| nmap[n]).collect(), inner.right().iter().map(|n| nmap[n]).collect());
            g.set_left(i);
            g.set_right(vec![o]);
        }
    }
    Ok(g)
}

/// Merges each slice into the previous one when its cell only reads wires
/// that pass through the previous slice as identities. Applied inside
/// abstraction bodies too.
pub fn fuse(f: &Foliation) -> Foliation {
    let mut out: Vec<Slice> = Vec::new();
    for s in &f.slices {
        let s: Slice = s
            .iter()
            .map(|c| match c {
                Cell::Abs { captured, out, body } => {
                    Cell::Abs { captured: captured.clone(), out: out.clone(), body: fuse(body) }
                }
                c => c.clone(),
            })
            .collect();
        if let Some(last) = out.last_mut() {
            if try_merge(last, &s) {
                continue;
            }
        }
        out.push(s);
    }
    Foliation { input: f.input.clone(), slices: out }
}

fn try_merge(prev: &mut Slice, s: &Slice) -> bool {
    let mut active = s.iter().enumerate().filter(|(_, c)| !c.is_identity());
    let (Some((k, cell)), None) = (active.next(), active.next()) else { return false };
    let p: usize = s[..k].iter().map(|c| c.ins().len()).sum();
    let n = cell.ins().len();
    // Index of the first cell of `prev` whose outputs start at `p`.
    let mut off = 0;
    let mut at = None;
    for (i, c) in prev.iter().enumerate() {
        if off == p {
            at = Some(i);
            break;
        }
        off += c.outs().len();
    }
    if at.is_none() && off == p {
        at = Some(prev.len());
    }
    let Some(i) = at else { return false };
    if i + n > prev.len() || !prev[i..i + n].iter().all(Cell::is_identity) {
        return false;
    }
    prev.splice(i..i + n, [cell.clone()]);
    true
}

/// Relabels generator cells, leaving every other cell in place.
pub fn dag_map(f: &impl Fn(&str) -> String, fol: &Foliation) -> Foliation {
    let lift = |c: &Cell| match c {
        Cell::Edge { label: EdgeLabel::Gen(name), ins, outs } => {
            Cell::Edge { label: EdgeLabel::Gen(f(name)), ins: ins.clone(), outs: outs.clone() }
        }
        Cell::Abs { captured, out, body } => {
            Cell::Abs { captured: captured.clone(), out: out.clone(), body: dag_map(f, body) }
        }
        c => c.clone(),
    };
    Foliation { input: fol.input.clone(), slices: fol.slices.iter().map(|s| s.iter().map(lift).collect()).collect() }
}

/// `dag_map` checked against a signature: every renamed generator must keep
/// its declared arity.
pub fn dag_map_in(sig: &Signature, f: &impl Fn(&str) -> String, fol: &Foliation) -> Result<Foliation, FoliationError> {
    let mut names = BTreeSet::new();
    generator_names(fol, &mut names);
    for from in names {
        let to = f(&from);
        if !sig.ops.contains_key(&to) || sig.ops.get(&from) != sig.ops.get(&to) {
            return Err(FoliationError::Relabel { from, to });
        }
    }
    Ok(dag_map(f, fol))
}

fn generator_names(fol: &Foliation, acc: &mut BTreeSet<String>) {
    for c in fol.cells() {
        match c {
            Cell::Edge { label: EdgeLabel::Gen(n), .. } => {
                acc.insert(n.clone());
            }
            Cell::Abs { body, .. } => generator_names(body, acc),
            _ => {}
        }
    }
}

/// Mirror image: every slice reversed.
pub fn flip(fol: &Foliation) -> Result<Foliation, FoliationError> {
    let mirror = |c: &Cell| -> Result<Cell, FoliationError> {
        Ok(match c {
            Cell::Id(t) => Cell::Id(t.clone()),
            Cell::Sym(a, b) => Cell::Sym(b.clone(), a.clone()),
            Cell::Edge { label, ins, outs } => Cell::Edge {
                label: label.clone(),
                ins: ins.iter().rev().cloned().collect(),
                outs: outs.iter().rev().cloned().collect(),
            },
            Cell::Abs { captured, .. } if captured.len() > 1 => return Err(FoliationError::Flip(captured.len())),
            c => c.clone(),
        })
    };
    let mut slices = Vec::new();
    for s in &fol.slices {
        slices.push(s.iter().rev().map(mirror).collect::<Result<Slice, _>>()?);
    }
    Ok(Foliation { input: fol.input.iter().rev().cloned().collect(), slices })
}

/// Position (slice, cell) of the first generator called `name`.
pub fn find(name: &str, fol: &Foliation) -> Option<(usize, usize)> {
    fol.slices.iter().enumerate().find_map(|(i, s)| {
        s.iter().position(|c| matches!(c, Cell::Edge { label: EdgeLabel::Gen(n), .. } if n == name)).map(|j| (i, j))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::programs;
    use crate::diagrams::{shared_tree, tree, tree_signature as sig};
    use crate::iso::iso_check;
    use crate::term::parse;
    use crate::translate::translate_untyped;

    fn t() -> ObjectType {
        ObjectType::base("T")
    }

    #[test]
    fn tree_slices() {
        let f = foliate(&tree(3)).unwrap();
        assert_eq!(f.slices.len(), 15);
        assert!(f.slices.iter().all(|s| s.iter().filter(|c| !c.is_identity()).count() == 1));
        assert_eq!(fuse(&f).shape(|_| true), "emp^(8);node3^(4);node2^(2);node1");
    }

    #[test]
    fn dag_slices() {
        let f = fuse(&foliate(&shared_tree(3)).unwrap());
        assert_eq!(f.shape(|_| true), "emp^(2);node3;copy-2;node2;copy-2;node1");
        assert_eq!(f.shape(Cell::is_signature), "emp^(2);node3;node2;node1");
        assert!(iso_check(&defoliate(&f).unwrap(), &shared_tree(3)).is_some());
    }

    #[test]
    fn single_generator_is_one_slice() {
        let mut g = Hypernet::new();
        let (a, b, c) = (g.add_node(t(), None), g.add_node(t(), None), g.add_node(t(), None));
        g.add_edge(EdgeLabel::gen("node1"), vec![a, b], vec![c], None);
        g.set_left(vec![a, b]);
        g.set_right(vec![c]);
        let f = foliate(&g).unwrap();
        assert_eq!(f.slices.len(), 1);
        assert!(iso_check(&defoliate(&f).unwrap(), &g).is_some());
    }

    #[test]
    fn empty_foliation_is_an_identity_wire() {
        let f = Foliation { input: vec![t()], slices: vec![] };
        let g = defoliate(&f).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.left(), g.right());
        assert_eq!(f.to_string(), "id\n");
    }

    #[test]
    fn crossing_wires_need_symmetries() {
        let mut g = Hypernet::new();
        let (a, b, c) = (g.add_node(t(), None), g.add_node(t(), None), g.add_node(t(), None));
        g.add_edge(EdgeLabel::gen("node1"), vec![b, a], vec![c], None);
        g.set_left(vec![a, b]);
        g.set_right(vec![c]);
        let f = foliate(&g).unwrap();
        assert_eq!(f.shape(|_| true), "sym;node1");
        assert!(iso_check(&defoliate(&f).unwrap(), &g).is_some());
    }

    #[test]
    fn round_trip_on_programs() {
        for (name, t) in programs() {
            let g = translate_untyped(&t);
            let f = foliate(&g).unwrap();
            f.check().unwrap();
            let h = defoliate(&f).unwrap();
            assert!(iso_check(&h, &g).is_some(), "{name}");
            assert!(iso_check(&defoliate(&fuse(&f)).unwrap(), &g).is_some(), "{name} fused");
        }
    }

    #[test]
    fn bodies_print_in_brackets() {
        let g = translate_untyped(&parse(r"\x. x").unwrap());
        let f = foliate(&g).unwrap();
        assert_eq!(f.to_string(), "[] ;\nretract-rho\n");
        let g = translate_untyped(&parse(r"(\x. x) 1").unwrap());
        assert!(foliate(&g).unwrap().to_string().contains('['));
    }

    #[test]
    fn map_find_flip() {
        let f = foliate(&tree(3)).unwrap();
        let inc = |n: &str| match n.strip_prefix("node") {
            Some(k) => format!("node{}", k.parse::<u32>().unwrap() + 1),
            None => n.to_string(),
        };
        let m = dag_map_in(&sig(), &inc, &f).unwrap();
        assert_eq!(fuse(&m).shape(|_| true), "emp^(8);node4^(4);node3^(2);node2");
        assert_eq!(dag_map(&|n: &str| n.to_string(), &f), f);
        let bad = |n: &str| if n == "emp" { "node1".to_string() } else { n.to_string() };
        assert!(matches!(dag_map_in(&sig(), &bad, &f), Err(FoliationError::Relabel { .. })));
        assert_eq!(find("node1", &f), Some((14, 0)));
        assert_eq!(find("node9", &f), None);
        let fl = flip(&f).unwrap();
        fl.check().unwrap();
        assert_eq!(flip(&fl).unwrap(), f);
    }
}
