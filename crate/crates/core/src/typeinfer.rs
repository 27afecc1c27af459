//! Type inference for untyped translations as an edge-labelling problem.
//!
//! `build_constraints` decorates every wire with a type expression, level
//! by level from the innermost bubbles out; a wire decorated twice adds an
//! edge between its two decorations. `saturate` closes the resulting graph
//! under componentwise unification of arrows and products, and `validate`
//! looks for paths joining incompatible vertices or a variable and a type
//! containing it.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::graph::{EdgeId, EdgeLabel, Hypernet, NodeId};
use crate::prim::{Const, PrimOp};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeExpr {
    Int,
    Bool,
    Real,
    Unit,
    Var(usize),
    Arrow(Box<TypeExpr>, Box<TypeExpr>),
    Product(Box<TypeExpr>, Box<TypeExpr>),
}

impl TypeExpr {
    pub fn arrow(a: TypeExpr, b: TypeExpr) -> Self {
        TypeExpr::Arrow(Box::new(a), Box::new(b))
    }

    pub fn product(a: TypeExpr, b: TypeExpr) -> Self {
        TypeExpr::Product(Box::new(a), Box::new(b))
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, TypeExpr::Int | TypeExpr::Bool | TypeExpr::Real | TypeExpr::Unit)
    }

    fn children(&self) -> Vec<&TypeExpr> {
        match self {
            TypeExpr::Arrow(a, b) | TypeExpr::Product(a, b) => vec![a, b],
            _ => vec![],
        }
    }

    pub fn vars(&self) -> Vec<usize> {
        let mut out = Vec::new();
        fn go(t: &TypeExpr, out: &mut Vec<usize>) {
            match t {
                TypeExpr::Var(v) if !out.contains(v) => out.push(*v),
                _ => t.children().into_iter().for_each(|c| go(c, out)),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn rename(&self, map: &HashMap<usize, usize>) -> TypeExpr {
        match self {
            TypeExpr::Var(v) => TypeExpr::Var(*map.get(v).unwrap_or(v)),
            TypeExpr::Arrow(a, b) => TypeExpr::arrow(a.rename(map), b.rename(map)),
            TypeExpr::Product(a, b) => TypeExpr::product(a.rename(map), b.rename(map)),
            t => t.clone(),
        }
    }

    /// Variables renumbered from 0 in order of first occurrence.
    pub fn canonical(&self) -> TypeExpr {
        let map = self.vars().into_iter().enumerate().map(|(i, v)| (v, i)).collect();
        self.rename(&map)
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atomic = |t: &TypeExpr| !matches!(t, TypeExpr::Arrow(..) | TypeExpr::Product(..));
        match self {
            TypeExpr::Int => write!(f, "Int"),
            TypeExpr::Bool => write!(f, "Bool"),
            TypeExpr::Real => write!(f, "Real"),
            TypeExpr::Unit => write!(f, "Unit"),
            TypeExpr::Var(v) => write!(f, "α{v}"),
            TypeExpr::Arrow(a, b) => {
                if atomic(a) || matches!(**a, TypeExpr::Product(..)) {
                    write!(f, "{a} -> {b}")
                } else {
                    write!(f, "({a}) -> {b}")
                }
            }
            TypeExpr::Product(a, b) => {
                let side = |t: &TypeExpr| if atomic(t) { t.to_string() } else { format!("({t})") };
                write!(f, "{} * {}", side(a), side(b))
            }
        }
    }
}

/// Undirected edges between type expressions, stored with the smaller end
/// first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UnificationGraph {
    pub edges: BTreeSet<(TypeExpr, TypeExpr)>,
}

impl UnificationGraph {
    pub fn add(&mut self, a: TypeExpr, b: TypeExpr) -> bool {
        if a == b {
            return false;
        }
        let e = if a <= b { (a, b) } else { (b, a) };
        self.edges.insert(e)
    }

    pub fn contains(&self, a: &TypeExpr, b: &TypeExpr) -> bool {
        let e = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        self.edges.contains(&e)
    }

    /// Every vertex with its subexpressions.
    fn vertices(&self) -> Vec<TypeExpr> {
        let mut set = BTreeSet::new();
        fn add(t: &TypeExpr, set: &mut BTreeSet<TypeExpr>) {
            if set.insert(t.clone()) {
                t.children().into_iter().for_each(|c| add(c, set));
            }
        }
        for (a, b) in &self.edges {
            add(a, &mut set);
            add(b, &mut set);
        }
        set.into_iter().collect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct Constraints {
    pub decoration: BTreeMap<NodeId, TypeExpr>,
    pub graph: UnificationGraph,
    /// How many times each wire was passed to `decorate`.
    pub visits: BTreeMap<NodeId, usize>,
    fresh: usize,
}

impl Constraints {
    fn fresh(&mut self) -> TypeExpr {
        self.fresh += 1;
        TypeExpr::Var(self.fresh - 1)
    }

    fn decorate(&mut self, n: NodeId, t: TypeExpr) {
        *self.visits.entry(n).or_default() += 1;
        match self.decoration.get(&n) {
            None => {
                self.decoration.insert(n, t);
            }
            Some(old) => {
                let old = old.clone();
                self.graph.add(t, old);
            }
        }
    }

    /// The current decoration of `n`, creating a fresh one if absent.
    fn read(&mut self, n: NodeId) -> TypeExpr {
        match self.decoration.get(&n) {
            Some(t) => t.clone(),
            None => {
                let a = self.fresh();
                self.decorate(n, a.clone());
                a
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Two incompatible type constructors are connected.
    Clash,
    /// A variable is connected to a type that contains it.
    Occurs,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorPath {
    pub kind: ErrorKind,
    pub path: Vec<TypeExpr>,
}

impl fmt::Display for ErrorPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: Vec<String> = self.path.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", p.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum InferError {
    #[error("edge {0:?} ({1}) is not a PCF cell")]
    NonPcf(EdgeId, String),
    #[error("type error: {0}")]
    Type(ErrorPath),
}

pub fn build_constraints(g: &Hypernet) -> Result<Constraints, InferError> {
    let mut c = Constraints::default();
    let mut layers: Vec<(usize, Option<EdgeId>)> = vec![(0, None)];
    for (id, e) in g.edges() {
        if e.label == EdgeLabel::Bubble {
            layers.push((g.depth(Some(id)), Some(id)));
        }
    }
    layers.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for (_, layer) in layers {
        for id in g.layer_edges(layer) {
            visit(g, id, &mut c)?;
        }
    }
    Ok(c)
}

fn visit(g: &Hypernet, id: EdgeId, c: &mut Constraints) -> Result<(), InferError> {
    let e = g.edge(id);
    let non_pcf = || InferError::NonPcf(id, e.label.to_string());
    match &e.label {
        EdgeLabel::Gen(name) if e.ins.is_empty() && e.outs.len() == 1 => {
            let t = match Const::from_label(name).ok_or_else(non_pcf)? {
                Const::Int(_) => TypeExpr::Int,
                Const::Bool(_) => TypeExpr::Bool,
                Const::Real(_) => TypeExpr::Real,
                Const::Unit => TypeExpr::Unit,
            };
            c.decorate(e.outs[0], t);
        }
        EdgeLabel::Gen(name) if PrimOp::from_name(name).is_some() => {
            let op = PrimOp::from_name(name).expect("checked");
            if e.ins.len() != op.arity() || e.outs.len() != 1 {
                return Err(non_pcf());
            }
            let (arg, res) = match op {
                PrimOp::Add | PrimOp::Sub | PrimOp::Mul | PrimOp::Neg => (TypeExpr::Int, TypeExpr::Int),
                PrimOp::And | PrimOp::Or | PrimOp::Not => (TypeExpr::Bool, TypeExpr::Bool),
                PrimOp::Leq => (TypeExpr::Int, TypeExpr::Bool),
                PrimOp::Eq => (c.fresh(), TypeExpr::Bool),
            };
            for n in &e.ins {
                c.decorate(*n, arg.clone());
            }
            c.decorate(e.outs[0], res);
        }
        EdgeLabel::Gen(name) if name == "ite" && e.ins.len() == 3 && e.outs.len() == 1 => {
            let a = c.fresh();
            c.decorate(e.ins[0], TypeExpr::Bool);
            c.decorate(e.ins[1], TypeExpr::arrow(TypeExpr::Unit, a.clone()));
            c.decorate(e.ins[2], TypeExpr::arrow(TypeExpr::Unit, a.clone()));
            c.decorate(e.outs[0], a);
        }
        EdgeLabel::Gen(name) if name == "let" && e.ins.len() == 2 && e.outs.len() == 1 => {
            let (a0, a1) = (c.fresh(), c.fresh());
            c.decorate(e.ins[0], a0.clone());
            c.decorate(e.outs[0], a1.clone());
            c.decorate(e.ins[1], TypeExpr::arrow(a0, a1));
        }
        EdgeLabel::Gen(name) if name == "rec" && e.ins.len() == 1 && e.outs.len() == 1 => {
            let a = c.fresh();
            c.decorate(e.ins[0], TypeExpr::arrow(a.clone(), a.clone()));
            c.decorate(e.outs[0], a);
        }
        EdgeLabel::Gen(_) => return Err(non_pcf()),
        EdgeLabel::Eval if e.ins.len() == 2 && e.outs.len() == 1 => {
            let (a0, a1) = (c.fresh(), c.fresh());
            c.decorate(e.ins[1], a0.clone());
            c.decorate(e.outs[0], a1.clone());
            c.decorate(e.ins[0], TypeExpr::arrow(a0, a1));
        }
        EdgeLabel::Eval => return Err(non_pcf()),
        // Contraction, weakening and the retractions carry one unknown type.
        EdgeLabel::Copy(_) | EdgeLabel::Delete | EdgeLabel::Iota | EdgeLabel::Rho => {
            let a = c.fresh();
            for n in e.ins.iter().chain(&e.outs) {
                c.decorate(*n, a.clone());
            }
        }
        EdgeLabel::Strictify => {
            let (a, b) = (c.fresh(), c.fresh());
            c.decorate(e.ins[0], a.clone());
            c.decorate(e.ins[1], b.clone());
            c.decorate(e.outs[0], TypeExpr::product(a, b));
        }
        EdgeLabel::Destrictify => {
            let (a, b) = (c.fresh(), c.fresh());
            c.decorate(e.outs[0], a.clone());
            c.decorate(e.outs[1], b.clone());
            c.decorate(e.ins[0], TypeExpr::product(a, b));
        }
        EdgeLabel::Bubble => {
            for (outer, inner) in e.ins.iter().zip(&e.inner_in) {
                let t = c.read(*inner);
                c.decorate(*outer, t);
            }
            let bound: Vec<TypeExpr> = e.inner_in[e.ins.len()..].iter().map(|n| c.read(*n)).collect();
            let arg = match bound.len() {
                0 => TypeExpr::Unit,
                1 => bound[0].clone(),
                _ => return Err(non_pcf()),
            };
            let [root] = e.inner_out[..] else { return Err(non_pcf()) };
            let res = c.read(root);
            c.decorate(e.outs[0], TypeExpr::arrow(arg, res));
        }
    }
    Ok(())
}

struct Components {
    index: HashMap<TypeExpr, usize>,
    verts: Vec<TypeExpr>,
    parent: Vec<usize>,
}

impl Components {
    fn new(g: &UnificationGraph) -> Self {
        let verts = g.vertices();
        let index: HashMap<TypeExpr, usize> = verts.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let mut c = Components { parent: (0..verts.len()).collect(), index, verts };
        for (a, b) in &g.edges {
            let (x, y) = (c.find(c.index[a]), c.find(c.index[b]));
            if x != y {
                let (lo, hi) = (x.min(y), x.max(y));
                c.parent[hi] = lo;
            }
        }
        c
    }

    fn find(&self, mut i: usize) -> usize {
        while self.parent[i] != i {
            i = self.parent[i];
        }
        i
    }

    fn of(&self, t: &TypeExpr) -> usize {
        self.find(self.index[t])
    }

    fn groups(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut m: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..self.verts.len() {
            m.entry(self.find(i)).or_default().push(i);
        }
        m
    }
}

/// Adds `(t1, t3)` and `(t2, t4)` whenever `t1 -> t2` and `t3 -> t4` are
/// connected, and likewise for products, until nothing changes.
pub fn saturate(e: &UnificationGraph) -> UnificationGraph {
    let mut g = e.clone();
    loop {
        let comps = Components::new(&g);
        let mut changed = false;
        for members in comps.groups().values() {
            let mut first_arrow: Option<&TypeExpr> = None;
            let mut first_product: Option<&TypeExpr> = None;
            for i in members {
                let t = &comps.verts[*i];
                let slot = match t {
                    TypeExpr::Arrow(..) => &mut first_arrow,
                    TypeExpr::Product(..) => &mut first_product,
                    _ => continue,
                };
                match slot {
                    None => *slot = Some(t),
                    Some(f) => {
                        let (fc, tc) = (f.children(), t.children());
                        changed |= g.add(fc[0].clone(), tc[0].clone());
                        changed |= g.add(fc[1].clone(), tc[1].clone());
                    }
                }
            }
        }
        if !changed {
            return g;
        }
    }
}

fn bfs_path(g: &UnificationGraph, from: &TypeExpr, to: &TypeExpr) -> Vec<TypeExpr> {
    let mut adj: HashMap<&TypeExpr, Vec<&TypeExpr>> = HashMap::new();
    for (a, b) in &g.edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    for v in adj.values_mut() {
        v.sort();
    }
    let mut prev: HashMap<&TypeExpr, &TypeExpr> = HashMap::new();
    let mut q = VecDeque::from([from]);
    let mut seen: BTreeSet<&TypeExpr> = BTreeSet::from([from]);
    while let Some(x) = q.pop_front() {
        if x == to {
            break;
        }
        for y in adj.get(x).into_iter().flatten() {
            if seen.insert(y) {
                prev.insert(y, x);
                q.push_back(y);
            }
        }
    }
    let mut path = vec![to.clone()];
    let mut cur = to;
    while cur != from {
        cur = prev[cur];
        path.push(cur.clone());
    }
    path.reverse();
    path
}

fn kind_rank(t: &TypeExpr) -> Option<u8> {
    match t {
        TypeExpr::Int => Some(0),
        TypeExpr::Bool => Some(1),
        TypeExpr::Real => Some(2),
        TypeExpr::Unit => Some(3),
        TypeExpr::Arrow(..) => Some(4),
        TypeExpr::Product(..) => Some(5),
        TypeExpr::Var(_) => None,
    }
}

/// Expects a saturated graph.
pub fn validate(e: &UnificationGraph) -> Result<(), ErrorPath> {
    let comps = Components::new(e);
    let groups = comps.groups();
    for members in groups.values() {
        let mut by_kind: BTreeMap<u8, &TypeExpr> = BTreeMap::new();
        for i in members {
            let t = &comps.verts[*i];
            if let Some(k) = kind_rank(t) {
                by_kind.entry(k).or_insert(t);
            }
        }
        let mut kinds = by_kind.values();
        if let (Some(a), Some(b)) = (kinds.next(), kinds.next()) {
            return Err(ErrorPath { kind: ErrorKind::Clash, path: bfs_path(e, a, b) });
        }
    }
    // Occurs check: a cycle in "component contains a compound whose child
    // lies in component".
    let mut succ: BTreeMap<usize, Vec<(usize, usize, usize)>> = BTreeMap::new();
    for (i, t) in comps.verts.iter().enumerate() {
        for ch in t.children() {
            succ.entry(comps.find(i)).or_default().push((comps.of(ch), comps.index[ch], i));
        }
    }
    let reaches = |from: usize, to: usize| {
        let mut stack = vec![from];
        let mut seen = BTreeSet::new();
        while let Some(c) = stack.pop() {
            if c == to {
                return true;
            }
            if seen.insert(c) {
                stack.extend(succ.get(&c).into_iter().flatten().map(|x| x.0));
            }
        }
        false
    };
    for (comp, outs) in &succ {
        for (target, child, compound) in outs {
            if reaches(*target, *comp) {
                // `child` sits inside `compound`; walk from a vertex of the
                // compound's component that the child's component reaches.
                let start = if target == comp { &comps.verts[*child] } else { &comps.verts[*compound] };
                let end = &comps.verts[*compound];
                let path = if start == end { vec![end.clone()] } else { bfs_path(e, start, end) };
                return Err(ErrorPath { kind: ErrorKind::Occurs, path });
            }
        }
    }
    Ok(())
}

/// Types for the interface wires and every decorated wire.
#[derive(Clone, Debug, PartialEq)]
pub struct Typing {
    pub wires: BTreeMap<NodeId, TypeExpr>,
    pub inputs: Vec<TypeExpr>,
    pub outputs: Vec<TypeExpr>,
}

impl Typing {
    /// `inputs -> outputs` with variables renumbered jointly.
    pub fn signature(&self) -> (Vec<TypeExpr>, Vec<TypeExpr>) {
        let all = TypeExpr::Product(
            Box::new(self.inputs.iter().cloned().reduce(TypeExpr::product).unwrap_or(TypeExpr::Unit)),
            Box::new(self.outputs.iter().cloned().reduce(TypeExpr::product).unwrap_or(TypeExpr::Unit)),
        );
        let map: HashMap<usize, usize> = all.vars().into_iter().enumerate().map(|(i, v)| (v, i)).collect();
        (self.inputs.iter().map(|t| t.rename(&map)).collect(), self.outputs.iter().map(|t| t.rename(&map)).collect())
    }
}

pub fn infer(g: &Hypernet) -> Result<Typing, InferError> {
    let mut c = build_constraints(g)?;
    for n in g.left().iter().chain(g.right()) {
        c.read(*n);
    }
    let sat = saturate(&c.graph);
    validate(&sat).map_err(InferError::Type)?;
    let solved = Solver::new(&sat, c.decoration.values());
    let wires: BTreeMap<NodeId, TypeExpr> = c.decoration.iter().map(|(n, t)| (*n, solved.solve(t))).collect();
    let pick = |v: &[NodeId]| v.iter().map(|n| wires[n].clone()).collect();
    Ok(Typing { inputs: pick(g.left()), outputs: pick(g.right()), wires })
}

/// Component representatives: the ground or compound member when present,
/// else the smallest variable.
struct Solver {
    comps: Components,
    rep: BTreeMap<usize, TypeExpr>,
}

impl Solver {
    fn new<'a>(sat: &UnificationGraph, extra: impl Iterator<Item = &'a TypeExpr>) -> Self {
        // Self-loops make every decoration a vertex; they do not change
        // the components.
        let mut g = sat.clone();
        for t in extra {
            g.edges.insert((t.clone(), t.clone()));
        }
        let comps = Components::new(&g);
        let mut rep = BTreeMap::new();
        for (root, members) in comps.groups() {
            let best = members
                .iter()
                .map(|i| &comps.verts[*i])
                .min_by_key(|t| (kind_rank(t).is_none(), (*t).clone()))
                .expect("non-empty component");
            rep.insert(root, best.clone());
        }
        Solver { comps, rep }
    }

    fn solve(&self, t: &TypeExpr) -> TypeExpr {
        self.solve_depth(t, 0)
    }

    fn solve_depth(&self, t: &TypeExpr, depth: usize) -> TypeExpr {
        let r = match self.comps.index.get(t) {
            Some(i) => self.rep[&self.comps.find(*i)].clone(),
            None => t.clone(),
        };
        if depth > self.comps.verts.len() + 1 {
            return r;
        }
        match r {
            TypeExpr::Arrow(a, b) => TypeExpr::arrow(self.solve_depth(&a, depth + 1), self.solve_depth(&b, depth + 1)),
            TypeExpr::Product(a, b) => {
                TypeExpr::product(self.solve_depth(&a, depth + 1), self.solve_depth(&b, depth + 1))
            }
            other => other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse;
    use crate::translate::translate_untyped;

    fn run(src: &str) -> Result<Typing, InferError> {
        infer(&translate_untyped(&parse(src).unwrap()))
    }

    fn ty(src: &str) -> String {
        let t = run(src).unwrap();
        let (_, outs) = t.signature();
        outs[0].to_string()
    }

    fn error(src: &str) -> ErrorPath {
        match run(src) {
            Err(InferError::Type(p)) => p,
            other => panic!("{src}: expected a type error, got {other:?}"),
        }
    }

    #[test]
    fn constant() {
        let g = translate_untyped(&parse("1").unwrap());
        let c = build_constraints(&g).unwrap();
        assert_eq!(c.decoration[&g.right()[0]], TypeExpr::Int);
        assert!(c.graph.edges.is_empty());
        assert_eq!(ty("1"), "Int");
    }

    #[test]
    fn open_variable_forced_to_int() {
        let t = run("x + 1").unwrap();
        assert_eq!(t.inputs, vec![TypeExpr::Int]);
        assert_eq!(t.outputs, vec![TypeExpr::Int]);
    }

    #[test]
    fn simple_types() {
        assert_eq!(ty(r"\x. x"), "α0 -> α0");
        assert_eq!(ty(r"\x. x + 1"), "Int -> Int");
        assert_eq!(ty(r"\f. \x. f (f x)"), "(α0 -> α0) -> α0 -> α0");
        assert_eq!(ty(r"\(a, b). (b, a)"), "α0 * α1 -> α1 * α0");
        assert_eq!(ty("if tt then 1 else 2"), "Int");
        assert_eq!(ty("let rec f n = if n <= 0 then 1 else n * f (n - 1) in f"), "Int -> Int");
        assert_eq!(ty(r"let x = 0 in x + (2 + x)"), "Int");
    }

    #[test]
    fn ite_clash() {
        let p = error("if x then x + 1 else 0");
        assert_eq!(p.kind, ErrorKind::Clash);
        assert_eq!(p.path.first(), Some(&TypeExpr::Int));
        assert_eq!(p.path.last(), Some(&TypeExpr::Bool));
    }

    #[test]
    fn saturation_exposes_clash() {
        let g = translate_untyped(&parse("f tt + f 1").unwrap());
        let c = build_constraints(&g).unwrap();
        assert!(validate(&c.graph).is_ok(), "unsaturated graph hides the clash");
        let sat = saturate(&c.graph);
        assert!(sat.edges.is_superset(&c.graph.edges));
        let p = validate(&sat).unwrap_err();
        assert_eq!((p.path.first(), p.path.last()), (Some(&TypeExpr::Int), Some(&TypeExpr::Bool)));
        assert!(p.path.windows(2).all(|w| sat.contains(&w[0], &w[1])));
        assert!(p.path[1..p.path.len() - 1].iter().all(|t| matches!(t, TypeExpr::Var(_))));
    }

    #[test]
    fn one_saturation_step() {
        let mut g = UnificationGraph::default();
        let (a, b) = (TypeExpr::Var(0), TypeExpr::Var(1));
        g.add(TypeExpr::arrow(a.clone(), b.clone()), TypeExpr::arrow(TypeExpr::Int, TypeExpr::Bool));
        let s = saturate(&g);
        assert!(s.contains(&a, &TypeExpr::Int) && s.contains(&b, &TypeExpr::Bool));
        assert_eq!(saturate(&UnificationGraph::default()), UnificationGraph::default());
    }

    #[test]
    fn self_application() {
        let p = error(r"\f. f f");
        assert_eq!(p.kind, ErrorKind::Occurs);
        let p = error("f f");
        assert_eq!(p.kind, ErrorKind::Occurs);
    }

    #[test]
    fn compound_errors() {
        assert_eq!(error(r"f 0 + g f + g (\x. x && y)").kind, ErrorKind::Clash);
        error("f (f 1, f 2)");
    }

    #[test]
    fn wires_are_decorated_at_most_twice() {
        for src in [r"(\x. x) (\y. y)", "let rec f n = if n <= 0 then 1 else n * f (n - 1) in f 5", r"\(a, b). a b"] {
            let c = build_constraints(&translate_untyped(&parse(src).unwrap())).unwrap();
            assert!(c.visits.values().all(|v| *v <= 2), "{src}");
        }
    }
}
