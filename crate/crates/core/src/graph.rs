//! Hierarchical open hypergraphs (hypernets), signatures and composition.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::GraphError;
use crate::types::ObjectType;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub u32);

/// Hyperedge labels. `Bubble` is the unlabelled abstraction edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeLabel {
    Gen(String),
    Copy(usize),
    Delete,
    Strictify,
    Destrictify,
    Iota,
    Rho,
    Eval,
    Bubble,
}

impl EdgeLabel {
    pub fn gen(name: &str) -> Self {
        EdgeLabel::Gen(name.to_string())
    }

    pub fn is_structural(&self) -> bool {
        !matches!(self, EdgeLabel::Gen(_) | EdgeLabel::Bubble)
    }

    pub fn gen_name(&self) -> Option<&str> {
        match self {
            EdgeLabel::Gen(n) => Some(n),
            _ => None,
        }
    }

    /// Parses the textual form used by the serializer.
    pub fn parse(s: &str) -> EdgeLabel {
        match s {
            "delete" => EdgeLabel::Delete,
            "strictify" => EdgeLabel::Strictify,
            "destrictify" => EdgeLabel::Destrictify,
            "retract-iota" => EdgeLabel::Iota,
            "retract-rho" => EdgeLabel::Rho,
            "eval" => EdgeLabel::Eval,
            "bubble" => EdgeLabel::Bubble,
            _ => {
                if let Some(n) = s.strip_prefix("copy-").and_then(|n| n.parse().ok()) {
                    EdgeLabel::Copy(n)
                } else {
                    EdgeLabel::Gen(s.to_string())
                }
            }
        }
    }

    fn is_reserved(name: &str) -> bool {
        !matches!(EdgeLabel::parse(name), EdgeLabel::Gen(_)) || name.is_empty() || name.contains(char::is_whitespace)
    }
}

impl std::fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EdgeLabel::Gen(n) => write!(f, "{n}"),
            EdgeLabel::Copy(n) => write!(f, "copy-{n}"),
            EdgeLabel::Delete => write!(f, "delete"),
            EdgeLabel::Strictify => write!(f, "strictify"),
            EdgeLabel::Destrictify => write!(f, "destrictify"),
            EdgeLabel::Iota => write!(f, "retract-iota"),
            EdgeLabel::Rho => write!(f, "retract-rho"),
            EdgeLabel::Eval => write!(f, "eval"),
            EdgeLabel::Bubble => write!(f, "bubble"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub ty: ObjectType,
    pub parent: Option<EdgeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub label: EdgeLabel,
    pub ins: Vec<NodeId>,
    pub outs: Vec<NodeId>,
    pub parent: Option<EdgeId>,
    /// Inner interfaces; only bubbles use them.
    pub inner_in: Vec<NodeId>,
    pub inner_out: Vec<NodeId>,
}

/// A hierarchical open hypergraph.
///
/// Node and edge identifiers share one namespace so that `parent` records
/// in the text format are unambiguous.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Hypernet {
    pub(crate) nodes: BTreeMap<NodeId, Node>,
    pub(crate) edges: BTreeMap<EdgeId, Edge>,
    pub(crate) left: Vec<NodeId>,
    pub(crate) right: Vec<NodeId>,
    pub(crate) next: u32,
}

/// Producer/consumer index for a hypernet, keyed by node.
#[derive(Debug, Default)]
pub struct Incidence {
    pub producers: HashMap<NodeId, Vec<(EdgeId, usize)>>,
    pub consumers: HashMap<NodeId, Vec<(EdgeId, usize)>>,
}

impl Incidence {
    pub fn producer(&self, n: NodeId) -> Option<(EdgeId, usize)> {
        self.producers.get(&n).and_then(|v| v.first().copied())
    }

    pub fn consumer(&self, n: NodeId) -> Option<(EdgeId, usize)> {
        self.consumers.get(&n).and_then(|v| v.first().copied())
    }
}

impl Hypernet {
    pub fn new() -> Self {
        Self::default()
    }

    fn fresh(&mut self) -> u32 {
        let id = self.next;
        self.next += 1;
        id
    }

    pub fn add_node(&mut self, ty: ObjectType, parent: Option<EdgeId>) -> NodeId {
        let id = NodeId(self.fresh());
        self.nodes.insert(id, Node { ty, parent });
        id
    }

    pub fn add_edge(&mut self, label: EdgeLabel, ins: Vec<NodeId>, outs: Vec<NodeId>, parent: Option<EdgeId>) -> EdgeId {
        let id = EdgeId(self.fresh());
        self.edges.insert(id, Edge { label, ins, outs, parent, inner_in: vec![], inner_out: vec![] });
        id
    }

    /// Adds a node with a caller-chosen identifier; used by the parser.
    pub(crate) fn insert_node(&mut self, id: NodeId, node: Node) {
        self.next = self.next.max(id.0 + 1);
        self.nodes.insert(id, node);
    }

    pub(crate) fn insert_edge(&mut self, id: EdgeId, edge: Edge) {
        self.next = self.next.max(id.0 + 1);
        self.edges.insert(id, edge);
    }

    pub fn set_inner(&mut self, e: EdgeId, inner_in: Vec<NodeId>, inner_out: Vec<NodeId>) {
        let edge = self.edges.get_mut(&e).expect("set_inner on missing edge");
        edge.inner_in = inner_in;
        edge.inner_out = inner_out;
    }

    pub fn set_left(&mut self, left: Vec<NodeId>) {
        self.left = left;
    }

    pub fn set_right(&mut self, right: Vec<NodeId>) {
        self.right = right;
    }

    pub fn left(&self) -> &[NodeId] {
        &self.left
    }

    pub fn right(&self) -> &[NodeId] {
        &self.right
    }

    pub fn node(&self, n: NodeId) -> &Node {
        &self.nodes[&n]
    }

    pub fn try_node(&self, n: NodeId) -> Option<&Node> {
        self.nodes.get(&n)
    }

    pub fn node_mut(&mut self, n: NodeId) -> &mut Node {
        self.nodes.get_mut(&n).expect("missing node")
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[&e]
    }

    pub fn try_edge(&self, e: EdgeId) -> Option<&Edge> {
        self.edges.get(&e)
    }

    pub fn edge_mut(&mut self, e: EdgeId) -> &mut Edge {
        self.edges.get_mut(&e).expect("missing edge")
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Node)> + '_ {
        self.nodes.iter().map(|(k, v)| (*k, v))
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> + '_ {
        self.edges.iter().map(|(k, v)| (*k, v))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_node(&self, n: NodeId) -> bool {
        self.nodes.contains_key(&n)
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        self.edges.contains_key(&e)
    }

    pub fn ty(&self, n: NodeId) -> &ObjectType {
        &self.nodes[&n].ty
    }

    pub fn left_types(&self) -> Vec<ObjectType> {
        self.left.iter().map(|n| self.ty(*n).clone()).collect()
    }

    pub fn right_types(&self) -> Vec<ObjectType> {
        self.right.iter().map(|n| self.ty(*n).clone()).collect()
    }

    pub fn incidence(&self) -> Incidence {
        let mut inc = Incidence::default();
        for (id, e) in &self.edges {
            for (p, n) in e.outs.iter().enumerate() {
                inc.producers.entry(*n).or_default().push((*id, p));
            }
            for (p, n) in e.ins.iter().enumerate() {
                inc.consumers.entry(*n).or_default().push((*id, p));
            }
        }
        inc
    }

    /// Nesting depth of a layer: 0 for the top level.
    pub fn depth(&self, layer: Option<EdgeId>) -> usize {
        let mut d = 0;
        let mut cur = layer;
        while let Some(e) = cur {
            d += 1;
            cur = self.edges.get(&e).and_then(|x| x.parent);
            if d > self.edges.len() + 1 {
                break;
            }
        }
        d
    }

    /// Edges whose parent is `layer`.
    pub fn layer_edges(&self, layer: Option<EdgeId>) -> Vec<EdgeId> {
        self.edges.iter().filter(|(_, e)| e.parent == layer).map(|(k, _)| *k).collect()
    }

    pub fn layer_nodes(&self, layer: Option<EdgeId>) -> Vec<NodeId> {
        self.nodes.iter().filter(|(_, n)| n.parent == layer).map(|(k, _)| *k).collect()
    }

    /// The input and output boundary of a layer.
    pub fn boundary(&self, layer: Option<EdgeId>) -> (Vec<NodeId>, Vec<NodeId>) {
        match layer {
            None => (self.left.clone(), self.right.clone()),
            Some(b) => {
                let e = &self.edges[&b];
                (e.inner_in.clone(), e.inner_out.clone())
            }
        }
    }

    /// Bubbles in the graph, listed deepest first.
    pub fn bubbles_deepest_first(&self) -> Vec<EdgeId> {
        let mut bs: Vec<(usize, EdgeId)> = self
            .edges
            .iter()
            .filter(|(_, e)| e.label == EdgeLabel::Bubble)
            .map(|(k, e)| (self.depth(e.parent), *k))
            .collect();
        bs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        bs.into_iter().map(|x| x.1).collect()
    }

    /// True when `anc` is a strict ancestor of `e`.
    pub fn is_ancestor(&self, anc: EdgeId, e: EdgeId) -> bool {
        let mut cur = self.edges.get(&e).and_then(|x| x.parent);
        let mut guard = 0;
        while let Some(p) = cur {
            if p == anc {
                return true;
            }
            cur = self.edges.get(&p).and_then(|x| x.parent);
            guard += 1;
            if guard > self.edges.len() {
                break;
            }
        }
        false
    }

    /// All edges and nodes nested (at any depth) inside bubble `b`.
    pub fn descendants(&self, b: EdgeId) -> (BTreeSet<NodeId>, BTreeSet<EdgeId>) {
        let mut es = BTreeSet::new();
        let mut stack = vec![b];
        while let Some(cur) = stack.pop() {
            for (id, e) in &self.edges {
                if e.parent == Some(cur) && es.insert(*id) {
                    stack.push(*id);
                }
            }
        }
        let mut ns = BTreeSet::new();
        for (id, n) in &self.nodes {
            if let Some(p) = n.parent {
                if p == b || es.contains(&p) {
                    ns.insert(*id);
                }
            }
        }
        (ns, es)
    }

    /// Replaces every reference to `drop` by `keep` and removes `drop`.
    pub fn merge_nodes(&mut self, keep: NodeId, drop: NodeId) {
        if keep == drop {
            return;
        }
        let sub = |v: &mut Vec<NodeId>| {
            for n in v.iter_mut() {
                if *n == drop {
                    *n = keep;
                }
            }
        };
        for e in self.edges.values_mut() {
            sub(&mut e.ins);
            sub(&mut e.outs);
            sub(&mut e.inner_in);
            sub(&mut e.inner_out);
        }
        sub(&mut self.left);
        sub(&mut self.right);
        self.nodes.remove(&drop);
    }

    pub fn remove_edge(&mut self, e: EdgeId) -> Option<Edge> {
        self.edges.remove(&e)
    }

    pub fn remove_node(&mut self, n: NodeId) {
        self.nodes.remove(&n);
    }

    /// Removes a bubble together with everything nested inside it.
    pub fn remove_edge_deep(&mut self, e: EdgeId) -> Option<Edge> {
        let (ns, es) = self.descendants(e);
        for n in ns {
            self.nodes.remove(&n);
        }
        for x in es {
            self.edges.remove(&x);
        }
        self.edges.remove(&e)
    }

    /// Moves the direct children of bubble `b` into `b`'s own layer.
    pub fn lift_children(&mut self, b: EdgeId) {
        let parent = self.edges[&b].parent;
        for n in self.nodes.values_mut() {
            if n.parent == Some(b) {
                n.parent = parent;
            }
        }
        for e in self.edges.values_mut() {
            if e.parent == Some(b) {
                e.parent = parent;
            }
        }
    }

    /// Duplicates edge `e` with fresh output nodes. Bubbles are copied
    /// together with their contents. The copy shares `e`'s input nodes;
    /// callers are responsible for restoring monogamy.
    pub fn clone_edge_deep(&mut self, e: EdgeId) -> EdgeId {
        let (ns, es) = self.descendants(e);
        let mut nmap: HashMap<NodeId, NodeId> = HashMap::new();
        let mut emap: HashMap<EdgeId, EdgeId> = HashMap::new();
        let orig = self.edges[&e].clone();
        let new_e = EdgeId(self.fresh());
        emap.insert(e, new_e);
        for x in &es {
            let id = EdgeId(self.fresh());
            emap.insert(*x, id);
        }
        for n in &ns {
            let id = NodeId(self.fresh());
            nmap.insert(*n, id);
        }
        for o in &orig.outs {
            let id = NodeId(self.fresh());
            nmap.insert(*o, id);
        }
        let mn = |n: &NodeId, nmap: &HashMap<NodeId, NodeId>| *nmap.get(n).unwrap_or(n);
        let me = |x: &Option<EdgeId>, emap: &HashMap<EdgeId, EdgeId>| x.map(|p| *emap.get(&p).unwrap_or(&p));
        for n in &ns {
            let node = self.nodes[n].clone();
            self.nodes.insert(nmap[n], Node { ty: node.ty, parent: me(&node.parent, &emap) });
        }
        for o in &orig.outs {
            let ty = self.nodes[o].ty.clone();
            self.nodes.insert(nmap[o], Node { ty, parent: orig.parent });
        }
        for x in &es {
            let ed = self.edges[x].clone();
            let copy = Edge {
                label: ed.label,
                ins: ed.ins.iter().map(|n| mn(n, &nmap)).collect(),
                outs: ed.outs.iter().map(|n| mn(n, &nmap)).collect(),
                parent: me(&ed.parent, &emap),
                inner_in: ed.inner_in.iter().map(|n| mn(n, &nmap)).collect(),
                inner_out: ed.inner_out.iter().map(|n| mn(n, &nmap)).collect(),
            };
            self.edges.insert(emap[x], copy);
        }
        let copy = Edge {
            label: orig.label.clone(),
            ins: orig.ins.clone(),
            outs: orig.outs.iter().map(|n| mn(n, &nmap)).collect(),
            parent: orig.parent,
            inner_in: orig.inner_in.iter().map(|n| mn(n, &nmap)).collect(),
            inner_out: orig.inner_out.iter().map(|n| mn(n, &nmap)).collect(),
        };
        self.edges.insert(new_e, copy);
        new_e
    }

    /// Copies every node and edge of `other` into `self` with fresh
    /// identifiers and returns the renaming. Top-level items of `other`
    /// are placed under `parent`.
    pub fn embed(&mut self, other: &Hypernet, parent: Option<EdgeId>) -> (HashMap<NodeId, NodeId>, HashMap<EdgeId, EdgeId>) {
        let mut nmap = HashMap::new();
        let mut emap = HashMap::new();
        for id in other.nodes.keys() {
            nmap.insert(*id, NodeId(self.fresh()));
        }
        for id in other.edges.keys() {
            emap.insert(*id, EdgeId(self.fresh()));
        }
        let mp = |p: &Option<EdgeId>| match p {
            None => parent,
            Some(x) => Some(emap[x]),
        };
        for (id, n) in &other.nodes {
            self.nodes.insert(nmap[id], Node { ty: n.ty.clone(), parent: mp(&n.parent) });
        }
        for (id, e) in &other.edges {
            let m = |v: &Vec<NodeId>| v.iter().map(|n| nmap[n]).collect::<Vec<_>>();
            self.edges.insert(
                emap[id],
                Edge {
                    label: e.label.clone(),
                    ins: m(&e.ins),
                    outs: m(&e.outs),
                    parent: mp(&e.parent),
                    inner_in: m(&e.inner_in),
                    inner_out: m(&e.inner_out),
                },
            );
        }
        (nmap, emap)
    }

    /// Renumbers identifiers densely in their current order.
    pub fn compacted(&self) -> Hypernet {
        let mut g = Hypernet::new();
        let (nmap, _) = g.embed(self, None);
        g.left = self.left.iter().map(|n| nmap[n]).collect();
        g.right = self.right.iter().map(|n| nmap[n]).collect();
        g
    }
}

/// Operating mode of a signature.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Flat,
    Closed,
    Unityped,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Mode::Flat => "flat-monoidal",
            Mode::Closed => "closed-monoidal",
            Mode::Unityped => "unityped",
        };
        write!(f, "{s}")
    }
}

/// A monoidal signature: sorts plus typed operations.
#[derive(Clone, Debug)]
pub struct Signature {
    pub sorts: BTreeSet<String>,
    pub ops: BTreeMap<String, (Vec<ObjectType>, Vec<ObjectType>)>,
    pub mode: Mode,
}

impl Signature {
    pub fn new(mode: Mode) -> Self {
        Signature { sorts: BTreeSet::new(), ops: BTreeMap::new(), mode }
    }

    pub fn sort(mut self, name: &str) -> Self {
        self.sorts.insert(name.to_string());
        self
    }

    pub fn op(mut self, name: &str, ar: &[&str], coar: &[&str]) -> Self {
        let p = |v: &[&str]| v.iter().map(|t| ObjectType::parse(t).expect("signature type")).collect();
        self.ops.insert(name.to_string(), (p(ar), p(coar)));
        self
    }

    /// Checks every generator edge of `g` against the declared arities.
    pub fn check(&self, g: &Hypernet) -> Result<(), GraphError> {
        for (id, e) in g.edges() {
            if let EdgeLabel::Gen(name) = &e.label {
                let (ar, coar) = self.ops.get(name).ok_or_else(|| GraphError::UnknownGenerator(name.clone()))?;
                let ins: Vec<_> = e.ins.iter().map(|n| g.ty(*n).clone()).collect();
                let outs: Vec<_> = e.outs.iter().map(|n| g.ty(*n).clone()).collect();
                if &ins != ar || &outs != coar {
                    return Err(GraphError::Invalid(format!("edge {id} does not match the arity of `{name}`")));
                }
            }
        }
        Ok(())
    }
}

/// Atomic cells that `build_atom` can interpret.
#[derive(Clone, Debug, PartialEq)]
pub enum Atom {
    Gen(String),
    Id(ObjectType),
    Sym(ObjectType, ObjectType),
    Copy(ObjectType, usize),
    Delete(ObjectType),
    Strictify(ObjectType, ObjectType),
    Destrictify(ObjectType, ObjectType),
    Eval(ObjectType, ObjectType),
    Iota(ObjectType),
    Rho(ObjectType),
}

/// Interprets a single atom as a one-cell hypernet.
pub fn build_atom(sig: &Signature, atom: &Atom) -> Result<Hypernet, GraphError> {
    let mut g = Hypernet::new();
    let closed_only = |what: &str| -> Result<(), GraphError> {
        if sig.mode == Mode::Flat {
            Err(GraphError::ModeMismatch { atom: what.to_string(), mode: sig.mode.to_string() })
        } else {
            Ok(())
        }
    };
    let cell = |g: &mut Hypernet, label: EdgeLabel, ins: Vec<ObjectType>, outs: Vec<ObjectType>| {
        let i: Vec<_> = ins.into_iter().map(|t| g.add_node(t, None)).collect();
        let o: Vec<_> = outs.into_iter().map(|t| g.add_node(t, None)).collect();
        g.add_edge(label, i.clone(), o.clone(), None);
        g.left = i;
        g.right = o;
    };
    match atom {
        Atom::Gen(name) => {
            if EdgeLabel::is_reserved(name) {
                return Err(GraphError::ReservedName(name.clone()));
            }
            let (ar, coar) = sig.ops.get(name).ok_or_else(|| GraphError::UnknownGenerator(name.clone()))?;
            cell(&mut g, EdgeLabel::Gen(name.clone()), ar.clone(), coar.clone());
        }
        Atom::Id(a) => {
            let n = g.add_node(a.clone(), None);
            g.left = vec![n];
            g.right = vec![n];
        }
        Atom::Sym(a, b) => {
            let x = g.add_node(a.clone(), None);
            let y = g.add_node(b.clone(), None);
            g.left = vec![x, y];
            g.right = vec![y, x];
        }
        Atom::Copy(a, n) => cell(&mut g, EdgeLabel::Copy(*n), vec![a.clone()], vec![a.clone(); *n]),
        Atom::Delete(a) => cell(&mut g, EdgeLabel::Delete, vec![a.clone()], vec![]),
        Atom::Strictify(a, b) => cell(
            &mut g,
            EdgeLabel::Strictify,
            vec![a.clone(), b.clone()],
            vec![ObjectType::tensor(a.clone(), b.clone())],
        ),
        Atom::Destrictify(a, b) => cell(
            &mut g,
            EdgeLabel::Destrictify,
            vec![ObjectType::tensor(a.clone(), b.clone())],
            vec![a.clone(), b.clone()],
        ),
        Atom::Eval(a, b) => {
            closed_only("eval")?;
            cell(&mut g, EdgeLabel::Eval, vec![ObjectType::arrow(a.clone(), b.clone()), a.clone()], vec![b.clone()]);
        }
        Atom::Iota(u) => {
            if sig.mode != Mode::Unityped {
                return Err(GraphError::ModeMismatch { atom: "retract-iota".into(), mode: sig.mode.to_string() });
            }
            cell(&mut g, EdgeLabel::Iota, vec![u.clone()], vec![ObjectType::arrow(u.clone(), u.clone())]);
        }
        Atom::Rho(u) => {
            if sig.mode != Mode::Unityped {
                return Err(GraphError::ModeMismatch { atom: "retract-rho".into(), mode: sig.mode.to_string() });
            }
            cell(&mut g, EdgeLabel::Rho, vec![ObjectType::arrow(u.clone(), u.clone())], vec![u.clone()]);
        }
    }
    Ok(g)
}

/// The empty hypernet, unit of the tensor.
pub fn empty() -> Hypernet {
    Hypernet::new()
}

/// Sequential composition: glues `g`'s right interface to `h`'s left.
pub fn compose_seq(g: &Hypernet, h: &Hypernet) -> Result<Hypernet, GraphError> {
    if g.right.len() != h.left.len() {
        return Err(GraphError::InterfaceLength { left: g.right.len(), right: h.left.len() });
    }
    for (i, (a, b)) in g.right.iter().zip(&h.left).enumerate() {
        if g.ty(*a) != h.ty(*b) {
            return Err(GraphError::InterfaceType { pos: i, left: g.ty(*a).clone(), right: h.ty(*b).clone() });
        }
    }
    let mut out = g.clone();
    let (nmap, _) = out.embed(h, None);
    let mut right: Vec<NodeId> = h.right.iter().map(|n| nmap[n]).collect();
    // Glue pairwise; a glued node may already have been renamed.
    let mut renamed: HashMap<NodeId, NodeId> = HashMap::new();
    let resolve = |mut n: NodeId, renamed: &HashMap<NodeId, NodeId>| {
        while let Some(m) = renamed.get(&n) {
            n = *m;
        }
        n
    };
    for (a, b) in g.right.iter().zip(&h.left) {
        let keep = resolve(*a, &renamed);
        let drop = resolve(nmap[b], &renamed);
        if keep != drop {
            out.merge_nodes(keep, drop);
            renamed.insert(drop, keep);
        }
    }
    for n in right.iter_mut() {
        *n = resolve(*n, &renamed);
    }
    out.left = g.left.iter().map(|n| resolve(*n, &renamed)).collect();
    out.right = right;
    Ok(out)
}

/// Monoidal product: disjoint union with concatenated interfaces.
pub fn compose_tensor(g: &Hypernet, h: &Hypernet) -> Hypernet {
    let mut out = g.clone();
    let (nmap, _) = out.embed(h, None);
    out.left.extend(h.left.iter().map(|n| nmap[n]));
    out.right.extend(h.right.iter().map(|n| nmap[n]));
    out
}

/// Identity hypernet on a list of wire types.
pub fn identity(types: &[ObjectType]) -> Hypernet {
    let mut g = Hypernet::new();
    let ns: Vec<_> = types.iter().map(|t| g.add_node(t.clone(), None)).collect();
    g.left = ns.clone();
    g.right = ns;
    g
}
