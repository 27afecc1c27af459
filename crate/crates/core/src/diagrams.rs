//! Small hand-built diagrams: binary trees and their shared form, the
//! boolean circuit and sorting networks with their rule sets, and two
//! rewriting scenarios.

use crate::graph::{build_atom, compose_seq, compose_tensor, identity, Atom, EdgeLabel, Hypernet, EdgeId, Mode, NodeId, Signature};
use crate::rewrite::{Matching, RewriteRule};
use crate::text::parse_hypernet;
use crate::types::ObjectType;

/// Sort `T` with `emp : 0 -> T` and `node1..node4 : T T -> T`.
pub fn tree_signature() -> Signature {
    let mut s = Signature::new(Mode::Flat).sort("T").op("emp", &[], &["T"]);
    for k in 1..=4 {
        s = s.op(&format!("node{k}"), &["T", "T"], &["T"]);
    }
    s
}

/// Complete binary tree of the given height over `tree_signature`. Level
/// `k` from the root holds `node{k}`; leaves are created first.
pub fn tree(height: usize) -> Hypernet {
    let t = ObjectType::base("T");
    let mut g = Hypernet::new();
    let mut level: Vec<NodeId> = (0..1 << height)
        .map(|_| {
            let o = g.add_node(t.clone(), None);
            g.add_edge(EdgeLabel::gen("emp"), vec![], vec![o], None);
            o
        })
        .collect();
    for k in (1..=height).rev() {
        level = level
            .chunks(2)
            .map(|p| {
                let o = g.add_node(t.clone(), None);
                g.add_edge(EdgeLabel::gen(&format!("node{k}")), p.to_vec(), vec![o], None);
                o
            })
            .collect();
    }
    g.set_right(level);
    g
}

/// The minimal DAG with the same paths as `tree(height)`: two leaves, then
/// one node per level whose output is copied into both children slots.
pub fn shared_tree(height: usize) -> Hypernet {
    let t = ObjectType::base("T");
    let mut g = Hypernet::new();
    let mut top = Vec::new();
    for _ in 0..2 {
        let o = g.add_node(t.clone(), None);
        g.add_edge(EdgeLabel::gen("emp"), vec![], vec![o], None);
        top.push(o);
    }
    for k in (1..=height).rev() {
        let o = g.add_node(t.clone(), None);
        g.add_edge(EdgeLabel::gen(&format!("node{k}")), top, vec![o], None);
        if k == 1 {
            g.set_right(vec![o]);
            break;
        }
        let (x, y) = (g.add_node(t.clone(), None), g.add_node(t.clone(), None));
        g.add_edge(EdgeLabel::Copy(2), vec![o], vec![x, y], None);
        top = vec![x, y];
    }
    g
}

fn atom(sig: &Signature, name: &str) -> Hypernet {
    build_atom(sig, &Atom::Gen(name.to_string())).expect("generator is declared")
}

fn seq(a: &Hypernet, b: &Hypernet) -> Hypernet {
    compose_seq(a, b).expect("interfaces agree")
}

/// Sort `Bool` with constants `t`, `f` and binary `and`, `or`.
pub fn boolean_signature() -> Signature {
    Signature::new(Mode::Flat)
        .sort("Bool")
        .op("t", &[], &["Bool"])
        .op("f", &[], &["Bool"])
        .op("and", &["Bool", "Bool"], &["Bool"])
        .op("or", &["Bool", "Bool"], &["Bool"])
}

/// `t ⊗ (f ⊗ t) ; ((id ⊗ f ; and) ⊗ or) ; or`
pub fn boolean_circuit() -> Hypernet {
    let s = boolean_signature();
    let consts = compose_tensor(&atom(&s, "t"), &compose_tensor(&atom(&s, "f"), &atom(&s, "t")));
    let conj = seq(&compose_tensor(&identity(&[ObjectType::base("Bool")]), &atom(&s, "f")), &atom(&s, "and"));
    let mid = compose_tensor(&conj, &atom(&s, "or"));
    seq(&seq(&consts, &mid), &atom(&s, "or"))
}

/// One rule per row of the truth tables of `and` and `or`.
pub fn boolean_rules() -> Vec<RewriteRule> {
    let s = boolean_signature();
    let mut rules = Vec::new();
    for op in ["and", "or"] {
        for a in [true, false] {
            for b in [true, false] {
                let v = if op == "and" { a && b } else { a || b };
                let name = |x: bool| if x { "t" } else { "f" };
                let lhs = seq(&compose_tensor(&atom(&s, name(a)), &atom(&s, name(b))), &atom(&s, op));
                let rhs = atom(&s, name(v));
                rules.push(RewriteRule::new(&format!("{op}-{}{}", name(a), name(b)), lhs, rhs).expect("rule"));
            }
        }
    }
    rules
}

/// Sort `N` with constants `k1..k{max}` and the two-input sorter `s2`.
pub fn sorting_signature(max: u32) -> Signature {
    let mut s = Signature::new(Mode::Flat).sort("N").op("s2", &["N", "N"], &["N", "N"]);
    for i in 1..=max {
        s = s.op(&format!("k{i}"), &[], &["N"]);
    }
    s
}

/// `k_{v0} ⊗ k_{v1} ⊗ ...`
pub fn constants(sig: &Signature, values: &[u32]) -> Hypernet {
    values.iter().fold(Hypernet::new(), |g, v| compose_tensor(&g, &atom(sig, &format!("k{v}"))))
}

/// Insertion network on `n` wires: sort the first `n - 1`, then insert the
/// last one.
pub fn insertion_sorter(sig: &Signature, n: usize) -> Hypernet {
    let n_ty = ObjectType::base("N");
    if n <= 1 {
        return identity(&vec![n_ty; n]);
    }
    let prefix = compose_tensor(&insertion_sorter(sig, n - 1), &identity(&[n_ty]));
    seq(&prefix, &insert(sig, n))
}

fn insert(sig: &Signature, n: usize) -> Hypernet {
    let n_ty = ObjectType::base("N");
    let s2 = atom(sig, "s2");
    if n == 2 {
        return s2;
    }
    let low = compose_tensor(&identity(&vec![n_ty.clone(); n - 2]), &s2);
    seq(&low, &compose_tensor(&insert(sig, n - 1), &identity(&[n_ty])))
}

/// `k_i ⊗ k_j ; s2` rewrites to the pair with the larger constant first.
pub fn sorting_rules(max: u32) -> Vec<RewriteRule> {
    let s = sorting_signature(max);
    let mut rules = Vec::new();
    for i in 1..=max {
        for j in 1..=max {
            let lhs = seq(&constants(&s, &[i, j]), &atom(&s, "s2"));
            let rhs = constants(&s, &[i.max(j), i.min(j)]);
            rules.push(RewriteRule::new(&format!("s2-{i}-{j}"), lhs, rhs).expect("rule"));
        }
    }
    rules
}

/// Labels of the nullary generators feeding the outputs, when the graph
/// consists of nothing else.
pub fn output_constants(g: &Hypernet) -> Option<Vec<String>> {
    if g.edge_count() != g.right().len() {
        return None;
    }
    let inc = g.incidence();
    g.right()
        .iter()
        .map(|n| {
            let (e, _) = inc.producer(*n)?;
            let ed = g.edge(e);
            match &ed.label {
                EdgeLabel::Gen(name) if ed.ins.is_empty() => Some(name.clone()),
                _ => None,
            }
        })
        .collect()
}

/// A rule, a graph holding one redex for it, and the rewritten graph.
pub struct RewriteExample {
    pub rule: RewriteRule,
    pub graph: Hypernet,
    pub expected: Hypernet,
}

fn graph(text: &str) -> Hypernet {
    parse_hypernet(text).expect("fixture parses")
}

/// Rule `f ⊗ g ⇝ k` with `f : C -> A`, `g : B -> C`, `k : C B -> A C`.
/// The graph takes its inputs as `B, C`, so in term syntax the redex only
/// appears after a symmetry; it also has a second `g` reachable from `f`
/// through `h : A -> B`, which gives a non-convex candidate.
pub fn redex_example() -> RewriteExample {
    let lhs = graph(
        "node 0 : C\nnode 1 : A\nnode 2 : B\nnode 3 : C\n\
         edge 4 : f in=[0] out=[1]\nedge 5 : g in=[2] out=[3]\nleft=[0,2]\nright=[1,3]\n",
    );
    let rhs = graph("node 0 : C\nnode 1 : B\nnode 2 : A\nnode 3 : C\nedge 4 : k in=[0,1] out=[2,3]\nleft=[0,1]\nright=[2,3]\n");
    let t = graph(
        "node 0 : B\nnode 1 : C\nnode 2 : A\nnode 3 : B\nnode 4 : C\nnode 5 : C\n\
         edge 6 : f in=[1] out=[2]\nedge 7 : h in=[2] out=[3]\nedge 8 : g in=[3] out=[4]\nedge 9 : g in=[0] out=[5]\n\
         left=[0,1]\nright=[4,5]\n",
    );
    let expected = graph(
        "node 0 : B\nnode 1 : C\nnode 2 : A\nnode 3 : B\nnode 4 : C\nnode 5 : C\n\
         edge 6 : k in=[1,0] out=[2,5]\nedge 7 : h in=[2] out=[3]\nedge 8 : g in=[3] out=[4]\n\
         left=[0,1]\nright=[4,5]\n",
    );
    RewriteExample { rule: RewriteRule::new("fg-to-k", lhs, rhs).expect("rule"), graph: t, expected }
}

/// The embedding of the `redex_example` lhs onto `f` and the `g` behind
/// `h`: the region contains the `A` and `B` wires around `h` but not `h`.
pub fn redex_non_convex() -> Matching {
    let n = |a: u32, b: u32| (NodeId(a), NodeId(b));
    let e = |a: u32, b: u32| (EdgeId(a), EdgeId(b));
    Matching {
        rule: "fg-to-k".into(),
        nodes: [n(0, 1), n(1, 2), n(2, 3), n(3, 4)].into_iter().collect(),
        edges: [e(4, 6), e(5, 8)].into_iter().collect(),
        layer: None,
    }
}

/// Slide rule: `f : A -> B` applied to a captured wire moves out of the
/// bubble. The graph holds the redex one layer down, inside another
/// abstraction.
pub fn slide_example() -> RewriteExample {
    let lhs = graph(
        "node 0 : A\nnode 1 : C -o D\nnode 3 : A\nnode 4 : C\nnode 5 : B\nnode 6 : D\n\
         edge 2 : bubble in=[0] out=[1]\nedge 7 : f in=[3] out=[5]\nedge 8 : g in=[5,4] out=[6]\n\
         parent 3 2\nparent 4 2\nparent 5 2\nparent 6 2\nparent 7 2\nparent 8 2\n\
         inner 2 in=[3,4] out=[6]\nleft=[0]\nright=[1]\n",
    );
    let rhs = graph(
        "node 0 : A\nnode 1 : C -o D\nnode 2 : B\nnode 5 : B\nnode 6 : C\nnode 7 : D\n\
         edge 3 : f in=[0] out=[2]\nedge 4 : bubble in=[2] out=[1]\nedge 8 : g in=[5,6] out=[7]\n\
         parent 5 4\nparent 6 4\nparent 7 4\nparent 8 4\n\
         inner 4 in=[5,6] out=[7]\nleft=[0]\nright=[1]\n",
    );
    let t = graph(
        "node 0 : A -o C -o D\nnode 2 : A\nnode 3 : C -o D\nnode 5 : A\nnode 6 : C\nnode 7 : B\nnode 8 : D\n\
         edge 1 : bubble in=[] out=[0]\nedge 4 : bubble in=[2] out=[3]\nedge 9 : f in=[5] out=[7]\nedge 10 : g in=[7,6] out=[8]\n\
         parent 2 1\nparent 3 1\nparent 4 1\nparent 5 4\nparent 6 4\nparent 7 4\nparent 8 4\nparent 9 4\nparent 10 4\n\
         inner 1 in=[2] out=[3]\ninner 4 in=[5,6] out=[8]\nleft=[]\nright=[0]\n",
    );
    let expected = graph(
        "node 0 : A -o C -o D\nnode 2 : A\nnode 3 : C -o D\nnode 4 : B\nnode 7 : B\nnode 8 : C\nnode 9 : D\n\
         edge 1 : bubble in=[] out=[0]\nedge 5 : f in=[2] out=[4]\nedge 6 : bubble in=[4] out=[3]\nedge 10 : g in=[7,8] out=[9]\n\
         parent 2 1\nparent 3 1\nparent 4 1\nparent 5 1\nparent 6 1\nparent 7 6\nparent 8 6\nparent 9 6\nparent 10 6\n\
         inner 1 in=[2] out=[3]\ninner 6 in=[7,8] out=[9]\nleft=[]\nright=[0]\n",
    );
    RewriteExample { rule: RewriteRule::new("slide", lhs, rhs).expect("rule"), graph: t, expected }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::is_valid;

    #[test]
    fn fixtures_are_valid() {
        for g in [tree(3), shared_tree(3), boolean_circuit()] {
            assert!(is_valid(&g));
        }
        let s = sorting_signature(5);
        for n in 1..=5 {
            let g = insertion_sorter(&s, n);
            assert!(is_valid(&g));
            assert_eq!(g.left().len(), n);
            assert_eq!(g.edges().count(), n * (n - 1) / 2);
        }
        for ex in [redex_example(), slide_example()] {
            assert!(is_valid(&ex.graph) && is_valid(&ex.expected));
        }
        assert_eq!(boolean_rules().len(), 8);
        assert_eq!(sorting_rules(3).len(), 9);
    }

    #[test]
    fn output_constants_reads_values() {
        let s = sorting_signature(3);
        assert_eq!(output_constants(&constants(&s, &[3, 1])), Some(vec!["k3".to_string(), "k1".to_string()]));
        assert_eq!(output_constants(&boolean_circuit()), None);
    }
}
