//! Graphviz output.

use std::fmt::Write as _;

use hypernet::machine::Token;
use hypernet::{EdgeId, EdgeLabel, Hypernet};

fn escape(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if matches!(c, '{' | '}' | '|' | '<' | '>' | '"' | '\\' | ' ') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

fn ports(prefix: char, n: usize) -> String {
    (0..n).map(|i| format!("<{prefix}{i}>")).collect::<Vec<_>>().join("|")
}

fn record(label: &str, ins: usize, outs: usize) -> String {
    let mut parts = Vec::new();
    if ins > 0 {
        parts.push(format!("{{{}}}", ports('i', ins)));
    }
    parts.push(escape(label));
    if outs > 0 {
        parts.push(format!("{{{}}}", ports('o', outs)));
    }
    parts.join("|")
}

fn layer(g: &Hypernet, at: Option<EdgeId>, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    for n in g.layer_nodes(at) {
        let _ = writeln!(out, "{pad}n{n} [shape=point, xlabel=\"{}\"];", g.ty(n).to_string().replace('"', "\\\""));
    }
    for e in g.layer_edges(at) {
        let edge = g.edge(e);
        if edge.label == EdgeLabel::Bubble {
            let _ = writeln!(out, "{pad}subgraph cluster_e{e} {{");
            let _ = writeln!(out, "{pad}  style=rounded;");
            let _ = writeln!(out, "{pad}  e{e} [shape=record, label=\"{}\"];", record("λ", edge.ins.len(), 1));
            layer(g, Some(e), indent + 1, out);
            let _ = writeln!(out, "{pad}}}");
        } else {
            let label = record(&edge.label.to_string(), edge.ins.len(), edge.outs.len());
            let _ = writeln!(out, "{pad}e{e} [shape=record, label=\"{label}\"];");
        }
    }
}

/// DOT text for `g`, with the machine token drawn when given.
pub fn render(g: &Hypernet, token: Option<Token>) -> String {
    let mut out = String::from("digraph hypernet {\n  rankdir=LR;\n  compound=true;\n");
    layer(g, None, 1, &mut out);
    for (side, rank, nodes) in [("in", "source", g.left()), ("out", "sink", g.right())] {
        let names: Vec<String> = (0..nodes.len()).map(|i| format!("{side}{i}")).collect();
        for name in &names {
            let _ = writeln!(out, "  {name} [shape=plaintext, label=\"{name}\"];");
        }
        if !names.is_empty() {
            let _ = writeln!(out, "  {{ rank={rank}; {}; }}", names.join("; "));
        }
    }
    for (i, n) in g.left().iter().enumerate() {
        let _ = writeln!(out, "  in{i} -> n{n};");
    }
    for (i, n) in g.right().iter().enumerate() {
        let _ = writeln!(out, "  n{n} -> out{i};");
    }
    for (id, e) in g.edges() {
        for (i, n) in e.ins.iter().enumerate() {
            let _ = writeln!(out, "  n{n} -> e{id}:i{i};");
        }
        for (i, n) in e.outs.iter().enumerate() {
            let _ = writeln!(out, "  e{id}:o{i} -> n{n};");
        }
        if e.label == EdgeLabel::Bubble {
            for (i, n) in e.inner_in.iter().enumerate() {
                let _ = writeln!(out, "  e{id} -> n{n} [style=dotted, taillabel=\"{i}\"];");
            }
            for (i, n) in e.inner_out.iter().enumerate() {
                let _ = writeln!(out, "  n{n} -> e{id} [style=dotted, headlabel=\"{i}\"];");
            }
        }
    }
    if let Some(t) = token {
        let _ = writeln!(out, "  token [shape=triangle, label=\"{}\"];", t.dir);
        let _ = writeln!(out, "  token -> n{} [style=dashed, arrowhead=none];", t.wire);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use hypernet::{identity, parse, translate_untyped, ObjectType};

    #[test]
    fn identity_is_one_point_between_anchors() {
        let dot = render(&identity(&[ObjectType::base("A")]), None);
        assert_eq!(dot.matches("shape=point").count(), 1);
        assert_eq!(dot.matches("shape=plaintext").count(), 2);
        assert!(dot.contains("rank=source") && dot.contains("rank=sink"));
    }

    #[test]
    fn omega_has_two_clusters() {
        let g = translate_untyped(&parse(r"(\x. x x) (\x. x x)").unwrap());
        let dot = render(&g, None);
        assert_eq!(dot.matches("subgraph cluster_").count(), 2);
        assert!(dot.contains("|eval|"));
        assert!(!dot.contains("token"));
    }

    #[test]
    fn escaping() {
        assert_eq!(record("a|b", 1, 0), "{<i0>}|a\\|b");
    }
}
