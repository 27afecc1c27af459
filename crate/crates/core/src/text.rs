//! Canonical line-oriented text format for hypernets.
//!
//! ```text
//! node 0 : U
//! edge 1 : eval in=[0,2] out=[3]
//! parent 4 1
//! inner 1 in=[4] out=[4]
//! left=[]
//! right=[3]
//! ```

use std::fmt::Write as _;

use crate::error::ParseError;
use crate::graph::{Edge, EdgeId, EdgeLabel, Hypernet, Node, NodeId};
use crate::types::ObjectType;

fn ids<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn print_hypernet(g: &Hypernet) -> String {
    let mut s = String::new();
    for (id, n) in g.nodes() {
        let _ = writeln!(s, "node {id} : {}", n.ty);
    }
    for (id, e) in g.edges() {
        let _ = writeln!(s, "edge {id} : {} in=[{}] out=[{}]", e.label, ids(&e.ins), ids(&e.outs));
    }
    for (id, n) in g.nodes() {
        if let Some(p) = n.parent {
            let _ = writeln!(s, "parent {id} {p}");
        }
    }
    for (id, e) in g.edges() {
        if let Some(p) = e.parent {
            let _ = writeln!(s, "parent {id} {p}");
        }
    }
    for (id, e) in g.edges() {
        if e.label == EdgeLabel::Bubble {
            let _ = writeln!(s, "inner {id} in=[{}] out=[{}]", ids(&e.inner_in), ids(&e.inner_out));
        }
    }
    let _ = writeln!(s, "left=[{}]", ids(g.left()));
    let _ = writeln!(s, "right=[{}]", ids(g.right()));
    s
}

fn parse_list(line: usize, s: &str, key: &str) -> Result<Vec<u32>, ParseError> {
    let body = s
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix("=["))
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| ParseError::new(line, 1, format!("expected `{key}=[...]`, found `{s}`")))?;
    if body.trim().is_empty() {
        return Ok(vec![]);
    }
    body.split(',')
        .map(|x| x.trim().parse::<u32>().map_err(|_| ParseError::new(line, 1, format!("bad identifier `{x}`"))))
        .collect()
}

fn parse_id(line: usize, s: Option<&str>) -> Result<u32, ParseError> {
    let s = s.ok_or_else(|| ParseError::new(line, 1, "missing identifier"))?;
    s.parse().map_err(|_| ParseError::new(line, 1, format!("bad identifier `{s}`")))
}

/// Parses the canonical format. Blank lines and lines starting with `#`
/// are ignored. Unknown references are reported as errors.
pub fn parse_hypernet(text: &str) -> Result<Hypernet, ParseError> {
    let mut g = Hypernet::new();
    let mut parents: Vec<(usize, u32, u32)> = Vec::new();
    let mut inners: Vec<(usize, u32, Vec<u32>, Vec<u32>)> = Vec::new();
    let mut left = None;
    let mut right = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if let Some(rest) = l.strip_prefix("node ") {
            let (id, ty) = rest.split_once(" : ").ok_or_else(|| ParseError::new(line, 1, "expected `node <id> : <type>`"))?;
            let id = parse_id(line, Some(id.trim()))?;
            let ty = ObjectType::parse(ty.trim()).map_err(|e| ParseError::new(line, e.col, e.msg))?;
            if g.contains_node(NodeId(id)) || g.contains_edge(EdgeId(id)) {
                return Err(ParseError::new(line, 1, format!("duplicate identifier {id}")));
            }
            g.insert_node(NodeId(id), Node { ty, parent: None });
        } else if let Some(rest) = l.strip_prefix("edge ") {
            let (id, rest) = rest.split_once(" : ").ok_or_else(|| ParseError::new(line, 1, "expected `edge <id> : ...`"))?;
            let id = parse_id(line, Some(id.trim()))?;
            let mut parts = rest.split_whitespace();
            let label = parts.next().ok_or_else(|| ParseError::new(line, 1, "missing edge label"))?;
            let ins = parse_list(line, parts.next().unwrap_or(""), "in")?;
            let outs = parse_list(line, parts.next().unwrap_or(""), "out")?;
            if parts.next().is_some() {
                return Err(ParseError::new(line, 1, "trailing input after edge"));
            }
            if g.contains_node(NodeId(id)) || g.contains_edge(EdgeId(id)) {
                return Err(ParseError::new(line, 1, format!("duplicate identifier {id}")));
            }
            g.insert_edge(
                EdgeId(id),
                Edge {
                    label: EdgeLabel::parse(label),
                    ins: ins.into_iter().map(NodeId).collect(),
                    outs: outs.into_iter().map(NodeId).collect(),
                    parent: None,
                    inner_in: vec![],
                    inner_out: vec![],
                },
            );
        } else if let Some(rest) = l.strip_prefix("parent ") {
            let mut p = rest.split_whitespace();
            let child = parse_id(line, p.next())?;
            let par = parse_id(line, p.next())?;
            parents.push((line, child, par));
        } else if let Some(rest) = l.strip_prefix("inner ") {
            let mut p = rest.split_whitespace();
            let e = parse_id(line, p.next())?;
            let ins = parse_list(line, p.next().unwrap_or(""), "in")?;
            let outs = parse_list(line, p.next().unwrap_or(""), "out")?;
            inners.push((line, e, ins, outs));
        } else if l.starts_with("left=") {
            left = Some(parse_list(line, l, "left")?);
        } else if l.starts_with("right=") {
            right = Some(parse_list(line, l, "right")?);
        } else {
            return Err(ParseError::new(line, 1, format!("unrecognised record `{l}`")));
        }
    }
    for (line, child, par) in parents {
        if !g.contains_edge(EdgeId(par)) {
            return Err(ParseError::new(line, 1, format!("parent {par} is not an edge")));
        }
        if g.contains_node(NodeId(child)) {
            g.node_mut(NodeId(child)).parent = Some(EdgeId(par));
        } else if g.contains_edge(EdgeId(child)) {
            g.edge_mut(EdgeId(child)).parent = Some(EdgeId(par));
        } else {
            return Err(ParseError::new(line, 1, format!("unknown identifier {child}")));
        }
    }
    for (line, e, ins, outs) in inners {
        if !g.contains_edge(EdgeId(e)) {
            return Err(ParseError::new(line, 1, format!("inner record for unknown edge {e}")));
        }
        g.set_inner(EdgeId(e), ins.into_iter().map(NodeId).collect(), outs.into_iter().map(NodeId).collect());
    }
    g.set_left(left.unwrap_or_default().into_iter().map(NodeId).collect());
    g.set_right(right.unwrap_or_default().into_iter().map(NodeId).collect());
    let edges: Vec<EdgeId> = g.edges().map(|(id, _)| id).collect();
    for e in edges {
        let ed = g.edge(e);
        for n in ed.ins.iter().chain(&ed.outs).chain(&ed.inner_in).chain(&ed.inner_out) {
            if !g.contains_node(*n) {
                return Err(ParseError::new(0, 0, format!("edge {e} references unknown node {n}")));
            }
        }
    }
    for n in g.left().iter().chain(g.right()) {
        if !g.contains_node(*n) {
            return Err(ParseError::new(0, 0, format!("interface references unknown node {n}")));
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let text = "node 0 : U\nnode 2 : U -o U\nnode 3 : U\nedge 1 : bubble in=[] out=[2]\nedge 4 : retract-rho in=[2] out=[3]\nparent 0 1\ninner 1 in=[0] out=[0]\nleft=[]\nright=[3]\n";
        let g = parse_hypernet(text).unwrap();
        assert_eq!(print_hypernet(&g), text);
    }

    #[test]
    fn unknown_reference_is_an_error() {
        assert!(parse_hypernet("edge 1 : f in=[7] out=[]\n").is_err());
        assert!(parse_hypernet("node 0 : U\nparent 0 9\n").is_err());
        assert!(parse_hypernet("bogus\n").is_err());
    }
}
