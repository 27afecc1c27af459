//! Terms to hypernets.
//!
//! Variables are wires. Each binder owns a source node; occurrences create
//! placeholder nodes that are joined to the source once the scope is
//! complete: no use becomes a `delete`, one use a plain wire, several uses
//! one n-ary `copy`. Abstractions become bubbles whose inner input
//! interface lists the captured variables (in order of first occurrence)
//! followed by the bound variable.

use std::fmt;

use crate::graph::{EdgeId, EdgeLabel, Hypernet, NodeId};
use crate::prim::{Const, PrimOp};
use crate::simplify::simplify;
use crate::term::Term;
use crate::types::ObjectType;

#[derive(Clone, Debug, PartialEq)]
pub struct TranslateError {
    pub msg: String,
    pub subterm: String,
}

impl fmt::Display for TranslateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in `{}`", self.msg, self.subterm)
    }
}

impl std::error::Error for TranslateError {}

fn err<T>(msg: impl Into<String>, t: &Term) -> Result<T, TranslateError> {
    Err(TranslateError { msg: msg.into(), subterm: t.to_string() })
}

/// Ordered typing context `x1: T1, ..., xk: Tk`.
pub type Context = Vec<(String, ObjectType)>;

pub fn int_ty() -> ObjectType {
    ObjectType::base("Int")
}

pub fn bool_ty() -> ObjectType {
    ObjectType::base("Bool")
}

pub fn real_ty() -> ObjectType {
    ObjectType::base("Real")
}

struct Binding {
    source: NodeId,
    uses: Vec<NodeId>,
    layer: Option<EdgeId>,
}

struct Tx {
    g: Hypernet,
    typed: bool,
    bindings: Vec<Binding>,
}

type Env = Vec<(String, usize)>;

/// Free variables in order of first occurrence (left to right).
pub fn free_vars_ordered(t: &Term) -> Vec<String> {
    fn go(t: &Term, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match t {
            Term::Var(x) => {
                if !bound.contains(x) && !out.contains(x) {
                    out.push(x.clone());
                }
            }
            Term::Const(_) => {}
            Term::Lam(x, _, b) => {
                bound.push(x.clone());
                go(b, bound, out);
                bound.pop();
            }
            Term::PairLam(x, y, _, b) => {
                bound.push(x.clone());
                bound.push(y.clone());
                go(b, bound, out);
                bound.truncate(bound.len() - 2);
            }
            Term::Let(x, a, b) => {
                go(a, bound, out);
                bound.push(x.clone());
                go(b, bound, out);
                bound.pop();
            }
            Term::Rec(b) => go(b, bound, out),
            Term::App(a, b) | Term::Pair(a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            Term::Prim(_, args) => args.iter().for_each(|a| go(a, bound, out)),
            Term::Ite(a, b, c) => {
                go(a, bound, out);
                go(b, bound, out);
                go(c, bound, out);
            }
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// Typing of primitive operations in typed mode.
pub fn prim_signature(op: PrimOp, args: &[ObjectType]) -> Option<ObjectType> {
    let num = |t: &ObjectType| *t == int_ty() || *t == real_ty();
    match op {
        PrimOp::Add | PrimOp::Sub | PrimOp::Mul => {
            (args.len() == 2 && num(&args[0]) && args[0] == args[1]).then(|| args[0].clone())
        }
        PrimOp::Neg => (args.len() == 1 && num(&args[0])).then(|| args[0].clone()),
        PrimOp::And | PrimOp::Or => (args.len() == 2 && args.iter().all(|a| *a == bool_ty())).then(bool_ty),
        PrimOp::Not => (args.len() == 1 && args[0] == bool_ty()).then(bool_ty),
        PrimOp::Leq => (args.len() == 2 && num(&args[0]) && args[0] == args[1]).then(bool_ty),
        PrimOp::Eq => {
            (args.len() == 2 && args[0] == args[1] && (num(&args[0]) || args[0] == bool_ty())).then(bool_ty)
        }
    }
}

pub fn const_type(c: &Const) -> ObjectType {
    match c {
        Const::Int(_) => int_ty(),
        Const::Bool(_) => bool_ty(),
        Const::Real(_) => real_ty(),
        Const::Unit => ObjectType::Unit,
    }
}

impl Tx {
    fn u(&self) -> ObjectType {
        ObjectType::u()
    }

    fn fun_u(&self) -> ObjectType {
        ObjectType::arrow(ObjectType::u(), ObjectType::u())
    }

    fn bind(&mut self, source: NodeId, layer: Option<EdgeId>) -> usize {
        self.bindings.push(Binding { source, uses: vec![], layer });
        self.bindings.len() - 1
    }

    fn use_var(&mut self, b: usize, layer: Option<EdgeId>) -> NodeId {
        let ty = self.g.ty(self.bindings[b].source).clone();
        let n = self.g.add_node(ty, layer);
        self.bindings[b].uses.push(n);
        n
    }

    /// Joins the uses of binding `b` to its source. Returns the node a
    /// single use was merged into the source, if any.
    fn close(&mut self, b: usize) -> Option<NodeId> {
        let Binding { source, uses, layer } = std::mem::replace(
            &mut self.bindings[b],
            Binding { source: NodeId(u32::MAX), uses: vec![], layer: None },
        );
        match uses.len() {
            0 => {
                self.g.add_edge(EdgeLabel::Delete, vec![source], vec![], layer);
                None
            }
            1 => {
                self.g.merge_nodes(source, uses[0]);
                Some(uses[0])
            }
            n => {
                self.g.add_edge(EdgeLabel::Copy(n), vec![source], uses, layer);
                None
            }
        }
    }

    fn lookup(env: &Env, x: &str) -> Option<usize> {
        env.iter().rev().find(|(n, _)| n == x).map(|(_, b)| *b)
    }

    fn node(&mut self, ty: ObjectType, layer: Option<EdgeId>) -> NodeId {
        self.g.add_node(ty, layer)
    }

    fn cell(&mut self, label: EdgeLabel, ins: Vec<NodeId>, ty: ObjectType, layer: Option<EdgeId>) -> NodeId {
        let out = self.node(ty, layer);
        self.g.add_edge(label, ins, vec![out], layer);
        out
    }

    fn ty_of(&self, n: NodeId) -> ObjectType {
        self.g.ty(n).clone()
    }

    /// A bubble binding `bound` (name, type) over `body`. Returns the
    /// bubble's output node, typed `fold(bound) -o body`.
    fn bubble(
        &mut self,
        whole: &Term,
        bound: Vec<(String, ObjectType)>,
        destruct: bool,
        body: &Term,
        layer: Option<EdgeId>,
        env: &Env,
    ) -> Result<NodeId, TranslateError> {
        let captured = free_vars_ordered(whole);
        let mut outer_uses = Vec::new();
        for c in &captured {
            let b = Self::lookup(env, c).ok_or_else(|| TranslateError {
                msg: format!("unbound variable `{c}`"),
                subterm: whole.to_string(),
            })?;
            outer_uses.push(self.use_var(b, layer));
        }
        let out = self.node(ObjectType::Unit, layer);
        let bub = self.g.add_edge(EdgeLabel::Bubble, outer_uses.clone(), vec![out], layer);
        let inner = Some(bub);
        let mut inner_env: Env = Vec::new();
        let mut inner_in = Vec::new();
        let mut scope = Vec::new();
        for (c, o) in captured.iter().zip(&outer_uses) {
            let ty = self.ty_of(*o);
            let n = self.node(ty, inner);
            inner_in.push(n);
            let b = self.bind(n, inner);
            scope.push(b);
            inner_env.push((c.clone(), b));
        }
        let bound_types: Vec<ObjectType>;
        if destruct {
            // One bound wire of product type, split by a destrictifier.
            let (tx, ty) = (bound[0].1.clone(), bound[1].1.clone());
            let whole_ty = if self.typed { ObjectType::tensor(tx.clone(), ty.clone()) } else { self.u() };
            let p = self.node(whole_ty.clone(), inner);
            inner_in.push(p);
            let nx = self.node(tx, inner);
            let ny = self.node(ty, inner);
            self.g.add_edge(EdgeLabel::Destrictify, vec![p], vec![nx, ny], inner);
            for ((name, _), n) in bound.iter().zip([nx, ny]) {
                let b = self.bind(n, inner);
                scope.push(b);
                inner_env.push((name.clone(), b));
            }
            bound_types = vec![whole_ty];
        } else {
            bound_types = bound.iter().map(|(_, t)| t.clone()).collect();
            for (name, ty) in &bound {
                let n = self.node(ty.clone(), inner);
                inner_in.push(n);
                let b = self.bind(n, inner);
                scope.push(b);
                inner_env.push((name.clone(), b));
            }
        }
        let res = self.go(body, inner, &inner_env)?;
        let res_ty = self.ty_of(res);
        self.g.set_inner(bub, inner_in, vec![res]);
        for b in scope {
            self.close(b);
        }
        self.g.node_mut(out).ty = ObjectType::arrow(ObjectType::fold(&bound_types), res_ty);
        Ok(out)
    }

    fn binder_type(&self, ty: &Option<ObjectType>, t: &Term) -> Result<ObjectType, TranslateError> {
        if !self.typed {
            return Ok(self.u());
        }
        match ty {
            Some(ty) => Ok(ty.clone()),
            None => err("binder needs a type annotation", t),
        }
    }

    fn go(&mut self, t: &Term, layer: Option<EdgeId>, env: &Env) -> Result<NodeId, TranslateError> {
        match t {
            Term::Var(x) => match Self::lookup(env, x) {
                Some(b) => Ok(self.use_var(b, layer)),
                None => err(format!("unbound variable `{x}`"), t),
            },
            Term::Const(c) => {
                let ty = if self.typed { const_type(c) } else { self.u() };
                Ok(self.cell(EdgeLabel::Gen(c.label()), vec![], ty, layer))
            }
            Term::Prim(op, args) => {
                if args.len() != op.arity() {
                    return err(format!("`{}` expects {} operands", op.name(), op.arity()), t);
                }
                let mut ins = Vec::new();
                for a in args {
                    ins.push(self.go(a, layer, env)?);
                }
                let ty = if self.typed {
                    let tys: Vec<_> = ins.iter().map(|n| self.ty_of(*n)).collect();
                    match prim_signature(*op, &tys) {
                        Some(ty) => ty,
                        None => return err(format!("operands of `{}` are ill-typed", op.name()), t),
                    }
                } else {
                    self.u()
                };
                Ok(self.cell(EdgeLabel::gen(op.name()), ins, ty, layer))
            }
            Term::App(f, a) => {
                let nf = self.go(f, layer, env)?;
                let na = self.go(a, layer, env)?;
                if self.typed {
                    match self.ty_of(nf) {
                        ObjectType::Arrow(dom, cod) if *dom == self.ty_of(na) => {
                            Ok(self.cell(EdgeLabel::Eval, vec![nf, na], *cod, layer))
                        }
                        other => err(format!("cannot apply a function of type {other} to {}", self.ty_of(na)), t),
                    }
                } else {
                    let fu = self.fun_u();
                    let fi = self.cell(EdgeLabel::Iota, vec![nf], fu, layer);
                    let u = self.u();
                    Ok(self.cell(EdgeLabel::Eval, vec![fi, na], u, layer))
                }
            }
            Term::Lam(x, ty, body) => {
                let bty = self.binder_type(ty, t)?;
                let out = self.bubble(t, vec![(x.clone(), bty)], false, body, layer, env)?;
                Ok(self.wrap_rho(out, layer))
            }
            Term::PairLam(x, y, tys, body) => {
                let (tx, ty) = if self.typed {
                    match tys {
                        Some((a, b)) => (a.clone(), b.clone()),
                        None => return err("binder needs a type annotation", t),
                    }
                } else {
                    (self.u(), self.u())
                };
                let out = self.bubble(t, vec![(x.clone(), tx), (y.clone(), ty)], true, body, layer, env)?;
                Ok(self.wrap_rho(out, layer))
            }
            Term::Pair(a, b) => {
                let na = self.go(a, layer, env)?;
                let nb = self.go(b, layer, env)?;
                let ty = if self.typed { ObjectType::tensor(self.ty_of(na), self.ty_of(nb)) } else { self.u() };
                Ok(self.cell(EdgeLabel::Strictify, vec![na, nb], ty, layer))
            }
            Term::Let(x, u, v) => {
                if u.is_value() {
                    let nu = self.go(u, layer, env)?;
                    let b = self.bind(nu, layer);
                    let mut env2 = env.clone();
                    env2.push((x.clone(), b));
                    let out = self.go(v, layer, &env2)?;
                    let source = self.bindings[b].source;
                    match self.close(b) {
                        Some(dropped) if dropped == out => Ok(source),
                        _ => Ok(out),
                    }
                } else {
                    let nu = self.go(u, layer, env)?;
                    let xty = self.ty_of(nu);
                    let body_lam = Term::Lam(x.clone(), None, v.clone());
                    let bub = self.bubble(&body_lam, vec![(x.clone(), xty)], false, v, layer, env)?;
                    let ty = match self.ty_of(bub) {
                        ObjectType::Arrow(_, cod) => *cod,
                        _ => unreachable!("bubble output is an arrow"),
                    };
                    Ok(self.cell(EdgeLabel::gen("let"), vec![nu, bub], ty, layer))
                }
            }
            Term::Ite(c, a, b) => {
                let nc = self.go(c, layer, env)?;
                if self.typed && self.ty_of(nc) != bool_ty() {
                    return err("condition is not a boolean", t);
                }
                let ta = self.bubble(a, vec![], false, a, layer, env)?;
                let tb = self.bubble(b, vec![], false, b, layer, env)?;
                let (tya, tyb) = (self.ty_of(ta), self.ty_of(tb));
                if tya != tyb {
                    return err(format!("branches have types {tya} and {tyb}"), t);
                }
                let ty = match tya {
                    ObjectType::Arrow(_, cod) => *cod,
                    _ => unreachable!("thunk output is an arrow"),
                };
                Ok(self.cell(EdgeLabel::gen("ite"), vec![nc, ta, tb], ty, layer))
            }
            Term::Rec(body) => {
                let nb = self.go(body, layer, env)?;
                if self.typed {
                    match self.ty_of(nb) {
                        ObjectType::Arrow(a, b) if a == b => Ok(self.cell(EdgeLabel::gen("rec"), vec![nb], *a, layer)),
                        other => err(format!("rec expects T -> T, found {other}"), t),
                    }
                } else {
                    let fu = self.fun_u();
                    let fi = self.cell(EdgeLabel::Iota, vec![nb], fu, layer);
                    let u = self.u();
                    Ok(self.cell(EdgeLabel::gen("rec"), vec![fi], u, layer))
                }
            }
        }
    }

    fn wrap_rho(&mut self, out: NodeId, layer: Option<EdgeId>) -> NodeId {
        if self.typed {
            out
        } else {
            let u = self.u();
            self.cell(EdgeLabel::Rho, vec![out], u, layer)
        }
    }
}

fn run(ctx: &[(String, ObjectType)], t: &Term, typed: bool) -> Result<Hypernet, TranslateError> {
    let mut tx = Tx { g: Hypernet::new(), typed, bindings: Vec::new() };
    let mut env = Env::new();
    let mut left = Vec::new();
    for (x, ty) in ctx {
        let n = tx.g.add_node(ty.clone(), None);
        left.push(n);
        let b = tx.bind(n, None);
        env.push((x.clone(), b));
    }
    let out = tx.go(t, None, &env)?;
    tx.g.set_left(left);
    tx.g.set_right(vec![out]);
    for (_, b) in env.iter().rev() {
        tx.close(*b);
    }
    Ok(tx.g)
}

/// Raw typed translation, before clean-up.
pub fn translate_typed_raw(ctx: &[(String, ObjectType)], t: &Term) -> Result<Hypernet, TranslateError> {
    run(ctx, t, true)
}

/// Typed interpretation `[Γ] -> T`; fails if `t` is ill-typed under `ctx`.
pub fn translate_typed(ctx: &[(String, ObjectType)], t: &Term) -> Result<Hypernet, TranslateError> {
    Ok(simplify(&run(ctx, t, true)?))
}

/// The type of `t` under `ctx`, by the typed translation.
pub fn type_of(ctx: &[(String, ObjectType)], t: &Term) -> Result<ObjectType, TranslateError> {
    let g = run(ctx, t, true)?;
    Ok(g.ty(g.right()[0]).clone())
}

/// Raw untyped translation over the given free variables, before clean-up.
pub fn translate_untyped_raw(free: &[String], t: &Term) -> Result<Hypernet, TranslateError> {
    let ctx: Vec<_> = free.iter().map(|x| (x.clone(), ObjectType::u())).collect();
    run(&ctx, t, false)
}

/// Unityped interpretation. Free variables become the left interface, in
/// order of first occurrence.
pub fn translate_untyped(t: &Term) -> Hypernet {
    let free = free_vars_ordered(t);
    let g = translate_untyped_raw(&free, t).expect("untyped translation of a term with its free variables");
    simplify(&g)
}

/// As [`translate_untyped`] with an explicit left interface.
pub fn translate_untyped_ctx(free: &[String], t: &Term) -> Result<Hypernet, TranslateError> {
    Ok(simplify(&translate_untyped_raw(free, t)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iso::iso_check;
    use crate::term::parse;
    use crate::validate::validate_hypernet;

    fn count(g: &Hypernet, l: &EdgeLabel) -> usize {
        g.edges().filter(|(_, e)| &e.label == l).count()
    }

    #[test]
    fn identity_application_untyped() {
        let g = translate_untyped(&parse("(\\x.x)(\\y.y)").unwrap());
        assert_eq!(validate_hypernet(&g), vec![]);
        assert_eq!(count(&g, &EdgeLabel::Bubble), 2);
        assert_eq!(count(&g, &EdgeLabel::Eval), 1);
        // The function's rho/iota pair cancels; the argument keeps its rho.
        assert_eq!(count(&g, &EdgeLabel::Iota), 0);
        assert_eq!(count(&g, &EdgeLabel::Rho), 1);
    }

    #[test]
    fn identity_application_typed() {
        let t = parse("(\\x: U -> U. x)(\\y: U. y)").unwrap();
        let g = translate_typed(&[], &t).unwrap();
        assert_eq!(validate_hypernet(&g), vec![]);
        assert_eq!(count(&g, &EdgeLabel::Bubble), 2);
        assert_eq!(count(&g, &EdgeLabel::Eval), 1);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn variable_is_a_wire() {
        let g = translate_typed(&[("x".into(), int_ty())], &parse("x").unwrap()).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.left(), g.right());
    }

    #[test]
    fn unused_context_is_deleted() {
        let ctx = vec![("x".to_string(), int_ty()), ("y".to_string(), int_ty())];
        let g = translate_typed(&ctx, &parse("y").unwrap()).unwrap();
        assert_eq!(count(&g, &EdgeLabel::Delete), 1);
    }

    #[test]
    fn church_successor_copies_f_once() {
        let t = parse("\\n: (A -> A) -> A -> A. \\f: A -> A. \\x: A. f (n f x)").unwrap();
        let g = translate_typed(&[], &t).unwrap();
        assert_eq!(validate_hypernet(&g), vec![]);
        assert_eq!(count(&g, &EdgeLabel::Copy(2)), 1);
        assert_eq!(count(&g, &EdgeLabel::Bubble), 3);
    }

    #[test]
    fn type_errors_are_reported() {
        assert!(translate_typed(&[], &parse("1 + true").unwrap()).is_err());
        assert!(translate_typed(&[], &parse("\\x. x").unwrap()).is_err());
        assert!(translate_typed(&[], &parse("1 2").unwrap()).is_err());
    }

    #[test]
    fn let_permutations_are_isomorphic() {
        let ts = [
            "let x=1 in let y=2 in let z=3 in x+y+z",
            "let u=1 in let v=2 in let z=3 in u+v+z",
            "let v=2 in let u=1 in let z=3 in u+v+z",
        ];
        let gs: Vec<_> = ts.iter().map(|s| translate_untyped(&parse(s).unwrap())).collect();
        assert!(iso_check(&gs[0], &gs[1]).is_some());
        assert!(iso_check(&gs[1], &gs[2]).is_some());
    }

    #[test]
    fn omega_shape() {
        let g = translate_untyped(&parse("(\\x. x x)(\\y. y y)").unwrap());
        assert_eq!(validate_hypernet(&g), vec![]);
        assert_eq!(count(&g, &EdgeLabel::Bubble), 2);
        assert_eq!(count(&g, &EdgeLabel::Copy(2)), 2);
    }
}
