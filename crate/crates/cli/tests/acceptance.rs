//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints exactly one PASS or FAIL line.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode, Stdio};
use std::time::Instant;

use hypernet::corpus::{programs, TermGen};
use hypernet::diagrams::{
    boolean_circuit, boolean_rules, constants, insertion_sorter, output_constants, redex_example, redex_non_convex,
    shared_tree, sorting_rules, sorting_signature, tree,
};
use hypernet::machine::{run, Divergence, Outcome};
use hypernet::readback::{comparable, readback};
use hypernet::rewrite::check as check_match;
use hypernet::term::{lam, var};
use hypernet::{
    alpha_eq, apply_rewrite, check_globalized, compose_seq, convert, defoliate, eval_cbn, eval_cbv, fd_oracle,
    find_matches, foliate, fuse, gradient, hoist, infer, iso_check, normalize, parse, parse_hypernet, print_hypernet,
    translate_untyped, validate_hypernet, Cell, Const, ErrorKind, EvalResult, Hypernet, InferError,
    PrimOp, Term, TypeExpr, ViolationKind,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn term(s: &str) -> Term {
    parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn graph(s: &str) -> Hypernet {
    translate_untyped(&term(s))
}

fn value_term(o: &Outcome) -> Option<Term> {
    o.value().map(|s| readback(&s.graph).expect("readback of a value"))
}

// 1

fn identity_application() -> Check {
    let g = graph(r"(\x. x) (\y. y)");
    let start = Instant::now();
    let r = run(&g, 1000, false).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let v = value_term(&r.outcome).ok_or("no value")?;
    ensure(alpha_eq(&v, &lam("y", var("y"))), || format!("readback {v}"))?;
    ensure(r.trace.len() <= 20, || format!("{} steps", r.trace.len()))?;
    ensure(elapsed.as_millis() < 50, || format!("{elapsed:?}"))?;
    Ok(format!("{} steps, {:.2} ms", r.trace.len(), elapsed.as_secs_f64() * 1e3))
}

// 2

fn divergence() -> Check {
    let g = graph(r"(\x. x x) (\x. x x)");
    let r = run(&g, 100, true).map_err(|e| e.to_string())?;
    let Outcome::Diverged(Divergence::Cycle { step, earlier }) = r.outcome else {
        return Err(format!("no cycle: {:?}", r.outcome));
    };
    ensure(step <= 100, || format!("cycle at {step}"))?;
    for fuel in [100, 137, 500, 2000] {
        let r = run(&g, fuel, false).map_err(|e| e.to_string())?;
        ensure(r.outcome == Outcome::Diverged(Divergence::Budget), || format!("fuel {fuel}: {:?}", r.outcome))?;
        ensure(r.trace.len() == fuel, || format!("fuel {fuel}: {} steps", r.trace.len()))?;
    }
    Ok(format!("state {step} repeats state {earlier}; budget exhausted at 100..2000"))
}

// 3

fn cbv_cbn_split() -> Check {
    let t = term(r"(\x. 7) ((\x. x x) (\x. x x))");
    let cbn = eval_cbn(&t, 10_000);
    ensure(cbn == EvalResult::Value(term("7")), || format!("call-by-name gave {cbn:?}"))?;
    let r = run(&translate_untyped(&t), 10_000, false).map_err(|e| e.to_string())?;
    ensure(r.outcome == Outcome::Diverged(Divergence::Budget), || format!("machine gave {:?}", r.outcome))?;
    Ok("call-by-name 7, machine out of budget at 10000".into())
}

// 4

const MACHINE_BUDGET: usize = 20_000;
const TERM_BUDGET: usize = 5_000;

fn oracle_equivalence() -> Check {
    let mut gen = TermGen::new(2024);
    let terms = gen.closed_terms(200, 6);
    let (mut values, mut diverged, mut stuck) = (0, 0, 0);
    for t in &terms {
        let r = run(&translate_untyped(t), MACHINE_BUDGET, false).map_err(|e| format!("{t}: {e}"))?;
        match (&r.outcome, eval_cbv(t, TERM_BUDGET)) {
            (Outcome::Value(s), EvalResult::Value(v)) => {
                let m = readback(&s.graph).map_err(|e| format!("{t}: {}", e.0))?;
                ensure(alpha_eq(&comparable(&m), &comparable(&v)), || format!("{t}: machine {m}, oracle {v}"))?;
                values += 1;
            }
            (Outcome::Diverged(_), EvalResult::Diverged) => diverged += 1,
            (Outcome::Stuck(..), EvalResult::Stuck(_)) => stuck += 1,
            (m, o) => return Err(format!("{t}: machine {m:?}, oracle {o:?}")),
        }
    }
    Ok(format!("{} terms: {values} values, {diverged} both diverge, {stuck} both stuck", terms.len()))
}

// 5

fn structural_absorption() -> Check {
    let mut gen = TermGen::new(99);
    let n = 100;
    for _ in 0..n {
        let t = gen.closed(6);
        let a = gen.alpha_variant(&t);
        ensure(iso_check(&translate_untyped(&t), &translate_untyped(&a)).is_some(), || format!("alpha: {t} / {a}"))?;
        let (l, r) = gen.let_permutation();
        ensure(iso_check(&translate_untyped(&l), &translate_untyped(&r)).is_some(), || format!("let: {l} / {r}"))?;
        let (l, r) = gen.substitution_permutation();
        ensure(iso_check(&translate_untyped(&l), &translate_untyped(&r)).is_some(), || format!("subst: {l} / {r}"))?;
    }
    Ok(format!("{} pairs, all witnessed", 3 * n))
}

// 6

fn monogamy() -> Check {
    let cases = [
        ("node 0 : A\nleft=[0,0]\nright=[0]\n", ViolationKind::DuplicateOnInterface),
        ("node 0 : A\nnode 1 : A\nedge 2 : f in=[0] out=[1]\nleft=[0]\nright=[]\n", ViolationKind::NoConsumer),
        (
            "node 0 : A\nnode 1 : A\nnode 2 : A\nedge 3 : f in=[0] out=[1,1]\nedge 4 : g in=[1] out=[2]\nleft=[0]\nright=[2]\n",
            ViolationKind::LinkedTwice,
        ),
    ];
    let mut kinds = Vec::new();
    for (text, want) in cases {
        let g = parse_hypernet(text).map_err(|e| e.to_string())?;
        let got: Vec<ViolationKind> = validate_hypernet(&g).into_iter().map(|v| v.kind).collect();
        ensure(got.contains(&want), || format!("expected {want}, got {got:?}"))?;
        kinds.push(want);
    }
    kinds.dedup();
    ensure(kinds.len() == 3, || "kinds not distinct".into())?;
    let corpus = corpus_graphs();
    for (name, g) in &corpus {
        ensure(validate_hypernet(g).is_empty(), || format!("{name}: {:?}", validate_hypernet(g)))?;
    }
    Ok(format!("3 distinct kinds; {} corpus graphs valid", corpus.len()))
}

fn corpus_graphs() -> Vec<(String, Hypernet)> {
    let mut out: Vec<(String, Hypernet)> =
        programs().into_iter().map(|(n, t)| (n.to_string(), translate_untyped(&t))).collect();
    for (i, t) in TermGen::new(5).closed_terms(100, 6).into_iter().enumerate() {
        out.push((format!("generated-{i}"), translate_untyped(&t)));
    }
    out
}

// 7

fn foliation() -> Check {
    let corpus = corpus_graphs();
    for (name, g) in &corpus {
        let f = foliate(g).map_err(|e| format!("{name}: {e}"))?;
        let back = defoliate(&f).map_err(|e| format!("{name}: {e}"))?;
        ensure(iso_check(&back, g).is_some(), || format!("{name}: not iso after round trip"))?;
        let fused = defoliate(&fuse(&f)).map_err(|e| format!("{name}: {e}"))?;
        ensure(iso_check(&fused, g).is_some(), || format!("{name}: fusion changed the graph"))?;
    }
    let t = fuse(&foliate(&tree(3)).map_err(|e| e.to_string())?).shape(|_| true);
    ensure(t == "emp^(8);node3^(4);node2^(2);node1", || format!("tree: {t}"))?;
    let d = fuse(&foliate(&shared_tree(3)).map_err(|e| e.to_string())?).shape(Cell::is_signature);
    ensure(d == "emp^(2);node3;node2;node1", || format!("dag: {d}"))?;
    Ok(format!("{} round trips; tree {t}; dag {d}", corpus.len()))
}

// 8

/// Evaluates a flat boolean circuit by walking it in dependency order.
fn truth_table(g: &Hypernet) -> Vec<bool> {
    let mut val: HashMap<_, bool> = HashMap::new();
    let mut pending: Vec<_> = g.edges().map(|(id, _)| id).collect();
    while !pending.is_empty() {
        pending.retain(|id| {
            let e = g.edge(*id);
            if !e.ins.iter().all(|n| val.contains_key(n)) {
                return true;
            }
            let a: Vec<bool> = e.ins.iter().map(|n| val[n]).collect();
            let out = match e.label.gen_name().expect("generator") {
                "t" => true,
                "f" => false,
                "and" => a[0] && a[1],
                "or" => a[0] || a[1],
                other => panic!("unexpected {other}"),
            };
            val.insert(e.outs[0], out);
            false
        });
    }
    g.right().iter().map(|n| val[n]).collect()
}

fn permutations(v: &[u32]) -> Vec<Vec<u32>> {
    if v.len() <= 1 {
        return vec![v.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..v.len() {
        let mut rest = v.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

fn rewriting() -> Check {
    let ex = redex_example();
    let ms = find_matches(&ex.rule, &ex.graph);
    ensure(ms.len() == 1, || format!("{} matches", ms.len()))?;
    let h = apply_rewrite(&ex.rule, &ms[0], &ex.graph).map_err(|e| e.to_string())?;
    ensure(iso_check(&h, &ex.expected).is_some(), || "rewrite result differs".into())?;
    ensure(check_match(&ex.rule, &ex.graph, &redex_non_convex()).is_err(), || "non-convex accepted".into())?;

    let rules = sorting_rules(5);
    let sig = sorting_signature(5);
    let mut count = 0;
    for n in 1..=5u32 {
        let values: Vec<u32> = (1..=n).collect();
        for p in permutations(&values) {
            let g = compose_seq(&constants(&sig, &p), &insertion_sorter(&sig, p.len())).map_err(|e| e.to_string())?;
            let (nf, _) = normalize(&rules, &g, 1000).map_err(|e| e.to_string())?;
            let mut want = p.clone();
            want.sort_unstable_by(|a, b| b.cmp(a));
            let want: Vec<String> = want.iter().map(|v| format!("k{v}")).collect();
            ensure(output_constants(&nf) == Some(want.clone()), || format!("{p:?}: {:?}", output_constants(&nf)))?;
            count += 1;
        }
    }

    let c = boolean_circuit();
    let expected = truth_table(&c);
    let (nf, steps) = normalize(&boolean_rules(), &c, 100).map_err(|e| e.to_string())?;
    let got = output_constants(&nf).ok_or("circuit did not reduce to constants")?;
    ensure(nf.edge_count() == 1, || format!("{} edges left", nf.edge_count()))?;
    let want = if expected == [true] { "t" } else { "f" };
    ensure(got == [want], || format!("{got:?} vs table {expected:?}"))?;
    Ok(format!("one redex match; non-convex rejected; {count} permutations sorted; circuit = {want} in {steps} steps"))
}

// 9

/// Simple types for the term-level oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Ty {
    Int,
    Bool,
    Real,
    Unit,
    Var(usize),
    Fun(Box<Ty>, Box<Ty>),
    Pair(Box<Ty>, Box<Ty>),
}

fn fun(a: Ty, b: Ty) -> Ty {
    Ty::Fun(Box::new(a), Box::new(b))
}

/// First-order unification with an explicit substitution.
#[derive(Default)]
struct Unifier {
    subst: HashMap<usize, Ty>,
    next: usize,
}

impl Unifier {
    fn fresh(&mut self) -> Ty {
        self.next += 1;
        Ty::Var(self.next - 1)
    }

    fn resolve(&self, t: &Ty) -> Ty {
        match t {
            Ty::Var(v) => match self.subst.get(v) {
                Some(u) => self.resolve(u),
                None => t.clone(),
            },
            Ty::Fun(a, b) => fun(self.resolve(a), self.resolve(b)),
            Ty::Pair(a, b) => Ty::Pair(Box::new(self.resolve(a)), Box::new(self.resolve(b))),
            _ => t.clone(),
        }
    }

    fn occurs(&self, v: usize, t: &Ty) -> bool {
        match self.resolve(t) {
            Ty::Var(w) => v == w,
            Ty::Fun(a, b) | Ty::Pair(a, b) => self.occurs(v, &a) || self.occurs(v, &b),
            _ => false,
        }
    }

    fn unify(&mut self, a: &Ty, b: &Ty) -> Result<(), ()> {
        match (self.resolve(a), self.resolve(b)) {
            (Ty::Var(v), Ty::Var(w)) if v == w => Ok(()),
            (Ty::Var(v), t) | (t, Ty::Var(v)) => {
                if self.occurs(v, &t) {
                    return Err(());
                }
                self.subst.insert(v, t);
                Ok(())
            }
            (Ty::Fun(a1, b1), Ty::Fun(a2, b2)) | (Ty::Pair(a1, b1), Ty::Pair(a2, b2)) => {
                self.unify(&a1, &a2)?;
                self.unify(&b1, &b2)
            }
            (x, y) if x == y => Ok(()),
            _ => Err(()),
        }
    }

    fn infer(&mut self, t: &Term, env: &mut Vec<(String, Ty)>) -> Result<Ty, ()> {
        Ok(match t {
            Term::Var(x) => match env.iter().rev().find(|(y, _)| y == x) {
                Some((_, ty)) => ty.clone(),
                None => {
                    let a = self.fresh();
                    env.insert(0, (x.clone(), a.clone()));
                    a
                }
            },
            Term::Const(c) => match c {
                Const::Int(_) => Ty::Int,
                Const::Bool(_) => Ty::Bool,
                Const::Real(_) => Ty::Real,
                Const::Unit => Ty::Unit,
            },
            Term::Lam(x, _, b) => {
                let a = self.fresh();
                env.push((x.clone(), a.clone()));
                let r = self.infer(b, env);
                env.pop();
                fun(a, r?)
            }
            Term::PairLam(x, y, _, b) => {
                let (a, c) = (self.fresh(), self.fresh());
                env.push((x.clone(), a.clone()));
                env.push((y.clone(), c.clone()));
                let r = self.infer(b, env);
                env.truncate(env.len() - 2);
                fun(Ty::Pair(Box::new(a), Box::new(c)), r?)
            }
            Term::App(f, a) => {
                let tf = self.infer(f, env)?;
                let ta = self.infer(a, env)?;
                let r = self.fresh();
                self.unify(&tf, &fun(ta, r.clone()))?;
                r
            }
            Term::Let(x, u, v) => {
                let tu = self.infer(u, env)?;
                env.push((x.clone(), tu));
                let r = self.infer(v, env);
                env.pop();
                r?
            }
            Term::Pair(a, b) => Ty::Pair(Box::new(self.infer(a, env)?), Box::new(self.infer(b, env)?)),
            Term::Rec(b) => {
                let tb = self.infer(b, env)?;
                let a = self.fresh();
                self.unify(&tb, &fun(a.clone(), a.clone()))?;
                a
            }
            Term::Ite(c, a, b) => {
                let tc = self.infer(c, env)?;
                self.unify(&tc, &Ty::Bool)?;
                let ta = self.infer(a, env)?;
                let tb = self.infer(b, env)?;
                self.unify(&ta, &tb)?;
                ta
            }
            Term::Prim(op, args) => {
                let ts = args.iter().map(|a| self.infer(a, env)).collect::<Result<Vec<_>, _>>()?;
                let (operand, result) = match op {
                    PrimOp::Add | PrimOp::Sub | PrimOp::Mul | PrimOp::Neg => (Ty::Int, Ty::Int),
                    PrimOp::And | PrimOp::Or | PrimOp::Not => (Ty::Bool, Ty::Bool),
                    PrimOp::Leq => (Ty::Int, Ty::Bool),
                    PrimOp::Eq => (self.fresh(), Ty::Bool),
                };
                for t in &ts {
                    self.unify(t, &operand)?;
                }
                result
            }
        })
    }
}

/// Renumbers variables by first occurrence, left to right.
fn canonical(t: &Ty, map: &mut BTreeMap<usize, usize>) -> Ty {
    match t {
        Ty::Var(v) => {
            let n = map.len();
            Ty::Var(*map.entry(*v).or_insert(n))
        }
        Ty::Fun(a, b) => {
            let a = canonical(a, map);
            fun(a, canonical(b, map))
        }
        Ty::Pair(a, b) => {
            let a = canonical(a, map);
            Ty::Pair(Box::new(a), Box::new(canonical(b, map)))
        }
        _ => t.clone(),
    }
}

fn from_graph(t: &TypeExpr) -> Ty {
    match t {
        TypeExpr::Int => Ty::Int,
        TypeExpr::Bool => Ty::Bool,
        TypeExpr::Real => Ty::Real,
        TypeExpr::Unit => Ty::Unit,
        TypeExpr::Var(v) => Ty::Var(*v),
        TypeExpr::Arrow(a, b) => fun(from_graph(a), from_graph(b)),
        TypeExpr::Product(a, b) => Ty::Pair(Box::new(from_graph(a)), Box::new(from_graph(b))),
    }
}

fn oracle_type(t: &Term) -> Option<Ty> {
    let mut u = Unifier::default();
    let ty = u.infer(t, &mut Vec::new()).ok()?;
    Some(canonical(&u.resolve(&ty), &mut BTreeMap::new()))
}

fn type_error(src: &str) -> Result<hypernet::ErrorPath, String> {
    match infer(&graph(src)) {
        Err(InferError::Type(p)) => Ok(p),
        other => Err(format!("{src}: expected a type error, got {other:?}")),
    }
}

fn type_inference() -> Check {
    let t = infer(&graph("x + 1")).map_err(|e| format!("x + 1: {e:?}"))?;
    ensure(t.inputs == [TypeExpr::Int], || format!("x : {:?}", t.inputs))?;

    let p = type_error("if x then x + 1 else 0")?;
    let ends = |p: &hypernet::ErrorPath| {
        p.kind == ErrorKind::Clash && p.path.first() == Some(&TypeExpr::Int) && p.path.last() == Some(&TypeExpr::Bool)
    };
    ensure(ends(&p), || format!("if-example path {p}"))?;

    let p = type_error("f tt + f 1")?;
    let shape = ends(&p)
        && p.path.len() == 4
        && matches!((&p.path[1], &p.path[2]), (TypeExpr::Var(a), TypeExpr::Var(b)) if a != b);
    ensure(shape, || format!("f tt + f 1 path {p}"))?;
    let saturated = p.clone();

    let p = type_error("f f")?;
    ensure(p.kind == ErrorKind::Occurs, || format!("f f: {p:?}"))?;
    let p = type_error("f (f 1, f 2)")?;
    ensure(p.kind == ErrorKind::Clash, || format!("f (f 1, f 2): {p:?}"))?;

    let mut gen = TermGen::new(31);
    let (mut accepted, mut rejected) = (0, 0);
    for _ in 0..200 {
        let t = gen.pcf_term(5);
        let want = oracle_type(&t);
        let got = match infer(&translate_untyped(&t)) {
            Ok(ty) => Some(canonical(&from_graph(&ty.outputs[0]), &mut BTreeMap::new())),
            Err(InferError::Type(_)) => None,
            Err(e) => return Err(format!("{t}: {e:?}")),
        };
        ensure(got == want, || format!("{t}: graph {got:?}, oracle {want:?}"))?;
        if want.is_some() {
            accepted += 1;
        } else {
            rejected += 1;
        }
    }
    Ok(format!("5 cases (saturated path {saturated}); 200 oracle verdicts agree ({accepted} typed, {rejected} rejected)"))
}

// 10

fn closure_conversion() -> Check {
    for (name, t) in programs() {
        let g = translate_untyped(&t);
        let c = convert(&g).map_err(|e| format!("{name}: {e}"))?;
        let h = hoist(&c).map_err(|e| format!("{name}: {e}"))?;
        ensure(validate_hypernet(&h).is_empty(), || format!("{name}: invalid after hoisting"))?;
        ensure(check_globalized(&h), || format!("{name}: not globalized"))?;
        let a = run(&g, 3000, true).map_err(|e| e.to_string())?.outcome;
        let b = run(&h, 3000, true).map_err(|e| e.to_string())?.outcome;
        match (&a, &b) {
            (Outcome::Value(_), Outcome::Value(_)) => {
                let (x, y) = (comparable(&value_term(&a).unwrap()), comparable(&value_term(&b).unwrap()));
                if let Term::Const(_) = x {
                    ensure(x == y, || format!("{name}: {x} vs {y}"))?;
                }
            }
            (Outcome::Diverged(_), Outcome::Diverged(_)) => {}
            _ => return Err(format!("{name}: {a:?} vs {b:?}")),
        }
    }
    let h = hoist(&convert(&graph(r"(\x. \y. x + y) 1 2")).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let expected = term(
        r"let x0 = 2 in
          let x1 = \(y, x). x + y in
          let x2 = \(x, e). (x, x1) in
          (\(env, k). k (x0, env)) (x2 (1, ()))",
    );
    let got = readback(&h).map_err(|e| e.0)?;
    ensure(alpha_eq(&comparable(&got), &comparable(&expected)), || format!("worked example read back as {got}"))?;
    let v = value_term(&run(&h, 1000, false).map_err(|e| e.to_string())?.outcome);
    ensure(v == Some(term("3")), || format!("worked example gave {v:?}"))?;
    Ok(format!("{} programs globalized and agreeing; worked example matches", programs().len()))
}

// 11

/// Independent evaluator for the arithmetic fragment.
fn arith(t: &Term, env: &mut Vec<(String, Val)>) -> Val {
    match t {
        Term::Var(x) => env.iter().rev().find(|(y, _)| y == x).map(|(_, v)| v.clone()).expect("bound"),
        Term::Const(c) => Val::Num(c.as_f64().expect("number")),
        Term::Lam(x, _, b) => Val::Fun(x.clone(), (**b).clone(), env.clone()),
        Term::App(f, a) => {
            let Val::Fun(x, b, mut cl) = arith(f, env) else { panic!("not a function") };
            let v = arith(a, env);
            cl.push((x, v));
            arith(&b, &mut cl)
        }
        Term::Let(x, u, v) => {
            let u = arith(u, env);
            env.push((x.clone(), u));
            let r = arith(v, env);
            env.pop();
            r
        }
        Term::Prim(op, args) => {
            let xs: Vec<f64> = args
                .iter()
                .map(|a| match arith(a, env) {
                    Val::Num(x) => x,
                    Val::Fun(..) => panic!("not a number"),
                })
                .collect();
            Val::Num(match op {
                PrimOp::Add => xs[0] + xs[1],
                PrimOp::Sub => xs[0] - xs[1],
                PrimOp::Mul => xs[0] * xs[1],
                PrimOp::Neg => -xs[0],
                _ => panic!("not arithmetic"),
            })
        }
        other => panic!("unsupported {other}"),
    }
}

#[derive(Clone)]
enum Val {
    Num(f64),
    Fun(String, Term, Vec<(String, Val)>),
}

fn central_difference(t: &Term, point: &[(String, f64)], h: f64) -> Vec<f64> {
    let at = |i: usize, by: f64| {
        let mut env: Vec<(String, Val)> =
            point.iter().enumerate().map(|(j, (x, v))| (x.clone(), Val::Num(if i == j { v + by } else { *v }))).collect();
        match arith(t, &mut env) {
            Val::Num(x) => x,
            Val::Fun(..) => panic!("function result"),
        }
    };
    (0..point.len()).map(|i| (at(i, h) - at(i, -h)) / (2.0 * h)).collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-4 * a.abs().max(b.abs()).max(1.0)
}

fn reverse_ad() -> Check {
    let mut gen = TermGen::new(11);
    let mut worst: f64 = 0.0;
    for i in 0..60 {
        let (vars, t) = gen.straight_line(1 + i % 3, 5);
        let point: Vec<(String, f64)> = vars.iter().enumerate().map(|(j, v)| (v.clone(), 0.5 + 0.75 * j as f64 - 0.1 * (i % 7) as f64)).collect();
        let g = gradient(&t, &point).map_err(|e| format!("{t}: {e}"))?;
        let fd = central_difference(&t, &point, 1e-6);
        for (a, b) in g.iter().zip(&fd) {
            ensure(close(*a, *b), || format!("{t} at {point:?}: reverse {g:?}, differences {fd:?}"))?;
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
        }
    }
    let t = term(r"(\x. x * y) y + y");
    for y in [-2.0, -0.5, 0.0, 1.25, 3.0] {
        let point = vec![("y".to_string(), y)];
        let g = gradient(&t, &point).map_err(|e| e.to_string())?;
        let fd = fd_oracle(&t, &point, 1e-6).map_err(|e| e.to_string())?;
        ensure(close(g[0], fd[0]), || format!("y = {y}: {g:?} vs {fd:?}"))?;
        ensure(close(g[0], 2.0 * y + 1.0), || format!("y = {y}: {g:?}"))?;
    }
    Ok(format!("60 programs within tolerance (worst relative error {worst:.1e}); (\\x. x * y) y + y at 5 points"))
}

// 12

fn cli(args: &[&str], stdin: &str) -> (Vec<u8>, Option<i32>) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_hypernet"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    (o.stdout, o.status.code())
}

fn dir_contents(d: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(d)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn determinism() -> Check {
    let invocations: Vec<(Vec<&str>, &str)> = vec![
        (vec!["translate"], r"let rec f n = if n <= 0 then 1 else n * f (n - 1) in f 5"),
        (vec!["check", "--print"], "node 0 : A\nleft=[0]\nright=[0]\n"),
        (vec!["eval", "--detect-cycles"], r"(\x. x x) (\x. x x)"),
        (vec!["eval"], "let twice = \\f. \\x. f (f x) in twice (\\n. n * 2) 5"),
        (vec!["typecheck"], "f tt + f 1"),
        (vec!["foliate", "--fuse"], r"(\x. \y. x + y) 1 2"),
        (vec!["cc"], r"(\x. \y. x + y) 1 2"),
        (vec!["cc", "--readback"], r"let k = 5 in let add = \x. x + k in add 1 + add 2"),
        (vec!["rad", "--wrt", "y", "--at", "y=1.5"], r"(\x. x * y) y + y"),
        (vec!["render"], r"(\x. x x) (\x. x x)"),
        (vec!["render", "--step", "4"], r"(\x. x) (\y. y)"),
    ];
    for (args, input) in &invocations {
        let a = cli(args, input);
        let b = cli(args, input);
        ensure(a == b, || format!("{args:?} differs between runs"))?;
        ensure(!a.0.is_empty(), || format!("{args:?} printed nothing"))?;
    }
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (d1, d2) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&d1, &d2] {
        cli(&["eval", "--trace", d.to_str().unwrap()], "let rec fact n = if n <= 0 then 1 else n * fact (n - 1) in fact 3");
    }
    ensure(dir_contents(&d1) == dir_contents(&d2), || "trace directories differ".into())?;

    let corpus = corpus_graphs();
    for (name, g) in &corpus {
        let text = print_hypernet(g);
        let back = parse_hypernet(&text).map_err(|e| format!("{name}: {e}"))?;
        ensure(iso_check(&back, g).is_some(), || format!("{name}: round trip not iso"))?;
        ensure(print_hypernet(&back) == text, || format!("{name}: text not stable"))?;
    }
    for (name, t) in programs() {
        let (out, code) = cli(&["translate"], &t.to_string());
        ensure(code == Some(0), || format!("{name}: translate exit {code:?}"))?;
        let g = parse_hypernet(&String::from_utf8(out).unwrap()).map_err(|e| format!("{name}: {e}"))?;
        ensure(iso_check(&g, &translate_untyped(&t)).is_some(), || format!("{name}: CLI graph not iso"))?;
    }
    Ok(format!("{} invocations stable; {} graphs round-trip", invocations.len() + 1, corpus.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("identity application", identity_application),
        ("divergence", divergence),
        ("cbv/cbn split", cbv_cbn_split),
        ("oracle equivalence", oracle_equivalence),
        ("structural absorption", structural_absorption),
        ("monogamy", monogamy),
        ("foliation", foliation),
        ("rewriting", rewriting),
        ("type inference", type_inference),
        ("closure conversion", closure_conversion),
        ("reverse ad", reverse_ad),
        ("determinism and round trips", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail}) [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({why}) [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
