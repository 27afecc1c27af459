//! Example programs and seeded term generators used by tests, benchmarks
//! and the acceptance suite.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::prim::{Const, PrimOp};
use crate::term::{parse, Term};

/// Hand-written closed programs.
pub const PROGRAMS: &[(&str, &str)] = &[
    ("idid", "(\\x. x) (\\y. y)"),
    ("omega", "(\\x. x x) (\\y. y y)"),
    ("const-omega", "(\\x. 7) ((\\x. x x) (\\y. y y))"),
    ("arith", "1 + (2 + 3)"),
    ("let-shared", "let x = 0 in x + (2 + x)"),
    ("let-swap", "let x = 1 in let y = 2 in x - y"),
    ("curried-add", "(\\x. \\y. x + y) 1 2"),
    ("twice", "let twice = \\f. \\x. f (f x) in twice (\\n. n * 2) 5"),
    ("church-two", "(\\f. \\x. f (f x)) (\\n. n + 1) 0"),
    ("pair-swap", "(\\(a, b). (b, a)) (1, 2)"),
    ("pair-sum", "let p = (3, 4) in (\\(a, b). a + b) p"),
    ("ite", "if 1 <= 2 then 10 else 20"),
    ("ite-lazy", "if tt then 1 else (\\x. x x) (\\y. y y)"),
    ("bools", "!(tt && ff) || ff"),
    ("fact", "let rec fact n = if n <= 0 then 1 else n * fact (n - 1) in fact 5"),
    ("fib", "let rec fib n = if n <= 1 then n else fib (n - 1) + fib (n - 2) in fib 7"),
    ("compose", "let comp = \\f. \\g. \\x. f (g x) in comp (\\a. a + 1) (\\b. b * 3) 4"),
    ("closure", "let k = 5 in let add = \\x. x + k in add 1 + add 2"),
    ("higher", "(\\g. g (g 1)) (\\z. z * z + 1)"),
    ("let-compute", "let y = 2 * 3 in y + y"),
    ("nested-lam", "\\a. \\b. a b"),
    ("fun-value", "(\\x. \\y. x) (\\z. z)"),
    ("unit", "(\\u. 4) ()"),
    ("neg", "-(3) + 5"),
    ("sum-to", "let rec sum n = if n <= 0 then 0 else n + sum (n - 1) in sum 10"),
];

pub fn programs() -> Vec<(&'static str, Term)> {
    PROGRAMS.iter().map(|(n, s)| (*n, parse(s).expect("corpus program parses"))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ty {
    Int,
    Bool,
    Fun,
    Pair,
}

/// Type-directed generator of closed terms. Mostly well-typed; a small
/// share of divergent and ill-typed subterms keeps the failure paths busy.
pub struct TermGen {
    rng: ChaCha8Rng,
    next: usize,
    /// Probability of planting a diverging or stuck subterm.
    pub wild: f64,
}

impl TermGen {
    pub fn new(seed: u64) -> Self {
        TermGen { rng: ChaCha8Rng::seed_from_u64(seed), next: 0, wild: 0.03 }
    }

    fn fresh(&mut self) -> String {
        let names = ["a", "b", "c", "d", "f", "g", "x", "y", "z", "n"];
        let n = format!("{}{}", names[self.next % names.len()], self.next / names.len());
        self.next += 1;
        n
    }

    pub fn closed(&mut self, max_depth: usize) -> Term {
        let ty = *[Ty::Int, Ty::Int, Ty::Bool, Ty::Fun, Ty::Pair].choose(&mut self.rng).expect("non-empty");
        self.gen(ty, max_depth, &mut Vec::new())
    }

    fn var_of(&mut self, ty: Ty, env: &[(String, Ty)]) -> Option<Term> {
        let vs: Vec<&String> = env.iter().filter(|(_, t)| *t == ty).map(|(n, _)| n).collect();
        vs.choose(&mut self.rng).map(|n| Term::Var((*n).clone()))
    }

    fn leaf(&mut self, ty: Ty, env: &mut [(String, Ty)]) -> Term {
        if self.rng.gen_bool(0.5) {
            if let Some(v) = self.var_of(ty, env) {
                return v;
            }
        }
        match ty {
            Ty::Int => Term::Const(Const::Int(self.rng.gen_range(-3..10))),
            Ty::Bool => Term::Const(Const::Bool(self.rng.gen_bool(0.5))),
            Ty::Fun => {
                let x = self.fresh();
                let body = if self.rng.gen_bool(0.5) {
                    Term::Var(x.clone())
                } else {
                    Term::Const(Const::Int(self.rng.gen_range(0..5)))
                };
                Term::Lam(x, None, Box::new(body))
            }
            Ty::Pair => Term::Pair(
                Box::new(Term::Const(Const::Int(self.rng.gen_range(0..5)))),
                Box::new(Term::Const(Const::Int(self.rng.gen_range(0..5)))),
            ),
        }
    }

    fn wild_term(&mut self) -> Term {
        match self.rng.gen_range(0..3) {
            0 => parse("(\\w. w w) (\\w. w w)").expect("omega"),
            1 => parse("(rec \\h. \\w. h w) 0").expect("loop"),
            _ => parse("1 2").expect("stuck"),
        }
    }

    fn gen(&mut self, ty: Ty, depth: usize, env: &mut Vec<(String, Ty)>) -> Term {
        if depth <= 1 {
            return self.leaf(ty, env);
        }
        if self.rng.gen_bool(self.wild) {
            return self.wild_term();
        }
        let d = depth - 1;
        let choice = self.rng.gen_range(0..10);
        match (ty, choice) {
            (_, 0) => self.leaf(ty, env),
            (_, 1) => {
                let x = self.fresh();
                let xty = *[Ty::Int, Ty::Fun, Ty::Bool].choose(&mut self.rng).expect("non-empty");
                let u = self.gen(xty, d, env);
                env.push((x.clone(), xty));
                let v = self.gen(ty, d, env);
                env.pop();
                Term::Let(x, Box::new(u), Box::new(v))
            }
            (_, 2) => {
                let c = self.gen(Ty::Bool, d, env);
                let a = self.gen(ty, d, env);
                let b = self.gen(ty, d, env);
                Term::Ite(Box::new(c), Box::new(a), Box::new(b))
            }
            (Ty::Int, 3) | (Ty::Int, 4) => {
                let op = *[PrimOp::Add, PrimOp::Sub, PrimOp::Mul].choose(&mut self.rng).expect("non-empty");
                let a = self.gen(Ty::Int, d, env);
                let b = self.gen(Ty::Int, d, env);
                Term::Prim(op, vec![a, b])
            }
            (Ty::Int, 5) | (Ty::Int, 6) => {
                let f = self.gen(Ty::Fun, d, env);
                let a = self.gen(Ty::Int, d, env);
                Term::App(Box::new(f), Box::new(a))
            }
            (Ty::Int, 7) => {
                let (x, y) = (self.fresh(), self.fresh());
                let p = self.gen(Ty::Pair, d, env);
                env.push((x.clone(), Ty::Int));
                env.push((y.clone(), Ty::Int));
                let body = self.gen(Ty::Int, d, env);
                env.truncate(env.len() - 2);
                Term::App(Box::new(Term::PairLam(x, y, None, Box::new(body))), Box::new(p))
            }
            (Ty::Int, 8) => Term::Prim(PrimOp::Neg, vec![self.gen(Ty::Int, d, env)]),
            (Ty::Bool, 3) | (Ty::Bool, 4) => {
                let op = *[PrimOp::Leq, PrimOp::Eq].choose(&mut self.rng).expect("non-empty");
                let a = self.gen(Ty::Int, d, env);
                let b = self.gen(Ty::Int, d, env);
                Term::Prim(op, vec![a, b])
            }
            (Ty::Bool, 5) => {
                let op = *[PrimOp::And, PrimOp::Or].choose(&mut self.rng).expect("non-empty");
                let a = self.gen(Ty::Bool, d, env);
                let b = self.gen(Ty::Bool, d, env);
                Term::Prim(op, vec![a, b])
            }
            (Ty::Bool, 6) => Term::Prim(PrimOp::Not, vec![self.gen(Ty::Bool, d, env)]),
            (Ty::Fun, 3) | (Ty::Fun, 4) | (Ty::Fun, 5) => {
                let x = self.fresh();
                env.push((x.clone(), Ty::Int));
                let body = self.gen(Ty::Int, d, env);
                env.pop();
                Term::Lam(x, None, Box::new(body))
            }
            (Ty::Fun, 6) => {
                // Composition of two functions.
                let f = self.gen(Ty::Fun, d, env);
                let g = self.gen(Ty::Fun, d, env);
                let x = self.fresh();
                let body = Term::App(Box::new(f), Box::new(Term::App(Box::new(g), Box::new(Term::Var(x.clone())))));
                Term::Lam(x, None, Box::new(body))
            }
            (Ty::Pair, 3) | (Ty::Pair, 4) | (Ty::Pair, 5) => {
                let a = self.gen(Ty::Int, d, env);
                let b = self.gen(Ty::Int, d, env);
                Term::Pair(Box::new(a), Box::new(b))
            }
            _ => self.gen(ty, d, env),
        }
    }

    /// Closed terms whose syntax tree is at most `max_depth` deep.
    pub fn closed_terms(&mut self, n: usize, max_depth: usize) -> Vec<Term> {
        (0..n).map(|_| self.closed(max_depth)).collect()
    }

    /// `let x1 = v1 in ... let xk = vk in body` with independent values, and
    /// the same chain with the bindings shuffled.
    pub fn let_permutation(&mut self) -> (Term, Term) {
        let k = self.rng.gen_range(2..5);
        let names: Vec<String> = (0..k).map(|_| self.fresh()).collect();
        let vals: Vec<Term> = (0..k)
            .map(|_| {
                let ty = *[Ty::Int, Ty::Fun, Ty::Pair].choose(&mut self.rng).expect("non-empty");
                self.leaf(ty, &mut Vec::new())
            })
            .collect();
        let mut env: Vec<(String, Ty)> = names.iter().map(|n| (n.clone(), Ty::Int)).collect();
        let body = self.gen(Ty::Int, 4, &mut env);
        let body = names.iter().fold(body, |acc, n| Term::Pair(Box::new(Term::Var(n.clone())), Box::new(acc)));
        let chain = |order: &[usize]| {
            order
                .iter()
                .rev()
                .fold(body.clone(), |acc, i| Term::Let(names[*i].clone(), Box::new(vals[*i].clone()), Box::new(acc)))
        };
        let id: Vec<usize> = (0..k).collect();
        let mut perm = id.clone();
        perm.shuffle(&mut self.rng);
        (chain(&id), chain(&perm))
    }

    /// Explicit-substitution shaped pair `(u[x/v])[x'/v']` and
    /// `(u[x'/v'])[x/v]` with `x'` not free in `v` and `x` not free in `v'`.
    pub fn substitution_permutation(&mut self) -> (Term, Term) {
        let (x, x2) = (self.fresh(), self.fresh());
        let v = self.leaf(Ty::Fun, &mut Vec::new());
        let v2 = self.leaf(Ty::Int, &mut Vec::new());
        let mut env = vec![(x.clone(), Ty::Fun), (x2.clone(), Ty::Int)];
        let u = self.gen(Ty::Int, 4, &mut env);
        let u = Term::App(Box::new(Term::Var(x.clone())), Box::new(Term::Prim(PrimOp::Add, vec![Term::Var(x2.clone()), u])));
        let lhs = Term::Let(x2.clone(), Box::new(v2.clone()), Box::new(Term::Let(x.clone(), Box::new(v.clone()), Box::new(u.clone()))));
        let rhs = Term::Let(x, Box::new(v), Box::new(Term::Let(x2, Box::new(v2), Box::new(u))));
        (lhs, rhs)
    }

    /// Renames every binder of `t` to a fresh name.
    pub fn alpha_variant(&mut self, t: &Term) -> Term {
        fn go(g: &mut TermGen, t: &Term, env: &mut Vec<(String, String)>) -> Term {
            let look = |env: &Vec<(String, String)>, x: &str| {
                env.iter().rev().find(|(a, _)| a == x).map(|(_, b)| b.clone()).unwrap_or_else(|| x.to_string())
            };
            match t {
                Term::Var(x) => Term::Var(look(env, x)),
                Term::Const(_) => t.clone(),
                Term::Lam(x, ty, b) => {
                    let y = format!("r{}", g.fresh());
                    env.push((x.clone(), y.clone()));
                    let b = go(g, b, env);
                    env.pop();
                    Term::Lam(y, ty.clone(), Box::new(b))
                }
                Term::PairLam(x, y, ty, b) => {
                    let (x2, y2) = (format!("r{}", g.fresh()), format!("r{}", g.fresh()));
                    env.push((x.clone(), x2.clone()));
                    env.push((y.clone(), y2.clone()));
                    let b = go(g, b, env);
                    env.truncate(env.len() - 2);
                    Term::PairLam(x2, y2, ty.clone(), Box::new(b))
                }
                Term::Let(x, a, b) => {
                    let a = go(g, a, env);
                    let y = format!("r{}", g.fresh());
                    env.push((x.clone(), y.clone()));
                    let b = go(g, b, env);
                    env.pop();
                    Term::Let(y, Box::new(a), Box::new(b))
                }
                Term::App(a, b) => Term::App(Box::new(go(g, a, env)), Box::new(go(g, b, env))),
                Term::Pair(a, b) => Term::Pair(Box::new(go(g, a, env)), Box::new(go(g, b, env))),
                Term::Rec(b) => Term::Rec(Box::new(go(g, b, env))),
                Term::Prim(op, args) => Term::Prim(*op, args.iter().map(|a| go(g, a, env)).collect()),
                Term::Ite(a, b, c) => {
                    Term::Ite(Box::new(go(g, a, env)), Box::new(go(g, b, env)), Box::new(go(g, c, env)))
                }
            }
        }
        go(self, t, &mut Vec::new())
    }

    /// Untyped PCF-style terms for the type inference oracle. Most are
    /// ill-typed; roughly a quarter type-check.
    pub fn pcf_term(&mut self, max_depth: usize) -> Term {
        let mut env = Vec::new();
        self.pcf(max_depth, &mut env)
    }

    fn pcf(&mut self, depth: usize, env: &mut Vec<String>) -> Term {
        let leaf = |g: &mut TermGen, env: &Vec<String>| {
            if !env.is_empty() && g.rng.gen_bool(0.6) {
                Term::Var(env.choose(&mut g.rng).expect("non-empty").clone())
            } else if g.rng.gen_bool(0.6) {
                Term::Const(Const::Int(g.rng.gen_range(0..4)))
            } else {
                Term::Const(Const::Bool(g.rng.gen_bool(0.5)))
            }
        };
        if depth <= 1 {
            return leaf(self, env);
        }
        let d = depth - 1;
        match self.rng.gen_range(0..9) {
            0 => leaf(self, env),
            1 | 2 => {
                let x = self.fresh();
                env.push(x.clone());
                let b = self.pcf(d, env);
                env.pop();
                Term::Lam(x, None, Box::new(b))
            }
            3 | 4 => Term::App(Box::new(self.pcf(d, env)), Box::new(self.pcf(d, env))),
            5 => {
                let op = *[PrimOp::Add, PrimOp::Mul, PrimOp::Leq, PrimOp::And].choose(&mut self.rng).expect("non-empty");
                Term::Prim(op, vec![self.pcf(d, env), self.pcf(d, env)])
            }
            6 => Term::Ite(Box::new(self.pcf(d, env)), Box::new(self.pcf(d, env)), Box::new(self.pcf(d, env))),
            7 => {
                let x = self.fresh();
                let u = self.pcf(d, env);
                env.push(x.clone());
                let v = self.pcf(d, env);
                env.pop();
                Term::Let(x, Box::new(u), Box::new(v))
            }
            _ => Term::Pair(Box::new(self.pcf(d, env)), Box::new(self.pcf(d, env))),
        }
    }

    /// A straight-line arithmetic program over `k` real inputs named
    /// `in0`, `in1`, ...: nested `add`, `sub`, `mul`, `neg`, inputs and
    /// real constants.
    pub fn straight_line(&mut self, k: usize, max_depth: usize) -> (Vec<String>, Term) {
        let vars: Vec<String> = (0..k).map(|i| format!("in{i}")).collect();
        let t = self.arith(&vars, max_depth);
        (vars, t)
    }

    fn arith(&mut self, vars: &[String], depth: usize) -> Term {
        if depth <= 1 || self.rng.gen_bool(0.2) {
            return if self.rng.gen_bool(0.75) {
                Term::Var(vars.choose(&mut self.rng).expect("inputs").clone())
            } else {
                Term::Const(Const::Real(self.rng.gen_range(-20..20) as f64 / 4.0))
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..7) {
            0 | 1 => Term::Prim(PrimOp::Add, vec![self.arith(vars, d), self.arith(vars, d)]),
            2 => Term::Prim(PrimOp::Sub, vec![self.arith(vars, d), self.arith(vars, d)]),
            3..=5 => Term::Prim(PrimOp::Mul, vec![self.arith(vars, d), self.arith(vars, d)]),
            _ => Term::Prim(PrimOp::Neg, vec![self.arith(vars, d)]),
        }
    }
}

/// Depth of the syntax tree.
pub fn depth(t: &Term) -> usize {
    1 + match t {
        Term::Var(_) | Term::Const(_) => 0,
        Term::Lam(_, _, b) | Term::PairLam(_, _, _, b) | Term::Rec(b) => depth(b),
        Term::App(a, b) | Term::Let(_, a, b) | Term::Pair(a, b) => depth(a).max(depth(b)),
        Term::Prim(_, args) => args.iter().map(depth).max().unwrap_or(0),
        Term::Ite(a, b, c) => depth(a).max(depth(b)).max(depth(c)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{alpha_eq, free_vars};

    #[test]
    fn generators_are_seeded() {
        let a = TermGen::new(7).closed_terms(20, 6);
        let b = TermGen::new(7).closed_terms(20, 6);
        assert_eq!(a, b);
        assert!(a.iter().all(|t| free_vars(t).is_empty()));
    }

    #[test]
    fn alpha_variants_are_alpha_equal() {
        let mut g = TermGen::new(3);
        for t in g.closed_terms(30, 6) {
            assert!(alpha_eq(&g.alpha_variant(&t), &t));
        }
    }

    #[test]
    fn programs_parse_closed() {
        for (n, t) in programs() {
            assert!(free_vars(&t).is_empty(), "{n}");
        }
    }
}
