//! Big-step call-by-value and call-by-name evaluators with fuel.
//!
//! Evaluation order: function before argument; primitive operands and pair
//! components right to left (last one first).

use std::collections::BTreeSet;

use crate::prim::Const;
use crate::term::{free_vars, subst, Fresh, Term};

#[derive(Clone, Debug, PartialEq)]
pub enum EvalResult {
    Value(Term),
    Diverged,
    Stuck(String),
}

impl EvalResult {
    pub fn value(&self) -> Option<&Term> {
        match self {
            EvalResult::Value(t) => Some(t),
            _ => None,
        }
    }
}

enum Halt {
    Fuel,
    Stuck(String),
}

#[derive(Clone, Copy, PartialEq)]
enum Strategy {
    Value,
    Name,
}

struct Evaluator {
    fuel: usize,
    strategy: Strategy,
}

impl Evaluator {
    fn tick(&mut self) -> Result<(), Halt> {
        if self.fuel == 0 {
            return Err(Halt::Fuel);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn eval(&mut self, t: &Term) -> Result<Term, Halt> {
        let mut t = t.clone();
        loop {
            t = match t {
                Term::Var(x) => return Err(Halt::Stuck(format!("free variable `{x}`"))),
                Term::Const(_) | Term::Lam(..) | Term::PairLam(..) => return Ok(t),
                Term::Pair(a, b) => {
                    if self.strategy == Strategy::Name {
                        return Ok(Term::Pair(a, b));
                    }
                    let vb = self.eval(&b)?;
                    let va = self.eval(&a)?;
                    return Ok(Term::Pair(Box::new(va), Box::new(vb)));
                }
                Term::App(f, a) => {
                    let vf = self.eval(&f)?;
                    let arg = if self.strategy == Strategy::Value { self.eval(&a)? } else { *a };
                    self.tick()?;
                    match vf {
                        Term::Lam(x, _, body) => subst(&body, &x, &arg),
                        Term::PairLam(x, y, _, body) => {
                            let arg = if self.strategy == Strategy::Name { self.eval(&arg)? } else { arg };
                            match arg {
                                Term::Pair(p, q) => destructure(&x, &y, &body, &p, &q),
                                other => return Err(Halt::Stuck(format!("pair abstraction applied to `{other}`"))),
                            }
                        }
                        other => return Err(Halt::Stuck(format!("`{other}` applied as a function"))),
                    }
                }
                Term::Let(x, u, v) => {
                    let bound = if self.strategy == Strategy::Value { self.eval(&u)? } else { *u };
                    self.tick()?;
                    subst(&v, &x, &bound)
                }
                Term::Prim(op, args) => {
                    let mut cs = Vec::with_capacity(args.len());
                    for a in args.iter().rev() {
                        match self.eval(a)? {
                            Term::Const(c) => cs.push(c),
                            other => return Err(Halt::Stuck(format!("`{}` applied to `{other}`", op.name()))),
                        }
                    }
                    cs.reverse();
                    self.tick()?;
                    return match op.apply(&cs) {
                        Some(c) => Ok(Term::Const(c)),
                        None => Err(Halt::Stuck(format!("`{}` undefined on these operands", op.name()))),
                    };
                }
                Term::Ite(c, a, b) => {
                    let vc = self.eval(&c)?;
                    self.tick()?;
                    match vc {
                        Term::Const(Const::Bool(true)) => *a,
                        Term::Const(Const::Bool(false)) => *b,
                        other => return Err(Halt::Stuck(format!("condition `{other}` is not a boolean"))),
                    }
                }
                Term::Rec(body) => {
                    let vb = self.eval(&body)?;
                    self.tick()?;
                    match &vb {
                        Term::Lam(f, _, u) => {
                            let unfolded = Term::Rec(Box::new(vb.clone()));
                            subst(u, f, &unfolded)
                        }
                        other => return Err(Halt::Stuck(format!("rec applied to `{other}`"))),
                    }
                }
            };
        }
    }
}

/// `body[x/p][y/q]`, renaming `y` first if `p` mentions it.
fn destructure(x: &str, y: &str, body: &Term, p: &Term, q: &Term) -> Term {
    if x == y {
        return subst(body, y, q);
    }
    let (body, y) = if free_vars(p).contains(y) {
        let mut avoid = BTreeSet::new();
        body.names(&mut avoid);
        p.names(&mut avoid);
        q.names(&mut avoid);
        let z = Fresh::new(avoid).name();
        (subst(body, y, &Term::Var(z.clone())), z)
    } else {
        (body.clone(), y.to_string())
    };
    subst(&subst(&body, x, p), &y, q)
}

fn run(t: &Term, budget: usize, strategy: Strategy) -> EvalResult {
    let mut ev = Evaluator { fuel: budget, strategy };
    match ev.eval(t) {
        Ok(v) => EvalResult::Value(v),
        Err(Halt::Fuel) => EvalResult::Diverged,
        Err(Halt::Stuck(m)) => EvalResult::Stuck(m),
    }
}

/// Call-by-value evaluation. `budget` bounds the number of reduction steps.
pub fn eval_cbv(t: &Term, budget: usize) -> EvalResult {
    run(t, budget, Strategy::Value)
}

/// Call-by-name evaluation to weak head normal form.
pub fn eval_cbn(t: &Term, budget: usize) -> EvalResult {
    run(t, budget, Strategy::Name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{alpha_eq, int, parse};

    fn p(s: &str) -> Term {
        parse(s).unwrap()
    }

    #[test]
    fn identity_applied_to_itself() {
        let v = eval_cbv(&p("(\\x.x)(\\y.y)"), 100);
        assert!(alpha_eq(v.value().unwrap(), &p("\\y.y")));
    }

    #[test]
    fn omega_diverges() {
        assert_eq!(eval_cbv(&p("(\\x. x x)(\\y. y y)"), 1000), EvalResult::Diverged);
        assert_eq!(eval_cbn(&p("(\\x. x x)(\\y. y y)"), 1000), EvalResult::Diverged);
    }

    #[test]
    fn arithmetic() {
        // 1+(2+3): 2+3 = 5, then 1+5 = 6.
        assert_eq!(eval_cbv(&p("1+(2+3)"), 100), EvalResult::Value(int(6)));
    }

    #[test]
    fn cbn_discards_divergent_argument() {
        let t = p("(\\x. 7) ((\\x. x x)(\\y. y y))");
        assert_eq!(eval_cbn(&t, 1000), EvalResult::Value(int(7)));
        assert_eq!(eval_cbv(&t, 1000), EvalResult::Diverged);
    }

    #[test]
    fn recursion_and_conditionals() {
        let t = p("let rec fact n = if n <= 0 then 1 else n * fact (n - 1) in fact 5");
        assert_eq!(eval_cbv(&t, 10_000), EvalResult::Value(int(120)));
        assert_eq!(eval_cbn(&t, 10_000), EvalResult::Value(int(120)));
    }

    #[test]
    fn pairs_and_stuck_terms() {
        assert_eq!(eval_cbv(&p("(\\(a, b). a - b) (5, 3)"), 100), EvalResult::Value(int(2)));
        assert!(matches!(eval_cbv(&p("1 2"), 100), EvalResult::Stuck(_)));
        assert!(matches!(eval_cbv(&p("if 1 then 2 else 3"), 100), EvalResult::Stuck(_)));
        assert!(matches!(eval_cbv(&p("true + 1"), 100), EvalResult::Stuck(_)));
    }
}
