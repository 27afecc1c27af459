//! Constants and primitive operations shared by every evaluator.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Const {
    Int(i64),
    Bool(bool),
    Real(f64),
    Unit,
}

impl Const {
    /// Generator name used for the constant in hypernets.
    pub fn label(&self) -> String {
        match self {
            Const::Int(n) => n.to_string(),
            Const::Bool(true) => "true".into(),
            Const::Bool(false) => "false".into(),
            Const::Real(x) => format!("{x:?}"),
            Const::Unit => "unit".into(),
        }
    }

    pub fn from_label(s: &str) -> Option<Const> {
        match s {
            "true" => Some(Const::Bool(true)),
            "false" => Some(Const::Bool(false)),
            "unit" => Some(Const::Unit),
            _ => {
                if let Ok(n) = s.parse::<i64>() {
                    Some(Const::Int(n))
                } else if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
                    s.parse::<f64>().ok().map(Const::Real)
                } else {
                    None
                }
            }
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Const::Int(n) => Some(*n as f64),
            Const::Real(x) => Some(*x),
            _ => None,
        }
    }
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Bool(true) => write!(f, "true"),
            Const::Bool(false) => write!(f, "false"),
            Const::Unit => write!(f, "()"),
            other => write!(f, "{}", other.label()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrimOp {
    Add,
    Sub,
    Mul,
    Neg,
    And,
    Or,
    Not,
    Leq,
    Eq,
}

pub const ALL_PRIMS: [PrimOp; 9] =
    [PrimOp::Add, PrimOp::Sub, PrimOp::Mul, PrimOp::Neg, PrimOp::And, PrimOp::Or, PrimOp::Not, PrimOp::Leq, PrimOp::Eq];

impl PrimOp {
    pub fn name(self) -> &'static str {
        match self {
            PrimOp::Add => "add",
            PrimOp::Sub => "sub",
            PrimOp::Mul => "mul",
            PrimOp::Neg => "neg",
            PrimOp::And => "and",
            PrimOp::Or => "or",
            PrimOp::Not => "not",
            PrimOp::Leq => "leq",
            PrimOp::Eq => "eq",
        }
    }

    pub fn from_name(s: &str) -> Option<PrimOp> {
        ALL_PRIMS.iter().copied().find(|p| p.name() == s)
    }

    pub fn arity(self) -> usize {
        match self {
            PrimOp::Neg | PrimOp::Not => 1,
            _ => 2,
        }
    }

    /// Applies the operation; `None` when the operands have the wrong kind.
    pub fn apply(self, args: &[Const]) -> Option<Const> {
        use Const::*;
        if args.len() != self.arity() {
            return None;
        }
        let arith = |fi: fn(i64, i64) -> i64, fr: fn(f64, f64) -> f64| match (args[0], args[1]) {
            (Int(a), Int(b)) => Some(Int(fi(a, b))),
            (a, b) => Some(Real(fr(a.as_f64()?, b.as_f64()?))),
        };
        match self {
            PrimOp::Add => arith(i64::wrapping_add, |a, b| a + b),
            PrimOp::Sub => arith(i64::wrapping_sub, |a, b| a - b),
            PrimOp::Mul => arith(i64::wrapping_mul, |a, b| a * b),
            PrimOp::Neg => match args[0] {
                Int(a) => Some(Int(a.wrapping_neg())),
                Real(a) => Some(Real(-a)),
                _ => None,
            },
            PrimOp::And => match (args[0], args[1]) {
                (Bool(a), Bool(b)) => Some(Bool(a && b)),
                _ => None,
            },
            PrimOp::Or => match (args[0], args[1]) {
                (Bool(a), Bool(b)) => Some(Bool(a || b)),
                _ => None,
            },
            PrimOp::Not => match args[0] {
                Bool(a) => Some(Bool(!a)),
                _ => None,
            },
            PrimOp::Leq => match (args[0], args[1]) {
                (Int(a), Int(b)) => Some(Bool(a <= b)),
                (a, b) => Some(Bool(a.as_f64()? <= b.as_f64()?)),
            },
            PrimOp::Eq => match (args[0], args[1]) {
                (Int(a), Int(b)) => Some(Bool(a == b)),
                (Bool(a), Bool(b)) => Some(Bool(a == b)),
                (a, b) => Some(Bool(a.as_f64()? == b.as_f64()?)),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for c in [Const::Int(-3), Const::Int(0), Const::Bool(true), Const::Real(1.5), Const::Real(2.0), Const::Unit] {
            assert_eq!(Const::from_label(&c.label()), Some(c));
        }
        assert_eq!(Const::from_label("add"), None);
    }

    #[test]
    fn mixed_arithmetic_promotes() {
        assert_eq!(PrimOp::Mul.apply(&[Const::Int(2), Const::Real(1.5)]), Some(Const::Real(3.0)));
        assert_eq!(PrimOp::Add.apply(&[Const::Int(2), Const::Bool(true)]), None);
        assert_eq!(PrimOp::Leq.apply(&[Const::Int(2), Const::Int(2)]), Some(Const::Bool(true)));
    }
}
