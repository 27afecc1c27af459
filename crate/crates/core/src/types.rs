//! Object types labelling hypernet wires.

use std::fmt;

use crate::error::ParseError;

/// A wire type: a base sort, the unit, a tensor or a closed arrow.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectType {
    Base(String),
    Unit,
    Tensor(Box<ObjectType>, Box<ObjectType>),
    Arrow(Box<ObjectType>, Box<ObjectType>),
}

impl ObjectType {
    pub fn base(name: &str) -> Self {
        ObjectType::Base(name.to_string())
    }

    /// The reflexive sort used by unityped translations.
    pub fn u() -> Self {
        ObjectType::base("U")
    }

    pub fn tensor(a: ObjectType, b: ObjectType) -> Self {
        ObjectType::Tensor(Box::new(a), Box::new(b))
    }

    pub fn arrow(a: ObjectType, b: ObjectType) -> Self {
        ObjectType::Arrow(Box::new(a), Box::new(b))
    }

    /// Folds a list of wire types into one object, right-nested.
    /// The empty list is the unit.
    pub fn fold(types: &[ObjectType]) -> Self {
        match types {
            [] => ObjectType::Unit,
            [t] => t.clone(),
            [t, rest @ ..] => ObjectType::tensor(t.clone(), ObjectType::fold(rest)),
        }
    }

    /// True when every base sort occurring in the type is `U`.
    pub fn is_unityped(&self) -> bool {
        match self {
            ObjectType::Base(n) => n == "U",
            ObjectType::Unit => true,
            ObjectType::Tensor(a, b) | ObjectType::Arrow(a, b) => a.is_unityped() && b.is_unityped(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let toks = lex(text)?;
        let mut p = TyParser { toks: &toks, pos: 0 };
        let ty = p.arrow()?;
        if p.pos != toks.len() {
            return Err(ParseError::new(1, p.pos + 1, format!("trailing input in type `{text}`")));
        }
        Ok(ty)
    }
}

impl fmt::Display for ObjectType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectType::Base(n) => write!(f, "{n}"),
            ObjectType::Unit => write!(f, "I"),
            ObjectType::Tensor(a, b) => {
                match **a {
                    ObjectType::Arrow(..) => write!(f, "({a})")?,
                    _ => write!(f, "{a}")?,
                }
                write!(f, " * ")?;
                match **b {
                    ObjectType::Arrow(..) | ObjectType::Tensor(..) => write!(f, "({b})"),
                    _ => write!(f, "{b}"),
                }
            }
            ObjectType::Arrow(a, b) => {
                match **a {
                    ObjectType::Arrow(..) => write!(f, "({a})")?,
                    _ => write!(f, "{a}")?,
                }
                write!(f, " -o {b}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Star,
    Lolli,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<Tok>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '*' | '⊗' => {
                out.push(Tok::Star);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '⊸' | '→' => {
                out.push(Tok::Lolli);
                i += 1;
            }
            '-' if matches!(chars.get(i + 1), Some('o') | Some('>')) => {
                out.push(Tok::Lolli);
                i += 2;
            }
            c if c.is_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Name(chars[start..i].iter().collect()));
            }
            _ => return Err(ParseError::new(1, i + 1, format!("unexpected `{c}` in type"))),
        }
    }
    Ok(out)
}

struct TyParser<'a> {
    toks: &'a [Tok],
    pos: usize,
}

impl TyParser<'_> {
    fn arrow(&mut self) -> Result<ObjectType, ParseError> {
        let lhs = self.product()?;
        if self.toks.get(self.pos) == Some(&Tok::Lolli) {
            self.pos += 1;
            let rhs = self.arrow()?;
            return Ok(ObjectType::arrow(lhs, rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<ObjectType, ParseError> {
        let mut items = vec![self.atom()?];
        while self.toks.get(self.pos) == Some(&Tok::Star) {
            self.pos += 1;
            items.push(self.atom()?);
        }
        // `A * B * C` reads as `A * (B * C)`, matching the printer.
        let mut ty = items.pop().expect("non-empty");
        while let Some(prev) = items.pop() {
            ty = ObjectType::tensor(prev, ty);
        }
        Ok(ty)
    }

    fn atom(&mut self) -> Result<ObjectType, ParseError> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Name(n)) => {
                self.pos += 1;
                Ok(if n == "I" { ObjectType::Unit } else { ObjectType::Base(n) })
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.arrow()?;
                if self.toks.get(self.pos) != Some(&Tok::RParen) {
                    return Err(ParseError::new(1, self.pos + 1, "expected `)` in type"));
                }
                self.pos += 1;
                Ok(t)
            }
            other => Err(ParseError::new(1, self.pos + 1, format!("unexpected {other:?} in type"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn print_parse_round_trip() {
        let cases = ["U", "I", "A * B", "A -o B", "(A -o B) -o C", "A * (B * C)", "(A -o B) * C", "A -o B * C"];
        for c in cases {
            let t = ObjectType::parse(c).unwrap();
            assert_eq!(t.to_string(), c);
        }
    }

    #[test]
    fn fold_nests_right() {
        let a = ObjectType::base("A");
        assert_eq!(ObjectType::fold(&[]), ObjectType::Unit);
        assert_eq!(ObjectType::fold(std::slice::from_ref(&a)), a);
        assert_eq!(ObjectType::fold(&[a.clone(), a.clone(), a.clone()]).to_string(), "A * (A * A)");
    }

    #[test]
    fn arrow_is_right_associative() {
        let t = ObjectType::parse("A -o B -o C").unwrap();
        assert_eq!(t, ObjectType::arrow(ObjectType::base("A"), ObjectType::parse("B -o C").unwrap()));
    }
}
