//! Plain propositional formulas, generic over the variable type.
//!
//! `Prop<usize>` is the skeleton extracted by normalization; `Prop<String>`
//! is the input of the propositional encoder.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Prop<V> {
    Var(V),
    Not(Box<Prop<V>>),
    And(Box<Prop<V>>, Box<Prop<V>>),
    Or(Box<Prop<V>>, Box<Prop<V>>),
    Implies(Box<Prop<V>>, Box<Prop<V>>),
    Iff(Box<Prop<V>>, Box<Prop<V>>),
}

impl<V> Prop<V> {
    pub fn not(p: Prop<V>) -> Prop<V> {
        Prop::Not(Box::new(p))
    }

    pub fn and(a: Prop<V>, b: Prop<V>) -> Prop<V> {
        Prop::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Prop<V>, b: Prop<V>) -> Prop<V> {
        Prop::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Prop<V>, b: Prop<V>) -> Prop<V> {
        Prop::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Prop<V>, b: Prop<V>) -> Prop<V> {
        Prop::Iff(Box::new(a), Box::new(b))
    }

    pub fn eval(&self, assign: &impl Fn(&V) -> bool) -> bool {
        match self {
            Prop::Var(v) => assign(v),
            Prop::Not(a) => !a.eval(assign),
            Prop::And(a, b) => a.eval(assign) && b.eval(assign),
            Prop::Or(a, b) => a.eval(assign) || b.eval(assign),
            Prop::Implies(a, b) => !a.eval(assign) || b.eval(assign),
            Prop::Iff(a, b) => a.eval(assign) == b.eval(assign),
        }
    }

    /// Variables in first-occurrence order, deduplicated.
    pub fn variables(&self) -> Vec<&V>
    where
        V: PartialEq,
    {
        let mut out = Vec::new();
        fn go<'a, V: PartialEq>(p: &'a Prop<V>, out: &mut Vec<&'a V>) {
            match p {
                Prop::Var(v) => {
                    if !out.contains(&v) {
                        out.push(v);
                    }
                }
                Prop::Not(a) => go(a, out),
                Prop::And(a, b) | Prop::Or(a, b) | Prop::Implies(a, b) | Prop::Iff(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        go(self, &mut out);
        out
    }
}

/// Exhaustive truth-table satisfiability; intended for small variable
/// counts only.
pub fn truth_table_sat<V: PartialEq>(p: &Prop<V>) -> bool {
    let vars = p.variables();
    let n = vars.len();
    assert!(n <= 24, "truth_table_sat is for small formulas");
    (0u64..(1 << n)).any(|mask| {
        p.eval(&|v: &V| {
            let idx = vars.iter().position(|w| *w == v).unwrap();
            mask & (1 << idx) != 0
        })
    })
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("propositional syntax error at byte {at}: {message}")]
pub struct PropParseError {
    pub at: usize,
    pub message: String,
}

/// Parses propositional formulas over named variables.
///
/// Connectives: `~`/`!`/`not`, `&`/`and`, `|`/`or`, `->`, `<->`;
/// implication is right-associative.
pub fn parse_prop(text: &str) -> Result<Prop<String>, PropParseError> {
    #[derive(PartialEq, Clone, Debug)]
    enum T {
        Ident(String),
        Not,
        And,
        Or,
        Arrow,
        Iff,
        LParen,
        RParen,
    }
    let bytes = text.as_bytes();
    let mut toks: Vec<(usize, T)> = Vec::new();
    let mut at = 0usize;
    while at < bytes.len() {
        let b = bytes[at];
        if b.is_ascii_whitespace() {
            at += 1;
            continue;
        }
        let start = at;
        let t = match b {
            b'~' | b'!' => {
                at += 1;
                T::Not
            }
            b'&' => {
                at += 1;
                T::And
            }
            b'|' => {
                at += 1;
                T::Or
            }
            b'(' => {
                at += 1;
                T::LParen
            }
            b')' => {
                at += 1;
                T::RParen
            }
            b'-' if bytes.get(at + 1) == Some(&b'>') => {
                at += 2;
                T::Arrow
            }
            b'<' if text[at..].starts_with("<->") => {
                at += 3;
                T::Iff
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while at < bytes.len() && (bytes[at].is_ascii_alphanumeric() || bytes[at] == b'_') {
                    at += 1;
                }
                match &text[start..at] {
                    "not" => T::Not,
                    "and" => T::And,
                    "or" => T::Or,
                    name => T::Ident(name.to_string()),
                }
            }
            _ => {
                return Err(PropParseError {
                    at,
                    message: format!("unexpected character {:?}", b as char),
                })
            }
        };
        toks.push((start, t));
    }

    struct P {
        toks: Vec<(usize, T)>,
        pos: usize,
        len: usize,
    }
    impl P {
        fn peek(&self) -> Option<&T> {
            self.toks.get(self.pos).map(|(_, t)| t)
        }
        fn err(&self, message: &str) -> PropParseError {
            let at = self.toks.get(self.pos).map(|(a, _)| *a).unwrap_or(self.len);
            PropParseError { at, message: message.to_string() }
        }
        fn iff(&mut self) -> Result<Prop<String>, PropParseError> {
            let mut acc = self.imp()?;
            while self.peek() == Some(&T::Iff) {
                self.pos += 1;
                acc = Prop::iff(acc, self.imp()?);
            }
            Ok(acc)
        }
        fn imp(&mut self) -> Result<Prop<String>, PropParseError> {
            let lhs = self.or()?;
            if self.peek() == Some(&T::Arrow) {
                self.pos += 1;
                return Ok(Prop::implies(lhs, self.imp()?));
            }
            Ok(lhs)
        }
        fn or(&mut self) -> Result<Prop<String>, PropParseError> {
            let mut acc = self.and()?;
            while self.peek() == Some(&T::Or) {
                self.pos += 1;
                acc = Prop::or(acc, self.and()?);
            }
            Ok(acc)
        }
        fn and(&mut self) -> Result<Prop<String>, PropParseError> {
            let mut acc = self.unary()?;
            while self.peek() == Some(&T::And) {
                self.pos += 1;
                acc = Prop::and(acc, self.unary()?);
            }
            Ok(acc)
        }
        fn unary(&mut self) -> Result<Prop<String>, PropParseError> {
            match self.peek() {
                Some(T::Not) => {
                    self.pos += 1;
                    Ok(Prop::not(self.unary()?))
                }
                Some(T::LParen) => {
                    self.pos += 1;
                    let inner = self.iff()?;
                    if self.peek() != Some(&T::RParen) {
                        return Err(self.err("expected `)`"));
                    }
                    self.pos += 1;
                    Ok(inner)
                }
                Some(T::Ident(_)) => {
                    let name = match &self.toks[self.pos].1 {
                        T::Ident(n) => n.clone(),
                        _ => unreachable!(),
                    };
                    self.pos += 1;
                    Ok(Prop::Var(name))
                }
                _ => Err(self.err("expected a propositional formula")),
            }
        }
    }
    let mut p = P { toks, pos: 0, len: bytes.len() };
    let out = p.iff()?;
    if p.pos != p.toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}

impl fmt::Display for Prop<String> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn prec(p: &Prop<String>) -> u8 {
            match p {
                Prop::Iff(..) => 1,
                Prop::Implies(..) => 2,
                Prop::Or(..) => 3,
                Prop::And(..) => 4,
                Prop::Not(..) => 5,
                Prop::Var(..) => 6,
            }
        }
        fn go(p: &Prop<String>, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let this = prec(p);
            if this < min {
                f.write_str("(")?;
                go(p, 0, f)?;
                return f.write_str(")");
            }
            match p {
                Prop::Var(v) => f.write_str(v),
                Prop::Not(a) => {
                    f.write_str("~")?;
                    go(a, 5, f)
                }
                Prop::And(a, b) => {
                    go(a, 4, f)?;
                    f.write_str(" & ")?;
                    go(b, 5, f)
                }
                Prop::Or(a, b) => {
                    go(a, 3, f)?;
                    f.write_str(" | ")?;
                    go(b, 4, f)
                }
                Prop::Implies(a, b) => {
                    go(a, 3, f)?;
                    f.write_str(" -> ")?;
                    go(b, 2, f)
                }
                Prop::Iff(a, b) => {
                    go(a, 1, f)?;
                    f.write_str(" <-> ")?;
                    go(b, 2, f)
                }
            }
        }
        go(self, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_eval() {
        let p = parse_prop("p & ~p").unwrap();
        assert!(!truth_table_sat(&p));
        let q = parse_prop("p | !p").unwrap();
        assert!(truth_table_sat(&q));
        let r = parse_prop("(a -> b) <-> (~a | b)").unwrap();
        assert!(truth_table_sat(&r));
        assert!(!truth_table_sat(&Prop::not(r)));
    }

    #[test]
    fn word_connectives() {
        assert_eq!(parse_prop("p and q").unwrap(), parse_prop("p & q").unwrap());
        assert_eq!(parse_prop("p or not q").unwrap(), parse_prop("p | ~q").unwrap());
    }

    #[test]
    fn display_roundtrip() {
        for text in ["p & q | r", "p -> q -> r", "~(p <-> q) & r_1"] {
            let p = parse_prop(text).unwrap();
            assert_eq!(parse_prop(&p.to_string()).unwrap(), p);
        }
    }
}
