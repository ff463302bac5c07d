//! Recursive-descent parser for the surface syntax.
//!
//! Precedence, loosest to tightest: `<->`, `->` (right-associative), `or`,
//! `and`, then `not` / quantifiers / atoms. A quantifier body is a unary
//! formula, so composite matrices need parentheses:
//! `forall x in y . (a in y and b in y)`.

use std::fmt;

use super::{Formula, Variable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub at: usize,
    pub line: u32,
    pub column: u32,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    MapIdent(String),
    Keyword(&'static str),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Eq,
    Ne,
    Arrow,
    Iff,
}

const KEYWORDS: &[&str] = &[
    "forall", "exists", "not", "and", "or", "in", "notin", "sub", "dom", "ran", "img", "comp",
    "nonpairs",
];

struct Lexer<'a> {
    text: &'a str,
    bytes: &'a [u8],
    at: usize,
    relaxed: bool,
}

impl<'a> Lexer<'a> {
    fn error(&self, at: usize, message: impl Into<String>) -> ParseError {
        let mut line = 1u32;
        let mut column = 1u32;
        for b in self.bytes[..at.min(self.bytes.len())].iter() {
            if *b == b'\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        ParseError { at, line, column, message: message.into() }
    }

    fn ident_continue(&self, b: u8) -> bool {
        b.is_ascii_alphanumeric()
            || b == b'_'
            || b == b'\''
            || (self.relaxed && (b == b'#' || b == b'$'))
    }

    fn tokens(&mut self) -> Result<Vec<(usize, Tok)>, ParseError> {
        let mut out = Vec::new();
        while self.at < self.bytes.len() {
            let b = self.bytes[self.at];
            let start = self.at;
            if b.is_ascii_whitespace() {
                self.at += 1;
                continue;
            }
            let tok = match b {
                b'(' => {
                    self.at += 1;
                    Tok::LParen
                }
                b')' => {
                    self.at += 1;
                    Tok::RParen
                }
                b'[' => {
                    self.at += 1;
                    Tok::LBrack
                }
                b']' => {
                    self.at += 1;
                    Tok::RBrack
                }
                b',' => {
                    self.at += 1;
                    Tok::Comma
                }
                b'.' => {
                    self.at += 1;
                    Tok::Dot
                }
                b'=' => {
                    self.at += 1;
                    Tok::Eq
                }
                b'!' => {
                    if self.bytes.get(self.at + 1) == Some(&b'=') {
                        self.at += 2;
                        Tok::Ne
                    } else {
                        return Err(self.error(start, "expected `!=`"));
                    }
                }
                b'-' => {
                    if self.bytes.get(self.at + 1) == Some(&b'>') {
                        self.at += 2;
                        Tok::Arrow
                    } else {
                        return Err(self.error(start, "expected `->`"));
                    }
                }
                b'<' => {
                    if self.text[self.at..].starts_with("<->") {
                        self.at += 3;
                        Tok::Iff
                    } else {
                        return Err(self.error(start, "expected `<->`"));
                    }
                }
                b'@' => {
                    self.at += 1;
                    let name = self.lex_name(start)?;
                    Tok::MapIdent(name)
                }
                b'#' | b'$' => {
                    return Err(self.error(
                        start,
                        "`#` and `$` are reserved for generated names and cannot start an identifier",
                    ));
                }
                c if c.is_ascii_alphabetic() => {
                    let name = self.lex_name(start)?;
                    match KEYWORDS.iter().find(|k| **k == name) {
                        Some(k) => Tok::Keyword(k),
                        None => Tok::Ident(name),
                    }
                }
                _ => return Err(self.error(start, format!("unexpected character {:?}", b as char))),
            };
            out.push((start, tok));
        }
        Ok(out)
    }

    fn lex_name(&mut self, start: usize) -> Result<String, ParseError> {
        let name_start = self.at;
        if self.at >= self.bytes.len() || !self.bytes[self.at].is_ascii_alphabetic() {
            return Err(self.error(start, "expected an identifier"));
        }
        self.at += 1;
        while self.at < self.bytes.len() {
            let b = self.bytes[self.at];
            if self.ident_continue(b) {
                self.at += 1;
            } else if b == b'#' || b == b'$' {
                return Err(self.error(
                    self.at,
                    "`#` and `$` are reserved for generated names; not accepted in source text",
                ));
            } else {
                break;
            }
        }
        Ok(self.text[name_start..self.at].to_string())
    }
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    lexer: Lexer<'a>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(at, _)| *at)
            .unwrap_or(self.lexer.bytes.len())
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        self.lexer.error(self.here(), message)
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {}", what)))
        }
    }

    fn expect_keyword(&mut self, kw: &'static str) -> Result<(), ParseError> {
        if self.peek() == Some(&Tok::Keyword(kw)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{}`", kw)))
        }
    }

    fn set_ident(&mut self, what: &str) -> Result<Variable, ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => match self.bump() {
                Some(Tok::Ident(name)) => Ok(Variable::set(name)),
                _ => unreachable!(),
            },
            Some(Tok::MapIdent(name)) => {
                let name = name.clone();
                Err(self.err(format!("sort error: map variable @{} where {} is required", name, what)))
            }
            _ => Err(self.err(format!("expected {}", what))),
        }
    }

    fn map_ident(&mut self) -> Result<Variable, ParseError> {
        match self.peek() {
            Some(Tok::MapIdent(_)) => match self.bump() {
                Some(Tok::MapIdent(name)) => Ok(Variable::map(name)),
                _ => unreachable!(),
            },
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                Err(self.err(format!(
                    "sort error: set variable {} where a map variable is required",
                    name
                )))
            }
            _ => Err(self.err("expected a map variable (`@name`)")),
        }
    }

    /// A pair container: `@f` in the set/map language, a bare set variable
    /// in the set-variables-only language.
    fn pair_container(&mut self) -> Result<Variable, ParseError> {
        match self.bump() {
            Some(Tok::MapIdent(name)) => Ok(Variable::map(name)),
            Some(Tok::Ident(name)) => Ok(Variable::set(name)),
            _ => Err(self.err("expected a variable after `in`")),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.iff()
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.imp()?;
        while self.peek() == Some(&Tok::Iff) {
            self.pos += 1;
            let rhs = self.imp()?;
            acc = Formula::iff(acc, rhs);
        }
        Ok(acc)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.imp()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.and()?;
        while self.peek() == Some(&Tok::Keyword("or")) {
            self.pos += 1;
            let rhs = self.and()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Tok::Keyword("and")) {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Keyword("not")) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Keyword("forall")) => {
                self.pos += 1;
                self.quantified(false)
            }
            Some(Tok::Keyword("exists")) => {
                self.pos += 1;
                self.quantified(true)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.formula()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => self.atom(),
        }
    }

    fn quantified(&mut self, exists: bool) -> Result<Formula, ParseError> {
        if self.peek() == Some(&Tok::LBrack) {
            self.pos += 1;
            let x = self.set_ident("a set variable")?;
            self.expect(&Tok::Comma, "`,`")?;
            let y = self.set_ident("a set variable")?;
            self.expect(&Tok::RBrack, "`]`")?;
            self.expect_keyword("in")?;
            let d = self.pair_container()?;
            self.expect(&Tok::Dot, "`.`")?;
            let body = self.unary()?;
            return Ok(if exists {
                Formula::ExistsPairIn(x, y, d, Box::new(body))
            } else {
                Formula::ForallPairIn(x, y, d, Box::new(body))
            });
        }
        let x = self.set_ident("a set variable")?;
        self.expect_keyword("in")?;
        if self.peek() == Some(&Tok::Keyword("nonpairs")) {
            self.pos += 1;
            self.expect(&Tok::LParen, "`(`")?;
            let z = self.set_ident("a set variable")?;
            self.expect(&Tok::RParen, "`)`")?;
            if exists {
                return Err(self.err("`exists ... in nonpairs(...)` is not part of the language"));
            }
            self.expect(&Tok::Dot, "`.`")?;
            let body = self.unary()?;
            return Ok(Formula::ForallInNonpairs(x, z, Box::new(body)));
        }
        let z = self.set_ident("a set variable as quantifier domain")?;
        self.expect(&Tok::Dot, "`.`")?;
        let body = self.unary()?;
        Ok(if exists {
            Formula::ExistsIn(x, z, Box::new(body))
        } else {
            Formula::ForallIn(x, z, Box::new(body))
        })
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::LBrack) => {
                self.pos += 1;
                let x = self.set_ident("a set variable")?;
                self.expect(&Tok::Comma, "`,`")?;
                let y = self.set_ident("a set variable")?;
                self.expect(&Tok::RBrack, "`]`")?;
                let negated = match self.bump() {
                    Some(Tok::Keyword("in")) => false,
                    Some(Tok::Keyword("notin")) => true,
                    _ => return Err(self.err("expected `in` or `notin` after `[x,y]`")),
                };
                let d = self.pair_container()?;
                let atom = Formula::PairMember(x, y, d);
                Ok(if negated { Formula::not(atom) } else { atom })
            }
            Some(Tok::MapIdent(_)) => {
                let f = self.map_ident()?;
                match self.bump() {
                    Some(Tok::Eq) => Ok(Formula::EqualMap(f, self.map_ident()?)),
                    Some(Tok::Ne) => Ok(Formula::not(Formula::EqualMap(f, self.map_ident()?))),
                    Some(Tok::Keyword("sub")) => {
                        self.expect_keyword("comp")?;
                        self.expect(&Tok::LParen, "`(`")?;
                        let g = self.map_ident()?;
                        self.expect(&Tok::Comma, "`,`")?;
                        let h = self.map_ident()?;
                        self.expect(&Tok::RParen, "`)`")?;
                        Ok(Formula::SubComp(f, g, h))
                    }
                    Some(Tok::Keyword("in")) | Some(Tok::Keyword("notin")) => Err(self.lexer.error(
                        self.toks[self.pos - 1].0,
                        "sort error: a map variable cannot occur on the left of `in`",
                    )),
                    _ => Err(self.err("expected `=`, `!=` or `sub comp(...)` after a map variable")),
                }
            }
            Some(Tok::Ident(_)) => {
                let x = self.set_ident("a set variable")?;
                match self.bump() {
                    Some(Tok::Eq) => Ok(Formula::EqualSet(x, self.set_ident("a set variable")?)),
                    Some(Tok::Ne) => {
                        Ok(Formula::not(Formula::EqualSet(x, self.set_ident("a set variable")?)))
                    }
                    Some(Tok::Keyword("in")) | Some(Tok::Keyword("notin")) => {
                        let negated = matches!(self.toks[self.pos - 1].1, Tok::Keyword("notin"));
                        let atom = if self.peek() == Some(&Tok::Keyword("nonpairs")) {
                            self.pos += 1;
                            self.expect(&Tok::LParen, "`(`")?;
                            let z = self.set_ident("a set variable")?;
                            self.expect(&Tok::RParen, "`)`")?;
                            Formula::MemberNonpairs(x, z)
                        } else {
                            match self.peek() {
                                Some(Tok::MapIdent(_)) => {
                                    return Err(self.err(
                                        "sort error: membership into a map variable is not an atom; use `[x,y] in @f`",
                                    ))
                                }
                                _ => Formula::MemberSet(x, self.set_ident("a set variable")?),
                            }
                        };
                        Ok(if negated { Formula::not(atom) } else { atom })
                    }
                    Some(Tok::Keyword("sub")) => match self.bump() {
                        Some(Tok::Keyword("dom")) => {
                            self.expect(&Tok::LParen, "`(`")?;
                            let f = self.map_ident()?;
                            self.expect(&Tok::RParen, "`)`")?;
                            Ok(Formula::SubDom(x, f))
                        }
                        Some(Tok::Keyword("ran")) => {
                            self.expect(&Tok::LParen, "`(`")?;
                            let f = self.map_ident()?;
                            self.expect(&Tok::RParen, "`)`")?;
                            Ok(Formula::SubRange(x, f))
                        }
                        Some(Tok::Keyword("img")) => {
                            self.expect(&Tok::LParen, "`(`")?;
                            let f = self.map_ident()?;
                            self.expect(&Tok::Comma, "`,`")?;
                            let arg = self.set_ident("a set variable")?;
                            self.expect(&Tok::RParen, "`)`")?;
                            Ok(Formula::SubImage(x, f, arg))
                        }
                        _ => Err(self.err("expected `dom`, `ran` or `img` after `sub`")),
                    },
                    _ => Err(self.err("expected `in`, `notin`, `=`, `!=` or `sub` in an atom")),
                }
            }
            _ => Err(self.err("expected a formula")),
        }
    }
}

fn parse_mode(text: &str, relaxed: bool) -> Result<Formula, ParseError> {
    let mut lexer = Lexer { text, bytes: text.as_bytes(), at: 0, relaxed };
    let toks = lexer.tokens()?;
    let mut p = Parser { toks, pos: 0, lexer };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(f)
}

/// Parses a formula, rejecting the reserved characters `#` and `$` in
/// identifiers so source-level names can never collide with generated ones.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    parse_mode(text, false)
}

/// Parses a formula, additionally accepting identifiers that contain the
/// reserved characters `#` and `$`. Use this to read back machine-produced
/// output such as normalized or reduced formulas.
pub fn parse_relaxed(text: &str) -> Result<Formula, ParseError> {
    parse_mode(text, true)
}
