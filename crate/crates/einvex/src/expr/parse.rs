//! Lexer and recursive-descent parser for the expression grammar.

use super::{Cmp, Expr, Node};
use std::fmt;

/// Parse failure with a byte position into the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.position, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Cmp(Cmp),
    If,
    Then,
    Else,
    Abs,
    Min,
    Max,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn error<T>(&self, pos: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            position: pos,
            message: message.into(),
        })
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>, ParseError> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let start = self.pos;
            let c = self.src[self.pos];
            match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    self.pos += 1;
                }
                b'+' => {
                    self.pos += 1;
                    out.push((start, Tok::Plus));
                }
                b'-' => {
                    self.pos += 1;
                    out.push((start, Tok::Minus));
                }
                b'*' => {
                    self.pos += 1;
                    out.push((start, Tok::Star));
                }
                b'/' => {
                    self.pos += 1;
                    out.push((start, Tok::Slash));
                }
                b'^' => {
                    self.pos += 1;
                    out.push((start, Tok::Caret));
                }
                b'(' => {
                    self.pos += 1;
                    out.push((start, Tok::LParen));
                }
                b')' => {
                    self.pos += 1;
                    out.push((start, Tok::RParen));
                }
                b'[' => {
                    self.pos += 1;
                    out.push((start, Tok::LBracket));
                }
                b']' => {
                    self.pos += 1;
                    out.push((start, Tok::RBracket));
                }
                b',' => {
                    self.pos += 1;
                    out.push((start, Tok::Comma));
                }
                b'<' => {
                    self.pos += 1;
                    if self.peek() == Some(b'=') {
                        self.pos += 1;
                        out.push((start, Tok::Cmp(Cmp::Le)));
                    } else {
                        out.push((start, Tok::Cmp(Cmp::Lt)));
                    }
                }
                b'>' => {
                    self.pos += 1;
                    if self.peek() == Some(b'=') {
                        self.pos += 1;
                        out.push((start, Tok::Cmp(Cmp::Ge)));
                    } else {
                        out.push((start, Tok::Cmp(Cmp::Gt)));
                    }
                }
                b'=' => {
                    if self.src.get(self.pos + 1) == Some(&b'=') {
                        self.pos += 2;
                        out.push((start, Tok::Cmp(Cmp::Eq)));
                    } else {
                        return self.error(start, "expected `==`");
                    }
                }
                b'!' => {
                    if self.src.get(self.pos + 1) == Some(&b'=') {
                        self.pos += 2;
                        out.push((start, Tok::Cmp(Cmp::Ne)));
                    } else {
                        return self.error(start, "expected `!=`");
                    }
                }
                b'0'..=b'9' | b'.' => {
                    out.push((start, self.number(start)?));
                }
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    out.push((start, self.ident(start)));
                }
                other => {
                    return self.error(start, format!("unexpected character `{}`", other as char))
                }
            }
        }
        Ok(out)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(b'0'..=b'9')) {
                while matches!(self.peek(), Some(b'0'..=b'9')) {
                    self.pos += 1;
                }
            } else {
                // `1.5e` with no digits: the `e` belongs to an identifier, back off.
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text.parse::<f64>() {
            Ok(v) => Ok(Tok::Num(v)),
            Err(_) => self.error(start, format!("bad number literal `{}`", text)),
        }
    }

    fn ident(&mut self, start: usize) -> Tok {
        while matches!(
            self.peek(),
            Some(b'a'..=b'z') | Some(b'A'..=b'Z') | Some(b'0'..=b'9') | Some(b'_')
        ) {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text {
            "if" => Tok::If,
            "then" => Tok::Then,
            "else" => Tok::Else,
            "abs" => Tok::Abs,
            "min" => Tok::Min,
            "max" => Tok::Max,
            _ => Tok::Ident(text.to_string()),
        }
    }
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    vars: &'a [&'a str],
    end: usize,
}

impl<'a> Parser<'a> {
    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let position = self
            .toks
            .get(self.idx)
            .map(|(p, _)| *p)
            .unwrap_or(self.end);
        Err(ParseError {
            position,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(_, t)| t.clone());
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(tok) {
            self.idx += 1;
            Ok(())
        } else {
            self.error(format!("expected {}", what))
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut node = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.idx += 1;
                    node = Node::Add(Box::new(node), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.idx += 1;
                    node = Node::Sub(Box::new(node), Box::new(self.term()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut node = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.idx += 1;
                    node = Node::Mul(Box::new(node), Box::new(self.factor()?));
                }
                Some(Tok::Slash) => {
                    self.idx += 1;
                    node = Node::Div(Box::new(node), Box::new(self.factor()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.idx += 1;
            return Ok(Node::Neg(Box::new(self.factor()?)));
        }
        let atom = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.idx += 1;
            let exp = match self.bump() {
                Some(Tok::Num(v)) if v.fract() == 0.0 && v >= 0.0 && v <= i32::MAX as f64 => {
                    v as i32
                }
                _ => {
                    self.idx = self.idx.saturating_sub(1);
                    return self.error("exponent must be a nonnegative integer literal");
                }
            };
            return Ok(Node::Pow(Box::new(atom), exp));
        }
        Ok(atom)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Node::Num(v)),
            Some(Tok::Ident(name)) => match self.vars.iter().position(|v| **v == name) {
                Some(i) => Ok(Node::Var(i)),
                None => {
                    self.idx -= 1;
                    self.error(format!(
                        "unknown variable `{}` (declared: {})",
                        name,
                        self.vars.join(", ")
                    ))
                }
            },
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Abs) => {
                self.expect(&Tok::LParen, "`(` after abs")?;
                let inner = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(Node::Abs(Box::new(inner)))
            }
            Some(Tok::Min) => {
                let (a, b) = self.pair("min")?;
                Ok(Node::Min(Box::new(a), Box::new(b)))
            }
            Some(Tok::Max) => {
                let (a, b) = self.pair("max")?;
                Ok(Node::Max(Box::new(a), Box::new(b)))
            }
            Some(Tok::If) => {
                let lhs = self.expr()?;
                let op = match self.bump() {
                    Some(Tok::Cmp(op)) => op,
                    _ => {
                        self.idx = self.idx.saturating_sub(1);
                        return self.error("expected comparison operator in `if` guard");
                    }
                };
                let rhs = self.expr()?;
                self.expect(&Tok::Then, "`then`")?;
                let then = self.expr()?;
                // `else` is mandatory: every piecewise expression is total.
                self.expect(&Tok::Else, "`else` (piecewise expressions must be total)")?;
                let otherwise = self.expr()?;
                Ok(Node::If {
                    lhs: Box::new(lhs),
                    op,
                    rhs: Box::new(rhs),
                    then: Box::new(then),
                    otherwise: Box::new(otherwise),
                })
            }
            Some(_) => {
                self.idx -= 1;
                self.error("expected a number, variable, `(`, `abs`, `min`, `max` or `if`")
            }
            None => self.error("unexpected end of input"),
        }
    }

    fn pair(&mut self, what: &str) -> Result<(Node, Node), ParseError> {
        self.expect(&Tok::LParen, &format!("`(` after {}", what))?;
        let a = self.expr()?;
        self.expect(&Tok::Comma, "`,`")?;
        let b = self.expr()?;
        self.expect(&Tok::RParen, "`)`")?;
        Ok((a, b))
    }
}

pub(super) fn parse(src: &str, vars: &[&str]) -> Result<Expr, ParseError> {
    let toks = Lexer::new(src).tokens()?;
    let mut p = Parser {
        toks,
        idx: 0,
        vars,
        end: src.len(),
    };
    let components = if p.peek() == Some(&Tok::LBracket) {
        p.idx += 1;
        let mut comps = vec![p.expr()?];
        while p.peek() == Some(&Tok::Comma) {
            p.idx += 1;
            comps.push(p.expr()?);
        }
        p.expect(&Tok::RBracket, "`]`")?;
        comps
    } else {
        vec![p.expr()?]
    };
    if p.idx != p.toks.len() {
        return p.error("trailing input after expression");
    }
    Ok(Expr::from_parts(
        components,
        vars.iter().map(|v| v.to_string()).collect(),
        src.to_string(),
    ))
}
