use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::{AffineExpr, AtomRel, Formula, StateSpace, VarRef};
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: undeclared variable `{name}`")]
    Undeclared { line: usize, col: usize, name: String },
    #[error("{line}:{col}: zero denominator")]
    ZeroDenominator { line: usize, col: usize },
    #[error("{line}:{col}: duplicate variable `{name}`")]
    Duplicate { line: usize, col: usize, name: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Prime,
    Semi,
    Comma,
    LParen,
    RParen,
    Bang,
    AndAnd,
    OrOr,
    Rel(AtomRel),
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("{other:?}"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let two = |t: Tok| (t, 2usize);
        let (tok, len) = match (c, next) {
            ('&', Some('&')) => two(Tok::AndAnd),
            ('|', Some('|')) => two(Tok::OrOr),
            ('<', Some('=')) => two(Tok::Rel(AtomRel::Le)),
            ('>', Some('=')) => two(Tok::Rel(AtomRel::Ge)),
            ('=', Some('=')) => two(Tok::Rel(AtomRel::Eq)),
            ('!', Some('=')) => two(Tok::Rel(AtomRel::Ne)),
            ('<', _) => (Tok::Rel(AtomRel::Lt), 1),
            ('>', _) => (Tok::Rel(AtomRel::Gt), 1),
            ('!', _) => (Tok::Bang, 1),
            ('\'', _) => (Tok::Prime, 1),
            (';', _) => (Tok::Semi, 1),
            (',', _) => (Tok::Comma, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            (d, _) if d.is_ascii_digit() => {
                let start = i;
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let digits: String = chars[start..j].iter().collect();
                (Tok::Int(digits.parse().expect("ascii digits")), j - start)
            }
            (a, _) if a.is_ascii_alphabetic() || a == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                (Tok::Ident(chars[start..j].iter().collect()), j - start)
            }
            (other, _) => {
                return Err(ParseError::Syntax {
                    line: tl,
                    col: tc,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        };
        advance(len, &mut i, &mut col);
        out.push(Spanned { tok, line: tl, col: tc });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    space: StateSpace,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax { line, col, msg: msg.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", self.peek().describe()))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            other => {
                let found = other.describe();
                self.error(format!("expected `{kw}`, found {found}"))
            }
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), ParseError> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, line, col))
            }
            other => self.error(format!("expected identifier, found {}", other.describe())),
        }
    }

    fn file(&mut self) -> Result<Formula, ParseError> {
        self.keyword("vars")?;
        let mut names: Vec<String> = Vec::new();
        loop {
            let (name, line, col) = self.ident()?;
            if names.contains(&name) {
                return Err(ParseError::Duplicate { line, col, name });
            }
            names.push(name);
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::Semi, "`;`")?;
        self.space = StateSpace::new(names).expect("duplicates rejected above");
        self.keyword("loop")?;
        self.expect(Tok::LParen, "`(`")?;
        let body = self.formula()?;
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::Semi, "`;`")?;
        if *self.peek() != Tok::Eof {
            return self.error(format!("trailing input {}", self.peek().describe()));
        }
        Ok(body)
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.conj()?];
        while *self.peek() == Tok::OrOr {
            self.bump();
            parts.push(self.conj()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.unit()?];
        while *self.peek() == Tok::AndAnd {
            self.bump();
            parts.push(self.unit()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn unit(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::Not(Box::new(self.unit()?)))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.expr()?;
        let rel = match self.peek() {
            Tok::Rel(r) => *r,
            other => {
                let found = other.describe();
                return self.error(format!("expected comparison operator, found {found}"));
            }
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(Formula::Atom(lhs.sub(&rhs), rel))
    }

    fn expr(&mut self) -> Result<AffineExpr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<AffineExpr, ParseError> {
        let negate = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let t = match self.peek().clone() {
            Tok::Int(_) => {
                let lit = self.literal()?;
                if *self.peek() == Tok::Star {
                    self.bump();
                    let v = self.variable()?;
                    AffineExpr::term(v, lit)
                } else {
                    AffineExpr::constant(lit)
                }
            }
            Tok::Ident(_) => AffineExpr::var(self.variable()?),
            other => return self.error(format!("expected term, found {}", other.describe())),
        };
        Ok(if negate { t.neg() } else { t })
    }

    fn literal(&mut self) -> Result<Rational, ParseError> {
        let num = match self.bump().tok {
            Tok::Int(n) => n,
            _ => unreachable!("literal called on non-integer"),
        };
        if *self.peek() != Tok::Slash {
            return Ok(Rational::from_integer(num));
        }
        self.bump();
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::Int(den) => {
                self.bump();
                if den.is_zero() {
                    return Err(ParseError::ZeroDenominator { line, col });
                }
                Ok(Rational::new(num, den))
            }
            other => self.error(format!("expected denominator, found {}", other.describe())),
        }
    }

    fn variable(&mut self) -> Result<VarRef, ParseError> {
        let (name, line, col) = self.ident()?;
        let index = self
            .space
            .index_of(&name)
            .ok_or(ParseError::Undeclared { line, col, name })?;
        let primed = if *self.peek() == Tok::Prime {
            self.bump();
            true
        } else {
            false
        };
        Ok(VarRef { index, primed })
    }
}

/// Parses a `.llp` program into its state space and loop body.
pub fn parse_program(text: &str) -> Result<(StateSpace, Formula), ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, space: StateSpace { names: Vec::new() } };
    let body = p.file()?;
    Ok((p.space, body))
}
