//! Lexer and recursive-descent parser for the concrete grammar.
//!
//! Sorts:    `g | s '*' s | s '->' s | 'P' s` with `*` binding tighter than
//!           `->`, `->` right-associative, `*` left-associative.
//! Terms:    `ident (':' sort)? | '<' t ',' t '>' | 'fst' t | 'snd' t | t t`
//!           with application left-associative, `fst`/`snd` prefix.
//! Formulas: `'E' t | t '=' t | t 'in' t | t '<=T' t | t '<=T' '(' t ',' t ')'
//!           | '~' f | f '/\' f | f '\/' f | f '=>' f | f '<=>' f
//!           | 'forall' x ':' s '.' f | 'exists' x ':' s '.' f`
//!           with precedence `~` > `/\` > `\/` > `=>` (right-assoc) > `<=>`;
//!           quantifier scope extends maximally right. Comparison chaining is
//!           rejected. `?A`, `?A(t,..)` and `?t` are schema holes.

use std::fmt;

use thiserror::Error;

use super::{Formula, Sort, Term};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Hole(String),
    LParen,
    RParen,
    LAngle,
    RAngle,
    Comma,
    Dot,
    Colon,
    Star,
    Arrow,
    Eq,
    Tilde,
    AndOp,
    OrOp,
    ImpliesOp,
    IffOp,
    LeTOp,
    KwIn,
    KwForall,
    KwExists,
    KwE,
    KwFst,
    KwSnd,
    KwP,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(x) => return write!(f, "identifier {x:?}"),
            Tok::Hole(x) => return write!(f, "hole ?{x}"),
            Tok::LParen => "'('",
            Tok::RParen => "')'",
            Tok::LAngle => "'<'",
            Tok::RAngle => "'>'",
            Tok::Comma => "','",
            Tok::Dot => "'.'",
            Tok::Colon => "':'",
            Tok::Star => "'*'",
            Tok::Arrow => "'->'",
            Tok::Eq => "'='",
            Tok::Tilde => "'~'",
            Tok::AndOp => "'/\\'",
            Tok::OrOp => "'\\/'",
            Tok::ImpliesOp => "'=>'",
            Tok::IffOp => "'<=>'",
            Tok::LeTOp => "'<=T'",
            Tok::KwIn => "'in'",
            Tok::KwForall => "'forall'",
            Tok::KwExists => "'exists'",
            Tok::KwE => "'E'",
            Tok::KwFst => "'fst'",
            Tok::KwSnd => "'snd'",
            Tok::KwP => "'P'",
            Tok::Eof => "end of input",
        };
        write!(f, "{s}")
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'\''
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn error(&self, msg: String) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            msg,
        }
    }

    fn bump(&mut self) -> u8 {
        let c = self.src[self.pos];
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn peek3(&self) -> Option<u8> {
        self.src.get(self.pos + 2).copied()
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
                self.bump();
            }
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else {
                out.push((Tok::Eof, line, col));
                return Ok(out);
            };
            let tok = match c {
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b'>' => {
                    self.bump();
                    Tok::RAngle
                }
                b',' => {
                    self.bump();
                    Tok::Comma
                }
                b'.' => {
                    self.bump();
                    Tok::Dot
                }
                b':' => {
                    self.bump();
                    Tok::Colon
                }
                b'*' => {
                    self.bump();
                    Tok::Star
                }
                b'~' => {
                    self.bump();
                    Tok::Tilde
                }
                b'-' => {
                    self.bump();
                    if self.peek() == Some(b'>') {
                        self.bump();
                        Tok::Arrow
                    } else {
                        return Err(self.error("expected '->'".into()));
                    }
                }
                b'=' => {
                    self.bump();
                    if self.peek() == Some(b'>') {
                        self.bump();
                        Tok::ImpliesOp
                    } else {
                        Tok::Eq
                    }
                }
                b'<' => {
                    if self.peek2() == Some(b'=') && self.peek3() == Some(b'>') {
                        self.bump();
                        self.bump();
                        self.bump();
                        Tok::IffOp
                    } else if self.peek2() == Some(b'=') && self.peek3() == Some(b'T') {
                        self.bump();
                        self.bump();
                        self.bump();
                        Tok::LeTOp
                    } else {
                        self.bump();
                        Tok::LAngle
                    }
                }
                b'/' => {
                    self.bump();
                    if self.peek() == Some(b'\\') {
                        self.bump();
                        Tok::AndOp
                    } else {
                        return Err(self.error("expected '/\\'".into()));
                    }
                }
                b'\\' => {
                    self.bump();
                    if self.peek() == Some(b'/') {
                        self.bump();
                        Tok::OrOp
                    } else {
                        return Err(self.error("expected '\\/'".into()));
                    }
                }
                b'?' => {
                    self.bump();
                    let mut name = String::new();
                    while matches!(self.peek(), Some(c) if is_ident_char(c)) {
                        name.push(self.bump() as char);
                    }
                    if name.is_empty() {
                        return Err(self.error("expected a hole name after '?'".into()));
                    }
                    Tok::Hole(name)
                }
                c if is_ident_start(c) => {
                    let mut name = String::new();
                    while matches!(self.peek(), Some(c) if is_ident_char(c)) {
                        name.push(self.bump() as char);
                    }
                    match name.as_str() {
                        "in" => Tok::KwIn,
                        "forall" => Tok::KwForall,
                        "exists" => Tok::KwExists,
                        "E" => Tok::KwE,
                        "fst" => Tok::KwFst,
                        "snd" => Tok::KwSnd,
                        "P" => Tok::KwP,
                        _ => Tok::Ident(name),
                    }
                }
                c => {
                    return Err(self.error(format!("unexpected character {:?}", c as char)));
                }
            };
            out.push((tok, line, col));
        }
    }
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    idx: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: Lexer::new(src).tokens()?,
            idx: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.idx].0
    }

    fn pos(&self) -> (usize, usize) {
        let (_, l, c) = self.toks[self.idx];
        (l, c)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.idx].0.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn error(&self, msg: String) -> ParseError {
        let (line, col) = self.pos();
        ParseError { line, col, msg }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {t}, found {}", self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.bump();
                Ok(x)
            }
            other => Err(self.error(format!("expected an identifier, found {other}"))),
        }
    }

    // ----- sorts ---------------------------------------------------------

    fn sort(&mut self) -> Result<Sort, ParseError> {
        let lhs = self.sort_product()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.sort()?; // right-associative
            Ok(Sort::function(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn sort_product(&mut self) -> Result<Sort, ParseError> {
        let mut acc = self.sort_atom()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let rhs = self.sort_atom()?;
            acc = Sort::product(acc, rhs);
        }
        Ok(acc)
    }

    fn sort_atom(&mut self) -> Result<Sort, ParseError> {
        match self.peek().clone() {
            Tok::KwP => {
                self.bump();
                Ok(Sort::power(self.sort_atom()?))
            }
            Tok::Ident(g) => {
                self.bump();
                Ok(Sort::ground(g))
            }
            Tok::Hole(g) => {
                // Sort placeholder: parsed as a ground sort named "?g".
                self.bump();
                Ok(Sort::ground(format!("?{g}")))
            }
            Tok::LParen => {
                self.bump();
                let s = self.sort()?;
                self.expect(Tok::RParen)?;
                Ok(s)
            }
            other => Err(self.error(format!("expected a sort, found {other}"))),
        }
    }

    // ----- terms ---------------------------------------------------------

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.term_prefix()?;
        loop {
            match self.peek() {
                Tok::Ident(_)
                | Tok::Hole(_)
                | Tok::LAngle
                | Tok::LParen
                | Tok::KwFst
                | Tok::KwSnd => {
                    let arg = self.term_prefix()?;
                    acc = Term::app(acc, arg);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term_prefix(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::KwFst => {
                self.bump();
                Ok(Term::Proj1(Box::new(self.term_prefix()?)))
            }
            Tok::KwSnd => {
                self.bump();
                Ok(Term::Proj2(Box::new(self.term_prefix()?)))
            }
            _ => self.term_atom(),
        }
    }

    fn term_atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.bump();
                if *self.peek() == Tok::Colon {
                    self.bump();
                    let s = self.sort()?;
                    Ok(Term::Var(x, Some(s)))
                } else {
                    Ok(Term::Var(x, None))
                }
            }
            Tok::Hole(h) => {
                self.bump();
                Ok(Term::Hole(h))
            }
            Tok::LAngle => {
                self.bump();
                let a = self.term()?;
                self.expect(Tok::Comma)?;
                let b = self.term()?;
                self.expect(Tok::RAngle)?;
                Ok(Term::Pair(Box::new(a), Box::new(b)))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            other => Err(self.error(format!("expected a term, found {other}"))),
        }
    }

    // ----- formulas ------------------------------------------------------

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.formula_implies()?;
        while *self.peek() == Tok::IffOp {
            self.bump();
            let rhs = self.formula_implies()?;
            acc = Formula::iff(acc, rhs);
        }
        Ok(acc)
    }

    fn formula_implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.formula_or()?;
        if *self.peek() == Tok::ImpliesOp {
            self.bump();
            let rhs = self.formula_implies()?; // right-associative
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn formula_or(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.formula_and()?;
        while *self.peek() == Tok::OrOp {
            self.bump();
            let rhs = self.formula_and()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn formula_and(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.formula_unary()?;
        while *self.peek() == Tok::AndOp {
            self.bump();
            let rhs = self.formula_unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn formula_unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.formula_unary()?))
            }
            Tok::KwForall | Tok::KwExists => {
                let is_forall = self.bump() == Tok::KwForall;
                let x = self.ident()?;
                self.expect(Tok::Colon)?;
                let s = self.sort()?;
                self.expect(Tok::Dot)?;
                let body = self.formula()?; // scope extends maximally right
                Ok(if is_forall {
                    Formula::forall(x, s, body)
                } else {
                    Formula::exists(x, s, body)
                })
            }
            _ => self.formula_primary(),
        }
    }

    /// True when the next token could extend a term-application chain or
    /// start an atomic comparison.
    fn term_or_comparison_follows(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Eq
                | Tok::KwIn
                | Tok::LeTOp
                | Tok::Ident(_)
                | Tok::Hole(_)
                | Tok::LAngle
                | Tok::LParen
                | Tok::KwFst
                | Tok::KwSnd
        )
    }

    fn no_chaining(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Eq | Tok::KwIn | Tok::LeTOp => Err(self.error(
                "comparison chaining is not allowed; parenthesize the atomic formula".into(),
            )),
            _ => Ok(()),
        }
    }

    fn formula_primary(&mut self) -> Result<Formula, ParseError> {
        if *self.peek() == Tok::KwE {
            self.bump();
            let t = self.term()?;
            self.no_chaining()?;
            return Ok(Formula::Defined(t));
        }
        // Formula hole: `?A` or `?A(args)`. A hole followed by a comparison
        // operator or by more term material is a term hole inside an atomic
        // formula instead; reparse through the term route in that case.
        if let Tok::Hole(h) = self.peek().clone() {
            let save = self.idx;
            self.bump();
            if *self.peek() == Tok::LParen {
                let args_ok = (|| -> Result<Vec<Term>, ParseError> {
                    self.bump();
                    let mut args = vec![self.term()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen)?;
                    Ok(args)
                })();
                match args_ok {
                    Ok(args) if !self.term_or_comparison_follows() => {
                        return Ok(Formula::Hole(h, args));
                    }
                    _ => {}
                }
            } else if !self.term_or_comparison_follows() {
                return Ok(Formula::Hole(h, Vec::new()));
            }
            self.idx = save; // term hole heading an atomic formula
        }
        // Try an atomic formula headed by a term; fall back to a
        // parenthesized formula.
        let save = self.idx;
        match self.term() {
            Ok(lhs) => match self.peek().clone() {
                Tok::Eq => {
                    self.bump();
                    let rhs = self.term()?;
                    self.no_chaining()?;
                    Ok(Formula::Eq(lhs, rhs))
                }
                Tok::KwIn => {
                    self.bump();
                    let rhs = self.term()?;
                    self.no_chaining()?;
                    Ok(Formula::Mem(lhs, rhs))
                }
                Tok::LeTOp => {
                    self.bump();
                    self.le_t_rhs(lhs)
                }
                _ => {
                    // Not an atomic formula; retry as parenthesized formula.
                    if self.toks[save].0 == Tok::LParen {
                        self.idx = save;
                        self.bump();
                        let f = self.formula()?;
                        self.expect(Tok::RParen)?;
                        self.no_chaining()?;
                        Ok(f)
                    } else {
                        Err(self.error(format!(
                            "expected '=', 'in', or '<=T' after a term, found {}",
                            self.peek()
                        )))
                    }
                }
            },
            Err(term_err) => {
                if self.toks[save].0 == Tok::LParen {
                    self.idx = save;
                    self.bump();
                    let f = self.formula()?;
                    self.expect(Tok::RParen)?;
                    self.no_chaining()?;
                    Ok(f)
                } else {
                    Err(term_err)
                }
            }
        }
    }

    /// After `lhs <=T`: either a pair bound `(s, t)` or a plain term.
    fn le_t_rhs(&mut self, lhs: Term) -> Result<Formula, ParseError> {
        if *self.peek() == Tok::LParen {
            let save = self.idx;
            self.bump();
            let s = self.term()?;
            if *self.peek() == Tok::Comma {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                self.no_chaining()?;
                return Ok(Formula::LeTPair(lhs, s, t));
            }
            self.idx = save;
        }
        let rhs = self.term()?;
        self.no_chaining()?;
        Ok(Formula::LeT(lhs, rhs))
    }

    fn finish<T>(self, value: T) -> Result<T, ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(value)
        } else {
            Err(self.error(format!("unexpected {} after a complete input", self.peek())))
        }
    }
}

pub fn parse_sort(text: &str) -> Result<Sort, ParseError> {
    let mut p = Parser::new(text)?;
    let s = p.sort()?;
    p.finish(s)
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.term()?;
    p.finish(t)
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text)?;
    let f = p.formula()?;
    p.finish(f)
}
