//! Lexer and recursive-descent parser for `.itc` sources.
//!
//! `#` starts a line comment unless it directly continues an identifier:
//! `x#1` is a single name (the inliner mints such names), while `x #1` is
//! `x` followed by a comment.

use thiserror::Error;

use super::ast::{Command, Expr, FunDef, Lval, Op, Program};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("duplicate function `{name}`")]
    DuplicateFunction { name: String },
    #[error("{line}:{col}: call to unknown function `{name}`")]
    UnknownFunction { name: String, line: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Name(String),
    Num(u64),
    KwFn,
    KwInline,
    KwSkip,
    KwIf,
    KwElse,
    KwWhile,
    KwTrue,
    KwFalse,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Semi,
    Arrow,
    Assign,
    RandAssign,
    EqEq,
    Le,
    Lt,
    Plus,
    Minus,
    Star,
    Bang,
    Caret,
    AndAnd,
    OrOr,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("name `{n}`"),
            Tok::Num(n) => format!("number `{n}`"),
            Tok::Eof => "end of input".to_string(),
            t => format!("`{}`", t.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::KwFn => "fn",
            Tok::KwInline => "inline",
            Tok::KwSkip => "skip",
            Tok::KwIf => "if",
            Tok::KwElse => "else",
            Tok::KwWhile => "while",
            Tok::KwTrue => "true",
            Tok::KwFalse => "false",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Arrow => "->",
            Tok::Assign => "=",
            Tok::RandAssign => "=$",
            Tok::EqEq => "==",
            Tok::Le => "<=",
            Tok::Lt => "<",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Bang => "!",
            Tok::Caret => "^",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            _ => "",
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

type Spanned = (Tok, usize, usize);

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_ident_cont(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'#'
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
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

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { line: self.line, col: self.col, msg: msg.into() })
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(c) = self.peek() {
                if c.is_ascii_whitespace() {
                    self.bump();
                } else if c == b'#' {
                    // Comment: a bare `#` (identifier-continuations were
                    // consumed by the name rule below).
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                } else {
                    break;
                }
            }
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else {
                out.push((Tok::Eof, line, col));
                return Ok(out);
            };
            let tok = if is_ident_start(c) {
                let start = self.pos;
                while self.peek().is_some_and(is_ident_cont) {
                    self.bump();
                }
                let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match word {
                    "fn" => Tok::KwFn,
                    "inline" => Tok::KwInline,
                    "skip" => Tok::KwSkip,
                    "if" => Tok::KwIf,
                    "else" => Tok::KwElse,
                    "while" => Tok::KwWhile,
                    "true" => Tok::KwTrue,
                    "false" => Tok::KwFalse,
                    _ => Tok::Name(word.to_string()),
                }
            } else if c.is_ascii_digit() {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.bump();
                }
                let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match digits.parse::<u64>() {
                    Ok(n) => Tok::Num(n),
                    Err(_) => return self.err(format!("number `{digits}` does not fit in 64 bits")),
                }
            } else {
                self.bump();
                match c {
                    b'{' => Tok::LBrace,
                    b'}' => Tok::RBrace,
                    b'(' => Tok::LParen,
                    b')' => Tok::RParen,
                    b'[' => Tok::LBrack,
                    b']' => Tok::RBrack,
                    b',' => Tok::Comma,
                    b';' => Tok::Semi,
                    b'+' => Tok::Plus,
                    b'*' => Tok::Star,
                    b'!' => Tok::Bang,
                    b'^' => Tok::Caret,
                    b'-' => {
                        if self.peek() == Some(b'>') {
                            self.bump();
                            Tok::Arrow
                        } else {
                            Tok::Minus
                        }
                    }
                    b'=' => match self.peek() {
                        Some(b'=') => {
                            self.bump();
                            Tok::EqEq
                        }
                        Some(b'$') => {
                            self.bump();
                            Tok::RandAssign
                        }
                        _ => Tok::Assign,
                    },
                    b'<' => {
                        if self.peek() == Some(b'=') {
                            self.bump();
                            Tok::Le
                        } else {
                            Tok::Lt
                        }
                    }
                    b'&' => {
                        if self.peek() == Some(b'&') {
                            self.bump();
                            Tok::AndAnd
                        } else {
                            return self.err("expected `&&`");
                        }
                    }
                    b'|' => {
                        if self.peek() == Some(b'|') {
                            self.bump();
                            Tok::OrOr
                        } else {
                            return self.err("expected `||`");
                        }
                    }
                    other => {
                        return self.err(format!("unexpected character `{}`", other as char));
                    }
                }
            };
            out.push((tok, line, col));
        }
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    /// Call sites recorded for the unknown-function check.
    calls: Vec<(String, usize, usize)>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].0
    }

    fn here(&self) -> (usize, usize) {
        let (_, l, c) = self.toks[self.pos];
        (l, c)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax { line, col, msg: msg.into() })
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{}`, found {}", want.text(), self.peek().describe()))
        }
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if self.peek() == want {
            self.bump();
            true
        } else {
            false
        }
    }

    fn name(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Name(n) => {
                self.bump();
                Ok(n)
            }
            other => self.err(format!("expected a name, found {}", other.describe())),
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut funs: Vec<FunDef> = Vec::new();
        while *self.peek() != Tok::Eof {
            let f = self.fundef()?;
            if funs.iter().any(|g| g.name == f.name) {
                return Err(ParseError::DuplicateFunction { name: f.name });
            }
            funs.push(f);
        }
        let p = Program { funs };
        for (callee, line, col) in std::mem::take(&mut self.calls) {
            if p.get(&callee).is_none() {
                return Err(ParseError::UnknownFunction { name: callee, line, col });
            }
        }
        Ok(p)
    }

    fn fundef(&mut self) -> Result<FunDef, ParseError> {
        let inline = self.eat(&Tok::KwInline);
        self.expect(Tok::KwFn)?;
        let name = self.name()?;
        self.expect(Tok::LParen)?;
        let param = if *self.peek() == Tok::RParen { None } else { Some(self.name()?) };
        self.expect(Tok::RParen)?;
        self.expect(Tok::Arrow)?;
        let result = self.name()?;
        let body = self.block()?;
        Ok(FunDef { name, param, result, body, inline })
    }

    fn block(&mut self) -> Result<Command, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut cmds = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return self.err("unterminated block");
            }
            cmds.push(self.stmt()?);
        }
        self.bump();
        Ok(Command::block(cmds))
    }

    fn stmt(&mut self) -> Result<Command, ParseError> {
        match self.peek() {
            Tok::KwSkip => {
                self.bump();
                self.expect(Tok::Semi)?;
                Ok(Command::Skip)
            }
            Tok::KwIf => {
                self.bump();
                let guard = self.expr()?;
                let then_ = self.block()?;
                self.expect(Tok::KwElse)?;
                let else_ = self.block()?;
                Ok(Command::If(guard, Box::new(then_), Box::new(else_)))
            }
            Tok::KwWhile => {
                self.bump();
                let guard = self.expr()?;
                let body = self.block()?;
                Ok(Command::While(guard, Box::new(body)))
            }
            _ => {
                let lv = self.lval()?;
                match self.peek() {
                    Tok::RandAssign => {
                        self.bump();
                        let e = self.expr()?;
                        self.expect(Tok::Semi)?;
                        Ok(Command::Rand(lv, e))
                    }
                    Tok::Assign => {
                        self.bump();
                        // A name directly followed by `(` is a call; plain
                        // expressions have no call form.
                        if matches!(self.peek(), Tok::Name(_)) && *self.peek2() == Tok::LParen {
                            let (line, col) = self.here();
                            let callee = self.name()?;
                            self.expect(Tok::LParen)?;
                            let arg = if *self.peek() == Tok::RParen {
                                Expr::Tuple(Vec::new())
                            } else {
                                self.expr()?
                            };
                            self.expect(Tok::RParen)?;
                            self.expect(Tok::Semi)?;
                            self.calls.push((callee.clone(), line, col));
                            Ok(Command::Call(lv, callee, arg))
                        } else {
                            let e = self.expr()?;
                            self.expect(Tok::Semi)?;
                            Ok(Command::Assign(lv, e))
                        }
                    }
                    other => {
                        let other = other.describe();
                        self.err(format!("expected `=` or `=$`, found {other}"))
                    }
                }
            }
        }
    }

    fn lval(&mut self) -> Result<Lval, ParseError> {
        match self.peek().clone() {
            Tok::Name(n) => {
                self.bump();
                if self.eat(&Tok::LBrack) {
                    let idx = self.expr()?;
                    self.expect(Tok::RBrack)?;
                    Ok(Lval::ArrWrite(n, Box::new(idx)))
                } else {
                    Ok(Lval::Var(n))
                }
            }
            Tok::LBrack => {
                self.bump();
                let addr = self.expr()?;
                self.expect(Tok::RBrack)?;
                Ok(Lval::MemWrite(Box::new(addr)))
            }
            Tok::LParen => {
                self.bump();
                let mut parts = vec![self.lval()?];
                while self.eat(&Tok::Comma) {
                    parts.push(self.lval()?);
                }
                self.expect(Tok::RParen)?;
                if parts.iter().any(|l| matches!(l, Lval::Tuple(_))) {
                    return self.err("tuple left-values cannot nest");
                }
                Ok(Lval::Tuple(parts))
            }
            other => self.err(format!("expected a left-value, found {}", other.describe())),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.expr_or()
    }

    fn expr_or(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.expr_and()?;
        while self.eat(&Tok::OrOr) {
            e = Expr::bin(Op::Or, e, self.expr_and()?);
        }
        Ok(e)
    }

    fn expr_and(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.expr_xor()?;
        while self.eat(&Tok::AndAnd) {
            e = Expr::bin(Op::And, e, self.expr_xor()?);
        }
        Ok(e)
    }

    fn expr_xor(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.expr_eq()?;
        while self.eat(&Tok::Caret) {
            e = Expr::bin(Op::Xor, e, self.expr_eq()?);
        }
        Ok(e)
    }

    fn expr_eq(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.expr_rel()?;
        // `=` in expression position also means equality; assignment `=` only
        // ever occurs right after a leading left-value.
        while matches!(self.peek(), Tok::EqEq | Tok::Assign) {
            self.bump();
            e = Expr::bin(Op::Eq, e, self.expr_rel()?);
        }
        Ok(e)
    }

    fn expr_rel(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.expr_add()?;
        loop {
            let op = match self.peek() {
                Tok::Le => Op::Le,
                Tok::Lt => Op::Lt,
                _ => break,
            };
            self.bump();
            e = Expr::bin(op, e, self.expr_add()?);
        }
        Ok(e)
    }

    fn expr_add(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.expr_mul()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => Op::Add,
                Tok::Minus => Op::Sub,
                _ => break,
            };
            self.bump();
            e = Expr::bin(op, e, self.expr_mul()?);
        }
        Ok(e)
    }

    fn expr_mul(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.expr_unary()?;
        while self.eat(&Tok::Star) {
            e = Expr::bin(Op::Mul, e, self.expr_unary()?);
        }
        Ok(e)
    }

    fn expr_unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Bang) {
            Ok(Expr::App(Op::Not, vec![self.expr_unary()?]))
        } else {
            self.expr_atom()
        }
    }

    fn expr_atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::word(n))
            }
            Tok::KwTrue => {
                self.bump();
                Ok(Expr::bool(true))
            }
            Tok::KwFalse => {
                self.bump();
                Ok(Expr::bool(false))
            }
            Tok::Name(n) => {
                self.bump();
                if self.eat(&Tok::LBrack) {
                    let idx = self.expr()?;
                    self.expect(Tok::RBrack)?;
                    Ok(Expr::ArrRead(n, Box::new(idx)))
                } else {
                    Ok(Expr::Var(n))
                }
            }
            Tok::LBrack => {
                self.bump();
                let addr = self.expr()?;
                self.expect(Tok::RBrack)?;
                Ok(Expr::MemRead(Box::new(addr)))
            }
            Tok::LParen => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    return Ok(Expr::Tuple(Vec::new()));
                }
                let first = self.expr()?;
                if self.eat(&Tok::Comma) {
                    let mut parts = vec![first];
                    loop {
                        parts.push(self.expr()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Expr::Tuple(parts))
                } else {
                    self.expect(Tok::RParen)?;
                    Ok(first)
                }
            }
            other => self.err(format!("expected an expression, found {}", other.describe())),
        }
    }
}

fn parser_for(text: &str) -> Result<Parser, ParseError> {
    let toks = Lexer::new(text).tokens()?;
    Ok(Parser { toks, pos: 0, calls: Vec::new() })
}

/// Parses a whole program and resolves call targets.
pub fn parse(text: &str) -> Result<Program, ParseError> {
    parser_for(text)?.program()
}

/// Parses a statement list (no surrounding function); call targets are not
/// resolved. Intended for tests and small harnesses.
pub fn parse_cmd(text: &str) -> Result<Command, ParseError> {
    let mut p = parser_for(text)?;
    let mut cmds = Vec::new();
    while *p.peek() != Tok::Eof {
        cmds.push(p.stmt()?);
    }
    Ok(Command::block(cmds))
}

/// Parses a single expression. Intended for tests.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = parser_for(text)?;
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.err("trailing input after expression");
    }
    Ok(e)
}
