//! Abstract syntax for the core imperative language.

use serde::Serialize;

/// Variable names. Fresh names minted by the inliner contain `#`, which the
/// lexer only accepts inside an identifier, so they can never collide with
/// source-level names.
pub type Var = String;

/// Runtime values. Words use wrapping 64-bit arithmetic; `Bytes` elements are
/// chunks, each below `2^chunk_bits`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Value {
    Word(u64),
    Bool(bool),
    Bytes(Vec<u8>),
    Tuple(Vec<Value>),
}

impl Value {
    pub fn unit() -> Value {
        Value::Tuple(Vec::new())
    }

    pub fn sort(&self) -> &'static str {
        match self {
            Value::Word(_) => "word",
            Value::Bool(_) => "bool",
            Value::Bytes(_) => "bytes",
            Value::Tuple(_) => "tuple",
        }
    }

    pub fn as_word(&self) -> Option<u64> {
        match self {
            Value::Word(w) => Some(*w),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

/// Operators, all with fixed arity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Le,
    Lt,
    Eq,
    And,
    Or,
    Not,
    Xor,
}

impl Op {
    pub fn arity(self) -> usize {
        match self {
            Op::Not => 1,
            _ => 2,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Op::Add => "+",
            Op::Sub => "-",
            Op::Mul => "*",
            Op::Le => "<=",
            Op::Lt => "<",
            Op::Eq => "==",
            Op::And => "&&",
            Op::Or => "||",
            Op::Not => "!",
            Op::Xor => "^",
        }
    }
}

/// Expressions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Expr {
    /// Word or boolean literal.
    Const(Value),
    Var(Var),
    Tuple(Vec<Expr>),
    /// Operator application with `Op::arity` arguments.
    App(Op, Vec<Expr>),
    /// Chunk read `x[e]` from a `Bytes` variable.
    ArrRead(Var, Box<Expr>),
    /// Memory read `[e]` of one chunk, zero-extended to a word.
    MemRead(Box<Expr>),
}

impl Expr {
    pub fn word(w: u64) -> Expr {
        Expr::Const(Value::Word(w))
    }

    pub fn bool(b: bool) -> Expr {
        Expr::Const(Value::Bool(b))
    }

    pub fn var(name: impl Into<Var>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn bin(op: Op, a: Expr, b: Expr) -> Expr {
        Expr::App(op, vec![a, b])
    }
}

/// Left-values. Tuple lvals are flat: components are never tuples themselves.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Lval {
    Var(Var),
    /// Chunk write `x[e]` into a `Bytes` variable.
    ArrWrite(Var, Box<Expr>),
    /// Memory write `[e]` of one chunk (the written word is truncated).
    MemWrite(Box<Expr>),
    Tuple(Vec<Lval>),
}

impl Lval {
    pub fn var(name: impl Into<Var>) -> Lval {
        Lval::Var(name.into())
    }
}

/// Commands.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Command {
    Skip,
    Assign(Lval, Expr),
    /// Random sampling `lv =$ e`: `e` evaluates to the number of chunks.
    Rand(Lval, Expr),
    Seq(Box<Command>, Box<Command>),
    If(Expr, Box<Command>, Box<Command>),
    While(Expr, Box<Command>),
    /// `lv = f(e)`.
    Call(Lval, String, Expr),
}

impl Command {
    pub fn seq(a: Command, b: Command) -> Command {
        Command::Seq(Box::new(a), Box::new(b))
    }

    /// Right-associated sequence of `cmds`; empty input is `Skip`. Compound
    /// entries are spliced in so the result stays right-nested.
    pub fn block(cmds: Vec<Command>) -> Command {
        let mut it = cmds.into_iter().rev();
        match it.next() {
            None => Command::Skip,
            Some(last) => it.fold(last, |acc, c| Command::append(c, acc)),
        }
    }

    /// Sequencing that keeps sequences right-nested, the parser's canonical
    /// shape.
    pub fn append(a: Command, b: Command) -> Command {
        match a {
            Command::Seq(x, y) => Command::seq(*x, Command::append(*y, b)),
            other => Command::seq(other, b),
        }
    }

    pub fn assign(lv: Lval, e: Expr) -> Command {
        Command::Assign(lv, e)
    }

    /// Flattens nested sequences into statement order.
    pub fn stmts(&self) -> Vec<&Command> {
        let mut out = Vec::new();
        fn walk<'a>(c: &'a Command, out: &mut Vec<&'a Command>) {
            match c {
                Command::Seq(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }
}

/// A function definition: one optional parameter, one result variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FunDef {
    pub name: String,
    pub param: Option<Var>,
    pub result: Var,
    pub body: Command,
    pub inline: bool,
}

/// A program is an ordered list of uniquely named functions. Definition order
/// matters: the inlining pass processes functions in this order.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
pub struct Program {
    pub funs: Vec<FunDef>,
}

impl Program {
    pub fn get(&self, name: &str) -> Option<&FunDef> {
        self.funs.iter().find(|f| f.name == name)
    }

    pub fn fun_names(&self) -> impl Iterator<Item = &str> {
        self.funs.iter().map(|f| f.name.as_str())
    }
}
