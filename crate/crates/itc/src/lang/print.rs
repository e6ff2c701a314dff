//! Canonical pretty-printer. `parse(pretty(p))` returns `p` for every
//! parser-produced program (sequences print flattened and reparse into the
//! canonical right-nested shape).

use std::fmt::Write;

use super::ast::{Command, Expr, FunDef, Lval, Op, Program, Value};

fn prec(op: Op) -> u8 {
    match op {
        Op::Or => 1,
        Op::And => 2,
        Op::Xor => 3,
        Op::Eq => 4,
        Op::Lt | Op::Le => 5,
        Op::Add | Op::Sub => 6,
        Op::Mul => 7,
        Op::Not => 8,
    }
}

fn write_expr(out: &mut String, e: &Expr, min: u8) {
    match e {
        Expr::Const(Value::Word(w)) => {
            let _ = write!(out, "{w}");
        }
        Expr::Const(Value::Bool(b)) => {
            let _ = write!(out, "{b}");
        }
        Expr::Const(v) => {
            // No source form exists for bytes/tuple literals and no pass
            // creates them inside expressions.
            panic!("unprintable literal in expression: {v:?}");
        }
        Expr::Var(x) => out.push_str(x),
        Expr::Tuple(es) => {
            out.push('(');
            for (i, e) in es.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, e, 0);
            }
            out.push(')');
        }
        Expr::App(Op::Not, args) => {
            out.push('!');
            write_expr(out, &args[0], prec(Op::Not));
        }
        Expr::App(op, args) => {
            let p = prec(*op);
            let parens = p < min;
            if parens {
                out.push('(');
            }
            write_expr(out, &args[0], p);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, &args[1], p + 1);
            if parens {
                out.push(')');
            }
        }
        Expr::ArrRead(x, idx) => {
            out.push_str(x);
            out.push('[');
            write_expr(out, idx, 0);
            out.push(']');
        }
        Expr::MemRead(addr) => {
            out.push('[');
            write_expr(out, addr, 0);
            out.push(']');
        }
    }
}

fn write_lval(out: &mut String, lv: &Lval) {
    match lv {
        Lval::Var(x) => out.push_str(x),
        Lval::ArrWrite(x, idx) => {
            out.push_str(x);
            out.push('[');
            write_expr(out, idx, 0);
            out.push(']');
        }
        Lval::MemWrite(addr) => {
            out.push('[');
            write_expr(out, addr, 0);
            out.push(']');
        }
        Lval::Tuple(ls) => {
            out.push('(');
            for (i, l) in ls.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_lval(out, l);
            }
            out.push(')');
        }
    }
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn write_cmd(out: &mut String, c: &Command, level: usize) {
    for stmt in c.stmts() {
        indent(out, level);
        match stmt {
            Command::Skip => out.push_str("skip;\n"),
            Command::Assign(lv, e) => {
                write_lval(out, lv);
                out.push_str(" = ");
                write_expr(out, e, 0);
                out.push_str(";\n");
            }
            Command::Rand(lv, e) => {
                write_lval(out, lv);
                out.push_str(" =$ ");
                write_expr(out, e, 0);
                out.push_str(";\n");
            }
            Command::If(e, t, f) => {
                out.push_str("if ");
                write_expr(out, e, 0);
                out.push_str(" {\n");
                write_cmd(out, t, level + 1);
                indent(out, level);
                out.push_str("} else {\n");
                write_cmd(out, f, level + 1);
                indent(out, level);
                out.push_str("}\n");
            }
            Command::While(e, body) => {
                out.push_str("while ");
                write_expr(out, e, 0);
                out.push_str(" {\n");
                write_cmd(out, body, level + 1);
                indent(out, level);
                out.push_str("}\n");
            }
            Command::Call(lv, f, arg) => {
                write_lval(out, lv);
                out.push_str(" = ");
                out.push_str(f);
                out.push('(');
                if *arg != Expr::Tuple(Vec::new()) {
                    write_expr(out, arg, 0);
                }
                out.push_str(");\n");
            }
            Command::Seq(..) => unreachable!("stmts() flattens sequences"),
        }
    }
}

pub fn pretty_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0);
    out
}

pub fn pretty_cmd(c: &Command) -> String {
    let mut out = String::new();
    write_cmd(&mut out, c, 0);
    out
}

fn write_fun(out: &mut String, f: &FunDef) {
    if f.inline {
        out.push_str("inline ");
    }
    let _ = write!(out, "fn {}(", f.name);
    if let Some(p) = &f.param {
        out.push_str(p);
    }
    let _ = writeln!(out, ") -> {} {{", f.result);
    write_cmd(out, &f.body, 1);
    out.push_str("}\n");
}

/// Canonical program rendering.
pub fn pretty(p: &Program) -> String {
    let mut out = String::new();
    for (i, f) in p.funs.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write_fun(&mut out, f);
    }
    out
}

/// Renders a runtime value; used by reports and distribution output.
pub fn render_value(v: &Value) -> String {
    match v {
        Value::Word(w) => w.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Bytes(bs) => {
            let parts: Vec<String> = bs.iter().map(|b| b.to_string()).collect();
            format!("[{}]", parts.join(", "))
        }
        Value::Tuple(vs) => {
            let parts: Vec<String> = vs.iter().map(render_value).collect();
            format!("({})", parts.join(", "))
        }
    }
}
