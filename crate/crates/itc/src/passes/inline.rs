//! Inlining: calls to inline-annotated functions are replaced by the
//! callee's body, with every callee variable freshly renamed to avoid
//! clashes. Functions are processed in definition order, so a callee
//! defined earlier is already fully expanded when it gets substituted.

use std::collections::{BTreeMap, BTreeSet};

use crate::lang::{Command, Expr, Lval, Program, Var};

use super::PassError;

fn rename_var(map: &BTreeMap<Var, Var>, x: &Var) -> Var {
    map.get(x).cloned().unwrap_or_else(|| x.clone())
}

/// Substitutes variable names through `map`; unmapped names are kept.
pub fn rename_expr(e: &Expr, map: &BTreeMap<Var, Var>) -> Expr {
    match e {
        Expr::Const(_) => e.clone(),
        Expr::Var(x) => Expr::Var(rename_var(map, x)),
        Expr::Tuple(es) => Expr::Tuple(es.iter().map(|e| rename_expr(e, map)).collect()),
        Expr::App(op, args) => Expr::App(*op, args.iter().map(|e| rename_expr(e, map)).collect()),
        Expr::ArrRead(x, idx) => {
            Expr::ArrRead(rename_var(map, x), Box::new(rename_expr(idx, map)))
        }
        Expr::MemRead(addr) => Expr::MemRead(Box::new(rename_expr(addr, map))),
    }
}

fn rename_lval(lv: &Lval, map: &BTreeMap<Var, Var>) -> Lval {
    match lv {
        Lval::Var(x) => Lval::Var(rename_var(map, x)),
        Lval::ArrWrite(x, idx) => {
            Lval::ArrWrite(rename_var(map, x), Box::new(rename_expr(idx, map)))
        }
        Lval::MemWrite(addr) => Lval::MemWrite(Box::new(rename_expr(addr, map))),
        Lval::Tuple(ls) => Lval::Tuple(ls.iter().map(|l| rename_lval(l, map)).collect()),
    }
}

/// Substitutes variable names through `map` in a whole command.
pub fn rename_cmd(c: &Command, map: &BTreeMap<Var, Var>) -> Command {
    match c {
        Command::Skip => Command::Skip,
        Command::Assign(lv, e) => Command::Assign(rename_lval(lv, map), rename_expr(e, map)),
        Command::Rand(lv, e) => Command::Rand(rename_lval(lv, map), rename_expr(e, map)),
        Command::Seq(a, b) => Command::seq(rename_cmd(a, map), rename_cmd(b, map)),
        Command::If(e, t, f) => Command::If(
            rename_expr(e, map),
            Box::new(rename_cmd(t, map)),
            Box::new(rename_cmd(f, map)),
        ),
        Command::While(e, body) => {
            Command::While(rename_expr(e, map), Box::new(rename_cmd(body, map)))
        }
        Command::Call(lv, f, e) => {
            Command::Call(rename_lval(lv, map), f.clone(), rename_expr(e, map))
        }
    }
}

fn cmd_vars(c: &Command, out: &mut BTreeSet<Var>) {
    fn expr_vars(e: &Expr, out: &mut BTreeSet<Var>) {
        match e {
            Expr::Const(_) => {}
            Expr::Var(x) => {
                out.insert(x.clone());
            }
            Expr::Tuple(es) | Expr::App(_, es) => es.iter().for_each(|e| expr_vars(e, out)),
            Expr::ArrRead(x, idx) => {
                out.insert(x.clone());
                expr_vars(idx, out);
            }
            Expr::MemRead(addr) => expr_vars(addr, out),
        }
    }
    fn lval_vars(lv: &Lval, out: &mut BTreeSet<Var>) {
        match lv {
            Lval::Var(x) => {
                out.insert(x.clone());
            }
            Lval::ArrWrite(x, idx) => {
                out.insert(x.clone());
                expr_vars(idx, out);
            }
            Lval::MemWrite(addr) => expr_vars(addr, out),
            Lval::Tuple(ls) => ls.iter().for_each(|l| lval_vars(l, out)),
        }
    }
    match c {
        Command::Skip => {}
        Command::Assign(lv, e) | Command::Rand(lv, e) => {
            lval_vars(lv, out);
            expr_vars(e, out);
        }
        Command::Seq(a, b) => {
            cmd_vars(a, out);
            cmd_vars(b, out);
        }
        Command::If(e, t, f) => {
            expr_vars(e, out);
            cmd_vars(t, out);
            cmd_vars(f, out);
        }
        Command::While(e, body) => {
            expr_vars(e, out);
            cmd_vars(body, out);
        }
        Command::Call(lv, _, e) => {
            lval_vars(lv, out);
            expr_vars(e, out);
        }
    }
}

struct Inliner {
    program: Program,
    /// Function names fully processed so far.
    done: BTreeSet<String>,
    /// Inline functions currently being expanded (cycle detection).
    in_progress: Vec<String>,
    /// Program-wide fresh-name counter; names are `base#k` and `#` is only
    /// ever minted here.
    next_fresh: usize,
}

impl Inliner {
    fn fresh_suffix(&mut self) -> usize {
        let k = self.next_fresh;
        self.next_fresh += 1;
        k
    }

    fn ensure_processed(&mut self, name: &str) -> Result<(), PassError> {
        if self.done.contains(name) {
            return Ok(());
        }
        if self.in_progress.iter().any(|f| f == name) {
            return Err(PassError::RecursiveInline(name.to_string()));
        }
        self.in_progress.push(name.to_string());
        let body = self.program.get(name).expect("call targets resolve").body.clone();
        let body = self.expand(&body)?;
        self.in_progress.pop();
        let fun = self.program.funs.iter_mut().find(|f| f.name == name).unwrap();
        fun.body = body;
        self.done.insert(name.to_string());
        Ok(())
    }

    fn expand(&mut self, c: &Command) -> Result<Command, PassError> {
        match c {
            Command::Call(lv, f, arg) if self.program.get(f).is_some_and(|d| d.inline) => {
                self.ensure_processed(f)?;
                let callee = self.program.get(f).unwrap().clone();
                let mut vars = BTreeSet::new();
                cmd_vars(&callee.body, &mut vars);
                if let Some(p) = &callee.param {
                    vars.insert(p.clone());
                }
                vars.insert(callee.result.clone());
                let k = self.fresh_suffix();
                let map: BTreeMap<Var, Var> =
                    vars.into_iter().map(|x| (x.clone(), format!("{x}#{k}"))).collect();
                // Argument first (preserving its evaluation), then the
                // renamed body, then the result handoff.
                let arg_target = match &callee.param {
                    Some(p) => map[p].clone(),
                    None => format!("unused#{k}"),
                };
                let prelude = Command::Assign(Lval::Var(arg_target), arg.clone());
                let body = rename_cmd(&callee.body, &map);
                let handoff = Command::Assign(lv.clone(), Expr::Var(map[&callee.result].clone()));
                Ok(Command::append(prelude, Command::append(body, handoff)))
            }
            Command::Seq(a, b) => {
                let a2 = self.expand(a)?;
                let b2 = self.expand(b)?;
                Ok(Command::append(a2, b2))
            }
            Command::If(e, t, f) => Ok(Command::If(
                e.clone(),
                Box::new(self.expand(t)?),
                Box::new(self.expand(f)?),
            )),
            Command::While(e, body) => {
                Ok(Command::While(e.clone(), Box::new(self.expand(body)?)))
            }
            other => Ok(other.clone()),
        }
    }
}

/// Replaces every call to an inline-annotated function with its freshly
/// renamed body, in definition order. Fails on (possibly mutual) recursion
/// among inline functions.
pub fn inline_pass(p: &Program) -> Result<Program, PassError> {
    let mut next_fresh = 1;
    for f in &p.funs {
        let mut vars = BTreeSet::new();
        cmd_vars(&f.body, &mut vars);
        for v in vars {
            if let Some((_, suffix)) = v.rsplit_once('#') {
                if let Ok(k) = suffix.parse::<usize>() {
                    next_fresh = next_fresh.max(k + 1);
                }
            }
        }
    }
    let mut inliner = Inliner {
        program: p.clone(),
        done: BTreeSet::new(),
        in_progress: Vec::new(),
        next_fresh,
    };
    let names: Vec<String> = p.funs.iter().map(|f| f.name.clone()).collect();
    for name in names {
        inliner.ensure_processed(&name)?;
    }
    Ok(inliner.program)
}

/// True when no call in the program targets an inline-annotated function.
pub fn no_inline_calls(p: &Program) -> bool {
    fn check(c: &Command, p: &Program) -> bool {
        match c {
            Command::Call(_, f, _) => !p.get(f).is_some_and(|d| d.inline),
            Command::Seq(a, b) => check(a, p) && check(b, p),
            Command::If(_, t, f) => check(t, p) && check(f, p),
            Command::While(_, body) => check(body, p),
            _ => true,
        }
    }
    p.funs.iter().all(|f| check(&f.body, p))
}
