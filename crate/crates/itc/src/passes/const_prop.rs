//! Constant propagation: propagates known constants, folds expressions
//! (including same-expression comparisons like `x == x`), and eliminates
//! branches whose guards become literal.

use std::collections::BTreeMap;

use crate::lang::{Command, Expr, Lval, Op, Program, Value, Var};
use crate::sem::apply_op;

/// Known constants per variable. Only word and boolean constants are
/// tracked; values flowing through memory, arrays, samplings, and calls are
/// not.
pub type ConstEnv = BTreeMap<Var, Value>;

fn foldable(v: &Value) -> bool {
    matches!(v, Value::Word(_) | Value::Bool(_))
}

/// Entries present and equal in both environments.
fn meet(a: &ConstEnv, b: &ConstEnv) -> ConstEnv {
    a.iter()
        .filter(|(x, v)| b.get(*x) == Some(v))
        .map(|(x, v)| (x.clone(), v.clone()))
        .collect()
}

/// Simplifies an expression under the environment: substitutes known
/// constants, folds operator applications on literals, and resolves
/// reflexive comparisons on syntactically equal (pure, deterministic)
/// operands.
pub fn simplify(e: &Expr, env: &ConstEnv) -> Expr {
    match e {
        Expr::Const(_) => e.clone(),
        Expr::Var(x) => match env.get(x) {
            Some(v) if foldable(v) => Expr::Const(v.clone()),
            _ => e.clone(),
        },
        Expr::Tuple(es) => Expr::Tuple(es.iter().map(|e| simplify(e, env)).collect()),
        Expr::App(op, args) => {
            let args: Vec<Expr> = args.iter().map(|e| simplify(e, env)).collect();
            let consts: Option<Vec<Value>> = args
                .iter()
                .map(|e| match e {
                    Expr::Const(v) => Some(v.clone()),
                    _ => None,
                })
                .collect();
            if let Some(vs) = consts {
                if let Ok(v) = apply_op(*op, &vs) {
                    if foldable(&v) {
                        return Expr::Const(v);
                    }
                }
            }
            if args.len() == 2 && args[0] == args[1] {
                // Equal pure operands: `e == e` and `e <= e` hold, `e < e`
                // fails, whenever `e` evaluates at all.
                match op {
                    Op::Eq | Op::Le => return Expr::bool(true),
                    Op::Lt => return Expr::bool(false),
                    _ => {}
                }
            }
            Expr::App(*op, args)
        }
        Expr::ArrRead(x, idx) => Expr::ArrRead(x.clone(), Box::new(simplify(idx, env))),
        Expr::MemRead(addr) => Expr::MemRead(Box::new(simplify(addr, env))),
    }
}

fn simplify_lval(lv: &Lval, env: &ConstEnv) -> Lval {
    match lv {
        Lval::Var(_) => lv.clone(),
        Lval::ArrWrite(x, idx) => Lval::ArrWrite(x.clone(), Box::new(simplify(idx, env))),
        Lval::MemWrite(addr) => Lval::MemWrite(Box::new(simplify(addr, env))),
        Lval::Tuple(ls) => Lval::Tuple(ls.iter().map(|l| simplify_lval(l, env)).collect()),
    }
}

fn written_vars(lv: &Lval, out: &mut Vec<Var>) {
    match lv {
        Lval::Var(x) | Lval::ArrWrite(x, _) => out.push(x.clone()),
        Lval::MemWrite(_) => {}
        Lval::Tuple(ls) => ls.iter().for_each(|l| written_vars(l, out)),
    }
}

fn kill(env: &mut ConstEnv, lv: &Lval) {
    let mut vars = Vec::new();
    written_vars(lv, &mut vars);
    for x in vars {
        env.remove(&x);
    }
}

/// Records what an assignment teaches the environment.
fn learn(env: &mut ConstEnv, lv: &Lval, rhs: &Expr) {
    match (lv, rhs) {
        (Lval::Var(x), Expr::Const(v)) if foldable(v) => {
            env.insert(x.clone(), v.clone());
        }
        (Lval::Tuple(ls), Expr::Tuple(es)) if ls.len() == es.len() => {
            for (l, e) in ls.iter().zip(es) {
                learn(env, l, e);
            }
        }
        _ => kill(env, lv),
    }
}

fn cp_cmd(c: &Command, env: &ConstEnv) -> (Command, ConstEnv) {
    match c {
        Command::Skip => (Command::Skip, env.clone()),
        Command::Assign(lv, e) => {
            let e2 = simplify(e, env);
            let lv2 = simplify_lval(lv, env);
            let mut out = env.clone();
            kill(&mut out, &lv2);
            learn(&mut out, &lv2, &e2);
            (Command::Assign(lv2, e2), out)
        }
        Command::Rand(lv, e) => {
            let e2 = simplify(e, env);
            let lv2 = simplify_lval(lv, env);
            let mut out = env.clone();
            kill(&mut out, &lv2);
            (Command::Rand(lv2, e2), out)
        }
        Command::Call(lv, f, e) => {
            let e2 = simplify(e, env);
            let lv2 = simplify_lval(lv, env);
            let mut out = env.clone();
            kill(&mut out, &lv2);
            (Command::Call(lv2, f.clone(), e2), out)
        }
        Command::Seq(a, b) => {
            let (a2, env1) = cp_cmd(a, env);
            let (b2, env2) = cp_cmd(b, &env1);
            (Command::append(a2, b2), env2)
        }
        Command::If(e, t, f) => {
            let guard = simplify(e, env);
            match guard {
                Expr::Const(Value::Bool(true)) => cp_cmd(t, env),
                Expr::Const(Value::Bool(false)) => cp_cmd(f, env),
                guard => {
                    let (t2, env_t) = cp_cmd(t, env);
                    let (f2, env_f) = cp_cmd(f, env);
                    (Command::If(guard, Box::new(t2), Box::new(f2)), meet(&env_t, &env_f))
                }
            }
        }
        Command::While(e, body) => {
            // Stable loop environment by iterated meet.
            let mut inv = env.clone();
            loop {
                let (_, out) = cp_cmd(body, &inv);
                let next = meet(&inv, &out);
                if next == inv {
                    break;
                }
                inv = next;
            }
            let guard = simplify(e, &inv);
            if guard == Expr::bool(false) {
                // The guard is false under facts that hold on entry: the
                // loop never runs.
                return (Command::Skip, env.clone());
            }
            let (body2, _) = cp_cmd(body, &inv);
            (Command::While(guard, Box::new(body2)), inv)
        }
    }
}

/// Command-level entry point used by harnesses.
pub fn const_prop_cmd(c: &Command) -> Command {
    cp_cmd(c, &ConstEnv::new()).0
}

/// Runs constant propagation over every function body. The transformation
/// is total and bit-exact on word arithmetic.
pub fn const_prop(p: &Program) -> Program {
    let mut out = p.clone();
    for f in &mut out.funs {
        let (body, _) = cp_cmd(&f.body, &ConstEnv::new());
        f.body = body;
    }
    out
}
