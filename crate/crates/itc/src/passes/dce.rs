//! Dead-code elimination: backward liveness analysis turning assignments to
//! dead variables into `skip`, then normalizing skips out of sequences.
//!
//! Random samplings survive even when their target is dead: removing one
//! would change the event trace, so only the pure assignments go. Memory
//! writes are effects and always stay.

use std::collections::BTreeSet;

use crate::lang::{Command, Expr, Lval, Program, Var};

/// Variables live at a program point.
pub type LiveSet = BTreeSet<Var>;

fn expr_uses(e: &Expr, out: &mut LiveSet) {
    match e {
        Expr::Const(_) => {}
        Expr::Var(x) => {
            out.insert(x.clone());
        }
        Expr::Tuple(es) | Expr::App(_, es) => es.iter().for_each(|e| expr_uses(e, out)),
        Expr::ArrRead(x, idx) => {
            out.insert(x.clone());
            expr_uses(idx, out);
        }
        Expr::MemRead(addr) => expr_uses(addr, out),
    }
}

/// Variables read by the left-value itself (indices, addresses, and the
/// partially updated array).
fn lval_uses(lv: &Lval, out: &mut LiveSet) {
    match lv {
        Lval::Var(_) => {}
        Lval::ArrWrite(x, idx) => {
            out.insert(x.clone());
            expr_uses(idx, out);
        }
        Lval::MemWrite(addr) => expr_uses(addr, out),
        Lval::Tuple(ls) => ls.iter().for_each(|l| lval_uses(l, out)),
    }
}

/// Variables fully overwritten by the left-value (array writes are partial
/// updates and do not count).
fn strong_defs(lv: &Lval, out: &mut LiveSet) {
    match lv {
        Lval::Var(x) => {
            out.insert(x.clone());
        }
        Lval::ArrWrite(..) | Lval::MemWrite(_) => {}
        Lval::Tuple(ls) => ls.iter().for_each(|l| strong_defs(l, out)),
    }
}

/// All variables the left-value writes to (for deadness: array writes do
/// target their variable), or `None` if it writes memory somewhere.
fn written_vars(lv: &Lval) -> Option<Vec<Var>> {
    match lv {
        Lval::Var(x) | Lval::ArrWrite(x, _) => Some(vec![x.clone()]),
        Lval::MemWrite(_) => None,
        Lval::Tuple(ls) => {
            let mut out = Vec::new();
            for l in ls {
                out.extend(written_vars(l)?);
            }
            Some(out)
        }
    }
}

fn transfer_assign(lv: &Lval, e: &Expr, live_after: &LiveSet) -> LiveSet {
    let mut defs = LiveSet::new();
    strong_defs(lv, &mut defs);
    let mut live: LiveSet = live_after.difference(&defs).cloned().collect();
    expr_uses(e, &mut live);
    lval_uses(lv, &mut live);
    live
}

/// Backward pass: rewrites the command against the variables live after it
/// and returns the rewritten command with the live-before set.
fn dce_cmd(c: &Command, live_after: &LiveSet) -> (Command, LiveSet) {
    match c {
        Command::Skip => (Command::Skip, live_after.clone()),
        Command::Assign(lv, e) => {
            if let Some(targets) = written_vars(lv) {
                if targets.iter().all(|x| !live_after.contains(x)) {
                    return (Command::Skip, live_after.clone());
                }
            }
            (c.clone(), transfer_assign(lv, e, live_after))
        }
        Command::Rand(lv, e) => (c.clone(), transfer_assign(lv, e, live_after)),
        Command::Call(lv, _, e) => (c.clone(), transfer_assign(lv, e, live_after)),
        Command::Seq(a, b) => {
            let (b2, live_mid) = dce_cmd(b, live_after);
            let (a2, live_before) = dce_cmd(a, &live_mid);
            let seq = match (a2, b2) {
                (Command::Skip, b2) => b2,
                (a2, Command::Skip) => a2,
                (a2, b2) => Command::append(a2, b2),
            };
            (seq, live_before)
        }
        Command::If(e, t, f) => {
            let (t2, live_t) = dce_cmd(t, live_after);
            let (f2, live_f) = dce_cmd(f, live_after);
            let mut live: LiveSet = live_t.union(&live_f).cloned().collect();
            expr_uses(e, &mut live);
            (Command::If(e.clone(), Box::new(t2), Box::new(f2)), live)
        }
        Command::While(e, body) => {
            // Fixpoint of the body transfer from the loop head.
            let mut live: LiveSet = live_after.clone();
            expr_uses(e, &mut live);
            loop {
                let (_, live_body) = dce_cmd(body, &live);
                let mut next = live.clone();
                next.extend(live_body);
                expr_uses(e, &mut next);
                if next == live {
                    break;
                }
                live = next;
            }
            let (body2, _) = dce_cmd(body, &live);
            (Command::While(e.clone(), Box::new(body2)), live)
        }
    }
}

/// Eliminates assignments to dead variables in every function body. The
/// result variable is live at function exit.
pub fn dead_code_elim(p: &Program) -> Program {
    let mut out = p.clone();
    for f in &mut out.funs {
        let mut live = LiveSet::new();
        live.insert(f.result.clone());
        let (body, _) = dce_cmd(&f.body, &live);
        f.body = body;
    }
    out
}

/// Number of assignment statements, the metric DCE may only shrink.
pub fn assign_count(c: &Command) -> usize {
    match c {
        Command::Assign(..) => 1,
        Command::Skip | Command::Rand(..) | Command::Call(..) => 0,
        Command::Seq(a, b) => assign_count(a) + assign_count(b),
        Command::If(_, t, f) => assign_count(t) + assign_count(f),
        Command::While(_, body) => assign_count(body),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    fn body_of(p: &Program, f: &str) -> Command {
        p.get(f).unwrap().body.clone()
    }

    #[test]
    fn dead_assignment_removed() {
        let p = parse("fn f() -> y { x = 1; y = 2; }").unwrap();
        let q = dead_code_elim(&p);
        assert_eq!(body_of(&q, "f"), parse("fn f() -> y { y = 2; }").unwrap().funs[0].body);
    }

    #[test]
    fn assignment_feeding_memory_write_survives() {
        let src = "fn f() -> y { x = 1; [x] = 3; y = 2; }";
        let p = parse(src).unwrap();
        assert_eq!(dead_code_elim(&p), p);
    }

    #[test]
    fn dead_sampling_survives() {
        let src = "fn f() -> y { x =$ 1; y = 2; }";
        let p = parse(src).unwrap();
        assert_eq!(dead_code_elim(&p), p);
    }

    #[test]
    fn loop_carried_liveness() {
        // `a` feeds the loop's next iteration even though it looks dead
        // after one body pass.
        let src = "fn f(n) -> y { a = 1; i = 0; while i < n { y = a; a = a + 1; i = i + 1; } }";
        let p = parse(src).unwrap();
        assert_eq!(dead_code_elim(&p), p);
    }

    #[test]
    fn dead_chain_collapses() {
        let p = parse("fn f() -> y { a = 1; b = a + 1; c = b * 2; y = 4; }").unwrap();
        let q = dead_code_elim(&p);
        assert_eq!(body_of(&q, "f"), parse("fn f() -> y { y = 4; }").unwrap().funs[0].body);
    }

    #[test]
    fn assign_count_never_grows() {
        let mut rng = crate::gen::rng(23);
        for _ in 0..40 {
            let p = crate::gen::program(&mut rng, &crate::gen::ProgCfg::small(2), 2);
            let q = dead_code_elim(&p);
            for (f, g) in p.funs.iter().zip(&q.funs) {
                assert!(assign_count(&g.body) <= assign_count(&f.body));
            }
        }
    }
}
