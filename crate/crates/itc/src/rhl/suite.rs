//! Rule-soundness harness: for each proof rule, generates random instances
//! whose premises hold (verified semantically where they are not true by
//! construction) and checks that the conclusion tuple is semantically valid.
//!
//! The Call and Rec instances are checked at the interprocedural level,
//! since `Call` events carry unenumerable answers and never reach the
//! equivalence checker directly.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::Rng;
use serde::Serialize;

use crate::equiv::{Budgets, Cutoffs, EventContract};
use crate::gen::{self, Sort, VarEnv};
use crate::lang::{Command, Expr, Lval, MachState, Op, Program, Value};
use crate::passes::const_prop::const_prop_cmd;
use crate::passes::inline::{rename_cmd, rename_expr};
use crate::passes::{RenMap, RenamingChecker};
use crate::rhl::{
    check_cmd_tuple, check_prog_tuple, intra_sem, run_checker, sample_pairs, CheckerIface, CmdSem,
    FnPairSpec, StateRel, TupleBudgets, TupleOutcome,
};
use crate::sem::{eval_pure, peval, SemConfig};

const CHUNK_BITS: u32 = 2;

#[derive(Clone, Debug, Serialize)]
pub struct RuleFailure {
    pub seed: u64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RuleReport {
    pub rule: String,
    pub instances: usize,
    pub passed: usize,
    pub failures: Vec<RuleFailure>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub rules: Vec<RuleReport>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.rules.iter().all(|r| r.failures.is_empty() && r.passed == r.instances)
    }
}

fn budgets() -> TupleBudgets {
    TupleBudgets { state_pairs: 6, attempts: 60, check: Budgets::new(200, 1000) }
}

fn contract() -> EventContract {
    EventContract::equality(CHUNK_BITS)
}

fn small_env(rng: &mut StdRng) -> VarEnv {
    let mut env = VarEnv::new();
    for i in 0..rng.gen_range(2..4) {
        let sort = if rng.gen_bool(0.3) { Sort::Bool } else { Sort::Word };
        env.insert(format!("x{i}"), sort);
    }
    if rng.gen_bool(0.4) {
        env.insert("arr".into(), Sort::Bytes(2));
    }
    env
}

/// Straight-line safe command over `env` (no loops, samplings, or calls).
fn straight_cmd(rng: &mut StdRng, env: &mut VarEnv) -> Command {
    let cfg = gen::ProgCfg::straight_line(CHUNK_BITS);
    gen::command(rng, &cfg, env)
}

/// Structured safe command over `env` (loops and samplings allowed).
fn rich_cmd(rng: &mut StdRng, env: &mut VarEnv) -> Command {
    let mut cfg = gen::ProgCfg::small(CHUNK_BITS);
    cfg.max_stmts = 3;
    gen::command(rng, &cfg, env)
}

fn eq_rel(env: &VarEnv) -> StateRel {
    StateRel::equality(env.clone(), CHUNK_BITS)
}

/// A related command pair under full state equality: either a literal copy
/// or the command next to its constant-propagated form.
fn related_pair(rng: &mut StdRng, env: &mut VarEnv) -> (Command, Command) {
    let c = rich_cmd(rng, env);
    if rng.gen_bool(0.5) {
        let c2 = c.clone();
        (c, c2)
    } else {
        let c2 = const_prop_cmd(&c);
        (c, c2)
    }
}

fn check_conclusion(
    sem: &CmdSem,
    c1: &Command,
    c2: &Command,
    pre: &StateRel,
    post: &StateRel,
    rng: &mut StdRng,
) -> Result<(), String> {
    match check_cmd_tuple(sem, sem, c1, c2, pre, post, &contract(), &Cutoffs::err_left(), budgets(), rng)
    {
        TupleOutcome::Related { .. } => Ok(()),
        other => Err(format!("conclusion not related: {other:?}")),
    }
}

/// Verifies an expression premise: on pre-related pairs where the left side
/// evaluates, both sides must evaluate to equal values.
fn verify_expr_premise(
    e1: &Expr,
    e2: &Expr,
    pre: &StateRel,
    rng: &mut StdRng,
) -> Result<(), String> {
    for (s1, s2) in sample_pairs(pre, rng, 6) {
        if let Ok(v1) = eval_pure(e1, &s1) {
            match eval_pure(e2, &s2) {
                Ok(v2) if v1 == v2 => {}
                other => return Err(format!("expression premise fails: {v1:?} vs {other:?}")),
            }
        }
    }
    Ok(())
}

type Instance = fn(&mut StdRng) -> Result<(), String>;

fn rule_skip(rng: &mut StdRng) -> Result<(), String> {
    let env = small_env(rng);
    let pre = eq_rel(&env);
    let cfg = SemConfig::bare(CHUNK_BITS);
    check_conclusion(&intra_sem(&cfg), &Command::Skip, &Command::Skip, &pre, &pre, rng)
}

fn rule_seq(rng: &mut StdRng) -> Result<(), String> {
    let mut env = small_env(rng);
    let (a1, a2) = related_pair(rng, &mut env);
    let (b1, b2) = related_pair(rng, &mut env);
    let pre = eq_rel(&env);
    let cfg = SemConfig::bare(CHUNK_BITS);
    let sem = intra_sem(&cfg);
    check_conclusion(&sem, &a1, &a2, &pre, &pre, rng).map_err(|e| format!("premise 1: {e}"))?;
    check_conclusion(&sem, &b1, &b2, &pre, &pre, rng).map_err(|e| format!("premise 2: {e}"))?;
    check_conclusion(
        &sem,
        &Command::append(a1, b1),
        &Command::append(a2, b2),
        &pre,
        &pre,
        rng,
    )
}

fn rule_assign(rng: &mut StdRng) -> Result<(), String> {
    let env = small_env(rng);
    let sort = if rng.gen_bool(0.3) { Sort::Bool } else { Sort::Word };
    let e1 = gen::expr_of_sort(rng, &env, sort, 2);
    let e2 = if rng.gen_bool(0.5) {
        e1.clone()
    } else {
        crate::passes::const_prop::simplify(&e1, &BTreeMap::new())
    };
    let x = "t_assign".to_string();
    let pre = eq_rel(&env);
    verify_expr_premise(&e1, &e2, &pre, rng)?;
    let cfg = SemConfig::bare(CHUNK_BITS);
    check_conclusion(
        &intra_sem(&cfg),
        &Command::Assign(Lval::Var(x.clone()), e1),
        &Command::Assign(Lval::Var(x), e2),
        &pre,
        &pre,
        rng,
    )
}

fn rule_case(rng: &mut StdRng) -> Result<(), String> {
    let mut env = small_env(rng);
    let guard = gen::expr_of_sort(rng, &env, Sort::Bool, 2);
    let guard2 = if rng.gen_bool(0.5) {
        guard.clone()
    } else {
        crate::passes::const_prop::simplify(&guard, &BTreeMap::new())
    };
    let (t1, t2) = related_pair(rng, &mut env.clone());
    let (f1, f2) = related_pair(rng, &mut env);
    let pre = eq_rel(&env);
    verify_expr_premise(&guard, &guard2, &pre, rng)?;
    let cfg = SemConfig::bare(CHUNK_BITS);
    check_conclusion(
        &intra_sem(&cfg),
        &Command::If(guard, Box::new(t1), Box::new(f1)),
        &Command::If(guard2, Box::new(t2), Box::new(f2)),
        &pre,
        &pre,
        rng,
    )
}

fn counter_loop(rng: &mut StdRng, env: &mut VarEnv, body: Command) -> (Command, Expr, Command) {
    let i = "loop_i".to_string();
    let bound = rng.gen_range(1..=2u64);
    env.insert(i.clone(), Sort::Word);
    let init = Command::Assign(Lval::var(i.clone()), Expr::word(0));
    let guard = Expr::bin(Op::Lt, Expr::var(i.clone()), Expr::word(bound));
    let inc =
        Command::Assign(Lval::var(i.clone()), Expr::bin(Op::Add, Expr::var(i), Expr::word(1)));
    (init, guard, Command::append(body, inc))
}

fn rule_while(rng: &mut StdRng) -> Result<(), String> {
    let mut env = small_env(rng);
    let (b1, b2) = related_pair(rng, &mut env);
    let (init, guard, body1) = counter_loop(rng, &mut env, b1);
    // Rebuild the right-hand body around the related command.
    let Command::Seq(_, inc) = body1.clone() else { unreachable!("counter body is a sequence") };
    let body2 = Command::append(b2, strip_to_inc(*inc));
    let pre = eq_rel(&env);
    let cfg = SemConfig::bare(CHUNK_BITS);
    let sem = intra_sem(&cfg);
    // Invariant premise: the bodies preserve equality.
    check_conclusion(&sem, &body1, &body2, &pre, &pre, rng)
        .map_err(|e| format!("invariant premise: {e}"))?;
    let c1 = Command::append(init.clone(), Command::While(guard.clone(), Box::new(body1)));
    let c2 = Command::append(init, Command::While(guard, Box::new(body2)));
    check_conclusion(&sem, &c1, &c2, &pre, &pre, rng)
}

fn strip_to_inc(c: Command) -> Command {
    // The counter body ends with the increment; everything else was already
    // replaced by the related command.
    match c {
        Command::Seq(_, rest) => strip_to_inc(*rest),
        last => last,
    }
}

fn rule_rand(rng: &mut StdRng) -> Result<(), String> {
    let env = small_env(rng);
    let n = rng.gen_range(1..=2u64);
    let e1 = Expr::word(n);
    let e2 = if rng.gen_bool(0.5) {
        e1.clone()
    } else {
        Expr::bin(Op::Add, Expr::word(n - 1), Expr::word(1))
    };
    let pre = eq_rel(&env);
    verify_expr_premise(&e1, &e2, &pre, rng)?;
    let x = "t_rand".to_string();
    let cfg = SemConfig::bare(CHUNK_BITS);
    check_conclusion(
        &intra_sem(&cfg),
        &Command::Rand(Lval::Var(x.clone()), e1),
        &Command::Rand(Lval::Var(x), e2),
        &pre,
        &pre,
        rng,
    )
}

fn countdown_program(rng: &mut StdRng) -> Program {
    let base = rng.gen_range(0..4u64);
    let src = format!(
        "fn even(n) -> r {{ if n == 0 {{ r = {base}; }} else {{ r = odd(n - 1); }} }}\n\
         fn odd(n) -> r {{ if n == 0 {{ r = {}; }} else {{ r = even(n - 1); }} }}",
        base + 1
    );
    crate::lang::parse(&src).unwrap()
}

fn rule_call(rng: &mut StdRng) -> Result<(), String> {
    let p = countdown_program(rng);
    let cfg = SemConfig::new(p).with_chunk_bits(CHUNK_BITS);
    let sem = crate::rhl::inter_sem(&cfg);
    let pre = StateRel::new(
        "equal small-argument states",
        |a, b| a == b,
        |rng| {
            let s = MachState::new().with("n", Value::Word(rng.gen_range(0..4)));
            Some((s.clone(), s))
        },
    );
    let arg1 = Expr::var("n");
    let arg2 = if rng.gen_bool(0.5) {
        arg1.clone()
    } else {
        Expr::bin(Op::Add, Expr::var("n"), Expr::word(0))
    };
    verify_expr_premise(&arg1, &arg2, &pre, rng)?;
    let callee = if rng.gen_bool(0.5) { "even" } else { "odd" };
    check_conclusion(
        &sem,
        &Command::Call(Lval::var("res"), callee.into(), arg1),
        &Command::Call(Lval::var("res"), callee.into(), arg2),
        &pre,
        &pre,
        rng,
    )
}

/// Post relation: equal memories and agreement on `env` minus the skipped
/// variables.
fn eq_except(env: &VarEnv, skip: &[&str]) -> StateRel {
    let watched: Vec<String> =
        env.keys().filter(|x| !skip.contains(&x.as_str())).cloned().collect();
    StateRel::eq_on(watched, env.clone(), CHUNK_BITS)
}

fn rule_assign_l(rng: &mut StdRng) -> Result<(), String> {
    let env = small_env(rng);
    let e = gen::expr_of_sort(rng, &env, Sort::Word, 2);
    let x = "dead_x".to_string();
    let c1 = Command::Assign(Lval::Var(x.clone()), e);
    let pre = eq_rel(&env);
    let post = eq_except(&env, &[&x]);
    let cfg = SemConfig::bare(CHUNK_BITS);
    // Premise: executing the assignment on the left lands in a state
    // post-related to the untouched right state.
    for (s1, s2) in sample_pairs(&pre, rng, 6) {
        if let Some(s1b) = peval(&c1, &s1, &cfg) {
            if !(post.holds)(&s1b, &s2) {
                return Err("one-sided assign premise fails".into());
            }
        }
    }
    check_conclusion(&intra_sem(&cfg), &c1, &Command::Skip, &pre, &post, rng)
}

fn rule_case_l(rng: &mut StdRng) -> Result<(), String> {
    let mut env = small_env(rng);
    let guard = gen::expr_of_sort(rng, &env, Sort::Bool, 2);
    let c = rich_cmd(rng, &mut env);
    let pre = eq_rel(&env);
    let cfg = SemConfig::bare(CHUNK_BITS);
    // Both branches are the right-hand command itself, so each premise is
    // reflexivity under the guard-refined precondition.
    check_conclusion(
        &intra_sem(&cfg),
        &Command::If(guard, Box::new(c.clone()), Box::new(c.clone())),
        &c,
        &pre,
        &pre,
        rng,
    )
}

fn rule_conseq(rng: &mut StdRng) -> Result<(), String> {
    let mut env = small_env(rng);
    let (c1, c2) = related_pair(rng, &mut env);
    let cfg = SemConfig::bare(CHUNK_BITS);
    let sem = intra_sem(&cfg);
    let pre = eq_rel(&env);
    check_conclusion(&sem, &c1, &c2, &pre, &pre, rng).map_err(|e| format!("premise: {e}"))?;
    // Strengthened precondition: equality with a pinned variable.
    let env2 = env.clone();
    let pinned = env.keys().next().cloned();
    let strong_pre = StateRel::new(
        "equality with pinned variable",
        |a, b| a == b,
        move |rng| {
            let mut s = gen::state_for(rng, &env2, CHUNK_BITS);
            if let Some(x) = &pinned {
                if matches!(env2.get(x), Some(Sort::Word)) {
                    s.set(x.clone(), Value::Word(1));
                }
            }
            Some((s.clone(), s))
        },
    );
    // Weakened postcondition: agreement on a subset.
    let keep: Vec<String> = env.keys().take(1).cloned().collect();
    let weak_post = StateRel::eq_on(keep, env.clone(), CHUNK_BITS);
    check_conclusion(&sem, &c1, &c2, &strong_pre, &weak_post, rng)
}

fn rule_trans(rng: &mut StdRng) -> Result<(), String> {
    let mut env = small_env(rng);
    let c1 = rich_cmd(rng, &mut env);
    let c2 = const_prop_cmd(&c1);
    let c3 = const_prop_cmd(&c2);
    let pre = eq_rel(&env);
    let cfg = SemConfig::bare(CHUNK_BITS);
    let sem = intra_sem(&cfg);
    check_conclusion(&sem, &c1, &c2, &pre, &pre, rng).map_err(|e| format!("premise 1: {e}"))?;
    check_conclusion(&sem, &c2, &c3, &pre, &pre, rng).map_err(|e| format!("premise 2: {e}"))?;
    // Equality composed with equality is equality.
    check_conclusion(&sem, &c1, &c3, &pre, &pre, rng)
}

fn rule_rec_bounded(rng: &mut StdRng) -> Result<(), String> {
    let p1 = countdown_program(rng);
    let mut p2 = p1.clone();
    for f in &mut p2.funs {
        f.body = const_prop_cmd(&f.body);
    }
    let spec: Vec<FnPairSpec> = p1
        .funs
        .iter()
        .map(|f| {
            FnPairSpec::identity(&f.name, |rng| {
                (Default::default(), Value::Word(rng.gen_range(0..4)))
            })
        })
        .collect();
    // Premise: each body pair satisfies its specification (checked on the
    // interprocedural semantics, assuming callees satisfy theirs).
    let cfg1 = SemConfig::new(p1.clone()).with_chunk_bits(CHUNK_BITS);
    let cfg2 = SemConfig::new(p2.clone()).with_chunk_bits(CHUNK_BITS);
    for (f, g) in p1.funs.iter().zip(&p2.funs) {
        let pre = StateRel::new(
            "spec-related initial states",
            |a, b| a == b,
            |rng| {
                let s = MachState::new().with("n", Value::Word(rng.gen_range(0..4)));
                Some((s.clone(), s))
            },
        );
        let fres = f.result.clone();
        let post = StateRel::new(
            "equal observables",
            move |a: &MachState, b: &MachState| a.mem == b.mem && a.get(&fres) == b.get(&fres),
            |_| None,
        );
        match check_cmd_tuple(
            &crate::rhl::inter_sem(&cfg1),
            &crate::rhl::inter_sem(&cfg2),
            &f.body,
            &g.body,
            &pre,
            &post,
            &contract(),
            &Cutoffs::err_left(),
            budgets(),
            rng,
        ) {
            TupleOutcome::Related { .. } => {}
            other => return Err(format!("body premise for `{}`: {other:?}", f.name)),
        }
    }
    match check_prog_tuple(&p1, &p2, &spec, &contract(), &Cutoffs::err_left(), budgets(), rng) {
        TupleOutcome::Related { .. } => Ok(()),
        other => Err(format!("program tuple: {other:?}")),
    }
}

fn rule_assign_l_specialized(rng: &mut StdRng) -> Result<(), String> {
    // An assignment of a compound expression against its two-instruction
    // expansion through a temporary.
    let env = small_env(rng);
    let ea = gen::expr_of_sort(rng, &env, Sort::Word, 1);
    let eb = gen::expr_of_sort(rng, &env, Sort::Word, 1);
    let x = "x_out".to_string();
    let t = "t_tmp".to_string();
    let c1 = Command::Assign(Lval::Var(x.clone()), Expr::bin(Op::Add, ea.clone(), eb.clone()));
    let c2 = Command::append(
        Command::Assign(Lval::Var(t.clone()), ea),
        Command::Assign(Lval::Var(x), Expr::bin(Op::Add, Expr::var(t.clone()), eb)),
    );
    let pre = eq_rel(&env);
    let post = eq_except(&env, &[&t]);
    let cfg = SemConfig::bare(CHUNK_BITS);
    // Premise discharged by the partial evaluator.
    for (s1, s2) in sample_pairs(&pre, rng, 6) {
        if let Some(s1b) = peval(&c1, &s1, &cfg) {
            match peval(&c2, &s2, &cfg) {
                Some(s2b) if (post.holds)(&s1b, &s2b) => {}
                other => return Err(format!("partial-evaluator premise fails: {other:?}")),
            }
        }
    }
    check_conclusion(&intra_sem(&cfg), &c1, &c2, &pre, &post, rng)
}

fn rule_if_l_prologue(rng: &mut StdRng) -> Result<(), String> {
    let mut env = small_env(rng);
    let guard = gen::expr_of_sort(rng, &env, Sort::Bool, 2);
    let (t1, t2) = related_pair(rng, &mut env.clone());
    let (f1, f2) = related_pair(rng, &mut env);
    let tp = "t_guard".to_string();
    let prologue = Command::Assign(Lval::Var(tp.clone()), guard.clone());
    let c1 = Command::If(guard.clone(), Box::new(t1), Box::new(f1));
    let c2 = Command::append(
        prologue.clone(),
        Command::If(Expr::var(tp.clone()), Box::new(t2), Box::new(f2)),
    );
    let pre = eq_rel(&env);
    let cfg = SemConfig::bare(CHUNK_BITS);
    // Premise: the prologue is event-free, safe, and terminating, and the
    // guards are synchronized afterwards.
    for (s1, s2) in sample_pairs(&pre, rng, 6) {
        if let Ok(v) = eval_pure(&guard, &s1) {
            match peval(&prologue, &s2, &cfg) {
                Some(s2b) if eval_pure(&Expr::var(tp.clone()), &s2b) == Ok(v) => {}
                other => return Err(format!("prologue premise fails: {other:?}")),
            }
        }
    }
    let post = eq_except(&env, &[&tp]);
    check_conclusion(&intra_sem(&cfg), &c1, &c2, &pre, &post, rng)
}

fn rule_if_b(rng: &mut StdRng) -> Result<(), String> {
    let mut env = small_env(rng);
    env.insert("g".into(), Sort::Word);
    let (guard, truth) = match rng.gen_range(0..4) {
        0 => (Expr::bool(true), true),
        1 => (Expr::bool(false), false),
        2 => (Expr::bin(Op::Eq, Expr::var("g"), Expr::var("g")), true),
        _ => (Expr::bin(Op::Lt, Expr::var("g"), Expr::var("g")), false),
    };
    let (t1, t2) = related_pair(rng, &mut env.clone());
    let (f1, f2) = related_pair(rng, &mut env);
    let pre = eq_rel(&env);
    // Premise: the guard evaluates to the same constant on pre-related
    // states.
    for (s1, _) in sample_pairs(&pre, rng, 6) {
        if eval_pure(&guard, &s1) != Ok(Value::Bool(truth)) {
            return Err("constant-guard premise fails".into());
        }
    }
    let c1 = Command::If(guard, Box::new(t1), Box::new(f1));
    let c2 = if truth { t2 } else { f2 };
    let cfg = SemConfig::bare(CHUNK_BITS);
    check_conclusion(&intra_sem(&cfg), &c1, &c2, &pre, &pre, rng)
}

fn rule_unroll_l(rng: &mut StdRng) -> Result<(), String> {
    let mut env = small_env(rng);
    let body = straight_cmd(rng, &mut env);
    let (init, guard, loop_body) = counter_loop(rng, &mut env, body);
    let looped =
        Command::append(init.clone(), Command::While(guard.clone(), Box::new(loop_body.clone())));
    // One-step unrolling as the right-hand side.
    let unrolled = Command::append(
        init,
        Command::If(
            guard.clone(),
            Box::new(Command::append(
                loop_body.clone(),
                Command::While(guard, Box::new(loop_body)),
            )),
            Box::new(Command::Skip),
        ),
    );
    let pre = eq_rel(&env);
    let cfg = SemConfig::bare(CHUNK_BITS);
    check_conclusion(&intra_sem(&cfg), &looped, &unrolled, &pre, &pre, rng)
}

/// A fresh injective renaming of the environment into a register namespace.
fn fresh_delta(env: &VarEnv) -> (RenMap, BTreeMap<String, String>) {
    let mut delta = RenMap::new();
    let mut map = BTreeMap::new();
    for (i, x) in env.keys().enumerate() {
        let target = format!("reg{i}");
        delta.insert(x.clone(), target.clone());
        map.insert(x.clone(), target);
    }
    (delta, map)
}

fn rule_assign_chk(rng: &mut StdRng) -> Result<(), String> {
    let env = small_env(rng);
    let sort = if rng.gen_bool(0.3) { Sort::Bool } else { Sort::Word };
    let e1 = gen::expr_of_sort(rng, &env, sort, 2);
    let (delta, map) = fresh_delta(&env);
    let e2 = rename_expr(&e1, &map);
    let c1 = Command::Assign(Lval::Var("x_chk".into()), e1);
    let c2 = Command::Assign(Lval::Var("reg_out".into()), e2);
    let checker = RenamingChecker::new(env, CHUNK_BITS);
    let Some(d_out) = run_checker(&checker, &delta, &c1, &c2) else {
        return Err("checker rejected a renamed assignment".into());
    };
    // Conclusion: the tuple from R(d0) to R(d_out) is semantically valid.
    let pre = checker.interp(&delta);
    let post = checker.interp(&d_out);
    let cfg = SemConfig::bare(CHUNK_BITS);
    check_conclusion(&intra_sem(&cfg), &c1, &c2, &pre, &post, rng)
}

fn rule_case_chk(rng: &mut StdRng) -> Result<(), String> {
    let env = small_env(rng);
    let inner = straight_cmd(rng, &mut env.clone());
    let guard1 = gen::expr_of_sort(rng, &env, Sort::Bool, 2);
    let (delta, mut map) = fresh_delta(&env);
    // Fresh variables inside the command rename into a disjoint namespace.
    let mut vars = std::collections::BTreeSet::new();
    collect_cmd_vars(&inner, &mut vars);
    for x in vars {
        map.entry(x.clone()).or_insert_with(|| format!("{x}_t"));
    }
    let c2_inner = rename_cmd(&inner, &map);
    let guard2 = rename_expr(&guard1, &map);
    let if1 = Command::If(guard1, Box::new(inner.clone()), Box::new(inner));
    let if2 = Command::If(guard2, Box::new(c2_inner.clone()), Box::new(c2_inner));
    let checker = RenamingChecker::new(env, CHUNK_BITS);
    let Some(d_out) = run_checker(&checker, &delta, &if1, &if2) else {
        return Err("checker rejected a renamed conditional".into());
    };
    let pre = checker.interp(&delta);
    let post = checker.interp(&d_out);
    let cfg = SemConfig::bare(CHUNK_BITS);
    check_conclusion(&intra_sem(&cfg), &if1, &if2, &pre, &post, rng)
}

fn collect_cmd_vars(c: &Command, out: &mut std::collections::BTreeSet<String>) {
    match c {
        Command::Skip => {}
        Command::Assign(lv, e) | Command::Rand(lv, e) => {
            collect_lval_vars(lv, out);
            collect_expr_vars(e, out);
        }
        Command::Seq(a, b) => {
            collect_cmd_vars(a, out);
            collect_cmd_vars(b, out);
        }
        Command::If(e, t, f) => {
            collect_expr_vars(e, out);
            collect_cmd_vars(t, out);
            collect_cmd_vars(f, out);
        }
        Command::While(e, body) => {
            collect_expr_vars(e, out);
            collect_cmd_vars(body, out);
        }
        Command::Call(lv, _, e) => {
            collect_lval_vars(lv, out);
            collect_expr_vars(e, out);
        }
    }
}

fn collect_expr_vars(e: &Expr, out: &mut std::collections::BTreeSet<String>) {
    match e {
        Expr::Const(_) => {}
        Expr::Var(x) => {
            out.insert(x.clone());
        }
        Expr::Tuple(es) | Expr::App(_, es) => es.iter().for_each(|e| collect_expr_vars(e, out)),
        Expr::ArrRead(x, i) => {
            out.insert(x.clone());
            collect_expr_vars(i, out);
        }
        Expr::MemRead(a) => collect_expr_vars(a, out),
    }
}

fn collect_lval_vars(lv: &Lval, out: &mut std::collections::BTreeSet<String>) {
    match lv {
        Lval::Var(x) => {
            out.insert(x.clone());
        }
        Lval::ArrWrite(x, i) => {
            out.insert(x.clone());
            collect_expr_vars(i, out);
        }
        Lval::MemWrite(a) => collect_expr_vars(a, out),
        Lval::Tuple(ls) => ls.iter().for_each(|l| collect_lval_vars(l, out)),
    }
}

/// All implemented rules, in presentation order.
pub fn rules() -> Vec<(&'static str, Instance)> {
    vec![
        ("Skip", rule_skip as Instance),
        ("Seq", rule_seq),
        ("Assign", rule_assign),
        ("Case", rule_case),
        ("While", rule_while),
        ("Rand", rule_rand),
        ("Call", rule_call),
        ("Assign_L", rule_assign_l),
        ("Case_L", rule_case_l),
        ("Conseq", rule_conseq),
        ("Trans", rule_trans),
        ("Rec_bounded", rule_rec_bounded),
        ("Assign_L_specialized", rule_assign_l_specialized),
        ("If_L_prologue", rule_if_l_prologue),
        ("If_b", rule_if_b),
        ("Unroll_L", rule_unroll_l),
        ("Assign_chk", rule_assign_chk),
        ("Case_chk", rule_case_chk),
    ]
}

/// Runs every rule on `instances` freshly seeded instances and reports
/// per-rule pass counts with replay seeds for any failure.
pub fn rule_soundness_suite(seed: u64, instances: usize) -> SuiteReport {
    let mut master = gen::rng(seed);
    let mut reports = Vec::new();
    for (name, run) in rules() {
        let mut passed = 0;
        let mut failures = Vec::new();
        for _ in 0..instances {
            let inst_seed: u64 = master.gen();
            let mut rng = gen::rng(inst_seed);
            match run(&mut rng) {
                Ok(()) => passed += 1,
                Err(detail) => failures.push(RuleFailure { seed: inst_seed, detail }),
            }
        }
        reports.push(RuleReport { rule: name.to_string(), instances, passed, failures });
    }
    SuiteReport { seed, rules: reports }
}
