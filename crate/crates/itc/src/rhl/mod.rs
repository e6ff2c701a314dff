//! Relational Hoare Logic machinery: semantic validity checking for command
//! and program tuples, and the generic checker framework with its Mono and
//! Correctness laws.
//!
//! Validity of a tuple is the bounded-search stand-in for the universally
//! quantified definition: a finite set of precondition-satisfying state
//! pairs is generated from a seed, and each pair's semantic trees must be
//! related by the cutoff-equivalence checker.

pub mod suite;

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::Rng;

use crate::equiv::{check_xrutt, Budgets, CheckResult, Cutoffs, EventContract, Witness};
use crate::itree::ITree;
use crate::lang::{Command, Expr, Lval, MachState, Mem, Program, Value};
use crate::sem::{eval_pure, sem_inter, write_pure, SemConfig};

/// Decidable predicate on state pairs.
pub type StatePred = Arc<dyn Fn(&MachState, &MachState) -> bool + Send + Sync>;
/// Generator of predicate-satisfying state pairs.
pub type StateSampler = Arc<dyn Fn(&mut StdRng) -> Option<(MachState, MachState)> + Send + Sync>;

/// A decidable binary predicate on states paired with a generator of
/// satisfying pairs (the generator only yields pairs satisfying the
/// predicate).
#[derive(Clone)]
pub struct StateRel {
    pub name: String,
    pub holds: StatePred,
    pub sample: StateSampler,
}

impl StateRel {
    pub fn new(
        name: impl Into<String>,
        holds: impl Fn(&MachState, &MachState) -> bool + Send + Sync + 'static,
        sample: impl Fn(&mut StdRng) -> Option<(MachState, MachState)> + Send + Sync + 'static,
    ) -> StateRel {
        StateRel { name: name.into(), holds: Arc::new(holds), sample: Arc::new(sample) }
    }

    /// Full state equality, sampled by duplicating states drawn for `env`.
    pub fn equality(env: crate::gen::VarEnv, chunk_bits: u32) -> StateRel {
        StateRel::new(
            "state equality",
            |a, b| a == b,
            move |rng| {
                let s = crate::gen::state_for(rng, &env, chunk_bits);
                Some((s.clone(), s))
            },
        )
    }

    /// Agreement on the given variables plus equal memories; other
    /// variables vary independently.
    pub fn eq_on(vars: Vec<String>, env: crate::gen::VarEnv, chunk_bits: u32) -> StateRel {
        let watched = vars.clone();
        StateRel::new(
            format!("agreement on {vars:?}"),
            move |a, b| {
                a.mem == b.mem && watched.iter().all(|x| a.get(x) == b.get(x))
            },
            move |rng| {
                let a = crate::gen::state_for(rng, &env, chunk_bits);
                let mut b = crate::gen::state_for(rng, &env, chunk_bits);
                b.mem = a.mem.clone();
                for x in &vars {
                    match a.get(x) {
                        Some(v) => b.set(x.clone(), v.clone()),
                        None => {
                            b.vm.remove(x);
                        }
                    }
                }
                Some((a, b))
            },
        )
    }
}

/// A tree-producing command semantics; both sides of a tuple may use
/// different ones (intraprocedural, interprocedural, one-step inlining).
pub type CmdSem = Arc<dyn Fn(&Command, &MachState) -> ITree<MachState> + Send + Sync>;

pub fn intra_sem(cfg: &SemConfig) -> CmdSem {
    let cfg = cfg.clone();
    Arc::new(move |c, s| crate::sem::sem_intra(c, s, &cfg))
}

pub fn inter_sem(cfg: &SemConfig) -> CmdSem {
    let cfg = cfg.clone();
    Arc::new(move |c, s| sem_inter(c, s, &cfg))
}

pub fn inline_sem(cfg: &SemConfig) -> CmdSem {
    let cfg = cfg.clone();
    Arc::new(move |c, s| crate::sem::sem_inline(c, s, &cfg))
}

/// Budgets for tuple checking: how many precondition-satisfying state pairs
/// to test, how many sampling attempts to spend finding them, and the
/// per-pair search budgets.
#[derive(Clone, Copy, Debug)]
pub struct TupleBudgets {
    pub state_pairs: usize,
    pub attempts: usize,
    pub check: Budgets,
}

impl Default for TupleBudgets {
    fn default() -> TupleBudgets {
        TupleBudgets { state_pairs: 64, attempts: 640, check: Budgets::default() }
    }
}

impl TupleBudgets {
    pub fn quick() -> TupleBudgets {
        TupleBudgets { state_pairs: 8, attempts: 80, check: Budgets::new(200, 1000) }
    }
}

/// Outcome of a tuple check over generated state pairs.
#[derive(Clone, Debug)]
pub enum TupleOutcome {
    Related { pairs_checked: usize },
    NotRelated { states: Box<(MachState, MachState)>, witness: Witness },
    BudgetExhausted { states: Box<(MachState, MachState)> },
    /// The generator produced no satisfying pair; reported, never silently
    /// `Related`.
    EmptyPrecondition,
}

impl TupleOutcome {
    pub fn is_related(&self) -> bool {
        matches!(self, TupleOutcome::Related { .. })
    }
}

/// Checks a command tuple: for every generated `pre`-satisfying state pair,
/// the two semantic trees must be related with `post` as the result
/// relation.
#[allow(clippy::too_many_arguments)]
pub fn check_cmd_tuple(
    sem_l: &CmdSem,
    sem_r: &CmdSem,
    c1: &Command,
    c2: &Command,
    pre: &StateRel,
    post: &StateRel,
    contract: &EventContract,
    cutoffs: &Cutoffs,
    budgets: TupleBudgets,
    rng: &mut StdRng,
) -> TupleOutcome {
    let mut checked = 0;
    let mut attempts = 0;
    while checked < budgets.state_pairs && attempts < budgets.attempts {
        attempts += 1;
        let Some((s1, s2)) = (pre.sample)(rng) else { continue };
        debug_assert!((pre.holds)(&s1, &s2), "generator produced a pair violating `{}`", pre.name);
        let t1 = sem_l(c1, &s1);
        let t2 = sem_r(c2, &s2);
        let post_holds = post.holds.clone();
        match check_xrutt(&t1, &t2, move |a: &MachState, b: &MachState| post_holds(a, b), contract, cutoffs, budgets.check)
        {
            CheckResult::Related => checked += 1,
            CheckResult::NotRelated(witness) => {
                return TupleOutcome::NotRelated { states: Box::new((s1, s2)), witness }
            }
            CheckResult::BudgetExhausted => {
                return TupleOutcome::BudgetExhausted { states: Box::new((s1, s2)) }
            }
        }
    }
    if checked == 0 {
        TupleOutcome::EmptyPrecondition
    } else {
        TupleOutcome::Related { pairs_checked: checked }
    }
}

/// Relational specification for one function pair: a generator of related
/// (memory, argument) pairs and a postcondition on (memory, result) pairs,
/// where `None` marks an undefined result variable.
#[derive(Clone)]
pub struct FnPairSpec {
    pub left: String,
    pub right: String,
    #[allow(clippy::type_complexity)]
    pub sample_args: Arc<dyn Fn(&mut StdRng) -> Option<((Mem, Value), (Mem, Value))> + Send + Sync>,
    #[allow(clippy::type_complexity)]
    pub post: Arc<dyn Fn(&Mem, Option<&Value>, &Mem, Option<&Value>) -> bool + Send + Sync>,
}

impl FnPairSpec {
    /// Spec relating a function to its namesake: equal arguments and
    /// memories in, equal results and memories out.
    pub fn identity(name: &str, sample_arg: impl Fn(&mut StdRng) -> (Mem, Value) + Send + Sync + 'static) -> FnPairSpec {
        FnPairSpec {
            left: name.to_string(),
            right: name.to_string(),
            sample_args: Arc::new(move |rng| {
                let (mem, v) = sample_arg(rng);
                Some(((mem.clone(), v.clone()), (mem, v)))
            }),
            post: Arc::new(|m1, r1, m2, r2| m1 == m2 && r1 == r2),
        }
    }
}

/// Checks a program tuple: every function pair in the specification's index
/// set must map spec-related initial states (fresh variable map binding only
/// the parameter) to spec-related final memory/result pairs under the
/// interprocedural semantics.
pub fn check_prog_tuple(
    p1: &Program,
    p2: &Program,
    spec: &[FnPairSpec],
    contract: &EventContract,
    cutoffs: &Cutoffs,
    budgets: TupleBudgets,
    rng: &mut StdRng,
) -> TupleOutcome {
    let cfg1 = SemConfig::new(p1.clone());
    let cfg2 = SemConfig::new(p2.clone());
    let mut total = 0;
    for pair in spec {
        let Some(f) = p1.get(&pair.left) else { return TupleOutcome::EmptyPrecondition };
        let Some(g) = p2.get(&pair.right) else { return TupleOutcome::EmptyPrecondition };
        let mut checked = 0;
        let mut attempts = 0;
        while checked < budgets.state_pairs && attempts < budgets.attempts {
            attempts += 1;
            let Some(((m1, v1), (m2, v2))) = (pair.sample_args)(rng) else { continue };
            let init = |fun: &crate::lang::FunDef, mem: Mem, v: Value| {
                let mut st = MachState { vm: Default::default(), mem };
                if let Some(p) = &fun.param {
                    st.set(p.clone(), v);
                }
                st
            };
            let s1 = init(f, m1, v1);
            let s2 = init(g, m2, v2);
            let t1 = sem_inter(&f.body, &s1, &cfg1);
            let t2 = sem_inter(&g.body, &s2, &cfg2);
            let (post, fres1, fres2) = (pair.post.clone(), f.result.clone(), g.result.clone());
            let phi = move |a: &MachState, b: &MachState| {
                post(&a.mem, a.get(&fres1), &b.mem, b.get(&fres2))
            };
            match check_xrutt(&t1, &t2, phi, contract, cutoffs, budgets.check) {
                CheckResult::Related => checked += 1,
                CheckResult::NotRelated(witness) => {
                    return TupleOutcome::NotRelated { states: Box::new((s1, s2)), witness }
                }
                CheckResult::BudgetExhausted => {
                    return TupleOutcome::BudgetExhausted { states: Box::new((s1, s2)) }
                }
            }
        }
        if checked == 0 {
            return TupleOutcome::EmptyPrecondition;
        }
        total += checked;
    }
    TupleOutcome::Related { pairs_checked: total }
}

/// An abstract domain with expression/left-value checkers and a logical
/// interpretation, the ingredients for validating analysis-driven passes.
pub trait CheckerIface {
    type Domain: Clone + PartialEq + std::fmt::Debug;

    /// The logical interpretation `R_d`: which state pairs a domain element
    /// stands for, with a generator of such pairs.
    fn interp(&self, d: &Self::Domain) -> StateRel;

    /// Checks that two expressions are related under `d`, yielding the
    /// domain afterwards. Succeeding implies the evaluated values are
    /// related by the value relation.
    fn chk_expr(&self, d: &Self::Domain, e1: &Expr, e2: &Expr) -> Option<Self::Domain>;

    /// Checks that writing value-related values to the two left-values maps
    /// `d`-related states to related states of the output domain.
    fn chk_lval(&self, d: &Self::Domain, l1: &Lval, l2: &Lval) -> Option<Self::Domain>;

    /// The value relation `S_rel` the expression checker validates.
    fn value_rel(&self, v1: &Value, v2: &Value) -> bool;

    /// Greatest lower bound: the facts agreeing in both domains.
    fn meet(&self, a: &Self::Domain, b: &Self::Domain) -> Self::Domain;

    /// Whether `strong` carries at least the facts of `weak`.
    fn includes(&self, strong: &Self::Domain, weak: &Self::Domain) -> bool;
}

/// Iteration bound for the while rule's stability loop.
pub const MAX_WHILE_ITERS: usize = 32;

/// Structural checker engine composing the simplified rules: assignments
/// and samplings check expression then left-value, conditionals check both
/// branch pairs and join with the domain meet, loops search for a stable
/// domain by iterated meet, sequences thread domains, and `skip` is the
/// identity. `None` encodes any rule failure.
pub fn run_checker<I: CheckerIface>(
    iface: &I,
    d0: &I::Domain,
    c1: &Command,
    c2: &Command,
) -> Option<I::Domain> {
    match (c1, c2) {
        (Command::Skip, Command::Skip) => Some(d0.clone()),
        (Command::Assign(l1, e1), Command::Assign(l2, e2))
        | (Command::Rand(l1, e1), Command::Rand(l2, e2)) => {
            let d1 = iface.chk_expr(d0, e1, e2)?;
            iface.chk_lval(&d1, l1, l2)
        }
        (Command::Call(l1, f1, e1), Command::Call(l2, f2, e2)) => {
            if f1 != f2 {
                return None;
            }
            let d1 = iface.chk_expr(d0, e1, e2)?;
            iface.chk_lval(&d1, l1, l2)
        }
        (Command::Seq(a1, b1), Command::Seq(a2, b2)) => {
            let d1 = run_checker(iface, d0, a1, a2)?;
            run_checker(iface, &d1, b1, b2)
        }
        (Command::If(e1, t1, f1), Command::If(e2, t2, f2)) => {
            let d1 = iface.chk_expr(d0, e1, e2)?;
            let dt = run_checker(iface, &d1, t1, t2)?;
            let df = run_checker(iface, &d1, f1, f2)?;
            Some(iface.meet(&dt, &df))
        }
        (Command::While(e1, b1), Command::While(e2, b2)) => {
            let mut inv = d0.clone();
            for _ in 0..MAX_WHILE_ITERS {
                let dg = iface.chk_expr(&inv, e1, e2)?;
                let db = run_checker(iface, &dg, b1, b2)?;
                if iface.includes(&db, &inv) {
                    // The invariant is stable through guard and body.
                    return iface.chk_expr(&inv, e1, e2);
                }
                inv = iface.meet(&inv, &db);
            }
            None
        }
        _ => None,
    }
}

/// Empirical check of the Mono law: analyzing expressions loses no
/// information, i.e. `R_d`-related pairs stay related under the output
/// domain.
pub fn check_mono_law<I: CheckerIface>(
    iface: &I,
    d: &I::Domain,
    e1: &Expr,
    e2: &Expr,
    rng: &mut StdRng,
    pairs: usize,
) -> Result<(), String> {
    let Some(d2) = iface.chk_expr(d, e1, e2) else {
        return Ok(()); // nothing to check when the checker rejects
    };
    let rel_in = iface.interp(d);
    let rel_out = iface.interp(&d2);
    for _ in 0..pairs {
        let Some((s1, s2)) = (rel_in.sample)(rng) else { continue };
        if !(rel_out.holds)(&s1, &s2) {
            return Err(format!("Mono violated: output domain {d2:?} rejects a {} pair", rel_in.name));
        }
    }
    Ok(())
}

/// Empirical check of the Correct_e law: when the expression checker
/// succeeds, evaluating both expressions in related states yields
/// value-related results; left-side errors are discharged by the caller's
/// cutoff discipline, mirrored here by skipping erring pairs.
pub fn check_correct_e_law<I: CheckerIface>(
    iface: &I,
    d: &I::Domain,
    e1: &Expr,
    e2: &Expr,
    rng: &mut StdRng,
    pairs: usize,
) -> Result<(), String> {
    if iface.chk_expr(d, e1, e2).is_none() {
        return Ok(());
    }
    let rel = iface.interp(d);
    for _ in 0..pairs {
        let Some((s1, s2)) = (rel.sample)(rng) else { continue };
        let Ok(v1) = eval_pure(e1, &s1) else { continue };
        match eval_pure(e2, &s2) {
            Ok(v2) if iface.value_rel(&v1, &v2) => {}
            other => {
                return Err(format!(
                    "Correct_e violated on {e1:?} ~ {e2:?}: left gave {v1:?}, right gave {other:?}"
                ))
            }
        }
    }
    Ok(())
}

/// Empirical check of the Correct_lv law: writing value-related values to
/// `R_d`-related states yields pairs related under the output domain.
#[allow(clippy::too_many_arguments)]
pub fn check_correct_lv_law<I: CheckerIface>(
    iface: &I,
    d: &I::Domain,
    l1: &Lval,
    l2: &Lval,
    sample_value: impl Fn(&mut StdRng) -> (Value, Value),
    cfg: &SemConfig,
    rng: &mut StdRng,
    pairs: usize,
) -> Result<(), String> {
    let Some(d2) = iface.chk_lval(d, l1, l2) else {
        return Ok(());
    };
    let rel_in = iface.interp(d);
    let rel_out = iface.interp(&d2);
    for _ in 0..pairs {
        let Some((s1, s2)) = (rel_in.sample)(rng) else { continue };
        let (v1, v2) = sample_value(rng);
        if !iface.value_rel(&v1, &v2) {
            continue;
        }
        let Ok(s1b) = write_pure(l1, &v1, &s1, cfg) else { continue };
        match write_pure(l2, &v2, &s2, cfg) {
            Ok(s2b) if (rel_out.holds)(&s1b, &s2b) => {}
            other => {
                return Err(format!(
                    "Correct_lv violated on {l1:?} ~ {l2:?}: right-side write gave {other:?}"
                ))
            }
        }
    }
    Ok(())
}

/// Convenience: a sampler that returns `count` fresh state pairs from a
/// relation, for harnesses that need explicit pair lists.
pub fn sample_pairs(
    rel: &StateRel,
    rng: &mut StdRng,
    count: usize,
) -> Vec<(MachState, MachState)> {
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < count * 10 {
        attempts += 1;
        if let Some(pair) = (rel.sample)(rng) {
            out.push(pair);
        }
    }
    out
}

/// Seeded helper mirroring the suite's instance sizes.
pub fn small_word_env(rng: &mut StdRng, vars: usize) -> crate::gen::VarEnv {
    let mut env = crate::gen::VarEnv::new();
    for i in 0..vars {
        let sort = if rng.gen_bool(0.25) { crate::gen::Sort::Bool } else { crate::gen::Sort::Word };
        env.insert(format!("x{i}"), sort);
    }
    env
}
