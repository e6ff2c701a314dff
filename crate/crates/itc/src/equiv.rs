//! Bounded checkers for weak bisimilarity (`eutt`), heterogeneous
//! equivalence (`rutt`), and cutoff equivalence (`xrutt`).
//!
//! The coinductive relations become semi-decision procedures with explicit
//! budgets and a three-valued verdict: `Related` when a finite derivation
//! closes, `NotRelated` with a replayable witness when a rule's side
//! condition fails on a fully explored branch, and `BudgetExhausted`
//! otherwise. One-sided `Tau` strips are inductive and bounded by
//! `tau_budget` per side within each `Vis`/`Ret` level; synchronized `Tau`
//! steps and `Vis` continuations are coinductive, so revisiting a node pair
//! through one of them closes the derivation.

use std::collections::HashMap;
use std::fmt::Debug;
use std::sync::Arc;

use serde::Serialize;

use crate::itree::{Answer, Event, ITree, Node, Res};

/// Search budgets: `depth` counts `Vis`/`Ret` levels, `tau_budget` bounds
/// consecutive `Tau` strips per side per level.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Budgets {
    pub depth: u32,
    pub tau_budget: u32,
}

impl Budgets {
    pub fn new(depth: u32, tau_budget: u32) -> Budgets {
        Budgets { depth, tau_budget }
    }
}

impl Default for Budgets {
    fn default() -> Budgets {
        Budgets { depth: 200, tau_budget: 1000 }
    }
}

/// Event precondition: which event pairs may face each other.
pub type EventPre = Arc<dyn Fn(&Event, &Event) -> bool + Send + Sync>;
/// Event postcondition: which answer pairs satisfy the handler contract.
pub type EventPost = Arc<dyn Fn(&Event, &Answer, &Event, &Answer) -> bool + Send + Sync>;
/// Finite answer enumeration per event; `None` marks an event whose answers
/// cannot be enumerated.
pub type AnswerEnum = Arc<dyn Fn(&Event) -> Option<Vec<Answer>> + Send + Sync>;

/// Handler contract: event precondition, event/answer postcondition, and the
/// finite answer enumeration backing the universally quantified continuation
/// check. The checkers must never reach an event without an enumeration.
#[derive(Clone)]
pub struct EventContract {
    pub pre: EventPre,
    pub post: EventPost,
    pub answers: AnswerEnum,
}

/// Enumeration guard: events asking for more random bits than this cannot be
/// checked exhaustively.
pub const MAX_ENUM_BITS: u32 = 12;

/// All chunk vectors of length `n` with entries below `2^chunk_bits`.
pub fn enumerate_chunk_vectors(n: u64, chunk_bits: u32) -> Vec<Vec<u8>> {
    let base = 1u64 << chunk_bits;
    let total = base.pow(n as u32);
    let mut out = Vec::with_capacity(total as usize);
    for code in 0..total {
        let mut v = Vec::with_capacity(n as usize);
        let mut c = code;
        for _ in 0..n {
            v.push((c % base) as u8);
            c /= base;
        }
        out.push(v);
    }
    out
}

impl EventContract {
    /// The equality contract: events must be equal and answers must be
    /// equal. `Rnd` answers are enumerated for the given chunk width.
    pub fn equality(chunk_bits: u32) -> EventContract {
        EventContract {
            pre: Arc::new(|e1, e2| e1 == e2),
            post: Arc::new(|_, a1, _, a2| a1 == a2),
            answers: Arc::new(move |e| match e {
                Event::Err(_) => Some(Vec::new()),
                Event::Rnd(n) => {
                    if n * chunk_bits as u64 > MAX_ENUM_BITS as u64 {
                        None
                    } else {
                        Some(
                            enumerate_chunk_vectors(*n, chunk_bits)
                                .into_iter()
                                .map(Answer::Chunks)
                                .collect(),
                        )
                    }
                }
                Event::Call { .. } | Event::Orac { .. } => None,
            }),
        }
    }
}

/// Cutoff predicates: designated events after which the relation holds
/// trivially on that side.
#[derive(Clone)]
pub struct Cutoffs {
    pub left: Arc<dyn Fn(&Event) -> bool + Send + Sync>,
    pub right: Arc<dyn Fn(&Event) -> bool + Send + Sync>,
}

impl Cutoffs {
    pub fn none() -> Cutoffs {
        Cutoffs { left: Arc::new(|_| false), right: Arc::new(|_| false) }
    }

    /// Left cutoff on error events: "correctness up to source safety".
    pub fn err_left() -> Cutoffs {
        Cutoffs { left: Arc::new(Event::is_err), right: Arc::new(|_| false) }
    }
}

/// One step along a witness path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum WitnessStep {
    TauLeft,
    TauRight,
    TauBoth,
    Events(Box<EventStep>),
}

/// The event/answer choices taken at a `Vis` level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventStep {
    pub left: Event,
    pub left_answer: Answer,
    pub right: Event,
    pub right_answer: Answer,
}

/// The rule condition that failed at the end of the witness path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Failure {
    ReturnsUnrelated { left: String, right: String },
    EventPreconditionFailed { left: Event, right: Event },
    ShapeMismatch { left: String, right: String },
}

/// A replayable divergence witness: the event/answer choices down to the
/// mismatch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub steps: Vec<WitnessStep>,
    pub failure: Failure,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum CheckResult {
    Related,
    NotRelated(Witness),
    BudgetExhausted,
}

impl CheckResult {
    pub fn is_related(&self) -> bool {
        matches!(self, CheckResult::Related)
    }
}

fn head_name<R>(n: &Node<R>) -> String {
    match n {
        Node::Ret(_) => "Ret".to_string(),
        Node::Tau(_) => "Tau".to_string(),
        Node::Vis(e, _) => format!("Vis({e:?})"),
    }
}

struct Search<'a, R1, R2, F> {
    phi: &'a F,
    contract: &'a EventContract,
    cutoffs: &'a Cutoffs,
    tau_budget: u32,
    steps: Vec<WitnessStep>,
    /// Node-identity pairs on the current path, with the index of the first
    /// visit; used to close coinductive cycles on shared structure.
    on_path: HashMap<(usize, usize), usize>,
    path: Vec<bool>,
    _results: std::marker::PhantomData<fn(&R1, &R2)>,
}

impl<R1, R2, F> Search<'_, R1, R2, F>
where
    R1: Res + Debug,
    R2: Res + Debug,
    F: Fn(&R1, &R2) -> bool,
{
    fn run(
        &mut self,
        t1: &ITree<R1>,
        t2: &ITree<R2>,
        depth: u32,
        taus_left: u32,
        taus_right: u32,
        coinductive_edge: bool,
    ) -> CheckResult {
        if depth == 0 {
            return CheckResult::BudgetExhausted;
        }
        let key = (t1.id(), t2.id());
        if let Some(&first) = self.on_path.get(&key) {
            // A revisited pair closes the derivation if the cycle passes
            // through a coinductive rule; a cycle of one-sided Tau strips
            // does not constitute a proof.
            if coinductive_edge || self.path[first..].iter().any(|c| *c) {
                return CheckResult::Related;
            }
            return CheckResult::BudgetExhausted;
        }
        self.on_path.insert(key, self.path.len());
        self.path.push(coinductive_edge);
        let result = self.step(t1, t2, depth, taus_left, taus_right);
        self.path.pop();
        self.on_path.remove(&key);
        result
    }

    fn step(
        &mut self,
        t1: &ITree<R1>,
        t2: &ITree<R2>,
        depth: u32,
        taus_left: u32,
        taus_right: u32,
    ) -> CheckResult {
        let n1 = t1.node();
        let n2 = t2.node();
        if let Node::Vis(e, _) = n1 {
            if (self.cutoffs.left)(e) {
                return CheckResult::Related;
            }
        }
        if let Node::Vis(e, _) = n2 {
            if (self.cutoffs.right)(e) {
                return CheckResult::Related;
            }
        }
        match (n1, n2) {
            (Node::Tau(a), Node::Tau(b)) => {
                if taus_left == 0 || taus_right == 0 {
                    return CheckResult::BudgetExhausted;
                }
                self.steps.push(WitnessStep::TauBoth);
                let r = self.run(a, b, depth, taus_left - 1, taus_right - 1, true);
                self.steps.pop();
                r
            }
            (Node::Tau(a), _) => {
                if taus_left == 0 {
                    return CheckResult::BudgetExhausted;
                }
                self.steps.push(WitnessStep::TauLeft);
                let r = self.run(a, t2, depth, taus_left - 1, taus_right, false);
                self.steps.pop();
                r
            }
            (_, Node::Tau(b)) => {
                if taus_right == 0 {
                    return CheckResult::BudgetExhausted;
                }
                self.steps.push(WitnessStep::TauRight);
                let r = self.run(t1, b, depth, taus_left, taus_right - 1, false);
                self.steps.pop();
                r
            }
            (Node::Ret(r1), Node::Ret(r2)) => {
                if (self.phi)(r1, r2) {
                    CheckResult::Related
                } else {
                    CheckResult::NotRelated(Witness {
                        steps: self.steps.clone(),
                        failure: Failure::ReturnsUnrelated {
                            left: format!("{r1:?}"),
                            right: format!("{r2:?}"),
                        },
                    })
                }
            }
            (Node::Vis(e1, k1), Node::Vis(e2, k2)) => {
                if !(self.contract.pre)(e1, e2) {
                    return CheckResult::NotRelated(Witness {
                        steps: self.steps.clone(),
                        failure: Failure::EventPreconditionFailed {
                            left: e1.clone(),
                            right: e2.clone(),
                        },
                    });
                }
                let answers1 = (self.contract.answers)(e1).unwrap_or_else(|| {
                    panic!("checker reached event without a finite answer enumeration: {e1:?}")
                });
                let answers2 = (self.contract.answers)(e2).unwrap_or_else(|| {
                    panic!("checker reached event without a finite answer enumeration: {e2:?}")
                });
                let mut exhausted = false;
                for a1 in &answers1 {
                    for a2 in &answers2 {
                        if !(self.contract.post)(e1, a1, e2, a2) {
                            continue;
                        }
                        self.steps.push(WitnessStep::Events(Box::new(EventStep {
                            left: e1.clone(),
                            left_answer: a1.clone(),
                            right: e2.clone(),
                            right_answer: a2.clone(),
                        })));
                        let r = self.run(
                            &k1(a1),
                            &k2(a2),
                            depth - 1,
                            self.tau_budget,
                            self.tau_budget,
                            true,
                        );
                        self.steps.pop();
                        match r {
                            CheckResult::Related => {}
                            CheckResult::BudgetExhausted => exhausted = true,
                            not_related => return not_related,
                        }
                    }
                }
                if exhausted {
                    CheckResult::BudgetExhausted
                } else {
                    CheckResult::Related
                }
            }
            (a, b) => CheckResult::NotRelated(Witness {
                steps: self.steps.clone(),
                failure: Failure::ShapeMismatch { left: head_name(a), right: head_name(b) },
            }),
        }
    }
}

/// Bounded check of cutoff equivalence.
pub fn check_xrutt<R1, R2, F>(
    t1: &ITree<R1>,
    t2: &ITree<R2>,
    phi: F,
    contract: &EventContract,
    cutoffs: &Cutoffs,
    budgets: Budgets,
) -> CheckResult
where
    R1: Res + Debug,
    R2: Res + Debug,
    F: Fn(&R1, &R2) -> bool,
{
    assert!(budgets.tau_budget >= 1, "tau_budget must be at least 1");
    let mut search = Search {
        phi: &phi,
        contract,
        cutoffs,
        tau_budget: budgets.tau_budget,
        steps: Vec::new(),
        on_path: HashMap::new(),
        path: Vec::new(),
        _results: std::marker::PhantomData,
    };
    search.run(t1, t2, budgets.depth, budgets.tau_budget, budgets.tau_budget, false)
}

/// Heterogeneous equivalence: `xrutt` with no cutoffs on either side.
pub fn check_rutt<R1, R2, F>(
    t1: &ITree<R1>,
    t2: &ITree<R2>,
    phi: F,
    contract: &EventContract,
    budgets: Budgets,
) -> CheckResult
where
    R1: Res + Debug,
    R2: Res + Debug,
    F: Fn(&R1, &R2) -> bool,
{
    check_xrutt(t1, t2, phi, contract, &Cutoffs::none(), budgets)
}

/// Weak bisimilarity: `rutt` with equality contracts.
pub fn check_eutt<R1, R2, F>(
    t1: &ITree<R1>,
    t2: &ITree<R2>,
    phi: F,
    chunk_bits: u32,
    budgets: Budgets,
) -> CheckResult
where
    R1: Res + Debug,
    R2: Res + Debug,
    F: Fn(&R1, &R2) -> bool,
{
    check_rutt(t1, t2, phi, &EventContract::equality(chunk_bits), budgets)
}

/// Replays a witness against the trees it came from and confirms that the
/// recorded rule condition concretely fails at the end of the path.
pub fn replay_witness<R1, R2, F>(
    t1: &ITree<R1>,
    t2: &ITree<R2>,
    witness: &Witness,
    phi: F,
    contract: &EventContract,
) -> bool
where
    R1: Res + Debug,
    R2: Res + Debug,
    F: Fn(&R1, &R2) -> bool,
{
    let mut cur1 = t1.clone();
    let mut cur2 = t2.clone();
    for step in &witness.steps {
        match step {
            WitnessStep::TauLeft => match cur1.clone().node() {
                Node::Tau(rest) => cur1 = rest.clone(),
                _ => return false,
            },
            WitnessStep::TauRight => match cur2.clone().node() {
                Node::Tau(rest) => cur2 = rest.clone(),
                _ => return false,
            },
            WitnessStep::TauBoth => {
                match (cur1.clone().node(), cur2.clone().node()) {
                    (Node::Tau(a), Node::Tau(b)) => {
                        cur1 = a.clone();
                        cur2 = b.clone();
                    }
                    _ => return false,
                }
            }
            WitnessStep::Events(ev) => {
                match (cur1.clone().node(), cur2.clone().node()) {
                    (Node::Vis(e1, k1), Node::Vis(e2, k2)) => {
                        if *e1 != ev.left || *e2 != ev.right {
                            return false;
                        }
                        if !(contract.post)(e1, &ev.left_answer, e2, &ev.right_answer) {
                            return false;
                        }
                        cur1 = k1(&ev.left_answer);
                        cur2 = k2(&ev.right_answer);
                    }
                    _ => return false,
                }
            }
        }
    }
    match (&witness.failure, cur1.node(), cur2.node()) {
        (Failure::ReturnsUnrelated { .. }, Node::Ret(r1), Node::Ret(r2)) => !phi(r1, r2),
        (Failure::EventPreconditionFailed { .. }, Node::Vis(e1, _), Node::Vis(e2, _)) => {
            !(contract.pre)(e1, e2)
        }
        (Failure::ShapeMismatch { .. }, a, b) => {
            !matches!((a, b), (Node::Ret(_), Node::Ret(_)) | (Node::Vis(..), Node::Vis(..)))
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::itree::trigger;

    fn rnd_then_ret(off: u64) -> ITree<u64> {
        trigger(Event::Rnd(1)).bind(move |a| match a {
            Answer::Chunks(c) => ITree::ret(c[0] as u64 + off),
            _ => unreachable!(),
        })
    }

    fn spin() -> ITree<u64> {
        crate::itree::iter(|i: &u64| ITree::ret(std::ops::ControlFlow::Continue(*i)), 0)
    }

    fn eq_budgets() -> Budgets {
        Budgets::new(50, 50)
    }

    #[test]
    fn identical_rnd_trees_are_related() {
        let r = check_eutt(&rnd_then_ret(0), &rnd_then_ret(0), |a, b| a == b, 2, eq_budgets());
        assert_eq!(r, CheckResult::Related);
    }

    #[test]
    fn differing_leaves_yield_a_witness() {
        let r = check_eutt(
            &ITree::ret(1u64),
            &ITree::ret(2u64),
            |a, b| a == b,
            2,
            eq_budgets(),
        );
        match r {
            CheckResult::NotRelated(w) => {
                assert!(w.steps.is_empty());
                assert!(matches!(w.failure, Failure::ReturnsUnrelated { .. }));
            }
            other => panic!("expected NotRelated, got {other:?}"),
        }
    }

    #[test]
    fn tau_padding_within_budget_is_related() {
        let mut padded = rnd_then_ret(0);
        for _ in 0..7 {
            padded = ITree::tau(padded);
        }
        let r = check_eutt(&padded, &rnd_then_ret(0), |a, b| a == b, 2, eq_budgets());
        assert_eq!(r, CheckResult::Related);
    }

    #[test]
    fn left_err_cutoff_relates_to_anything() {
        let t1: ITree<u64> = ITree::err("boom");
        let r = check_xrutt(
            &t1,
            &rnd_then_ret(3),
            |a, b| a == b,
            &EventContract::equality(2),
            &Cutoffs::err_left(),
            eq_budgets(),
        );
        assert_eq!(r, CheckResult::Related);
        // Without the cutoff the same pair fails the event precondition.
        let r = check_eutt(&t1, &rnd_then_ret(3), |a, b| a == b, 2, eq_budgets());
        assert!(matches!(
            r,
            CheckResult::NotRelated(Witness { failure: Failure::EventPreconditionFailed { .. }, .. })
        ));
    }

    #[test]
    fn rejecting_precondition_is_not_related() {
        let contract = EventContract {
            pre: Arc::new(|_, _| false),
            ..EventContract::equality(2)
        };
        let r = check_rutt(&rnd_then_ret(0), &rnd_then_ret(0), |a: &u64, b| a == b, &contract, eq_budgets());
        assert!(matches!(r, CheckResult::NotRelated(_)));
    }

    #[test]
    fn mismatched_branch_found_through_enumeration() {
        // Trees agree on chunk 0 but differ on chunk 1.
        let t1 = trigger(Event::Rnd(1)).bind(|a| match a {
            Answer::Chunks(c) => ITree::ret(if c[0] == 0 { 0u64 } else { 1 }),
            _ => unreachable!(),
        });
        let t2 = trigger(Event::Rnd(1)).bind(|a| match a {
            Answer::Chunks(c) => ITree::ret(if c[0] == 0 { 0u64 } else { 2 }),
            _ => unreachable!(),
        });
        let r = check_eutt(&t1, &t2, |a, b| a == b, 1, eq_budgets());
        match r {
            CheckResult::NotRelated(w) => {
                assert_eq!(w.steps.len(), 1);
                assert!(replay_witness(&t1, &t2, &w, |a, b| a == b, &EventContract::equality(1)));
            }
            other => panic!("expected NotRelated, got {other:?}"),
        }
    }

    #[test]
    fn divergence_exhausts_budget() {
        let r = check_eutt(&spin(), &ITree::ret(0u64), |a, b| a == b, 2, Budgets::new(10, 10));
        assert_eq!(r, CheckResult::BudgetExhausted);
    }

    #[test]
    fn shared_cycle_closes_coinductively() {
        // Knot-tied spins expose stable node identities, so the checker can
        // close the Tau-Tau cycle instead of exhausting its budget.
        let t1: ITree<u64> = ITree::cyclic(crate::itree::Node::Tau);
        let t2: ITree<u64> = ITree::cyclic(crate::itree::Node::Tau);
        let r = check_eutt(&t1, &t2, |a, b| a == b, 2, Budgets::new(10, 10));
        assert_eq!(r, CheckResult::Related);
        // Unfolding spins allocate fresh nodes; the bounded search stays
        // honest and reports exhaustion.
        let r = check_eutt(&spin(), &spin(), |a, b| a == b, 2, Budgets::new(10, 10));
        assert_eq!(r, CheckResult::BudgetExhausted);
    }

    #[test]
    fn monotone_in_budgets() {
        let mut padded = rnd_then_ret(0);
        for _ in 0..3 {
            padded = ITree::tau(padded);
        }
        for depth in [5u32, 20, 80] {
            for tau in [4u32, 16, 64] {
                let r = check_eutt(&padded, &rnd_then_ret(0), |a, b| a == b, 1, Budgets::new(depth, tau));
                assert_eq!(r, CheckResult::Related, "budgets ({depth},{tau})");
            }
        }
        for depth in [2u32, 20, 80] {
            let r = check_eutt(&ITree::ret(0u64), &ITree::ret(1u64), |a, b| a == b, 1, Budgets::new(depth, 4));
            assert!(matches!(r, CheckResult::NotRelated(_)), "depth {depth}");
        }
    }

    #[test]
    fn err_events_relate_vacuously_under_equality() {
        let t1: ITree<u64> = ITree::err("same");
        let t2: ITree<u64> = ITree::err("same");
        assert_eq!(check_eutt(&t1, &t2, |a, b| a == b, 2, eq_budgets()), CheckResult::Related);
        let t3: ITree<u64> = ITree::err("other");
        assert!(matches!(check_eutt(&t1, &t3, |a, b| a == b, 2, eq_budgets()), CheckResult::NotRelated(_)));
    }
}
