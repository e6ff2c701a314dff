//! IND-CCA experiments for key-encapsulation mechanisms: challengers
//! derived from programs, adversaries with an explicit state and a
//! decapsulation oracle, exact advantage computation, and the preservation
//! check comparing a program against its compilation.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::equiv::{check_eutt, Budgets, CheckResult};
use crate::itree::{Answer, Event, ITree, Node};
use crate::lang::{Lval, MachState, Program, Value};
use crate::passes::{pipeline, PassError, PassKind};
use crate::prob::{rat_json, semp, Dist, ProbConfig, ProbError, RatJson};
use crate::sem::{sem_inter, write_pure, SemConfig};

/// `() -> (pk, sk)`
pub type GenKeyFn = Arc<dyn Fn() -> ITree<(Value, Value)> + Send + Sync>;
/// `pk -> (msg, ct)`
pub type EncapFn = Arc<dyn Fn(&Value) -> ITree<(Value, Value)> + Send + Sync>;
/// `(sk, ct) -> msg`
pub type DecapFn = Arc<dyn Fn(&Value, &Value) -> ITree<Value> + Send + Sync>;

/// The three probabilistic algorithms of a KEM, as tree builders over
/// `{Rnd, Err}`. Values are program values (`Bytes` in the shipped toys).
#[derive(Clone)]
pub struct Challenger {
    pub gen_key: GenKeyFn,
    pub encap: EncapFn,
    pub decap: DecapFn,
}

/// `pk -> advmem`
pub type QueryFn = Arc<dyn Fn(&Value) -> ITree<Value> + Send + Sync>;
/// `(advmem, ct, msg) -> bit`
pub type GuessFn = Arc<dyn Fn(&Value, &Value, &Value) -> ITree<bool> + Send + Sync>;

/// A two-stage adversary with explicit internal state `advmem`, returning
/// in trees over `{Orac, Rnd}`.
#[derive(Clone)]
pub struct Adversary {
    pub name: String,
    pub query: QueryFn,
    pub guess: GuessFn,
}

/// Names binding a program to the KEM interface.
#[derive(Clone, Debug, Serialize)]
pub struct KemNames {
    pub fn_genkey: String,
    pub fn_encap: String,
    pub fn_decap: String,
    pub var_pk: String,
    pub var_sk: String,
    pub var_ct: String,
    pub var_msg: String,
}

impl Default for KemNames {
    fn default() -> KemNames {
        KemNames {
            fn_genkey: "genkey".into(),
            fn_encap: "encap".into(),
            fn_decap: "decap".into(),
            var_pk: "pk".into(),
            var_sk: "sk".into(),
            var_ct: "ct".into(),
            var_msg: "msg".into(),
        }
    }
}

/// What the restricted oracle does when queried on the challenge
/// ciphertext.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RejectionPolicy {
    /// Answer with the designated all-zero message.
    ZeroMessage,
    /// Abort the experiment with output 0.
    AbortZero,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    /// Width of sampled random messages, in chunks.
    pub msg_chunks: u64,
    /// Width of keys and ciphertexts, in chunks (used by the safety scan).
    pub key_chunks: u64,
    pub chunk_bits: u32,
    /// Step budget for the exact interpretation of the experiment.
    pub steps: u64,
    pub rejection: RejectionPolicy,
}

impl Default for ExperimentConfig {
    fn default() -> ExperimentConfig {
        ExperimentConfig {
            msg_chunks: 1,
            key_chunks: 1,
            chunk_bits: 1,
            steps: 1 << 14,
            rejection: RejectionPolicy::ZeroMessage,
        }
    }
}

impl ExperimentConfig {
    fn zero_message(&self) -> Value {
        Value::Bytes(vec![0; self.msg_chunks as usize])
    }
}

#[derive(Debug, Error)]
pub enum CryptoError {
    #[error("missing function `{0}` in the program")]
    MissingName(String),
    #[error("experiment did not converge within budget: residual {0}")]
    NonConvergent(String),
    #[error("error mass present in the experiment: {0}")]
    ErrorMassPresent(String),
    #[error("safety scan failed for {component}: {detail}")]
    SafetyViolation { component: String, detail: String },
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Pass(#[from] PassError),
}

/// Builds the challenger induced by a program: each algorithm runs the
/// corresponding function body interprocedurally from an initial state with
/// no variable defined, inputs written through left-values first, outputs
/// read from the final variable map. Unwritten outputs surface as error
/// events (and later as error mass), violating the initialization
/// condition.
pub fn make_challenger(
    p: &Program,
    names: &KemNames,
    chunk_bits: u32,
) -> Result<Challenger, CryptoError> {
    for f in [&names.fn_genkey, &names.fn_encap, &names.fn_decap] {
        if p.get(f).is_none() {
            return Err(CryptoError::MissingName(f.clone()));
        }
    }
    let cfg = SemConfig::new(p.clone()).with_chunk_bits(chunk_bits);

    let gen_key = {
        let cfg = cfg.clone();
        let names = names.clone();
        let body = p.get(&names.fn_genkey).unwrap().body.clone();
        Arc::new(move || {
            let names = names.clone();
            sem_inter(&body, &MachState::new(), &cfg).bind(move |s| {
                match (s.get(&names.var_pk), s.get(&names.var_sk)) {
                    (Some(pk), Some(sk)) => ITree::ret((pk.clone(), sk.clone())),
                    (None, _) => ITree::err(format!("UndefVariable {}", names.var_pk)),
                    (_, None) => ITree::err(format!("UndefVariable {}", names.var_sk)),
                }
            })
        })
    };

    let encap = {
        let cfg = cfg.clone();
        let names = names.clone();
        let body = p.get(&names.fn_encap).unwrap().body.clone();
        Arc::new(move |pk: &Value| {
            let init = write_pure(&Lval::Var(names.var_pk.clone()), pk, &MachState::new(), &cfg);
            let s0 = match init {
                Ok(s) => s,
                Err(e) => return ITree::err(e.to_string()),
            };
            let names = names.clone();
            sem_inter(&body, &s0, &cfg).bind(move |s| {
                match (s.get(&names.var_msg), s.get(&names.var_ct)) {
                    (Some(msg), Some(ct)) => ITree::ret((msg.clone(), ct.clone())),
                    (None, _) => ITree::err(format!("UndefVariable {}", names.var_msg)),
                    (_, None) => ITree::err(format!("UndefVariable {}", names.var_ct)),
                }
            })
        })
    };

    let decap = {
        let cfg = cfg.clone();
        let names = names.clone();
        let body = p.get(&names.fn_decap).unwrap().body.clone();
        Arc::new(move |sk: &Value, ct: &Value| {
            let init = write_pure(&Lval::Var(names.var_sk.clone()), sk, &MachState::new(), &cfg)
                .and_then(|s| write_pure(&Lval::Var(names.var_ct.clone()), ct, &s, &cfg));
            let s0 = match init {
                Ok(s) => s,
                Err(e) => return ITree::err(e.to_string()),
            };
            let names = names.clone();
            sem_inter(&body, &s0, &cfg).bind(move |s| match s.get(&names.var_msg) {
                Some(v) => ITree::ret(v.clone()),
                None => ITree::err(format!("UndefVariable {}", names.var_msg)),
            })
        })
    };

    Ok(Challenger { gen_key, encap, decap })
}

enum StageOutcome<R> {
    Done(R),
    Aborted,
}

impl<R: Clone> Clone for StageOutcome<R> {
    fn clone(&self) -> Self {
        match self {
            StageOutcome::Done(r) => StageOutcome::Done(r.clone()),
            StageOutcome::Aborted => StageOutcome::Aborted,
        }
    }
}

/// Interprets an adversary stage: `Orac` events go to the decapsulation
/// oracle (restricted by the challenge ciphertext in the guess stage),
/// everything else passes through.
type DecapOracle = Arc<dyn Fn(&Value) -> ITree<Value> + Send + Sync>;

fn interp_stage<R: crate::itree::Res>(
    t: &ITree<R>,
    decap: DecapOracle,
    restriction: Option<(Value, RejectionPolicy, Value)>,
) -> ITree<StageOutcome<R>> {
    let t = t.clone();
    ITree::defer(move || match t.node() {
        Node::Ret(r) => Node::Ret(StageOutcome::Done(r.clone())),
        Node::Tau(rest) => Node::Tau(interp_stage(rest, decap.clone(), restriction.clone())),
        Node::Vis(Event::Orac { arg, .. }, k) => {
            if let Some((challenge, policy, zero)) = &restriction {
                if arg == challenge {
                    // Querying the restricted oracle with the challenge
                    // ciphertext is disallowed.
                    return match policy {
                        RejectionPolicy::ZeroMessage => {
                            let rest = k(&Answer::Oracle(zero.clone()));
                            Node::Tau(interp_stage(&rest, decap.clone(), restriction.clone()))
                        }
                        RejectionPolicy::AbortZero => Node::Ret(StageOutcome::Aborted),
                    };
                }
                // Instrumented oracle-restriction invariant: the real
                // decapsulation below never sees the challenge.
                assert!(arg != challenge);
            }
            let k = k.clone();
            let decap2 = decap.clone();
            let restriction2 = restriction.clone();
            let answered = decap(arg).bind(move |m| {
                interp_stage(&k(&Answer::Oracle(m.clone())), decap2.clone(), restriction2.clone())
            });
            Node::Tau(answered)
        }
        Node::Vis(e, k) => {
            let k = k.clone();
            let decap2 = decap.clone();
            let restriction2 = restriction.clone();
            Node::Vis(
                e.clone(),
                Arc::new(move |a| interp_stage(&k(a), decap2.clone(), restriction2.clone())),
            )
        }
    })
}

fn chunks_of(a: &Answer) -> &[u8] {
    match a {
        Answer::Chunks(c) => c,
        _ => unreachable!("Rnd answered with a non-chunk answer"),
    }
}

/// Composes the IND-CCA experiment: key generation, the query stage with an
/// unrestricted decapsulation oracle, encapsulation of the real message,
/// sampling of the random message and the challenge bit, and the guess
/// stage with the restricted oracle. Output 1 means the adversary guessed
/// the bit.
pub fn run_experiment(
    ch: &Challenger,
    adv: &Adversary,
    cfg: &ExperimentConfig,
) -> ITree<bool> {
    let ch = ch.clone();
    let adv = adv.clone();
    let cfg = cfg.clone();
    (ch.gen_key)().bind(move |(pk, sk)| {
        let (pk, sk) = (pk.clone(), sk.clone());
        let (ch, adv, cfg) = (ch.clone(), adv.clone(), cfg.clone());
        let sk_oracle = sk.clone();
        let decap_q: DecapOracle = {
            let ch = ch.clone();
            Arc::new(move |ctq: &Value| (ch.decap)(&sk_oracle, ctq))
        };
        interp_stage(&(adv.query)(&pk), decap_q, None).bind(move |stage1| {
            let advmem = match stage1 {
                StageOutcome::Done(m) => m.clone(),
                StageOutcome::Aborted => unreachable!("the query stage has no restriction"),
            };
            let (ch, adv, cfg) = (ch.clone(), adv.clone(), cfg.clone());
            let sk = sk.clone();
            (ch.encap)(&pk).bind(move |(m0, ct)| {
                let (m0, ct) = (m0.clone(), ct.clone());
                let (ch, adv, cfg) = (ch.clone(), adv.clone(), cfg.clone());
                let (sk, advmem) = (sk.clone(), advmem.clone());
                ITree::vis(Event::Rnd(cfg.msg_chunks), move |a| {
                    let m1 = Value::Bytes(chunks_of(a).to_vec());
                    let (ch, adv, cfg) = (ch.clone(), adv.clone(), cfg.clone());
                    let (sk, advmem, m0, ct) = (sk.clone(), advmem.clone(), m0.clone(), ct.clone());
                    ITree::vis(Event::Rnd(1), move |a| {
                        let b = chunks_of(a)[0] & 1 == 1;
                        let mb = if b { m1.clone() } else { m0.clone() };
                        let sk2 = sk.clone();
                        let ch2 = ch.clone();
                        let decap_g: DecapOracle =
                            Arc::new(move |ctq: &Value| (ch2.decap)(&sk2, ctq));
                        let restriction =
                            Some((ct.clone(), cfg.rejection, cfg.zero_message()));
                        interp_stage(&(adv.guess)(&advmem, &ct, &mb), decap_g, restriction).bind(
                            move |out| match out {
                                StageOutcome::Done(guess) => ITree::ret(*guess == b),
                                StageOutcome::Aborted => ITree::ret(false),
                            },
                        )
                    })
                })
            })
        })
    })
}

/// The adversary's edge over uniform guessing:
/// `|Pr[experiment = 1] - 1/2|` as an exact rational. The experiment must
/// fully converge and carry no error mass.
pub fn advantage(
    ch: &Challenger,
    adv: &Adversary,
    cfg: &ExperimentConfig,
) -> Result<BigRational, CryptoError> {
    let t = run_experiment(ch, adv, cfg);
    let prob_cfg = ProbConfig::new(cfg.chunk_bits);
    // No early stopping: the advantage is only meaningful at residual zero.
    let eps = BigRational::zero();
    let (d, conv) = semp(&t, cfg.steps, &eps, &prob_cfg)?;
    if !d.error_mass().is_zero() {
        return Err(CryptoError::ErrorMassPresent(d.error_mass().to_string()));
    }
    if !conv.converged {
        return Err(CryptoError::NonConvergent(conv.residual));
    }
    let pr_one = d.pr_set(|b| *b);
    Ok((pr_one - BigRational::new(1.into(), 2.into())).abs())
}

/// All chunk vectors of the given width.
fn value_space(chunks: u64, chunk_bits: u32) -> Vec<Value> {
    crate::equiv::enumerate_chunk_vectors(chunks, chunk_bits)
        .into_iter()
        .map(Value::Bytes)
        .collect()
}

fn scan_component<R: crate::itree::Res + Ord>(
    name: &str,
    t: &ITree<R>,
    cfg: &ExperimentConfig,
) -> Result<Dist<R>, CryptoError> {
    let prob_cfg = ProbConfig::new(cfg.chunk_bits);
    let eps = BigRational::zero();
    let (d, conv) = semp(t, cfg.steps, &eps, &prob_cfg)?;
    if !d.error_mass().is_zero() {
        return Err(CryptoError::SafetyViolation {
            component: name.to_string(),
            detail: format!(
                "error mass {}: the component fails to initialize its results or errs",
                d.error_mass()
            ),
        });
    }
    if !conv.converged {
        return Err(CryptoError::SafetyViolation {
            component: name.to_string(),
            detail: format!("did not converge: residual {}", conv.residual),
        });
    }
    Ok(d)
}

/// Safety and initialization scan at configuration widths: every component
/// must converge with zero error mass on all enumerated inputs.
pub fn safety_scan(ch: &Challenger, cfg: &ExperimentConfig) -> Result<(), CryptoError> {
    scan_component("GenKey", &(ch.gen_key)(), cfg)?;
    for pk in value_space(cfg.key_chunks, cfg.chunk_bits) {
        scan_component(&format!("Encap({pk:?})"), &(ch.encap)(&pk), cfg)?;
    }
    for sk in value_space(cfg.key_chunks, cfg.chunk_bits) {
        for ct in value_space(cfg.msg_chunks, cfg.chunk_bits) {
            scan_component(&format!("Decap({sk:?}, {ct:?})"), &(ch.decap)(&sk, &ct), cfg)?;
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct PreservationReport {
    pub adversary: String,
    pub passes: Vec<String>,
    pub advantage_src: RatJson,
    pub advantage_tgt: RatJson,
    pub equal: bool,
    pub eutt_related: bool,
    pub eutt_verdict: String,
}

/// End-to-end preservation check: compiles the program, derives both
/// challengers, compares the exact advantages (tolerance zero), and
/// additionally checks that the two experiment trees are weakly bisimilar
/// within budget. The source must pass the safety scan first.
pub fn preservation_check(
    src: &Program,
    passes: &[PassKind],
    adv: &Adversary,
    names: &KemNames,
    cfg: &ExperimentConfig,
) -> Result<PreservationReport, CryptoError> {
    let ch_src = make_challenger(src, names, cfg.chunk_bits)?;
    safety_scan(&ch_src, cfg)?;
    let tgt = pipeline(src, passes)?;
    let ch_tgt = make_challenger(&tgt, names, cfg.chunk_bits)?;
    let adv_src = advantage(&ch_src, adv, cfg)?;
    let adv_tgt = advantage(&ch_tgt, adv, cfg)?;
    let t_src = run_experiment(&ch_src, adv, cfg);
    let t_tgt = run_experiment(&ch_tgt, adv, cfg);
    let verdict = check_eutt(
        &t_src,
        &t_tgt,
        |a, b| a == b,
        cfg.chunk_bits,
        Budgets::new(256, 1 << 14),
    );
    Ok(PreservationReport {
        adversary: adv.name.clone(),
        passes: passes.iter().map(|p| p.name().to_string()).collect(),
        equal: adv_src == adv_tgt,
        advantage_src: rat_json(&adv_src),
        advantage_tgt: rat_json(&adv_tgt),
        eutt_related: verdict == CheckResult::Related,
        eutt_verdict: format!("{verdict:?}"),
    })
}

/// The constant-guess adversary: ignores everything and answers 0.
pub fn constant_guess() -> Adversary {
    Adversary {
        name: "const0".into(),
        query: Arc::new(|_| ITree::ret(Value::unit())),
        guess: Arc::new(|_, _, _| ITree::ret(false)),
    }
}

/// The oracle-replay adversary: queries the decapsulation oracle once per
/// stage (in the guess stage it replays the challenge ciphertext, observing
/// the rejection policy) and guesses 0 when the revealed message matches the
/// ciphertext or the oracle's answer.
pub fn replay() -> Adversary {
    Adversary {
        name: "replay".into(),
        query: Arc::new(|pk| {
            let oracle = Event::Orac { oracle: "decap".into(), arg: pk.clone() };
            ITree::vis(oracle, |_| ITree::ret(Value::unit()))
        }),
        guess: Arc::new(|_, ct, m| {
            let oracle = Event::Orac { oracle: "decap".into(), arg: ct.clone() };
            let (ct, m) = (ct.clone(), m.clone());
            ITree::vis(oracle, move |a| {
                let Answer::Oracle(answer) = a else { unreachable!() };
                ITree::ret(!(m == ct || m == *answer))
            })
        }),
    }
}

/// The shipped adversary catalog.
pub fn catalog() -> Vec<Adversary> {
    vec![constant_guess(), replay()]
}

pub fn adversary_by_name(name: &str) -> Option<Adversary> {
    catalog().into_iter().find(|a| a.name == name)
}
