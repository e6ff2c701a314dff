//! Front-end passes and the validated pipeline: constant propagation with
//! constant-branch elimination, dead-code elimination, inlining, and the
//! register-renaming alpha-equivalence checker.

pub mod alpha;
pub mod const_prop;
pub mod dce;
pub mod inline;

pub use alpha::{alpha_check, alpha_check_cmds, AlphaVerdict, RenMap, RenamingChecker};
pub use const_prop::{const_prop, ConstEnv};
pub use dce::{dead_code_elim, LiveSet};
pub use inline::{inline_pass, no_inline_calls, rename_cmd, rename_expr};

use num_rational::BigRational;
use num_traits::Zero;
use rand::rngs::StdRng;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::equiv::{Cutoffs, EventContract};
use crate::lang::{MachState, Program, Value};
use crate::prob::{semp, ProbConfig, ProbError};
use crate::rhl::{check_cmd_tuple, inter_sem, StateRel, TupleBudgets, TupleOutcome};
use crate::sem::SemConfig;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PassError {
    #[error("inline function `{0}` is recursive")]
    RecursiveInline(String),
    #[error("unknown pass `{0}`")]
    UnknownPass(String),
    #[error("validation failed in pass `{pass}`: {detail}")]
    ValidationFailure { pass: String, detail: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PassKind {
    ConstProp,
    Dce,
    Inline,
}

impl PassKind {
    pub fn name(self) -> &'static str {
        match self {
            PassKind::ConstProp => "const_prop",
            PassKind::Dce => "dce",
            PassKind::Inline => "inline",
        }
    }
}

impl std::str::FromStr for PassKind {
    type Err = PassError;

    fn from_str(s: &str) -> Result<PassKind, PassError> {
        match s {
            "const_prop" => Ok(PassKind::ConstProp),
            "dce" => Ok(PassKind::Dce),
            "inline" => Ok(PassKind::Inline),
            other => Err(PassError::UnknownPass(other.to_string())),
        }
    }
}

pub fn apply_pass(kind: PassKind, p: &Program) -> Result<Program, PassError> {
    match kind {
        PassKind::ConstProp => Ok(const_prop(p)),
        PassKind::Dce => Ok(dead_code_elim(p)),
        PassKind::Inline => inline_pass(p),
    }
}

/// Applies the passes in order without validation.
pub fn pipeline(p: &Program, kinds: &[PassKind]) -> Result<Program, PassError> {
    let mut cur = p.clone();
    for k in kinds {
        cur = apply_pass(*k, &cur)?;
    }
    Ok(cur)
}

/// Validation knobs for the pipeline.
#[derive(Clone, Debug)]
pub struct ValidateOpts {
    pub chunk_bits: u32,
    pub budgets: TupleBudgets,
    /// Step budget for the exact distribution comparison.
    pub dist_steps: u64,
    pub seed: u64,
    /// Attach the divergence witness as JSON to failure reports.
    pub explain: bool,
}

impl Default for ValidateOpts {
    fn default() -> ValidateOpts {
        ValidateOpts {
            chunk_bits: 2,
            budgets: TupleBudgets { state_pairs: 8, attempts: 80, check: Default::default() },
            dist_steps: 1 << 12,
            seed: 0,
            explain: false,
        }
    }
}

/// Per-pass validation report.
#[derive(Clone, Debug, Serialize)]
pub struct PassReport {
    pub pass: String,
    /// Bounded cutoff-equivalence verdict per function.
    pub xrutt_related: bool,
    /// Exact distribution comparison: `Some(true)` equal, `Some(false)`
    /// different, `None` when the program does not fit exact mode or did
    /// not converge.
    pub dist_equal: Option<bool>,
    pub detail: String,
}

fn observable_rel(result: &str) -> (String, impl Fn(&MachState, &MachState) -> bool + Clone) {
    let fres = result.to_string();
    let fres2 = fres.clone();
    (fres, move |a: &MachState, b: &MachState| a.mem == b.mem && a.get(&fres2) == b.get(&fres2))
}

fn random_arg(rng: &mut StdRng, chunk_bits: u32) -> Value {
    match rng.gen_range(0..4) {
        0 => Value::Bool(rng.gen()),
        1 => crate::gen::value_of_sort(rng, crate::gen::Sort::Bytes(1), chunk_bits),
        _ => Value::Word(rng.gen_range(0..8)),
    }
}

/// Differentially validates one pass application: bounded xrutt with the
/// error-left cutoff on sampled initial states, plus exact distribution
/// equality of the observable (final memory, result value) when the
/// program fits exact mode.
pub fn validate_pass(
    before: &Program,
    after: &Program,
    pass: PassKind,
    opts: &ValidateOpts,
    rng: &mut StdRng,
) -> Result<PassReport, PassError> {
    let cfg_before = SemConfig::new(before.clone()).with_chunk_bits(opts.chunk_bits);
    let cfg_after = SemConfig::new(after.clone()).with_chunk_bits(opts.chunk_bits);
    let contract = EventContract::equality(opts.chunk_bits);
    let cutoffs = Cutoffs::err_left();
    let prob_cfg = ProbConfig::new(opts.chunk_bits);
    let mut dist_equal = Some(true);
    let mut detail = String::new();

    for f in &before.funs {
        let Some(g) = after.get(&f.name) else {
            return Err(PassError::ValidationFailure {
                pass: pass.name().into(),
                detail: format!("function `{}` disappeared", f.name),
            });
        };
        let (_, obs) = observable_rel(&f.result);
        let param = f.param.clone();
        let chunk_bits = opts.chunk_bits;
        let pre = StateRel::new(
            "equal initial states",
            |a, b| a == b,
            move |rng| {
                let mut s = MachState::new();
                if let Some(p) = &param {
                    s.set(p.clone(), random_arg(rng, chunk_bits));
                }
                for _ in 0..rng.gen_range(0..3) {
                    s.write_mem(rng.gen_range(0..16), rng.gen_range(0..(1 << chunk_bits)) as u8);
                }
                Some((s.clone(), s))
            },
        );
        let obs2 = obs.clone();
        let post = StateRel::new(
            "observable equality",
            move |a, b| obs2(a, b),
            |_| None,
        );
        let outcome = check_cmd_tuple(
            &inter_sem(&cfg_before),
            &inter_sem(&cfg_after),
            &f.body,
            &g.body,
            &pre,
            &post,
            &contract,
            &cutoffs,
            opts.budgets,
            rng,
        );
        match outcome {
            TupleOutcome::Related { .. } => {}
            TupleOutcome::NotRelated { states, witness } if opts.explain => {
                let rendered = serde_json::to_string(&witness).unwrap_or_default();
                return Err(PassError::ValidationFailure {
                    pass: pass.name().into(),
                    detail: format!(
                        "function `{}` not related from states {states:?}; witness: {rendered}",
                        f.name
                    ),
                });
            }
            other => {
                return Err(PassError::ValidationFailure {
                    pass: pass.name().into(),
                    detail: format!("function `{}`: {other:?}", f.name),
                })
            }
        }

        // Exact distribution comparison from a fresh sampled state.
        let Some((s0, _)) = (pre.sample)(rng) else { continue };
        let eps = BigRational::zero();
        let t1 = crate::sem::sem_inter(&f.body, &s0, &cfg_before);
        let t2 = crate::sem::sem_inter(&g.body, &s0, &cfg_after);
        match (semp(&t1, opts.dist_steps, &eps, &prob_cfg), semp(&t2, opts.dist_steps, &eps, &prob_cfg)) {
            (Ok((d1, c1)), Ok((d2, c2))) => {
                if !d1.error_mass().is_zero() {
                    // The sampled state makes the source unsafe. Correctness
                    // holds only up to source safety, so the distribution
                    // comparison does not apply.
                    continue;
                }
                if !c1.converged || !c2.converged {
                    dist_equal = None;
                    detail = format!("distribution comparison inconclusive for `{}`: residuals {} / {}", f.name, c1.residual, c2.residual);
                    continue;
                }
                let fres1 = f.result.clone();
                let fres2 = g.result.clone();
                let p1 = d1.map(|s| (s.mem.clone(), s.get(&fres1).cloned()));
                let p2 = d2.map(|s| (s.mem.clone(), s.get(&fres2).cloned()));
                if p1 != p2 {
                    return Err(PassError::ValidationFailure {
                        pass: pass.name().into(),
                        detail: format!("function `{}`: observable distributions differ", f.name),
                    });
                }
            }
            (Err(ProbError::ExactModeOverflow { .. }), _) | (_, Err(ProbError::ExactModeOverflow { .. })) => {
                dist_equal = None;
                detail = format!("function `{}` exceeds exact mode; distribution check skipped", f.name);
            }
            (Err(e), _) | (_, Err(e)) => {
                return Err(PassError::ValidationFailure {
                    pass: pass.name().into(),
                    detail: format!("function `{}`: {e}", f.name),
                })
            }
        }
    }

    Ok(PassReport {
        pass: pass.name().into(),
        xrutt_related: true,
        dist_equal,
        detail,
    })
}

/// Applies the passes in order, validating each application. Returns the
/// final program and one report per pass.
pub fn pipeline_validated(
    p: &Program,
    kinds: &[PassKind],
    opts: &ValidateOpts,
) -> Result<(Program, Vec<PassReport>), PassError> {
    let mut rng = crate::gen::rng(opts.seed);
    let mut cur = p.clone();
    let mut reports = Vec::new();
    for k in kinds {
        let next = apply_pass(*k, &cur)?;
        reports.push(validate_pass(&cur, &next, *k, opts, &mut rng)?);
        cur = next;
    }
    Ok((cur, reports))
}
