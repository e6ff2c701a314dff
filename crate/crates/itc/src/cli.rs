//! Command-line front end.
//!
//! Exit codes: 0 on success (parse ok, Related, Accept, equal advantages),
//! 1 when a check rejects (NotRelated, Reject, validation or preservation
//! failure), 2 on usage or input errors.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use serde::Serialize;

use crate::crypto::{
    adversary_by_name, make_challenger, preservation_check, ExperimentConfig, KemNames,
    RejectionPolicy,
};
use crate::equiv::Budgets;
use crate::itree::{observe, seeded_oracle, ObserveError, TraceStep};
use crate::lang::{parse, pretty, render_value, MachState, Program};
use crate::passes::{alpha_check, pipeline, pipeline_validated, PassKind, RenMap, ValidateOpts};
use crate::prob::{semp, ProbConfig};
use crate::rhl::suite::rule_soundness_suite;
use crate::rhl::TupleBudgets;
use crate::sem::{sem_inter, SemConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(name = "itc", about = "Interaction-tree compiler workbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Emit JSON instead of plain text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args, Clone)]
struct CommonBudgets {
    /// Chunk width in bits for Rnd events and memory cells.
    #[arg(long)]
    chunk_bits: Option<u32>,
    /// Vis/Ret depth budget for equivalence checking.
    #[arg(long, default_value_t = 200)]
    depth: u32,
    /// Consecutive silent steps tolerated per side per level.
    #[arg(long, default_value_t = 1000)]
    tau_budget: u32,
    /// Step budget for exact distributions.
    #[arg(long, default_value_t = 1 << 14)]
    n_max: u64,
    /// Convergence threshold, e.g. 1/1048576.
    #[arg(long, default_value = "1/1048576")]
    epsilon: String,
}

impl CommonBudgets {
    fn epsilon(&self) -> Result<BigRational, String> {
        BigRational::from_str(&self.epsilon)
            .map_err(|e| format!("invalid --epsilon `{}`: {e}", self.epsilon))
    }

    fn check_budgets(&self) -> Budgets {
        Budgets::new(self.depth, self.tau_budget)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a program and dump its syntax tree.
    Parse {
        file: PathBuf,
    },
    /// Run a program's function with a seeded event oracle and print the
    /// observed trace.
    Run {
        file: PathBuf,
        /// Function to run.
        #[arg(long, default_value = "main")]
        function: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Observation fuel.
        #[arg(long, default_value_t = 100_000)]
        fuel: usize,
        #[command(flatten)]
        budgets: CommonBudgets,
    },
    /// Exact result distribution of a function.
    Dist {
        file: PathBuf,
        #[arg(long, default_value = "main")]
        function: String,
        #[command(flatten)]
        budgets: CommonBudgets,
    },
    /// Apply passes and print the compiled program.
    Compile {
        file: PathBuf,
        /// Comma-separated pass list from {const_prop, dce, inline}.
        #[arg(long, value_delimiter = ',')]
        passes: Vec<String>,
    },
    /// Apply passes with per-pass differential validation.
    Validate {
        file: PathBuf,
        #[arg(long, value_delimiter = ',')]
        passes: Vec<String>,
        #[arg(long)]
        seed: u64,
        /// Precondition-satisfying state pairs per function.
        #[arg(long, default_value_t = 8)]
        state_pairs: usize,
        /// Attach divergence witnesses as JSON to failure reports.
        #[arg(long)]
        explain: bool,
        #[command(flatten)]
        budgets: CommonBudgets,
    },
    /// Check two programs alpha-equivalent under a renaming.
    AlphaCheck {
        source: PathBuf,
        target: PathBuf,
        /// Initial renaming entries `fn:src=tgt`, repeatable.
        #[arg(long = "rename")]
        renames: Vec<String>,
    },
    /// Run the rule-soundness suite.
    RhlSuite {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        instances: usize,
    },
    /// Run the IND-CCA experiment for a KEM program and report the exact
    /// advantage.
    Experiment {
        file: PathBuf,
        #[arg(long, default_value = "const0")]
        adversary: String,
        #[command(flatten)]
        kem: KemArgs,
        #[command(flatten)]
        budgets: CommonBudgets,
    },
    /// Compile a KEM program and check that the adversary advantage is
    /// preserved exactly.
    Preserve {
        file: PathBuf,
        #[arg(long, value_delimiter = ',')]
        passes: Vec<String>,
        #[arg(long, default_value = "replay")]
        adversary: String,
        #[command(flatten)]
        kem: KemArgs,
        #[command(flatten)]
        budgets: CommonBudgets,
    },
}

#[derive(Args, Clone)]
struct KemArgs {
    /// Message width in chunks.
    #[arg(long, default_value_t = 1)]
    msg_chunks: u64,
    /// Key/ciphertext width in chunks.
    #[arg(long, default_value_t = 1)]
    key_chunks: u64,
    /// Reject challenge-ciphertext queries by aborting with output 0
    /// instead of answering the zero message.
    #[arg(long)]
    abort_on_challenge: bool,
}

impl KemArgs {
    fn config(&self, chunk_bits: u32, steps: u64) -> ExperimentConfig {
        ExperimentConfig {
            msg_chunks: self.msg_chunks,
            key_chunks: self.key_chunks,
            chunk_bits,
            steps,
            rejection: if self.abort_on_challenge {
                RejectionPolicy::AbortZero
            } else {
                RejectionPolicy::ZeroMessage
            },
        }
    }
}

struct Out {
    path: Option<PathBuf>,
    buffer: String,
}

impl Out {
    fn line(&mut self, s: impl AsRef<str>) {
        self.buffer.push_str(s.as_ref());
        self.buffer.push('\n');
    }

    fn json(&mut self, v: &impl Serialize) {
        self.buffer.push_str(&serde_json::to_string_pretty(v).expect("serializable"));
        self.buffer.push('\n');
    }

    fn flush(self) -> Result<(), String> {
        match self.path {
            Some(p) => std::fs::write(&p, self.buffer)
                .map_err(|e| format!("cannot write {}: {e}", p.display())),
            None => {
                print!("{}", self.buffer);
                Ok(())
            }
        }
    }
}

fn load(path: &PathBuf) -> Result<Program, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_passes(names: &[String]) -> Result<Vec<PassKind>, String> {
    names.iter().map(|n| n.parse::<PassKind>().map_err(|e| e.to_string())).collect()
}

fn parse_renames(entries: &[String]) -> Result<BTreeMap<String, RenMap>, String> {
    let mut out: BTreeMap<String, RenMap> = BTreeMap::new();
    for entry in entries {
        let (fun, rest) = entry
            .split_once(':')
            .ok_or_else(|| format!("invalid --rename `{entry}`, expected fn:src=tgt"))?;
        let (src, tgt) = rest
            .split_once('=')
            .ok_or_else(|| format!("invalid --rename `{entry}`, expected fn:src=tgt"))?;
        out.entry(fun.to_string()).or_default().insert(src.to_string(), tgt.to_string());
    }
    Ok(out)
}

fn run_cmd(cli: Cli) -> Result<i32, String> {
    let mut out = Out { path: cli.output.clone(), buffer: String::new() };
    let json = cli.json;
    let code = match cli.command {
        Cmd::Parse { file } => {
            let p = load(&file)?;
            if json {
                out.json(&p);
            } else {
                out.line(pretty(&p));
            }
            EXIT_OK
        }
        Cmd::Run { file, function, seed, fuel, budgets } => {
            let p = load(&file)?;
            let chunk_bits = budgets.chunk_bits.unwrap_or(8);
            let f = p
                .get(&function)
                .ok_or_else(|| format!("no function `{function}` in {}", file.display()))?
                .clone();
            let cfg = SemConfig::new(p).with_chunk_bits(chunk_bits);
            let tree = sem_inter(&f.body, &MachState::new(), &cfg);
            match observe(&tree, fuel, seeded_oracle(seed, chunk_bits)) {
                Ok(steps) => {
                    render_trace(&mut out, &steps, json);
                    EXIT_OK
                }
                Err(ObserveError::ErrEncountered { message, prefix }) => {
                    render_trace(&mut out, &prefix, json);
                    out.line(format!("error event: {message}"));
                    EXIT_REJECTED
                }
                Err(ObserveError::FuelExhausted { prefix }) => {
                    render_trace(&mut out, &prefix, json);
                    out.line(format!("fuel exhausted after {} steps", prefix.len()));
                    EXIT_REJECTED
                }
            }
        }
        Cmd::Dist { file, function, budgets } => {
            let p = load(&file)?;
            let chunk_bits = budgets.chunk_bits.unwrap_or(2);
            let f = p
                .get(&function)
                .ok_or_else(|| format!("no function `{function}` in {}", file.display()))?
                .clone();
            let cfg = SemConfig::new(p).with_chunk_bits(chunk_bits);
            let tree = sem_inter(&f.body, &MachState::new(), &cfg);
            let eps = budgets.epsilon()?;
            let prob_cfg = ProbConfig::new(chunk_bits);
            let (dist, conv) = semp(&tree, budgets.n_max, &eps, &prob_cfg)
                .map_err(|e| e.to_string())?;
            let fres = f.result.clone();
            let projected = dist.map(|s| s.get(&fres).cloned());
            let rendered = projected.to_json(|v| match v {
                Some(v) => render_value(v),
                None => "undef".to_string(),
            });
            #[derive(Serialize)]
            struct DistReport {
                function: String,
                result_variable: String,
                distribution: crate::prob::DistJson,
                convergence: crate::prob::Convergence,
            }
            let report = DistReport {
                function,
                result_variable: fres,
                distribution: rendered,
                convergence: conv,
            };
            if json {
                out.json(&report);
            } else {
                for e in &report.distribution.entries {
                    out.line(format!("{} -> {}/{}", e.value, e.numerator, e.denominator));
                }
                out.line(format!(
                    "residual {}/{} after {} steps",
                    report.distribution.residual.numerator,
                    report.distribution.residual.denominator,
                    report.convergence.n_used
                ));
                if report.distribution.error.numerator != "0" {
                    // Strictly the interpretation is defined for error-free
                    // trees; the bucket is a diagnostic extension.
                    out.line(format!(
                        "error mass {}/{} (non-standard diagnostic bucket)",
                        report.distribution.error.numerator, report.distribution.error.denominator
                    ));
                }
            }
            EXIT_OK
        }
        Cmd::Compile { file, passes } => {
            let p = load(&file)?;
            let kinds = parse_passes(&passes)?;
            let q = pipeline(&p, &kinds).map_err(|e| e.to_string())?;
            if json {
                out.json(&q);
            } else {
                out.line(pretty(&q));
            }
            EXIT_OK
        }
        Cmd::Validate { file, passes, seed, state_pairs, explain, budgets } => {
            let p = load(&file)?;
            let kinds = parse_passes(&passes)?;
            let opts = ValidateOpts {
                chunk_bits: budgets.chunk_bits.unwrap_or(2),
                budgets: TupleBudgets {
                    state_pairs,
                    attempts: state_pairs * 10,
                    check: budgets.check_budgets(),
                },
                dist_steps: budgets.n_max,
                seed,
                explain,
            };
            match pipeline_validated(&p, &kinds, &opts) {
                Ok((q, reports)) => {
                    #[derive(Serialize)]
                    struct ValidateReport<'a> {
                        seed: u64,
                        passes: &'a [crate::passes::PassReport],
                        program: String,
                    }
                    if json {
                        out.json(&ValidateReport { seed, passes: &reports, program: pretty(&q) });
                    } else {
                        for r in &reports {
                            out.line(format!(
                                "pass {}: xrutt related, distributions {}",
                                r.pass,
                                match r.dist_equal {
                                    Some(true) => "equal".to_string(),
                                    Some(false) => "DIFFER".to_string(),
                                    None => format!("inconclusive ({})", r.detail),
                                }
                            ));
                        }
                        out.line(pretty(&q));
                    }
                    EXIT_OK
                }
                Err(e) => {
                    out.line(format!("validation failed: {e}"));
                    out.flush()?;
                    return Ok(EXIT_REJECTED);
                }
            }
        }
        Cmd::AlphaCheck { source, target, renames } => {
            let src = load(&source)?;
            let tgt = load(&target)?;
            let init = parse_renames(&renames)?;
            let verdict = alpha_check(&src, &tgt, &init);
            if json {
                out.json(&verdict);
            } else {
                match &verdict {
                    crate::passes::AlphaVerdict::Accept { final_maps } => {
                        out.line("accept");
                        for (f, d) in final_maps {
                            out.line(format!("  {f}: {:?}", d.0));
                        }
                    }
                    crate::passes::AlphaVerdict::Reject { function, reason } => {
                        out.line(format!("reject at `{function}`: {reason}"));
                    }
                }
            }
            if verdict.is_accept() {
                EXIT_OK
            } else {
                EXIT_REJECTED
            }
        }
        Cmd::RhlSuite { seed, instances } => {
            let report = rule_soundness_suite(seed, instances);
            if json {
                out.json(&report);
            } else {
                for rule in &report.rules {
                    out.line(format!(
                        "{:24} {}/{}{}",
                        rule.rule,
                        rule.passed,
                        rule.instances,
                        if rule.failures.is_empty() {
                            String::new()
                        } else {
                            format!("  first failing seed {}", rule.failures[0].seed)
                        }
                    ));
                }
            }
            if report.all_passed() {
                EXIT_OK
            } else {
                EXIT_REJECTED
            }
        }
        Cmd::Experiment { file, adversary, kem, budgets } => {
            let p = load(&file)?;
            let chunk_bits = budgets.chunk_bits.unwrap_or(2);
            let adv = adversary_by_name(&adversary)
                .ok_or_else(|| format!("unknown adversary `{adversary}`"))?;
            let cfg = kem.config(chunk_bits, budgets.n_max);
            let ch = make_challenger(&p, &KemNames::default(), chunk_bits)
                .map_err(|e| e.to_string())?;
            let adv_value =
                crate::crypto::advantage(&ch, &adv, &cfg).map_err(|e| e.to_string())?;
            #[derive(Serialize)]
            struct ExperimentReport {
                adversary: String,
                advantage: crate::prob::RatJson,
            }
            let report = ExperimentReport {
                adversary: adv.name.clone(),
                advantage: crate::prob::rat_json(&adv_value),
            };
            if json {
                out.json(&report);
            } else {
                out.line(format!(
                    "advantage({}) = {}/{}",
                    report.adversary, report.advantage.numerator, report.advantage.denominator
                ));
            }
            EXIT_OK
        }
        Cmd::Preserve { file, passes, adversary, kem, budgets } => {
            let p = load(&file)?;
            let chunk_bits = budgets.chunk_bits.unwrap_or(2);
            let kinds = parse_passes(&passes)?;
            let adv = adversary_by_name(&adversary)
                .ok_or_else(|| format!("unknown adversary `{adversary}`"))?;
            let cfg = kem.config(chunk_bits, budgets.n_max);
            let report = preservation_check(&p, &kinds, &adv, &KemNames::default(), &cfg)
                .map_err(|e| e.to_string())?;
            let ok = report.equal && report.eutt_related;
            if json {
                out.json(&report);
            } else {
                out.line(format!(
                    "advantage source {}/{}  target {}/{}  equal: {}  eutt: {}",
                    report.advantage_src.numerator,
                    report.advantage_src.denominator,
                    report.advantage_tgt.numerator,
                    report.advantage_tgt.denominator,
                    report.equal,
                    report.eutt_verdict,
                ));
            }
            if ok {
                EXIT_OK
            } else {
                EXIT_REJECTED
            }
        }
    };
    out.flush()?;
    Ok(code)
}

fn render_trace(out: &mut Out, steps: &[TraceStep<MachState>], json: bool) {
    if json {
        #[derive(Serialize)]
        #[serde(tag = "kind")]
        enum Step<'a> {
            Tau,
            Event { event: &'a crate::itree::Event, answer: &'a crate::itree::Answer },
            Ret { state: &'a MachState },
        }
        let rendered: Vec<Step> = steps
            .iter()
            .map(|s| match s {
                TraceStep::Tau => Step::Tau,
                TraceStep::Vis { event, answer } => Step::Event { event, answer },
                TraceStep::Ret(s) => Step::Ret { state: s },
            })
            .collect();
        out.json(&rendered);
    } else {
        let taus = steps.iter().filter(|s| matches!(s, TraceStep::Tau)).count();
        for s in steps {
            match s {
                TraceStep::Tau => {}
                TraceStep::Vis { event, answer } => out.line(format!("event {event:?} -> {answer:?}")),
                TraceStep::Ret(state) => {
                    out.line(format!("returned after {taus} silent steps"));
                    for (x, v) in &state.vm {
                        out.line(format!("  {x} = {}", render_value(v)));
                    }
                    if !state.mem.is_empty() {
                        let cells: Vec<String> =
                            state.mem.iter().map(|(a, c)| format!("[{a}]={c}")).collect();
                        out.line(format!("  mem: {}", cells.join(" ")));
                    }
                }
            }
        }
    }
}

/// Entry point: parses arguments and dispatches; returns the process exit
/// code.
pub fn main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders --help/--version as "errors" with success status.
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run_cmd(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}
