//! Register-renaming alpha-equivalence: a partial variable renaming as the
//! abstract domain, with the simulation "memories identical and variable
//! maps agreeing through the renaming".

use std::collections::BTreeMap;

use serde::Serialize;

use rand::Rng;

use crate::gen::VarEnv;
use crate::lang::{Expr, Lval, MachState, Program, Value, Var};
use crate::rhl::{CheckerIface, StateRel};

/// A partial map from source variables to target variables. Writing a
/// target variable drops every stale entry mapping to it, which keeps the
/// map consistent with the simulation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RenMap(pub BTreeMap<Var, Var>);

impl RenMap {
    pub fn new() -> RenMap {
        RenMap::default()
    }

    pub fn of(pairs: &[(&str, &str)]) -> RenMap {
        RenMap(pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect())
    }

    pub fn get(&self, x: &str) -> Option<&Var> {
        self.0.get(x)
    }

    pub fn insert(&mut self, x: impl Into<Var>, y: impl Into<Var>) {
        self.0.insert(x.into(), y.into());
    }

    /// The simulation `csim`: equal memories, and variable maps coinciding
    /// through the renaming (an undefined source variable must map to an
    /// equally undefined target).
    pub fn csim(&self, s1: &MachState, s2: &MachState) -> bool {
        s1.mem == s2.mem && self.0.iter().all(|(x, y)| s1.get(x) == s2.get(y))
    }

    /// Drops entries whose target is `y`, except the one for `keep`.
    fn kill_target(&mut self, y: &Var, keep: Option<&Var>) {
        self.0.retain(|x, t| t != y || Some(x) == keep);
    }
}

fn ren_expr(d: &RenMap, e1: &Expr, e2: &Expr) -> bool {
    match (e1, e2) {
        (Expr::Const(a), Expr::Const(b)) => a == b,
        (Expr::Var(x), Expr::Var(y)) => d.get(x) == Some(y),
        (Expr::Tuple(a), Expr::Tuple(b)) => {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| ren_expr(d, x, y))
        }
        (Expr::App(o1, a), Expr::App(o2, b)) => {
            o1 == o2 && a.len() == b.len() && a.iter().zip(b).all(|(x, y)| ren_expr(d, x, y))
        }
        (Expr::ArrRead(x, i), Expr::ArrRead(y, j)) => {
            d.get(x) == Some(y) && ren_expr(d, i, j)
        }
        (Expr::MemRead(a), Expr::MemRead(b)) => ren_expr(d, a, b),
        _ => false,
    }
}

fn ren_lval(d: &RenMap, l1: &Lval, l2: &Lval) -> Option<RenMap> {
    match (l1, l2) {
        (Lval::Var(x), Lval::Var(y)) => {
            let mut out = d.clone();
            out.kill_target(y, Some(x));
            out.insert(x.clone(), y.clone());
            Some(out)
        }
        (Lval::ArrWrite(x, i), Lval::ArrWrite(y, j)) => {
            // A partial update needs the arrays already related.
            if d.get(x) != Some(y) || !ren_expr(d, i, j) {
                return None;
            }
            let mut out = d.clone();
            out.kill_target(y, Some(x));
            Some(out)
        }
        (Lval::MemWrite(a), Lval::MemWrite(b)) => {
            if ren_expr(d, a, b) {
                Some(d.clone())
            } else {
                None
            }
        }
        (Lval::Tuple(ls1), Lval::Tuple(ls2)) if ls1.len() == ls2.len() => {
            let mut cur = d.clone();
            for (a, b) in ls1.iter().zip(ls2) {
                cur = ren_lval(&cur, a, b)?;
            }
            Some(cur)
        }
        _ => None,
    }
}

/// The renaming instance of the checker framework. `env` supplies sorts for
/// sampling source states; target states are derived through the renaming.
pub struct RenamingChecker {
    pub env: VarEnv,
    pub chunk_bits: u32,
}

impl RenamingChecker {
    pub fn new(env: VarEnv, chunk_bits: u32) -> RenamingChecker {
        RenamingChecker { env, chunk_bits }
    }
}

impl CheckerIface for RenamingChecker {
    type Domain = RenMap;

    fn interp(&self, d: &RenMap) -> StateRel {
        let delta = d.clone();
        let holds_delta = d.clone();
        let env = self.env.clone();
        let chunk_bits = self.chunk_bits;
        StateRel::new(
            format!("csim_{:?}", d.0),
            move |s1, s2| holds_delta.csim(s1, s2),
            move |rng| {
                let mut full_env = env.clone();
                for x in delta.0.keys() {
                    full_env.entry(x.clone()).or_insert(crate::gen::Sort::Word);
                }
                let s1 = crate::gen::state_for(rng, &full_env, chunk_bits);
                let mut s2 = MachState { vm: BTreeMap::new(), mem: s1.mem.clone() };
                for (x, y) in &delta.0 {
                    if let Some(v) = s1.get(x) {
                        s2.set(y.clone(), v.clone());
                    }
                }
                // Unrelated junk on the target side.
                if rng.gen_bool(0.5) {
                    s2.set("scratch".to_string(), Value::Word(rng.gen_range(0..8)));
                }
                Some((s1, s2))
            },
        )
    }

    fn chk_expr(&self, d: &RenMap, e1: &Expr, e2: &Expr) -> Option<RenMap> {
        if ren_expr(d, e1, e2) {
            Some(d.clone())
        } else {
            None
        }
    }

    fn chk_lval(&self, d: &RenMap, l1: &Lval, l2: &Lval) -> Option<RenMap> {
        ren_lval(d, l1, l2)
    }

    fn value_rel(&self, v1: &Value, v2: &Value) -> bool {
        v1 == v2
    }

    fn meet(&self, a: &RenMap, b: &RenMap) -> RenMap {
        RenMap(
            a.0.iter()
                .filter(|(x, y)| b.get(x) == Some(y))
                .map(|(x, y)| (x.clone(), y.clone()))
                .collect(),
        )
    }

    fn includes(&self, strong: &RenMap, weak: &RenMap) -> bool {
        weak.0.iter().all(|(x, y)| strong.get(x) == Some(y))
    }
}

/// Command-level alpha-equivalence: the checker-framework run with the
/// renaming instance.
pub fn alpha_check_cmds(
    c1: &crate::lang::Command,
    c2: &crate::lang::Command,
    d0: &RenMap,
) -> Option<RenMap> {
    let checker = RenamingChecker::new(VarEnv::new(), 8);
    crate::rhl::run_checker(&checker, d0, c1, c2)
}

/// Program-level verdict.
#[derive(Clone, Debug, Serialize)]
pub enum AlphaVerdict {
    Accept { final_maps: BTreeMap<String, RenMap> },
    Reject { function: String, reason: String },
}

impl AlphaVerdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, AlphaVerdict::Accept { .. })
    }
}

/// Checks that two programs are alpha-equivalent function by function. The
/// initial renaming per function defaults to parameter-to-parameter; the
/// final renaming must relate the result variables.
pub fn alpha_check(
    src: &Program,
    tgt: &Program,
    init: &BTreeMap<String, RenMap>,
) -> AlphaVerdict {
    let src_names: Vec<&str> = src.fun_names().collect();
    let tgt_names: Vec<&str> = tgt.fun_names().collect();
    if src_names != tgt_names {
        return AlphaVerdict::Reject {
            function: String::new(),
            reason: format!("function names differ: {src_names:?} vs {tgt_names:?}"),
        };
    }
    let mut final_maps = BTreeMap::new();
    for f in &src.funs {
        let g = tgt.get(&f.name).unwrap();
        let d0 = match init.get(&f.name) {
            Some(d) => d.clone(),
            None => match (&f.param, &g.param) {
                (Some(p), Some(q)) => RenMap::of(&[(p, q)]),
                (None, None) => RenMap::new(),
                _ => {
                    return AlphaVerdict::Reject {
                        function: f.name.clone(),
                        reason: "parameter arity differs".into(),
                    }
                }
            },
        };
        match alpha_check_cmds(&f.body, &g.body, &d0) {
            None => {
                return AlphaVerdict::Reject {
                    function: f.name.clone(),
                    reason: "bodies are not related under the renaming".into(),
                }
            }
            Some(d_final) => {
                if d_final.get(&f.result) != Some(&g.result) {
                    return AlphaVerdict::Reject {
                        function: f.name.clone(),
                        reason: format!(
                            "result variable `{}` is not renamed to `{}`",
                            f.result, g.result
                        ),
                    };
                }
                final_maps.insert(f.name.clone(), d_final);
            }
        }
    }
    AlphaVerdict::Accept { final_maps }
}
