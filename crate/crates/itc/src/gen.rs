//! Seeded random generation of values, states, expressions, commands,
//! programs, and finite interaction trees.
//!
//! Program generation is safety-first: every read variable was assigned
//! earlier with a known sort, loops are counter-bounded, array indices stay
//! in bounds, and memory reads only target previously written addresses.
//! The resulting corpus is what the pass-validation and rule-soundness
//! harnesses quantify over, with seeds recorded for replay.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::itree::{Answer, Event, ITree};
use crate::lang::{Command, Expr, Lval, MachState, Op, Program, Value, Var};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Variable sorts tracked during generation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sort {
    Word,
    Bool,
    Bytes(usize),
}

/// Initialized variables and their sorts.
pub type VarEnv = BTreeMap<Var, Sort>;

pub fn value_of_sort(rng: &mut StdRng, sort: Sort, chunk_bits: u32) -> Value {
    match sort {
        Sort::Word => Value::Word(if rng.gen_bool(0.1) {
            rng.gen::<u64>()
        } else {
            rng.gen_range(0..8)
        }),
        Sort::Bool => Value::Bool(rng.gen()),
        Sort::Bytes(len) => {
            let mask = (1u16 << chunk_bits) as u8 - 1;
            Value::Bytes((0..len).map(|_| rng.gen::<u8>() & mask).collect())
        }
    }
}

/// A state realizing `env`, with a few extra junk variables and memory cells.
pub fn state_for(rng: &mut StdRng, env: &VarEnv, chunk_bits: u32) -> MachState {
    let mut s = MachState::new();
    for (x, sort) in env {
        s.set(x.clone(), value_of_sort(rng, *sort, chunk_bits));
    }
    for _ in 0..rng.gen_range(0..3) {
        let addr = rng.gen_range(0..32u64);
        let chunk = rng.gen::<u8>() & ((1u16 << chunk_bits) as u8 - 1);
        s.write_mem(addr, chunk);
    }
    s
}

fn vars_of_sort<'a>(env: &'a VarEnv, want: impl Fn(Sort) -> bool + 'a) -> Vec<&'a Var> {
    env.iter().filter(move |(_, s)| want(**s)).map(|(x, _)| x).collect()
}

/// A well-typed expression of the requested sort over initialized variables.
pub fn expr_of_sort(rng: &mut StdRng, env: &VarEnv, sort: Sort, depth: usize) -> Expr {
    match sort {
        Sort::Word => word_expr(rng, env, depth),
        Sort::Bool => bool_expr(rng, env, depth),
        Sort::Bytes(len) => {
            let candidates = vars_of_sort(env, |s| s == Sort::Bytes(len));
            let x = candidates[rng.gen_range(0..candidates.len())];
            if depth > 0 && !candidates.is_empty() && rng.gen_bool(0.3) {
                let y = candidates[rng.gen_range(0..candidates.len())];
                Expr::bin(Op::Xor, Expr::var(x.clone()), Expr::var(y.clone()))
            } else {
                Expr::var(x.clone())
            }
        }
    }
}

fn word_expr(rng: &mut StdRng, env: &VarEnv, depth: usize) -> Expr {
    let words = vars_of_sort(env, |s| s == Sort::Word);
    let bytes = vars_of_sort(env, |s| matches!(s, Sort::Bytes(_)));
    if depth == 0 || rng.gen_bool(0.3) {
        if !words.is_empty() && rng.gen_bool(0.6) {
            return Expr::var(words[rng.gen_range(0..words.len())].clone());
        }
        return Expr::word(rng.gen_range(0..8));
    }
    match rng.gen_range(0..10) {
        0..=5 => {
            let op = [Op::Add, Op::Sub, Op::Mul, Op::Xor][rng.gen_range(0..4)];
            Expr::bin(op, word_expr(rng, env, depth - 1), word_expr(rng, env, depth - 1))
        }
        6..=7 if !bytes.is_empty() => {
            let x = bytes[rng.gen_range(0..bytes.len())];
            let Sort::Bytes(len) = env[x.as_str()] else { unreachable!() };
            Expr::ArrRead(x.clone(), Box::new(Expr::word(rng.gen_range(0..len as u64))))
        }
        _ => word_expr(rng, env, depth - 1),
    }
}

fn bool_expr(rng: &mut StdRng, env: &VarEnv, depth: usize) -> Expr {
    let bools = vars_of_sort(env, |s| s == Sort::Bool);
    if depth == 0 || rng.gen_bool(0.25) {
        if !bools.is_empty() && rng.gen_bool(0.5) {
            return Expr::var(bools[rng.gen_range(0..bools.len())].clone());
        }
        return Expr::bool(rng.gen());
    }
    match rng.gen_range(0..8) {
        0..=2 => {
            let op = [Op::Le, Op::Lt, Op::Eq][rng.gen_range(0..3)];
            Expr::bin(op, word_expr(rng, env, depth - 1), word_expr(rng, env, depth - 1))
        }
        3..=4 => {
            let op = [Op::And, Op::Or, Op::Xor][rng.gen_range(0..3)];
            Expr::bin(op, bool_expr(rng, env, depth - 1), bool_expr(rng, env, depth - 1))
        }
        5 => Expr::App(Op::Not, vec![bool_expr(rng, env, depth - 1)]),
        _ => bool_expr(rng, env, depth - 1),
    }
}

/// Knobs for command/program generation.
#[derive(Clone, Debug)]
pub struct ProgCfg {
    pub chunk_bits: u32,
    pub max_stmts: usize,
    pub max_depth: usize,
    pub max_rand_chunks: u64,
    /// Worst-case budget of sampled chunks per generated command, counting
    /// loop repetitions and callee samplings; keeps the path count of exact
    /// enumeration and exhaustive checking tractable.
    pub rand_chunk_budget: u64,
    pub allow_rand: bool,
    pub allow_while: bool,
    pub allow_mem: bool,
    /// Functions available for calls: name, parameter sort, result sort,
    /// and worst-case sampled chunks.
    pub callees: Vec<(String, Sort, Sort, u64)>,
}

impl ProgCfg {
    pub fn small(chunk_bits: u32) -> ProgCfg {
        ProgCfg {
            chunk_bits,
            max_stmts: 5,
            max_depth: 2,
            max_rand_chunks: 2,
            rand_chunk_budget: 4,
            allow_rand: true,
            allow_while: true,
            allow_mem: true,
            callees: Vec::new(),
        }
    }

    /// Loop-, call-, and sampling-free straight-line commands.
    pub fn straight_line(chunk_bits: u32) -> ProgCfg {
        ProgCfg {
            allow_rand: false,
            allow_while: false,
            callees: Vec::new(),
            ..ProgCfg::small(chunk_bits)
        }
    }
}

struct CmdGen<'a> {
    rng: &'a mut StdRng,
    cfg: &'a ProgCfg,
    fresh: usize,
    mapped_addrs: Vec<u64>,
    /// Remaining worst-case chunk budget for samplings.
    budget: u64,
}

impl CmdGen<'_> {
    fn fresh_var(&mut self) -> Var {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    /// One statement. `top_level` controls whether new variables may join
    /// the environment (inside branches they would only be conditionally
    /// initialized); `unconditional` tracks whether this position is
    /// guaranteed to execute, which gates memory-address registration;
    /// `loop_mult` is the repetition factor of the enclosing loops, which
    /// scales sampling costs against the chunk budget.
    fn stmt(
        &mut self,
        env: &mut VarEnv,
        depth: usize,
        top_level: bool,
        unconditional: bool,
        loop_mult: u64,
    ) -> Command {
        let word_targets = vars_of_sort(env, |s| s == Sort::Word).len();
        loop {
            match self.rng.gen_range(0..12) {
                // Assignment to a fresh variable.
                0..=2 => {
                    let x = self.fresh_var();
                    let sort = if self.rng.gen_bool(0.3) { Sort::Bool } else { Sort::Word };
                    let e = expr_of_sort(self.rng, env, sort, self.cfg.max_depth);
                    if top_level {
                        env.insert(x.clone(), sort);
                    }
                    return Command::Assign(Lval::var(x), e);
                }
                // Assignment to an existing variable of the same sort.
                3..=4 => {
                    let all: Vec<(Var, Sort)> =
                        env.iter().map(|(x, s)| (x.clone(), *s)).collect();
                    if all.is_empty() {
                        continue;
                    }
                    let (x, sort) = all[self.rng.gen_range(0..all.len())].clone();
                    if matches!(sort, Sort::Bytes(_)) {
                        continue;
                    }
                    let e = expr_of_sort(self.rng, env, sort, self.cfg.max_depth);
                    return Command::Assign(Lval::var(x), e);
                }
                // Array cell write.
                5 => {
                    let bytes: Vec<(Var, usize)> = env
                        .iter()
                        .filter_map(|(x, s)| match s {
                            Sort::Bytes(len) => Some((x.clone(), *len)),
                            _ => None,
                        })
                        .collect();
                    if bytes.is_empty() {
                        continue;
                    }
                    let (x, len) = bytes[self.rng.gen_range(0..bytes.len())].clone();
                    let idx = Expr::word(self.rng.gen_range(0..len as u64));
                    let e = word_expr(self.rng, env, 1);
                    return Command::Assign(Lval::ArrWrite(x, Box::new(idx)), e);
                }
                // Memory write; the address backs later reads only when
                // this position always executes.
                6 if self.cfg.allow_mem => {
                    let addr = self.rng.gen_range(0..16u64);
                    if unconditional {
                        self.mapped_addrs.push(addr);
                    }
                    let e = word_expr(self.rng, env, 1);
                    return Command::Assign(Lval::MemWrite(Box::new(Expr::word(addr))), e);
                }
                // Memory read into a word variable.
                7 if self.cfg.allow_mem && !self.mapped_addrs.is_empty() => {
                    let addr = self.mapped_addrs[self.rng.gen_range(0..self.mapped_addrs.len())];
                    let x = self.fresh_var();
                    if top_level {
                        env.insert(x.clone(), Sort::Word);
                    }
                    return Command::Assign(
                        Lval::var(x),
                        Expr::MemRead(Box::new(Expr::word(addr))),
                    );
                }
                // Random sampling, within the chunk budget.
                8 if self.cfg.allow_rand && self.budget >= loop_mult => {
                    let affordable = (self.budget / loop_mult).min(self.cfg.max_rand_chunks);
                    let n = self.rng.gen_range(1..=affordable);
                    self.budget -= n * loop_mult;
                    let x = self.fresh_var();
                    if top_level {
                        env.insert(x.clone(), Sort::Bytes(n as usize));
                    }
                    return Command::Rand(Lval::var(x), Expr::word(n));
                }
                // Conditional: branches assign existing variables only.
                9 if depth > 0 => {
                    let guard = bool_expr(self.rng, env, self.cfg.max_depth);
                    let t = self.block(env, depth - 1, loop_mult);
                    let f = self.block(env, depth - 1, loop_mult);
                    return Command::If(guard, Box::new(t), Box::new(f));
                }
                // Counter-bounded loop.
                10 if depth > 0 && self.cfg.allow_while => {
                    let counter = self.fresh_var();
                    let bound = self.rng.gen_range(1..=2u64);
                    // Counter loops run at least once, so the body inherits
                    // this position's conditionality; samplings inside cost
                    // `bound` times as much.
                    let body = self.block_cond(env, depth - 1, unconditional, loop_mult * bound);
                    let inc = Command::Assign(
                        Lval::var(counter.clone()),
                        Expr::bin(Op::Add, Expr::var(counter.clone()), Expr::word(1)),
                    );
                    let while_ = Command::While(
                        Expr::bin(Op::Lt, Expr::var(counter.clone()), Expr::word(bound)),
                        Box::new(Command::append(body, inc)),
                    );
                    if top_level {
                        env.insert(counter.clone(), Sort::Word);
                    }
                    return Command::seq(
                        Command::Assign(Lval::var(counter), Expr::word(0)),
                        while_,
                    );
                }
                // Call to an available function, charged for the callee's
                // samplings.
                11 if !self.cfg.callees.is_empty() => {
                    let (f, param, result, weight) =
                        self.cfg.callees[self.rng.gen_range(0..self.cfg.callees.len())].clone();
                    if weight * loop_mult > self.budget {
                        continue;
                    }
                    if matches!(param, Sort::Bytes(len) if vars_of_sort(env, |s| s == Sort::Bytes(len)).is_empty())
                    {
                        continue;
                    }
                    self.budget -= weight * loop_mult;
                    let arg = expr_of_sort(self.rng, env, param, 1);
                    let x = self.fresh_var();
                    if top_level {
                        env.insert(x.clone(), result);
                    }
                    return Command::Call(Lval::var(x), f, arg);
                }
                _ if word_targets > 0 || !env.is_empty() => continue,
                _ => return Command::Skip,
            }
        }
    }

    fn block(&mut self, env: &VarEnv, depth: usize, loop_mult: u64) -> Command {
        self.block_cond(env, depth, false, loop_mult)
    }

    fn block_cond(
        &mut self,
        env: &VarEnv,
        depth: usize,
        unconditional: bool,
        loop_mult: u64,
    ) -> Command {
        let mut inner = env.clone();
        let n = self.rng.gen_range(1..=self.cfg.max_stmts.max(1));
        let mut cmds = Vec::with_capacity(n);
        for _ in 0..n {
            // Nested blocks keep the outer environment: fresh variables
            // they introduce stay local (and often dead).
            cmds.push(self.stmt(&mut inner, depth, false, unconditional, loop_mult));
        }
        Command::block(cmds)
    }
}

/// A safe command over (and extending) `env`, with the worst-case number of
/// sampled chunks it may draw.
pub fn command_weighted(rng: &mut StdRng, cfg: &ProgCfg, env: &mut VarEnv) -> (Command, u64) {
    let mut g = CmdGen {
        rng,
        cfg,
        fresh: env.len() * 7 + 100,
        mapped_addrs: Vec::new(),
        budget: cfg.rand_chunk_budget,
    };
    let n = g.rng.gen_range(1..=cfg.max_stmts);
    let mut cmds = Vec::with_capacity(n);
    for _ in 0..n {
        let depth = cfg.max_depth;
        cmds.push(g.stmt(env, depth, true, true, 1));
    }
    let weight = cfg.rand_chunk_budget - g.budget;
    (Command::block(cmds), weight)
}

/// A safe command over (and extending) `env`.
pub fn command(rng: &mut StdRng, cfg: &ProgCfg, env: &mut VarEnv) -> Command {
    command_weighted(rng, cfg, env).0
}

/// A safe program: helper functions (some inline) followed by `main`.
/// Every function fully initializes its result.
pub fn program(rng: &mut StdRng, cfg: &ProgCfg, num_funs: usize) -> Program {
    let mut funs = Vec::new();
    let mut callees: Vec<(String, Sort, Sort, u64)> = Vec::new();
    for i in 0..num_funs {
        let name = format!("f{i}");
        let param_sort = if rng.gen_bool(0.7) { Sort::Word } else { Sort::Bool };
        let result_sort = if rng.gen_bool(0.7) { Sort::Word } else { Sort::Bool };
        let param = format!("p{i}");
        let mut env = VarEnv::new();
        env.insert(param.clone(), param_sort);
        let mut fun_cfg = cfg.clone();
        // Helpers get half the budget so callers can afford their calls.
        fun_cfg.rand_chunk_budget = cfg.rand_chunk_budget / 2;
        fun_cfg.callees = callees.clone();
        let (body, weight) = command_weighted(rng, &fun_cfg, &mut env);
        let result = format!("r{i}");
        let body = Command::append(
            body,
            Command::Assign(Lval::var(result.clone()), expr_of_sort(rng, &env, result_sort, 1)),
        );
        let inline = rng.gen_bool(0.4);
        funs.push(crate::lang::FunDef {
            name: name.clone(),
            param: Some(param),
            result,
            body,
            inline,
        });
        callees.push((name, param_sort, result_sort, weight));
    }
    let mut env = VarEnv::new();
    let mut main_cfg = cfg.clone();
    main_cfg.callees = callees;
    let body = command(rng, &main_cfg, &mut env);
    let result = "out".to_string();
    let out_sort = if rng.gen_bool(0.8) { Sort::Word } else { Sort::Bool };
    let body = Command::append(
        body,
        Command::Assign(Lval::var(result.clone()), expr_of_sort(rng, &env, out_sort, 2)),
    );
    funs.push(crate::lang::FunDef { name: "main".into(), param: None, result, body, inline: false });
    Program { funs }
}

/// Skeleton of a finite tree: the event structure without Tau padding.
#[derive(Clone)]
pub enum Skel {
    Ret(Value),
    Err(String),
    /// `Rnd(n)` with one branch per answer code.
    Rnd(u64, Vec<Arc<Skel>>),
}

/// A random skeleton of the given depth over `Rnd(1)` events.
pub fn skeleton(rng: &mut StdRng, depth: usize, chunk_bits: u32, allow_err: bool) -> Arc<Skel> {
    if depth == 0 || rng.gen_bool(0.35) {
        if allow_err && rng.gen_bool(0.15) {
            return Arc::new(Skel::Err(format!("e{}", rng.gen_range(0..3))));
        }
        return Arc::new(Skel::Ret(Value::Word(rng.gen_range(0..4))));
    }
    let branches = (0..(1u64 << chunk_bits))
        .map(|_| skeleton(rng, depth - 1, chunk_bits, allow_err))
        .collect();
    Arc::new(Skel::Rnd(1, branches))
}

fn answer_code(a: &Answer, chunk_bits: u32) -> usize {
    let Answer::Chunks(chunks) = a else { panic!("expected a chunk answer") };
    let base = 1usize << chunk_bits;
    chunks.iter().rev().fold(0usize, |acc, c| acc * base + *c as usize)
}

fn pad(mut t: ITree<Value>, taus: usize) -> ITree<Value> {
    for _ in 0..taus {
        t = ITree::tau(t);
    }
    t
}

/// Realizes a skeleton with the given Tau padding decided up front by
/// `rng`, so the resulting tree is deterministic.
pub fn tree_from_skeleton(
    rng: &mut StdRng,
    skel: &Arc<Skel>,
    chunk_bits: u32,
    max_taus: usize,
) -> ITree<Value> {
    let taus = if max_taus == 0 { 0 } else { rng.gen_range(0..=max_taus) };
    let inner = match &**skel {
        Skel::Ret(v) => ITree::ret(v.clone()),
        Skel::Err(m) => ITree::err(m.clone()),
        Skel::Rnd(n, branches) => {
            let realized: Vec<ITree<Value>> = branches
                .iter()
                .map(|b| tree_from_skeleton(rng, b, chunk_bits, max_taus))
                .collect();
            ITree::vis(Event::Rnd(*n), move |a| realized[answer_code(a, chunk_bits)].clone())
        }
    };
    pad(inner, taus)
}

/// A random finite tree.
pub fn finite_tree(rng: &mut StdRng, depth: usize, chunk_bits: u32) -> ITree<Value> {
    let skel = skeleton(rng, depth, chunk_bits, false);
    tree_from_skeleton(rng, &skel, chunk_bits, 2)
}

/// A pair of weakly bisimilar trees: the same skeleton under two
/// independent Tau paddings.
pub fn bisimilar_pair(
    rng: &mut StdRng,
    depth: usize,
    chunk_bits: u32,
    max_taus: usize,
) -> (ITree<Value>, ITree<Value>) {
    let skel = skeleton(rng, depth, chunk_bits, false);
    let a = tree_from_skeleton(rng, &skel, chunk_bits, max_taus);
    let b = tree_from_skeleton(rng, &skel, chunk_bits, max_taus);
    (a, b)
}
