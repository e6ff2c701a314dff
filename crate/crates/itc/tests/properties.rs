//! Module invariants beyond the acceptance criteria: interpreter laws,
//! round-trip and injectivity of the printer, partial-evaluator agreement,
//! checker symmetry and witness soundness, and alpha-checker soundness.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;

use itc::equiv::{check_eutt, replay_witness, Budgets, CheckResult, EventContract};
use itc::gen::{self, Sort, VarEnv};
use itc::itree::{interp, interp_mrec, observe, trigger, Answer, Event, Handler, ITree, TraceStep};
use itc::lang::{parse, pretty, MachState, Value};
use itc::passes::{alpha_check_cmds, rename_cmd, RenamingChecker};
use itc::rhl::{check_cmd_tuple, intra_sem, CheckerIface, TupleBudgets};
use itc::sem::{call_handler, peval, sem_intra, SemConfig};

#[test]
fn parse_pretty_round_trip_on_large_corpus() {
    let mut rng = gen::rng(71);
    let mut printed_forms = BTreeSet::new();
    let mut asts = BTreeSet::new();
    for i in 0..1000 {
        let p = gen::program(&mut rng, &gen::ProgCfg::small(2), 2);
        let text = pretty(&p);
        let reparsed = parse(&text).unwrap_or_else(|e| panic!("program {i}: {e}\n{text}"));
        assert_eq!(reparsed, p, "round trip failed on program {i}");
        printed_forms.insert(text);
        asts.insert(format!("{p:?}"));
    }
    // The printer is injective on the corpus: distinct programs print
    // distinctly.
    assert_eq!(printed_forms.len(), asts.len());
}

#[test]
fn interp_distributes_over_bind() {
    let mut rng = gen::rng(72);
    let zero_handler: Handler = Arc::new(|e| match e {
        Event::Rnd(n) => ITree::ret(Answer::Chunks(vec![0; *n as usize])),
        other => trigger(other.clone()),
    });
    for _ in 0..100 {
        let t = gen::finite_tree(&mut rng, 4, 1);
        let k = |v: &Value| -> ITree<Value> {
            match v {
                Value::Word(w) => ITree::tau(ITree::ret(Value::Word(w + 1))),
                other => ITree::ret(other.clone()),
            }
        };
        let lhs = interp(&zero_handler, &t.bind(k));
        let h2 = zero_handler.clone();
        let rhs = interp(&zero_handler, &t).bind(move |v| interp(&h2, &k(v)));
        let verdict = check_eutt(&lhs, &rhs, |a, b| a == b, 1, Budgets::new(64, 64));
        assert_eq!(verdict, CheckResult::Related);
    }
}

#[test]
fn interp_mrec_is_identity_on_call_free_trees() {
    let mut rng = gen::rng(73);
    let cfg = SemConfig::bare(1);
    let handler = call_handler(&cfg);
    for _ in 0..100 {
        let t = gen::finite_tree(&mut rng, 4, 1);
        let out = interp_mrec(&handler, &t);
        let verdict = check_eutt(&out, &t, |a, b| a == b, 1, Budgets::new(64, 64));
        assert_eq!(verdict, CheckResult::Related);
    }
}

#[test]
fn peval_agrees_with_observation_on_straight_line_commands() {
    let mut rng = gen::rng(74);
    let cfg = SemConfig::bare(2);
    for _ in 0..200 {
        let mut env = VarEnv::new();
        env.insert("a".into(), Sort::Word);
        env.insert("b".into(), if rng.gen_bool(0.5) { Sort::Bool } else { Sort::Word });
        let c = gen::command(&mut rng, &gen::ProgCfg::straight_line(2), &mut env);
        let mut s = gen::state_for(&mut rng, &env, 2);
        if rng.gen_bool(0.3) {
            // Drop a variable so some runs err; both routes must agree on
            // failure too.
            let doomed = env.keys().next().unwrap().clone();
            s.vm.remove(&doomed);
        }
        let evaluated = peval(&c, &s, &cfg);
        let observed = observe(&sem_intra(&c, &s, &cfg), 100_000, |_| unreachable!());
        match (evaluated, observed) {
            (Some(s1), Ok(trace)) => match trace.last().unwrap() {
                TraceStep::Ret(s2) => assert_eq!(&s1, s2),
                other => panic!("expected Ret, got {other:?}"),
            },
            (None, Err(_)) => {}
            (got, obs) => panic!("partial evaluator disagrees: {got:?} vs {obs:?}"),
        }
    }
}

#[test]
fn eutt_is_symmetric_for_symmetric_relations() {
    let mut rng = gen::rng(75);
    let budgets = Budgets::new(40, 40);
    for i in 0..200 {
        let (a, b) = if i % 2 == 0 {
            gen::bisimilar_pair(&mut rng, 3, 1, 2)
        } else {
            (gen::finite_tree(&mut rng, 3, 1), gen::finite_tree(&mut rng, 3, 1))
        };
        let forward = check_eutt(&a, &b, |x, y| x == y, 1, budgets);
        let backward = check_eutt(&b, &a, |x, y| x == y, 1, budgets);
        assert_eq!(
            std::mem::discriminant(&forward),
            std::mem::discriminant(&backward),
            "pair {i}: {forward:?} vs {backward:?}"
        );
    }
}

#[test]
fn not_related_witnesses_replay() {
    let mut rng = gen::rng(76);
    let contract = EventContract::equality(1);
    let mut replayed = 0;
    for _ in 0..300 {
        let a = gen::finite_tree(&mut rng, 3, 1);
        let b = gen::finite_tree(&mut rng, 3, 1);
        if let CheckResult::NotRelated(w) =
            check_eutt(&a, &b, |x, y| x == y, 1, Budgets::new(40, 40))
        {
            assert!(
                replay_witness(&a, &b, &w, |x: &Value, y: &Value| x == y, &contract),
                "witness did not replay: {w:?}"
            );
            replayed += 1;
        }
    }
    assert!(replayed > 50, "the corpus should produce unrelated pairs, got {replayed}");
}

#[test]
fn alpha_accept_implies_semantic_relatedness() {
    let mut rng = gen::rng(77);
    let cfg = SemConfig::bare(2);
    for i in 0..60 {
        let mut env = VarEnv::new();
        for k in 0..3 {
            env.insert(format!("v{k}"), if k == 2 { Sort::Bool } else { Sort::Word });
        }
        let c1 = gen::command(&mut rng, &gen::ProgCfg::straight_line(2), &mut env.clone());
        let mut delta = itc::passes::RenMap::new();
        let mut map = std::collections::BTreeMap::new();
        for (k, x) in env.keys().enumerate() {
            delta.insert(x.clone(), format!("w{k}"));
            map.insert(x.clone(), format!("w{k}"));
        }
        // Fresh variables introduced by the command rename to a disjoint
        // namespace.
        let mut all = BTreeSet::new();
        collect_vars(&c1, &mut all);
        for x in all {
            map.entry(x.clone()).or_insert_with(|| format!("{x}_t"));
        }
        let c2 = rename_cmd(&c1, &map);
        let Some(d_final) = alpha_check_cmds(&c1, &c2, &delta) else {
            panic!("alpha checker rejected a renamed copy on case {i}");
        };
        let checker = RenamingChecker::new(env, 2);
        let pre = checker.interp(&delta);
        let post = checker.interp(&d_final);
        let out = check_cmd_tuple(
            &intra_sem(&cfg),
            &intra_sem(&cfg),
            &c1,
            &c2,
            &pre,
            &post,
            &EventContract::equality(2),
            &itc::equiv::Cutoffs::err_left(),
            TupleBudgets::quick(),
            &mut rng,
        );
        assert!(out.is_related(), "case {i}: {out:?}");
    }
}

fn collect_vars(c: &itc::lang::Command, out: &mut BTreeSet<String>) {
    use itc::lang::{Command, Expr, Lval};
    fn expr(e: &Expr, out: &mut BTreeSet<String>) {
        match e {
            Expr::Const(_) => {}
            Expr::Var(x) => {
                out.insert(x.clone());
            }
            Expr::Tuple(es) | Expr::App(_, es) => es.iter().for_each(|e| expr(e, out)),
            Expr::ArrRead(x, i) => {
                out.insert(x.clone());
                expr(i, out);
            }
            Expr::MemRead(a) => expr(a, out),
        }
    }
    fn lval(l: &Lval, out: &mut BTreeSet<String>) {
        match l {
            Lval::Var(x) => {
                out.insert(x.clone());
            }
            Lval::ArrWrite(x, i) => {
                out.insert(x.clone());
                expr(i, out);
            }
            Lval::MemWrite(a) => expr(a, out),
            Lval::Tuple(ls) => ls.iter().for_each(|l| lval(l, out)),
        }
    }
    match c {
        Command::Skip => {}
        Command::Assign(l, e) | Command::Rand(l, e) => {
            lval(l, out);
            expr(e, out);
        }
        Command::Seq(a, b) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
        Command::If(e, t, f) => {
            expr(e, out);
            collect_vars(t, out);
            collect_vars(f, out);
        }
        Command::While(e, b) => {
            expr(e, out);
            collect_vars(b, out);
        }
        Command::Call(l, _, e) => {
            lval(l, out);
            expr(e, out);
        }
    }
}

#[test]
fn observed_states_match_the_final_distribution_support() {
    // Sanity link between the two execution surfaces: every observed final
    // state under a fixed oracle appears in the exact distribution support.
    let mut rng = gen::rng(78);
    for i in 0..30u64 {
        let p = gen::program(&mut rng, &gen::ProgCfg::small(1), 1);
        let cfg = SemConfig::new(p.clone()).with_chunk_bits(1);
        let main = p.get("main").unwrap();
        let t = itc::sem::sem_inter(&main.body, &MachState::new(), &cfg);
        let trace = observe(&t, 100_000, itc::itree::seeded_oracle(i, 1)).unwrap();
        let TraceStep::Ret(final_state) = trace.last().unwrap() else {
            panic!("expected Ret")
        };
        let (dist, _) = itc::prob::semp(
            &t,
            1 << 12,
            &num_rational::BigRational::from_integer(0.into()),
            &itc::prob::ProbConfig::new(1),
        )
        .unwrap();
        assert!(
            dist.support().any(|(s, _)| s == final_state),
            "observed state missing from the distribution on program {i}"
        );
    }
}

#[test]
fn trees_are_shareable_across_threads() {
    // Concurrent observation of one shared tree: memoization is internally
    // synchronized and observation never mutates anything visible.
    let mut rng = gen::rng(79);
    let t = gen::finite_tree(&mut rng, 4, 1);
    let expected = observe(&t, 10_000, |_| Answer::Chunks(vec![1])).unwrap();
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let t = t.clone();
            let expected = expected.clone();
            std::thread::spawn(move || {
                let got = observe(&t, 10_000, |_| Answer::Chunks(vec![1])).unwrap();
                assert_eq!(got, expected);
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
}

#[test]
fn verdicts_are_monotone_in_budgets() {
    let mut rng = gen::rng(80);
    for i in 0..120 {
        let (a, b) = if i % 2 == 0 {
            gen::bisimilar_pair(&mut rng, 3, 1, 2)
        } else {
            (gen::finite_tree(&mut rng, 3, 1), gen::finite_tree(&mut rng, 3, 1))
        };
        let mut last: Option<CheckResult> = None;
        for (depth, tau) in [(4u32, 2u32), (16, 8), (64, 32)] {
            let r = check_eutt(&a, &b, |x, y| x == y, 1, Budgets::new(depth, tau));
            if let Some(prev) = &last {
                match prev {
                    CheckResult::Related => assert_eq!(r, CheckResult::Related, "pair {i}"),
                    CheckResult::NotRelated(_) => {
                        assert!(matches!(r, CheckResult::NotRelated(_)), "pair {i}")
                    }
                    CheckResult::BudgetExhausted => {}
                }
            }
            last = Some(r);
        }
    }
}

#[test]
fn program_tuples_cover_transformed_and_mismatched_pairs() {
    use itc::rhl::{check_prog_tuple, FnPairSpec, TupleOutcome};
    let mut rng = gen::rng(81);
    // Dead-code-eliminated programs satisfy the observable-equality spec.
    for _ in 0..20 {
        let p1 = gen::program(&mut rng, &gen::ProgCfg::small(2), 1);
        let p2 = itc::passes::dead_code_elim(&p1);
        let specs: Vec<FnPairSpec> = p1
            .funs
            .iter()
            .map(|f| {
                FnPairSpec::identity(&f.name, |rng| {
                    (Default::default(), Value::Word(rng.gen_range(0..4)))
                })
            })
            .collect();
        let out = check_prog_tuple(
            &p1,
            &p2,
            &specs,
            &EventContract::equality(2),
            &itc::equiv::Cutoffs::err_left(),
            TupleBudgets::quick(),
            &mut rng,
        );
        assert!(out.is_related(), "{out:?}");
    }
    // A spec relating a function to one computing a different result is
    // refuted.
    let p1 = parse("fn f(n) -> r { r = n + 1; }").unwrap();
    let p2 = parse("fn f(n) -> r { r = n + 2; }").unwrap();
    let spec = vec![FnPairSpec::identity("f", |rng| {
        (Default::default(), Value::Word(rng.gen_range(0..4)))
    })];
    let out = check_prog_tuple(
        &p1,
        &p2,
        &spec,
        &EventContract::equality(2),
        &itc::equiv::Cutoffs::err_left(),
        TupleBudgets::quick(),
        &mut rng,
    );
    assert!(matches!(out, TupleOutcome::NotRelated { .. }), "{out:?}");
}

#[test]
fn compiled_challenger_components_are_bisimilar() {
    use itc::crypto::{make_challenger, KemNames};
    let path = format!("{}/examples/programs/kem_otp.itc", env!("CARGO_MANIFEST_DIR"));
    let src = parse(&std::fs::read_to_string(path).unwrap()).unwrap();
    let tgt = itc::passes::pipeline(
        &src,
        &[itc::passes::PassKind::Inline, itc::passes::PassKind::ConstProp, itc::passes::PassKind::Dce],
    )
    .unwrap();
    let names = KemNames::default();
    let ch_src = make_challenger(&src, &names, 1).unwrap();
    let ch_tgt = make_challenger(&tgt, &names, 1).unwrap();
    let budgets = Budgets::new(64, 4096);
    assert_eq!(
        check_eutt(&(ch_src.gen_key)(), &(ch_tgt.gen_key)(), |a, b| a == b, 1, budgets),
        CheckResult::Related
    );
    for pk in [Value::Bytes(vec![0]), Value::Bytes(vec![1])] {
        assert_eq!(
            check_eutt(&(ch_src.encap)(&pk), &(ch_tgt.encap)(&pk), |a, b| a == b, 1, budgets),
            CheckResult::Related
        );
    }
    for sk in [Value::Bytes(vec![0]), Value::Bytes(vec![1])] {
        for ct in [Value::Bytes(vec![0]), Value::Bytes(vec![1])] {
            assert_eq!(
                check_eutt(&(ch_src.decap)(&sk, &ct), &(ch_tgt.decap)(&sk, &ct), |a, b| a == b, 1, budgets),
                CheckResult::Related
            );
        }
    }
}

#[test]
fn identity_decap_returns_every_ciphertext() {
    use itc::crypto::{make_challenger, KemNames};
    let path = format!("{}/examples/programs/kem_leaky.itc", env!("CARGO_MANIFEST_DIR"));
    let p = parse(&std::fs::read_to_string(path).unwrap()).unwrap();
    let ch = make_challenger(&p, &KemNames::default(), 1).unwrap();
    for sk_bits in 0..2u8 {
        for ct_bits in 0..2u8 {
            let sk = Value::Bytes(vec![sk_bits]);
            let ct = Value::Bytes(vec![ct_bits]);
            let trace = observe(&(ch.decap)(&sk, &ct), 10_000, |_| unreachable!()).unwrap();
            match trace.last().unwrap() {
                TraceStep::Ret(msg) => assert_eq!(msg, &ct),
                other => panic!("expected Ret, got {other:?}"),
            }
        }
    }
}

#[test]
fn parser_never_panics_on_garbage() {
    let mut rng = gen::rng(82);
    let alphabet: Vec<char> =
        "fn inline skip if else while truefalse(){}[]=;,<>+-*!^&|#$ \n\tabcxyz0123456789_"
            .chars()
            .collect();
    for _ in 0..2000 {
        let len = rng.gen_range(0..80);
        let text: String =
            (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
        let _ = itc::lang::parse(&text);
        let _ = itc::lang::parse_cmd(&text);
        let _ = itc::lang::parse_expr(&text);
    }
}

#[test]
fn zero_chunk_sampling_is_deterministic() {
    // Rnd(0) has exactly one answer: the empty chunk vector.
    let cfg = SemConfig::bare(2);
    let c = itc::lang::parse_cmd("x =$ 0;").unwrap();
    let t = sem_intra(&c, &MachState::new(), &cfg);
    let d = itc::prob::semp_n(&t, 10, &itc::prob::ProbConfig::new(2)).unwrap();
    let support: Vec<_> = d.support().collect();
    assert_eq!(support.len(), 1);
    assert_eq!(support[0].0.get("x"), Some(&Value::Bytes(vec![])));
    assert_eq!(*support[0].1, num_rational::BigRational::from_integer(1.into()));
}
