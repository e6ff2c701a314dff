//! End-to-end checks of the command-line interface: the exit-code contract
//! (0 success/Related/Accept/equal, 1 reject/violation, 2 usage errors) and
//! byte-level replayability of seeded JSON reports.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_itc")
}

fn programs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/programs")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn path(file: &str) -> String {
    programs().join(file).to_string_lossy().into_owned()
}

#[test]
fn parse_round_trips_and_reports_syntax_errors() {
    let out = run(&["parse", &path("coin.itc")]);
    assert_eq!(out.status.code(), Some(0));
    let printed = String::from_utf8(out.stdout).unwrap();
    assert!(printed.contains("fn main() -> out"));

    let dir = std::env::temp_dir().join("itc_cli_bad.itc");
    std::fs::write(&dir, "fn broken() -> x { x = ; }").unwrap();
    let out = run(&["parse", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("syntax error"), "{err}");
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dist_emits_exact_rationals() {
    let out = run(&["dist", &path("coin.itc"), "--chunk-bits", "1", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let entries = v["distribution"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    for e in entries {
        assert_eq!(e["numerator"], "1");
        assert_eq!(e["denominator"], "2");
    }
    assert_eq!(v["distribution"]["residual"]["numerator"], "0");
}

#[test]
fn compile_reproduces_the_constant_propagation_example() {
    let out = run(&["compile", &path("cp.itc"), "--passes", "const_prop"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("x = 1;"), "{text}");
    assert!(!text.contains("while"), "constant-false loop must be gone:\n{text}");
}

#[test]
fn validate_accepts_the_pipeline_and_seeds_replay() {
    let args = [
        "validate",
        &path("inline3.itc"),
        "--passes",
        "inline,const_prop,dce",
        "--seed",
        "7",
        "--json",
    ];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout, "identical argv and seed must give identical bytes");
}

#[test]
fn alpha_check_exit_codes() {
    let ok = run(&["alpha-check", &path("coin.itc"), &path("coin.itc")]);
    assert_eq!(ok.status.code(), Some(0));

    let tampered = std::env::temp_dir().join("itc_cli_tampered.itc");
    std::fs::write(
        &tampered,
        "# Same shape, different constant.\nfn main() -> out {\n    b =$ 1;\n    out = b[0] + 1;\n}\n",
    )
    .unwrap();
    let bad = run(&["alpha-check", &path("coin.itc"), tampered.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn experiment_and_preserve_agree_on_the_leaky_kem() {
    let out = run(&[
        "experiment",
        &path("kem_leaky.itc"),
        "--adversary",
        "replay",
        "--chunk-bits",
        "1",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(v["advantage"]["numerator"], "1");
    assert_eq!(v["advantage"]["denominator"], "8");

    let out = run(&[
        "preserve",
        &path("kem_leaky.itc"),
        "--passes",
        "inline,const_prop,dce",
        "--adversary",
        "replay",
        "--chunk-bits",
        "1",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(v["equal"], true);
    assert_eq!(v["eutt_related"], true);
    assert_eq!(v["advantage_src"], v["advantage_tgt"]);
}

#[test]
fn preserve_rejects_uninitialized_outputs() {
    let broken = std::env::temp_dir().join("itc_cli_uninit.itc");
    std::fs::write(
        &broken,
        r#"
fn genkey() -> out { sk =$ 1; pk = sk; out = pk; }
fn encap() -> out { msg =$ 1; out = msg; }
fn decap() -> out { msg = ct ^ sk; out = msg; }
"#,
    )
    .unwrap();
    let out = run(&["preserve", broken.to_str().unwrap(), "--passes", "dce"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("safety scan"), "{err}");
}

#[test]
fn run_is_deterministic_per_seed() {
    let args = ["run", &path("geometric.itc"), "--seed", "5", "--chunk-bits", "1", "--json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn rhl_suite_smoke() {
    let out = run(&["rhl-suite", "--seed", "3", "--instances", "2", "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(v["rules"].as_array().unwrap().len(), 18);
}

#[test]
fn output_flag_writes_the_report_file() {
    let target = std::env::temp_dir().join("itc_cli_dist.json");
    let _ = std::fs::remove_file(&target);
    let out = run(&[
        "dist",
        &path("coin.itc"),
        "--chunk-bits",
        "1",
        "--json",
        "--output",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&target).unwrap();
    assert!(written.contains("distribution"));
}
