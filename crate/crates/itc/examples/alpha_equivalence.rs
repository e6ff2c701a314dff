//! The register-renaming checker on the classic example: `x = y + 3`
//! against `rdi = rdi + 3` under the initial renaming `{y -> rdi}`.
//!
//! ```sh
//! cargo run -p itc --example alpha_equivalence
//! ```

use std::collections::BTreeMap;

use itc::lang::{parse, parse_cmd};
use itc::passes::{alpha_check, alpha_check_cmds, RenMap};

fn main() {
    let c1 = parse_cmd("x = y + 3;").unwrap();
    let c2 = parse_cmd("rdi = rdi + 3;").unwrap();
    let d0 = RenMap::of(&[("y", "rdi")]);
    match alpha_check_cmds(&c1, &c2, &d0) {
        Some(d1) => println!("accepted; final renaming {:?}", d1.0),
        None => println!("rejected"),
    }

    // Whole programs: parameters map by position, the final renaming must
    // relate the result variables.
    let src = parse("fn f(a) -> r { t = a * 2; r = t + 1; }").unwrap();
    let tgt = parse("fn f(rdi) -> rax { rsi = rdi * 2; rax = rsi + 1; }").unwrap();
    let verdict = alpha_check(&src, &tgt, &BTreeMap::new());
    println!("program-level: {verdict:?}");

    let bad = parse("fn f(rdi) -> rax { rsi = rdi * 2; rax = rsi + 2; }").unwrap();
    let verdict = alpha_check(&src, &bad, &BTreeMap::new());
    println!("tampered target: {verdict:?}");
}
