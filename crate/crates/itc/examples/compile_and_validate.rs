//! The validated pipeline: run inline, constant propagation, and dead-code
//! elimination over a program, checking each step by bounded cutoff
//! equivalence and exact distribution comparison.
//!
//! ```sh
//! cargo run -p itc --example compile_and_validate
//! ```

use itc::lang::{parse, pretty};
use itc::passes::{pipeline_validated, PassKind, ValidateOpts};

fn main() {
    let path = format!("{}/examples/programs/inline3.itc", env!("CARGO_MANIFEST_DIR"));
    let program = parse(&std::fs::read_to_string(path).unwrap()).unwrap();
    println!("before:\n{}", pretty(&program));

    let passes = [PassKind::Inline, PassKind::ConstProp, PassKind::Dce];
    let (compiled, reports) =
        pipeline_validated(&program, &passes, &ValidateOpts::default()).unwrap();

    for report in &reports {
        println!(
            "pass {:10} xrutt related, distributions {}",
            report.pass,
            match report.dist_equal {
                Some(true) => "equal",
                Some(false) => "DIFFER",
                None => "inconclusive",
            }
        );
    }
    println!("\nafter:\n{}", pretty(&compiled));
}
