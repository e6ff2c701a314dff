//! End-to-end preservation: compile each toy KEM through the full pipeline
//! and check that every adversary's exact advantage is unchanged, plus that
//! the two experiment trees are weakly bisimilar within budget.
//!
//! ```sh
//! cargo run -p itc --example preservation
//! ```

use itc::crypto::{catalog, preservation_check, ExperimentConfig, KemNames};
use itc::lang::parse;
use itc::passes::PassKind;

fn main() {
    let cfg = ExperimentConfig::default();
    let passes = [PassKind::Inline, PassKind::ConstProp, PassKind::Dce];
    for file in ["kem_otp.itc", "kem_leaky.itc"] {
        let path = format!("{}/examples/programs/{file}", env!("CARGO_MANIFEST_DIR"));
        let program = parse(&std::fs::read_to_string(path).unwrap()).unwrap();
        for adversary in catalog() {
            let report =
                preservation_check(&program, &passes, &adversary, &KemNames::default(), &cfg)
                    .unwrap();
            println!(
                "{file:14} vs {:8} source {}/{} target {}/{} equal={} eutt={}",
                report.adversary,
                report.advantage_src.numerator,
                report.advantage_src.denominator,
                report.advantage_tgt.numerator,
                report.advantage_tgt.denominator,
                report.equal,
                report.eutt_verdict,
            );
        }
    }
}
