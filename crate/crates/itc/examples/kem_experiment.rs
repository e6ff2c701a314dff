//! IND-CCA experiments on the two toy KEMs with the shipped adversaries.
//! Advantages are exact rationals computed by exhaustive enumeration of the
//! experiment tree's random choices.
//!
//! ```sh
//! cargo run -p itc --example kem_experiment
//! ```

use itc::crypto::{advantage, catalog, make_challenger, ExperimentConfig, KemNames};
use itc::lang::parse;

fn main() {
    let cfg = ExperimentConfig::default();
    for file in ["kem_otp.itc", "kem_leaky.itc"] {
        let path = format!("{}/examples/programs/{file}", env!("CARGO_MANIFEST_DIR"));
        let program = parse(&std::fs::read_to_string(path).unwrap()).unwrap();
        let challenger = make_challenger(&program, &KemNames::default(), cfg.chunk_bits).unwrap();
        for adversary in catalog() {
            let adv = advantage(&challenger, &adversary, &cfg).unwrap();
            println!("{file:14} vs {:8} advantage = {adv}", adversary.name);
        }
    }
}
