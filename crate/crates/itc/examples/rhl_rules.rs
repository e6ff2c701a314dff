//! A quick run of the rule-soundness harness: random premise-satisfying
//! instances per proof rule, conclusions checked semantically.
//!
//! ```sh
//! cargo run --release -p itc --example rhl_rules
//! ```

fn main() {
    let report = itc::rhl::suite::rule_soundness_suite(2024, 10);
    for rule in &report.rules {
        println!(
            "{:24} {:>2}/{:<2} {}",
            rule.rule,
            rule.passed,
            rule.instances,
            if rule.failures.is_empty() {
                "ok".to_string()
            } else {
                format!("first failure: seed {} ({})", rule.failures[0].seed, rule.failures[0].detail)
            }
        );
    }
}
