//! Parse a program and run it under the interprocedural semantics with a
//! seeded event oracle.
//!
//! ```sh
//! cargo run -p itc --example run_program
//! ```

use itc::itree::{observe, seeded_oracle, TraceStep};
use itc::lang::{parse, render_value, MachState};
use itc::sem::{sem_inter, SemConfig};

fn main() {
    let path = format!("{}/examples/programs/geometric.itc", env!("CARGO_MANIFEST_DIR"));
    let source = std::fs::read_to_string(path).unwrap();
    let program = parse(&source).unwrap();
    let main_fn = program.get("main").unwrap().clone();
    let cfg = SemConfig::new(program).with_chunk_bits(1);

    for seed in 0..4 {
        let tree = sem_inter(&main_fn.body, &MachState::new(), &cfg);
        let trace = observe(&tree, 10_000, seeded_oracle(seed, cfg.chunk_bits)).unwrap();
        let flips = trace.iter().filter(|s| matches!(s, TraceStep::Vis { .. })).count();
        if let Some(TraceStep::Ret(state)) = trace.last() {
            println!(
                "seed {seed}: {flips} flips, out = {}",
                render_value(state.get("out").unwrap())
            );
        }
    }
}
