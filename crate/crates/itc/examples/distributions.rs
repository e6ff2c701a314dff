//! Exact result distributions: the coin program is a point-free uniform
//! flip, the geometric loop converges with an explicitly reported residual.
//!
//! ```sh
//! cargo run -p itc --example distributions
//! ```

use itc::lang::{parse, render_value, MachState};
use itc::prob::{inv_pow2, semp, ProbConfig};
use itc::sem::{sem_inter, SemConfig};

fn show(file: &str, chunk_bits: u32) {
    let path = format!("{}/examples/programs/{file}", env!("CARGO_MANIFEST_DIR"));
    let program = parse(&std::fs::read_to_string(path).unwrap()).unwrap();
    let main_fn = program.get("main").unwrap().clone();
    let cfg = SemConfig::new(program).with_chunk_bits(chunk_bits);
    let tree = sem_inter(&main_fn.body, &MachState::new(), &cfg);
    let (dist, conv) = semp(&tree, 1 << 14, &inv_pow2(20), &ProbConfig::new(chunk_bits)).unwrap();
    let result = dist.map(|s| s.get(&main_fn.result).cloned());
    println!("{file} (result variable `{}`):", main_fn.result);
    for (value, mass) in result.support() {
        let rendered = value.as_ref().map(render_value).unwrap_or_else(|| "undef".into());
        println!("  {rendered} -> {mass}");
    }
    println!("  residual {} after {} steps\n", conv.residual, conv.n_used);
}

fn main() {
    show("coin.itc", 1);
    show("geometric.itc", 1);
}
