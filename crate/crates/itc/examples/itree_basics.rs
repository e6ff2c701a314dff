//! Interaction-tree basics: building trees with the combinators, observing
//! them with a bounded budget, and watching laziness at work.
//!
//! ```sh
//! cargo run -p itc --example itree_basics
//! ```

use std::ops::ControlFlow;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use itc::itree::{iter, observe, seeded_oracle, trigger, Answer, Event, ITree};

fn main() {
    // bind grafts continuations at the leaves.
    let t = ITree::ret(41u64).bind(|v| ITree::ret(v + 1));
    let trace = observe(&t, 16, |_| unreachable!("no events")).unwrap();
    println!("bind:      {trace:?}");

    // trigger defers an effect; the oracle answers it during observation.
    let sample = trigger(Event::Rnd(2)).bind(|a| match a {
        Answer::Chunks(c) => ITree::ret(c[0] as u64 + c[1] as u64),
        _ => unreachable!(),
    });
    let trace = observe(&sample, 16, seeded_oracle(7, 8)).unwrap();
    println!("trigger:   {trace:?}");

    // iter is a while loop; a Tau guards every round.
    let count_to_three = iter(
        |i: &u64| {
            let i = *i;
            ITree::ret(if i < 3 { ControlFlow::Continue(i + 1) } else { ControlFlow::Break(i) })
        },
        0u64,
    );
    let trace = observe(&count_to_three, 16, |_| unreachable!()).unwrap();
    println!("iter:      {trace:?}");

    // A diverging loop is a perfectly fine value: observation just runs out
    // of fuel.
    let spin = iter(|i: &u64| ITree::ret(ControlFlow::<u64, u64>::Continue(*i)), 0);
    let out = observe(&spin, 10, |_| unreachable!());
    println!("spin:      {out:?}");

    // Laziness is measurable: forcing a small prefix of a deep tree forces
    // a proportional number of input nodes.
    let mut deep: ITree<u64> = ITree::ret(0);
    for _ in 0..1000 {
        deep = ITree::tau(deep);
    }
    let counter = Arc::new(AtomicUsize::new(0));
    let wrapped = deep.counted(&counter).bind(|v| ITree::ret(*v));
    let _ = observe(&wrapped, 10, |_| unreachable!());
    println!("forced {} of 1001 input nodes for a 10-node prefix", counter.load(Ordering::Relaxed));
}
