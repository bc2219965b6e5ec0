//! Watch the pass-based sort rewrite its array in place, one adjacent pair
//! per step.
//!
//!     cargo run --example in_place_sort

use mnc::machine::{run, RunOptions};
use mnc::programs::sort;

fn main() -> mnc::Result<()> {
    let layout = sort::SortLayout::with_capacity(32)?;
    let program = sort::compile(&layout)?;

    let array = vec![3.0, 1.0, 4.0, 1.5, 2.0];
    let n = array.len();
    let memory = sort::load(&layout, &array)?;
    let opts = RunOptions {
        check: true,
        snapshots: true,
        ..RunOptions::default()
    };
    let trace = run(&program, memory, &opts)?;

    println!("input  = {array:?}");
    for record in &trace.steps {
        let snapshot = record.memory_after.as_ref().unwrap();
        let view = &snapshot[layout.array_base..layout.array_base + n];
        let phase = match record.gates.iter().position(|&g| g == 1.0).unwrap() {
            0 => "process",
            1 => "next-pass",
            _ => "stop",
        };
        println!(
            "step {:2} (i={}, p={}) {phase:9} -> {view:?}",
            record.step, record.control[0], record.control[1]
        );
    }
    println!("sorted = {:?}", sort::extract(&trace, &layout, n)?);
    println!(
        "steps  = {} = n(n+1)/2 for n = {n}",
        trace.steps.len()
    );
    Ok(())
}
