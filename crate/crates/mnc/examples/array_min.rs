//! Compile the array-minimum program once and run it over several inputs.
//!
//!     cargo run --example array_min

use mnc::machine::{run, RunOptions};
use mnc::programs::min;

fn main() -> mnc::Result<()> {
    let layout = min::MinLayout::with_capacity(64)?;
    let program = min::compile(&layout)?;
    println!(
        "compiled: {} modules, {} read heads, {} write heads",
        program.module_count(),
        program.read_heads,
        program.write_heads
    );

    let opts = RunOptions {
        check: true,
        ..RunOptions::default()
    };
    for array in [
        vec![5.0, 2.0, 8.0],
        vec![7.0],
        vec![3.5, -12.25, 3.5, 0.0, 99.0, -12.0],
    ] {
        let memory = min::load(&layout, &array)?;
        let trace = run(&program, memory, &opts)?;
        println!(
            "min{array:?} = {} in {} steps (n + 1 = {})",
            min::extract(&trace, &layout)?,
            trace.steps.len(),
            array.len() + 1
        );
    }

    // the phase schedule is visible in the gates of each step
    let memory = min::load(&layout, &[5.0, 2.0, 8.0])?;
    let trace = run(&program, memory, &opts)?;
    for record in &trace.steps {
        let phase = match record
            .gates
            .iter()
            .position(|&g| g == 1.0)
            .expect("gates are one-hot")
        {
            0 => "init",
            1 => "update",
            _ => "stop",
        };
        println!(
            "step {}: control (i, n, 0) = {:?}, phase {phase}, writes {:?} -> cells {:?}",
            record.step, record.control, record.outputs, record.write_addrs
        );
    }
    Ok(())
}
