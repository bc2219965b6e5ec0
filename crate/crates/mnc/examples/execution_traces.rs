//! Traces as files: run a program, serialize every step with full-precision
//! doubles, parse it back, and verify the bytes round-trip.
//!
//!     cargo run --example execution_traces

use mnc::format;
use mnc::machine::{check_step, run, RunOptions};
use mnc::programs::min;

fn main() -> mnc::Result<()> {
    let layout = min::MinLayout::with_capacity(64)?;
    let program = min::compile(&layout)?;
    let memory = min::load(&layout, &[0.1, -2.5, 0.3])?;
    let opts = RunOptions {
        check: true,
        snapshots: true,
        ..RunOptions::default()
    };
    let trace = run(&program, memory, &opts)?;

    let text = format::write_trace(&trace);
    println!("--- trace file ({} bytes) ---", text.len());
    for line in text.lines() {
        let shown: String = line.chars().take(120).collect();
        println!("{shown}{}", if line.len() > 120 { " ..." } else { "" });
    }

    let parsed = format::parse_trace(&text)?;
    assert_eq!(format::write_trace(&parsed), text);
    println!("--- parse + re-serialize: byte-identical ---");

    // every recorded step satisfies the gate and merge contracts
    let violations: usize = trace.steps.iter().map(|s| check_step(s).len()).sum();
    println!("contract violations across {} steps: {violations}", trace.steps.len());

    // a network dump in the same full-precision format
    println!("--- controller dump (first 6 lines) ---");
    for line in format::write_network(&program.controller).lines().take(6) {
        let shown: String = line.chars().take(100).collect();
        println!("{shown}{}", if line.len() > 100 { " ..." } else { "" });
    }
    Ok(())
}
