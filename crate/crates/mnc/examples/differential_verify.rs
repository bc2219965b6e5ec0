//! Differential testing against the symbolic oracles: random inputs through
//! the compiled programs, compared value-for-value and step-for-step.
//!
//!     cargo run --example differential_verify

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mnc::machine::{run, RunOptions};
use mnc::oracles;
use mnc::programs::astar::{self, AStarLayout, GraphInstance};
use mnc::programs::{min, sort};

fn main() -> mnc::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let opts = RunOptions {
        check: true,
        strict_addresses: true,
        ..RunOptions::default()
    };

    // minimum: 200 random arrays
    let layout = min::MinLayout::with_capacity(64)?;
    let program = min::compile(&layout)?;
    for _ in 0..200 {
        let n = rng.gen_range(1..=32);
        let array: Vec<f64> = (0..n).map(|_| rng.gen_range(-100..=100) as f64).collect();
        let trace = run(&program, min::load(&layout, &array)?, &opts)?;
        assert_eq!(min::extract(&trace, &layout)?, oracles::min(&array)?);
        assert_eq!(trace.steps.len(), n + 1);
    }
    println!("min: 200/200 exact, all runs in n + 1 steps");

    // sort: 100 random arrays, snapshots compared per step
    let layout = sort::SortLayout::with_capacity(32)?;
    let program = sort::compile(&layout)?;
    let snap_opts = RunOptions {
        snapshots: true,
        ..opts.clone()
    };
    for _ in 0..100 {
        let n = rng.gen_range(1..=16);
        let array: Vec<f64> = (0..n).map(|_| rng.gen_range(-50..=50) as f64).collect();
        let trace = run(&program, sort::load(&layout, &array)?, &snap_opts)?;
        let (expected, oracle_trace) = oracles::sort(&array)?;
        assert_eq!(sort::extract(&trace, &layout, n)?, expected);
        for (record, snapshot) in trace.steps.iter().zip(&oracle_trace.snapshots) {
            let memory = record.memory_after.as_ref().unwrap();
            assert_eq!(&memory[layout.array_base..layout.array_base + n], snapshot.as_slice());
        }
    }
    println!("sort: 100/100 exact, per-step snapshots match the oracle");

    // astar: compiled trace vs phase machine, node table vs oracle
    let instance = GraphInstance::canonical();
    let layout = AStarLayout::for_instance(&instance, 256)?;
    let compiled = astar::compile_with_heads(&instance, &layout, astar::READ_HEADS, astar::WRITE_HEADS)?;
    let trace = run(&compiled.program, astar::init_memory(&instance, &layout)?, &opts)?;
    assert_eq!(trace.steps.len(), compiled.steps.len());
    for (machine, symbolic) in trace.steps.iter().zip(&compiled.steps) {
        assert_eq!(machine.outputs, symbolic.outputs);
        assert_eq!(machine.write_addrs, symbolic.write_addrs);
    }
    let oracle = oracles::astar(&instance, layout.max_records)?;
    let path = astar::extract_path(&trace.final_memory, &layout)?.unwrap();
    let (expected_path, expected_cost) = oracle.path.unwrap();
    assert_eq!(path.iter().map(|n| n.state).collect::<Vec<_>>(), expected_path);
    assert_eq!(path.last().unwrap().g, expected_cost);
    println!(
        "astar: {} machine steps replay the phase machine exactly; path cost {}",
        trace.steps.len(),
        expected_cost
    );
    Ok(())
}
