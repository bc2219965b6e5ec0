//! Compile the A* program for the canonical seven-state instance, run it,
//! and dump the search-node records it grew in memory.
//!
//!     cargo run --example astar_search

use mnc::machine::{run, RunOptions};
use mnc::programs::astar::{
    self, AStarLayout, GraphInstance, NODE_ACTION, NODE_F, NODE_G, NODE_H, NODE_OPEN,
    NODE_PARENT, NODE_STATE, NODE_VALID,
};

fn main() -> mnc::Result<()> {
    let instance = GraphInstance::canonical();
    let layout = AStarLayout::for_instance(&instance, 256)?;
    let compiled =
        astar::compile_with_heads(&instance, &layout, astar::READ_HEADS, astar::WRITE_HEADS)?;
    println!(
        "compiled {} controller entries and {} modules:",
        compiled.controller_entries,
        compiled.program.module_count()
    );
    for (phase, entries) in &compiled.module_entries {
        println!("  {:15} {entries} table entries", phase.name());
    }

    let memory = astar::init_memory(&instance, &layout)?;
    let opts = RunOptions {
        check: true,
        ..RunOptions::default()
    };
    let trace = run(&compiled.program, memory, &opts)?;
    println!("halted after {} steps", trace.steps.len());

    // the search tree, straight out of memory
    let next_free = trace.final_memory[layout.addr_next_free] as usize;
    println!("record  state parent action     G     H     F  open");
    for j in 0..next_free {
        let field = |f: usize| trace.final_memory[layout.node_field(j, f)];
        if field(NODE_VALID) != 1.0 {
            continue;
        }
        println!(
            "{j:6}  {:5} {:6} {:6} {:5} {:5} {:5} {:5}",
            instance.names[field(NODE_STATE) as usize],
            field(NODE_PARENT),
            field(NODE_ACTION),
            field(NODE_G),
            field(NODE_H),
            field(NODE_F),
            field(NODE_OPEN),
        );
    }

    let path = astar::extract_path(&trace.final_memory, &layout)?.expect("reachable goal");
    let names: Vec<&str> = path.iter().map(|n| instance.names[n.state].as_str()).collect();
    println!(
        "path = {}, cost = {}",
        names.join(" -> "),
        path.last().unwrap().g
    );

    // the same compiler on a variant with an unreachable goal
    let unreachable = GraphInstance::canonical_unreachable_goal();
    let layout = AStarLayout::for_instance(&unreachable, 256)?;
    let program = astar::compile(&unreachable, &layout)?;
    let trace = run(&program, astar::init_memory(&unreachable, &layout)?, &opts)?;
    println!(
        "unreachable-goal variant: flag = {}, path = {:?}",
        trace.final_memory[layout.addr_flag],
        astar::extract_path(&trace.final_memory, &layout)?
    );
    Ok(())
}
