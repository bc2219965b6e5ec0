//! Gating is part of each module's own weights: with gate 0 the outputs are
//! exactly zero, with gate 1 the wrapped map passes through bit for bit.
//!
//!     cargo run --example gate_inhibition

use mnc::network::{GateBound, Network};

fn main() -> mnc::Result<()> {
    let bound = GateBound::new(1000.0)?;

    // wrap the pair-processing core used by the sort program
    let core = Network::parallel(&[
        Network::select(3, &[0, 1])?.then(&Network::min2())?,
        Network::select(3, &[0, 1])?.then(&Network::max2())?,
        Network::affine(vec![vec![0.0, 0.0, 1.0]], vec![1.0])?,
    ])?;
    let gated = Network::gate_wrap(&core, bound);
    println!(
        "core {} -> {}, wrapped {} -> {} (extra gate input)",
        core.input_dim(),
        core.output_dim(),
        gated.input_dim(),
        gated.output_dim()
    );

    let reads = [5.0, 3.0, 2.0];
    let mut with_gate = vec![1.0];
    with_gate.extend(reads);
    println!("gate 1: {:?} -> {:?}", reads, gated.eval(&with_gate)?);
    with_gate[0] = 0.0;
    println!("gate 0: {:?} -> {:?} (inhibited)", reads, gated.eval(&with_gate)?);

    // several gated modules merge by plain addition; with one-hot gates the
    // sum is exactly the active module's output
    let negate = Network::gate_wrap(
        &Network::affine(vec![vec![-1.0, 0.0, 0.0]; 3], vec![0.0; 3])?,
        bound,
    );
    for active in [0, 1] {
        let gates = [f64::from(active == 0), f64::from(active == 1)];
        let mut merged = vec![0.0; 3];
        for (module, gate) in [&gated, &negate].iter().zip(gates) {
            let mut input = vec![gate];
            input.extend(reads);
            for (acc, y) in merged.iter_mut().zip(module.eval(&input)?) {
                *acc += y;
            }
        }
        println!("one-hot gates {gates:?} merge to {merged:?}");
    }

    // the inhibition guarantee only holds while |core output| <= bound;
    // the machine asserts this at run time
    let tight = Network::gate_wrap(&Network::affine(vec![vec![1.0]], vec![1.0])?, GateBound::new(10.0)?);
    println!(
        "out-of-bound core at gate 0: {:?} (nonzero leak, caught by the machine)",
        tight.eval(&[0.0, 50.0])?
    );
    Ok(())
}
