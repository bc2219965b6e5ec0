//! Compiled algorithm programs: memory layouts, controllers, and gated
//! module sets for the three case studies.

pub mod astar;
pub mod min;
pub mod sort;

use crate::error::Result;
use crate::network::{GateBound, Network};

/// One phase of a hand-built controller: its gate predicate over the control
/// input, and affine maps from the control input to this phase's read and
/// write addresses.
pub(crate) struct PhaseSpec {
    pub gate: Network,
    pub read_addrs: Network,
    pub write_addrs: Network,
}

/// Assembles a controller network from per-phase specs. The gate subnetworks
/// and the gate-wrapped address subnetworks all live inside one network: no
/// external rule translates phase labels into addresses. The emitted address
/// vector is the sum of the per-phase gated address maps; with one-hot gates
/// exactly one summand is nonzero.
pub(crate) fn phase_controller(
    control_width: usize,
    phases: &[PhaseSpec],
    bound: GateBound,
) -> Result<Network> {
    let k = phases.len();
    let n_r = phases[0].read_addrs.output_dim();
    let n_w = phases[0].write_addrs.output_dim();

    // stage 1: (control) -> (g_1 .. g_K, control)
    let mut stage1_parts: Vec<Network> = phases.iter().map(|p| p.gate.clone()).collect();
    stage1_parts.push(Network::identity(control_width));
    let stage1 = Network::parallel(&stage1_parts)?;

    // stage 2 over (gates, control): pass the gates through, and merge the
    // gated per-phase address maps
    let stage2_width = k + control_width;
    let pass_gates = Network::select(stage2_width, &(0..k).collect::<Vec<_>>())?;

    let gated_addr = |nets: &dyn Fn(&PhaseSpec) -> Network, width: usize| -> Result<Network> {
        let mut wrapped = Vec::with_capacity(k);
        for (idx, phase) in phases.iter().enumerate() {
            let mut channels = vec![idx];
            channels.extend(k..stage2_width);
            let sel = Network::select(stage2_width, &channels)?;
            wrapped.push(sel.then(&Network::gate_wrap(&nets(phase), bound))?);
        }
        let stacked = Network::parallel(&wrapped)?;
        let mut sum_rows = vec![vec![0.0; k * width]; width];
        for (j, row) in sum_rows.iter_mut().enumerate() {
            for phase in 0..k {
                row[phase * width + j] = 1.0;
            }
        }
        stacked.then(&Network::affine(sum_rows, vec![0.0; width])?)
    };

    let read_merge = gated_addr(&|p: &PhaseSpec| p.read_addrs.clone(), n_r)?;
    let write_merge = gated_addr(&|p: &PhaseSpec| p.write_addrs.clone(), n_w)?;

    stage1.then(&Network::parallel(&[pass_gates, read_merge, write_merge])?)
}

/// Gate predicate helpers shared by the hand-built controllers.
pub(crate) fn channel_equals(width: usize, channel: usize, value: i64) -> Result<Network> {
    Network::select(width, &[channel])?.then(&Network::equals_const(value))
}

pub(crate) fn and2(a: Network, b: Network) -> Result<Network> {
    Network::parallel(&[a, b])?.then(&Network::min2())
}
