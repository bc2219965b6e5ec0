//! The array-minimum program: a linear scan in three phases.
//!
//! The controller reads (i, n, 0) and activates exactly one of three modules:
//! init copies a_1 into the minimum cell and advances the index, update
//! replaces the running minimum with min(m, a_i) and advances, stop writes
//! the halt marker and exposes the result. One compiled program handles every
//! array length the memory can hold.

use crate::error::{Error, Result};
use crate::machine::{Program, Trace};
use crate::memory::{MemoryConfig, MemoryState};
use crate::network::{GateBound, Network};
use crate::programs::{and2, channel_equals, phase_controller, PhaseSpec};

/// Reserved cells and the array region for the minimum program.
#[derive(Debug, Clone, PartialEq)]
pub struct MinLayout {
    pub capacity: usize,
    pub array_base: usize,
    pub array_capacity: usize,
    pub addr_zero: usize,
    pub addr_i: usize,
    pub addr_n: usize,
    pub addr_m: usize,
    pub addr_flag: usize,
    pub addr_out: usize,
    pub addr_scratch: usize,
}

impl MinLayout {
    /// Default layout: reserved cells at the front, array after them.
    pub fn with_capacity(capacity: usize) -> Result<Self> {
        let layout = MinLayout {
            capacity,
            array_base: 8,
            array_capacity: capacity.saturating_sub(8),
            addr_zero: 0,
            addr_i: 1,
            addr_n: 2,
            addr_m: 3,
            addr_flag: 4,
            addr_out: 5,
            addr_scratch: 6,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        let reserved = [
            self.addr_zero,
            self.addr_i,
            self.addr_n,
            self.addr_m,
            self.addr_flag,
            self.addr_out,
            self.addr_scratch,
        ];
        for (idx, &a) in reserved.iter().enumerate() {
            if reserved[..idx].contains(&a) {
                return Err(Error::Layout(format!("reserved address {a} duplicated")));
            }
            if a >= self.array_base && a < self.array_base + self.array_capacity {
                return Err(Error::Layout(format!(
                    "reserved address {a} overlaps the array region"
                )));
            }
            if a >= self.capacity {
                return Err(Error::Layout(format!("address {a} outside capacity")));
            }
        }
        if self.array_capacity == 0 {
            return Err(Error::Layout("no room for array cells".into()));
        }
        if self.array_base + self.array_capacity > self.capacity {
            return Err(Error::Layout("array region exceeds capacity".into()));
        }
        Ok(())
    }
}

/// Compiles the minimum program for the given layout.
pub fn compile(layout: &MinLayout) -> Result<Program> {
    layout.validate()?;
    let bound = GateBound::DEFAULT;
    let base = layout.array_base as f64;
    let (zero, i, m) = (
        layout.addr_zero as f64,
        layout.addr_i as f64,
        layout.addr_m as f64,
    );

    // gates over (i, n, 0)
    let g_init = channel_equals(3, 0, 1)?;
    // 2 <= i <= n, as indicator(i >= 2) AND indicator(n - i >= 0)
    let pre = Network::affine(vec![vec![1.0, 0.0, 0.0], vec![-1.0, 1.0, 0.0]], vec![0.0, 0.0])?;
    let ge2 = Network::select(2, &[0])?.then(&Network::indicator_ge(2))?;
    let le_n = Network::select(2, &[1])?.then(&Network::indicator_ge(0))?;
    let g_update = pre.then(&and2(ge2, le_n)?)?;
    // i = n + 1, as (i - n) = 1
    let g_stop = Network::affine(vec![vec![1.0, -1.0, 0.0]], vec![0.0])?
        .then(&Network::equals_const(1))?;

    let phases = [
        PhaseSpec {
            gate: g_init,
            read_addrs: Network::constant(3, &[base, i, zero])?,
            write_addrs: Network::constant(3, &[m, i])?,
        },
        PhaseSpec {
            gate: g_update,
            // (m, array_base + i - 1, i)
            read_addrs: Network::affine(
                vec![
                    vec![0.0, 0.0, 0.0],
                    vec![1.0, 0.0, 0.0],
                    vec![0.0, 0.0, 0.0],
                ],
                vec![m, base - 1.0, i],
            )?,
            write_addrs: Network::constant(3, &[m, i])?,
        },
        PhaseSpec {
            gate: g_stop,
            read_addrs: Network::constant(3, &[m, zero, zero])?,
            write_addrs: Network::constant(3, &[layout.addr_flag as f64, layout.addr_out as f64])?,
        },
    ];
    let controller = phase_controller(3, &phases, bound)?;

    // module cores, each (x1, x2, x3) -> 2 outputs
    let init_core = Network::affine(
        vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
        vec![0.0, 1.0],
    )?;
    let update_core = Network::parallel(&[
        Network::select(3, &[0, 1])?.then(&Network::min2())?,
        Network::affine(vec![vec![0.0, 0.0, 1.0]], vec![1.0])?,
    ])?;
    let stop_core = Network::affine(
        vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]],
        vec![-1.0, 0.0],
    )?;

    let program = Program {
        memory: MemoryConfig::new(layout.capacity),
        control_reads: vec![layout.addr_i, layout.addr_n, layout.addr_zero],
        controller,
        modules: vec![
            Network::gate_wrap(&init_core, bound),
            Network::gate_wrap(&update_core, bound),
            Network::gate_wrap(&stop_core, bound),
        ],
        read_heads: 3,
        write_heads: 2,
        halt_cell: layout.addr_flag,
        gate_bound: bound,
        control_reads_via_attention: false,
    };
    program.validate()?;
    Ok(program)
}

/// Builds the initial memory for one input array: array cells set, i = 1,
/// n = len, running flag 1, everything else 0.
pub fn load(layout: &MinLayout, array: &[f64]) -> Result<MemoryState> {
    if array.is_empty() || array.len() > layout.array_capacity {
        return Err(Error::Config(format!(
            "array length {} outside 1..={}",
            array.len(),
            layout.array_capacity
        )));
    }
    let mut memory = MemoryState::new(layout.capacity);
    for (offset, &v) in array.iter().enumerate() {
        memory.set(layout.array_base + offset, v)?;
    }
    memory.set(layout.addr_i, 1.0)?;
    memory.set(layout.addr_n, array.len() as f64)?;
    memory.set(layout.addr_flag, 1.0)?;
    Ok(memory)
}

/// Reads the result from a halted trace: the dedicated output cell, which the
/// stop module filled from the minimum cell.
pub fn extract(trace: &Trace, layout: &MinLayout) -> Result<f64> {
    if !trace.halted() {
        return Err(Error::NotHalted);
    }
    Ok(trace.final_memory[layout.addr_out])
}
