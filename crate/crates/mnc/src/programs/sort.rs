//! The in-place sort program: a pass-based adjacent sort driven by the pair
//! index i and the pass limit p.
//!
//! Three phases: pair processing rewrites (a_i, a_{i+1}) in nondecreasing
//! order and advances i; the pass transition contracts p and resets i; stop
//! writes the halt marker. Three write heads let one step rewrite both array
//! cells and a control cell at once; steps that need fewer writes send
//! neutral zeros to a scratch cell.

use crate::error::{Error, Result};
use crate::machine::{Program, Trace};
use crate::memory::{MemoryConfig, MemoryState};
use crate::network::{GateBound, Network};
use crate::programs::{and2, channel_equals, phase_controller, PhaseSpec};

/// Reserved cells and the array region for the sort program.
#[derive(Debug, Clone, PartialEq)]
pub struct SortLayout {
    pub capacity: usize,
    pub array_base: usize,
    pub array_capacity: usize,
    pub addr_zero: usize,
    pub addr_i: usize,
    pub addr_p: usize,
    pub addr_n: usize,
    pub addr_flag: usize,
    pub addr_scratch: usize,
}

impl SortLayout {
    pub fn with_capacity(capacity: usize) -> Result<Self> {
        let layout = SortLayout {
            capacity,
            array_base: 8,
            array_capacity: capacity.saturating_sub(8),
            addr_zero: 0,
            addr_i: 1,
            addr_p: 2,
            addr_n: 3,
            addr_flag: 4,
            addr_scratch: 5,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        let reserved = [
            self.addr_zero,
            self.addr_i,
            self.addr_p,
            self.addr_n,
            self.addr_flag,
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

/// Compiles the sort program for the given layout.
pub fn compile(layout: &SortLayout) -> Result<Program> {
    layout.validate()?;
    let bound = GateBound::DEFAULT;
    let base = layout.array_base as f64;
    let (zero, i, p, scratch, flag) = (
        layout.addr_zero as f64,
        layout.addr_i as f64,
        layout.addr_p as f64,
        layout.addr_scratch as f64,
        layout.addr_flag as f64,
    );

    // gates over (i, p, 0)
    // g_process: i < p, as p - i >= 1
    let g_process = Network::affine(vec![vec![-1.0, 1.0, 0.0]], vec![0.0])?
        .then(&Network::indicator_ge(1))?;
    // g_next: i = p and p > 1
    let diff_and_p = Network::affine(
        vec![vec![1.0, -1.0, 0.0], vec![0.0, 1.0, 0.0]],
        vec![0.0, 0.0],
    )?;
    let eq = Network::select(2, &[0])?.then(&Network::equals_const(0))?;
    let ge2 = Network::select(2, &[1])?.then(&Network::indicator_ge(2))?;
    let g_next = diff_and_p.then(&and2(eq, ge2)?)?;
    // g_stop: i = p = 1
    let g_stop = and2(channel_equals(3, 0, 1)?, channel_equals(3, 1, 1)?)?;

    // phase-dependent addresses as affine maps of (i, p, 0)
    let pair_addrs = Network::affine(
        vec![
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ],
        vec![base - 1.0, base, i],
    )?;
    let phases = [
        PhaseSpec {
            gate: g_process,
            read_addrs: pair_addrs.clone(),
            write_addrs: pair_addrs,
        },
        PhaseSpec {
            gate: g_next,
            read_addrs: Network::constant(3, &[p, zero, zero])?,
            write_addrs: Network::constant(3, &[p, i, scratch])?,
        },
        PhaseSpec {
            gate: g_stop,
            read_addrs: Network::constant(3, &[zero, zero, zero])?,
            write_addrs: Network::constant(3, &[flag, scratch, scratch])?,
        },
    ];
    let controller = phase_controller(3, &phases, bound)?;

    // module cores, each (x1, x2, x3) -> 3 outputs
    let pair_core = Network::parallel(&[
        Network::select(3, &[0, 1])?.then(&Network::min2())?,
        Network::select(3, &[0, 1])?.then(&Network::max2())?,
        Network::affine(vec![vec![0.0, 0.0, 1.0]], vec![1.0])?,
    ])?;
    let next_core = Network::affine(
        vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ],
        vec![-1.0, 1.0, 0.0],
    )?;
    let stop_core = Network::constant(3, &[-1.0, 0.0, 0.0])?;

    let program = Program {
        memory: MemoryConfig::new(layout.capacity),
        control_reads: vec![layout.addr_i, layout.addr_p, layout.addr_zero],
        controller,
        modules: vec![
            Network::gate_wrap(&pair_core, bound),
            Network::gate_wrap(&next_core, bound),
            Network::gate_wrap(&stop_core, bound),
        ],
        read_heads: 3,
        write_heads: 3,
        halt_cell: layout.addr_flag,
        gate_bound: bound,
        control_reads_via_attention: false,
    };
    program.validate()?;
    Ok(program)
}

/// Initial memory for one input array: array cells set, i = 1, p = n, the
/// length stored, running flag 1.
pub fn load(layout: &SortLayout, array: &[f64]) -> Result<MemoryState> {
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
    memory.set(layout.addr_p, array.len() as f64)?;
    memory.set(layout.addr_n, array.len() as f64)?;
    memory.set(layout.addr_flag, 1.0)?;
    Ok(memory)
}

/// The sorted output is the array region itself.
pub fn extract(trace: &Trace, layout: &SortLayout, n: usize) -> Result<Vec<f64>> {
    if !trace.halted() {
        return Err(Error::NotHalted);
    }
    Ok(trace.final_memory[layout.array_base..layout.array_base + n].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{run, RunOptions};
    use crate::oracles;

    fn checked() -> RunOptions {
        RunOptions {
            check: true,
            strict_addresses: true,
            snapshots: true,
            ..RunOptions::default()
        }
    }

    fn run_sort(array: &[f64]) -> (Trace, SortLayout) {
        let layout = SortLayout::with_capacity(64).unwrap();
        let program = compile(&layout).unwrap();
        let memory = load(&layout, array).unwrap();
        let trace = run(&program, memory, &checked()).unwrap();
        (trace, layout)
    }

    #[test]
    fn controller_gates_follow_the_pass_schedule() {
        let layout = SortLayout::with_capacity(64).unwrap();
        let program = compile(&layout).unwrap();
        assert_eq!(&program.controller.eval(&[2.0, 4.0, 0.0]).unwrap()[..3], &[1.0, 0.0, 0.0]);
        assert_eq!(&program.controller.eval(&[4.0, 4.0, 0.0]).unwrap()[..3], &[0.0, 1.0, 0.0]);
        assert_eq!(&program.controller.eval(&[1.0, 1.0, 0.0]).unwrap()[..3], &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn pass_transition_writes_decrement_and_reset() {
        // at i = p = 3 the transition writes p <- 2 and i <- 1
        let (trace, layout) = run_sort(&[3.0, 1.0, 2.0]);
        let transition = trace
            .steps
            .iter()
            .find(|s| s.gates[1] == 1.0)
            .expect("a pass transition occurs");
        assert_eq!(transition.control[..2], [3.0, 3.0]);
        assert_eq!(
            transition.write_addrs,
            vec![
                layout.addr_p as f64,
                layout.addr_i as f64,
                layout.addr_scratch as f64
            ]
        );
        assert_eq!(transition.outputs, vec![2.0, 1.0, 0.0]);
    }

    #[test]
    fn sorts_and_halts_in_triangular_steps() {
        let (trace, layout) = run_sort(&[3.0, 1.0, 2.0]);
        assert_eq!(trace.steps.len(), 6);
        assert_eq!(extract(&trace, &layout, 3).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn already_sorted_array_is_untouched() {
        let (trace, layout) = run_sort(&[1.0, 2.0, 3.0]);
        assert_eq!(extract(&trace, &layout, 3).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_elements_take_three_steps() {
        let (trace, layout) = run_sort(&[2.0, 1.0]);
        assert_eq!(trace.steps.len(), 3);
        assert_eq!(extract(&trace, &layout, 2).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn length_one_halts_immediately() {
        let (trace, layout) = run_sort(&[5.0]);
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(extract(&trace, &layout, 1).unwrap(), vec![5.0]);
    }

    #[test]
    fn matches_oracle_at_step_granularity() {
        let array = [4.0, -1.0, 3.5, 0.0, -7.25];
        let (trace, layout) = run_sort(&array);
        let (_, oracle_trace) = oracles::sort(&array).unwrap();
        assert_eq!(trace.steps.len(), oracle_trace.snapshots.len());
        for (record, (snapshot, &(i, p))) in trace
            .steps
            .iter()
            .zip(oracle_trace.snapshots.iter().zip(&oracle_trace.control))
        {
            let memory = record.memory_after.as_ref().unwrap();
            let array_now = &memory[layout.array_base..layout.array_base + array.len()];
            assert_eq!(array_now, snapshot.as_slice(), "step {}", record.step);
            assert_eq!(memory[layout.addr_i], i as f64);
            assert_eq!(memory[layout.addr_p], p as f64);
        }
    }

    #[test]
    fn multiset_preserved_at_every_step() {
        let array = [2.0, 2.0, -5.0, 9.0, 0.5, 0.5];
        let (trace, layout) = run_sort(&array);
        let mut expected = array.to_vec();
        expected.sort_by(|a, b| a.total_cmp(b));
        for record in &trace.steps {
            let memory = record.memory_after.as_ref().unwrap();
            let mut now = memory[layout.array_base..layout.array_base + array.len()].to_vec();
            now.sort_by(|a, b| a.total_cmp(b));
            assert_eq!(now, expected, "step {}", record.step);
        }
    }

    #[test]
    fn pass_invariant_max_settles_at_pass_limit() {
        let array = [8.0, 3.0, 9.0, 1.0, 7.0];
        let (trace, layout) = run_sort(&array);
        for record in &trace.steps {
            if record.gates[1] == 1.0 {
                // a pass with limit p just completed; the step's writes only
                // touch control cells, so read the array from its snapshot
                let p = record.control[1] as usize;
                let memory = record.memory_after.as_ref().unwrap();
                let prefix = &memory[layout.array_base..layout.array_base + p];
                let max = prefix.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                assert_eq!(prefix[p - 1], max, "pass limit {p}");
            }
        }
    }

    #[test]
    fn load_rejects_bad_lengths() {
        let layout = SortLayout::with_capacity(16).unwrap();
        assert!(load(&layout, &[]).is_err());
        assert!(load(&layout, &vec![0.0; layout.array_capacity + 1]).is_err());
    }

    #[test]
    fn load_sets_pair_index_and_pass_limit() {
        let layout = SortLayout::with_capacity(16).unwrap();
        let memory = load(&layout, &[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(memory.get(layout.addr_i).unwrap(), 1.0);
        assert_eq!(memory.get(layout.addr_p).unwrap(), 3.0);
        assert_eq!(memory.get(layout.addr_n).unwrap(), 3.0);
        assert_eq!(memory.get(layout.addr_flag).unwrap(), 1.0);
        // a length-1 array starts at i = p = 1, the stop condition
        let memory = load(&layout, &[9.0]).unwrap();
        assert_eq!(memory.get(layout.addr_i).unwrap(), 1.0);
        assert_eq!(memory.get(layout.addr_p).unwrap(), 1.0);
    }

    #[test]
    fn random_arrays_match_oracle() {
        use rand::{Rng, SeedableRng};
        let layout = SortLayout::with_capacity(40).unwrap();
        let program = compile(&layout).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let n = rng.gen_range(1..=12);
            let array: Vec<f64> = (0..n).map(|_| rng.gen_range(-100..=100) as f64).collect();
            let memory = load(&layout, &array).unwrap();
            let trace = run(&program, memory, &checked()).unwrap();
            let (expected, _) = oracles::sort(&array).unwrap();
            assert_eq!(extract(&trace, &layout, n).unwrap(), expected);
            assert_eq!(trace.steps.len(), n * (n + 1) / 2);
        }
    }
}
