//! The execution engine: one fixed computational graph applied step after
//! step over a memory state.
//!
//! Per step: the control values are fetched from fixed addresses, the
//! controller emits a one-hot gate vector plus read and write addresses, the
//! functional reads are broadcast to all modules, every module is evaluated
//! (inactive ones return exactly zero through their internal gating), the
//! outputs are merged by componentwise addition and written back. The run
//! halts when the designated flag cell goes negative.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::memory::{MemoryConfig, MemoryState};
use crate::network::{GateBound, Network};

/// A compiled program: memory shape, controller, and gated modules.
#[derive(Debug, Clone)]
pub struct Program {
    pub memory: MemoryConfig,
    /// Fixed integer addresses supplying the controller input.
    pub control_reads: Vec<usize>,
    /// Maps the control input to `gates ++ read_addrs ++ write_addrs`.
    pub controller: Network,
    /// K gated modules, each `(gate, reads) -> writes`.
    pub modules: Vec<Network>,
    pub read_heads: usize,
    pub write_heads: usize,
    /// Cell whose negative value signals halting.
    pub halt_cell: usize,
    pub gate_bound: GateBound,
    /// Route control reads through softmax attention instead of direct cell
    /// access. At the default temperature and integer addresses the two are
    /// bitwise identical.
    pub control_reads_via_attention: bool,
}

impl Program {
    pub fn module_count(&self) -> usize {
        self.modules.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.memory.validate()?;
        let k = self.modules.len();
        if k == 0 {
            return Err(Error::Config("program needs at least one module".into()));
        }
        if self.controller.input_dim() != self.control_reads.len() {
            return Err(Error::Shape(format!(
                "controller takes {} inputs but {} control reads are configured",
                self.controller.input_dim(),
                self.control_reads.len()
            )));
        }
        let expected = k + self.read_heads + self.write_heads;
        if self.controller.output_dim() != expected {
            return Err(Error::Shape(format!(
                "controller emits {} outputs, expected {} (gates + reads + writes)",
                self.controller.output_dim(),
                expected
            )));
        }
        for (i, m) in self.modules.iter().enumerate() {
            if m.input_dim() != 1 + self.read_heads {
                return Err(Error::Shape(format!(
                    "module {i} takes {} inputs, expected {}",
                    m.input_dim(),
                    1 + self.read_heads
                )));
            }
            if m.output_dim() != self.write_heads {
                return Err(Error::Shape(format!(
                    "module {i} emits {} outputs, expected {}",
                    m.output_dim(),
                    self.write_heads
                )));
            }
        }
        for &a in self.control_reads.iter().chain(Some(&self.halt_cell)) {
            if a >= self.memory.capacity {
                return Err(Error::AddressOutOfRange {
                    q: a as f64,
                    capacity: self.memory.capacity,
                });
            }
        }
        Ok(())
    }
}

/// Everything observable about one execution step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub control: Vec<f64>,
    pub gates: Vec<f64>,
    pub read_addrs: Vec<f64>,
    pub read_values: Vec<f64>,
    /// Raw outputs of every module, active or not.
    pub module_outputs: Vec<Vec<f64>>,
    /// Componentwise sum of the module outputs; these are the written values.
    pub outputs: Vec<f64>,
    pub write_addrs: Vec<f64>,
    pub halted_after: bool,
    /// Memory after the step, when snapshots are enabled.
    pub memory_after: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Halted,
    MaxStepsExceeded,
}

/// The inspectable run artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub steps: Vec<StepRecord>,
    pub final_memory: Vec<f64>,
    pub status: Termination,
}

impl Trace {
    pub fn halted(&self) -> bool {
        self.status == Termination::Halted
    }
}

/// A violated step contract, reported by [`check_step`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    GateNotBinary { module: usize, value: f64 },
    GateSumNotOne { sum: f64 },
    InactiveModuleOutput { module: usize, head: usize, value: f64 },
    MergeMismatch { head: usize, recorded: f64, recomputed: f64 },
    FrameViolation { cell: usize, before: f64, after: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::GateNotBinary { module, value } => {
                write!(f, "gate {module} is {value}, not 0 or 1")
            }
            Violation::GateSumNotOne { sum } => write!(f, "gate vector sums to {sum}"),
            Violation::InactiveModuleOutput { module, head, value } => {
                write!(f, "inactive module {module} wrote {value} on head {head}")
            }
            Violation::MergeMismatch { head, recorded, recomputed } => {
                write!(f, "merge mismatch on head {head}: {recorded} vs {recomputed}")
            }
            Violation::FrameViolation { cell, before, after } => {
                write!(f, "unaddressed cell {cell} changed from {before} to {after}")
            }
        }
    }
}

const GATE_TOLERANCE: f64 = 1e-9;

/// Pure validation of one recorded step: one-hot gates, internal inhibition
/// of inactive modules, and the additive merge law.
pub fn check_step(record: &StepRecord) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut sum = 0.0;
    for (k, &g) in record.gates.iter().enumerate() {
        sum += g;
        if g.abs() > GATE_TOLERANCE && (g - 1.0).abs() > GATE_TOLERANCE {
            violations.push(Violation::GateNotBinary { module: k, value: g });
        }
    }
    if (sum - 1.0).abs() > GATE_TOLERANCE {
        violations.push(Violation::GateSumNotOne { sum });
    }
    for (k, outputs) in record.module_outputs.iter().enumerate() {
        if record.gates[k] == 0.0 {
            for (head, &u) in outputs.iter().enumerate() {
                if u != 0.0 {
                    violations.push(Violation::InactiveModuleOutput {
                        module: k,
                        head,
                        value: u,
                    });
                }
            }
        }
    }
    for head in 0..record.outputs.len() {
        let mut acc = 0.0;
        for outputs in &record.module_outputs {
            acc += outputs[head];
        }
        if acc.to_bits() != record.outputs[head].to_bits() {
            violations.push(Violation::MergeMismatch {
                head,
                recorded: record.outputs[head],
                recomputed: acc,
            });
        }
    }
    violations
}

/// Options controlling a run.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub max_steps: usize,
    /// Validate gate, inhibition and frame contracts at every step.
    pub check: bool,
    /// Fail if the controller emits a non-integral address.
    pub strict_addresses: bool,
    /// Record the memory after every step.
    pub snapshots: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_steps: 100_000,
            check: false,
            strict_addresses: false,
            snapshots: false,
        }
    }
}

const STRICT_ADDRESS_TOLERANCE: f64 = 1e-9;

/// Executes one step of the fixed graph against the memory.
pub fn step(
    program: &Program,
    memory: &mut MemoryState,
    step_index: usize,
    opts: &RunOptions,
) -> Result<StepRecord> {
    let cfg = &program.memory;
    let frame_before: Option<Vec<f64>> = if opts.check {
        Some(memory.as_slice().to_vec())
    } else {
        None
    };

    // 1. control input from the dedicated control-read interface
    let control: Vec<f64> = if program.control_reads_via_attention {
        program
            .control_reads
            .iter()
            .map(|&a| memory.read(a as f64, cfg))
            .collect::<Result<_>>()?
    } else {
        program
            .control_reads
            .iter()
            .map(|&a| memory.get(a))
            .collect::<Result<_>>()?
    };

    // 2. controller pass: gates, read addresses, write addresses
    let out = program.controller.eval(&control)?;
    let k = program.modules.len();
    let gates = out[..k].to_vec();
    let read_addrs = out[k..k + program.read_heads].to_vec();
    let write_addrs = out[k + program.read_heads..].to_vec();
    if opts.strict_addresses {
        for &a in read_addrs.iter().chain(&write_addrs) {
            if (a - a.round()).abs() > STRICT_ADDRESS_TOLERANCE {
                return Err(Error::NonIntegralAddress {
                    step: step_index,
                    addr: a,
                });
            }
        }
    }

    // 3. functional reads, broadcast to all modules
    let read_values: Vec<f64> = read_addrs
        .iter()
        .map(|&q| memory.read(q, cfg))
        .collect::<Result<_>>()?;

    // 4. evaluate every module on (gate, reads)
    let mut module_inputs = Vec::with_capacity(1 + read_values.len());
    let mut module_outputs = Vec::with_capacity(k);
    for (m, module) in program.modules.iter().enumerate() {
        module_inputs.clear();
        module_inputs.push(gates[m]);
        module_inputs.extend_from_slice(&read_values);
        module_outputs.push(module.eval(&module_inputs)?);
    }

    // 5. additive merge
    let mut outputs = vec![0.0; program.write_heads];
    for u in &module_outputs {
        for (y, &v) in outputs.iter_mut().zip(u) {
            *y += v;
        }
    }
    let bound = program.gate_bound.value();
    for (head, &y) in outputs.iter().enumerate() {
        if y.abs() > bound {
            return Err(Error::BoundExceeded {
                step: step_index,
                head,
                value: y,
                bound,
            });
        }
    }

    let mut record = StepRecord {
        step: step_index,
        control,
        gates,
        read_addrs,
        read_values,
        module_outputs,
        outputs,
        write_addrs,
        halted_after: false,
        memory_after: None,
    };

    if opts.check {
        let violations = check_step(&record);
        if !violations.is_empty() {
            return Err(Error::Contract {
                step: step_index,
                violations,
            });
        }
    }

    // 6. writes, in ascending head order
    for (head, &q) in record.write_addrs.iter().enumerate() {
        memory.write(q, record.outputs[head], cfg)?;
    }

    // 7. frame property: cells outside the write set are bitwise unchanged
    if let Some(before) = frame_before {
        let integral = record.write_addrs.iter().all(|a| a.fract() == 0.0);
        if integral {
            let written: BTreeSet<usize> =
                record.write_addrs.iter().map(|&a| a as usize).collect();
            let mut violations = Vec::new();
            for (cell, (&b, &a)) in before.iter().zip(memory.as_slice()).enumerate() {
                if !written.contains(&cell) && b.to_bits() != a.to_bits() {
                    violations.push(Violation::FrameViolation {
                        cell,
                        before: b,
                        after: a,
                    });
                }
            }
            if !violations.is_empty() {
                return Err(Error::Contract {
                    step: step_index,
                    violations,
                });
            }
        }
    }

    record.halted_after = memory.get(program.halt_cell)? < 0.0;
    if opts.snapshots {
        record.memory_after = Some(memory.as_slice().to_vec());
    }
    Ok(record)
}

/// Runs the program until the halt cell goes negative, reusing the same
/// computational graph every step. A memory that is already halted is not
/// stepped. Exceeding `max_steps` is an error carrying the partial trace.
pub fn run(program: &Program, memory: MemoryState, opts: &RunOptions) -> Result<Trace> {
    program.validate()?;
    if opts.max_steps == 0 {
        return Err(Error::Config("max_steps must be at least 1".into()));
    }
    if memory.len() != program.memory.capacity {
        return Err(Error::Shape(format!(
            "memory has {} cells, program expects {}",
            memory.len(),
            program.memory.capacity
        )));
    }
    let mut memory = memory;
    let mut steps = Vec::new();
    loop {
        if memory.get(program.halt_cell)? < 0.0 {
            return Ok(Trace {
                steps,
                final_memory: memory.into_values(),
                status: Termination::Halted,
            });
        }
        if steps.len() == opts.max_steps {
            return Err(Error::MaxSteps {
                max_steps: opts.max_steps,
                trace: Box::new(Trace {
                    steps,
                    final_memory: memory.into_values(),
                    status: Termination::MaxStepsExceeded,
                }),
            });
        }
        let record = step(program, &mut memory, steps.len(), opts)?;
        steps.push(record);
    }
}
