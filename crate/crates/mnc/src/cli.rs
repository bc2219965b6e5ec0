//! Command implementations behind the `mnc` binary: run, inspect, verify.
//!
//! Exit codes: 0 success, 2 parse/usage errors, 3 contract violations,
//! 4 non-termination, 5 verification mismatch, 1 anything else.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::format;
use crate::machine::{run, Program, RunOptions, Trace};
use crate::memory::MemoryConfig;
use crate::oracles;
use crate::programs::astar::{self, AStarLayout, GraphInstance};
use crate::programs::{min, sort};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CONTRACT: i32 = 3;
pub const EXIT_NON_TERMINATION: i32 = 4;
pub const EXIT_MISMATCH: i32 = 5;

/// Maps an error to the documented exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. }
        | Error::Config(_)
        | Error::Layout(_)
        | Error::Instance(_)
        | Error::NonFinite { .. } => EXIT_PARSE,
        Error::Contract { .. }
        | Error::BoundExceeded { .. }
        | Error::NonIntegralAddress { .. }
        | Error::TableConflict { .. }
        | Error::NonIntegerKey { .. } => EXIT_CONTRACT,
        Error::MaxSteps { .. } => EXIT_NON_TERMINATION,
        Error::VerifyMismatch(_) => EXIT_MISMATCH,
        _ => EXIT_ERROR,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProgramKind {
    Min,
    Sort,
    Astar,
}

impl ProgramKind {
    pub fn name(self) -> &'static str {
        match self {
            ProgramKind::Min => "min",
            ProgramKind::Sort => "sort",
            ProgramKind::Astar => "astar",
        }
    }
}

/// Where an A* instance comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceSource {
    /// The built-in seven-state instance.
    Canonical,
    File(PathBuf),
}

impl InstanceSource {
    pub fn from_arg(arg: &str) -> InstanceSource {
        if arg == "canonical" {
            InstanceSource::Canonical
        } else {
            InstanceSource::File(PathBuf::from(arg))
        }
    }

    pub fn load(&self) -> Result<GraphInstance> {
        match self {
            InstanceSource::Canonical => Ok(GraphInstance::canonical()),
            InstanceSource::File(path) => GraphInstance::parse(&std::fs::read_to_string(path)?),
        }
    }
}

/// Everything a `run` invocation needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub kind: ProgramKind,
    pub array: Option<Vec<f64>>,
    pub instance: Option<InstanceSource>,
    pub tau: Option<f64>,
    pub alpha: Option<f64>,
    pub capacity: Option<usize>,
    pub max_steps: usize,
    pub trace_path: Option<PathBuf>,
    pub snapshots: bool,
    pub check: bool,
    pub strict_addresses: bool,
}

impl RunConfig {
    pub fn new(kind: ProgramKind) -> RunConfig {
        RunConfig {
            kind,
            array: None,
            instance: None,
            tau: None,
            alpha: None,
            capacity: None,
            max_steps: 100_000,
            trace_path: None,
            snapshots: false,
            check: false,
            strict_addresses: false,
        }
    }

    fn run_options(&self) -> RunOptions {
        RunOptions {
            max_steps: self.max_steps,
            check: self.check,
            strict_addresses: self.strict_addresses,
            snapshots: self.snapshots,
        }
    }

    fn memory_config(&self, capacity: usize) -> Result<MemoryConfig> {
        let defaults = MemoryConfig::new(capacity);
        MemoryConfig::with(
            capacity,
            self.tau.unwrap_or(defaults.tau),
            self.alpha.unwrap_or(defaults.alpha),
        )
    }
}

/// Parses a comma-separated array literal.
pub fn parse_array(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|item| {
            let item = item.trim();
            item.parse::<f64>().map_err(|_| Error::Parse {
                line: 1,
                msg: format!("bad array element {item:?}"),
            })
        })
        .collect()
}

fn write_trace_file(trace: &Trace, path: &Path) -> Result<()> {
    std::fs::write(path, format::write_trace(trace))?;
    Ok(())
}

fn require_array(config: &RunConfig) -> Result<&Vec<f64>> {
    config.array.as_ref().ok_or(Error::Config(
        "this program needs --array <v1,v2,...>".into(),
    ))
}

fn format_value(x: f64) -> String {
    format!("{x}")
}

/// Compiles, loads and runs the selected program; prints the result and step
/// count; optionally writes the trace file.
pub fn cmd_run(config: &RunConfig, out: &mut dyn std::io::Write) -> Result<()> {
    let opts = config.run_options();
    match config.kind {
        ProgramKind::Min => {
            let array = require_array(config)?;
            let layout = min::MinLayout::with_capacity(config.capacity.unwrap_or(64))?;
            let mut program = min::compile(&layout)?;
            program.memory = config.memory_config(layout.capacity)?;
            let memory = min::load(&layout, array)?;
            let trace = run(&program, memory, &opts)?;
            let result = min::extract(&trace, &layout)?;
            writeln!(out, "min = {}, steps = {}", format_value(result), trace.steps.len())?;
            if let Some(path) = &config.trace_path {
                write_trace_file(&trace, path)?;
            }
        }
        ProgramKind::Sort => {
            let array = require_array(config)?;
            let layout = sort::SortLayout::with_capacity(config.capacity.unwrap_or(64))?;
            let mut program = sort::compile(&layout)?;
            program.memory = config.memory_config(layout.capacity)?;
            let memory = sort::load(&layout, array)?;
            let trace = run(&program, memory, &opts)?;
            let sorted = sort::extract(&trace, &layout, array.len())?;
            let rendered: Vec<String> = sorted.iter().map(|&x| format_value(x)).collect();
            writeln!(out, "sorted = {}", rendered.join(","))?;
            writeln!(out, "steps = {}", trace.steps.len())?;
            if let Some(path) = &config.trace_path {
                write_trace_file(&trace, path)?;
            }
        }
        ProgramKind::Astar => {
            let source = config
                .instance
                .clone()
                .unwrap_or(InstanceSource::Canonical);
            let instance = source.load()?;
            let layout = AStarLayout::for_instance(&instance, config.capacity.unwrap_or(256))?;
            let mut program = astar::compile(&instance, &layout)?;
            program.memory = config.memory_config(layout.capacity)?;
            let memory = astar::init_memory(&instance, &layout)?;
            let trace = run(&program, memory, &opts)?;
            match astar::extract_path(&trace.final_memory, &layout)? {
                Some(path) => {
                    let names: Vec<&str> = path
                        .iter()
                        .map(|n| instance.names[n.state].as_str())
                        .collect();
                    writeln!(
                        out,
                        "path = {}, cost = {}",
                        names.join("\u{2192}"),
                        format_value(path.last().map_or(0.0, |n| n.g))
                    )?;
                }
                None => writeln!(out, "no path")?,
            }
            writeln!(out, "steps = {}", trace.steps.len())?;
            if let Some(path) = &config.trace_path {
                write_trace_file(&trace, path)?;
            }
        }
    }
    Ok(())
}

fn describe_network(label: &str, net: &crate::network::Network, out: &mut dyn std::io::Write) -> Result<()> {
    let shapes: Vec<String> = net
        .layers()
        .iter()
        .map(|l| format!("{}x{} {}", l.rows(), l.cols(), l.activation.name()))
        .collect();
    writeln!(
        out,
        "{label}: {} -> {}, layers [{}]",
        net.input_dim(),
        net.output_dim(),
        shapes.join(", ")
    )?;
    Ok(())
}

fn inspect_common(program: &Program, out: &mut dyn std::io::Write) -> Result<()> {
    writeln!(out, "modules = {}", program.module_count())?;
    writeln!(out, "read_heads = {}", program.read_heads)?;
    writeln!(out, "write_heads = {}", program.write_heads)?;
    writeln!(out, "capacity = {}", program.memory.capacity)?;
    writeln!(out, "gate_bound = {}", program.gate_bound.value())?;
    describe_network("controller", &program.controller, out)?;
    Ok(())
}

/// Prints compiled-network statistics and the memory layout map. With
/// `dump_networks`, serializes every network in full.
pub fn cmd_inspect(
    kind: ProgramKind,
    capacity: Option<usize>,
    dump_networks: bool,
    out: &mut dyn std::io::Write,
) -> Result<()> {
    writeln!(out, "program {}", kind.name())?;
    match kind {
        ProgramKind::Min => {
            let layout = min::MinLayout::with_capacity(capacity.unwrap_or(64))?;
            let program = min::compile(&layout)?;
            inspect_common(&program, out)?;
            for (idx, name) in ["init", "update", "stop"].iter().enumerate() {
                describe_network(&format!("module {name}"), &program.modules[idx], out)?;
            }
            writeln!(
                out,
                "layout: zero={} i={} n={} m={} flag={} out={} scratch={} array={}..{}",
                layout.addr_zero,
                layout.addr_i,
                layout.addr_n,
                layout.addr_m,
                layout.addr_flag,
                layout.addr_out,
                layout.addr_scratch,
                layout.array_base,
                layout.array_base + layout.array_capacity - 1
            )?;
            if dump_networks {
                write!(out, "{}", format::write_network(&program.controller))?;
                for m in &program.modules {
                    write!(out, "{}", format::write_network(m))?;
                }
            }
        }
        ProgramKind::Sort => {
            let layout = sort::SortLayout::with_capacity(capacity.unwrap_or(64))?;
            let program = sort::compile(&layout)?;
            inspect_common(&program, out)?;
            for (idx, name) in ["process", "next", "stop"].iter().enumerate() {
                describe_network(&format!("module {name}"), &program.modules[idx], out)?;
            }
            writeln!(
                out,
                "layout: zero={} i={} p={} n={} flag={} scratch={} array={}..{}",
                layout.addr_zero,
                layout.addr_i,
                layout.addr_p,
                layout.addr_n,
                layout.addr_flag,
                layout.addr_scratch,
                layout.array_base,
                layout.array_base + layout.array_capacity - 1
            )?;
            if dump_networks {
                write!(out, "{}", format::write_network(&program.controller))?;
                for m in &program.modules {
                    write!(out, "{}", format::write_network(m))?;
                }
            }
        }
        ProgramKind::Astar => {
            let instance = GraphInstance::canonical();
            let layout = AStarLayout::for_instance(&instance, capacity.unwrap_or(256))?;
            let compiled =
                astar::compile_with_heads(&instance, &layout, astar::READ_HEADS, astar::WRITE_HEADS)?;
            inspect_common(&compiled.program, out)?;
            writeln!(out, "controller table entries = {}", compiled.controller_entries)?;
            for (phase, entries) in &compiled.module_entries {
                let idx = phase.index();
                writeln!(out, "module {} table entries = {entries}", phase.name())?;
                describe_network(
                    &format!("module {}", phase.name()),
                    &compiled.program.modules[idx],
                    out,
                )?;
            }
            writeln!(
                out,
                "layout: control=0..{} problem={}+{}*state node={}+{}*record max_records={}",
                layout.addr_scratch,
                layout.problem_base,
                layout.problem_stride,
                layout.node_base,
                layout.node_stride,
                layout.max_records
            )?;
            if dump_networks {
                write!(out, "{}", format::write_network(&compiled.program.controller))?;
                for m in &compiled.program.modules {
                    write!(out, "{}", format::write_network(m))?;
                }
            }
        }
    }
    Ok(())
}

fn checked_options() -> RunOptions {
    RunOptions {
        check: true,
        strict_addresses: true,
        snapshots: false,
        ..RunOptions::default()
    }
}

/// Random non-integer double in [-1e6, 1e6] on the 1/64 grid, inside the
/// exactness domain of the comparison networks (their internal sums round
/// exactly for dyadic values of bounded magnitude).
fn dyadic(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-64_000_000i64..=64_000_000) as f64 / 64.0
}

/// Differential verification of a compiled program against its oracle on
/// random instances. Returns a mismatch error naming the failing input.
pub fn cmd_verify(
    kind: ProgramKind,
    seed: u64,
    count: usize,
    out: &mut dyn std::io::Write,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        ProgramKind::Min => {
            let layout = min::MinLayout::with_capacity(64)?;
            let program = min::compile(&layout)?;
            for case in 0..count {
                let n = rng.gen_range(1..=32);
                let array: Vec<f64> = if case % 5 == 4 {
                    (0..n).map(|_| dyadic(&mut rng)).collect()
                } else {
                    (0..n).map(|_| rng.gen_range(-100..=100) as f64).collect()
                };
                let memory = min::load(&layout, &array)?;
                let trace = run(&program, memory, &checked_options())?;
                let got = min::extract(&trace, &layout)?;
                let expected = oracles::min(&array)?;
                if got != expected || trace.steps.len() != n + 1 {
                    return Err(Error::VerifyMismatch(format!(
                        "min on {array:?}: got {got} in {} steps, oracle {expected} in {} steps",
                        trace.steps.len(),
                        n + 1
                    )));
                }
            }
            writeln!(out, "verify min: {count}/{count} exact matches, step counts n+1")?;
        }
        ProgramKind::Sort => {
            let layout = sort::SortLayout::with_capacity(64)?;
            let program = sort::compile(&layout)?;
            for case in 0..count {
                let n = rng.gen_range(1..=16);
                let array: Vec<f64> = if case % 5 == 4 {
                    (0..n).map(|_| dyadic(&mut rng)).collect()
                } else {
                    (0..n).map(|_| rng.gen_range(-100..=100) as f64).collect()
                };
                let memory = sort::load(&layout, &array)?;
                let trace = run(&program, memory, &checked_options())?;
                let got = sort::extract(&trace, &layout, n)?;
                let (expected, _) = oracles::sort(&array)?;
                if got != expected || trace.steps.len() != n * (n + 1) / 2 {
                    return Err(Error::VerifyMismatch(format!(
                        "sort on {array:?}: got {got:?} in {} steps",
                        trace.steps.len()
                    )));
                }
            }
            writeln!(
                out,
                "verify sort: {count}/{count} exact matches, step counts n(n+1)/2"
            )?;
        }
        ProgramKind::Astar => {
            let instances = [
                ("canonical", GraphInstance::canonical()),
                ("unreachable-goal", GraphInstance::canonical_unreachable_goal()),
                ("dead-end", GraphInstance::dead_end_instance()),
                ("start-is-goal", {
                    let mut i = GraphInstance::canonical();
                    i.goal = i.start;
                    i
                }),
            ];
            for (name, instance) in &instances {
                let layout = AStarLayout::for_instance(instance, 256)?;
                let compiled = astar::compile_with_heads(
                    instance,
                    &layout,
                    astar::READ_HEADS,
                    astar::WRITE_HEADS,
                )?;
                let memory = astar::init_memory(instance, &layout)?;
                let trace = run(&compiled.program, memory, &checked_options())?;
                // trace equivalence, field for field
                if trace.steps.len() != compiled.steps.len() {
                    return Err(Error::VerifyMismatch(format!(
                        "{name}: machine ran {} steps, phase machine {}",
                        trace.steps.len(),
                        compiled.steps.len()
                    )));
                }
                for (machine, symbolic) in trace.steps.iter().zip(&compiled.steps) {
                    let same = machine.control == symbolic.control
                        && machine.gates == symbolic.gates
                        && machine.read_addrs == symbolic.read_addrs
                        && machine.read_values == symbolic.read_values
                        && machine.outputs == symbolic.outputs
                        && machine.write_addrs == symbolic.write_addrs;
                    if !same {
                        return Err(Error::VerifyMismatch(format!(
                            "{name}: first divergence at step {}",
                            machine.step
                        )));
                    }
                }
                // final answer against the oracle
                let oracle = oracles::astar(instance, layout.max_records)?;
                let path = astar::extract_path(&trace.final_memory, &layout)?;
                match (&oracle.path, &path) {
                    (None, None) => {}
                    (Some((states, cost)), Some(nodes)) => {
                        let got: Vec<usize> = nodes.iter().map(|n| n.state).collect();
                        if &got != states || nodes.last().map(|n| n.g) != Some(*cost) {
                            return Err(Error::VerifyMismatch(format!(
                                "{name}: path {got:?} differs from oracle {states:?}"
                            )));
                        }
                    }
                    (a, b) => {
                        return Err(Error::VerifyMismatch(format!(
                            "{name}: oracle path {a:?} vs machine {b:?}"
                        )));
                    }
                }
            }
            writeln!(
                out,
                "verify astar: trace equivalence and oracle agreement on {} instances",
                instances.len()
            )?;
        }
    }
    Ok(())
}
