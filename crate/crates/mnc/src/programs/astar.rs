//! The A* program for a fixed problem instance.
//!
//! Memory is organized into three regions: the immutable problem description
//! (per state: id, heuristic, out-degree, up to two successor/cost pairs),
//! the dynamic control state, and the generated search-node records (state,
//! parent, action, G, H, F, open flag, validity flag), one fixed-width block
//! per node with gap cells between blocks.
//!
//! Compilation is trace-driven: a symbolic phase machine executes the
//! unoptimized search (no closed list, no duplicate suppression) at exactly
//! the step granularity of the six modules, recording every controller input,
//! gate, address, read and write. Those records are compiled into exact table
//! networks, with a conflict check that rejects any input tuple observed with
//! two distinct outputs. Replaying the compiled program through the machine
//! reproduces the recorded trace bit for bit.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::machine::{Program, Trace};
use crate::memory::{MemoryConfig, MemoryState};
use crate::network::{GateBound, Network, TableEntry};

/// A fixed search problem: states with heuristics, directed weighted edges
/// (out-degree at most 2), a start and a goal.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphInstance {
    pub names: Vec<String>,
    pub heuristics: Vec<f64>,
    /// Outgoing (successor, cost) pairs per state, in action order.
    pub edges: Vec<Vec<(usize, f64)>>,
    pub start: usize,
    pub goal: usize,
}

impl GraphInstance {
    /// The repository's fixed seven-state instance. The optimal path is
    /// S -> B -> D -> G with cost 4 + 1 + 3 = 8, and D is reachable through
    /// two different partial paths (via A and via B).
    pub fn canonical() -> GraphInstance {
        let names = ["S", "A", "B", "C", "D", "E", "G"];
        GraphInstance {
            names: names.iter().map(|s| s.to_string()).collect(),
            heuristics: vec![6.0, 5.0, 4.0, 5.0, 3.0, 2.0, 0.0],
            edges: vec![
                vec![(1, 2.0), (2, 4.0)], // S -> A:2, S -> B:4
                vec![(3, 3.0), (4, 4.0)], // A -> C:3, A -> D:4
                vec![(4, 1.0), (5, 5.0)], // B -> D:1, B -> E:5
                vec![(6, 6.0)],           // C -> G:6
                vec![(6, 3.0)],           // D -> G:3
                vec![(6, 2.0)],           // E -> G:2
                vec![],                   // G
            ],
            start: 0,
            goal: 6,
        }
    }

    /// The canonical instance with every edge into the goal removed: the
    /// search exhausts its open list and halts in the failure state.
    pub fn canonical_unreachable_goal() -> GraphInstance {
        let mut instance = GraphInstance::canonical();
        for edges in instance.edges.iter_mut() {
            edges.retain(|&(succ, _)| succ != instance.goal);
        }
        instance
    }

    /// A three-state instance whose cheapest-F node is a dead end, exercising
    /// the zero-action branch of the goal test.
    pub fn dead_end_instance() -> GraphInstance {
        GraphInstance {
            names: vec!["S".into(), "X".into(), "G".into()],
            heuristics: vec![1.0, 5.0, 0.0],
            edges: vec![vec![(1, 1.0), (2, 10.0)], vec![], vec![]],
            start: 0,
            goal: 2,
        }
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.names.len();
        if n == 0 {
            return Err(Error::Instance("instance has no states".into()));
        }
        if self.heuristics.len() != n || self.edges.len() != n {
            return Err(Error::Instance("state table lengths disagree".into()));
        }
        for (s, name) in self.names.iter().enumerate() {
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(Error::Instance(format!("bad state name {name:?}")));
            }
            if self.names[..s].contains(name) {
                return Err(Error::Instance(format!("duplicate state name {name:?}")));
            }
        }
        for (s, h) in self.heuristics.iter().enumerate() {
            if !h.is_finite() || *h < 0.0 {
                return Err(Error::Instance(format!(
                    "heuristic of {} must be nonnegative, got {h}",
                    self.names[s]
                )));
            }
        }
        for (s, edges) in self.edges.iter().enumerate() {
            if edges.len() > 2 {
                return Err(Error::Instance(format!(
                    "state {} has out-degree {} > 2",
                    self.names[s],
                    edges.len()
                )));
            }
            for &(succ, cost) in edges {
                if succ >= n {
                    return Err(Error::Instance(format!(
                        "edge from {} to unknown state {succ}",
                        self.names[s]
                    )));
                }
                if !cost.is_finite() || cost <= 0.0 {
                    return Err(Error::Instance(format!(
                        "edge cost from {} must be positive, got {cost}",
                        self.names[s]
                    )));
                }
            }
        }
        if self.start >= n || self.goal >= n {
            return Err(Error::Instance("start or goal out of range".into()));
        }
        Ok(())
    }

    /// Parses the instance text format: `state <name> <h>`,
    /// `edge <from> <to> <cost>`, `start <name>`, `goal <name>`, with `#`
    /// comments and blank lines.
    pub fn parse(text: &str) -> Result<GraphInstance> {
        let mut names: Vec<String> = Vec::new();
        let mut heuristics = Vec::new();
        let mut edges: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut start = None;
        let mut goal = None;
        let lookup = |names: &[String], name: &str, line: usize| -> Result<usize> {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("unknown state {name:?}"),
                })
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            match tokens.as_slice() {
                ["state", name, h] => {
                    let h: f64 = h.parse().map_err(|_| Error::Parse {
                        line,
                        msg: format!("bad heuristic {h:?}"),
                    })?;
                    names.push(name.to_string());
                    heuristics.push(h);
                    edges.push(Vec::new());
                }
                ["edge", from, to, cost] => {
                    let cost: f64 = cost.parse().map_err(|_| Error::Parse {
                        line,
                        msg: format!("bad cost {cost:?}"),
                    })?;
                    let from = lookup(&names, from, line)?;
                    let to = lookup(&names, to, line)?;
                    edges[from].push((to, cost));
                }
                ["start", name] => start = Some(lookup(&names, name, line)?),
                ["goal", name] => goal = Some(lookup(&names, name, line)?),
                _ => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unrecognized line {content:?}"),
                    })
                }
            }
        }
        let instance = GraphInstance {
            names,
            heuristics,
            edges,
            start: start.ok_or(Error::Parse {
                line: 0,
                msg: "missing start".into(),
            })?,
            goal: goal.ok_or(Error::Parse {
                line: 0,
                msg: "missing goal".into(),
            })?,
        };
        instance.validate()?;
        Ok(instance)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (s, name) in self.names.iter().enumerate() {
            out.push_str(&format!("state {name} {}\n", self.heuristics[s]));
        }
        for (s, edges) in self.edges.iter().enumerate() {
            for &(succ, cost) in edges {
                out.push_str(&format!(
                    "edge {} {} {cost}\n",
                    self.names[s], self.names[succ]
                ));
            }
        }
        out.push_str(&format!("start {}\n", self.names[self.start]));
        out.push_str(&format!("goal {}\n", self.names[self.goal]));
        out
    }
}

// problem-region field offsets within one state block
pub const PROB_ID: usize = 0;
pub const PROB_H: usize = 1;
pub const PROB_DEGREE: usize = 2;
pub const PROB_SUCC0: usize = 3;
pub const PROB_COST0: usize = 4;
pub const PROB_SUCC1: usize = 5;
pub const PROB_COST1: usize = 6;

// node-record field offsets within one record block
pub const NODE_STATE: usize = 0;
pub const NODE_PARENT: usize = 1;
pub const NODE_ACTION: usize = 2;
pub const NODE_G: usize = 3;
pub const NODE_H: usize = 4;
pub const NODE_F: usize = 5;
pub const NODE_OPEN: usize = 6;
pub const NODE_VALID: usize = 7;

/// Memory map for the A* program: control cells, the problem-description
/// region, and the search-node region.
#[derive(Debug, Clone, PartialEq)]
pub struct AStarLayout {
    pub capacity: usize,
    pub addr_zero: usize,
    pub addr_flag: usize,
    pub addr_phase: usize,
    pub addr_next_free: usize,
    pub addr_scan_pos: usize,
    pub addr_best_node: usize,
    pub addr_best_f: usize,
    pub addr_selected: usize,
    pub addr_action_idx: usize,
    pub addr_open_count: usize,
    pub addr_solution_ptr: usize,
    pub addr_scratch: usize,
    pub problem_base: usize,
    pub problem_stride: usize,
    pub node_base: usize,
    pub node_stride: usize,
    pub max_records: usize,
    /// "Large constant" seeding the best-F cell at each scan start; must
    /// exceed every reachable F.
    pub initial_best_f: f64,
}

impl AStarLayout {
    pub fn for_instance(instance: &GraphInstance, capacity: usize) -> Result<AStarLayout> {
        instance.validate()?;
        let problem_base = 16;
        let problem_stride = 8;
        let node_base = problem_base + problem_stride * instance.state_count();
        let node_stride = 10; // 8 fields plus 2 gap cells per block
        if capacity <= node_base + node_stride {
            return Err(Error::Layout(format!(
                "capacity {capacity} leaves no room for search-node records"
            )));
        }
        let max_records = (capacity - node_base) / node_stride;
        Ok(AStarLayout {
            capacity,
            addr_zero: 0,
            addr_flag: 1,
            addr_phase: 2,
            addr_next_free: 3,
            addr_scan_pos: 4,
            addr_best_node: 5,
            addr_best_f: 6,
            addr_selected: 7,
            addr_action_idx: 8,
            addr_open_count: 9,
            addr_solution_ptr: 10,
            addr_scratch: 11,
            problem_base,
            problem_stride,
            node_base,
            node_stride,
            max_records,
            initial_best_f: 1e6,
        })
    }

    /// Checks the region invariants against a concrete instance: control
    /// cells, problem region and node region pairwise disjoint, record blocks
    /// wider than their eight fields, and everything inside the capacity.
    pub fn validate(&self, instance: &GraphInstance) -> Result<()> {
        let mut control = self.control_reads();
        control.extend([self.addr_zero, self.addr_best_f, self.addr_solution_ptr, self.addr_scratch]);
        for (idx, &a) in control.iter().enumerate() {
            if control[..idx].contains(&a) {
                return Err(Error::Layout(format!("control address {a} duplicated")));
            }
            if a >= self.problem_base {
                return Err(Error::Layout(format!(
                    "control address {a} overlaps the problem region"
                )));
            }
        }
        if self.problem_stride <= PROB_COST1 {
            return Err(Error::Layout("problem stride too small for its fields".into()));
        }
        if self.node_stride <= NODE_VALID {
            return Err(Error::Layout("node stride must exceed the record fields".into()));
        }
        let problem_end = self.problem_base + self.problem_stride * instance.state_count();
        if problem_end > self.node_base {
            return Err(Error::Layout("problem region overlaps the node region".into()));
        }
        if self.max_records == 0
            || self.node_base + self.node_stride * self.max_records > self.capacity
        {
            return Err(Error::Layout("node region exceeds capacity".into()));
        }
        if !self.initial_best_f.is_finite() || self.initial_best_f <= 0.0 {
            return Err(Error::Layout("initial best-F constant must be positive".into()));
        }
        Ok(())
    }

    /// Fixed control-read addresses, in controller input order:
    /// (phase, scan_pos, action_idx, next_free, open_count, best_node,
    /// selected, flag).
    pub fn control_reads(&self) -> Vec<usize> {
        vec![
            self.addr_phase,
            self.addr_scan_pos,
            self.addr_action_idx,
            self.addr_next_free,
            self.addr_open_count,
            self.addr_best_node,
            self.addr_selected,
            self.addr_flag,
        ]
    }

    pub fn problem_field(&self, state: usize, field: usize) -> usize {
        self.problem_base + state * self.problem_stride + field
    }

    pub fn node_field(&self, record: usize, field: usize) -> usize {
        self.node_base + record * self.node_stride + field
    }
}

/// The six algorithmic phases, in module order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    InitRoot,
    StartOpenScan,
    ScanOpenNode,
    FinishOpenScan,
    GoalTest,
    ExpandAction,
}

impl Phase {
    pub const ALL: [Phase; 6] = [
        Phase::InitRoot,
        Phase::StartOpenScan,
        Phase::ScanOpenNode,
        Phase::FinishOpenScan,
        Phase::GoalTest,
        Phase::ExpandAction,
    ];

    pub fn index(self) -> usize {
        match self {
            Phase::InitRoot => 0,
            Phase::StartOpenScan => 1,
            Phase::ScanOpenNode => 2,
            Phase::FinishOpenScan => 3,
            Phase::GoalTest => 4,
            Phase::ExpandAction => 5,
        }
    }

    pub fn from_index(idx: usize) -> Result<Phase> {
        Phase::ALL
            .get(idx)
            .copied()
            .ok_or_else(|| Error::Instance(format!("unknown phase {idx}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::InitRoot => "InitRoot",
            Phase::StartOpenScan => "StartOpenScan",
            Phase::ScanOpenNode => "ScanOpenNode",
            Phase::FinishOpenScan => "FinishOpenScan",
            Phase::GoalTest => "GoalTest",
            Phase::ExpandAction => "ExpandAction",
        }
    }
}

/// One recorded step of the symbolic phase machine, at machine granularity.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseStep {
    pub phase: Phase,
    pub control: Vec<f64>,
    pub gates: Vec<f64>,
    pub read_addrs: Vec<f64>,
    pub read_values: Vec<f64>,
    pub outputs: Vec<f64>,
    pub write_addrs: Vec<f64>,
}

/// Base head counts of the phase machine; compilation can pad above these.
pub const READ_HEADS: usize = 8;
pub const WRITE_HEADS: usize = 12;

/// Programmatic initialization: the problem description and control cells are
/// written directly, not by neural execution.
pub fn init_memory(instance: &GraphInstance, layout: &AStarLayout) -> Result<MemoryState> {
    instance.validate()?;
    layout.validate(instance)?;
    let mut memory = MemoryState::new(layout.capacity);
    memory.set(layout.addr_flag, 1.0)?;
    memory.set(layout.addr_phase, Phase::InitRoot.index() as f64)?;
    memory.set(layout.addr_best_node, -1.0)?;
    memory.set(layout.addr_selected, -1.0)?;
    memory.set(layout.addr_solution_ptr, -1.0)?;
    for s in 0..instance.state_count() {
        memory.set(layout.problem_field(s, PROB_ID), s as f64)?;
        memory.set(layout.problem_field(s, PROB_H), instance.heuristics[s])?;
        memory.set(
            layout.problem_field(s, PROB_DEGREE),
            instance.edges[s].len() as f64,
        )?;
        for (a, &(succ, cost)) in instance.edges[s].iter().enumerate() {
            memory.set(layout.problem_field(s, PROB_SUCC0 + 2 * a), succ as f64)?;
            memory.set(layout.problem_field(s, PROB_COST0 + 2 * a), cost)?;
        }
        // missing successor slots encode as -1 with cost 0
        for a in instance.edges[s].len()..2 {
            memory.set(layout.problem_field(s, PROB_SUCC0 + 2 * a), -1.0)?;
        }
    }
    Ok(memory)
}

/// Executes the unoptimized A* symbolically while mirroring the exact module
/// and step structure of the compiled program, recording every step.
pub fn phase_machine(instance: &GraphInstance, layout: &AStarLayout) -> Result<Vec<PhaseStep>> {
    let mut memory = init_memory(instance, layout)?.into_values();
    let mut steps: Vec<PhaseStep> = Vec::new();
    let zero = layout.addr_zero;
    let scratch = layout.addr_scratch;
    let step_limit = 1_000_000;

    while memory[layout.addr_flag] >= 0.0 {
        if steps.len() >= step_limit {
            return Err(Error::MaxSteps {
                max_steps: step_limit,
                trace: Box::new(Trace {
                    steps: Vec::new(),
                    final_memory: memory,
                    status: crate::machine::Termination::MaxStepsExceeded,
                }),
            });
        }
        let control: Vec<f64> = layout.control_reads().iter().map(|&a| memory[a]).collect();
        let phase = Phase::from_index(memory[layout.addr_phase] as usize)?;

        let (read_addrs, writes): (Vec<usize>, Vec<(usize, f64)>) = match phase {
            Phase::InitRoot => {
                let s0 = instance.start;
                let reads = vec![
                    layout.problem_field(s0, PROB_ID),
                    layout.problem_field(s0, PROB_H),
                    zero,
                    zero,
                    zero,
                    zero,
                    zero,
                    zero,
                ];
                let state = memory[reads[0]];
                let h = memory[reads[1]];
                let writes = vec![
                    (layout.node_field(0, NODE_STATE), state),
                    (layout.node_field(0, NODE_PARENT), -1.0),
                    (layout.node_field(0, NODE_ACTION), -1.0),
                    (layout.node_field(0, NODE_G), 0.0),
                    (layout.node_field(0, NODE_H), h),
                    (layout.node_field(0, NODE_F), 0.0 + h),
                    (layout.node_field(0, NODE_OPEN), 1.0),
                    (layout.node_field(0, NODE_VALID), 1.0),
                    (layout.addr_next_free, 1.0),
                    (layout.addr_open_count, 1.0),
                    (layout.addr_phase, Phase::StartOpenScan.index() as f64),
                    (scratch, 0.0),
                ];
                (reads, writes)
            }
            Phase::StartOpenScan => {
                let reads = vec![zero; READ_HEADS];
                let mut writes = vec![
                    (layout.addr_scan_pos, 0.0),
                    (layout.addr_best_node, -1.0),
                    (layout.addr_best_f, layout.initial_best_f),
                    (layout.addr_phase, Phase::ScanOpenNode.index() as f64),
                ];
                writes.extend(std::iter::repeat_n((scratch, 0.0), 8));
                (reads, writes)
            }
            Phase::ScanOpenNode => {
                let j = memory[layout.addr_scan_pos] as usize;
                let reads = vec![
                    layout.node_field(j, NODE_VALID),
                    layout.node_field(j, NODE_OPEN),
                    layout.node_field(j, NODE_F),
                    layout.addr_best_f,
                    layout.addr_best_node,
                    layout.addr_scan_pos,
                    layout.addr_next_free,
                    zero,
                ];
                let x: Vec<f64> = reads.iter().map(|&a| memory[a]).collect();
                let eligible = x[0] == 1.0 && x[1] == 1.0 && x[2] < x[3];
                let (best_node, best_f) = if eligible { (x[5], x[2]) } else { (x[4], x[3]) };
                let next_phase = if x[5] + 1.0 == x[6] {
                    Phase::FinishOpenScan
                } else {
                    Phase::ScanOpenNode
                };
                let mut writes = vec![
                    (layout.addr_best_node, best_node),
                    (layout.addr_best_f, best_f),
                    (layout.addr_scan_pos, x[5] + 1.0),
                    (layout.addr_phase, next_phase.index() as f64),
                ];
                writes.extend(std::iter::repeat_n((scratch, 0.0), 8));
                (reads, writes)
            }
            Phase::FinishOpenScan => {
                let mut reads = vec![
                    layout.addr_best_node,
                    layout.addr_best_f,
                    layout.addr_open_count,
                ];
                reads.extend(std::iter::repeat_n(zero, 5));
                let best = memory[layout.addr_best_node];
                let writes = if best == -1.0 {
                    // open list exhausted: failure state
                    let mut w = vec![
                        (layout.addr_flag, -2.0),
                        (layout.addr_solution_ptr, -1.0),
                    ];
                    w.extend(std::iter::repeat_n((scratch, 0.0), 10));
                    w
                } else {
                    let b = best as usize;
                    let mut w = vec![
                        (layout.addr_selected, best),
                        (layout.node_field(b, NODE_OPEN), 0.0),
                        (layout.addr_open_count, memory[layout.addr_open_count] - 1.0),
                        (layout.addr_phase, Phase::GoalTest.index() as f64),
                    ];
                    w.extend(std::iter::repeat_n((scratch, 0.0), 8));
                    w
                };
                (reads, writes)
            }
            Phase::GoalTest => {
                let sel = memory[layout.addr_selected] as usize;
                let state = memory[layout.node_field(sel, NODE_STATE)] as usize;
                let mut reads = vec![
                    layout.node_field(sel, NODE_STATE),
                    layout.problem_field(state, PROB_DEGREE),
                    layout.addr_selected,
                ];
                reads.extend(std::iter::repeat_n(zero, 5));
                let degree = memory[reads[1]];
                let writes = if state == instance.goal {
                    let mut w = vec![
                        (layout.addr_solution_ptr, memory[layout.addr_selected]),
                        (layout.addr_flag, -1.0),
                    ];
                    w.extend(std::iter::repeat_n((scratch, 0.0), 10));
                    w
                } else if degree == 0.0 {
                    // dead end: resume the open-list scan directly
                    let mut w = vec![(layout.addr_phase, Phase::StartOpenScan.index() as f64)];
                    w.extend(std::iter::repeat_n((scratch, 0.0), 11));
                    w
                } else {
                    let mut w = vec![
                        (layout.addr_action_idx, 0.0),
                        (layout.addr_phase, Phase::ExpandAction.index() as f64),
                    ];
                    w.extend(std::iter::repeat_n((scratch, 0.0), 10));
                    w
                };
                (reads, writes)
            }
            Phase::ExpandAction => {
                let sel = memory[layout.addr_selected] as usize;
                let state = memory[layout.node_field(sel, NODE_STATE)] as usize;
                let action = memory[layout.addr_action_idx] as usize;
                let next_free = memory[layout.addr_next_free] as usize;
                if next_free >= layout.max_records {
                    return Err(Error::RecordCapacity {
                        max: layout.max_records,
                    });
                }
                let succ_cell = layout.problem_field(state, PROB_SUCC0 + 2 * action);
                let cost_cell = layout.problem_field(state, PROB_COST0 + 2 * action);
                let succ = memory[succ_cell] as usize;
                let reads = vec![
                    layout.addr_selected,
                    layout.addr_action_idx,
                    layout.addr_next_free,
                    layout.addr_open_count,
                    layout.node_field(sel, NODE_G),
                    succ_cell,
                    cost_cell,
                    layout.problem_field(succ, PROB_H),
                ];
                let x: Vec<f64> = reads.iter().map(|&a| memory[a]).collect();
                let g = x[4] + x[6];
                let f = g + x[7];
                let exhausted = action + 1 == instance.edges[state].len();
                let next_phase = if exhausted {
                    Phase::StartOpenScan
                } else {
                    Phase::ExpandAction
                };
                let writes = vec![
                    (layout.node_field(next_free, NODE_STATE), x[5]),
                    (layout.node_field(next_free, NODE_PARENT), x[0]),
                    (layout.node_field(next_free, NODE_ACTION), x[1]),
                    (layout.node_field(next_free, NODE_G), g),
                    (layout.node_field(next_free, NODE_H), x[7]),
                    (layout.node_field(next_free, NODE_F), f),
                    (layout.node_field(next_free, NODE_OPEN), 1.0),
                    (layout.node_field(next_free, NODE_VALID), 1.0),
                    (layout.addr_next_free, x[2] + 1.0),
                    (layout.addr_open_count, x[3] + 1.0),
                    (layout.addr_action_idx, x[1] + 1.0),
                    (layout.addr_phase, next_phase.index() as f64),
                ];
                (reads, writes)
            }
        };

        let read_values: Vec<f64> = read_addrs.iter().map(|&a| memory[a]).collect();
        let mut gates = vec![0.0; Phase::ALL.len()];
        gates[phase.index()] = 1.0;
        let step = PhaseStep {
            phase,
            control,
            gates,
            read_addrs: read_addrs.iter().map(|&a| a as f64).collect(),
            read_values,
            outputs: writes.iter().map(|&(_, v)| v).collect(),
            write_addrs: writes.iter().map(|&(a, _)| a as f64).collect(),
        };
        for &(a, v) in &writes {
            memory[a] = v;
        }
        steps.push(step);
    }
    Ok(steps)
}

fn exact_int(x: f64, context: &str) -> Result<i64> {
    if x.fract() != 0.0 || x.abs() > (1u64 << 52) as f64 {
        return Err(Error::NonIntegerKey {
            value: x,
            context: context.to_string(),
        });
    }
    Ok(x as i64)
}

fn build_conflict_checked_table(
    pairs: &[(usize, Vec<f64>, Vec<f64>)],
    key_width: usize,
    value_width: usize,
    what: &str,
) -> Result<Network> {
    let mut seen: BTreeMap<Vec<i64>, (usize, Vec<f64>)> = BTreeMap::new();
    let mut entries = Vec::new();
    for (step, key_f, value) in pairs {
        let key = key_f
            .iter()
            .map(|&x| exact_int(x, &format!("{what}, step {step}")))
            .collect::<Result<Vec<i64>>>()?;
        match seen.get(&key) {
            None => {
                seen.insert(key.clone(), (*step, value.clone()));
                entries.push(TableEntry {
                    key,
                    value: value.clone(),
                });
            }
            Some((first, existing)) => {
                if existing != value {
                    return Err(Error::TableConflict {
                        key,
                        first: format!("{what} step {first} -> {existing:?}"),
                        second: format!("{what} step {step} -> {value:?}"),
                    });
                }
            }
        }
    }
    Network::table(&entries, key_width, value_width)
}

/// A compiled A* program plus the compilation artifacts useful for
/// inspection and trace-equivalence checks.
#[derive(Debug, Clone)]
pub struct AstarCompilation {
    pub program: Program,
    pub steps: Vec<PhaseStep>,
    pub controller_entries: usize,
    pub module_entries: Vec<(Phase, usize)>,
}

/// Compiles the recorded phase steps into table networks. `read_heads` and
/// `write_heads` may exceed the base interface; the extra heads read the zero
/// cell and write zero to the scratch cell.
pub fn compile_from_steps(
    steps: &[PhaseStep],
    layout: &AStarLayout,
    read_heads: usize,
    write_heads: usize,
) -> Result<AstarCompilation> {
    if steps.is_empty() {
        return Err(Error::Instance("no phase steps to compile".into()));
    }
    if read_heads < READ_HEADS || write_heads < WRITE_HEADS {
        return Err(Error::Config(format!(
            "A* needs at least {READ_HEADS} read heads and {WRITE_HEADS} write heads"
        )));
    }
    let k = Phase::ALL.len();
    let n_c = steps[0].control.len();

    let pad = |values: &[f64], width: usize, fill: f64| -> Vec<f64> {
        let mut v = values.to_vec();
        v.resize(width, fill);
        v
    };

    // controller: control tuple -> gates ++ read addresses ++ write addresses
    let controller_pairs: Vec<(usize, Vec<f64>, Vec<f64>)> = steps
        .iter()
        .enumerate()
        .map(|(idx, s)| {
            let mut value = s.gates.clone();
            value.extend(pad(&s.read_addrs, read_heads, layout.addr_zero as f64));
            value.extend(pad(&s.write_addrs, write_heads, layout.addr_scratch as f64));
            (idx, s.control.clone(), value)
        })
        .collect();
    let controller_table = build_conflict_checked_table(
        &controller_pairs,
        n_c,
        k + read_heads + write_heads,
        "controller",
    )?;
    let controller_entries = {
        let unique: std::collections::BTreeSet<_> = steps
            .iter()
            .map(|s| s.control.iter().map(|&x| x.to_bits()).collect::<Vec<_>>())
            .collect();
        unique.len()
    };

    // one gate-wrapped table per module, over (reads -> outputs)
    let bound = GateBound::DEFAULT;
    let mut modules = Vec::with_capacity(k);
    let mut module_entries = Vec::with_capacity(k);
    for phase in Phase::ALL {
        let pairs: Vec<(usize, Vec<f64>, Vec<f64>)> = steps
            .iter()
            .enumerate()
            .filter(|(_, s)| s.phase == phase)
            .map(|(idx, s)| {
                (
                    idx,
                    pad(&s.read_values, read_heads, 0.0),
                    pad(&s.outputs, write_heads, 0.0),
                )
            })
            .collect();
        if pairs.is_empty() {
            // phase never occurs on this instance; an always-zero module
            // keeps the interface uniform
            modules.push(Network::gate_wrap(
                &Network::constant(read_heads, &vec![0.0; write_heads])?,
                bound,
            ));
            module_entries.push((phase, 0));
            continue;
        }
        let core = build_conflict_checked_table(
            &pairs,
            read_heads,
            write_heads,
            phase.name(),
        )?;
        module_entries.push((
            phase,
            {
                let unique: std::collections::BTreeSet<_> = pairs
                    .iter()
                    .map(|(_, k, _)| k.iter().map(|&x| x.to_bits()).collect::<Vec<_>>())
                    .collect();
                unique.len()
            },
        ));
        modules.push(Network::gate_wrap(&core, bound));
    }

    let program = Program {
        memory: MemoryConfig::new(layout.capacity),
        control_reads: layout.control_reads(),
        controller: controller_table,
        modules,
        read_heads,
        write_heads,
        halt_cell: layout.addr_flag,
        gate_bound: bound,
        control_reads_via_attention: false,
    };
    program.validate()?;
    Ok(AstarCompilation {
        program,
        steps: steps.to_vec(),
        controller_entries,
        module_entries,
    })
}

/// Runs the phase machine and compiles its trace.
pub fn compile_with_heads(
    instance: &GraphInstance,
    layout: &AStarLayout,
    read_heads: usize,
    write_heads: usize,
) -> Result<AstarCompilation> {
    let steps = phase_machine(instance, layout)?;
    compile_from_steps(&steps, layout, read_heads, write_heads)
}

/// Compiles the instance with the base head counts.
pub fn compile(instance: &GraphInstance, layout: &AStarLayout) -> Result<Program> {
    Ok(compile_with_heads(instance, layout, READ_HEADS, WRITE_HEADS)?.program)
}

/// One node on the reconstructed path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathNode {
    pub state: usize,
    pub g: f64,
}

/// Follows parent links from the solution record back to the root. Returns
/// `None` when the run ended in the failure state (negative solution
/// pointer).
pub fn extract_path(memory: &[f64], layout: &AStarLayout) -> Result<Option<Vec<PathNode>>> {
    let solution = memory[layout.addr_solution_ptr];
    if solution < 0.0 {
        return Ok(None);
    }
    let mut idx = solution as i64;
    let mut nodes = Vec::new();
    while idx >= 0 {
        if nodes.len() > layout.max_records {
            return Err(Error::BrokenChain { record: idx });
        }
        let record = idx as usize;
        if record >= layout.max_records
            || memory[layout.node_field(record, NODE_VALID)] != 1.0
        {
            return Err(Error::BrokenChain { record: idx });
        }
        nodes.push(PathNode {
            state: memory[layout.node_field(record, NODE_STATE)] as usize,
            g: memory[layout.node_field(record, NODE_G)],
        });
        let parent = memory[layout.node_field(record, NODE_PARENT)];
        if parent >= idx as f64 {
            return Err(Error::BrokenChain { record: idx });
        }
        idx = parent as i64;
    }
    nodes.reverse();
    Ok(Some(nodes))
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

    fn canonical_setup() -> (GraphInstance, AStarLayout) {
        let instance = GraphInstance::canonical();
        let layout = AStarLayout::for_instance(&instance, 256).unwrap();
        (instance, layout)
    }

    #[test]
    fn canonical_instance_facts() {
        let instance = GraphInstance::canonical();
        instance.validate().unwrap();
        let s = instance.state_index("S").unwrap();
        let b = instance.state_index("B").unwrap();
        let g = instance.state_index("G").unwrap();
        let cost_sb = instance.edges[s].iter().find(|e| e.0 == b).unwrap().1;
        assert_eq!(cost_sb, 4.0);
        assert_eq!(instance.heuristics[g], 0.0);
        assert!(instance.edges.iter().all(|e| e.len() <= 2));
        // the figure's example labels occur: an edge with c = 2, a state with h = 6
        assert!(instance.edges.iter().flatten().any(|&(_, c)| c == 2.0));
        assert!(instance.heuristics.contains(&6.0));
        // oracle validation of the free parameters
        let result = oracles::astar(&instance, 64).unwrap();
        let (path, cost) = result.path.unwrap();
        let names: Vec<&str> = path.iter().map(|&st| instance.names[st].as_str()).collect();
        assert_eq!(names, vec!["S", "B", "D", "G"]);
        assert_eq!(cost, 8.0);
    }

    #[test]
    fn instance_text_round_trips() {
        let instance = GraphInstance::canonical();
        let parsed = GraphInstance::parse(&instance.to_text()).unwrap();
        assert_eq!(parsed, instance);
    }

    #[test]
    fn instance_parse_rejects_garbage() {
        assert!(GraphInstance::parse("state S").is_err());
        assert!(GraphInstance::parse("state S 1\nedge S T 2\nstart S\ngoal S\n").is_err());
        assert!(GraphInstance::parse("state S 1\nstart S\n").is_err());
    }

    #[test]
    fn phase_machine_first_step_creates_the_root() {
        let (instance, layout) = canonical_setup();
        let steps = phase_machine(&instance, &layout).unwrap();
        let first = &steps[0];
        assert_eq!(first.phase, Phase::InitRoot);
        // root record: state = S, G = 0, H = h(S), F = h(S), open and valid
        assert_eq!(first.outputs[0], instance.start as f64);
        assert_eq!(first.outputs[1], -1.0); // null parent
        assert_eq!(first.outputs[2], -1.0); // null action
        assert_eq!(first.outputs[3], 0.0);
        assert_eq!(first.outputs[4], instance.heuristics[instance.start]);
        assert_eq!(first.outputs[5], instance.heuristics[instance.start]);
        assert_eq!(first.outputs[6], 1.0);
        assert_eq!(first.outputs[7], 1.0);
    }

    #[test]
    fn phase_machine_matches_the_oracle_schedule_and_records() {
        let (instance, layout) = canonical_setup();
        let steps = phase_machine(&instance, &layout).unwrap();
        let oracle = oracles::astar(&instance, layout.max_records).unwrap();
        let phases: Vec<Phase> = steps.iter().map(|s| s.phase).collect();
        assert_eq!(phases, oracle.phases);
        // replay the writes to rebuild final memory, then compare node records
        let mut memory = init_memory(&instance, &layout).unwrap().into_values();
        for s in &steps {
            for (addr, value) in s.write_addrs.iter().zip(&s.outputs) {
                memory[*addr as usize] = *value;
            }
        }
        for (j, record) in oracle.records.iter().enumerate() {
            assert_eq!(memory[layout.node_field(j, NODE_STATE)], record.state as f64);
            assert_eq!(memory[layout.node_field(j, NODE_PARENT)], record.parent as f64);
            assert_eq!(memory[layout.node_field(j, NODE_ACTION)], record.action as f64);
            assert_eq!(memory[layout.node_field(j, NODE_G)], record.g);
            assert_eq!(memory[layout.node_field(j, NODE_H)], record.h);
            assert_eq!(memory[layout.node_field(j, NODE_F)], record.f);
            assert_eq!(memory[layout.node_field(j, NODE_OPEN)], f64::from(record.open));
            assert_eq!(memory[layout.node_field(j, NODE_VALID)], 1.0);
        }
    }

    #[test]
    fn compiled_program_replays_the_phase_machine_bitwise() {
        let (instance, layout) = canonical_setup();
        let compiled = compile_with_heads(&instance, &layout, READ_HEADS, WRITE_HEADS).unwrap();
        let memory = init_memory(&instance, &layout).unwrap();
        let trace = run(&compiled.program, memory, &checked()).unwrap();
        assert!(trace.halted());
        assert_eq!(trace.steps.len(), compiled.steps.len());
        for (machine, symbolic) in trace.steps.iter().zip(&compiled.steps) {
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&machine.control), bits(&symbolic.control));
            assert_eq!(bits(&machine.gates), bits(&symbolic.gates));
            assert_eq!(bits(&machine.read_addrs), bits(&symbolic.read_addrs));
            assert_eq!(bits(&machine.read_values), bits(&symbolic.read_values));
            assert_eq!(bits(&machine.outputs), bits(&symbolic.outputs));
            assert_eq!(bits(&machine.write_addrs), bits(&symbolic.write_addrs));
        }
    }

    #[test]
    fn compiled_canonical_run_finds_the_optimal_path() {
        let (instance, layout) = canonical_setup();
        let program = compile(&instance, &layout).unwrap();
        let memory = init_memory(&instance, &layout).unwrap();
        let trace = run(&program, memory, &checked()).unwrap();
        assert!(trace.final_memory[layout.addr_flag] < 0.0);
        let path = extract_path(&trace.final_memory, &layout).unwrap().unwrap();
        let names: Vec<&str> = path
            .iter()
            .map(|n| instance.names[n.state].as_str())
            .collect();
        assert_eq!(names, vec!["S", "B", "D", "G"]);
        assert_eq!(path.last().unwrap().g, 8.0);
        // duplicate visibility: at least two records carry state D
        let d = instance.state_index("D").unwrap() as f64;
        let next_free = trace.final_memory[layout.addr_next_free] as usize;
        let d_records = (0..next_free)
            .filter(|&j| trace.final_memory[layout.node_field(j, NODE_STATE)] == d)
            .count();
        assert!(d_records >= 2);
    }

    #[test]
    fn unreachable_goal_halts_in_the_failure_state() {
        let instance = GraphInstance::canonical_unreachable_goal();
        let layout = AStarLayout::for_instance(&instance, 256).unwrap();
        let program = compile(&instance, &layout).unwrap();
        let memory = init_memory(&instance, &layout).unwrap();
        let trace = run(&program, memory, &checked()).unwrap();
        assert_eq!(trace.final_memory[layout.addr_flag], -2.0);
        assert_eq!(trace.final_memory[layout.addr_solution_ptr], -1.0);
        assert_eq!(extract_path(&trace.final_memory, &layout).unwrap(), None);
        let oracle = oracles::astar(&instance, layout.max_records).unwrap();
        assert!(oracle.path.is_none());
    }

    #[test]
    fn start_equals_goal_gives_a_single_node_path() {
        let mut instance = GraphInstance::canonical();
        instance.goal = instance.start;
        let layout = AStarLayout::for_instance(&instance, 256).unwrap();
        let program = compile(&instance, &layout).unwrap();
        let memory = init_memory(&instance, &layout).unwrap();
        let trace = run(&program, memory, &checked()).unwrap();
        let path = extract_path(&trace.final_memory, &layout).unwrap().unwrap();
        assert_eq!(path.len(), 1);
        assert_eq!(path[0].state, instance.start);
        assert_eq!(path[0].g, 0.0);
    }

    #[test]
    fn dead_end_instance_exercises_the_zero_action_branch() {
        let instance = GraphInstance::dead_end_instance();
        let layout = AStarLayout::for_instance(&instance, 128).unwrap();
        let steps = phase_machine(&instance, &layout).unwrap();
        // once the dead end is selected, its goal test sends control straight
        // back to the scan without any expansion
        let dead_end = instance.state_index("X").unwrap() as f64;
        let resumed = steps.windows(2).any(|w| {
            w[0].phase == Phase::GoalTest
                && w[0].read_values[0] == dead_end
                && w[1].phase == Phase::StartOpenScan
        });
        assert!(resumed, "dead-end goal test should resume the scan");
        let program = compile(&instance, &layout).unwrap();
        let memory = init_memory(&instance, &layout).unwrap();
        let trace = run(&program, memory, &checked()).unwrap();
        let path = extract_path(&trace.final_memory, &layout).unwrap().unwrap();
        let names: Vec<&str> = path
            .iter()
            .map(|n| instance.names[n.state].as_str())
            .collect();
        assert_eq!(names, vec!["S", "G"]);
        assert_eq!(path.last().unwrap().g, 10.0);
    }

    #[test]
    fn tampered_step_list_with_conflicting_pairs_is_rejected() {
        let (instance, layout) = canonical_setup();
        let mut steps = phase_machine(&instance, &layout).unwrap();
        // find two ScanOpenNode steps and alias their module inputs while
        // keeping different outputs
        let scans: Vec<usize> = steps
            .iter()
            .enumerate()
            .filter(|(_, s)| s.phase == Phase::ScanOpenNode)
            .map(|(i, _)| i)
            .take(2)
            .collect();
        let donor = steps[scans[0]].read_values.clone();
        steps[scans[1]].read_values = donor;
        let err = compile_from_steps(&steps, &layout, READ_HEADS, WRITE_HEADS).unwrap_err();
        assert!(matches!(err, Error::TableConflict { .. }), "got {err:?}");
    }

    #[test]
    fn non_integer_reads_are_rejected_at_compile_time() {
        let (instance, layout) = canonical_setup();
        let mut steps = phase_machine(&instance, &layout).unwrap();
        steps[0].read_values[1] = 2.5;
        let err = compile_from_steps(&steps, &layout, READ_HEADS, WRITE_HEADS).unwrap_err();
        assert!(matches!(err, Error::NonIntegerKey { .. }), "got {err:?}");
    }

    #[test]
    fn padded_head_configuration_still_replays() {
        let (instance, layout) = canonical_setup();
        let compiled = compile_with_heads(&instance, &layout, 10, 14).unwrap();
        let memory = init_memory(&instance, &layout).unwrap();
        let trace = run(&compiled.program, memory, &checked()).unwrap();
        let path = extract_path(&trace.final_memory, &layout).unwrap().unwrap();
        assert_eq!(path.last().unwrap().g, 8.0);
    }

    #[test]
    fn undersized_head_configuration_is_rejected() {
        let (instance, layout) = canonical_setup();
        assert!(compile_with_heads(&instance, &layout, 7, 12).is_err());
        assert!(compile_with_heads(&instance, &layout, 8, 11).is_err());
    }

    #[test]
    fn record_integrity_invariants_hold_at_every_step() {
        let (instance, layout) = canonical_setup();
        let program = compile(&instance, &layout).unwrap();
        let memory = init_memory(&instance, &layout).unwrap();
        let trace = run(&program, memory, &checked()).unwrap();
        for record in &trace.steps {
            let memory = record.memory_after.as_ref().unwrap();
            let next_free = memory[layout.addr_next_free] as usize;
            let mut open_records = 0;
            for j in 0..next_free {
                if memory[layout.node_field(j, NODE_VALID)] != 1.0 {
                    continue;
                }
                let g = memory[layout.node_field(j, NODE_G)];
                let h = memory[layout.node_field(j, NODE_H)];
                let f = memory[layout.node_field(j, NODE_F)];
                assert_eq!(f, g + h, "record {j} at step {}", record.step);
                if j > 0 {
                    let parent = memory[layout.node_field(j, NODE_PARENT)];
                    assert!(parent >= 0.0 && (parent as usize) < j);
                }
                if memory[layout.node_field(j, NODE_OPEN)] == 1.0 {
                    open_records += 1;
                }
            }
            // frontier accounting (only meaningful once the root exists)
            if next_free > 0 {
                assert_eq!(
                    memory[layout.addr_open_count] as usize, open_records,
                    "open count at step {}",
                    record.step
                );
            }
        }
    }

    #[test]
    fn selection_picks_minimal_f_with_lowest_index_ties() {
        let (instance, layout) = canonical_setup();
        let program = compile(&instance, &layout).unwrap();
        let memory = init_memory(&instance, &layout).unwrap();
        let trace = run(&program, memory, &checked()).unwrap();
        let mut previous: Option<Vec<f64>> = None;
        for record in &trace.steps {
            if record.gates[Phase::FinishOpenScan.index()] == 1.0 {
                let before = previous.as_ref().unwrap();
                let next_free = before[layout.addr_next_free] as usize;
                let best = (0..next_free)
                    .filter(|&j| {
                        before[layout.node_field(j, NODE_VALID)] == 1.0
                            && before[layout.node_field(j, NODE_OPEN)] == 1.0
                    })
                    .min_by(|&a, &b| {
                        before[layout.node_field(a, NODE_F)]
                            .total_cmp(&before[layout.node_field(b, NODE_F)])
                            .then(a.cmp(&b))
                    });
                let after = record.memory_after.as_ref().unwrap();
                match best {
                    Some(j) => assert_eq!(after[layout.addr_selected], j as f64),
                    None => assert_eq!(after[layout.addr_flag], -2.0),
                }
            }
            previous = record.memory_after.clone();
        }
    }

    #[test]
    fn extract_path_detects_broken_chains() {
        let (instance, layout) = canonical_setup();
        let program = compile(&instance, &layout).unwrap();
        let memory = init_memory(&instance, &layout).unwrap();
        let trace = run(&program, memory, &checked()).unwrap();
        let mut memory = trace.final_memory;
        let solution = memory[layout.addr_solution_ptr] as usize;
        // corrupt the parent pointer to point forward
        memory[layout.node_field(solution, NODE_PARENT)] = solution as f64;
        assert!(matches!(
            extract_path(&memory, &layout),
            Err(Error::BrokenChain { .. })
        ));
    }
}
