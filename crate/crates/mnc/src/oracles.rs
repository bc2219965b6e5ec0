//! Independent symbolic references used as ground truth in differential
//! tests: linear-scan minimum, pass-structured adjacent sort, and the
//! unoptimized A* loop. These share no code with the compiled-network path
//! beyond primitive arithmetic and the instance/phase vocabulary types.

use crate::error::{Error, Result};
use crate::programs::astar::{GraphInstance, Phase};

/// Exact minimum by linear scan: m <- a_1, then m <- min(m, a_i).
pub fn min(values: &[f64]) -> Result<f64> {
    let (&first, rest) = values.split_first().ok_or(Error::Config(
        "minimum of an empty array is undefined".into(),
    ))?;
    let mut m = first;
    for &x in rest {
        if x < m {
            m = x;
        }
    }
    Ok(m)
}

/// Per-step view of the pass-based sort: array snapshot plus (i, p) after
/// each step, at the same granularity as the compiled program.
#[derive(Debug, Clone, PartialEq)]
pub struct SortTrace {
    pub snapshots: Vec<Vec<f64>>,
    pub control: Vec<(i64, i64)>,
}

/// Pass-based adjacent sort. At pair index i and pass limit p: if i < p the
/// adjacent pair is rewritten in nondecreasing order and i advances; if i = p
/// and p > 1 the pass contracts (p - 1, i = 1); if i = p = 1 it stops. One
/// snapshot is emitted per step, n(n+1)/2 in total.
pub fn sort(values: &[f64]) -> Result<(Vec<f64>, SortTrace)> {
    if values.is_empty() {
        return Err(Error::Config("cannot sort an empty array".into()));
    }
    let mut array = values.to_vec();
    let mut trace = SortTrace {
        snapshots: Vec::new(),
        control: Vec::new(),
    };
    let mut i: i64 = 1;
    let mut p: i64 = array.len() as i64;
    loop {
        if i < p {
            let a = array[(i - 1) as usize];
            let b = array[i as usize];
            array[(i - 1) as usize] = if a < b { a } else { b };
            array[i as usize] = if a < b { b } else { a };
            i += 1;
        } else if p > 1 {
            p -= 1;
            i = 1;
        } else {
            trace.snapshots.push(array.clone());
            trace.control.push((i, p));
            break;
        }
        trace.snapshots.push(array.clone());
        trace.control.push((i, p));
    }
    Ok((array.clone(), trace))
}

/// One generated search node.
#[derive(Debug, Clone, PartialEq)]
pub struct AStarRecord {
    pub state: usize,
    pub parent: i64,
    pub action: i64,
    pub g: f64,
    pub h: f64,
    pub f: f64,
    pub open: bool,
}

/// Result of the reference search: the solution path (when one exists), the
/// full node table for field-level comparison, and the phase schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct AStarResult {
    pub path: Option<(Vec<usize>, f64)>,
    pub records: Vec<AStarRecord>,
    pub phases: Vec<Phase>,
}

/// Unoptimized A*: no closed list, no duplicate suppression, ties broken
/// toward the lowest record index. The phase schedule mirrors the compiled
/// program step for step: init, then per iteration one scan start, one scan
/// step per generated record, one finish, a goal test, and one expansion per
/// outgoing action.
pub fn astar(instance: &GraphInstance, max_records: usize) -> Result<AStarResult> {
    instance.validate()?;
    let mut records: Vec<AStarRecord> = Vec::new();
    let mut phases = vec![Phase::InitRoot];
    let h0 = instance.heuristics[instance.start];
    records.push(AStarRecord {
        state: instance.start,
        parent: -1,
        action: -1,
        g: 0.0,
        h: h0,
        f: 0.0 + h0,
        open: true,
    });
    loop {
        phases.push(Phase::StartOpenScan);
        let mut best: i64 = -1;
        let mut best_f = f64::INFINITY;
        for (j, r) in records.iter().enumerate() {
            phases.push(Phase::ScanOpenNode);
            if r.open && r.f < best_f {
                best = j as i64;
                best_f = r.f;
            }
        }
        phases.push(Phase::FinishOpenScan);
        let selected = match best {
            -1 => {
                return Ok(AStarResult {
                    path: None,
                    records,
                    phases,
                })
            }
            b => b as usize,
        };
        records[selected].open = false;
        phases.push(Phase::GoalTest);
        let state = records[selected].state;
        if state == instance.goal {
            let mut path = Vec::new();
            let mut idx = selected as i64;
            while idx >= 0 {
                path.push(records[idx as usize].state);
                idx = records[idx as usize].parent;
            }
            path.reverse();
            return Ok(AStarResult {
                path: Some((path, records[selected].g)),
                records,
                phases,
            });
        }
        let g = records[selected].g;
        for (action, &(succ, cost)) in instance.edges[state].iter().enumerate() {
            phases.push(Phase::ExpandAction);
            if records.len() >= max_records {
                return Err(Error::RecordCapacity { max: max_records });
            }
            let h = instance.heuristics[succ];
            let child_g = g + cost;
            records.push(AStarRecord {
                state: succ,
                parent: selected as i64,
                action: action as i64,
                g: child_g,
                h,
                f: child_g + h,
                open: true,
            });
        }
    }
}
