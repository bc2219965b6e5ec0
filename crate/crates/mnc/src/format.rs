//! Line-delimited text formats: execution traces and network dumps.
//!
//! Doubles are serialized with 17 significant digits, enough for bit-exact
//! reload, and the writer is canonical so that parse-then-serialize returns
//! byte-identical text.

use crate::error::{Error, Result};
use crate::machine::{StepRecord, Termination, Trace};
use crate::network::Network;

/// Canonical full-precision rendering of a double (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_list(values: &[f64]) -> String {
    let mut s = String::from("[");
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&fmt_f64(*v));
    }
    s.push(']');
    s
}

fn parse_list(token: &str, line: usize) -> Result<Vec<f64>> {
    let inner = token
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected a [..] list, got {token:?}"),
        })?;
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|item| {
            item.parse::<f64>().map_err(|_| Error::Parse {
                line,
                msg: format!("bad number {item:?}"),
            })
        })
        .collect()
}

const TRACE_HEADER: &str = "mnc-trace 1";

/// Serializes a trace, one step per line. Memory snapshots are included for
/// every step that recorded one.
pub fn write_trace(trace: &Trace) -> String {
    let mut out = String::new();
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for record in &trace.steps {
        out.push_str(&format!(
            "step {} control {} gates {} read_addrs {} read_values {} write_addrs {} write_values {} halted {}\n",
            record.step,
            fmt_list(&record.control),
            fmt_list(&record.gates),
            fmt_list(&record.read_addrs),
            fmt_list(&record.read_values),
            fmt_list(&record.write_addrs),
            fmt_list(&record.outputs),
            record.halted_after,
        ));
        if let Some(memory) = &record.memory_after {
            out.push_str(&format!("snapshot {}\n", fmt_list(memory)));
        }
    }
    out.push_str(&format!("final {}\n", fmt_list(&trace.final_memory)));
    let status = match trace.status {
        Termination::Halted => "halted",
        Termination::MaxStepsExceeded => "max-steps",
    };
    out.push_str(&format!("status {status}\n"));
    out
}

/// Parses a serialized trace. Per-module outputs are not part of the file
/// format, so the records come back with empty `module_outputs`.
pub fn parse_trace(text: &str) -> Result<Trace> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty trace".into(),
    })?;
    if header != TRACE_HEADER {
        return Err(Error::Parse {
            line: 1,
            msg: format!("bad header {header:?}"),
        });
    }
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut final_memory = None;
    let mut status = None;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let mut tokens = line.split(' ');
        let kind = tokens.next().unwrap_or("");
        match kind {
            "step" => {
                let step = {
                    let t = tokens.next().ok_or(Error::Parse {
                        line: line_no,
                        msg: "missing step index".into(),
                    })?;
                    t.parse::<usize>().map_err(|_| Error::Parse {
                        line: line_no,
                        msg: format!("bad step index {t:?}"),
                    })?
                };
                let mut expect = |name: &str| -> Result<&str> {
                    let label = tokens.next();
                    if label != Some(name) {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("expected field {name:?}, got {label:?}"),
                        });
                    }
                    tokens.next().ok_or(Error::Parse {
                        line: line_no,
                        msg: format!("missing value for {name}"),
                    })
                };
                let control = parse_list(expect("control")?, line_no)?;
                let gates = parse_list(expect("gates")?, line_no)?;
                let read_addrs = parse_list(expect("read_addrs")?, line_no)?;
                let read_values = parse_list(expect("read_values")?, line_no)?;
                let write_addrs = parse_list(expect("write_addrs")?, line_no)?;
                let outputs = parse_list(expect("write_values")?, line_no)?;
                let halted = match expect("halted")? {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("bad halted flag {other:?}"),
                        })
                    }
                };
                steps.push(StepRecord {
                    step,
                    control,
                    gates,
                    read_addrs,
                    read_values,
                    module_outputs: Vec::new(),
                    outputs,
                    write_addrs,
                    halted_after: halted,
                    memory_after: None,
                });
            }
            "snapshot" => {
                let token = tokens.next().ok_or(Error::Parse {
                    line: line_no,
                    msg: "missing snapshot data".into(),
                })?;
                let memory = parse_list(token, line_no)?;
                let record = steps.last_mut().ok_or(Error::Parse {
                    line: line_no,
                    msg: "snapshot before any step".into(),
                })?;
                record.memory_after = Some(memory);
            }
            "final" => {
                let token = tokens.next().ok_or(Error::Parse {
                    line: line_no,
                    msg: "missing final memory".into(),
                })?;
                final_memory = Some(parse_list(token, line_no)?);
            }
            "status" => {
                status = Some(match tokens.next() {
                    Some("halted") => Termination::Halted,
                    Some("max-steps") => Termination::MaxStepsExceeded,
                    other => {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("bad status {other:?}"),
                        })
                    }
                });
            }
            "" => {}
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("unknown record {other:?}"),
                })
            }
        }
    }
    Ok(Trace {
        steps,
        final_memory: final_memory.ok_or(Error::Parse {
            line: 0,
            msg: "missing final memory".into(),
        })?,
        status: status.ok_or(Error::Parse {
            line: 0,
            msg: "missing status".into(),
        })?,
    })
}

/// Structured text dump of a network: per-layer shapes, activation tags, and
/// full-precision weight matrices.
pub fn write_network(net: &Network) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "network input {} output {} layers {}\n",
        net.input_dim(),
        net.output_dim(),
        net.layers().len()
    ));
    for (idx, layer) in net.layers().iter().enumerate() {
        out.push_str(&format!(
            "layer {idx} {} rows {} cols {}\n",
            layer.activation.name(),
            layer.rows(),
            layer.cols()
        ));
        out.push_str("weights [");
        for (i, row) in layer.weights.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&fmt_list(row));
        }
        out.push_str("]\n");
        out.push_str(&format!("bias {}\n", fmt_list(&layer.bias)));
    }
    out
}
