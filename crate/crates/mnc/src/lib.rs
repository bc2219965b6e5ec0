//! A compiler and virtual machine that realizes classic algorithms as exact
//! ReLU networks over an external scalar associative memory.
//!
//! Instead of training, every controller and functional module is an MLP with
//! analytically specified weights. The controller reads a fixed control input
//! from memory and emits a one-hot gate vector plus read and write addresses;
//! all modules receive the same read values, the gated one computes its
//! transformation, the others are inhibited to exactly zero inside the
//! network. The machine applies the same computational graph step after step;
//! only the memory changes.
//!
//! Three compiled programs ship with the crate: array minimum
//! ([`programs::min`]), in-place sort ([`programs::sort`]), and A* search on
//! a fixed problem instance ([`programs::astar`], compiled from its own
//! symbolic execution trace into table networks). Reference implementations
//! in [`oracles`] back the differential tests.
//!
//! The `examples/` directory contains one runnable example per capability;
//! the `mnc` binary exposes `run`, `inspect` and `verify` subcommands.

pub mod cli;
pub mod error;
pub mod format;
pub mod machine;
pub mod memory;
pub mod network;
pub mod oracles;
pub mod programs;

pub use error::{Error, Result};
pub use machine::{run, step, Program, RunOptions, StepRecord, Termination, Trace};
pub use memory::{attention, key_vector, AttentionWeights, MemoryConfig, MemoryState};
pub use network::{Activation, GateBound, Layer, Network, TableEntry};
