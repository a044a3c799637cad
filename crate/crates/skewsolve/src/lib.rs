//! Hybrid quantum-classical solvers for skewed linear systems, built on a
//! simulated Hadamard-test backend, plus a depth-optimizing transpiler for
//! the controlled state-preparation circuits those tests require.

pub mod circuit;
pub mod cli;
pub mod error;
pub mod graph;
pub mod hadamard;
pub mod io;
pub mod numerics;
pub mod prep;
pub mod seed;
pub mod sim;
pub mod solver;
pub mod transpile;

pub use circuit::{Circuit, Gate, GateCostModel, GateKind};
pub use error::{Error, Result};
pub use graph::ConnectivityGraph;
