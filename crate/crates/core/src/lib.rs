//! Distributed quantum circuit compilation and noisy simulation.
//!
//! The pipeline: generate a circuit ([`library`]), rewrite it into the
//! {X, RZ, H, CX} basis ([`transpile`]), assign logical qubits to QPUs
//! ([`partition`]), expand cross-QPU CX gates into the remote-CX protocol
//! ([`distribute`]), and estimate output fidelity under depolarizing +
//! readout noise ([`sim`]). [`harness`] drives full experiment grids and
//! writes CSV results.

pub mod circuit;
pub mod distribute;
pub mod error;
pub mod harness;
pub mod library;
pub mod partition;
pub mod sim;
pub mod text;
pub mod transpile;

pub use circuit::{Circuit, GateKind, GateLabel, Instruction};
pub use error::{Error, Result};
