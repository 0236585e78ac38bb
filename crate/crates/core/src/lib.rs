//! Toolkit for closed Boolean circuits read under fixed-point semantics.
//!
//! An open circuit computes a function; closing it identifies output wires
//! with input wires and asks for states the circuit maps to themselves. A
//! closed circuit is logically consistent when exactly one such state exists.
//! This crate provides the circuit representation, a text netlist format,
//! consistency engines, verifier-pair and search-relation constructions that
//! reduce decision and search problems to closed circuits, an integer
//! factoring circuit family, and the classical process-function model with
//! the same consistency condition.

pub mod bits;
pub mod circuit;
pub mod cli;
pub mod constructions;
pub mod ctc;
pub mod factoring;
pub mod fixedpoint;
pub mod manifest;
pub mod netlist;

pub use bits::Bits;
pub use circuit::{Circuit, CircuitBuilder, ClosedCircuit, Gate, TruthTable, WireId};
