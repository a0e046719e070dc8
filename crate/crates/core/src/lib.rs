//! Fault diagnosis for modular perception pipelines.
//!
//! Pipelines are modelled as diagnostic graphs whose nodes are module
//! executions and whose edges are consistency tests. The crate computes
//! how many simultaneous faults a graph can uniquely identify, identifies
//! faulty modules from test outcomes, evaluates the object-detection and
//! localization consistency tests over sensor data, and drives Monte Carlo
//! and trace-replay experiments.

pub mod consistency;
pub mod diagnosability;
pub mod error;
pub mod format;
pub mod graph;
pub mod harness;
pub mod identification;
pub mod temporal;

pub use error::{Error, Result};
pub use graph::{
    detect, generate_syndrome, is_consistent, DiagnosticGraph, Edge, FaultSet, FaultyTesterPolicy, NodeIndex,
    NodeLabel, Syndrome,
};
