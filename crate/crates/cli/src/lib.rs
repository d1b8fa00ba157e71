//! Scenario ingestion, pipeline orchestration, invariant-suite execution,
//! and structured output emission for the geometrodynamics engine.

pub mod report;
pub mod rng;
pub mod runner;
pub mod scenario;
