//! Benchmark harness for the dynamic-roadmap library: scene files, scenario
//! generators mirroring the update and motion-planning experiments, the
//! experiment runner with timing and collision-check instrumentation, and
//! the CSV output the CLI emits.

pub mod gen;
pub mod run;
pub mod scene;

pub use run::{Method, Phase, TrialRecord};
pub use scene::Scene;
