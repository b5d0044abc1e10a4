//! Grid-world explorer whose drive to cover a novel arena competes with a
//! habituating fear drive, with curve metrics and a fitter that recovers
//! fear parameters from an observed exploration curve.

pub mod agent;
pub mod cli;
pub mod curves;
pub mod engine;
pub mod fit;
pub mod gridworld;

pub use agent::{AgentParams, AgentState, PolicyMode, StepEvents};
pub use curves::{ExplorationCurve, RealCurve, ShiftStats};
pub use engine::{run_replicates, run_sim, MeanCurve, SimConfig, SimResult};
pub use gridworld::{Direction, GridWorld, Position, RefugeRect};
