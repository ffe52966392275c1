//! Event-triggered sliding-mode consensus tracking for leader-follower
//! multi-agent systems with heterogeneous scalar nonlinear agents.
//!
//! * [`graph`]: adjacency, pinning, Laplacian and grounded Laplacian.
//! * [`numeric`]: dense LU inverse, eigenvalues, RK4.
//! * [`dynamics`]: agent models and the disturbance waveform.
//! * [`controller`]: sliding surface, control law, trigger rule, diagnostics.
//! * [`engine`]: the simulation loop and event statistics.
//! * [`scenarios`]: the six reference experiments.
//! * [`cli`]: config files, CSV output, topology report.

pub mod cli;
pub mod controller;
pub mod dynamics;
pub mod engine;
pub mod graph;
pub mod numeric;
pub mod scenarios;

pub use controller::{ControllerParams, FormationSpec};
pub use engine::{run, RunOutput, SimConfig, SimError};
pub use graph::{build_topology, TopologyMatrices};
pub use scenarios::ScenarioPreset;
