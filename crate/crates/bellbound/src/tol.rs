//! Tolerance policy shared by every module.

/// Normalization and feasibility checks on behaviors, dilations and LP residuals.
pub const FEASIBILITY: f64 = 1e-9;
/// Threshold below which a probability is treated as a genuine negative.
pub const NONNEGATIVE: f64 = 1e-12;
/// Self-adjointness, trace and positivity checks on matrices.
pub const MATRIX: f64 = 1e-10;
/// Precision used when printing human-readable reports.
pub const REPORTING: f64 = 1e-6;
/// Slack used when comparing a computed violation against a closed-form bound.
pub const BOUND_SLACK: f64 = 1e-9;

/// Default cap on the number of deterministic strategies of a scenario.
pub const DEFAULT_STRATEGY_CAP: u64 = 10_000_000;
/// Default cap on the number of strategies fed to the dense LP.
pub const DEFAULT_LP_STRATEGY_CAP: u64 = 8_192;
/// Default cap on the dimension of a (possibly multipartite) state.
pub const DEFAULT_STATE_DIM_CAP: usize = 256;
/// Default cap on the dimension of the copied space a source operator lives on.
pub const DEFAULT_COPIED_DIM_CAP: usize = 4096;
