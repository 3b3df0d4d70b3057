//! Loping Landweber-Kaczmarz and steepest-descent-Kaczmarz iterations with
//! the cycle-based discrepancy stopping rule.

mod config;
mod kaczmarz;
mod problem;
mod trace;

pub use config::{
    Method, SolverConfig, TraceVerbosity, DEFAULT_EXACT_DATA_TOLERANCE, DEFAULT_MAX_CYCLES,
    DEFAULT_TAU,
};
pub use kaczmarz::{
    check_unit_norms, loping_weight, run_joint, run_linear, sdk_step_size, CycleOutcome,
    Kaczmarz, SolveResult, Termination, JOINT_NORM_CONVENTION, SINGULAR_STEP_FLOOR,
};
pub use problem::{JointProblem, KaczmarzSystem, LinearProblem, MeasurementSet};
pub use trace::{IterationTrace, StepRecord};
