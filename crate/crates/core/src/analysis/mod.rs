//! Harnesses that turn optimizer behaviour into measurements: trajectories
//! and races, regret and rate fits, escape-time Monte Carlo, the
//! noise-versus-momentum monitor, loss slices and stepsize traces.

mod assumption;
mod escape;
mod rates;
mod slice;
mod stepsize;
mod trajectory;

pub use assumption::{assumption_monitor, AssumptionMonitorReport, MonitorOptions};
pub use escape::{
    escape_harness, sign_test, EscapeReport, EscapeStats, EscapeTrialReport, SignTest, MIN_TRIALS,
};
pub use rates::{
    final_decade_slope, loglog_slope, nonconvex_rate_harness, recompute_regret, regret_harness, RateReport,
    RegretReport, FIT_POINTS,
};
pub use slice::{loss_slice, random_directions, LossSlice, FLATNESS_ANGLES};
pub use stepsize::{stepsize_trace, StepsizeTrace, CONVERGED_TAIL};
pub use trajectory::{race, run, GradientOracle, RaceRow, RecordOptions, RunFailure, StepRecord, Trajectory};
