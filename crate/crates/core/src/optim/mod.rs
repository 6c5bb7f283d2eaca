//! The unified Adam-alike update kernel, named optimizers and schedules.
//!
//! Every optimizer here is one configuration of
//!
//! ```text
//! m_t = β₁,t m_{t-1} + (1 - β₁,t) g_t
//! v_t = β₂ v_{t-1} + (1 - β₂) k_t²  [+ ε]
//! θ_t = θ_{t-1} - α_t m̂_t / denom(v̂_t)
//! ```
//!
//! with `k_t` and the placement of ε chosen by [`KernelSpec`].

mod hyper;
mod kernel;
mod schedule;
mod state;

pub use hyper::{
    DecayMode, HyperParams, OptimizerConfig, DEFAULT_ALPHA, DEFAULT_BETA1, DEFAULT_BETA2,
    DEFAULT_EPSILON,
};
pub use kernel::{EpsPlacement, KernelSpec, OptimizerKind, SecondMomentInput};
pub use schedule::{schedule_value, ScheduleSpec};
pub use state::{debiased_moments, effective_stepsize, OptimizerState};
