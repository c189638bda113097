//! Sum-rate analysis of an uplink multiple-access channel served by a single
//! dielectric waveguide with movable pinching antennas.
//!
//! * [`channel`]: line-of-sight geometry and effective channels.
//! * [`optimizer`]: single-user phase refinement and shared-pattern
//!   alternating optimization.
//! * [`capacity`]: slot rates, the capacity bound with its schedule, KKT
//!   checks, time allocation and the finite-pattern scheme.
//! * [`baselines`]: fixed-array and static-pattern reference schemes.

pub mod baselines;
pub mod capacity;
pub mod channel;
pub mod error;
pub mod optimizer;
pub mod search;

pub use baselines::{cas_pattern, cas_rate, static_pass_rate, static_pass_rate_with};
pub use capacity::{
    average_rate, capacity_bound, finite_m_rate, finite_m_rates, kkt_stationarity_residual, noma_slot_rate,
    single_antenna_closed_form, time_allocation_objective, time_allocation_solve, BoundSolution, KktResidual,
    RateReport, Schedule, Scheme, Slot,
};
pub use channel::{
    channel_coefficient, effective_channel, validate_pattern, waveguide_response, EffectiveChannel, PinchingPattern,
    Point, Scenario, ScenarioParams,
};
pub use error::{Error, PatternViolation, Result};
pub use optimizer::{
    centered_pattern, common_pattern, initial_single_user_pattern, refine_single_user_pattern, CommonPattern,
    SearchConfig,
};
