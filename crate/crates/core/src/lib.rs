//! Power and subcarrier allocation for downlink multiuser OFDMA under
//! proportional rate requirements.
//!
//! Four allocation methods share one pipeline:
//!
//! 1. a [`ChannelMatrix`] of effective subchannel SNR per watt, either drawn
//!    from seeded Rayleigh fading or loaded from a bundled [`Fixture`];
//! 2. per-user subcarrier quotas from [`compute_quotas`];
//! 3. an exclusive [`AssignmentMatrix`] from [`assign_subcarriers`];
//! 4. a [`PowerAllocation`] from one of the power solvers:
//!    [`linear_power_split`], [`rootfind_power_split`],
//!    [`activeset_power_split`] or [`ga_power_split`].
//!
//! Rates are in normalized units (subcarrier bandwidth = 1), so a subcarrier
//! carrying `p` watts at gain `h` contributes `log2(1 + p * h)` bit/s/Hz.
//!
//! Batch work (sweeps, GA fitness evaluation) runs on rayon when the default
//! `parallel` feature is enabled and sequentially otherwise; results are
//! identical either way.

pub mod assignment;
pub mod channel;
pub mod config;
mod error;
pub mod evaluation;
pub mod exec;
pub mod fixtures;
pub mod power;
pub mod report;
pub mod sweep;
pub mod system;

pub use assignment::{assign_subcarriers, AssignmentMatrix};
pub use channel::{generate_channel, ChannelMatrix};
pub use config::parse_scenario;
pub use error::{Error, Result};
pub use evaluation::{
    compare_methods, proportionality_error, total_capacity, user_rate, MethodRow, RateReport,
};
pub use exec::Execution;
pub use fixtures::{channel_from_fixture, Fixture};
pub use power::activeset::{activeset_power_split, global_waterfill};
pub use power::ga::{ga_power_split, ConvergenceTrace, GaParams, Individual};
pub use power::linear::{compute_vw, linear_power_split, waterfill_user, UserWaterfillSummary};
pub use power::rootfind::{proportionality_residual, rootfind_power_split};
pub use power::PowerAllocation;
pub use sweep::{run_sweep, SweepRow, SweepSpec};
pub use system::{
    compute_quotas, normalize_proportions, Duplexing, Method, OfdmaProfile, QuotaVector, Scenario,
};
