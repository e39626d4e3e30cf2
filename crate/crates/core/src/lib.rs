//! Sizing and hedging of an electrolytic hydrogen plant under price,
//! renewable-output and demand uncertainty.
//!
//! A two-stage linear program sizes the electrolyser, hydrogen storage and
//! grid connection, and picks futures volumes and PPA capacities; hourly
//! dispatch is decided per scenario. The objective weights expected
//! operating cost against its CVaR. Designs from different planning
//! policies are then dispatched on held-out scenarios and compared by
//! levelised cost of hydrogen.
//!
//! Runnable examples, one per capability:
//!
//! | example                  | shows                                                |
//! |--------------------------|------------------------------------------------------|
//! | `scenario_synthesis`     | synthetic history, price knobs, even/odd split       |
//! | `two_stage_model`        | model assembly, solve, LP text export                |
//! | `cvar_weighting`         | risk weight vs expected cost and tail cost           |
//! | `out_of_sample_dispatch` | fixed-design dispatch and per-scenario LCOH          |
//! | `pessimistic_expert`     | the expert PPA sizing rule                           |
//! | `policy_metrics`         | VSS / VRAS / VAES / VS-Dem from LCOH pairs           |
//! | `rfnbo_contexts`         | subsidy and green-share requirement                  |
//! | `policy_benchmark`       | a whole study driven by `examples/desk_study`        |
//!
//! The `h2plan` binary wraps [`cli`].

pub mod calendar;
pub mod cli;
pub mod lp;
pub mod metrics;
pub mod model;
pub mod error;
pub mod persist;
pub mod policy;
pub mod scenario;
pub mod simulation;

pub use error::{Error, Result};
