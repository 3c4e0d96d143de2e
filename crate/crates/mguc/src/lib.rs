//! Unit-commitment optimization kernel for grid-connected microgrids.
//!
//! Builds hourly commitment/dispatch schedules for a microgrid with thermal
//! generators, renewables, battery storage, and a net-metered grid tie. Two
//! objective variants are supported: an emissions-aware commitment that
//! prices greenhouse-gas emissions ex-ante (and can cap them), and the
//! classical commitment that ignores them at decision time and is billed
//! ex-post. A built-in bounded-variable simplex plus branch-and-bound
//! solves the linearized problem to certified gaps; all costs and emissions
//! are reported from exact quadratic evaluation of the resulting schedule.
//!
//! The numeric core is generic over [`scalar::Scalar`] (`f32` or `f64`);
//! the aliases at the crate root pin `f64`, which is what the CLI and the
//! bundled data use.

pub mod analysis;
pub mod bnb;
pub mod formulation;
pub mod io;
pub mod mip;
pub mod model;
pub mod oracle;
pub mod pwl;
pub mod scalar;
pub mod simplex;

pub use formulation::{build_uc_mip, extract_schedule, PwlConfig, UcMode};
pub use model::{evaluate_schedule, validate_schedule};
pub use scalar::Scalar;

/// `f64` aliases for the common entry points.
pub type Case = model::MicrogridCase<f64>;
pub type Schedule = model::Schedule<f64>;
pub type CostBreakdown = model::CostBreakdown<f64>;
pub type Mip = mip::MipInstance<f64>;
pub type LpResult = simplex::LpResult<f64>;
pub type MipResult = bnb::MipResult<f64>;
