//! Computational laboratory for the asymmetric simple exclusion process
//! with step Bernoulli initial data.
//!
//! The crate has three legs that check each other:
//!
//! * the exact finite-time law of a tagged particle, as a contour integral
//!   of a Fredholm determinant ([`exact_law`]), with its algebraic
//!   underpinnings verified in exact rational arithmetic ([`identities`]);
//! * independent oracles: an event-driven continuous-time simulator and a
//!   uniformized matrix-exponential law on small lattices ([`sim`]);
//! * the KPZ-scale limit distributions ([`limit_laws`]) and a Monte Carlo
//!   harness measuring convergence toward them ([`harness`]).

pub mod airy;
pub mod contour;
pub mod exact_law;
pub mod harness;
pub mod identities;
pub mod limit_laws;
mod linalg;
pub mod params;
pub mod sim;

pub use params::{ModelParams, RegimeLabel, ScalingConstants, ScalingMode};

// re-exported so downstream code can build the exact-rational inputs of
// the identities module without pinning its own copy of the crate
pub use num_rational;
