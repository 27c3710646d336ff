//! Deterministic 1D nutrient-phytoplankton-zooplankton reaction-diffusion
//! simulator, with executable checks of the invariants its trajectories
//! must satisfy.

// Guards are written `!(x > 0.0)` so NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod commands;
pub mod config;
pub mod discretization;
pub mod error;
pub mod model;
pub mod oracles;
pub mod timestepper;

pub use config::{parse_config, RunConfig};
pub use error::{Error, Result};
pub use model::{FunctionalResponse, Grid, LightModel, Model, Parameters, State};
pub use timestepper::{integrate, Scheme, SolverConfig, Trajectory};
