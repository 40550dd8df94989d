//! Exact age-of-information analysis for single-source, multi-server,
//! generate-at-will status update systems in discrete time.
//!
//! Servers have discrete phase-type service times ([`dph`]). An age-dependent
//! threshold policy decides, whenever the link goes idle, whether to wait or
//! which server to use. The AoI law follows from a multi-regime absorbing
//! Markov chain ([`mramc`]) assembled by [`aoi`]; [`sim`] is a slot-accurate
//! simulator used as an independent check, and [`opt`] searches thresholds
//! under a transmission-cost budget.

pub mod aoi;
pub mod dph;
pub mod error;
pub mod linalg;
pub mod mramc;
pub mod opt;
pub mod sim;

pub use aoi::{analyze, AoiSolution, Decision, Objective, Policy, ServerSpec};
pub use dph::Dph;
pub use error::{Error, Result};
pub use mramc::{MrAmc, RegimeVectors};
pub use opt::{optimize, SearchResult, SearchSpec};
pub use sim::{simulate, SimConfig, SimResult};
