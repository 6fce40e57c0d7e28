//! Counterfactual "ghost" evaluation of a tracked agent's position and
//! trajectory at a decision moment.
//!
//! The crate is organised around the data flow of a season evaluation:
//!
//! * [`tracking`] ingests Big Data Bowl style tracking files, selects completed
//!   catches and builds the per-role feature vectors.
//! * [`rfcde`] is a random forest for conditional density estimation: trees
//!   split on a cosine-series density loss, predictions are leaf-weighted
//!   kernel density estimates over one or two response dimensions.
//! * [`utility`] and [`epv`] turn a yards-after-catch density into an expected
//!   play value on the expected-points scale.
//! * [`ghost`] replaces the nearest defender with a distribution of ghost
//!   defenders and integrates the change in expected play value.
//! * [`harness`] holds leave-one-week-out validation, training-size sweeps and
//!   leaderboard aggregation.
//! * [`synth`] generates desk-scale plays with known conditional densities.
//! * [`pipeline`] wires the above into the command-line workflow.

pub mod epv;
pub mod error;
pub mod ghost;
pub mod harness;
pub mod pipeline;
pub mod rfcde;
pub mod rng;
pub mod synth;
pub mod tracking;
pub mod utility;

pub use error::{Error, Result};
