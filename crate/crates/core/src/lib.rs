//! Dynamic individual pitch control for a three-bladed turbine and a
//! reduced-order wake model for comparing wake-mixing strategies.
//!
//! The pipeline runs [`rotor::simulate_turbine`] for a strategy, feeds the
//! samples through a [`wake::WakeModel`], and compares the result against a
//! baseline run in [`analysis::report`].

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod excitation;
pub mod io;
pub mod mbc;
pub mod rotor;
pub mod scenario;
pub mod sweep;
pub mod wake;

pub use error::{Error, Result};
