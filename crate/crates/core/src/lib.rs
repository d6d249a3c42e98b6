//! Simulation and verification toolkit for the Pólya urn with
//! time-dependent reinforcement.

pub mod cli;
pub mod ensemble;
pub mod error;
pub mod numerics;
pub mod seed;
pub mod sequence;
pub mod theory;
pub mod urn;
pub mod verify;

pub use error::{Error, Result};
