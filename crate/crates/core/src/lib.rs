//! Two-photon emission from a pair of two-level atoms coupled to a
//! one-dimensional waveguide with a massive guided mode.

pub mod acceptance;
pub mod amplitude;
pub mod analysis;
pub mod cli;
pub mod error;
pub mod model;
pub mod par;
pub mod quad;
pub mod selfenergy;
pub mod system;
pub mod vertex;

pub use error::{Error, Result};
pub use system::PairSystem;
