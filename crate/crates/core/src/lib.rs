//! Entropy-maximizing multipodal graphons under edge and triangle density
//! constraints.

pub mod cli;
pub mod densities;
pub mod diagram;
pub mod error;
pub mod families;
pub mod graphon;
pub mod optimize;

pub use error::{Error, Result};
