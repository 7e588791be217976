//! Periodic and localized travelling waves of a damped, driven split-ring-resonator lattice
//! with quadratic nonlinearity: unperturbed orbits, Melnikov persistence thresholds,
//! Fourier collocation with continuation, Floquet stability and direct lattice simulation.

pub mod config;
pub mod elliptic;
pub mod export;
pub mod floquet;
pub mod lattice;
pub mod error;
pub mod melnikov;
pub mod orbits;
pub mod quad;
pub mod verify;
pub mod wavesolver;

pub use error::{Error, Result};
