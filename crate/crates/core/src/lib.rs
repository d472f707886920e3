//! Pseudospectral solvers for the KdV equation, the Peregrine system and the
//! full water-wave problem (Zakharov–Craig–Sulem form), plus a harness that
//! measures how fast the KdV momentum density
//! `I = eta + (3/4) eps eta^2 + (1/6) mu eta_xx` approaches the depth
//! integral of the horizontal Euler velocity as `mu -> 0`.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod kdv;
pub mod par;
pub mod params;
pub mod peregrine;
pub mod spectral;
pub mod waterwave;

pub use error::{Error, Result};
pub use params::ModelParams;
pub use spectral::{Grid1D, RealField};
