//! Numerical laboratory for the isotropic Eshelby inclusion problem.
//!
//! Builds on `eshelby-core` with everything that needs `std`: voxelization,
//! volume-potential quadrature over voxelized shapes, the FFT field solver,
//! the theorem checkers, report/CSV/binary formats and the experiment runner
//! behind the `eshelby` binary.

pub mod fields;
pub mod io;
pub mod quadrature;
pub mod spectral;
pub mod theorems;
pub mod voxel;

pub mod cli;
pub mod config;

pub use eshelby_core as core;
