//! Core numerics for the three-dimensional isotropic Eshelby inclusion problem.
//!
//! Everything in this crate is a pure function of immutable inputs and builds
//! under `no_std` with `alloc`: isotropic elastic constants and the Fourier-space
//! Green operator, eigenstress classification, inclusion shapes and their
//! membership tests, the volume-potential kernels together with exact cell
//! integration, the Ferrers–Dyson interior potential of an ellipsoid, quadratic
//! least-squares fitting and the inverse problem that recovers ellipsoid axis
//! ratios from a potential Hessian.
//!
//! Grids, quadrature over voxelized shapes, the FFT solver and all file formats
//! live in the `eshelby-lab` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod ferrers;
pub mod fit;
pub mod inverse;
pub mod kernels;
pub mod linalg;
pub mod materials;
pub mod shape;

pub use error::{Error, Result};
pub use linalg::{Mat3, Vec3};
