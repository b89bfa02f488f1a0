//! Long-wave models over variable topography: Camassa–Holm and KdV type
//! equations, their Boussinesq and Green–Naghdi references, and the
//! diagnostics used to check consistency and wave breaking numerically.
//!
//! Grid computations are generic over [`Scalar`] (`f32` or `f64`);
//! coefficient families are exact rationals. The aliases at the bottom of
//! this file fix the scalar to `f64` for everyday use.

pub mod breaking;
pub mod coeffs;
pub mod error;
pub mod evolve;
pub mod params;
pub mod reconstruct;
pub mod residual;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Field64 = spectral::Field<f64>;
pub type Grid64 = spectral::Grid<f64>;
pub type Field32 = spectral::Field<f32>;
pub type Grid32 = spectral::Grid<f32>;
pub type Params64 = params::RegimeParams<f64>;
pub type WaveSpeed64 = params::WaveSpeedField<f64>;
pub type Trajectory64<S> = evolve::Trajectory<f64, S>;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
