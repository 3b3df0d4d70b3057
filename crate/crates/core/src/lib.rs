//! Discrete parallel-MRI forward model with loping Kaczmarz reconstruction.
//!
//! The measured k-space data of receiver `i` is
//! `𝓜ᵢ = 𝐏[ℱ(𝒫 × 𝒮ᵢ)]`, where `𝒫` is the image, `𝒮ᵢ = Σₙ b_{i,n} ℬₙ`
//! the receiver's sensitivity kernel in a fixed basis, `ℱ` the DFT over the
//! flattened grid, and `𝐏` the restriction to the sampled k-space subset.
//!
//! * [`grid`]: images, masks, measurements, sensitivity models.
//! * [`transform`]: DFT (naive and radix-2) and the k-space restriction.
//! * [`forward`]: the linear and bilinear operators, adjoints, norm
//!   estimation and the tangential-cone probe.
//! * [`solver`]: loping Landweber-Kaczmarz and steepest-descent-Kaczmarz.
//! * [`phantom`]: synthetic instances with calibrated noise.
//! * [`io`] and [`cli`]: file formats and the `mri-lk` command line.

pub mod cli;
pub mod error;
pub mod forward;
pub mod grid;
pub mod io;
pub mod phantom;
pub mod solver;
pub mod transform;

pub use error::{Error, Result};
pub use grid::{
    inner_product, materialize_sensitivity, pointwise_multiply, ComplexImage, GridShape,
    JointParameter, KSpaceMask, MeasurementVector, SensitivityModel, Vector,
};
pub use num_complex::Complex64;
