//! Numerical laboratory for an inverse problem in thin-plate elasticity:
//! locating a rigid inclusion `D` inside a plate `Ω` from couple
//! (bending/twisting moment) data applied on the outer boundary and the
//! resulting displacement traces on an accessible sub-arc `Σ ⊂ ∂Ω`.
//!
//! The crate provides four layers:
//!
//! * a forward solver for the Kirchhoff–Love bending problem with a rigid
//!   inclusion ([`solver`]), discretized by an energy method on a uniform
//!   Cartesian grid with a sparse direct factorization;
//! * synthetic measurement generation and the affine-gauge misfit between
//!   trace sets ([`boundary`]);
//! * shape reconstruction by derivative-free optimization over star-shaped
//!   inclusion parameters ([`inversion`]);
//! * an empirical stability laboratory ([`lab`]) that sweeps inclusion
//!   pairs, fits the log-type stability law `δ ≈ C·|log ε̃|^(−η)`, and
//!   measures unique-continuation quantities (three-spheres ratios,
//!   vanishing rates, propagation-of-smallness envelopes) on solved fields.
//!
//! All lengths are expressed in units of the geometric scale `r0`; geometry
//! and material inputs are already nondimensionalized when they reach these
//! APIs. Kernels are generic over the [`Scalar`] floating type; the shipped
//! binaries and file formats use [`Real`].

pub mod error;
pub mod fourier;
pub mod geometry;
pub mod optim;
pub mod scalar;
pub mod stats;
pub mod material;
pub mod solver;
pub mod boundary;
pub mod inversion;
pub mod lab;
pub mod files;

pub use error::{PlateError, Result};
pub use scalar::Scalar;

/// Scalar type used by the shipped tools and the on-disk formats.
pub type Real = f64;

/// Mid-plane point or vector over [`Real`].
pub type Vec2r = geometry::Vec2<Real>;

/// Geometric scale: every internal length is measured in units of `r0`.
///
/// Kept as a named constant so the normalizations that the stability
/// quantities carry (`r0²‖M̂‖`, `(r0/ρ)^B`, …) stay visible in the code even
/// though the unit system makes the numeric value 1.
pub const R0: f64 = 1.0;
