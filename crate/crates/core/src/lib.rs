//! Finite-size checks of a cohomological lower bound on kernel dimension for
//! families of twisted Dirac operators on the circle.
//!
//! - [`cohomology`]: exact exterior algebra `H*(U(k)) = Λ[c_1, …, c_k]`,
//!   cup products and the odd Chern character coefficients.
//! - [`circle`]: closed-form and Fourier-truncated spectra of twisted Dirac
//!   operators on the circle.
//! - [`family`]: bounded transform, shift deformations, window counts, the
//!   invertibility cover and spectral flow for sampled Hermitian families.
//! - [`obstruction`]: the tautological family over the torus of `U(k)` and
//!   the end-to-end contrapositive check.
//!
//! Numerical code is generic over [`Real`] (`f32`, `f64`); the aliases below
//! fix the usual choices.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circle;
pub mod cohomology;
pub mod error;
pub mod family;
pub mod io;
pub mod linalg;
pub mod obstruction;
pub mod scalar;

pub use circle::{
    analytic_spectrum, fourier_truncation, holonomy_angles, kernel_dim, FourierTruncation, HolonomySpec,
    SpectrumWindow, SpinStructure, TwistedDirac,
};
pub use cohomology::{
    cup, obstruction_product, odd_chern_character, odd_chern_coefficient, AlgebraContext, CohomologyClass,
};
pub use error::{Error, Result};
pub use family::{
    bounded_transform, build_cover, shift_deform, spectral_count, spectral_flow, CoverReport, FamilyPoint, PathSpec,
    SampledFamily,
};
pub use obstruction::{c1_pairing, tautological_family, verify_contrapositive, ObstructionVerdict, TorusGridSpec};
pub use scalar::{CMatrix, Real, Tolerances};

pub use num_rational::BigRational;

/// Cohomology class with exact rational coefficients.
pub type Class = CohomologyClass<BigRational>;
/// Double-precision complex matrix.
pub type Matrix = CMatrix<f64>;
pub type Holonomy = HolonomySpec<f64>;
pub type Spectrum = SpectrumWindow<f64>;
pub type Family = SampledFamily<f64>;
pub type Cover = CoverReport<f64>;
pub type GridSpec = TorusGridSpec<f64>;
pub type Verdict = ObstructionVerdict<f64>;
pub type Tol = Tolerances<f64>;
