//! Scalar abstraction shared by the numerical modules.
//!
//! Everything spectral is written against [`Real`], which is implemented for
//! `f32` and `f64`. Exact arithmetic (the cohomology ring) does not go through
//! this trait; it is generic over its own coefficient bound instead.

use nalgebra::{Complex, DMatrix, RealField};
use serde::{Deserialize, Serialize};
use std::fmt::{Debug, Display};

/// A real floating point scalar: `f32` or `f64`.
pub trait Real: RealField + Copy + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal, rounding if necessary.
    fn lit(x: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

/// Dense complex matrix over the scalar `T`.
pub type CMatrix<T> = DMatrix<Complex<T>>;

/// Numerical thresholds used across the spectral modules.
///
/// The defaults are one order of magnitude apart so that a value accepted by
/// one check cannot be misclassified by the next. For `f32` each default is
/// raised to a multiple of the machine epsilon, which leaves the `f64` values
/// untouched.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances<T> {
    /// Max entry of `U U* - I` accepted for a holonomy.
    pub unitarity: T,
    /// Max eigen-residual `|U v - λ v|` for recovered holonomy angles.
    pub residual: T,
    /// Eigenvalues closer than this are merged into one multiplicity cluster.
    pub clustering: T,
    /// Distance to the nearest integer below which `θ + δ` counts as integral.
    pub integrality: T,
    /// Max entry of `A - A*` accepted for a Hermitian input.
    pub hermitian: T,
    /// Smallest singular value at or below which a shifted operator is singular.
    pub invertibility: T,
    /// Eigenvalues this close to `±ε` make a spectral count ambiguous.
    pub boundary: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        let eps = T::default_epsilon();
        let floor = |spec: f64, ulps: f64| T::lit(spec).max(eps * T::lit(ulps));
        Tolerances {
            unitarity: floor(1e-10, 64.0),
            residual: floor(1e-9, 640.0),
            clustering: floor(1e-8, 6400.0),
            integrality: floor(1e-8, 6400.0),
            hermitian: floor(1e-10, 64.0),
            invertibility: floor(1e-8, 6400.0),
            boundary: floor(1e-8, 6400.0),
        }
    }
}

impl<T: Real> Tolerances<T> {
    /// Returns the first non-positive tolerance, if any.
    pub fn first_non_positive(&self) -> Option<&'static str> {
        let fields = [
            ("unitarity", self.unitarity),
            ("residual", self.residual),
            ("clustering", self.clustering),
            ("integrality", self.integrality),
            ("hermitian", self.hermitian),
            ("invertibility", self.invertibility),
            ("boundary", self.boundary),
        ];
        fields
            .into_iter()
            .find(|(_, v)| !(*v > T::zero()))
            .map(|(name, _)| name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_defaults_are_the_documented_values() {
        let t = Tolerances::<f64>::default();
        assert_eq!(t.unitarity, 1e-10);
        assert_eq!(t.residual, 1e-9);
        assert_eq!(t.clustering, 1e-8);
        assert_eq!(t.integrality, 1e-8);
        assert_eq!(t.hermitian, 1e-10);
        assert_eq!(t.invertibility, 1e-8);
        assert_eq!(t.boundary, 1e-8);
    }

    #[test]
    fn f32_defaults_are_loosened() {
        let t = Tolerances::<f32>::default();
        assert!(t.unitarity > 1e-6);
        assert!(t.residual > t.unitarity);
        assert!(t.clustering > t.residual);
        assert!(t.first_non_positive().is_none());
    }

    #[test]
    fn non_positive_tolerance_is_reported() {
        let t = Tolerances::<f64> {
            boundary: 0.0,
            ..Default::default()
        };
        assert_eq!(t.first_non_positive(), Some("boundary"));
    }
}
