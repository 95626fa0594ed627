//! Twisted Dirac operator `-i d/dt` on the unit-circumference circle with
//! values in a flat `U(k)` bundle.
//!
//! A flat twist is determined by its holonomy up to conjugation, so every
//! spectral quantity reduces to the eigen-angles `θ_j ∈ [0, 1)` of the
//! holonomy. In Fourier mode `n` the operator acts on the fibre by
//! `2π((n + δ) I + A)` with `A = V diag(θ) V*`, where `δ` encodes the spin
//! structure. The spectrum is therefore `{ 2π(n + δ + θ_j) }`.

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{CMatrix, Real, Tolerances};
use nalgebra::Complex;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// One of the two spin structures on the circle, as the boundary phase
/// exponent `δ` of spinors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpinStructure {
    /// `δ = 0`: constant spinors are harmonic.
    Periodic,
    /// `δ = 1/2`: no harmonic spinors without a twist.
    #[default]
    Antiperiodic,
}

impl SpinStructure {
    pub fn delta<T: Real>(self) -> T {
        match self {
            SpinStructure::Periodic => T::zero(),
            SpinStructure::Antiperiodic => T::lit(0.5),
        }
    }
}

impl fmt::Display for SpinStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpinStructure::Periodic => "0",
            SpinStructure::Antiperiodic => "1/2",
        })
    }
}

impl FromStr for SpinStructure {
    type Err = Error;

    /// Accepts `δ` as an exact rational, which must equal 0 or 1/2.
    fn from_str(s: &str) -> Result<Self> {
        let q = crate::cohomology::parse_rational(s)?;
        let (p, d) = (q.numer().to_string(), q.denom().to_string());
        match (p.as_str(), d.as_str()) {
            ("0", _) => Ok(SpinStructure::Periodic),
            ("1", "2") => Ok(SpinStructure::Antiperiodic),
            _ => Err(Error::input(format!(
                "spin structure delta must be 0 or 1/2, got {s:?}"
            ))),
        }
    }
}

/// Holonomy of a flat twist bundle: a unitary matrix, or directly its
/// eigen-angles (fractions of a full turn).
#[derive(Clone, Debug, PartialEq)]
pub enum HolonomySpec<T: Real> {
    Matrix(CMatrix<T>),
    Angles(Vec<T>),
}

impl<T: Real> HolonomySpec<T> {
    pub fn k(&self) -> usize {
        match self {
            HolonomySpec::Matrix(m) => m.nrows(),
            HolonomySpec::Angles(a) => a.len(),
        }
    }

    /// `diag(e^{2πiθ_j})`.
    pub fn diagonal(angles: &[T]) -> Self {
        let k = angles.len();
        HolonomySpec::Matrix(CMatrix::from_fn(k, k, |i, j| {
            if i == j {
                unit_phase(angles[i])
            } else {
                Complex::new(T::zero(), T::zero())
            }
        }))
    }

    /// `e^{2πiθ} I_k`; `scalar(k, 0)` is the identity, `scalar(k, 1/2)` is `-I`.
    pub fn scalar(k: usize, angle: T) -> Self {
        Self::diagonal(&vec![angle; k])
    }

    /// Max entry of `U U* - I` (zero for the angle form).
    pub fn unitarity_defect(&self) -> T {
        match self {
            HolonomySpec::Angles(_) => T::zero(),
            HolonomySpec::Matrix(u) => {
                let k = u.nrows();
                let prod = u * u.adjoint();
                linalg::max_abs_diff(&prod, &CMatrix::identity(k, k))
            }
        }
    }
}

/// `e^{2πiθ}`.
pub fn unit_phase<T: Real>(theta: T) -> Complex<T> {
    let phase = T::two_pi() * theta;
    Complex::new(phase.cos(), phase.sin())
}

/// Reduces an angle into `[0, 1)`.
pub fn normalize_angle<T: Real>(theta: T) -> T {
    let r = theta - theta.floor();
    if r >= T::one() {
        T::zero()
    } else {
        r
    }
}

/// Eigen-angles of a holonomy together with an orthonormal eigenbasis.
#[derive(Clone, Debug)]
pub struct HolonomyDecomposition<T: Real> {
    /// Ascending angles in `[0, 1)`.
    pub angles: Vec<T>,
    /// Column `j` is the eigenvector for `angles[j]`.
    pub vectors: CMatrix<T>,
}

impl<T: Real> HolonomyDecomposition<T> {
    pub fn decompose(h: &HolonomySpec<T>, tol: &Tolerances<T>) -> Result<Self> {
        match h {
            HolonomySpec::Angles(raw) => {
                if raw.is_empty() {
                    return Err(Error::input("holonomy needs k >= 1"));
                }
                if raw.iter().any(|t| !t.is_finite()) {
                    return Err(Error::input("holonomy angles must be finite"));
                }
                let normalized: Vec<T> = raw.iter().map(|&t| normalize_angle(t)).collect();
                let mut order: Vec<usize> = (0..raw.len()).collect();
                order.sort_by(|&a, &b| normalized[a].partial_cmp(&normalized[b]).unwrap());
                let k = raw.len();
                let vectors = CMatrix::from_fn(k, k, |i, j| {
                    let one = if order[j] == i { T::one() } else { T::zero() };
                    Complex::new(one, T::zero())
                });
                Ok(HolonomyDecomposition {
                    angles: order.iter().map(|&i| normalized[i]).collect(),
                    vectors,
                })
            }
            HolonomySpec::Matrix(u) => Self::decompose_unitary(u, tol),
        }
    }

    fn decompose_unitary(u: &CMatrix<T>, tol: &Tolerances<T>) -> Result<Self> {
        let k = u.nrows();
        if k == 0 || u.ncols() != k {
            return Err(Error::Dimension {
                expected: "non-empty square holonomy".into(),
                found: format!("{}x{}", u.nrows(), u.ncols()),
            });
        }
        let defect = HolonomySpec::Matrix(u.clone()).unitarity_defect();
        if !(defect <= tol.unitarity) {
            return Err(Error::NotUnitary {
                defect: defect.as_f64(),
                tol: tol.unitarity.as_f64(),
            });
        }
        // A normal matrix has diagonal Schur form; the Schur vectors are eigenvectors.
        let schur = u
            .clone()
            .try_schur(T::default_epsilon(), 10_000)
            .ok_or_else(|| Error::input("Schur iteration did not converge for holonomy"))?;
        let (q, t) = schur.unpack();
        let mut pairs: Vec<(T, usize)> = (0..k)
            .map(|i| {
                let lambda = t[(i, i)];
                (normalize_angle(lambda.im.atan2(lambda.re) / T::two_pi()), i)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        let mut vectors = CMatrix::zeros(k, k);
        for (dst, &(theta, src)) in pairs.iter().enumerate() {
            let v = q.column(src);
            let residual = (u * v - v * unit_phase(theta)).norm();
            if !(residual <= tol.residual) {
                return Err(Error::Residual {
                    residual: residual.as_f64(),
                    tol: tol.residual.as_f64(),
                });
            }
            vectors.set_column(dst, &v);
        }
        Ok(HolonomyDecomposition {
            angles: pairs.into_iter().map(|(t, _)| t).collect(),
            vectors,
        })
    }

    /// The Hermitian logarithm `V diag(θ) V*` with angles in `[0, 1)`.
    pub fn log_generator(&self) -> CMatrix<T> {
        linalg::reassemble(&self.vectors, &self.angles)
    }
}

/// Sorted eigenvalues inside `(-ε, ε)` grouped into multiplicity clusters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumWindow<T> {
    pub epsilon: T,
    /// `(value, multiplicity)` with strictly ascending values.
    pub eigenvalues: Vec<(T, usize)>,
}

impl<T: Real> SpectrumWindow<T> {
    /// Keeps values with `|v| < ε` and merges chains of neighbours closer
    /// than `cluster_tol`; a cluster reports its mean.
    pub fn from_values(mut values: Vec<T>, epsilon: T, cluster_tol: T) -> Self {
        values.retain(|v| v.abs() < epsilon);
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut eigenvalues: Vec<(T, usize)> = Vec::new();
        let mut sum = T::zero();
        let mut last = None;
        for v in values {
            match (last, eigenvalues.last_mut()) {
                (Some(prev), Some((mean, mult))) if v - prev <= cluster_tol => {
                    *mult += 1;
                    sum += v;
                    *mean = sum / T::from_subset(&(*mult as f64));
                }
                _ => {
                    eigenvalues.push((v, 1));
                    sum = v;
                }
            }
            last = Some(v);
        }
        SpectrumWindow { epsilon, eigenvalues }
    }

    /// Number of eigenvalues in the window, with multiplicity.
    pub fn count(&self) -> usize {
        self.eigenvalues.iter().map(|(_, m)| m).sum()
    }

    /// Multiplicity of the cluster at zero (within `tol`).
    pub fn multiplicity_near(&self, value: T, tol: T) -> usize {
        self.eigenvalues
            .iter()
            .filter(|(v, _)| (*v - value).abs() <= tol)
            .map(|(_, m)| m)
            .sum()
    }

    /// All values repeated by multiplicity.
    pub fn expanded(&self) -> Vec<T> {
        self.eigenvalues
            .iter()
            .flat_map(|&(v, m)| std::iter::repeat_n(v, m))
            .collect()
    }

    /// `value,multiplicity` CSV with header, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,multiplicity\n");
        for (v, m) in &self.eigenvalues {
            out.push_str(&crate::io::format_g17(v.as_f64()));
            out.push(',');
            out.push_str(&m.to_string());
            out.push('\n');
        }
        out
    }
}

/// Twisted Dirac operator for a fixed holonomy, spin structure and length scale.
#[derive(Clone, Debug)]
pub struct TwistedDirac<T: Real> {
    angles: Vec<T>,
    vectors: CMatrix<T>,
    spin: SpinStructure,
    scale: T,
}

impl<T: Real> TwistedDirac<T> {
    pub fn new(h: &HolonomySpec<T>, spin: SpinStructure, tol: &Tolerances<T>) -> Result<Self> {
        let d = HolonomyDecomposition::decompose(h, tol)?;
        Ok(TwistedDirac {
            angles: d.angles,
            vectors: d.vectors,
            spin,
            scale: T::one(),
        })
    }

    /// Uses the given angles verbatim, without reduction into `[0, 1)`.
    ///
    /// Needed to follow a continuous lift of the holonomy around a loop: the
    /// truncated operator at `θ = 1` differs from the one at `θ = 0`.
    pub fn from_lifted_angles(angles: Vec<T>, spin: SpinStructure) -> Result<Self> {
        if angles.is_empty() || angles.iter().any(|t| !t.is_finite()) {
            return Err(Error::input("lifted angles must be finite and non-empty"));
        }
        let k = angles.len();
        Ok(TwistedDirac {
            angles,
            vectors: CMatrix::identity(k, k),
            spin,
            scale: T::one(),
        })
    }

    /// Angles used verbatim with the eigenbasis given by the columns of `vectors`.
    pub(crate) fn from_parts(angles: Vec<T>, vectors: CMatrix<T>, spin: SpinStructure) -> Result<Self> {
        let mut d = Self::from_lifted_angles(angles, spin)?;
        if vectors.nrows() != d.k() || vectors.ncols() != d.k() {
            return Err(Error::Dimension {
                expected: format!("{0}x{0}", d.k()),
                found: format!("{}x{}", vectors.nrows(), vectors.ncols()),
            });
        }
        d.vectors = vectors;
        Ok(d)
    }

    /// Multiplies all eigenvalues by `scale` (circumference `1/scale`).
    pub fn with_scale(mut self, scale: T) -> Result<Self> {
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(Error::input("scale must be positive and finite"));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[T] {
        &self.angles
    }

    pub fn spin(&self) -> SpinStructure {
        self.spin
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    fn quantum(&self) -> T {
        T::two_pi() * self.scale
    }

    /// Closed-form spectrum `{ 2π·scale·(n + δ + θ_j) }` inside `(-ε, ε)`.
    pub fn analytic_spectrum(&self, epsilon: T, tol: &Tolerances<T>) -> Result<SpectrumWindow<T>> {
        if !(epsilon > T::zero()) {
            return Err(Error::input("epsilon must be positive"));
        }
        let delta: T = self.spin.delta();
        let quantum = self.quantum();
        let reach = epsilon / quantum;
        let mut values = Vec::new();
        for &theta in &self.angles {
            let base = delta + theta;
            let lo = (-reach - base).floor();
            let hi = (reach - base).ceil();
            let mut n = lo;
            while n <= hi {
                values.push(quantum * (n + base));
                n += T::one();
            }
        }
        Ok(SpectrumWindow::from_values(values, epsilon, tol.clustering))
    }

    /// `#{ j : θ_j + δ ∈ ℤ }` up to the integrality tolerance.
    pub fn kernel_dim(&self, tol: &Tolerances<T>) -> usize {
        let delta: T = self.spin.delta();
        self.angles
            .iter()
            .filter(|&&theta| {
                let x = theta + delta;
                (x - x.round()).abs() <= tol.integrality
            })
            .count()
    }

    /// Restriction to Fourier modes `n ∈ [-N, N]`.
    pub fn fourier_truncation(&self, modes: usize) -> Result<FourierTruncation<T>> {
        if modes == 0 {
            return Err(Error::input("truncation order N must be >= 1"));
        }
        Ok(FourierTruncation {
            generator: linalg::reassemble(&self.vectors, &self.angles),
            delta: self.spin.delta(),
            scale: self.scale,
            modes,
        })
    }
}

/// Block-diagonal finite section of the twisted Dirac operator: one `k × k`
/// block `2π·scale·((n + δ) I + A)` per Fourier mode `n ∈ [-N, N]`.
#[derive(Clone, Debug)]
pub struct FourierTruncation<T: Real> {
    generator: CMatrix<T>,
    delta: T,
    scale: T,
    modes: usize,
}

impl<T: Real> FourierTruncation<T> {
    pub fn k(&self) -> usize {
        self.generator.nrows()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Total size `k(2N + 1)`.
    pub fn dim(&self) -> usize {
        self.k() * (2 * self.modes + 1)
    }

    pub fn mode_range(&self) -> std::ops::RangeInclusive<i64> {
        -(self.modes as i64)..=(self.modes as i64)
    }

    /// The block for Fourier mode `n`.
    pub fn block(&self, n: i64) -> CMatrix<T> {
        let k = self.k();
        let shift = T::from_subset(&(n as f64)) + self.delta;
        let factor = Complex::new(T::two_pi() * self.scale, T::zero());
        (&self.generator + CMatrix::identity(k, k) * Complex::new(shift, T::zero())) * factor
    }

    /// Dense matrix; mode `n` occupies rows `(n + N)k .. (n + N + 1)k`.
    pub fn to_dense(&self) -> CMatrix<T> {
        let k = self.k();
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for (slot, n) in self.mode_range().enumerate() {
            out.view_mut((slot * k, slot * k), (k, k)).copy_from(&self.block(n));
        }
        out
    }

    /// All eigenvalues ascending, solved block by block.
    pub fn eigenvalues(&self) -> Vec<T> {
        let mut values: Vec<T> = self
            .mode_range()
            .flat_map(|n| linalg::hermitian_eigenvalues(&self.block(n)))
            .collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values
    }

    pub fn window(&self, epsilon: T, tol: &Tolerances<T>) -> SpectrumWindow<T> {
        SpectrumWindow::from_values(self.eigenvalues(), epsilon, tol.clustering)
    }

    /// Whether every eigenvalue of the full operator inside `(-ε, ε)` comes
    /// from a retained mode: `2π·scale·(N - 1 + δ) >= ε`.
    pub fn resolves_window(&self, epsilon: T) -> bool {
        let n = T::from_subset(&(self.modes as f64));
        T::two_pi() * self.scale * (n - T::one() + self.delta) >= epsilon
    }
}

/// Eigen-angles of the holonomy in `[0, 1)`, ascending.
pub fn holonomy_angles<T: Real>(h: &HolonomySpec<T>, tol: &Tolerances<T>) -> Result<Vec<T>> {
    Ok(HolonomyDecomposition::decompose(h, tol)?.angles)
}

pub fn analytic_spectrum<T: Real>(
    h: &HolonomySpec<T>,
    spin: SpinStructure,
    epsilon: T,
    tol: &Tolerances<T>,
) -> Result<SpectrumWindow<T>> {
    TwistedDirac::new(h, spin, tol)?.analytic_spectrum(epsilon, tol)
}

pub fn kernel_dim<T: Real>(h: &HolonomySpec<T>, spin: SpinStructure, tol: &Tolerances<T>) -> Result<usize> {
    Ok(TwistedDirac::new(h, spin, tol)?.kernel_dim(tol))
}

/// Dense truncation of size `k(2N + 1)`.
pub fn fourier_truncation<T: Real>(
    h: &HolonomySpec<T>,
    spin: SpinStructure,
    modes: usize,
    tol: &Tolerances<T>,
) -> Result<CMatrix<T>> {
    Ok(TwistedDirac::new(h, spin, tol)?.fourier_truncation(modes)?.to_dense())
}
