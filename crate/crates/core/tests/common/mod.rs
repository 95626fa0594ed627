#![allow(dead_code)]

use dirac_obstruction::{linalg, Matrix};
use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Unitary factor of a QR decomposition of a random complex matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> Matrix {
    random_complex(rng, n, n).qr().q()
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize, scale: f64) -> Matrix {
    let a = random_complex(rng, n, n);
    (&a + a.adjoint()) * Complex::new(scale / 2.0, 0.0)
}

/// `V diag(values) V*` for a random unitary `V`.
pub fn hermitian_with_spectrum(rng: &mut impl Rng, values: &[f64]) -> Matrix {
    let v = random_unitary(rng, values.len());
    linalg::reassemble(&v, values)
}

pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

pub fn max_deviation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch: {a:?} vs {b:?}");
    a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}
