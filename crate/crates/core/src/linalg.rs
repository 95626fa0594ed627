//! Dense Hermitian helpers on top of `nalgebra`.

use crate::error::{Error, Result};
use crate::scalar::{CMatrix, Real};
use nalgebra::{Complex, ComplexField};

/// Max entry-wise modulus of `A - A*`.
pub fn hermitian_defect<T: Real>(a: &CMatrix<T>) -> T {
    let n = a.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            let d = (a[(i, j)] - a[(j, i)].conj()).modulus();
            worst = worst.max(d);
        }
    }
    worst
}

/// Checks squareness and Hermitian symmetry, then returns `(A + A*) / 2`.
pub fn symmetrized<T: Real>(a: &CMatrix<T>, tol: T) -> Result<CMatrix<T>> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension {
            expected: "square matrix".into(),
            found: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    let defect = hermitian_defect(a);
    if !(defect <= tol) {
        return Err(Error::NotHermitian {
            defect: defect.as_f64(),
            tol: tol.as_f64(),
        });
    }
    let half = Complex::new(T::lit(0.5), T::zero());
    Ok((a + a.adjoint()) * half)
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending.
///
/// Columns of the returned matrix are the matching orthonormal eigenvectors.
/// The input is assumed Hermitian; only its symmetric part is used.
pub fn hermitian_eigen<T: Real>(a: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues<T: Real>(a: &CMatrix<T>) -> Vec<T> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<T> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// `V diag(values) V*`.
pub fn reassemble<T: Real>(vectors: &CMatrix<T>, values: &[T]) -> CMatrix<T> {
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |i, j| {
        vectors[(i, j)] * Complex::new(values[j], T::zero())
    });
    let out = &scaled * vectors.adjoint();
    // exact Hermitian symmetry after rounding
    let half = Complex::new(T::lit(0.5), T::zero());
    (&out + out.adjoint()) * half
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn apply_spectral<T: Real>(a: &CMatrix<T>, f: impl Fn(T) -> T) -> CMatrix<T> {
    let (values, vectors) = hermitian_eigen(a);
    let mapped: Vec<T> = values.into_iter().map(f).collect();
    reassemble(&vectors, &mapped)
}

/// Operator norm of a Hermitian matrix (largest |eigenvalue|).
pub fn hermitian_norm<T: Real>(a: &CMatrix<T>) -> T {
    hermitian_eigenvalues(a)
        .into_iter()
        .fold(T::zero(), |m, x| m.max(x.abs()))
}

/// `diag(values)` as a complex matrix.
pub fn real_diagonal<T: Real>(values: &[T]) -> CMatrix<T> {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex::new(values[i], T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    })
}

/// Max entry-wise modulus of `A - B`.
pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |m, (x, y)| m.max((*x - *y).modulus()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn eigen_of_pauli_y() {
        let y = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
        let (vals, vecs) = hermitian_eigen(&y);
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        let back = reassemble(&vecs, &vals);
        assert!(max_abs_diff(&back, &y) < 1e-14);
    }

    #[test]
    fn symmetrize_rejects_skew() {
        let a = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(symmetrized(&a, 1e-10), Err(Error::NotHermitian { .. })));
        let b = CMatrix::<f64>::zeros(2, 3);
        assert!(matches!(symmetrized(&b, 1e-10), Err(Error::Dimension { .. })));
    }

    #[test]
    fn empty_matrix_has_no_spectrum() {
        let a = CMatrix::<f64>::zeros(0, 0);
        assert!(hermitian_eigenvalues(&a).is_empty());
        assert_eq!(hermitian_norm(&a), 0.0);
    }
}
