//! Finite-dimensional mechanics of the kernel-dimension obstruction:
//! bounded transform, shift deformations `g_j`, spectral counting in an open
//! window, the invertibility cover `U_0 … U_k`, and spectral flow along
//! discretized paths.

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{CMatrix, Real, Tolerances};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

/// The bounded transform `x / sqrt(1 + x²)`.
#[inline]
pub fn phi<T: Real>(x: T) -> T {
    x / (T::one() + x * x).sqrt()
}

/// The shift `a_j = jε / (k + 1)`.
#[inline]
pub fn shift_value<T: Real>(j: usize, k: usize, epsilon: T) -> T {
    T::from_subset(&(j as f64)) * epsilon / T::from_subset(&((k + 1) as f64))
}

/// Piecewise-linear `g_j`: moves `a` to 0, fixes `±1`, identity outside `[-1, 1]`.
#[inline]
pub fn shift_map<T: Real>(x: T, a: T) -> T {
    if x.abs() >= T::one() {
        x
    } else if x <= a {
        (x - a) / (T::one() + a)
    } else {
        (x - a) / (T::one() - a)
    }
}

/// `F = A / sqrt(1 + A²)` by functional calculus. `‖F‖ < 1`.
pub fn bounded_transform<T: Real>(a: &CMatrix<T>, tol: &Tolerances<T>) -> Result<CMatrix<T>> {
    let a = linalg::symmetrized(a, tol.hermitian)?;
    Ok(linalg::apply_spectral(&a, phi))
}

/// `g_j(F)` for `a_j = jε/(k+1)`. The kernel of the result is the
/// `a_j`-eigenspace of `F`.
pub fn shift_deform<T: Real>(
    f: &CMatrix<T>,
    j: usize,
    k: usize,
    epsilon: T,
    tol: &Tolerances<T>,
) -> Result<CMatrix<T>> {
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::input(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if j > k {
        return Err(Error::input(format!("shift index j = {j} outside 0..={k}")));
    }
    let f = linalg::symmetrized(f, tol.hermitian)?;
    let (values, vectors) = linalg::hermitian_eigen(&f);
    let norm = values.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    if norm > T::one() + tol.hermitian {
        return Err(Error::input(format!("shift deformation needs ||F|| <= 1, got {norm}")));
    }
    let a = shift_value(j, k, epsilon);
    let mapped: Vec<T> = values.into_iter().map(|x| shift_map(x, a)).collect();
    Ok(linalg::reassemble(&vectors, &mapped))
}

/// Counts eigenvalues strictly inside `(-ε, ε)`, refusing to decide when one
/// sits within the boundary tolerance of `±ε`.
pub fn count_in_window<T: Real>(eigenvalues: &[T], epsilon: T, tol: &Tolerances<T>) -> Result<usize> {
    if !(epsilon > T::zero()) {
        return Err(Error::input("epsilon must be positive"));
    }
    let mut count = 0;
    for &x in eigenvalues {
        if (x.abs() - epsilon).abs() <= tol.boundary {
            return Err(Error::BoundaryAmbiguity {
                eigenvalue: x.as_f64(),
                epsilon: epsilon.as_f64(),
                tol: tol.boundary.as_f64(),
            });
        }
        if x.abs() < epsilon {
            count += 1;
        }
    }
    Ok(count)
}

/// `#(spec(A) ∩ (-ε, ε))` with multiplicity.
pub fn spectral_count<T: Real>(a: &CMatrix<T>, epsilon: T, tol: &Tolerances<T>) -> Result<usize> {
    let a = linalg::symmetrized(a, tol.hermitian)?;
    count_in_window(&linalg::hermitian_eigenvalues(&a), epsilon, tol)
}

/// One sample of a family: a parameter point and its Hermitian operator.
#[derive(Clone, Debug)]
pub struct FamilyPoint<T: Real> {
    pub id: String,
    pub coords: Option<Vec<T>>,
    pub op: CMatrix<T>,
}

/// Finitely many Hermitian operators of a common size, indexed by point ids.
#[derive(Clone, Debug)]
pub struct SampledFamily<T: Real> {
    dim: usize,
    points: Vec<FamilyPoint<T>>,
    edges: Vec<(String, String)>,
    index: HashMap<String, usize>,
}

impl<T: Real> SampledFamily<T> {
    /// Validates sizes, Hermitian symmetry and id uniqueness; operators are
    /// replaced by their symmetrized form.
    pub fn new(
        dim: usize,
        points: Vec<FamilyPoint<T>>,
        edges: Vec<(String, String)>,
        tol: &Tolerances<T>,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(points.len());
        let mut clean = Vec::with_capacity(points.len());
        for (pos, p) in points.into_iter().enumerate() {
            if p.op.nrows() != dim || p.op.ncols() != dim {
                return Err(Error::at_point(
                    &p.id,
                    Error::Dimension {
                        expected: format!("{dim}x{dim}"),
                        found: format!("{}x{}", p.op.nrows(), p.op.ncols()),
                    },
                ));
            }
            let op = linalg::symmetrized(&p.op, tol.hermitian).map_err(|e| Error::at_point(&p.id, e))?;
            if index.insert(p.id.clone(), pos).is_some() {
                return Err(Error::input(format!("duplicate point id {:?}", p.id)));
            }
            clean.push(FamilyPoint { op, ..p });
        }
        for (a, b) in &edges {
            for id in [a, b] {
                if !index.contains_key(id) {
                    return Err(Error::UnknownId(id.clone()));
                }
            }
        }
        Ok(SampledFamily {
            dim,
            points: clean,
            edges,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[FamilyPoint<T>] {
        &self.points
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, id: &str) -> Result<&FamilyPoint<T>> {
        self.index
            .get(id)
            .map(|&i| &self.points[i])
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    /// Largest spectral count over all points.
    pub fn max_spectral_count(&self, epsilon: T, tol: &Tolerances<T>) -> Result<usize> {
        let counts: Vec<Result<usize>> = self
            .points
            .par_iter()
            .map(|p| {
                count_in_window(&linalg::hermitian_eigenvalues(&p.op), epsilon, tol)
                    .map_err(|e| Error::at_point(&p.id, e))
            })
            .collect();
        counts.into_iter().try_fold(0, |m, c| Ok(m.max(c?)))
    }
}

/// Ordered point ids; a closed path also steps from the last id back to the first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSpec {
    pub ids: Vec<String>,
    pub closed: bool,
}

impl PathSpec {
    pub fn new(ids: Vec<String>, closed: bool) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::input("path needs at least one point"));
        }
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::input("consecutive path ids must differ"));
        }
        if closed && ids.len() > 1 && ids.first() == ids.last() {
            return Err(Error::input("closed path must not repeat its first id at the end"));
        }
        Ok(PathSpec { ids, closed })
    }

    pub fn open<S: Into<String>>(ids: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::new(ids.into_iter().map(Into::into).collect(), false)
    }

    pub fn reversed(&self) -> Self {
        let mut ids = self.ids.clone();
        ids.reverse();
        PathSpec {
            ids,
            closed: self.closed,
        }
    }

    /// Consecutive `(from, to)` pairs, including the closing step.
    pub fn steps(&self) -> Vec<(&str, &str)> {
        let mut steps: Vec<(&str, &str)> = self.ids.windows(2).map(|w| (w[0].as_str(), w[1].as_str())).collect();
        if self.closed && self.ids.len() > 1 {
            steps.push((self.ids[self.ids.len() - 1].as_str(), self.ids[0].as_str()));
        }
        steps
    }
}

/// The sets `U_j = { b : A_b - a_j is invertible }` and whether they cover.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverReport<T> {
    pub k: usize,
    pub epsilon: T,
    /// `a_0 … a_k`.
    pub shifts: Vec<T>,
    /// `sets[j]` lists the ids in `U_j`, in family order.
    pub sets: Vec<Vec<String>>,
    pub covered: bool,
    pub uncovered_ids: Vec<String>,
    /// `(id, j)` pairs whose smallest singular value of `A_b - a_j` fell in
    /// the ambiguity band; these are treated as not invertible.
    pub indeterminate: Vec<(String, usize)>,
}

/// Builds the invertibility cover for shifts `a_j = jε/(k+1)`, `j = 0..=k`.
///
/// A shifted operator counts as invertible when its smallest singular value
/// exceeds `10 · invertibility`; values within a factor of ten of the
/// threshold are reported as indeterminate and excluded.
pub fn build_cover<T: Real>(
    fam: &SampledFamily<T>,
    k: usize,
    epsilon: T,
    tol: &Tolerances<T>,
) -> Result<CoverReport<T>> {
    if !(epsilon > T::zero()) || !epsilon.is_finite() {
        return Err(Error::input("epsilon must be positive"));
    }
    let shifts: Vec<T> = (0..=k).map(|j| shift_value(j, k, epsilon)).collect();
    let ten = T::lit(10.0);
    let (lo, hi) = (tol.invertibility / ten, tol.invertibility * ten);

    // per point: (invertible flags, indeterminate js)
    let verdicts: Vec<(Vec<bool>, Vec<usize>)> = fam
        .points
        .par_iter()
        .map(|p| {
            let values = linalg::hermitian_eigenvalues(&p.op);
            let mut flags = Vec::with_capacity(shifts.len());
            let mut unsure = Vec::new();
            for (j, &a) in shifts.iter().enumerate() {
                let sigma = values.iter().fold(T::lit(f64::INFINITY), |m, &x| m.min((x - a).abs()));
                flags.push(sigma > hi);
                if sigma > lo && sigma <= hi {
                    unsure.push(j);
                }
            }
            (flags, unsure)
        })
        .collect();

    let mut sets = vec![Vec::new(); k + 1];
    let mut uncovered_ids = Vec::new();
    let mut indeterminate = Vec::new();
    for (p, (flags, unsure)) in fam.points.iter().zip(verdicts) {
        for (j, &inv) in flags.iter().enumerate() {
            if inv {
                sets[j].push(p.id.clone());
            }
        }
        if !flags.iter().any(|&f| f) {
            uncovered_ids.push(p.id.clone());
        }
        indeterminate.extend(unsure.into_iter().map(|j| (p.id.clone(), j)));
    }
    Ok(CoverReport {
        k,
        epsilon,
        shifts,
        sets,
        covered: uncovered_ids.is_empty(),
        uncovered_ids,
        indeterminate,
    })
}

/// Net number of eigenvalues crossing zero upward along the path, computed
/// as the telescoped sum of `n₋(prev) - n₋(next)` over its steps.
///
/// Each step must move the operator by less than `eta` in operator norm and
/// the endpoints must keep their spectrum out of `[-eta, eta]`; otherwise a
/// crossing could go unseen.
pub fn spectral_flow<T: Real>(fam: &SampledFamily<T>, path: &PathSpec, eta: T) -> Result<i64> {
    if !(eta > T::zero()) {
        return Err(Error::input("eta must be positive"));
    }
    for id in &path.ids {
        fam.get(id)?;
    }
    let steps = path.steps();

    let jumps: Vec<T> = steps
        .par_iter()
        .map(|(from, to)| {
            let diff = &fam.get(to).unwrap().op - &fam.get(from).unwrap().op;
            linalg::hermitian_norm(&diff)
        })
        .collect();
    for ((from, to), jump) in steps.iter().zip(&jumps) {
        if !(*jump < eta) {
            return Err(Error::RefinementRequired {
                from: from.to_string(),
                to: to.to_string(),
                jump: jump.as_f64(),
                eta: eta.as_f64(),
            });
        }
    }

    let first = path.ids.first().unwrap();
    let last = if path.closed { first } else { path.ids.last().unwrap() };
    for id in [first, last] {
        let values = linalg::hermitian_eigenvalues(&fam.get(id)?.op);
        if let Some(&x) = values.iter().find(|x| x.abs() <= eta) {
            return Err(Error::EndpointDegeneracy {
                id: id.clone(),
                eigenvalue: x.as_f64(),
                eta: eta.as_f64(),
            });
        }
    }

    let mut negatives: HashMap<&str, i64> = HashMap::new();
    for id in &path.ids {
        if !negatives.contains_key(id.as_str()) {
            let n = linalg::hermitian_eigenvalues(&fam.get(id)?.op)
                .into_iter()
                .filter(|x| *x < T::zero())
                .count();
            negatives.insert(id.as_str(), n as i64);
        }
    }
    Ok(steps.iter().map(|(from, to)| negatives[from] - negatives[to]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Complex;

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    fn diag(values: &[f64]) -> CMatrix<f64> {
        linalg::real_diagonal(values)
    }

    fn family(ops: Vec<(&str, CMatrix<f64>)>) -> SampledFamily<f64> {
        let dim = ops[0].1.nrows();
        let points = ops
            .into_iter()
            .map(|(id, op)| FamilyPoint {
                id: id.into(),
                coords: None,
                op,
            })
            .collect();
        SampledFamily::new(dim, points, vec![], &tol()).unwrap()
    }

    #[test]
    fn bounded_transform_examples() {
        let z = bounded_transform(&diag(&[0.0, 0.0]), &tol()).unwrap();
        assert!(z.iter().all(|x| x.norm() == 0.0));
        let f = bounded_transform(&diag(&[1.0, -1.0]), &tol()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(linalg::max_abs_diff(&f, &diag(&[r, -r])) < 1e-15);
        let mut bad = diag(&[1.0, 2.0]);
        bad[(0, 1)] = Complex::new(1.0, 0.0);
        assert!(matches!(
            bounded_transform(&bad, &tol()),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn shift_deform_examples() {
        let f = diag(&[0.3, -0.6, 0.95]);
        let g0 = shift_deform(&f, 0, 2, 0.5, &tol()).unwrap();
        assert!(linalg::max_abs_diff(&g0, &f) < 1e-15);

        let a = shift_value(2, 3, 0.8);
        let g = shift_deform(&diag(&[a, a]), 2, 3, 0.8, &tol()).unwrap();
        assert!(g.iter().all(|x| x.norm() < 1e-15));

        assert!(shift_deform(&f, 3, 2, 0.5, &tol()).is_err());
        assert!(shift_deform(&f, 0, 2, 1.0, &tol()).is_err());
        assert!(shift_deform(&f, 0, 2, 0.0, &tol()).is_err());
        assert!(shift_deform(&diag(&[2.0]), 0, 2, 0.5, &tol()).is_err());
    }

    #[test]
    fn shift_map_is_continuous_at_the_seams() {
        for &a in &[0.0_f64, 0.2, 0.7] {
            assert_eq!(shift_map(a, a), 0.0);
            assert!((shift_map(1.0, a) - 1.0).abs() < 1e-15);
            assert!((shift_map(-1.0, a) + 1.0).abs() < 1e-15);
            assert_eq!(shift_map(1.5, a), 1.5);
            assert_eq!(shift_map(-3.0, a), -3.0);
        }
    }

    #[test]
    fn spectral_count_examples() {
        assert_eq!(spectral_count(&diag(&[0.5, -0.5]), 0.4, &tol()).unwrap(), 0);
        assert_eq!(spectral_count(&diag(&[0.0, 0.1, 0.9]), 0.5, &tol()).unwrap(), 2);
        let err = spectral_count(&diag(&[0.5]), 0.5 + 1e-9, &tol()).unwrap_err();
        assert!(matches!(err, Error::BoundaryAmbiguity { .. }));
        assert!(spectral_count(&diag(&[0.5]), 0.0, &tol()).is_err());
    }

    #[test]
    fn cover_examples() {
        let fam = family(vec![("a", diag(&[0.5, -0.5])), ("b", diag(&[0.5, -0.5]))]);
        let r = build_cover(&fam, 1, 0.4, &tol()).unwrap();
        assert_eq!(r.sets[0], vec!["a", "b"]);
        assert!(r.covered);

        let (k, eps) = (3, 0.6);
        let first_k: Vec<f64> = (0..k).map(|j| shift_value(j, k, eps)).collect();
        let r = build_cover(&family(vec![("p", diag(&first_k))]), k, eps, &tol()).unwrap();
        assert!(r.covered);
        for j in 0..k {
            assert!(r.sets[j].is_empty());
        }
        assert_eq!(r.sets[k], vec!["p"]);

        let all: Vec<f64> = (0..=k).map(|j| shift_value(j, k, eps)).collect();
        let fam = family(vec![("p", diag(&all))]);
        let r = build_cover(&fam, k, eps, &tol()).unwrap();
        assert!(!r.covered);
        assert_eq!(r.uncovered_ids, vec!["p"]);
        assert_eq!(fam.max_spectral_count(eps, &tol()).unwrap(), k + 1);
    }

    #[test]
    fn near_singular_shift_is_indeterminate() {
        let fam = family(vec![("p", diag(&[5e-8, 0.9]))]);
        let r = build_cover(&fam, 1, 0.5, &tol()).unwrap();
        assert_eq!(r.indeterminate, vec![("p".to_string(), 0)]);
        assert!(r.sets[0].is_empty());
        assert_eq!(r.sets[1], vec!["p"]);
    }

    #[test]
    fn family_validation() {
        let p = |id: &str, op| FamilyPoint {
            id: id.into(),
            coords: None,
            op,
        };
        assert!(SampledFamily::new(2, vec![p("a", diag(&[1.0]))], vec![], &tol()).is_err());
        assert!(SampledFamily::new(1, vec![p("a", diag(&[1.0])), p("a", diag(&[2.0]))], vec![], &tol()).is_err());
        let e = SampledFamily::new(1, vec![p("a", diag(&[1.0]))], vec![("a".into(), "z".into())], &tol());
        assert_eq!(e.unwrap_err(), Error::UnknownId("z".into()));
    }

    #[test]
    fn flow_on_a_single_crossing() {
        let ops: Vec<(String, CMatrix<f64>)> = (0..=10)
            .map(|i| (format!("t{i}"), diag(&[-1.0 + 0.2 * i as f64, 3.0])))
            .collect();
        let fam = family(ops.iter().map(|(id, m)| (id.as_str(), m.clone())).collect());
        let path = PathSpec::open(ops.iter().map(|(id, _)| id.clone())).unwrap();
        assert_eq!(spectral_flow(&fam, &path, 0.5).unwrap(), 1);
        assert_eq!(spectral_flow(&fam, &path.reversed(), 0.5).unwrap(), -1);
        let constant = PathSpec::open(["t0"]).unwrap();
        assert_eq!(spectral_flow(&fam, &constant, 0.5).unwrap(), 0);

        let coarse = PathSpec::open(["t0", "t5", "t10"]).unwrap();
        match spectral_flow(&fam, &coarse, 0.5).unwrap_err() {
            Error::RefinementRequired { from, to, .. } => assert_eq!((from.as_str(), to.as_str()), ("t0", "t5")),
            e => panic!("unexpected {e}"),
        }
        let degenerate = PathSpec::open(["t4", "t5"]).unwrap();
        assert!(matches!(
            spectral_flow(&fam, &degenerate, 0.5),
            Err(Error::EndpointDegeneracy { .. })
        ));
        let unknown = PathSpec::open(["t0", "nope"]).unwrap();
        assert!(matches!(spectral_flow(&fam, &unknown, 0.5), Err(Error::UnknownId(_))));
    }

    #[test]
    fn path_validation() {
        assert!(PathSpec::open(Vec::<String>::new()).is_err());
        assert!(PathSpec::open(["a", "a"]).is_err());
        assert!(PathSpec::new(vec!["a".into(), "b".into(), "a".into()], true).is_err());
        let closed = PathSpec::new(vec!["a".into(), "b".into()], true).unwrap();
        assert_eq!(closed.steps(), vec![("a", "b"), ("b", "a")]);
    }
}
