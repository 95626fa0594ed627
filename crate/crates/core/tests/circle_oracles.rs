mod common;

use common::*;
use dirac_obstruction::circle::{unit_phase, HolonomyDecomposition};
use dirac_obstruction::{
    analytic_spectrum, holonomy_angles, kernel_dim, linalg, Holonomy, Matrix, SpinStructure, Tol, TwistedDirac,
};
use nalgebra::Complex;
use rand::Rng;
use std::f64::consts::PI;

const SPINS: [SpinStructure; 2] = [SpinStructure::Periodic, SpinStructure::Antiperiodic];

fn conjugated(v: &Matrix, angles: &[f64]) -> Holonomy {
    let n = angles.len();
    let d = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            unit_phase(angles[i])
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    Holonomy::Matrix(v * d * v.adjoint())
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

#[test]
fn construct_then_recover_angles() {
    let mut rng = rng(11);
    let tol = Tol::default();
    for _ in 0..200 {
        let k = rng.random_range(1..=8);
        let angles: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
        let v = random_unitary(&mut rng, k);
        let h = conjugated(&v, &angles);
        let got = holonomy_angles(&h, &tol).unwrap();
        assert!(got.windows(2).all(|w| w[0] <= w[1]));
        assert!(got.iter().all(|&t| (0.0..1.0).contains(&t)));
        // match each recovered angle to the sorted construction, circularly
        let want = sorted(angles.clone());
        let mut unused = want.clone();
        for g in &got {
            let (pos, d) = unused
                .iter()
                .enumerate()
                .map(|(i, w)| (i, circular_distance(*g, *w)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assert!(d < 1e-10, "angle {g} off by {d} from {want:?}");
            unused.remove(pos);
        }
    }
}

#[test]
fn recovered_eigenpairs_have_small_residual() {
    let mut rng = rng(12);
    let tol = Tol::default();
    for k in 1..=8 {
        // repeated angles exercise degenerate eigenspaces
        let mut angles: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
        if k > 2 {
            angles[1] = angles[0];
        }
        let h = conjugated(&random_unitary(&mut rng, k), &angles);
        let Holonomy::Matrix(u) = &h else { unreachable!() };
        let d = HolonomyDecomposition::decompose(&h, &tol).unwrap();
        for (j, theta) in d.angles.iter().enumerate() {
            let v = d.vectors.column(j);
            let r = (u * v - v * unit_phase(*theta)).norm();
            assert!(r <= 1e-9);
        }
        let gram = d.vectors.adjoint() * &d.vectors;
        assert!(linalg::max_abs_diff(&gram, &Matrix::identity(k, k)) < 1e-10);
    }
}

#[test]
fn truncation_matches_closed_form_inside_window() {
    let mut rng = rng(13);
    let tol = Tol::default();
    for _ in 0..100 {
        let k = rng.random_range(1..=8);
        let angles: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
        let h = conjugated(&random_unitary(&mut rng, k), &angles);
        for spin in SPINS {
            let dirac = TwistedDirac::new(&h, spin, &tol).unwrap();
            let trunc = dirac.fourier_truncation(4).unwrap();
            assert!(trunc.resolves_window(PI));
            // independent route: dense solve of the full truncation
            let dense = trunc.to_dense();
            assert!(linalg::hermitian_defect(&dense) < 1e-12);
            let mut inside: Vec<f64> = linalg::hermitian_eigenvalues(&dense)
                .into_iter()
                .filter(|x| x.abs() < PI)
                .collect();
            inside.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let analytic = dirac.analytic_spectrum(PI, &tol).unwrap().expanded();
            assert!(max_deviation(&inside, &analytic) < 1e-9);
        }
    }
}

#[test]
fn conjugation_invariance() {
    let mut rng = rng(14);
    let tol = Tol::default();
    for _ in 0..50 {
        let k = rng.random_range(1..=6);
        let mut angles: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
        angles[0] = 0.5;
        let h = conjugated(&random_unitary(&mut rng, k), &angles);
        let Holonomy::Matrix(u) = &h else { unreachable!() };
        let w = random_unitary(&mut rng, k);
        let h2 = Holonomy::Matrix(&w * u * w.adjoint());
        for spin in SPINS {
            let a = analytic_spectrum(&h, spin, 5.0, &tol).unwrap();
            let b = analytic_spectrum(&h2, spin, 5.0, &tol).unwrap();
            assert_eq!(a.count(), b.count());
            assert!(max_deviation(&a.expanded(), &b.expanded()) < 1e-9);
            assert_eq!(
                kernel_dim(&h, spin, &tol).unwrap(),
                kernel_dim(&h2, spin, &tol).unwrap()
            );
        }
    }
}

#[test]
fn integer_shift_of_angles_changes_nothing() {
    let mut rng = rng(15);
    let tol = Tol::default();
    for _ in 0..50 {
        let k = rng.random_range(1..=5);
        let angles: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
        let shifted: Vec<f64> = angles.iter().map(|t| t + 1.0).collect();
        for spin in SPINS {
            let a = analytic_spectrum(&Holonomy::Angles(angles.clone()), spin, 7.0, &tol).unwrap();
            let b = analytic_spectrum(&Holonomy::Angles(shifted.clone()), spin, 7.0, &tol).unwrap();
            assert_eq!(a.count(), b.count());
            assert!(max_deviation(&a.expanded(), &b.expanded()) < 1e-12);
        }
    }
}

#[test]
fn kernel_dim_bounded_by_rank_and_matches_window() {
    let mut rng = rng(16);
    let tol = Tol::default();
    for _ in 0..100 {
        let k = rng.random_range(1..=6);
        // mix of integral and generic angles
        let angles: Vec<f64> = (0..k)
            .map(|_| match rng.random_range(0..3) {
                0 => 0.0,
                1 => 0.5,
                _ => rng.random_range(0.01..0.49),
            })
            .collect();
        for spin in SPINS {
            let h = Holonomy::Angles(angles.clone());
            let kd = kernel_dim(&h, spin, &tol).unwrap();
            assert!(kd <= k);
            let w = analytic_spectrum(&h, spin, 1e-3, &tol).unwrap();
            assert_eq!(w.multiplicity_near(0.0, 1e-8), kd);
            let delta: f64 = spin.delta();
            if angles.iter().all(|t| ((t + delta) - (t + delta).round()).abs() < 1e-12) {
                assert_eq!(kd, k);
            }
        }
    }
}

#[test]
fn scalar_holonomy_kernels_fill_the_rank() {
    let tol = Tol::default();
    for k in 1..=4 {
        let minus = Holonomy::scalar(k, 0.5);
        let id = Holonomy::scalar(k, 0.0);
        assert_eq!(kernel_dim(&minus, SpinStructure::Antiperiodic, &tol).unwrap(), k);
        assert_eq!(kernel_dim(&id, SpinStructure::Periodic, &tol).unwrap(), k);
        // the dense truncation agrees
        for (h, spin) in [(&minus, SpinStructure::Antiperiodic), (&id, SpinStructure::Periodic)] {
            let m = dirac_obstruction::fourier_truncation(h, spin, 2, &tol).unwrap();
            let zeros = linalg::hermitian_eigenvalues(&m)
                .into_iter()
                .filter(|x| x.abs() < 1e-9)
                .count();
            assert_eq!(zeros, k);
        }
    }
}

#[test]
fn single_precision_truncation() {
    let tol = dirac_obstruction::Tolerances::<f32>::default();
    let h = dirac_obstruction::HolonomySpec::<f32>::Angles(vec![0.5, 0.25]);
    let d = TwistedDirac::new(&h, SpinStructure::Antiperiodic, &tol).unwrap();
    let t = d.fourier_truncation(3).unwrap();
    let inside: Vec<f32> = t.eigenvalues().into_iter().filter(|x| x.abs() < 3.0).collect();
    let closed = d.analytic_spectrum(3.0, &tol).unwrap().expanded();
    assert_eq!(inside.len(), closed.len());
    for (a, b) in inside.iter().zip(&closed) {
        assert!((a - b).abs() < 1e-4);
    }
}
