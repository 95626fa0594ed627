#![allow(dead_code)]

use dirac_obstruction::io::FamilyFile;
use dirac_obstruction::obstruction::lifted_operator;
use dirac_obstruction::{linalg, Family, FamilyPoint, GridSpec, Matrix, SpinStructure, Tol};
use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dirac-obstruction"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut impl Rng, n: usize) -> Matrix {
    Matrix::from_fn(n, n, |_, _| {
        Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> Matrix {
    random_complex(rng, n).qr().q()
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize, scale: f64) -> Matrix {
    let a = random_complex(rng, n);
    (&a + a.adjoint()) * Complex::new(scale / 2.0, 0.0)
}

pub fn hermitian_with_spectrum(rng: &mut impl Rng, values: &[f64]) -> Matrix {
    linalg::reassemble(&random_unitary(rng, values.len()), values)
}

pub fn family_of(ops: Vec<Matrix>) -> Family {
    let dim = ops[0].nrows();
    let points = ops
        .into_iter()
        .enumerate()
        .map(|(i, op)| FamilyPoint {
            id: format!("p{i}"),
            coords: None,
            op,
        })
        .collect();
    Family::new(dim, points, vec![], &Tol::default()).unwrap()
}

/// Truncated U(1) Dirac operators along the lifted loop θ = i/steps, i = 0..=steps.
pub fn u1_loop_family(steps: usize, modes: usize) -> Family {
    let spec = GridSpec::new(1, steps, SpinStructure::Antiperiodic, modes).unwrap();
    let tol = Tol::default();
    let points = (0..=steps)
        .map(|i| {
            let theta = i as f64 / steps as f64;
            FamilyPoint {
                id: format!("t{i}"),
                coords: Some(vec![theta]),
                op: lifted_operator(&spec, &[theta], &tol).unwrap(),
            }
        })
        .collect();
    Family::new(2 * modes + 1, points, vec![], &tol).unwrap()
}

pub fn write_family(dir: &Path, name: &str, fam: &Family) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(&FamilyFile::from_family(fam)).unwrap()).unwrap();
    path
}

pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

pub fn max_deviation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch: {a:?} vs {b:?}");
    a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}
