//! `dirac-obstruction`: batch front end for spectra, cohomology products,
//! invertibility covers, spectral flow and the end-to-end verifier.
//!
//! Exit codes: 0 success or pass, 2 input or numerical-ambiguity error,
//! 3 verified negative (uncovered family, failed verdict).

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dirac_obstruction::io::{parse_number, FamilyFile, HolonomyFile};
use dirac_obstruction::{
    build_cover, obstruction_product, spectral_flow, verify_contrapositive, AlgebraContext, Class, GridSpec, Holonomy,
    PathSpec, SpinStructure, Tol, TwistedDirac,
};
use serde_json::json;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "dirac-obstruction",
    version,
    about = "Kernel-dimension obstruction toolkit for twisted Dirac families"
)]
struct Cli {
    /// Worker threads for per-point evaluation.
    #[arg(long, global = true, env = "DIRAC_OBSTRUCTION_JOBS")]
    jobs: Option<usize>,

    #[command(flatten)]
    tol: TolArgs,

    #[command(subcommand)]
    command: Command,
}

/// Tolerance overrides; defaults are 1e-10 (unitarity, Hermitian),
/// 1e-9 (residual) and 1e-8 (clustering, integrality, invertibility, boundary).
#[derive(Args, Debug)]
struct TolArgs {
    /// Unitarity defect allowed in holonomy input [default: 1e-10]
    #[arg(long, global = true)]
    u_tol: Option<f64>,
    /// Eigen-decomposition residual [default: 1e-9]
    #[arg(long, global = true)]
    r_tol: Option<f64>,
    /// Eigenvalue clustering for multiplicities [default: 1e-8]
    #[arg(long, global = true)]
    c_tol: Option<f64>,
    /// Distance to an integer counted as a kernel mode [default: 1e-8]
    #[arg(long, global = true)]
    i_tol: Option<f64>,
    /// Hermitian defect allowed in matrix input [default: 1e-10]
    #[arg(long, global = true)]
    h_tol: Option<f64>,
    /// Smallest singular value treated as invertible [default: 1e-8]
    #[arg(long, global = true)]
    inv_tol: Option<f64>,
    /// Margin around ±epsilon flagged as ambiguous [default: 1e-8]
    #[arg(long, global = true)]
    b_tol: Option<f64>,
}

impl TolArgs {
    fn resolve(&self) -> Result<Tol> {
        let mut t = Tol::default();
        let overrides = [
            (self.u_tol, &mut t.unitarity),
            (self.r_tol, &mut t.residual),
            (self.c_tol, &mut t.clustering),
            (self.i_tol, &mut t.integrality),
            (self.h_tol, &mut t.hermitian),
            (self.inv_tol, &mut t.invertibility),
            (self.b_tol, &mut t.boundary),
        ];
        for (value, slot) in overrides {
            if let Some(v) = value {
                *slot = v;
            }
        }
        if let Some(name) = t.first_non_positive() {
            bail!("tolerance {name} must be positive");
        }
        Ok(t)
    }
}

#[derive(Args, Debug)]
struct HolonomySource {
    /// Holonomy JSON file (`k` plus `matrix` or `angles`, optional `delta`).
    file: Option<PathBuf>,
    /// Comma-separated angles (fractions of a turn, decimals or p/q).
    #[arg(long, conflicts_with = "file")]
    angles: Option<String>,
    /// Spin structure: 0 or 1/2 (default: the file's delta, else 1/2).
    #[arg(long)]
    delta: Option<String>,
}

impl HolonomySource {
    fn load(&self) -> Result<(Holonomy, SpinStructure)> {
        let (h, file_spin) = match (&self.file, &self.angles) {
            (Some(path), None) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let f = HolonomyFile::parse(&text)?;
                (f.holonomy()?, f.spin()?)
            }
            (None, Some(list)) => {
                let angles = list
                    .split(',')
                    .map(parse_number::<f64>)
                    .collect::<Result<Vec<_>, _>>()?;
                (Holonomy::Angles(angles), None)
            }
            _ => bail!("give a holonomy file or --angles"),
        };
        let spin = match &self.delta {
            Some(d) => d.parse()?,
            None => file_spin.unwrap_or_default(),
        };
        Ok((h, spin))
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues inside (-epsilon, epsilon) as CSV `value,multiplicity`.
    Spectrum {
        #[command(flatten)]
        holonomy: HolonomySource,
        #[arg(long)]
        epsilon: String,
        /// Use the Fourier truncation with modes -N..N instead of the closed form.
        #[arg(long)]
        truncation: Option<usize>,
        #[arg(long, default_value = "1")]
        scale: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Kernel dimension of the twisted Dirac operator.
    KernelDim {
        #[command(flatten)]
        holonomy: HolonomySource,
    },
    /// Cup product of generators c_i in the exterior algebra on k generators.
    Cohomology {
        #[arg(long)]
        k: usize,
        /// Strictly ascending, comma-separated generator indices.
        #[arg(long)]
        indices: String,
    },
    /// Invertibility cover of a sampled family; exit 3 if it does not cover.
    Cover {
        family: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        epsilon: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// End-to-end check on the torus grid; exit 3 if the verdict fails.
    Verify {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        resolution: usize,
        #[arg(long, default_value = "1/2")]
        delta: String,
        #[arg(long)]
        truncation: usize,
        /// Comma-separated window radii.
        #[arg(long)]
        epsilons: String,
        /// Apply the bounded transform and measure epsilon through it.
        #[arg(long)]
        bounded: bool,
        /// Conjugate every holonomy by the DFT matrix instead of using diagonals.
        #[arg(long)]
        conjugate: bool,
        #[arg(long, default_value = "1")]
        scale: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Spectral flow of a sampled family along a path of point ids.
    Flow {
        family: PathBuf,
        #[arg(long)]
        path: String,
        #[arg(long)]
        eta: String,
        /// Also step from the last id back to the first.
        #[arg(long)]
        closed: bool,
    },
}

enum Outcome {
    Ok,
    Negative,
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn parse_real(name: &str, text: &str) -> Result<f64> {
    parse_number::<f64>(text).map_err(|e| anyhow!("--{name}: {e}"))
}

fn parse_list<T>(text: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    text.split(',').map(|s| f(s.trim())).collect()
}

fn load_family(path: &PathBuf, tol: &Tol) -> Result<dirac_obstruction::Family> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(FamilyFile::parse(&text)?.family(tol)?)
}

fn run(cli: Cli) -> Result<Outcome> {
    let tol = cli.tol.resolve()?;
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be >= 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match cli.command {
        Command::Spectrum {
            holonomy,
            epsilon,
            truncation,
            scale,
            output,
        } => {
            let (h, spin) = holonomy.load()?;
            let epsilon = parse_real("epsilon", &epsilon)?;
            let dirac = TwistedDirac::new(&h, spin, &tol)?.with_scale(parse_real("scale", &scale)?)?;
            let window = match truncation {
                Some(n) => dirac.fourier_truncation(n)?.window(epsilon, &tol),
                None => dirac.analytic_spectrum(epsilon, &tol)?,
            };
            emit(&window.to_csv(), output.as_ref())?;
        }
        Command::KernelDim { holonomy } => {
            let (h, spin) = holonomy.load()?;
            let d = TwistedDirac::new(&h, spin, &tol)?.kernel_dim(&tol);
            emit(&format!("{d}\n"), None)?;
        }
        Command::Cohomology { k, indices } => {
            let ctx = AlgebraContext::new(k)?;
            let idx = parse_list(&indices, |s| s.parse::<usize>().map_err(|_| anyhow!("bad index {s:?}")))?;
            let class: Class = obstruction_product(ctx, &idx)?;
            emit(&format!("class: {class}\nnonzero: {}\n", !class.is_zero()), None)?;
        }
        Command::Cover {
            family,
            k,
            epsilon,
            output,
        } => {
            let fam = load_family(&family, &tol)?;
            let epsilon = parse_real("epsilon", &epsilon)?;
            let max_count = fam.max_spectral_count(epsilon, &tol)?;
            let report = build_cover(&fam, k, epsilon, &tol)?;
            let doc = json!({
                "report": report,
                "max_spectral_count": max_count,
                "count_bound_holds": max_count <= k,
                "tolerances": tol,
            });
            emit(&(serde_json::to_string_pretty(&doc)? + "\n"), output.as_ref())?;
            if !report.covered {
                return Ok(Outcome::Negative);
            }
        }
        Command::Verify {
            k,
            resolution,
            delta,
            truncation,
            epsilons,
            bounded,
            conjugate,
            scale,
            output,
        } => {
            let spin: SpinStructure = delta.parse()?;
            let mut spec = GridSpec::new(k, resolution, spin, truncation)?;
            spec.bounded = bounded;
            spec.diagonal_only = !conjugate;
            spec.scale = parse_real("scale", &scale)?;
            let eps = parse_list(&epsilons, |s| parse_real("epsilons", s))?;
            let verdict = verify_contrapositive(&spec, &eps, &tol)?;
            emit(&(serde_json::to_string_pretty(&verdict)? + "\n"), output.as_ref())?;
            eprint!("{}", verdict.summary_table());
            if !verdict.pass {
                return Ok(Outcome::Negative);
            }
        }
        Command::Flow {
            family,
            path,
            eta,
            closed,
        } => {
            let fam = load_family(&family, &tol)?;
            let ids = path.split(',').map(|s| s.trim().to_string()).collect();
            let path = PathSpec::new(ids, closed)?;
            let flow = spectral_flow(&fam, &path, parse_real("eta", &eta)?)?;
            emit(&format!("{flow}\n"), None)?;
        }
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
