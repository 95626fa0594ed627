//! File formats: holonomy and family JSON, plus deterministic float text.

use crate::circle::{HolonomySpec, SpinStructure};
use crate::cohomology::parse_rational;
use crate::error::{Error, Result};
use crate::family::{FamilyPoint, SampledFamily};
use crate::scalar::{CMatrix, Real, Tolerances};
use nalgebra::Complex;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

/// `printf("%.17g")`: 17 significant digits, trailing zeros removed,
/// exponent form outside `1e-4 ..= 1e17`.
pub fn format_g17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if negative { "-" } else { "" };

    if !(-4..17).contains(&exp) {
        let (lead, tail) = digits.split_at(1);
        let tail = tail.trim_end_matches('0');
        let body = if tail.is_empty() {
            lead.to_string()
        } else {
            format!("{lead}.{tail}")
        };
        let esign = if exp < 0 { '-' } else { '+' };
        return format!("{sign}{body}e{esign}{:02}", exp.abs());
    }
    let body = if exp >= 0 {
        let split = exp as usize + 1;
        let (int, frac) = digits.split_at(split);
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            int.to_string()
        } else {
            format!("{int}.{frac}")
        }
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("0.{zeros}{}", digits.trim_end_matches('0'))
    };
    format!("{sign}{body}")
}

/// An angle given as a JSON number or an exact `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleValue {
    Number(f64),
    Text(String),
}

impl AngleValue {
    pub fn to_real<T: Real>(&self) -> Result<T> {
        match self {
            AngleValue::Number(x) => Ok(T::lit(*x)),
            AngleValue::Text(s) => parse_number::<T>(s),
        }
    }
}

/// Parses a decimal number or an exact rational `p/q`.
pub fn parse_number<T: Real>(text: &str) -> Result<T> {
    let text = text.trim();
    if text.contains('/') {
        let q = parse_rational(text)?;
        let v = q
            .to_f64()
            .ok_or_else(|| Error::Parse(format!("rational {text:?} out of range")))?;
        return Ok(T::lit(v));
    }
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(T::lit)
        .ok_or_else(|| Error::Parse(format!("bad number {text:?}")))
}

/// Complex matrix as rows of `[re, im]` pairs, or one flat row-major list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixValue {
    Rows(Vec<Vec<[f64; 2]>>),
    Flat(Vec<[f64; 2]>),
}

impl MatrixValue {
    pub fn from_matrix<T: Real>(m: &CMatrix<T>) -> Self {
        MatrixValue::Rows(
            (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| [m[(i, j)].re.as_f64(), m[(i, j)].im.as_f64()])
                        .collect()
                })
                .collect(),
        )
    }

    /// Converts to a `dim × dim` matrix.
    pub fn to_matrix<T: Real>(&self, dim: usize) -> Result<CMatrix<T>> {
        let entries: Vec<[f64; 2]> = match self {
            MatrixValue::Rows(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::Dimension {
                        expected: format!("{dim}x{dim} rows"),
                        found: format!("{} rows", rows.len()),
                    });
                }
                rows.iter().flatten().copied().collect()
            }
            MatrixValue::Flat(flat) => {
                if flat.len() != dim * dim {
                    return Err(Error::Dimension {
                        expected: format!("{} entries", dim * dim),
                        found: format!("{} entries", flat.len()),
                    });
                }
                flat.clone()
            }
        };
        if entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Parse("matrix entries must be finite".into()));
        }
        Ok(CMatrix::from_row_iterator(
            dim,
            dim,
            entries.into_iter().map(|[re, im]| Complex::new(T::lit(re), T::lit(im))),
        ))
    }
}

/// `{"k": 2, "angles": [0.5, "1/3"], "delta": "1/2"}` or `{"k": 2, "matrix": [[[re, im], …], …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolonomyFile {
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<AngleValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
}

impl HolonomyFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("holonomy JSON: {e}")))
    }

    pub fn holonomy<T: Real>(&self) -> Result<HolonomySpec<T>> {
        if self.k == 0 {
            return Err(Error::input("holonomy needs k >= 1"));
        }
        match (&self.matrix, &self.angles) {
            (Some(m), None) => Ok(HolonomySpec::Matrix(m.to_matrix(self.k)?)),
            (None, Some(a)) => {
                if a.len() != self.k {
                    return Err(Error::Dimension {
                        expected: format!("{} angles", self.k),
                        found: format!("{} angles", a.len()),
                    });
                }
                Ok(HolonomySpec::Angles(
                    a.iter().map(|v| v.to_real()).collect::<Result<_>>()?,
                ))
            }
            _ => Err(Error::input("holonomy JSON needs exactly one of `matrix` or `angles`")),
        }
    }

    pub fn spin(&self) -> Result<Option<SpinStructure>> {
        self.delta.as_deref().map(str::parse).transpose()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointFile {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
    pub matrix: MatrixValue,
}

/// `{"dim": n, "points": [{"id", "coords"?, "matrix"}], "edges"?: [[a, b], …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub dim: usize,
    pub points: Vec<PointFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[String; 2]>>,
}

impl FamilyFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("family JSON: {e}")))
    }

    pub fn family<T: Real>(&self, tol: &Tolerances<T>) -> Result<SampledFamily<T>> {
        let points = self
            .points
            .iter()
            .map(|p| {
                Ok(FamilyPoint {
                    id: p.id.clone(),
                    coords: p.coords.as_ref().map(|c| c.iter().map(|&x| T::lit(x)).collect()),
                    op: p.matrix.to_matrix(self.dim).map_err(|e| Error::at_point(&p.id, e))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let edges = self
            .edges
            .iter()
            .flatten()
            .map(|[a, b]| (a.clone(), b.clone()))
            .collect();
        SampledFamily::new(self.dim, points, edges, tol)
    }

    pub fn from_family<T: Real>(fam: &SampledFamily<T>) -> Self {
        FamilyFile {
            dim: fam.dim(),
            points: fam
                .points()
                .iter()
                .map(|p| PointFile {
                    id: p.id.clone(),
                    coords: p.coords.as_ref().map(|c| c.iter().map(|x| x.as_f64()).collect()),
                    matrix: MatrixValue::from_matrix(&p.op),
                })
                .collect(),
            edges: (!fam.edges().is_empty()).then(|| fam.edges().iter().map(|(a, b)| [a.clone(), b.clone()]).collect()),
        }
    }
}
