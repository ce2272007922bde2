//! JSON system description.
//!
//! ```json
//! {"n": 2, "k": 3, "A": [[0.5, 0], [0, 0.5]], "cov_x0": [[1, 0], [0, 1]],
//!  "cov_w": "zero", "sigma": 1}
//! ```
//!
//! `A` is one matrix or an array of `k` matrices; `cov_w` is one matrix, an
//! array of `k` matrices or the string `"zero"`. Matrices are arrays of rows.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::round_sig12;
use crate::system::{Dynamics, LtvSystem, ProcessNoise};

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixOrSequence {
    Matrix(Rows),
    Sequence(Vec<Rows>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum NoiseField {
    Keyword(String),
    Matrix(Rows),
    Sequence(Vec<Rows>),
}

/// Serialized form of an [`LtvSystem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(rename = "A")]
    a: MatrixOrSequence,
    cov_w: NoiseField,
    cov_x0: Rows,
    k: usize,
    n: usize,
    sigma: f64,
}

fn to_matrix(rows: &Rows, name: &str) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Format(format!("{name}: rows have unequal lengths")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn to_rows(m: &DMatrix<f64>) -> Rows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| round_sig12(m[(i, j)])).collect()).collect()
}

impl SystemFile {
    pub fn into_system(self) -> Result<LtvSystem> {
        let dynamics = match &self.a {
            MatrixOrSequence::Matrix(rows) if rows.is_empty() && self.k == 0 => Dynamics::TimeVarying(vec![]),
            MatrixOrSequence::Matrix(rows) => Dynamics::TimeInvariant(to_matrix(rows, "A")?),
            MatrixOrSequence::Sequence(seq) => Dynamics::TimeVarying(
                seq.iter().enumerate().map(|(m, r)| to_matrix(r, &format!("A[{m}]"))).collect::<Result<_>>()?,
            ),
        };
        let cov_w = match &self.cov_w {
            NoiseField::Keyword(s) if s.eq_ignore_ascii_case("zero") => ProcessNoise::Zero,
            NoiseField::Keyword(s) => {
                return Err(Error::Format(format!("cov_w: unknown keyword {s:?}, expected \"zero\"")))
            }
            NoiseField::Matrix(rows) if rows.is_empty() && self.k == 0 => ProcessNoise::PerStep(vec![]),
            NoiseField::Matrix(rows) => ProcessNoise::Constant(to_matrix(rows, "cov_w")?),
            NoiseField::Sequence(seq) => ProcessNoise::PerStep(
                seq.iter().enumerate().map(|(m, r)| to_matrix(r, &format!("cov_w[{m}]"))).collect::<Result<_>>()?,
            ),
        };
        let system = LtvSystem::new(self.k, dynamics, to_matrix(&self.cov_x0, "cov_x0")?, cov_w, self.sigma)?;
        if system.n() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "n = {} but cov_x0 is {}x{}",
                self.n,
                system.n(),
                system.n()
            )));
        }
        Ok(system)
    }

    pub fn from_system(system: &LtvSystem) -> Self {
        let a = match system.dynamics() {
            Dynamics::TimeInvariant(a) => MatrixOrSequence::Matrix(to_rows(a)),
            Dynamics::TimeVarying(seq) => MatrixOrSequence::Sequence(seq.iter().map(to_rows).collect()),
        };
        let cov_w = match system.cov_w() {
            ProcessNoise::Zero => NoiseField::Keyword("zero".into()),
            ProcessNoise::Constant(c) => NoiseField::Matrix(to_rows(c)),
            ProcessNoise::PerStep(seq) => NoiseField::Sequence(seq.iter().map(to_rows).collect()),
        };
        Self {
            a,
            cov_w,
            cov_x0: to_rows(system.cov_x0()),
            k: system.k(),
            n: system.n(),
            sigma: round_sig12(system.sigma()),
        }
    }
}

pub fn system_from_json(text: &str) -> Result<LtvSystem> {
    let file: SystemFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    file.into_system()
}

/// Pretty JSON with keys in alphabetical order and 12 significant digits.
pub fn system_to_json(system: &LtvSystem) -> String {
    let value = serde_json::to_value(SystemFile::from_system(system)).expect("system serializes");
    serde_json::to_string_pretty(&value).expect("value serializes")
}
