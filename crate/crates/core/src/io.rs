//! JSON interchange formats.
//!
//! Matrices are split into `re` and `im` arrays of rows. A state file is
//! `{dimA, dimB, re, im}` with a `dimA × dimB` coefficient matrix; a density
//! file uses the same fields with a `(dimA·dimB)²` matrix. Operations are
//! `{party, re, im}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lqcc::LocalOperation;
use crate::numerics::{ComplexMatrix, C64};
use crate::states::{DensityMatrix, Party, PureBipartiteState};
use crate::theorem::FalsifierReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&C64) -> f64| (0..m.nrows()).map(|i| m.row(i).iter().map(f).collect()).collect();
        MatrixJson { re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix is empty"));
        }
        let rectangular = |a: &Vec<Vec<f64>>| a.len() == rows && a.iter().all(|r| r.len() == cols);
        if !rectangular(&self.re) || !rectangular(&self.im) {
            return Err(Error::invalid("re and im must be rectangular arrays of the same shape"));
        }
        let m = ComplexMatrix::from_fn(rows, cols, |i, j| C64::new(self.re[i][j], self.im[i][j]));
        crate::numerics::ensure_finite(&m)?;
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StateJson {
    pub dim_a: usize,
    pub dim_b: usize,
    #[serde(flatten)]
    pub matrix: MatrixJson,
}

/// Contents of a state or density file.
#[derive(Debug, Clone)]
pub enum StateFile {
    Pure(PureBipartiteState),
    Mixed { dim_a: usize, dim_b: usize, rho: DensityMatrix },
}

impl StateJson {
    pub fn from_state(s: &PureBipartiteState) -> Self {
        StateJson { dim_a: s.dim_a(), dim_b: s.dim_b(), matrix: MatrixJson::from_matrix(s.coeff()) }
    }

    pub fn from_density(dim_a: usize, dim_b: usize, rho: &DensityMatrix) -> Self {
        StateJson { dim_a, dim_b, matrix: MatrixJson::from_matrix(rho.matrix()) }
    }

    /// Interprets the matrix by its shape: `dimA × dimB` is a pure state,
    /// `dimA·dimB` square is a density matrix.
    pub fn into_state_file(self, tol: f64) -> Result<StateFile> {
        let m = self.matrix.to_matrix()?;
        let (da, db) = (self.dim_a, self.dim_b);
        if m.shape() == (da, db) {
            Ok(StateFile::Pure(PureBipartiteState::with_tolerance(m, tol)?))
        } else if m.shape() == (da * db, da * db) {
            Ok(StateFile::Mixed { dim_a: da, dim_b: db, rho: DensityMatrix::with_tolerance(m, tol)? })
        } else {
            Err(Error::invalid(format!("matrix shape {:?} matches neither {da}x{db} nor the joint space", m.shape())))
        }
    }

    pub fn into_pure(self, tol: f64) -> Result<PureBipartiteState> {
        match self.into_state_file(tol)? {
            StateFile::Pure(s) => Ok(s),
            StateFile::Mixed { .. } => Err(Error::invalid("expected a pure state, found a density matrix")),
        }
    }
}

pub fn parse_state_file(text: &str, tol: f64) -> Result<StateFile> {
    let json: StateJson =
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed state JSON: {e}")))?;
    json.into_state_file(tol)
}

pub fn parse_pure_state(text: &str, tol: f64) -> Result<PureBipartiteState> {
    let json: StateJson =
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed state JSON: {e}")))?;
    json.into_pure(tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationJson {
    pub party: Party,
    #[serde(flatten)]
    pub matrix: MatrixJson,
}

impl OperationJson {
    pub fn from_operation(op: &LocalOperation) -> Self {
        OperationJson { party: op.party(), matrix: MatrixJson::from_matrix(op.kraus()) }
    }

    pub fn into_operation(self) -> Result<LocalOperation> {
        LocalOperation::new(self.party, self.matrix.to_matrix()?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KrausPairJson {
    #[serde(rename = "A")]
    pub a: MatrixJson,
    #[serde(rename = "B")]
    pub b: MatrixJson,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportJson {
    pub trials: usize,
    pub best_score: f64,
    pub seed: u64,
    pub best_operation: Option<KrausPairJson>,
    pub clauses: Vec<String>,
}

impl From<&FalsifierReport> for ReportJson {
    fn from(r: &FalsifierReport) -> Self {
        ReportJson {
            trials: r.trials,
            best_score: r.best_score,
            seed: r.seed,
            best_operation: r
                .best_operation
                .as_ref()
                .map(|p| KrausPairJson { a: MatrixJson::from_matrix(&p.a), b: MatrixJson::from_matrix(&p.b) }),
            clauses: r.clauses.clone(),
        }
    }
}
