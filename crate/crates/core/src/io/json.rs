//! JSON encodings of hyperbolic instances and SDP start points.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{HpFamily, HpInstance};
use crate::program::ConicProgram;

/// On-disk form of an [`HpInstance`]. The family tag and its parameters sit
/// at the top level, e.g. `{"family": "elementary_symmetric", "d": 8, "k": 3, ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HpJsonInstance {
    #[serde(flatten)]
    pub family: HpFamily,
    pub c: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub e0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

impl HpJsonInstance {
    pub fn from_instance(instance: &HpInstance, metadata: Option<serde_json::Value>) -> Self {
        let p = &instance.program;
        HpJsonInstance {
            family: instance.family,
            c: p.c.iter().copied().collect(),
            a: p.a.row_iter().map(|r| r.iter().copied().collect()).collect(),
            b: p.b.iter().copied().collect(),
            e0: instance.e0.iter().copied().collect(),
            metadata,
        }
    }

    pub fn to_instance(&self) -> Result<HpInstance> {
        let d = self.family.dim();
        let m = self.a.len();
        if let Some(bad) = self.a.iter().find(|row| row.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: bad.len() });
        }
        let a = DMatrix::from_fn(m, d, |i, j| self.a[i][j]);
        let program = ConicProgram::new(a, DVector::from_column_slice(&self.b), DVector::from_column_slice(&self.c))?;
        HpInstance::new(self.family, program, DVector::from_column_slice(&self.e0))
    }
}

pub fn parse_hp_json(text: &str) -> Result<HpInstance> {
    let raw: HpJsonInstance = serde_json::from_str(text)?;
    let instance = raw.to_instance()?;
    instance.validate()?;
    Ok(instance)
}

pub fn write_hp_json(instance: &HpInstance, metadata: Option<serde_json::Value>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&HpJsonInstance::from_instance(instance, metadata))?)
}

/// Start point of an SDP instance stored next to its SDPA file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpStart {
    /// Dense rows of the starting matrix.
    pub e0: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

impl SdpStart {
    pub fn from_matrix(e0: &DMatrix<f64>, metadata: Option<serde_json::Value>) -> Self {
        SdpStart { e0: e0.row_iter().map(|r| r.iter().copied().collect()).collect(), metadata }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        let n = self.e0.len();
        if let Some(bad) = self.e0.iter().find(|row| row.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
        }
        Ok(DMatrix::from_fn(n, n, |i, j| self.e0[i][j]))
    }
}

pub fn parse_sdp_start(text: &str) -> Result<DMatrix<f64>> {
    serde_json::from_str::<SdpStart>(text)?.to_matrix()
}

pub fn write_sdp_start(e0: &DMatrix<f64>, metadata: Option<serde_json::Value>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&SdpStart::from_matrix(e0, metadata))?)
}
