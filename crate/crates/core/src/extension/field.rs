use serde::{Deserialize, Serialize};

use crate::error::{check_len, check_s, Error, Result};

/// How an [`ExtensionField`] was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    PdeSolve,
    SemiAnalytic,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::PdeSolve => "pde-solve",
            Provenance::SemiAnalytic => "semi-analytic",
        }
    }
}

/// Samples `U(x, y_j)` of an extension on vertices × heights, stored level by
/// level: entry `j * n + x`.
#[derive(Clone, Debug)]
pub struct ExtensionField {
    pub s: f64,
    pub ys: Vec<f64>,
    pub n: usize,
    values: Vec<f64>,
    pub provenance: Provenance,
}

impl ExtensionField {
    pub fn new(s: f64, ys: Vec<f64>, n: usize, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        check_s(s)?;
        check_len(n * ys.len(), values.len())?;
        if ys.is_empty() {
            return Err(Error::InvalidInput("extension field has no levels".into()));
        }
        Ok(Self {
            s,
            ys,
            n,
            values,
            provenance,
        })
    }

    /// Weight exponent `a = 1 - 2s`.
    pub fn a(&self) -> f64 {
        1.0 - 2.0 * self.s
    }

    pub fn levels(&self) -> usize {
        self.ys.len()
    }

    pub fn level(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    pub fn get(&self, x: usize, j: usize) -> f64 {
        self.values[j * self.n + x]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}
