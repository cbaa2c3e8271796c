//! System description files.

use std::path::Path;

use photonflow_core::{CMat, SlhParams, C64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub type Complex = [f64; 2];
pub type JsonMatrix = Vec<Vec<Complex>>;

/// `{"m", "n", "S_minus", "C_minus", "C_plus", "Omega_minus", "Omega_plus"}`
/// with complex entries as `[re, im]`. Missing `C_plus` and `Omega_plus`
/// are zero; `C_minus` and `Omega_minus` may be omitted when `n = 0`.
#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "S_minus")]
    pub s_minus: JsonMatrix,
    #[serde(rename = "C_minus", default)]
    pub c_minus: Option<JsonMatrix>,
    #[serde(rename = "C_plus", default)]
    pub c_plus: Option<JsonMatrix>,
    #[serde(rename = "Omega_minus", default)]
    pub omega_minus: Option<JsonMatrix>,
    #[serde(rename = "Omega_plus", default)]
    pub omega_plus: Option<JsonMatrix>,
}

fn matrix(name: &str, rows: usize, cols: usize, entries: Option<&JsonMatrix>) -> CliResult<CMat> {
    let Some(v) = entries else {
        if rows == 0 || cols == 0 || name.ends_with("plus") {
            return Ok(CMat::zeros(rows, cols));
        }
        return Err(CliError::validation("ShapeMismatch", format!("{name} is required")));
    };
    let empty = v.is_empty() || v.iter().all(|r| r.is_empty());
    if (rows == 0 || cols == 0) && empty {
        return Ok(CMat::zeros(rows, cols));
    }
    if v.len() != rows || v.iter().any(|r| r.len() != cols) {
        let got_cols = v.first().map_or(0, |r| r.len());
        return Err(CliError::validation(
            "ShapeMismatch",
            format!("{name} must be {rows}x{cols}, got {}x{got_cols}", v.len()),
        ));
    }
    Ok(CMat::from_fn(rows, cols, |i, j| C64::new(v[i][j][0], v[i][j][1])))
}

impl SystemSpec {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_params(&self) -> CliResult<SlhParams> {
        let (m, n) = (self.m, self.n);
        Ok(SlhParams::new(
            matrix("S_minus", m, m, Some(&self.s_minus))?,
            matrix("C_minus", m, n, self.c_minus.as_ref())?,
            matrix("C_plus", m, n, self.c_plus.as_ref())?,
            matrix("Omega_minus", n, n, self.omega_minus.as_ref())?,
            matrix("Omega_plus", n, n, self.omega_plus.as_ref())?,
        )?)
    }

    pub fn from_matrices(s: &CMat, c_minus: &CMat, c_plus: &CMat, omega_minus: &CMat, omega_plus: &CMat) -> Self {
        let conv = |x: &CMat| -> Option<JsonMatrix> {
            Some((0..x.nrows()).map(|i| (0..x.ncols()).map(|j| [x[(i, j)].re, x[(i, j)].im]).collect()).collect())
        };
        SystemSpec {
            m: s.nrows(),
            n: omega_minus.nrows(),
            s_minus: conv(s).unwrap_or_default(),
            c_minus: conv(c_minus),
            c_plus: conv(c_plus),
            omega_minus: conv(omega_minus),
            omega_plus: conv(omega_plus),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cavity_spec_parses() {
        let text = r#"{"m": 2, "n": 1,
            "S_minus": [[[1,0],[0,0]],[[0,0],[1,0]]],
            "C_minus": [[[1,0]],[[1,0]]],
            "Omega_minus": [[[0,0]]]}"#;
        let spec: SystemSpec = serde_json::from_str(text).unwrap();
        let p = spec.to_params().unwrap();
        assert!(p.is_passive());
        assert_eq!((p.m(), p.n()), (2, 1));
    }

    #[test]
    fn static_network_needs_no_dynamics() {
        let text = r#"{"m": 2, "n": 0, "S_minus": [[[0.6,0],[0,0.8]],[[0,0.8],[0.6,0]]]}"#;
        let spec: SystemSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.to_params().unwrap().n(), 0);
    }

    #[test]
    fn wrong_shape_is_validation_error() {
        let text = r#"{"m": 2, "n": 1, "S_minus": [[[1,0],[0,0]],[[0,0],[1,0]]], "C_minus": [[[1,0],[1,0]]], "Omega_minus": [[[0,0]]]}"#;
        let spec: SystemSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.to_params().unwrap_err().code, 2);
    }
}
