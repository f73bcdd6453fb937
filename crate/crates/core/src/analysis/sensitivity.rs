use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{eig_with, DenseMatrix};
use crate::polysys::DesignSpec;
use crate::solver::{bf_matrix, DesignSolution};
use crate::tolerances::Tolerances;

/// Eigenvalue condition numbers of `BF`, ascending by eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub eigenvalues: Vec<f64>,
    pub conditions: Vec<f64>,
    pub max_condition: f64,
}

/// `1 / |w^T v|` for each simple eigenvalue of `a`, with unit left and right
/// eigenvectors.
pub fn eigen_conditions(a: &DenseMatrix, tol: &Tolerances) -> Result<SensitivityReport> {
    let spec = eig_with(a, tol, true)?;
    let right = spec.right.as_ref().expect("vectors requested");
    let left = spec.left.as_ref().expect("vectors requested");
    let scale = spec.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    for (i, a) in spec.eigenvalues.iter().enumerate() {
        for b in &spec.eigenvalues[i + 1..] {
            let gap = (a - b).norm() / scale;
            if gap < tol.eig_simple_gap {
                return Err(Error::RepeatedEigenvalue { gap });
            }
        }
    }
    let mut rows: Vec<(f64, f64)> = spec
        .eigenvalues
        .iter()
        .zip(right.iter().zip(left))
        .map(|(lambda, (v, w))| {
            let dot: num_complex::Complex64 = w.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            (lambda.re, 1.0 / dot.norm())
        })
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let max_condition = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(SensitivityReport {
        eigenvalues: rows.iter().map(|r| r.0).collect(),
        conditions: rows.iter().map(|r| r.1).collect(),
        max_condition,
    })
}

/// Conditioning of `BF` for the capacitor ratios `f`.
pub fn condition_of_f(f: &[f64], tol: &Tolerances) -> Result<SensitivityReport> {
    eigen_conditions(&bf_matrix(f)?, tol)
}

pub fn condition_numbers(spec: &DesignSpec, solution: &DesignSolution) -> Result<SensitivityReport> {
    if solution.f.len() != spec.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.n(),
            got: solution.f.len(),
        });
    }
    condition_of_f(&solution.f, &Tolerances::default())
}
