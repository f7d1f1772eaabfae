use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LaplacianBundle;
use crate::sparse::{SparseSym, SymOperator};

/// `(L⁺)²`, the operator of the generalized-smoothness prior.
///
/// Only a positive-edge Laplacian is accepted: off-diagonal entries must be
/// non-positive and rows must sum to zero.
pub fn generalized_smoothness_matrix(lpos: &SparseSym) -> Result<SparseSym> {
    let n = lpos.dim();
    let scale = lpos.max_abs().max(1.0);
    for i in 0..n {
        let mut sum = 0.0;
        for (j, v) in lpos.row(i) {
            if j != i && v > 0.0 {
                return Err(Error::InvalidOperator(format!(
                    "entry ({i}, {j}) = {v} implies a negative edge weight"
                )));
            }
            sum += v;
        }
        if sum.abs() > 1e-9 * scale {
            return Err(Error::InvalidOperator(format!(
                "row {i} sums to {sum}, not a Laplacian"
            )));
        }
    }
    Ok(lpos.square())
}

/// Smoothness priors for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prior {
    /// `xᵀ L x`
    Quadratic,
    /// `‖x - W x‖²`
    AdjacencyShift,
    /// `‖L x‖₁`
    L1,
    /// `xᵀ Lˢ x`
    SignedQuadratic,
}

impl std::str::FromStr for Prior {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "quadratic" => Ok(Prior::Quadratic),
            "adjacency-shift" => Ok(Prior::AdjacencyShift),
            "l1" => Ok(Prior::L1),
            "signed-quadratic" => Ok(Prior::SignedQuadratic),
            _ => Err(Error::InvalidParameter(format!("unknown prior `{s}`"))),
        }
    }
}

pub fn evaluate_prior(x: &[f64], bundle: &LaplacianBundle, kind: Prior) -> Result<f64> {
    let n = bundle.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    Ok(match kind {
        Prior::Quadratic => bundle.l.quad_form(x),
        Prior::SignedQuadratic => bundle.lsigned.quad_form(x),
        Prior::L1 => bundle.l.mul_vec(x).iter().map(|v| v.abs()).sum(),
        Prior::AdjacencyShift => (0..n)
            .map(|i| {
                // W_ij = -L_ij off the diagonal
                let wx: f64 = bundle
                    .l
                    .row(i)
                    .filter(|&(j, _)| j != i)
                    .map(|(j, v)| -v * x[j])
                    .sum();
                (x[i] - wx).powi(2)
            })
            .sum(),
    })
}
