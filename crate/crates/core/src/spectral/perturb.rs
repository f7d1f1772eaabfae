use serde::{Deserialize, Serialize};

use super::eig::dense_sym_eig;
use crate::error::{Error, Result};
use crate::sparse::SymMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PerturbationMethod {
    MinNorm,
    IdentityShift,
}

/// A perturbation `Δ` together with the PSD matrix `L + Δ`.
#[derive(Debug, Clone)]
pub struct PerturbationResult {
    pub method: PerturbationMethod,
    /// Lower bound used for the identity shift; 0 for the min-norm clamp.
    pub bound: f64,
    /// Identity-shift amount; 0 for the min-norm clamp.
    pub eta: f64,
    /// Per-eigenvalue corrections of the min-norm clamp, ascending eigenvalue
    /// order; empty for the identity shift.
    pub tau: Vec<f64>,
    pub perturbed: SymMatrix,
}

/// Clamps the negative eigenvalues of `l` to zero in its own eigenbasis.
pub fn min_norm_perturbation(l: &SymMatrix) -> Result<PerturbationResult> {
    let dense = l.to_dense();
    let e = dense_sym_eig(&dense)?;
    let tau: Vec<f64> = e.eigenvalues.iter().map(|&x| (-x).max(0.0)).collect();
    let perturbed = if tau.iter().all(|&t| t == 0.0) {
        l.clone()
    } else {
        let p = e.reconstruct_with(|x| x.max(0.0));
        SymMatrix::Dense((&p + p.transpose()) * 0.5)
    };
    Ok(PerturbationResult {
        method: PerturbationMethod::MinNorm,
        bound: 0.0,
        eta: 0.0,
        tau,
        perturbed,
    })
}

/// `L + ηI` with `η = max(0, -bound)`; `bound` must not exceed `λ_min(L)`.
pub fn perturb_identity(l: &SymMatrix, bound: f64) -> Result<PerturbationResult> {
    if !bound.is_finite() {
        return Err(Error::InvalidParameter(format!("bound must be finite, got {bound}")));
    }
    let eta = (-bound).max(0.0);
    let perturbed = if eta == 0.0 { l.clone() } else { l.add_diagonal(eta) };
    Ok(PerturbationResult {
        method: PerturbationMethod::IdentityShift,
        bound,
        eta,
        tau: Vec::new(),
        perturbed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn psd_input_is_untouched() {
        let a = SymMatrix::Dense(DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]));
        let p = min_norm_perturbation(&a).unwrap();
        assert_eq!(p.perturbed.to_dense(), a.to_dense());
        assert!(p.tau.iter().all(|&t| t == 0.0));
        let s = perturb_identity(&a, 0.0).unwrap();
        assert_eq!(s.eta, 0.0);
        assert_eq!(s.perturbed.to_dense(), a.to_dense());
    }

    #[test]
    fn diagonal_clamp() {
        let a = SymMatrix::Dense(DMatrix::from_diagonal(&DVector::from_vec(vec![-2.0, 3.0])));
        let p = min_norm_perturbation(&a).unwrap();
        let delta = p.perturbed.to_dense() - a.to_dense();
        assert!((p.perturbed.to_dense() - DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 3.0]))).amax() < 1e-15);
        assert!((delta.norm() - 2.0).abs() < 1e-15);
        assert_eq!(p.tau, vec![2.0, 0.0]);
    }

    #[test]
    fn identity_shift_amount() {
        let a = SymMatrix::Dense(DMatrix::from_diagonal(&DVector::from_vec(vec![-0.8, 1.0])));
        let p = perturb_identity(&a, -0.8).unwrap();
        assert_eq!(p.eta, 0.8);
        assert_eq!(p.perturbed.to_dense()[(0, 0)], 0.0);
        assert!(perturb_identity(&a, f64::NAN).is_err());
    }
}
