use nalgebra::DMatrix;
use serde::Serialize;

use super::eig::{dense_sym_eig, sym_eig_unchecked};
use crate::error::{Error, Result};

/// Counts of positive, negative and zero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Inertia {
    pub fn total(&self) -> usize {
        self.positive + self.negative + self.zero
    }
}

impl std::ops::Add for Inertia {
    type Output = Inertia;
    fn add(self, o: Inertia) -> Inertia {
        Inertia {
            positive: self.positive + o.positive,
            negative: self.negative + o.negative,
            zero: self.zero + o.zero,
        }
    }
}

/// `1e-8 · max(1, ‖A‖_max)`
pub fn default_zero_tol(a: &DMatrix<f64>) -> f64 {
    1e-8 * a.amax().max(1.0)
}

pub fn inertia_of(a: &DMatrix<f64>, zero_tol: f64) -> Result<Inertia> {
    if !(zero_tol >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "zero tolerance must be non-negative, got {zero_tol}"
        )));
    }
    let e = dense_sym_eig(a)?;
    let mut out = Inertia::default();
    for &l in e.eigenvalues.iter() {
        if l > zero_tol {
            out.positive += 1;
        } else if l < -zero_tol {
            out.negative += 1;
        } else {
            out.zero += 1;
        }
    }
    Ok(out)
}

/// `L₂₂ - L₁₂ᵀ L₁₁⁻¹ L₁₂` for the leading `r × r` block.
///
/// The block inverse goes through its eigendecomposition; a block whose
/// smallest eigenvalue magnitude is below `1e-12 · max(1, ‖L₁₁‖_max)` is
/// reported as singular.
pub fn schur_complement(l: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    let n = l.nrows();
    if r == 0 || r > n {
        return Err(Error::InvalidParameter(format!(
            "block size must be in [1, {n}], got {r}"
        )));
    }
    crate::sparse::check_symmetric(l, 1e-10)?;
    let l11 = l.view((0, 0), (r, r)).into_owned();
    let l12 = l.view((0, r), (r, n - r)).into_owned();
    let l22 = l.view((r, r), (n - r, n - r)).into_owned();
    let e = sym_eig_unchecked(&l11);
    let scale = l11.amax().max(1.0);
    let smallest = e.eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if smallest <= 1e-12 * scale {
        return Err(Error::SingularBlock(smallest));
    }
    // Z = diag(1/λ) Vᵀ L₁₂, SC = L₂₂ - (Vᵀ L₁₂)ᵀ Z
    let vt_l12 = e.eigenvectors.tr_mul(&l12);
    let mut z = vt_l12.clone();
    for (k, mut row) in z.row_iter_mut().enumerate() {
        row /= e.eigenvalues[k];
    }
    let sc = l22 - vt_l12.tr_mul(&z);
    Ok((&sc + sc.transpose()) * 0.5)
}
