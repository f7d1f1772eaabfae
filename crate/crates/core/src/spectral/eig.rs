use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::Result;
use crate::sparse::check_symmetric;

/// Full eigendecomposition with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: DVector<f64>,
    /// Column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
}

impl EigenDecomposition {
    /// Graph-Fourier coefficients `Vᵀ x`.
    pub fn coefficients(&self, x: &[f64]) -> DVector<f64> {
        self.eigenvectors.tr_mul(&DVector::from_column_slice(x))
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `V diag(f(λ)) Vᵀ`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.eigenvalues[k]);
        }
        scaled * v.transpose()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.reconstruct_with(|l| l)
    }
}

/// Dense symmetric eigensolver; the reference every bound is checked against.
pub fn dense_sym_eig(a: &DMatrix<f64>) -> Result<EigenDecomposition> {
    check_symmetric(a, 1e-10)?;
    Ok(sym_eig_unchecked(a))
}

pub(crate) fn sym_eig_unchecked(a: &DMatrix<f64>) -> EigenDecomposition {
    let n = a.nrows();
    if n == 0 {
        return EigenDecomposition {
            eigenvalues: DVector::zeros(0),
            eigenvectors: DMatrix::zeros(0, 0),
        };
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    EigenDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &DMatrix<f64>) -> Result<f64> {
    Ok(dense_sym_eig(a)?.min())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_spectrum() {
        let e = dense_sym_eig(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(e.eigenvalues.as_slice(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn fig2_laplacian_is_indefinite() {
        let l = DMatrix::from_row_slice(3, 3, &[-1.0, 1.0, 0.0, 1.0, 0.0, -1.0, 0.0, -1.0, 1.0]);
        let e = dense_sym_eig(&l).unwrap();
        // L·1 = 0, trace 0 and ‖L‖_F² = 6 give the spectrum {-√3, 0, √3}
        let s3 = 3f64.sqrt();
        assert!((e.eigenvalues[0] + s3).abs() < 1e-12);
        assert!(e.eigenvalues[1].abs() < 1e-12);
        assert!((e.eigenvalues[2] - s3).abs() < 1e-12);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = DMatrix::from_fn(20, 20, |_, _| rng.gen_range(-1.0..1.0));
        let a = &m + m.transpose();
        let e = dense_sym_eig(&a).unwrap();
        assert!((e.reconstruct() - &a).amax() <= 1e-8);
        let vtv = e.eigenvectors.tr_mul(&e.eigenvectors);
        assert!((vtv - DMatrix::identity(20, 20)).amax() <= 1e-8);
        assert!(e.eigenvalues.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_asymmetric() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(dense_sym_eig(&a), Err(Error::NotSymmetric(_))));
    }
}
