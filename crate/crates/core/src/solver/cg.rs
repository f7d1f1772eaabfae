use crate::error::{Error, Result};
use crate::sparse::SymOperator;

#[derive(Debug, Clone, PartialEq)]
pub struct CgResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖A x - b‖`
    pub residual_norm: f64,
    pub converged: bool,
}

/// Jacobi-preconditioned conjugate gradient for a symmetric PSD operator.
///
/// Stops when `‖A x - b‖ ≤ tol · ‖b‖`. Non-positive diagonal entries fall back
/// to a unit preconditioner.
pub fn cg_solve<A: SymOperator + ?Sized>(
    a: &A,
    b: &[f64],
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgResult> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(CgResult {
            x: vec![0.0; n],
            iterations: 0,
            residual_norm: 0.0,
            converged: true,
        });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let target = tol * b_norm;

    let mut x = x0.to_vec();
    let mut r = a.mul_vec(&x);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let mut res = norm(&r);
    if res <= target {
        return Ok(CgResult {
            x,
            iterations: 0,
            residual_norm: res,
            converged: true,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, m)| ri * m).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            // direction in the null space; no further progress possible
            return Ok(CgResult {
                x,
                iterations: it,
                residual_norm: res,
                converged: false,
            });
        }
        let alpha = rz / pap;
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= alpha * api);
        res = norm(&r);
        if res <= target {
            return Ok(CgResult {
                x,
                iterations: it,
                residual_norm: res,
                converged: true,
            });
        }
        z.iter_mut()
            .zip(&r)
            .zip(&inv_diag)
            .for_each(|((zi, ri), m)| *zi = ri * m);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    Ok(CgResult {
        x,
        iterations: max_iter,
        residual_norm: res,
        converged: false,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
