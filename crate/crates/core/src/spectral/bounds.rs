use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::LaplacianBundle;
use crate::sparse::{SparseSym, SymBuilder, SymOperator};

/// Outcome of [`power_iteration_max_eig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerResult {
    /// Rayleigh quotient of the final iterate.
    pub value: f64,
    /// `‖A v - value·v‖` for the final unit iterate.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

const POWER_SEED: u64 = 0x5eed_0f_9a11;

/// Largest eigenvalue of a symmetric PSD operator by power iteration.
///
/// Stops once the residual drops below `tol · max(|value|, tiny)`. On
/// `max_iter` exhaustion the last iterate is returned with `converged = false`.
pub fn power_iteration_max_eig<A: SymOperator + ?Sized>(
    a: &A,
    tol: f64,
    max_iter: usize,
) -> Result<PowerResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let n = a.dim();
    if n == 0 {
        return Ok(PowerResult {
            value: 0.0,
            residual: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    normalize(&mut v);
    let mut av = vec![0.0; n];
    let mut result = PowerResult {
        value: 0.0,
        residual: f64::INFINITY,
        iterations: 0,
        converged: false,
    };
    for it in 1..=max_iter.max(1) {
        a.apply(&v, &mut av);
        let theta = dot(&v, &av);
        let residual = av
            .iter()
            .zip(&v)
            .map(|(y, x)| (y - theta * x).powi(2))
            .sum::<f64>()
            .sqrt();
        result = PowerResult {
            value: theta,
            residual,
            iterations: it,
            converged: residual <= tol * theta.abs().max(1e-300),
        };
        if result.converged || residual == 0.0 {
            result.converged = true;
            break;
        }
        let norm = norm2(&av);
        if norm == 0.0 {
            // v is in the null space and A is PSD, so A = 0 on our start vector's span
            result.converged = true;
            break;
        }
        v.iter_mut().zip(&av).for_each(|(x, y)| *x = y / norm);
    }
    Ok(result)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(v: &mut [f64]) {
    let n = norm2(v);
    v.iter_mut().for_each(|x| *x /= n);
}

/// `-λ_max(-L⁻)`, a lower bound on `λ_min(L)` because `L⁺` is PSD.
///
/// `-L⁻` is block diagonal over the connected components of the negative-edge
/// subgraph, so power iteration runs per component. The returned value is
/// lowered by the final residual to stay on the safe side.
pub fn simple_lower_bound(bundle: &LaplacianBundle) -> f64 {
    let neg = &bundle.lneg;
    let n = neg.dim();
    let mut comp = vec![usize::MAX; n];
    let mut best: f64 = 0.0;
    for start in 0..n {
        if comp[start] != usize::MAX || neg.row(start).all(|(j, _)| j == start) {
            continue;
        }
        let mut nodes = vec![start];
        comp[start] = start;
        let mut head = 0;
        while head < nodes.len() {
            let u = nodes[head];
            head += 1;
            for (v, _) in neg.row(u) {
                if comp[v] == usize::MAX {
                    comp[v] = start;
                    nodes.push(v);
                }
            }
        }
        nodes.sort_unstable();
        let block = negated_block(neg, &nodes);
        let top = match block.dim() {
            // a single negative edge of weight w: spectrum of -L⁻ is {0, 2|w|}
            2 => 2.0 * block.get(0, 0).max(block.get(1, 1)).max(-block.get(0, 1)),
            _ => {
                let r = power_iteration_max_eig(&block, 1e-12, 20_000)
                    .expect("tolerance is positive");
                if !r.converged {
                    log::warn!(
                        "power iteration did not converge on a negative-edge component of size {}",
                        nodes.len()
                    );
                }
                r.value + r.residual
            }
        };
        best = best.max(top);
    }
    -best
}

fn negated_block(m: &SparseSym, nodes: &[usize]) -> SparseSym {
    let mut b = SymBuilder::new(nodes.len());
    for (a, &u) in nodes.iter().enumerate() {
        for (v, val) in m.row(u) {
            if let Ok(c) = nodes.binary_search(&v) {
                if c >= a {
                    b.push(a, c, -val);
                }
            }
        }
    }
    b.build()
}

/// `min_i (A_ii - Σ_{j≠i} |A_ij|)`
pub fn gershgorin_lower_bound<A: SymOperator + ?Sized>(a: &A) -> f64 {
    a.diagonal()
        .iter()
        .zip(a.offdiag_abs_sums())
        .map(|(d, r)| d - r)
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_laplacian, SignedGraph};
    use crate::spectral::eig::dense_sym_eig;
    use nalgebra::DMatrix;

    #[test]
    fn power_on_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 5.0]));
        let r = power_iteration_max_eig(&a, 1e-10, 10_000).unwrap();
        assert!(r.converged);
        assert!((r.value - 5.0).abs() <= 1e-9 * 5.0);
    }

    #[test]
    fn power_on_scalar_matrix() {
        let a = DMatrix::<f64>::identity(4, 4) * 2.0;
        let r = power_iteration_max_eig(&a, 1e-10, 100).unwrap();
        assert_eq!(r.iterations, 1);
        assert!((r.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn power_flags_non_convergence() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.999_999]));
        let r = power_iteration_max_eig(&a, 1e-15, 3).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }

    #[test]
    fn simple_bound_examples() {
        let pos = SignedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 0.5)]).unwrap();
        assert_eq!(simple_lower_bound(&build_laplacian(&pos)), 0.0);
        let neg = SignedGraph::from_edges(2, &[(0, 1, -1.0)]).unwrap();
        assert_eq!(simple_lower_bound(&build_laplacian(&neg)), -2.0);
    }

    #[test]
    fn simple_bound_on_larger_component() {
        // negative star: -L⁻ is the star Laplacian with spectrum {0, 1, 1, 4}
        let g = SignedGraph::from_edges(4, &[(0, 1, -1.0), (0, 2, -1.0), (0, 3, -1.0)]).unwrap();
        let b = simple_lower_bound(&build_laplacian(&g));
        assert!(b <= -4.0 && b >= -4.0 - 1e-9);
    }

    #[test]
    fn gershgorin_examples() {
        assert_eq!(gershgorin_lower_bound(&DMatrix::<f64>::identity(3, 3)), 1.0);
        let l = DMatrix::from_row_slice(3, 3, &[-1.0, 1.0, 0.0, 1.0, 0.0, -1.0, 0.0, -1.0, 1.0]);
        assert_eq!(gershgorin_lower_bound(&l), -2.0);
        let pos = SignedGraph::from_edges(3, &[(0, 1, 0.3), (1, 2, 0.7), (0, 2, 0.2)]).unwrap();
        let lp = build_laplacian(&pos).l;
        assert_eq!(gershgorin_lower_bound(&lp), 0.0);
        let e = dense_sym_eig(&lp.to_dense()).unwrap();
        assert!(e.min() >= -1e-12);
    }
}
