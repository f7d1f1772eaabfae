use serde::{Deserialize, Serialize};

use super::cg::cg_solve;
use super::classify::classify;
use crate::error::{Error, Result};
use crate::graph::PartialLabels;
use crate::sparse::{SparseSym, SymMatrix, SymOperator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SolverConfig {
    /// Weight of the graph smoothness term `xᵀ L_g x`.
    pub mu1: f64,
    /// Weight of the generalized smoothness term `xᵀ (L⁺)² x`.
    pub mu2: f64,
    pub irls_epsilon: f64,
    pub max_outer_iter: usize,
    /// Outer loop stops once `‖Δx‖_∞` drops below this.
    pub outer_tol: f64,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub reject_threshold: f64,
    /// Mixing weights for the hybrid method, first stage first.
    pub beta_schedule: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mu1: 0.01,
            mu2: 0.0,
            irls_epsilon: 1e-4,
            max_outer_iter: 50,
            outer_tol: 1e-6,
            cg_tol: 1e-10,
            cg_max_iter: 2000,
            reject_threshold: 0.0,
            beta_schedule: vec![1.0, 0.75, 0.5, 0.25, 0.0],
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.mu1 >= 0.0 && self.mu1.is_finite()) {
            return bad(format!("mu1 must be non-negative, got {}", self.mu1));
        }
        if !(self.mu2 >= 0.0 && self.mu2.is_finite()) {
            return bad(format!("mu2 must be non-negative, got {}", self.mu2));
        }
        if !(self.irls_epsilon > 0.0) {
            return bad(format!("irls epsilon must be positive, got {}", self.irls_epsilon));
        }
        if !(self.cg_tol > 0.0) || !(self.outer_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if !(self.reject_threshold >= 0.0) {
            return bad(format!(
                "reject threshold must be non-negative, got {}",
                self.reject_threshold
            ));
        }
        if self.beta_schedule.iter().any(|b| !(0.0..=1.0).contains(b))
            || self.beta_schedule.windows(2).any(|w| w[1] > w[0])
        {
            return bad("beta schedule must be descending within [0, 1]".into());
        }
        Ok(())
    }

    /// The schedule required by the hybrid method: starts at 1, ends at 0.
    pub fn validate_hybrid(&self) -> Result<()> {
        self.validate()?;
        match (self.beta_schedule.first(), self.beta_schedule.last()) {
            (Some(&f), Some(&l)) if f == 1.0 && l == 0.0 => Ok(()),
            _ => Err(Error::InvalidParameter(
                "hybrid beta schedule must start at 1 and end at 0".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassifierSignal {
    pub values: Vec<f64>,
    pub decisions: Vec<i8>,
    pub iterations: usize,
    pub final_objective: f64,
    pub converged: bool,
}

/// Diagonal of `B` (one weight per observed label) and the current signal.
#[derive(Debug, Clone, PartialEq)]
pub struct IrlsState {
    pub weights: Vec<f64>,
    pub signal: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IrlsIteration {
    /// Weighted objective with this iteration's weights at the incoming signal.
    pub objective_before: f64,
    /// Same weights, at the new solution.
    pub objective_after: f64,
    pub max_change: f64,
    pub cg_iterations: usize,
    pub cg_converged: bool,
}

#[derive(Debug, Clone)]
pub struct IrlsOutcome {
    pub signal: ClassifierSignal,
    pub state: IrlsState,
    pub trace: Vec<IrlsIteration>,
}

/// `HᵀBH + base`, applied without forming the sum.
struct System<'a> {
    base: &'a SymMatrix,
    fidelity: Vec<f64>,
}

impl SymOperator for System<'_> {
    fn dim(&self) -> usize {
        self.fidelity.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.base.apply(x, y);
        y.iter_mut()
            .zip(&self.fidelity)
            .zip(x)
            .for_each(|((yi, f), xi)| *yi += f * xi);
    }

    fn diagonal(&self) -> Vec<f64> {
        let mut d = self.base.diagonal();
        d.iter_mut().zip(&self.fidelity).for_each(|(a, f)| *a += f);
        d
    }

    fn offdiag_abs_sums(&self) -> Vec<f64> {
        self.base.offdiag_abs_sums()
    }
}

/// `μ₁ L_g + μ₂ G`
pub fn regularizer(lg: &SymMatrix, gsq: &SparseSym, mu1: f64, mu2: f64) -> Result<SymMatrix> {
    if lg.dim() != gsq.dim() {
        return Err(Error::DimensionMismatch {
            expected: lg.dim(),
            got: gsq.dim(),
        });
    }
    if mu2 == 0.0 {
        return Ok(match lg {
            SymMatrix::Sparse(s) => SymMatrix::Sparse(s.scaled(mu1)),
            SymMatrix::Dense(d) => SymMatrix::Dense(d * mu1),
        });
    }
    lg.linear_combination(mu1, &SymMatrix::Sparse(gsq.clone()), mu2)
}

fn weighted_objective(base: &SymMatrix, idx: &[usize], y: &[f64], w: &[f64], x: &[f64]) -> f64 {
    let fid: f64 = idx
        .iter()
        .zip(y)
        .zip(w)
        .map(|((&i, yi), wi)| wi * (yi - x[i]).powi(2))
        .sum();
    fid + base.quad_form(x)
}

/// Value of the IRLS surrogate of the label-mismatch count plus the priors.
fn surrogate_objective(base: &SymMatrix, idx: &[usize], y: &[f64], eps: f64, x: &[f64]) -> f64 {
    let fid: f64 = idx
        .iter()
        .zip(y)
        .map(|(&i, yi)| {
            let d2 = (yi - x[i]).powi(2);
            d2 / (d2 + eps)
        })
        .sum();
    fid + base.quad_form(x)
}

/// IRLS restoration from `x = Hᵀy`, `B = I`.
pub fn irls_solve(
    lg: &SymMatrix,
    gsq: &SparseSym,
    labels: &PartialLabels,
    config: &SolverConfig,
) -> Result<ClassifierSignal> {
    Ok(irls_run(lg, gsq, labels, config, None)?.signal)
}

/// IRLS with an optional warm start and a per-iteration trace.
pub fn irls_run(
    lg: &SymMatrix,
    gsq: &SparseSym,
    labels: &PartialLabels,
    config: &SolverConfig,
    init: Option<&IrlsState>,
) -> Result<IrlsOutcome> {
    config.validate()?;
    let n = lg.dim();
    if labels.node_count() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: labels.node_count(),
        });
    }
    if labels.is_empty() {
        return Err(Error::InvalidParameter("at least one observed label is required".into()));
    }
    if config.mu1 == 0.0 && config.mu2 == 0.0 && labels.len() < n {
        return Err(Error::SingularSystem(
            "no prior and unobserved nodes; use mu1 > 0".into(),
        ));
    }
    let base = regularizer(lg, gsq, config.mu1, config.mu2)?;
    let idx = labels.indices();
    let y = labels.values();

    let (mut weights, mut x) = match init {
        Some(s) => {
            if s.weights.len() != idx.len() || s.signal.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: s.signal.len(),
                });
            }
            (s.weights.clone(), s.signal.clone())
        }
        None => (vec![1.0; idx.len()], labels.scatter()),
    };

    let mut trace = Vec::new();
    let mut converged = false;
    for _ in 0..config.max_outer_iter {
        let mut fidelity = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for ((&i, yi), wi) in idx.iter().zip(&y).zip(&weights) {
            fidelity[i] = *wi;
            rhs[i] = wi * yi;
        }
        let sys = System {
            base: &base,
            fidelity,
        };
        let before = weighted_objective(&base, &idx, &y, &weights, &x);
        let cg = cg_solve(&sys, &rhs, &x, config.cg_tol, config.cg_max_iter)?;
        if !cg.converged {
            log::warn!(
                "inner solve stopped after {} iterations with residual {:e}",
                cg.iterations,
                cg.residual_norm
            );
        }
        let max_change = cg
            .x
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = cg.x;
        trace.push(IrlsIteration {
            objective_before: before,
            objective_after: weighted_objective(&base, &idx, &y, &weights, &x),
            max_change,
            cg_iterations: cg.iterations,
            cg_converged: cg.converged,
        });
        for ((&i, yi), wi) in idx.iter().zip(&y).zip(weights.iter_mut()) {
            *wi = 1.0 / ((yi - x[i]).powi(2) + config.irls_epsilon);
        }
        if max_change < config.outer_tol {
            converged = true;
            break;
        }
    }

    let final_objective = surrogate_objective(&base, &idx, &y, config.irls_epsilon, &x);
    if !final_objective.is_finite() {
        return Err(Error::SingularSystem("objective is not finite".into()));
    }
    let signal = ClassifierSignal {
        decisions: classify(&x, config.reject_threshold),
        values: x.clone(),
        iterations: trace.len(),
        final_objective,
        converged,
    };
    Ok(IrlsOutcome {
        signal,
        state: IrlsState { weights, signal: x },
        trace,
    })
}
