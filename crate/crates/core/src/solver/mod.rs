//! MAP restoration of the label signal: priors, conjugate gradient, IRLS and
//! the reject-option decision rule.

mod cg;
mod classify;
mod irls;
mod prior;

pub use cg::{cg_solve, CgResult};
pub use classify::{classify, rejection_rate};
pub use irls::{
    irls_run, irls_solve, regularizer, ClassifierSignal, IrlsIteration, IrlsOutcome, IrlsState,
    SolverConfig,
};
pub use prior::{evaluate_prior, generalized_smoothness_matrix, Prior};
