//! Eigenvalue machinery: dense oracle, lower bounds, inertia, perturbations
//! and the recursive Schur-complement bound.

mod bounds;
mod eig;
mod eval_bound;
mod inertia;
mod perturb;

pub use bounds::{gershgorin_lower_bound, power_iteration_max_eig, simple_lower_bound, PowerResult};
pub use eig::{dense_sym_eig, min_eigenvalue, EigenDecomposition};
pub use eval_bound::{
    eval_bound, eval_bound_with, EpsilonRule, EvalBoundConfig, EvalBoundTrace, LevelTrace,
};
pub use inertia::{default_zero_tol, inertia_of, schur_complement, Inertia};
pub use perturb::{
    min_norm_perturbation, perturb_identity, PerturbationMethod, PerturbationResult,
};
