//! Recursive lower bound on the smallest eigenvalue via block shifts and
//! Schur complements.
//!
//! Each level takes `r` nodes found by breadth-first search, shifts the whole
//! matrix by `κ` so the chosen block is positive definite, and eliminates the
//! block. The accumulated shifts plus the smallest eigenvalue of the last,
//! small remainder give a certified bound.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::eig::sym_eig_unchecked;
use crate::error::{Error, Result};
use crate::sparse::{SparseSym, SymBuilder, SymMatrix, SymOperator};

/// How the shift of each level is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpsilonRule {
    /// Only blocks with `λ₁ ≤ 0` are shifted, to `λ₁ - ε` with the configured
    /// `ε`.
    Fixed,
    /// Each block eigenpair `(λ_k, v_k)` must clear the shift by at least
    /// `max(floor, ‖L₁₂ᵀ v_k‖)`, which bounds every fill-in term by its own
    /// coupling. Blocks with `λ₁ > 0` are shifted too when a mode sits closer
    /// to zero than its coupling. The configured value is the floor.
    #[default]
    Coupling,
}

impl std::str::FromStr for EpsilonRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fixed" => Ok(Self::Fixed),
            "coupling" => Ok(Self::Coupling),
            _ => Err(Error::InvalidParameter(format!("unknown epsilon rule `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalBoundConfig {
    pub block_size: usize,
    pub epsilon: f64,
    pub rule: EpsilonRule,
    pub seed: u64,
}

impl EvalBoundConfig {
    pub fn new(block_size: usize, seed: u64) -> Self {
        Self {
            block_size,
            epsilon: 1e-6,
            rule: EpsilonRule::default(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelTrace {
    /// Dimension of the matrix entering this level.
    pub dim: usize,
    pub lambda1: f64,
    /// Margin used for the shift; 0 when no shift happened.
    pub epsilon: f64,
    pub kappa: f64,
    /// Remainder nodes coupled to the eliminated block.
    pub boundary: usize,
    pub dense: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalBoundTrace {
    pub bound: f64,
    pub levels: Vec<LevelTrace>,
    /// Smallest eigenvalue of the last remainder (before clamping at 0).
    pub final_min: f64,
    /// Abstract operation count, used to check the scaling in `N r²`.
    pub work: u64,
}

/// Lower bound on `λ_min(l)` using the coupling-adaptive margin with floor
/// `epsilon`.
pub fn eval_bound(l: &SparseSym, r: usize, epsilon: f64, seed: u64) -> Result<f64> {
    let cfg = EvalBoundConfig {
        block_size: r,
        epsilon,
        rule: EpsilonRule::Coupling,
        seed,
    };
    Ok(eval_bound_with(&SymMatrix::Sparse(l.clone()), &cfg)?.bound)
}

enum Level {
    Sparse(SparseSym),
    Dense(DMatrix<f64>),
}

impl Level {
    fn dim(&self) -> usize {
        match self {
            Level::Sparse(s) => s.dim(),
            Level::Dense(d) => d.nrows(),
        }
    }

    fn neighbours(&self, u: usize, out: &mut Vec<usize>) {
        out.clear();
        match self {
            Level::Sparse(s) => out.extend(s.row(u).filter(|&(j, v)| j != u && v != 0.0).map(|e| e.0)),
            Level::Dense(d) => {
                out.extend((0..d.nrows()).filter(|&j| j != u && d[(u, j)] != 0.0))
            }
        }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Level::Sparse(s) => s.get(i, j),
            Level::Dense(d) => d[(i, j)],
        }
    }

    /// `(remainder node, value)` couplings of block node `u`.
    fn row_entries(&self, u: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        match self {
            Level::Sparse(s) => out.extend(s.row(u).filter(|e| e.1 != 0.0)),
            Level::Dense(d) => out.extend((0..d.nrows()).map(|j| (j, d[(u, j)])).filter(|e| e.1 != 0.0)),
        }
    }
}

fn bfs_block(level: &Level, r: usize, start: usize) -> Vec<usize> {
    let m = level.dim();
    let target = r.min(m);
    let mut seen = vec![false; m];
    let mut order = Vec::with_capacity(target);
    let mut queue = VecDeque::new();
    let mut nb = Vec::new();
    let mut next_unseen = 0;
    seen[start] = true;
    queue.push_back(start);
    while order.len() < target {
        let u = match queue.pop_front() {
            Some(u) => u,
            None => {
                while seen[next_unseen] {
                    next_unseen += 1;
                }
                seen[next_unseen] = true;
                next_unseen
            }
        };
        order.push(u);
        level.neighbours(u, &mut nb);
        for &v in &nb {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    order
}

/// Full traced run of the recursion on either storage kind.
pub fn eval_bound_with(l: &SymMatrix, cfg: &EvalBoundConfig) -> Result<EvalBoundTrace> {
    let r = cfg.block_size;
    if r == 0 {
        return Err(Error::InvalidParameter("block size must be at least 1".into()));
    }
    if !(cfg.epsilon.is_finite() && cfg.epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {}",
            cfg.epsilon
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut level = match l {
        SymMatrix::Sparse(s) if s.dim() > 4 * r => Level::Sparse(s.clone()),
        other => Level::Dense(other.to_dense()),
    };
    let mut trace = EvalBoundTrace {
        bound: 0.0,
        levels: Vec::new(),
        final_min: 0.0,
        work: 0,
    };
    let mut acc = 0.0;
    if level.dim() == 0 {
        return Ok(trace);
    }
    loop {
        let m = level.dim();
        if m <= r {
            // the remainder fits in one block already
            let d = match &level {
                Level::Dense(d) => d.clone(),
                Level::Sparse(s) => s.to_dense(),
            };
            let lmin = smallest_eig(&d);
            trace.work += (m as u64).pow(3);
            trace.final_min = lmin;
            trace.bound = acc + lmin.min(0.0);
            return Ok(trace);
        }
        let start = rng.gen_range(0..m);
        let block = bfs_block(&level, r, start);
        let mut pos = vec![usize::MAX; m];
        for (a, &u) in block.iter().enumerate() {
            pos[u] = a;
        }
        let rest: Vec<usize> = (0..m).filter(|&u| pos[u] == usize::MAX).collect();
        let mut rest_pos = vec![usize::MAX; m];
        for (k, &u) in rest.iter().enumerate() {
            rest_pos[u] = k;
        }

        let l11 = DMatrix::from_fn(r, r, |a, b| level.get(block[a], block[b]));
        let eig = sym_eig_unchecked(&l11);
        let lambda1 = eig.eigenvalues[0];

        // coupling columns c_b (indexed by block position) for boundary nodes
        let mut coupling: Vec<Vec<f64>> = Vec::new();
        let mut boundary: Vec<usize> = Vec::new();
        let mut slot = vec![usize::MAX; rest.len()];
        let mut entries = Vec::new();
        for (a, &u) in block.iter().enumerate() {
            level.row_entries(u, &mut entries);
            for &(v, val) in &entries {
                let k = rest_pos[v];
                if k == usize::MAX {
                    continue;
                }
                if slot[k] == usize::MAX {
                    slot[k] = boundary.len();
                    boundary.push(k);
                    coupling.push(vec![0.0; r]);
                }
                coupling[slot[k]][a] = val;
            }
        }

        let mode_coupling = |k: usize| -> f64 {
            let v = eig.eigenvectors.column(k);
            coupling
                .iter()
                .map(|c| c.iter().zip(v.iter()).map(|(x, y)| x * y).sum::<f64>().powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let kappa = match cfg.rule {
            EpsilonRule::Fixed => {
                let ztol = 1e-12 * l11.amax().max(1.0);
                if lambda1 <= ztol {
                    lambda1 - cfg.epsilon
                } else {
                    0.0
                }
            }
            // every mode keeps a margin of at least its own coupling
            EpsilonRule::Coupling => (0..r)
                .map(|k| eig.eigenvalues[k] - mode_coupling(k).max(cfg.epsilon))
                .fold(0.0, f64::min),
        };
        let eps = if kappa < 0.0 { lambda1 - kappa } else { 0.0 };
        acc += kappa;

        // z_b = diag(1/√(λ_k - κ)) Vᵀ c_b, so the fill term is z_aᵀ z_b
        let inv_sqrt: Vec<f64> = eig.eigenvalues.iter().map(|&x| 1.0 / (x - kappa).sqrt()).collect();
        let z: Vec<Vec<f64>> = coupling
            .iter()
            .map(|c| {
                (0..r)
                    .map(|k| {
                        let col = eig.eigenvectors.column(k);
                        inv_sqrt[k] * col.iter().zip(c).map(|(x, y)| x * y).sum::<f64>()
                    })
                    .collect()
            })
            .collect();
        let nb = boundary.len() as u64;
        let ru = r as u64;
        trace.work += ru.pow(3) + nb * ru * ru + nb * nb * ru;
        trace.levels.push(LevelTrace {
            dim: m,
            lambda1,
            epsilon: eps,
            kappa,
            boundary: boundary.len(),
            dense: matches!(level, Level::Dense(_)),
        });

        let rem = rest.len();
        let fill = |p: usize, q: usize| -> f64 { z[p].iter().zip(&z[q]).map(|(x, y)| x * y).sum() };
        let next = if rem <= 4 * r {
            let mut d = DMatrix::from_fn(rem, rem, |a, b| level.get(rest[a], rest[b]));
            for a in 0..rem {
                d[(a, a)] -= kappa;
            }
            for p in 0..boundary.len() {
                for q in p..boundary.len() {
                    let v = fill(p, q);
                    let (a, b) = (boundary[p], boundary[q]);
                    d[(a, b)] -= v;
                    if a != b {
                        d[(b, a)] -= v;
                    }
                }
            }
            Level::Dense(d)
        } else {
            let mut builder = SymBuilder::new(rem);
            let mut row = Vec::new();
            for (a, &u) in rest.iter().enumerate() {
                level.row_entries(u, &mut row);
                for &(v, val) in &row {
                    let b = rest_pos[v];
                    if b != usize::MAX && b >= a {
                        builder.push(a, b, val);
                    }
                }
                if kappa != 0.0 {
                    builder.push(a, a, -kappa);
                }
            }
            for p in 0..boundary.len() {
                for q in p..boundary.len() {
                    let (a, b) = (boundary[p], boundary[q]);
                    builder.push(a.min(b), a.max(b), -fill(p, q));
                }
            }
            Level::Sparse(builder.build())
        };
        level = next;

        if !level_is_finite(&level) {
            log::warn!("eigenvalue bound recursion overflowed; returning -inf");
            trace.final_min = f64::NEG_INFINITY;
            trace.bound = f64::NEG_INFINITY;
            return Ok(trace);
        }
    }
}

fn level_is_finite(level: &Level) -> bool {
    match level {
        Level::Dense(d) => d.iter().all(|v| v.is_finite()),
        Level::Sparse(s) => s.upper_entries().all(|e| e.2.is_finite()),
    }
}

fn smallest_eig(d: &DMatrix<f64>) -> f64 {
    sym_eig_unchecked(d).eigenvalues[0]
}
