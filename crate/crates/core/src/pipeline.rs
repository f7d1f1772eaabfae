//! Classifier variants built from graph construction, perturbation and IRLS.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    add_negative_edges, build_knn_graph, build_laplacian, combine_laplacians, find_boundary_pairs,
    find_centroid_pair, FeatureSet, PartialLabels, SignedGraph, WeightConvention,
};
use crate::solver::{
    generalized_smoothness_matrix, irls_run, ClassifierSignal, IrlsState, SolverConfig,
};
use crate::sparse::{SparseSym, SymMatrix};
use crate::spectral::{
    dense_sym_eig, eval_bound_with, min_norm_perturbation, perturb_identity, EpsilonRule,
    EvalBoundConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// One negative edge between the class medoids.
    ProposedCentroid,
    /// Negative edges between nearest cross-class pairs.
    ProposedBoundary,
    /// Centroid and boundary graphs mixed by a descending β schedule.
    ProposedHybrid,
    /// Hybrid with the reject threshold tuned to a target rejection rate.
    ProposedRej,
    /// Positive kNN graph only.
    GraphPos,
    /// Centroid and boundary edges in one graph, fixed by the min-norm clamp.
    GraphMinNorm,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::ProposedCentroid,
        Method::ProposedBoundary,
        Method::ProposedHybrid,
        Method::ProposedRej,
        Method::GraphPos,
        Method::GraphMinNorm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::ProposedCentroid => "ProposedCentroid",
            Method::ProposedBoundary => "ProposedBoundary",
            Method::ProposedHybrid => "ProposedHybrid",
            Method::ProposedRej => "ProposedRej",
            Method::GraphPos => "GraphPos",
            Method::GraphMinNorm => "GraphMinNorm",
        }
    }

    pub fn uses_negative_edges(&self) -> bool {
        !matches!(self, Method::GraphPos)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name().to_ascii_lowercase() == key)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method `{s}`")))
    }
}

/// Block size for the eigenvalue bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockSize {
    Fixed(usize),
    /// `⌈√N⌉`
    Sqrt,
}

impl BlockSize {
    pub fn resolve(&self, n: usize) -> usize {
        match *self {
            BlockSize::Fixed(r) => r,
            BlockSize::Sqrt => (n as f64).sqrt().ceil() as usize,
        }
        .max(1)
    }
}

impl std::fmt::Display for BlockSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BlockSize::Fixed(r) => write!(f, "{r}"),
            BlockSize::Sqrt => f.write_str("sqrt"),
        }
    }
}

impl std::str::FromStr for BlockSize {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("sqrt") {
            return Ok(BlockSize::Sqrt);
        }
        match s.parse::<usize>() {
            Ok(r) if r > 0 => Ok(BlockSize::Fixed(r)),
            _ => Err(Error::InvalidParameter(format!(
                "block size must be a positive integer or `sqrt`, got `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct GraphParams {
    /// Neighbours per node in the kNN graph.
    pub omega: usize,
    /// Most negative weight of the centroid edge.
    pub centroid_weight: f64,
    /// Most negative weight among boundary edges.
    pub boundary_weight: f64,
    /// Boundary pairs as a fraction of the positive edge count.
    pub negative_fraction: f64,
    pub convention: WeightConvention,
    pub block_size: BlockSize,
    pub epsilon: f64,
    pub epsilon_rule: EpsilonRule,
    /// Also compute `λ_min - bound` with the dense oracle.
    pub record_bound_gap: bool,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self {
            omega: 3,
            centroid_weight: -1.0,
            boundary_weight: -0.1,
            negative_fraction: 0.05,
            convention: WeightConvention::Proportional,
            block_size: BlockSize::Sqrt,
            epsilon: 1e-6,
            epsilon_rule: EpsilonRule::Coupling,
            record_bound_gap: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct MethodConfig {
    pub graph: GraphParams,
    pub solver: SolverConfig,
    /// Fraction of unlabeled nodes the reject-option variant aims to reject.
    pub reject_target: f64,
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self {
            graph: GraphParams::default(),
            solver: SolverConfig::default(),
            reject_target: 0.095,
        }
    }
}

impl MethodConfig {
    /// Settings for two-class data with curved, touching classes such as the
    /// bundled crescents: a heavy centroid edge, light boundary edges and a
    /// stronger smoothness weight.
    pub fn crescents_preset() -> Self {
        let mut c = Self::default();
        c.graph.centroid_weight = -20.0;
        c.graph.boundary_weight = -0.01;
        c.solver.mu1 = 0.1;
        c
    }
}

#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub signal: ClassifierSignal,
    /// Reject threshold actually applied.
    pub threshold: f64,
    /// Eigenvalue bounds used for identity shifts, in order of use.
    pub bounds: Vec<f64>,
    /// Smallest `λ_min - bound` over the shifts, when requested.
    pub bound_gap: Option<f64>,
}

/// Graph pieces shared by all variants for one feature set.
pub struct GraphContext<'a> {
    pub features: &'a FeatureSet,
    pub knn: SignedGraph,
    /// `(L⁺)²` of the kNN graph, or zeros when the prior is unused.
    pub gsq: SparseSym,
}

impl<'a> GraphContext<'a> {
    pub fn new(features: &'a FeatureSet, params: &GraphParams, need_gsq: bool) -> Result<Self> {
        let knn = build_knn_graph(features, params.omega)?;
        let gsq = if need_gsq {
            generalized_smoothness_matrix(&build_laplacian(&knn).lpos)?
        } else {
            SparseSym::zeros(features.len())
        };
        Ok(Self { features, knn, gsq })
    }

    pub fn boundary_pair_budget(&self, params: &GraphParams) -> usize {
        ((params.negative_fraction * self.knn.positive_edge_count() as f64).round() as usize).max(1)
    }

    pub fn centroid_graph(&self, labels: &[(usize, i8)], params: &GraphParams) -> Result<SignedGraph> {
        let (a, b) = find_centroid_pair(self.features, labels)?;
        add_negative_edges(&self.knn, &[(a, b)], self.features, params.centroid_weight, params.convention)
    }

    pub fn boundary_graph(&self, labels: &[(usize, i8)], params: &GraphParams) -> Result<SignedGraph> {
        let pairs = find_boundary_pairs(self.features, labels, self.boundary_pair_budget(params))?;
        add_negative_edges(&self.knn, &pairs, self.features, params.boundary_weight, params.convention)
    }

    /// Centroid and boundary edges together; the centroid edge wins on overlap.
    pub fn combined_graph(&self, labels: &[(usize, i8)], params: &GraphParams) -> Result<SignedGraph> {
        let pairs = find_boundary_pairs(self.features, labels, self.boundary_pair_budget(params))?;
        let g = add_negative_edges(&self.knn, &pairs, self.features, params.boundary_weight, params.convention)?;
        let (a, b) = find_centroid_pair(self.features, labels)?;
        add_negative_edges(&g, &[(a, b)], self.features, params.centroid_weight, params.convention)
    }
}

struct Shifted {
    matrix: SymMatrix,
    bound: f64,
    gap: Option<f64>,
}

fn shifted_laplacian(graph: &SignedGraph, params: &GraphParams, seed: u64) -> Result<Shifted> {
    let l = build_laplacian(graph).l;
    let cfg = EvalBoundConfig {
        block_size: params.block_size.resolve(graph.node_count()),
        epsilon: params.epsilon,
        rule: params.epsilon_rule,
        seed,
    };
    let l = SymMatrix::Sparse(l);
    let trace = eval_bound_with(&l, &cfg)?;
    if !trace.bound.is_finite() {
        return Err(Error::SingularSystem(
            "eigenvalue bound overflowed; try a larger epsilon or block size".into(),
        ));
    }
    let gap = if params.record_bound_gap {
        Some(dense_sym_eig(&l.to_dense())?.min() - trace.bound)
    } else {
        None
    };
    let p = perturb_identity(&l, trace.bound)?;
    Ok(Shifted {
        matrix: p.perturbed,
        bound: trace.bound,
        gap,
    })
}

/// Threshold rejecting about `target` of the given nodes by magnitude.
pub fn tune_reject_threshold(values: &[f64], nodes: &[usize], target: f64) -> f64 {
    let mut mags: Vec<f64> = nodes.iter().map(|&i| values[i].abs()).collect();
    mags.sort_by(f64::total_cmp);
    let k = (target * mags.len() as f64).round() as usize;
    if k == 0 {
        0.0
    } else {
        mags[k.min(mags.len()) - 1]
    }
}

/// Current-iterate labels for rebuilding the negative edges.
fn estimate_labels(values: &[f64]) -> Vec<(usize, i8)> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| (i, if *v > 0.0 { 1 } else { -1 }))
        .collect()
}

fn both_classes(labels: &[(usize, i8)]) -> bool {
    labels.iter().any(|l| l.1 > 0) && labels.iter().any(|l| l.1 < 0)
}

/// Runs one classifier variant. `seed` drives the eigenvalue-bound search.
pub fn run_method(
    method: Method,
    features: &FeatureSet,
    labels: &PartialLabels,
    config: &MethodConfig,
    seed: u64,
) -> Result<MethodOutcome> {
    let ctx = GraphContext::new(features, &config.graph, config.solver.mu2 > 0.0)?;
    run_method_with(method, &ctx, labels, config, seed)
}

/// Same as [`run_method`] with a prebuilt kNN context.
pub fn run_method_with(
    method: Method,
    ctx: &GraphContext<'_>,
    labels: &PartialLabels,
    config: &MethodConfig,
    seed: u64,
) -> Result<MethodOutcome> {
    let gp = &config.graph;
    let solver = &config.solver;
    let observed = labels.observed();
    let mut bounds = Vec::new();
    let mut gaps = Vec::new();
    let mut record = |s: &Shifted| {
        bounds.push(s.bound);
        if let Some(g) = s.gap {
            gaps.push(g);
        }
    };

    let (signal, threshold) = match method {
        Method::GraphPos => {
            let l = SymMatrix::Sparse(build_laplacian(&ctx.knn).l);
            let out = irls_run(&l, &ctx.gsq, labels, solver, None)?;
            (out.signal, solver.reject_threshold)
        }
        Method::GraphMinNorm => {
            let g = ctx.combined_graph(observed, gp)?;
            let p = min_norm_perturbation(&SymMatrix::Sparse(build_laplacian(&g).l))?;
            let out = irls_run(&p.perturbed, &ctx.gsq, labels, solver, None)?;
            (out.signal, solver.reject_threshold)
        }
        Method::ProposedCentroid | Method::ProposedBoundary => {
            let g = if method == Method::ProposedCentroid {
                ctx.centroid_graph(observed, gp)?
            } else {
                ctx.boundary_graph(observed, gp)?
            };
            let s = shifted_laplacian(&g, gp, seed)?;
            record(&s);
            let out = irls_run(&s.matrix, &ctx.gsq, labels, solver, None)?;
            (out.signal, solver.reject_threshold)
        }
        Method::ProposedHybrid | Method::ProposedRej => {
            solver.validate_hybrid()?;
            let mut state: Option<IrlsState> = None;
            let mut signal = None;
            let mut iterations = 0;
            for (stage, &beta) in solver.beta_schedule.iter().enumerate() {
                let estimated;
                let stage_labels: &[(usize, i8)] = match &state {
                    Some(st) if stage > 0 => {
                        estimated = estimate_labels(&st.signal);
                        if both_classes(&estimated) {
                            &estimated
                        } else {
                            observed
                        }
                    }
                    _ => observed,
                };
                let stage_seed = seed.wrapping_add(stage as u64);
                let centroid = if beta > 0.0 {
                    let s = shifted_laplacian(&ctx.centroid_graph(stage_labels, gp)?, gp, stage_seed)?;
                    record(&s);
                    Some(s.matrix)
                } else {
                    None
                };
                let boundary = if beta < 1.0 {
                    let s = shifted_laplacian(
                        &ctx.boundary_graph(stage_labels, gp)?,
                        gp,
                        stage_seed ^ 0x9e37_79b9,
                    )?;
                    record(&s);
                    Some(s.matrix)
                } else {
                    None
                };
                let lg = match (centroid, boundary) {
                    (Some(c), Some(b)) => combine_laplacians(&c, &b, beta)?,
                    (Some(c), None) => c,
                    (None, Some(b)) => b,
                    (None, None) => unreachable!("beta is in [0, 1]"),
                };
                let out = irls_run(&lg, &ctx.gsq, labels, solver, state.as_ref())?;
                iterations += out.signal.iterations;
                state = Some(out.state);
                signal = Some(out.signal);
            }
            let mut signal: ClassifierSignal = signal.ok_or_else(|| {
                Error::InvalidParameter("beta schedule must not be empty".into())
            })?;
            signal.iterations = iterations;
            let threshold = if method == Method::ProposedRej {
                let labeled: std::collections::HashSet<usize> =
                    observed.iter().map(|o| o.0).collect();
                let hidden: Vec<usize> =
                    (0..labels.node_count()).filter(|i| !labeled.contains(i)).collect();
                tune_reject_threshold(&signal.values, &hidden, config.reject_target)
            } else {
                solver.reject_threshold
            };
            (signal, threshold)
        }
    };

    let mut signal = signal;
    signal.decisions = crate::solver::classify(&signal.values, threshold);
    let bound_gap = gaps.into_iter().reduce(f64::min);
    Ok(MethodOutcome {
        signal,
        threshold,
        bounds,
        bound_gap,
    })
}
