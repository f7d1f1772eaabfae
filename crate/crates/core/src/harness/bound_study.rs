use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::Dataset;
use super::experiment::split_for_trial;
use super::synth::two_blobs;
use super::{trial_rng, trial_seed, Stream};
use crate::error::{Error, Result};
use crate::graph::{
    add_negative_edges, build_knn_graph, build_laplacian, find_boundary_pairs,
    find_centroid_pair, SignedGraph, WeightConvention,
};
use crate::pipeline::{BlockSize, GraphContext, GraphParams, Method};
use crate::sparse::SymMatrix;
use crate::spectral::{
    dense_sym_eig, eval_bound_with, gershgorin_lower_bound, simple_lower_bound, EpsilonRule,
    EvalBoundConfig,
};

/// Allowed excess of a bound over the oracle before it counts as unsound.
pub const SOUNDNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundRow {
    pub trial: usize,
    pub nodes: usize,
    pub lambda_min_oracle: f64,
    /// One entry per configured block size, in order.
    pub eval_bounds: Vec<(usize, f64)>,
    pub simple_bound: f64,
    pub gershgorin_bound: f64,
}

impl BoundRow {
    /// True when every eval bound is at least both alternatives.
    pub fn eval_dominates(&self) -> bool {
        let alt = self.simple_bound.max(self.gershgorin_bound);
        self.eval_bounds.iter().all(|&(_, b)| b >= alt)
    }
}

/// Bounds for one graph; fails if any bound exceeds the oracle.
pub fn bound_row(
    trial: usize,
    graph: &SignedGraph,
    block_sizes: &[usize],
    epsilon: f64,
    rule: EpsilonRule,
    seed: u64,
) -> Result<BoundRow> {
    let bundle = build_laplacian(graph);
    let oracle = dense_sym_eig(&bundle.l.to_dense())?.min();
    let l = SymMatrix::Sparse(bundle.l.clone());
    let mut eval_bounds = Vec::with_capacity(block_sizes.len());
    for &r in block_sizes {
        let cfg = EvalBoundConfig {
            block_size: r,
            epsilon,
            rule,
            seed,
        };
        let b = eval_bound_with(&l, &cfg)?.bound;
        if !(b <= oracle + SOUNDNESS_TOL) {
            return Err(Error::SoundnessViolation {
                trial,
                bound: b,
                lambda_min: oracle,
            });
        }
        eval_bounds.push((r, b));
    }
    let simple = simple_lower_bound(&bundle);
    let gersh = gershgorin_lower_bound(&bundle.l);
    for b in [simple, gersh] {
        if b > oracle + SOUNDNESS_TOL {
            return Err(Error::SoundnessViolation {
                trial,
                bound: b,
                lambda_min: oracle,
            });
        }
    }
    Ok(BoundRow {
        trial,
        nodes: graph.node_count(),
        lambda_min_oracle: oracle,
        eval_bounds,
        simple_bound: simple,
        gershgorin_bound: gersh,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundStudySpec {
    /// Which negative edges to add: centroid, boundary, both, or none.
    pub method: Method,
    pub trials: usize,
    pub train_fraction: f64,
    pub seed: u64,
    pub graph: GraphParams,
    pub block_sizes: Vec<BlockSize>,
}

/// Builds each trial's graph from the training labels of a random split and
/// compares the bounds against the dense oracle.
pub fn run_bound_study(data: &Dataset, spec: &BoundStudySpec) -> Result<Vec<BoundRow>> {
    if spec.trials == 0 || spec.block_sizes.is_empty() {
        return Err(Error::InvalidParameter(
            "bound study needs at least one trial and one block size".into(),
        ));
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must be in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    let ctx = GraphContext::new(&data.features, &spec.graph, false)?;
    let n = data.len();
    let sizes: Vec<usize> = spec.block_sizes.iter().map(|b| b.resolve(n)).collect();
    (0..spec.trials)
        .into_par_iter()
        .map(|t| {
            let split = split_for_trial(n, spec.train_fraction, spec.seed, t);
            let observed: Vec<(usize, i8)> =
                split.train.iter().map(|&i| (i, data.labels[i])).collect();
            let graph = match spec.method {
                Method::GraphPos => ctx.knn.clone(),
                Method::ProposedCentroid => ctx.centroid_graph(&observed, &spec.graph)?,
                Method::ProposedBoundary => ctx.boundary_graph(&observed, &spec.graph)?,
                _ => ctx.combined_graph(&observed, &spec.graph)?,
            };
            bound_row(
                t,
                &graph,
                &sizes,
                spec.graph.epsilon,
                spec.graph.epsilon_rule,
                trial_seed(spec.seed, t, Stream::Bound),
            )
        })
        .collect()
}

/// Columns `trial,lambda_min_oracle,eval_bound,simple_bound,gershgorin_bound`,
/// where `eval_bound` uses the first block size. With several block sizes an
/// `eval_bound_r<r>` column follows for each.
pub fn write_bound_csv<W: Write>(out: W, rows: &[BoundRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let sizes: Vec<usize> = rows
        .first()
        .map(|r| r.eval_bounds.iter().map(|e| e.0).collect())
        .unwrap_or_default();
    let mut header: Vec<String> = ["trial", "lambda_min_oracle", "eval_bound", "simple_bound", "gershgorin_bound"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if sizes.len() > 1 {
        header.extend(sizes.iter().map(|r| format!("eval_bound_r{r}")));
    }
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![
            row.trial.to_string(),
            row.lambda_min_oracle.to_string(),
            row.eval_bounds.first().map_or(f64::NAN, |e| e.1).to_string(),
            row.simple_bound.to_string(),
            row.gershgorin_bound.to_string(),
        ];
        if sizes.len() > 1 {
            rec.extend(row.eval_bounds.iter().map(|e| e.1.to_string()));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One member of the seeded signed-graph corpus used to compare bounds.
#[derive(Debug, Clone)]
pub struct CorpusGraph {
    pub graph: SignedGraph,
    /// Block size for this member: 10 for even indices, `⌈√N⌉` for odd.
    pub block_size: usize,
}

/// Most negative (centroid, boundary) weights, cycled across corpus members.
pub const CORPUS_WEIGHT_RANGES: [(f64, f64); 4] =
    [(-10.0, -0.01), (-20.0, -0.01), (-1.0, -0.01), (-1.0, -0.1)];

/// Two Gaussian blobs with `N ∈ [50, 200]`, a 3-NN kernel graph, and negative
/// edges numbering 5% of the positive edges: the centroid pair plus nearest
/// cross-class pairs.
pub fn signed_graph_corpus(count: usize, seed: u64) -> Result<Vec<CorpusGraph>> {
    (0..count)
        .map(|k| {
            let mut rng = trial_rng(seed, k, Stream::Corpus);
            let n = rng.gen_range(50..=200);
            let data = two_blobs(n, 3.0, 1.0, rng.gen())?;
            let knn = build_knn_graph(&data.features, 3)?;
            let labels: Vec<(usize, i8)> = data.labels.iter().copied().enumerate().collect();
            let budget = ((0.05 * knn.positive_edge_count() as f64).round() as usize).max(1);
            let (cw, bw) = CORPUS_WEIGHT_RANGES[k % CORPUS_WEIGHT_RANGES.len()];
            let pairs = find_boundary_pairs(&data.features, &labels, budget - 1)?;
            let g = add_negative_edges(&knn, &pairs, &data.features, bw, WeightConvention::Proportional)?;
            let centroid = find_centroid_pair(&data.features, &labels)?;
            let graph = add_negative_edges(&g, &[centroid], &data.features, cw, WeightConvention::Proportional)?;
            let block_size = if k % 2 == 0 { 10 } else { BlockSize::Sqrt.resolve(n) };
            Ok(CorpusGraph { graph, block_size })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_graph_bounds_are_zero() {
        let edges: Vec<_> = (0..29).map(|i| (i, i + 1, 0.5)).collect();
        let g = SignedGraph::from_edges(30, &edges).unwrap();
        let row = bound_row(0, &g, &[5], 1e-6, EpsilonRule::Fixed, 1).unwrap();
        assert!(row.lambda_min_oracle.abs() < 1e-9);
        assert!(row.eval_bounds[0].1.abs() < 1e-9);
        assert_eq!(row.simple_bound, 0.0);
        assert!(row.gershgorin_bound.abs() < 1e-12);
    }

    #[test]
    fn csv_has_spec_columns() {
        let row = BoundRow {
            trial: 0,
            nodes: 3,
            lambda_min_oracle: -1.0,
            eval_bounds: vec![(2, -1.5)],
            simple_bound: -2.0,
            gershgorin_bound: -3.0,
        };
        let mut buf = Vec::new();
        write_bound_csv(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "trial,lambda_min_oracle,eval_bound,simple_bound,gershgorin_bound\n0,-1,-1.5,-2,-3\n"
        );
    }

    #[test]
    fn corpus_shape() {
        let corpus = signed_graph_corpus(4, 7).unwrap();
        for (k, c) in corpus.iter().enumerate() {
            let g = &c.graph;
            assert!((50..=200).contains(&g.node_count()));
            assert!(g.negative_edge_count() >= 1);
            let frac = g.negative_edge_count() as f64 / g.positive_edge_count() as f64;
            assert!(frac <= 0.1, "member {k}: {frac}");
        }
        assert_eq!(corpus[0].block_size, 10);
    }
}
