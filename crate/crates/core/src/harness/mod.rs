//! Experiment plumbing: datasets, label noise, synthetic data, sweeps and
//! bound studies.

mod bound_study;
mod data;
mod experiment;
mod noise;
mod synth;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use bound_study::{
    bound_row, run_bound_study, signed_graph_corpus, write_bound_csv, BoundRow, BoundStudySpec,
    CorpusGraph, CORPUS_WEIGHT_RANGES, SOUNDNESS_TOL,
};
pub use data::{load_dataset, read_dataset, read_features, read_labels, write_dataset, Dataset};
pub use experiment::{
    run_experiment, score, split_for_trial, write_results_csv, write_summary_csv,
    ExperimentReport, ExperimentSpec, Split, SummaryRow, TrialFailure, TrialResult,
};
pub use noise::inject_label_noise;
pub use synth::{crescents, generate, two_blobs, SynthKind};

/// Independent random streams per trial.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Stream {
    Split = 0,
    Noise = 1,
    Bound = 2,
    Corpus = 3,
}

/// A generator that depends only on `(seed, trial, stream)`, so adding trials
/// leaves earlier ones untouched.
pub(crate) fn trial_rng(seed: u64, trial: usize, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((trial as u64) << 2 | stream as u64);
    rng
}

pub(crate) fn trial_seed(seed: u64, trial: usize, stream: Stream) -> u64 {
    use rand::RngCore;
    trial_rng(seed, trial, stream).next_u64()
}
