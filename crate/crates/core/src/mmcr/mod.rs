//! Multimodal chorus recognition: fused features, the sigmoid classifier,
//! metrics and the extractive baselines.

mod baselines;
mod classifier;
mod fusion;
mod joint;
mod metrics;

pub use baselines::{
    pacsum, select_top_k, similarity_graph, textrank, PacSumConfig, DAMPING, TEXTRANK_MAX_ITERS, TEXTRANK_TOL,
};
pub use classifier::{grid_search, hard_labels, train_run, FusionClassifier, GridResult, GridRun, TrainConfig, THRESHOLD};
pub use fusion::{
    fuse, fused_dim, Dataset, LineFeatures, MfccMode, Modality, ModalitySet, Standardizer, CHORD_BLOCK, MFCC_BLOCK,
};
pub use joint::{train_joint, JointConfig, JointModel, JointSong};
pub use metrics::{evaluate, Metrics};

use alloc::string::String;

/// Line-level output of a classifier or baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub song_id: String,
    pub line: usize,
    pub probability: f64,
    pub label: bool,
}
