//! Dimensionality reduction, classical baselines and scoring.

mod baselines;
mod metrics;
mod pca;

pub use baselines::{agglomerative_baseline, divisive_baseline, Linkage};
pub use metrics::{ring_purity, score_binary, BinaryClass, ConfusionCounts};
pub use pca::{pca_2d, PcaModel};
