//! Potential Anchoring: resampling imbalanced binary datasets by placing
//! synthetic prototypes whose RBF class potential matches the original class
//! distribution.
//!
//! The pipeline is
//!
//! 1. [`data`]: class partitioning and standardization,
//! 2. [`clustering`]: k-means anchor points over the combined data,
//! 3. [`potential`]: normalized anchor potentials and the resemblance loss,
//! 4. [`optimizer`]: Adam over prototype positions,
//! 5. [`resampler`]: the full PA procedure plus SMOTE and random baselines.
//!
//! [`complexity`] provides the data difficulty index and label-noise
//! injection, [`evaluation`] a KNN classifier, metrics, 5x2 cross-validation
//! and the ratio / noise sweeps.

pub mod clustering;
pub mod complexity;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod neighbors;
pub mod optimizer;
pub mod potential;
pub mod resampler;
pub mod seeding;
pub mod synthetic;

pub use clustering::{kmeans_anchors, AnchorSet};
pub use complexity::{categorize_minority, difficulty_index, inject_label_noise, Category, DifficultyReport};
pub use data::{encode_categoricals, fit_standardizer, partition, ClassTag, Dataset, PreprocessParams};
pub use error::{Error, Result};
pub use evaluation::{cross_validate, noise_sweep, ratio_sweep, EvalOptions, EvaluationReport, Metrics};
pub use optimizer::{adam_step, optimize_prototypes, AdamState, OptimizeParams, PrototypeSet};
pub use potential::{loss_gradient, normalized_potential, potential, resemblance_loss, Gamma, PotentialProfile};
pub use resampler::{
    init_prototypes, pa_counts, pa_resample, pa_resample_traced, random_oversample, random_undersample, smote_resample, Method,
    PaConfig, Provenance, ResampleResult,
};
