use thiserror::Error;

/// Errors raised by the resampling, complexity and evaluation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{0} class has no observations")]
    EmptyClass(&'static str),

    #[error("normalized potential is degenerate: denominator {denominator:e} is below 1e-30")]
    DegeneratePotential { denominator: f64 },

    #[error("gradient contains non-finite values")]
    NonFiniteGradient,

    #[error("optimization failed at iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("ratio must lie in [0, 1], got {0}")]
    InvalidRatio(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot sample {requested} prototypes from an empty class")]
    EmptySource { requested: usize },

    #[error("majority class ({n_maj}) is smaller than minority class ({n_min})")]
    MinorityExceedsMajority { n_maj: usize, n_min: usize },

    #[error("SMOTE needs at least 2 minority observations, got {0}")]
    TooFewMinority(usize),

    #[error("need more than {needed} observations, got {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("training set is empty")]
    EmptyTrainSet,

    #[error("test fold contains a single class")]
    SingleClassTestFold,

    #[error("labels and scores differ in length ({labels} vs {scores})")]
    LengthMismatch { labels: usize, scores: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        Error::AtIteration {
            iteration,
            source: Box::new(self),
        }
    }
}
