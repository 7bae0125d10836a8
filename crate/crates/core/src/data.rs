//! Dataset representation, class partitioning and feature preprocessing.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::error::{Error, Result};

/// Binary class tag. The minority class is the positive class everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassTag {
    Minority,
    Majority,
}

impl ClassTag {
    pub fn is_minority(self) -> bool {
        matches!(self, ClassTag::Minority)
    }
}

/// Feature matrix with binary labels.
///
/// Rows are observations. `class_names` holds the original label strings as
/// `[minority, majority]` so outputs can be written back in the source
/// vocabulary.
///
/// Datasets built through [`Dataset::from_raw_labels`] always tag the larger
/// class as majority. Label noise injection may later flip rows so that the
/// majority tag no longer denotes the larger class; that is allowed and the
/// resamplers report it as [`Error::MinorityExceedsMajority`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub labels: Vec<ClassTag>,
    pub feature_names: Vec<String>,
    pub class_names: [String; 2],
    /// Category maps of integer-encoded nominal columns, by column index.
    pub category_maps: Vec<(usize, CategoryMap)>,
}

impl Dataset {
    pub fn new(
        features: Array2<f64>,
        labels: Vec<ClassTag>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if feature_names.len() != features.ncols() {
            return Err(Error::InvalidDataset(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.ncols()
            )));
        }
        Ok(Self {
            features,
            labels,
            feature_names,
            class_names: ["minority".to_string(), "majority".to_string()],
            category_maps: Vec::new(),
        })
    }

    /// Builds a dataset from string labels, tagging the larger class as
    /// majority.
    ///
    /// `class_order` lists the class values in source order (for example the
    /// declared domain of a KEEL output attribute); when absent, order of
    /// first appearance is used. On equal class sizes the class listed second
    /// becomes the minority.
    pub fn from_raw_labels(
        features: Array2<f64>,
        raw_labels: &[String],
        feature_names: Vec<String>,
        class_order: Option<&[String]>,
    ) -> Result<Self> {
        let mut order: Vec<String> = class_order.map(|o| o.to_vec()).unwrap_or_default();
        for label in raw_labels {
            if !order.contains(label) {
                order.push(label.clone());
            }
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for label in raw_labels {
            *counts.entry(label.as_str()).or_default() += 1;
        }
        let present: Vec<&String> = order
            .iter()
            .filter(|c| counts.contains_key(c.as_str()))
            .collect();
        if present.len() > 2 {
            return Err(Error::InvalidDataset(format!(
                "expected a binary problem, found {} classes",
                present.len()
            )));
        }
        let (minority, majority) = match present.as_slice() {
            [] => return Err(Error::InvalidDataset("no rows".into())),
            [only] => ("".to_string(), (*only).clone()),
            [first, second] => {
                if counts[first.as_str()] >= counts[second.as_str()] {
                    ((*second).clone(), (*first).clone())
                } else {
                    ((*first).clone(), (*second).clone())
                }
            }
            _ => unreachable!(),
        };
        let labels = raw_labels
            .iter()
            .map(|l| {
                if *l == majority {
                    ClassTag::Majority
                } else {
                    ClassTag::Minority
                }
            })
            .collect();
        let mut d = Self::new(features, labels, feature_names)?;
        d.class_names = [minority, majority];
        Ok(d)
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_min(&self) -> usize {
        self.labels.iter().filter(|l| l.is_minority()).count()
    }

    pub fn n_maj(&self) -> usize {
        self.labels.len() - self.n_min()
    }

    /// Majority count over minority count.
    pub fn imbalance_ratio(&self) -> f64 {
        self.n_maj() as f64 / self.n_min() as f64
    }

    pub fn class_name(&self, tag: ClassTag) -> &str {
        match tag {
            ClassTag::Minority => &self.class_names[0],
            ClassTag::Majority => &self.class_names[1],
        }
    }

    /// Copy of the rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
            category_maps: self.category_maps.clone(),
        }
    }

    /// Same labels and metadata with a replaced feature matrix.
    pub fn with_features(&self, features: Array2<f64>) -> Dataset {
        assert_eq!(features.dim(), self.features.dim());
        Dataset {
            features,
            ..self.clone()
        }
    }
}

/// Splits a dataset into `(majority rows, minority rows)`, preserving row
/// order within each class.
pub fn partition(d: &Dataset) -> Result<(Array2<f64>, Array2<f64>)> {
    let (maj, min): (Vec<usize>, Vec<usize>) =
        (0..d.n_rows()).partition(|&i| d.labels[i] == ClassTag::Majority);
    if maj.is_empty() {
        return Err(Error::EmptyClass("majority"));
    }
    if min.is_empty() {
        return Err(Error::EmptyClass("minority"));
    }
    Ok((
        d.features.select(Axis(0), &maj),
        d.features.select(Axis(0), &min),
    ))
}

/// Ordered category list of an integer-encoded nominal column; the code of a
/// category is its position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryMap {
    pub categories: Vec<String>,
}

impl CategoryMap {
    pub fn code(&self, value: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == value)
    }
}

/// Encodes a nominal column as integers in order of first appearance.
pub fn encode_categoricals<S: AsRef<str>>(raw_column: &[S]) -> (Vec<usize>, CategoryMap) {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut categories = Vec::new();
    let codes = raw_column
        .iter()
        .map(|v| {
            let v = v.as_ref();
            *index.entry(v).or_insert_with(|| {
                categories.push(v.to_string());
                categories.len() - 1
            })
        })
        .collect();
    (codes, CategoryMap { categories })
}

/// Fitted standardization parameters plus the category maps used while
/// encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessParams {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    #[serde(default)]
    pub category_maps: Vec<(usize, CategoryMap)>,
}

/// Per-column mean and population standard deviation. Constant columns get
/// `std = 1` so they map to 0.
pub fn fit_standardizer(features: ArrayView2<f64>) -> PreprocessParams {
    let n = features.nrows() as f64;
    let mut means = Vec::with_capacity(features.ncols());
    let mut stds = Vec::with_capacity(features.ncols());
    for col in features.columns() {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        means.push(mean);
        stds.push(if std > 0.0 && std.is_finite() { std } else { 1.0 });
    }
    PreprocessParams {
        means,
        stds,
        category_maps: Vec::new(),
    }
}

impl PreprocessParams {
    pub fn transform(&self, features: ArrayView2<f64>) -> Array2<f64> {
        let means = Array1::from(self.means.clone());
        let stds = Array1::from(self.stds.clone());
        let mut out = features.to_owned();
        for mut row in out.rows_mut() {
            row -= &means;
            row /= &stds;
        }
        out
    }

    pub fn inverse_transform(&self, features: ArrayView2<f64>) -> Array2<f64> {
        let means = Array1::from(self.means.clone());
        let stds = Array1::from(self.stds.clone());
        let mut out = features.to_owned();
        for mut row in out.rows_mut() {
            row *= &stds;
            row += &means;
        }
        out
    }

    pub fn transform_dataset(&self, d: &Dataset) -> Dataset {
        d.with_features(self.transform(d.features.view()))
    }
}
