//! Potential Anchoring resampling and the SMOTE / random baselines.
//!
//! PA balances the classes by a mix of oversampling and undersampling:
//! `ratio` of the class gap is closed with optimized synthetic minority
//! prototypes, the rest by replacing the majority class with a smaller set of
//! optimized majority prototypes. `ratio = 1` is pure oversampling (PAO),
//! `ratio = 0` pure undersampling (PAU).

use ndarray::{concatenate, Array2, ArrayView2, Axis};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::clustering::{kmeans_anchors, AnchorSet};
use crate::data::{partition, ClassTag, Dataset};
use crate::error::{Error, Result};
use crate::neighbors::KdTree;
use crate::optimizer::{optimize_prototypes_traced, OptimizeParams, PrototypeSet};
use crate::potential::Gamma;
use crate::seeding::{stage_rng, sub_seed};

/// Parameters of a Potential Anchoring run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PaConfig {
    /// Share of the class gap closed by oversampling.
    pub ratio: f64,
    pub k_anchors: usize,
    pub iterations: usize,
    pub gamma: f64,
    /// Regularization weight for the minority prototypes.
    pub lambda: f64,
    pub lr: f64,
    /// Per-coordinate std of the Gaussian initialization jitter.
    pub jitter: f64,
    pub seed: u64,
    /// At `ratio == 1`, keep the original majority rows instead of
    /// replacing them with optimized prototypes.
    pub keep_majority_at_full_ratio: bool,
}

impl Default for PaConfig {
    fn default() -> Self {
        Self {
            ratio: 0.1,
            k_anchors: 10,
            iterations: 200,
            gamma: 0.5,
            lambda: 10.0,
            lr: 0.001,
            jitter: 1e-3,
            seed: 0,
            keep_majority_at_full_ratio: false,
        }
    }
}

impl PaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.ratio) {
            return Err(Error::InvalidRatio(self.ratio));
        }
        Gamma::new(self.gamma)?;
        if self.k_anchors == 0 {
            return Err(Error::InvalidParameter("k_anchors must be at least 1".into()));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::InvalidParameter(format!("lr must be > 0, got {}", self.lr)));
        }
        if !(self.jitter >= 0.0) || !self.jitter.is_finite() {
            return Err(Error::InvalidParameter(format!("jitter must be >= 0, got {}", self.jitter)));
        }
        Ok(())
    }
}

/// Where a row of a resampled dataset came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    OriginalMinority,
    SyntheticMinority,
    MajorityPrototype,
    OriginalMajority,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::OriginalMinority => "original-minority",
            Provenance::SyntheticMinority => "synthetic-minority",
            Provenance::MajorityPrototype => "majority-prototype",
            Provenance::OriginalMajority => "original-majority",
        }
    }
}

/// Prototypes and anchors of a PA run, kept for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct PaDetails {
    pub anchors: AnchorSet,
    pub minority: PrototypeSet,
    pub majority: Option<PrototypeSet>,
}

/// A balanced dataset plus per-row provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ResampleResult {
    pub dataset: Dataset,
    pub provenance: Vec<Provenance>,
    /// `(n_PAO, n_PAU)` for PA; `(synthetic minority, kept majority)` for
    /// the baselines.
    pub counts: (usize, usize),
    pub details: Option<PaDetails>,
}

/// Number of synthetic minority prototypes and of majority prototypes.
///
/// `n_pao = round_half_even(ratio * (n_maj - n_min))` and
/// `n_pau = n_min + n_pao`, so the output is exactly balanced.
pub fn pa_counts(ratio: f64, n_maj: usize, n_min: usize) -> Result<(usize, usize)> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::InvalidRatio(ratio));
    }
    if n_maj < n_min {
        return Err(Error::MinorityExceedsMajority { n_maj, n_min });
    }
    let gap = (n_maj - n_min) as f64;
    let n_pao = (ratio * gap).round_ties_even() as usize;
    Ok((n_pao, n_min + n_pao))
}

/// Samples `n` rows with replacement as starting positions and adds Gaussian
/// jitter to get the initial prototype positions.
pub fn init_prototypes(
    x_class: ArrayView2<f64>,
    n: usize,
    jitter: f64,
    seed: u64,
    class_tag: ClassTag,
) -> Result<PrototypeSet> {
    let d = x_class.ncols();
    if n == 0 {
        return PrototypeSet::new(Array2::zeros((0, d)), Array2::zeros((0, d)), class_tag);
    }
    if x_class.nrows() == 0 {
        return Err(Error::EmptySource { requested: n });
    }
    let mut pick = stage_rng(seed, "sample");
    let idx: Vec<usize> = (0..n).map(|_| pick.random_range(0..x_class.nrows())).collect();
    let start = x_class.select(Axis(0), &idx);
    let mut current = start.clone();
    if jitter > 0.0 {
        let normal = Normal::new(0.0, jitter)
            .map_err(|e| Error::InvalidParameter(format!("jitter: {e}")))?;
        let mut noise = stage_rng(seed, "jitter");
        current.mapv_inplace(|v| v + normal.sample(&mut noise));
    }
    PrototypeSet::new(current, start, class_tag)
}

fn balanced_dataset(
    parts: &[(ArrayView2<f64>, ClassTag, Provenance)],
    d: usize,
) -> Result<(Dataset, Vec<Provenance>)> {
    let views: Vec<ArrayView2<f64>> = parts.iter().map(|p| p.0).collect();
    let features = if views.is_empty() {
        Array2::zeros((0, d))
    } else {
        concatenate(Axis(0), &views).map_err(|e| Error::InvalidDataset(e.to_string()))?
    };
    let mut labels = Vec::with_capacity(features.nrows());
    let mut provenance = Vec::with_capacity(features.nrows());
    for (view, tag, prov) in parts {
        labels.extend(std::iter::repeat_n(*tag, view.nrows()));
        provenance.extend(std::iter::repeat_n(*prov, view.nrows()));
    }
    let names = (0..d).map(|j| format!("x{j}")).collect();
    Ok((Dataset::new(features, labels, names)?, provenance))
}

fn check_classes(x_maj: ArrayView2<f64>, x_min: ArrayView2<f64>) -> Result<()> {
    if x_maj.nrows() == 0 {
        return Err(Error::EmptyClass("majority"));
    }
    if x_min.nrows() == 0 {
        return Err(Error::EmptyClass("minority"));
    }
    if x_maj.ncols() != x_min.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x_maj.ncols(),
            found: x_min.ncols(),
        });
    }
    if x_maj.nrows() < x_min.nrows() {
        return Err(Error::MinorityExceedsMajority {
            n_maj: x_maj.nrows(),
            n_min: x_min.nrows(),
        });
    }
    Ok(())
}

/// Potential Anchoring over- and undersampling.
///
/// Output rows are the original minority rows, then the optimized synthetic
/// minority prototypes, then the optimized majority prototypes.
pub fn pa_resample(
    x_maj: ArrayView2<f64>,
    x_min: ArrayView2<f64>,
    cfg: &PaConfig,
) -> Result<ResampleResult> {
    pa_resample_impl(x_maj, x_min, cfg, false).map(|(r, _)| r)
}

/// Per-iteration loss of the minority and majority optimizations of a PA
/// run; each holds `iterations + 1` values, or none when the class has no
/// prototypes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossTraces {
    pub minority: Vec<f64>,
    pub majority: Vec<f64>,
}

/// [`pa_resample`] that also records the loss trace of both optimizations.
pub fn pa_resample_traced(
    x_maj: ArrayView2<f64>,
    x_min: ArrayView2<f64>,
    cfg: &PaConfig,
) -> Result<(ResampleResult, LossTraces)> {
    pa_resample_impl(x_maj, x_min, cfg, true)
}

fn pa_resample_impl(
    x_maj: ArrayView2<f64>,
    x_min: ArrayView2<f64>,
    cfg: &PaConfig,
    traced: bool,
) -> Result<(ResampleResult, LossTraces)> {
    cfg.validate()?;
    check_classes(x_maj, x_min)?;
    let gamma = Gamma::new(cfg.gamma)?;
    let (n_pao, n_pau) = pa_counts(cfg.ratio, x_maj.nrows(), x_min.nrows())?;

    let combined = concatenate(Axis(0), &[x_maj, x_min])
        .map_err(|e| Error::InvalidDataset(e.to_string()))?;
    let anchors = kmeans_anchors(combined.view(), cfg.k_anchors, sub_seed(cfg.seed, "anchors"))?;

    let keep_majority = cfg.keep_majority_at_full_ratio && cfg.ratio == 1.0;
    let minority = init_prototypes(
        x_min,
        n_pao,
        cfg.jitter,
        sub_seed(cfg.seed, "minority"),
        ClassTag::Minority,
    )?;
    let majority = if keep_majority {
        None
    } else {
        Some(init_prototypes(
            x_maj,
            n_pau,
            cfg.jitter,
            sub_seed(cfg.seed, "majority"),
            ClassTag::Majority,
        )?)
    };

    let min_params = OptimizeParams {
        gamma,
        lambda: cfg.lambda,
        iterations: cfg.iterations,
        lr: cfg.lr,
    };
    let maj_params = OptimizeParams {
        lambda: 0.0,
        ..min_params
    };
    let mut traces = LossTraces::default();
    let (min_trace, maj_trace) = (&mut traces.minority, &mut traces.majority);
    let (minority, majority) = rayon::join(
        || optimize_prototypes_traced(x_min, &anchors, minority, min_params, traced.then_some(min_trace)),
        || {
            majority
                .map(|m| optimize_prototypes_traced(x_maj, &anchors, m, maj_params, traced.then_some(maj_trace)))
                .transpose()
        },
    );
    let (minority, majority) = (minority?, majority?);

    let d = x_min.ncols();
    let mut parts = vec![
        (x_min, ClassTag::Minority, Provenance::OriginalMinority),
        (minority.current.view(), ClassTag::Minority, Provenance::SyntheticMinority),
    ];
    match &majority {
        Some(m) => parts.push((m.current.view(), ClassTag::Majority, Provenance::MajorityPrototype)),
        None => parts.push((x_maj, ClassTag::Majority, Provenance::OriginalMajority)),
    }
    let (dataset, provenance) = balanced_dataset(&parts, d)?;
    let result = ResampleResult {
        dataset,
        provenance,
        counts: (n_pao, if keep_majority { x_maj.nrows() } else { n_pau }),
        details: Some(PaDetails {
            anchors,
            minority,
            majority,
        }),
    };
    Ok((result, traces))
}

/// SMOTE: interpolate between a random minority row and one of its
/// `k_neighbors` nearest minority neighbours until the classes are balanced.
pub fn smote_resample(
    x_maj: ArrayView2<f64>,
    x_min: ArrayView2<f64>,
    k_neighbors: usize,
    seed: u64,
) -> Result<ResampleResult> {
    check_classes(x_maj, x_min)?;
    let n_min = x_min.nrows();
    let needed = x_maj.nrows() - n_min;
    let d = x_min.ncols();
    let mut synthetic = Array2::zeros((needed, d));
    if needed > 0 {
        if n_min < 2 {
            return Err(Error::TooFewMinority(n_min));
        }
        if k_neighbors == 0 {
            return Err(Error::InvalidParameter("SMOTE needs k_neighbors >= 1".into()));
        }
        let k = k_neighbors.min(n_min - 1);
        let tree = KdTree::new(x_min);
        let neighbors: Vec<Vec<usize>> = (0..n_min)
            .map(|i| tree.knn(x_min.row(i), k, Some(i)).into_iter().map(|n| n.index).collect())
            .collect();
        let mut rng = stage_rng(seed, "smote");
        for mut row in synthetic.rows_mut() {
            let base = rng.random_range(0..n_min);
            let nn = neighbors[base][rng.random_range(0..k)];
            let t: f64 = rng.random();
            let x = x_min.row(base);
            let y = x_min.row(nn);
            row.assign(&(&x + &((&y - &x) * t)));
        }
    }
    let (dataset, provenance) = balanced_dataset(
        &[
            (x_min, ClassTag::Minority, Provenance::OriginalMinority),
            (synthetic.view(), ClassTag::Minority, Provenance::SyntheticMinority),
            (x_maj, ClassTag::Majority, Provenance::OriginalMajority),
        ],
        d,
    )?;
    Ok(ResampleResult {
        dataset,
        provenance,
        counts: (needed, x_maj.nrows()),
        details: None,
    })
}

/// Duplicates uniformly drawn minority rows until the classes are balanced.
pub fn random_oversample(
    x_maj: ArrayView2<f64>,
    x_min: ArrayView2<f64>,
    seed: u64,
) -> Result<ResampleResult> {
    check_classes(x_maj, x_min)?;
    let needed = x_maj.nrows() - x_min.nrows();
    let mut rng = stage_rng(seed, "oversample");
    let idx: Vec<usize> = (0..needed).map(|_| rng.random_range(0..x_min.nrows())).collect();
    let copies = x_min.select(Axis(0), &idx);
    let (dataset, provenance) = balanced_dataset(
        &[
            (x_min, ClassTag::Minority, Provenance::OriginalMinority),
            (copies.view(), ClassTag::Minority, Provenance::SyntheticMinority),
            (x_maj, ClassTag::Majority, Provenance::OriginalMajority),
        ],
        x_min.ncols(),
    )?;
    Ok(ResampleResult {
        dataset,
        provenance,
        counts: (needed, x_maj.nrows()),
        details: None,
    })
}

/// Keeps a uniform random subset of `n_min` majority rows, in original order.
pub fn random_undersample(
    x_maj: ArrayView2<f64>,
    x_min: ArrayView2<f64>,
    seed: u64,
) -> Result<ResampleResult> {
    check_classes(x_maj, x_min)?;
    let mut rng = stage_rng(seed, "undersample");
    let mut keep = sample(&mut rng, x_maj.nrows(), x_min.nrows()).into_vec();
    keep.sort_unstable();
    let kept = x_maj.select(Axis(0), &keep);
    let (dataset, provenance) = balanced_dataset(
        &[
            (x_min, ClassTag::Minority, Provenance::OriginalMinority),
            (kept.view(), ClassTag::Majority, Provenance::OriginalMajority),
        ],
        x_min.ncols(),
    )?;
    Ok(ResampleResult {
        dataset,
        provenance,
        counts: (0, kept.nrows()),
        details: None,
    })
}

/// A resampling strategy applied to whole datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    /// No resampling.
    None,
    Pa(PaConfig),
    Smote { k_neighbors: usize },
    /// Random oversampling.
    Ros,
    /// Random undersampling.
    Rus,
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Method::None => "none".into(),
            Method::Pa(cfg) if cfg.ratio == 1.0 => "pao".into(),
            Method::Pa(cfg) if cfg.ratio == 0.0 => "pau".into(),
            Method::Pa(_) => "pa".into(),
            Method::Smote { .. } => "smote".into(),
            Method::Ros => "ros".into(),
            Method::Rus => "rus".into(),
        }
    }

    /// Resamples `d` with all randomness drawn from `seed`. Feature and
    /// class names are carried over from `d`.
    pub fn resample(&self, d: &Dataset, seed: u64) -> Result<ResampleResult> {
        let mut result = match self {
            Method::None => {
                let provenance = d
                    .labels
                    .iter()
                    .map(|l| match l {
                        ClassTag::Minority => Provenance::OriginalMinority,
                        ClassTag::Majority => Provenance::OriginalMajority,
                    })
                    .collect();
                ResampleResult {
                    dataset: d.clone(),
                    provenance,
                    counts: (0, d.n_maj()),
                    details: None,
                }
            }
            _ => {
                let (x_maj, x_min) = partition(d)?;
                let (maj, min) = (x_maj.view(), x_min.view());
                match self {
                    Method::Pa(cfg) => pa_resample(maj, min, &PaConfig { seed, ..*cfg })?,
                    Method::Smote { k_neighbors } => smote_resample(maj, min, *k_neighbors, seed)?,
                    Method::Ros => random_oversample(maj, min, seed)?,
                    Method::Rus => random_undersample(maj, min, seed)?,
                    Method::None => unreachable!(),
                }
            }
        };
        result.dataset.feature_names = d.feature_names.clone();
        result.dataset.class_names = d.class_names.clone();
        result.dataset.category_maps = d.category_maps.clone();
        Ok(result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{imbalanced_blobs, BlobSpec};
    use ndarray::{array, s};
    use proptest::prelude::*;

    fn fixture(n_maj: usize, n_min: usize, seed: u64) -> (Array2<f64>, Array2<f64>) {
        let d = imbalanced_blobs(&BlobSpec {
            n_maj,
            n_min,
            dims: 2,
            separation: 1.5,
            seed,
        });
        let (maj, min) = partition(&d).unwrap();
        (maj, min)
    }

    fn fast(ratio: f64, seed: u64) -> PaConfig {
        PaConfig {
            ratio,
            iterations: 20,
            seed,
            ..PaConfig::default()
        }
    }

    #[test]
    fn counts_examples() {
        assert_eq!(pa_counts(0.1, 100, 20).unwrap(), (8, 28));
        assert_eq!(pa_counts(1.0, 100, 20).unwrap(), (80, 100));
        assert_eq!(pa_counts(0.0, 100, 20).unwrap(), (0, 20));
        assert_eq!(pa_counts(1.5, 100, 20), Err(Error::InvalidRatio(1.5)));
        assert_eq!(pa_counts(-0.1, 100, 20), Err(Error::InvalidRatio(-0.1)));
    }

    #[test]
    fn counts_round_half_to_even() {
        // 0.5 * 5 = 2.5 -> 2, 0.5 * 7 = 3.5 -> 4
        assert_eq!(pa_counts(0.5, 10, 5).unwrap(), (2, 7));
        assert_eq!(pa_counts(0.5, 12, 5).unwrap(), (4, 9));
    }

    #[test]
    fn init_empty_and_zero_jitter() {
        let x = array![[1.0, 2.0], [3.0, 4.0]];
        let p = init_prototypes(x.view(), 0, 1e-3, 0, ClassTag::Minority).unwrap();
        assert!(p.is_empty());
        let p = init_prototypes(x.view(), 5, 0.0, 0, ClassTag::Minority).unwrap();
        assert_eq!(&p.current, p.start());
        let empty = Array2::<f64>::zeros((0, 2));
        assert_eq!(
            init_prototypes(empty.view(), 3, 0.0, 0, ClassTag::Minority),
            Err(Error::EmptySource { requested: 3 })
        );
    }

    #[test]
    fn init_samples_uniformly() {
        let x = Array2::from_shape_fn((10, 1), |(i, _)| i as f64);
        for seed in 0..5 {
            let p = init_prototypes(x.view(), 1000, 0.0, seed, ClassTag::Minority).unwrap();
            let mut freq = [0usize; 10];
            for v in p.start().iter() {
                freq[*v as usize] += 1;
            }
            for f in freq {
                let share = f as f64 / 1000.0;
                assert!((share - 0.1).abs() <= 0.03, "{share}");
            }
        }
    }

    #[test]
    fn pa_output_composition() {
        let (maj, min) = fixture(80, 20, 1);
        let r = pa_resample(maj.view(), min.view(), &fast(0.1, 3)).unwrap();
        // gap 60: 6 synthetic minority, 26 majority prototypes
        assert_eq!(r.dataset.n_rows(), 52);
        assert_eq!(r.counts, (6, 26));
        let count = |p: Provenance| r.provenance.iter().filter(|&&q| q == p).count();
        assert_eq!(count(Provenance::OriginalMinority), 20);
        assert_eq!(count(Provenance::SyntheticMinority), 6);
        assert_eq!(count(Provenance::MajorityPrototype), 26);
        assert_eq!(r.dataset.features.slice(s![0..20, ..]), min);

        let (maj, min) = fixture(100, 20, 1);
        let r = pa_resample(maj.view(), min.view(), &fast(0.1, 3)).unwrap();
        assert_eq!(r.dataset.n_rows(), 56);
        assert_eq!(r.counts, (8, 28));
    }

    #[test]
    fn pa_full_ratio_replaces_majority() {
        let (maj, min) = fixture(40, 10, 2);
        let r = pa_resample(maj.view(), min.view(), &fast(1.0, 3)).unwrap();
        assert_eq!(r.counts, (30, 40));
        assert_eq!(r.dataset.n_min(), 40);
        assert_eq!(r.dataset.n_maj(), 40);
        assert!(r.provenance.contains(&Provenance::MajorityPrototype));

        let keep = PaConfig {
            keep_majority_at_full_ratio: true,
            ..fast(1.0, 3)
        };
        let r = pa_resample(maj.view(), min.view(), &keep).unwrap();
        assert_eq!(r.dataset.features.slice(s![40.., ..]), maj);
        assert!(r.details.unwrap().majority.is_none());
    }

    #[test]
    fn pa_already_balanced_replaces_majority() {
        let (maj, min) = fixture(15, 15, 4);
        let r = pa_resample(maj.view(), min.view(), &fast(0.1, 3)).unwrap();
        assert_eq!(r.counts, (0, 15));
        assert_eq!(r.dataset.n_maj(), 15);
        assert_eq!(r.dataset.n_min(), 15);
    }

    #[test]
    fn pa_degenerates_to_random_oversampling_without_regularizer() {
        let (maj, min) = fixture(30, 10, 5);
        let cfg = PaConfig {
            ratio: 1.0,
            lambda: 0.0,
            jitter: 0.0,
            iterations: 0,
            seed: 8,
            ..PaConfig::default()
        };
        let r = pa_resample(maj.view(), min.view(), &cfg).unwrap();
        for (row, prov) in r.dataset.features.rows().into_iter().zip(&r.provenance) {
            if *prov == Provenance::SyntheticMinority {
                assert!(min.rows().into_iter().any(|m| m == row));
            }
        }
    }

    #[test]
    fn traced_run_matches_plain_run() {
        let (maj, min) = fixture(40, 10, 12);
        let cfg = fast(0.5, 4);
        let plain = pa_resample(maj.view(), min.view(), &cfg).unwrap();
        let (traced, traces) = pa_resample_traced(maj.view(), min.view(), &cfg).unwrap();
        assert_eq!(plain, traced);
        assert_eq!(traces.minority.len(), 21);
        assert_eq!(traces.majority.len(), 21);
    }

    #[test]
    fn pa_is_deterministic() {
        let (maj, min) = fixture(50, 12, 6);
        let a = pa_resample(maj.view(), min.view(), &fast(0.3, 77)).unwrap();
        let b = pa_resample(maj.view(), min.view(), &fast(0.3, 77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pa_regularizer_spreads_prototypes() {
        let (maj, min) = fixture(60, 15, 7);
        let run = |lambda: f64| {
            let cfg = PaConfig {
                ratio: 1.0,
                lambda,
                seed: 5,
                ..PaConfig::default()
            };
            let r = pa_resample(maj.view(), min.view(), &cfg).unwrap();
            r.details.unwrap().minority.mean_displacement()
        };
        assert!(run(10.0) > run(0.0));
    }

    #[test]
    fn smote_midpoint() {
        let maj = array![[5.0, 5.0], [6.0, 6.0], [7.0, 7.0]];
        let min = array![[0.0, 0.0], [1.0, 1.0]];
        let r = smote_resample(maj.view(), min.view(), 5, 1).unwrap();
        for row in r.dataset.features.slice(s![2..3, ..]).rows() {
            assert!((row[0] - row[1]).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&row[0]));
        }
    }

    #[test]
    fn smote_needs_two_minority_rows() {
        let maj = array![[5.0], [6.0]];
        let min = array![[0.0]];
        assert_eq!(
            smote_resample(maj.view(), min.view(), 5, 1),
            Err(Error::TooFewMinority(1))
        );
    }

    #[test]
    fn balanced_input_is_unchanged_by_baselines() {
        let maj = array![[5.0], [6.0]];
        let min = array![[0.0], [1.0]];
        for r in [
            smote_resample(maj.view(), min.view(), 5, 1).unwrap(),
            random_oversample(maj.view(), min.view(), 1).unwrap(),
            random_undersample(maj.view(), min.view(), 1).unwrap(),
        ] {
            assert_eq!(r.dataset.features, array![[0.0], [1.0], [5.0], [6.0]]);
        }
    }

    #[test]
    fn random_baselines_80_20() {
        let (maj, min) = fixture(80, 20, 9);
        let over = random_oversample(maj.view(), min.view(), 3).unwrap();
        assert_eq!((over.dataset.n_min(), over.dataset.n_maj()), (80, 80));
        for (row, p) in over.dataset.features.rows().into_iter().zip(&over.provenance) {
            if *p == Provenance::SyntheticMinority {
                assert!(min.rows().into_iter().any(|m| m == row));
            }
        }
        let under = random_undersample(maj.view(), min.view(), 3).unwrap();
        assert_eq!((under.dataset.n_min(), under.dataset.n_maj()), (20, 20));
        for row in under.dataset.features.slice(s![20.., ..]).rows() {
            assert!(maj.rows().into_iter().any(|m| m == row));
        }
    }

    /// Is `p` on the segment between some pair of minority rows?
    fn on_some_segment(p: ndarray::ArrayView1<f64>, min: &Array2<f64>) -> bool {
        for a in min.rows() {
            for b in min.rows() {
                let ab = &b - &a;
                let ap = &p - &a;
                let len2 = ab.dot(&ab);
                let t = if len2 == 0.0 { 0.0 } else { ap.dot(&ab) / len2 };
                if !(-1e-9..=1.0 + 1e-9).contains(&t) {
                    continue;
                }
                let closest = &a + &(&ab * t);
                let dist: f64 = (&p - &closest).mapv(|v| v * v).sum().sqrt();
                if dist <= 1e-9 {
                    return true;
                }
            }
        }
        false
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn smote_points_lie_on_minority_segments(seed in any::<u64>(), n_min in 2usize..12) {
            let (maj, min) = fixture(30, n_min, seed);
            let r = smote_resample(maj.view(), min.view(), 5, seed).unwrap();
            prop_assert_eq!(r.dataset.n_min(), r.dataset.n_maj());
            for (row, p) in r.dataset.features.rows().into_iter().zip(&r.provenance) {
                if *p == Provenance::SyntheticMinority {
                    prop_assert!(on_some_segment(row, &min));
                }
            }
        }

        #[test]
        fn pa_is_balanced_and_keeps_minority(seed in any::<u64>(), tenths in 0usize..=10, n_min in 2usize..15, extra in 1usize..30) {
            let (maj, min) = fixture(n_min + extra, n_min, seed);
            let cfg = PaConfig { iterations: 5, ..fast(tenths as f64 / 10.0, seed) };
            let r = pa_resample(maj.view(), min.view(), &cfg).unwrap();
            prop_assert_eq!(r.dataset.n_min(), r.dataset.n_maj());
            prop_assert_eq!(r.dataset.features.slice(s![0..n_min, ..]), min.view());
        }
    }
}
