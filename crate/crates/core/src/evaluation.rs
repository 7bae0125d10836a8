//! KNN classifier, imbalance metrics, 5x2 cross-validation and the ratio and
//! label-noise sweeps.

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexity::inject_label_noise;
use crate::data::{fit_standardizer, ClassTag, Dataset};
use crate::error::{Error, Result};
use crate::neighbors::{brute_force_knn, KdTree};
use crate::resampler::{Method, PaConfig};
use crate::seeding::{indexed_seed, stage_rng};

pub const REPETITIONS: usize = 5;
pub const DEFAULT_KNN_K: usize = 3;

/// Ratio grid `{0.0, 0.1, ..., 1.0}`.
pub fn default_ratio_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

/// Noise grid `{0.0, 0.04, ..., 0.2}`.
pub fn default_noise_grid() -> Vec<f64> {
    (0..=5).map(|i| i as f64 * 0.04).collect()
}

/// Fitted k-nearest-neighbours model. Scores are the share of minority rows
/// among the `k` nearest training rows.
#[derive(Debug, Clone)]
pub struct KnnModel {
    features: Array2<f64>,
    labels: Vec<ClassTag>,
    k: usize,
}

pub fn knn_fit(train: &Dataset, k: usize) -> Result<KnnModel> {
    if train.n_rows() == 0 {
        return Err(Error::EmptyTrainSet);
    }
    if k == 0 || k > train.n_rows() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must lie in [1, {}]",
            train.n_rows()
        )));
    }
    Ok(KnnModel {
        features: train.features.clone(),
        labels: train.labels.clone(),
        k,
    })
}

impl KnnModel {
    fn share(&self, hits: &[crate::neighbors::Neighbor]) -> f64 {
        hits.iter().filter(|n| self.labels[n.index].is_minority()).count() as f64 / self.k as f64
    }

    pub fn score(&self, x: ArrayView1<f64>) -> f64 {
        self.share(&brute_force_knn(self.features.view(), x, self.k, None))
    }

    /// Scores for every row of `queries`, sharing one k-d tree.
    pub fn score_batch(&self, queries: ArrayView2<f64>) -> Vec<f64> {
        let tree = KdTree::new(self.features.view());
        queries
            .rows()
            .into_iter()
            .map(|q| self.share(&tree.knn(q, self.k, None)))
            .collect()
    }

    /// Minority iff the score is strictly above one half.
    pub fn predict(&self, x: ArrayView1<f64>) -> ClassTag {
        predicted(self.score(x))
    }
}

fn predicted(score: f64) -> ClassTag {
    if score > 0.5 {
        ClassTag::Minority
    } else {
        ClassTag::Majority
    }
}

/// Precision, recall, G-mean and AUC with the minority class as positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub gmean: f64,
    pub auc: f64,
}

impl Metrics {
    fn mean(items: &[Metrics]) -> Metrics {
        let n = items.len() as f64;
        let sum = |f: fn(&Metrics) -> f64| items.iter().map(f).sum::<f64>() / n;
        Metrics {
            precision: sum(|m| m.precision),
            recall: sum(|m| m.recall),
            gmean: sum(|m| m.gmean),
            auc: sum(|m| m.auc),
        }
    }
}

/// Mann-Whitney AUC: share of (minority, majority) pairs ranked correctly,
/// ties counting one half.
pub fn auc(labels: &[ClassTag], scores: &[f64]) -> Result<f64> {
    if labels.len() != scores.len() {
        return Err(Error::LengthMismatch {
            labels: labels.len(),
            scores: scores.len(),
        });
    }
    let n_pos = labels.iter().filter(|l| l.is_minority()).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClassTestFold);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // average ranks over tied groups
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            if labels[idx].is_minority() {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos * n_neg) as f64)
}

pub fn metrics(labels: &[ClassTag], scores: &[f64]) -> Result<Metrics> {
    let auc = auc(labels, scores)?;
    let (mut tp, mut fp, mut tn, mut fneg) = (0usize, 0usize, 0usize, 0usize);
    for (l, s) in labels.iter().zip(scores) {
        match (l.is_minority(), predicted(*s).is_minority()) {
            (true, true) => tp += 1,
            (true, false) => fneg += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
        }
    }
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = tp as f64 / (tp + fneg) as f64;
    let tnr = tn as f64 / (tn + fp) as f64;
    Ok(Metrics {
        precision,
        recall,
        gmean: (recall * tnr).sqrt(),
        auc,
    })
}

/// One train/test split of a 5x2 cross-validation. `repetition` is 1..=5 and
/// `half` 1..=2; `half` names the half used for training.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSpec {
    pub repetition: usize,
    pub half: usize,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Ten stratified folds: five seeded shuffles, each split in two halves
/// that swap roles.
pub fn five_by_two_folds(d: &Dataset, seed: u64) -> Result<Vec<FoldSpec>> {
    let n_min = d.n_min();
    if n_min < 2 {
        return Err(Error::TooFewMinority(n_min));
    }
    if d.n_maj() < 2 {
        return Err(Error::InvalidDataset("need at least 2 majority rows for 5x2 CV".into()));
    }
    let mut folds = Vec::with_capacity(2 * REPETITIONS);
    for rep in 0..REPETITIONS {
        let mut rng = stage_rng(indexed_seed(seed, "folds", rep as u64), "shuffle");
        let mut halves = [Vec::new(), Vec::new()];
        for tag in [ClassTag::Minority, ClassTag::Majority] {
            let mut idx: Vec<usize> = (0..d.n_rows()).filter(|&i| d.labels[i] == tag).collect();
            idx.shuffle(&mut rng);
            let cut = idx.len() / 2;
            halves[0].extend_from_slice(&idx[..cut]);
            halves[1].extend_from_slice(&idx[cut..]);
        }
        for h in halves.iter_mut() {
            h.sort_unstable();
        }
        for half in 0..2 {
            folds.push(FoldSpec {
                repetition: rep + 1,
                half: half + 1,
                train_indices: halves[half].clone(),
                test_indices: halves[1 - half].clone(),
            });
        }
    }
    Ok(folds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "classifier", rename_all = "lowercase")]
pub enum Classifier {
    Knn { k: usize },
}

impl Default for Classifier {
    fn default() -> Self {
        Classifier::Knn { k: DEFAULT_KNN_K }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub classifier: Classifier,
    /// Fit the standardizer on the whole dataset instead of each training
    /// fold.
    pub global_standardize: bool,
    /// Skip standardization entirely.
    pub standardize: bool,
    /// Probability of flipping each training-fold majority label.
    pub noise_level: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            classifier: Classifier::default(),
            global_standardize: false,
            standardize: true,
            noise_level: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub repetition: usize,
    pub half: usize,
    #[serde(flatten)]
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedFold {
    pub repetition: usize,
    pub half: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub method: Method,
    pub method_name: String,
    pub options: EvalOptions,
    pub seed: u64,
    pub per_fold: Vec<FoldResult>,
    pub skipped: Vec<SkippedFold>,
    pub means: Metrics,
}

impl EvaluationReport {
    pub const CSV_HEADER: &'static str = "method,precision,recall,auc,gmean,folds,skipped";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.method_name,
            self.means.precision,
            self.means.recall,
            self.means.auc,
            self.means.gmean,
            self.per_fold.len(),
            self.skipped.len()
        )
    }
}

/// Called with each fold and the training data handed to the resampler.
pub type ResamplerObserver<'a> = dyn Fn(&FoldSpec, &Dataset) + Sync + 'a;

pub fn cross_validate(d: &Dataset, method: &Method, options: &EvalOptions, seed: u64) -> Result<EvaluationReport> {
    cross_validate_observed(d, method, options, seed, None)
}

/// Per fold: standardize (fit on train), inject training-label noise,
/// resample the training half, fit the classifier and score the test half.
pub fn cross_validate_observed(
    d: &Dataset,
    method: &Method,
    options: &EvalOptions,
    seed: u64,
    observer: Option<&ResamplerObserver<'_>>,
) -> Result<EvaluationReport> {
    if !(0.0..=1.0).contains(&options.noise_level) {
        return Err(Error::InvalidParameter(format!(
            "noise level must lie in [0, 1], got {}",
            options.noise_level
        )));
    }
    let folds = five_by_two_folds(d, seed)?;
    let global = if options.standardize && options.global_standardize {
        Some(fit_standardizer(d.features.view()).transform_dataset(d))
    } else {
        None
    };
    let source = global.as_ref().unwrap_or(d);

    let outcomes: Vec<Result<Metrics>> = folds
        .par_iter()
        .enumerate()
        .map(|(fold_index, fold)| {
            let mut train = source.subset(&fold.train_indices);
            let mut test = source.subset(&fold.test_indices);
            if options.standardize && !options.global_standardize {
                let params = fit_standardizer(train.features.view());
                train = params.transform_dataset(&train);
                test = params.transform_dataset(&test);
            }
            if options.noise_level > 0.0 {
                train = inject_label_noise(
                    &train,
                    options.noise_level,
                    indexed_seed(seed, "noise", fold_index as u64),
                )?;
            }
            if let Some(obs) = observer {
                obs(fold, &train);
            }
            let resampled = method.resample(&train, indexed_seed(seed, "resample", fold_index as u64))?;
            let Classifier::Knn { k } = options.classifier;
            let model = knn_fit(&resampled.dataset, k)?;
            let scores = model.score_batch(test.features.view());
            metrics(&test.labels, &scores)
        })
        .collect();

    let mut per_fold = Vec::new();
    let mut skipped = Vec::new();
    for (fold, outcome) in folds.iter().zip(outcomes) {
        match outcome {
            Ok(metrics) => per_fold.push(FoldResult {
                repetition: fold.repetition,
                half: fold.half,
                metrics,
            }),
            Err(e) => {
                log::warn!("fold {}/{} skipped: {e}", fold.repetition, fold.half);
                skipped.push(SkippedFold {
                    repetition: fold.repetition,
                    half: fold.half,
                    reason: e.to_string(),
                })
            }
        }
    }
    if per_fold.is_empty() {
        return Err(Error::InvalidDataset(format!(
            "every fold failed; first error: {}",
            skipped.first().map(|s| s.reason.as_str()).unwrap_or("none")
        )));
    }
    let means = Metrics::mean(&per_fold.iter().map(|f| f.metrics).collect::<Vec<_>>());
    Ok(EvaluationReport {
        method: method.clone(),
        method_name: method.name(),
        options: *options,
        seed,
        per_fold,
        skipped,
        means,
    })
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    pub report: EvaluationReport,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "parameter,value,method,precision,recall,auc,gmean,folds,skipped";

    pub fn csv_row(&self) -> String {
        format!("{},{},{}", self.parameter, self.value, self.report.csv_row())
    }
}

/// Cross-validates PA at every ratio, sharing the folds.
pub fn ratio_sweep(
    d: &Dataset,
    ratios: &[f64],
    cfg: &PaConfig,
    options: &EvalOptions,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    for &r in ratios {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidRatio(r));
        }
    }
    ratios
        .par_iter()
        .map(|&ratio| {
            let method = Method::Pa(PaConfig { ratio, ..*cfg });
            Ok(SweepRow {
                parameter: "ratio".into(),
                value: ratio,
                report: cross_validate(d, &method, options, seed)?,
            })
        })
        .collect()
}

/// Cross-validates `method` at every training-label noise level.
pub fn noise_sweep(
    d: &Dataset,
    levels: &[f64],
    method: &Method,
    options: &EvalOptions,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    levels
        .par_iter()
        .map(|&level| {
            let opts = EvalOptions {
                noise_level: level,
                ..*options
            };
            Ok(SweepRow {
                parameter: "noise".into(),
                value: level,
                report: cross_validate(d, method, &opts, seed)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{imbalanced_blobs, BlobSpec};
    use ndarray::array;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Mutex;

    use ClassTag::{Majority as J, Minority as N};

    fn dataset(x: Array2<f64>, labels: Vec<ClassTag>) -> Dataset {
        let names = (0..x.ncols()).map(|j| format!("x{j}")).collect();
        Dataset::new(x, labels, names).unwrap()
    }

    #[test]
    fn knn_self_query() {
        let d = dataset(array![[0.0], [1.0], [5.0]], vec![N, J, J]);
        let m = knn_fit(&d, 1).unwrap();
        assert_eq!(m.score(array![0.0].view()), 1.0);
        assert_eq!(m.score(array![5.0].view()), 0.0);
    }

    #[test]
    fn knn_one_of_three() {
        let d = dataset(array![[0.0], [1.0], [2.0], [10.0]], vec![N, J, J, N]);
        let m = knn_fit(&d, 3).unwrap();
        let s = m.score(array![0.5].view());
        assert!((s - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.predict(array![0.5].view()), J);
    }

    #[test]
    fn knn_tie_goes_to_majority() {
        let d = dataset(array![[0.0], [1.0]], vec![N, J]);
        let m = knn_fit(&d, 2).unwrap();
        assert_eq!(m.score(array![0.2].view()), 0.5);
        assert_eq!(m.predict(array![0.2].view()), J);
    }

    #[test]
    fn knn_empty_train() {
        let d = dataset(Array2::zeros((0, 2)), vec![]);
        assert!(matches!(knn_fit(&d, 3), Err(Error::EmptyTrainSet)));
    }

    #[test]
    fn knn_batch_matches_exhaustive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Array2::from_shape_fn((200, 3), |_| rng.random_range(-1.0..1.0));
        let labels: Vec<ClassTag> = (0..200).map(|_| if rng.random_bool(0.3) { N } else { J }).collect();
        let d = dataset(x, labels.clone());
        let m = knn_fit(&d, 3).unwrap();
        let q = Array2::from_shape_fn((50, 3), |_| rng.random_range(-1.0..1.0));
        let batch = m.score_batch(q.view());
        for (row, s) in q.rows().into_iter().zip(&batch) {
            let mut all: Vec<(f64, usize)> = d
                .features
                .rows()
                .into_iter()
                .enumerate()
                .map(|(i, r)| {
                    let diff = &r - &row;
                    (diff.dot(&diff), i)
                })
                .collect();
            all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let want = all[..3].iter().filter(|(_, i)| labels[*i] == N).count() as f64 / 3.0;
            assert_eq!(*s, want);
        }
    }

    #[test]
    fn perfect_classifier() {
        let m = metrics(&[N, N, J, J], &[1.0, 0.9, 0.1, 0.0]).unwrap();
        assert_eq!(m, Metrics { precision: 1.0, recall: 1.0, gmean: 1.0, auc: 1.0 });
    }

    #[test]
    fn gmean_of_rates() {
        // 5 minority: 4 caught; 10 majority: 5 rejected
        let mut labels = vec![N; 5];
        labels.extend(vec![J; 10]);
        let mut scores = vec![1.0, 1.0, 1.0, 1.0, 0.0];
        scores.extend(vec![1.0; 5]);
        scores.extend(vec![0.0; 5]);
        let m = metrics(&labels, &scores).unwrap();
        assert!((m.recall - 0.8).abs() < 1e-15);
        assert!((m.gmean - 0.4f64.sqrt()).abs() < 1e-12);
        assert!((m.gmean - 0.6325).abs() < 1e-4);
    }

    #[test]
    fn no_positive_predictions_gives_zero_precision() {
        let m = metrics(&[N, J], &[0.0, 0.0]).unwrap();
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.auc, 0.5);
    }

    #[test]
    fn single_class_fold_is_error() {
        assert_eq!(metrics(&[J, J], &[0.0, 1.0]), Err(Error::SingleClassTestFold));
    }

    #[test]
    fn separable_ranking_auc() {
        assert_eq!(auc(&[J, N, J, N], &[0.1, 0.8, 0.3, 0.5]).unwrap(), 1.0);
        assert_eq!(auc(&[J, N], &[0.9, 0.1]).unwrap(), 0.0);
    }

    fn blobs(sep: f64, seed: u64) -> Dataset {
        imbalanced_blobs(&BlobSpec { n_maj: 80, n_min: 20, dims: 2, separation: sep, seed })
    }

    #[test]
    fn folds_partition_and_stratify() {
        let d = blobs(1.0, 1);
        let folds = five_by_two_folds(&d, 9).unwrap();
        assert_eq!(folds.len(), 10);
        for pair in folds.chunks(2) {
            assert_eq!(pair[0].train_indices, pair[1].test_indices);
            let mut all: Vec<usize> = pair[0].train_indices.iter().chain(&pair[0].test_indices).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..100).collect::<Vec<_>>());
            for f in pair {
                assert!(f.train_indices.iter().any(|&i| d.labels[i] == N));
            }
        }
    }

    #[test]
    fn identity_knn_on_separable_data() {
        let d = blobs(8.0, 2);
        let r = cross_validate(&d, &Method::None, &EvalOptions::default(), 4).unwrap();
        assert!(r.means.gmean > 0.95, "{:?}", r.means);
        assert_eq!(r.per_fold.len(), 10);
    }

    #[test]
    fn cross_validation_is_deterministic() {
        let d = blobs(1.5, 3);
        let method = Method::Pa(PaConfig { iterations: 20, ..PaConfig::default() });
        let a = cross_validate(&d, &method, &EvalOptions::default(), 11).unwrap();
        let b = cross_validate(&d, &method, &EvalOptions::default(), 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn resampler_sees_training_rows_only() {
        let d = blobs(1.5, 4);
        let seen = Mutex::new(Vec::new());
        let observer = |fold: &FoldSpec, train: &Dataset| {
            seen.lock().unwrap().push((fold.clone(), train.n_rows()));
        };
        cross_validate_observed(&d, &Method::Ros, &EvalOptions::default(), 5, Some(&observer)).unwrap();
        let seen = seen.into_inner().unwrap();
        assert_eq!(seen.len(), 10);
        for (fold, rows) in seen {
            assert_eq!(rows, fold.train_indices.len());
            assert!(fold.train_indices.iter().all(|i| !fold.test_indices.contains(i)));
        }
    }

    #[test]
    fn zero_noise_equals_plain_cross_validation() {
        let d = blobs(1.5, 5);
        let method = Method::Smote { k_neighbors: 5 };
        let plain = cross_validate(&d, &method, &EvalOptions::default(), 6).unwrap();
        let rows = noise_sweep(&d, &[0.0], &method, &EvalOptions::default(), 6).unwrap();
        assert_eq!(rows[0].report.per_fold, plain.per_fold);
        assert_eq!(rows[0].report.means, plain.means);
    }

    #[test]
    fn sweep_sizes() {
        assert_eq!(default_ratio_grid().len(), 11);
        assert_eq!(default_noise_grid().len(), 6);
        assert!((default_noise_grid()[5] - 0.2).abs() < 1e-12);
        let d = blobs(1.5, 6);
        let cfg = PaConfig { iterations: 5, ..PaConfig::default() };
        let rows = ratio_sweep(&d, &[0.0, 1.0], &cfg, &EvalOptions::default(), 1).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].report.method_name, "pau");
        assert_eq!(rows[1].report.method_name, "pao");
    }

    proptest! {
        #[test]
        fn metric_ranges(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(2..60);
            let mut labels: Vec<ClassTag> = (0..n).map(|_| if rng.random_bool(0.4) { N } else { J }).collect();
            labels[0] = N;
            labels[1] = J;
            let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..4) as f64 / 3.0).collect();
            let m = metrics(&labels, &scores).unwrap();
            for v in [m.precision, m.recall, m.gmean, m.auc] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            let tp = labels.iter().zip(&scores).filter(|(l, s)| l.is_minority() && **s > 0.5).count() as f64;
            let tn = labels.iter().zip(&scores).filter(|(l, s)| !l.is_minority() && **s <= 0.5).count() as f64;
            let npos = labels.iter().filter(|l| l.is_minority()).count() as f64;
            let tpr = tp / npos;
            let tnr = tn / (n as f64 - npos);
            prop_assert!((m.gmean * m.gmean - tpr * tnr).abs() < 1e-12);

            let transformed: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
            prop_assert_eq!(auc(&labels, &scores).unwrap(), auc(&labels, &transformed).unwrap());
        }
    }
}
