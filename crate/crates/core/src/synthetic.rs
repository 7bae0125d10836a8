//! Seeded synthetic imbalanced datasets for tests and experiments.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{ClassTag, Dataset};

/// Two Gaussian classes: majority `N(0, I)`, minority centred at
/// `separation` along the first axis with standard deviation 0.6.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobSpec {
    pub n_maj: usize,
    pub n_min: usize,
    pub dims: usize,
    pub separation: f64,
    pub seed: u64,
}

pub const MINORITY_SPREAD: f64 = 0.6;

/// Majority rows first, then minority rows.
pub fn imbalanced_blobs(spec: &BlobSpec) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_maj + spec.n_min;
    let mut features = Array2::zeros((n, spec.dims));
    for (i, mut row) in features.rows_mut().into_iter().enumerate() {
        let minority = i >= spec.n_maj;
        for (j, v) in row.iter_mut().enumerate() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v = if minority {
                z * MINORITY_SPREAD + if j == 0 { spec.separation } else { 0.0 }
            } else {
                z
            };
        }
    }
    let labels = (0..n)
        .map(|i| if i >= spec.n_maj { ClassTag::Minority } else { ClassTag::Majority })
        .collect();
    let names = (0..spec.dims).map(|j| format!("x{j}")).collect();
    let mut d = Dataset::new(features, labels, names).expect("consistent shapes");
    d.class_names = ["positive".into(), "negative".into()];
    d
}

/// The suite of moderately overlapping datasets used by the ratio and noise
/// experiments: sizes, imbalance and dimensionality vary with `index`.
pub fn experiment_suite(index: usize, seed: u64) -> Dataset {
    const SHAPES: [(usize, usize, usize, f64); 10] = [
        (150, 30, 2, 1.5),
        (200, 25, 2, 1.8),
        (180, 40, 3, 1.5),
        (240, 30, 3, 2.0),
        (160, 20, 4, 1.8),
        (200, 50, 2, 1.2),
        (220, 35, 5, 2.0),
        (150, 25, 3, 1.6),
        (260, 40, 2, 1.6),
        (190, 30, 4, 1.7),
    ];
    let (n_maj, n_min, dims, separation) = SHAPES[index % SHAPES.len()];
    imbalanced_blobs(&BlobSpec {
        n_maj,
        n_min,
        dims,
        separation,
        seed: seed.wrapping_mul(1_000_003).wrapping_add(index as u64),
    })
}
