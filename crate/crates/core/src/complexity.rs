//! Data difficulty index, minority neighbourhood categories and label noise.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{ClassTag, Dataset};
use crate::error::{Error, Result};
use crate::neighbors::{brute_force_knn, KdTree, Neighbor};
use crate::seeding::stage_rng;

pub const DEFAULT_NEIGHBORS: usize = 5;
const CATEGORY_NEIGHBORS: usize = 5;

/// Neighbourhood type of a minority observation, by how many of its five
/// nearest neighbours are also minority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Safe,
    Borderline,
    Rare,
    Outlier,
}

impl Category {
    pub fn from_same_class(count: usize) -> Self {
        match count {
            0 => Category::Outlier,
            1 => Category::Rare,
            2 | 3 => Category::Borderline,
            _ => Category::Safe,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeighborSearch {
    #[default]
    KdTree,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifficultyReport {
    pub di: f64,
    pub m: usize,
    /// Share of majority rows among each minority row's `m` neighbours.
    pub per_point_fractions: Vec<f64>,
    /// Empty when the dataset has fewer than six rows.
    pub categories: Vec<Category>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CategoryHistogram {
    pub safe: usize,
    pub borderline: usize,
    pub rare: usize,
    pub outlier: usize,
}

impl DifficultyReport {
    pub fn histogram(&self) -> CategoryHistogram {
        let mut h = CategoryHistogram::default();
        for c in &self.categories {
            match c {
                Category::Safe => h.safe += 1,
                Category::Borderline => h.borderline += 1,
                Category::Rare => h.rare += 1,
                Category::Outlier => h.outlier += 1,
            }
        }
        h
    }

    /// `{"di": .., "m": .., "categories": {"safe": .., ...}}`
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "di": self.di,
            "m": self.m,
            "categories": self.histogram(),
        })
    }
}

fn minority_neighbors(d: &Dataset, k: usize, search: NeighborSearch) -> Vec<Vec<Neighbor>> {
    let x = d.features.view();
    let minority = (0..d.n_rows()).filter(|&i| d.labels[i].is_minority());
    match search {
        NeighborSearch::KdTree => {
            let tree = KdTree::new(x);
            minority.map(|i| tree.knn(x.row(i), k, Some(i))).collect()
        }
        NeighborSearch::Exhaustive => minority
            .map(|i| brute_force_knn(x, x.row(i), k, Some(i)))
            .collect(),
    }
}

/// Mean share of majority points among the `m` nearest neighbours of each
/// minority point. A point is never its own neighbour; distance ties go to
/// the lower row index.
pub fn difficulty_index(d: &Dataset, m: usize) -> Result<DifficultyReport> {
    difficulty_index_with(d, m, NeighborSearch::default())
}

pub fn difficulty_index_with(d: &Dataset, m: usize, search: NeighborSearch) -> Result<DifficultyReport> {
    let n_min = d.n_min();
    if n_min == 0 {
        return Err(Error::EmptyClass("minority"));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    if d.n_rows() <= m {
        return Err(Error::TooFewPoints {
            needed: m,
            found: d.n_rows(),
        });
    }
    let with_categories = d.n_rows() > CATEGORY_NEIGHBORS;
    let k = if with_categories { m.max(CATEGORY_NEIGHBORS) } else { m };
    let neighbors = minority_neighbors(d, k, search);

    let per_point_fractions: Vec<f64> = neighbors
        .iter()
        .map(|nn| {
            let maj = nn[..m]
                .iter()
                .filter(|n| d.labels[n.index] == ClassTag::Majority)
                .count();
            maj as f64 / m as f64
        })
        .collect();
    let categories = if with_categories {
        neighbors
            .iter()
            .map(|nn| {
                let same = nn[..CATEGORY_NEIGHBORS]
                    .iter()
                    .filter(|n| d.labels[n.index].is_minority())
                    .count();
                Category::from_same_class(same)
            })
            .collect()
    } else {
        Vec::new()
    };
    let total: usize = neighbors
        .iter()
        .map(|nn| nn[..m].iter().filter(|n| d.labels[n.index] == ClassTag::Majority).count())
        .sum();
    Ok(DifficultyReport {
        di: total as f64 / (m * n_min) as f64,
        m,
        per_point_fractions,
        categories,
    })
}

/// Safe / borderline / rare / outlier tag for every minority row, in row
/// order.
pub fn categorize_minority(d: &Dataset) -> Result<Vec<Category>> {
    if d.n_min() == 0 {
        return Err(Error::EmptyClass("minority"));
    }
    if d.n_rows() <= CATEGORY_NEIGHBORS {
        return Err(Error::TooFewPoints {
            needed: CATEGORY_NEIGHBORS,
            found: d.n_rows(),
        });
    }
    Ok(difficulty_index(d, CATEGORY_NEIGHBORS)?.categories)
}

/// Flips every majority row to minority independently with probability `p`.
/// Minority rows and class names are left as they are.
pub fn inject_label_noise(d: &Dataset, p: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("noise level must lie in [0, 1], got {p}")));
    }
    let mut out = d.clone();
    if p == 0.0 {
        return Ok(out);
    }
    let mut rng = stage_rng(seed, "label-noise");
    for label in out.labels.iter_mut() {
        if *label == ClassTag::Majority && rng.random_bool(p) {
            *label = ClassTag::Minority;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{imbalanced_blobs, BlobSpec};
    use ndarray::{array, Array2};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dataset(x: Array2<f64>, minority: &[usize]) -> Dataset {
        let labels = (0..x.nrows())
            .map(|i| if minority.contains(&i) { ClassTag::Minority } else { ClassTag::Majority })
            .collect();
        let names = (0..x.ncols()).map(|j| format!("x{j}")).collect();
        Dataset::new(x, labels, names).unwrap()
    }

    /// Independent oracle: sort all other rows by (distance, index).
    fn oracle_fraction(d: &Dataset, i: usize, m: usize) -> f64 {
        let mut others: Vec<(f64, usize)> = (0..d.n_rows())
            .filter(|&j| j != i)
            .map(|j| {
                let diff = &d.features.row(i) - &d.features.row(j);
                (diff.dot(&diff), j)
            })
            .collect();
        others.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        others[..m].iter().filter(|(_, j)| d.labels[*j] == ClassTag::Majority).count() as f64 / m as f64
    }

    #[test]
    fn isolated_minority_point_is_maximally_difficult() {
        let x = array![[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 1.0], [5.0, 5.0]];
        let r = difficulty_index(&dataset(x, &[0]), 5).unwrap();
        assert_eq!(r.di, 1.0);
        assert_eq!(r.categories, vec![Category::Outlier]);
    }

    #[test]
    fn separated_blobs_are_easy() {
        let mut x = Array2::zeros((16, 2));
        for i in 0..8 {
            x[[i, 0]] = i as f64 * 0.1;
            x[[i + 8, 0]] = 100.0 + i as f64 * 0.1;
        }
        let minority: Vec<usize> = (8..16).collect();
        let r = difficulty_index(&dataset(x, &minority), 5).unwrap();
        assert_eq!(r.di, 0.0);
        assert!(r.categories.iter().all(|c| *c == Category::Safe));
    }

    #[test]
    fn two_of_five_neighbors_majority() {
        // query at origin; minority neighbours at 1, 2, 3 and majority at 1.5, 2.5
        let x = array![[0.0], [1.0], [1.5], [2.0], [2.5], [3.0], [10.0], [11.0]];
        let d = dataset(x, &[0, 1, 3, 5]);
        let r = difficulty_index(&d, 5).unwrap();
        assert_eq!(r.per_point_fractions[0], oracle_fraction(&d, 0, 5));
        assert_eq!(r.per_point_fractions[0], 0.4);
    }

    #[test]
    fn categories_follow_same_class_counts() {
        assert_eq!(Category::from_same_class(5), Category::Safe);
        assert_eq!(Category::from_same_class(4), Category::Safe);
        assert_eq!(Category::from_same_class(3), Category::Borderline);
        assert_eq!(Category::from_same_class(2), Category::Borderline);
        assert_eq!(Category::from_same_class(1), Category::Rare);
        assert_eq!(Category::from_same_class(0), Category::Outlier);

        // query 0 has minority neighbours 1 and 3 among its five nearest
        let x = array![[0.0], [1.0], [1.5], [2.0], [2.5], [3.0], [10.0], [11.0]];
        let d = dataset(x, &[0, 1, 3, 7]);
        assert_eq!(categorize_minority(&d).unwrap()[0], Category::Borderline);
    }

    #[test]
    fn too_few_points() {
        let d = dataset(array![[0.0], [1.0], [2.0]], &[0]);
        assert!(matches!(difficulty_index(&d, 5), Err(Error::TooFewPoints { .. })));
        assert!(difficulty_index(&d, 2).unwrap().categories.is_empty());
    }

    #[test]
    fn json_shape() {
        let x = array![[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 1.0], [5.0, 5.0]];
        let v = difficulty_index(&dataset(x, &[0]), 5).unwrap().to_json();
        assert_eq!(v["di"], 1.0);
        assert_eq!(v["m"], 5);
        assert_eq!(v["categories"]["outlier"], 1);
    }

    #[test]
    fn noise_endpoints() {
        let d = imbalanced_blobs(&BlobSpec { n_maj: 40, n_min: 10, dims: 2, separation: 1.0, seed: 1 });
        assert_eq!(inject_label_noise(&d, 0.0, 3).unwrap(), d);
        let all = inject_label_noise(&d, 1.0, 3).unwrap();
        assert_eq!(all.n_maj(), 0);
        assert_eq!(all.features, d.features);
    }

    #[test]
    fn noise_flip_count_is_binomial() {
        let d = imbalanced_blobs(&BlobSpec { n_maj: 1000, n_min: 10, dims: 1, separation: 1.0, seed: 2 });
        for seed in 0..100 {
            let noisy = inject_label_noise(&d, 0.2, seed).unwrap();
            let flipped = noisy.n_min() - 10;
            assert!((160..=240).contains(&flipped), "{flipped}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn accelerated_search_matches_oracle(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(8..80);
            let dims = rng.random_range(1..4);
            // coarse grid values produce many distance ties
            let x = Array2::from_shape_fn((n, dims), |_| rng.random_range(-4..4) as f64);
            let minority: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.3)).collect();
            prop_assume!(!minority.is_empty());
            let d = dataset(x, &minority);
            let fast = difficulty_index_with(&d, 5, NeighborSearch::KdTree).unwrap();
            let slow = difficulty_index_with(&d, 5, NeighborSearch::Exhaustive).unwrap();
            prop_assert_eq!(&fast, &slow);
            let oracle: Vec<f64> = minority.iter().map(|&i| oracle_fraction(&d, i, 5)).collect();
            prop_assert_eq!(&fast.per_point_fractions, &oracle);
            prop_assert!((0.0..=1.0).contains(&fast.di));
        }

        #[test]
        fn di_is_permutation_invariant(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 30;
            let x = Array2::from_shape_fn((n, 2), |_| rng.random_range(-1.0..1.0));
            let minority: Vec<usize> = (0..n).filter(|i| i % 4 == 0).collect();
            let d = dataset(x, &minority);
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            let shuffled = d.subset(&perm);
            let a = difficulty_index(&d, 5).unwrap().di;
            let b = difficulty_index(&shuffled, 5).unwrap().di;
            prop_assert_eq!(a, b);
        }
    }
}
