//! Anchor points from k-means clustering (Lloyd iterations, k-means++ seeding).

use ndarray::{Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::neighbors::squared_distance;

pub const MAX_ITERATIONS: usize = 300;
pub const SHIFT_TOLERANCE: f64 = 1e-6;

/// The `k x d` anchor coordinates at which normalized potentials are compared.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    pub points: Array2<f64>,
    /// Requested anchor count when it had to be reduced to the number of
    /// distinct rows.
    pub reduced_from: Option<usize>,
}

impl AnchorSet {
    pub fn new(points: Array2<f64>) -> Result<Self> {
        if points.nrows() == 0 {
            return Err(Error::InvalidParameter("anchor set must not be empty".into()));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("anchor coordinates must be finite".into()));
        }
        Ok(Self {
            points,
            reduced_from: None,
        })
    }

    pub fn k(&self) -> usize {
        self.points.nrows()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }
}

/// Outcome of a Lloyd run, with the inertia after every assignment step.
#[derive(Debug, Clone)]
pub struct LloydOutcome {
    pub centroids: Array2<f64>,
    pub assignments: Vec<usize>,
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
}

impl LloydOutcome {
    pub fn inertia(&self) -> f64 {
        *self.inertia_trace.last().unwrap_or(&0.0)
    }
}

fn distinct_rows(x: ArrayView2<f64>) -> usize {
    x.rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.to_bits()).collect::<Vec<u64>>())
        .collect::<HashSet<_>>()
        .len()
}

fn nearest(centroids: ArrayView2<f64>, row: ndarray::ArrayView1<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.rows().into_iter().enumerate() {
        let d = squared_distance(row, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// k-means++ seeding: first centre uniform, later centres drawn with
/// probability proportional to squared distance to the closest chosen centre.
pub fn kmeans_plus_plus(x: ArrayView2<f64>, k: usize, rng: &mut impl Rng) -> Array2<f64> {
    let n = x.nrows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = x
        .rows()
        .into_iter()
        .map(|r| squared_distance(r, x.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                if target < w {
                    pick = Some(i);
                    break;
                }
                target -= w;
            }
            // rounding can leave target just past the last positive weight
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).expect("positive total"))
        } else {
            rng.random_range(0..n)
        };
        chosen.push(next);
        for (i, r) in x.rows().into_iter().enumerate() {
            d2[i] = d2[i].min(squared_distance(r, x.row(next)));
        }
    }
    x.select(Axis(0), &chosen)
}

/// Lloyd iterations from the given centres until the largest centroid shift
/// drops below `tol` or `max_iter` updates have run. A cluster that loses
/// all members keeps its previous centre.
pub fn lloyd(x: ArrayView2<f64>, init: Array2<f64>, max_iter: usize, tol: f64) -> LloydOutcome {
    let mut centroids = init;
    let k = centroids.nrows();
    let d = x.ncols();
    let mut assignments = vec![0usize; x.nrows()];
    let mut inertia_trace = Vec::new();
    let mut iterations = 0;
    loop {
        let mut inertia = 0.0;
        for (i, row) in x.rows().into_iter().enumerate() {
            let (c, dist) = nearest(centroids.view(), row);
            assignments[i] = c;
            inertia += dist;
        }
        inertia_trace.push(inertia);
        if iterations == max_iter {
            break;
        }

        let mut sums = Array2::<f64>::zeros((k, d));
        let mut counts = vec![0usize; k];
        for (i, row) in x.rows().into_iter().enumerate() {
            let mut s = sums.row_mut(assignments[i]);
            s += &row;
            counts[assignments[i]] += 1;
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let mut s = sums.row_mut(c);
            s /= counts[c] as f64;
            shift = shift.max(squared_distance(s.view(), centroids.row(c)).sqrt());
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids.row_mut(c).assign(&sums.row(c));
            }
        }
        iterations += 1;
        if shift < tol {
            // one more assignment so the trace ends on the final centroids
            let inertia = x
                .rows()
                .into_iter()
                .zip(assignments.iter_mut())
                .map(|(row, a)| {
                    let (c, dist) = nearest(centroids.view(), row);
                    *a = c;
                    dist
                })
                .sum();
            inertia_trace.push(inertia);
            break;
        }
    }
    LloydOutcome {
        centroids,
        assignments,
        inertia_trace,
        iterations,
    }
}

/// `k` anchors from k-means on `x`, deterministic in `seed`.
///
/// When `x` holds fewer than `k` distinct rows, `k` shrinks to that count and
/// the original request is kept in [`AnchorSet::reduced_from`].
pub fn kmeans_anchors(x: ArrayView2<f64>, k: usize, seed: u64) -> Result<AnchorSet> {
    if x.nrows() == 0 {
        return Err(Error::InvalidParameter("cannot cluster an empty matrix".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("anchor count must be at least 1".into()));
    }
    let distinct = distinct_rows(x);
    let effective = k.min(distinct);
    if effective < k {
        log::warn!("only {distinct} distinct rows; reducing anchors from {k} to {effective}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = kmeans_plus_plus(x, effective, &mut rng);
    let outcome = lloyd(x, init, MAX_ITERATIONS, SHIFT_TOLERANCE);
    let mut anchors = AnchorSet::new(outcome.centroids)?;
    anchors.reduced_from = (effective < k).then_some(k);
    Ok(anchors)
}
