//! Exact nearest-neighbour search: an exhaustive scan and a k-d tree that
//! return identical neighbour lists.
//!
//! Neighbours are ordered by `(squared distance, row index)`, so distance ties
//! resolve to the lower row index in both searches.

use ndarray::{ArrayView1, ArrayView2};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Squared Euclidean distance, summed coordinate by coordinate.
#[inline]
pub fn squared_distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// A neighbour hit: row index into the indexed matrix and its squared distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub sq_dist: f64,
}

impl Neighbor {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.sq_dist
            .total_cmp(&other.sq_dist)
            .then(self.index.cmp(&other.index))
    }
}

impl Eq for Neighbor {}

impl PartialOrd for Neighbor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Neighbor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other)
    }
}

/// The `k` nearest rows of `points` to `query` by exhaustive scan, skipping
/// row `exclude` if given.
pub fn brute_force_knn(
    points: ArrayView2<f64>,
    query: ArrayView1<f64>,
    k: usize,
    exclude: Option<usize>,
) -> Vec<Neighbor> {
    let mut all: Vec<Neighbor> = points
        .rows()
        .into_iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(index, row)| Neighbor {
            index,
            sq_dist: squared_distance(row, query),
        })
        .collect();
    all.sort_unstable();
    all.truncate(k);
    all
}

const LEAF_SIZE: usize = 16;

#[derive(Debug)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        value: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

/// Static k-d tree over the rows of a borrowed matrix.
#[derive(Debug)]
pub struct KdTree<'a> {
    points: ArrayView2<'a, f64>,
    order: Vec<usize>,
    root: Node,
}

impl<'a> KdTree<'a> {
    pub fn new(points: ArrayView2<'a, f64>) -> Self {
        let mut order: Vec<usize> = (0..points.nrows()).collect();
        let n = order.len();
        let root = Self::build(points, &mut order, 0, n);
        Self {
            points,
            order,
            root,
        }
    }

    fn build(points: ArrayView2<f64>, order: &mut [usize], start: usize, end: usize) -> Node {
        if end - start <= LEAF_SIZE || points.ncols() == 0 {
            return Node::Leaf { start, end };
        }
        let slice = &mut order[start..end];
        // split on the dimension of widest spread
        let mut best = (0, f64::NEG_INFINITY);
        for dim in 0..points.ncols() {
            let (lo, hi) = slice.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let v = points[[i, dim]];
                (lo.min(v), hi.max(v))
            });
            if hi - lo > best.1 {
                best = (dim, hi - lo);
            }
        }
        let dim = best.0;
        if best.1 <= 0.0 {
            return Node::Leaf { start, end };
        }
        let mid = slice.len() / 2;
        slice.select_nth_unstable_by(mid, |&a, &b| points[[a, dim]].total_cmp(&points[[b, dim]]));
        let value = points[[slice[mid], dim]];
        let split = start + mid;
        Node::Split {
            dim,
            value,
            left: Box::new(Self::build(points, order, start, split)),
            right: Box::new(Self::build(points, order, split, end)),
        }
    }

    /// The `k` nearest rows to `query`, skipping row `exclude` if given.
    pub fn knn(&self, query: ArrayView1<f64>, k: usize, exclude: Option<usize>) -> Vec<Neighbor> {
        if k == 0 {
            return Vec::new();
        }
        let mut heap: BinaryHeap<Neighbor> = BinaryHeap::with_capacity(k + 1);
        self.search(&self.root, query, k, exclude, &mut heap);
        let mut out = heap.into_vec();
        out.sort_unstable();
        out
    }

    fn search(
        &self,
        node: &Node,
        query: ArrayView1<f64>,
        k: usize,
        exclude: Option<usize>,
        heap: &mut BinaryHeap<Neighbor>,
    ) {
        match node {
            Node::Leaf { start, end } => {
                for &index in &self.order[*start..*end] {
                    if Some(index) == exclude {
                        continue;
                    }
                    let cand = Neighbor {
                        index,
                        sq_dist: squared_distance(self.points.row(index), query),
                    };
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().expect("heap holds k items") {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let delta = query[*dim] - value;
                let (near, far) = if delta < 0.0 { (left, right) } else { (right, left) };
                self.search(near, query, k, exclude, heap);
                // equal bounds are still visited so index tie-breaks match the scan
                let visit_far = heap.len() < k
                    || delta * delta <= heap.peek().map_or(f64::INFINITY, |w| w.sq_dist);
                if visit_far {
                    self.search(far, query, k, exclude, heap);
                }
            }
        }
    }
}
