//! Deterministic exact k-nearest-neighbor queries.
//!
//! All distance-based samplers sit on top of this module. Search is a
//! brute-force linear scan under the Euclidean metric; exact distance ties
//! are broken by ascending reference index, so every result is reproducible.

use ndarray::ArrayView2;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Squared Euclidean distance between rows `a` and `b` of `points`.
#[inline]
fn dist2_rows(points: &ArrayView2<'_, f64>, a: usize, b: usize) -> f64 {
    let (ra, rb) = (points.row(a), points.row(b));
    ra.iter().zip(rb.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Squared Euclidean distance between `query` and row `i` of `points`.
#[inline]
pub(crate) fn dist2_to_row(points: &ArrayView2<'_, f64>, query: &[f64], i: usize) -> f64 {
    points
        .row(i)
        .iter()
        .zip(query)
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

fn check_k(k: usize, available: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::parameter("k must be at least 1"));
    }
    if k > available {
        return Err(Error::parameter(format!(
            "k = {k} exceeds the {available} available reference points"
        )));
    }
    Ok(())
}

/// Keeps the k best (key, index) pairs seen so far, ordered ascending.
struct TopK {
    k: usize,
    items: Vec<(f64, usize)>,
}

impl TopK {
    fn new(k: usize) -> Self {
        TopK { k, items: Vec::with_capacity(k + 1) }
    }

    #[inline]
    fn push(&mut self, key: f64, index: usize) {
        if self.items.len() == self.k {
            let &(last_key, last_idx) = self.items.last().unwrap();
            if (key, index) >= (last_key, last_idx) {
                return;
            }
        }
        let pos = self
            .items
            .partition_point(|&(d, i)| (d, i) < (key, index));
        self.items.insert(pos, (key, index));
        self.items.truncate(self.k);
    }

    fn indices(self) -> Vec<usize> {
        self.items.into_iter().map(|(_, i)| i).collect()
    }
}

/// Indices of the `k` reference rows nearest to `query`, ascending by
/// distance, exact ties by ascending index. `exclude` removes one row
/// (typically the query itself) from consideration.
pub fn knn(
    references: ArrayView2<'_, f64>,
    query: &[f64],
    k: usize,
    exclude: Option<usize>,
) -> Result<Vec<usize>> {
    let m = references.nrows();
    let available = m - usize::from(exclude.map_or(false, |e| e < m));
    check_k(k, available)?;
    let mut top = TopK::new(k);
    for i in 0..m {
        if exclude == Some(i) {
            continue;
        }
        top.push(dist2_to_row(&references, query, i), i);
    }
    Ok(top.indices())
}

/// Mirror of [`knn`]: the `k` farthest reference rows, descending by
/// distance, exact ties by ascending index.
pub fn kfarthest(
    references: ArrayView2<'_, f64>,
    query: &[f64],
    k: usize,
    exclude: Option<usize>,
) -> Result<Vec<usize>> {
    let m = references.nrows();
    let available = m - usize::from(exclude.map_or(false, |e| e < m));
    check_k(k, available)?;
    let mut top = TopK::new(k);
    for i in 0..m {
        if exclude == Some(i) {
            continue;
        }
        // Negate so that larger distances sort first; ties still resolve by
        // ascending index.
        top.push(-dist2_to_row(&references, query, i), i);
    }
    Ok(top.indices())
}

/// 1-nearest neighbor of every row within the same matrix (self excluded).
pub(crate) fn nearest_within(points: ArrayView2<'_, f64>) -> Vec<usize> {
    let n = points.nrows();
    let mut result = Vec::with_capacity(n);
    for i in 0..n {
        let mut best = (f64::INFINITY, usize::MAX);
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = dist2_rows(&points, i, j);
            if (d, j) < best {
                best = (d, j);
            }
        }
        result.push(best.1);
    }
    result
}

/// All unordered cross-class pairs that are each other's nearest neighbor,
/// listed once as `(smaller, larger)` index and sorted.
pub fn mutual_nearest_cross_pairs(dataset: &Dataset) -> Vec<(usize, usize)> {
    let n = dataset.n();
    if n < 2 {
        return Vec::new();
    }
    let nn = nearest_within(dataset.features());
    let labels = dataset.labels();
    let mut pairs = Vec::new();
    for i in 0..n {
        let j = nn[i];
        if i < j && nn[j] == i && labels[i] != labels[j] {
            pairs.push((i, j));
        }
    }
    pairs
}
