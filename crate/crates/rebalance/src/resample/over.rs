//! Minority-class oversampling: random duplication, SMOTE and its two
//! borderline variants.

use ndarray::{Array2, Axis};
use rand::Rng;
use rand_distr::Open01;

use crate::dataset::{Dataset, ResampleReport};
use crate::error::{Error, Result};
use crate::neighbors::knn;
use crate::rng;

use super::{round_mul, sampler_partition, RatioTarget};

/// Number of synthetic/duplicate minority rows needed to reach the target
/// ratio: `round(r_target * |L|) - |S|`.
fn synthetic_count(
    majority: usize,
    minority: usize,
    r_target: RatioTarget,
) -> Result<usize> {
    let target = round_mul(majority, r_target.value());
    if target < minority {
        return Err(Error::parameter(format!(
            "oversampling cannot reduce the minority share: target ratio {} is below the current {:.4}",
            r_target.value(),
            minority as f64 / majority as f64
        )));
    }
    Ok(target - minority)
}

/// Appends uniform with-replacement copies of minority rows until the
/// minority count reaches `round(r_target * |L|)`.
pub fn random_oversample(
    dataset: &Dataset,
    r_target: RatioTarget,
    seed: u64,
) -> Result<(Dataset, ResampleReport)> {
    let (majority, minority) = sampler_partition(dataset)?;
    let n_copies = synthetic_count(majority.len(), minority.len(), r_target)?;
    let minority_label = dataset.labels()[minority[0]];

    let mut rng = rng::stream(seed, "random_over");
    let mut rows = Array2::zeros((n_copies, dataset.d()));
    for c in 0..n_copies {
        let pick = minority[rng.random_range(0..minority.len())];
        rows.row_mut(c).assign(&dataset.row(pick));
    }
    let out = dataset.append_rows(&rows, minority_label);
    let report = ResampleReport::from_datasets(dataset, &out);
    Ok((out, report))
}

/// SMOTE: appends synthetic minority points interpolated between a
/// uniformly drawn base point and one of its k nearest minority neighbors
/// (drawn with replacement), at a uniform position on the open segment.
pub fn smote(
    dataset: &Dataset,
    k: usize,
    r_target: RatioTarget,
    seed: u64,
) -> Result<(Dataset, ResampleReport)> {
    let (majority, minority) = sampler_partition(dataset)?;
    check_interpolation_params(k, minority.len())?;
    let n_syn = synthetic_count(majority.len(), minority.len(), r_target)?;
    let minority_label = dataset.labels()[minority[0]];

    let minority_feats = dataset.features().select(Axis(0), &minority);
    let neighbor_lists = minority_knn_lists(&minority_feats, k);

    let mut rng = rng::stream(seed, "smote");
    let mut rows = Array2::zeros((n_syn, dataset.d()));
    for s in 0..n_syn {
        let base = rng.random_range(0..minority.len());
        let neighbor = neighbor_lists[base][rng.random_range(0..k)];
        let g: f64 = rng.sample(Open01);
        for (j, cell) in rows.row_mut(s).iter_mut().enumerate() {
            let from = minority_feats[[base, j]];
            let to = minority_feats[[neighbor, j]];
            *cell = from + g * (to - from);
        }
    }
    let out = dataset.append_rows(&rows, minority_label);
    let report = ResampleReport::from_datasets(dataset, &out);
    Ok((out, report))
}

fn check_interpolation_params(k: usize, minority: usize) -> Result<()> {
    if minority < 2 {
        return Err(Error::parameter(
            "SMOTE cannot interpolate with fewer than 2 minority points",
        ));
    }
    if k == 0 || k > minority - 1 {
        return Err(Error::parameter(format!(
            "k = {k} must lie in [1, {}] for {minority} minority points",
            minority - 1
        )));
    }
    Ok(())
}

/// k nearest neighbors of every minority point among the minority class,
/// self excluded; indices are positions within the minority list.
fn minority_knn_lists(minority_feats: &Array2<f64>, k: usize) -> Vec<Vec<usize>> {
    (0..minority_feats.nrows())
        .map(|p| {
            let query: Vec<f64> = minority_feats.row(p).to_vec();
            knn(minority_feats.view(), &query, k, Some(p)).expect("k checked")
        })
        .collect()
}

/// Borderline-SMOTE variant selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BorderlineVariant {
    /// Interpolate only towards minority neighbors.
    One,
    /// Also allow interpolating towards majority neighbors, staying on the
    /// near half of the segment.
    Two,
}

/// Borderline-SMOTE: like [`smote`], but base points are drawn only from
/// the DANGER set — minority points whose m nearest neighbors in the whole
/// dataset are at least half majority (all-majority neighborhoods count as
/// noise and never seed synthetics). Variant 2 additionally draws
/// neighbors from the base's k nearest majority points, with the
/// interpolation factor halved so synthetics stay closer to the base. When
/// no point qualifies as DANGER the call falls back to plain SMOTE with a
/// logged notice.
pub fn borderline_smote(
    dataset: &Dataset,
    variant: BorderlineVariant,
    m: usize,
    k: usize,
    r_target: RatioTarget,
    seed: u64,
) -> Result<(Dataset, ResampleReport)> {
    let (majority, minority) = sampler_partition(dataset)?;
    check_interpolation_params(k, minority.len())?;
    if m == 0 || m >= dataset.n() {
        return Err(Error::parameter(format!(
            "m = {m} must lie in [1, {}]",
            dataset.n() - 1
        )));
    }
    if variant == BorderlineVariant::Two && k > majority.len() {
        return Err(Error::parameter(format!(
            "k = {k} exceeds the {} majority points",
            majority.len()
        )));
    }
    let n_syn = synthetic_count(majority.len(), minority.len(), r_target)?;
    let minority_label = dataset.labels()[minority[0]];

    let danger = danger_positions(dataset, &minority, m);
    if danger.is_empty() {
        log::warn!("borderline SMOTE found no DANGER points; falling back to plain SMOTE");
        return smote(dataset, k, r_target, seed);
    }

    let minority_feats = dataset.features().select(Axis(0), &minority);
    let majority_feats = dataset.features().select(Axis(0), &majority);
    let minority_nn: Vec<Vec<usize>> = danger
        .iter()
        .map(|&p| {
            let query: Vec<f64> = minority_feats.row(p).to_vec();
            knn(minority_feats.view(), &query, k, Some(p)).expect("k checked")
        })
        .collect();
    let majority_nn: Vec<Vec<usize>> = if variant == BorderlineVariant::Two {
        danger
            .iter()
            .map(|&p| {
                let query: Vec<f64> = minority_feats.row(p).to_vec();
                knn(majority_feats.view(), &query, k, None).expect("k checked")
            })
            .collect()
    } else {
        Vec::new()
    };

    let tag = match variant {
        BorderlineVariant::One => "bsmote.v1",
        BorderlineVariant::Two => "bsmote.v2",
    };
    let mut rng = rng::stream(seed, tag);
    let mut rows = Array2::zeros((n_syn, dataset.d()));
    for s in 0..n_syn {
        let d_pos = rng.random_range(0..danger.len());
        let base = danger[d_pos];
        // Variant 2 draws uniformly over the 2k-candidate union of minority
        // and majority neighbors.
        let choices = match variant {
            BorderlineVariant::One => k,
            BorderlineVariant::Two => 2 * k,
        };
        let pick = rng.random_range(0..choices);
        let g: f64 = rng.sample(Open01);
        let (to_row, g) = if pick < k {
            (minority_feats.row(minority_nn[d_pos][pick]), g)
        } else {
            (majority_feats.row(majority_nn[d_pos][pick - k]), 0.5 * g)
        };
        for (j, cell) in rows.row_mut(s).iter_mut().enumerate() {
            let from = minority_feats[[base, j]];
            *cell = from + g * (to_row[j] - from);
        }
    }
    let out = dataset.append_rows(&rows, minority_label);
    let report = ResampleReport::from_datasets(dataset, &out);
    Ok((out, report))
}

/// Positions (within the minority list) of the DANGER points: at least
/// half but not all of their m nearest neighbors in the full dataset carry
/// the majority label.
pub(crate) fn danger_positions(dataset: &Dataset, minority: &[usize], m: usize) -> Vec<usize> {
    let features = dataset.features();
    let labels = dataset.labels();
    let minority_label = labels[minority[0]];
    minority
        .iter()
        .enumerate()
        .filter_map(|(pos, &i)| {
            let query: Vec<f64> = dataset.row(i).to_vec();
            let neighbors = knn(features, &query, m, Some(i)).expect("m checked");
            let m_prime = neighbors
                .iter()
                .filter(|&&j| labels[j] != minority_label)
                .count();
            // noise: m' = m; safe: m' < m/2; danger otherwise.
            (m_prime < m && 2 * m_prime >= m).then_some(pos)
        })
        .collect()
}
