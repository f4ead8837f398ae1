//! Majority-class undersampling: random, NearMiss, condensed and edited
//! nearest neighbor, and Tomek link removal.

use ndarray::Axis;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::dataset::{Dataset, ResampleReport};
use crate::error::{Error, Result};
use crate::neighbors::{dist2_to_row, knn, kfarthest, mutual_nearest_cross_pairs};
use crate::rng;

use super::{ceil_div, from_survivors, sampler_partition, RatioTarget};

/// Keeps all minority points and a uniform random subset of
/// `ceil(|S| / r_target)` majority points, drawn without replacement.
pub fn random_undersample(
    dataset: &Dataset,
    r_target: RatioTarget,
    seed: u64,
) -> Result<(Dataset, ResampleReport)> {
    let (majority, minority) = sampler_partition(dataset)?;
    let keep = undersample_keep_count(&majority, &minority, r_target)?;

    let mut pool = majority;
    let mut rng = rng::stream(seed, "random_under");
    let (chosen, _) = pool.partial_shuffle(&mut rng, keep);

    let mut survivors = chosen.to_vec();
    survivors.extend(minority);
    Ok(from_survivors(dataset, survivors))
}

fn undersample_keep_count(
    majority: &[usize],
    minority: &[usize],
    r_target: RatioTarget,
) -> Result<usize> {
    let keep = ceil_div(minority.len(), r_target.value());
    if keep > majority.len() {
        return Err(Error::parameter(format!(
            "undersampling cannot reduce the minority share: target ratio {} is below the current {:.4}",
            r_target.value(),
            minority.len() as f64 / majority.len() as f64
        )));
    }
    Ok(keep)
}

/// NearMiss variant selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NearMissVariant {
    /// Keep majority points with the lowest mean distance to their k
    /// nearest minority points.
    One,
    /// Keep majority points with the lowest mean distance to their k
    /// farthest minority points.
    Two,
    /// Keep the union over minority points of their k nearest majority
    /// points; the ratio target is ignored.
    Three,
}

/// Distance-guided undersampling of the majority class.
///
/// Variants 1 and 2 score every majority point by its mean distance to the
/// k nearest (resp. farthest) minority points and keep the
/// `ceil(|S| / r_target)` lowest-scoring ones, ties by lower index.
/// Variant 3 keeps the union of each minority point's k nearest majority
/// points. Deterministic; `_seed` is accepted for interface uniformity
/// only.
pub fn nearmiss(
    dataset: &Dataset,
    variant: NearMissVariant,
    k: usize,
    r_target: RatioTarget,
    _seed: u64,
) -> Result<(Dataset, ResampleReport)> {
    let (majority, minority) = sampler_partition(dataset)?;
    if k == 0 {
        return Err(Error::parameter("k must be at least 1"));
    }

    let survivors = match variant {
        NearMissVariant::One | NearMissVariant::Two => {
            if k > minority.len() {
                return Err(Error::parameter(format!(
                    "k = {k} exceeds the {} minority points",
                    minority.len()
                )));
            }
            let keep = undersample_keep_count(&majority, &minority, r_target)?;
            let minority_feats = dataset.features().select(Axis(0), &minority);

            let mut scored: Vec<(f64, usize)> = majority
                .iter()
                .map(|&i| {
                    let query: Vec<f64> = dataset.row(i).to_vec();
                    let picked = match variant {
                        NearMissVariant::One => {
                            knn(minority_feats.view(), &query, k, None).expect("k checked")
                        }
                        _ => kfarthest(minority_feats.view(), &query, k, None).expect("k checked"),
                    };
                    let mean: f64 = picked
                        .iter()
                        .map(|&p| dist2_to_row(&minority_feats.view(), &query, p).sqrt())
                        .sum::<f64>()
                        / k as f64;
                    (mean, i)
                })
                .collect();
            scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

            let mut survivors: Vec<usize> = scored[..keep].iter().map(|&(_, i)| i).collect();
            survivors.extend(minority);
            survivors
        }
        NearMissVariant::Three => {
            if k > majority.len() {
                return Err(Error::parameter(format!(
                    "k = {k} exceeds the {} majority points",
                    majority.len()
                )));
            }
            let majority_feats = dataset.features().select(Axis(0), &majority);
            let mut kept = std::collections::BTreeSet::new();
            for &i in &minority {
                let query: Vec<f64> = dataset.row(i).to_vec();
                for p in knn(majority_feats.view(), &query, k, None).expect("k checked") {
                    kept.insert(majority[p]);
                }
            }
            let mut survivors: Vec<usize> = kept.into_iter().collect();
            survivors.extend(minority);
            survivors
        }
    };

    Ok(from_survivors(dataset, survivors))
}

/// Condensed-nearest-neighbor undersampling of the majority class.
///
/// Grows a consistent subset U: starting from one random minority point,
/// each pass visits the points outside U in seeded random order and adds
/// every point whose current 1-NN in U carries a different label; passes
/// repeat until one adds nothing. The output keeps all minority points
/// plus the majority points that entered U.
///
/// Draw protocol (for reproducibility): one stream keyed by
/// `(seed, "cnn")` supplies first the index of the starting minority
/// point, then one shuffle of the remaining indices (ascending before the
/// shuffle) per pass.
pub fn cnn_undersample(dataset: &Dataset, seed: u64) -> Result<(Dataset, ResampleReport)> {
    let (majority, minority) = sampler_partition(dataset)?;
    let n = dataset.n();
    let features = dataset.features();
    let labels = dataset.labels();

    let mut rng = rng::stream(seed, "cnn");
    let start = minority[rng.random_range(0..minority.len())];
    let mut in_u = vec![false; n];
    in_u[start] = true;
    let mut members = vec![start];

    loop {
        let mut remaining: Vec<usize> = (0..n).filter(|&i| !in_u[i]).collect();
        if remaining.is_empty() {
            break;
        }
        remaining.shuffle(&mut rng);
        let mut added = 0;
        for i in remaining {
            let query: Vec<f64> = dataset.row(i).to_vec();
            let mut best = (f64::INFINITY, usize::MAX);
            for &u in &members {
                let d = dist2_to_row(&features, &query, u);
                if (d, u) < best {
                    best = (d, u);
                }
            }
            if labels[best.1] != labels[i] {
                in_u[i] = true;
                members.push(i);
                added += 1;
            }
        }
        if added == 0 {
            break;
        }
    }

    let mut survivors: Vec<usize> = majority.iter().copied().filter(|&i| in_u[i]).collect();
    survivors.extend(minority);
    Ok(from_survivors(dataset, survivors))
}

/// Edited-nearest-neighbor undersampling: removes every majority point
/// whose k nearest neighbors in the full dataset (self excluded) contain
/// more minority than majority labels. Single pass; all votes are taken
/// against the original dataset. `k` must be odd so the binary vote cannot
/// tie.
pub fn enn_undersample(dataset: &Dataset, k: usize) -> Result<(Dataset, ResampleReport)> {
    let (majority, _) = sampler_partition(dataset)?;
    let majority_label = dataset.labels()[majority[0]];
    enn_with_majority(dataset, k, majority_label)
}

/// ENN pass with the majority side pinned by `majority_label`, so iterated
/// or pipelined cleaning stays anchored to the original class roles even
/// if removal inverts the counts along the way.
pub(crate) fn enn_with_majority(
    dataset: &Dataset,
    k: usize,
    majority_label: crate::dataset::ClassLabel,
) -> Result<(Dataset, ResampleReport)> {
    if k % 2 == 0 {
        return Err(Error::parameter(format!("ENN needs an odd k, got {k}")));
    }
    if k >= dataset.n() {
        return Err(Error::parameter(format!(
            "k = {k} must be smaller than the dataset size {}",
            dataset.n()
        )));
    }
    let features = dataset.features();
    let labels = dataset.labels();

    let survivors: Vec<usize> = (0..dataset.n())
        .filter(|&i| {
            if labels[i] != majority_label {
                return true;
            }
            let query: Vec<f64> = dataset.row(i).to_vec();
            let neighbors = knn(features, &query, k, Some(i)).expect("k checked");
            let minority_votes = neighbors
                .iter()
                .filter(|&&j| labels[j] != majority_label)
                .count();
            2 * minority_votes <= k
        })
        .collect();
    Ok(from_survivors(dataset, survivors))
}

/// Repeated ENN: applies [`enn_undersample`] to its own output until a
/// pass removes nothing. Errors rather than truncating silently when
/// `max_iters` passes do not reach the fixpoint. The report spans from the
/// original input to the final output.
pub fn renn_undersample(
    dataset: &Dataset,
    k: usize,
    max_iters: usize,
) -> Result<(Dataset, ResampleReport)> {
    if max_iters == 0 {
        return Err(Error::parameter("max_iters must be at least 1"));
    }
    let (majority, _) = sampler_partition(dataset)?;
    let majority_label = dataset.labels()[majority[0]];
    let mut current = dataset.clone();
    for _ in 0..max_iters {
        let before_n = current.n();
        let (next, _) = enn_with_majority(&current, k, majority_label)?;
        let removed = before_n - next.n();
        current = next;
        if removed == 0 {
            let report = ResampleReport::from_datasets(dataset, &current);
            return Ok((current, report));
        }
    }
    let (majority_now, _) = current.label_counts();
    Err(Error::NonConvergence {
        context: "repeated ENN",
        iters: max_iters,
        last_value: majority_now as f64,
        last_decrease: f64::NAN,
    })
}

/// Which side of each Tomek link to drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TomekMode {
    /// Remove only the majority member of each link.
    MajorityOnly,
    /// Remove both members of each link.
    Both,
}

/// Removes Tomek links: cross-class pairs of mutual nearest neighbors,
/// computed once on the input.
pub fn tomek_removal(dataset: &Dataset, mode: TomekMode) -> Result<(Dataset, ResampleReport)> {
    let (majority, _) = sampler_partition(dataset)?;
    let majority_label = dataset.labels()[majority[0]];
    tomek_with_majority(dataset, mode, majority_label)
}

/// Tomek removal with the majority side pinned by `majority_label`; see
/// [`enn_with_majority`].
pub(crate) fn tomek_with_majority(
    dataset: &Dataset,
    mode: TomekMode,
    majority_label: crate::dataset::ClassLabel,
) -> Result<(Dataset, ResampleReport)> {
    if dataset.n() < 2 {
        return Err(Error::parameter("Tomek link removal needs at least 2 points"));
    }
    let mut removed = vec![false; dataset.n()];
    for (a, b) in mutual_nearest_cross_pairs(dataset) {
        match mode {
            TomekMode::MajorityOnly => {
                let victim = if dataset.labels()[a] == majority_label { a } else { b };
                removed[victim] = true;
            }
            TomekMode::Both => {
                removed[a] = true;
                removed[b] = true;
            }
        }
    }
    let survivors: Vec<usize> = (0..dataset.n()).filter(|&i| !removed[i]).collect();
    Ok(from_survivors(dataset, survivors))
}
