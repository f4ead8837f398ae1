//! EasyEnsemble and BalanceCascade meta-classifiers.
//!
//! Both train a sequence of AdaBoost committees on balanced subsets (every
//! minority point plus an equally sized majority sample) and combine them
//! by summing thresholded committee scores: a point is minority exactly
//! when `sum_i (score_i(x) - b_i) >= 0`. EasyEnsemble samples each subset
//! independently; BalanceCascade tunes each member's threshold to a
//! false-positive-rate target and drops the majority points it already
//! classifies correctly from the pool feeding later members.

use ndarray::ArrayView1;
use rand::seq::SliceRandom;

use crate::dataset::{ClassLabel, Dataset};
use crate::error::{Error, Result};
use crate::learn::{boosted_score, fit_adaboost, BoostedModel};
use crate::rng;

/// Ordered list of boosted members combined by score summation.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaEnsemble {
    members: Vec<BoostedModel>,
}

impl MetaEnsemble {
    pub fn new(members: Vec<BoostedModel>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::parameter("a meta-ensemble needs at least one member"));
        }
        Ok(MetaEnsemble { members })
    }

    pub fn members(&self) -> &[BoostedModel] {
        &self.members
    }
}

/// Meta-prediction: minority exactly when the summed shifted scores are
/// non-negative. This is score addition, not majority voting.
pub fn meta_predict(ensemble: &MetaEnsemble, point: ArrayView1<'_, f64>) -> ClassLabel {
    let total: f64 = ensemble
        .members
        .iter()
        .map(|m| boosted_score(m, point) - m.threshold_b)
        .sum();
    if total >= 0.0 {
        ClassLabel::Minority
    } else {
        ClassLabel::Majority
    }
}

fn balanced_parts(dataset: &Dataset) -> Result<(Vec<usize>, Vec<usize>)> {
    // The by-count partition guarantees |majority| >= |minority|.
    let (majority, minority) = crate::dataset::class_partition(dataset);
    if minority.is_empty() {
        return Err(Error::EmptyClass("minority"));
    }
    Ok((majority, minority))
}

/// Trains one AdaBoost member on `majority_sample` plus every minority
/// point.
fn fit_member(
    dataset: &Dataset,
    majority_sample: &[usize],
    minority: &[usize],
    rounds: usize,
) -> Result<BoostedModel> {
    let mut subset: Vec<usize> = majority_sample.to_vec();
    subset.extend_from_slice(minority);
    subset.sort_unstable();
    fit_adaboost(&dataset.select(&subset), rounds)
}

/// EasyEnsemble: `n_members` independent AdaBoost committees, each fitted
/// on all minority points plus a fresh uniform without-replacement
/// majority sample of the same size. Deterministic in `seed`.
pub fn easy_ensemble(
    dataset: &Dataset,
    n_members: usize,
    rounds: usize,
    seed: u64,
) -> Result<MetaEnsemble> {
    if n_members == 0 {
        return Err(Error::parameter("n_members must be at least 1"));
    }
    let (majority, minority) = balanced_parts(dataset)?;

    let mut members = Vec::with_capacity(n_members);
    for index in 0..n_members {
        let mut pool = majority.clone();
        let mut rng = rng::substream(seed, "easy_ensemble.member", index as u64);
        let (sample, _) = pool.partial_shuffle(&mut rng, minority.len());
        members.push(fit_member(dataset, sample, &minority, rounds)?);
    }
    MetaEnsemble::new(members)
}

/// False-positive-rate target for a cascade of `n_members` stages at input
/// imbalance ratio `r`: `t = r^(1 / (n_members - 1))`.
pub fn cascade_fpr_target(r: f64, n_members: usize) -> f64 {
    r.powf(1.0 / (n_members as f64 - 1.0))
}

/// Smallest threshold drawn from `scores` at which the fraction of scores
/// at or above it is at most `target`; one position above the maximum when
/// even that is too permissive.
pub fn tune_threshold(scores: &[f64], target: f64) -> f64 {
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut chosen = None;
    // Scores at or above sorted[i] number n - i after skipping duplicates.
    for (i, &candidate) in sorted.iter().enumerate() {
        if i > 0 && sorted[i - 1] == candidate {
            continue;
        }
        let at_or_above = n - i as f64;
        if at_or_above / n <= target {
            chosen = Some(candidate);
            break;
        }
    }
    match chosen {
        Some(b) => b,
        None => sorted.last().copied().unwrap_or(0.0) + 1.0,
    }
}

/// BalanceCascade: like [`easy_ensemble`], but each member's threshold is
/// tuned so its false positive rate over the current majority pool is at
/// most `t = r^(1/(N-1))`, and the pool then drops every point the
/// thresholded member classifies correctly. Stops early when the pool no
/// longer covers a balanced sample.
pub fn balance_cascade(
    dataset: &Dataset,
    n_members: usize,
    rounds: usize,
    seed: u64,
) -> Result<MetaEnsemble> {
    if n_members < 2 {
        return Err(Error::parameter(
            "balance cascade needs at least 2 members for its rate target",
        ));
    }
    let (majority, minority) = balanced_parts(dataset)?;
    let ratio = minority.len() as f64 / majority.len() as f64;
    let target = cascade_fpr_target(ratio, n_members);

    let mut pool = majority;
    let mut members = Vec::with_capacity(n_members);
    for index in 0..n_members {
        if pool.len() < minority.len() {
            break;
        }
        let mut shuffled = pool.clone();
        let mut rng = rng::substream(seed, "balance_cascade.member", index as u64);
        let (sample, _) = shuffled.partial_shuffle(&mut rng, minority.len());
        let mut member = fit_member(dataset, sample, &minority, rounds)?;

        let scores: Vec<f64> = pool.iter().map(|&i| boosted_score(&member, dataset.row(i))).collect();
        member.threshold_b = tune_threshold(&scores, target);

        // Keep only the false positives: pool points scored at or above
        // the tuned threshold.
        pool = pool
            .iter()
            .zip(&scores)
            .filter(|(_, &s)| s >= member.threshold_b)
            .map(|(&i, _)| i)
            .collect();
        members.push(member);
    }
    MetaEnsemble::new(members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::{boosted_predict, Stump};
    use approx::assert_relative_eq;
    use ndarray::{array, Array2};
    use rand::Rng;

    fn overlapping_dataset(majority: usize, minority: usize, seed: u64) -> Dataset {
        let mut rng = rng::stream(seed, "test.ensemble");
        let n = majority + minority;
        let mut features = Array2::zeros((n, 2));
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let is_minority = i >= majority;
            let center = if is_minority { 1.5 } else { 0.0 };
            features[[i, 0]] = center + rng.random_range(-1.0..1.0);
            features[[i, 1]] = rng.random_range(-1.0..1.0);
            labels.push(if is_minority { ClassLabel::Minority } else { ClassLabel::Majority });
        }
        Dataset::new(features, labels).unwrap()
    }

    fn single_stump_member(threshold: f64, polarity: i8, alpha: f64, b: f64) -> BoostedModel {
        BoostedModel {
            stumps: vec![Stump { feature_index: 0, threshold, polarity }],
            alphas: vec![alpha],
            threshold_b: b,
        }
    }

    #[test]
    fn fpr_target_formula() {
        assert_relative_eq!(cascade_fpr_target(0.1, 4), 0.1f64.powf(1.0 / 3.0), epsilon = 1e-15);
        assert!((cascade_fpr_target(0.1, 4) - 0.4642).abs() < 1e-4);
    }

    #[test]
    fn tune_threshold_quantile_rule() {
        let scores = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
        // 30% of scores sit at or above 7.
        let b = tune_threshold(&scores, 0.3);
        assert_eq!(b, 7.0);
        // Any smaller admissible threshold would push the rate above the
        // target.
        let above = scores.iter().filter(|&&s| s >= 6.0).count();
        assert!(above as f64 / scores.len() as f64 > 0.3);
        // Impossible targets move one past the maximum.
        let all_equal = [2.0; 5];
        assert_eq!(tune_threshold(&all_equal, 0.5), 3.0);
    }

    #[test]
    fn single_member_reduces_to_that_member() {
        let d = overlapping_dataset(30, 10, 1);
        let ensemble = easy_ensemble(&d, 1, 5, 3).unwrap();
        let member = &ensemble.members()[0];
        for i in 0..d.n() {
            assert_eq!(meta_predict(&ensemble, d.row(i)), boosted_predict(member, d.row(i)));
        }
    }

    #[test]
    fn easy_ensemble_is_deterministic() {
        let d = overlapping_dataset(40, 12, 2);
        let a = easy_ensemble(&d, 4, 5, 9).unwrap();
        let b = easy_ensemble(&d, 4, 5, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn member_order_does_not_change_predictions() {
        let d = overlapping_dataset(40, 12, 4);
        let ensemble = easy_ensemble(&d, 5, 4, 11).unwrap();
        let mut reversed = ensemble.members().to_vec();
        reversed.reverse();
        let permuted = MetaEnsemble::new(reversed).unwrap();
        for i in 0..d.n() {
            assert_eq!(meta_predict(&ensemble, d.row(i)), meta_predict(&permuted, d.row(i)));
        }
    }

    #[test]
    fn degenerate_configurations_are_rejected() {
        let d = overlapping_dataset(10, 4, 3);
        assert!(easy_ensemble(&d, 0, 3, 0).is_err());
        assert!(balance_cascade(&d, 1, 3, 0).is_err());
        let one_class =
            Dataset::new(Array2::zeros((4, 1)), vec![ClassLabel::Majority; 4]).unwrap();
        assert!(easy_ensemble(&one_class, 2, 3, 0).is_err());
    }

    #[test]
    fn opposite_equal_margins_resolve_to_minority() {
        let a = single_stump_member(0.5, 1, 0.8, 0.0);
        let b = single_stump_member(0.5, -1, 0.8, 0.0);
        let ensemble = MetaEnsemble::new(vec![a, b]).unwrap();
        let point = array![2.0];
        assert_eq!(meta_predict(&ensemble, point.view()), ClassLabel::Minority);
    }

    #[test]
    fn agreeing_members_keep_their_label() {
        let a = single_stump_member(0.5, 1, 0.9, 0.0);
        let b = single_stump_member(0.4, 1, 0.3, 0.0);
        let ensemble = MetaEnsemble::new(vec![a, b]).unwrap();
        assert_eq!(meta_predict(&ensemble, array![2.0].view()), ClassLabel::Minority);
        assert_eq!(meta_predict(&ensemble, array![-2.0].view()), ClassLabel::Majority);
    }

    #[test]
    fn cascade_members_meet_their_rate_target_in_training() {
        let d = overlapping_dataset(60, 12, 6);
        let ensemble = balance_cascade(&d, 4, 5, 7).unwrap();
        assert!(!ensemble.members().is_empty());
        // Rebuild the pool trajectory and verify the tuning invariant on
        // the pool each member saw.
        let (majority, minority) = crate::dataset::class_partition(&d);
        let ratio = minority.len() as f64 / majority.len() as f64;
        let target = cascade_fpr_target(ratio, 4);
        let mut pool = majority;
        for member in ensemble.members() {
            let scores: Vec<f64> = pool.iter().map(|&i| boosted_score(member, d.row(i))).collect();
            let fp = scores.iter().filter(|&&s| s >= member.threshold_b).count();
            assert!(
                fp as f64 / scores.len() as f64 <= target + 1e-12,
                "member exceeds its false-positive target"
            );
            pool = pool
                .iter()
                .zip(&scores)
                .filter(|(_, &s)| s >= member.threshold_b)
                .map(|(&i, _)| i)
                .collect();
            if !pool.is_empty() {
                assert!(pool.len() < scores.len(), "pool must shrink while non-empty");
            }
        }
    }

    #[test]
    fn cascade_is_deterministic() {
        let d = overlapping_dataset(50, 10, 8);
        let a = balance_cascade(&d, 3, 4, 21).unwrap();
        let b = balance_cascade(&d, 3, 4, 21).unwrap();
        assert_eq!(a, b);
    }
}
