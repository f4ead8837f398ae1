//! Discrete AdaBoost over axis-aligned decision stumps.
//!
//! Each round selects the exact minimum-weighted-error stump over every
//! (feature, midpoint threshold, polarity) candidate, deterministically:
//! error ties resolve to the lexicographically first candidate in that
//! ordering, with positive polarity before negative.

use ndarray::ArrayView1;

use crate::dataset::{ClassLabel, Dataset};
use crate::error::{Error, Result};

/// Axis-aligned threshold classifier. With polarity +1 it votes minority
/// exactly when `x[feature] >= threshold`; polarity -1 inverts the vote.
#[derive(Debug, Clone, PartialEq)]
pub struct Stump {
    pub feature_index: usize,
    pub threshold: f64,
    pub polarity: i8,
}

impl Stump {
    /// +1 for a minority vote, -1 for a majority vote.
    pub fn vote(&self, point: ArrayView1<'_, f64>) -> f64 {
        let side = if point[self.feature_index] >= self.threshold { 1.0 } else { -1.0 };
        side * f64::from(self.polarity)
    }
}

/// Weighted stump committee. `threshold_b` shifts the decision rule:
/// minority exactly when `score - threshold_b >= 0`. Fitting leaves it at
/// zero; cascade-style wrappers may tune it afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostedModel {
    pub stumps: Vec<Stump>,
    pub alphas: Vec<f64>,
    pub threshold_b: f64,
}

impl BoostedModel {
    pub fn rounds(&self) -> usize {
        self.stumps.len()
    }
}

/// Signed committee score `sum_j alpha_j * vote_j(x)`; additive under
/// model concatenation.
pub fn boosted_score(model: &BoostedModel, point: ArrayView1<'_, f64>) -> f64 {
    model
        .stumps
        .iter()
        .zip(&model.alphas)
        .map(|(stump, alpha)| alpha * stump.vote(point))
        .sum()
}

/// Thresholded committee label: minority when `score - threshold_b >= 0`.
pub fn boosted_predict(model: &BoostedModel, point: ArrayView1<'_, f64>) -> ClassLabel {
    if boosted_score(model, point) - model.threshold_b >= 0.0 {
        ClassLabel::Minority
    } else {
        ClassLabel::Majority
    }
}

/// Candidate thresholds per feature: midpoints between consecutive
/// distinct sorted values.
fn midpoints(values: &mut Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    values.dedup();
    values.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect()
}

/// Exact minimum-weighted-error stump. Returns `(stump, error)`.
fn best_stump(dataset: &Dataset, targets: &[f64], weights: &[f64]) -> (Stump, f64) {
    let n = dataset.n();
    let total_positive: f64 = weights
        .iter()
        .zip(targets)
        .filter(|(_, &y)| y > 0.0)
        .map(|(w, _)| w)
        .sum();
    let total_negative: f64 = weights.iter().sum::<f64>() - total_positive;

    let mut best: Option<(f64, Stump)> = None;
    let features = dataset.features();
    for feature in 0..dataset.d() {
        let column = features.column(feature);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| column[a].total_cmp(&column[b]).then(a.cmp(&b)));
        let mut values: Vec<f64> = column.to_vec();
        let thresholds = midpoints(&mut values);

        // Sweep the sorted column once per feature, tracking the weighted
        // class mass strictly below each threshold.
        let mut below_positive = 0.0;
        let mut below_negative = 0.0;
        let mut cursor = 0usize;
        for &threshold in &thresholds {
            while cursor < n && column[order[cursor]] < threshold {
                let i = order[cursor];
                if targets[i] > 0.0 {
                    below_positive += weights[i];
                } else {
                    below_negative += weights[i];
                }
                cursor += 1;
            }
            // polarity +1: errors are positives below and negatives at or
            // above the threshold.
            let err_plus = below_positive + (total_negative - below_negative);
            let err_minus = (total_positive - below_positive) + below_negative;
            for (polarity, err) in [(1i8, err_plus), (-1i8, err_minus)] {
                let candidate_better = match &best {
                    None => true,
                    Some((best_err, _)) => err < *best_err,
                };
                if candidate_better {
                    best = Some((err, Stump { feature_index: feature, threshold, polarity }));
                }
            }
        }
    }

    match best {
        Some((err, stump)) => (stump, err),
        // No thresholds exist (every feature constant): fall back to an
        // always-minority stump.
        None => {
            let stump = Stump { feature_index: 0, threshold: f64::NEG_INFINITY, polarity: 1 };
            let err = total_negative;
            (stump, err)
        }
    }
}

/// Fits discrete AdaBoost for up to `rounds` rounds.
///
/// Point weights start uniform; each accepted round contributes
/// `alpha = ln((1 - e) / e) / 2` and reweights points by `exp(-+alpha)`.
/// A round with zero error replaces the committee with that single perfect
/// stump; a round with error at or above one half is discarded and stops
/// training.
pub fn fit_adaboost(dataset: &Dataset, rounds: usize) -> Result<BoostedModel> {
    if rounds == 0 {
        return Err(Error::parameter("rounds must be at least 1"));
    }
    let n = dataset.n();
    let (n_majority, n_minority) = dataset.label_counts();
    if n_majority == 0 || n_minority == 0 {
        return Err(Error::EmptyClass(if n_majority == 0 { "majority" } else { "minority" }));
    }

    let targets: Vec<f64> = dataset
        .labels()
        .iter()
        .map(|l| if *l == ClassLabel::Minority { 1.0 } else { -1.0 })
        .collect();
    let mut weights = vec![1.0 / n as f64; n];
    let mut model = BoostedModel { stumps: Vec::new(), alphas: Vec::new(), threshold_b: 0.0 };
    let mut error_bound = 1.0;

    for _ in 0..rounds {
        let (stump, error) = best_stump(dataset, &targets, &weights);
        // Snap tolerances absorb prefix-sum rounding in the sweep.
        if error <= 1e-12 {
            model.stumps = vec![stump];
            model.alphas = vec![1.0];
            error_bound = 0.0;
            break;
        }
        if error >= 0.5 - 1e-12 {
            break;
        }
        let alpha = 0.5 * ((1.0 - error) / error).ln();
        error_bound *= 2.0 * (error * (1.0 - error)).sqrt();

        let mut total = 0.0;
        for i in 0..n {
            let margin = targets[i] * stump.vote(dataset.row(i));
            weights[i] *= (-alpha * margin).exp();
            total += weights[i];
        }
        for w in &mut weights {
            *w /= total;
        }
        model.stumps.push(stump);
        model.alphas.push(alpha);
    }

    debug_assert!(
        training_error_rate(&model, dataset) <= error_bound + 1e-9,
        "training error above the exponential-loss bound"
    );
    Ok(model)
}

/// Fraction of points the unthresholded committee misclassifies.
pub(crate) fn training_error_rate(model: &BoostedModel, dataset: &Dataset) -> f64 {
    let wrong = (0..dataset.n())
        .filter(|&i| boosted_predict_unthresholded(model, dataset.row(i)) != dataset.labels()[i])
        .count();
    wrong as f64 / dataset.n() as f64
}

fn boosted_predict_unthresholded(model: &BoostedModel, point: ArrayView1<'_, f64>) -> ClassLabel {
    if boosted_score(model, point) >= 0.0 {
        ClassLabel::Minority
    } else {
        ClassLabel::Majority
    }
}
