//! Regularized, class-weighted logistic regression.
//!
//! Fitting standardizes features to the training mean and variance, then
//! minimizes the weighted negative log-likelihood plus `penalty / strength`
//! on the non-bias coordinates: gradient descent with backtracking line
//! search for L2, proximal (soft-threshold) steps for L1. The
//! standardization is stored in the model and replayed at prediction.

use ndarray::{Array1, Array2, ArrayView2};

use crate::dataset::{ClassLabel, Dataset};
use crate::error::{Error, Result};

use super::{ClassWeights, Penalty};

/// Logistic regression parameters: `theta` holds one coefficient per
/// feature with the bias last, expressed in standardized feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub theta: Vec<f64>,
    pub penalty: Penalty,
    pub strength: f64,
    pub class_weights: ClassWeights,
    /// Training-set feature means, replayed at prediction.
    pub feature_means: Vec<f64>,
    /// Training-set feature standard deviations, replayed at prediction.
    pub feature_stds: Vec<f64>,
}

impl LinearModel {
    /// Model with explicit parameters and identity standardization; handy
    /// for tests and loss evaluation at arbitrary coefficients.
    pub fn with_theta(theta: Vec<f64>, penalty: Penalty, strength: f64) -> Self {
        let d = theta.len() - 1;
        LinearModel {
            theta,
            penalty,
            strength,
            class_weights: ClassWeights::unit(),
            feature_means: vec![0.0; d],
            feature_stds: vec![1.0; d],
        }
    }

    pub fn n_features(&self) -> usize {
        self.theta.len() - 1
    }

    fn standardize(&self, points: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut z = points.to_owned();
        for mut row in z.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.feature_means[j]) / self.feature_stds[j];
            }
        }
        z
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.n_features() {
            return Err(Error::DimensionMismatch { expected: self.n_features(), got: d });
        }
        Ok(())
    }
}

/// Fitting controls. `strength` is the inverse-regularization constant C;
/// larger values regularize less.
#[derive(Debug, Clone)]
pub struct FitOptions {
    pub penalty: Penalty,
    pub strength: f64,
    pub class_weights: ClassWeights,
    /// Relative objective decrease below which fitting stops.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            penalty: Penalty::L2,
            strength: 1.0,
            class_weights: ClassWeights::unit(),
            tol: 1e-8,
            max_iters: 1000,
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(sigmoid(z)) without overflow for large |z|.
fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

/// Class weights inversely proportional to class size, normalized so the
/// weighted point count equals n: `w_j = n / (2 n_j)`.
pub fn balanced_weights(dataset: &Dataset) -> Result<ClassWeights> {
    let (n_majority, n_minority) = dataset.label_counts();
    if n_majority == 0 || n_minority == 0 {
        return Err(Error::EmptyClass(if n_majority == 0 { "majority" } else { "minority" }));
    }
    let n = dataset.n() as f64;
    Ok(ClassWeights {
        majority: n / (2.0 * n_majority as f64),
        minority: n / (2.0 * n_minority as f64),
    })
}

/// Design matrix in standardized space plus targets and per-point weights.
struct Problem {
    z: Array2<f64>, // n x (d+1), bias column of ones last
    y: Vec<f64>,    // 1 = minority, 0 = majority
    w: Vec<f64>,
}

impl Problem {
    fn build(model: &LinearModel, dataset: &Dataset, weights: &ClassWeights) -> Problem {
        let n = dataset.n();
        let d = dataset.d();
        let standardized = model.standardize(dataset.features());
        let mut z = Array2::ones((n, d + 1));
        z.slice_mut(ndarray::s![.., ..d]).assign(&standardized);
        let y: Vec<f64> = dataset
            .labels()
            .iter()
            .map(|l| if *l == ClassLabel::Minority { 1.0 } else { 0.0 })
            .collect();
        let w: Vec<f64> = dataset
            .labels()
            .iter()
            .map(|l| match l {
                ClassLabel::Minority => weights.minority,
                ClassLabel::Majority => weights.majority,
            })
            .collect();
        Problem { z, y, w }
    }

    /// Weighted negative log-likelihood.
    fn data_loss(&self, theta: &Array1<f64>) -> f64 {
        let scores = self.z.dot(theta);
        scores
            .iter()
            .zip(&self.y)
            .zip(&self.w)
            .map(|((&s, &y), &w)| {
                let log_p = if y > 0.5 { log_sigmoid(s) } else { log_sigmoid(-s) };
                -w * log_p
            })
            .sum()
    }

    fn data_grad(&self, theta: &Array1<f64>) -> Array1<f64> {
        let scores = self.z.dot(theta);
        let residual: Array1<f64> = scores
            .iter()
            .zip(&self.y)
            .zip(&self.w)
            .map(|((&s, &y), &w)| w * (sigmoid(s) - y))
            .collect();
        self.z.t().dot(&residual)
    }
}

fn penalty_term(theta: &Array1<f64>, penalty: Penalty, strength: f64) -> f64 {
    let d = theta.len() - 1;
    let body = match penalty {
        Penalty::L1 => theta.iter().take(d).map(|t| t.abs()).sum::<f64>(),
        Penalty::L2 => 0.5 * theta.iter().take(d).map(|t| t * t).sum::<f64>(),
    };
    body / strength
}

/// Weighted logistic loss of `model` on `dataset` under the given class
/// weights, including the `penalty / strength` term on non-bias
/// coordinates. Unit weights recover the plain negative log-likelihood.
pub fn weighted_log_loss(
    model: &LinearModel,
    dataset: &Dataset,
    class_weights: &ClassWeights,
) -> Result<f64> {
    model.check_dim(dataset.d())?;
    let problem = Problem::build(model, dataset, class_weights);
    let theta = Array1::from_vec(model.theta.clone());
    Ok(problem.data_loss(&theta) + penalty_term(&theta, model.penalty, model.strength))
}

/// Analytic gradient of [`weighted_log_loss`] with respect to `theta`.
/// For L1 the penalty contributes the subgradient `sign(theta) / strength`,
/// which matches finite differences away from zero coordinates.
pub fn loss_gradient(
    model: &LinearModel,
    dataset: &Dataset,
    class_weights: &ClassWeights,
) -> Result<Vec<f64>> {
    model.check_dim(dataset.d())?;
    let problem = Problem::build(model, dataset, class_weights);
    let theta = Array1::from_vec(model.theta.clone());
    let mut grad = problem.data_grad(&theta);
    let d = theta.len() - 1;
    for j in 0..d {
        grad[j] += match model.penalty {
            Penalty::L1 => theta[j].signum() / model.strength,
            Penalty::L2 => theta[j] / model.strength,
        };
    }
    Ok(grad.to_vec())
}

/// Fits logistic regression by minimizing the weighted penalized loss.
///
/// Theta starts at zero. Iteration stops once the relative objective
/// decrease drops below `tol` or the (generalized) gradient norm drops
/// below 1e-6; exhausting `max_iters` without either is an error.
pub fn fit_logistic(dataset: &Dataset, options: &FitOptions) -> Result<LinearModel> {
    if options.tol <= 0.0 {
        return Err(Error::parameter("tol must be positive"));
    }
    if options.strength <= 0.0 {
        return Err(Error::parameter("strength must be positive"));
    }
    if dataset.n() == 0 {
        return Err(Error::parameter("cannot fit on an empty dataset"));
    }
    let d = dataset.d();
    let n = dataset.n() as f64;

    let mut means = vec![0.0; d];
    let mut stds = vec![0.0; d];
    let features = dataset.features();
    for j in 0..d {
        let col = features.column(j);
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        means[j] = mean;
        stds[j] = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
    }

    let mut model = LinearModel {
        theta: vec![0.0; d + 1],
        penalty: options.penalty,
        strength: options.strength,
        class_weights: options.class_weights,
        feature_means: means,
        feature_stds: stds,
    };
    let problem = Problem::build(&model, dataset, &options.class_weights);
    let lambda = 1.0 / options.strength;

    // Smooth part: data loss, plus the L2 penalty when applicable. The L1
    // penalty stays non-smooth and is handled by the proximal step.
    let smooth = |t: &Array1<f64>| -> f64 {
        let mut v = problem.data_loss(t);
        if options.penalty == Penalty::L2 {
            v += penalty_term(t, Penalty::L2, options.strength);
        }
        v
    };
    let smooth_grad = |t: &Array1<f64>| -> Array1<f64> {
        let mut g = problem.data_grad(t);
        if options.penalty == Penalty::L2 {
            for j in 0..d {
                g[j] += t[j] * lambda;
            }
        }
        g
    };
    let nonsmooth = |t: &Array1<f64>| -> f64 {
        if options.penalty == Penalty::L1 {
            penalty_term(t, Penalty::L1, options.strength)
        } else {
            0.0
        }
    };

    // Proximal gradient descent with backtracking line search, plus
    // Nesterov momentum restarted whenever it would raise the objective;
    // the accepted objective sequence is therefore non-increasing.
    let mut theta: Array1<f64> = Array1::zeros(d + 1);
    let mut theta_prev = theta.clone();
    let mut objective = smooth(&theta) + nonsmooth(&theta);
    let mut step = 1.0 / n.max(1.0);
    let mut momentum = 1.0f64;

    for iter in 0..options.max_iters {
        let beta = (momentum - 1.0)
            / (0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()));
        momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());

        let mut restarted = false;
        let (next_theta, next_objective) = loop {
            let probe = if restarted {
                theta.clone()
            } else {
                &theta + &((&theta - &theta_prev) * beta)
            };
            let f_probe = smooth(&probe);
            let grad = smooth_grad(&probe);

            // Shrink the step until the smooth part is majorized by its
            // quadratic model at the probe point.
            step *= 2.0;
            let accepted = loop {
                let mut candidate = &probe - &(&grad * step);
                if options.penalty == Penalty::L1 {
                    let shrink = step * lambda;
                    for j in 0..d {
                        let t = candidate[j];
                        candidate[j] = t.signum() * (t.abs() - shrink).max(0.0);
                    }
                }
                let f_candidate = smooth(&candidate);
                let diff = &candidate - &probe;
                let bound = f_probe + diff.dot(&grad) + diff.dot(&diff) / (2.0 * step);
                if f_candidate <= bound + 1e-12 * f_probe.abs().max(1.0) {
                    break Some((candidate, f_candidate));
                }
                step *= 0.5;
                if step < 1e-18 {
                    break None;
                }
            };

            match accepted {
                Some((candidate, f_candidate)) => {
                    let value = f_candidate + nonsmooth(&candidate);
                    if value <= objective || restarted {
                        break (candidate, value);
                    }
                    // Momentum overshot; retry the same iteration from theta.
                    momentum = 1.0;
                    restarted = true;
                }
                None => break (theta.clone(), objective),
            }
        };

        let decrease = objective - next_objective;
        let generalized_grad_norm = {
            let diff = &next_theta - &theta;
            (diff.dot(&diff)).sqrt() / step
        };
        theta_prev = theta;
        theta = next_theta;
        objective = next_objective.min(objective);

        let converged = decrease.abs() <= options.tol * objective.abs().max(1.0)
            || generalized_grad_norm < 1e-6;
        if converged {
            model.theta = theta.to_vec();
            return Ok(model);
        }
        if iter + 1 == options.max_iters {
            return Err(Error::NonConvergence {
                context: "logistic regression",
                iters: options.max_iters,
                last_value: objective,
                last_decrease: decrease,
            });
        }
    }

    // max_iters = 0 is rejected above in spirit; treat it as converged-at-start.
    model.theta = theta.to_vec();
    Ok(model)
}

/// Minority-class probabilities and thresholded labels for a block of
/// points. A point scores minority when its probability is at least 0.5,
/// so the all-zero model predicts minority everywhere.
pub fn predict_logistic(
    model: &LinearModel,
    points: ArrayView2<'_, f64>,
) -> Result<(Vec<ClassLabel>, Vec<f64>)> {
    model.check_dim(points.ncols())?;
    let z = model.standardize(points);
    let d = model.n_features();
    let scores: Vec<f64> = z
        .rows()
        .into_iter()
        .map(|row| {
            let mut s = model.theta[d];
            for j in 0..d {
                s += model.theta[j] * row[j];
            }
            sigmoid(s)
        })
        .collect();
    let labels = scores
        .iter()
        .map(|&p| if p >= 0.5 { ClassLabel::Minority } else { ClassLabel::Majority })
        .collect();
    Ok((labels, scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::Array2;
    use proptest::prelude::*;
    use rand::Rng;

    fn dataset_1d(majority_x: &[f64], minority_x: &[f64]) -> Dataset {
        let n = majority_x.len() + minority_x.len();
        let features = Array2::from_shape_fn((n, 1), |(i, _)| {
            if i < majority_x.len() { majority_x[i] } else { minority_x[i - majority_x.len()] }
        });
        let mut labels = vec![ClassLabel::Majority; majority_x.len()];
        labels.extend(vec![ClassLabel::Minority; minority_x.len()]);
        Dataset::new(features, labels).unwrap()
    }

    fn random_dataset(n: usize, d: usize, seed: u64) -> Dataset {
        let mut rng = crate::rng::stream(seed, "test.learn");
        let features = Array2::from_shape_fn((n, d), |_| rng.random_range(-2.0..2.0));
        let labels = (0..n)
            .map(|_| if rng.random_range(0.0..1.0) < 0.4 { ClassLabel::Minority } else { ClassLabel::Majority })
            .collect();
        Dataset::new(features, labels).unwrap()
    }

    #[test]
    fn zero_theta_loss_is_n_ln2() {
        let d = random_dataset(37, 3, 1);
        let model = LinearModel::with_theta(vec![0.0; 4], Penalty::L2, 1.0);
        let loss = weighted_log_loss(&model, &d, &ClassWeights::unit()).unwrap();
        assert_relative_eq!(loss, 37.0 * std::f64::consts::LN_2, max_relative = 1e-12);
    }

    #[test]
    fn doubling_weights_doubles_data_term() {
        let d = random_dataset(23, 2, 2);
        let mut rng = crate::rng::stream(3, "test.theta");
        let theta: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        // Huge strength makes the penalty term negligible relative to 1e-12.
        let model = LinearModel::with_theta(theta, Penalty::L2, 1e300);
        let w1 = ClassWeights { majority: 0.7, minority: 1.3 };
        let w2 = ClassWeights { majority: 1.4, minority: 2.6 };
        let l1 = weighted_log_loss(&model, &d, &w1).unwrap();
        let l2 = weighted_log_loss(&model, &d, &w2).unwrap();
        assert_relative_eq!(l2, 2.0 * l1, max_relative = 1e-12);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let d = random_dataset(19, 2, 4);
        let mut rng = crate::rng::stream(5, "test.grad");
        let theta: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
        let model = LinearModel::with_theta(theta.clone(), Penalty::L2, 2.0);
        let w = ClassWeights { majority: 0.8, minority: 1.9 };
        let grad = loss_gradient(&model, &d, &w).unwrap();

        let h = 1e-5;
        for j in 0..theta.len() {
            let mut plus = model.clone();
            plus.theta[j] += h;
            let mut minus = model.clone();
            minus.theta[j] -= h;
            let fd = (weighted_log_loss(&plus, &d, &w).unwrap()
                - weighted_log_loss(&minus, &d, &w).unwrap())
                / (2.0 * h);
            assert_relative_eq!(grad[j], fd, max_relative = 1e-5, epsilon = 1e-8);
        }
    }

    #[test]
    fn balanced_weights_formula() {
        let features = Array2::zeros((7000, 1));
        let mut labels = vec![ClassLabel::Majority; 6320];
        labels.extend(vec![ClassLabel::Minority; 680]);
        let d = Dataset::new(features, labels).unwrap();
        let w = balanced_weights(&d).unwrap();
        assert_relative_eq!(w.majority, 7000.0 / 12640.0, max_relative = 1e-15);
        assert_relative_eq!(w.minority, 7000.0 / 1360.0, max_relative = 1e-15);
    }

    #[test]
    fn balanced_weights_equal_classes_are_unit() {
        let d = dataset_1d(&[0.0, 1.0, 2.0], &[5.0, 6.0, 7.0]);
        let w = balanced_weights(&d).unwrap();
        assert_eq!(w.majority, 1.0);
        assert_eq!(w.minority, 1.0);
    }

    #[test]
    fn separable_data_reaches_perfect_training_accuracy() {
        // Oracle: a coarse grid over (slope, bias) on the 1-D problem
        // already finds a perfectly separating theta, so the optimizer must
        // too at any strength >= 1.
        let d = dataset_1d(&[-3.0, -2.5, -2.0, -1.5], &[1.5, 2.0, 2.5, 3.0]);
        let mut oracle_perfect = false;
        for slope10 in -40..=40 {
            for bias10 in -40..=40 {
                let model = LinearModel::with_theta(
                    vec![slope10 as f64 / 10.0, bias10 as f64 / 10.0],
                    Penalty::L2,
                    1.0,
                );
                let (labels, _) = predict_logistic(&model, d.features()).unwrap();
                if labels == d.labels() {
                    oracle_perfect = true;
                }
            }
        }
        assert!(oracle_perfect, "grid oracle found no separating parameters");

        for strength in [1.0, 10.0, 100.0] {
            let options = FitOptions { strength, ..FitOptions::default() };
            let model = fit_logistic(&d, &options).unwrap();
            let (labels, _) = predict_logistic(&model, d.features()).unwrap();
            assert_eq!(labels, d.labels(), "strength {strength}");
        }
    }

    #[test]
    fn strong_l1_zeroes_all_coefficients() {
        let d = random_dataset(40, 3, 6);
        let options = FitOptions {
            penalty: Penalty::L1,
            strength: 1e-3,
            ..FitOptions::default()
        };
        let model = fit_logistic(&d, &options).unwrap();
        for j in 0..3 {
            assert_eq!(model.theta[j], 0.0, "coefficient {j} not exactly zero");
        }
    }

    #[test]
    fn zero_model_predicts_minority_everywhere() {
        let model = LinearModel::with_theta(vec![0.0, 0.0, 0.0], Penalty::L2, 1.0);
        let points = Array2::from_shape_fn((5, 2), |(i, j)| (i + j) as f64);
        let (labels, scores) = predict_logistic(&model, points.view()).unwrap();
        assert!(labels.iter().all(|l| *l == ClassLabel::Minority));
        assert!(scores.iter().all(|&s| s == 0.5));
    }

    #[test]
    fn sign_flip_inverts_off_boundary_labels() {
        let model = LinearModel::with_theta(vec![1.0, -0.3], Penalty::L2, 1.0);
        let flipped = LinearModel::with_theta(vec![-1.0, 0.3], Penalty::L2, 1.0);
        let points = Array2::from_shape_fn((6, 1), |(i, _)| i as f64 - 2.7);
        let (a, sa) = predict_logistic(&model, points.view()).unwrap();
        let (b, _) = predict_logistic(&flipped, points.view()).unwrap();
        for i in 0..6 {
            if (sa[i] - 0.5).abs() > 1e-12 {
                assert_ne!(a[i], b[i]);
            }
        }
    }

    #[test]
    fn prediction_is_monotone_in_score() {
        let model = LinearModel::with_theta(vec![2.0, -1.0], Penalty::L2, 1.0);
        let points = Array2::from_shape_fn((50, 1), |(i, _)| i as f64 / 10.0 - 2.0);
        let (labels, scores) = predict_logistic(&model, points.view()).unwrap();
        for i in 1..50 {
            assert!(scores[i] >= scores[i - 1]);
            if labels[i - 1] == ClassLabel::Minority {
                assert_eq!(labels[i], ClassLabel::Minority);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let model = LinearModel::with_theta(vec![1.0, 1.0, 0.0], Penalty::L2, 1.0);
        let d = random_dataset(8, 3, 7);
        assert!(matches!(
            weighted_log_loss(&model, &d, &ClassWeights::unit()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn weight_scaling_preserves_unpenalized_argmin() {
        let d = dataset_1d(&[-2.0, -1.0, -0.5, 0.3], &[0.1, 0.8, 1.5, 2.2]);
        let base = ClassWeights { majority: 1.0, minority: 2.0 };
        let scaled = ClassWeights { majority: 3.0, minority: 6.0 };
        // Near-infinite strength disables the penalty.
        let fit = |w: ClassWeights| {
            fit_logistic(
                &d,
                &FitOptions { strength: 1e12, class_weights: w, tol: 1e-12, max_iters: 5000, ..FitOptions::default() },
            )
            .unwrap()
        };
        let a = fit(base);
        let b = fit(scaled);
        for j in 0..2 {
            assert_relative_eq!(a.theta[j], b.theta[j], max_relative = 1e-3, epsilon = 1e-4);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// The penalized weighted loss is convex in theta.
        #[test]
        fn loss_is_convex(seed in 0u64..1000) {
            let d = random_dataset(15, 2, seed);
            let mut rng = crate::rng::stream(seed, "test.convex");
            let t1: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let t2: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let mid: Vec<f64> = t1.iter().zip(&t2).map(|(a, b)| (a + b) / 2.0).collect();
            let w = ClassWeights { majority: 0.6, minority: 1.7 };
            let loss = |t: Vec<f64>| {
                let m = LinearModel::with_theta(t, Penalty::L2, 0.7);
                weighted_log_loss(&m, &d, &w).unwrap()
            };
            let l_mid = loss(mid);
            let bound = 0.5 * (loss(t1) + loss(t2));
            prop_assert!(l_mid <= bound + 1e-12 * bound.abs().max(1.0));
        }

        /// The objective never increases across fit iterations; checked
        /// indirectly: the fitted objective is never above the starting
        /// objective at theta = 0.
        #[test]
        fn fitted_objective_not_above_start(seed in 0u64..500) {
            let d = random_dataset(30, 2, seed);
            let options = FitOptions::default();
            let model = fit_logistic(&d, &options).unwrap();
            let fitted = weighted_log_loss(&model, &d, &ClassWeights::unit()).unwrap();
            let start = 30.0 * std::f64::consts::LN_2;
            prop_assert!(fitted <= start + 1e-9);
        }
    }
}
