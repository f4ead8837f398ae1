//! Under-, over- and combined resampling of imbalanced binary datasets.
//!
//! Every sampler returns a new [`Dataset`] together with a
//! [`ResampleReport`] of the per-class counts before and after, and never
//! mutates its input. Undersamplers keep every minority point (with the
//! single exception of [`tomek_removal`] in [`TomekMode::Both`]);
//! oversamplers keep every majority point. With equal inputs, parameters
//! and seed the output is bit-identical.

mod over;
mod under;

pub use over::{borderline_smote, random_oversample, smote, BorderlineVariant};
pub use under::{
    cnn_undersample, enn_undersample, nearmiss, random_undersample, renn_undersample,
    tomek_removal, NearMissVariant, TomekMode,
};

use crate::dataset::{class_partition, Dataset, ResampleReport};
use crate::error::{Error, Result};

/// Desired minority-to-majority ratio |S|/|L| after resampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioTarget(f64);

impl RatioTarget {
    pub fn new(r: f64) -> Result<Self> {
        if r > 0.0 && r <= 1.0 {
            Ok(RatioTarget(r))
        } else {
            Err(Error::parameter(format!("ratio target must lie in (0, 1], got {r}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `ceil(count / ratio)`, snapping quotients that are integers up to
/// floating-point noise so that exact ratios give exact counts.
pub(crate) fn ceil_div(count: usize, ratio: f64) -> usize {
    let q = count as f64 / ratio;
    let snapped = q.round();
    if (q - snapped).abs() <= 1e-9 * snapped.abs().max(1.0) {
        snapped as usize
    } else {
        q.ceil() as usize
    }
}

/// `round(count * ratio)`, half away from zero.
pub(crate) fn round_mul(count: usize, ratio: f64) -> usize {
    (count as f64 * ratio).round() as usize
}

/// Class partition for samplers, which require both classes non-empty.
pub(crate) fn sampler_partition(dataset: &Dataset) -> Result<(Vec<usize>, Vec<usize>)> {
    let (majority, minority) = class_partition(dataset);
    if minority.is_empty() {
        return Err(Error::EmptyClass("minority"));
    }
    if majority.is_empty() {
        return Err(Error::EmptyClass("majority"));
    }
    Ok((majority, minority))
}

/// Builds the output dataset from surviving row indices (ascending) plus
/// the report against the input.
pub(crate) fn from_survivors(
    dataset: &Dataset,
    mut survivors: Vec<usize>,
) -> (Dataset, ResampleReport) {
    survivors.sort_unstable();
    let out = dataset.select(&survivors);
    let report = ResampleReport::from_datasets(dataset, &out);
    (out, report)
}

/// SMOTE+Tomek: SMOTE followed by majority-side Tomek link removal. The
/// report spans the whole pipeline.
pub fn smote_tomek(
    dataset: &Dataset,
    k: usize,
    r_target: RatioTarget,
    seed: u64,
) -> Result<(Dataset, ResampleReport)> {
    let (majority, _) = sampler_partition(dataset)?;
    let majority_label = dataset.labels()[majority[0]];
    let (oversampled, _) = smote(dataset, k, r_target, seed)?;
    let (cleaned, _) =
        under::tomek_with_majority(&oversampled, TomekMode::MajorityOnly, majority_label)?;
    let report = ResampleReport::from_datasets(dataset, &cleaned);
    Ok((cleaned, report))
}

/// SMOTE+ENN: SMOTE followed by edited-nearest-neighbor cleaning of the
/// majority class. The report spans the whole pipeline.
pub fn smote_enn(
    dataset: &Dataset,
    k_smote: usize,
    k_enn: usize,
    r_target: RatioTarget,
    seed: u64,
) -> Result<(Dataset, ResampleReport)> {
    let (majority, _) = sampler_partition(dataset)?;
    let majority_label = dataset.labels()[majority[0]];
    let (oversampled, _) = smote(dataset, k_smote, r_target, seed)?;
    let (cleaned, _) = under::enn_with_majority(&oversampled, k_enn, majority_label)?;
    let report = ResampleReport::from_datasets(dataset, &cleaned);
    Ok((cleaned, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ClassLabel;
    use ndarray::Array2;
    use proptest::prelude::*;

    /// Dataset with the requested class counts and mildly clustered
    /// coordinates, deterministic in `seed`.
    pub(crate) fn synthetic(majority: usize, minority: usize, seed: u64) -> Dataset {
        use rand::Rng;
        let mut rng = crate::rng::stream(seed, "test.synthetic");
        let n = majority + minority;
        let mut features = Array2::zeros((n, 2));
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let is_minority = i >= majority;
            let center = if is_minority { 2.0 } else { 0.0 };
            features[[i, 0]] = center + rng.random_range(-1.5..1.5);
            features[[i, 1]] = rng.random_range(-1.5..1.5);
            labels.push(if is_minority { ClassLabel::Minority } else { ClassLabel::Majority });
        }
        Dataset::new(features, labels).unwrap()
    }

    fn encode_rows(d: &Dataset) -> Vec<(Vec<u64>, ClassLabel)> {
        (0..d.n())
            .map(|i| {
                (
                    d.row(i).iter().map(|v| v.to_bits()).collect(),
                    d.labels()[i],
                )
            })
            .collect()
    }

    #[test]
    fn ceil_div_is_exact_on_exact_ratios() {
        assert_eq!(ceil_div(680, 0.5), 1360);
        assert_eq!(ceil_div(680, 0.1), 6800);
        assert_eq!(ceil_div(7, 0.3), 24); // 23.33.. rounds up
        assert_eq!(ceil_div(1, 1.0), 1);
    }

    #[test]
    fn round_mul_half_away() {
        assert_eq!(round_mul(6320, 0.5), 3160);
        assert_eq!(round_mul(5, 0.5), 3);
    }

    #[test]
    fn ratio_target_bounds() {
        assert!(RatioTarget::new(0.0).is_err());
        assert!(RatioTarget::new(1.5).is_err());
        assert!(RatioTarget::new(1.0).is_ok());
    }

    #[test]
    fn pipeline_reports_span_input_to_output() {
        let d = synthetic(60, 12, 5);
        let r = RatioTarget::new(0.5).unwrap();
        let (out, report) = smote_tomek(&d, 3, r, 9).unwrap();
        assert_eq!(report.n_majority_before, 60);
        assert_eq!(report.n_minority_before, 12);
        assert_eq!(report.n_minority_after, 30);
        let (majority_after, minority_after) = out.label_counts();
        assert_eq!(report.n_majority_after, majority_after);
        assert_eq!(report.n_minority_after, minority_after);
    }

    #[test]
    fn smote_enn_keeps_all_minority() {
        let d = synthetic(60, 12, 6);
        let r = RatioTarget::new(0.5).unwrap();
        let (out, report) = smote_enn(&d, 3, 5, r, 9).unwrap();
        assert_eq!(report.n_minority_after, 30);
        let (_, minority_after) = out.label_counts();
        assert_eq!(minority_after, 30);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// Every sampler leaves its input untouched, keeps every original
        /// minority row, and reports counts that match its actual output.
        #[test]
        fn samplers_preserve_input_and_minority(
            majority in 6usize..24,
            minority in 4usize..12,
            seed in 0u64..500,
        ) {
            prop_assume!(minority <= majority);
            let d = synthetic(majority, minority, seed);
            let before = encode_rows(&d);
            let r = RatioTarget::new(1.0).unwrap();
            let k = 3usize.min(minority - 1);

            let undersampled: Vec<(Dataset, ResampleReport)> = vec![
                random_undersample(&d, r, seed).unwrap(),
                nearmiss(&d, NearMissVariant::One, k, r, seed).unwrap(),
                nearmiss(&d, NearMissVariant::Two, k, r, seed).unwrap(),
                nearmiss(&d, NearMissVariant::Three, 2, r, seed).unwrap(),
                cnn_undersample(&d, seed).unwrap(),
                enn_undersample(&d, 3).unwrap(),
                renn_undersample(&d, 3, 100).unwrap(),
                tomek_removal(&d, TomekMode::MajorityOnly).unwrap(),
            ];
            let oversampled: Vec<(Dataset, ResampleReport)> = vec![
                random_oversample(&d, r, seed).unwrap(),
                smote(&d, k, r, seed).unwrap(),
                borderline_smote(&d, BorderlineVariant::One, 3, k, r, seed).unwrap(),
                borderline_smote(&d, BorderlineVariant::Two, 3, k, r, seed).unwrap(),
            ];
            let combined: Vec<(Dataset, ResampleReport)> = vec![
                smote_tomek(&d, k, r, seed).unwrap(),
                smote_enn(&d, k, 3, r, seed).unwrap(),
            ];

            // Input never mutated.
            prop_assert_eq!(encode_rows(&d), before.clone());

            let minority_rows: Vec<&(Vec<u64>, ClassLabel)> = before
                .iter()
                .filter(|(_, l)| *l == ClassLabel::Minority)
                .collect();

            for (out, report) in undersampled.iter().chain(&oversampled).chain(&combined) {
                let (majority_after, minority_after) = out.label_counts();
                prop_assert_eq!(report.n_majority_after, majority_after);
                prop_assert_eq!(report.n_minority_after, minority_after);
                prop_assert_eq!(report.n_majority_before, majority);
                prop_assert_eq!(report.n_minority_before, minority);

                // Every original minority row survives.
                let out_rows = encode_rows(out);
                for row in &minority_rows {
                    prop_assert!(out_rows.contains(row));
                }
            }

            // Undersamplers keep each original minority row exactly once.
            for (out, _) in undersampled.iter().chain(&combined) {
                let out_rows = encode_rows(out);
                for row in &minority_rows {
                    let hits = out_rows.iter().filter(|r| r == row).count();
                    prop_assert_eq!(hits, 1);
                }
            }

            // Oversamplers keep the input rows as an unchanged prefix and
            // only append.
            for (out, report) in &oversampled {
                prop_assert_eq!(report.n_majority_after, majority);
                let out_rows = encode_rows(out);
                prop_assert_eq!(&out_rows[..before.len()], &before[..]);
            }
        }

        /// Equal (input, parameters, seed) give bit-identical outputs.
        #[test]
        fn samplers_are_deterministic(seed in 0u64..500) {
            let d = synthetic(20, 8, seed);
            let r = RatioTarget::new(0.8).unwrap();
            let a = smote(&d, 3, r, seed).unwrap();
            let b = smote(&d, 3, r, seed).unwrap();
            prop_assert_eq!(encode_rows(&a.0), encode_rows(&b.0));
            let a = random_undersample(&d, r, seed).unwrap();
            let b = random_undersample(&d, r, seed).unwrap();
            prop_assert_eq!(encode_rows(&a.0), encode_rows(&b.0));
            let a = cnn_undersample(&d, seed).unwrap();
            let b = cnn_undersample(&d, seed).unwrap();
            prop_assert_eq!(encode_rows(&a.0), encode_rows(&b.0));
        }

        /// Undersampler outputs are row subsets of the input.
        #[test]
        fn undersampler_outputs_are_subsets(
            majority in 6usize..20,
            minority in 4usize..10,
            seed in 0u64..500,
        ) {
            prop_assume!(minority <= majority);
            let d = synthetic(majority, minority, seed);
            let before = encode_rows(&d);
            let r = RatioTarget::new(1.0).unwrap();
            for (out, _) in [
                random_undersample(&d, r, seed).unwrap(),
                nearmiss(&d, NearMissVariant::One, 2, r, seed).unwrap(),
                cnn_undersample(&d, seed).unwrap(),
                enn_undersample(&d, 3).unwrap(),
                tomek_removal(&d, TomekMode::Both).unwrap(),
            ] {
                for row in encode_rows(&out) {
                    prop_assert!(before.contains(&row));
                }
            }
        }
    }
}
