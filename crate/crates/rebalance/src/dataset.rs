//! Dataset representation, class bookkeeping and the two headline metrics
//! (precision on the majority class, recall on the minority class).

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Binary class label. Serialized as `0` (majority) and `1` (minority) in
/// the CSV format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassLabel {
    Majority,
    Minority,
}

impl ClassLabel {
    pub fn as_u8(self) -> u8 {
        match self {
            ClassLabel::Majority => 0,
            ClassLabel::Minority => 1,
        }
    }

    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(ClassLabel::Majority),
            1 => Ok(ClassLabel::Minority),
            other => Err(Error::parse(format!("label must be 0 or 1, got {other}"))),
        }
    }

    pub fn other(self) -> Self {
        match self {
            ClassLabel::Majority => ClassLabel::Minority,
            ClassLabel::Minority => ClassLabel::Majority,
        }
    }
}

/// An immutable feature matrix with one binary label per row.
///
/// Every operation in this crate consumes and produces `Dataset`s; none
/// mutate their input.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<ClassLabel>,
}

impl Dataset {
    /// Builds a dataset, validating that row and label counts agree, that
    /// there is at least one feature column, and that every value is finite.
    pub fn new(features: Array2<f64>, labels: Vec<ClassLabel>) -> Result<Self> {
        if features.ncols() == 0 {
            return Err(Error::parameter("dataset needs at least one feature"));
        }
        if features.nrows() != labels.len() {
            return Err(Error::parameter(format!(
                "feature rows ({}) and labels ({}) disagree",
                features.nrows(),
                labels.len()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::parameter("features contain NaN or infinity"));
        }
        Ok(Dataset { features, labels })
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let features = self.features.select(Axis(0), indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Dataset { features, labels }
    }

    /// Appends rows with a fixed label; used by oversamplers.
    pub(crate) fn append_rows(&self, rows: &Array2<f64>, label: ClassLabel) -> Dataset {
        let mut features = Array2::zeros((self.n() + rows.nrows(), self.d()));
        features.slice_mut(ndarray::s![..self.n(), ..]).assign(&self.features);
        features.slice_mut(ndarray::s![self.n().., ..]).assign(rows);
        let mut labels = self.labels.clone();
        labels.extend(std::iter::repeat(label).take(rows.nrows()));
        Dataset { features, labels }
    }

    /// Counts rows labelled majority and minority, by label.
    pub fn label_counts(&self) -> (usize, usize) {
        let minority = self.labels.iter().filter(|l| **l == ClassLabel::Minority).count();
        (self.labels.len() - minority, minority)
    }
}

/// Index partition of a dataset into its larger and smaller class.
///
/// The majority side is the label with strictly more points; an exact tie
/// is resolved in favor of label 0.
pub fn class_partition(dataset: &Dataset) -> (Vec<usize>, Vec<usize>) {
    let mut zeros = Vec::new();
    let mut ones = Vec::new();
    for (i, label) in dataset.labels().iter().enumerate() {
        match label {
            ClassLabel::Majority => zeros.push(i),
            ClassLabel::Minority => ones.push(i),
        }
    }
    if ones.len() > zeros.len() {
        (ones, zeros)
    } else {
        (zeros, ones)
    }
}

/// The ratio r = |S|/|L| of minority to majority class sizes.
pub fn imbalance_ratio(dataset: &Dataset) -> Result<f64> {
    let (majority, minority) = class_partition(dataset);
    if majority.is_empty() {
        return Err(Error::RatioUndefined);
    }
    Ok(minority.len() as f64 / majority.len() as f64)
}

/// Per-class counts before and after a resampling step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResampleReport {
    pub n_majority_before: usize,
    pub n_minority_before: usize,
    pub n_majority_after: usize,
    pub n_minority_after: usize,
}

impl ResampleReport {
    /// Builds a report from the actual class counts of the input and output
    /// datasets. Which label counts as majority is decided once, on the
    /// input, so heavy undersampling cannot flip the report's sides.
    pub fn from_datasets(before: &Dataset, after: &Dataset) -> Self {
        let (majority_b, minority_b) = class_partition(before);
        let majority_label = majority_b
            .first()
            .map_or(ClassLabel::Majority, |&i| before.labels()[i]);
        let majority_a = after
            .labels()
            .iter()
            .filter(|l| **l == majority_label)
            .count();
        ResampleReport {
            n_majority_before: majority_b.len(),
            n_minority_before: minority_b.len(),
            n_majority_after: majority_a,
            n_minority_after: after.n() - majority_a,
        }
    }
}

/// Binary confusion counts. `fn_minority` (minority predicted majority) are
/// the false positives of the majority class and vice versa.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub tp_minority: usize,
    pub fn_minority: usize,
    pub tp_majority: usize,
    pub fn_majority: usize,
}

impl ConfusionMatrix {
    pub fn from_predictions(truth: &[ClassLabel], predicted: &[ClassLabel]) -> Self {
        assert_eq!(truth.len(), predicted.len());
        let mut cm = ConfusionMatrix::default();
        for (t, p) in truth.iter().zip(predicted) {
            match (t, p) {
                (ClassLabel::Minority, ClassLabel::Minority) => cm.tp_minority += 1,
                (ClassLabel::Minority, ClassLabel::Majority) => cm.fn_minority += 1,
                (ClassLabel::Majority, ClassLabel::Majority) => cm.tp_majority += 1,
                (ClassLabel::Majority, ClassLabel::Minority) => cm.fn_majority += 1,
            }
        }
        cm
    }

    pub fn total(&self) -> usize {
        self.tp_minority + self.fn_minority + self.tp_majority + self.fn_majority
    }
}

/// The two benchmark metrics. A metric whose denominator is zero is
/// reported as `None`, never silently as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalMetrics {
    pub precision_majority: Option<f64>,
    pub recall_minority: Option<f64>,
}

/// Precision on the majority class and recall on the minority class.
pub fn metrics(confusion: &ConfusionMatrix) -> EvalMetrics {
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            None
        } else {
            Some(num as f64 / den as f64)
        }
    };
    EvalMetrics {
        precision_majority: ratio(
            confusion.tp_majority,
            confusion.tp_majority + confusion.fn_minority,
        ),
        recall_minority: ratio(
            confusion.tp_minority,
            confusion.tp_minority + confusion.fn_minority,
        ),
    }
}

/// Rounds to two decimals, half away from zero; used only when printing
/// human-readable tables.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    pub(crate) fn labels(zeros: usize, ones: usize) -> Vec<ClassLabel> {
        let mut v = vec![ClassLabel::Majority; zeros];
        v.extend(vec![ClassLabel::Minority; ones]);
        v
    }

    fn dataset_with_counts(majority: usize, minority: usize) -> Dataset {
        let n = majority + minority;
        let features = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64);
        Dataset::new(features, labels(majority, minority)).unwrap()
    }

    #[test]
    fn rejects_mismatched_lengths() {
        let features = array![[0.0, 1.0], [2.0, 3.0]];
        assert!(Dataset::new(features, vec![ClassLabel::Majority]).is_err());
    }

    #[test]
    fn rejects_non_finite_values() {
        let features = array![[0.0, f64::NAN]];
        assert!(Dataset::new(features, vec![ClassLabel::Majority]).is_err());
    }

    #[test]
    fn imbalance_ratio_paper_counts() {
        let d = dataset_with_counts(6320, 680);
        let r = imbalance_ratio(&d).unwrap();
        assert!((r - 680.0 / 6320.0).abs() < 1e-15);
        assert!((r - 0.1076).abs() < 1e-3);
    }

    #[test]
    fn imbalance_ratio_equal_classes() {
        let d = dataset_with_counts(5, 5);
        assert_eq!(imbalance_ratio(&d).unwrap(), 1.0);
    }

    #[test]
    fn imbalance_ratio_half() {
        let d = dataset_with_counts(1360, 680);
        assert_eq!(imbalance_ratio(&d).unwrap(), 0.5);
    }

    #[test]
    fn imbalance_ratio_empty_dataset_is_undefined() {
        let d = Dataset::new(Array2::zeros((0, 2)), vec![]).unwrap();
        assert!(matches!(imbalance_ratio(&d), Err(Error::RatioUndefined)));
    }

    #[test]
    fn partition_direct_count() {
        let d = dataset_with_counts(3, 1);
        let (majority, minority) = class_partition(&d);
        assert_eq!(majority, vec![0, 1, 2]);
        assert_eq!(minority, vec![3]);
    }

    #[test]
    fn partition_tie_prefers_label_zero() {
        let d = dataset_with_counts(1, 1);
        let (majority, minority) = class_partition(&d);
        assert_eq!(majority, vec![0]);
        assert_eq!(minority, vec![1]);
    }

    #[test]
    fn partition_inverted_counts() {
        let features = Array2::zeros((3, 1));
        let d = Dataset::new(
            features,
            vec![ClassLabel::Majority, ClassLabel::Minority, ClassLabel::Minority],
        )
        .unwrap();
        let (majority, minority) = class_partition(&d);
        assert_eq!(majority, vec![1, 2]);
        assert_eq!(minority, vec![0]);
    }

    #[test]
    fn metrics_direct_substitution() {
        let cm = ConfusionMatrix {
            tp_majority: 90,
            fn_minority: 10,
            tp_minority: 0,
            fn_majority: 0,
        };
        let m = metrics(&cm);
        assert_eq!(m.precision_majority, Some(0.9));
        assert_eq!(m.recall_minority, Some(0.0));
    }

    #[test]
    fn metrics_perfect_recall() {
        let cm = ConfusionMatrix {
            tp_minority: 25,
            fn_minority: 0,
            tp_majority: 70,
            fn_majority: 5,
        };
        let m = metrics(&cm);
        assert_eq!(m.recall_minority, Some(1.0));
    }

    #[test]
    fn metrics_absent_on_zero_denominator() {
        let cm = ConfusionMatrix::default();
        let m = metrics(&cm);
        assert_eq!(m.precision_majority, None);
        assert_eq!(m.recall_minority, None);
    }

    #[test]
    fn recall_equals_tp_over_minority_total() {
        let truth = labels(4, 6);
        let mut predicted = truth.clone();
        predicted[4] = ClassLabel::Majority;
        predicted[5] = ClassLabel::Majority;
        let cm = ConfusionMatrix::from_predictions(&truth, &predicted);
        assert_eq!(cm.total(), truth.len());
        let m = metrics(&cm);
        assert_eq!(m.recall_minority, Some(4.0 / 6.0));
    }

    #[test]
    fn round2_half_away_from_zero() {
        assert_eq!(round2(0.125), 0.13);
        assert_eq!(round2(-0.125), -0.13);
        assert_eq!(round2(0.896), 0.9);
    }

    proptest! {
        #[test]
        fn partition_disjoint_exhaustive(zeros in 0usize..40, ones in 0usize..40) {
            prop_assume!(zeros + ones > 0);
            let d = dataset_with_counts(zeros, ones);
            let (majority, minority) = class_partition(&d);
            let mut all: Vec<usize> = majority.iter().chain(minority.iter()).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..zeros + ones).collect::<Vec<_>>());
            prop_assert!(majority.len() >= minority.len());
        }

        #[test]
        fn metrics_in_unit_interval(tp_s in 0usize..50, fn_s in 0usize..50,
                                    tp_l in 0usize..50, fn_l in 0usize..50) {
            let cm = ConfusionMatrix {
                tp_minority: tp_s,
                fn_minority: fn_s,
                tp_majority: tp_l,
                fn_majority: fn_l,
            };
            let m = metrics(&cm);
            for v in [m.precision_majority, m.recall_minority].into_iter().flatten() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
