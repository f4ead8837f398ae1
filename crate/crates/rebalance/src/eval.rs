//! Experimental protocol: stratified splitting, cross-validated model
//! selection, and the benchmark runner that produces the method-comparison
//! tables.

use rand::seq::SliceRandom;

use crate::datagen::{generate, pca_project, GenParams};
use crate::dataset::{
    class_partition, metrics, ClassLabel, ConfusionMatrix, Dataset, EvalMetrics, ResampleReport,
};
use crate::ensemble::{balance_cascade, easy_ensemble, meta_predict, MetaEnsemble};
use crate::error::{Error, Result};
use crate::learn::{
    balanced_weights, fit_logistic, predict_logistic, ClassWeights, FitOptions, Penalty,
};
use crate::resample::{
    borderline_smote, cnn_undersample, enn_undersample, nearmiss, random_oversample,
    random_undersample, renn_undersample, smote, smote_enn, smote_tomek, tomek_removal,
    BorderlineVariant, NearMissVariant, RatioTarget, TomekMode,
};
use crate::rng::child_seed;

/// Train/test and cross-validation layout.
#[derive(Debug, Clone)]
pub struct SplitSpec {
    /// Fraction of each class routed to the training side.
    pub train_fraction: f64,
    pub folds: usize,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { train_fraction: 0.7, folds: 5, seed: 0 }
    }
}

impl SplitSpec {
    fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::parameter("train_fraction must lie in (0, 1)"));
        }
        if self.folds < 2 {
            return Err(Error::parameter("folds must be at least 2"));
        }
        Ok(())
    }
}

/// Splits per class at `train_fraction` (rounded, at least one point per
/// class on each side), after a seeded shuffle within each class. Row
/// order within each output follows the input.
pub fn stratified_split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    spec.validate()?;
    let (majority, minority) = class_partition(dataset);
    if majority.len() < 2 || minority.len() < 2 {
        return Err(Error::parameter(
            "stratified split needs at least 2 points per class",
        ));
    }

    let mut rng = crate::rng::stream(spec.seed, "split");
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [&majority, &minority] {
        let mut shuffled = class.to_vec();
        shuffled.shuffle(&mut rng);
        let n_train = ((spec.train_fraction * class.len() as f64).round() as usize)
            .clamp(1, class.len() - 1);
        train.extend_from_slice(&shuffled[..n_train]);
        test.extend_from_slice(&shuffled[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((dataset.select(&train), dataset.select(&test)))
}

/// Stratified k-fold indices: `(train, validation)` per fold, every row
/// validating exactly once and per-class fold sizes differing by at most
/// one.
pub fn kfold_indices(
    dataset: &Dataset,
    folds: usize,
    seed: u64,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if folds < 2 {
        return Err(Error::parameter("folds must be at least 2"));
    }
    let (majority, minority) = class_partition(dataset);
    if folds > minority.len() {
        return Err(Error::parameter(format!(
            "folds = {folds} exceeds the {} minority points",
            minority.len()
        )));
    }

    let mut rng = crate::rng::stream(seed, "kfold");
    let mut assignment = vec![0usize; dataset.n()];
    for class in [&majority, &minority] {
        let mut shuffled = class.to_vec();
        shuffled.shuffle(&mut rng);
        for (pos, &i) in shuffled.iter().enumerate() {
            assignment[i] = pos % folds;
        }
    }

    Ok((0..folds)
        .map(|f| {
            let mut train = Vec::new();
            let mut validation = Vec::new();
            for i in 0..dataset.n() {
                if assignment[i] == f {
                    validation.push(i);
                } else {
                    train.push(i);
                }
            }
            (train, validation)
        })
        .collect())
}

/// The regularization grid searched for every logistic fit.
pub const STRENGTH_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

fn f1(precision: Option<f64>, recall: Option<f64>) -> f64 {
    match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => 2.0 * p * r / (p + r),
        _ => 0.0,
    }
}

/// Mean of the per-class F1 scores; the model-selection criterion.
fn macro_f1(cm: &ConfusionMatrix) -> f64 {
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    let f1_minority = f1(
        ratio(cm.tp_minority, cm.tp_minority + cm.fn_majority),
        ratio(cm.tp_minority, cm.tp_minority + cm.fn_minority),
    );
    let f1_majority = f1(
        ratio(cm.tp_majority, cm.tp_majority + cm.fn_minority),
        ratio(cm.tp_majority, cm.tp_majority + cm.fn_majority),
    );
    (f1_minority + f1_majority) / 2.0
}

fn candidate_grid() -> Vec<(Penalty, f64)> {
    let mut grid = Vec::new();
    for &strength in &STRENGTH_GRID {
        grid.push((Penalty::L2, strength));
        grid.push((Penalty::L1, strength));
    }
    grid
}

fn evaluate_candidates(
    train: &Dataset,
    spec: &SplitSpec,
    class_weights: &ClassWeights,
    candidates: &[(Penalty, f64)],
) -> Result<(Penalty, f64)> {
    let folds = kfold_indices(train, spec.folds, spec.seed)?;
    let mut best: Option<(f64, (Penalty, f64))> = None;

    'candidates: for &(penalty, strength) in candidates {
        let options = FitOptions {
            penalty,
            strength,
            class_weights: *class_weights,
            ..FitOptions::default()
        };
        let mut score_sum = 0.0;
        for (train_idx, val_idx) in &folds {
            let fold_train = train.select(train_idx);
            let fold_val = train.select(val_idx);
            // A failed fold disqualifies the candidate.
            let Ok(model) = fit_logistic(&fold_train, &options) else {
                continue 'candidates;
            };
            let (predicted, _) = predict_logistic(&model, fold_val.features())?;
            let cm = ConfusionMatrix::from_predictions(fold_val.labels(), &predicted);
            score_sum += macro_f1(&cm);
        }
        let score = score_sum / folds.len() as f64;
        // Strict improvement keeps the earliest candidate on ties; the grid
        // is ordered by ascending strength with L2 before L1.
        if best.as_ref().map_or(true, |(s, _)| score > *s) {
            best = Some((score, (penalty, strength)));
        }
    }

    best.map(|(_, c)| c).ok_or_else(|| {
        Error::parameter("every grid candidate failed cross-validation".to_string())
    })
}

/// Selects `(penalty, strength)` by mean validation macro-F1 over
/// stratified folds; ties resolve to the smaller strength, then to L2.
pub fn grid_search_logistic(
    train: &Dataset,
    spec: &SplitSpec,
    class_weights: &ClassWeights,
) -> Result<(Penalty, f64)> {
    // Order candidates so the ascending-strength, L2-first tie rule falls
    // out of strict maximization.
    let mut grid = candidate_grid();
    grid.sort_by(|a, b| {
        a.1.total_cmp(&b.1)
            .then_with(|| (a.0 == Penalty::L1).cmp(&(b.0 == Penalty::L1)))
    });
    evaluate_candidates(train, spec, class_weights, &grid)
}

/// One line of the benchmark table.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub method: String,
    pub metrics: EvalMetrics,
    pub n_majority_after: usize,
    pub n_minority_after: usize,
    pub seed: u64,
    /// Failure note for methods that errored; such rows carry absent
    /// metrics and echo the unresampled training counts.
    pub note: Option<String>,
    /// Hash of the test set this row was evaluated on; identical across
    /// all rows of a run.
    pub test_hash: u64,
}

/// Benchmark method selector, in canonical table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Baseline,
    Weighted,
    RandomUnder,
    NearMiss1,
    NearMiss2,
    NearMiss3,
    Cnn,
    Enn,
    Renn,
    Tomek,
    RandomOver,
    Smote,
    Bsmote1,
    Bsmote2,
    SmoteTomek,
    SmoteEnn,
    EasyEnsemble,
    BalanceCascade,
}

impl Method {
    pub fn all() -> Vec<Method> {
        use Method::*;
        vec![
            Baseline, Weighted, RandomUnder, NearMiss1, NearMiss2, NearMiss3, Cnn, Enn, Renn,
            Tomek, RandomOver, Smote, Bsmote1, Bsmote2, SmoteTomek, SmoteEnn, EasyEnsemble,
            BalanceCascade,
        ]
    }

    pub fn name(self) -> &'static str {
        use Method::*;
        match self {
            Baseline => "baseline",
            Weighted => "weighted",
            RandomUnder => "random-under",
            NearMiss1 => "nearmiss1",
            NearMiss2 => "nearmiss2",
            NearMiss3 => "nearmiss3",
            Cnn => "cnn",
            Enn => "enn",
            Renn => "renn",
            Tomek => "tomek",
            RandomOver => "random-over",
            Smote => "smote",
            Bsmote1 => "bsmote1",
            Bsmote2 => "bsmote2",
            SmoteTomek => "smote-tomek",
            SmoteEnn => "smote-enn",
            EasyEnsemble => "easy-ensemble",
            BalanceCascade => "balance-cascade",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        Method::all()
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let valid: Vec<&str> = Method::all().iter().map(|m| m.name()).collect();
                Error::parse(format!(
                    "unknown method {s:?}; valid methods: {}",
                    valid.join(", ")
                ))
            })
    }
}

// Hyperparameters used by the benchmark, fixed to the values the methods
// are conventionally run with at ratio target 0.5: k = 3 for NearMiss,
// k = 5 for ENN/RENN and the SMOTE family, m = 10 for borderline danger
// detection, 10 boosting rounds with 10 (EasyEnsemble) or 4
// (BalanceCascade) members.
const BENCH_RATIO: f64 = 0.5;
const BENCH_NEARMISS_K: usize = 3;
const BENCH_ENN_K: usize = 5;
const BENCH_SMOTE_K: usize = 5;
const BENCH_BORDERLINE_M: usize = 10;
const BENCH_RENN_MAX_ITERS: usize = 100;
const BENCH_EASY_MEMBERS: usize = 10;
const BENCH_CASCADE_MEMBERS: usize = 4;
const BENCH_BOOST_ROUNDS: usize = 10;

/// Content hash of a dataset (features bit-patterns plus labels).
pub fn dataset_hash(dataset: &Dataset) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut absorb = |byte: u8| {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    };
    for v in dataset.features().iter() {
        for b in v.to_bits().to_le_bytes() {
            absorb(b);
        }
    }
    for l in dataset.labels() {
        absorb(l.as_u8());
    }
    h
}

fn resample_for(
    method: Method,
    train: &Dataset,
    seed: u64,
) -> Result<Option<(Dataset, ResampleReport)>> {
    let r = RatioTarget::new(BENCH_RATIO)?;
    let out = match method {
        Method::RandomUnder => Some(random_undersample(train, r, seed)?),
        Method::NearMiss1 => Some(nearmiss(train, NearMissVariant::One, BENCH_NEARMISS_K, r, seed)?),
        Method::NearMiss2 => Some(nearmiss(train, NearMissVariant::Two, BENCH_NEARMISS_K, r, seed)?),
        Method::NearMiss3 => Some(nearmiss(train, NearMissVariant::Three, BENCH_NEARMISS_K, r, seed)?),
        Method::Cnn => Some(cnn_undersample(train, seed)?),
        Method::Enn => Some(enn_undersample(train, BENCH_ENN_K)?),
        Method::Renn => Some(renn_undersample(train, BENCH_ENN_K, BENCH_RENN_MAX_ITERS)?),
        Method::Tomek => Some(tomek_removal(train, TomekMode::MajorityOnly)?),
        Method::RandomOver => Some(random_oversample(train, r, seed)?),
        Method::Smote => Some(smote(train, BENCH_SMOTE_K, r, seed)?),
        Method::Bsmote1 => Some(borderline_smote(
            train,
            BorderlineVariant::One,
            BENCH_BORDERLINE_M,
            BENCH_SMOTE_K,
            r,
            seed,
        )?),
        Method::Bsmote2 => Some(borderline_smote(
            train,
            BorderlineVariant::Two,
            BENCH_BORDERLINE_M,
            BENCH_SMOTE_K,
            r,
            seed,
        )?),
        Method::SmoteTomek => Some(smote_tomek(train, BENCH_SMOTE_K, r, seed)?),
        Method::SmoteEnn => Some(smote_enn(train, BENCH_SMOTE_K, BENCH_ENN_K, r, seed)?),
        Method::Baseline | Method::Weighted | Method::EasyEnsemble | Method::BalanceCascade => {
            None
        }
    };
    Ok(out)
}

/// Grid-searches, fits and evaluates a logistic model; returns test
/// metrics.
fn fit_and_score_logistic(
    fit_data: &Dataset,
    test: &Dataset,
    class_weights: &ClassWeights,
    cv: &SplitSpec,
) -> Result<EvalMetrics> {
    let (penalty, strength) = grid_search_logistic(fit_data, cv, class_weights)?;
    let options = FitOptions {
        penalty,
        strength,
        class_weights: *class_weights,
        ..FitOptions::default()
    };
    let model = fit_logistic(fit_data, &options)?;
    let (predicted, _) = predict_logistic(&model, test.features())?;
    Ok(metrics(&ConfusionMatrix::from_predictions(test.labels(), &predicted)))
}

fn run_method(
    method: Method,
    train: &Dataset,
    test: &Dataset,
    spec: &SplitSpec,
    method_seed: u64,
) -> Result<(EvalMetrics, usize, usize)> {
    let cv = SplitSpec {
        train_fraction: spec.train_fraction,
        folds: spec.folds,
        seed: child_seed(method_seed, "cv"),
    };
    let (train_majority, train_minority) = {
        let (majority, minority) = class_partition(train);
        (majority.len(), minority.len())
    };

    match method {
        Method::Baseline => {
            let m = fit_and_score_logistic(train, test, &ClassWeights::unit(), &cv)?;
            Ok((m, train_majority, train_minority))
        }
        Method::Weighted => {
            let weights = balanced_weights(train)?;
            let m = fit_and_score_logistic(train, test, &weights, &cv)?;
            Ok((m, train_majority, train_minority))
        }
        Method::EasyEnsemble | Method::BalanceCascade => {
            let ensemble: MetaEnsemble = if method == Method::EasyEnsemble {
                easy_ensemble(train, BENCH_EASY_MEMBERS, BENCH_BOOST_ROUNDS, method_seed)?
            } else {
                balance_cascade(train, BENCH_CASCADE_MEMBERS, BENCH_BOOST_ROUNDS, method_seed)?
            };
            let predicted: Vec<ClassLabel> = (0..test.n())
                .map(|i| meta_predict(&ensemble, test.row(i)))
                .collect();
            let m = metrics(&ConfusionMatrix::from_predictions(test.labels(), &predicted));
            Ok((m, train_majority, train_minority))
        }
        _ => {
            let (resampled, report) = resample_for(method, train, method_seed)?
                .expect("sampler methods always resample");
            let m = fit_and_score_logistic(&resampled, test, &ClassWeights::unit(), &cv)?;
            Ok((m, report.n_majority_after, report.n_minority_after))
        }
    }
}

/// Runs the full protocol: generate, project to two components, split,
/// then per method resample the training set only, select and fit a
/// model, and evaluate on the untouched test set.
///
/// The master seed fans out to generation, the split and every method;
/// the seeds inside `gen_params` and `spec` are overridden. Rows appear
/// in `methods` order; a failing method yields a row with absent metrics
/// and a note instead of aborting the run.
pub fn run_benchmark(
    gen_params: &GenParams,
    spec: &SplitSpec,
    methods: &[Method],
    seed: u64,
) -> Result<Vec<BenchmarkRow>> {
    spec.validate()?;
    let mut params = gen_params.clone();
    params.seed = child_seed(seed, "benchmark.gen");
    let raw = generate(&params)?;
    let data = pca_project(&raw, 2.min(raw.d()))?;

    let split_spec = SplitSpec {
        train_fraction: spec.train_fraction,
        folds: spec.folds,
        seed: child_seed(seed, "benchmark.split"),
    };
    let (train, test) = stratified_split(&data, &split_spec)?;
    let expected_hash = dataset_hash(&test);

    let (train_majority, train_minority) = {
        let (majority, minority) = class_partition(&train);
        (majority.len(), minority.len())
    };

    let mut rows = Vec::with_capacity(methods.len());
    for &method in methods {
        let method_seed = child_seed(seed, &format!("benchmark.method.{}", method.name()));
        // The test set reaches this scope only for final scoring; its hash
        // must stay constant across rows.
        let test_hash = dataset_hash(&test);
        debug_assert_eq!(test_hash, expected_hash);

        let row = match run_method(method, &train, &test, spec, method_seed) {
            Ok((metrics, n_majority_after, n_minority_after)) => BenchmarkRow {
                method: method.name().to_string(),
                metrics,
                n_majority_after,
                n_minority_after,
                seed,
                note: None,
                test_hash,
            },
            Err(err) => {
                log::warn!("method {} failed: {err}", method.name());
                BenchmarkRow {
                    method: method.name().to_string(),
                    metrics: EvalMetrics { precision_majority: None, recall_minority: None },
                    n_majority_after: train_majority,
                    n_minority_after: train_minority,
                    seed,
                    note: Some(err.to_string()),
                    test_hash,
                }
            }
        };
        rows.push(row);
    }
    Ok(rows)
}

/// Serializes rows as CSV: `method,precision_L,recall_S,n_L_after,
/// n_S_after,seed`, full precision, absent metrics as empty fields.
pub fn rows_to_csv(rows: &[BenchmarkRow]) -> String {
    let mut out = String::from("method,precision_L,recall_S,n_L_after,n_S_after,seed\n");
    for row in rows {
        let fmt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.method,
            fmt(row.metrics.precision_majority),
            fmt(row.metrics.recall_minority),
            row.n_majority_after,
            row.n_minority_after,
            row.seed
        ));
    }
    out
}

/// Parses [`rows_to_csv`] output back into rows (notes and hashes are not
/// serialized and come back empty).
pub fn rows_from_csv(text: &str) -> Result<Vec<BenchmarkRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::parse("empty benchmark CSV"))?;
    if header != "method,precision_L,recall_S,n_L_after,n_S_after,seed" {
        return Err(Error::parse(format!("unexpected benchmark header {header:?}")));
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::parse(format!("expected 6 fields, got {}", fields.len())));
        }
        let parse_metric = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse::<f64>()
                    .map(Some)
                    .map_err(|e| Error::parse(format!("bad metric {s:?}: {e}")))
            }
        };
        let parse_count = |s: &str| -> Result<usize> {
            s.parse::<usize>().map_err(|e| Error::parse(format!("bad count {s:?}: {e}")))
        };
        rows.push(BenchmarkRow {
            method: fields[0].to_string(),
            metrics: EvalMetrics {
                precision_majority: parse_metric(fields[1])?,
                recall_minority: parse_metric(fields[2])?,
            },
            n_majority_after: parse_count(fields[3])?,
            n_minority_after: parse_count(fields[4])?,
            seed: fields[5]
                .parse::<u64>()
                .map_err(|e| Error::parse(format!("bad seed {:?}: {e}", fields[5])))?,
            note: None,
            test_hash: 0,
        });
    }
    Ok(rows)
}

/// Human-readable table with metrics rounded to two decimals (half away
/// from zero); absent metrics print as `-`.
pub fn format_table(rows: &[BenchmarkRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<16} {:>12} {:>9} {:>10} {:>10} {:>12}\n",
        "method", "precision_L", "recall_S", "n_L_after", "n_S_after", "seed"
    ));
    for row in rows {
        let fmt = |v: Option<f64>| {
            v.map_or("-".to_string(), |x| format!("{:.2}", crate::dataset::round2(x)))
        };
        out.push_str(&format!(
            "{:<16} {:>12} {:>9} {:>10} {:>10} {:>12}\n",
            row.method,
            fmt(row.metrics.precision_majority),
            fmt(row.metrics.recall_minority),
            row.n_majority_after,
            row.n_minority_after,
            row.seed
        ));
    }
    out
}
