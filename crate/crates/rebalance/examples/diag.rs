//! Scratch diagnostics for generator calibration (not part of the build).

use rebalance::datagen::{generate_with_shape, pca_project, GenParams};
use rebalance::dataset::{metrics, ConfusionMatrix};
use rebalance::eval::{stratified_split, SplitSpec};
use rebalance::learn::{balanced_weights, fit_logistic, predict_logistic, ClassWeights, FitOptions};
use rebalance::resample::{
    cnn_undersample, enn_undersample, nearmiss, random_undersample, renn_undersample, smote,
    NearMissVariant, RatioTarget,
};

fn recall(train: &rebalance::Dataset, test: &rebalance::Dataset, w: ClassWeights) -> f64 {
    let options = FitOptions { class_weights: w, ..FitOptions::default() };
    let model = fit_logistic(train, &options).unwrap();
    let (pred, _) = predict_logistic(&model, test.features()).unwrap();
    let m = metrics(&ConfusionMatrix::from_predictions(test.labels(), &pred));
    m.recall_minority.unwrap_or(f64::NAN)
}

fn main() {
    if std::env::args().any(|a| a == "--dump") {
        let params = GenParams { seed: 1, ..GenParams::default() };
        let raw = rebalance::datagen::generate(&params).unwrap();
        let data = pca_project(&raw, 2).unwrap();
        std::fs::write("/tmp/dump2d.csv", rebalance::io::dataset_to_csv(&data)).unwrap();
        println!("dumped /tmp/dump2d.csv");
        return;
    }
    let args: Vec<String> = std::env::args().collect();
    let shape: Vec<f64> = args[1..8.min(args.len())]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let (ma, mp, cf, cs, df, dr, dd) = (shape[0], shape[1], shape[2], shape[3], shape[4], shape[5], shape[6]);
    println!("shape maj({ma},{mp}) co({cf},{cs}) door({df},{dr},{dd})  [paper: base .12 nm1 .32 nm2 .60 nm3 .20 cnn .39 enn .59 renn .80 und .82 wtd .89]");

    for seed in 1..=4u64 {
        let params = GenParams { seed, ..GenParams::default() };
        let raw = generate_with_shape(&params, ma, mp, cf, cs, df, dr, dd).unwrap();
        let data = pca_project(&raw, 2).unwrap();
        let spec = SplitSpec { seed, ..SplitSpec::default() };
        let (train, test) = stratified_split(&data, &spec).unwrap();

        let unit = ClassWeights::unit;
        let r = RatioTarget::new(0.5).unwrap();
        let base = recall(&train, &test, unit());
        let wtd = recall(&train, &test, balanced_weights(&train).unwrap());
        let und = recall(&random_undersample(&train, r, seed).unwrap().0, &test, unit());
        let smo = recall(&smote(&train, 5, r, seed).unwrap().0, &test, unit());
        let n1 = recall(&nearmiss(&train, NearMissVariant::One, 3, r, seed).unwrap().0, &test, unit());
        let n2 = recall(&nearmiss(&train, NearMissVariant::Two, 3, r, seed).unwrap().0, &test, unit());
        let n3 = recall(&nearmiss(&train, NearMissVariant::Three, 3, r, seed).unwrap().0, &test, unit());
        let (cnn_d, _) = cnn_undersample(&train, seed).unwrap();
        let cnn = recall(&cnn_d, &test, unit());
        let (enn_d, enn_rep) = enn_undersample(&train, 5).unwrap();
        let enn = recall(&enn_d, &test, unit());
        let (renn_d, _) = renn_undersample(&train, 5, 100).unwrap();
        let renn = recall(&renn_d, &test, unit());
        let enn_pct = 100.0 * (1.0 - enn_rep.n_majority_after as f64 / enn_rep.n_majority_before as f64);

        println!(
            "  seed {seed}: base {base:.2} nm1 {n1:.2} nm2 {n2:.2} nm3 {n3:.2} cnn {cnn:.2} enn {enn:.2}(-{enn_pct:.0}%) renn {renn:.2} und {und:.2} smo {smo:.2} wtd {wtd:.2}"
        );
    }
}
// Temporary dump hook appended for calibration; removed after use.
