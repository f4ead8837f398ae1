//! File formats: the project-wide dataset CSV, flat text records for
//! fitted models and resample reports.
//!
//! Dataset CSV: header `f1,...,fd,label`, label `0` (majority) or `1`
//! (minority), `\n` line endings. Reals are written in the shortest form
//! that parses back to the identical bit pattern, so write/read round
//! trips are exact.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array2, ArrayView1};

use crate::dataset::{ClassLabel, Dataset};
use crate::ensemble::{meta_predict, MetaEnsemble};
use crate::error::{Error, Result};
use crate::learn::{
    boosted_predict, predict_logistic, BoostedModel, ClassWeights, LinearModel, Penalty, Stump,
};

/// Serializes a dataset in the project CSV format.
pub fn dataset_to_csv(dataset: &Dataset) -> String {
    let d = dataset.d();
    let mut out = String::new();
    for j in 0..d {
        let _ = write!(out, "f{},", j + 1);
    }
    out.push_str("label\n");
    for i in 0..dataset.n() {
        for v in dataset.row(i).iter() {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{}", dataset.labels()[i].as_u8());
    }
    out
}

/// Parses the project CSV format.
pub fn dataset_from_csv(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.len() < 2 || headers.iter().last() != Some("label") {
        return Err(Error::parse(
            "dataset header must be f1,...,fd,label".to_string(),
        ));
    }
    let d = headers.len() - 1;

    let mut values: Vec<f64> = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != d + 1 {
            return Err(Error::parse(format!(
                "row {} has {} fields, expected {}",
                labels.len() + 2,
                record.len(),
                d + 1
            )));
        }
        for field in record.iter().take(d) {
            let v: f64 = field
                .parse()
                .map_err(|e| Error::parse(format!("bad feature value {field:?}: {e}")))?;
            values.push(v);
        }
        let label_field = record.get(d).unwrap();
        let code: u8 = label_field
            .parse()
            .map_err(|e| Error::parse(format!("bad label {label_field:?}: {e}")))?;
        labels.push(ClassLabel::from_u8(code)?);
    }

    let n = labels.len();
    let features = Array2::from_shape_vec((n, d), values)
        .map_err(|e| Error::parse(format!("shape error: {e}")))?;
    Dataset::new(features, labels)
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    dataset_from_csv(&std::fs::read_to_string(path)?)
}

pub fn write_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    Ok(std::fs::write(path, dataset_to_csv(dataset))?)
}

/// Any fitted model the CLI can train, plot or reload.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Logistic(LinearModel),
    Boosted(BoostedModel),
    Meta(MetaEnsemble),
}

impl Model {
    pub fn predict_point(&self, point: ArrayView1<'_, f64>) -> Result<ClassLabel> {
        match self {
            Model::Logistic(m) => {
                let row = point.insert_axis(ndarray::Axis(0));
                let (labels, _) = predict_logistic(m, row)?;
                Ok(labels[0])
            }
            Model::Boosted(m) => Ok(boosted_predict(m, point)),
            Model::Meta(m) => Ok(meta_predict(m, point)),
        }
    }
}

fn push_floats(out: &mut String, key: &str, values: &[f64]) {
    let _ = write!(out, "{key}");
    for v in values {
        let _ = write!(out, " {v}");
    }
    out.push('\n');
}

fn boosted_to_string(out: &mut String, model: &BoostedModel) {
    let _ = writeln!(out, "threshold_b {}", model.threshold_b);
    let _ = writeln!(out, "stumps {}", model.stumps.len());
    for (stump, alpha) in model.stumps.iter().zip(&model.alphas) {
        let _ = writeln!(
            out,
            "stump {} {} {} {}",
            stump.feature_index, stump.threshold, stump.polarity, alpha
        );
    }
}

/// Serializes a model as a flat text record.
pub fn model_to_string(model: &Model) -> String {
    let mut out = String::new();
    match model {
        Model::Logistic(m) => {
            out.push_str("model logistic\n");
            let _ = writeln!(out, "penalty {}", m.penalty.as_str());
            let _ = writeln!(out, "strength {}", m.strength);
            let _ = writeln!(out, "weight_majority {}", m.class_weights.majority);
            let _ = writeln!(out, "weight_minority {}", m.class_weights.minority);
            push_floats(&mut out, "means", &m.feature_means);
            push_floats(&mut out, "stds", &m.feature_stds);
            push_floats(&mut out, "theta", &m.theta);
        }
        Model::Boosted(m) => {
            out.push_str("model adaboost\n");
            boosted_to_string(&mut out, m);
        }
        Model::Meta(m) => {
            out.push_str("model meta\n");
            let _ = writeln!(out, "members {}", m.members().len());
            for member in m.members() {
                out.push_str("member\n");
                boosted_to_string(&mut out, member);
            }
        }
    }
    out
}

/// Line-oriented token cursor over a flat text record.
struct Records<'a> {
    lines: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> Records<'a> {
    fn new(text: &'a str) -> Self {
        Records { lines: text.lines(), line_no: 0 }
    }

    fn next_line(&mut self) -> Result<Vec<&'a str>> {
        loop {
            self.line_no += 1;
            match self.lines.next() {
                None => return Err(Error::parse("unexpected end of model file".to_string())),
                Some(line) if line.trim().is_empty() => continue,
                Some(line) => return Ok(line.split_whitespace().collect()),
            }
        }
    }

    fn expect(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let tokens = self.next_line()?;
        if tokens.first() != Some(&key) {
            return Err(Error::parse(format!(
                "line {}: expected {key:?}, found {:?}",
                self.line_no,
                tokens.first().copied().unwrap_or("")
            )));
        }
        Ok(tokens[1..].to_vec())
    }
}

fn parse_f64(token: &str) -> Result<f64> {
    token
        .parse()
        .map_err(|e| Error::parse(format!("bad number {token:?}: {e}")))
}

fn parse_usize(token: &str) -> Result<usize> {
    token
        .parse()
        .map_err(|e| Error::parse(format!("bad integer {token:?}: {e}")))
}

fn single<'a>(tokens: Vec<&'a str>, key: &str) -> Result<&'a str> {
    if tokens.len() != 1 {
        return Err(Error::parse(format!("{key} expects exactly one value")));
    }
    Ok(tokens[0])
}

fn boosted_from_records(records: &mut Records<'_>) -> Result<BoostedModel> {
    let threshold_b = parse_f64(single(records.expect("threshold_b")?, "threshold_b")?)?;
    let n_stumps = parse_usize(single(records.expect("stumps")?, "stumps")?)?;
    let mut stumps = Vec::with_capacity(n_stumps);
    let mut alphas = Vec::with_capacity(n_stumps);
    for _ in 0..n_stumps {
        let tokens = records.expect("stump")?;
        if tokens.len() != 4 {
            return Err(Error::parse("stump expects 4 fields".to_string()));
        }
        let polarity = tokens[2]
            .parse::<i8>()
            .map_err(|e| Error::parse(format!("bad polarity {:?}: {e}", tokens[2])))?;
        if polarity != 1 && polarity != -1 {
            return Err(Error::parse(format!("polarity must be 1 or -1, got {polarity}")));
        }
        stumps.push(Stump {
            feature_index: parse_usize(tokens[0])?,
            threshold: parse_f64(tokens[1])?,
            polarity,
        });
        alphas.push(parse_f64(tokens[3])?);
    }
    Ok(BoostedModel { stumps, alphas, threshold_b })
}

/// Parses [`model_to_string`] output.
pub fn model_from_str(text: &str) -> Result<Model> {
    let mut records = Records::new(text);
    let kind = single(records.expect("model")?, "model")?.to_string();
    match kind.as_str() {
        "logistic" => {
            let penalty = Penalty::parse(single(records.expect("penalty")?, "penalty")?)?;
            let strength = parse_f64(single(records.expect("strength")?, "strength")?)?;
            let majority = parse_f64(single(records.expect("weight_majority")?, "weight_majority")?)?;
            let minority = parse_f64(single(records.expect("weight_minority")?, "weight_minority")?)?;
            let means = records
                .expect("means")?
                .iter()
                .map(|t| parse_f64(t))
                .collect::<Result<Vec<f64>>>()?;
            let stds = records
                .expect("stds")?
                .iter()
                .map(|t| parse_f64(t))
                .collect::<Result<Vec<f64>>>()?;
            let theta = records
                .expect("theta")?
                .iter()
                .map(|t| parse_f64(t))
                .collect::<Result<Vec<f64>>>()?;
            if theta.len() != means.len() + 1 || means.len() != stds.len() {
                return Err(Error::parse(
                    "inconsistent theta/means/stds lengths".to_string(),
                ));
            }
            Ok(Model::Logistic(LinearModel {
                theta,
                penalty,
                strength,
                class_weights: ClassWeights { majority, minority },
                feature_means: means,
                feature_stds: stds,
            }))
        }
        "adaboost" => Ok(Model::Boosted(boosted_from_records(&mut records)?)),
        "meta" => {
            let n_members = parse_usize(single(records.expect("members")?, "members")?)?;
            let mut members = Vec::with_capacity(n_members);
            for _ in 0..n_members {
                records.expect("member")?;
                members.push(boosted_from_records(&mut records)?);
            }
            Ok(Model::Meta(MetaEnsemble::new(members)?))
        }
        other => Err(Error::parse(format!("unknown model kind {other:?}"))),
    }
}

pub fn read_model(path: &Path) -> Result<Model> {
    model_from_str(&std::fs::read_to_string(path)?)
}

pub fn write_model(path: &Path, model: &Model) -> Result<()> {
    Ok(std::fs::write(path, model_to_string(model))?)
}

/// Serializes a resample report as a flat key/value record.
pub fn report_to_string(report: &crate::dataset::ResampleReport) -> String {
    format!(
        "n_majority_before {}\nn_minority_before {}\nn_majority_after {}\nn_minority_after {}\n",
        report.n_majority_before,
        report.n_minority_before,
        report.n_majority_after,
        report.n_minority_after
    )
}

/// Parses [`report_to_string`] output.
pub fn report_from_str(text: &str) -> Result<crate::dataset::ResampleReport> {
    let mut records = Records::new(text);
    let read = |records: &mut Records<'_>, key: &str| -> Result<usize> {
        parse_usize(single(records.expect(key)?, key)?)
    };
    Ok(crate::dataset::ResampleReport {
        n_majority_before: read(&mut records, "n_majority_before")?,
        n_minority_before: read(&mut records, "n_minority_before")?,
        n_majority_after: read(&mut records, "n_majority_after")?,
        n_minority_after: read(&mut records, "n_minority_after")?,
    })
}
