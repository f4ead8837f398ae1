//! Learners: weighted logistic regression and discrete AdaBoost over
//! decision stumps.

mod boost;
mod logistic;

pub use boost::{boosted_predict, boosted_score, fit_adaboost, BoostedModel, Stump};
pub use logistic::{
    balanced_weights, fit_logistic, loss_gradient, predict_logistic, weighted_log_loss,
    FitOptions, LinearModel,
};

use crate::error::{Error, Result};

/// Regularization penalty on the non-bias coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Penalty {
    L1,
    L2,
}

impl Penalty {
    pub fn as_str(self) -> &'static str {
        match self {
            Penalty::L1 => "l1",
            Penalty::L2 => "l2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "l1" | "L1" => Ok(Penalty::L1),
            "l2" | "L2" => Ok(Penalty::L2),
            other => Err(Error::parse(format!("unknown penalty {other:?} (expected l1 or l2)"))),
        }
    }
}

/// Per-class loss weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassWeights {
    pub majority: f64,
    pub minority: f64,
}

impl ClassWeights {
    pub fn unit() -> Self {
        ClassWeights { majority: 1.0, minority: 1.0 }
    }
}
