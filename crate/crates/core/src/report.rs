use serde::{Deserialize, Serialize};

/// A Bayes factor against the null together with the implied posterior
/// probability of the alternative under equal prior model probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvidenceReport {
    pub bf10: f64,
    pub log_bf10: f64,
    pub prob_m1: f64,
    /// Monte Carlo standard error of `log_bf10`, when it was estimated.
    pub mc_se: Option<f64>,
}

impl EvidenceReport {
    pub fn from_log_bf10(log_bf10: f64) -> Self {
        Self {
            bf10: log_bf10.exp(),
            log_bf10,
            prob_m1: prob_from_log_bf10(log_bf10),
            mc_se: None,
        }
    }

    pub fn with_mc_se(mut self, se: f64) -> Self {
        self.mc_se = Some(se);
        self
    }
}

/// `P(M1 | y) = BF10 / (1 + BF10)`.
pub fn posterior_prob_m1(bf10: f64) -> f64 {
    if bf10.is_infinite() {
        1.0
    } else {
        bf10 / (1.0 + bf10)
    }
}

/// `P(M1 | y)` from `ln BF10`, stable for large magnitudes.
pub fn prob_from_log_bf10(log_bf10: f64) -> f64 {
    if log_bf10 >= 0.0 {
        1.0 / (1.0 + (-log_bf10).exp())
    } else {
        let e = log_bf10.exp();
        e / (1.0 + e)
    }
}
