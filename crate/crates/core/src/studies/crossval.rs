//! Leave-one-out logarithmic scores of model-averaged forecasts on a single
//! two-group table.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::prob_from_log_bf10;
use crate::two_props::{
    default_hyper, log_bf10_intrinsic_moment2, posterior_means2, TwoPropData, TwoPropHyper,
};

/// Model-averaged probabilities of an occurrence in each group, fitted on
/// the table with one occurrence (`occ`) or one non-occurrence (`non`)
/// removed from that group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvForecasts {
    pub theta1_occ: f64,
    pub theta1_non: f64,
    pub theta2_occ: f64,
    pub theta2_non: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub h_set: Vec<u32>,
    pub t_plus: Vec<u64>,
    /// Mean logarithmic score per entry of `h_set`.
    pub scores: Vec<f64>,
    pub forecasts: Vec<CvForecasts>,
    /// `scores[k] - scores[0]`.
    pub deltas: Vec<f64>,
}

/// `ln p` for an occurrence, `ln(1 - p)` otherwise.
pub fn log_score(p: f64, occurred: bool) -> f64 {
    if occurred {
        p.ln()
    } else {
        (-p).ln_1p()
    }
}

/// Mean score over the `n1 + n2` units; empty blocks contribute nothing.
pub fn score_from_forecasts(table: &TwoPropData, f: &CvForecasts) -> f64 {
    let block = |count: u64, p: f64, occurred: bool| {
        if count == 0 {
            0.0
        } else {
            count as f64 * log_score(p, occurred)
        }
    };
    let total = block(table.y1, f.theta1_occ, true)
        + block(table.n1 - table.y1, f.theta1_non, false)
        + block(table.y2, f.theta2_occ, true)
        + block(table.n2 - table.y2, f.theta2_non, false);
    total / table.n_plus() as f64
}

/// Model-averaged posterior means of `(theta1, theta2)`.
pub fn averaged_means(data: &TwoPropData, hyper: &TwoPropHyper) -> Result<(f64, f64)> {
    let p1 = prob_from_log_bf10(log_bf10_intrinsic_moment2(data, hyper)?);
    let (m1, m2) = posterior_means2(data, hyper)?;
    let b0 = hyper.b0;
    let pooled = (b0 + data.y_plus() as f64) / (2.0 * b0 + data.n_plus() as f64);
    Ok((p1 * m1 + (1.0 - p1) * pooled, p1 * m2 + (1.0 - p1) * pooled))
}

/// Leave-one-out forecasts for every non-empty block of `table`.
///
/// Blocks with no members get `NaN`, which `score_from_forecasts` never
/// reads.
pub fn loo_forecasts(table: &TwoPropData, hyper: &TwoPropHyper) -> Result<CvForecasts> {
    let d = *table;
    let fit = |loo: Option<TwoPropData>, group1: bool| -> Result<f64> {
        match loo {
            None => Ok(f64::NAN),
            Some(l) => averaged_means(&l, hyper).map(|m| if group1 { m.0 } else { m.1 }),
        }
    };
    let drop1 = |occ: bool| {
        let ok = if occ { d.y1 > 0 } else { d.n1 > d.y1 };
        ok.then(|| TwoPropData {
            y1: d.y1 - u64::from(occ),
            n1: d.n1 - 1,
            ..d
        })
    };
    let drop2 = |occ: bool| {
        let ok = if occ { d.y2 > 0 } else { d.n2 > d.y2 };
        ok.then(|| TwoPropData {
            y2: d.y2 - u64::from(occ),
            n2: d.n2 - 1,
            ..d
        })
    };
    Ok(CvForecasts {
        theta1_occ: fit(drop1(true), true)?,
        theta1_non: fit(drop1(false), true)?,
        theta2_occ: fit(drop2(true), false)?,
        theta2_non: fit(drop2(false), false)?,
    })
}

/// Cross-validated mean log score for each `h` with hyperparameters
/// `default_hyper(n1, n2, h, t_plus[k])` taken from the full table.
pub fn cross_validation(table: &TwoPropData, h_set: &[u32], t_plus: &[u64]) -> Result<CvScore> {
    if table.n_plus() == 0 {
        return Err(Error::InvalidInput("table has no units".into()));
    }
    if h_set.is_empty() || h_set.len() != t_plus.len() {
        return Err(Error::Dimension {
            expected: h_set.len().max(1),
            got: t_plus.len(),
        });
    }
    let mut scores = Vec::with_capacity(h_set.len());
    let mut forecasts = Vec::with_capacity(h_set.len());
    for (&h, &tp) in h_set.iter().zip(t_plus) {
        let hyper = default_hyper(table.n1, table.n2, h, tp)?;
        let f = loo_forecasts(table, &hyper)?;
        scores.push(score_from_forecasts(table, &f));
        forecasts.push(f);
    }
    let deltas = scores.iter().map(|s| s - scores[0]).collect();
    Ok(CvScore {
        h_set: h_set.to_vec(),
        t_plus: t_plus.to_vec(),
        scores,
        forecasts,
        deltas,
    })
}
