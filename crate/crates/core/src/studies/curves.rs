//! Posterior probability of the alternative as a function of the observed
//! data, and its average under a sampling distribution.

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bernoulli::{log_bf10_intrinsic_moment, BernoulliNull, BinData, MomentPriorSpec};
use crate::error::{Error, Result};
use crate::numeric::{log_binom_pmf, RngStream};
use crate::report::prob_from_log_bf10;
use crate::two_props::{log_bf10_intrinsic_moment2, TwoPropData, TwoPropHyper};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub y: u64,
    pub ybar: f64,
    pub log_bf10: f64,
    pub prob_m1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceCurve {
    pub spec: MomentPriorSpec,
    pub points: Vec<CurvePoint>,
}

/// `P(M1 | y)` for every `y = 0..=n`, once per prior specification.
pub fn evidence_curve(
    n: u64,
    null: BernoulliNull,
    specs: &[MomentPriorSpec],
) -> Result<Vec<EvidenceCurve>> {
    if n == 0 {
        return Err(Error::InvalidInput("evidence curve needs n >= 1".into()));
    }
    specs
        .iter()
        .map(|&spec| {
            let points = (0..=n)
                .map(|y| {
                    let l = log_bf10_intrinsic_moment(BinData::new(y, n)?, null, spec)?;
                    Ok(CurvePoint {
                        y,
                        ybar: y as f64 / n as f64,
                        log_bf10: l,
                        prob_m1: prob_from_log_bf10(l),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(EvidenceCurve { spec, points })
        })
        .collect()
}

/// `E[P(M0 | Y)]` for `Y ~ Bin(n, theta)`, by exact enumeration.
pub fn average_null_probability_bernoulli(
    theta: f64,
    n: u64,
    null: BernoulliNull,
    spec: MomentPriorSpec,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Domain(format!("theta out of range: {theta}")));
    }
    let terms = (0..=n)
        .into_par_iter()
        .map(|y| {
            let w = log_binom_pmf(y, n, theta)?.exp();
            if w == 0.0 {
                return Ok(0.0);
            }
            let l = log_bf10_intrinsic_moment(BinData::new(y, n)?, null, spec)?;
            Ok(w * prob_from_log_bf10(-l))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(crate::numeric::compensated_sum(&terms))
}

/// Monte Carlo estimate of `E[P(M0 | Y)]` with `Y1 ~ Bin(n1, theta1)` and
/// `Y2 ~ Bin(n2, theta2)`; returns the sample mean and its standard error.
pub fn average_null_probability_two_props(
    theta: (f64, f64),
    n: (u64, u64),
    hyper: &TwoPropHyper,
    replications: usize,
    rng: RngStream,
) -> Result<(f64, f64)> {
    if replications < 2 {
        return Err(Error::InvalidInput("need at least two replications".into()));
    }
    let b1 = Binomial::new(n.0, theta.0).map_err(|e| Error::Domain(e.to_string()))?;
    let b2 = Binomial::new(n.1, theta.1).map_err(|e| Error::Domain(e.to_string()))?;
    let probs = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut g = rng.derive(r as u64).rng();
            let d = TwoPropData::new(b1.sample(&mut g), n.0, b2.sample(&mut g), n.1)?;
            Ok(prob_from_log_bf10(-log_bf10_intrinsic_moment2(&d, hyper)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    let m = probs.iter().sum::<f64>() / replications as f64;
    let var = probs.iter().map(|p| (p - m).powi(2)).sum::<f64>() / (replications - 1) as f64;
    Ok((m, (var / replications as f64).sqrt()))
}
