//! Simulated learning rates of Bayes factors against their asymptotic
//! slopes.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bernoulli::{log_bf10_intrinsic_moment, BernoulliNull, BinData, MomentPriorSpec};
use crate::error::{Error, Result};
use crate::numeric::RngStream;
use crate::report::prob_from_log_bf10;
use crate::two_props::{default_hyper, log_bf10_intrinsic_moment2_batch, TwoPropData};

use super::curves::average_null_probability_bernoulli;

pub const BOOTSTRAP_RESAMPLES: usize = 400;

/// Log-spaced sizes far enough out that the `O(1/n)` terms no longer bend
/// the fit on the `ln n` scale.
pub const DEFAULT_NULL_GRID: [u64; 5] = [1000, 1778, 3162, 5623, 10000];
/// Linear sizes; starting at 2000 keeps the `ln n` correction to the
/// linear decay small relative to `K*`.
pub const DEFAULT_ALT_GRID: [u64; 5] = [2000, 4000, 6000, 8000, 10000];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum RateModel {
    Bernoulli {
        null: BernoulliNull,
        spec: MomentPriorSpec,
    },
    /// Equal group sizes `n1 = n2 = n` with default hyperparameters.
    TwoProps { h: u32, t_plus: u64 },
}

impl RateModel {
    fn h(&self) -> u32 {
        match self {
            Self::Bernoulli { spec, .. } => spec.h,
            Self::TwoProps { h, .. } => *h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Truth {
    Bernoulli { theta: f64 },
    TwoProps { theta1: f64, theta2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Truth in the null: median `ln BF10` regressed on `ln n`.
    PolynomialInLogN,
    /// Truth in the alternative: median `ln BF01` regressed on `n`.
    LinearInN,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: u64,
    /// Median over replications of the regressed log Bayes factor.
    pub summary_log_bf: f64,
    pub mean_log_bf: f64,
    pub replications: usize,
    /// Average posterior probability of the null model.
    pub avg_prob_null: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub regime: Regime,
    pub expected_slope: f64,
    /// Percentile bootstrap interval for the slope, resampling replications.
    pub ci95: (f64, f64),
    pub k_star: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateStudy {
    pub points: Vec<RatePoint>,
    pub fit: RateFit,
}

/// `KL(Bern(p) || Bern(q))`.
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    let term = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    term(p, q) + term(1.0 - p, 1.0 - q)
}

/// Per-observation divergence rate `K*` from the truth to the null model.
///
/// For two groups of equal size the Kullback-Leibler projection onto
/// `theta1 = theta2` is the average of the two proportions.
pub fn k_star(model: &RateModel, truth: Truth) -> Result<f64> {
    match (model, truth) {
        (RateModel::Bernoulli { null, .. }, Truth::Bernoulli { theta }) => {
            Ok(bernoulli_kl(theta, null.theta0()))
        }
        (RateModel::TwoProps { .. }, Truth::TwoProps { theta1, theta2 }) => {
            let m = 0.5 * (theta1 + theta2);
            Ok(bernoulli_kl(theta1, m) + bernoulli_kl(theta2, m))
        }
        _ => Err(Error::InvalidInput("truth and model family differ".into())),
    }
}

fn is_null_truth(model: &RateModel, truth: Truth) -> bool {
    match (model, truth) {
        (RateModel::Bernoulli { null, .. }, Truth::Bernoulli { theta }) => theta == null.theta0(),
        (_, Truth::TwoProps { theta1, theta2 }) => theta1 == theta2,
        _ => false,
    }
}

pub(crate) fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Ordinary least squares `(slope, intercept)`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn simulate_point(
    model: &RateModel,
    truth: Truth,
    n: u64,
    replications: usize,
    stream: RngStream,
) -> Result<Vec<f64>> {
    match (model, truth) {
        (RateModel::Bernoulli { null, spec }, Truth::Bernoulli { theta }) => {
            let bin = Binomial::new(n, theta).map_err(|e| Error::Domain(e.to_string()))?;
            let ys: Vec<u64> = (0..replications)
                .map(|r| bin.sample(&mut stream.derive(r as u64).rng()))
                .collect();
            let mut distinct = ys.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let memo: HashMap<u64, f64> = distinct
                .par_iter()
                .map(|&y| {
                    Ok((
                        y,
                        log_bf10_intrinsic_moment(BinData::new(y, n)?, *null, *spec)?,
                    ))
                })
                .collect::<Result<_>>()?;
            Ok(ys.iter().map(|y| memo[y]).collect())
        }
        (RateModel::TwoProps { h, t_plus }, Truth::TwoProps { theta1, theta2 }) => {
            let hyper = default_hyper(n, n, *h, *t_plus)?;
            let b1 = Binomial::new(n, theta1).map_err(|e| Error::Domain(e.to_string()))?;
            let b2 = Binomial::new(n, theta2).map_err(|e| Error::Domain(e.to_string()))?;
            let ys: Vec<(u64, u64)> = (0..replications)
                .map(|r| {
                    let mut g = stream.derive(r as u64).rng();
                    (b1.sample(&mut g), b2.sample(&mut g))
                })
                .collect();
            let mut distinct = ys.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let memo: HashMap<(u64, u64), f64> = distinct
                .par_chunks(64)
                .map(|chunk| {
                    let data = chunk
                        .iter()
                        .map(|&(y1, y2)| TwoPropData::new(y1, n, y2, n))
                        .collect::<Result<Vec<_>>>()?;
                    let bfs = log_bf10_intrinsic_moment2_batch(&data, &hyper)?;
                    Ok(chunk.iter().copied().zip(bfs).collect::<Vec<_>>())
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .collect();
            Ok(ys.iter().map(|y| memo[y]).collect())
        }
        _ => Err(Error::InvalidInput("truth and model family differ".into())),
    }
}

/// Simulates `replications` data sets at each grid size and regresses the
/// median log Bayes factor on `ln n` (null truth) or `n` (alternative
/// truth).
pub fn learning_rate_sim(
    model: &RateModel,
    truth: Truth,
    n_grid: &[u64],
    replications: usize,
    rng: RngStream,
) -> Result<RateStudy> {
    if n_grid.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "rate fits need at least 5 grid points, got {}",
            n_grid.len()
        )));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) || n_grid[0] == 0 {
        return Err(Error::InvalidInput(
            "n grid must be positive and increasing".into(),
        ));
    }
    if replications == 0 {
        return Err(Error::InvalidInput("need at least one replication".into()));
    }
    let k = k_star(model, truth)?;
    let null_regime = is_null_truth(model, truth);
    let regime = if null_regime {
        Regime::PolynomialInLogN
    } else {
        Regime::LinearInN
    };
    let sign = if null_regime { 1.0 } else { -1.0 };

    let mut samples = Vec::with_capacity(n_grid.len());
    let mut points = Vec::with_capacity(n_grid.len());
    for (i, &n) in n_grid.iter().enumerate() {
        let mut v: Vec<f64> = simulate_point(model, truth, n, replications, rng.derive(i as u64))?
            .into_iter()
            .map(|l| sign * l)
            .collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let avg_prob_null = match (model, truth) {
            (RateModel::Bernoulli { null, spec }, Truth::Bernoulli { theta }) => {
                average_null_probability_bernoulli(theta, n, *null, *spec)?
            }
            _ => v.iter().map(|l| prob_from_log_bf10(-sign * l)).sum::<f64>() / v.len() as f64,
        };
        samples.push(v.clone());
        points.push(RatePoint {
            n,
            summary_log_bf: median(&mut v),
            mean_log_bf: mean,
            replications,
            avg_prob_null,
        });
    }

    let xs: Vec<f64> = n_grid
        .iter()
        .map(|&n| {
            if null_regime {
                (n as f64).ln()
            } else {
                n as f64
            }
        })
        .collect();
    let ys: Vec<f64> = points.iter().map(|p| p.summary_log_bf).collect();
    let (slope, intercept) = ols(&xs, &ys);

    let boot_stream = rng.derive(u64::MAX);
    let mut boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .into_par_iter()
        .map(|b| {
            let mut g = boot_stream.derive(b as u64).rng();
            let meds: Vec<f64> = samples
                .iter()
                .map(|s| {
                    let mut r: Vec<f64> = (0..s.len())
                        .map(|_| s[g.random_range(0..s.len())])
                        .collect();
                    median(&mut r)
                })
                .collect();
            ols(&xs, &meds).0
        })
        .collect();
    boot.sort_by(f64::total_cmp);
    let q = |p: f64| boot[((p * (boot.len() - 1) as f64).round()) as usize];

    let expected_slope = if null_regime {
        -(model.h() as f64) - 0.5
    } else {
        -k
    };
    Ok(RateStudy {
        points,
        fit: RateFit {
            slope,
            intercept,
            regime,
            expected_slope,
            ci95: (q(0.025), q(0.975)),
            k_star: (!null_regime).then_some(k),
        },
    })
}
