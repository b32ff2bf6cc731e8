//! Chib-Jeliazkov estimates of normalizing constants from Metropolis-Hastings
//! output, with delete-one-batch jackknife standard errors.

use super::mcmc::McmcRun;
use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, RngStream};

/// Number of contiguous batches used for jackknife error estimates.
pub const BATCHES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct CjEstimate {
    pub log_z: f64,
    pub se: f64,
    pub anchor: Vec<f64>,
    pub log_f_anchor: f64,
    /// Full estimate followed by the `BATCHES` delete-one-batch estimates.
    pub(crate) variants: Vec<f64>,
}

pub(crate) fn batch_bounds(n: usize, batches: usize) -> Vec<(usize, usize)> {
    (0..batches)
        .map(|b| (b * n / batches, (b + 1) * n / batches))
        .collect()
}

/// `ln mean` over all terms, then over all terms outside each batch, given
/// per-batch log-sum-exps and sizes.
pub(crate) fn log_mean_variants(batch_lse: &[f64], counts: &[usize]) -> Vec<f64> {
    let total: usize = counts.iter().sum();
    let mut out = Vec::with_capacity(batch_lse.len() + 1);
    out.push(log_sum_exp(batch_lse) - (total as f64).ln());
    let mut rest = Vec::with_capacity(batch_lse.len());
    #[allow(clippy::needless_range_loop)]
    for b in 0..batch_lse.len() {
        rest.clear();
        rest.extend(
            batch_lse
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != b)
                .map(|(_, v)| *v),
        );
        out.push(log_sum_exp(&rest) - ((total - counts[b]) as f64).ln());
    }
    out
}

/// Jackknife standard error from `[full, leave-out-1, ..., leave-out-B]`.
pub(crate) fn jackknife_se(variants: &[f64]) -> f64 {
    let loo = &variants[1..];
    let b = loo.len() as f64;
    let mean = loo.iter().sum::<f64>() / b;
    let ss: f64 = loo.iter().map(|v| (v - mean).powi(2)).sum();
    ((b - 1.0) / b * ss).sqrt()
}

pub(crate) fn batch_lse<I: Iterator<Item = f64>>(values: I, bounds: &[(usize, usize)]) -> Vec<f64> {
    let v: Vec<f64> = values.collect();
    bounds.iter().map(|&(s, e)| log_sum_exp(&v[s..e])).collect()
}

/// `ln` of the integral of `exp(log_f)` from a chain targeting its
/// normalized version.
///
/// The anchor is the chain's sample mean. The posterior ordinate there is
/// the ratio of the chain average of `alpha(beta, anchor) q(beta, anchor)`
/// to the average of `alpha(anchor, beta')` over fresh proposals `beta'`
/// drawn from the anchor.
pub fn normalizing_constant_cj<F: Fn(&[f64]) -> f64>(
    log_f: &F,
    run: &McmcRun,
    stream: RngStream,
) -> Result<CjEstimate> {
    let n = run.len();
    if n < 2 * BATCHES {
        return Err(Error::InvalidInput(format!(
            "Chib-Jeliazkov estimate needs at least {} draws, got {n}",
            2 * BATCHES
        )));
    }
    let anchor = run.mean();
    let lf_star = log_f(&anchor);
    if !lf_star.is_finite() {
        return Err(Error::Domain(
            "target density is not finite at the Chib-Jeliazkov anchor".into(),
        ));
    }
    let bounds = batch_bounds(n, BATCHES);
    let counts: Vec<usize> = bounds.iter().map(|(s, e)| e - s).collect();
    let p = &run.proposal;

    let num = batch_lse(
        (0..n).map(|i| {
            let lf = run.log_target[i];
            (lf_star - lf).min(0.0) + p.log_density(run.scale, run.draw(i), &anchor)
        }),
        &bounds,
    );

    let mut rng = stream.rng();
    let mut cand = vec![0.0; run.dim];
    let mut noise = vec![0.0; run.dim];
    let den = batch_lse(
        (0..n).map(|_| {
            p.propose(run.scale, &anchor, &mut cand, &mut rng, &mut noise);
            let lf = log_f(&cand);
            if lf.is_finite() {
                (lf - lf_star).min(0.0)
            } else {
                f64::NEG_INFINITY
            }
        }),
        &bounds,
    );

    let num_v = log_mean_variants(&num, &counts);
    let den_v = log_mean_variants(&den, &counts);
    let variants: Vec<f64> = num_v
        .iter()
        .zip(&den_v)
        .map(|(a, b)| lf_star - (a - b))
        .collect();
    if variants.iter().any(|v| !v.is_finite()) {
        return Err(Error::MonteCarlo(
            "Chib-Jeliazkov ordinate estimate is degenerate (a batch average vanished)".into(),
        ));
    }
    Ok(CjEstimate {
        log_z: variants[0],
        se: jackknife_se(&variants),
        anchor,
        log_f_anchor: lf_star,
        variants,
    })
}
