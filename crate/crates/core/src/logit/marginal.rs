//! Intrinsic moment marginal likelihoods as `m0`-mixtures of ratios of
//! conjugate-prior expectations.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand_distr::{Beta, Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cj::{
    batch_bounds, batch_lse, jackknife_se, log_mean_variants, normalizing_constant_cj, CjEstimate,
    BATCHES,
};
use super::mcmc::{mh_sample, Proposal};
use super::{
    conjugate_mode, default_conjugate_hyper, log_likelihood_unchecked, Allocation, ConjugateHyper,
    DesignMatrix, LogitProblem, McmcConfig, ModelId, TrainingDesign,
};
use crate::error::{Error, Result};
use crate::numeric::{log1p_exp, log_beta_unchecked, log_choose, log_sum_exp, RngStream};

/// Largest number of training outcomes summed exactly; beyond it the
/// mixture is estimated from draws of `m0`.
pub const ENUMERATION_LIMIT: u64 = 10_000;
const TRAINING_DRAWS: usize = 4096;

/// Chain targeting the conjugate density `p^C(beta | z, s)`, reduced to the
/// per-draw quantities the mixture needs, plus its Chib-Jeliazkov `ln Q`.
#[derive(Debug, Clone)]
pub struct ConjugateChain {
    patterns: usize,
    draws: usize,
    eta: Vec<f64>,
    l1pe: Vec<f64>,
    /// `sum_{j >= 1} ln beta_j^2`; zero for the intercept-only model.
    log_beta_sq: Vec<f64>,
    bounds: Vec<(usize, usize)>,
    pub q0: CjEstimate,
    pub acceptance_rate: f64,
    pub scale: f64,
}

impl ConjugateChain {
    pub fn run(
        x: &DesignMatrix,
        z: &[f64],
        s: &[f64],
        config: &McmcConfig,
        stream: RngStream,
    ) -> Result<Self> {
        let (mode, cov) = conjugate_mode(x, z, s)?;
        let proposal = Proposal::from_covariance(&cov)?;
        let target = |b: &[f64]| log_likelihood_unchecked(b, x, z, s);
        let run = mh_sample(&target, &mode, &proposal, config, stream.derive(0))?;
        let q0 = normalizing_constant_cj(&target, &run, stream.derive(1))?;

        let draws = run.len();
        let patterns = x.rows;
        let mut eta = vec![0.0; draws * patterns];
        let mut log_beta_sq = Vec::with_capacity(draws);
        for d in 0..draws {
            let beta = run.draw(d);
            x.linear_predictor(beta, &mut eta[d * patterns..(d + 1) * patterns]);
            log_beta_sq.push(beta[1..].iter().map(|b| (b * b).ln()).sum());
        }
        let l1pe: Vec<f64> = eta.iter().map(|&e| log1p_exp(e)).collect();
        if eta.iter().chain(&l1pe).any(|v| !v.is_finite()) {
            return Err(Error::MonteCarlo(
                "non-finite linear predictor in chain".into(),
            ));
        }
        Ok(Self {
            patterns,
            draws,
            eta,
            l1pe,
            log_beta_sq,
            bounds: batch_bounds(draws, BATCHES),
            q0,
            acceptance_rate: run.acceptance_rate,
            scale: run.scale,
        })
    }

    pub fn log_q0(&self) -> f64 {
        self.q0.log_z
    }

    pub fn draws(&self) -> usize {
        self.draws
    }

    /// `ln E[prod_j beta_j^(2h) L(beta | x, t)]` over the chain, followed by
    /// its delete-one-batch versions.
    pub(crate) fn log_expectation_variants(&self, x: &[u64], t: &[u64], h: u32) -> Vec<f64> {
        let active: Vec<usize> = (0..self.patterns).filter(|&i| t[i] > 0).collect();
        let hf = h as f64;
        let p = self.patterns;
        let values = (0..self.draws).map(|d| {
            let mut v = if h == 0 {
                0.0
            } else {
                hf * self.log_beta_sq[d]
            };
            for &i in &active {
                v += x[i] as f64 * self.eta[d * p + i] - t[i] as f64 * self.l1pe[d * p + i];
            }
            v
        });
        let lse = batch_lse(values, &self.bounds);
        let counts: Vec<usize> = self.bounds.iter().map(|(s, e)| e - s).collect();
        log_mean_variants(&lse, &counts)
    }

    /// `ln Q(z + x, s + t, h)` with its jackknife standard error.
    pub fn log_q(&self, x: &[u64], t: &[u64], h: u32) -> Result<(f64, f64)> {
        check_training(x, t, self.patterns)?;
        let e = self.log_expectation_variants(x, t, h);
        if e.iter().any(|v| !v.is_finite()) {
            return Err(Error::MonteCarlo(format!(
                "expectation for training outcome {x:?} vanished on every draw; chain too short"
            )));
        }
        let v: Vec<f64> = e
            .iter()
            .zip(&self.q0.variants)
            .map(|(a, b)| a + b)
            .collect();
        Ok((v[0], jackknife_se(&v)))
    }
}

fn check_training(x: &[u64], t: &[u64], patterns: usize) -> Result<()> {
    if x.len() != patterns || t.len() != patterns {
        return Err(Error::Dimension {
            expected: patterns,
            got: x.len().min(t.len()),
        });
    }
    if let Some(i) = (0..patterns).find(|&i| x[i] > t[i]) {
        return Err(Error::InvalidInput(format!(
            "training outcome {} exceeds size {} at pattern {i}",
            x[i], t[i]
        )));
    }
    Ok(())
}

/// Training outcomes `x` with log mixture weights: `ln m0(x)` under full
/// enumeration, or log relative frequencies of draws from `m0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTerms {
    pub t: Vec<u64>,
    pub xs: Vec<Vec<u64>>,
    pub log_weights: Vec<f64>,
    pub sampled: bool,
}

fn log_m0(x: &[u64], t: &[u64], u_plus: f64, w_plus: f64) -> f64 {
    let xp: u64 = x.iter().sum();
    let tp: u64 = t.iter().sum();
    let c: f64 = x.iter().zip(t).map(|(&x, &t)| log_choose(t, x)).sum();
    c + log_beta_unchecked(u_plus + xp as f64, w_plus - u_plus + (tp - xp) as f64)
        - log_beta_unchecked(u_plus, w_plus - u_plus)
}

/// Enumerates all training outcomes when there are at most
/// [`ENUMERATION_LIMIT`] of them, otherwise draws them from `m0`.
pub fn enumerate_or_sample_training(
    hyper: &ConjugateHyper,
    t: &TrainingDesign,
    stream: RngStream,
) -> Result<TrainingTerms> {
    let t = &t.t;
    if t.len() != hyper.u.len() {
        return Err(Error::Dimension {
            expected: hyper.u.len(),
            got: t.len(),
        });
    }
    let (up, wp) = (hyper.u_plus(), hyper.w_plus());
    let count = t
        .iter()
        .try_fold(1u64, |acc, &ti| acc.checked_mul(ti + 1))
        .unwrap_or(u64::MAX);
    if count <= ENUMERATION_LIMIT {
        let mut xs = Vec::with_capacity(count as usize);
        let mut x = vec![0u64; t.len()];
        loop {
            xs.push(x.clone());
            let mut i = 0;
            while i < t.len() && x[i] == t[i] {
                x[i] = 0;
                i += 1;
            }
            if i == t.len() {
                break;
            }
            x[i] += 1;
        }
        let log_weights = xs.iter().map(|x| log_m0(x, t, up, wp)).collect();
        return Ok(TrainingTerms {
            t: t.clone(),
            xs,
            log_weights,
            sampled: false,
        });
    }
    let beta = Beta::new(up, wp - up).map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = stream.rng();
    let mut tally: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    for _ in 0..TRAINING_DRAWS {
        let p: f64 = beta.sample(&mut rng);
        let x: Vec<u64> = t
            .iter()
            .map(|&ti| {
                Binomial::new(ti, p)
                    .map(|b| b.sample(&mut rng))
                    .map_err(|e| Error::Domain(e.to_string()))
            })
            .collect::<Result<_>>()?;
        *tally.entry(x).or_default() += 1;
    }
    let ln_m = (TRAINING_DRAWS as f64).ln();
    let (xs, log_weights) = tally
        .into_iter()
        .map(|(x, c)| (x, (c as f64).ln() - ln_m))
        .unzip();
    Ok(TrainingTerms {
        t: t.clone(),
        xs,
        log_weights,
        sampled: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalEstimate {
    pub log_m: f64,
    pub se: f64,
    pub terms: usize,
    pub sampled: bool,
}

/// Per-chain ingredients of the mixture for one `(t, h)` setting:
/// `ln Q(z, s, 0)` and `ln E[prod_j beta_j^(2h) L(beta | x, t)]` for every
/// training outcome, each with its delete-one-batch versions.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTerms {
    log_q0: Vec<f64>,
    log_e: Vec<Vec<f64>>,
}

impl ConjugateChain {
    pub fn mixture_terms(&self, terms: &TrainingTerms, h: u32) -> Result<ChainTerms> {
        let per_x: Vec<Result<Vec<f64>>> = terms
            .xs
            .par_iter()
            .map(|x| {
                check_training(x, &terms.t, self.patterns)?;
                let e = self.log_expectation_variants(x, &terms.t, h);
                if e.iter().any(|v| !v.is_finite()) {
                    return Err(Error::MonteCarlo(format!("{x:?}")));
                }
                Ok(e)
            })
            .collect();
        let mut log_e = Vec::with_capacity(per_x.len());
        let mut failed = Vec::new();
        for r in per_x {
            match r {
                Ok(v) => log_e.push(v),
                Err(Error::MonteCarlo(x)) => failed.push(x),
                Err(e) => return Err(e),
            }
        }
        if !failed.is_empty() {
            return Err(Error::MonteCarlo(format!(
                "expectation vanished on every draw for training outcomes {}; chain too short",
                failed.join(", ")
            )));
        }
        Ok(ChainTerms {
            log_q0: self.q0.variants.clone(),
            log_e,
        })
    }
}

/// `ln m^IM(y | h, t)` from the mixture terms of a chain on `p^C(u, w)` and
/// of one on `p^C(u + y, w + n)`, both computed for the same `terms`.
pub fn im_marginal_from_terms(
    prior: &ChainTerms,
    post: &ChainTerms,
    y: &[u64],
    n: &[u64],
    terms: &TrainingTerms,
) -> MarginalEstimate {
    let log_binom: f64 = y.iter().zip(n).map(|(&y, &n)| log_choose(n, y)).sum();
    let ratio = |k: usize, v: usize| post.log_e[k][v] - prior.log_e[k][v];
    let mut variants = Vec::with_capacity(BATCHES + 1);
    let mut buf = vec![0.0; terms.xs.len()];
    for v in 0..=BATCHES {
        for (k, b) in buf.iter_mut().enumerate() {
            *b = terms.log_weights[k] + ratio(k, v);
        }
        variants.push(log_binom + post.log_q0[v] - prior.log_q0[v] + log_sum_exp(&buf));
    }
    let mut var = jackknife_se(&variants).powi(2);
    if terms.sampled {
        // multinomial sampling error of the m0 draws, by the delta method
        for (k, b) in buf.iter_mut().enumerate() {
            *b = terms.log_weights[k] + ratio(k, 0);
        }
        let lse = log_sum_exp(&buf);
        let second: f64 = (0..buf.len())
            .map(|k| (terms.log_weights[k] + 2.0 * (ratio(k, 0) - lse)).exp())
            .sum();
        var += (second - 1.0).max(0.0) / TRAINING_DRAWS as f64;
    }
    MarginalEstimate {
        log_m: variants[0],
        se: var.sqrt(),
        terms: terms.xs.len(),
        sampled: terms.sampled,
    }
}

/// `ln m^IM(y | h, t)` from a chain on `p^C(u, w)` and one on
/// `p^C(u + y, w + n)` for the same model.
pub fn im_marginal_from_chains(
    prior: &ConjugateChain,
    post: &ConjugateChain,
    y: &[u64],
    n: &[u64],
    terms: &TrainingTerms,
    h: u32,
) -> Result<MarginalEstimate> {
    let a = prior.mixture_terms(terms, h)?;
    let b = post.mixture_terms(terms, h)?;
    Ok(im_marginal_from_terms(&a, &b, y, n, terms))
}

fn chain_pair(
    problem: &LogitProblem,
    hyper: &ConjugateHyper,
    model: &ModelId,
    config: &McmcConfig,
) -> Result<(ConjugateChain, ConjugateChain)> {
    let x = problem.design(model)?;
    let stream = config.seed.derive(model.mask());
    let (zp, sp) = hyper.augmented(&problem.y, &problem.n);
    let (prior, post) = rayon::join(
        || ConjugateChain::run(&x, &hyper.u, &hyper.w, config, stream.derive(0)),
        || ConjugateChain::run(&x, &zp, &sp, config, stream.derive(1)),
    );
    Ok((prior?, post?))
}

fn training_stream(config: &McmcConfig) -> RngStream {
    config.seed.derive(u64::MAX)
}

/// Intrinsic moment marginal likelihood of one model with default
/// conjugate hyperparameters.
pub fn marginal_likelihood_im(
    problem: &LogitProblem,
    model: &ModelId,
    h: u32,
    t: &TrainingDesign,
    config: &McmcConfig,
) -> Result<MarginalEstimate> {
    config.validate()?;
    let hyper = default_conjugate_hyper(problem)?;
    let (prior, post) = chain_pair(problem, &hyper, model, config)?;
    let terms = enumerate_or_sample_training(&hyper, t, training_stream(config))?;
    im_marginal_from_chains(&prior, &post, &problem.y, &problem.n, &terms, h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPosterior {
    pub model: ModelId,
    pub log_marginal: f64,
    pub log_marginal_se: f64,
    pub prob: f64,
    pub prob_se: f64,
}

/// Chains for a fixed model set, reusable across `(h, t)` settings.
#[derive(Debug, Clone)]
pub struct SelectionSession {
    problem: LogitProblem,
    hyper: ConjugateHyper,
    models: Vec<ModelId>,
    chains: Vec<(Arc<ConjugateChain>, Arc<ConjugateChain>)>,
    config: McmcConfig,
}

impl SelectionSession {
    pub fn new(problem: &LogitProblem, models: &[ModelId], config: &McmcConfig) -> Result<Self> {
        config.validate()?;
        if models.is_empty() {
            return Err(Error::InvalidInput("model set is empty".into()));
        }
        if !models.iter().any(ModelId::is_null) {
            return Err(Error::InvalidInput(
                "model set must include the intercept-only model".into(),
            ));
        }
        let mut seen = models.to_vec();
        seen.sort();
        seen.dedup();
        if seen.len() != models.len() {
            return Err(Error::InvalidInput("model set has duplicates".into()));
        }
        let hyper = default_conjugate_hyper(problem)?;
        let chains = models
            .par_iter()
            .map(|m| {
                chain_pair(problem, &hyper, m, config).map(|(a, b)| (Arc::new(a), Arc::new(b)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            problem: problem.clone(),
            hyper,
            models: models.to_vec(),
            chains,
            config: *config,
        })
    }

    pub fn models(&self) -> &[ModelId] {
        &self.models
    }

    pub fn chains(&self, idx: usize) -> (&ConjugateChain, &ConjugateChain) {
        (&self.chains[idx].0, &self.chains[idx].1)
    }

    pub fn training(&self, t_plus: u64, rule: Allocation) -> TrainingDesign {
        TrainingDesign::proportional(t_plus, &self.problem.n, rule)
    }

    pub fn marginals(&self, h: u32, t: &TrainingDesign) -> Result<Vec<MarginalEstimate>> {
        let terms = enumerate_or_sample_training(&self.hyper, t, training_stream(&self.config))?;
        self.chains
            .iter()
            .map(|(prior, post)| {
                im_marginal_from_chains(prior, post, &self.problem.y, &self.problem.n, &terms, h)
            })
            .collect()
    }

    /// Posterior model probabilities under a uniform model prior.
    pub fn posterior(&self, h: u32, t: &TrainingDesign) -> Result<Vec<ModelPosterior>> {
        let ms = self.marginals(h, t)?;
        let logs: Vec<f64> = ms.iter().map(|m| m.log_m).collect();
        let norm = log_sum_exp(&logs);
        let probs: Vec<f64> = logs.iter().map(|l| (l - norm).exp()).collect();
        Ok(self
            .models
            .iter()
            .enumerate()
            .map(|(k, model)| {
                // delta method with independent per-model errors
                let var: f64 = (0..ms.len())
                    .map(|j| {
                        let d = if j == k { 1.0 } else { 0.0 };
                        (probs[k] * (d - probs[j]) * ms[j].se).powi(2)
                    })
                    .sum();
                ModelPosterior {
                    model: model.clone(),
                    log_marginal: ms[k].log_m,
                    log_marginal_se: ms[k].se,
                    prob: probs[k],
                    prob_se: var.sqrt(),
                }
            })
            .collect())
    }
}

/// Posterior model probabilities with `t_plus` allocated proportionally to
/// the observed `n`.
pub fn posterior_model_probs(
    problem: &LogitProblem,
    models: &[ModelId],
    h: u32,
    t_plus: u64,
    rule: Allocation,
    config: &McmcConfig,
) -> Result<Vec<ModelPosterior>> {
    let session = SelectionSession::new(problem, models, config)?;
    session.posterior(h, &session.training(t_plus, rule))
}
