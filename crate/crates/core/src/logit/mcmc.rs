//! Random-walk Metropolis-Hastings with step-size adaptation confined to
//! burn-in.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use super::McmcConfig;
use crate::error::{Error, Result};
use crate::numeric::RngStream;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const MAX_VERIFY_ROUNDS: usize = 60;

/// Gaussian increment `scale * L * e`, `e ~ N(0, I)`, with `L` a lower
/// Cholesky factor of the proposal shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    dim: usize,
    chol: Vec<f64>,
    log_det_chol: f64,
}

impl Proposal {
    pub fn spherical(dim: usize) -> Self {
        let mut chol = vec![0.0; dim * dim];
        for i in 0..dim {
            chol[i * dim + i] = 1.0;
        }
        Self {
            dim,
            chol,
            log_det_chol: 0.0,
        }
    }

    pub fn from_covariance(cov: &DMatrix<f64>) -> Result<Self> {
        let dim = cov.nrows();
        if cov.ncols() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: cov.ncols(),
            });
        }
        let l = cov
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Domain("proposal covariance is not positive definite".into()))?
            .l();
        let mut chol = vec![0.0; dim * dim];
        let mut log_det_chol = 0.0;
        for i in 0..dim {
            for j in 0..=i {
                chol[i * dim + j] = l[(i, j)];
            }
            log_det_chol += l[(i, i)].ln();
        }
        Ok(Self {
            dim,
            chol,
            log_det_chol,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn propose(
        &self,
        scale: f64,
        from: &[f64],
        to: &mut [f64],
        rng: &mut ChaCha12Rng,
        e: &mut [f64],
    ) {
        for v in e.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        for i in 0..self.dim {
            let row = &self.chol[i * self.dim..i * self.dim + i + 1];
            let inc: f64 = row.iter().zip(e.iter()).map(|(l, e)| l * e).sum();
            to[i] = from[i] + scale * inc;
        }
    }

    /// Log density of moving from `from` to `to`.
    pub fn log_density(&self, scale: f64, from: &[f64], to: &[f64]) -> f64 {
        // forward substitution for L v = (to - from) / scale
        let mut v = vec![0.0; self.dim];
        let mut sq = 0.0;
        for i in 0..self.dim {
            let mut r = (to[i] - from[i]) / scale;
            #[allow(clippy::needless_range_loop)]
            for j in 0..i {
                r -= self.chol[i * self.dim + j] * v[j];
            }
            v[i] = r / self.chol[i * self.dim + i];
            sq += v[i] * v[i];
        }
        -0.5 * sq - self.dim as f64 * (scale.ln() + HALF_LN_2PI) - self.log_det_chol
    }
}

/// Retained draws of a frozen-kernel chain.
#[derive(Debug, Clone, PartialEq)]
pub struct McmcRun {
    pub dim: usize,
    /// Row-major, one draw per row.
    pub draws: Vec<f64>,
    pub log_target: Vec<f64>,
    pub acceptance_rate: f64,
    pub scale: f64,
    pub adaptation_rounds: usize,
    pub proposal: Proposal,
}

impl McmcRun {
    pub fn len(&self) -> usize {
        self.log_target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_target.is_empty()
    }

    pub fn draw(&self, i: usize) -> &[f64] {
        &self.draws[i * self.dim..(i + 1) * self.dim]
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for i in 0..self.len() {
            for (a, b) in m.iter_mut().zip(self.draw(i)) {
                *a += b;
            }
        }
        m.iter_mut().for_each(|v| *v /= self.len() as f64);
        m
    }
}

struct Walker<'a, F> {
    target: &'a F,
    proposal: &'a Proposal,
    state: Vec<f64>,
    log_p: f64,
    cand: Vec<f64>,
    noise: Vec<f64>,
    rng: ChaCha12Rng,
}

impl<F: Fn(&[f64]) -> f64> Walker<'_, F> {
    fn step(&mut self, scale: f64) -> bool {
        self.proposal.propose(
            scale,
            &self.state,
            &mut self.cand,
            &mut self.rng,
            &mut self.noise,
        );
        let lp = (self.target)(&self.cand);
        let log_u: f64 = self.rng.random::<f64>().ln();
        if lp.is_finite() && log_u < lp - self.log_p {
            std::mem::swap(&mut self.state, &mut self.cand);
            self.log_p = lp;
            true
        } else {
            false
        }
    }

    fn run(&mut self, iters: usize, scale: f64) -> f64 {
        let acc = (0..iters).filter(|_| self.step(scale)).count();
        acc as f64 / iters.max(1) as f64
    }
}

/// Samples from `exp(target)` starting at `init`.
///
/// Burn-in tunes a scalar multiplier of the proposal shape by Robbins-Monro
/// steps toward the middle of `config.target_acceptance`, then repeats
/// verification rounds until one lands inside the window. The kernel is
/// frozen from then on.
pub fn mh_sample<F: Fn(&[f64]) -> f64>(
    target: &F,
    init: &[f64],
    proposal: &Proposal,
    config: &McmcConfig,
    stream: RngStream,
) -> Result<McmcRun> {
    config.validate()?;
    let dim = proposal.dim();
    if init.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: init.len(),
        });
    }
    let log_p = target(init);
    if !log_p.is_finite() {
        return Err(Error::Domain(
            "target density is not finite at the initial point".into(),
        ));
    }
    let mut w = Walker {
        target,
        proposal,
        state: init.to_vec(),
        log_p,
        cand: vec![0.0; dim],
        noise: vec![0.0; dim],
        rng: stream.rng(),
    };

    let (lo, hi) = config.target_acceptance;
    let goal = 0.5 * (lo + hi);
    let mut log_scale = (2.38 / (dim as f64).sqrt()).ln();
    let round = (config.burn_in / 20).max(50);
    let n_rounds = (config.burn_in / round).max(1);
    for k in 0..n_rounds {
        let rate = w.run(round, log_scale.exp());
        log_scale += 2.0 * (rate - goal) / ((k + 1) as f64).powf(0.6);
    }
    let verify = (config.burn_in / 2).max(1000);
    let margin = ((hi - lo) / 8.0).min(0.005);
    let mut last_rate = f64::NAN;
    let mut extra = 0;
    loop {
        if extra == MAX_VERIFY_ROUNDS {
            return Err(Error::Adaptation {
                low: lo,
                high: hi,
                rounds: n_rounds + extra,
                last_rate,
            });
        }
        last_rate = w.run(verify, log_scale.exp());
        extra += 1;
        if last_rate >= lo + margin && last_rate <= hi - margin {
            break;
        }
        log_scale += (last_rate - goal) / (extra as f64).sqrt();
    }

    let scale = log_scale.exp();
    let mut draws = Vec::with_capacity(config.chain_length * dim);
    let mut log_target = Vec::with_capacity(config.chain_length);
    let mut accepted = 0usize;
    for _ in 0..config.chain_length {
        for _ in 0..config.thin {
            accepted += usize::from(w.step(scale));
        }
        draws.extend_from_slice(&w.state);
        log_target.push(w.log_p);
    }
    Ok(McmcRun {
        dim,
        draws,
        log_target,
        acceptance_rate: accepted as f64 / (config.chain_length * config.thin) as f64,
        scale,
        adaptation_rounds: n_rounds + extra,
        proposal: proposal.clone(),
    })
}
