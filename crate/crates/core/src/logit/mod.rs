//! Variable selection for binomial logistic regression under intrinsic
//! moment priors built on the conjugate logistic prior.
//!
//! All normalizing constants are estimated by Metropolis-Hastings runs and
//! the Chib-Jeliazkov identity. One chain per `(model, pseudo-data)` pair is
//! reused for every `(h, t)` setting.

mod cj;
mod marginal;
mod mcmc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{largest_remainder, log1p_exp, RngStream};

pub use cj::{normalizing_constant_cj, CjEstimate};
pub use marginal::{
    enumerate_or_sample_training, im_marginal_from_chains, im_marginal_from_terms,
    marginal_likelihood_im, posterior_model_probs, ChainTerms, ConjugateChain, MarginalEstimate,
    ModelPosterior, SelectionSession, TrainingTerms, ENUMERATION_LIMIT,
};
pub use mcmc::{mh_sample, McmcRun, Proposal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitProblem {
    pub n: Vec<u64>,
    pub y: Vec<u64>,
    /// Covariate rows, one per pattern, without the intercept.
    pub z: Vec<Vec<f64>>,
    pub w_plus: f64,
}

impl LogitProblem {
    pub fn new(n: Vec<u64>, y: Vec<u64>, z: Vec<Vec<f64>>, w_plus: f64) -> Result<Self> {
        if y.len() != n.len() {
            return Err(Error::Dimension {
                expected: n.len(),
                got: y.len(),
            });
        }
        if z.len() != n.len() {
            return Err(Error::Dimension {
                expected: n.len(),
                got: z.len(),
            });
        }
        let k = z.first().map_or(0, Vec::len);
        if let Some(row) = z.iter().find(|r| r.len() != k) {
            return Err(Error::Dimension {
                expected: k,
                got: row.len(),
            });
        }
        if z.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite covariate value".into()));
        }
        if let Some(i) = (0..n.len()).find(|&i| y[i] > n[i]) {
            return Err(Error::InvalidInput(format!(
                "pattern {i}: y = {} exceeds n = {}",
                y[i], n[i]
            )));
        }
        if !(w_plus > 0.0 && w_plus.is_finite()) {
            return Err(Error::Domain(format!(
                "w_plus must be positive, got {w_plus}"
            )));
        }
        Ok(Self { n, y, z, w_plus })
    }

    pub fn patterns(&self) -> usize {
        self.n.len()
    }

    pub fn columns(&self) -> usize {
        self.z.first().map_or(0, Vec::len)
    }

    /// Same design and hyperparameter rule, different counts.
    pub fn with_counts(&self, y: Vec<u64>, n: Vec<u64>) -> Result<Self> {
        Self::new(n, y, self.z.clone(), self.w_plus)
    }

    /// Intercept plus the model's columns.
    pub fn design(&self, model: &ModelId) -> Result<DesignMatrix> {
        let k = self.columns();
        if let Some(&j) = model.included.iter().find(|&&j| j >= k) {
            return Err(Error::InvalidInput(format!(
                "model references column {j}, design has {k}"
            )));
        }
        let cols = model.included.len() + 1;
        let mut data = Vec::with_capacity(self.patterns() * cols);
        for row in &self.z {
            data.push(1.0);
            data.extend(model.included.iter().map(|&j| row[j]));
        }
        let x = DesignMatrix {
            rows: self.patterns(),
            cols,
            data,
        };
        x.check_identified()?;
        Ok(x)
    }
}

/// Conjugate pseudo-data: successes `u_i` out of `w_i` pseudo-trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugateHyper {
    pub u: Vec<f64>,
    pub w: Vec<f64>,
}

impl ConjugateHyper {
    pub fn new(u: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if u.len() != w.len() {
            return Err(Error::Dimension {
                expected: w.len(),
                got: u.len(),
            });
        }
        if let Some(i) = (0..u.len()).find(|&i| !(u[i] > 0.0 && u[i] < w[i] && w[i].is_finite())) {
            return Err(Error::Domain(format!(
                "need 0 < u_i < w_i, got u = {}, w = {} at pattern {i}",
                u[i], w[i]
            )));
        }
        Ok(Self { u, w })
    }

    pub fn u_plus(&self) -> f64 {
        self.u.iter().sum()
    }

    pub fn w_plus(&self) -> f64 {
        self.w.iter().sum()
    }

    /// Pseudo-data augmented by integer counts: `(u + y, w + n)`.
    pub fn augmented(&self, y: &[u64], n: &[u64]) -> (Vec<f64>, Vec<f64>) {
        let z = self.u.iter().zip(y).map(|(u, &y)| u + y as f64).collect();
        let s = self.w.iter().zip(n).map(|(w, &n)| w + n as f64).collect();
        (z, s)
    }
}

/// `w_i = w_plus n_i / sum(n)`, `u_i = w_i / 2`.
pub fn default_conjugate_hyper(problem: &LogitProblem) -> Result<ConjugateHyper> {
    let total: u64 = problem.n.iter().sum();
    if total == 0 {
        return Err(Error::InvalidInput(
            "default hyperparameters need sum(n) > 0".into(),
        ));
    }
    let w: Vec<f64> = problem
        .n
        .iter()
        .map(|&n| problem.w_plus * n as f64 / total as f64)
        .collect();
    let u = w.iter().map(|w| w / 2.0).collect();
    ConjugateHyper::new(u, w)
}

/// Covariate columns included besides the intercept (0-based, sorted).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelId {
    pub included: Vec<usize>,
}

impl ModelId {
    pub fn new(mut included: Vec<usize>) -> Result<Self> {
        included.sort_unstable();
        if included.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!(
                "repeated column in model {included:?}"
            )));
        }
        if included.iter().any(|&j| j >= 64) {
            return Err(Error::InvalidInput(
                "column indices must be below 64".into(),
            ));
        }
        Ok(Self { included })
    }

    pub fn null() -> Self {
        Self { included: vec![] }
    }

    pub fn is_null(&self) -> bool {
        self.included.is_empty()
    }

    /// Bit mask of the included columns; also used to key random streams so
    /// results do not depend on the order models are listed in.
    pub fn mask(&self) -> u64 {
        self.included.iter().fold(0, |m, &j| m | (1 << j))
    }

    pub fn label(&self) -> String {
        if self.included.is_empty() {
            "{}".into()
        } else {
            let parts: Vec<String> = self.included.iter().map(ToString::to_string).collect();
            format!("{{{}}}", parts.join(","))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    /// Retained draws after thinning.
    pub chain_length: usize,
    pub thin: usize,
    /// Adaptation iterations discarded before sampling.
    pub burn_in: usize,
    pub target_acceptance: (f64, f64),
    pub seed: RngStream,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            chain_length: 40_000,
            thin: 20,
            burn_in: 5_000,
            target_acceptance: (0.24, 0.28),
            seed: RngStream::new(0),
        }
    }
}

impl McmcConfig {
    /// Short chains for quick checks.
    pub fn smoke() -> Self {
        Self {
            chain_length: 4_000,
            burn_in: 2_000,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: RngStream) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::InvalidInput("thin must be at least 1".into()));
        }
        if self.chain_length <= self.burn_in {
            return Err(Error::InvalidInput(format!(
                "chain_length ({}) must exceed burn_in ({})",
                self.chain_length, self.burn_in
            )));
        }
        if self.chain_length < 2 * cj::BATCHES {
            return Err(Error::InvalidInput(format!(
                "chain_length must be at least {}",
                2 * cj::BATCHES
            )));
        }
        let (lo, hi) = self.target_acceptance;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(Error::InvalidInput(format!(
                "bad acceptance window [{lo}, {hi}]"
            )));
        }
        Ok(())
    }
}

/// Rounding rule for splitting a total training size across patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Allocation {
    /// Each share rounded to the nearest integer; the total may drift from
    /// `t_plus` by a unit or two.
    #[default]
    Nearest,
    /// Floors plus one unit for each of the largest remainders, so the total
    /// is exact; ties go to the lower index.
    LargestRemainder,
}

/// Training sample sizes per covariate pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingDesign {
    pub t: Vec<u64>,
}

impl TrainingDesign {
    pub fn new(t: Vec<u64>) -> Self {
        Self { t }
    }

    pub fn zero(patterns: usize) -> Self {
        Self {
            t: vec![0; patterns],
        }
    }

    /// `t_plus` split proportionally to `n` under the given rounding rule.
    pub fn proportional(t_plus: u64, n: &[u64], rule: Allocation) -> Self {
        let weights: Vec<f64> = n.iter().map(|&v| v as f64).collect();
        let t = match rule {
            Allocation::LargestRemainder => largest_remainder(t_plus, &weights),
            Allocation::Nearest => {
                let total: f64 = weights.iter().sum();
                weights
                    .iter()
                    .map(|w| {
                        if total > 0.0 {
                            (t_plus as f64 * w / total).round() as u64
                        } else {
                            0
                        }
                    })
                    .collect()
            }
        };
        Self { t }
    }

    pub fn t_plus(&self) -> u64 {
        self.t.iter().sum()
    }
}

/// Row-major design matrix including the intercept column.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DesignMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    /// `eta = X beta`.
    pub fn linear_predictor(&self, beta: &[f64], eta: &mut [f64]) {
        for (i, e) in eta.iter_mut().enumerate() {
            *e = self.row(i).iter().zip(beta).map(|(x, b)| x * b).sum();
        }
    }

    fn check_identified(&self) -> Result<()> {
        if self.cols > self.rows {
            return Err(Error::InvalidInput(format!(
                "model with {} parameters is not identified on {} patterns",
                self.cols, self.rows
            )));
        }
        let x = self.to_nalgebra();
        let sv = x.singular_values();
        let max = sv.max();
        let min = sv.min();
        if !(min > 1e-10 * max.max(1.0)) {
            return Err(Error::InvalidInput(
                "design columns are linearly dependent; model not identified".into(),
            ));
        }
        Ok(())
    }
}

/// `sum_i [y_i eta_i - n_i log(1 + exp(eta_i))]` with real-valued counts.
pub fn log_likelihood(beta: &[f64], x: &DesignMatrix, y: &[f64], n: &[f64]) -> Result<f64> {
    if beta.len() != x.cols {
        return Err(Error::Dimension {
            expected: x.cols,
            got: beta.len(),
        });
    }
    if y.len() != x.rows || n.len() != x.rows {
        return Err(Error::Dimension {
            expected: x.rows,
            got: y.len().min(n.len()),
        });
    }
    Ok(log_likelihood_unchecked(beta, x, y, n))
}

pub(crate) fn log_likelihood_unchecked(
    beta: &[f64],
    x: &DesignMatrix,
    y: &[f64],
    n: &[f64],
) -> f64 {
    let mut acc = 0.0;
    for i in 0..x.rows {
        let eta: f64 = x.row(i).iter().zip(beta).map(|(a, b)| a * b).sum();
        acc += y[i] * eta - n[i] * log1p_exp(eta);
    }
    acc
}

fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// Mode of `L(beta | z, s)` by damped Newton iterations, and the inverse of
/// the negative Hessian there.
pub fn conjugate_mode(x: &DesignMatrix, z: &[f64], s: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let xm = x.to_nalgebra();
    let mut beta = DVector::zeros(x.cols);
    let mut eta = vec![0.0; x.rows];
    let objective = |b: &DVector<f64>| log_likelihood_unchecked(b.as_slice(), x, z, s);
    let mut current = objective(&beta);
    for _ in 0..200 {
        x.linear_predictor(beta.as_slice(), &mut eta);
        let p: Vec<f64> = eta.iter().map(|&e| logistic(e)).collect();
        let resid = DVector::from_iterator(x.rows, (0..x.rows).map(|i| z[i] - s[i] * p[i]));
        let grad = xm.transpose() * resid;
        let wts = DVector::from_iterator(x.rows, (0..x.rows).map(|i| s[i] * p[i] * (1.0 - p[i])));
        let info = xm.transpose() * DMatrix::from_diagonal(&wts) * &xm;
        let chol = info.clone().cholesky().ok_or_else(|| {
            Error::Domain("information matrix not positive definite at Newton iterate".into())
        })?;
        let step = chol.solve(&grad);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..50 {
            let cand = &beta + &step * lambda;
            let val = objective(&cand);
            if val >= current - 1e-14 * current.abs() {
                beta = cand;
                current = val;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted || grad.amax() < 1e-11 * (1.0 + s.iter().sum::<f64>()) {
            let cov = chol.inverse();
            return Ok((beta.as_slice().to_vec(), cov));
        }
    }
    Err(Error::Domain(
        "Newton iterations for the conjugate mode did not converge".into(),
    ))
}
