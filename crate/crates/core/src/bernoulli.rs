//! Point-null test `theta = theta0` for a binomial proportion under default,
//! intrinsic, moment and intrinsic moment priors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{
    beta_moments_about, ln_complement, log_beta_pdf, log_beta_unchecked, log_binom_pmf, log_choose,
    log_gamma_error_scale, log_sum_exp, signed_log_sum, SignedLogValue,
};
use crate::report::EvidenceReport;

/// Relative error beyond which the alternating sum for a moment normalizer
/// is rejected.
pub const K_CANCELLATION_LIMIT: f64 = 1e-8;
/// Error bound above which Bayes factor code prefers the rescue path over
/// the alternating sum. Tighter than [`K_CANCELLATION_LIMIT`] so that
/// Bayes factors keep close to full precision.
pub const K_ROBUST_SWITCH: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernoulliNull {
    theta0: f64,
}

impl BernoulliNull {
    pub fn new(theta0: f64) -> Result<Self> {
        if theta0 > 0.0 && theta0 < 1.0 {
            Ok(Self { theta0 })
        } else {
            Err(Error::Domain(format!(
                "null proportion must lie strictly inside (0, 1), got {theta0}"
            )))
        }
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }
}

/// Hyperparameters `(b, h, t)` of an intrinsic moment prior built on the
/// symmetric `Beta(b, b)` default prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentPriorSpec {
    pub b: f64,
    /// Moment order; 0 gives a local prior.
    pub h: u32,
    /// Training sample size; 0 leaves the default (moment) prior untouched.
    pub t: u32,
}

impl MomentPriorSpec {
    pub fn new(b: f64, h: u32, t: u32) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Domain(format!("b must be positive, got {b}")));
        }
        Ok(Self { b, h, t })
    }

    pub fn default_prior(b: f64) -> Result<Self> {
        Self::new(b, 0, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinData {
    pub y: u64,
    pub n: u64,
}

impl BinData {
    pub fn new(y: u64, n: u64) -> Result<Self> {
        if y > n {
            return Err(Error::InvalidInput(format!(
                "successes {y} exceed trials {n}"
            )));
        }
        Ok(Self { y, n })
    }
}

fn check_shape(a1: f64, a2: f64) -> Result<()> {
    if a1 > 0.0 && a2 > 0.0 && a1.is_finite() && a2.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "Beta parameters must be positive, got ({a1}, {a2})"
        )))
    }
}

/// `ln K(a1, a2, h, theta0)` by the alternating binomial sum over raw Beta
/// moments, accumulated in signed log space.
///
/// Fails with [`Error::Cancellation`] when the estimated relative error of
/// the sum exceeds [`K_CANCELLATION_LIMIT`].
pub fn log_k_const(a1: f64, a2: f64, h: u32, theta0: f64) -> Result<f64> {
    let (v, rel) = log_k_alternating(a1, a2, h, theta0)?;
    if rel > K_CANCELLATION_LIMIT {
        return Err(Error::Cancellation {
            relative_error: rel,
            limit: K_CANCELLATION_LIMIT,
        });
    }
    Ok(v)
}

/// Alternating sum and its relative error bound (infinite if the sum is
/// not positive).
fn log_k_alternating(a1: f64, a2: f64, h: u32, theta0: f64) -> Result<(f64, f64)> {
    check_shape(a1, a2)?;
    if !(theta0 > 0.0 && theta0 < 1.0) {
        return Err(Error::Domain(format!("theta0 out of range: {theta0}")));
    }
    if h == 0 {
        return Ok((0.0, 0.0));
    }
    let order = 2 * h as u64;
    let lb = log_beta_unchecked(a1, a2);
    let ln_t0 = theta0.ln();
    let terms: Vec<SignedLogValue> = (0..=order)
        .map(|j| {
            let lm = log_choose(order, j)
                + (order - j) as f64 * ln_t0
                + log_beta_unchecked(a1 + j as f64, a2)
                - lb;
            if j % 2 == 0 {
                SignedLogValue::positive(lm)
            } else {
                SignedLogValue::negative(lm)
            }
        })
        .collect();
    let (sum, diag) = signed_log_sum(&terms);
    let o = order as f64;
    let term_err = log_gamma_error_scale(&[a1, a2, a1 + a2, a1 + o, a1 + a2 + o])
        + f64::EPSILON * o * ln_t0.abs();
    let rel = diag.relative_error_bound_with(terms.len(), term_err);
    if sum.sign != crate::numeric::Sign::Positive {
        return Ok((f64::NAN, f64::INFINITY));
    }
    Ok((sum.log_magnitude, rel))
}

/// `K(a1, a2, h, theta0) = E[(theta - theta0)^(2h)]` under `Beta(a1, a2)`.
pub fn k_const(a1: f64, a2: f64, h: u32, theta0: f64) -> Result<f64> {
    log_k_const(a1, a2, h, theta0).map(f64::exp)
}

/// `ln K` by the moment recurrence about `theta0`.
pub fn log_k_const_recurrence(a1: f64, a2: f64, h: u32, theta0: f64) -> Result<f64> {
    check_shape(a1, a2)?;
    let m = beta_moments_about(a1, a2, theta0, 2 * h as usize);
    let v = m[2 * h as usize];
    if v > 0.0 && v.is_finite() {
        Ok(v.ln())
    } else {
        Err(Error::Domain(format!(
            "moment recurrence produced non-positive K for ({a1}, {a2}, {h}, {theta0})"
        )))
    }
}

/// `ln K` by the alternating sum, switching to the recurrence unless the
/// sum's error bound is below [`K_ROBUST_SWITCH`].
///
/// `K(a1, a2, theta0) = K(a2, a1, 1 - theta0)`; the arguments are put in a
/// canonical order first so mirrored inputs give identical results.
pub(crate) fn log_k_robust(a1: f64, a2: f64, h: u32, theta0: f64) -> Result<f64> {
    let (a1, a2, theta0) = if (a2, 1.0 - theta0) < (a1, theta0) {
        (a2, a1, 1.0 - theta0)
    } else {
        (a1, a2, theta0)
    };
    let (v, rel) = log_k_alternating(a1, a2, h, theta0)?;
    if rel <= K_ROBUST_SWITCH {
        Ok(v)
    } else {
        log_k_const_recurrence(a1, a2, h, theta0)
    }
}

/// Intrinsic prior density (local, `h = 0`): a `Bin(x | t, theta0)` mixture
/// of `Beta(b + x, b + t - x)` densities.
pub fn intrinsic_prior_density(
    theta: f64,
    null: BernoulliNull,
    spec: MomentPriorSpec,
) -> Result<f64> {
    if spec.h != 0 {
        return Err(Error::InvalidInput(
            "intrinsic_prior_density takes a local spec (h = 0)".into(),
        ));
    }
    intrinsic_moment_prior_density(theta, null, spec)
}

/// Intrinsic moment prior density at `theta`.
pub fn intrinsic_moment_prior_density(
    theta: f64,
    null: BernoulliNull,
    spec: MomentPriorSpec,
) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!(
            "theta must lie in (0, 1), got {theta}"
        )));
    }
    let t0 = null.theta0();
    let moment_log = if spec.h == 0 {
        0.0
    } else if theta == t0 {
        return Ok(0.0);
    } else {
        2.0 * spec.h as f64 * (theta - t0).abs().ln()
    };
    let t = spec.t as u64;
    let mut logs = Vec::with_capacity(t as usize + 1);
    for x in 0..=t {
        let a1 = spec.b + x as f64;
        let a2 = spec.b + (t - x) as f64;
        logs.push(
            moment_log + log_beta_pdf(theta, a1, a2) - log_k_robust(a1, a2, spec.h, t0)?
                + log_binom_pmf(x, t, t0)?,
        );
    }
    Ok(log_sum_exp(&logs).exp())
}

/// `ln BF10` under the moment prior of order `h` built on `Beta(a1, a2)`.
pub fn log_bf10_moment(
    data: BinData,
    a1: f64,
    a2: f64,
    h: u32,
    null: BernoulliNull,
) -> Result<f64> {
    check_shape(a1, a2)?;
    if data.n == 0 {
        return Ok(0.0);
    }
    let t0 = null.theta0();
    let (y, f) = (data.y as f64, (data.n - data.y) as f64);
    let post1 = a1 + y;
    let post2 = a2 + f;
    let k_ratio = if h == 0 {
        0.0
    } else {
        log_k_robust(post1, post2, h, t0)? - log_k_robust(a1, a2, h, t0)?
    };
    let lik0 = if data.y > 0 { y * t0.ln() } else { 0.0 }
        + if f > 0.0 { f * ln_complement(t0) } else { 0.0 };
    Ok(k_ratio + log_beta_unchecked(post1, post2) - log_beta_unchecked(a1, a2) - lik0)
}

pub fn bf10_moment(data: BinData, a1: f64, a2: f64, h: u32, null: BernoulliNull) -> Result<f64> {
    log_bf10_moment(data, a1, a2, h, null).map(f64::exp)
}

/// `ln BF10` under the intrinsic moment prior: the `Bin(x | t, theta0)`
/// mixture of moment-prior Bayes factors with `a = (b + x, b + t - x)`.
pub fn log_bf10_intrinsic_moment(
    data: BinData,
    null: BernoulliNull,
    spec: MomentPriorSpec,
) -> Result<f64> {
    if data.n == 0 {
        return Ok(0.0);
    }
    let t = spec.t as u64;
    let t0 = null.theta0();
    let mut logs = Vec::with_capacity(t as usize + 1);
    for x in 0..=t {
        let a1 = spec.b + x as f64;
        let a2 = spec.b + (t - x) as f64;
        logs.push(log_bf10_moment(data, a1, a2, spec.h, null)? + log_binom_pmf(x, t, t0)?);
    }
    Ok(log_sum_exp(&logs))
}

pub fn bf10_intrinsic_moment(
    data: BinData,
    null: BernoulliNull,
    spec: MomentPriorSpec,
) -> Result<f64> {
    log_bf10_intrinsic_moment(data, null, spec).map(f64::exp)
}

pub fn evidence(
    data: BinData,
    null: BernoulliNull,
    spec: MomentPriorSpec,
) -> Result<EvidenceReport> {
    log_bf10_intrinsic_moment(data, null, spec).map(EvidenceReport::from_log_bf10)
}
