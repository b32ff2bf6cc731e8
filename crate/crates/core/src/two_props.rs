//! Testing `theta1 = theta2` across two independent binomials with
//! intrinsic moment priors.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{
    beta_moments_about, compensated_sum, largest_remainder, log_beta_pdf, log_beta_unchecked,
    log_choose, log_sum_exp, signed_log_sum, RngStream, Sign, SignedLogValue,
};
use crate::report::EvidenceReport;

pub use crate::bernoulli::{K_CANCELLATION_LIMIT, K_ROBUST_SWITCH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoPropData {
    pub y1: u64,
    pub n1: u64,
    pub y2: u64,
    pub n2: u64,
}

impl TwoPropData {
    pub fn new(y1: u64, n1: u64, y2: u64, n2: u64) -> Result<Self> {
        if y1 > n1 || y2 > n2 {
            return Err(Error::InvalidInput(format!(
                "counts out of range: {y1}/{n1}, {y2}/{n2}"
            )));
        }
        Ok(Self { y1, n1, y2, n2 })
    }

    pub fn swapped(&self) -> Self {
        Self {
            y1: self.y2,
            n1: self.n2,
            y2: self.y1,
            n2: self.n1,
        }
    }

    pub fn y_plus(&self) -> u64 {
        self.y1 + self.y2
    }

    pub fn n_plus(&self) -> u64 {
        self.n1 + self.n2
    }

    /// `|y1/n1 - y2/n2|`, with empty groups counted as frequency 0.
    pub fn abs_freq_diff(&self) -> f64 {
        let f = |y: u64, n: u64| if n == 0 { 0.0 } else { y as f64 / n as f64 };
        (f(self.y1, self.n1) - f(self.y2, self.n2)).abs()
    }
}

/// Parameters of the product prior `Beta(a11, a12) x Beta(a21, a22)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaMatrix {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl BetaMatrix {
    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Result<Self> {
        let m = Self { a11, a12, a21, a22 };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        let ok = [self.a11, self.a12, self.a21, self.a22]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "Beta matrix entries must be positive: {self:?}"
            )))
        }
    }

    /// Posterior update by the observed counts.
    pub fn updated(&self, data: &TwoPropData) -> Self {
        Self {
            a11: self.a11 + data.y1 as f64,
            a12: self.a12 + (data.n1 - data.y1) as f64,
            a21: self.a21 + data.y2 as f64,
            a22: self.a22 + (data.n2 - data.y2) as f64,
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            a11: self.a21,
            a12: self.a22,
            a21: self.a11,
            a22: self.a12,
        }
    }
}

/// `b = (b0, b1, b2)`, moment order `h` and training sizes `t = (t1, t2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPropHyper {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub h: u32,
    pub t1: u64,
    pub t2: u64,
}

impl TwoPropHyper {
    pub fn new(b0: f64, b1: f64, b2: f64, h: u32, t1: u64, t2: u64) -> Result<Self> {
        for (name, v) in [("b0", b0), ("b1", b1), ("b2", b2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            b0,
            b1,
            b2,
            h,
            t1,
            t2,
        })
    }

    pub fn swapped(&self) -> Self {
        Self {
            b1: self.b2,
            b2: self.b1,
            t1: self.t2,
            t2: self.t1,
            ..*self
        }
    }

    pub fn t_plus(&self) -> u64 {
        self.t1 + self.t2
    }

    /// Component prior for training outcome `(x1, x2)`.
    pub fn component(&self, x1: u64, x2: u64) -> BetaMatrix {
        BetaMatrix {
            a11: self.b1 + x1 as f64,
            a12: self.b1 + (self.t1 - x1) as f64,
            a21: self.b2 + x2 as f64,
            a22: self.b2 + (self.t2 - x2) as f64,
        }
    }
}

/// Recommended hyperparameters: `b0 = 1/2`, `b_i` proportional to `n_i`
/// with `b1 + b2 = b0`, and `t_plus` split proportionally to `n_i` by
/// largest remainder.
pub fn default_hyper(n1: u64, n2: u64, h: u32, t_plus: u64) -> Result<TwoPropHyper> {
    if n1 + n2 == 0 {
        return Err(Error::InvalidInput(
            "default_hyper needs n1 + n2 > 0".into(),
        ));
    }
    let b0 = 0.5;
    let tot = (n1 + n2) as f64;
    let t = largest_remainder(t_plus, &[n1 as f64, n2 as f64]);
    let b1 = b0 * n1 as f64 / tot;
    let b2 = b0 * n2 as f64 / tot;
    if b1 == 0.0 || b2 == 0.0 {
        return Err(Error::InvalidInput(format!(
            "default_hyper needs both groups non-empty, got n = ({n1}, {n2})"
        )));
    }
    TwoPropHyper::new(b0, b1, b2, h, t[0], t[1])
}

/// `ln K(a, h)` by the alternating double-Beta sum; errors on cancellation.
pub fn log_k_const2(a: &BetaMatrix, h: u32) -> Result<f64> {
    let (v, rel) = log_k2_alternating(a, h)?;
    if rel > K_CANCELLATION_LIMIT {
        return Err(Error::Cancellation {
            relative_error: rel,
            limit: K_CANCELLATION_LIMIT,
        });
    }
    Ok(v)
}

fn log_k2_alternating(a: &BetaMatrix, h: u32) -> Result<(f64, f64)> {
    a.check()?;
    if h == 0 {
        return Ok((0.0, 0.0));
    }
    let order = 2 * h as usize;
    // ln E[theta^j] for j = 0..=order as running sums of ln((a + i) / (a + b + i))
    let raw_moments = |a1: f64, a2: f64| {
        let mut out = Vec::with_capacity(order + 1);
        let (mut acc, mut abs) = (0.0f64, 0.0f64);
        out.push(0.0);
        for i in 0..order {
            let l = ((a1 + i as f64) / (a1 + a2 + i as f64)).ln();
            acc += l;
            abs += l.abs();
            out.push(acc);
        }
        (out, abs)
    };
    let (m1, e1) = raw_moments(a.a11, a.a12);
    let (m2, e2) = raw_moments(a.a21, a.a22);
    let binom = log_binomials(order);
    let terms: Vec<SignedLogValue> = (0..=order)
        .map(|j| {
            let lm = binom[j] + m1[j] + m2[order - j];
            if j % 2 == 0 {
                SignedLogValue::positive(lm)
            } else {
                SignedLogValue::negative(lm)
            }
        })
        .collect();
    let (sum, diag) = signed_log_sum(&terms);
    let term_err = 4.0 * f64::EPSILON * (e1 + e2 + 2.0 * order as f64 + binom[order / 2] + 1.0);
    let rel = diag.relative_error_bound_with(terms.len(), term_err);
    if sum.sign != Sign::Positive {
        return Ok((f64::NAN, f64::INFINITY));
    }
    Ok((sum.log_magnitude, rel))
}

/// `ln C(n, j)` for `j = 0..=n`, from exact integers while they fit.
fn log_binomials(n: usize) -> Vec<f64> {
    if n > 120 {
        return (0..=n).map(|j| log_choose(n as u64, j as u64)).collect();
    }
    let mut c: u128 = 1;
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        out.push((c as f64).ln());
        c = c * (n - j) as u128 / (j + 1) as u128;
    }
    out
}

/// `K(a, h) = E[(theta1 - theta2)^(2h)]` under the product Beta prior.
pub fn k_const2(a: &BetaMatrix, h: u32) -> Result<f64> {
    log_k_const2(a, h).map(f64::exp)
}

/// `ln K(a, h)` from moments of each factor about the midpoint of the two
/// means.
pub fn log_k_const2_centered(a: &BetaMatrix, h: u32) -> Result<f64> {
    a.check()?;
    let order = 2 * h as usize;
    let c = 0.5 * (a.a11 / (a.a11 + a.a12) + a.a21 / (a.a21 + a.a22));
    let m1 = beta_moments_about(a.a11, a.a12, c, order);
    let m2 = beta_moments_about(a.a21, a.a22, c, order);
    let terms: Vec<f64> = (0..=order)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * log_choose(order as u64, j as u64).exp() * m1[j] * m2[order - j]
        })
        .collect();
    let v = compensated_sum(&terms);
    if v > 0.0 && v.is_finite() {
        Ok(v.ln())
    } else {
        Err(Error::Domain(format!(
            "centered expansion gave non-positive K for {a:?}"
        )))
    }
}

pub(crate) fn log_k2_robust(a: &BetaMatrix, h: u32) -> Result<f64> {
    let (v, rel) = log_k2_alternating(a, h)?;
    if rel <= K_ROBUST_SWITCH {
        Ok(v)
    } else {
        log_k_const2_centered(a, h)
    }
}

/// `ln m0(x1, x2 | b0)`: marginal probability of the training outcome
/// under the null with a `Beta(b0, b0)` prior on the common proportion.
pub fn log_m0_training(x1: u64, x2: u64, t1: u64, t2: u64, b0: f64) -> Result<f64> {
    if x1 > t1 || x2 > t2 {
        return Err(Error::InvalidInput(format!(
            "training outcome ({x1}, {x2}) exceeds sizes ({t1}, {t2})"
        )));
    }
    let xp = (x1 + x2) as f64;
    let tp = (t1 + t2) as f64;
    Ok(
        log_choose(t1, x1) + log_choose(t2, x2) + log_beta_unchecked(b0 + xp, b0 + tp - xp)
            - log_beta_unchecked(b0, b0),
    )
}

pub fn m0_training(x1: u64, x2: u64, t1: u64, t2: u64, b0: f64) -> Result<f64> {
    log_m0_training(x1, x2, t1, t2, b0).map(f64::exp)
}

/// `ln BF10` for the local conjugate prior `a` against `Beta(b0, b0)`
/// under the null.
pub fn log_bf10_conjugate2(data: &TwoPropData, a: &BetaMatrix, b0: f64) -> f64 {
    let post = a.updated(data);
    let yp = data.y_plus() as f64;
    let np = data.n_plus() as f64;
    log_beta_unchecked(b0, b0)
        + log_beta_unchecked(post.a11, post.a12)
        + log_beta_unchecked(post.a21, post.a22)
        - log_beta_unchecked(a.a11, a.a12)
        - log_beta_unchecked(a.a21, a.a22)
        - log_beta_unchecked(b0 + yp, b0 + np - yp)
}

/// `ln BF10` under the moment prior of order `h` built on `a`.
pub fn log_bf10_moment2(data: &TwoPropData, a: &BetaMatrix, h: u32, b0: f64) -> Result<f64> {
    a.check()?;
    if !(b0 > 0.0) {
        return Err(Error::Domain(format!("b0 must be positive, got {b0}")));
    }
    let log_k_prior = if h == 0 { 0.0 } else { log_k2_robust(a, h)? };
    moment2_given_prior(data, a, h, b0, log_k_prior)
}

fn moment2_given_prior(
    data: &TwoPropData,
    a: &BetaMatrix,
    h: u32,
    b0: f64,
    log_k_prior: f64,
) -> Result<f64> {
    let k_ratio = if h == 0 {
        0.0
    } else {
        log_k2_robust(&a.updated(data), h)? - log_k_prior
    };
    Ok(k_ratio + log_bf10_conjugate2(data, a, b0))
}

pub fn bf10_moment2(data: &TwoPropData, a: &BetaMatrix, h: u32, b0: f64) -> Result<f64> {
    log_bf10_moment2(data, a, h, b0).map(f64::exp)
}

/// `ln BF10` under the intrinsic moment prior: the full `m0`-weighted
/// double mixture over training outcomes.
pub fn log_bf10_intrinsic_moment2(data: &TwoPropData, hyper: &TwoPropHyper) -> Result<f64> {
    PriorComponents::new(hyper)?.log_bf10(data)
}

/// As [`log_bf10_intrinsic_moment2`] for several tables sharing `hyper`;
/// the data-free part of each mixture component is computed once.
pub fn log_bf10_intrinsic_moment2_batch(
    data: &[TwoPropData],
    hyper: &TwoPropHyper,
) -> Result<Vec<f64>> {
    let prior = PriorComponents::new(hyper)?;
    data.iter().map(|d| prior.log_bf10(d)).collect()
}

/// Mixture components with their prior `ln K` and `ln m0` weight.
struct PriorComponents {
    h: u32,
    b0: f64,
    comps: Vec<(BetaMatrix, f64, f64)>,
}

impl PriorComponents {
    fn new(hyper: &TwoPropHyper) -> Result<Self> {
        if !(hyper.b0 > 0.0) {
            return Err(Error::Domain(format!(
                "b0 must be positive, got {}",
                hyper.b0
            )));
        }
        let mut comps = Vec::with_capacity(((hyper.t1 + 1) * (hyper.t2 + 1)) as usize);
        for x1 in 0..=hyper.t1 {
            for x2 in 0..=hyper.t2 {
                let a = hyper.component(x1, x2);
                a.check()?;
                let lk = if hyper.h == 0 {
                    0.0
                } else {
                    log_k2_robust(&a, hyper.h)?
                };
                comps.push((
                    a,
                    lk,
                    log_m0_training(x1, x2, hyper.t1, hyper.t2, hyper.b0)?,
                ));
            }
        }
        Ok(Self {
            h: hyper.h,
            b0: hyper.b0,
            comps,
        })
    }

    fn log_bf10(&self, data: &TwoPropData) -> Result<f64> {
        let logs = self
            .comps
            .iter()
            .map(|(a, lk, lw)| Ok(moment2_given_prior(data, a, self.h, self.b0, *lk)? + lw))
            .collect::<Result<Vec<f64>>>()?;
        Ok(log_sum_exp(&logs))
    }
}

pub fn bf10_intrinsic_moment2(data: &TwoPropData, hyper: &TwoPropHyper) -> Result<f64> {
    log_bf10_intrinsic_moment2(data, hyper).map(f64::exp)
}

pub fn evidence2(data: &TwoPropData, hyper: &TwoPropHyper) -> Result<EvidenceReport> {
    log_bf10_intrinsic_moment2(data, hyper).map(EvidenceReport::from_log_bf10)
}

/// Posterior means `(E[theta1 | y], E[theta2 | y])` under the intrinsic
/// moment prior of the alternative.
///
/// Each mixture component keeps the moment-prior form after updating, so
/// its mean is the conjugate mean times a ratio of `K` constants with one
/// shape parameter shifted by one.
pub fn posterior_means2(data: &TwoPropData, hyper: &TwoPropHyper) -> Result<(f64, f64)> {
    let h = hyper.h;
    let mut log_w = Vec::new();
    let mut means = Vec::new();
    for x1 in 0..=hyper.t1 {
        for x2 in 0..=hyper.t2 {
            let a = hyper.component(x1, x2);
            log_w.push(
                log_bf10_moment2(data, &a, h, hyper.b0)?
                    + log_m0_training(x1, x2, hyper.t1, hyper.t2, hyper.b0)?,
            );
            let p = a.updated(data);
            let (r1, r2) = if h == 0 {
                (0.0, 0.0)
            } else {
                let lk = log_k2_robust(&p, h)?;
                let s1 = BetaMatrix {
                    a11: p.a11 + 1.0,
                    ..p
                };
                let s2 = BetaMatrix {
                    a21: p.a21 + 1.0,
                    ..p
                };
                (log_k2_robust(&s1, h)? - lk, log_k2_robust(&s2, h)? - lk)
            };
            means.push((
                p.a11 / (p.a11 + p.a12) * r1.exp(),
                p.a21 / (p.a21 + p.a22) * r2.exp(),
            ));
        }
    }
    let norm = log_sum_exp(&log_w);
    let (mut m1, mut m2) = (0.0, 0.0);
    for (lw, (e1, e2)) in log_w.iter().zip(means) {
        let w = (lw - norm).exp();
        m1 += w * e1;
        m2 += w * e2;
    }
    Ok((m1, m2))
}

/// Intrinsic moment prior density at an interior point `(theta1, theta2)`.
pub fn intrinsic_moment_prior_density2(
    theta1: f64,
    theta2: f64,
    hyper: &TwoPropHyper,
) -> Result<f64> {
    for th in [theta1, theta2] {
        if !(th > 0.0 && th < 1.0) {
            return Err(Error::Domain(format!("theta out of (0, 1): {th}")));
        }
    }
    if hyper.h > 0 && theta1 == theta2 {
        return Ok(0.0);
    }
    let moment = if hyper.h == 0 {
        0.0
    } else {
        2.0 * hyper.h as f64 * (theta1 - theta2).abs().ln()
    };
    let mut logs = Vec::with_capacity(((hyper.t1 + 1) * (hyper.t2 + 1)) as usize);
    for x1 in 0..=hyper.t1 {
        for x2 in 0..=hyper.t2 {
            let a = hyper.component(x1, x2);
            logs.push(
                log_m0_training(x1, x2, hyper.t1, hyper.t2, hyper.b0)? + moment
                    - log_k2_robust(&a, hyper.h)?
                    + log_beta_pdf(theta1, a.a11, a.a12)
                    + log_beta_pdf(theta2, a.a21, a.a22),
            );
        }
    }
    Ok(log_sum_exp(&logs).exp())
}

/// Monte Carlo estimate of `corr(theta1, theta2)` under an intrinsic
/// moment prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub r: f64,
    /// Approximate standard error, `(1 - r^2) / sqrt(samples)`.
    pub se: f64,
    pub samples: usize,
    pub acceptance_rate: f64,
}

/// Draws `(x1, x2) ~ m0`, then `(theta1, theta2)` from the component moment
/// prior by rejection from its product-Beta base with acceptance
/// probability `(theta1 - theta2)^(2h) <= 1`.
pub fn prior_correlation(
    hyper: &TwoPropHyper,
    samples: usize,
    rng: RngStream,
) -> Result<CorrelationEstimate> {
    if samples < 1000 {
        return Err(Error::InvalidInput(format!(
            "prior_correlation needs at least 1000 samples, got {samples}"
        )));
    }
    let mut components = Vec::new();
    let mut weights = Vec::new();
    for x1 in 0..=hyper.t1 {
        for x2 in 0..=hyper.t2 {
            let a = hyper.component(x1, x2);
            components.push((
                Beta::new(a.a11, a.a12).map_err(|e| Error::Domain(e.to_string()))?,
                Beta::new(a.a21, a.a22).map_err(|e| Error::Domain(e.to_string()))?,
            ));
            weights.push(m0_training(x1, x2, hyper.t1, hyper.t2, hyper.b0)?);
        }
    }
    let picker = rand_distr::weighted::WeightedIndex::new(&weights)
        .map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = rng.rng();
    let max_proposals = samples.saturating_mul(1_000_000);
    let (mut proposals, mut accepted) = (0usize, 0usize);
    let (mut s1, mut s2, mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0, 0.0, 0.0);
    while accepted < samples {
        if proposals >= max_proposals {
            return Err(Error::MonteCarlo(format!(
                "rejection sampler accepted {accepted} of {proposals} proposals"
            )));
        }
        proposals += 1;
        let (d1, d2) = &components[picker.sample(&mut rng)];
        let th1: f64 = d1.sample(&mut rng);
        let th2: f64 = d2.sample(&mut rng);
        if hyper.h > 0 {
            let p = (th1 - th2).powi(2 * hyper.h as i32);
            if rng.random::<f64>() >= p {
                continue;
            }
        }
        accepted += 1;
        s1 += th1;
        s2 += th2;
        s11 += th1 * th1;
        s22 += th2 * th2;
        s12 += th1 * th2;
    }
    let n = samples as f64;
    let cov = s12 / n - (s1 / n) * (s2 / n);
    let v1 = s11 / n - (s1 / n).powi(2);
    let v2 = s22 / n - (s2 / n).powi(2);
    let r = cov / (v1 * v2).sqrt();
    let acceptance_rate = accepted as f64 / proposals as f64;
    if acceptance_rate < 1e-3 {
        log::warn!(
            "prior_correlation: rejection acceptance rate {acceptance_rate:.2e} is below 1e-3"
        );
    }
    Ok(CorrelationEstimate {
        r,
        se: (1.0 - r * r) / n.sqrt(),
        samples,
        acceptance_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2_examples() {
        let a = BetaMatrix::new(0.3, 2.0, 7.0, 1.5).unwrap();
        assert_eq!(k_const2(&a, 0).unwrap(), 1.0);
        let ones = BetaMatrix::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let k = k_const2(&ones, 1).unwrap();
        assert!((k - 1.0 / 6.0).abs() < 1e-14, "{k}");
    }

    #[test]
    fn k2_paths_agree() {
        for &(a11, a12, a21, a22) in &[
            (0.25, 0.25, 0.25, 0.25),
            (1.0, 2.0, 3.0, 4.0),
            (10.25, 3.25, 2.25, 9.25),
            (40.0, 60.0, 41.0, 59.0),
        ] {
            let a = BetaMatrix::new(a11, a12, a21, a22).unwrap();
            for h in 0..=3 {
                let cen = log_k_const2_centered(&a, h).unwrap();
                let Ok(alt) = log_k_const2(&a, h) else {
                    assert!(h >= 2, "{a:?} h={h} escalated");
                    continue;
                };
                assert!(
                    (alt - cen).abs() < K_CANCELLATION_LIMIT,
                    "{a:?} h={h}: {alt} vs {cen}"
                );
            }
        }
    }

    #[test]
    fn k2_cancellation_escalates() {
        let a = BetaMatrix::new(2.0e5, 6.0e5, 2.0e5, 6.0e5).unwrap();
        assert!(matches!(
            log_k_const2(&a, 2),
            Err(Error::Cancellation { .. })
        ));
        let robust = log_k2_robust(&a, 2).unwrap().exp();
        // theta1 - theta2 is approximately N(0, 2 var): fourth moment 3 (2 var)^2
        let s = 8.0e5f64;
        let var = 2.0e5 * 6.0e5 / (s * s * (s + 1.0));
        assert!((robust / (12.0 * var * var) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn m0_examples() {
        assert_eq!(m0_training(0, 0, 0, 0, 0.5).unwrap(), 1.0);
        let want = (log_beta_unchecked(0.5, 2.5) - log_beta_unchecked(0.5, 0.5)).exp();
        assert!((m0_training(0, 0, 1, 1, 0.5).unwrap() - want).abs() < 1e-15);
        let total: f64 = (0..=2)
            .flat_map(|x1| (0..=2).map(move |x2| m0_training(x1, x2, 2, 2, 0.5).unwrap()))
            .sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn moment_bf_examples() {
        let a = BetaMatrix::new(0.25, 0.25, 0.25, 0.25).unwrap();
        let empty = TwoPropData::new(0, 0, 0, 0).unwrap();
        assert_eq!(bf10_moment2(&empty, &a, 0, 0.5).unwrap(), 1.0);
        assert!((bf10_moment2(&empty, &a, 2, 0.5).unwrap() - 1.0).abs() < 1e-14);

        let d = TwoPropData::new(0, 1, 1, 1).unwrap();
        let lb = log_beta_unchecked;
        let want =
            (lb(0.5, 0.5) + lb(0.25, 1.25) + lb(1.25, 0.25) - 2.0 * lb(0.25, 0.25) - lb(1.5, 1.5))
                .exp();
        assert!((bf10_moment2(&d, &a, 0, 0.5).unwrap() / want - 1.0).abs() < 1e-13);
    }

    #[test]
    fn default_hyper_examples() {
        let h = default_hyper(10, 10, 1, 8).unwrap();
        assert_eq!((h.b0, h.b1, h.b2, h.t1, h.t2), (0.5, 0.25, 0.25, 4, 4));
        let h = default_hyper(30, 10, 1, 8).unwrap();
        assert_eq!((h.t1, h.t2), (6, 2));
        let h = default_hyper(21, 26, 1, 8).unwrap();
        assert_eq!((h.t1, h.t2), (4, 4));
        assert!((h.b1 + h.b2 - 0.5).abs() < 1e-15);
        assert!(default_hyper(0, 0, 1, 8).is_err());
    }

    #[test]
    fn intrinsic_reduces_to_conjugate_at_zero_training() {
        let hyper = TwoPropHyper::new(0.5, 0.25, 0.25, 0, 0, 0).unwrap();
        let d = TwoPropData::new(3, 9, 7, 11).unwrap();
        let a = hyper.component(0, 0);
        let got = log_bf10_intrinsic_moment2(&d, &hyper).unwrap();
        assert!((got - log_bf10_conjugate2(&d, &a, 0.5)).abs() < 1e-13);
    }

    #[test]
    fn label_symmetry() {
        let hyper = TwoPropHyper::new(0.5, 0.2, 0.3, 1, 3, 5).unwrap();
        let d = TwoPropData::new(2, 7, 9, 15).unwrap();
        let a = log_bf10_intrinsic_moment2(&d, &hyper).unwrap();
        let b = log_bf10_intrinsic_moment2(&d.swapped(), &hyper.swapped()).unwrap();
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn correlation_signs() {
        let indep = TwoPropHyper::new(0.5, 0.25, 0.25, 0, 0, 0).unwrap();
        let c = prior_correlation(&indep, 20_000, RngStream::new(1)).unwrap();
        assert!(c.r.abs() < 4.0 * c.se, "{c:?}");
        let nonlocal = TwoPropHyper::new(0.5, 0.25, 0.25, 1, 0, 0).unwrap();
        let c = prior_correlation(&nonlocal, 20_000, RngStream::new(2)).unwrap();
        assert!(c.r < -0.1, "{c:?}");
        assert!(prior_correlation(&indep, 10, RngStream::new(1)).is_err());
    }

    #[test]
    fn posterior_means_reduce_and_swap() {
        let d = TwoPropData::new(3, 10, 7, 12).unwrap();
        let local = TwoPropHyper::new(0.5, 0.25, 0.25, 0, 0, 0).unwrap();
        let (m1, m2) = posterior_means2(&d, &local).unwrap();
        assert!((m1 - 3.25 / 10.5).abs() < 1e-15);
        assert!((m2 - 7.25 / 12.5).abs() < 1e-15);
        let hyper = TwoPropHyper::new(0.5, 0.2, 0.3, 2, 4, 6).unwrap();
        let (a1, a2) = posterior_means2(&d, &hyper).unwrap();
        let (b2, b1) = posterior_means2(&d.swapped(), &hyper.swapped()).unwrap();
        assert!((a1 - b1).abs() < 1e-13 && (a2 - b2).abs() < 1e-13);
        // the nonlocal prior pushes the two means apart
        assert!(a2 - a1 > m2 - m1);
    }
}
