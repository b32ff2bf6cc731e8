//! Training-size selection by total weight of evidence on minimal data.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bernoulli::{log_bf10_intrinsic_moment, BernoulliNull, BinData, MomentPriorSpec};
use crate::error::{Error, Result};
use crate::logit::{
    default_conjugate_hyper, enumerate_or_sample_training, im_marginal_from_terms, Allocation,
    ConjugateChain, LogitProblem, McmcConfig, ModelId, TrainingDesign,
};
use crate::two_props::{log_bf10_intrinsic_moment2_batch, TwoPropData, TwoPropHyper};

/// Members of the argmax set lie within this absolute distance of the max.
pub const ARGMAX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoeCurve {
    pub grid: Vec<u64>,
    pub twoe: Vec<f64>,
    pub argmax_set: Vec<u64>,
    /// Smallest member of `argmax_set`.
    pub t_star: u64,
    /// Monte Carlo standard errors, for curves estimated by simulation.
    pub mc_se: Option<Vec<f64>>,
}

impl TwoeCurve {
    fn from_values(grid: Vec<u64>, twoe: Vec<f64>, mc_se: Option<Vec<f64>>) -> Result<Self> {
        let max = twoe.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::Domain(
                "total weight of evidence is not finite".into(),
            ));
        }
        let argmax_set: Vec<u64> = grid
            .iter()
            .zip(&twoe)
            .filter(|(_, v)| max - **v <= ARGMAX_TOL)
            .map(|(t, _)| *t)
            .collect();
        Ok(Self {
            t_star: argmax_set[0],
            grid,
            twoe,
            argmax_set,
            mc_se,
        })
    }

    pub fn at(&self, t: u64) -> Option<f64> {
        self.grid.iter().position(|&g| g == t).map(|i| self.twoe[i])
    }
}

/// `WOE_y(t)` for the three outcomes of `n = 2` trials at `theta0 = 1/2`.
pub fn woe_bernoulli(b: f64, h: u32, t: u32) -> Result<[f64; 3]> {
    let null = BernoulliNull::new(0.5)?;
    let spec = MomentPriorSpec::new(b, h, t)?;
    let mut out = [0.0; 3];
    for (y, o) in out.iter_mut().enumerate() {
        *o = log_bf10_intrinsic_moment(BinData::new(y as u64, 2)?, null, spec)?;
    }
    Ok(out)
}

/// TWOE over `t = 0..=t_max` for the Bernoulli test.
pub fn twoe_bernoulli(b: f64, h: u32, t_max: u32) -> Result<TwoeCurve> {
    let grid: Vec<u64> = (0..=t_max as u64).collect();
    let twoe = grid
        .iter()
        .map(|&t| woe_bernoulli(b, h, t as u32).map(|w| w.iter().sum()))
        .collect::<Result<Vec<f64>>>()?;
    TwoeCurve::from_values(grid, twoe, None)
}

/// TWOE over even `t_plus = 0, 2, ..., t_plus_max` for the two-proportion
/// test on `n1 = n2 = 1`, with `b1 = b2 = b0 / 2` and `t1 = t2 = t_plus / 2`.
pub fn twoe_two_props(b0: f64, h: u32, t_plus_max: u64) -> Result<TwoeCurve> {
    if !t_plus_max.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "t_plus_max must be even, got {t_plus_max}"
        )));
    }
    let grid: Vec<u64> = (0..=t_plus_max).step_by(2).collect();
    let outcomes = [(0, 0), (0, 1), (1, 0), (1, 1)];
    let twoe = grid
        .par_iter()
        .map(|&tp| {
            let hyper = TwoPropHyper::new(b0, b0 / 2.0, b0 / 2.0, h, tp / 2, tp / 2)?;
            let data = outcomes
                .iter()
                .map(|&(y1, y2)| TwoPropData::new(y1, 1, y2, 1))
                .collect::<Result<Vec<_>>>()?;
            let woe = log_bf10_intrinsic_moment2_batch(&data, &hyper)?;
            Ok(woe.iter().sum())
        })
        .collect::<Result<Vec<f64>>>()?;
    TwoeCurve::from_values(grid, twoe, None)
}

/// TWOE of the model with every column against the intercept-only model,
/// over all `2^N` outcomes of one trial per covariate pattern.
///
/// Estimated by simulation; the curve is noisy near its maximum. Standard
/// errors add the per-outcome errors linearly, which bounds them from
/// above since the prior-side chains are shared across outcomes.
pub fn twoe_logit(
    design: &LogitProblem,
    h: u32,
    t_plus_grid: &[u64],
    rule: Allocation,
    config: &McmcConfig,
) -> Result<TwoeCurve> {
    if t_plus_grid.is_empty() {
        return Err(Error::InvalidInput("t_plus grid is empty".into()));
    }
    config.validate()?;
    let patterns = design.patterns();
    if patterns > 16 {
        return Err(Error::InvalidInput(format!(
            "minimal-data enumeration over {patterns} patterns is too large"
        )));
    }
    let ones = vec![1u64; patterns];
    let minimal = design.with_counts(vec![0; patterns], ones.clone())?;
    let hyper = default_conjugate_hyper(&minimal)?;
    let full = ModelId::new((0..design.columns()).collect())?;
    let null = ModelId::null();
    let outcomes: Vec<Vec<u64>> = (0..1u64 << patterns)
        .map(|bits| (0..patterns).map(|i| (bits >> i) & 1).collect())
        .collect();

    // chains: per model, one prior chain and one per outcome
    let mut per_model = Vec::new();
    for model in [&full, &null] {
        let x = minimal.design(model)?;
        let stream = config.seed.derive(0x1_0000 + model.mask());
        let prior = ConjugateChain::run(&x, &hyper.u, &hyper.w, config, stream.derive(0))?;
        let posts = outcomes
            .par_iter()
            .enumerate()
            .map(|(k, y)| {
                let (z, s) = hyper.augmented(y, &ones);
                ConjugateChain::run(&x, &z, &s, config, stream.derive(1 + k as u64))
            })
            .collect::<Result<Vec<_>>>()?;
        per_model.push((prior, posts));
    }

    let mut twoe = Vec::with_capacity(t_plus_grid.len());
    let mut se = Vec::with_capacity(t_plus_grid.len());
    for &tp in t_plus_grid {
        let t = TrainingDesign::proportional(tp, &ones, rule);
        let terms = enumerate_or_sample_training(&hyper, &t, config.seed.derive(u64::MAX))?;
        let mut total = 0.0;
        let mut err = 0.0;
        for (sign, (prior, posts)) in [1.0, -1.0].iter().zip(&per_model) {
            let prior_terms = prior.mixture_terms(&terms, h)?;
            for (y, post) in outcomes.iter().zip(posts) {
                let post_terms = post.mixture_terms(&terms, h)?;
                let m = im_marginal_from_terms(&prior_terms, &post_terms, y, &ones, &terms);
                total += sign * m.log_m;
                err += m.se;
            }
        }
        twoe.push(total);
        se.push(err);
    }
    TwoeCurve::from_values(t_plus_grid.to_vec(), twoe, Some(se))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_optima() {
        assert_eq!(twoe_bernoulli(1.0, 1, 60).unwrap().t_star, 8);
        assert_eq!(twoe_bernoulli(1.0, 2, 60).unwrap().t_star, 13);
        let c = twoe_bernoulli(1.0, 0, 60).unwrap();
        assert_eq!(c.argmax_set, vec![0, 1]);
        assert_eq!(c.t_star, 0);
    }

    #[test]
    fn two_prop_optima() {
        assert_eq!(twoe_two_props(0.5, 0, 60).unwrap().t_star, 0);
        assert_eq!(twoe_two_props(0.5, 1, 60).unwrap().t_star, 8);
        assert_eq!(twoe_two_props(0.5, 2, 60).unwrap().t_star, 14);
        assert!(twoe_two_props(0.5, 1, 7).is_err());
    }

    #[test]
    fn woe_symmetry_and_monotonicity() {
        for h in 0..=2 {
            let mut prev: Option<[f64; 3]> = None;
            for t in 0..=40 {
                let w = woe_bernoulli(1.0, h, t).unwrap();
                assert_eq!(w[0], w[2], "h={h} t={t}");
                if let Some(p) = prev {
                    assert!(w[1] >= p[1] - 1e-12, "WOE_1 decreased at h={h} t={t}");
                    assert!(w[0] <= p[0] + 1e-12, "WOE_0 increased at h={h} t={t}");
                }
                prev = Some(w);
            }
        }
    }
}
