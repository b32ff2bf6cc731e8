//! Analyses built on the Bayes factor engines: training-size selection,
//! evidence curves, learning rates, sensitivity and cross-validation.

mod crossval;
mod curves;
mod rate;
mod sensitivity;
mod twoe;

pub use crossval::{
    averaged_means, cross_validation, log_score, loo_forecasts, score_from_forecasts, CvForecasts,
    CvScore,
};
pub use curves::{
    average_null_probability_bernoulli, average_null_probability_two_props, evidence_curve,
    CurvePoint, EvidenceCurve,
};
pub use rate::{
    bernoulli_kl, k_star, learning_rate_sim, ols, RateFit, RateModel, RatePoint, RateStudy, Regime,
    Truth, BOOTSTRAP_RESAMPLES, DEFAULT_ALT_GRID, DEFAULT_NULL_GRID,
};
pub use sensitivity::{
    default_t_plus, default_t_ranges, sensitivity_analysis, SensitivityRow, TableSensitivity,
    DEFAULT_T_PLUS_MAX,
};
pub use twoe::{twoe_bernoulli, twoe_logit, twoe_two_props, woe_bernoulli, TwoeCurve, ARGMAX_TOL};
