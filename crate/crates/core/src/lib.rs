//! Objective Bayesian comparison of nested discrete-data models with
//! intrinsic moment priors.
//!
//! - [`bernoulli`]: point null on a single binomial proportion.
//! - [`two_props`]: equality of two binomial proportions.
//! - [`logit`]: variable selection in binomial logistic regression, with
//!   MCMC estimates of every normalizing constant.
//! - [`studies`]: training-size selection by total weight of evidence,
//!   evidence curves, learning-rate simulations, sensitivity analysis and
//!   leave-one-out scoring.

// `!(x > 0.0)` style checks deliberately reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bernoulli;
pub mod datasets;
pub mod error;
pub mod logit;
pub mod numeric;
mod report;
pub mod studies;
pub mod two_props;

pub use error::{Error, Result};
pub use report::{posterior_prob_m1, prob_from_log_bf10, EvidenceReport};
