//! Special functions, stable summation and random streams shared by every
//! other module.

mod apportion;
mod gamma;
mod moments;
mod rng;
mod signed;

pub use apportion::largest_remainder;
pub(crate) use gamma::{ln_complement, log_beta_unchecked, log_gamma_error_scale};
pub use gamma::{log_beta, log_beta_pdf, log_binom_pmf, log_choose, log_gamma};
pub use moments::beta_moments_about;
pub use rng::RngStream;
pub use signed::{
    compensated_sum, log1p_exp, log_sum_exp, signed_log_sum, Sign, SignedLogValue, SumDiagnostics,
    CANCELLATION_FLAG,
};
