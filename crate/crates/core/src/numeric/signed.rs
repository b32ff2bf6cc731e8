//! Real numbers stored as sign and log-magnitude, and stable sums over them.

use serde::{Deserialize, Serialize};

/// Ratio `|sum| / sum(|terms|)` below which a sum is flagged as cancelled.
pub const CANCELLATION_FLAG: f64 = 1e-12;

/// Sign of a [`SignedLogValue`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Negative => -1.0,
            Sign::Zero => 0.0,
            Sign::Positive => 1.0,
        }
    }

    fn flip(self) -> Self {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

/// A real value `sign * exp(log_magnitude)`.
///
/// Zero is represented with `Sign::Zero` and `log_magnitude = -inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedLogValue {
    pub log_magnitude: f64,
    pub sign: Sign,
}

impl SignedLogValue {
    pub const ZERO: Self = Self {
        log_magnitude: f64::NEG_INFINITY,
        sign: Sign::Zero,
    };

    pub fn positive(log_magnitude: f64) -> Self {
        Self::new(log_magnitude, Sign::Positive)
    }

    pub fn negative(log_magnitude: f64) -> Self {
        Self::new(log_magnitude, Sign::Negative)
    }

    pub fn new(log_magnitude: f64, sign: Sign) -> Self {
        if sign == Sign::Zero || log_magnitude == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                log_magnitude,
                sign,
            }
        }
    }

    pub fn from_f64(value: f64) -> Self {
        if value > 0.0 {
            Self::positive(value.ln())
        } else if value < 0.0 {
            Self::negative((-value).ln())
        } else {
            Self::ZERO
        }
    }

    pub fn value(&self) -> f64 {
        match self.sign {
            Sign::Zero => 0.0,
            s => s.as_f64() * self.log_magnitude.exp(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }

    /// Multiply by `exp(log_factor)`.
    pub fn scale(self, log_factor: f64) -> Self {
        if self.is_zero() {
            self
        } else {
            Self::new(self.log_magnitude + log_factor, self.sign)
        }
    }
}

impl std::ops::Neg for SignedLogValue {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            log_magnitude: self.log_magnitude,
            sign: self.sign.flip(),
        }
    }
}

/// Cancellation report from [`signed_log_sum`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumDiagnostics {
    /// `|sum| / sum(|terms|)`; 1 when no cancellation occurred.
    pub cancellation_ratio: f64,
    /// Set when the ratio fell below [`CANCELLATION_FLAG`].
    pub flagged: bool,
}

impl SumDiagnostics {
    /// First-order bound on the relative rounding error of the sum.
    pub fn relative_error_bound(&self, n_terms: usize) -> f64 {
        if self.cancellation_ratio == 0.0 {
            return f64::INFINITY;
        }
        (n_terms.max(1) as f64) * f64::EPSILON / self.cancellation_ratio
    }

    /// As [`Self::relative_error_bound`], when each term's log-magnitude
    /// already carries an absolute error of up to `term_log_error`.
    pub fn relative_error_bound_with(&self, n_terms: usize, term_log_error: f64) -> f64 {
        if self.cancellation_ratio == 0.0 {
            return f64::INFINITY;
        }
        ((n_terms.max(1) as f64) * f64::EPSILON + term_log_error) / self.cancellation_ratio
    }
}

/// Sum of the represented values, computed by factoring out the largest
/// magnitude and accumulating the scaled terms with compensation.
pub fn signed_log_sum(terms: &[SignedLogValue]) -> (SignedLogValue, SumDiagnostics) {
    let max = terms
        .iter()
        .filter(|t| !t.is_zero())
        .map(|t| t.log_magnitude)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return (
            SignedLogValue::ZERO,
            SumDiagnostics {
                cancellation_ratio: 1.0,
                flagged: false,
            },
        );
    }
    let scaled: Vec<f64> = terms
        .iter()
        .filter(|t| !t.is_zero())
        .map(|t| t.sign.as_f64() * (t.log_magnitude - max).exp())
        .collect();
    let abs_total: f64 = scaled.iter().map(|v| v.abs()).sum();
    let total = compensated_sum(&scaled);
    let ratio = total.abs() / abs_total;
    let diag = SumDiagnostics {
        cancellation_ratio: ratio,
        flagged: ratio < CANCELLATION_FLAG,
    };
    let value = if total == 0.0 {
        SignedLogValue::ZERO
    } else {
        SignedLogValue::new(
            total.abs().ln() + max,
            if total > 0.0 {
                Sign::Positive
            } else {
                Sign::Negative
            },
        )
    };
    (value, diag)
}

/// Neumaier-compensated summation in linear space.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `ln(sum(exp(x)))`, returning `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    // summing in sorted order makes the result independent of input order
    let mut e: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    e.sort_unstable_by(f64::total_cmp);
    max + e.iter().sum::<f64>().ln()
}

/// `ln(1 + exp(x))` without overflow.
#[inline]
pub fn log1p_exp(x: f64) -> f64 {
    if x > 35.0 {
        x + (-x).exp()
    } else if x > -35.0 {
        x.exp().ln_1p()
    } else {
        x.exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn negation_flips_sign() {
        let v = SignedLogValue::positive(1.5);
        assert_eq!((-v).value(), -v.value());
        assert!((-SignedLogValue::ZERO).is_zero());
    }

    #[test]
    fn spec_examples() {
        let (v, _) = signed_log_sum(&[
            SignedLogValue::positive(2f64.ln()),
            SignedLogValue::negative(0.0),
        ]);
        assert_eq!(v.sign, Sign::Positive);
        assert!(v.log_magnitude.abs() < 1e-15);

        let (v, d) = signed_log_sum(&[
            SignedLogValue::positive(3f64.ln()),
            SignedLogValue::negative(3f64.ln()),
        ]);
        assert!(v.is_zero());
        assert_eq!(v.value(), 0.0);
        assert!(d.flagged);

        let (v, _) = signed_log_sum(&[SignedLogValue::positive(0.0); 3]);
        assert!((v.log_magnitude - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn empty_sum_is_zero() {
        let (v, d) = signed_log_sum(&[]);
        assert!(v.is_zero());
        assert!(!d.flagged);
    }

    #[test]
    fn log1p_exp_matches_naive_in_safe_range() {
        for x in [-30.0, -3.0, 0.0, 0.5, 20.0] {
            let naive = f64::exp(x).ln_1p();
            assert!((log1p_exp(x) - naive).abs() < 1e-14 * naive.abs().max(1e-300));
        }
        assert_eq!(log1p_exp(800.0), 800.0);
        assert!(log1p_exp(-800.0) == 0.0);
    }

    proptest! {
        #[test]
        fn matches_plain_sum_without_flag(
            terms in prop::collection::vec((1e-6f64..1e6, any::<bool>()), 0..64)
        ) {
            let values: Vec<f64> = terms.iter().map(|&(m, s)| if s { m } else { -m }).collect();
            let slv: Vec<_> = values.iter().map(|&v| SignedLogValue::from_f64(v)).collect();
            let (sum, diag) = signed_log_sum(&slv);
            // Exact reference: the f64 inputs are dyadic rationals, so an
            // extended-precision reference is the compensated sum of their
            // exact values in a fixed order of growing magnitude.
            let mut sorted = values.clone();
            sorted.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
            let reference = compensated_sum(&sorted);
            if !diag.flagged && reference != 0.0 {
                let tol = 1e-10f64.max(diag.relative_error_bound(values.len()) * 4.0);
                prop_assert!(((sum.value() - reference) / reference).abs() <= tol);
            }
        }
    }
}
