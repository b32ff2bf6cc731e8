//! Posterior probability of the null across a range of training sizes, for
//! a collection of two-group tables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::prob_from_log_bf10;
use crate::two_props::{default_hyper, log_bf10_intrinsic_moment2, TwoPropData};

use super::twoe::twoe_two_props;

/// Upper end of the TWOE search used for default ranges.
pub const DEFAULT_T_PLUS_MAX: u64 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub h: u32,
    pub t_plus_lo: u64,
    pub t_plus_hi: u64,
    pub p_null_lo: f64,
    pub p_null_hi: f64,
    pub p_null_min: f64,
    pub p_null_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSensitivity {
    pub id: String,
    pub data: TwoPropData,
    pub abs_freq_diff: f64,
    pub rows: Vec<SensitivityRow>,
}

/// `t+*(h)` from the two-proportion TWOE with `b0 = 1/2`.
pub fn default_t_plus(h: u32) -> Result<u64> {
    Ok(twoe_two_props(0.5, h, DEFAULT_T_PLUS_MAX)?.t_star)
}

/// `[t+*(h), t+*(h + 1)]` for each `h`.
pub fn default_t_ranges(h_set: &[u32]) -> Result<Vec<(u64, u64)>> {
    h_set
        .iter()
        .map(|&h| Ok((default_t_plus(h)?, default_t_plus(h + 1)?)))
        .collect()
}

/// `P(M0 | y)` at both ends of each range and its extremes over the even
/// `t_plus` values in between. Output is ordered by `|y1/n1 - y2/n2|`.
pub fn sensitivity_analysis(
    tables: &[(String, TwoPropData)],
    h_set: &[u32],
    t_ranges: &[(u64, u64)],
) -> Result<Vec<TableSensitivity>> {
    if tables.is_empty() {
        return Err(Error::InvalidInput("no tables to analyse".into()));
    }
    if h_set.len() != t_ranges.len() {
        return Err(Error::Dimension {
            expected: h_set.len(),
            got: t_ranges.len(),
        });
    }
    if let Some((lo, hi)) = t_ranges.iter().find(|(lo, hi)| lo > hi) {
        return Err(Error::InvalidInput(format!(
            "empty t_plus range [{lo}, {hi}]"
        )));
    }
    let mut out = tables
        .par_iter()
        .map(|(id, d)| {
            let rows = h_set
                .iter()
                .zip(t_ranges)
                .map(|(&h, &(lo, hi))| {
                    let p = |t: u64| -> Result<f64> {
                        let hyper = default_hyper(d.n1, d.n2, h, t)?;
                        Ok(prob_from_log_bf10(-log_bf10_intrinsic_moment2(d, &hyper)?))
                    };
                    let mut scan: Vec<u64> = (lo..=hi).step_by(2).collect();
                    if scan.last() != Some(&hi) {
                        scan.push(hi);
                    }
                    let ps = scan.iter().map(|&t| p(t)).collect::<Result<Vec<_>>>()?;
                    Ok(SensitivityRow {
                        h,
                        t_plus_lo: lo,
                        t_plus_hi: hi,
                        p_null_lo: ps[0],
                        p_null_hi: ps[ps.len() - 1],
                        p_null_min: ps.iter().copied().fold(f64::INFINITY, f64::min),
                        p_null_max: ps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TableSensitivity {
                id: id.clone(),
                data: *d,
                abs_freq_diff: d.abs_freq_diff(),
                rows,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.abs_freq_diff.total_cmp(&b.abs_freq_diff));
    Ok(out)
}
