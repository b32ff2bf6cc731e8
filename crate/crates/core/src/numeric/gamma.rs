//! Log-gamma, log-beta and binomial log-masses.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// zeta(k) for k = 2..=30
const ZETA: [f64; 29] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_37,
    1.017_343_061_984_449,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_3,
    1.002_008_392_826_082_2,
    1.000_994_575_127_818_1,
    1.000_494_188_604_119_5,
    1.000_246_086_553_308,
    1.000_122_713_347_578_5,
    1.000_061_248_135_058_7,
    1.000_030_588_236_307,
    1.000_015_282_259_408_7,
    1.000_007_637_197_637_9,
    1.000_003_817_293_265,
    1.000_001_908_212_716_6,
    1.000_000_953_962_033_9,
    1.000_000_476_932_986_8,
    1.000_000_238_450_502_7,
    1.000_000_119_219_926,
    1.000_000_059_608_189,
    1.000_000_029_803_503_5,
    1.000_000_014_901_554_8,
    1.000_000_007_450_711_8,
    1.000_000_003_725_334,
    1.000_000_001_862_659_7,
    1.000_000_000_931_327_4,
];

/// `ln Γ(1 + eps)` by its Taylor series; accurate for |eps| <= 1/4, where the
/// function is close to its roots and a Lanczos sum loses relative accuracy.
fn ln_gamma_1p_series(eps: f64) -> f64 {
    let mut sum = -EULER_GAMMA * eps;
    let mut pow = -eps;
    for k in 2..=40usize {
        pow *= -eps;
        let zeta = if k <= 30 {
            ZETA[k - 2]
        } else {
            1.0 + 2f64.powi(-(k as i32)) + 3f64.powi(-(k as i32))
        };
        let term = zeta * pow / k as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    sum
}

fn ln_gamma_lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Natural log of the gamma function for positive, finite `x`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x) = Γ(1 + x) / x
        let lg1p = if x <= 0.25 {
            ln_gamma_1p_series(x)
        } else {
            ln_gamma_lanczos(1.0 + x)
        };
        return lg1p - x.ln();
    }
    if (x - 1.0).abs() <= 0.25 {
        return ln_gamma_1p_series(x - 1.0);
    }
    if (x - 2.0).abs() <= 0.25 {
        let eps = x - 2.0;
        return eps.ln_1p() + ln_gamma_1p_series(eps);
    }
    ln_gamma_lanczos(x)
}

/// `ln B(a, b)`.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "log_beta requires positive finite arguments, got ({a}, {b})"
        )));
    }
    Ok(log_beta_unchecked(a, b))
}

pub(crate) fn log_beta_unchecked(a: f64, b: f64) -> f64 {
    log_gamma_unchecked(a) + log_gamma_unchecked(b) - log_gamma_unchecked(a + b)
}

/// Rough absolute rounding error of a log-Gamma expression that combines
/// `lnΓ` at each of `args`.
pub(crate) fn log_gamma_error_scale(args: &[f64]) -> f64 {
    4.0 * f64::EPSILON
        * args
            .iter()
            .map(|&a| log_gamma_unchecked(a).abs() + 1.0)
            .sum::<f64>()
}

/// `ln C(n, k)`.
pub fn log_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    if k == 0 || k == n {
        return 0.0;
    }
    // same operand order for k and n - k keeps the result exactly symmetric
    let (lo, hi) = if k <= n - k { (k, n - k) } else { (n - k, k) };
    log_gamma_unchecked(n as f64 + 1.0)
        - log_gamma_unchecked(lo as f64 + 1.0)
        - log_gamma_unchecked(hi as f64 + 1.0)
}

/// `ln(1 - p)`; exact subtraction for `p >= 1/2`, so `ln_complement(0.5)`
/// equals `0.5f64.ln()` bit for bit.
pub(crate) fn ln_complement(p: f64) -> f64 {
    if p >= 0.5 {
        (1.0 - p).ln()
    } else {
        (-p).ln_1p()
    }
}

/// Log of the binomial mass `Bin(x | n, theta)`.
///
/// `theta` on the boundary is accepted: all mass sits on `x = n * theta`.
pub fn log_binom_pmf(x: u64, n: u64, theta: f64) -> Result<f64> {
    if x > n {
        return Err(Error::Domain(format!(
            "binomial count {x} exceeds trials {n}"
        )));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Domain(format!("probability out of range: {theta}")));
    }
    if theta == 0.0 {
        return Ok(if x == 0 { 0.0 } else { f64::NEG_INFINITY });
    }
    if theta == 1.0 {
        return Ok(if x == n { 0.0 } else { f64::NEG_INFINITY });
    }
    let succ = if x == 0 { 0.0 } else { x as f64 * theta.ln() };
    let fail = if x == n {
        0.0
    } else {
        (n - x) as f64 * ln_complement(theta)
    };
    Ok(log_choose(n, x) + (succ + fail))
}

/// Log density of `Beta(theta | a, b)` at an interior point.
pub fn log_beta_pdf(theta: f64, a: f64, b: f64) -> f64 {
    (a - 1.0) * theta.ln() + (b - 1.0) * ln_complement(theta) - log_beta_unchecked(a, b)
}
