//! Moments of Beta distributions about an arbitrary center.

/// `E[(theta - center)^m]` for `m = 0..=order` under `Beta(a, b)`.
///
/// Uses the three-term recurrence that follows from the Stein identity
/// `E[theta (1 - theta) f'(theta)] = E[((a + b) theta - a) f(theta)]`:
///
/// `(a + b + m) M[m+1] = (a - (a + b) c + m (1 - 2c)) M[m] + m c (1 - c) M[m-1]`.
///
/// Unlike the binomial expansion over raw moments, no large terms of
/// opposite sign are subtracted when the center sits near the bulk of the
/// distribution.
pub fn beta_moments_about(a: f64, b: f64, center: f64, order: usize) -> Vec<f64> {
    let mut m = Vec::with_capacity(order + 1);
    m.push(1.0);
    if order == 0 {
        return m;
    }
    let s = a + b;
    // a/(a+b) - c, written to avoid subtracting two nearly equal numbers
    m.push((a * (1.0 - center) - b * center) / s);
    let drift = a * (1.0 - center) - b * center;
    let cc = center * (1.0 - center);
    for k in 1..order {
        let kf = k as f64;
        let next = ((drift + kf * (1.0 - 2.0 * center)) * m[k] + kf * cc * m[k - 1]) / (s + kf);
        m.push(next);
    }
    m
}
