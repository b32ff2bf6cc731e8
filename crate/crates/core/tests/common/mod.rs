//! Independent oracles: tanh-sinh quadrature and exact rational Bayes
//! factors built from rising factorials.
#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

// ---------- quadrature ----------

/// Tanh-sinh rule on `[0, len]` at step `2^-level`. The integrand gets
/// `(x, len - x)` with whichever is small computed without cancellation,
/// so endpoint singularities of either side are resolved.
fn tanh_sinh_level<F: Fn(f64, f64) -> f64>(f: &F, len: f64, level: u32) -> f64 {
    tanh_sinh_cut(f, len, level, 1e-100)
}

fn tanh_sinh_cut<F: Fn(f64, f64) -> f64>(f: &F, len: f64, level: u32, cut: f64) -> f64 {
    let h = 0.5f64.powi(level as i32);
    let d = 0.5 * len;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut sum = 0.0;
    let mut k: i64 = 0;
    loop {
        let t = k as f64 * h;
        let u = half_pi * t.sinh();
        let w = half_pi * t.cosh() / u.cosh().powi(2);
        if !(w > 1e-300) {
            break;
        }
        let delta = d / (u.exp() * u.cosh());
        // deeper points add nothing for integrable singularities and can
        // overflow products of two singular factors
        if delta < cut * len {
            break;
        }
        {
            sum += w * f(len - delta, delta);
            if k > 0 {
                sum += w * f(delta, len - delta);
            }
        }
        k += 1;
    }
    sum * h * d
}

fn refine<G: Fn(u32) -> f64>(g: G, tol: f64) -> f64 {
    let mut prev = g(3);
    for level in 4..=11 {
        let cur = g(level);
        if (cur - prev).abs() <= tol * cur.abs().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    panic!("quadrature did not converge: last two levels {prev}");
}

/// `int_0^1 f(x, 1 - x) dx`.
pub fn integrate_01<F: Fn(f64, f64) -> f64>(f: F, tol: f64) -> f64 {
    refine(|l| tanh_sinh_level(&f, 1.0, l), tol)
}

/// `int_0^1 f(theta) dtheta` for a density `f = dens(theta, theta0)` that
/// satisfies `dens(1 - s, theta0) = dens(s, 1 - theta0)`: the upper half is
/// evaluated through the mirror so that points near 1 keep full precision.
pub fn integrate_mirrored<F: Fn(f64, f64) -> f64>(dens: F, theta0: f64, tol: f64) -> f64 {
    let lower = refine(|l| tanh_sinh_level(&|x, _| dens(x, theta0), 0.5, l), tol);
    let upper = refine(
        |l| tanh_sinh_level(&|x, _| dens(x, 1.0 - theta0), 0.5, l),
        tol,
    );
    lower + upper
}

/// `int int f(x, 1 - x, y, 1 - y)` over the unit square at a fixed level.
pub fn integrate_unit_square<F: Fn(f64, f64, f64, f64) -> f64>(f: F, level: u32) -> f64 {
    tanh_sinh_level(
        &|x, xc| tanh_sinh_level(&|y, yc| f(x, xc, y, yc), 1.0, level),
        1.0,
        level,
    )
}

/// Cheaper square rule for integrands bounded on the closed square, where
/// nodes closer than `1e-18` to an edge carry no visible mass.
pub fn integrate_unit_square_bounded<F: Fn(f64, f64) -> f64>(f: F, level: u32) -> f64 {
    tanh_sinh_cut(
        &|x, _| tanh_sinh_cut(&|y, _| f(x, y), 1.0, level, 1e-18),
        1.0,
        level,
        1e-18,
    )
}

/// Beta density with the complement `xc = 1 - x` supplied separately.
pub fn beta_pdf(x: f64, xc: f64, a: f64, b: f64) -> f64 {
    let lb = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    ((a - 1.0) * x.ln() + (b - 1.0) * xc.ln() - lb).exp()
}

/// Stirling series with upward shift; independent of the library's
/// log-gamma.
pub fn ln_gamma(x: f64) -> f64 {
    let mut shift = 0.0;
    let mut z = x;
    while z < 15.0 {
        shift += z.ln();
        z += 1.0;
    }
    let z2 = z * z;
    let series = 1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z2 * z2 * z)
        - 1.0 / (1680.0 * z2 * z2 * z2 * z)
        + 1.0 / (1188.0 * z2 * z2 * z2 * z2 * z);
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + series - shift
}

// ---------- exact rationals ----------

pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn qf(x: f64) -> Q {
    Q::from_float(x).expect("finite")
}

pub fn to_f64(v: &Q) -> f64 {
    v.to_f64().expect("representable")
}

pub fn rising(a: &Q, k: u64) -> Q {
    let mut out = Q::one();
    let mut x = a.clone();
    for _ in 0..k {
        out *= &x;
        x += Q::one();
    }
    out
}

pub fn choose(n: u64, k: u64) -> Q {
    let mut out = Q::one();
    for i in 0..k {
        out *= q((n - i) as i64, (i + 1) as i64);
    }
    out
}

pub fn pow(x: &Q, k: u64) -> Q {
    let mut out = Q::one();
    for _ in 0..k {
        out *= x;
    }
    out
}

/// `B(a1 + y, a2 + f) / B(a1, a2)`.
pub fn beta_ratio(a1: &Q, a2: &Q, y: u64, f: u64) -> Q {
    rising(a1, y) * rising(a2, f) / rising(&(a1 + a2), y + f)
}

/// `E[theta^j]` under `Beta(a1, a2)`.
pub fn beta_moment(a1: &Q, a2: &Q, j: u64) -> Q {
    rising(a1, j) / rising(&(a1 + a2), j)
}

/// `E[(theta - theta0)^(2h)]` under `Beta(a1, a2)`.
pub fn k_bern(a1: &Q, a2: &Q, h: u32, theta0: &Q) -> Q {
    let order = 2 * h as u64;
    let mut s = Q::zero();
    for j in 0..=order {
        let mut term = choose(order, j) * beta_moment(a1, a2, j) * pow(theta0, order - j);
        if (order - j) % 2 == 1 {
            term = -term;
        }
        s += term;
    }
    s
}

pub fn bf_moment_bern(y: u64, n: u64, a1: &Q, a2: &Q, h: u32, theta0: &Q) -> Q {
    let f = n - y;
    let k = k_bern(&(a1 + q(y as i64, 1)), &(a2 + q(f as i64, 1)), h, theta0)
        / k_bern(a1, a2, h, theta0);
    let lik0 = pow(theta0, y) * pow(&(Q::one() - theta0), f);
    k * beta_ratio(a1, a2, y, f) / lik0
}

pub fn bf_im_bern(y: u64, n: u64, b: &Q, h: u32, t: u64, theta0: &Q) -> Q {
    let mut s = Q::zero();
    for x in 0..=t {
        let w = choose(t, x) * pow(theta0, x) * pow(&(Q::one() - theta0), t - x);
        let a1 = b + q(x as i64, 1);
        let a2 = b + q((t - x) as i64, 1);
        s += w * bf_moment_bern(y, n, &a1, &a2, h, theta0);
    }
    s
}

#[derive(Clone)]
pub struct QMatrix {
    pub a11: Q,
    pub a12: Q,
    pub a21: Q,
    pub a22: Q,
}

/// `E[(theta1 - theta2)^(2h)]` under the product Beta prior.
pub fn k_two(a: &QMatrix, h: u32) -> Q {
    let order = 2 * h as u64;
    let mut s = Q::zero();
    for j in 0..=order {
        let mut term = choose(order, j)
            * beta_moment(&a.a11, &a.a12, j)
            * beta_moment(&a.a21, &a.a22, order - j);
        if j % 2 == 1 {
            term = -term;
        }
        s += term;
    }
    s
}

pub struct QTwoData {
    pub y1: u64,
    pub n1: u64,
    pub y2: u64,
    pub n2: u64,
}

fn updated(a: &QMatrix, d: &QTwoData) -> QMatrix {
    let qi = |v: u64| q(v as i64, 1);
    QMatrix {
        a11: &a.a11 + qi(d.y1),
        a12: &a.a12 + qi(d.n1 - d.y1),
        a21: &a.a21 + qi(d.y2),
        a22: &a.a22 + qi(d.n2 - d.y2),
    }
}

pub fn bf_moment_two(d: &QTwoData, a: &QMatrix, h: u32, b0: &Q) -> Q {
    let post = updated(a, d);
    let (f1, f2) = (d.n1 - d.y1, d.n2 - d.y2);
    let yp = d.y1 + d.y2;
    let fp = f1 + f2;
    k_two(&post, h) / k_two(a, h)
        * beta_ratio(&a.a11, &a.a12, d.y1, f1)
        * beta_ratio(&a.a21, &a.a22, d.y2, f2)
        / beta_ratio(b0, b0, yp, fp)
}

pub fn m0_two(x1: u64, x2: u64, t1: u64, t2: u64, b0: &Q) -> Q {
    choose(t1, x1) * choose(t2, x2) * beta_ratio(b0, b0, x1 + x2, t1 + t2 - x1 - x2)
}

fn component(b1: &Q, b2: &Q, t1: u64, t2: u64, x1: u64, x2: u64) -> QMatrix {
    let qi = |v: u64| q(v as i64, 1);
    QMatrix {
        a11: b1 + qi(x1),
        a12: b1 + qi(t1 - x1),
        a21: b2 + qi(x2),
        a22: b2 + qi(t2 - x2),
    }
}

pub fn bf_im_two(d: &QTwoData, b: [&Q; 3], h: u32, t1: u64, t2: u64) -> Q {
    let [b0, b1, b2] = b;
    let mut s = Q::zero();
    for x1 in 0..=t1 {
        for x2 in 0..=t2 {
            let a = component(b1, b2, t1, t2, x1, x2);
            s += m0_two(x1, x2, t1, t2, b0) * bf_moment_two(d, &a, h, b0);
        }
    }
    s
}

/// Exact posterior means of `(theta1, theta2)` under the intrinsic moment
/// prior.
pub fn posterior_means_two(d: &QTwoData, b: [&Q; 3], h: u32, t1: u64, t2: u64) -> (Q, Q) {
    let [b0, b1, b2] = b;
    let (mut norm, mut m1, mut m2) = (Q::zero(), Q::zero(), Q::zero());
    for x1 in 0..=t1 {
        for x2 in 0..=t2 {
            let a = component(b1, b2, t1, t2, x1, x2);
            let w = m0_two(x1, x2, t1, t2, b0) * bf_moment_two(d, &a, h, b0);
            let p = updated(&a, d);
            let kp = k_two(&p, h);
            let s1 = QMatrix {
                a11: &p.a11 + Q::one(),
                ..p.clone()
            };
            let s2 = QMatrix {
                a21: &p.a21 + Q::one(),
                ..p.clone()
            };
            let e1 = &p.a11 / (&p.a11 + &p.a12) * k_two(&s1, h) / &kp;
            let e2 = &p.a21 / (&p.a21 + &p.a22) * k_two(&s2, h) / &kp;
            m1 += &w * e1;
            m2 += &w * e2;
            norm += w;
        }
    }
    (m1 / &norm, m2 / norm)
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}
