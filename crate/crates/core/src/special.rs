//! Scalar special functions: principal-branch Lambert W, regularized
//! incomplete gamma, and a log-domain Poisson pmf.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// −1/e, the branch point of the principal Lambert W branch.
pub const LAMBERT_BRANCH_POINT: f64 = -0.367_879_441_171_442_33;

const HALLEY_MAX_ITER: usize = 64;

/// Principal branch W₀ of the Lambert W function, `w·e^w = z`, `w ≥ −1`.
///
/// Halley iteration from a regime-dependent starting point: the branch-point
/// series for `z` near −1/e, the log-log asymptote for `z > e` and
/// `z/(1+z)` elsewhere.
pub fn lambert_w0(z: f64) -> Result<f64> {
    if z.is_nan() || z < LAMBERT_BRANCH_POINT {
        // Rounding of −1/e itself can land an ulp or two below the branch point.
        if z >= LAMBERT_BRANCH_POINT - 4.0 * f64::EPSILON {
            return Ok(-1.0);
        }
        return Err(Error::Domain {
            function: "lambert_w0",
            value: z,
            reason: "requires z >= -1/e",
        });
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z.is_infinite() {
        return Ok(f64::INFINITY);
    }

    let mut w = initial_guess(z);
    for _ in 0..HALLEY_MAX_ITER {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if wp1 == 0.0 || f == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = (w - step).max(-1.0);
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs());
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

fn initial_guess(z: f64) -> f64 {
    if z < -0.25 {
        let p = (2.0 * (std::f64::consts::E * z + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if z > std::f64::consts::E {
        let l1 = z.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    } else {
        z / (1.0 + z)
    }
}

/// `W₀(e^y)` without forming `e^y`.
///
/// For `y > 1` this solves `w + ln w = y` directly, so it stays finite for
/// arguments whose exponential would overflow.
pub fn lambert_w0_of_exp(y: f64) -> f64 {
    if y.is_nan() {
        return f64::NAN;
    }
    if y <= 1.0 {
        // exp(y) ∈ (0, e], always inside the principal domain.
        return lambert_w0(y.exp()).unwrap_or(f64::NAN);
    }
    if y.is_infinite() {
        return f64::INFINITY;
    }
    let ly = y.ln();
    let mut w = y - ly + ly / y;
    for _ in 0..HALLEY_MAX_ITER {
        let f = w + w.ln() - y;
        let d1 = 1.0 + 1.0 / w;
        let d2 = -1.0 / (w * w);
        let step = f / (d1 - 0.5 * f * d2 / d1);
        let next = w - step;
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * next;
        w = next;
        if done {
            break;
        }
    }
    w
}

/// Regularized upper incomplete gamma `Q(shape, x) = Γ(shape, x)/Γ(shape)`.
pub fn upper_gamma_regularized(shape: f64, x: f64) -> Result<f64> {
    gamma_pq(shape, x).map(|(_, q)| q)
}

/// Regularized lower incomplete gamma `P(shape, x) = 1 − Q(shape, x)`.
pub fn lower_gamma_regularized(shape: f64, x: f64) -> Result<f64> {
    gamma_pq(shape, x).map(|(p, _)| p)
}

/// Returns `(P, Q)`. Series for `x < shape + 1`, continued fraction otherwise;
/// the quantity not produced directly is taken as the complement.
fn gamma_pq(a: f64, x: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain {
            function: "upper_gamma_regularized",
            value: a,
            reason: "shape must be finite and > 0",
        });
    }
    if !(x >= 0.0) {
        return Err(Error::Domain {
            function: "upper_gamma_regularized",
            value: x,
            reason: "x must be >= 0",
        });
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x.is_infinite() {
        return Ok((1.0, 0.0));
    }
    let max_iter = 1000 + (50.0 * a.sqrt()) as usize;
    let log_prefactor = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let p = (lower_series(a, x, max_iter) + log_prefactor).exp().min(1.0);
        Ok((p, 1.0 - p))
    } else {
        let q = (upper_continued_fraction(a, x, max_iter).ln() + log_prefactor)
            .exp()
            .min(1.0);
        Ok((1.0 - q, q))
    }
}

/// ln of `Σ_n x^n / (a(a+1)…(a+n))`.
fn lower_series(a: f64, x: f64, max_iter: usize) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut denom = a;
    for _ in 0..max_iter {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term < sum * f64::EPSILON {
            return sum.ln();
        }
    }
    log::warn!("incomplete gamma series hit iteration cap (a={a}, x={x})");
    sum.ln()
}

/// Modified Lentz evaluation of the continued fraction for `Γ(a,x)·e^x·x^{−a}`.
fn upper_continued_fraction(a: f64, x: f64, max_iter: usize) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=max_iter {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() <= f64::EPSILON {
            return h;
        }
    }
    log::warn!("incomplete gamma continued fraction hit iteration cap (a={a}, x={x})");
    h
}

/// Poisson pmf `e^{−mean}·mean^k/k!`, evaluated in the log domain.
pub fn poisson_pmf(k: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if !(mean > 0.0) {
        return f64::NAN;
    }
    if mean.is_infinite() {
        return 0.0;
    }
    let kf = k as f64;
    (kf * mean.ln() - mean - ln_gamma(kf + 1.0)).exp()
}

/// Upper Poisson tail `P(N ≥ k)` for `N ~ Poisson(mean)`.
pub fn poisson_upper_tail(k: u64, mean: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if mean == 0.0 {
        return 0.0;
    }
    // P(N ≥ k) = P(k, mean), the regularized lower incomplete gamma.
    lower_gamma_regularized(k as f64, mean).unwrap_or(f64::NAN)
}
