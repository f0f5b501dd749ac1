//! First passage of the demand subordinator over the reorder thresholds:
//! the inverse Laplace exponent Φ, the transform `E[e^{−sT_n}] = e^{−K_nΦ(s)}`
//! and the first two moments of `T_n`.
//!
//! `T_n = inf{s > 0 : D_s ≥ a + (n−1)Q}`. Because D is nondecreasing and the
//! thresholds increase, this is the same stopping time as the one obtained by
//! restarting the search after `T_{n−1}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DemandModel, Policy};
use crate::special::lambert_w0_of_exp;

const NEWTON_MAX_ITER: usize = 200;

/// How Φ is evaluated for a given model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InversionBranch {
    /// ψ(θ) = μθ, so Φ(s) = s/μ.
    DriftOnly,
    /// Drifted Poisson demand, closed form through Lambert W.
    LambertW,
    /// Drift plus exponential compound jumps, root of a quadratic.
    Quadratic,
    /// Safeguarded Newton on ψ(θ) = s.
    Newton,
}

pub fn inversion_branch(model: &DemandModel) -> InversionBranch {
    match model.compound() {
        None if !model.has_unit_jumps() => InversionBranch::DriftOnly,
        None if model.drift() > 0.0 => InversionBranch::LambertW,
        Some((_, d)) if d.is_exponential() && !model.has_unit_jumps() => InversionBranch::Quadratic,
        _ => InversionBranch::Newton,
    }
}

fn check_rate(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            function: "phi_inverse",
            value: s,
            reason: "s must be finite and >= 0",
        })
    }
}

/// Φ(s): the nonnegative root of ψ(θ) = s.
pub fn phi_inverse(model: &DemandModel, s: f64) -> Result<f64> {
    check_rate(s)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    match inversion_branch(model) {
        InversionBranch::DriftOnly => Ok(s / model.drift()),
        InversionBranch::LambertW => Ok(phi_lambert(model, s)),
        InversionBranch::Quadratic => Ok(phi_quadratic(model, s)),
        InversionBranch::Newton => phi_inverse_newton(model, s),
    }
}

/// Φ(s) = (s+λ)/μ − W((αλ/μ)·e^{(α/μ)(s+λ)})/α, with the W argument kept in
/// log form so it never overflows.
fn phi_lambert(model: &DemandModel, s: f64) -> f64 {
    let (mu, alpha, lambda) = (model.drift(), model.unit_jump_size(), model.unit_jump_rate());
    let shifted = s + lambda;
    let log_arg = (alpha * lambda / mu).ln() + alpha / mu * shifted;
    let w = lambert_w0_of_exp(log_arg);
    (shifted / mu - w / alpha).max(0.0)
}

/// Smaller root of μθ² − (μη + s + λ′)θ + sη = 0, written as
/// 2sη / (B + √(B² − 4μsη)) to avoid cancellation (and to cover μ = 0).
fn phi_quadratic(model: &DemandModel, s: f64) -> f64 {
    let (rate, d) = model.compound().expect("quadratic branch needs compound jumps");
    let mu = model.drift();
    let eta = d.rate();
    let b = mu * eta + s + rate;
    let disc = b * b - 4.0 * mu * s * eta;
    2.0 * s * eta / (b + disc.max(0.0).sqrt())
}

/// Generic inversion, valid for every model. ψ is convex with ψ(0) = 0 and
/// ψ′(0) = m, so the root lies in `[0, min(s/m, η))`.
pub fn phi_inverse_newton(model: &DemandModel, s: f64) -> Result<f64> {
    check_rate(s)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0_f64;
    let mut hi = (s / model.mean_rate()).min(model.exponent_domain_end());
    let hi_is_open = hi == model.exponent_domain_end();
    let mut x = if hi_is_open { 0.5 * hi } else { hi };
    // Bracket widths one and two steps back; Newton steps that fail to halve
    // the bracket over two iterations are replaced by bisection.
    let mut widths = [f64::INFINITY; 2];

    for _ in 0..NEWTON_MAX_ITER {
        let f = model.laplace_exponent(x)? - s;
        if f == 0.0 {
            return Ok(x);
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let (d1, _) = model.laplace_exponent_derivatives(x)?;
        let mut next = x - f / d1;
        let width = hi - lo;
        if !(next > lo && next < hi) || width > 0.5 * widths[0] {
            next = 0.5 * (lo + hi);
        }
        widths = [widths[1], width];
        if (next - x).abs() <= 2.0 * f64::EPSILON * next.abs() || hi - lo <= f64::EPSILON * hi {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NonConvergence {
        what: "inverse Laplace exponent",
        iterations: NEWTON_MAX_ITER,
    })
}

fn check_index(n: u64) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(Error::invalid("n", "must be >= 1"))
    }
}

/// `E[e^{−sT_n}] = exp(−(a + (n−1)Q)·Φ(s))`.
pub fn fpt_laplace(model: &DemandModel, policy: &Policy, n: u64, s: f64) -> Result<f64> {
    check_index(n)?;
    Ok((-policy.threshold(n) * phi_inverse(model, s)?).exp())
}

/// Mean and variance of the n-th reorder time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FptMoments {
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
}

impl FptMoments {
    pub fn second_moment(&self) -> f64 {
        self.mean * self.mean + self.variance
    }
}

/// `E[T_n] = K/ψ′(0)`, `Var[T_n] = K·ψ″(0)/ψ′(0)³` with `K = a + (n−1)Q`,
/// obtained by differentiating `e^{−KΦ(s)}` twice at 0.
pub fn fpt_moments(model: &DemandModel, policy: &Policy, n: u64) -> Result<FptMoments> {
    check_index(n)?;
    let k = policy.threshold(n);
    let (d1, d2) = model.psi_derivatives_at_zero();
    Ok(FptMoments {
        n,
        mean: k / d1,
        variance: k * d2 / (d1 * d1 * d1),
    })
}
