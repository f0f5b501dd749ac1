//! Distribution of cumulative demand: `P(D_s ≥ b)` as a truncated double
//! Poisson series over the number of unit jumps `i` and compound jumps `j`,
//! and the reorder quantities derived from it.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DemandModel, JumpDistribution, Policy};
use crate::special::{lower_gamma_regularized, poisson_pmf, poisson_upper_tail, upper_gamma_regularized};

/// Truncation controls for the Poisson series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesControl {
    /// Poisson mass allowed to be dropped, split evenly between the two series.
    pub tail_mass_tol: f64,
    pub max_unit_index: u64,
    pub max_compound_index: u64,
    pub max_replenishments: u64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            tail_mass_tol: 1e-10,
            max_unit_index: 10_000,
            max_compound_index: 10_000,
            max_replenishments: 100_000,
        }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.tail_mass_tol > 0.0 && self.tail_mass_tol <= 1e-3) {
            return Err(Error::invalid(
                "tail_mass_tol",
                format!("must be in (0, 1e-3], got {}", self.tail_mass_tol),
            ));
        }
        for (name, cap) in [
            ("max_unit_index", self.max_unit_index),
            ("max_compound_index", self.max_compound_index),
            ("max_replenishments", self.max_replenishments),
        ] {
            if cap < 1 {
                return Err(Error::invalid(name, "must be >= 1"));
            }
        }
        Ok(())
    }
}

/// Contiguous block of Poisson weights `p_k`, `k = start..start+weights.len()`,
/// grown outward from the mode until it holds at least `1 − dropped` mass.
#[derive(Debug, Clone)]
pub(crate) struct PoissonWindow {
    pub start: u64,
    pub weights: Vec<f64>,
}

impl PoissonWindow {
    pub fn new(mean: f64, dropped: f64, cap: u64, series: &'static str) -> Result<Self> {
        if mean == 0.0 {
            return Ok(PoissonWindow {
                start: 0,
                weights: vec![1.0],
            });
        }
        let mode = mean.floor() as u64;
        if mode > cap {
            return Err(Error::TruncationCap {
                series,
                needed: mode as usize,
                cap: cap as usize,
            });
        }
        let p_mode = poisson_pmf(mode, mean);
        let mut left: Vec<f64> = Vec::new(); // p_{mode-1}, p_{mode-2}, ...
        let mut right: Vec<f64> = vec![p_mode]; // p_mode, p_{mode+1}, ...
        let mut lo = mode;
        let mut hi = mode;
        let mut total = p_mode;
        while total < 1.0 - dropped {
            let next_left = if lo > 0 {
                left.last().copied().unwrap_or(p_mode) * lo as f64 / mean
            } else {
                0.0
            };
            let next_right = right.last().copied().unwrap_or(p_mode) * mean / (hi + 1) as f64;
            if next_left == 0.0 && next_right == 0.0 {
                break;
            }
            if next_left >= next_right {
                lo -= 1;
                left.push(next_left);
                total += next_left;
            } else {
                hi += 1;
                if hi > cap {
                    return Err(Error::TruncationCap {
                        series,
                        needed: hi as usize,
                        cap: cap as usize,
                    });
                }
                right.push(next_right);
                total += next_right;
            }
        }
        left.reverse();
        left.extend(right);
        Ok(PoissonWindow {
            start: lo,
            weights: left,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .map(move |(k, &w)| (self.start + k as u64, w))
    }
}

/// `P(J₁ + … + J_j ≥ x)`: 1 for `x ≤ 0`, otherwise `Q(jβ, ηx)`.
pub fn jump_sum_survival(dist: &JumpDistribution, j: u64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if j == 0 {
        return 0.0;
    }
    upper_gamma_regularized(j as f64 * dist.shape(), dist.rate() * x).unwrap_or(f64::NAN)
}

fn check_time(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            function: "demand_tail",
            value: s,
            reason: "time must be finite and >= 0",
        })
    }
}

/// Smallest `i` with `base + α·i ≥ b`, for `base < b`.
fn unit_jumps_needed(base: f64, alpha: f64, b: f64) -> u64 {
    let mut i = ((b - base) / alpha).ceil().max(0.0) as u64;
    while base + alpha * (i as f64) < b {
        i += 1;
    }
    while i > 0 && base + alpha * ((i - 1) as f64) >= b {
        i -= 1;
    }
    i
}

/// `P(D_s ≥ b)`.
///
/// Terms with enough unit jumps to reach `b` on their own are summed exactly
/// through the Poisson upper tail; the remaining `(i, j)` terms use Poisson
/// windows that each drop at most half of `tail_mass_tol`.
pub fn demand_tail(model: &DemandModel, s: f64, b: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_time(s)?;
    if !(b > 0.0) {
        return Err(Error::invalid("b", format!("must be > 0, got {b}")));
    }
    let base = model.drift() * s;
    if base >= b {
        return Ok(1.0);
    }
    let half = 0.5 * ctrl.tail_mass_tol;

    let (needed, exact_tail) = if model.has_unit_jumps() {
        let needed = unit_jumps_needed(base, model.unit_jump_size(), b);
        (needed, poisson_upper_tail(needed, model.unit_jump_rate() * s))
    } else {
        (u64::MAX, 0.0)
    };

    let Some((rate, dist)) = model.compound() else {
        return Ok(exact_tail.clamp(0.0, 1.0));
    };
    let compound = PoissonWindow::new(rate * s, half, ctrl.max_compound_index, "compound jump")?;
    let inner = |gap: f64| -> f64 {
        compound
            .iter()
            .filter(|&(j, _)| j >= 1)
            .map(|(j, q)| q * jump_sum_survival(dist, j, gap))
            .sum::<f64>()
    };

    let mut total = exact_tail;
    if model.has_unit_jumps() {
        let units = PoissonWindow::new(model.unit_jump_rate() * s, half, ctrl.max_unit_index, "unit jump")?;
        for (i, p) in units.iter().take_while(|&(i, _)| i < needed) {
            total += p * inner(b - base - model.unit_jump_size() * i as f64);
        }
    } else {
        total += inner(b - base);
    }
    Ok(total.clamp(0.0, 1.0))
}

/// `P(T_n < t) = P(D_t ≥ a + (n−1)Q)`.
pub fn reorder_prob(model: &DemandModel, policy: &Policy, n: u64, t: f64, ctrl: &SeriesControl) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "must be >= 1"));
    }
    demand_tail(model, t, policy.threshold(n), ctrl)
}

/// `E[R_t] = Σ_n P(T_n < t)`, summed threshold by threshold until a term
/// drops below `tail_mass_tol`.
///
/// Reference route; [`expected_orders`] computes the same quantity without
/// the per-threshold series.
pub fn expected_orders_by_threshold(model: &DemandModel, policy: &Policy, t: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_time(t)?;
    let mut total = 0.0;
    for n in 1..=ctrl.max_replenishments {
        let p = reorder_prob(model, policy, n, t, ctrl)?;
        total += p;
        if p < ctrl.tail_mass_tol {
            return Ok(total);
        }
    }
    Err(Error::TruncationCap {
        series: "replenishment",
        needed: ctrl.max_replenishments as usize + 1,
        cap: ctrl.max_replenishments as usize,
    })
}

/// `E[R_t] = Σ_n P(D_t ≥ K_n) = E[#{n : K_n ≤ D_t}]`.
///
/// The threshold sum is moved inside the `(i, j)` series: conditioned on the
/// jump counts, the number of thresholds reached is a staircase of a shifted
/// Gamma variable whose expectation is evaluated directly (see
/// [`gamma_staircase_mean`]).
pub fn expected_orders(model: &DemandModel, policy: &Policy, t: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let half = 0.5 * ctrl.tail_mass_tol;
    let base = model.drift() * t;
    let units = if model.has_unit_jumps() {
        PoissonWindow::new(model.unit_jump_rate() * t, half, ctrl.max_unit_index, "unit jump")?
    } else {
        PoissonWindow::new(0.0, half, ctrl.max_unit_index, "unit jump")?
    };
    let alpha = model.unit_jump_size();
    let unit_levels = || units.iter().map(|(i, p)| (base + alpha * i as f64, p));

    let cap_check = |top: f64| -> Result<()> {
        let needed = policy.thresholds_reached(top);
        if needed > ctrl.max_replenishments {
            Err(Error::TruncationCap {
                series: "replenishment",
                needed: needed as usize,
                cap: ctrl.max_replenishments as usize,
            })
        } else {
            Ok(())
        }
    };

    let Some((rate, dist)) = model.compound() else {
        let top = unit_levels().last().map_or(base, |(c, _)| c);
        cap_check(top)?;
        let sum: f64 = unit_levels()
            .map(|(c, p)| p * policy.thresholds_reached(c) as f64)
            .sum();
        return Ok(sum);
    };

    let compound = PoissonWindow::new(rate * t, half, ctrl.max_compound_index, "compound jump")?;
    let (j_last, _) = compound.iter().last().expect("window is never empty");
    let top_shape = j_last as f64 * dist.shape();
    let top = unit_levels().last().map_or(base, |(c, _)| c)
        + (top_shape + 10.0 * top_shape.sqrt()) / dist.rate();
    cap_check(top)?;

    let mut total = 0.0;
    for (j, q) in compound.iter() {
        let shape = j as f64 * dist.shape();
        let row: f64 = unit_levels()
            .map(|(c, p)| {
                let h = if j == 0 {
                    policy.thresholds_reached(c) as f64
                } else {
                    gamma_staircase_mean(c, shape, dist.rate(), policy)
                };
                p * h
            })
            .sum();
        total += q * row;
    }
    Ok(total)
}

/// `E[#{n ≥ 1 : a + (n−1)Q ≤ c + S}]` for `S ~ Gamma(shape, rate)`.
///
/// Direct summation of `P(S ≥ K_n − c)` over the thresholds that fall inside
/// the bulk of S, or, when S spreads over many thresholds, the sawtooth
/// expansion `⌊y⌋ = y − ½ + Σ_k sin(2πky)/(πk)` taken in expectation with the
/// Gamma characteristic function.
pub fn gamma_staircase_mean(c: f64, shape: f64, rate: f64, policy: &Policy) -> f64 {
    let q = policy.order_quantity();
    let sd = shape.sqrt() / rate;
    let mean = shape / rate;
    let direct_terms = (20.0 * sd + 40.0 / rate) / q;
    // Fourier terms decay like (1 + ν_k²)^{−shape/2}, ν_k = 2πk/(Qη).
    let fourier_terms = if shape > 1.5 {
        q * rate * 1e17f64.powf(1.0 / shape) / (2.0 * PI)
    } else {
        f64::INFINITY
    };
    if direct_terms <= 64.0 || direct_terms <= fourier_terms {
        staircase_direct(c, shape, rate, mean, sd, policy)
    } else {
        staircase_fourier(c, shape, rate, policy)
    }
}

fn staircase_direct(c: f64, shape: f64, rate: f64, mean: f64, sd: f64, policy: &Policy) -> f64 {
    // Below mean − 10 sd the Gamma lower tail is under e^{−50}; those
    // thresholds count as reached with certainty.
    let sure = (mean - 10.0 * sd).max(0.0);
    let reached = policy.thresholds_reached(c + sure);
    let mut n = reached + 1;
    let mut sum = reached as f64;
    let mut prev = 1.0_f64;
    let limit_ratio = (-rate * policy.order_quantity()).exp();
    loop {
        let gap = policy.threshold(n) - c;
        let term = upper_gamma_regularized(shape, rate * gap).unwrap_or(0.0);
        sum += term;
        if term == 0.0 {
            break;
        }
        // Log-concave survival (shape ≥ 1) has nonincreasing ratios; for
        // shape < 1 they increase towards e^{−ηQ}.
        let ratio = if shape >= 1.0 { term / prev } else { limit_ratio.max(term / prev) };
        if ratio < 1.0 && term * ratio / (1.0 - ratio) <= 1e-17 * sum.max(1.0) {
            break;
        }
        prev = term;
        n += 1;
    }
    sum
}

fn staircase_fourier(c: f64, shape: f64, rate: f64, policy: &Policy) -> f64 {
    let (a, q) = (policy.reorder_offset(), policy.order_quantity());
    let y_mean = (c + shape / rate - a) / q;
    let offset = (c - a) / q;
    let phase = offset - offset.floor();
    let mut series = 0.0;
    for k in 1..100_000u32 {
        let kf = k as f64;
        let nu = 2.0 * PI * kf / (q * rate);
        let modulus = (-0.5 * shape * nu.mul_add(nu, 1.0).ln()).exp();
        if modulus < 1e-17 * PI * kf {
            break;
        }
        series += modulus * (2.0 * PI * kf * phase + shape * nu.atan()).sin() / (PI * kf);
    }
    // Mass of S below the first thresholds, where the staircase is clamped at 0.
    let mut clamp = 0.0;
    let mut m = 1u64;
    loop {
        let x = a - c - m as f64 * q;
        if x <= 0.0 {
            break;
        }
        let p = lower_gamma_regularized(shape, rate * x).unwrap_or(0.0);
        if p < 1e-300 {
            break;
        }
        clamp += p;
        m += 1;
    }
    y_mean + 0.5 + series + clamp
}
