//! Generalized cumulative demand `D_t = μt + αN_t + Σ_{k≤N'_t} J_k`, the
//! fixed-order-quantity policy and the cost rates.

use serde::Serialize;

use crate::error::{Error, Result};

/// Law of the compound-Poisson jump sizes.
///
/// `Exponential(η)` is treated as `Gamma(1, η)` everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpDistribution {
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64 },
}

impl JumpDistribution {
    pub fn exponential(rate: f64) -> Result<Self> {
        let d = JumpDistribution::Exponential { rate };
        d.validate()?;
        Ok(d)
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        let d = JumpDistribution::Gamma { shape, rate };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        if !(self.rate() > 0.0 && self.rate().is_finite()) {
            return Err(Error::invalid("eta", format!("must be > 0, got {}", self.rate())));
        }
        if !(self.shape() > 0.0 && self.shape().is_finite()) {
            return Err(Error::invalid("beta", format!("must be > 0, got {}", self.shape())));
        }
        Ok(())
    }

    /// β; 1 for the exponential law.
    pub fn shape(&self) -> f64 {
        match *self {
            JumpDistribution::Exponential { .. } => 1.0,
            JumpDistribution::Gamma { shape, .. } => shape,
        }
    }

    /// η.
    pub fn rate(&self) -> f64 {
        match *self {
            JumpDistribution::Exponential { rate } | JumpDistribution::Gamma { rate, .. } => rate,
        }
    }

    pub fn mean(&self) -> f64 {
        self.shape() / self.rate()
    }

    /// `E[J²] = β(β+1)/η²`.
    pub fn second_moment(&self) -> f64 {
        let (b, e) = (self.shape(), self.rate());
        b * (b + 1.0) / (e * e)
    }

    /// True when the law is exponential, whichever variant spells it.
    pub fn is_exponential(&self) -> bool {
        self.shape() == 1.0
    }
}

/// The generalized demand subordinator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DemandModel {
    drift: f64,
    unit_jump_size: f64,
    unit_jump_rate: f64,
    compound_rate: f64,
    jumps: Option<JumpDistribution>,
}

fn check_nonneg(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")))
    }
}

impl DemandModel {
    /// Builds a model, rejecting negative components and degenerate demand.
    pub fn new(
        drift: f64,
        unit_jump_size: f64,
        unit_jump_rate: f64,
        compound_rate: f64,
        jumps: Option<JumpDistribution>,
    ) -> Result<Self> {
        check_nonneg("mu", drift)?;
        check_nonneg("alpha", unit_jump_size)?;
        check_nonneg("lambda", unit_jump_rate)?;
        check_nonneg("lambda_prime", compound_rate)?;
        match (compound_rate > 0.0, jumps) {
            (true, None) => {
                return Err(Error::invalid(
                    "jumps",
                    "distribution required when lambda_prime > 0",
                ))
            }
            (false, Some(_)) => {
                return Err(Error::invalid(
                    "jumps",
                    "distribution given but lambda_prime is 0",
                ))
            }
            (_, Some(d)) => d.validate()?,
            (false, None) => {}
        }
        if !(drift + unit_jump_size * unit_jump_rate + compound_rate > 0.0) {
            return Err(Error::invalid(
                "model",
                "is degenerate: mu + alpha*lambda + lambda_prime must be > 0",
            ));
        }
        Ok(DemandModel {
            drift,
            unit_jump_size,
            unit_jump_rate,
            compound_rate,
            jumps,
        })
    }

    pub fn drift_only(drift: f64) -> Result<Self> {
        Self::new(drift, 0.0, 0.0, 0.0, None)
    }

    /// `μt + αN_t`.
    pub fn drifted_poisson(drift: f64, unit_jump_size: f64, unit_jump_rate: f64) -> Result<Self> {
        Self::new(drift, unit_jump_size, unit_jump_rate, 0.0, None)
    }

    /// `μt + Σ_{k≤N'_t} J_k`.
    pub fn drifted_compound(drift: f64, compound_rate: f64, jumps: JumpDistribution) -> Result<Self> {
        Self::new(drift, 0.0, 0.0, compound_rate, Some(jumps))
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }
    pub fn unit_jump_size(&self) -> f64 {
        self.unit_jump_size
    }
    pub fn unit_jump_rate(&self) -> f64 {
        self.unit_jump_rate
    }
    pub fn compound_rate(&self) -> f64 {
        self.compound_rate
    }
    pub fn jumps(&self) -> Option<&JumpDistribution> {
        self.jumps.as_ref()
    }

    /// Whether unit jumps actually move demand (α > 0 and λ > 0).
    pub fn has_unit_jumps(&self) -> bool {
        self.unit_jump_size > 0.0 && self.unit_jump_rate > 0.0
    }

    /// The compound component, if λ′ > 0.
    pub fn compound(&self) -> Option<(f64, &JumpDistribution)> {
        self.jumps.as_ref().map(|d| (self.compound_rate, d))
    }

    /// Supremum of the domain of ψ: η with a compound part, +∞ otherwise.
    pub fn exponent_domain_end(&self) -> f64 {
        self.jumps.map_or(f64::INFINITY, |d| d.rate())
    }

    /// Laplace exponent `ψ(θ) = log E[e^{θD₁}]
    /// = θμ + λ(e^{θα} − 1) + λ′((η/(η−θ))^β − 1)`.
    pub fn laplace_exponent(&self, theta: f64) -> Result<f64> {
        if theta.is_nan() {
            return Err(Error::Domain {
                function: "laplace_exponent",
                value: theta,
                reason: "theta is NaN",
            });
        }
        let mut psi = theta * self.drift + self.unit_jump_rate * (theta * self.unit_jump_size).exp_m1();
        if let Some((rate, d)) = self.compound() {
            if theta >= d.rate() {
                return Err(Error::Domain {
                    function: "laplace_exponent",
                    value: theta,
                    reason: "theta must be < eta when compound jumps are present",
                });
            }
            psi += rate * (-d.shape() * (-theta / d.rate()).ln_1p()).exp_m1();
        }
        Ok(psi)
    }

    /// `(ψ′(θ), ψ″(θ))` on the domain of ψ.
    pub fn laplace_exponent_derivatives(&self, theta: f64) -> Result<(f64, f64)> {
        let unit = self.unit_jump_rate * (self.unit_jump_size * theta).exp();
        let mut d1 = self.drift + self.unit_jump_size * unit;
        let mut d2 = self.unit_jump_size * self.unit_jump_size * unit;
        if let Some((rate, d)) = self.compound() {
            if theta >= d.rate() {
                return Err(Error::Domain {
                    function: "laplace_exponent_derivatives",
                    value: theta,
                    reason: "theta must be < eta when compound jumps are present",
                });
            }
            let (b, e) = (d.shape(), d.rate());
            let base = 1.0 - theta / e;
            d1 += rate * b / e * base.powf(-(b + 1.0));
            d2 += rate * b * (b + 1.0) / (e * e) * base.powf(-(b + 2.0));
        }
        Ok((d1, d2))
    }

    /// `(ψ′(0), ψ″(0)) = (μ + αλ + λ′β/η, α²λ + λ′β(β+1)/η²)`.
    pub fn psi_derivatives_at_zero(&self) -> (f64, f64) {
        let a = self.unit_jump_size;
        let mut d1 = self.drift + a * self.unit_jump_rate;
        let mut d2 = a * a * self.unit_jump_rate;
        if let Some((rate, d)) = self.compound() {
            d1 += rate * d.shape() / d.rate();
            d2 += rate * d.second_moment();
        }
        (d1, d2)
    }

    /// Mean demand per unit time, `m = μ + αλ + λ′E[J₁]`.
    pub fn mean_rate(&self) -> f64 {
        self.drift
            + self.unit_jump_size * self.unit_jump_rate
            + self.compound().map_or(0.0, |(rate, d)| rate * d.mean())
    }

    /// `Var[D₁] = α²λ + λ′E[J₁²]`.
    pub fn variance_rate(&self) -> f64 {
        self.psi_derivatives_at_zero().1
    }
}

/// Fixed-order-quantity policy: start at `x`, reorder `Q` each time
/// cumulative demand reaches `a + (n−1)Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Policy {
    initial_stock: f64,
    reorder_offset: f64,
    order_quantity: f64,
}

impl Policy {
    pub fn new(initial_stock: f64, reorder_offset: f64, order_quantity: f64) -> Result<Self> {
        for (name, v) in [
            ("x", initial_stock),
            ("a", reorder_offset),
            ("Q", order_quantity),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be > 0, got {v}")));
            }
        }
        Ok(Policy {
            initial_stock,
            reorder_offset,
            order_quantity,
        })
    }

    pub fn initial_stock(&self) -> f64 {
        self.initial_stock
    }
    pub fn reorder_offset(&self) -> f64 {
        self.reorder_offset
    }
    pub fn order_quantity(&self) -> f64 {
        self.order_quantity
    }
    pub fn reorder_point(&self) -> f64 {
        self.initial_stock - self.reorder_offset
    }

    /// Demand level `K_n = a + (n−1)Q` that triggers the n-th order.
    pub fn threshold(&self, n: u64) -> f64 {
        debug_assert!(n >= 1);
        self.reorder_offset + (n as f64 - 1.0) * self.order_quantity
    }

    /// Number of thresholds at or below demand level `d`.
    pub fn thresholds_reached(&self, d: f64) -> u64 {
        if d < self.reorder_offset {
            0
        } else {
            ((d - self.reorder_offset) / self.order_quantity).floor() as u64 + 1
        }
    }
}

/// Per-unit ordering, holding and stockout rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostRates {
    pub ordering: f64,
    pub holding: f64,
    pub stockout: f64,
}

impl CostRates {
    pub fn new(ordering: f64, holding: f64, stockout: f64) -> Result<Self> {
        check_nonneg("C_o", ordering)?;
        check_nonneg("C_h", holding)?;
        check_nonneg("C_so", stockout)?;
        Ok(CostRates {
            ordering,
            holding,
            stockout,
        })
    }
}
