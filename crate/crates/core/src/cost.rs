//! Expected inventory level and expected costs of the fixed-order-quantity
//! policy, with the stockout term left out of the analytic path.

use rayon::prelude::*;
use serde::Serialize;

use crate::distribution::{expected_orders, SeriesControl};
use crate::error::{Error, Result};
use crate::model::{CostRates, DemandModel, Policy};
use crate::quadrature::{integrate, Integral, QuadratureControl};
use crate::special::poisson_pmf;

/// Relative change under node doubling above which a cost is reported as
/// under-resolved.
pub const QUADRATURE_WARN_THRESHOLD: f64 = 1e-6;

const MAX_BREAKS: usize = 4096;
const BREAK_WEIGHT_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub horizon: f64,
    pub ordering: f64,
    pub holding: f64,
    /// Always 0 on the analytic path.
    pub stockout: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(horizon: f64, ordering: f64, holding: f64, stockout: f64) -> Self {
        CostBreakdown {
            horizon,
            ordering,
            holding,
            stockout,
            total: ordering + holding + stockout,
        }
    }
}

/// `E[X_t] = x − m·t + Q·E[R_t]`.
pub fn expected_inventory_level(model: &DemandModel, policy: &Policy, t: f64, ctrl: &SeriesControl) -> Result<f64> {
    let orders = expected_orders(model, policy, t, ctrl)?;
    Ok(policy.initial_stock() - model.mean_rate() * t + policy.order_quantity() * orders)
}

/// A cost together with the relative change of its total when the
/// quadrature resolution is doubled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostEvaluation {
    pub breakdown: CostBreakdown,
    pub quadrature_change: f64,
}

/// `E[C_total] = C_o·Q·E[R_t] + C_h·(x·t − m·t²/2 + Q·∫₀ᵗ E[R_s] ds)`.
pub fn expected_total_cost(
    model: &DemandModel,
    policy: &Policy,
    rates: &CostRates,
    t: f64,
    series: &SeriesControl,
    quad: &QuadratureControl,
) -> Result<CostBreakdown> {
    let eval = evaluate_total_cost(model, policy, rates, t, series, quad)?;
    if eval.quadrature_change > QUADRATURE_WARN_THRESHOLD {
        log::warn!(
            "holding integral under-resolved at t={t}: doubling nodes changes total by {:.3e} (relative)",
            eval.quadrature_change
        );
    }
    Ok(eval.breakdown)
}

/// [`expected_total_cost`] plus the node-doubling diagnostic.
pub fn evaluate_total_cost(
    model: &DemandModel,
    policy: &Policy,
    rates: &CostRates,
    t: f64,
    series: &SeriesControl,
    quad: &QuadratureControl,
) -> Result<CostEvaluation> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("must be > 0, got {t}")));
    }
    series.validate()?;
    quad.validate()?;
    let q = policy.order_quantity();

    let ordering = if rates.ordering > 0.0 {
        rates.ordering * q * expected_orders(model, policy, t, series)?
    } else {
        0.0
    };
    if rates.holding == 0.0 {
        return Ok(CostEvaluation {
            breakdown: CostBreakdown::new(t, ordering, 0.0, 0.0),
            quadrature_change: 0.0,
        });
    }

    let integral = expected_orders_integral(model, policy, t, series, quad)?;
    let smooth = policy.initial_stock() * t - 0.5 * model.mean_rate() * t * t;
    let holding = rates.holding * (smooth + q * integral.value);
    let holding_fine = rates.holding * (smooth + q * integral.refined);

    let breakdown = CostBreakdown::new(t, ordering, holding, 0.0);
    let fine_total = ordering + holding_fine;
    let quadrature_change = (fine_total - breakdown.total).abs() / fine_total.abs().max(f64::MIN_POSITIVE);
    Ok(CostEvaluation {
        breakdown,
        quadrature_change,
    })
}

/// `∫₀ᵗ E[R_s] ds` at the requested and at doubled resolution.
pub fn expected_orders_integral(
    model: &DemandModel,
    policy: &Policy,
    t: f64,
    series: &SeriesControl,
    quad: &QuadratureControl,
) -> Result<Integral> {
    integrate(
        |s| expected_orders(model, policy, s, series),
        t,
        order_breakpoints(model, policy, t, series),
        quad,
    )
}

/// Times in `(0, t)` where `s ↦ E[R_s]` jumps or kinks: the drift alone
/// carries `μs + αi` across a threshold while few compound jumps have
/// occurred. Only the heaviest [`MAX_BREAKS`] are kept.
fn order_breakpoints(model: &DemandModel, policy: &Policy, t: f64, ctrl: &SeriesControl) -> Vec<f64> {
    let mu = model.drift();
    if mu == 0.0 {
        return Vec::new();
    }
    let alpha = if model.has_unit_jumps() { model.unit_jump_size() } else { 0.0 };
    let lambda = model.unit_jump_rate();

    // Compound terms with jβ ≤ 2 still leave a visible kink.
    let (kink_terms, compound_rate) = match model.compound() {
        Some((rate, d)) => ((2.0 / d.shape()).floor() as u64, rate),
        None => (0, 0.0),
    };
    let compound_weight = |s: f64| -> f64 {
        if compound_rate == 0.0 {
            1.0
        } else {
            (0..=kink_terms).map(|j| poisson_pmf(j, compound_rate * s)).sum()
        }
    };
    // Beyond this time no kink carries weight above the floor.
    let s_end = if compound_rate > 0.0 {
        let mut s = t;
        while s > 1e-9 * t && compound_weight(s) < BREAK_WEIGHT_FLOOR {
            s *= 0.5;
        }
        (2.0 * s).min(t)
    } else {
        t
    };

    // Unit-jump counts beyond this are negligible on [0, s_end].
    let unit_mean = lambda * s_end;
    let i_max = if alpha > 0.0 {
        ((unit_mean + 12.0 * unit_mean.sqrt() + 40.0) as u64).min(ctrl.max_unit_index)
    } else {
        0
    };
    let mut found: Vec<(f64, f64)> = Vec::new();
    let max_n = policy.thresholds_reached(mu * s_end + alpha * i_max as f64).min(ctrl.max_replenishments);
    for n in 1..=max_n {
        let k = policy.threshold(n);
        if alpha == 0.0 {
            let s = k / mu;
            if s < s_end {
                found.push((s, compound_weight(s)));
            }
            continue;
        }
        // s* = (K_n − αi)/μ ∈ (0, s_end)
        let i_lo = ((k - mu * s_end) / alpha).ceil().max(0.0) as u64;
        let i_hi = (k / alpha).floor() as u64;
        for i in i_lo..=i_hi.min(i_max) {
            let s = (k - alpha * i as f64) / mu;
            if s <= 0.0 || s >= s_end {
                continue;
            }
            let w = poisson_pmf(i, lambda * s) * compound_weight(s);
            if w > BREAK_WEIGHT_FLOOR {
                found.push((s, w));
            }
        }
    }
    if found.len() > MAX_BREAKS {
        found.sort_by(|a, b| b.1.total_cmp(&a.1));
        found.truncate(MAX_BREAKS);
    }
    found.into_iter().map(|(s, _)| s).collect()
}

/// `lim (1/t)·E[C_total] = C_o·m + C_h·x`.
pub fn long_run_average_cost(model: &DemandModel, rates: &CostRates, initial_stock: f64) -> f64 {
    rates.ordering * model.mean_rate() + rates.holding * initial_stock
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub a: f64,
    pub q: f64,
    pub result: std::result::Result<CostBreakdown, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    /// a-major: all Q values for the first a, then the next a.
    pub rows: Vec<SweepRow>,
    /// Index into `rows` of the smallest total among successful cells.
    pub argmin: Option<usize>,
}

/// Expected total cost on every `(a, Q)` pair of the two grids.
/// A failing cell is recorded in its row and does not stop the sweep.
#[allow(clippy::too_many_arguments)]
pub fn cost_sweep(
    model: &DemandModel,
    rates: &CostRates,
    initial_stock: f64,
    a_grid: &[f64],
    q_grid: &[f64],
    t: f64,
    series: &SeriesControl,
    quad: &QuadratureControl,
) -> Result<SweepTable> {
    if a_grid.is_empty() || q_grid.is_empty() {
        return Err(Error::invalid("grid", "a and Q grids must be nonempty"));
    }
    for &v in a_grid.iter().chain(q_grid) {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid("grid", format!("entries must be > 0, got {v}")));
        }
    }
    let cells: Vec<(f64, f64)> = a_grid
        .iter()
        .flat_map(|&a| q_grid.iter().map(move |&q| (a, q)))
        .collect();
    let rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|&(a, q)| {
            let result = Policy::new(initial_stock, a, q)
                .and_then(|p| expected_total_cost(model, &p, rates, t, series, quad))
                .map_err(|e| e.to_string());
            SweepRow { a, q, result }
        })
        .collect();
    let argmin = rows
        .iter()
        .enumerate()
        .filter_map(|(k, r)| r.result.as_ref().ok().map(|c| (k, c.total)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(k, _)| k);
    Ok(SweepTable { rows, argmin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::JumpDistribution;

    fn ctrls() -> (SeriesControl, QuadratureControl) {
        (SeriesControl::default(), QuadratureControl::default())
    }

    #[test]
    fn inventory_examples() {
        let (s, _) = ctrls();
        let m = DemandModel::new(0.4, 1.0, 0.5, 1.0, Some(JumpDistribution::gamma(2.0, 1.0).unwrap())).unwrap();
        let p = Policy::new(7.5, 2.0, 3.0).unwrap();
        assert_eq!(expected_inventory_level(&m, &p, 0.0, &s).unwrap(), 7.5);
        let d = DemandModel::drift_only(1.0).unwrap();
        let p = Policy::new(5.0, 2.0, 3.0).unwrap();
        assert_eq!(expected_inventory_level(&d, &p, 4.0, &s).unwrap(), 4.0);
    }

    #[test]
    fn inventory_is_the_documented_composition() {
        let (s, _) = ctrls();
        let m = DemandModel::new(0.4, 1.0, 0.5, 1.0, Some(JumpDistribution::gamma(2.0, 1.0).unwrap())).unwrap();
        let p = Policy::new(7.5, 2.0, 3.0).unwrap();
        for &t in &[0.5, 3.0, 9.0] {
            let direct = expected_inventory_level(&m, &p, t, &s).unwrap();
            let recomposed = 7.5 - m.mean_rate() * t + 3.0 * expected_orders(&m, &p, t, &s).unwrap();
            assert!((direct - recomposed).abs() <= 1e-12 * recomposed.abs().max(1.0));
        }
    }

    #[test]
    fn cost_examples() {
        let (s, q) = ctrls();
        let m = DemandModel::drifted_poisson(1.0, 1.0, 1.0).unwrap();
        let p = Policy::new(10.0, 3.0, 4.0).unwrap();
        let zero = CostRates::new(0.0, 0.0, 5.0).unwrap();
        let c = expected_total_cost(&m, &p, &zero, 5.0, &s, &q).unwrap();
        assert_eq!((c.ordering, c.holding, c.stockout, c.total), (0.0, 0.0, 0.0, 0.0));

        let d = DemandModel::drift_only(1.0).unwrap();
        let p = Policy::new(4.0, 2.0, 10.0).unwrap();
        let r = CostRates::new(1.0, 1.0, 0.0).unwrap();
        let c = expected_total_cost(&d, &p, &r, 1.0, &s, &q).unwrap();
        assert_eq!(c.ordering, 0.0);
        assert!((c.holding - 3.5).abs() < 1e-12 && (c.total - 3.5).abs() < 1e-12);
        assert_eq!(c.stockout, 0.0);
    }

    #[test]
    fn drift_only_cost_is_exact_across_reorders() {
        // X_s = 6 − s + 2·#{n : 1 + 2(n−1) ≤ s}; on [0, 5] that integrates to 27.5
        let (s, q) = ctrls();
        let d = DemandModel::drift_only(1.0).unwrap();
        let p = Policy::new(6.0, 1.0, 2.0).unwrap();
        let r = CostRates::new(0.5, 1.0, 0.0).unwrap();
        let e = evaluate_total_cost(&d, &p, &r, 5.0, &s, &q).unwrap();
        let integral = 30.0 - 12.5 + 2.0 * (4.0 + 2.0 + 0.0);
        assert!((e.breakdown.holding - integral).abs() < 1e-9, "{}", e.breakdown.holding);
        assert_eq!(e.breakdown.ordering, 0.5 * 2.0 * 3.0);
        assert!(e.quadrature_change < 1e-12);
    }

    #[test]
    fn breakdown_total_is_sum() {
        let (s, q) = ctrls();
        let m = DemandModel::new(1.0, 1.0, 1.0, 1.0, Some(JumpDistribution::exponential(2.0).unwrap())).unwrap();
        let p = Policy::new(10.0, 3.0, 4.0).unwrap();
        let r = CostRates::new(2.0, 0.5, 0.0).unwrap();
        let c = expected_total_cost(&m, &p, &r, 5.0, &s, &q).unwrap();
        assert!((c.total - (c.ordering + c.holding + c.stockout)).abs() <= 1e-12 * c.total);
        assert!(c.ordering > 0.0);
    }

    #[test]
    fn quadrature_doubling_is_stable() {
        let (s, q) = ctrls();
        let models = [
            DemandModel::new(1.0, 1.0, 1.0, 1.0, Some(JumpDistribution::exponential(2.0).unwrap())).unwrap(),
            DemandModel::drifted_poisson(0.7, 1.5, 0.8).unwrap(),
            DemandModel::new(0.5, 0.0, 0.0, 2.0, Some(JumpDistribution::gamma(0.5, 1.0).unwrap())).unwrap(),
        ];
        let p = Policy::new(10.0, 3.0, 4.0).unwrap();
        let r = CostRates::new(2.0, 0.5, 0.0).unwrap();
        for m in &models {
            for &t in &[2.0, 10.0] {
                let e = evaluate_total_cost(m, &p, &r, t, &s, &q).unwrap();
                assert!(e.quadrature_change <= 1e-6, "{m:?} t={t}: {}", e.quadrature_change);
            }
        }
    }

    #[test]
    fn long_run_examples() {
        let d = DemandModel::drift_only(2.0).unwrap();
        let r = CostRates::new(3.0, 1.0, 0.0).unwrap();
        assert_eq!(long_run_average_cost(&d, &r, 5.0), 11.0);
        let m = DemandModel::new(1.0, 1.0, 1.0, 2.0, Some(JumpDistribution::exponential(4.0).unwrap())).unwrap();
        let r = CostRates::new(1.0, 0.0, 0.0).unwrap();
        assert!((long_run_average_cost(&m, &r, 123.0) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn sweep_single_cell_matches_direct() {
        let (s, q) = ctrls();
        let m = DemandModel::new(1.0, 1.0, 1.0, 1.0, Some(JumpDistribution::exponential(2.0).unwrap())).unwrap();
        let r = CostRates::new(2.0, 0.5, 0.0).unwrap();
        let table = cost_sweep(&m, &r, 10.0, &[3.0], &[4.0], 5.0, &s, &q).unwrap();
        let direct = expected_total_cost(&m, &Policy::new(10.0, 3.0, 4.0).unwrap(), &r, 5.0, &s, &q).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].result, Ok(direct));
        assert_eq!(table.argmin, Some(0));
    }

    #[test]
    fn sweep_drift_only_rows_without_reorders_agree() {
        let (s, q) = ctrls();
        let d = DemandModel::drift_only(1.0).unwrap();
        let r = CostRates::new(1.0, 1.0, 0.0).unwrap();
        let t = 3.0;
        let table = cost_sweep(&d, &r, 10.0, &[4.0, 5.0, 8.0], &[1.0, 2.0], t, &s, &q).unwrap();
        let totals: Vec<f64> = table.rows.iter().map(|r| r.result.as_ref().unwrap().total).collect();
        for w in totals.windows(2) {
            assert!((w[0] - w[1]).abs() < 1e-9);
        }
        assert_eq!((table.rows[0].a, table.rows[0].q), (4.0, 1.0));
        assert_eq!((table.rows[1].a, table.rows[1].q), (4.0, 2.0));
    }

    #[test]
    fn sweep_marks_failed_cells() {
        let (s, q) = ctrls();
        let d = DemandModel::drift_only(1.0).unwrap();
        let r = CostRates::new(1.0, 1.0, 0.0).unwrap();
        let tight = SeriesControl {
            max_replenishments: 3,
            ..s
        };
        let table = cost_sweep(&d, &r, 10.0, &[1.0], &[0.5, 5.0], 4.0, &tight, &q).unwrap();
        assert!(table.rows[0].result.is_err());
        assert!(table.rows[1].result.is_ok());
        assert_eq!(table.argmin, Some(1));
        assert!(cost_sweep(&d, &r, 10.0, &[], &[1.0], 4.0, &s, &q).is_err());
        assert!(cost_sweep(&d, &r, 10.0, &[1.0], &[-1.0], 4.0, &s, &q).is_err());
    }
}
