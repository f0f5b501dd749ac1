//! Subcommand bodies. Each returns a [`Report`]; nothing here prints.

use levy_inventory::cost::evaluate_total_cost;
use levy_inventory::monte_carlo::{estimate_cost, estimate_fpt_moments, estimate_tail, event_log};
use levy_inventory::{
    cost_sweep, demand_tail, expected_total_cost, fpt_moments, long_run_average_cost, McEstimate,
};
use serde_json::{json, Value};

use crate::output::{num, opt_num, Report};
use crate::{CliError, RunConfig};

fn estimate_json(e: &McEstimate, reference: Option<f64>) -> Value {
    let mut v = json!({
        "mean": e.mean,
        "std_error": e.std_error,
        "ci_low": e.ci_low,
        "ci_high": e.ci_high,
        "paths_used": e.paths_used,
    });
    if let Some(r) = reference {
        v["within_ci"] = json!(e.covers(r));
    }
    v
}

fn estimate_cells(e: Option<&McEstimate>, reference: Option<f64>) -> Vec<String> {
    match e {
        None => vec![String::new(); 5],
        Some(e) => vec![
            num(e.mean),
            num(e.std_error),
            num(e.ci_low),
            num(e.ci_high),
            reference.map(|r| e.covers(r).to_string()).unwrap_or_default(),
        ],
    }
}

pub fn moments(cfg: &RunConfig, n: u64, mc: bool) -> Result<Report, CliError> {
    if n == 0 {
        return Err(CliError::Usage("n must be >= 1".into()));
    }
    let closed = fpt_moments(&cfg.model, &cfg.policy, n)?;
    let sim = if mc {
        Some(estimate_fpt_moments(&cfg.model, &cfg.policy, n, &cfg.mc)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    let mut quantities = serde_json::Map::new();
    for (name, value, est) in [
        ("mean", closed.mean, sim.map(|s| s.0)),
        ("variance", closed.variance, sim.map(|s| s.1)),
    ] {
        let mut row = vec![n.to_string(), name.to_string(), num(value)];
        row.extend(estimate_cells(est.as_ref(), Some(value)));
        rows.push(row);
        quantities.insert(
            name.into(),
            json!({
                "closed_form": value,
                "monte_carlo": est.map(|e| estimate_json(&e, Some(value))),
            }),
        );
    }
    Ok(Report {
        header: vec!["n", "quantity", "closed_form", "mc_estimate", "mc_std_error", "ci_low", "ci_high", "within_ci"],
        rows,
        json: json!({ "command": "moments", "n": n, "seed": cfg.mc.seed, "quantities": quantities }),
        notes: vec![],
    })
}

pub fn tail(cfg: &RunConfig, s: f64, b: f64, mc: bool) -> Result<Report, CliError> {
    let series = demand_tail(&cfg.model, s, b, &cfg.series)?;
    let sim = if mc {
        Some(estimate_tail(&cfg.model, s, b, &cfg.mc)?)
    } else {
        None
    };
    let verdict = sim.map(|e| if e.covers(series) { "within CI" } else { "outside CI" });
    let mut row = vec![num(s), num(b), num(series)];
    row.extend(estimate_cells(sim.as_ref(), Some(series)));
    Ok(Report {
        header: vec!["s", "b", "series", "mc_estimate", "mc_std_error", "ci_low", "ci_high", "within_ci"],
        rows: vec![row],
        json: json!({
            "command": "tail",
            "s": s,
            "b": b,
            "seed": cfg.mc.seed,
            "series": series,
            "monte_carlo": sim.map(|e| estimate_json(&e, Some(series))),
            "verdict": verdict,
        }),
        notes: verdict.map(|v| format!("series value {v}")).into_iter().collect(),
    })
}

pub fn cost(cfg: &RunConfig, t: f64, mc: bool) -> Result<Report, CliError> {
    let eval = evaluate_total_cost(&cfg.model, &cfg.policy, &cfg.rates, t, &cfg.series, &cfg.quadrature)?;
    let analytic = eval.breakdown;
    let sim = if mc {
        Some(estimate_cost(&cfg.model, &cfg.policy, &cfg.rates, t, &cfg.mc)?)
    } else {
        None
    };
    let mut notes = Vec::new();
    if eval.quadrature_change > levy_inventory::cost::QUADRATURE_WARN_THRESHOLD {
        notes.push(format!(
            "quadrature doubling changes the total by {:e} (relative); raise quadrature.nodes",
            eval.quadrature_change
        ));
    }
    let components = [
        ("ordering", analytic.ordering, sim.map(|c| c.ordering)),
        ("holding", analytic.holding, sim.map(|c| c.holding)),
        ("stockout", analytic.stockout, sim.map(|c| c.stockout)),
        ("total", analytic.total, sim.map(|c| c.total)),
    ];
    let rows = components
        .iter()
        .map(|(name, value, est)| {
            let mut row = vec![num(t), name.to_string(), num(*value)];
            row.extend(estimate_cells(est.as_ref(), None).into_iter().take(4));
            row
        })
        .collect();
    let json_components: serde_json::Map<String, Value> = components
        .iter()
        .map(|(name, value, est)| {
            (
                name.to_string(),
                json!({ "analytic": value, "monte_carlo": est.map(|e| estimate_json(&e, None)) }),
            )
        })
        .collect();
    Ok(Report {
        header: vec!["t", "component", "analytic", "mc_estimate", "mc_std_error", "ci_low", "ci_high"],
        rows,
        json: json!({
            "command": "cost",
            "t": t,
            "seed": cfg.mc.seed,
            "quadrature_change": eval.quadrature_change,
            "components": json_components,
            "notes": notes,
        }),
        notes,
    })
}

pub fn longrun(cfg: &RunConfig, checkpoints: &[f64]) -> Result<Report, CliError> {
    let limit = long_run_average_cost(&cfg.model, &cfg.rates, cfg.policy.initial_stock());
    let mut rows = Vec::new();
    let mut trace = Vec::new();
    for &t in checkpoints {
        let c = expected_total_cost(&cfg.model, &cfg.policy, &cfg.rates, t, &cfg.series, &cfg.quadrature)?;
        rows.push(vec![num(t), num(c.total), num(c.total / t), num(limit)]);
        trace.push(json!({ "t": t, "total": c.total, "total_over_t": c.total / t }));
    }
    Ok(Report {
        header: vec!["t", "total", "total_over_t", "limit"],
        rows,
        json: json!({ "command": "longrun", "limit": limit, "trace": trace }),
        notes: vec![],
    })
}

pub fn simulate(cfg: &RunConfig, horizon: f64, paths: u64) -> Result<Report, CliError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(CliError::Usage(format!("t must be > 0, got {horizon}")));
    }
    if paths == 0 {
        return Err(CliError::Usage("paths must be >= 1".into()));
    }
    let log = event_log(&cfg.model, paths, horizon, cfg.mc.seed);
    let rows = log
        .iter()
        .map(|(id, e)| vec![id.to_string(), num(e.time), num(e.jump_size), e.source.as_str().to_string()])
        .collect();
    let events: Vec<Value> = log
        .iter()
        .map(|(id, e)| json!({ "path_id": id, "time": e.time, "jump_size": e.jump_size, "source": e.source }))
        .collect();
    Ok(Report {
        header: vec!["path_id", "time", "jump_size", "source"],
        rows,
        json: json!({ "command": "simulate", "paths": paths, "horizon": horizon, "seed": cfg.mc.seed, "events": events }),
        notes: vec![],
    })
}

pub fn sweep(cfg: &RunConfig, t: f64, grid_a: &[f64], grid_q: &[f64]) -> Result<Report, CliError> {
    let table = cost_sweep(
        &cfg.model,
        &cfg.rates,
        cfg.policy.initial_stock(),
        grid_a,
        grid_q,
        t,
        &cfg.series,
        &cfg.quadrature,
    )?;
    let mut notes = Vec::new();
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for r in &table.rows {
        let mut row = vec![num(r.a), num(r.q), num(t)];
        match &r.result {
            Ok(c) => {
                row.extend([c.ordering, c.holding, c.stockout, c.total].map(num));
                cells.push(json!({ "a": r.a, "Q": r.q, "t": t, "ordering": c.ordering, "holding": c.holding, "stockout": c.stockout, "total": c.total }));
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(String::new(), 4));
                notes.push(format!("cell a={} Q={} failed: {e}", r.a, r.q));
                cells.push(json!({ "a": r.a, "Q": r.q, "t": t, "error": e }));
            }
        }
        rows.push(row);
    }
    let argmin = table.argmin.map(|k| {
        let r = &table.rows[k];
        json!({ "a": r.a, "Q": r.q, "total": r.result.as_ref().map(|c| c.total).ok() })
    });
    if let Some(k) = table.argmin {
        let r = &table.rows[k];
        notes.push(format!(
            "argmin a={} Q={} total={}",
            r.a,
            r.q,
            opt_num(r.result.as_ref().ok().map(|c| c.total))
        ));
    }
    Ok(Report {
        header: vec!["a", "Q", "t", "ordering", "holding", "stockout", "total"],
        rows,
        json: json!({ "command": "sweep", "t": t, "cells": cells, "argmin": argmin }),
        notes,
    })
}
