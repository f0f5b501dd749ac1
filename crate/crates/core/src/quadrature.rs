//! Composite Newton–Cotes rules on `[0, t]`, split at known discontinuities
//! of the integrand.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureScheme {
    Trapezoid,
    Simpson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuadratureControl {
    /// Target number of subintervals over the whole horizon.
    pub nodes: usize,
    pub scheme: QuadratureScheme,
}

impl Default for QuadratureControl {
    fn default() -> Self {
        QuadratureControl {
            nodes: 256,
            scheme: QuadratureScheme::Simpson,
        }
    }
}

impl QuadratureControl {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 {
            return Err(Error::invalid("nodes", format!("must be >= 8, got {}", self.nodes)));
        }
        if self.scheme == QuadratureScheme::Simpson && self.nodes % 2 != 0 {
            return Err(Error::invalid("nodes", "must be even for simpson"));
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        QuadratureControl {
            nodes: self.nodes * 2,
            ..*self
        }
    }
}

/// An integral at the requested resolution and at twice that resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub refined: f64,
}

impl Integral {
    /// `|refined − value| / |refined|`.
    pub fn relative_change(&self) -> f64 {
        let scale = self.refined.abs().max(f64::MIN_POSITIVE);
        (self.refined - self.value).abs() / scale
    }
}

struct Piece {
    lo: f64,
    hi: f64,
    intervals: usize,
}

/// Integrates `f` over `[0, t]`.
///
/// `breaks` are points in `(0, t)` where `f` may jump or kink; each piece
/// between consecutive breaks gets its own composite rule, evaluated just
/// inside its ends so one-sided limits are used. The fine grid nests the
/// coarse one, so both estimates come from one set of evaluations.
pub fn integrate<F>(f: F, t: f64, mut breaks: Vec<f64>, ctrl: &QuadratureControl) -> Result<Integral>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    ctrl.validate()?;
    if t == 0.0 {
        return Ok(Integral {
            value: 0.0,
            refined: 0.0,
        });
    }
    let min_gap = 1e-9 * t;
    breaks.retain(|&b| b > min_gap && b < t - min_gap);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < min_gap);

    let per_piece = match ctrl.scheme {
        QuadratureScheme::Simpson => 2,
        QuadratureScheme::Trapezoid => 1,
    };
    let mut edges = Vec::with_capacity(breaks.len() + 2);
    edges.push(0.0);
    edges.extend(breaks);
    edges.push(t);
    let pieces: Vec<Piece> = edges
        .windows(2)
        .map(|w| {
            let share = (ctrl.nodes as f64 * (w[1] - w[0]) / t).round() as usize;
            let mut intervals = share.max(per_piece);
            if per_piece == 2 && intervals % 2 == 1 {
                intervals += 1;
            }
            Piece {
                lo: w[0],
                hi: w[1],
                intervals,
            }
        })
        .collect();

    let nudge = 8.0 * f64::EPSILON * t;
    let mut points = Vec::new();
    for (k, piece) in pieces.iter().enumerate() {
        let fine = 2 * piece.intervals;
        let h = (piece.hi - piece.lo) / fine as f64;
        for i in 0..=fine {
            let mut x = piece.lo + h * i as f64;
            if i == 0 && k > 0 {
                x += nudge;
            }
            if i == fine {
                x = piece.hi - nudge;
            }
            points.push(x);
        }
    }
    let values: Vec<f64> = points.par_iter().map(|&x| f(x)).collect::<Result<_>>()?;

    let mut coarse = 0.0;
    let mut refined = 0.0;
    let mut offset = 0;
    for piece in &pieces {
        let fine = 2 * piece.intervals;
        let ys = &values[offset..=offset + fine];
        offset += fine + 1;
        let width = piece.hi - piece.lo;
        let coarse_ys: Vec<f64> = ys.iter().step_by(2).copied().collect();
        coarse += rule(&coarse_ys, width, ctrl.scheme);
        refined += rule(ys, width, ctrl.scheme);
    }
    Ok(Integral {
        value: coarse,
        refined,
    })
}

fn rule(ys: &[f64], width: f64, scheme: QuadratureScheme) -> f64 {
    let n = ys.len() - 1;
    let h = width / n as f64;
    match scheme {
        QuadratureScheme::Trapezoid => {
            let inner: f64 = ys[1..n].iter().sum();
            h * (0.5 * (ys[0] + ys[n]) + inner)
        }
        QuadratureScheme::Simpson => {
            let mut sum = ys[0] + ys[n];
            for (i, y) in ys.iter().enumerate().take(n).skip(1) {
                sum += if i % 2 == 1 { 4.0 * y } else { 2.0 * y };
            }
            sum * h / 3.0
        }
    }
}
