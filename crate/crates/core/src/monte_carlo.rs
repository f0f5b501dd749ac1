//! Exact event-driven simulation of the demand subordinator and of the
//! inventory it drives. Between jumps demand grows linearly, so every path
//! functional is computed without a time grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::{CostRates, DemandModel, JumpDistribution, Policy};

pub type PathRng = ChaCha8Rng;

/// Path `path_id` always draws from stream `path_id` of the generator keyed
/// by `seed`, whichever thread runs it.
pub fn path_rng(seed: u64, path_id: u64) -> PathRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_id);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpSource {
    UnitJump,
    CompoundJump,
}

impl JumpSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            JumpSource::UnitJump => "unit_jump",
            JumpSource::CompoundJump => "compound_jump",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathEvent {
    pub time: f64,
    pub jump_size: f64,
    pub source: JumpSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McConfig {
    pub paths: u64,
    pub horizon: f64,
    pub seed: u64,
    pub confidence_level: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            paths: 100_000,
            horizon: 10.0,
            seed: 42,
            confidence_level: 0.95,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.paths < 100 {
            return Err(Error::invalid("paths", format!("must be >= 100, got {}", self.paths)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid("horizon", format!("must be > 0, got {}", self.horizon)));
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(Error::invalid(
                "confidence_level",
                format!("must be in (0, 1), got {}", self.confidence_level),
            ));
        }
        Ok(())
    }

    fn z(&self) -> f64 {
        Normal::standard().inverse_cdf(0.5 * (1.0 + self.confidence_level))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub paths_used: u64,
}

impl McEstimate {
    fn with_interval(mean: f64, std_error: f64, z: f64, paths_used: u64) -> Self {
        McEstimate {
            mean,
            std_error,
            ci_low: mean - z * std_error,
            ci_high: mean + z * std_error,
            paths_used,
        }
    }

    pub fn covers(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }

    /// `|mean − value|` in standard errors; 0 when both agree exactly.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (self.mean - value).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }

    /// Sample mean and its standard error.
    pub fn of_mean(xs: &[f64], z: f64) -> Self {
        let n = xs.len();
        if let Some(v) = constant_value(xs) {
            return Self::with_interval(v, 0.0, z, n as u64);
        }
        let mean = mean(xs);
        let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
        let sd = (ss / (n as f64 - 1.0)).sqrt();
        Self::with_interval(mean, sd / (n as f64).sqrt(), z, n as u64)
    }

    /// Unbiased sample variance; the standard error uses the fourth central
    /// moment.
    pub fn of_variance(xs: &[f64], z: f64) -> Self {
        let n = xs.len();
        if constant_value(xs).is_some() {
            return Self::with_interval(0.0, 0.0, z, n as u64);
        }
        let nf = n as f64;
        let mean = mean(xs);
        let (m2, m4) = xs.iter().fold((0.0, 0.0), |(s2, s4), x| {
            let d2 = (x - mean).powi(2);
            (s2 + d2, s4 + d2 * d2)
        });
        let var = m2 / (nf - 1.0);
        let m4 = m4 / nf;
        let var_of_var = (m4 - var * var * (nf - 3.0) / (nf - 1.0)) / nf;
        Self::with_interval(var, var_of_var.max(0.0).sqrt(), z, n as u64)
    }

    /// Binomial frequency with a Wald interval.
    pub fn of_frequency(hits: u64, n: u64, z: f64) -> Self {
        let p = hits as f64 / n as f64;
        Self::with_interval(p, (p * (1.0 - p) / n as f64).sqrt(), z, n)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn constant_value(xs: &[f64]) -> Option<f64> {
    let first = *xs.first()?;
    xs.iter().all(|&x| x == first).then_some(first)
}

/// Monte Carlo cost with one estimate per component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McCostBreakdown {
    pub horizon: f64,
    pub ordering: McEstimate,
    pub holding: McEstimate,
    pub stockout: McEstimate,
    pub total: McEstimate,
}

enum JumpSampler {
    Exponential(f64),
    Gamma(Gamma<f64>),
}

impl JumpSampler {
    fn new(dist: &JumpDistribution) -> Self {
        if dist.is_exponential() {
            JumpSampler::Exponential(dist.rate())
        } else {
            JumpSampler::Gamma(Gamma::new(dist.shape(), 1.0 / dist.rate()).expect("validated gamma parameters"))
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            JumpSampler::Exponential(rate) => exponential(rng, *rate),
            JumpSampler::Gamma(g) => g.sample(rng),
        }
    }
}

/// Inverse-CDF exponential variate.
fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    -u.ln() / rate
}

/// Jump stream of one path: the unit and compound Poisson clocks superposed.
struct JumpStream<'r, R: Rng + ?Sized> {
    rng: &'r mut R,
    time: f64,
    total_rate: f64,
    unit_rate: f64,
    unit_size: f64,
    sampler: Option<JumpSampler>,
}

impl<'r, R: Rng + ?Sized> JumpStream<'r, R> {
    fn new(model: &DemandModel, rng: &'r mut R) -> Self {
        let unit_rate = if model.has_unit_jumps() { model.unit_jump_rate() } else { 0.0 };
        let (compound_rate, sampler) = match model.compound() {
            Some((rate, d)) => (rate, Some(JumpSampler::new(d))),
            None => (0.0, None),
        };
        JumpStream {
            rng,
            time: 0.0,
            total_rate: unit_rate + compound_rate,
            unit_rate,
            unit_size: model.unit_jump_size(),
            sampler,
        }
    }

    /// Next jump, or `None` for a pure drift.
    fn next_event(&mut self) -> Option<PathEvent> {
        if self.total_rate == 0.0 {
            return None;
        }
        self.time += exponential(self.rng, self.total_rate);
        let unit = self.sampler.is_none() || self.rng.random::<f64>() * self.total_rate < self.unit_rate;
        Some(if unit {
            PathEvent {
                time: self.time,
                jump_size: self.unit_size,
                source: JumpSource::UnitJump,
            }
        } else {
            let size = self.sampler.as_ref().expect("compound jumps present").sample(self.rng);
            PathEvent {
                time: self.time,
                jump_size: size,
                source: JumpSource::CompoundJump,
            }
        })
    }
}

/// Jumps of one demand path on `[0, horizon)`, in time order.
pub fn simulate_path<R: Rng + ?Sized>(model: &DemandModel, horizon: f64, rng: &mut R) -> Vec<PathEvent> {
    let mut stream = JumpStream::new(model, rng);
    let mut events = Vec::new();
    while let Some(e) = stream.next_event() {
        if e.time >= horizon {
            break;
        }
        events.push(e);
    }
    events
}

/// Demand `D_s` of one path.
pub fn sample_demand<R: Rng + ?Sized>(model: &DemandModel, s: f64, rng: &mut R) -> f64 {
    let jumps: f64 = simulate_path(model, s, rng).iter().map(|e| e.jump_size).sum();
    model.drift() * s + jumps
}

/// First time demand reaches `a + (n−1)Q`: the jump instant when a jump gets
/// there, otherwise the drift crossing between jumps.
pub fn sample_fpt<R: Rng + ?Sized>(model: &DemandModel, policy: &Policy, n: u64, rng: &mut R) -> f64 {
    let level = policy.threshold(n.max(1));
    let mu = model.drift();
    let mut stream = JumpStream::new(model, rng);
    let (mut t, mut d) = (0.0, 0.0);
    loop {
        match stream.next_event() {
            None => return t + (level - d) / mu,
            Some(e) => {
                if mu > 0.0 && d + mu * (e.time - t) >= level {
                    return t + (level - d) / mu;
                }
                d += mu * (e.time - t) + e.jump_size;
                t = e.time;
                if d >= level {
                    return t;
                }
            }
        }
    }
}

/// Path functionals of the controlled inventory on `[0, t]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PathSummary {
    pub demand: f64,
    pub orders: u64,
    /// `∫₀ᵗ X_s ds`
    pub level_integral: f64,
    /// `∫₀ᵗ (−X_s)⁺ ds`
    pub shortage_integral: f64,
    /// `∫₀ᵗ R_s ds`
    pub orders_integral: f64,
    /// `Σ_n (t − T_n)` over reorders before `t`.
    pub reorder_lead_sum: f64,
}

impl PathSummary {
    pub fn final_level(&self, policy: &Policy) -> f64 {
        policy.initial_stock() - self.demand + policy.order_quantity() * self.orders as f64
    }
}

struct InventoryWalk<'p> {
    policy: &'p Policy,
    horizon: f64,
    time: f64,
    demand: f64,
    orders: u64,
    next_threshold: f64,
    acc: PathSummary,
}

impl<'p> InventoryWalk<'p> {
    fn new(policy: &'p Policy, horizon: f64) -> Self {
        InventoryWalk {
            policy,
            horizon,
            time: 0.0,
            demand: 0.0,
            orders: 0,
            next_threshold: policy.threshold(1),
            acc: PathSummary::default(),
        }
    }

    fn level(&self) -> f64 {
        self.policy.initial_stock() - self.demand + self.policy.order_quantity() * self.orders as f64
    }

    fn place_orders(&mut self) {
        while self.demand >= self.next_threshold {
            self.orders += 1;
            self.acc.reorder_lead_sum += self.horizon - self.time;
            self.next_threshold = self.policy.threshold(self.orders + 1);
        }
    }

    /// Linear stretch with no reorder inside.
    fn accumulate(&mut self, len: f64, mu: f64) {
        let start = self.level();
        let end = start - mu * len;
        self.acc.level_integral += start * len - 0.5 * mu * len * len;
        self.acc.shortage_integral += negative_part_integral(start, end, len);
        self.acc.orders_integral += self.orders as f64 * len;
    }

    /// Drift at rate `mu` until `until`, ordering at each threshold passed.
    fn drift_to(&mut self, until: f64, mu: f64) {
        while mu > 0.0 {
            let hit = self.time + (self.next_threshold - self.demand) / mu;
            if hit >= until {
                break;
            }
            self.accumulate(hit - self.time, mu);
            self.time = hit;
            self.demand = self.next_threshold;
            self.place_orders();
        }
        self.accumulate(until - self.time, mu);
        self.demand += mu * (until - self.time);
        self.time = until;
    }

    fn jump(&mut self, size: f64) {
        self.demand += size;
        self.place_orders();
    }
}

/// `∫ (−f)⁺` for `f` linear from `start` to `end` over length `len`.
fn negative_part_integral(start: f64, end: f64, len: f64) -> f64 {
    match (start >= 0.0, end >= 0.0) {
        (true, true) => 0.0,
        (false, false) => -0.5 * (start + end) * len,
        (true, false) => 0.5 * end * end / (start - end) * len,
        (false, true) => 0.5 * start * start / (end - start) * len,
    }
}

/// One inventory path on `[0, t]`.
pub fn simulate_inventory<R: Rng + ?Sized>(model: &DemandModel, policy: &Policy, t: f64, rng: &mut R) -> PathSummary {
    let mu = model.drift();
    let mut stream = JumpStream::new(model, rng);
    let mut walk = InventoryWalk::new(policy, t);
    let mut jumps = 0.0;
    while let Some(e) = stream.next_event() {
        if e.time >= t {
            break;
        }
        walk.drift_to(e.time, mu);
        walk.jump(e.jump_size);
        jumps += e.jump_size;
    }
    walk.drift_to(t, mu);
    // Drift increments accumulate rounding; D_t itself is recomputed so that
    // lattice demand lands exactly on a threshold when it should.
    walk.demand = mu * t + jumps;
    walk.place_orders();
    let mut acc = walk.acc;
    acc.demand = walk.demand;
    acc.orders = walk.orders;
    acc
}

/// Runs `f` once per path. Output order is path order regardless of the
/// thread count.
pub fn run_paths<T, F>(paths: u64, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut PathRng) -> T + Sync,
{
    (0..paths)
        .into_par_iter()
        .map(|id| f(&mut path_rng(seed, id)))
        .collect()
}

/// Sample mean and variance of `T_n`.
pub fn estimate_fpt_moments(model: &DemandModel, policy: &Policy, n: u64, cfg: &McConfig) -> Result<(McEstimate, McEstimate)> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::invalid("n", "must be >= 1"));
    }
    let samples = run_paths(cfg.paths, cfg.seed, |rng| sample_fpt(model, policy, n, rng));
    let z = cfg.z();
    Ok((McEstimate::of_mean(&samples, z), McEstimate::of_variance(&samples, z)))
}

/// Sample mean of `E[e^{−sT_n}]`.
pub fn estimate_fpt_laplace(model: &DemandModel, policy: &Policy, n: u64, s: f64, cfg: &McConfig) -> Result<McEstimate> {
    cfg.validate()?;
    let samples = run_paths(cfg.paths, cfg.seed, |rng| (-s * sample_fpt(model, policy, n, rng)).exp());
    Ok(McEstimate::of_mean(&samples, cfg.z()))
}

/// Frequency of `{D_s ≥ b}`.
pub fn estimate_tail(model: &DemandModel, s: f64, b: f64, cfg: &McConfig) -> Result<McEstimate> {
    cfg.validate()?;
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::invalid("s", format!("must be >= 0, got {s}")));
    }
    if !(b > 0.0) {
        return Err(Error::invalid("b", format!("must be > 0, got {b}")));
    }
    let hits = run_paths(cfg.paths, cfg.seed, |rng| sample_demand(model, s, rng) >= b)
        .into_iter()
        .filter(|&h| h)
        .count() as u64;
    Ok(McEstimate::of_frequency(hits, cfg.paths, cfg.z()))
}

fn inventory_paths(model: &DemandModel, policy: &Policy, t: f64, cfg: &McConfig) -> Result<Vec<PathSummary>> {
    cfg.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("must be > 0, got {t}")));
    }
    Ok(run_paths(cfg.paths, cfg.seed, |rng| simulate_inventory(model, policy, t, rng)))
}

/// Ordering, holding and stockout cost on `[0, t]`, stockout included.
pub fn estimate_cost(model: &DemandModel, policy: &Policy, rates: &CostRates, t: f64, cfg: &McConfig) -> Result<McCostBreakdown> {
    let paths = inventory_paths(model, policy, t, cfg)?;
    let q = policy.order_quantity();
    let ordering: Vec<f64> = paths.iter().map(|p| rates.ordering * q * p.orders as f64).collect();
    let holding: Vec<f64> = paths.iter().map(|p| rates.holding * p.level_integral).collect();
    let stockout: Vec<f64> = paths.iter().map(|p| rates.stockout * p.shortage_integral).collect();
    let total: Vec<f64> = (0..paths.len()).map(|k| ordering[k] + holding[k] + stockout[k]).collect();
    let z = cfg.z();
    Ok(McCostBreakdown {
        horizon: t,
        ordering: McEstimate::of_mean(&ordering, z),
        holding: McEstimate::of_mean(&holding, z),
        stockout: McEstimate::of_mean(&stockout, z),
        total: McEstimate::of_mean(&total, z),
    })
}

/// Inventory-path estimates at horizon `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McInventoryEstimates {
    pub demand: McEstimate,
    pub orders: McEstimate,
    pub final_level: McEstimate,
    pub orders_integral: McEstimate,
    /// `Σ_n (t·P(T_n<t) − E[T_n 1{T_n<t}])`
    pub reorder_lead_sum: McEstimate,
}

pub fn estimate_inventory(model: &DemandModel, policy: &Policy, t: f64, cfg: &McConfig) -> Result<McInventoryEstimates> {
    let paths = inventory_paths(model, policy, t, cfg)?;
    let z = cfg.z();
    let field = |f: &dyn Fn(&PathSummary) -> f64| {
        let xs: Vec<f64> = paths.iter().map(f).collect();
        McEstimate::of_mean(&xs, z)
    };
    Ok(McInventoryEstimates {
        demand: field(&|p| p.demand),
        orders: field(&|p| p.orders as f64),
        final_level: field(&|p| p.final_level(policy)),
        orders_integral: field(&|p| p.orders_integral),
        reorder_lead_sum: field(&|p| p.reorder_lead_sum),
    })
}

/// Jump log of `paths` demand paths on `[0, horizon)`, path-major.
pub fn event_log(model: &DemandModel, paths: u64, horizon: f64, seed: u64) -> Vec<(u64, PathEvent)> {
    run_paths(paths, seed, |rng| simulate_path(model, horizon, rng))
        .into_iter()
        .enumerate()
        .flat_map(|(id, events)| events.into_iter().map(move |e| (id as u64, e)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::passage::fpt_moments;
    use proptest::prelude::*;

    fn cfg(paths: u64) -> McConfig {
        McConfig {
            paths,
            ..McConfig::default()
        }
    }

    fn general() -> DemandModel {
        DemandModel::new(0.5, 1.0, 0.8, 1.2, Some(JumpDistribution::gamma(2.5, 2.0).unwrap())).unwrap()
    }

    #[test]
    fn pure_drift_has_no_events() {
        let m = DemandModel::drift_only(1.0).unwrap();
        assert!(simulate_path(&m, 100.0, &mut path_rng(1, 0)).is_empty());
    }

    #[test]
    fn unit_jump_count_rate() {
        // Poisson(5·10⁴) count: 4 standard deviations is about 900
        let m = DemandModel::new(0.0, 1.0, 5.0, 0.0, None).unwrap();
        let events = simulate_path(&m, 1e4, &mut path_rng(7, 3));
        let n = events.len() as f64;
        assert!((n - 5e4).abs() < 4.0 * 5e4f64.sqrt(), "{n}");
        assert!(events.iter().all(|e| e.jump_size == 1.0 && e.source == JumpSource::UnitJump));
    }

    #[test]
    fn event_lists_are_reproducible() {
        let m = general();
        let a = simulate_path(&m, 50.0, &mut path_rng(42, 9));
        let b = simulate_path(&m, 50.0, &mut path_rng(42, 9));
        assert_eq!(a, b);
        assert_ne!(a, simulate_path(&m, 50.0, &mut path_rng(42, 10)));
    }

    #[test]
    fn events_are_legal() {
        let m = general();
        let events = simulate_path(&m, 200.0, &mut path_rng(3, 0));
        assert!(events.windows(2).all(|w| w[0].time < w[1].time));
        for e in &events {
            assert!(e.time > 0.0 && e.time < 200.0);
            match e.source {
                JumpSource::UnitJump => assert_eq!(e.jump_size, 1.0),
                JumpSource::CompoundJump => assert!(e.jump_size > 0.0),
            }
        }
        let units = events.iter().filter(|e| e.source == JumpSource::UnitJump).count() as f64;
        let compounds = events.len() as f64 - units;
        assert!((units - 160.0).abs() < 5.0 * 160f64.sqrt());
        assert!((compounds - 240.0).abs() < 5.0 * 240f64.sqrt());
    }

    #[test]
    fn drift_only_fpt_is_exact() {
        let m = DemandModel::drift_only(2.0).unwrap();
        let p = Policy::new(10.0, 3.0, 1.0).unwrap();
        assert_eq!(sample_fpt(&m, &p, 2, &mut path_rng(0, 0)), 2.0);
    }

    #[test]
    fn pure_jump_fpt_is_first_jump() {
        let m = DemandModel::new(0.0, 1.0, 1.0, 0.0, None).unwrap();
        let p = Policy::new(10.0, 0.5, 1.0).unwrap();
        let first = simulate_path(&m, 50.0, &mut path_rng(5, 1))[0].time;
        assert_eq!(sample_fpt(&m, &p, 1, &mut path_rng(5, 1)), first);
    }

    #[test]
    fn fpt_mean_matches_wald_with_exact_overshoot() {
        // Unit jumps of size 1 and a = 1: T ≥ the first instant D = 1.
        // Without jumps this would be 1/μ; the estimate must lie below it.
        let m = DemandModel::drifted_poisson(1.0, 1.0, 1.0).unwrap();
        let p = Policy::new(10.0, 1.0, 1.0).unwrap();
        let (mean, var) = estimate_fpt_moments(&m, &p, 1, &cfg(20_000)).unwrap();
        // P(T > s) = e^{−s} on [0, 1): E[T] = 1 − e^{−1}
        let exact = 1.0 - (-1.0f64).exp();
        assert!(mean.z_score(exact) < 4.0, "{mean:?}");
        assert!(var.mean > 0.0 && var.std_error > 0.0);
    }

    #[test]
    fn closed_form_moments_hold_for_pure_drift() {
        let m = DemandModel::drift_only(0.5).unwrap();
        let p = Policy::new(10.0, 2.0, 3.0).unwrap();
        let (mean, var) = estimate_fpt_moments(&m, &p, 3, &cfg(100)).unwrap();
        let closed = fpt_moments(&m, &p, 3).unwrap();
        assert_eq!((mean.mean, mean.std_error), (closed.mean, 0.0));
        assert_eq!((var.mean, var.std_error), (0.0, 0.0));
    }

    #[test]
    fn tail_examples() {
        let d = DemandModel::drift_only(2.0).unwrap();
        let e = estimate_tail(&d, 3.0, 5.0, &cfg(1000)).unwrap();
        assert_eq!((e.mean, e.std_error), (1.0, 0.0));
        let m = DemandModel::new(0.0, 1.0, 1.0, 0.0, None).unwrap();
        let e = estimate_tail(&m, 1.0, 0.5, &cfg(20_000)).unwrap();
        assert!(e.z_score(1.0 - (-1.0f64).exp()) < 4.0, "{e:?}");
    }

    #[test]
    fn cost_examples() {
        let m = general();
        let p = Policy::new(8.0, 2.0, 3.0).unwrap();
        let zero = CostRates::new(0.0, 0.0, 0.0).unwrap();
        let c = estimate_cost(&m, &p, &zero, 5.0, &cfg(200)).unwrap();
        for e in [c.ordering, c.holding, c.stockout, c.total] {
            assert_eq!((e.mean, e.std_error), (0.0, 0.0));
        }
        let d = DemandModel::drift_only(1.0).unwrap();
        let p = Policy::new(5.0, 3.0, 2.0).unwrap();
        let r = CostRates::new(1.0, 2.0, 1.0).unwrap();
        let c = estimate_cost(&d, &p, &r, 2.5, &cfg(100)).unwrap();
        assert_eq!(c.holding.mean, 2.0 * (5.0 * 2.5 - 0.5 * 2.5 * 2.5));
        assert_eq!(c.holding.std_error, 0.0);
        assert_eq!((c.ordering.mean, c.stockout.mean), (0.0, 0.0));
    }

    #[test]
    fn shortage_integral_splits_at_sign_change() {
        // x = 1, a = 10: no reorder on [0, 3], X_s = 1 − s
        let d = DemandModel::drift_only(1.0).unwrap();
        let p = Policy::new(1.0, 10.0, 1.0).unwrap();
        let s = simulate_inventory(&d, &p, 3.0, &mut path_rng(0, 0));
        assert!((s.shortage_integral - 2.0).abs() < 1e-15);
        assert!((s.level_integral - (3.0 - 4.5)).abs() < 1e-15);
        assert_eq!(negative_part_integral(-1.0, 1.0, 2.0), 0.5);
        assert_eq!(negative_part_integral(-1.0, -3.0, 2.0), 4.0);
    }

    #[test]
    fn drift_only_inventory_is_a_sawtooth() {
        let d = DemandModel::drift_only(1.0).unwrap();
        let p = Policy::new(6.0, 1.0, 2.0).unwrap();
        let s = simulate_inventory(&d, &p, 5.5, &mut path_rng(0, 0));
        assert_eq!(s.orders, 3);
        assert!((s.level_integral - 32.875).abs() < 1e-12);
        assert!((s.orders_integral - 7.5).abs() < 1e-12);
        assert!((s.reorder_lead_sum - 7.5).abs() < 1e-12);
        assert_eq!(s.shortage_integral, 0.0);
    }

    #[test]
    fn mean_demand_rate() {
        let m = general();
        let e = estimate_inventory(&m, &Policy::new(5.0, 2.0, 3.0).unwrap(), 100.0, &cfg(10_000)).unwrap();
        let rate = McEstimate {
            mean: e.demand.mean / 100.0,
            std_error: e.demand.std_error / 100.0,
            ..e.demand
        };
        assert!(rate.z_score(m.mean_rate()) < 3.0, "{rate:?} vs {}", m.mean_rate());
    }

    #[test]
    fn adjacent_paths_are_uncorrelated() {
        let m = general();
        let p = Policy::new(5.0, 2.0, 3.0).unwrap();
        let totals: Vec<f64> = run_paths(10_000, 42, |rng| simulate_inventory(&m, &p, 10.0, rng).level_integral);
        let mu = mean(&totals);
        let var: f64 = totals.iter().map(|x| (x - mu).powi(2)).sum();
        let cov: f64 = totals.windows(2).map(|w| (w[0] - mu) * (w[1] - mu)).sum();
        let rho = cov / var;
        assert!(rho.abs() < 0.01, "lag-1 correlation {rho}");
    }

    #[test]
    fn estimates_are_bit_identical_across_pools() {
        let m = general();
        let p = Policy::new(5.0, 2.0, 3.0).unwrap();
        let r = CostRates::new(1.0, 0.5, 2.0).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_cost(&m, &p, &r, 4.0, &cfg(3000)).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(3));
        assert_eq!(one, run(1));
    }

    #[test]
    fn gamma_one_samples_like_exponential() {
        let e = DemandModel::drifted_compound(1.0, 2.0, JumpDistribution::exponential(1.5).unwrap()).unwrap();
        let g = DemandModel::drifted_compound(1.0, 2.0, JumpDistribution::gamma(1.0, 1.5).unwrap()).unwrap();
        assert_eq!(simulate_path(&e, 30.0, &mut path_rng(8, 2)), simulate_path(&g, 30.0, &mut path_rng(8, 2)));
    }

    #[test]
    fn config_validation() {
        assert!(McConfig::default().validate().is_ok());
        assert!(cfg(99).validate().is_err());
        assert!(McConfig { horizon: 0.0, ..McConfig::default() }.validate().is_err());
        assert!(McConfig { confidence_level: 1.0, ..McConfig::default() }.validate().is_err());
        assert!((McConfig::default().z() - 1.959963984540054).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn inventory_paths_are_legal(seed in any::<u64>(), a in 0.5f64..5.0, q in 0.5f64..5.0, t in 0.5f64..20.0) {
            let m = general();
            let p = Policy::new(4.0, a, q).unwrap();
            let s = simulate_inventory(&m, &p, t, &mut path_rng(seed, 0));
            // a + (R−1)Q ≤ D_t < a + RQ
            if s.orders >= 1 {
                prop_assert!(p.threshold(s.orders) <= s.demand);
            }
            prop_assert!(s.demand < p.threshold(s.orders + 1));
            prop_assert!(s.shortage_integral >= 0.0);
            prop_assert!((s.orders_integral - s.reorder_lead_sum).abs() <= 1e-9 * (1.0 + s.orders_integral));
            let events = simulate_path(&m, t, &mut path_rng(seed, 0));
            let jumps: f64 = events.iter().map(|e| e.jump_size).sum();
            prop_assert!((s.demand - (m.drift() * t + jumps)).abs() <= 1e-9 * (1.0 + s.demand));
        }

        #[test]
        fn fpt_is_monotone_in_n(seed in any::<u64>(), n in 1u64..6) {
            let m = general();
            let p = Policy::new(4.0, 1.5, 2.0).unwrap();
            let t1 = sample_fpt(&m, &p, n, &mut path_rng(seed, 1));
            let t2 = sample_fpt(&m, &p, n + 1, &mut path_rng(seed, 1));
            prop_assert!(t1 > 0.0 && t1 <= t2);
        }
    }
}
