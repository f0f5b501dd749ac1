//! Run configuration: one TOML document describing the demand model, the
//! policy, cost rates, numerical controls and Monte Carlo settings.

use std::path::PathBuf;

use levy_inventory::{
    CostRates, DemandModel, JumpDistribution, McConfig, Policy, QuadratureControl, QuadratureScheme,
    SeriesControl,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputConfig {
    pub format: Format,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: DemandModel,
    pub policy: Policy,
    pub rates: CostRates,
    pub series: SeriesControl,
    pub quadrature: QuadratureControl,
    pub mc: McConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: RawModel,
    policy: RawPolicy,
    #[serde(skip_serializing_if = "Option::is_none")]
    rates: Option<RawRates>,
    #[serde(skip_serializing_if = "Option::is_none")]
    series: Option<RawSeries>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quadrature: Option<RawQuadrature>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mc: Option<RawMc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<RawOutput>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    #[serde(default)]
    mu: f64,
    #[serde(default)]
    alpha: f64,
    #[serde(default)]
    lambda: f64,
    #[serde(default)]
    lambda_prime: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    jumps: Option<RawJumps>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
enum RawJumps {
    Exponential { eta: f64 },
    Gamma { beta: f64, eta: f64 },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    x: f64,
    a: f64,
    #[serde(rename = "Q")]
    q: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRates {
    #[serde(rename = "C_o", default = "one")]
    ordering: f64,
    #[serde(rename = "C_h", default = "one")]
    holding: f64,
    #[serde(rename = "C_so", default)]
    stockout: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSeries {
    tail_mass_tol: Option<f64>,
    max_unit_index: Option<u64>,
    max_compound_index: Option<u64>,
    max_replenishments: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuadrature {
    nodes: Option<usize>,
    scheme: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMc {
    paths: Option<u64>,
    horizon: Option<f64>,
    seed: Option<u64>,
    confidence_level: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    format: Option<Format>,
    path: Option<PathBuf>,
}

/// Parses and validates a configuration document. Omitted control blocks take
/// their defaults: `tail_mass_tol = 1e-10`, `nodes = 256` (simpson),
/// `paths = 100000`, `horizon = 10`, `seed = 42`, `confidence_level = 0.95`,
/// `C_o = C_h = 1`, `C_so = 0`.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    raw.into_config()
}

impl RawConfig {
    fn into_config(self) -> Result<RunConfig, CliError> {
        let m = &self.model;
        let jumps = match m.jumps {
            None => None,
            Some(RawJumps::Exponential { eta }) => Some(JumpDistribution::exponential(eta)?),
            Some(RawJumps::Gamma { beta, eta }) => Some(JumpDistribution::gamma(beta, eta)?),
        };
        let model = DemandModel::new(m.mu, m.alpha, m.lambda, m.lambda_prime, jumps)?;
        let policy = Policy::new(self.policy.x, self.policy.a, self.policy.q)?;
        let rates = match self.rates {
            Some(r) => CostRates::new(r.ordering, r.holding, r.stockout)?,
            None => CostRates::new(1.0, 1.0, 0.0)?,
        };

        let mut series = SeriesControl::default();
        if let Some(s) = self.series {
            series.tail_mass_tol = s.tail_mass_tol.unwrap_or(series.tail_mass_tol);
            series.max_unit_index = s.max_unit_index.unwrap_or(series.max_unit_index);
            series.max_compound_index = s.max_compound_index.unwrap_or(series.max_compound_index);
            series.max_replenishments = s.max_replenishments.unwrap_or(series.max_replenishments);
        }
        series.validate()?;

        let mut quadrature = QuadratureControl::default();
        if let Some(q) = self.quadrature {
            quadrature.nodes = q.nodes.unwrap_or(quadrature.nodes);
            if let Some(s) = q.scheme {
                quadrature.scheme = match s.as_str() {
                    "simpson" => QuadratureScheme::Simpson,
                    "trapezoid" => QuadratureScheme::Trapezoid,
                    other => {
                        return Err(CliError::Config(format!(
                            "scheme must be \"simpson\" or \"trapezoid\", got \"{other}\""
                        )))
                    }
                };
            }
        }
        quadrature.validate()?;

        let mut mc = McConfig::default();
        if let Some(c) = self.mc {
            mc.paths = c.paths.unwrap_or(mc.paths);
            mc.horizon = c.horizon.unwrap_or(mc.horizon);
            mc.seed = c.seed.unwrap_or(mc.seed);
            mc.confidence_level = c.confidence_level.unwrap_or(mc.confidence_level);
        }
        mc.validate()?;

        let output = match self.output {
            Some(o) => OutputConfig {
                format: o.format.unwrap_or_default(),
                path: o.path,
            },
            None => OutputConfig::default(),
        };
        Ok(RunConfig {
            model,
            policy,
            rates,
            series,
            quadrature,
            mc,
            output,
        })
    }
}

impl RunConfig {
    /// Fully explicit TOML form; parsing it gives back an equal config.
    pub fn to_canonical(&self) -> String {
        let m = &self.model;
        let jumps = m.jumps().map(|d| match d {
            JumpDistribution::Exponential { rate } => RawJumps::Exponential { eta: *rate },
            JumpDistribution::Gamma { shape, rate } => RawJumps::Gamma {
                beta: *shape,
                eta: *rate,
            },
        });
        let raw = RawConfig {
            model: RawModel {
                mu: m.drift(),
                alpha: m.unit_jump_size(),
                lambda: m.unit_jump_rate(),
                lambda_prime: m.compound_rate(),
                jumps,
            },
            policy: RawPolicy {
                x: self.policy.initial_stock(),
                a: self.policy.reorder_offset(),
                q: self.policy.order_quantity(),
            },
            rates: Some(RawRates {
                ordering: self.rates.ordering,
                holding: self.rates.holding,
                stockout: self.rates.stockout,
            }),
            series: Some(RawSeries {
                tail_mass_tol: Some(self.series.tail_mass_tol),
                max_unit_index: Some(self.series.max_unit_index),
                max_compound_index: Some(self.series.max_compound_index),
                max_replenishments: Some(self.series.max_replenishments),
            }),
            quadrature: Some(RawQuadrature {
                nodes: Some(self.quadrature.nodes),
                scheme: Some(
                    match self.quadrature.scheme {
                        QuadratureScheme::Simpson => "simpson",
                        QuadratureScheme::Trapezoid => "trapezoid",
                    }
                    .to_string(),
                ),
            }),
            mc: Some(RawMc {
                paths: Some(self.mc.paths),
                horizon: Some(self.mc.horizon),
                seed: Some(self.mc.seed),
                confidence_level: Some(self.mc.confidence_level),
            }),
            output: Some(RawOutput {
                format: Some(self.output.format),
                path: self.output.path.clone(),
            }),
        };
        toml::to_string(&raw).expect("config serializes")
    }
}
