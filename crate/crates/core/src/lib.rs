//! Reorder times, demand tails and expected costs for a fixed-order-quantity
//! inventory policy under subordinator demand, with an exact event-driven
//! simulator to cross-check every analytic quantity.

pub mod cost;
pub mod distribution;
pub mod error;
pub mod model;
pub mod monte_carlo;
pub mod passage;
pub mod quadrature;
pub mod special;

pub use cost::{
    cost_sweep, expected_inventory_level, expected_total_cost, long_run_average_cost, CostBreakdown,
    SweepRow, SweepTable,
};
pub use distribution::{
    demand_tail, expected_orders, jump_sum_survival, reorder_prob, SeriesControl,
};
pub use error::{Error, Result};
pub use model::{CostRates, DemandModel, JumpDistribution, Policy};
pub use monte_carlo::{McConfig, McCostBreakdown, McEstimate, PathEvent, JumpSource};
pub use passage::{fpt_laplace, fpt_moments, phi_inverse, FptMoments, InversionBranch};
pub use quadrature::{QuadratureControl, QuadratureScheme};
