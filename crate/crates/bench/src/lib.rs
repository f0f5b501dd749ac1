//! Fixed models shared by the benchmarks.

use levy_inventory::{CostRates, DemandModel, JumpDistribution, Policy};

pub fn models() -> Vec<(&'static str, DemandModel)> {
    vec![
        ("drifted_poisson", DemandModel::drifted_poisson(1.0, 1.0, 1.0).unwrap()),
        (
            "exponential_jumps",
            DemandModel::drifted_compound(1.0, 1.0, JumpDistribution::exponential(2.0).unwrap()).unwrap(),
        ),
        (
            "gamma_jumps",
            DemandModel::drifted_compound(0.5, 1.0, JumpDistribution::gamma(2.0, 2.0).unwrap()).unwrap(),
        ),
        (
            "generalized",
            DemandModel::new(0.5, 1.0, 0.8, 1.2, Some(JumpDistribution::gamma(2.5, 2.0).unwrap())).unwrap(),
        ),
    ]
}

pub fn policy() -> Policy {
    Policy::new(10.0, 2.0, 3.0).unwrap()
}

pub fn rates() -> CostRates {
    CostRates::new(1.0, 0.5, 2.0).unwrap()
}
