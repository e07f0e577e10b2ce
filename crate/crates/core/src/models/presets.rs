//! Named parameter sets used by the experiments.

use super::params::{CevParams, CirParams, HestonParams, ModelParams, ThreeHalvesParams};

pub const PRESET_NAMES: [&str; 6] = [
    "cir-scenario-1",
    "cir-scenario-2",
    "cev-set-1",
    "cev-set-2",
    "heston-mlmc",
    "three-halves-mc",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub params: ModelParams<f64>,
    pub horizon: f64,
}

pub fn preset(name: &str) -> Option<Preset> {
    let (name, params, horizon) = match name {
        "cir-scenario-1" => (
            "cir-scenario-1",
            ModelParams::Cir(CirParams::new(5.07, 0.0457, 0.48, 0.05)),
            5.0,
        ),
        "cir-scenario-2" => (
            "cir-scenario-2",
            ModelParams::Cir(CirParams::new(2.0, 0.09, 1.0, 0.09)),
            5.0,
        ),
        "cev-set-1" => (
            "cev-set-1",
            ModelParams::Cev(CevParams {
                mu: 0.1,
                sigma: 0.3,
                gamma: 0.75,
                s0: 0.2,
            }),
            1.0,
        ),
        "cev-set-2" => (
            "cev-set-2",
            ModelParams::Cev(CevParams {
                mu: 0.2,
                sigma: 0.5,
                gamma: 0.55,
                s0: 0.5,
            }),
            1.0,
        ),
        "heston-mlmc" => (
            "heston-mlmc",
            ModelParams::LogHeston(HestonParams {
                mu: 0.0319,
                kappa: 5.07,
                lambda: 0.0457,
                theta: 0.48,
                rho: -0.7,
                s0: 100.0,
                v0: 0.05,
                r: 0.0319,
            }),
            1.0,
        ),
        "three-halves-mc" => (
            "three-halves-mc",
            ModelParams::ThreeHalves(ThreeHalvesParams {
                c1: 1.2,
                c2: 0.8,
                c3: 1.0,
                v0: 0.5,
                price: None,
            }),
            4.0,
        ),
        _ => return None,
    };
    Some(Preset { name, params, horizon })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_model;

    #[test]
    fn every_preset_validates() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            assert!(build_model(p.params).is_ok(), "{name}");
            assert!(p.horizon > 0.0);
        }
        assert!(preset("cir-scenario-3").is_none());
    }
}
