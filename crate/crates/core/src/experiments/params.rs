use serde::{Deserialize, Serialize};

use crate::pcs::{Method, PcsSettings, DEFAULT_THETA_F, DEFAULT_THETA_H, DEFAULT_THETA_THETA};
use crate::theory::RescaleLaw;

/// The two named PCS parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    /// L = ⌈√N⌉, β = 1/√N, α_μ = 1.05, Δ_g = 0, √-rescaling.
    P1,
    /// L = 10, β = 0.1, α_μ = 2, Δ_g = 10, √-rescaling.
    P2,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::P1 => "P1",
            Preset::P2 => "P2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "P1" => Some(Preset::P1),
            "P2" => Some(Preset::P2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub window: usize,
    pub beta: f64,
    pub alpha_mu: f64,
    pub delta_g: u64,
    pub rescale_law: RescaleLaw,
}

impl ParamSet {
    pub fn preset(preset: Preset, n: usize) -> Self {
        let root = (n as f64).sqrt();
        match preset {
            Preset::P1 => ParamSet {
                window: root.ceil() as usize,
                beta: 1.0 / root,
                alpha_mu: 1.05,
                delta_g: 0,
                rescale_law: RescaleLaw::Sqrt,
            },
            Preset::P2 => ParamSet {
                window: 10,
                beta: 0.1,
                alpha_mu: 2.0,
                delta_g: 10,
                rescale_law: RescaleLaw::Sqrt,
            },
        }
    }

    /// Controller settings with the default thresholds.
    pub fn settings(&self, method: Method, mu_min: usize, mu_max: usize) -> PcsSettings {
        PcsSettings {
            method,
            mu_min,
            mu_max,
            alpha_mu: self.alpha_mu,
            delta_g: self.delta_g,
            rescale_law: self.rescale_law,
            window: self.window,
            theta_f: DEFAULT_THETA_F,
            theta_h: DEFAULT_THETA_H,
            beta: self.beta,
            theta_theta: DEFAULT_THETA_THETA,
        }
    }
}
