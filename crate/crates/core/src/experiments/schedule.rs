use serde::{Deserialize, Serialize};

use crate::es::{run_generation, CsaConfig, CsaVariant, OffspringSet};
use crate::pcs::{Method, PcsController, PcsSettings, Performance};
use crate::rng::TrialRng;
use crate::testbed::{init_sphere, Objective, ObjectiveKind, ObjectiveSpec};
use crate::theory::RescaleLaw;

/// Deterministic μ-oscillation on the sphere.
///
/// μ is held at μ⁽⁰⁾ for `hold` generations, then multiplied by α_μ (ceil)
/// up to μ_max and divided (floor) back down to μ⁽⁰⁾, over and over, with
/// `delta_g` idle generations after each change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub variant: CsaVariant,
    pub rescale_law: RescaleLaw,
    pub n: usize,
    pub alpha_mu: f64,
    pub delta_g: u64,
    pub mu0: usize,
    pub mu_max: usize,
    pub theta: f64,
    pub hold: u64,
    /// Converged once R drops below this.
    pub r_stop: f64,
    /// Diverged once R exceeds this (the run starts at R = 1).
    pub r_diverge: f64,
    pub g_max: u64,
}

impl ScheduleConfig {
    pub fn new(variant: CsaVariant, rescale_law: RescaleLaw, n: usize, delta_g: u64) -> Self {
        ScheduleConfig {
            variant,
            rescale_law,
            n,
            alpha_mu: 2.0,
            delta_g,
            mu0: 4,
            mu_max: 1024,
            theta: 0.5,
            hold: 200,
            r_stop: 1e-12,
            r_diverge: 1e6,
            g_max: 50_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScheduleVerdict {
    Converged,
    Diverged,
    Budget,
}

impl ScheduleVerdict {
    pub fn name(self) -> &'static str {
        match self {
            ScheduleVerdict::Converged => "converged",
            ScheduleVerdict::Diverged => "diverged",
            ScheduleVerdict::Budget => "budget",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub g: u64,
    pub r: f64,
    pub sigma_star: f64,
    pub mu: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleResult {
    pub verdict: ScheduleVerdict,
    pub generations: u64,
    pub evals: u64,
    pub final_r: f64,
    pub error: Option<String>,
    pub trace: Vec<ScheduleRow>,
}

pub fn run_schedule(cfg: &ScheduleConfig, rng: &mut TrialRng) -> ScheduleResult {
    let n = cfg.n;
    let mut state = init_sphere(n, cfg.mu0, cfg.theta, 1.0);
    let mut csa = CsaConfig::new(cfg.variant, n, cfg.mu0);
    // the controller only provides the μ-change mechanics; the verdicts come
    // from the schedule
    let settings = PcsSettings {
        method: Method::None,
        mu_min: cfg.mu0,
        mu_max: cfg.mu_max,
        alpha_mu: cfg.alpha_mu,
        delta_g: cfg.delta_g,
        rescale_law: cfg.rescale_law,
        ..PcsSettings::default()
    };
    let mut ctrl = PcsController::new(settings, n);
    let mut objective = Objective::new(ObjectiveSpec::new(ObjectiveKind::Sphere, n));
    let mut offspring = OffspringSet::new();
    let mut growing = true;
    let mut trace = Vec::new();
    let nf = n as f64;
    let verdict = |r: f64| {
        if r < cfg.r_stop {
            Some(ScheduleVerdict::Converged)
        } else if r.is_nan() || r > cfg.r_diverge {
            Some(ScheduleVerdict::Diverged)
        } else {
            None
        }
    };
    loop {
        if let Err(e) = run_generation(&mut state, &csa, &mut objective, rng, &mut offspring) {
            return ScheduleResult {
                verdict: ScheduleVerdict::Diverged,
                generations: state.g,
                evals: objective.evals(),
                final_r: state.distance(),
                error: Some(e.to_string()),
                trace,
            };
        }
        if state.g > cfg.hold {
            let per = if growing { Performance::Bad } else { Performance::Good };
            if ctrl.apply_population_change(per, &mut state, &mut csa) {
                if state.mu >= cfg.mu_max {
                    growing = false;
                } else if state.mu <= cfg.mu0 {
                    growing = true;
                }
            }
        }
        let r = state.distance();
        trace.push(ScheduleRow {
            g: state.g,
            r,
            sigma_star: state.sigma * nf / r,
            mu: state.mu,
        });
        let v = verdict(r).or((state.g >= cfg.g_max).then_some(ScheduleVerdict::Budget));
        if let Some(verdict) = v {
            return ScheduleResult {
                verdict,
                generations: state.g,
                evals: objective.evals(),
                final_r: r,
                error: None,
                trace,
            };
        }
    }
}
