use serde::{Deserialize, Serialize};

use super::runner::par_trials;
use crate::es::{run_generation, CsaConfig, CsaVariant, EsState, GenerationOutput, OffspringSet};
use crate::pcs::{Method, PcsController, PcsSettings};
use crate::rng::{label_id, trial_rng};
use crate::stats::{mean, median};
use crate::testbed::{init_sphere, Objective, ObjectiveKind, ObjectiveSpec};
use crate::theory::{
    gamma_prediction_for, psa_steady_state_prediction, second_zero, PsaPrediction, SecondZeroMode, SphereParams,
    SteadyStatePrediction,
};

/// Below this distance the run stops early; the sphere is scale invariant so
/// nothing is lost, and it keeps R far from underflow.
const R_FLOOR: f64 = 1e-250;

/// Runs a fixed-μ sphere trial from R = 1 for at most `horizon`
/// generations, calling `visit` after each one. Returns the diagnostic of a
/// diverged run.
fn sphere_run<F>(
    variant: CsaVariant,
    n: usize,
    mu: usize,
    theta: f64,
    horizon: u64,
    rng: &mut crate::rng::TrialRng,
    mut visit: F,
) -> Option<String>
where
    F: FnMut(&EsState, &GenerationOutput) -> bool,
{
    let mut state = init_sphere(n, mu, theta, 1.0);
    let cfg = CsaConfig::new(variant, n, mu);
    let mut objective = Objective::new(ObjectiveSpec::new(ObjectiveKind::Sphere, n));
    let mut offspring = OffspringSet::new();
    while state.g < horizon {
        match run_generation(&mut state, &cfg, &mut objective, rng, &mut offspring) {
            Ok(out) => {
                if !visit(&state, &out) || state.distance() < R_FLOOR {
                    break;
                }
            }
            Err(e) => return Some(e.to_string()),
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaConfig {
    pub variant: CsaVariant,
    pub n: usize,
    pub mu: usize,
    pub theta: f64,
    pub horizon: u64,
    /// Fraction of the horizon discarded as transient.
    pub burn_in: f64,
}

impl GammaConfig {
    pub fn new(variant: CsaVariant, n: usize, mu: usize, horizon: u64) -> Self {
        GammaConfig {
            variant,
            n,
            mu,
            theta: 0.5,
            horizon,
            burn_in: 0.2,
        }
    }

    fn label(&self) -> String {
        format!("gamma/{}/{}/{}/{}", self.variant.name(), self.n, self.mu, self.theta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaTrial {
    pub sigma_star_median: f64,
    pub gamma: f64,
    pub diverged: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaMeasurement {
    pub trials: Vec<GammaTrial>,
    /// Mean over non-diverged trials of the per-trial median σ*.
    pub sigma_star_median: f64,
    /// `sigma_star_median` over the numeric second zero.
    pub gamma: f64,
    pub sigma_star_zero: f64,
    pub diverged: usize,
    pub predicted: SteadyStatePrediction,
}

/// Steady-state ratio γ = σ*_ss/σ*₀ of a fixed-μ CSA-ES on the sphere.
pub fn measure_gamma(cfg: &GammaConfig, trials: usize, master_seed: u64) -> GammaMeasurement {
    let params = SphereParams::new(cfg.n, cfg.mu, cfg.theta).expect("truncation ratio in (0, 1)");
    let zero = second_zero(&params, SecondZeroMode::Numeric).expect("second zero brackets");
    let burn = (cfg.burn_in * cfg.horizon as f64).floor() as u64;
    let id = label_id(&cfg.label());
    let runs = par_trials(trials, |i| {
        let mut rng = trial_rng(master_seed, id, i as u64);
        let mut stars = Vec::new();
        let nf = cfg.n as f64;
        let diverged = sphere_run(cfg.variant, cfg.n, cfg.mu, cfg.theta, cfg.horizon, &mut rng, |st, _| {
            if st.g > burn {
                stars.push(st.sigma * nf / st.distance());
            }
            true
        });
        let m = median(&stars);
        GammaTrial {
            sigma_star_median: m,
            gamma: m / zero,
            diverged,
        }
    });
    let ok: Vec<f64> = runs
        .iter()
        .filter(|t| t.diverged.is_none() && t.sigma_star_median.is_finite())
        .map(|t| t.sigma_star_median)
        .collect();
    let avg = mean(&ok);
    let csa = CsaConfig::new(cfg.variant, cfg.n, cfg.mu);
    GammaMeasurement {
        diverged: runs.len() - ok.len(),
        trials: runs,
        sigma_star_median: avg,
        gamma: avg / zero,
        sigma_star_zero: zero,
        predicted: gamma_prediction_for(&csa, &params),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenCountConfig {
    pub variant: CsaVariant,
    pub n: usize,
    pub mu: usize,
    pub theta: f64,
    /// Target R^(g)/R^(0).
    pub r_ratio: f64,
    /// Give up after this many generations.
    pub g_cap: u64,
}

impl GenCountConfig {
    pub fn new(variant: CsaVariant, n: usize, mu: usize) -> Self {
        GenCountConfig {
            variant,
            n,
            mu,
            theta: 0.5,
            r_ratio: 1e-6,
            g_cap: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenCountResult {
    /// Generations to reach the target, `None` if not reached.
    pub per_trial: Vec<Option<u64>>,
    /// Mean over the trials that reached the target.
    pub mean: f64,
    /// Closed-form estimate at the predicted γ.
    pub predicted: f64,
}

/// Generations G a fixed-μ sphere run needs to shrink R by `r_ratio`,
/// counted from the σ*₀ start.
pub fn measure_generation_count(cfg: &GenCountConfig, trials: usize, master_seed: u64) -> GenCountResult {
    let id = label_id(&format!(
        "gen-count/{}/{}/{}/{}/{}",
        cfg.variant.name(),
        cfg.n,
        cfg.mu,
        cfg.theta,
        cfg.r_ratio
    ));
    let per_trial = par_trials(trials, |i| {
        let mut rng = trial_rng(master_seed, id, i as u64);
        let mut hit = None;
        let diverged = sphere_run(cfg.variant, cfg.n, cfg.mu, cfg.theta, cfg.g_cap, &mut rng, |st, _| {
            if st.distance() <= cfg.r_ratio {
                hit = Some(st.g);
                false
            } else {
                true
            }
        });
        if diverged.is_some() {
            None
        } else {
            hit
        }
    });
    let reached: Vec<f64> = per_trial.iter().flatten().map(|&g| g as f64).collect();
    let params = SphereParams::new(cfg.n, cfg.mu, cfg.theta).expect("truncation ratio in (0, 1)");
    let pred = gamma_prediction_for(&CsaConfig::new(cfg.variant, cfg.n, cfg.mu), &params);
    GenCountResult {
        per_trial,
        mean: mean(&reached),
        predicted: crate::theory::generation_number(cfg.n, pred.gamma, params.c_theta, 1.0 / cfg.r_ratio),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsaSteadyMeasurement {
    /// Time averages after burn-in, averaged over trials.
    pub pm_sq: f64,
    pub pc_sq: f64,
    /// Measured steady-state ratio of the same runs.
    pub gamma: f64,
    /// Closed-form norms at the measured γ.
    pub prediction: PsaPrediction,
    pub diverged: usize,
}

/// Fixed-μ sphere runs with the PSA paths accumulated but μ never changed.
#[allow(clippy::too_many_arguments)]
pub fn measure_psa_steady_state(
    variant: CsaVariant,
    n: usize,
    mu: usize,
    beta: f64,
    horizon: u64,
    burn_in: f64,
    trials: usize,
    master_seed: u64,
) -> PsaSteadyMeasurement {
    let theta = 0.5;
    let params = SphereParams::new(n, mu, theta).expect("truncation ratio in (0, 1)");
    let zero = second_zero(&params, SecondZeroMode::Numeric).expect("second zero brackets");
    let burn = (burn_in * horizon as f64).floor() as u64;
    let settings = PcsSettings {
        method: Method::Psa,
        beta,
        mu_min: mu,
        mu_max: mu,
        ..PcsSettings::default()
    };
    let id = label_id(&format!("psa-steady/{}/{n}/{mu}/{beta}", variant.name()));
    let runs = par_trials(trials, |i| {
        let mut rng = trial_rng(master_seed, id, i as u64);
        let mut ctrl = PcsController::new(settings, n);
        let (mut pm, mut pc, mut stars) = (Vec::new(), Vec::new(), Vec::new());
        let diverged = sphere_run(variant, n, mu, theta, horizon, &mut rng, |st, out| {
            let sig = ctrl.measure(out, mu);
            if st.g > burn {
                pm.push(sig.pm_sq.unwrap_or(f64::NAN));
                pc.push(sig.pc_sq.unwrap_or(f64::NAN));
                stars.push(st.sigma * n as f64 / st.distance());
            }
            true
        });
        (mean(&pm), mean(&pc), median(&stars), diverged.is_some())
    });
    let ok: Vec<_> = runs.iter().filter(|r| !r.3).collect();
    let pm_sq = mean(&ok.iter().map(|r| r.0).collect::<Vec<_>>());
    let pc_sq = mean(&ok.iter().map(|r| r.1).collect::<Vec<_>>());
    let gamma = mean(&ok.iter().map(|r| r.2).collect::<Vec<_>>()) / zero;
    PsaSteadyMeasurement {
        pm_sq,
        pc_sq,
        gamma,
        prediction: psa_steady_state_prediction(beta, mu, n, gamma, params.c_theta),
        diverged: runs.len() - ok.len(),
    }
}
