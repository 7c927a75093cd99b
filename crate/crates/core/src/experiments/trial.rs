use serde::{Deserialize, Serialize};

use crate::es::{run_generation, CsaConfig, CsaVariant, EsState, OffspringSet};
use crate::pcs::{PcsController, PcsSettings, Performance};
use crate::rng::TrialRng;
use crate::stats::percentile;
use crate::testbed::{init_run, Objective, ObjectiveKind, ObjectiveSpec, Outcome, TerminationSpec};

/// One end-to-end run of the CSA-ES with population control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub objective: ObjectiveSpec,
    pub variant: CsaVariant,
    /// Truncation ratio ϑ.
    pub theta: f64,
    pub mu0: usize,
    pub pcs: PcsSettings,
    pub termination: TerminationSpec,
    /// Initial distance of the sphere start point.
    pub sphere_radius: f64,
    pub record_trace: bool,
}

impl TrialConfig {
    /// Defaults: ϑ = 1/2, μ⁽⁰⁾ = μ_min, unit sphere radius, no trace.
    pub fn new(objective: ObjectiveSpec, variant: CsaVariant, pcs: PcsSettings, termination: TerminationSpec) -> Self {
        TrialConfig {
            objective,
            variant,
            theta: 0.5,
            mu0: pcs.mu_min,
            pcs,
            termination,
            sphere_radius: 1.0,
            record_trace: false,
        }
    }
}

/// State after generation `g` (σ and μ after any population change).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub g: u64,
    pub f_rec: f64,
    pub f_med: f64,
    pub sigma: f64,
    pub mu: usize,
    pub per: i8,
    /// P_f, P_H or ‖p_θ‖²; absent while the window fills.
    pub signal: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub outcome: Outcome,
    /// Total objective evaluations F_t.
    pub evals: u64,
    pub generations: u64,
    /// Percentiles of the per-generation μ sequence.
    pub mu_p25: f64,
    pub mu_med: f64,
    pub mu_p75: f64,
    /// Last recombinant fitness.
    pub f_final: f64,
    pub sigma_final: f64,
    /// Diagnostic of a diverged run.
    pub error: Option<String>,
    pub trace: Option<Vec<TraceRow>>,
}

fn classify(term: &TerminationSpec, spec: &ObjectiveSpec, state: &EsState, f: f64, evals: u64) -> Outcome {
    match spec.kind {
        ObjectiveKind::Random => term.classify_budget(state, evals),
        _ => term.classify(state, f, evals),
    }
}

fn finish(
    outcome: Outcome,
    objective: &Objective,
    state: &EsState,
    mus: &[f64],
    f_final: f64,
    error: Option<String>,
    trace: Option<Vec<TraceRow>>,
) -> TrialRecord {
    let (p25, p50, p75) = if mus.is_empty() {
        let m = state.mu as f64;
        (m, m, m)
    } else {
        (percentile(mus, 25.0), percentile(mus, 50.0), percentile(mus, 75.0))
    };
    TrialRecord {
        outcome,
        evals: objective.evals(),
        generations: state.g,
        mu_p25: p25,
        mu_med: p50,
        mu_p75: p75,
        f_final,
        sigma_final: state.sigma,
        error,
        trace,
    }
}

/// Runs the ES with the configured population control until termination.
pub fn run_pcs_trial(cfg: &TrialConfig, rng: &mut TrialRng) -> TrialRecord {
    let n = cfg.objective.dim;
    let mut state = init_run(&cfg.objective, cfg.mu0, cfg.theta, cfg.sphere_radius);
    let mut csa = CsaConfig::new(cfg.variant, n, state.mu);
    let mut ctrl = PcsController::new(cfg.pcs, n);
    let mut objective = Objective::new(cfg.objective);
    let mut offspring = OffspringSet::new();
    let mut mus = Vec::new();
    let mut trace = cfg.record_trace.then(Vec::new);
    let mut f_final = f64::NAN;
    loop {
        let mu = state.mu;
        let out = match run_generation(&mut state, &csa, &mut objective, rng, &mut offspring) {
            Ok(out) => out,
            Err(e) => {
                return finish(Outcome::Diverged, &objective, &state, &mus, f_final, Some(e.to_string()), trace);
            }
        };
        mus.push(mu as f64);
        f_final = out.f_rec;
        let signal = ctrl.measure(&out, mu);
        ctrl.apply_population_change(signal.performance, &mut state, &mut csa);
        if let Some(t) = trace.as_mut() {
            t.push(TraceRow {
                g: state.g,
                f_rec: out.f_rec,
                f_med: out.f_med,
                sigma: state.sigma,
                mu: state.mu,
                per: signal.performance.value(),
                signal: signal.statistic,
            });
        }
        let outcome = classify(&cfg.termination, &cfg.objective, &state, out.f_rec, objective.evals());
        if outcome != Outcome::Running {
            return finish(outcome, &objective, &state, &mus, f_final, None, trace);
        }
    }
}

/// The same run without any population-control code path: the plain CSA-ES
/// at fixed μ⁽⁰⁾.
pub fn run_plain_trial(cfg: &TrialConfig, rng: &mut TrialRng) -> TrialRecord {
    let n = cfg.objective.dim;
    let mut state = init_run(&cfg.objective, cfg.mu0, cfg.theta, cfg.sphere_radius);
    let csa = CsaConfig::new(cfg.variant, n, state.mu);
    let mut objective = Objective::new(cfg.objective);
    let mut offspring = OffspringSet::new();
    let mut mus = Vec::new();
    let mut trace = cfg.record_trace.then(Vec::new);
    let mut f_final = f64::NAN;
    loop {
        let out = match run_generation(&mut state, &csa, &mut objective, rng, &mut offspring) {
            Ok(out) => out,
            Err(e) => {
                return finish(Outcome::Diverged, &objective, &state, &mus, f_final, Some(e.to_string()), trace);
            }
        };
        mus.push(state.mu as f64);
        f_final = out.f_rec;
        if let Some(t) = trace.as_mut() {
            t.push(TraceRow {
                g: state.g,
                f_rec: out.f_rec,
                f_med: out.f_med,
                sigma: state.sigma,
                mu: state.mu,
                per: Performance::Neutral.value(),
                signal: None,
            });
        }
        let outcome = classify(&cfg.termination, &cfg.objective, &state, out.f_rec, objective.evals());
        if outcome != Outcome::Running {
            return finish(outcome, &objective, &state, &mus, f_final, None, trace);
        }
    }
}
