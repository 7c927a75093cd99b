//! One function per experiment; each writes a CSV and a JSON summary.

use std::fs;
use std::path::PathBuf;

use csa_pcs::es::offspring_count;
use csa_pcs::experiments::{
    measure_gamma, measure_generation_count, measure_psa_steady_state, measure_signals_fixed_mu, median_shift_oracle,
    par_trials, pcs_table_suite, rastrigin_ladder, rastrigin_n_sweep, run_benchmark, run_schedule, BenchmarkConfig,
    BenchmarkResult, GammaConfig, GenCountConfig, ScheduleConfig, SignalConfig, RASTRIGIN_LADDER,
};
use csa_pcs::rng::{label_id, trial_rng};
use csa_pcs::theory::{
    finite_progress_coefficient, one_generation_oracle, progress_rate_full, progress_rate_large_pop, SphereParams,
};
use csa_pcs::{Method, ObjectiveKind, ObjectiveSpec};
use serde::Serialize;
use thiserror::Error;

use crate::config::{DivergedPolicy, RunConfig, Suite};
use crate::output::{write_outputs, Table};
use crate::row;

const THETA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Experiment {
    ProgressRate,
    Gamma,
    GenCount,
    Schedule,
    Signals,
    PcsTable,
    Benchmark,
    PsaSteady,
    MedianShift,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::ProgressRate => "progress-rate",
            Experiment::Gamma => "gamma",
            Experiment::GenCount => "gen-count",
            Experiment::Schedule => "schedule",
            Experiment::Signals => "signals",
            Experiment::PcsTable => "pcs-table",
            Experiment::Benchmark => "benchmark",
            Experiment::PsaSteady => "psa-steady",
            Experiment::MedianShift => "median-shift",
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0} diverged trial(s) under diverged = fail")]
    Diverged(usize),
}

/// Files written by a successful command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Written {
    pub csv: PathBuf,
    pub json: PathBuf,
}

pub fn run_command(exp: Experiment, cfg: &RunConfig) -> Result<Written, RunError> {
    let (table, results, diverged): (Table, serde_json::Value, usize) = match exp {
        Experiment::ProgressRate => progress_rate(cfg),
        Experiment::Gamma => gamma(cfg),
        Experiment::GenCount => gen_count(cfg),
        Experiment::Schedule => schedule(cfg),
        Experiment::Signals => signals(cfg),
        Experiment::PcsTable => pcs_table(cfg)?,
        Experiment::Benchmark => benchmark(cfg)?,
        Experiment::PsaSteady => psa_steady(cfg),
        Experiment::MedianShift => median_shift(cfg),
    };
    let (csv, json) = write_outputs(cfg, exp.name(), &table, results)?;
    if diverged > 0 && cfg.diverged == DivergedPolicy::Fail {
        return Err(RunError::Diverged(diverged));
    }
    Ok(Written { csv, json })
}

fn to_json<T: Serialize>(v: T) -> serde_json::Value {
    serde_json::to_value(v).expect("results serialize")
}

type Output = (Table, serde_json::Value, usize);

fn progress_rate(cfg: &RunConfig) -> Output {
    let points: Vec<(usize, f64)> = cfg
        .mus
        .iter()
        .flat_map(|&mu| cfg.sigma_stars.iter().map(move |&s| (mu, s)))
        .collect();
    let rows = par_trials(points.len(), |i| {
        let (mu, s) = points[i];
        let lambda = offspring_count(mu, THETA);
        let id = label_id(&format!("progress-rate/{}/{mu}/{lambda}/{s}", cfg.n));
        let est = one_generation_oracle(s, cfg.n, mu, lambda, cfg.oracle_trials, &mut trial_rng(cfg.seed, id, 0));
        let base = SphereParams::new(cfg.n, mu, THETA).expect("valid truncation ratio");
        let finite = base.with_finite_coefficient(finite_progress_coefficient(mu, lambda));
        (mu, lambda, s, est, progress_rate_full(s, &finite), progress_rate_large_pop(s, &base))
    });
    let mut t = Table::new(&[
        "mu",
        "lambda",
        "sigma_star",
        "oracle_mean",
        "oracle_std_error",
        "phi_full",
        "phi_large_pop",
    ]);
    for &(mu, lambda, s, est, full, large) in &rows {
        t.push(row![mu, lambda, s, est.mean, est.std_error, full, large]);
    }
    let worst = rows
        .iter()
        .map(|(_, _, _, e, full, _)| (e.mean - full).abs() / e.std_error)
        .fold(0.0, f64::max);
    (t, serde_json::json!({ "max_abs_z": worst }), 0)
}

fn gamma(cfg: &RunConfig) -> Output {
    let mut g = GammaConfig::new(cfg.csa, cfg.n, cfg.mu, cfg.horizon);
    g.burn_in = cfg.burn_in;
    let m = measure_gamma(&g, cfg.trials, cfg.seed);
    let mut t = Table::new(&["trial", "sigma_star_median", "gamma"]);
    for (i, tr) in m.trials.iter().enumerate() {
        t.push(row![i, tr.sigma_star_median, tr.gamma]);
    }
    let div = m.diverged;
    (t, to_json(&m), div)
}

fn gen_count(cfg: &RunConfig) -> Output {
    let mut t = Table::new(&["n", "mu", "trial", "generations"]);
    let mut summary = Vec::new();
    for &n in &cfg.ns {
        for &mu in &cfg.mus {
            let mut g = GenCountConfig::new(cfg.csa, n, mu);
            g.r_ratio = cfg.r_ratio;
            g.g_cap = cfg.g_cap;
            let res = measure_generation_count(&g, cfg.trials, cfg.seed);
            for (i, gens) in res.per_trial.iter().enumerate() {
                t.push(row![n, mu, i, *gens]);
            }
            summary.push(serde_json::json!({
                "n": n, "mu": mu, "mean": res.mean, "predicted": res.predicted,
                "reached": res.per_trial.iter().flatten().count(),
            }));
        }
    }
    (t, to_json(summary), 0)
}

fn schedule(cfg: &RunConfig) -> Output {
    let mut s = ScheduleConfig::new(cfg.csa, cfg.pcs.rescale_law, cfg.n, cfg.pcs.delta_g);
    s.alpha_mu = cfg.pcs.alpha_mu;
    s.mu0 = cfg.pcs.mu_min;
    s.mu_max = cfg.pcs.mu_max;
    s.hold = cfg.hold;
    s.r_stop = cfg.r_stop;
    if let Some(g) = cfg.g_max {
        s.g_max = g;
    }
    let id = label_id(&format!(
        "schedule/{}/{}/{}/{}",
        cfg.csa.name(),
        cfg.pcs.rescale_law.name(),
        cfg.n,
        cfg.pcs.delta_g
    ));
    let res = run_schedule(&s, &mut trial_rng(cfg.seed, id, 0));
    let mut t = Table::new(&["g", "r", "sigma_star", "mu"]);
    for r in &res.trace {
        t.push(row![r.g, r.r, r.sigma_star, r.mu]);
    }
    let summary = serde_json::json!({
        "verdict": res.verdict.name(),
        "generations": res.generations,
        "evals": res.evals,
        "final_r": res.final_r,
        "error": res.error,
    });
    (t, summary, 0)
}

fn objective_at(cfg: &RunConfig, n: usize) -> ObjectiveSpec {
    ObjectiveSpec::new(cfg.objective, n)
}

fn signals(cfg: &RunConfig) -> Output {
    let sc = SignalConfig {
        pcs: cfg.pcs,
        variant: cfg.csa,
        objective: objective_at(cfg, cfg.n),
        theta: THETA,
        horizon: cfg.horizon,
    };
    let traces = measure_signals_fixed_mu(&sc, &cfg.mus, cfg.seed);
    let mut t = Table::new(&["mu", "g", "f_rec", "sigma", "per", "statistic", "pm_sq", "pc_sq"]);
    let mut summary = Vec::new();
    let mut diverged = 0;
    for tr in &traces {
        for r in &tr.rows {
            t.push(row![tr.mu, r.g, r.f_rec, r.sigma, r.per, r.statistic, r.pm_sq, r.pc_sq]);
        }
        diverged += tr.error.is_some() as usize;
        summary.push(serde_json::json!({
            "mu": tr.mu,
            "generations": tr.rows.len(),
            "mean_statistic": tr.mean_statistic(),
            "mean_pm_sq": tr.mean_pm_sq(),
            "mean_pc_sq": tr.mean_pc_sq(),
            "good_fraction": tr.good_fraction(),
            "error": tr.error,
        }));
    }
    (t, to_json(summary), diverged)
}

/// Writes `traces/<id>_<trial>.csv` for every record that carries a trace.
fn write_traces(cfg: &RunConfig, results: &[BenchmarkResult]) -> std::io::Result<()> {
    let dir = cfg.out.join("traces");
    fs::create_dir_all(&dir)?;
    for res in results {
        let stem: String = res
            .config_id
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
            .collect();
        for (i, rec) in res.records.iter().enumerate() {
            let Some(trace) = &rec.trace else { continue };
            let mut t = Table::new(&["g", "f_rec", "f_med", "sigma", "mu", "per", "signal"]);
            for r in trace {
                t.push(row![r.g, r.f_rec, r.f_med, r.sigma, r.mu, r.per, r.signal]);
            }
            t.write(&dir.join(format!("{stem}_{i}.csv")))?;
        }
    }
    Ok(())
}

fn apply_overrides(cfg: &RunConfig, configs: &mut [BenchmarkConfig]) {
    for c in configs.iter_mut() {
        let term = &mut c.trial.termination;
        if let Some(v) = cfg.g_max {
            term.g_max = v;
        }
        if let Some(v) = cfg.eval_max {
            term.eval_max = v;
        }
        if let Some(v) = cfg.f_stop {
            term.f_stop = v;
        }
        if let Some(v) = cfg.sigma_stop {
            term.sigma_stop = v;
        }
        let n = c.trial.objective.dim;
        let method = c.trial.pcs.method;
        c.trial.pcs = cfg.settings_at(n, method);
        if method == Method::None {
            c.trial.mu0 = c.trial.mu0.max(cfg.pcs.mu_min);
        }
        c.trial.record_trace = cfg.trace;
    }
}

#[derive(Serialize)]
struct ResultSummary<'a> {
    config_id: &'a str,
    trials: usize,
    successes: usize,
    p_success: f64,
    e_runtime: Option<f64>,
    f_success_total: u64,
    f_fail_total: u64,
    mu_p25: f64,
    mu_med: f64,
    mu_p75: f64,
    evals_med: f64,
    diverged: usize,
}

fn summarize(r: &BenchmarkResult) -> ResultSummary<'_> {
    ResultSummary {
        config_id: &r.config_id,
        trials: r.trials,
        successes: r.successes,
        p_success: r.p_success,
        e_runtime: r.e_runtime,
        f_success_total: r.f_success_total,
        f_fail_total: r.f_fail_total,
        mu_p25: r.mu_p25,
        mu_med: r.mu_med,
        mu_p75: r.mu_p75,
        evals_med: r.evals_med,
        diverged: r.diverged,
    }
}

fn pcs_table(cfg: &RunConfig) -> Result<Output, RunError> {
    let methods: Vec<Method> = match cfg.method {
        Some(m) => vec![m],
        None => vec![Method::Apop, Method::PcCsa, Method::Psa],
    };
    let mut t = Table::new(&[
        "row",
        "method",
        "mu_p25",
        "mu_med",
        "mu_p75",
        "f_t",
        "trials",
        "successes",
        "diverged",
    ]);
    let mut all = Vec::new();
    for m in methods {
        let mut configs = pcs_table_suite(&cfg.ns, cfg.csa, m, cfg.preset, cfg.pcs.mu_min, cfg.pcs.mu_max);
        apply_overrides(cfg, &mut configs);
        let results = run_benchmark(&configs, cfg.trials, cfg.seed);
        for (c, r) in configs.iter().zip(&results) {
            let tag = match c.trial.objective.kind {
                ObjectiveKind::Random => "N",
                _ => "S",
            };
            let label = format!("{tag}{}", c.trial.objective.dim);
            t.push(row![label, m.name(), r.mu_p25, r.mu_med, r.mu_p75, r.evals_med, r.trials, r.successes, r.diverged]);
        }
        all.extend(results);
    }
    if cfg.trace {
        write_traces(cfg, &all)?;
    }
    let diverged = all.iter().map(|r| r.diverged).sum();
    Ok((t, to_json(all.iter().map(summarize).collect::<Vec<_>>()), diverged))
}

fn benchmark(cfg: &RunConfig) -> Result<Output, RunError> {
    let m = cfg.method();
    let (mu_min, mu_max) = (cfg.pcs.mu_min, cfg.pcs.mu_max);
    let mut configs = match cfg.suite {
        Suite::RastriginLadder => rastrigin_ladder(cfg.csa, m, cfg.preset, mu_min, mu_max),
        Suite::NSweep => rastrigin_n_sweep(&cfg.ns, cfg.csa, m, cfg.preset, mu_min, mu_max),
    };
    apply_overrides(cfg, &mut configs);
    let results = run_benchmark(&configs, cfg.trials, cfg.seed);
    let mut t = Table::new(&[
        "N",
        "A",
        "method",
        "P_S",
        "E_r",
        "trials",
        "mu_med",
        "f_success_total",
        "f_fail_total",
    ]);
    for (c, r) in configs.iter().zip(&results) {
        let a = match c.trial.objective.kind {
            ObjectiveKind::Rastrigin { amplitude, .. } => amplitude,
            _ => f64::NAN,
        };
        t.push(row![
            c.trial.objective.dim,
            a,
            m.name(),
            r.p_success,
            r.e_runtime,
            r.trials,
            r.mu_med,
            r.f_success_total,
            r.f_fail_total
        ]);
    }
    if cfg.trace {
        write_traces(cfg, &results)?;
    }
    debug_assert!(matches!(cfg.suite, Suite::NSweep) || configs.len() == RASTRIGIN_LADDER.len());
    let diverged = results.iter().map(|r| r.diverged).sum();
    Ok((t, to_json(results.iter().map(summarize).collect::<Vec<_>>()), diverged))
}

fn psa_steady(cfg: &RunConfig) -> Output {
    let mut t = Table::new(&["mu", "pm_sq", "pc_sq", "gamma", "pm_sq_pred", "pc_sq_pred", "diverged"]);
    let mut diverged = 0;
    for &mu in &cfg.mus {
        let m = measure_psa_steady_state(cfg.csa, cfg.n, mu, cfg.pcs.beta, cfg.horizon, cfg.burn_in, cfg.trials, cfg.seed);
        t.push(row![mu, m.pm_sq, m.pc_sq, m.gamma, m.prediction.pm_sq, m.prediction.pc_sq, m.diverged]);
        diverged += m.diverged;
    }
    (t, serde_json::json!({ "diverged": diverged }), diverged)
}

fn median_shift(cfg: &RunConfig) -> Output {
    let lambda = cfg.lambda.unwrap_or_else(|| offspring_count(cfg.mu, THETA));
    let id = label_id(&format!("median-shift/{}/{}/{lambda}", cfg.n, cfg.mu));
    let m = median_shift_oracle(
        cfg.n,
        cfg.mu,
        lambda,
        cfg.r,
        cfg.sigma,
        cfg.pcs.alpha_mu,
        cfg.repeats,
        &mut trial_rng(cfg.seed, id, 0),
    );
    let mut t = Table::new(&["before", "after_rescaled", "after_unrescaled"]);
    t.push(row![m.before, m.after_rescaled, m.after_unrescaled]);
    (t, to_json(m), 0)
}
