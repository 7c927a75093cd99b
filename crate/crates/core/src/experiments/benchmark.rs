use serde::{Deserialize, Serialize};

use super::params::{ParamSet, Preset};
use super::runner::par_trials;
use super::trial::{run_pcs_trial, run_plain_trial, TrialConfig, TrialRecord};
use crate::es::CsaVariant;
use crate::pcs::Method;
use crate::rng::{label_id, trial_rng};
use crate::stats::median;
use crate::testbed::{ObjectiveKind, ObjectiveSpec, Outcome, TerminationSpec};

/// (N, A) pairs of the Rastrigin ladder: large A for small N and vice versa.
pub const RASTRIGIN_LADDER: [(usize, f64); 5] = [(10, 65.0), (30, 33.0), (100, 12.0), (300, 7.0), (1000, 3.0)];

/// Generations per run on the random objective, which has no target.
pub const RANDOM_G_MAX: u64 = 1000;

/// Target f on the sphere tables: R < 10⁻⁶ from R⁽⁰⁾ = 1.
pub const SPHERE_TABLE_F_STOP: f64 = 1e-12;

/// A named trial configuration; the id also keys the RNG streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub id: String,
    pub trial: TrialConfig,
    /// Run the plain strategy at fixed μ⁽⁰⁾ instead of Alg. 1.
    pub plain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub config_id: String,
    pub trials: usize,
    pub successes: usize,
    pub p_success: f64,
    /// (F_s + F_u)/P_S; absent when nothing succeeded.
    pub e_runtime: Option<f64>,
    pub f_success_total: u64,
    pub f_fail_total: u64,
    /// Medians over trials of the per-trial μ percentiles.
    pub mu_p25: f64,
    pub mu_med: f64,
    pub mu_p75: f64,
    /// Median over trials of F_t.
    pub evals_med: f64,
    pub diverged: usize,
    pub records: Vec<TrialRecord>,
}

impl BenchmarkResult {
    pub fn from_records(config_id: &str, records: Vec<TrialRecord>) -> Self {
        let trials = records.len();
        let (mut successes, mut fs, mut fu, mut diverged) = (0, 0u64, 0u64, 0);
        for r in &records {
            if r.outcome == Outcome::Success {
                successes += 1;
                fs += r.evals;
            } else {
                fu += r.evals;
            }
            if r.outcome == Outcome::Diverged {
                diverged += 1;
            }
        }
        let p = successes as f64 / trials as f64;
        let col = |f: fn(&TrialRecord) -> f64| median(&records.iter().map(f).collect::<Vec<_>>());
        BenchmarkResult {
            config_id: config_id.to_string(),
            trials,
            successes,
            p_success: p,
            e_runtime: (successes > 0).then(|| (fs + fu) as f64 / p),
            f_success_total: fs,
            f_fail_total: fu,
            mu_p25: col(|r| r.mu_p25),
            mu_med: col(|r| r.mu_med),
            mu_p75: col(|r| r.mu_p75),
            evals_med: col(|r| r.evals as f64),
            diverged,
            records,
        }
    }
}

/// Runs `trials` independent trials of every config. Results come back in
/// config order and do not depend on the worker count.
pub fn run_benchmark(configs: &[BenchmarkConfig], trials: usize, master_seed: u64) -> Vec<BenchmarkResult> {
    configs
        .iter()
        .map(|c| {
            let id = label_id(&c.id);
            let records = par_trials(trials, |i| {
                let mut rng = trial_rng(master_seed, id, i as u64);
                if c.plain {
                    run_plain_trial(&c.trial, &mut rng)
                } else {
                    run_pcs_trial(&c.trial, &mut rng)
                }
            });
            BenchmarkResult::from_records(&c.id, records)
        })
        .collect()
}

fn rastrigin_config(
    n: usize,
    amplitude: f64,
    variant: CsaVariant,
    method: Method,
    preset: Preset,
    mu_min: usize,
    mu_max: usize,
) -> BenchmarkConfig {
    let spec = ObjectiveSpec::new(ObjectiveKind::rastrigin(amplitude), n);
    let settings = ParamSet::preset(preset, n).settings(method, mu_min, mu_max);
    let mut trial = TrialConfig::new(spec, variant, settings, TerminationSpec::default());
    let plain = method == Method::None;
    if plain {
        // reference: the strategy at fixed μ = μ_max
        trial.mu0 = mu_max;
    }
    BenchmarkConfig {
        id: format!(
            "rastrigin/N{n}/A{amplitude}/{}/{}/{}/{mu_min}-{mu_max}",
            variant.name(),
            method.name(),
            preset.name()
        ),
        trial,
        plain,
    }
}

/// The (N, A) ladder for one method. `Method::None` gives the fixed-μ_max
/// reference.
pub fn rastrigin_ladder(
    variant: CsaVariant,
    method: Method,
    preset: Preset,
    mu_min: usize,
    mu_max: usize,
) -> Vec<BenchmarkConfig> {
    RASTRIGIN_LADDER
        .iter()
        .map(|&(n, a)| rastrigin_config(n, a, variant, method, preset, mu_min, mu_max))
        .collect()
}

/// Dimension sweep at A = 3, α = 2π.
pub fn rastrigin_n_sweep(
    ns: &[usize],
    variant: CsaVariant,
    method: Method,
    preset: Preset,
    mu_min: usize,
    mu_max: usize,
) -> Vec<BenchmarkConfig> {
    ns.iter()
        .map(|&n| rastrigin_config(n, 3.0, variant, method, preset, mu_min, mu_max))
        .collect()
}

/// One row of a PCS table: sphere ("S") or random ("N") objective at each N.
pub fn pcs_table_suite(
    ns: &[usize],
    variant: CsaVariant,
    method: Method,
    preset: Preset,
    mu_min: usize,
    mu_max: usize,
) -> Vec<BenchmarkConfig> {
    let mut out = Vec::new();
    for (tag, kind) in [("S", ObjectiveKind::Sphere), ("N", ObjectiveKind::Random)] {
        for &n in ns {
            let settings = ParamSet::preset(preset, n).settings(method, mu_min, mu_max);
            let term = match kind {
                ObjectiveKind::Random => TerminationSpec {
                    g_max: RANDOM_G_MAX,
                    ..TerminationSpec::default()
                },
                _ => TerminationSpec {
                    f_stop: SPHERE_TABLE_F_STOP,
                    sigma_stop: 0.0,
                    ..TerminationSpec::default()
                },
            };
            let trial = TrialConfig::new(ObjectiveSpec::new(kind, n), variant, settings, term);
            out.push(BenchmarkConfig {
                id: format!(
                    "table/{tag}{n}/{}/{}/{}/{mu_min}-{mu_max}",
                    variant.name(),
                    method.name(),
                    preset.name()
                ),
                trial,
                plain: method == Method::None,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(outcome: Outcome, evals: u64) -> TrialRecord {
        TrialRecord {
            outcome,
            evals,
            generations: 1,
            mu_p25: 4.0,
            mu_med: 4.0,
            mu_p75: 4.0,
            f_final: 0.0,
            sigma_final: 1.0,
            error: None,
            trace: None,
        }
    }

    #[test]
    fn all_successful_runtime_is_success_evals() {
        let r = BenchmarkResult::from_records("x", vec![record(Outcome::Success, 10), record(Outcome::Success, 30)]);
        assert_eq!(r.p_success, 1.0);
        assert_eq!(r.e_runtime, Some(40.0));
        assert_eq!(r.f_fail_total, 0);
    }

    #[test]
    fn no_success_has_no_runtime() {
        let r = BenchmarkResult::from_records("x", vec![record(Outcome::LocalConvergence, 10)]);
        assert_eq!(r.p_success, 0.0);
        assert_eq!(r.e_runtime, None);
    }

    #[test]
    fn runtime_counts_failures() {
        let r = BenchmarkResult::from_records(
            "x",
            vec![
                record(Outcome::Success, 10),
                record(Outcome::LocalConvergence, 20),
                record(Outcome::Diverged, 30),
                record(Outcome::Success, 40),
            ],
        );
        assert_eq!(r.e_runtime, Some(200.0));
        assert_eq!(r.diverged, 1);
    }

    #[test]
    fn suites_have_distinct_ids() {
        let mut ids: Vec<String> = pcs_table_suite(&[10, 100], CsaVariant::SqrtN, Method::Apop, Preset::P2, 4, 1024)
            .into_iter()
            .chain(rastrigin_ladder(CsaVariant::SqrtN, Method::Apop, Preset::P2, 4, 1024))
            .chain(rastrigin_ladder(CsaVariant::SqrtN, Method::None, Preset::P2, 4, 1024))
            .map(|c| c.id)
            .collect();
        let n = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), n);
    }

    #[test]
    fn benchmark_is_reproducible() {
        let cfgs = rastrigin_n_sweep(&[5], CsaVariant::SqrtN, Method::Apop, Preset::P2, 4, 16);
        let a = run_benchmark(&cfgs, 3, 7);
        let b = run_benchmark(&cfgs, 3, 7);
        assert_eq!(a, b);
        assert_eq!(a[0].trials, 3);
    }
}
