use serde::{Deserialize, Serialize};

use super::runner::par_trials;
use crate::es::{run_generation, CsaConfig, CsaVariant, OffspringSet};
use crate::pcs::{PcsController, PcsSettings};
use crate::rng::{label_id, trial_rng};
use crate::stats::mean;
use crate::testbed::{init_run, Objective, ObjectiveKind, ObjectiveSpec};

/// Fixed-μ run with a population controller attached as a pure observer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalConfig {
    /// Method, window, β and thresholds; μ-bounds are ignored.
    pub pcs: PcsSettings,
    pub variant: CsaVariant,
    pub objective: ObjectiveSpec,
    pub theta: f64,
    pub horizon: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalRow {
    pub g: u64,
    pub f_rec: f64,
    pub sigma: f64,
    pub per: i8,
    /// P_f, P_H or ‖p_θ‖²; absent while the window fills.
    pub statistic: Option<f64>,
    pub pm_sq: Option<f64>,
    pub pc_sq: Option<f64>,
    /// Squared CSA path length over N.
    pub s_sq_per_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalTrace {
    pub mu: usize,
    pub rows: Vec<SignalRow>,
    pub error: Option<String>,
}

impl SignalTrace {
    /// Time average of the main statistic over the generations that have one.
    pub fn mean_statistic(&self) -> f64 {
        mean(&self.rows.iter().filter_map(|r| r.statistic).collect::<Vec<_>>())
    }

    pub fn mean_pm_sq(&self) -> f64 {
        mean(&self.rows.iter().filter_map(|r| r.pm_sq).collect::<Vec<_>>())
    }

    pub fn mean_pc_sq(&self) -> f64 {
        mean(&self.rows.iter().filter_map(|r| r.pc_sq).collect::<Vec<_>>())
    }

    pub fn mean_s_sq_per_n(&self) -> f64 {
        mean(&self.rows.iter().map(|r| r.s_sq_per_n).collect::<Vec<_>>())
    }

    /// Fraction of generations with a verdict that were Good.
    pub fn good_fraction(&self) -> f64 {
        let judged: Vec<_> = self.rows.iter().filter(|r| r.statistic.is_some()).collect();
        judged.iter().filter(|r| r.per > 0).count() as f64 / judged.len() as f64
    }
}

/// One trace per μ in `mus`; μ never changes within a trace.
pub fn measure_signals_fixed_mu(cfg: &SignalConfig, mus: &[usize], master_seed: u64) -> Vec<SignalTrace> {
    let n = cfg.objective.dim;
    let id = label_id(&format!(
        "signals/{}/{}/{}/{n}",
        cfg.pcs.method.name(),
        cfg.variant.name(),
        cfg.objective.kind.name()
    ));
    par_trials(mus.len(), |i| {
        let mu = mus[i];
        let mut rng = trial_rng(master_seed, id, mu as u64);
        let mut state = init_run(&cfg.objective, mu, cfg.theta, 1.0);
        let csa = CsaConfig::new(cfg.variant, n, mu);
        let mut ctrl = PcsController::new(cfg.pcs, n);
        let mut objective = Objective::new(cfg.objective);
        let mut offspring = OffspringSet::new();
        let mut rows = Vec::with_capacity(cfg.horizon as usize);
        let mut error = None;
        while state.g < cfg.horizon {
            let out = match run_generation(&mut state, &csa, &mut objective, &mut rng, &mut offspring) {
                Ok(out) => out,
                Err(e) => {
                    error = Some(e.to_string());
                    break;
                }
            };
            let sig = ctrl.measure(&out, mu);
            rows.push(SignalRow {
                g: state.g,
                f_rec: out.f_rec,
                sigma: state.sigma,
                per: sig.performance.value(),
                statistic: sig.statistic,
                pm_sq: sig.pm_sq,
                pc_sq: sig.pc_sq,
                s_sq_per_n: state.s.iter().map(|v| v * v).sum::<f64>() / n as f64,
            });
            if cfg.objective.kind == ObjectiveKind::Sphere && state.distance() < 1e-250 {
                break;
            }
        }
        SignalTrace { mu, rows, error }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcs::Method;

    #[test]
    fn apop_signal_on_random_function_is_near_one_half() {
        let cfg = SignalConfig {
            pcs: PcsSettings {
                method: Method::Apop,
                window: 10,
                ..PcsSettings::default()
            },
            variant: CsaVariant::SqrtN,
            objective: ObjectiveSpec::new(ObjectiveKind::Random, 20),
            theta: 0.5,
            horizon: 2000,
        };
        let traces = measure_signals_fixed_mu(&cfg, &[5], 4);
        let p = traces[0].mean_statistic();
        assert!((p - 0.5).abs() < 0.05, "{p}");
        assert_eq!(traces[0].rows.len(), 2000);
        assert!(traces[0].rows[..9].iter().all(|r| r.statistic.is_none()));
    }
}
