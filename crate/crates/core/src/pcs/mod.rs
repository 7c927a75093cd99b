//! Population control: performance measures and the μ-update of the outer
//! loop.

mod apop;
mod pccsa;
mod psa;
mod student_t;

pub use apop::{deterioration_ratio, ApopState};
pub use pccsa::{slope_p_value, PcCsaState, SlopeTest};
pub use psa::PsaState;
pub use student_t::student_t_cdf;

use serde::{Deserialize, Serialize};

use crate::es::{CsaConfig, EsState, GenerationOutput};
use crate::theory::RescaleLaw;

/// Verdict of a performance measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Performance {
    /// Insufficient progress; grow μ.
    Bad = -1,
    Neutral = 0,
    /// Sufficient progress; shrink μ.
    Good = 1,
}

impl Performance {
    pub fn value(self) -> i8 {
        self as i8
    }

    /// Good below `threshold`, Bad above, Neutral on equality.
    pub fn from_statistic(stat: f64, threshold: f64) -> Self {
        if stat < threshold {
            Performance::Good
        } else if stat > threshold {
            Performance::Bad
        } else {
            Performance::Neutral
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    None,
    Apop,
    PcCsa,
    Psa,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::None, Method::Apop, Method::PcCsa, Method::Psa];

    pub fn name(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Apop => "apop",
            Method::PcCsa => "pccsa",
            Method::Psa => "psa",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Some(Method::None),
            "apop" => Some(Method::Apop),
            "pccsa" => Some(Method::PcCsa),
            "psa" => Some(Method::Psa),
            _ => None,
        }
    }
}

/// Everything that defines a population controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcsSettings {
    pub method: Method,
    pub mu_min: usize,
    pub mu_max: usize,
    pub alpha_mu: f64,
    /// Idle generations Δ_g after each μ-change.
    pub delta_g: u64,
    pub rescale_law: RescaleLaw,
    /// Window length L of APOP and pcCSA.
    pub window: usize,
    /// Θ_f of APOP.
    pub theta_f: f64,
    /// Θ_H of pcCSA.
    pub theta_h: f64,
    /// Path constant β of PSA.
    pub beta: f64,
    /// Θ_θ of PSA.
    pub theta_theta: f64,
}

pub const DEFAULT_THETA_F: f64 = 0.2;
pub const DEFAULT_THETA_H: f64 = 0.05;
pub const DEFAULT_THETA_THETA: f64 = 1.4;

impl Default for PcsSettings {
    fn default() -> Self {
        PcsSettings {
            method: Method::None,
            mu_min: 4,
            mu_max: 1024,
            alpha_mu: 2.0,
            delta_g: 10,
            rescale_law: RescaleLaw::Sqrt,
            window: 10,
            theta_f: DEFAULT_THETA_F,
            theta_h: DEFAULT_THETA_H,
            beta: 0.1,
            theta_theta: DEFAULT_THETA_THETA,
        }
    }
}

impl PcsSettings {
    /// All violated constraints, empty when the settings are usable.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.mu_min < 1 {
            errs.push("mu_min must be at least 1".to_string());
        }
        if self.mu_min > self.mu_max {
            errs.push("mu_min must not exceed mu_max".to_string());
        }
        if !(self.alpha_mu > 1.0 && self.alpha_mu.is_finite()) {
            errs.push("alpha_mu must exceed 1".to_string());
        }
        match self.method {
            Method::Apop if self.window < 2 => errs.push("APOP needs window L >= 2".to_string()),
            Method::PcCsa if self.window < 3 => errs.push("pcCSA needs window L >= 3".to_string()),
            _ => {}
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            errs.push("beta must lie in (0, 1]".to_string());
        }
        for (name, v) in [
            ("theta_f", self.theta_f),
            ("theta_h", self.theta_h),
            ("theta_theta", self.theta_theta),
        ] {
            if !v.is_finite() {
                errs.push(format!("{name} must be finite"));
            }
        }
        errs
    }
}

/// Per-generation output of the controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub performance: Performance,
    /// P_f, P_H or ‖p_θ‖², once available.
    pub statistic: Option<f64>,
    /// PSA path norms ‖p_m‖² and ‖p_c‖².
    pub pm_sq: Option<f64>,
    pub pc_sq: Option<f64>,
}

impl Signal {
    fn neutral() -> Self {
        Signal {
            performance: Performance::Neutral,
            statistic: None,
            pm_sq: None,
            pc_sq: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Measure {
    None,
    Apop(ApopState),
    PcCsa(PcCsaState),
    Psa(PsaState),
}

/// Measures performance every generation and adapts μ.
#[derive(Debug, Clone, PartialEq)]
pub struct PcsController {
    settings: PcsSettings,
    /// Remaining wait before the next μ-change is allowed.
    w: u64,
    measure: Measure,
}

impl PcsController {
    /// Controller for dimension `n`; the wait counter starts at Δ_g.
    pub fn new(settings: PcsSettings, n: usize) -> Self {
        let measure = match settings.method {
            Method::None => Measure::None,
            Method::Apop => Measure::Apop(ApopState::new(settings.window, settings.theta_f)),
            Method::PcCsa => Measure::PcCsa(PcCsaState::new(settings.window, settings.theta_h)),
            Method::Psa => Measure::Psa(PsaState::new(n, settings.beta, settings.theta_theta)),
        };
        PcsController {
            settings,
            w: settings.delta_g,
            measure,
        }
    }

    pub fn settings(&self) -> &PcsSettings {
        &self.settings
    }

    pub fn wait(&self) -> u64 {
        self.w
    }

    pub fn psa(&self) -> Option<&PsaState> {
        match &self.measure {
            Measure::Psa(st) => Some(st),
            _ => None,
        }
    }

    /// Feeds one finished generation; `mu` is the parent number it ran with.
    pub fn measure(&mut self, out: &GenerationOutput, mu: usize) -> Signal {
        match &mut self.measure {
            Measure::None => Signal::neutral(),
            Measure::Apop(st) => {
                st.push(out.f_med);
                Signal {
                    performance: st.performance(),
                    statistic: st.ratio(),
                    ..Signal::neutral()
                }
            }
            Measure::PcCsa(st) => {
                st.push(out.f_rec);
                Signal {
                    performance: st.performance(),
                    statistic: st.p_value(),
                    ..Signal::neutral()
                }
            }
            Measure::Psa(st) => {
                st.update(&out.z_rec, out.sigma_ratio, mu);
                let (pm, pc) = (st.pm_sq(), st.pc_sq());
                Signal {
                    performance: st.performance(),
                    statistic: Some(pm + pc),
                    pm_sq: Some(pm),
                    pc_sq: Some(pc),
                }
            }
        }
    }

    /// Applies the μ-update for verdict `per`.
    ///
    /// While waiting only the counter moves. Otherwise Bad proposes ⌈α_μ μ⌉
    /// and Good ⌊μ/α_μ⌋; when the proposal differs from μ it is clamped to
    /// [μ_min, μ_max], σ is rescaled, λ and the CSA parameters follow and the
    /// wait restarts. Returns whether a change was proposed.
    pub fn apply_population_change(&mut self, per: Performance, state: &mut EsState, cfg: &mut CsaConfig) -> bool {
        if self.w > 0 {
            self.w -= 1;
            return false;
        }
        let mu = state.mu;
        let proposed = match per {
            Performance::Neutral => mu,
            Performance::Bad => ceil_tolerant(self.settings.alpha_mu * mu as f64),
            Performance::Good => floor_tolerant(mu as f64 / self.settings.alpha_mu),
        };
        if proposed == mu {
            return false;
        }
        let next = proposed.clamp(self.settings.mu_min, self.settings.mu_max);
        state.sigma *= self.settings.rescale_law.factor(mu, next);
        state.set_mu(next);
        *cfg = CsaConfig::new(cfg.variant, state.dim(), next);
        self.w = self.settings.delta_g;
        true
    }
}

// α_μ μ is usually meant to be exact (1.05 · 100 = 105), which binary floating
// point misses by an ulp; snap to the nearest integer first.
fn ceil_tolerant(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

fn floor_tolerant(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as usize
    } else {
        x.floor() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::es::CsaVariant;
    use proptest::prelude::*;

    fn setup(mu: usize, alpha: f64, delta_g: u64) -> (PcsController, EsState, CsaConfig) {
        let settings = PcsSettings {
            method: Method::Apop,
            mu_min: 4,
            mu_max: 1024,
            alpha_mu: alpha,
            delta_g,
            ..PcsSettings::default()
        };
        let ctrl = PcsController::new(settings, 10);
        let state = EsState::new(vec![1.0; 10], vec![1.0; 10], 0.5, mu, 0.5);
        let cfg = CsaConfig::new(CsaVariant::Han, 10, mu);
        (ctrl, state, cfg)
    }

    #[test]
    fn neutral_changes_nothing() {
        let (mut ctrl, mut st, mut cfg) = setup(100, 1.05, 0);
        let before = (st.clone(), cfg);
        assert!(!ctrl.apply_population_change(Performance::Neutral, &mut st, &mut cfg));
        assert_eq!((st, cfg), before);
        assert_eq!(ctrl.wait(), 0);
    }

    #[test]
    fn small_growth_step_is_exact() {
        let (mut ctrl, mut st, mut cfg) = setup(100, 1.05, 0);
        assert!(ctrl.apply_population_change(Performance::Bad, &mut st, &mut cfg));
        assert_eq!(st.mu, 105);
        assert_eq!(st.lambda, 210);
        assert!((st.sigma - 0.5 * 1.05f64.sqrt()).abs() < 1e-15);
        assert_eq!(cfg, CsaConfig::new(CsaVariant::Han, 10, 105));
        assert!(ctrl.apply_population_change(Performance::Good, &mut st, &mut cfg));
        assert_eq!(st.mu, 100);
    }

    #[test]
    fn growth_and_shrink_at_the_bottom() {
        let (mut ctrl, mut st, mut cfg) = setup(4, 1.05, 0);
        ctrl.apply_population_change(Performance::Bad, &mut st, &mut cfg);
        assert_eq!(st.mu, 5);
        let (mut ctrl, mut st, mut cfg) = setup(4, 1.05, 0);
        // ⌊4/1.05⌋ = 3, clamped back to 4
        assert!(ctrl.apply_population_change(Performance::Good, &mut st, &mut cfg));
        assert_eq!(st.mu, 4);
        assert_eq!(st.sigma, 0.5);
    }

    #[test]
    fn clamped_at_the_top_still_restarts_wait() {
        let (mut ctrl, mut st, mut cfg) = setup(1024, 2.0, 3);
        for _ in 0..3 {
            assert!(!ctrl.apply_population_change(Performance::Bad, &mut st, &mut cfg));
        }
        assert_eq!(ctrl.wait(), 0);
        assert!(ctrl.apply_population_change(Performance::Bad, &mut st, &mut cfg));
        assert_eq!(st.mu, 1024);
        assert_eq!(st.sigma, 0.5);
        assert_eq!(ctrl.wait(), 3);
    }

    #[test]
    fn validation_lists_all_problems() {
        let s = PcsSettings {
            method: Method::PcCsa,
            alpha_mu: 0.9,
            window: 2,
            mu_min: 10,
            mu_max: 5,
            ..PcsSettings::default()
        };
        let errs = s.validate();
        assert_eq!(errs.len(), 3, "{errs:?}");
        assert!(errs.iter().any(|e| e == "alpha_mu must exceed 1"));
        assert!(PcsSettings::default().validate().is_empty());
    }

    #[test]
    fn tolerant_rounding() {
        assert_eq!(ceil_tolerant(1.05 * 100.0), 105);
        assert_eq!(ceil_tolerant(4.2), 5);
        assert_eq!(floor_tolerant(100.0 / 1.05), 95);
        assert_eq!(floor_tolerant(4.0 / 1.05), 3);
    }

    proptest! {
        #[test]
        fn bounds_and_spacing_hold(
            verdicts in proptest::collection::vec(-1i8..=1, 1..300),
            mu0 in 4usize..1024,
            alpha in 1.01f64..3.0,
            delta_g in 0u64..6,
        ) {
            let (mut ctrl, mut st, mut cfg) = setup(mu0, alpha, delta_g);
            let mut last_change: Option<usize> = None;
            for (g, v) in verdicts.iter().enumerate() {
                let per = match v { -1 => Performance::Bad, 0 => Performance::Neutral, _ => Performance::Good };
                let mu_before = st.mu;
                ctrl.apply_population_change(per, &mut st, &mut cfg);
                prop_assert!(ctrl.wait() <= delta_g);
                prop_assert!(st.mu >= 4 && st.mu <= 1024);
                prop_assert_eq!(st.lambda, 2 * st.mu);
                if st.mu != mu_before {
                    if let Some(prev) = last_change {
                        prop_assert!(g - prev > delta_g as usize);
                    }
                    last_change = Some(g);
                }
            }
        }
    }
}
