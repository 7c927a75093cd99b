//! Flat `key = value` run configuration.
//!
//! Sources are layered: built-in defaults, then the preset (P1/P2) evaluated
//! at the resolved N, then the config file, then command-line flags. Every
//! key is checked and all problems are reported together.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use csa_pcs::experiments::{ParamSet, Preset};
use csa_pcs::{CsaVariant, Method, ObjectiveKind, PcsSettings, RescaleLaw};
use serde::Serialize;

/// Every accepted key with a one-line description; also the documentation
/// printed by `csa-pcs keys`.
pub const KEYS: &[(&str, &str)] = &[
    ("n", "search-space dimension N"),
    ("ns", "comma-separated list of N (gen-count, pcs-table, benchmark n-sweep)"),
    ("mu", "parent number μ (gamma, psa-steady fixed-μ runs, median-shift)"),
    ("mus", "comma-separated list of μ (progress-rate, gen-count, signals, psa-steady)"),
    ("lambda", "offspring number λ for median-shift (default 2μ)"),
    ("csa", "CSA variant: sqrtN | linN | han"),
    ("method", "population control: none | apop | pccsa | psa (pcs-table also accepts all)"),
    ("preset", "parameter set P1 | P2"),
    ("objective", "sphere | random | rastrigin"),
    ("amplitude", "Rastrigin amplitude A"),
    ("frequency", "Rastrigin frequency α"),
    ("mu_min", "lower μ bound"),
    ("mu_max", "upper μ bound"),
    ("alpha_mu", "μ-change factor α_μ (> 1)"),
    ("delta_g", "waiting generations Δ_g after a μ-change"),
    ("rescale", "σ-rescaling on μ-change: none | sqrt | linear"),
    ("window", "APOP/pcCSA window length L"),
    ("beta", "PSA path constant β in (0, 1]"),
    ("theta_f", "APOP threshold Θ_f"),
    ("theta_h", "pcCSA significance Θ_H"),
    ("theta_theta", "PSA threshold Θ_θ"),
    ("trials", "independent trials per configuration"),
    ("seed", "master seed"),
    ("out", "output directory"),
    ("trace", "write per-trial trace CSVs: true | false"),
    ("horizon", "generations per fixed-μ run (gamma, signals, psa-steady)"),
    ("burn_in", "fraction of the horizon discarded (gamma, psa-steady)"),
    ("sigma_stars", "comma-separated σ* grid (progress-rate)"),
    ("oracle_trials", "one-generation repeats per point (progress-rate)"),
    ("r_ratio", "target R-ratio (gen-count)"),
    ("g_cap", "generation cap per run (gen-count)"),
    ("suite", "benchmark suite: rastrigin-ladder | n-sweep"),
    ("hold", "generations at μ⁽⁰⁾ before the schedule starts"),
    ("r_stop", "schedule convergence threshold on R"),
    ("g_max", "generation budget"),
    ("eval_max", "evaluation budget"),
    ("f_stop", "success threshold on f"),
    ("sigma_stop", "local-convergence threshold on σ"),
    ("r", "parent distance R (median-shift)"),
    ("sigma", "mutation strength σ (median-shift)"),
    ("repeats", "samplings per generation (median-shift)"),
    ("diverged", "policy for diverged trials: report | fail"),
];

/// All violations found while reading and resolving a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub problems: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for p in &self.problems {
            writeln!(f, "  - {p}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// later duplicates win.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    let mut problems = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => {
                map.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
            }
            _ => problems.push(format!("line {}: expected key = value, got {:?}", i + 1, raw.trim())),
        }
    }
    if problems.is_empty() {
        Ok(map)
    } else {
        Err(ConfigError { problems })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    RastriginLadder,
    NSweep,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::RastriginLadder => "rastrigin-ladder",
            Suite::NSweep => "n-sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DivergedPolicy {
    Report,
    Fail,
}

/// A fully resolved configuration. Serialized verbatim into every JSON
/// summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub n: usize,
    pub ns: Vec<usize>,
    pub mu: usize,
    pub mus: Vec<usize>,
    pub lambda: Option<usize>,
    pub csa: CsaVariant,
    /// `None` in the sense of "all methods" (pcs-table only).
    pub method: Option<Method>,
    pub preset: Preset,
    pub objective: ObjectiveKind,
    /// Controller settings at `n`.
    pub pcs: PcsSettings,
    pub overrides: PcsOverrides,
    pub trials: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub trace: bool,
    pub horizon: u64,
    pub burn_in: f64,
    pub sigma_stars: Vec<f64>,
    pub oracle_trials: usize,
    pub r_ratio: f64,
    pub g_cap: u64,
    pub suite: Suite,
    pub hold: u64,
    pub r_stop: f64,
    pub g_max: Option<u64>,
    pub eval_max: Option<u64>,
    pub f_stop: Option<f64>,
    pub sigma_stop: Option<f64>,
    pub r: f64,
    pub sigma: f64,
    pub repeats: usize,
    pub diverged: DivergedPolicy,
}

impl RunConfig {
    /// The single method to run; pcs-table expands `all` itself.
    pub fn method(&self) -> Method {
        self.method.unwrap_or(Method::Apop)
    }

    /// Controller settings for another dimension, as used by the suites.
    pub fn settings_at(&self, n: usize, method: Method) -> PcsSettings {
        self.overrides.settings(self.preset, n, method)
    }
}

/// Explicitly configured controller parameters; unset ones come from the
/// preset evaluated at the run's N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PcsOverrides {
    pub mu_min: usize,
    pub mu_max: usize,
    pub alpha_mu: Option<f64>,
    pub delta_g: Option<u64>,
    pub rescale_law: Option<RescaleLaw>,
    pub window: Option<usize>,
    pub beta: Option<f64>,
    pub theta_f: Option<f64>,
    pub theta_h: Option<f64>,
    pub theta_theta: Option<f64>,
}

impl PcsOverrides {
    pub fn settings(&self, preset: Preset, n: usize, method: Method) -> PcsSettings {
        let base = ParamSet::preset(preset, n).settings(method, self.mu_min, self.mu_max);
        PcsSettings {
            alpha_mu: self.alpha_mu.unwrap_or(base.alpha_mu),
            delta_g: self.delta_g.unwrap_or(base.delta_g),
            rescale_law: self.rescale_law.unwrap_or(base.rescale_law),
            window: self.window.unwrap_or(base.window),
            beta: self.beta.unwrap_or(base.beta),
            theta_f: self.theta_f.unwrap_or(base.theta_f),
            theta_h: self.theta_h.unwrap_or(base.theta_h),
            theta_theta: self.theta_theta.unwrap_or(base.theta_theta),
            ..base
        }
    }
}

struct Reader<'a> {
    map: &'a BTreeMap<String, String>,
    problems: Vec<String>,
}

impl Reader<'_> {
    fn get<T>(&mut self, key: &str, default: T, parse: impl Fn(&str) -> Option<T>) -> T {
        match self.map.get(key) {
            None => default,
            Some(v) => parse(v).unwrap_or_else(|| {
                self.problems.push(format!("{key}: cannot parse {v:?}"));
                default
            }),
        }
    }

    fn opt<T>(&mut self, key: &str, parse: impl Fn(&str) -> Option<T>) -> Option<T> {
        let v = self.map.get(key)?;
        let parsed = parse(v);
        if parsed.is_none() {
            self.problems.push(format!("{key}: cannot parse {v:?}"));
        }
        parsed
    }

    fn num<T: std::str::FromStr>(&mut self, key: &str, default: T) -> T {
        self.get(key, default, |s| s.parse().ok())
    }

    fn list<T: std::str::FromStr>(&mut self, key: &str, default: Vec<T>) -> Vec<T> {
        self.get(key, default, |s| {
            s.split(',').map(|p| p.trim().parse().ok()).collect::<Option<Vec<T>>>()
        })
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Some(true),
        "false" | "no" | "0" | "off" => Some(false),
        _ => None,
    }
}

/// Turns the merged key-value map into a validated [`RunConfig`].
pub fn resolve(map: &BTreeMap<String, String>) -> Result<RunConfig, ConfigError> {
    let mut problems: Vec<String> = map
        .keys()
        .filter(|k| !KEYS.iter().any(|(name, _)| name == k))
        .map(|k| format!("unknown key {k:?}"))
        .collect();
    let mut rd = Reader {
        map,
        problems: Vec::new(),
    };

    let n = rd.num("n", 100usize);
    let ns = rd.list("ns", vec![n]);
    let mu = rd.num("mu", 100usize);
    let mus = rd.list("mus", vec![mu]);
    let lambda = rd.opt("lambda", |s| s.parse().ok());
    let csa = rd.get("csa", CsaVariant::SqrtN, CsaVariant::parse);
    let method = rd.get("method", Some(Method::Apop), |s| {
        if s.eq_ignore_ascii_case("all") {
            Some(None)
        } else {
            Method::parse(s).map(Some)
        }
    });
    let preset = rd.get("preset", Preset::P2, Preset::parse);
    let amplitude = rd.num("amplitude", 3.0f64);
    let frequency = rd.num("frequency", 2.0 * std::f64::consts::PI);
    let objective = rd.get("objective", ObjectiveKind::Sphere, |s| match s.to_ascii_lowercase().as_str() {
        "sphere" => Some(ObjectiveKind::Sphere),
        "random" => Some(ObjectiveKind::Random),
        "rastrigin" => Some(ObjectiveKind::Rastrigin { amplitude, frequency }),
        _ => None,
    });

    let overrides = PcsOverrides {
        mu_min: rd.num("mu_min", 4),
        mu_max: rd.num("mu_max", 1024),
        alpha_mu: rd.opt("alpha_mu", |s| s.parse().ok()),
        delta_g: rd.opt("delta_g", |s| s.parse().ok()),
        rescale_law: rd.opt("rescale", RescaleLaw::parse),
        window: rd.opt("window", |s| s.parse().ok()),
        beta: rd.opt("beta", |s| s.parse().ok()),
        theta_f: rd.opt("theta_f", |s| s.parse().ok()),
        theta_h: rd.opt("theta_h", |s| s.parse().ok()),
        theta_theta: rd.opt("theta_theta", |s| s.parse().ok()),
    };
    let pcs = overrides.settings(preset, n, method.unwrap_or(Method::Apop));

    let cfg = RunConfig {
        n,
        ns,
        mu,
        mus,
        lambda,
        csa,
        method,
        preset,
        objective,
        pcs,
        overrides,
        trials: rd.num("trials", 10),
        seed: rd.num("seed", 1),
        out: rd.get("out", PathBuf::from("results"), |s| Some(PathBuf::from(s))),
        trace: rd.get("trace", false, parse_bool),
        horizon: rd.num("horizon", 5000),
        burn_in: rd.num("burn_in", 0.2),
        sigma_stars: rd.list("sigma_stars", vec![10.0, 20.0, 30.0, 40.0]),
        oracle_trials: rd.num("oracle_trials", 10_000),
        r_ratio: rd.num("r_ratio", 1e-6),
        g_cap: rd.num("g_cap", 1_000_000),
        suite: rd.get("suite", Suite::RastriginLadder, |s| match s {
            "rastrigin-ladder" | "ladder" => Some(Suite::RastriginLadder),
            "n-sweep" => Some(Suite::NSweep),
            _ => None,
        }),
        hold: rd.num("hold", 200),
        r_stop: rd.num("r_stop", 1e-12),
        g_max: rd.opt("g_max", |s| s.parse().ok()),
        eval_max: rd.opt("eval_max", |s| s.parse().ok()),
        f_stop: rd.opt("f_stop", |s| s.parse().ok()),
        sigma_stop: rd.opt("sigma_stop", |s| s.parse().ok()),
        r: rd.num("r", 1.0),
        sigma: rd.num("sigma", 0.42),
        repeats: rd.num("repeats", 10_000),
        diverged: rd.get("diverged", DivergedPolicy::Report, |s| match s {
            "report" => Some(DivergedPolicy::Report),
            "fail" => Some(DivergedPolicy::Fail),
            _ => None,
        }),
    };
    problems.extend(rd.problems);
    problems.extend(check(&cfg));
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError { problems })
    }
}

fn check(cfg: &RunConfig) -> Vec<String> {
    let mut errs = cfg.pcs.validate();
    // every dimension the run will touch must give usable settings too
    for &n in &cfg.ns {
        for m in [Method::Apop, Method::PcCsa, Method::Psa] {
            if cfg.method.is_none_or(|x| x == m) {
                for e in cfg.settings_at(n, m).validate() {
                    if !errs.contains(&e) {
                        errs.push(e);
                    }
                }
            }
        }
    }
    let mut need = |ok: bool, msg: &str| {
        if !ok {
            errs.push(msg.to_string());
        }
    };
    need(cfg.n >= 1, "n must be positive");
    need(!cfg.ns.is_empty() && cfg.ns.iter().all(|&n| n >= 1), "ns must be positive");
    need(cfg.mu >= 1, "mu must be positive");
    need(!cfg.mus.is_empty() && cfg.mus.iter().all(|&m| m >= 1), "mus must be positive");
    need(cfg.lambda.is_none_or(|l| l >= cfg.mu), "lambda must be at least mu");
    need(cfg.trials >= 1, "trials must be at least 1");
    need(cfg.horizon >= 1, "horizon must be at least 1");
    need((0.0..1.0).contains(&cfg.burn_in), "burn_in must lie in [0, 1)");
    need(
        !cfg.sigma_stars.is_empty() && cfg.sigma_stars.iter().all(|s| *s > 0.0),
        "sigma_stars must be positive",
    );
    need(cfg.oracle_trials >= 2, "oracle_trials must be at least 2");
    need(cfg.r_ratio > 0.0 && cfg.r_ratio < 1.0, "r_ratio must lie in (0, 1)");
    need(cfg.g_cap >= 1, "g_cap must be positive");
    need(cfg.r_stop > 0.0, "r_stop must be positive");
    need(cfg.g_max.is_none_or(|g| g >= 1), "g_max must be positive");
    need(cfg.eval_max.is_none_or(|e| e >= 1), "eval_max must be positive");
    need(cfg.f_stop.is_none_or(|f| f > 0.0), "f_stop must be positive");
    need(cfg.sigma_stop.is_none_or(|s| s >= 0.0), "sigma_stop must not be negative");
    need(cfg.r > 0.0 && cfg.sigma > 0.0, "r and sigma must be positive");
    need(cfg.repeats >= 1, "repeats must be at least 1");
    if let ObjectiveKind::Rastrigin { amplitude, frequency } = cfg.objective {
        need(amplitude > 0.0 && frequency > 0.0, "Rastrigin amplitude and frequency must be positive");
    }
    errs
}
