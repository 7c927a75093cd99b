//! The (μ/μ_I, λ)-ES generation step with cumulative step-size adaptation.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::EsError;
use crate::stats::median_sorted;
use crate::testbed::Objective;

/// Admissible range of σ; leaving it aborts the run as diverged.
pub const SIGMA_MIN: f64 = 1e-300;
pub const SIGMA_MAX: f64 = 1e300;

/// The three standard CSA parametrizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CsaVariant {
    /// c_σ = 1/√N, D = √N, σ-rule with damping D.
    SqrtN,
    /// c_σ = 1/N, D = N, σ-rule with damping D.
    LinN,
    /// c_σ = (μ+2)/(N+μ+5), d_σ = 1 + c_σ + 2 max(0, √((μ−1)/(N+1)) − 1),
    /// σ-rule with factor c_σ/d_σ.
    Han,
}

impl CsaVariant {
    pub const ALL: [CsaVariant; 3] = [CsaVariant::SqrtN, CsaVariant::LinN, CsaVariant::Han];

    pub fn name(self) -> &'static str {
        match self {
            CsaVariant::SqrtN => "sqrtN",
            CsaVariant::LinN => "linN",
            CsaVariant::Han => "han",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sqrtn" => Some(CsaVariant::SqrtN),
            "linn" => Some(CsaVariant::LinN),
            "han" => Some(CsaVariant::Han),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateRule {
    /// σ ← σ exp((‖s‖/E_χ − 1)/D)
    RuleD,
    /// σ ← σ exp((c_σ/d_σ)(‖s‖/E_χ − 1))
    RuleCsDs,
}

/// Cumulation constant, damping and σ-rule of one CSA parametrization at a
/// given (N, μ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsaConfig {
    pub variant: CsaVariant,
    pub update_rule: UpdateRule,
    pub c_sigma: f64,
    /// D for [`UpdateRule::RuleD`], d_σ for [`UpdateRule::RuleCsDs`].
    pub damping: f64,
    pub e_chi: f64,
}

impl CsaConfig {
    /// Parameters of `variant` for dimension `n` and parent number `mu`.
    ///
    /// Only [`CsaVariant::Han`] depends on `mu`; callers must rebuild the
    /// config whenever μ changes.
    pub fn new(variant: CsaVariant, n: usize, mu: usize) -> Self {
        let nf = n as f64;
        let muf = mu as f64;
        let (update_rule, c_sigma, damping) = match variant {
            CsaVariant::SqrtN => (UpdateRule::RuleD, 1.0 / nf.sqrt(), nf.sqrt()),
            CsaVariant::LinN => (UpdateRule::RuleD, 1.0 / nf, nf),
            CsaVariant::Han => {
                let c = (muf + 2.0) / (nf + muf + 5.0);
                let d = 1.0 + c + 2.0 * (((muf - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0);
                (UpdateRule::RuleCsDs, c, d)
            }
        };
        CsaConfig {
            variant,
            update_rule,
            c_sigma,
            damping,
            e_chi: expected_chi_norm(n),
        }
    }

    /// Exponent gain 1/D of the σ-update, i.e. c_σ/d_σ for the Han rule.
    pub fn gain(&self) -> f64 {
        match self.update_rule {
            UpdateRule::RuleD => 1.0 / self.damping,
            UpdateRule::RuleCsDs => self.c_sigma / self.damping,
        }
    }

    /// The damping D of the equivalent 1/D-rule.
    pub fn effective_damping(&self) -> f64 {
        1.0 / self.gain()
    }
}

/// E‖N(0, I_N)‖ ≈ √N (1 − 1/(4N) + 1/(21N²)).
pub fn expected_chi_norm(n: usize) -> f64 {
    let nf = n as f64;
    nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf))
}

/// Full strategy state of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsState {
    /// Parental search point.
    pub y: Vec<f64>,
    /// Cumulation path.
    pub s: Vec<f64>,
    pub sigma: f64,
    pub mu: usize,
    pub lambda: usize,
    /// Truncation ratio μ/λ used to derive λ.
    pub theta: f64,
    /// Generation counter.
    pub g: u64,
}

impl EsState {
    pub fn new(y: Vec<f64>, s: Vec<f64>, sigma: f64, mu: usize, theta: f64) -> Self {
        assert_eq!(y.len(), s.len(), "search point and path differ in length");
        EsState {
            y,
            s,
            sigma,
            mu,
            lambda: offspring_count(mu, theta),
            theta,
            g: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    /// Distance of the parent to the origin.
    pub fn distance(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Sets μ and the matching λ = round(μ/ϑ).
    pub fn set_mu(&mut self, mu: usize) {
        self.mu = mu;
        self.lambda = offspring_count(mu, self.theta);
    }
}

/// λ = round(μ/ϑ), never below μ.
pub fn offspring_count(mu: usize, theta: f64) -> usize {
    ((mu as f64 / theta).round() as usize).max(mu)
}

/// Offspring of one generation.
///
/// `z` holds the λ mutation vectors row-major (λ × N). The trial points
/// ỹ_l = y + σ z_l are formed on the fly for evaluation and not stored.
#[derive(Debug, Clone, Default)]
pub struct OffspringSet {
    pub z: Vec<f64>,
    pub f: Vec<f64>,
    /// Offspring indices sorted ascending by fitness, ties by index.
    pub order: Vec<usize>,
    dim: usize,
    y_tilde: Vec<f64>,
}

impl OffspringSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// Mutation vector of offspring `l`.
    pub fn z_of(&self, l: usize) -> &[f64] {
        &self.z[l * self.dim..(l + 1) * self.dim]
    }

    /// Fitness values of the `mu` best offspring, ascending.
    pub fn selected_fitness(&self, mu: usize) -> Vec<f64> {
        self.order[..mu].iter().map(|&l| self.f[l]).collect()
    }

    /// Mean of the mutation vectors of the `mu` best offspring.
    pub fn recombine(&self, mu: usize) -> Vec<f64> {
        let mut z_rec = vec![0.0; self.dim];
        for &l in &self.order[..mu] {
            for (acc, z) in z_rec.iter_mut().zip(self.z_of(l)) {
                *acc += z;
            }
        }
        let inv = 1.0 / mu as f64;
        z_rec.iter_mut().for_each(|v| *v *= inv);
        z_rec
    }
}

/// Samples λ offspring around the parent, evaluates them and sorts them by
/// fitness (stable, ascending).
pub fn sample_and_select<R: Rng + ?Sized>(
    state: &EsState,
    objective: &mut Objective,
    rng: &mut R,
    offspring: &mut OffspringSet,
) -> Result<(), EsError> {
    let n = state.dim();
    let lambda = state.lambda;
    offspring.dim = n;
    offspring.z.resize(lambda * n, 0.0);
    offspring.f.resize(lambda, 0.0);
    offspring.y_tilde.resize(n, 0.0);
    for l in 0..lambda {
        let z = &mut offspring.z[l * n..(l + 1) * n];
        for (zi, (yt, y)) in z
            .iter_mut()
            .zip(offspring.y_tilde.iter_mut().zip(&state.y))
        {
            *zi = rng.sample(StandardNormal);
            *yt = y + state.sigma * *zi;
        }
        let value = objective.evaluate(&offspring.y_tilde, rng);
        if !value.is_finite() {
            return Err(EsError::NonFiniteFitness {
                generation: state.g,
                value,
            });
        }
        offspring.f[l] = value;
    }
    offspring.order.clear();
    offspring.order.extend(0..lambda);
    let f = &offspring.f;
    offspring.order.sort_by(|&a, &b| f[a].total_cmp(&f[b]));
    Ok(())
}

/// s ← (1 − c_σ) s + √(μ c_σ (2 − c_σ)) z̄, with μ the current parent number.
pub fn update_path(s: &mut [f64], z_rec: &[f64], c_sigma: f64, mu: usize) {
    let decay = 1.0 - c_sigma;
    let gain = (mu as f64 * c_sigma * (2.0 - c_sigma)).sqrt();
    for (si, zi) in s.iter_mut().zip(z_rec) {
        *si = decay * *si + gain * zi;
    }
}

/// New σ from the length of the updated path.
pub fn update_sigma(sigma: f64, path_norm: f64, cfg: &CsaConfig, generation: u64) -> Result<f64, EsError> {
    let next = sigma * (cfg.gain() * (path_norm / cfg.e_chi - 1.0)).exp();
    if !(SIGMA_MIN..=SIGMA_MAX).contains(&next) || !next.is_finite() {
        return Err(EsError::SigmaOutOfRange {
            generation,
            sigma: next,
        });
    }
    Ok(next)
}

/// Per-generation quantities consumed by the population control.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationOutput {
    /// Recombined mutation direction z̄^(g+1).
    pub z_rec: Vec<f64>,
    /// f(y^(g+1)).
    pub f_rec: f64,
    /// Median of the μ selected offspring fitness values.
    pub f_med: f64,
    /// σ^(g+1)/σ^(g) from the CSA update alone.
    pub sigma_ratio: f64,
}

/// One full CSA-ES generation. Mutates `state` in place and spends λ + 1
/// objective evaluations.
pub fn run_generation<R: Rng + ?Sized>(
    state: &mut EsState,
    cfg: &CsaConfig,
    objective: &mut Objective,
    rng: &mut R,
    offspring: &mut OffspringSet,
) -> Result<GenerationOutput, EsError> {
    sample_and_select(state, objective, rng, offspring)?;
    let mu = state.mu;
    let z_rec = offspring.recombine(mu);
    let f_med = median_sorted(&offspring.selected_fitness(mu));

    let sigma = state.sigma;
    for (y, z) in state.y.iter_mut().zip(&z_rec) {
        *y += sigma * z;
    }
    update_path(&mut state.s, &z_rec, cfg.c_sigma, mu);
    let path_norm = state.s.iter().map(|v| v * v).sum::<f64>().sqrt();
    let generation = state.g;
    let next_sigma = update_sigma(sigma, path_norm, cfg, generation)?;
    if !state.y.iter().chain(&state.s).all(|v| v.is_finite()) {
        return Err(EsError::NonFiniteState { generation });
    }
    state.sigma = next_sigma;
    let f_rec = objective.evaluate(&state.y, rng);
    if !f_rec.is_finite() {
        return Err(EsError::NonFiniteFitness {
            generation,
            value: f_rec,
        });
    }
    state.g += 1;
    Ok(GenerationOutput {
        z_rec,
        f_rec,
        f_med,
        sigma_ratio: next_sigma / sigma,
    })
}
