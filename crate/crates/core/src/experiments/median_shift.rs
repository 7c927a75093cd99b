use serde::{Deserialize, Serialize};

use crate::es::{sample_and_select, EsState, OffspringSet};
use crate::rng::TrialRng;
use crate::stats::median;
use crate::testbed::{Objective, ObjectiveKind, ObjectiveSpec};

/// Medians of the selected offspring fitness over two sphere generations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MedianShift {
    /// Generation one: parent at R, mutation strength σ.
    pub before: f64,
    /// Generation two: parent at 0.98R, σ·√α_μ.
    pub after_rescaled: f64,
    /// Generation two: parent at 0.98R, σ unchanged.
    pub after_unrescaled: f64,
}

/// Offspring distance shrink assumed between the two generations.
const SECOND_GENERATION_RADIUS: f64 = 0.98;

/// Pools the μ selected f-values of `repeats` independent samplings per
/// generation and returns the three pooled medians.
///
/// Shows why APOP can report a deterioration right after a μ-increase: the
/// √-rescaled σ inflates the offspring fitness even though the parent moved
/// closer to the optimum.
#[allow(clippy::too_many_arguments)]
pub fn median_shift_oracle(
    n: usize,
    mu: usize,
    lambda: usize,
    r: f64,
    sigma: f64,
    alpha_mu: f64,
    repeats: usize,
    rng: &mut TrialRng,
) -> MedianShift {
    let mut objective = Objective::new(ObjectiveSpec::new(ObjectiveKind::Sphere, n));
    let mut offspring = OffspringSet::new();
    let mut pooled = |radius: f64, s: f64, rng: &mut TrialRng| {
        let mut y = vec![0.0; n];
        y[0] = radius;
        let mut state = EsState::new(y, vec![0.0; n], s, mu, mu as f64 / lambda as f64);
        state.lambda = lambda;
        let mut values = Vec::with_capacity(mu * repeats);
        for _ in 0..repeats {
            sample_and_select(&state, &mut objective, rng, &mut offspring).expect("sphere values are finite");
            values.extend(offspring.selected_fitness(mu));
        }
        median(&values)
    };
    let before = pooled(r, sigma, rng);
    let r2 = SECOND_GENERATION_RADIUS * r;
    let after_rescaled = pooled(r2, sigma * alpha_mu.sqrt(), rng);
    let after_unrescaled = pooled(r2, sigma, rng);
    MedianShift {
        before,
        after_rescaled,
        after_unrescaled,
    }
}
