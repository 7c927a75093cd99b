//! Test objectives, run initialization and termination classification.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::es::EsState;
use crate::theory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ObjectiveKind {
    /// Σ y_i²
    Sphere,
    /// A fresh N(0, 1) draw per call, independent of y.
    Random,
    /// Σ [y_i² + A (1 − cos(α y_i))]
    Rastrigin { amplitude: f64, frequency: f64 },
}

impl ObjectiveKind {
    /// Rastrigin with the usual frequency α = 2π.
    pub fn rastrigin(amplitude: f64) -> Self {
        ObjectiveKind::Rastrigin {
            amplitude,
            frequency: 2.0 * PI,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ObjectiveKind::Sphere => "sphere",
            ObjectiveKind::Random => "random",
            ObjectiveKind::Rastrigin { .. } => "rastrigin",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub dim: usize,
}

impl ObjectiveSpec {
    pub fn new(kind: ObjectiveKind, dim: usize) -> Self {
        if let ObjectiveKind::Rastrigin {
            amplitude,
            frequency,
        } = kind
        {
            assert!(
                amplitude > 0.0 && frequency > 0.0,
                "Rastrigin needs positive amplitude and frequency"
            );
        }
        assert!(dim >= 1, "dimension must be positive");
        ObjectiveSpec { kind, dim }
    }

    /// Pure function value; the random objective draws from `rng`.
    pub fn value<R: Rng + ?Sized>(&self, y: &[f64], rng: &mut R) -> f64 {
        match self.kind {
            ObjectiveKind::Sphere => y.iter().map(|v| v * v).sum(),
            ObjectiveKind::Random => rng.sample(StandardNormal),
            ObjectiveKind::Rastrigin {
                amplitude,
                frequency,
            } => y
                .iter()
                .map(|&v| v * v + amplitude * (1.0 - (frequency * v).cos()))
                .sum(),
        }
    }
}

/// An objective together with its evaluation counter.
#[derive(Debug, Clone)]
pub struct Objective {
    spec: ObjectiveSpec,
    evals: u64,
}

impl Objective {
    pub fn new(spec: ObjectiveSpec) -> Self {
        Objective { spec, evals: 0 }
    }

    pub fn spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    pub fn evals(&self) -> u64 {
        self.evals
    }

    pub fn evaluate<R: Rng + ?Sized>(&mut self, y: &[f64], rng: &mut R) -> f64 {
        debug_assert_eq!(y.len(), self.spec.dim);
        self.evals += 1;
        self.spec.value(y, rng)
    }
}

/// Initial state for a run on `spec`.
///
/// Rastrigin starts at y = 2⌈αA/2⌉·1, the sphere at `sphere_radius`·e₁; both
/// use σ = σ*₀ ‖y‖/N with the large-population second zero at (N, μ₀) and
/// s = 1. The random objective starts at y = 0 with σ = 1.
pub fn init_run(spec: &ObjectiveSpec, mu0: usize, theta: f64, sphere_radius: f64) -> EsState {
    let n = spec.dim;
    let ones = vec![1.0; n];
    let y = match spec.kind {
        ObjectiveKind::Sphere => {
            let mut y = vec![0.0; n];
            y[0] = sphere_radius;
            y
        }
        ObjectiveKind::Random => vec![0.0; n],
        ObjectiveKind::Rastrigin {
            amplitude,
            frequency,
        } => vec![rastrigin_start(amplitude, frequency); n],
    };
    let sigma = match spec.kind {
        ObjectiveKind::Random => 1.0,
        _ => {
            let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            initial_sigma(n, mu0, theta, r)
        }
    };
    EsState::new(y, ones, sigma, mu0, theta)
}

/// Sphere start at distance `radius` along e₁ with σ at the second zero.
pub fn init_sphere(n: usize, mu0: usize, theta: f64, radius: f64) -> EsState {
    init_run(&ObjectiveSpec::new(ObjectiveKind::Sphere, n), mu0, theta, radius)
}

/// σ = σ*₀ R/N with σ*₀ = (8N)^{1/4} (c_ϑ μ)^{1/2}.
pub fn initial_sigma(n: usize, mu: usize, theta: f64, distance: f64) -> f64 {
    let c = theory::progress_coefficient(theta).expect("truncation ratio in (0, 1)");
    theory::second_zero_approx(n, mu, c) * distance / n as f64
}

/// Coordinate of the Rastrigin start point, 2⌈αA/2⌉.
pub fn rastrigin_start(amplitude: f64, frequency: f64) -> f64 {
    2.0 * (frequency * amplitude / 2.0).ceil()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Success,
    LocalConvergence,
    Budget,
    Diverged,
    Running,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::LocalConvergence => "local",
            Outcome::Budget => "budget",
            Outcome::Diverged => "diverged",
            Outcome::Running => "running",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminationSpec {
    pub f_stop: f64,
    pub sigma_stop: f64,
    pub g_max: u64,
    pub eval_max: u64,
}

impl Default for TerminationSpec {
    fn default() -> Self {
        TerminationSpec {
            f_stop: 1e-3,
            sigma_stop: 1e-3,
            g_max: 100_000,
            eval_max: 100_000_000,
        }
    }
}

impl TerminationSpec {
    /// Classifies the run after a completed generation. `f` is the
    /// recombinant fitness. Divergence is reported by the strategy itself and
    /// never produced here.
    pub fn classify(&self, state: &EsState, f: f64, evals: u64) -> Outcome {
        if f < self.f_stop {
            Outcome::Success
        } else if state.sigma < self.sigma_stop {
            Outcome::LocalConvergence
        } else if state.g >= self.g_max || evals >= self.eval_max {
            Outcome::Budget
        } else {
            Outcome::Running
        }
    }

    /// Budget-only classification for objectives without a target.
    pub fn classify_budget(&self, state: &EsState, evals: u64) -> Outcome {
        if state.g >= self.g_max || evals >= self.eval_max {
            Outcome::Budget
        } else {
            Outcome::Running
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;

    #[test]
    fn objective_values() {
        let mut rng = seeded(0);
        let sph = ObjectiveSpec::new(ObjectiveKind::Sphere, 2);
        assert_eq!(sph.value(&[3.0, 4.0], &mut rng), 25.0);

        let ras = ObjectiveSpec::new(ObjectiveKind::rastrigin(3.0), 3);
        assert_eq!(ras.value(&[0.0; 3], &mut rng), 0.0);
        let v = ras.value(&[1.0, -2.0, 3.0], &mut rng);
        assert!((v - 14.0).abs() < 1e-12);
    }

    #[test]
    fn random_objective_ignores_position_and_counts() {
        let mut obj = Objective::new(ObjectiveSpec::new(ObjectiveKind::Random, 4));
        let mut rng = seeded(3);
        let a = obj.evaluate(&[0.0; 4], &mut rng);
        let b = obj.evaluate(&[0.0; 4], &mut rng);
        assert_ne!(a, b);
        assert_eq!(obj.evals(), 2);
    }

    #[test]
    fn rastrigin_initialization() {
        assert_eq!(rastrigin_start(3.0, 2.0 * PI), 20.0);
        let spec = ObjectiveSpec::new(ObjectiveKind::rastrigin(3.0), 10);
        let st = init_run(&spec, 4, 0.5, 1.0);
        assert!(st.y.iter().all(|&v| v == 20.0));
        assert!(st.s.iter().all(|&v| v == 1.0));
        let r = st.distance();
        let c = theory::progress_coefficient(0.5).unwrap();
        let star = st.sigma * 10.0 / r;
        assert!((star - theory::second_zero_approx(10, 4, c)).abs() < 1e-12);
    }

    #[test]
    fn sphere_and_random_initialization() {
        let st = init_sphere(100, 100, 0.5, 1.0);
        assert_eq!(st.distance(), 1.0);
        assert_eq!(st.lambda, 200);
        let c = theory::progress_coefficient(0.5).unwrap();
        assert!((st.sigma * 100.0 - theory::second_zero_approx(100, 100, c)).abs() < 1e-12);

        let spec = ObjectiveSpec::new(ObjectiveKind::Random, 5);
        let st = init_run(&spec, 4, 0.5, 1.0);
        assert_eq!(st.sigma, 1.0);
        assert!(st.y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn termination_precedence() {
        let term = TerminationSpec {
            g_max: 10,
            ..TerminationSpec::default()
        };
        let mut st = init_sphere(2, 1, 0.5, 1.0);
        st.sigma = 1.0;
        assert_eq!(term.classify(&st, 5e-4, 0), Outcome::Success);
        st.sigma = 5e-4;
        assert_eq!(term.classify(&st, 10.0, 0), Outcome::LocalConvergence);
        st.sigma = 1.0;
        st.g = 10;
        assert_eq!(term.classify(&st, 1.0, 0), Outcome::Budget);
        st.g = 3;
        assert_eq!(term.classify(&st, 1.0, 0), Outcome::Running);
        assert_eq!(term.classify(&st, 1.0, 100_000_000), Outcome::Budget);
    }

    proptest! {
        #[test]
        fn rastrigin_is_nonnegative_and_zero_only_at_origin(
            y in proptest::collection::vec(-10.0f64..10.0, 1..8),
            a in 0.1f64..20.0,
        ) {
            let mut rng = seeded(0);
            let spec = ObjectiveSpec::new(ObjectiveKind::rastrigin(a), y.len());
            let v = spec.value(&y, &mut rng);
            prop_assert!(v >= 0.0);
            if y.iter().any(|&c| c != 0.0) {
                prop_assert!(v > 0.0);
            }
        }

        #[test]
        fn rastrigin_approaches_sphere_for_small_amplitude(
            y in proptest::collection::vec(-5.0f64..5.0, 1..8),
        ) {
            let mut rng = seeded(0);
            let sph = ObjectiveSpec::new(ObjectiveKind::Sphere, y.len()).value(&y, &mut rng);
            let ras = ObjectiveSpec::new(ObjectiveKind::rastrigin(1e-12), y.len()).value(&y, &mut rng);
            prop_assert!((sph - ras).abs() <= 2e-12 * y.len() as f64 + 1e-14 * sph);
        }

        #[test]
        fn integer_points_reduce_to_sphere(
            y in proptest::collection::vec(-20i32..20, 1..8),
            a in 0.1f64..70.0,
        ) {
            let mut rng = seeded(0);
            let y: Vec<f64> = y.into_iter().map(f64::from).collect();
            let sph = ObjectiveSpec::new(ObjectiveKind::Sphere, y.len()).value(&y, &mut rng);
            let ras = ObjectiveSpec::new(ObjectiveKind::rastrigin(a), y.len()).value(&y, &mut rng);
            prop_assert!((sph - ras).abs() <= 1e-9 * (1.0 + sph));
        }
    }
}
