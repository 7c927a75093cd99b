use super::Performance;

/// Cumulated mean-shift and σ-change paths.
#[derive(Debug, Clone, PartialEq)]
pub struct PsaState {
    pub beta: f64,
    pub theta_theta: f64,
    pub p_m: Vec<f64>,
    pub p_c: Vec<f64>,
}

impl PsaState {
    /// Zero paths of length `n`.
    pub fn new(n: usize, beta: f64, theta_theta: f64) -> Self {
        assert!(beta > 0.0 && beta <= 1.0, "β must lie in (0, 1]");
        PsaState {
            beta,
            theta_theta,
            p_m: vec![0.0; n],
            p_c: vec![0.0; n],
        }
    }

    /// One path step with the recombined direction, the CSA σ-ratio and the
    /// parent number of the finished generation.
    pub fn update(&mut self, z_rec: &[f64], sigma_ratio: f64, mu: usize) {
        let n = self.p_m.len() as f64;
        let decay = 1.0 - self.beta;
        let norm = self.beta * (2.0 - self.beta) * mu as f64 / n;
        let gm = norm.sqrt();
        let dc = (norm / 2.0).sqrt() * (sigma_ratio * sigma_ratio - 1.0);
        for (p, z) in self.p_m.iter_mut().zip(z_rec) {
            *p = decay * *p + gm * z;
        }
        for p in self.p_c.iter_mut() {
            *p = decay * *p + dc;
        }
    }

    pub fn pm_sq(&self) -> f64 {
        self.p_m.iter().map(|v| v * v).sum()
    }

    pub fn pc_sq(&self) -> f64 {
        self.p_c.iter().map(|v| v * v).sum()
    }

    /// ‖p_θ‖² = ‖p_m‖² + ‖p_c‖².
    pub fn norm_sq(&self) -> f64 {
        self.pm_sq() + self.pc_sq()
    }

    /// A short combined path means little systematic progress: Bad below
    /// Θ_θ, Good above.
    pub fn performance(&self) -> Performance {
        let v = self.norm_sq();
        if v < self.theta_theta {
            Performance::Bad
        } else if v > self.theta_theta {
            Performance::Good
        } else {
            Performance::Neutral
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn unit_sigma_ratio_only_decays_pc() {
        let mut st = PsaState::new(3, 0.25, 1.4);
        st.p_c = vec![2.0; 3];
        st.update(&[0.0; 3], 1.0, 5);
        assert_eq!(st.p_c, vec![1.5; 3]);
        assert_eq!(st.p_m, vec![0.0; 3]);
    }

    #[test]
    fn full_reset_with_unit_beta() {
        let mut st = PsaState::new(3, 1.0, 1.4);
        st.p_m = vec![1.0, -2.0, 3.0];
        st.p_c = vec![4.0; 3];
        st.update(&[0.0; 3], 1.0, 7);
        assert_eq!(st.p_m, vec![0.0; 3]);
        assert_eq!(st.p_c, vec![0.0; 3]);
    }

    #[test]
    fn thresholds() {
        let st = PsaState::new(4, 0.1, 1.4);
        assert_eq!(st.performance(), Performance::Bad);
        let mut st = PsaState::new(2, 0.1, 1.4);
        st.p_m = vec![1.0, 0.0];
        st.p_c = vec![0.0, 1.0];
        assert_eq!(st.norm_sq(), 2.0);
        assert_eq!(st.performance(), Performance::Good);
    }

    #[test]
    fn random_directions_give_unit_mean_shift_path() {
        // z̄ of μ random picks has variance 1/μ per component
        let (n, mu, beta) = (20, 9, 0.1);
        let mut st = PsaState::new(n, beta, 1.4);
        let mut rng = seeded(8);
        let scale = 1.0 / (mu as f64).sqrt();
        let mut z = vec![0.0; n];
        let mut acc = 0.0;
        let gens = 20_000;
        for g in 0..gens + 200 {
            z.iter_mut().for_each(|v| *v = scale * rng.sample::<f64, _>(StandardNormal));
            st.update(&z, 1.0, mu);
            if g >= 200 {
                acc += st.pm_sq();
            }
        }
        let avg = acc / gens as f64;
        assert!((avg - 1.0).abs() < 0.05, "{avg}");
    }
}
