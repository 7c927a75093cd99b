use std::collections::VecDeque;

use super::Performance;

/// Median-fitness deterioration counter.
#[derive(Debug, Clone, PartialEq)]
pub struct ApopState {
    window: usize,
    theta_f: f64,
    history: VecDeque<f64>,
}

impl ApopState {
    pub fn new(window: usize, theta_f: f64) -> Self {
        assert!(window >= 2, "APOP needs at least two medians");
        ApopState {
            window,
            theta_f,
            history: VecDeque::with_capacity(window),
        }
    }

    pub fn push(&mut self, f_med: f64) {
        if self.history.len() == self.window {
            self.history.pop_front();
        }
        self.history.push_back(f_med);
    }

    pub fn is_full(&self) -> bool {
        self.history.len() == self.window
    }

    /// Fraction of increasing consecutive medians in the window, if full.
    pub fn ratio(&self) -> Option<f64> {
        if !self.is_full() {
            return None;
        }
        let ups = self
            .history
            .iter()
            .zip(self.history.iter().skip(1))
            .filter(|(a, b)| b > a)
            .count();
        Some(ups as f64 / (self.window - 1) as f64)
    }

    pub fn performance(&self) -> Performance {
        match self.ratio() {
            Some(p) => Performance::from_statistic(p, self.theta_f),
            None => Performance::Neutral,
        }
    }
}

/// P_f of a complete window of medians.
pub fn deterioration_ratio(medians: &[f64]) -> f64 {
    let mut st = ApopState::new(medians.len(), 0.0);
    medians.iter().for_each(|&m| st.push(m));
    st.ratio().expect("window is full")
}
