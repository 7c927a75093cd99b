use std::collections::VecDeque;

use super::student_t::student_t_cdf;
use super::Performance;

/// Least-squares trend test on the recent parental fitness values.
#[derive(Debug, Clone, PartialEq)]
pub struct PcCsaState {
    window: usize,
    theta_h: f64,
    history: VecDeque<f64>,
}

impl PcCsaState {
    pub fn new(window: usize, theta_h: f64) -> Self {
        assert!(window >= 3, "the slope test needs at least three values");
        PcCsaState {
            window,
            theta_h,
            history: VecDeque::with_capacity(window),
        }
    }

    pub fn push(&mut self, f_rec: f64) {
        if self.history.len() == self.window {
            self.history.pop_front();
        }
        self.history.push_back(f_rec);
    }

    pub fn is_full(&self) -> bool {
        self.history.len() == self.window
    }

    /// P-value of the one-sided slope test, if the window is full.
    pub fn p_value(&self) -> Option<f64> {
        if !self.is_full() {
            return None;
        }
        let (a, b) = self.history.as_slices();
        let mut values = Vec::with_capacity(self.window);
        values.extend_from_slice(a);
        values.extend_from_slice(b);
        Some(slope_p_value(&values).p_value)
    }

    pub fn performance(&self) -> Performance {
        match self.p_value() {
            Some(p) => Performance::from_statistic(p, self.theta_h),
            None => Performance::Neutral,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeTest {
    pub slope: f64,
    pub intercept: f64,
    pub std_error: f64,
    pub p_value: f64,
}

/// Regresses `f` on 0, 1, …, L−1 and returns P(T_{L−2} ≤ â/s_â), where s_â is
/// the residual standard error of the slope.
///
/// A perfect fit (s_â = 0) gives 0 for a falling, 1 for a rising and 1/2 for
/// a flat line.
pub fn slope_p_value(f: &[f64]) -> SlopeTest {
    let l = f.len();
    assert!(l >= 3, "the slope test needs at least three values");
    let lf = l as f64;
    let g_mean = (lf - 1.0) / 2.0;
    let f_mean = f.iter().sum::<f64>() / lf;
    let mut sgg = 0.0;
    let mut sgf = 0.0;
    for (i, &fi) in f.iter().enumerate() {
        let dg = i as f64 - g_mean;
        sgg += dg * dg;
        sgf += dg * (fi - f_mean);
    }
    let slope = sgf / sgg;
    let intercept = f_mean - slope * g_mean;
    let sse: f64 = f
        .iter()
        .enumerate()
        .map(|(i, &fi)| {
            let r = fi - (slope * i as f64 + intercept);
            r * r
        })
        .sum();
    let std_error = (sse / ((lf - 2.0) * sgg)).sqrt();
    let p_value = if std_error > 0.0 {
        student_t_cdf(slope / std_error, (l - 2) as u32)
    } else if slope < 0.0 {
        0.0
    } else if slope > 0.0 {
        1.0
    } else {
        0.5
    };
    SlopeTest {
        slope,
        intercept,
        std_error,
        p_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn exact_falling_line_is_good() {
        let f: Vec<f64> = (0..10).map(|i| 5.0 - i as f64).collect();
        let t = slope_p_value(&f);
        assert_eq!(t.slope, -1.0);
        assert_eq!(t.intercept, 5.0);
        assert!(t.std_error < 1e-12);
        let mut st = PcCsaState::new(10, 0.05);
        f.iter().for_each(|&v| st.push(v));
        assert!(st.p_value().unwrap() < 1e-6);
        assert_eq!(st.performance(), Performance::Good);
    }

    #[test]
    fn zero_error_conventions() {
        assert_eq!(slope_p_value(&[1.0, 1.0, 1.0, 1.0]).p_value, 0.5);
        assert_eq!(slope_p_value(&[1.0, 2.0, 3.0]).p_value, 1.0);
        assert_eq!(slope_p_value(&[3.0, 2.0, 1.0]).p_value, 0.0);
    }

    #[test]
    fn noisy_rise_is_bad() {
        let mut rng = seeded(2);
        let f: Vec<f64> = (0..10)
            .map(|i| 3.0 * i as f64 + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let p = slope_p_value(&f).p_value;
        assert!(p > 0.99, "{p}");
    }

    #[test]
    fn partial_window_is_neutral() {
        let mut st = PcCsaState::new(5, 0.05);
        st.push(4.0);
        st.push(2.0);
        st.push(1.0);
        assert_eq!(st.performance(), Performance::Neutral);
    }

    #[test]
    fn textbook_regression() {
        // slope 0.6, residuals (−0.1, 0.3, −0.3, 0.1) → s_â = √(0.2/(2·5))
        let t = slope_p_value(&[1.0, 2.0, 2.0, 3.0]);
        assert!((t.slope - 0.6).abs() < 1e-12);
        assert!((t.intercept - 1.1).abs() < 1e-12);
        assert!((t.std_error - 0.02f64.sqrt()).abs() < 1e-12);
        assert!((t.p_value - student_t_cdf(0.6 / 0.02f64.sqrt(), 2)).abs() < 1e-12);
    }

    #[test]
    fn null_calibration() {
        let mut rng = seeded(77);
        let windows = 10_000;
        let mut hits = 0;
        let mut f = [0.0; 10];
        for _ in 0..windows {
            for v in f.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            if slope_p_value(&f).p_value < 0.05 {
                hits += 1;
            }
        }
        let rate = hits as f64 / windows as f64;
        assert!((rate - 0.05).abs() <= 0.01, "{rate}");
    }
}
