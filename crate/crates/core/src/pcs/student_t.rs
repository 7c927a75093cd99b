use statrs::function::beta::beta_reg;

/// Distribution function of Student's t with `nu` degrees of freedom,
/// from the regularized incomplete beta function
/// I_{ν/(ν+t²)}(ν/2, 1/2).
pub fn student_t_cdf(t: f64, nu: u32) -> f64 {
    assert!(nu >= 1, "degrees of freedom must be positive");
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let nu = f64::from(nu);
    let x = nu / (nu + t * t);
    let tail = 0.5 * beta_reg(0.5 * nu, 0.5, x);
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{ContinuousCDF, Normal};
    use std::f64::consts::PI;

    #[test]
    fn symmetry_point() {
        for nu in [1, 2, 8, 1000] {
            assert_eq!(student_t_cdf(0.0, nu), 0.5);
        }
    }

    #[test]
    fn cauchy_closed_form() {
        for t in [-30.0, -2.0, -0.3, 0.7, 1.0, 5.0] {
            let exact = 0.5 + f64::atan(t) / PI;
            assert!((student_t_cdf(t, 1) - exact).abs() < 1e-12, "t={t}");
        }
        assert!((student_t_cdf(1.0, 1) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn two_degrees_closed_form() {
        // F(t) = 1/2 + t / (2 √(2 + t²))
        for t in [-4.0f64, -1.0, 0.5, 3.0] {
            let exact = 0.5 + t / (2.0 * (2.0 + t * t).sqrt());
            assert!((student_t_cdf(t, 2) - exact).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn normal_limit() {
        let phi = Normal::standard().cdf(1.96);
        assert!((student_t_cdf(1.96, 1_000_000) - phi).abs() < 1e-5);
        assert!((student_t_cdf(1.96, 1_000_000) - 0.975).abs() < 1e-3);
    }

    #[test]
    fn eight_degrees_critical_value() {
        // one-sided 5% quantile of T_8
        assert!((student_t_cdf(-1.859_548_04, 8) - 0.05).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn monotone_and_symmetric(t in -50.0f64..50.0, dt in 0.001f64..5.0, nu in 1u32..200) {
            let a = student_t_cdf(t, nu);
            let b = student_t_cdf(t + dt, nu);
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(b >= a);
            prop_assert!((a + student_t_cdf(-t, nu) - 1.0).abs() < 1e-12);
        }
    }
}
