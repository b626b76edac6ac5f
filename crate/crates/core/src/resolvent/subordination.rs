use crate::error::{check_positive, Error, Result};
use crate::kernels::{integrate_gamma_shaped, PoissonWeight, Quadrature, QuadratureConfig};

/// `int_0^inf rho_n^tau(t) e^(omega t) dt` for `n = 0..=n_max`, by quadrature.
///
/// The exact value is `(1 - omega tau)^-(n+1)`; the family it produces is the
/// backward-Euler family of the scalar generator `omega`.
pub fn subordinate_exponential(omega: f64, tau: f64, n_max: usize) -> Result<Vec<f64>> {
    Ok(subordinate_exponential_with(omega, tau, n_max, QuadratureConfig::default())?
        .into_iter()
        .map(|q| q.value)
        .collect())
}

/// As [`subordinate_exponential`], keeping the quadrature diagnostics.
pub fn subordinate_exponential_with(
    omega: f64,
    tau: f64,
    n_max: usize,
    cfg: QuadratureConfig,
) -> Result<Vec<Quadrature>> {
    check_positive("tau", tau)?;
    if !omega.is_finite() || omega * tau >= 1.0 {
        return Err(Error::domain(format!("omega must be below 1/tau = {}, got {omega}", 1.0 / tau)));
    }
    let rate = 1.0 / tau - omega;
    (0..=n_max)
        .map(|n| {
            let rho = PoissonWeight::new(n, tau)?;
            integrate_gamma_shaped(n, rate, |t| (rho.ln_eval(t) + omega * t).exp(), cfg)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_is_normalization() {
        for v in subordinate_exponential(0.0, 0.3, 40).unwrap() {
            assert!((v - 1.0).abs() <= 1e-12, "{v}");
        }
    }

    #[test]
    fn matches_closed_form() {
        for &(omega, tau) in &[(-1.0, 0.1), (2.0, 0.1), (-30.0, 0.05)] {
            let v = subordinate_exponential(omega, tau, 60).unwrap();
            for (n, x) in v.iter().enumerate() {
                let expect = (1.0 - omega * tau).powi(-(n as i32 + 1));
                assert!((x - expect).abs() <= 1e-11 * expect, "omega={omega} n={n}: {x} vs {expect}");
            }
        }
    }

    #[test]
    fn rejects_rate_at_or_above_inverse_step() {
        assert!(subordinate_exponential(10.0, 0.1, 3).is_err());
        assert!(subordinate_exponential(11.0, 0.1, 3).is_err());
    }
}
