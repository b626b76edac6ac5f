use serde::Serialize;

use super::family_recursive;
use crate::error::{check_positive, Result};
use crate::kernels::mittag_leffler;
use crate::operator::LinOp;

/// One grid point of a Mittag-Leffler comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MlRow {
    pub n: usize,
    pub t: f64,
    pub discrete: f64,
    /// `t^(beta-1) E_{alpha,beta}(-rho t^alpha)`; infinite at `t = 0` when `beta < 1`.
    pub exact: f64,
    pub abs_diff: f64,
}

/// The scalar family generated by `-rho` with `tau = 1/N` on `[0, 1]`,
/// next to its continuous counterpart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MlComparison {
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    pub n_max: usize,
    pub rows: Vec<MlRow>,
}

impl MlComparison {
    /// Largest `|S^n - e(t_n)|` over `n >= 1`.
    pub fn max_error(&self) -> f64 {
        self.rows.iter().skip(1).map(|r| r.abs_diff).fold(0.0, f64::max)
    }

    /// Largest error over `t = i / points`, `i = 1..=points`, which must be a
    /// subgrid of this comparison.
    pub fn max_error_on_grid(&self, points: usize) -> Option<f64> {
        if points == 0 || self.n_max % points != 0 {
            return None;
        }
        let stride = self.n_max / points;
        Some((1..=points).map(|i| self.rows[i * stride].abs_diff).fold(0.0, f64::max))
    }
}

/// `e_{alpha,beta}(t) = t^(beta-1) E_{alpha,beta}(-rho t^alpha)`.
pub fn ml_profile(rho: f64, alpha: f64, beta: f64, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(if beta < 1.0 {
            f64::INFINITY
        } else {
            mittag_leffler(alpha, beta, 0.0)?.value * if beta == 1.0 { 1.0 } else { 0.0 }
        });
    }
    Ok(t.powf(beta - 1.0) * mittag_leffler(alpha, beta, -rho * t.powf(alpha))?.value)
}

pub fn compare_mittag_leffler(rho: f64, alpha: f64, beta: f64, n_max: usize) -> Result<MlComparison> {
    check_positive("rho", rho)?;
    if n_max == 0 {
        return Err(crate::error::Error::domain("N must be at least 1"));
    }
    let tau = 1.0 / n_max as f64;
    let family = family_recursive(&LinOp::scalar(-rho), alpha, beta, tau, n_max)?;
    let rows = (0..=n_max)
        .map(|n| {
            let t = n as f64 * tau;
            let discrete = family.get(n).to_dense()[(0, 0)];
            let exact = ml_profile(rho, alpha, beta, t)?;
            Ok(MlRow { n, t, discrete, exact, abs_diff: (discrete - exact).abs() })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MlComparison { rho, alpha, beta, n_max, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_case_converges() {
        // alpha = beta = 1: e(t) = exp(-t) and S^n = (1 + tau)^-(n+1).
        let c = compare_mittag_leffler(1.0, 1.0, 1.0, 50).unwrap();
        for r in &c.rows {
            assert!((r.exact - (-r.t).exp()).abs() <= 1e-14);
            assert!((r.discrete - (1.0 + 0.02_f64).powi(-(r.n as i32 + 1))).abs() <= 1e-14);
        }
        let fine = compare_mittag_leffler(1.0, 1.0, 1.0, 100).unwrap();
        assert!(fine.max_error_on_grid(50).unwrap() < c.max_error());
    }

    #[test]
    fn singular_start() {
        let c = compare_mittag_leffler(1.0, 1.1, 0.1, 10).unwrap();
        assert!(c.rows[0].exact.is_infinite());
        assert!(c.max_error().is_finite());
        assert!(c.max_error_on_grid(3).is_none());
    }
}
