//! Taylor-kernel sequences `k_tau^alpha`, Poisson-type weights `rho_n^tau`,
//! scalar discrete convolution, and the Mittag-Leffler series used as the
//! continuous-side reference.
//!
//! The kernel sequence is
//!
//! ```text
//! k_tau^alpha(n) = tau^(alpha-1) Gamma(alpha+n) / (Gamma(alpha) Gamma(n+1))
//! ```
//!
//! and is always produced by its ratio recurrence
//! `k(n+1) = k(n) (alpha+n)/(n+1)`, which stays finite long after the Gamma
//! quotient has overflowed.

use statrs::function::factorial::ln_factorial;
use statrs::function::gamma::ln_gamma;

use crate::error::{check_positive, Error, Result};

/// The sequence `k_tau^alpha(0..=N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSeq {
    alpha: f64,
    tau: f64,
    values: Vec<f64>,
}

impl KernelSeq {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Largest index `N` held by the sequence.
    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, n: usize) -> f64 {
        self.values[n]
    }
}

impl std::ops::Index<usize> for KernelSeq {
    type Output = f64;

    fn index(&self, n: usize) -> &f64 {
        &self.values[n]
    }
}

/// `k_tau^alpha(0..=n_max)` for `alpha > 0`, `tau > 0`.
pub fn kernel_seq(alpha: f64, tau: f64, n_max: usize) -> Result<KernelSeq> {
    check_positive("alpha", alpha)?;
    check_positive("tau", tau)?;
    Ok(KernelSeq { alpha, tau, values: kernel_weights(alpha, tau, n_max) })
}

/// The same recurrence for an arbitrary real order.
///
/// For `order <= 0` the values are the (tau-scaled) Grunwald-Letnikov
/// backward-difference weights: `order = 0` gives `tau^-1 * delta_n0` and
/// `order = -m` gives the `m`-th backward difference stencil scaled by
/// `tau^-(m+1)`. Callers must validate `tau`.
pub fn kernel_weights(order: f64, tau: f64, n_max: usize) -> Vec<f64> {
    let mut values = Vec::with_capacity(n_max + 1);
    let mut k = tau.powf(order - 1.0);
    values.push(k);
    for n in 0..n_max {
        k *= (order + n as f64) / (n as f64 + 1.0);
        values.push(k);
    }
    values
}

/// Scalar discrete convolution `out[n] = sum_{j<=n} a[n-j] b[j]`.
pub fn conv(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), got: b.len() });
    }
    Ok((0..a.len())
        .map(|n| (0..=n).map(|j| a[n - j] * b[j]).sum())
        .collect())
}

/// The Poisson-type weight `rho_n^tau(t) = exp(-t/tau) (t/tau)^n / (tau n!)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonWeight {
    pub n: usize,
    pub tau: f64,
}

impl PoissonWeight {
    pub fn new(n: usize, tau: f64) -> Result<Self> {
        check_positive("tau", tau)?;
        Ok(Self { n, tau })
    }

    /// Evaluated in log-space so that large `n` does not overflow `n!`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("rho_n^tau is defined for t >= 0, got {t}")));
        }
        Ok(self.ln_eval(t).exp())
    }

    pub(crate) fn ln_eval(&self, t: f64) -> f64 {
        let x = t / self.tau;
        let power = if self.n == 0 { 0.0 } else { self.n as f64 * x.ln() };
        -x + power - self.tau.ln() - ln_factorial(self.n as u64)
    }

    /// Location of the maximum, `n tau`.
    pub fn mode(&self) -> f64 {
        self.n as f64 * self.tau
    }

    /// A point `T` with `int_T^inf rho_n^tau <= tail` (Chernoff bound for the
    /// Gamma(n+1, tau) law).
    pub fn cutoff(&self, tail: f64) -> f64 {
        gamma_tail_cutoff(self.n, 1.0 / self.tau, tail)
    }
}

pub fn poisson_weight(n: usize, tau: f64, t: f64) -> Result<f64> {
    PoissonWeight::new(n, tau)?.eval(t)
}

/// Quadrature settings for integrals against `rho_n^tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Target error, relative to the height of the integrand at the mode
    /// times the width of the bump.
    pub tol: f64,
    /// Mass allowed beyond the truncation point.
    pub tail_mass: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { tol: 1e-13, tail_mass: 1e-17 }
    }
}

/// Result of a quadrature: value and accumulated error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u32,
}

/// Integrates `f` over `[0, inf)` when `f` has the shape `t^n exp(-rate t)`
/// times a slowly varying factor. The range is truncated by the Gamma tail
/// bound and split around the mode so the double-exponential rule sees one
/// smooth bump per panel.
pub fn integrate_gamma_shaped<F>(
    n: usize,
    rate: f64,
    f: F,
    cfg: QuadratureConfig,
) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    check_positive("rate", rate)?;
    let upper = gamma_tail_cutoff(n, rate, cfg.tail_mass);
    integrate_gamma_shaped_to(n, rate, upper, f, cfg)
}

/// As [`integrate_gamma_shaped`] but over the finite range `[0, upper]`.
pub fn integrate_gamma_shaped_to<F>(
    n: usize,
    rate: f64,
    upper: f64,
    f: F,
    cfg: QuadratureConfig,
) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    check_positive("rate", rate)?;
    check_positive("upper", upper)?;
    let mode = n as f64 / rate;
    let sigma = (n as f64 + 1.0).sqrt() / rate;
    let mut breaks = vec![0.0, (mode - 6.0 * sigma).max(0.0), mode, mode + 6.0 * sigma, upper];
    breaks.retain(|&b| b <= upper);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= f64::EPSILON * upper);

    // Rescale so the bump has unit size; the rule's tolerance is absolute.
    let peak = f(mode.min(upper)).abs();
    let norm = if peak > 0.0 && peak.is_finite() { peak * sigma } else { 1.0 };
    let g = |t: f64| f(t) / norm;

    let panel_tol = cfg.tol / breaks.len() as f64;
    let mut total = Quadrature { value: 0.0, error_estimate: 0.0, evaluations: 0 };
    for w in breaks.windows(2) {
        let out = integrate_panel(&g, w[0], w[1], panel_tol, 0).map_err(|(a, b, est)| {
            Error::NonConvergence {
                what: "Poisson-weight quadrature",
                detail: format!(
                    "panel [{a}, {b}] error estimate {:e} exceeds {:e}",
                    est * norm,
                    panel_tol * norm
                ),
            }
        })?;
        total.value += out.value * norm;
        total.error_estimate += out.error_estimate * norm;
        total.evaluations += out.evaluations;
    }
    Ok(total)
}

/// Maximum bisection depth for a panel that misses its tolerance.
const MAX_PANEL_DEPTH: u32 = 10;

fn integrate_panel<G>(g: &G, a: f64, b: f64, tol: f64, depth: u32) -> Result<Quadrature, (f64, f64, f64)>
where
    G: Fn(f64) -> f64,
{
    let out = quadrature::integrate(g, a, b, tol);
    // The estimate cannot drop below rounding in the panel's own value.
    if out.error_estimate <= tol.max(64.0 * f64::EPSILON * out.integral.abs()) {
        return Ok(Quadrature {
            value: out.integral,
            error_estimate: out.error_estimate,
            evaluations: out.num_function_evaluations,
        });
    }
    if depth >= MAX_PANEL_DEPTH || !out.error_estimate.is_finite() {
        return Err((a, b, out.error_estimate));
    }
    let mid = 0.5 * (a + b);
    let left = integrate_panel(g, a, mid, 0.5 * tol, depth + 1)?;
    let right = integrate_panel(g, mid, b, 0.5 * tol, depth + 1)?;
    Ok(Quadrature {
        value: left.value + right.value,
        error_estimate: left.error_estimate + right.error_estimate,
        evaluations: out.num_function_evaluations + left.evaluations + right.evaluations,
    })
}

/// Smallest `T` (up to bisection resolution) with
/// `P[Gamma(n+1, rate) > T] <= tail` by the Chernoff bound
/// `exp(-(n+1)(d - ln(1+d)))` at `T = (n+1)(1+d)/rate`.
fn gamma_tail_cutoff(n: usize, rate: f64, tail: f64) -> f64 {
    let shape = n as f64 + 1.0;
    let target = -tail.min(0.5).ln();
    let exponent = |d: f64| shape * (d - d.ln_1p());
    let mut hi = 1.0;
    while exponent(hi) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if exponent(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    shape * (1.0 + hi) / rate
}

/// Limits for the Mittag-Leffler power series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MittagLefflerConfig {
    pub max_terms: usize,
    pub max_abs_z: f64,
}

impl Default for MittagLefflerConfig {
    fn default() -> Self {
        Self { max_terms: 512, max_abs_z: 50.0 }
    }
}

/// Value of `E_{alpha,beta}(z)` with an error estimate covering both the
/// truncated tail and accumulated rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MittagLeffler {
    pub value: f64,
    pub error_estimate: f64,
    pub terms: usize,
}

pub fn mittag_leffler(alpha: f64, beta: f64, z: f64) -> Result<MittagLeffler> {
    mittag_leffler_with(alpha, beta, z, MittagLefflerConfig::default())
}

/// `E_{alpha,beta}(z) = sum_k z^k / Gamma(alpha k + beta)` for real `z`.
pub fn mittag_leffler_with(
    alpha: f64,
    beta: f64,
    z: f64,
    cfg: MittagLefflerConfig,
) -> Result<MittagLeffler> {
    check_positive("alpha", alpha)?;
    check_positive("beta", beta)?;
    if !z.is_finite() || z.abs() > cfg.max_abs_z {
        return Err(Error::domain(format!(
            "Mittag-Leffler series limited to |z| <= {}, got {z}",
            cfg.max_abs_z
        )));
    }
    if z == 0.0 {
        return Ok(MittagLeffler { value: 1.0 / ln_gamma(beta).exp(), error_estimate: 0.0, terms: 1 });
    }

    let ln_abs_z = z.abs().ln();
    let negative = z < 0.0;
    let mut sum = 0.0;
    let mut largest = 0.0_f64;
    let mut prev = f64::INFINITY;
    for k in 0..cfg.max_terms {
        let kf = k as f64;
        let magnitude = (kf * ln_abs_z - ln_gamma(alpha * kf + beta)).exp();
        let term = if negative && k % 2 == 1 { -magnitude } else { magnitude };
        sum += term;
        largest = largest.max(magnitude);

        // Past the peak the ratio of successive terms keeps shrinking, so the
        // tail is dominated by a geometric series with the current ratio.
        let ratio = magnitude / prev;
        prev = magnitude;
        if k > 0 && ratio < 1.0 {
            let tail = magnitude * ratio / (1.0 - ratio);
            let rounding = largest * (k as f64 + 1.0) * f64::EPSILON;
            if tail <= f64::EPSILON * sum.abs() || tail == 0.0 {
                return Ok(MittagLeffler {
                    value: sum,
                    error_estimate: tail + rounding,
                    terms: k + 1,
                });
            }
        }
    }
    Err(Error::NonConvergence {
        what: "Mittag-Leffler series",
        detail: format!(
            "E_{{{alpha},{beta}}}({z}) not converged within {} terms",
            cfg.max_terms
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Independent oracle: the Gamma quotient evaluated through ln_gamma.
    fn kernel_by_log_gamma(alpha: f64, tau: f64, n: usize) -> f64 {
        let nf = n as f64;
        ((alpha - 1.0) * tau.ln() + ln_gamma(alpha + nf) - ln_gamma(alpha) - ln_gamma(nf + 1.0))
            .exp()
    }

    #[test]
    fn order_one_is_all_ones() {
        let k = kernel_seq(1.0, 0.5, 4).unwrap();
        assert_eq!(k.values(), &[1.0; 5]);
    }

    #[test]
    fn first_value_is_tau_power() {
        let k = kernel_seq(1.5, 0.25, 0).unwrap();
        assert_eq!(k.values().len(), 1);
        assert_relative_eq!(k[0], 0.5, max_relative = 1e-15);
    }

    #[test]
    fn order_two_matches_log_gamma() {
        let k = kernel_seq(2.0, 1.0, 3).unwrap();
        let oracle: Vec<f64> = (0..=3).map(|n| kernel_by_log_gamma(2.0, 1.0, n)).collect();
        for (a, b) in k.values().iter().zip(&oracle) {
            assert_relative_eq!(*a, *b, max_relative = 1e-13);
        }
        for (a, b) in k.values().iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert_relative_eq!(*a, b, max_relative = 1e-15);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(kernel_seq(0.0, 1.0, 3), Err(Error::Domain(_))));
        assert!(matches!(kernel_seq(-1.0, 1.0, 3), Err(Error::Domain(_))));
        assert!(matches!(kernel_seq(1.0, 0.0, 3), Err(Error::Domain(_))));
        assert!(matches!(kernel_seq(1.0, f64::NAN, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn nonpositive_orders_give_difference_stencils() {
        let tau = 0.5;
        let delta = kernel_weights(0.0, tau, 3);
        assert_eq!(delta, vec![2.0, 0.0, 0.0, 0.0]);
        let first = kernel_weights(-1.0, tau, 3);
        assert_eq!(first, vec![4.0, -4.0, 0.0, 0.0]);
    }

    #[test]
    fn recurrence_agrees_with_log_gamma_up_to_512() {
        for &(alpha, tau) in &[(0.3, 0.05), (0.5, 0.1), (1.5, 0.5), (1.9, 0.01), (3.7, 1.3)] {
            let k = kernel_seq(alpha, tau, 512).unwrap();
            for n in 0..=512 {
                assert_relative_eq!(k[n], kernel_by_log_gamma(alpha, tau, n), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn conv_examples() {
        let out = conv(&[1.0, 0.0, 0.0], &[3.0, 5.0, 7.0]).unwrap();
        assert_eq!(out, vec![3.0, 5.0, 7.0]);
        assert_eq!(conv(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), vec![1.0, 2.0]);
        assert!(matches!(
            conv(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn half_orders_convolve_to_ones() {
        let tau = 0.2;
        let half = kernel_seq(0.5, tau, 30).unwrap();
        let c = conv(half.values(), half.values()).unwrap();
        for v in c {
            assert_relative_eq!(tau * v, 1.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn poisson_weight_values() {
        assert_eq!(poisson_weight(0, 1.0, 0.0).unwrap(), 1.0);
        assert_eq!(poisson_weight(1, 1.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            poisson_weight(2, 0.5, 1.5).unwrap(),
            (-3.0_f64).exp() * 9.0 / (0.5 * 2.0),
            max_relative = 1e-14
        );
        assert!(poisson_weight(3, 1.0, -0.1).is_err());
        assert!(poisson_weight(3, 0.0, 1.0).is_err());
        // n! = 1000! overflows f64; the log-space evaluation does not.
        let w = poisson_weight(1000, 0.01, 10.0).unwrap();
        assert!(w.is_finite() && w > 0.0);
    }

    #[test]
    fn poisson_weight_has_unit_mass() {
        let rho = PoissonWeight::new(3, 0.5).unwrap();
        let q = integrate_gamma_shaped(3, 2.0, |t| rho.eval(t).unwrap(), QuadratureConfig::default())
            .unwrap();
        assert!((q.value - 1.0).abs() <= 1e-12, "mass {}", q.value);
    }

    #[test]
    fn cutoff_captures_requested_mass() {
        for &(n, tau) in &[(0usize, 1.0), (3, 0.5), (40, 0.1), (400, 0.02)] {
            let rho = PoissonWeight::new(n, tau).unwrap();
            let t_cut = rho.cutoff(1e-12);
            assert!(t_cut > rho.mode());
            let q = integrate_gamma_shaped_to(
                n,
                1.0 / tau,
                t_cut,
                |t| rho.eval(t).unwrap(),
                QuadratureConfig::default(),
            )
            .unwrap();
            assert!((q.value - 1.0).abs() <= 1e-8, "n={n}: {}", q.value);
        }
    }

    #[test]
    fn mittag_leffler_special_cases() {
        let e = mittag_leffler(1.0, 1.0, -1.0).unwrap();
        assert_relative_eq!(e.value, (-1.0_f64).exp(), max_relative = 1e-14);
        assert!(e.error_estimate < 1e-14);

        let c = mittag_leffler(2.0, 1.0, -1.0).unwrap();
        assert_relative_eq!(c.value, 1.0_f64.cos(), max_relative = 1e-14);

        let z0 = mittag_leffler(0.7, 2.5, 0.0).unwrap();
        assert_relative_eq!(z0.value, 1.0 / statrs::function::gamma::gamma(2.5), max_relative = 1e-14);

        // E_{1,2}(z) = (e^z - 1)/z
        let e12 = mittag_leffler(1.0, 2.0, 3.0).unwrap();
        assert_relative_eq!(e12.value, (3.0_f64.exp() - 1.0) / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn mittag_leffler_reports_failures() {
        assert!(matches!(mittag_leffler(1.0, 1.0, 60.0), Err(Error::Domain(_))));
        assert!(matches!(mittag_leffler(0.0, 1.0, 1.0), Err(Error::Domain(_))));
        // Gamma(0.05 k + 1) grows far too slowly for 512 terms at z = -40.
        assert!(matches!(
            mittag_leffler(0.05, 1.0, -40.0),
            Err(Error::NonConvergence { .. })
        ));
    }
}
