//! The initial value problem
//!
//! ```text
//! C-nabla^alpha u^n = A u^n + C-nabla^(alpha-1) f^n,  n >= 2,   1 < alpha < 2,
//! ```
//!
//! solved by variation of parameters with the `(alpha, 1)`-resolvent family,
//! and independently by implicit stepping.
//!
//! The Caputo difference of the solution acts on `u - x0`, i.e. the history
//! before `t = 0` is the initial datum. The residual under pure
//! zero-extension is available too; for the variation-of-parameters
//! trajectory it equals `k^(1-alpha)(n) x0` when `f = 0`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::calculus::{caputo_diff_anchored_seq, caputo_diff_seq, VecSeq};
use crate::error::{check_positive, Error, Result};
use crate::kernels::kernel_weights;
use crate::operator::{LinOp, ResolventHandle};
use crate::resolvent::{family_recursive, Residual};

/// Right-hand side data `f^0, ..., f^N`.
#[derive(Debug, Clone, PartialEq)]
pub enum Forcing {
    Zero,
    /// Every component of every `f^n` equals the constant.
    Constant(f64),
    Sequence(VecSeq),
}

impl FromStr for Forcing {
    type Err = Error;

    /// `zero` or `constant:<c>`; sequences come from files.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "zero" {
            return Ok(Forcing::Zero);
        }
        if let Some(c) = s.strip_prefix("constant:") {
            let c: f64 = c.trim().parse().map_err(|_| Error::Parse(format!("bad forcing constant {c:?}")))?;
            return Ok(Forcing::Constant(c));
        }
        Err(Error::Parse(format!("forcing must be \"zero\" or \"constant:<c>\", got {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    /// Variation of parameters with the resolvent family.
    Vop,
    /// Implicit stepping of the difference equation.
    Direct,
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMethod::Vop => "vop",
            SolveMethod::Direct => "direct",
        })
    }
}

/// A validated problem: `1 < alpha < 2` and `tau^-alpha` in the resolvent set of `A`.
#[derive(Debug)]
pub struct FdeProblem {
    alpha: f64,
    op: LinOp,
    x0: DVector<f64>,
    forcing: VecSeq,
    tau: f64,
    n_max: usize,
    handle: ResolventHandle,
}

impl FdeProblem {
    pub fn new(alpha: f64, op: LinOp, x0: DVector<f64>, forcing: Forcing, tau: f64, n_max: usize) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::domain(format!("alpha must lie in (1, 2), got {alpha}")));
        }
        check_positive("tau", tau)?;
        if n_max < 2 {
            return Err(Error::domain(format!("horizon must be at least 2, got {n_max}")));
        }
        let d = op.dim();
        if x0.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x0.len() });
        }
        let forcing = match forcing {
            Forcing::Zero => VecSeq::zeros(tau, d, n_max)?,
            Forcing::Constant(c) => VecSeq::constant(tau, DVector::from_element(d, c), n_max)?,
            Forcing::Sequence(s) => {
                if s.dim() != d {
                    return Err(Error::DimensionMismatch { expected: d, got: s.dim() });
                }
                if s.horizon() < n_max {
                    return Err(Error::LengthMismatch { expected: n_max + 1, got: s.len() });
                }
                VecSeq::new(tau, s.truncated(n_max).into_entries())?
            }
        };
        let handle = ResolventHandle::new(&op, alpha, tau)?;
        Ok(Self { alpha, op, x0, forcing, tau, n_max, handle })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn op(&self) -> &LinOp {
        &self.op
    }

    pub fn x0(&self) -> &DVector<f64> {
        &self.x0
    }

    pub fn forcing(&self) -> &VecSeq {
        &self.forcing
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn horizon(&self) -> usize {
        self.n_max
    }

    /// `g^n = C-nabla^(alpha-1) f^n`.
    fn forcing_term(&self) -> Result<VecSeq> {
        caputo_diff_seq(&self.forcing, self.alpha - 1.0)
    }
}

#[derive(Debug, Clone)]
pub struct FdeSolution {
    pub method: SolveMethod,
    /// `u^0 = x0`, `u^1 = 0`, and the computed values for `n >= 2`.
    pub trajectory: VecSeq,
    /// The computed sequence without the initial-value overrides. For
    /// [`solve_vop`] this is `S^n x0 + tau (S * f)^n`; [`solve_direct`] is
    /// seeded with its first two entries.
    pub family_trajectory: VecSeq,
    /// Residuals of the equation on `family_trajectory`, `n = 2..=N`.
    pub residuals: Vec<(usize, Residual)>,
}

impl FdeSolution {
    fn new(p: &FdeProblem, method: SolveMethod, raw: Vec<DVector<f64>>) -> Result<Self> {
        let family_trajectory = VecSeq::new(p.tau, raw)?;
        let mut overridden = family_trajectory.entries().to_vec();
        overridden[0] = p.x0.clone();
        overridden[1] = DVector::zeros(p.x0.len());
        let trajectory = VecSeq::new(p.tau, overridden)?;
        let residuals = residual_anchored(p, &family_trajectory)?;
        Ok(Self { method, trajectory, family_trajectory, residuals })
    }

    /// Largest relative residual.
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|(_, r)| r.relative()).fold(0.0, f64::max)
    }
}

/// `u^n = S^n x0 + tau sum_{j<=n} S^(n-j) f^j` with `S` the recursive
/// `(alpha, 1)`-family.
pub fn solve_vop(p: &FdeProblem) -> Result<FdeSolution> {
    let family = family_recursive(&p.op, p.alpha, 1.0, p.tau, p.n_max)?;
    let f = p.forcing.entries();
    let raw = (0..=p.n_max)
        .map(|n| {
            let mut u = family.apply(n, &p.x0)?;
            for (j, fj) in f.iter().enumerate().take(n + 1) {
                u += family.apply(n - j, fj)? * p.tau;
            }
            Ok(u)
        })
        .collect::<Result<Vec<_>>>()?;
    FdeSolution::new(p, SolveMethod::Vop, raw)
}

/// Implicit stepping: for `n >= 2` isolate the `j = n` term of the Caputo
/// sum, whose coefficient is `tau k^(2-alpha)(0) / tau^2 = tau^-alpha`, and
/// solve `(tau^-alpha - A) u^n = rhs`. The first two values are taken from
/// the variation-of-parameters formula.
pub fn solve_direct(p: &FdeProblem) -> Result<FdeSolution> {
    let seed = family_recursive(&p.op, p.alpha, 1.0, p.tau, 1)?;
    let f = p.forcing.entries();
    let mut u: Vec<DVector<f64>> = Vec::with_capacity(p.n_max + 1);
    for n in 0..2 {
        let mut v = seed.apply(n, &p.x0)?;
        for (j, fj) in f.iter().enumerate().take(n + 1) {
            v += seed.apply(n - j, fj)? * p.tau;
        }
        u.push(v);
    }

    let tau = p.tau;
    let shift = p.handle.shift();
    let k = kernel_weights(2.0 - p.alpha, tau, p.n_max);
    let g = p.forcing_term()?;
    let d = p.x0.len();
    let w = |u: &[DVector<f64>], j: isize| -> DVector<f64> {
        if j < 0 {
            DVector::zeros(d)
        } else {
            &u[j as usize] - &p.x0
        }
    };
    // Second differences of w = u - x0, kept as the history grows.
    let mut second: Vec<DVector<f64>> = (0..2)
        .map(|j| (w(&u, j) - w(&u, j - 1) * 2.0 + w(&u, j - 2)) / (tau * tau))
        .collect();

    for n in 2..=p.n_max {
        let mut known = DVector::zeros(d);
        for (j, s) in second.iter().enumerate() {
            known.axpy(tau * k[n - j], s, 1.0);
        }
        let ni = n as isize;
        known.axpy(shift, &(w(&u, ni - 2) - w(&u, ni - 1) * 2.0), 1.0);
        let rhs = g.at(ni) - known + &p.x0 * shift;
        let un = p.handle.solve(&rhs)?;
        u.push(un);
        second.push((w(&u, ni) - w(&u, ni - 1) * 2.0 + w(&u, ni - 2)) / (tau * tau));
    }
    FdeSolution::new(p, SolveMethod::Direct, u)
}

/// `C-nabla^alpha v^n - A v^n - C-nabla^(alpha-1) f^n` for `n = 2..=N`, with
/// every sequence extended by zero below `n = 0`.
pub fn residual(p: &FdeProblem, traj: &VecSeq) -> Result<Vec<(usize, Residual)>> {
    check_trajectory(p, traj)?;
    residual_from(p, traj, &caputo_diff_seq(traj, p.alpha)?)
}

/// As [`residual`], but the Caputo difference acts on `v - x0`.
pub fn residual_anchored(p: &FdeProblem, traj: &VecSeq) -> Result<Vec<(usize, Residual)>> {
    check_trajectory(p, traj)?;
    residual_from(p, traj, &caputo_diff_anchored_seq(traj, p.alpha, &p.x0)?)
}

fn check_trajectory(p: &FdeProblem, traj: &VecSeq) -> Result<()> {
    if traj.dim() != p.op.dim() {
        return Err(Error::DimensionMismatch { expected: p.op.dim(), got: traj.dim() });
    }
    if traj.horizon() != p.n_max {
        return Err(Error::LengthMismatch { expected: p.n_max + 1, got: traj.len() });
    }
    Ok(())
}

fn residual_from(p: &FdeProblem, traj: &VecSeq, caputo: &VecSeq) -> Result<Vec<(usize, Residual)>> {
    let g = p.forcing_term()?;
    (2..=p.n_max)
        .map(|n| {
            let (c, gn) = (&caputo.entries()[n], &g.entries()[n]);
            let au = p.op.apply(&traj.entries()[n])?;
            let abs = (c - &au - gn).amax();
            Ok((n, Residual::new(abs, c.amax().max(au.amax()).max(gn.amax()))))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::kernel_seq;
    use crate::operator::laplacian_1d;

    fn scalar_problem(lambda: f64, alpha: f64, forcing: Forcing) -> FdeProblem {
        FdeProblem::new(alpha, LinOp::scalar(lambda), DVector::from_element(1, 1.0), forcing, 0.1, 20).unwrap()
    }

    fn max_rel_diff(a: &VecSeq, b: &VecSeq) -> f64 {
        let scale = a.entries().iter().map(|v| v.amax()).fold(0.0, f64::max);
        let diff = a.entries().iter().zip(b.entries()).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max);
        diff / scale
    }

    #[test]
    fn rejects_invalid_problems() {
        let x0 = DVector::from_element(1, 1.0);
        let a = LinOp::scalar(-1.0);
        assert!(FdeProblem::new(0.5, a.clone(), x0.clone(), Forcing::Zero, 0.1, 10).is_err());
        assert!(FdeProblem::new(2.0, a.clone(), x0.clone(), Forcing::Zero, 0.1, 10).is_err());
        assert!(FdeProblem::new(1.5, a.clone(), DVector::zeros(2), Forcing::Zero, 0.1, 10).is_err());
        // tau^-alpha = 4 hits the spectrum.
        let bad = FdeProblem::new(1.5, LinOp::scalar(4.0), x0, Forcing::Zero, 4.0_f64.powf(-1.0 / 1.5), 10);
        assert!(matches!(bad, Err(Error::NotInResolventSet { .. })));
    }

    #[test]
    fn zero_generator_keeps_initial_value() {
        let p = FdeProblem::new(1.5, LinOp::scalar(0.0), DVector::from_element(1, 2.5), Forcing::Zero, 0.1, 12).unwrap();
        let s = solve_vop(&p).unwrap();
        for v in s.family_trajectory.entries() {
            assert!((v[0] - 2.5).abs() <= 1e-14);
        }
        assert_eq!(s.trajectory.entries()[0][0], 2.5);
        assert_eq!(s.trajectory.entries()[1][0], 0.0);
        let d = solve_direct(&p).unwrap();
        assert!(max_rel_diff(&d.family_trajectory, &s.family_trajectory) <= 1e-14);
        assert!(d.max_residual() == 0.0);
    }

    #[test]
    fn zero_generator_with_unit_forcing() {
        let p = FdeProblem::new(1.5, LinOp::scalar(0.0), DVector::from_element(1, 0.3), Forcing::Constant(1.0), 0.1, 15)
            .unwrap();
        let s = solve_vop(&p).unwrap();
        for (n, v) in s.family_trajectory.entries().iter().enumerate() {
            assert!((v[0] - (0.3 + 0.1 * (n as f64 + 1.0))).abs() <= 1e-14);
        }
    }

    #[test]
    fn leading_coefficient_is_shift() {
        for &(alpha, tau) in &[(1.25, 0.1), (1.5, 0.03), (1.75, 0.5)] {
            let k0 = kernel_seq(2.0 - alpha, tau, 0).unwrap()[0];
            let lhs: f64 = tau * k0 / (tau * tau);
            let shift = tau.powf(-alpha);
            assert!((lhs - shift).abs() <= 4.0 * f64::EPSILON * shift);
        }
    }

    #[test]
    fn solvers_agree_on_scalar_problem() {
        for forcing in [Forcing::Zero, Forcing::Constant(1.0)] {
            let p = scalar_problem(-1.0, 1.5, forcing);
            let v = solve_vop(&p).unwrap();
            let d = solve_direct(&p).unwrap();
            assert!(max_rel_diff(&v.family_trajectory, &d.family_trajectory) <= 1e-10);
            assert!(v.max_residual() <= 1e-12, "{}", v.max_residual());
            assert!(d.max_residual() <= 1e-12, "{}", d.max_residual());
        }
    }

    #[test]
    fn zero_extension_residual_is_kernel_value() {
        let p = scalar_problem(-1.0, 1.5, Forcing::Zero);
        let v = solve_vop(&p).unwrap();
        let k = kernel_weights(-0.5, 0.1, 20);
        for (n, r) in residual(&p, &v.family_trajectory).unwrap() {
            assert!((r.abs - k[n].abs()).abs() <= 1e-11 * k[n].abs(), "n={n}: {} vs {}", r.abs, k[n]);
        }
        assert!((k[2] - (-3.952847075210474)).abs() < 1e-12);
    }

    #[test]
    fn laplacian_problem_with_forcing() {
        let lap = laplacian_1d(16, 1.0 / 16.0).unwrap();
        let x0 = DVector::from_fn(16, |i, _| ((i + 1) as f64 * std::f64::consts::PI / 17.0).sin());
        let p = FdeProblem::new(1.75, lap, x0, Forcing::Constant(1.0), 0.05, 30).unwrap();
        let v = solve_vop(&p).unwrap();
        let d = solve_direct(&p).unwrap();
        assert!(max_rel_diff(&v.family_trajectory, &d.family_trajectory) <= 1e-10);
        assert!(d.max_residual() <= 1e-12);
    }

    #[test]
    fn forcing_parsing() {
        assert_eq!("zero".parse::<Forcing>().unwrap(), Forcing::Zero);
        assert_eq!("constant:2.5".parse::<Forcing>().unwrap(), Forcing::Constant(2.5));
        assert!("constant:x".parse::<Forcing>().is_err());
        assert!("ones".parse::<Forcing>().is_err());
    }
}
