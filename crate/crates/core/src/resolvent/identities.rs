use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::ResolventFamily;
use crate::error::{check_positive, Error, Result};
use crate::kernels::kernel_seq;
use crate::operator::LinOp;

/// An absolute residual together with the size of the terms it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub abs: f64,
    pub scale: f64,
}

impl Residual {
    pub fn new(abs: f64, scale: f64) -> Self {
        Self { abs, scale }
    }

    /// `abs / scale`, with `0/0 = 0`.
    pub fn relative(&self) -> f64 {
        if self.abs == 0.0 {
            0.0
        } else {
            self.abs / self.scale
        }
    }
}

/// `c^n = sum_{j<=n} k^alpha(n-j) S^j` for every `n`.
fn kernel_convolution(f: &ResolventFamily) -> Result<Vec<LinOp>> {
    let ka = kernel_seq(f.alpha(), f.tau(), f.horizon())?;
    let mut out = Vec::with_capacity(f.horizon() + 1);
    for n in 0..=f.horizon() {
        let mut acc = f.generator().zeros_like();
        for j in 0..=n {
            acc = acc.add_scaled(ka[n - j], f.get(j))?;
        }
        out.push(acc);
    }
    Ok(out)
}

pub(crate) fn resolvent_equation_residuals(f: &ResolventFamily) -> Result<Vec<Residual>> {
    let kb = kernel_seq(f.beta(), f.tau(), f.horizon())?;
    let conv = kernel_convolution(f)?;
    let a = f.generator();
    let identity = a.identity_like();
    conv.iter()
        .enumerate()
        .map(|(n, c)| {
            let source = identity.scaled(kb[n]);
            let memory = a.compose(c)?.scaled(f.tau());
            let diff = f.get(n).add_scaled(-1.0, &source)?.add_scaled(-1.0, &memory)?;
            let scale = f.get(n).norm_inf().max(source.norm_inf()).max(memory.norm_inf());
            Ok(Residual::new(diff.norm_inf(), scale))
        })
        .collect()
}

pub(crate) fn commutation_residuals(f: &ResolventFamily) -> Result<Vec<Residual>> {
    let a = f.generator();
    f.ops()
        .iter()
        .map(|s| {
            let diff = a.compose(s)?.add_scaled(-1.0, &s.compose(a)?)?;
            Ok(Residual::new(diff.norm_inf(), a.norm_inf() * s.norm_inf()))
        })
        .collect()
}

/// `S^m c^n - c^m S^n - k^beta(m) c^n + k^beta(n) c^m` with `c = k^alpha * S`.
///
/// The scale is the largest norm among the four terms.
pub fn check_functional_equation(f: &ResolventFamily, m: usize, n: usize) -> Result<Residual> {
    let horizon = f.horizon();
    if m > horizon || n > horizon {
        return Err(Error::domain(format!("indices ({m}, {n}) exceed family horizon {horizon}")));
    }
    let conv = kernel_convolution(f)?;
    let kb = kernel_seq(f.beta(), f.tau(), horizon)?;
    functional_residual(f, &conv, kb.values(), m, n)
}

/// Residuals of the functional equation for every pair `m, n <= max_index`.
pub fn functional_equation_grid(f: &ResolventFamily, max_index: usize) -> Result<Vec<(usize, usize, Residual)>> {
    let horizon = f.horizon();
    if max_index > horizon {
        return Err(Error::domain(format!("index {max_index} exceeds family horizon {horizon}")));
    }
    let conv = kernel_convolution(f)?;
    let kb = kernel_seq(f.beta(), f.tau(), horizon)?;
    let mut out = Vec::with_capacity((max_index + 1) * (max_index + 1));
    for m in 0..=max_index {
        for n in 0..=max_index {
            out.push((m, n, functional_residual(f, &conv, kb.values(), m, n)?));
        }
    }
    Ok(out)
}

fn functional_residual(f: &ResolventFamily, conv: &[LinOp], kb: &[f64], m: usize, n: usize) -> Result<Residual> {
    let t1 = f.get(m).compose(&conv[n])?;
    let t2 = conv[m].compose(f.get(n))?;
    let t3 = conv[n].scaled(kb[m]);
    let t4 = conv[m].scaled(kb[n]);
    let total = t1.add_scaled(-1.0, &t2)?.add_scaled(-1.0, &t3)?.add_scaled(1.0, &t4)?;
    let scale = [&t1, &t2, &t3, &t4].iter().map(|t| t.norm_inf()).fold(0.0, f64::max);
    Ok(Residual::new(total.norm_inf(), scale))
}

/// Whether the truncated tail `sum_{n>N} z^-n S^n x` could be bounded.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum TailStatus {
    Certified { bound: f64 },
    Inconclusive { reason: String },
}

/// Partial transform `sum_{n<=N} z^-n S^n x` against its closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZTransformCheck {
    pub z: f64,
    pub horizon: usize,
    pub partial: Vec<f64>,
    pub closed: Vec<f64>,
    /// `||partial - closed|| / ||closed||` in the max norm.
    pub residual: f64,
    pub tail: TailStatus,
}

impl ZTransformCheck {
    fn new(z: f64, horizon: usize, partial: DVector<f64>, closed: DVector<f64>, tail: TailStatus) -> Self {
        let norm = closed.amax();
        let diff = (&partial - &closed).amax();
        let residual = if diff == 0.0 { 0.0 } else { diff / norm };
        Self { z, horizon, partial: partial.iter().copied().collect(), closed: closed.iter().copied().collect(), residual, tail }
    }

    /// Tail bound relative to the closed form, when certified.
    pub fn relative_tail_bound(&self) -> Option<f64> {
        let norm = self.closed.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        match self.tail {
            TailStatus::Certified { bound } => Some(bound / norm),
            TailStatus::Inconclusive { .. } => None,
        }
    }

    /// The tail is certified below `limit` (relative) and the partial sum is
    /// within that tail of the closed form, up to rounding.
    pub fn passed(&self, limit: f64) -> bool {
        match self.relative_tail_bound() {
            Some(b) => b <= limit && self.residual <= b + 1e-13,
            None => false,
        }
    }

    pub fn is_conclusive(&self) -> bool {
        matches!(self.tail, TailStatus::Certified { .. })
    }
}

fn check_z(z: f64) -> Result<()> {
    if z.is_finite() && z > 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("z must be a real number > 1, got {z}")))
    }
}

/// `sum_{n<=N} z^-n k^alpha(n)` against `tau^(alpha-1) z^alpha / (z-1)^alpha`.
///
/// For `n > N` the kernel ratio `(alpha+n)/(n+1)` is monotone, so the tail is
/// bounded by a geometric series started at `k^alpha(N+1)`.
pub fn kernel_ztransform(alpha: f64, tau: f64, z: f64, n_max: usize) -> Result<ZTransformCheck> {
    check_z(z)?;
    let k = kernel_seq(alpha, tau, n_max + 1)?;
    let partial: f64 = (0..=n_max).rev().map(|n| k[n] * z.powi(-(n as i32))).sum();
    let closed = tau.powf(alpha - 1.0) * (z / (z - 1.0)).powf(alpha);
    let ratio = if alpha <= 1.0 { 1.0 } else { (alpha + n_max as f64 + 1.0) / (n_max as f64 + 2.0) };
    let tail = if ratio < z {
        let first = k[n_max + 1] * z.powf(-(n_max as f64 + 1.0));
        TailStatus::Certified { bound: first / (1.0 - ratio / z) }
    } else {
        TailStatus::Inconclusive { reason: format!("kernel ratio {ratio} is not below z = {z}") }
    };
    Ok(ZTransformCheck::new(z, n_max, DVector::from_element(1, partial), DVector::from_element(1, closed), tail))
}

/// `sum_{n<=N} z^-n S^n x` against `(1/tau) w^(alpha-beta) (w^alpha - A)^-1 x`,
/// `w = (z-1)/(tau z)`.
///
/// The tail bound extrapolates the growth of `||S^n||` over the last half of
/// the horizon; it is a heuristic, and reported as inconclusive when the
/// observed growth rate is not below `z` or the horizon is too short.
pub fn check_ztransform(f: &ResolventFamily, z: f64, x: &DVector<f64>) -> Result<ZTransformCheck> {
    check_z(z)?;
    let a = f.generator();
    if x.len() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: x.len() });
    }
    let n_max = f.horizon();
    let mut partial = DVector::zeros(a.dim());
    for n in (0..=n_max).rev() {
        partial += f.apply(n, x)? * z.powi(-(n as i32));
    }

    let (alpha, beta, tau) = (f.alpha(), f.beta(), f.tau());
    check_positive("tau", tau)?;
    let w = (z - 1.0) / (tau * z);
    let wa = w.powf(alpha);
    let solved = match a.diagonal_entries() {
        Some(d) => DVector::from_iterator(d.len(), d.iter().zip(x.iter()).map(|(l, xi)| xi / (wa - l))),
        None => (DMatrix::identity(a.dim(), a.dim()) * wa - a.to_dense())
            .lu()
            .solve(x)
            .ok_or(Error::NotInResolventSet { shift: wa, condition: f64::INFINITY })?,
    };
    let closed = solved * (w.powf(alpha - beta) / tau);

    let norms: Vec<f64> = f.ops().iter().map(LinOp::norm_inf).collect();
    let tail = family_tail(&norms, z, x.amax());
    Ok(ZTransformCheck::new(z, n_max, partial, closed, tail))
}

fn family_tail(norms: &[f64], z: f64, x_norm: f64) -> TailStatus {
    let n_max = norms.len() - 1;
    if n_max < 8 {
        return TailStatus::Inconclusive { reason: format!("horizon {n_max} too short to estimate growth") };
    }
    let (q2, q3) = (n_max / 2, 3 * n_max / 4);
    let early = norms[q2..q3].iter().copied().fold(0.0, f64::max);
    let late = norms[q3..].iter().copied().fold(0.0, f64::max);
    let lead = late * x_norm * z.powf(-(n_max as f64));
    if late <= early || early == 0.0 {
        return TailStatus::Certified { bound: lead / (z - 1.0) };
    }
    let rate = (late / early).powf(1.0 / (q3 - q2) as f64);
    if rate < z {
        TailStatus::Certified { bound: lead * (rate / z) / (1.0 - rate / z) }
    } else {
        TailStatus::Inconclusive { reason: format!("observed growth rate {rate} is not below z = {z}") }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::laplacian_1d;
    use crate::resolvent::{coeff_table, family_explicit, family_recursive};

    #[test]
    fn recursive_family_satisfies_its_equation() {
        let lap = laplacian_1d(8, 1.0 / 8.0).unwrap();
        let f = family_recursive(&lap, 1.5, 1.0, 0.1, 20).unwrap();
        for r in f.resolvent_equation_residuals().unwrap() {
            assert!(r.relative() <= 1e-12, "{r:?}");
        }
        for r in f.commutation_residuals().unwrap() {
            assert!(r.relative() <= 1e-12, "{r:?}");
        }
    }

    #[test]
    fn explicit_family_satisfies_equation_a_posteriori() {
        let a = LinOp::diagonal(DVector::from_vec(vec![-2.0, 0.5])).unwrap();
        let t = coeff_table(0.6, 1.3, 0.2, 25).unwrap();
        let f = family_explicit(&a, &t, 25).unwrap();
        for r in f.resolvent_equation_residuals().unwrap() {
            assert!(r.relative() <= 1e-13, "{r:?}");
        }
    }

    #[test]
    fn functional_equation_trivial_cases() {
        let f = family_recursive(&LinOp::scalar(-1.0), 1.5, 1.0, 0.1, 6).unwrap();
        for n in 0..=6 {
            assert_eq!(check_functional_equation(&f, n, n).unwrap().abs, 0.0);
        }
        assert!(check_functional_equation(&f, 1, 0).unwrap().relative() <= 1e-12);
        assert!(check_functional_equation(&f, 7, 0).is_err());
    }

    #[test]
    fn functional_equation_on_laplacian() {
        let lap = laplacian_1d(8, 1.0 / 8.0).unwrap();
        let f = family_recursive(&lap, 1.5, 1.0, 0.1, 16).unwrap();
        for (m, n, r) in functional_equation_grid(&f, 16).unwrap() {
            assert!(r.relative() <= 1e-9, "({m},{n}): {r:?}");
        }
    }

    #[test]
    fn functional_equation_detects_perturbation() {
        let f = family_recursive(&LinOp::scalar(-1.0), 1.5, 1.0, 0.1, 6).unwrap();
        let mut ops = f.ops().to_vec();
        ops[2] = ops[2].scaled(1.01);
        let g = ResolventFamily::new(1.5, 1.0, 0.1, LinOp::scalar(-1.0), f.construction(), ops);
        assert!(check_functional_equation(&g, 2, 1).unwrap().relative() > 1e-4);
    }

    #[test]
    fn kernel_transform() {
        let c = kernel_ztransform(0.5, 0.1, 2.0, 200).unwrap();
        assert!(c.passed(1e-6), "{c:?}");
        assert!(c.relative_tail_bound().unwrap() < 1e-50);
        // Short horizon: the tail dominates and is still bounded correctly.
        let c = kernel_ztransform(1.7, 0.3, 1.5, 10).unwrap();
        let diff = (c.closed[0] - c.partial[0]).abs();
        match c.tail {
            TailStatus::Certified { bound } => assert!(diff <= bound && bound < 10.0 * diff),
            _ => panic!("expected certified tail"),
        }
        assert!(!kernel_ztransform(3.0, 0.1, 1.001, 5).unwrap().is_conclusive());
        assert!(kernel_ztransform(0.5, 0.1, 0.5, 5).is_err());
    }

    #[test]
    fn zero_generator_transform_is_kernel_transform() {
        let f = family_recursive(&LinOp::scalar(0.0), 1.2, 0.7, 0.1, 120).unwrap();
        let c = check_ztransform(&f, 2.0, &DVector::from_element(1, 1.0)).unwrap();
        let k = kernel_ztransform(0.7, 0.1, 2.0, 120).unwrap();
        assert!((c.closed[0] - k.closed[0]).abs() <= 1e-13 * k.closed[0]);
        assert!((c.partial[0] - k.partial[0]).abs() <= 1e-13 * k.closed[0]);
    }

    #[test]
    fn scalar_family_transform() {
        let f = family_recursive(&LinOp::scalar(-1.0), 1.5, 1.0, 0.1, 200).unwrap();
        let c = check_ztransform(&f, 2.0, &DVector::from_element(1, 1.0)).unwrap();
        assert!(c.passed(1e-6), "{c:?}");
        assert!(c.residual <= 1e-12);
    }

    #[test]
    fn growing_family_is_inconclusive() {
        let f = family_recursive(&LinOp::scalar(5.0), 1.0, 1.0, 0.1, 40).unwrap();
        let c = check_ztransform(&f, 1.5, &DVector::from_element(1, 1.0)).unwrap();
        assert!(!c.is_conclusive() && !c.passed(1.0));
    }
}
