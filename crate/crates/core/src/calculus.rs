//! Backward differences, fractional sums and Caputo fractional backward
//! differences on vector-valued sequences.
//!
//! Every sequence reads as the zero vector at negative indices. With that
//! convention `(nabla v)^0 = v^0 / tau`, and a Caputo difference of a
//! constant sequence does not vanish; the `*_anchored` variants subtract an
//! initial datum first, which is what a Caputo difference of an initial
//! value problem needs.

use nalgebra::DVector;

use crate::error::{check_positive, Error, Result};
use crate::kernels::kernel_weights;

/// A sequence `v^0, ..., v^N` of vectors in `R^d` on the grid `t_n = n tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct VecSeq {
    tau: f64,
    dim: usize,
    entries: Vec<DVector<f64>>,
}

impl VecSeq {
    pub fn new(tau: f64, entries: Vec<DVector<f64>>) -> Result<Self> {
        check_positive("tau", tau)?;
        let dim = entries
            .first()
            .map(|v| v.len())
            .ok_or_else(|| Error::domain("a sequence needs at least one entry"))?;
        if dim == 0 {
            return Err(Error::domain("sequence entries must have dimension >= 1"));
        }
        if let Some(bad) = entries.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
        }
        Ok(Self { tau, dim, entries })
    }

    /// A one-dimensional sequence from plain values.
    pub fn scalar(tau: f64, values: &[f64]) -> Result<Self> {
        Self::new(tau, values.iter().map(|&x| DVector::from_element(1, x)).collect())
    }

    pub fn zeros(tau: f64, dim: usize, n_max: usize) -> Result<Self> {
        Self::new(tau, vec![DVector::zeros(dim); n_max + 1])
    }

    pub fn constant(tau: f64, value: DVector<f64>, n_max: usize) -> Result<Self> {
        Self::new(tau, vec![value; n_max + 1])
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[DVector<f64>] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<DVector<f64>> {
        self.entries
    }

    /// `v^j`, or `None` for a negative index (zero by convention).
    pub fn get(&self, j: isize) -> Option<&DVector<f64>> {
        usize::try_from(j).ok().and_then(|j| self.entries.get(j))
    }

    /// `v^j` with zero-extension below 0.
    pub fn at(&self, j: isize) -> DVector<f64> {
        match self.get(j) {
            Some(v) => v.clone(),
            None if j < 0 => DVector::zeros(self.dim),
            None => panic!("index {j} beyond horizon {}", self.horizon()),
        }
    }

    /// First component of each entry; convenient for scalar sequences.
    pub fn first_components(&self) -> Vec<f64> {
        self.entries.iter().map(|v| v[0]).collect()
    }

    /// `v^n - anchor` for every `n`.
    pub fn shifted(&self, anchor: &DVector<f64>) -> Result<Self> {
        self.check_dim(anchor.len())?;
        Ok(Self {
            tau: self.tau,
            dim: self.dim,
            entries: self.entries.iter().map(|v| v - anchor).collect(),
        })
    }

    /// Applies `f` entrywise, keeping `tau`.
    pub fn map(&self, f: impl Fn(&DVector<f64>) -> DVector<f64>) -> Result<Self> {
        Self::new(self.tau, self.entries.iter().map(f).collect())
    }

    pub fn truncated(&self, n_max: usize) -> Self {
        Self {
            tau: self.tau,
            dim: self.dim,
            entries: self.entries[..=n_max.min(self.horizon())].to_vec(),
        }
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim, got: d })
        }
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n <= self.horizon() {
            Ok(())
        } else {
            Err(Error::domain(format!("index {n} beyond stored horizon {}", self.horizon())))
        }
    }
}

fn binomial(m: u32, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * f64::from(m - i) / f64::from(i + 1))
}

/// `(nabla_tau^m v)^n = tau^-m sum_{j=0}^m C(m,j) (-1)^j v^{n-j}`.
pub fn backward_diff(v: &VecSeq, m: u32, n: usize) -> Result<DVector<f64>> {
    v.check_index(n)?;
    Ok(backward_diff_unchecked(v, m, n))
}

fn backward_diff_unchecked(v: &VecSeq, m: u32, n: usize) -> DVector<f64> {
    let mut out = DVector::zeros(v.dim);
    for j in 0..=m {
        if let Some(x) = v.get(n as isize - j as isize) {
            let c = binomial(m, j) * if j % 2 == 0 { 1.0 } else { -1.0 };
            out.axpy(c, x, 1.0);
        }
    }
    out / v.tau.powi(m as i32)
}

/// The whole sequence `nabla_tau^m v` on `0..=N`.
pub fn backward_diff_seq(v: &VecSeq, m: u32) -> VecSeq {
    VecSeq {
        tau: v.tau,
        dim: v.dim,
        entries: (0..v.len()).map(|n| backward_diff_unchecked(v, m, n)).collect(),
    }
}

/// Fractional sum `(nabla^-alpha v)^n = tau sum_{j<=n} k_tau^alpha(n-j) v^j`.
pub fn frac_sum(v: &VecSeq, alpha: f64) -> Result<VecSeq> {
    check_positive("alpha", alpha)?;
    let k = kernel_weights(alpha, v.tau, v.horizon());
    let entries = (0..v.len())
        .map(|n| {
            let mut acc = DVector::zeros(v.dim);
            for j in 0..=n {
                acc.axpy(k[n - j], &v.entries[j], 1.0);
            }
            acc * v.tau
        })
        .collect();
    Ok(VecSeq { tau: v.tau, dim: v.dim, entries })
}

fn integer_order(alpha: f64) -> Option<u32> {
    (alpha.fract() == 0.0 && alpha >= 0.0 && alpha <= f64::from(u32::MAX)).then_some(alpha as u32)
}

/// Caputo fractional backward difference `nabla^-(m-alpha) (nabla^m v)` at `n`,
/// with `m = ceil(alpha)`. Integer orders reduce to `nabla^alpha`.
pub fn caputo_diff(v: &VecSeq, alpha: f64, n: usize) -> Result<DVector<f64>> {
    check_positive("alpha", alpha)?;
    v.check_index(n)?;
    if let Some(m) = integer_order(alpha) {
        return Ok(backward_diff_unchecked(v, m, n));
    }
    let m = alpha.ceil() as u32;
    let k = kernel_weights(f64::from(m) - alpha, v.tau, n);
    let mut acc = DVector::zeros(v.dim);
    for j in 0..=n {
        acc.axpy(k[n - j], &backward_diff_unchecked(v, m, j), 1.0);
    }
    Ok(acc * v.tau)
}

/// [`caputo_diff`] at every index `0..=N`.
pub fn caputo_diff_seq(v: &VecSeq, alpha: f64) -> Result<VecSeq> {
    check_positive("alpha", alpha)?;
    if let Some(m) = integer_order(alpha) {
        return Ok(backward_diff_seq(v, m));
    }
    let m = alpha.ceil() as u32;
    frac_sum(&backward_diff_seq(v, m), f64::from(m) - alpha)
}

/// Caputo difference of `v - anchor`: the history before `t = 0` is taken to
/// be the constant `anchor` instead of zero.
pub fn caputo_diff_anchored(
    v: &VecSeq,
    alpha: f64,
    n: usize,
    anchor: &DVector<f64>,
) -> Result<DVector<f64>> {
    caputo_diff(&v.shifted(anchor)?, alpha, n)
}

pub fn caputo_diff_anchored_seq(v: &VecSeq, alpha: f64, anchor: &DVector<f64>) -> Result<VecSeq> {
    caputo_diff_seq(&v.shifted(anchor)?, alpha)
}
