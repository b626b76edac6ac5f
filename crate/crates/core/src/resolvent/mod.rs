//! Discrete `(alpha, beta)`-resolvent families: three constructions and the
//! identities they satisfy.

mod coeffs;
mod construct;
mod identities;
mod mittag;
mod subordination;

use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::operator::LinOp;

pub use coeffs::{coeff_table, row_sum_residuals, CoeffTable};
pub use construct::{family_explicit, family_recursive, family_series};
pub use identities::{
    check_functional_equation, check_ztransform, functional_equation_grid, kernel_ztransform, Residual,
    TailStatus, ZTransformCheck,
};
pub use mittag::{compare_mittag_leffler, ml_profile, MlComparison, MlRow};
pub use subordination::{subordinate_exponential, subordinate_exponential_with};

/// How a family was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    /// `S^n = sum_l a_{n,l} R_tau^l`.
    Explicit,
    /// Step-by-step solve of the resolvent equation.
    Recursive,
    /// `S^n = sum_j k^(alpha j + beta)(n) A^j`.
    Series,
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Construction::Explicit => "explicit",
            Construction::Recursive => "recursive",
            Construction::Series => "series",
        })
    }
}

/// `S^0, ..., S^N` generated by `A`, stored in the variant of `A`.
#[derive(Debug, Clone)]
pub struct ResolventFamily {
    alpha: f64,
    beta: f64,
    tau: f64,
    generator: LinOp,
    construction: Construction,
    ops: Vec<LinOp>,
}

impl ResolventFamily {
    pub(crate) fn new(
        alpha: f64,
        beta: f64,
        tau: f64,
        generator: LinOp,
        construction: Construction,
        ops: Vec<LinOp>,
    ) -> Self {
        Self { alpha, beta, tau, generator, construction, ops }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn generator(&self) -> &LinOp {
        &self.generator
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn horizon(&self) -> usize {
        self.ops.len() - 1
    }

    pub fn ops(&self) -> &[LinOp] {
        &self.ops
    }

    pub fn get(&self, n: usize) -> &LinOp {
        &self.ops[n]
    }

    /// `S^n x`.
    pub fn apply(&self, n: usize, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.ops[n].apply(x)
    }

    /// Largest entry magnitude over the whole family.
    pub fn scale(&self) -> f64 {
        self.ops.iter().map(LinOp::max_abs).fold(0.0, f64::max)
    }

    /// `max_n ||S^n - T^n||_max / max_n ||S^n||_max` over the common horizon.
    ///
    /// Individual entries of a decaying family pass through zero, so entries
    /// are compared against the size of the family rather than one by one.
    pub fn relative_difference(&self, other: &ResolventFamily) -> f64 {
        let n = self.horizon().min(other.horizon());
        let mut diff = 0.0_f64;
        for (a, b) in self.ops.iter().zip(&other.ops).take(n + 1) {
            diff = diff.max((&a.to_dense() - &b.to_dense()).amax());
        }
        let scale = self.scale().max(other.scale());
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }

    /// Per-step residuals of `S^n = k^beta(n) + tau A sum_{j<=n} k^alpha(n-j) S^j`.
    pub fn resolvent_equation_residuals(&self) -> Result<Vec<Residual>> {
        identities::resolvent_equation_residuals(self)
    }

    /// Per-step `||A S^n - S^n A|| / (||A|| ||S^n||)`.
    pub fn commutation_residuals(&self) -> Result<Vec<Residual>> {
        identities::commutation_residuals(self)
    }
}
