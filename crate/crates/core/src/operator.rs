//! Finite-dimensional generators and their resolvents
//! `R_tau = tau^-alpha (tau^-alpha - A)^-1`.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, LU};

use crate::error::{check_positive, Error, Result};

/// Condition estimate above which `tau^-alpha` is treated as a spectral point.
pub const CONDITION_LIMIT: f64 = 1e12;

/// A linear operator on `R^d`.
///
/// The scalar and diagonal variants are kept as such through every algebraic
/// operation so that families generated by them stay cheap.
#[derive(Debug, Clone, PartialEq)]
pub enum LinOp {
    /// `value * I_dim`
    Scalar { value: f64, dim: usize },
    Diagonal(DVector<f64>),
    Dense(DMatrix<f64>),
}

impl LinOp {
    /// A one-dimensional scalar operator.
    pub fn scalar(value: f64) -> Self {
        LinOp::Scalar { value, dim: 1 }
    }

    pub fn scalar_identity(value: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("operator dimension must be >= 1"));
        }
        Ok(LinOp::Scalar { value, dim })
    }

    pub fn diagonal(entries: impl Into<DVector<f64>>) -> Result<Self> {
        let d = entries.into();
        if d.is_empty() {
            return Err(Error::domain("operator dimension must be >= 1"));
        }
        Ok(LinOp::Diagonal(d))
    }

    pub fn dense(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::domain(format!("matrix must be square, got {}x{}", m.nrows(), m.ncols())));
        }
        if m.is_empty() {
            return Err(Error::domain("operator dimension must be >= 1"));
        }
        Ok(LinOp::Dense(m))
    }

    pub fn dim(&self) -> usize {
        match self {
            LinOp::Scalar { dim, .. } => *dim,
            LinOp::Diagonal(d) => d.len(),
            LinOp::Dense(m) => m.nrows(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LinOp::Scalar { .. } => "scalar",
            LinOp::Diagonal(_) => "diagonal",
            LinOp::Dense(_) => "dense",
        }
    }

    /// Identity of the same dimension and variant.
    pub fn identity_like(&self) -> Self {
        self.filled_like(1.0)
    }

    pub fn zeros_like(&self) -> Self {
        self.filled_like(0.0)
    }

    fn filled_like(&self, value: f64) -> Self {
        match self {
            LinOp::Scalar { dim, .. } => LinOp::Scalar { value, dim: *dim },
            LinOp::Diagonal(d) => LinOp::Diagonal(DVector::from_element(d.len(), value)),
            LinOp::Dense(m) => LinOp::Dense(DMatrix::identity(m.nrows(), m.nrows()) * value),
        }
    }

    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x.len())?;
        Ok(match self {
            LinOp::Scalar { value, .. } => x * *value,
            LinOp::Diagonal(d) => d.component_mul(x),
            LinOp::Dense(m) => m * x,
        })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            LinOp::Scalar { value, dim } => DMatrix::identity(*dim, *dim) * *value,
            LinOp::Diagonal(d) => DMatrix::from_diagonal(d),
            LinOp::Dense(m) => m.clone(),
        }
    }

    /// Entries of the operator in row-major order.
    pub fn row_major(&self) -> Vec<f64> {
        let m = self.to_dense();
        let mut out = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            out.extend(m.row(i).iter().copied());
        }
        out
    }

    /// Diagonal entries, when the operator is diagonal (scalar or diagonal variant).
    pub fn diagonal_entries(&self) -> Option<DVector<f64>> {
        match self {
            LinOp::Scalar { value, dim } => Some(DVector::from_element(*dim, *value)),
            LinOp::Diagonal(d) => Some(d.clone()),
            LinOp::Dense(_) => None,
        }
    }

    /// `self * other` (apply `other` first).
    pub fn compose(&self, other: &LinOp) -> Result<LinOp> {
        self.check_dim(other.dim())?;
        Ok(match (self, other) {
            (LinOp::Scalar { value: a, dim }, LinOp::Scalar { value: b, .. }) => {
                LinOp::Scalar { value: a * b, dim: *dim }
            }
            (LinOp::Scalar { value, .. }, LinOp::Diagonal(d))
            | (LinOp::Diagonal(d), LinOp::Scalar { value, .. }) => LinOp::Diagonal(d * *value),
            (LinOp::Diagonal(a), LinOp::Diagonal(b)) => LinOp::Diagonal(a.component_mul(b)),
            (LinOp::Scalar { value, .. }, LinOp::Dense(m))
            | (LinOp::Dense(m), LinOp::Scalar { value, .. }) => LinOp::Dense(m * *value),
            (LinOp::Diagonal(d), LinOp::Dense(m)) => {
                let mut out = m.clone();
                for (i, mut row) in out.row_iter_mut().enumerate() {
                    row *= d[i];
                }
                LinOp::Dense(out)
            }
            (LinOp::Dense(m), LinOp::Diagonal(d)) => {
                let mut out = m.clone();
                for (j, mut col) in out.column_iter_mut().enumerate() {
                    col *= d[j];
                }
                LinOp::Dense(out)
            }
            (LinOp::Dense(a), LinOp::Dense(b)) => LinOp::Dense(a * b),
        })
    }

    /// `self + scale * other`.
    pub fn add_scaled(&self, scale: f64, other: &LinOp) -> Result<LinOp> {
        self.check_dim(other.dim())?;
        Ok(match (self, other) {
            (LinOp::Scalar { value: a, dim }, LinOp::Scalar { value: b, .. }) => {
                LinOp::Scalar { value: a + scale * b, dim: *dim }
            }
            (LinOp::Scalar { value, .. }, LinOp::Diagonal(d)) => {
                LinOp::Diagonal(d.map(|x| value + scale * x))
            }
            (LinOp::Diagonal(d), LinOp::Scalar { value, .. }) => {
                LinOp::Diagonal(d.map(|x| x + scale * value))
            }
            (LinOp::Diagonal(a), LinOp::Diagonal(b)) => LinOp::Diagonal(a + b * scale),
            (a, b) => LinOp::Dense(a.to_dense() + b.to_dense() * scale),
        })
    }

    pub fn scaled(&self, s: f64) -> LinOp {
        match self {
            LinOp::Scalar { value, dim } => LinOp::Scalar { value: value * s, dim: *dim },
            LinOp::Diagonal(d) => LinOp::Diagonal(d * s),
            LinOp::Dense(m) => LinOp::Dense(m * s),
        }
    }

    /// Induced infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        match self {
            LinOp::Scalar { value, .. } => value.abs(),
            LinOp::Diagonal(d) => d.amax(),
            LinOp::Dense(m) => m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max),
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        match self {
            LinOp::Scalar { value, .. } => value.abs(),
            LinOp::Diagonal(d) => d.amax(),
            LinOp::Dense(m) => m.amax(),
        }
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim(), got: d })
        }
    }
}

impl Mul<&LinOp> for &LinOp {
    type Output = LinOp;

    /// Panics on dimension mismatch; use [`LinOp::compose`] for a checked product.
    fn mul(self, rhs: &LinOp) -> LinOp {
        self.compose(rhs).expect("operator dimensions must agree")
    }
}

impl Add<&LinOp> for &LinOp {
    type Output = LinOp;

    fn add(self, rhs: &LinOp) -> LinOp {
        self.add_scaled(1.0, rhs).expect("operator dimensions must agree")
    }
}

impl Sub<&LinOp> for &LinOp {
    type Output = LinOp;

    fn sub(self, rhs: &LinOp) -> LinOp {
        self.add_scaled(-1.0, rhs).expect("operator dimensions must agree")
    }
}

impl Mul<f64> for &LinOp {
    type Output = LinOp;

    fn mul(self, rhs: f64) -> LinOp {
        self.scaled(rhs)
    }
}

/// Second-difference operator `(1/h^2) [1, -2, 1]` with homogeneous
/// Dirichlet boundaries, as a dense `d x d` matrix.
pub fn laplacian_1d(d: usize, h: f64) -> Result<LinOp> {
    if d < 2 {
        return Err(Error::domain(format!("laplacian needs d >= 2, got {d}")));
    }
    check_positive("h", h)?;
    let inv_h2 = 1.0 / (h * h);
    let m = DMatrix::from_fn(d, d, |i, j| match i.abs_diff(j) {
        0 => -2.0 * inv_h2,
        1 => inv_h2,
        _ => 0.0,
    });
    LinOp::dense(m)
}

enum Factor {
    /// Reciprocals of `shift - lambda_i`.
    Diagonal(DVector<f64>),
    Dense(LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

/// `tau^-alpha I - A`, factored once and reused for every solve.
pub struct ResolventHandle {
    source: LinOp,
    alpha: f64,
    tau: f64,
    shift: f64,
    condition: f64,
    factor: Factor,
}

impl fmt::Debug for ResolventHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ResolventHandle")
            .field("kind", &self.source.kind())
            .field("dim", &self.source.dim())
            .field("alpha", &self.alpha)
            .field("tau", &self.tau)
            .field("shift", &self.shift)
            .field("condition", &self.condition)
            .finish()
    }
}

impl ResolventHandle {
    /// Factors `tau^-alpha - A`.
    ///
    /// The condition estimate is `(tau^-alpha + ||A||) ||(tau^-alpha - A)^-1||`
    /// in the 1-norm, which bounds the usual condition number from above and
    /// also flags a scalar shift that nearly hits the spectrum.
    pub fn new(source: &LinOp, alpha: f64, tau: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("tau", tau)?;
        let shift = tau.powf(-alpha);
        let singular = || Error::NotInResolventSet { shift, condition: f64::INFINITY };

        let (factor, inv_norm, a_norm) = match source {
            LinOp::Scalar { .. } | LinOp::Diagonal(_) => {
                let d = source.diagonal_entries().expect("diagonal variant");
                if d.iter().any(|&l| shift - l == 0.0) {
                    return Err(singular());
                }
                let recip = d.map(|l| 1.0 / (shift - l));
                let inv_norm = recip.amax();
                (Factor::Diagonal(recip), inv_norm, d.amax())
            }
            LinOp::Dense(a) => {
                let n = a.nrows();
                let shifted = DMatrix::identity(n, n) * shift - a;
                let lu = shifted.lu();
                let inverse = lu.solve(&DMatrix::identity(n, n)).ok_or_else(singular)?;
                let one_norm = |m: &DMatrix<f64>| {
                    m.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
                };
                (Factor::Dense(lu), one_norm(&inverse), one_norm(a))
            }
        };
        let condition = (shift + a_norm) * inv_norm;
        if !condition.is_finite() || condition > CONDITION_LIMIT {
            return Err(Error::NotInResolventSet { shift, condition });
        }
        Ok(Self { source: source.clone(), alpha, tau, shift, condition, factor })
    }

    pub fn source(&self) -> &LinOp {
        &self.source
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `tau^-alpha`.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// `(tau^-alpha - A)^-1 x`.
    pub fn solve(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.source.check_dim(x.len())?;
        Ok(match &self.factor {
            Factor::Diagonal(r) => r.component_mul(x),
            Factor::Dense(lu) => lu.solve(x).expect("factorization checked at construction"),
        })
    }

    /// `R_tau x = tau^-alpha (tau^-alpha - A)^-1 x`, by a linear solve.
    pub fn resolvent_apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.solve(x)? * self.shift)
    }

    /// `R_tau B` for an operator `B`, keeping the cheapest variant.
    pub fn resolvent_apply_op(&self, b: &LinOp) -> Result<LinOp> {
        self.source.check_dim(b.dim())?;
        Ok(match (&self.factor, &self.source) {
            (Factor::Diagonal(r), LinOp::Scalar { .. }) => {
                LinOp::Scalar { value: r[0] * self.shift, dim: self.source.dim() }.compose(b)?
            }
            (Factor::Diagonal(r), _) => LinOp::Diagonal(r * self.shift).compose(b)?,
            (Factor::Dense(lu), _) => {
                let rhs = b.to_dense();
                LinOp::Dense(lu.solve(&rhs).expect("factorization checked at construction") * self.shift)
            }
        })
    }

    /// `R_tau` itself as an operator (computed column by column from solves).
    pub fn resolvent_op(&self) -> LinOp {
        self.resolvent_apply_op(&self.source.identity_like())
            .expect("identity has matching dimension")
    }
}

pub fn resolvent_apply(h: &ResolventHandle, x: &DVector<f64>) -> Result<DVector<f64>> {
    h.resolvent_apply(x)
}

/// Reads a square matrix from text: one row per line, whitespace-separated
/// reals; blank lines and lines starting with `#` are skipped.
pub fn load_matrix_file(path: impl AsRef<Path>) -> Result<LinOp> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text)
}

pub fn parse_matrix(text: &str) -> Result<LinOp> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {tok:?}: {e}", lineno + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse("matrix file has no rows".into()));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::Parse(format!("expected {n} columns per row, found a row with {}", bad.len())));
    }
    LinOp::dense(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// How an operator was specified, e.g. `scalar:-1`, `diag:-1,-2`,
/// `laplacian:32:0.03125` or `file:path/to/matrix.txt`.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorDescriptor {
    Scalar { value: f64, dim: usize },
    Diagonal(Vec<f64>),
    Laplacian { dim: usize, h: f64 },
    File(PathBuf),
}

impl OperatorDescriptor {
    pub fn build(&self) -> Result<LinOp> {
        match self {
            OperatorDescriptor::Scalar { value, dim } => LinOp::scalar_identity(*value, *dim),
            OperatorDescriptor::Diagonal(d) => LinOp::diagonal(DVector::from_vec(d.clone())),
            OperatorDescriptor::Laplacian { dim, h } => laplacian_1d(*dim, *h),
            OperatorDescriptor::File(p) => load_matrix_file(p),
        }
    }
}

impl FromStr for OperatorDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse(format!("operator {s:?}: {msg}"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("expected a real number"));
        let int = |t: &str| t.trim().parse::<usize>().map_err(|_| bad("expected a positive integer"));
        let (kind, rest) = s.split_once(':').ok_or_else(|| bad("expected <kind>:<args>"))?;
        let parts: Vec<&str> = rest.split(':').collect();
        match (kind.trim(), parts.as_slice()) {
            ("scalar", [v]) => Ok(Self::Scalar { value: num(v)?, dim: 1 }),
            ("scalar", [v, d]) => Ok(Self::Scalar { value: num(v)?, dim: int(d)? }),
            ("diag", [list]) => {
                let d = list.split(',').map(num).collect::<Result<Vec<_>>>()?;
                Ok(Self::Diagonal(d))
            }
            ("laplacian", [d, h]) => Ok(Self::Laplacian { dim: int(d)?, h: num(h)? }),
            ("file", [_, ..]) => Ok(Self::File(PathBuf::from(rest))),
            _ => Err(bad("unknown form; use scalar:v[:d], diag:a,b,..., laplacian:d:h or file:path")),
        }
    }
}

impl fmt::Display for OperatorDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorDescriptor::Scalar { value, dim: 1 } => write!(f, "scalar:{value}"),
            OperatorDescriptor::Scalar { value, dim } => write!(f, "scalar:{value}:{dim}"),
            OperatorDescriptor::Diagonal(d) => {
                let items: Vec<String> = d.iter().map(|x| x.to_string()).collect();
                write!(f, "diag:{}", items.join(","))
            }
            OperatorDescriptor::Laplacian { dim, h } => write!(f, "laplacian:{dim}:{h}"),
            OperatorDescriptor::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}
