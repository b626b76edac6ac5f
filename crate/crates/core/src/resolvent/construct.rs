use nalgebra::{DMatrix, DVector};

use super::coeffs::CoeffTable;
use super::{Construction, ResolventFamily};
use crate::error::{check_positive, Error, Result};
use crate::kernels::{kernel_seq, kernel_weights};
use crate::operator::{LinOp, ResolventHandle};
use crate::precise::{mp, to_f64, zero, Mp, MpLu, MpMatrix};

/// Upper limit on series terms before giving up.
const SERIES_MAX_TERMS: usize = 100_000;

/// `S^n = sum_{l=1}^{n+1} a_{n,l} R_tau^l`.
///
/// The powers `R_tau^l` come from repeated solves against one factorization
/// of `tau^-alpha - A`, carried out together with the sums in the precision of
/// the table (raised further when `R_tau` itself is expanding).
pub fn family_explicit(a: &LinOp, table: &CoeffTable, n_max: usize) -> Result<ResolventFamily> {
    if n_max > table.horizon() {
        return Err(Error::LengthMismatch { expected: n_max, got: table.horizon() });
    }
    let (alpha, beta, tau) = (table.alpha(), table.beta(), table.tau());
    let handle = ResolventHandle::new(a, alpha, tau)?;
    let r_norm = handle.resolvent_op().norm_inf();
    let extra = (n_max as f64 + 1.0) * r_norm.max(1.0).log2() + handle.condition().log2().max(0.0);
    let table = table.at_least(table.precision() + extra.ceil() as usize);
    let bits = table.precision();
    let scale = table.scale();
    let shift = mp(handle.shift(), bits);

    let ops = match a {
        LinOp::Scalar { .. } | LinOp::Diagonal(_) => {
            let lambdas = a.diagonal_entries().expect("diagonal variant");
            let columns: Vec<Vec<f64>> = lambdas
                .iter()
                .map(|&lambda| {
                    let r = &shift / (&shift - mp(lambda, bits));
                    let mut powers = Vec::with_capacity(n_max + 1);
                    powers.push(r.clone());
                    for l in 1..=n_max {
                        let next = &powers[l - 1] * &r;
                        powers.push(next);
                    }
                    (0..=n_max).map(|n| to_f64(&combine(table.exact_row(n), &powers, bits)) * scale).collect()
                })
                .collect();
            (0..=n_max)
                .map(|n| match a {
                    LinOp::Scalar { dim, .. } => LinOp::Scalar { value: columns[0][n], dim: *dim },
                    _ => LinOp::Diagonal(DVector::from_iterator(columns.len(), columns.iter().map(|c| c[n]))),
                })
                .collect()
        }
        LinOp::Dense(m) => {
            let d = m.nrows();
            let shifted = MpMatrix::from_f64(d, |i, j| (if i == j { handle.shift() } else { 0.0 }) - m[(i, j)], bits);
            let lu = MpLu::new(shifted).ok_or(Error::NotInResolventSet {
                shift: handle.shift(),
                condition: f64::INFINITY,
            })?;
            let mut powers: Vec<MpMatrix> = Vec::with_capacity(n_max + 1);
            let mut current = MpMatrix::identity(d, bits);
            for _ in 0..=n_max {
                let mut next = lu.solve(&current);
                for v in next.data.iter_mut() {
                    *v = &*v * &shift;
                }
                powers.push(next.clone());
                current = next;
            }
            (0..=n_max)
                .map(|n| {
                    let row = table.exact_row(n);
                    let entries: Vec<f64> = (0..d * d)
                        .map(|k| {
                            let mut acc = zero(bits);
                            for (coef, p) in row.iter().zip(&powers) {
                                acc += coef * &p.data[k];
                            }
                            to_f64(&acc) * scale
                        })
                        .collect();
                    LinOp::Dense(DMatrix::from_row_slice(d, d, &entries))
                })
                .collect()
        }
    };
    Ok(ResolventFamily::new(alpha, beta, tau, a.clone(), Construction::Explicit, ops))
}

fn combine(row: &[Mp], powers: &[Mp], bits: usize) -> Mp {
    let mut acc = zero(bits);
    for (coef, p) in row.iter().zip(powers) {
        acc += coef * p;
    }
    acc
}

/// Solves `(I - tau^alpha A) S^n = k^beta(n) I + tau A sum_{j<n} k^alpha(n-j) S^j`
/// for `n = 0, 1, ...` in order.
pub fn family_recursive(a: &LinOp, alpha: f64, beta: f64, tau: f64, n_max: usize) -> Result<ResolventFamily> {
    check_positive("beta", beta)?;
    let handle = ResolventHandle::new(a, alpha, tau)?;
    let ka = kernel_seq(alpha, tau, n_max)?;
    let kb = kernel_seq(beta, tau, n_max)?;
    let identity = a.identity_like();
    let mut ops: Vec<LinOp> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut history = a.zeros_like();
        for (j, s) in ops.iter().enumerate() {
            history = history.add_scaled(ka[n - j], s)?;
        }
        let rhs = identity.scaled(kb[n]).add_scaled(tau, &a.compose(&history)?)?;
        ops.push(handle.resolvent_apply_op(&rhs)?);
    }
    Ok(ResolventFamily::new(alpha, beta, tau, a.clone(), Construction::Recursive, ops))
}

/// `S^n = sum_j k^(alpha j + beta)(n) A^j`, for `||A|| < 1` and `tau^alpha < 1`.
///
/// Summation stops once the bound `max_n k^(alpha j + beta)(n) ||A||^j` on
/// the current term is below `tol` and no longer increasing.
pub fn family_series(
    a: &LinOp,
    alpha: f64,
    beta: f64,
    tau: f64,
    n_max: usize,
    tol: f64,
) -> Result<ResolventFamily> {
    check_positive("alpha", alpha)?;
    check_positive("beta", beta)?;
    check_positive("tau", tau)?;
    check_positive("tol", tol)?;
    let norm = a.norm_inf();
    if norm >= 1.0 {
        return Err(Error::Hypothesis(format!("series needs ||A|| < 1, estimated ||A||_inf = {norm}")));
    }
    if tau.powf(alpha) >= 1.0 {
        return Err(Error::Hypothesis(format!("series needs tau^alpha < 1, got {}", tau.powf(alpha))));
    }

    let mut ops: Vec<LinOp> = vec![a.zeros_like(); n_max + 1];
    let mut power = a.identity_like();
    let mut norm_power = 1.0_f64;
    let mut previous = f64::INFINITY;
    for j in 0..SERIES_MAX_TERMS {
        let k = kernel_weights(alpha * j as f64 + beta, tau, n_max);
        for (s, &w) in ops.iter_mut().zip(&k) {
            *s = s.add_scaled(w, &power)?;
        }
        let bound = k.iter().fold(0.0_f64, |m, w| m.max(w.abs())) * norm_power;
        if !bound.is_finite() {
            return Err(Error::NonConvergence {
                what: "resolvent series",
                detail: format!("term bound overflowed at j = {j}"),
            });
        }
        if bound < tol && bound <= previous {
            return Ok(ResolventFamily::new(alpha, beta, tau, a.clone(), Construction::Series, ops));
        }
        previous = bound;
        power = power.compose(a)?;
        norm_power *= norm;
    }
    Err(Error::NonConvergence {
        what: "resolvent series",
        detail: format!("term bound still above {tol:e} after {SERIES_MAX_TERMS} terms"),
    })
}
