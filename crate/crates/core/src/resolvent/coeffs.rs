//! Coefficients `a_{n,l}` of the representation `S^n = sum_l a_{n,l} R_tau^l`.

use crate::error::{check_positive, Result};
use crate::kernels::kernel_seq;
use crate::precise::{mp, to_f64, zero, Mp};

/// Lower-triangular table of representation coefficients.
///
/// Row `n` holds `a_{n,1}, ..., a_{n,n+1}`. Entries are computed in binary
/// floating point of [`CoeffTable::precision`] bits and rounded once.
#[derive(Debug, Clone)]
pub struct CoeffTable {
    alpha: f64,
    beta: f64,
    tau: f64,
    scale: f64,
    precision: usize,
    // Normalized by tau^(beta-1); these no longer depend on tau.
    exact: Vec<Vec<Mp>>,
    rows: Vec<Vec<f64>>,
}

/// Builds rows `0..=n_max` of the coefficient table.
pub fn coeff_table(alpha: f64, beta: f64, tau: f64, n_max: usize) -> Result<CoeffTable> {
    check_positive("alpha", alpha)?;
    check_positive("beta", beta)?;
    check_positive("tau", tau)?;
    let bits = table_precision(alpha, beta, n_max);
    Ok(CoeffTable::build(alpha, beta, tau, n_max, bits))
}

/// Bits needed so that `sum_l a_{n,l} x_l` with `|x_l| <= 1` keeps full `f64`
/// accuracy after cancellation.
///
/// Writing `q(y) = 1 - (1-y)^alpha`, column `l` of the table is generated by
/// `(1-y)^(alpha-beta) q(y)^(l-1)`, so `|a_{n,l}| <= B G^(l-1)` with `G` and
/// `B` the absolute coefficient sums of `q` and `(1-y)^(alpha-beta)` up to
/// degree `n_max`. Rounding errors made inside the recursion are amplified by
/// the same factor, hence the doubled exponent.
pub(crate) fn table_precision(alpha: f64, beta: f64, n_max: usize) -> usize {
    let g = abs_coeff_sum(alpha, n_max) - 1.0;
    let b = abs_coeff_sum(alpha - beta, n_max);
    let growth = n_max as f64 * g.max(1.0).log2() + b.max(1.0).log2();
    96 + 2 * growth.ceil() as usize + (n_max as f64 + 2.0).log2().ceil() as usize
}

/// `sum_{k <= n} |[y^k] (1-y)^p|`.
fn abs_coeff_sum(p: f64, n: usize) -> f64 {
    let mut c = 1.0_f64;
    let mut sum = 1.0;
    for k in 1..=n {
        c *= (k as f64 - 1.0 - p) / k as f64;
        sum += c.abs();
    }
    sum
}

/// `Gamma(a+m) / (Gamma(a) m!)` for `m = 0..=n`, in extended precision.
pub(crate) fn gamma_ratios(a: f64, n: usize, bits: usize) -> Vec<Mp> {
    let a = mp(a, bits);
    let mut out = Vec::with_capacity(n + 1);
    out.push(mp(1.0, bits));
    for m in 0..n {
        let next = &out[m] * (&a + mp(m as f64, bits)) / mp(m as f64 + 1.0, bits);
        out.push(next);
    }
    out
}

impl CoeffTable {
    pub(crate) fn build(alpha: f64, beta: f64, tau: f64, n_max: usize, bits: usize) -> Self {
        // k^alpha(m) / k^alpha(0) and k^beta(m) / tau^(beta-1).
        let r = gamma_ratios(alpha, n_max, bits);
        let kb = gamma_ratios(beta, n_max, bits);

        // diffs[j][l-1] = a_{j,l-1} - a_{j,l} for l = 1..=j+2, with a_{j,0} = 0.
        let mut exact: Vec<Vec<Mp>> = Vec::with_capacity(n_max + 1);
        let mut diffs: Vec<Vec<Mp>> = Vec::with_capacity(n_max + 1);

        for n in 0..=n_max {
            let mut row = Vec::with_capacity(n + 1);
            if n == 0 {
                row.push(kb[0].clone());
            } else {
                // First column: (k^beta(n) k^alpha(0) - sum_j k^alpha(n-j) a_{j,1}) / k^alpha(0).
                // Interior, 2 <= l <= n:
                //   sum_j k^alpha(n-j) (a_{j,l-1} - a_{j,l}) / k^alpha(0).
                // Superdiagonal: k^alpha(1) a_{n-1,n} / k^alpha(0).
                // With triangular zero-extension all three are the same sum
                // over the differences; for n = 1 this gives
                // a_{1,1} = (k^beta(1) k^alpha(0) - k^beta(0) k^alpha(1)) / k^alpha(0).
                for l in 1..=n + 1 {
                    let mut acc = if l == 1 { kb[n].clone() } else { zero(bits) };
                    for (j, d) in diffs.iter().enumerate().take(n).skip(l.saturating_sub(2)) {
                        acc += &r[n - j] * &d[l - 1];
                    }
                    row.push(acc);
                }
            }
            let mut d = Vec::with_capacity(n + 2);
            for l in 1..=n + 2 {
                let prev = if l >= 2 { row[l - 2].clone() } else { zero(bits) };
                let cur = row.get(l - 1).cloned().unwrap_or_else(|| zero(bits));
                d.push(prev - cur);
            }
            diffs.push(d);
            exact.push(row);
        }

        let scale = tau.powf(beta - 1.0);
        let rows = exact.iter().map(|row| row.iter().map(|a| to_f64(a) * scale).collect()).collect();
        Self { alpha, beta, tau, scale, precision: bits, exact, rows }
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

    pub fn horizon(&self) -> usize {
        self.rows.len() - 1
    }

    /// Working precision in bits.
    pub fn precision(&self) -> usize {
        self.precision
    }

    /// `tau^(beta-1)`, the common factor of every entry.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `a_{n,l}` with `l` starting at 1; zero outside `1 <= l <= n+1`.
    pub fn get(&self, n: usize, l: usize) -> f64 {
        if l == 0 {
            return 0.0;
        }
        self.rows.get(n).and_then(|row| row.get(l - 1)).copied().unwrap_or(0.0)
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.rows[n]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `sum_l a_{n,l}`, summed before rounding.
    pub fn row_sum(&self, n: usize) -> f64 {
        let mut acc = zero(self.precision);
        for a in &self.exact[n] {
            acc += a;
        }
        to_f64(&acc) * self.scale
    }

    pub(crate) fn exact_row(&self, n: usize) -> &[Mp] {
        &self.exact[n]
    }

    /// Same table recomputed at a higher precision, if needed.
    pub(crate) fn at_least(&self, bits: usize) -> std::borrow::Cow<'_, CoeffTable> {
        if bits <= self.precision {
            std::borrow::Cow::Borrowed(self)
        } else {
            std::borrow::Cow::Owned(Self::build(self.alpha, self.beta, self.tau, self.horizon(), bits))
        }
    }
}

/// Row sums must reproduce the kernel: the `A = 0` case of the representation.
pub fn row_sum_residuals(table: &CoeffTable) -> Result<Vec<f64>> {
    let k = kernel_seq(table.beta, table.tau, table.horizon())?;
    Ok((0..=table.horizon())
        .map(|n| ((table.row_sum(n) - k[n]) / k[n]).abs())
        .collect())
}
