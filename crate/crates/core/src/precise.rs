//! Extended-precision binary floats for the explicit representation.
//!
//! The coefficients of the explicit representation grow geometrically with
//! alternating signs, so both the table and the sums built from it lose
//! roughly `log2(max |a|)` bits to cancellation. Everything here works at a
//! caller-chosen precision and only rounds to `f64` at the end.

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;

pub(crate) type Mp = FBig<HalfEven, 2>;

pub(crate) fn mp(x: f64, bits: usize) -> Mp {
    Mp::try_from(x)
        .expect("finite f64")
        .with_precision(bits)
        .value()
}

pub(crate) fn zero(bits: usize) -> Mp {
    mp(0.0, bits)
}

pub(crate) fn to_f64(x: &Mp) -> f64 {
    x.to_f64().value()
}

/// Row-major square matrix of extended-precision values.
#[derive(Clone, Debug)]
pub(crate) struct MpMatrix {
    pub n: usize,
    pub data: Vec<Mp>,
}

impl MpMatrix {
    pub fn from_f64(n: usize, f: impl Fn(usize, usize) -> f64, bits: usize) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(mp(f(i, j), bits));
            }
        }
        Self { n, data }
    }

    pub fn identity(n: usize, bits: usize) -> Self {
        Self::from_f64(n, |i, j| if i == j { 1.0 } else { 0.0 }, bits)
    }

    pub fn get(&self, i: usize, j: usize) -> &Mp {
        &self.data[i * self.n + j]
    }
}

/// LU factorization with partial pivoting, `P M = L U`, stored in place.
pub(crate) struct MpLu {
    n: usize,
    lu: Vec<Mp>,
    perm: Vec<usize>,
}

impl MpLu {
    /// Returns `None` when a pivot is exactly zero.
    pub fn new(m: MpMatrix) -> Option<Self> {
        let n = m.n;
        let mut lu = m.data;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            // Pivot choice only needs magnitudes, f64 is plenty.
            let p = (k..n)
                .max_by(|&a, &b| {
                    to_f64(&lu[a * n + k]).abs().total_cmp(&to_f64(&lu[b * n + k]).abs())
                })
                .expect("non-empty range");
            if to_f64(&lu[p * n + k]) == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k].clone();
            for i in k + 1..n {
                let factor = &lu[i * n + k] / &pivot;
                for j in k + 1..n {
                    let update = &factor * &lu[k * n + j];
                    lu[i * n + j] = &lu[i * n + j] - update;
                }
                lu[i * n + k] = factor;
            }
        }
        Some(Self { n, lu, perm })
    }

    /// Solves `M X = B` column by column.
    pub fn solve(&self, b: &MpMatrix) -> MpMatrix {
        let n = self.n;
        let mut out = b.data.clone();
        for col in 0..n {
            let mut y: Vec<Mp> = (0..n).map(|i| b.get(self.perm[i], col).clone()).collect();
            for i in 0..n {
                for j in 0..i {
                    let t = &self.lu[i * n + j] * &y[j];
                    y[i] = &y[i] - t;
                }
            }
            for i in (0..n).rev() {
                for j in i + 1..n {
                    let t = &self.lu[i * n + j] * &y[j];
                    y[i] = &y[i] - t;
                }
                y[i] = &y[i] / &self.lu[i * n + i];
            }
            for (i, v) in y.into_iter().enumerate() {
                out[i * n + col] = v;
            }
        }
        MpMatrix { n, data: out }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_is_carried() {
        let third = mp(1.0, 200) / mp(3.0, 200);
        assert_eq!(third.precision(), 200);
        let back = &third * &mp(3.0, 200);
        assert!((to_f64(&back) - 1.0).abs() == 0.0);
    }

    #[test]
    fn lu_solves_ill_conditioned_system() {
        // Hilbert matrix of order 8 has condition ~1e10; at 256 bits the
        // solve is exact to f64 rounding.
        let n = 8;
        let h = MpMatrix::from_f64(n, |i, j| 1.0 / (i + j + 1) as f64, 256);
        let lu = MpLu::new(h.clone()).unwrap();
        let x = lu.solve(&MpMatrix::identity(n, 256));
        for i in 0..n {
            for j in 0..n {
                let mut acc = zero(256);
                for k in 0..n {
                    acc = acc + h.get(i, k) * x.get(k, j);
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((to_f64(&acc) - expect).abs() < 1e-30);
            }
        }
        let singular = MpMatrix::from_f64(2, |_, _| 1.0, 128);
        assert!(MpLu::new(singular).is_none());
    }
}
