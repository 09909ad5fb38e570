//! Symmetric tridiagonal eigenvalues: implicit QL as the engine, Sturm
//! sequences as the independent check.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 50;

/// Symmetric tridiagonal matrix stored by its diagonal and sub-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidArgument("matrix must have n >= 1".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::ShapeMismatch {
                expected: diag.len() - 1,
                found: offdiag.len(),
            });
        }
        if diag.iter().chain(&offdiag).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("entries must be finite".into()));
        }
        Ok(SymTridiagonal { diag, offdiag })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// All eigenvalues in ascending order, with `tol = f64::EPSILON`.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigenvalues(self, f64::EPSILON)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        sturm_count(self, x)
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }
}

/// Implicit QL with Wilkinson-type shifts, eigenvalues only.
///
/// An off-diagonal entry is treated as zero once
/// `|e_i| <= tol (|d_i| + |d_{i+1}|)`.
pub fn eigenvalues(t: &SymTridiagonal, tol: f64) -> Result<Vec<f64>> {
    let n = t.n();
    let mut d = t.diag.clone();
    // e[i] couples rows i and i+1; e[n-1] is a zero sentinel
    let mut e = t.offdiag.clone();
    e.push(0.0);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= tol * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    what: "tridiagonal QL",
                    iterations: sweeps - 1,
                    residual: e[l].abs(),
                });
            }
            // shift from the leading 2x2 block
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = fast_hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoConvergence {
            what: "tridiagonal QL (non-finite result)",
            iterations: 0,
            residual: f64::NAN,
        });
    }
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(d)
}

/// `sqrt(a^2 + b^2)`, skipping the overflow-safe path of `f64::hypot` when
/// the squares cannot overflow or underflow. The rotation loop spends most
/// of its time here.
#[inline]
fn fast_hypot(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m < 1e150 && m > 1e-150 {
        (a * a + b * b).sqrt()
    } else {
        a.hypot(b)
    }
}

/// Number of eigenvalues strictly less than `x` from the signs of the
/// LDL^T pivots of `T - x I`.
pub fn sturm_count(t: &SymTridiagonal, x: f64) -> usize {
    let scale = t
        .offdiag
        .iter()
        .map(|e| e * e)
        .fold(1.0f64, f64::max);
    let pivmin = f64::MIN_POSITIVE * scale;
    let mut count = 0;
    let mut q = t.diag[0] - x;
    for i in 0..t.n() {
        if i > 0 {
            let e = t.offdiag[i - 1];
            q = t.diag[i] - x - e * e / q;
        }
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest eigenvalue (0-based) by bisection on the Sturm count.
pub fn bisect_eigenvalue(t: &SymTridiagonal, k: usize, abs_tol: f64) -> f64 {
    let (mut lo, mut hi) = t.gershgorin();
    let pad = 1e-12 * (lo.abs().max(hi.abs()) + 1.0);
    lo -= pad;
    hi += pad;
    while hi - lo > abs_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(t, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
