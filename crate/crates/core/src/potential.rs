//! Convex polynomial external potentials and their convexity certificates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid used at construction to certify V'' > 0 for custom polynomials.
const CONSTRUCTION_GRID: usize = 4001;

/// The shape of an external potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PotentialKind {
    /// `a x^2`
    Quadratic { a: f64 },
    /// `a x^2 + b x^4`
    Quartic { a: f64, b: f64 },
    /// `sum_k coeffs[k] x^k`, even degree.
    Custom { coeffs: Vec<f64> },
}

/// A convex even-degree polynomial potential `V`.
///
/// The monomial coefficients are cached so every evaluator is a Horner loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    kind: PotentialKind,
    coeffs: Vec<f64>,
}

/// Certified lower bound `varpi = (beta/2) inf V''` over an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityCertificate {
    pub varpi: f64,
    pub interval: (f64, f64),
    pub grid_points: usize,
    /// Where the infimum of V'' on the interval is attained.
    pub argmin: f64,
}

impl Potential {
    pub fn quadratic(a: f64) -> Result<Self> {
        Self::new(PotentialKind::Quadratic { a })
    }

    pub fn quartic(a: f64, b: f64) -> Result<Self> {
        Self::new(PotentialKind::Quartic { a, b })
    }

    pub fn custom(coeffs: Vec<f64>) -> Result<Self> {
        Self::new(PotentialKind::Custom { coeffs })
    }

    pub fn new(kind: PotentialKind) -> Result<Self> {
        let coeffs = match &kind {
            PotentialKind::Quadratic { a } => {
                if !(a.is_finite() && *a > 0.0) {
                    return Err(Error::InvalidPotential(format!(
                        "quadratic coefficient a must be positive, got {a}"
                    )));
                }
                vec![0.0, 0.0, *a]
            }
            PotentialKind::Quartic { a, b } => {
                if !(a.is_finite() && *a > 0.0) {
                    return Err(Error::InvalidPotential(format!(
                        "quartic requires a > 0, got {a}"
                    )));
                }
                if !(b.is_finite() && *b >= 0.0) {
                    return Err(Error::InvalidPotential(format!(
                        "quartic requires b >= 0, got {b}"
                    )));
                }
                vec![0.0, 0.0, *a, 0.0, *b]
            }
            PotentialKind::Custom { coeffs } => {
                let mut c = coeffs.clone();
                while c.len() > 1 && c[c.len() - 1] == 0.0 {
                    c.pop();
                }
                if c.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidPotential("non-finite coefficient".into()));
                }
                let degree = c.len().saturating_sub(1);
                if degree < 2 || degree % 2 != 0 {
                    return Err(Error::InvalidPotential(format!(
                        "custom potential must have even degree >= 2, got degree {degree}"
                    )));
                }
                if c[degree] <= 0.0 {
                    return Err(Error::InvalidPotential(
                        "leading coefficient must be positive".into(),
                    ));
                }
                c
            }
        };
        let potential = Potential { kind, coeffs };
        let (min, at) = potential.global_min_second_derivative();
        if !(min > 0.0) {
            return Err(Error::NotConvex {
                min_second_derivative: min,
                at,
            });
        }
        Ok(potential)
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    /// Monomial coefficients, lowest degree first.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `(V(x), V'(x), V''(x))`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let mut v = 0.0;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for &c in self.coeffs.iter().rev() {
            d2 = d2 * x + 2.0 * d1;
            d1 = d1 * x + v;
            v = v * x + c;
        }
        (v, d1, d2)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn first_derivative(&self, x: f64) -> f64 {
        self.eval(x).1
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        self.eval(x).2
    }

    /// V' at a complex argument.
    pub fn first_derivative_complex(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (1..self.coeffs.len()).rev() {
            acc = acc * z + self.coeffs[k] * k as f64;
        }
        acc
    }

    /// `(V'(z) - V'(t)) / (z - t)` evaluated as a polynomial in `(z, t)`, so the
    /// removable singularity at `z = t` never appears.
    pub fn derivative_divided_difference(&self, z: Complex64, t: f64) -> Complex64 {
        // V'(x) = sum_{k>=1} k c_k x^{k-1}; (x^n - t^n)/(x - t) = sum_{i+j=n-1} x^i t^j.
        // Horner in z over the inner sums: q_n(z) = z q_{n-1}(z) + t^{n-1}.
        let mut total = Complex64::new(0.0, 0.0);
        let mut q = Complex64::new(0.0, 0.0);
        let mut t_pow = 1.0;
        for k in 2..self.coeffs.len() {
            // n = k - 1 is the exponent of x in the k-th term of V'
            q = q * z + t_pow;
            t_pow *= t;
            total += q * (k as f64 * self.coeffs[k]);
        }
        total
    }

    /// Minimum of V'' over `[lo, hi]` and its location. Analytic for the
    /// built-in kinds, Newton-refined grid search for custom polynomials.
    pub fn min_second_derivative_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        match self.kind {
            PotentialKind::Quadratic { a } => (2.0 * a, 0.0f64.clamp(lo, hi)),
            PotentialKind::Quartic { .. } => {
                let x = 0.0f64.clamp(lo, hi);
                (self.second_derivative(x), x)
            }
            PotentialKind::Custom { .. } => self.refined_min_second_derivative(lo, hi),
        }
    }

    /// Global infimum of V'' over the real line, with its location.
    pub fn global_min_second_derivative(&self) -> (f64, f64) {
        match self.kind {
            PotentialKind::Quadratic { .. } | PotentialKind::Quartic { .. } => {
                self.min_second_derivative_on(f64::NEG_INFINITY, f64::INFINITY)
            }
            PotentialKind::Custom { .. } => {
                // Critical points of V'' are roots of V''' and lie inside its Cauchy bound.
                let bound = self.third_derivative_root_bound();
                self.refined_min_second_derivative(-bound, bound)
            }
        }
    }

    fn third_derivative_root_bound(&self) -> f64 {
        let d = self.degree();
        if d < 4 {
            return 1.0;
        }
        // coefficients of V''' (degree d-3)
        let third: Vec<f64> = (3..=d)
            .map(|k| (k * (k - 1) * (k - 2)) as f64 * self.coeffs[k])
            .collect();
        let lead = third[third.len() - 1];
        1.0 + third[..third.len() - 1]
            .iter()
            .map(|c| (c / lead).abs())
            .fold(0.0, f64::max)
    }

    fn third_derivative(&self, x: f64) -> f64 {
        let d = self.degree();
        (3..=d).rev().fold(0.0, |acc, k| {
            acc * x + (k * (k - 1) * (k - 2)) as f64 * self.coeffs[k]
        })
    }

    fn refined_min_second_derivative(&self, lo: f64, hi: f64) -> (f64, f64) {
        let n = CONSTRUCTION_GRID;
        let mut best = (f64::INFINITY, lo);
        for i in 0..n {
            let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let v = self.second_derivative(x);
            if v < best.0 {
                best = (v, x);
            }
        }
        // Newton on V''' from the best grid point, kept inside its grid cell.
        let h = (hi - lo) / (n - 1) as f64;
        let (cell_lo, cell_hi) = ((best.1 - h).max(lo), (best.1 + h).min(hi));
        let mut x = best.1;
        for _ in 0..50 {
            let g = self.third_derivative(x);
            let dg = {
                let d = self.degree();
                (4..=d).rev().fold(0.0, |acc, k| {
                    acc * x + (k * (k - 1) * (k - 2) * (k - 3)) as f64 * self.coeffs[k]
                })
            };
            if dg <= 0.0 {
                break;
            }
            let next = (x - g / dg).clamp(cell_lo, cell_hi);
            if (next - x).abs() < 1e-15 * (1.0 + x.abs()) {
                x = next;
                break;
            }
            x = next;
        }
        let v = self.second_derivative(x);
        if v < best.0 {
            (v, x)
        } else {
            best
        }
    }

    /// Coefficient of `x` and `x^2` used to seed the support solver.
    pub(crate) fn low_order(&self) -> (f64, f64) {
        (
            self.coeffs.get(1).copied().unwrap_or(0.0),
            self.coeffs.get(2).copied().unwrap_or(0.0),
        )
    }
}

/// Certifies `varpi = (beta/2) min V''` on `[lo, hi]`.
///
/// The minimizer is computed analytically (or by Newton refinement for custom
/// polynomials); the `grid` scan only cross-checks it.
pub fn convexity_floor(
    potential: &Potential,
    beta: f64,
    interval: (f64, f64),
    grid: usize,
) -> Result<ConvexityCertificate> {
    let (lo, hi) = interval;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "certification interval must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    if grid < 2 {
        return Err(Error::InvalidArgument("grid must have at least 2 points".into()));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    let (min, argmin) = potential.min_second_derivative_on(lo, hi);
    let grid_min = (0..grid)
        .map(|i| potential.second_derivative(lo + (hi - lo) * i as f64 / (grid - 1) as f64))
        .fold(f64::INFINITY, f64::min);
    debug_assert!(grid_min >= min - 1e-9 * min.abs().max(1.0));
    if !(min > 0.0) {
        return Err(Error::NotConvex {
            min_second_derivative: min,
            at: argmin,
        });
    }
    Ok(ConvexityCertificate {
        varpi: 0.5 * beta * min,
        interval,
        grid_points: grid,
        argmin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn evaluates_polynomial_and_derivatives() {
        let q = Potential::quadratic(1.0).unwrap();
        assert_eq!(q.eval(0.0), (0.0, 0.0, 2.0));
        assert_eq!(q.eval(3.0), (9.0, 6.0, 2.0));
        let p = Potential::quartic(1.0, 1.0).unwrap();
        assert_eq!(p.eval(1.0), (2.0, 6.0, 14.0));
    }

    #[test]
    fn convexity_floor_examples() {
        let q = Potential::quadratic(1.0).unwrap();
        assert_eq!(convexity_floor(&q, 2.0, (-2.0, 2.0), 101).unwrap().varpi, 2.0);
        assert_eq!(convexity_floor(&q, 1.0, (-2.0, 2.0), 101).unwrap().varpi, 1.0);
        let p = Potential::quartic(1.0, 1.0).unwrap();
        let cert = convexity_floor(&p, 2.0, (-2.0, 2.0), 101).unwrap();
        assert_eq!(cert.varpi, 2.0);
        assert_eq!(cert.argmin, 0.0);
        // interval away from the origin: minimum at the nearest endpoint
        let cert = convexity_floor(&p, 2.0, (1.0, 2.0), 11).unwrap();
        assert_eq!(cert.varpi, 14.0);
    }

    #[test]
    fn rejects_invalid_potentials() {
        assert!(Potential::quadratic(0.0).is_err());
        assert!(Potential::quartic(1.0, -0.1).is_err());
        assert!(Potential::quartic(0.0, 1.0).is_err());
        // x^4 alone: V''(0) = 0
        assert!(matches!(
            Potential::custom(vec![0.0, 0.0, 0.0, 0.0, 1.0]),
            Err(Error::NotConvex { .. })
        ));
        // x^2 - x^4 + 0.2 x^6 has V''<0 near |x|=1
        assert!(matches!(
            Potential::custom(vec![0.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.2]),
            Err(Error::NotConvex { .. })
        ));
        assert!(Potential::custom(vec![0.0, 1.0, 1.0, 1.0]).is_err());
        assert!(convexity_floor(&Potential::quadratic(1.0).unwrap(), 2.0, (1.0, 1.0), 10).is_err());
    }

    #[test]
    fn custom_matches_builtin() {
        let c = Potential::custom(vec![0.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        let q = Potential::quartic(1.0, 1.0).unwrap();
        for &x in &[-1.3, 0.0, 0.4, 2.0] {
            assert_eq!(c.eval(x), q.eval(x));
        }
        let (min, at) = c.global_min_second_derivative();
        assert!((min - 2.0).abs() < 1e-12 && at.abs() < 1e-6);
    }

    #[test]
    fn divided_difference_matches_direct_quotient() {
        let p = Potential::custom(vec![0.3, -0.2, 1.0, 0.1, 0.5, 0.0, 0.05]).unwrap();
        let z = Complex64::new(0.7, 0.3);
        for &t in &[-1.0, 0.2, 0.69] {
            let direct = (p.first_derivative_complex(z) - p.first_derivative(t)) / (z - t);
            let dd = p.derivative_divided_difference(z, t);
            assert!((direct - dd).norm() < 1e-12);
        }
        // at z = t the divided difference is V''(t)
        let t = 0.4;
        let dd = p.derivative_divided_difference(Complex64::new(t, 0.0), t);
        assert!((dd.re - p.second_derivative(t)).abs() < 1e-12);
    }

    fn builtin() -> impl Strategy<Value = Potential> {
        prop_oneof![
            (0.1f64..5.0).prop_map(|a| Potential::quadratic(a).unwrap()),
            (0.1f64..5.0, 0.0f64..3.0).prop_map(|(a, b)| Potential::quartic(a, b).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn floor_bounds_second_derivative(p in builtin(), beta in 0.2f64..8.0,
                                          xs in prop::collection::vec(-3.0f64..3.0, 1000)) {
            let cert = convexity_floor(&p, beta, (-3.0, 3.0), 64).unwrap();
            for x in xs {
                prop_assert!(p.second_derivative(x) >= 2.0 * cert.varpi / beta * (1.0 - 1e-12));
            }
        }

        #[test]
        fn derivatives_match_finite_differences(p in builtin(), x in -2.0f64..2.0) {
            let h = 1e-5;
            let (_, d1, d2) = p.eval(x);
            let fd1 = (p.value(x + h) - p.value(x - h)) / (2.0 * h);
            let fd2 = (p.first_derivative(x + h) - p.first_derivative(x - h)) / (2.0 * h);
            prop_assert!((fd1 - d1).abs() <= 1e-8 * d1.abs().max(1.0));
            prop_assert!((fd2 - d2).abs() <= 1e-8 * d2.abs().max(1.0));
        }
    }
}
