//! One-cut equilibrium measure of a convex polynomial potential.
//!
//! The density is `rho(t) = r(t) sqrt((t - A)(B - t)) / pi` on `[A, B]`, with
//!
//! ```text
//! r(z) = 1/(2 pi) int_A^B (V'(z) - V'(t)) / (z - t) dt / sqrt((t - A)(B - t)).
//! ```
//!
//! Every integral against the arcsine weight is taken with the substitution
//! `t = c + h cos(phi)`, `c = (A + B)/2`, `h = (B - A)/2`, which turns the
//! endpoint singularity into a Chebyshev–Gauss rule. For polynomial `V` the
//! rules are exact.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quadrature::{chebyshev_angles, GaussLegendre};

pub const DEFAULT_QUADRATURE_ORDER: usize = 256;

/// Beyond this many half-widths from the center `m` is computed by quadrature.
const FAR_FIELD_RADIUS: f64 = 3.0;
const CDF_GRID_POINTS: usize = 1025;
const MAX_NEWTON_ITERATIONS: usize = 100;

/// Solver knobs for [`EquilibriumMeasure::solve_with`].
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Stop when `|F1| + |F2 - 1| < tol`.
    pub tol: f64,
    pub quadrature_order: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-13,
            quadrature_order: DEFAULT_QUADRATURE_ORDER,
        }
    }
}

/// Solved equilibrium measure with its density, CDF and Stieltjes transform.
#[derive(Debug, Clone)]
pub struct EquilibriumMeasure {
    potential: Potential,
    a: f64,
    b: f64,
    angles: Vec<f64>,
    r_nodes: Vec<f64>,
    /// Cosine-series coefficients of `r(c - h cos psi) sin^2 psi`.
    cdf_series: Vec<f64>,
    cdf_grid: Vec<(f64, f64)>,
}

/// `gamma_1 <= ... <= gamma_N`, the `j/N` quantiles of the equilibrium density.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalLocations {
    pub gamma: Vec<f64>,
}

impl ClassicalLocations {
    pub fn n(&self) -> usize {
        self.gamma.len()
    }
}

/// Support endpoints `(A, B)` of the equilibrium measure.
pub fn solve_support(potential: &Potential, tol: f64) -> Result<(f64, f64)> {
    let eq = EquilibriumMeasure::solve_with(
        potential,
        SolveOptions {
            tol,
            ..SolveOptions::default()
        },
    )?;
    Ok(eq.support())
}

/// The two moment conditions and their Jacobian in `(center, half_width)`.
struct MomentConditions<'a> {
    potential: &'a Potential,
    angles: &'a [f64],
}

impl MomentConditions<'_> {
    /// Returns `(F1, F2 - 1)` and `d(F1, F2)/d(c, h)`.
    fn eval(&self, c: f64, h: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let n = self.angles.len() as f64;
        let mut f1 = 0.0;
        let mut f2 = 0.0;
        let mut j = [[0.0; 2]; 2];
        for &phi in self.angles {
            let cos = phi.cos();
            let t = c + h * cos;
            let (_, d1, d2) = self.potential.eval(t);
            f1 += d1;
            f2 += t * d1;
            j[0][0] += d2;
            j[0][1] += d2 * cos;
            j[1][0] += d1 + t * d2;
            j[1][1] += cos * (d1 + t * d2);
        }
        // F1 = (pi/n) sum V'(t_k), F2 = (1/2n) sum t_k V'(t_k)
        let s1 = PI / n;
        let s2 = 0.5 / n;
        (
            [s1 * f1, s2 * f2 - 1.0],
            [[s1 * j[0][0], s1 * j[0][1]], [s2 * j[1][0], s2 * j[1][1]]],
        )
    }
}

impl EquilibriumMeasure {
    pub fn solve(potential: &Potential) -> Result<Self> {
        Self::solve_with(potential, SolveOptions::default())
    }

    /// 2-D damped Newton on the normalization conditions
    /// `int V'(t) dt/sqrt(..) = 0` and `(1/2pi) int t V'(t) dt/sqrt(..) = 1`.
    pub fn solve_with(potential: &Potential, options: SolveOptions) -> Result<Self> {
        if !(options.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        if options.quadrature_order < 4 {
            return Err(Error::InvalidArgument(
                "quadrature order must be at least 4".into(),
            ));
        }
        let angles = chebyshev_angles(options.quadrature_order);
        let conditions = MomentConditions {
            potential,
            angles: &angles,
        };

        // Semicircle matched to the quadratic part a1 x + a2 x^2.
        let (a1, a2) = potential.low_order();
        let (mut c, mut h) = if a2 > 0.0 {
            (-a1 / (2.0 * a2), (2.0 / a2).sqrt())
        } else {
            let curvature = potential.second_derivative(0.0).max(1e-3);
            (0.0, (4.0 / curvature).sqrt())
        };

        let norm = |f: [f64; 2]| f[0].abs() + f[1].abs();
        let (mut f, mut jac) = conditions.eval(c, h);
        let mut iterations = 0;
        while norm(f) >= options.tol {
            if iterations == MAX_NEWTON_ITERATIONS {
                return Err(Error::NoConvergence {
                    what: "support solver",
                    iterations,
                    residual: norm(f),
                });
            }
            iterations += 1;
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det == 0.0 || !det.is_finite() {
                return Err(Error::NoConvergence {
                    what: "support solver (singular Jacobian)",
                    iterations,
                    residual: norm(f),
                });
            }
            let dc = (jac[1][1] * f[0] - jac[0][1] * f[1]) / det;
            let dh = (-jac[1][0] * f[0] + jac[0][0] * f[1]) / det;
            let mut step = 1.0;
            loop {
                let (nc, nh) = (c - step * dc, h - step * dh);
                if nh > 0.0 {
                    let (nf, nj) = conditions.eval(nc, nh);
                    if norm(nf) < norm(f) || step < 1e-10 {
                        c = nc;
                        h = nh;
                        f = nf;
                        jac = nj;
                        break;
                    }
                }
                step *= 0.5;
                if step < 1e-12 {
                    return Err(Error::NoConvergence {
                        what: "support solver line search",
                        iterations,
                        residual: norm(f),
                    });
                }
            }
        }

        let mut eq = EquilibriumMeasure {
            potential: potential.clone(),
            a: c - h,
            b: c + h,
            angles,
            r_nodes: Vec::new(),
            cdf_series: Vec::new(),
            cdf_grid: Vec::new(),
        };
        eq.r_nodes = eq
            .angles
            .iter()
            .map(|phi| eq.r_real(c + h * phi.cos()))
            .collect();
        let min_r = eq.r_nodes.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min_r > 0.0) {
            return Err(Error::NotOneCut { min_r });
        }
        eq.cdf_series = eq.build_cdf_series();
        eq.cdf_grid = (0..CDF_GRID_POINTS)
            .map(|i| {
                let t = eq.a + (eq.b - eq.a) * i as f64 / (CDF_GRID_POINTS - 1) as f64;
                (t, eq.cdf(t))
            })
            .collect();
        Ok(eq)
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.b - self.a)
    }

    pub fn quadrature_order(&self) -> usize {
        self.angles.len()
    }

    /// `r` at the Chebyshev nodes of `[A, B]`.
    pub fn r_nodes(&self) -> &[f64] {
        &self.r_nodes
    }

    /// `(t, CDF(t))` on a uniform grid of the support.
    pub fn cdf_grid(&self) -> &[(f64, f64)] {
        &self.cdf_grid
    }

    /// The analytic factor `r(z)`.
    pub fn r_eval(&self, z: Complex64) -> Complex64 {
        let (c, h) = (self.center(), self.half_width());
        let sum: Complex64 = self
            .angles
            .iter()
            .map(|phi| self.potential.derivative_divided_difference(z, c + h * phi.cos()))
            .sum();
        sum / (2.0 * self.angles.len() as f64)
    }

    fn r_real(&self, t: f64) -> f64 {
        self.r_eval(Complex64::new(t, 0.0)).re
    }

    /// Equilibrium density; zero outside the support.
    pub fn density(&self, t: f64) -> f64 {
        if t <= self.a || t >= self.b {
            return 0.0;
        }
        self.r_real(t) * ((t - self.a) * (self.b - t)).sqrt() / PI
    }

    /// Angle `psi` with `t = c - h cos(psi)`, so `psi(A) = 0` and `psi(B) = pi`.
    fn angle_of(&self, t: f64) -> f64 {
        ((self.center() - t) / self.half_width()).clamp(-1.0, 1.0).acos()
    }

    fn build_cdf_series(&self) -> Vec<f64> {
        // g(psi) = r(c - h cos psi) sin^2 psi is a cosine polynomial of degree deg V.
        let degree = self.potential.degree();
        let m = self.angles.len();
        let (c, h) = (self.center(), self.half_width());
        let samples: Vec<f64> = self
            .angles
            .iter()
            .map(|psi| self.r_real(c - h * psi.cos()) * psi.sin().powi(2))
            .collect();
        (0..=degree)
            .map(|k| {
                let s: f64 = self
                    .angles
                    .iter()
                    .zip(&samples)
                    .map(|(psi, g)| g * (k as f64 * psi).cos())
                    .sum();
                if k == 0 {
                    s / m as f64
                } else {
                    2.0 * s / m as f64
                }
            })
            .collect()
    }

    fn cdf_of_angle(&self, psi: f64) -> f64 {
        let h = self.half_width();
        let mut acc = self.cdf_series[0] * psi;
        for (k, a) in self.cdf_series.iter().enumerate().skip(1) {
            acc += a * (k as f64 * psi).sin() / k as f64;
        }
        h * h / PI * acc
    }

    fn cdf_angle_derivative(&self, psi: f64) -> f64 {
        let h = self.half_width();
        let g: f64 = self
            .cdf_series
            .iter()
            .enumerate()
            .map(|(k, a)| a * (k as f64 * psi).cos())
            .sum();
        h * h / PI * g
    }

    /// `int_{-inf}^t rho`, clamped to `[0, 1]`.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= self.a {
            return 0.0;
        }
        if t >= self.b {
            return 1.0;
        }
        self.cdf_of_angle(self.angle_of(t)).clamp(0.0, 1.0)
    }

    /// Inverse CDF by safeguarded Newton in the angle variable.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return self.a;
        }
        if p >= 1.0 {
            return self.b;
        }
        let (c, h) = (self.center(), self.half_width());
        let (mut lo, mut hi) = (0.0, PI);
        let mut psi = 0.5 * PI;
        for _ in 0..200 {
            let f = self.cdf_of_angle(psi) - p;
            if f > 0.0 {
                hi = psi;
            } else {
                lo = psi;
            }
            let d = self.cdf_angle_derivative(psi);
            let mut next = psi - f / d;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let done = (next - psi).abs() * h < 1e-15 || hi - lo < 1e-16;
            psi = next;
            if done {
                break;
            }
        }
        c - h * psi.cos()
    }

    /// Classical locations `gamma_j = CDF^{-1}(j/N)` with `gamma_N = B`.
    pub fn classical_locations(&self, n: usize) -> ClassicalLocations {
        let mut gamma: Vec<f64> = (1..n).map(|j| self.quantile(j as f64 / n as f64)).collect();
        if n >= 1 {
            gamma.push(self.b);
        }
        ClassicalLocations { gamma }
    }

    /// Midpoint quantiles `CDF^{-1}((j - 1/2)/N)`, interior to the support.
    pub fn midpoint_locations(&self, n: usize) -> Vec<f64> {
        (1..=n)
            .map(|j| self.quantile((j as f64 - 0.5) / n as f64))
            .collect()
    }

    /// `f(z) = sqrt((A - z)(B - z))` on the branch with `f(z) ~ z` at infinity.
    pub fn f_branch(&self, z: Complex64) -> Complex64 {
        let z = upper_limit(z, self.a, self.b);
        (z - self.a).sqrt() * (z - self.b).sqrt()
    }

    /// `s(z) = -2 r(z) f(z)`.
    pub fn s_function(&self, z: Complex64) -> Complex64 {
        -2.0 * self.r_eval(z) * self.f_branch(z)
    }

    /// Stieltjes transform `m(z) = int rho(t)/(z - t) dt`.
    ///
    /// Uses the one-cut identity `m = (V'(z) + s(z))/2`, which stays accurate
    /// arbitrarily close to the support. On the cut itself the boundary value
    /// from the upper half plane is returned. Far from the support, where the
    /// identity cancels catastrophically, the density is integrated directly.
    pub fn stieltjes_m(&self, z: Complex64) -> Complex64 {
        if (z - self.center()).norm() > FAR_FIELD_RADIUS * self.half_width() {
            return self.stieltjes_m_quadrature(z, self.quadrature_order());
        }
        let z = upper_limit(z, self.a, self.b);
        0.5 * (self.potential.first_derivative_complex(z) + self.s_function(z))
    }

    /// Direct quadrature of `int rho(t)/(z - t) dt` with a Chebyshev rule of the
    /// second kind. Only accurate when `z` is well separated from the support.
    pub fn stieltjes_m_quadrature(&self, z: Complex64, nodes: usize) -> Complex64 {
        self.integrate_against_density(nodes, |t| Complex64::new(1.0, 0.0) / (z - t))
    }

    /// `int g(t) rho(t) dt` with an `nodes`-point Chebyshev rule of the second
    /// kind; exact when `g r` is a polynomial of degree `< 2 nodes`.
    pub fn integrate_against_density<F>(&self, nodes: usize, mut g: F) -> Complex64
    where
        F: FnMut(f64) -> Complex64,
    {
        let (c, h) = (self.center(), self.half_width());
        let np1 = (nodes + 1) as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=nodes {
            let theta = k as f64 * PI / np1;
            let t = c + h * theta.cos();
            let w = theta.sin().powi(2);
            acc += g(t) * (w * self.r_real(t));
        }
        acc * (h * h / np1)
    }

    /// `int (V'(z) - V'(t))/(z - t) rho(t) dt`, exact for polynomial `V`.
    pub fn divided_difference_moment(&self, z: Complex64) -> Complex64 {
        let nodes = self.potential.degree() + 4;
        self.integrate_against_density(nodes, |t| {
            self.potential.derivative_divided_difference(z, t)
        })
    }

    /// Principal value `PV int rho(s)/(t - s) ds` for `t` inside the support,
    /// by subtracting `rho(t)` and integrating the remainder in the angle
    /// variable, plus the closed-form `rho(t) log((t - A)/(B - t))`.
    pub fn principal_value_transform(&self, t: f64, rule: &GaussLegendre) -> f64 {
        assert!(t > self.a && t < self.b, "principal value needs an interior point");
        let (c, h) = (self.center(), self.half_width());
        let rho_t = self.density(t);
        let psi_t = self.angle_of(t);
        let integrand = |psi: f64| {
            let s = c - h * psi.cos();
            let rho_s = self.r_real(s) * h * psi.sin() / PI;
            let ds = t - s;
            if ds == 0.0 {
                return 0.0;
            }
            (rho_s - rho_t) / ds * h * psi.sin()
        };
        let smooth = rule.integrate(0.0, psi_t, integrand) + rule.integrate(psi_t, PI, integrand);
        smooth + rho_t * ((t - self.a) / (self.b - t)).ln()
    }

    /// Table of `(t, rho(t), CDF(t))` on a uniform grid of the support.
    pub fn table(&self, points: usize) -> Vec<(f64, f64, f64)> {
        let points = points.max(2);
        (0..points)
            .map(|i| {
                let t = self.a + (self.b - self.a) * i as f64 / (points - 1) as f64;
                (t, self.density(t), self.cdf(t))
            })
            .collect()
    }
}

/// Points on the real cut are nudged to the upper boundary value.
fn upper_limit(z: Complex64, a: f64, b: f64) -> Complex64 {
    if z.im == 0.0 && z.re >= a && z.re <= b {
        Complex64::new(z.re, 0.0) + Complex64::new(0.0, f64::MIN_POSITIVE)
    } else {
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn quadratic() -> EquilibriumMeasure {
        EquilibriumMeasure::solve(&Potential::quadratic(1.0).unwrap()).unwrap()
    }

    fn quartic() -> EquilibriumMeasure {
        EquilibriumMeasure::solve(&Potential::quartic(1.0, 1.0).unwrap()).unwrap()
    }

    /// Semicircle CDF on [-sqrt2, sqrt2]: 1/2 + t sqrt(2 - t^2)/(2 pi) + asin(t/sqrt2)/pi.
    fn semicircle_cdf(t: f64) -> f64 {
        0.5 + t * (2.0 - t * t).sqrt() / (2.0 * PI) + (t / SQRT_2).asin() / PI
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn support_closed_forms() {
        let (a, b) = quadratic().support();
        assert!((a + SQRT_2).abs() < 1e-12 && (b - SQRT_2).abs() < 1e-12);

        // B^2/2 + (3/4) B^4 = 1
        let b_exact = ((-1.0 + 13f64.sqrt()) / 3.0).sqrt();
        let (a, b) = quartic().support();
        assert!((b - b_exact).abs() < 1e-12 && (a + b_exact).abs() < 1e-12);

        let (a, b) = solve_support(&Potential::quadratic(2.0).unwrap(), 1e-13).unwrap();
        assert!((a + 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_potential_is_solved() {
        let p = Potential::custom(vec![0.0, 0.5, 1.0, 0.1, 0.2]).unwrap();
        let eq = EquilibriumMeasure::solve(&p).unwrap();
        let rule = GaussLegendre::new(64);
        let (a, b) = eq.support();
        assert!(a < 0.0 && b > 0.0 && a + b < 0.0);
        for i in 1..20 {
            let t = a + (b - a) * i as f64 / 20.0;
            let pv = eq.principal_value_transform(t, &rule);
            assert!((0.5 * p.first_derivative(t) - pv).abs() < 1e-8);
        }
        assert!((eq.cdf(b - 1e-15) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn r_examples() {
        let eq = quadratic();
        for z in [Complex64::new(5.0, 3.0), Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.1)] {
            assert!((eq.r_eval(z) - 1.0).norm() < 1e-12);
        }
        let eq = quartic();
        let b2 = (-1.0 + 13f64.sqrt()) / 3.0;
        assert!((eq.r_eval(Complex64::new(0.0, 0.0)).re - (1.0 + b2)).abs() < 1e-12);
    }

    #[test]
    fn density_examples() {
        let eq = quadratic();
        assert!((eq.density(0.0) - SQRT_2 / PI).abs() < 1e-12);
        assert_eq!(eq.density(SQRT_2), 0.0);
        assert_eq!(eq.density(3.0), 0.0);
    }

    #[test]
    fn cdf_matches_semicircle_closed_form() {
        let eq = quadratic();
        for i in 1..50 {
            let t = -SQRT_2 + 2.0 * SQRT_2 * i as f64 / 50.0;
            assert!((eq.cdf(t) - semicircle_cdf(t)).abs() < 1e-13);
        }
        assert_eq!(eq.cdf(-2.0), 0.0);
        assert_eq!(eq.cdf(2.0), 1.0);
    }

    #[test]
    fn classical_location_examples() {
        let eq = quadratic();
        let gamma = eq.classical_locations(10);
        assert!(gamma.gamma[4].abs() < 1e-12);
        assert_eq!(gamma.gamma[9], SQRT_2);
        // oracle: bisection on the closed-form semicircle CDF
        let quarter = bisect(|t| semicircle_cdf(t) - 0.25, -SQRT_2, SQRT_2);
        assert!((quarter - (-0.571)).abs() < 5e-4);
        assert!((eq.quantile(0.25) - quarter).abs() < 1e-12);
        let g = eq.classical_locations(8);
        assert!((g.gamma[1] - quarter).abs() < 1e-12);
        assert_eq!(quartic().classical_locations(5).gamma[4], quartic().support().1);
    }

    #[test]
    fn classical_locations_satisfy_counting_identity() {
        let eq = quartic();
        let n = 333;
        let g = eq.classical_locations(n);
        for (j, &x) in g.gamma.iter().enumerate().take(n - 1) {
            assert!((n as f64 * eq.cdf(x) - (j + 1) as f64).abs() < 1e-9);
        }
        assert!(g.gamma.windows(2).all(|w| w[0] < w[1]));
        let doubled = EquilibriumMeasure::solve_with(
            &Potential::quartic(1.0, 1.0).unwrap(),
            SolveOptions {
                quadrature_order: 512,
                ..SolveOptions::default()
            },
        )
        .unwrap()
        .classical_locations(n);
        for (x, y) in g.gamma.iter().zip(&doubled.gamma) {
            assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn stieltjes_examples() {
        let eq = quadratic();
        let m = eq.stieltjes_m(Complex64::new(0.0, 1.0));
        assert!((m - Complex64::new(0.0, 1.0 - 3f64.sqrt())).norm() < 1e-12);
        let far = eq.stieltjes_m(Complex64::new(1e6, 0.0));
        assert!((far.re - 1e-6).abs() < 1e-12);
        for y in [0.01, 0.5, 3.0] {
            assert!(eq.stieltjes_m(Complex64::new(0.0, y)).re.abs() < 1e-12);
        }
    }

    #[test]
    fn stieltjes_closed_form_agrees_with_quadrature() {
        for eq in [quadratic(), quartic()] {
            for z in [Complex64::new(0.3, 0.5), Complex64::new(-2.0, 0.2), Complex64::new(0.0, 2.0)] {
                let direct = eq.stieltjes_m_quadrature(z, 4000);
                assert!((direct - eq.stieltjes_m(z)).norm() < 1e-6, "{z}");
            }
        }
    }

    #[test]
    fn stieltjes_imaginary_part_recovers_density() {
        let eq = quartic();
        let (a, b) = eq.support();
        for i in 1..10 {
            let e = a + (b - a) * i as f64 / 10.0;
            let m = eq.stieltjes_m(Complex64::new(e, 1e-4));
            // Im m(E + i0) = -pi rho(E)
            assert!((m.im + PI * eq.density(e)).abs() <= 1e-2);
        }
    }

    #[test]
    fn s_function_examples() {
        let eq = quadratic();
        let s = eq.s_function(Complex64::new(0.0, 1.0));
        assert!((s - Complex64::new(0.0, -2.0 * 3f64.sqrt())).norm() < 1e-12);
        let s = eq.s_function(Complex64::new(10.0, 0.0));
        assert!((s.re + 2.0 * 98f64.sqrt()).abs() < 1e-12 && s.im.abs() < 1e-12);
        let big = Complex64::new(3e3, -2e3);
        let ratio = eq.s_function(big) / (-2.0 * big * eq.r_eval(big));
        assert!((ratio - 1.0).norm() < 1e-6);
    }

    #[test]
    fn equilibrium_relation_holds_in_bulk() {
        let rule = GaussLegendre::new(64);
        for eq in [quadratic(), quartic()] {
            let (a, b) = eq.support();
            for i in 1..=100 {
                let t = a + (b - a) * (i as f64 - 0.5) / 100.0;
                let pv = eq.principal_value_transform(t, &rule);
                let v1 = eq.potential().first_derivative(t);
                assert!((0.5 * v1 - pv).abs() <= 1e-6, "t={t}");
            }
        }
    }

    #[test]
    fn density_is_normalized() {
        let rule = GaussLegendre::new(200);
        for eq in [quadratic(), quartic()] {
            let (c, h) = (eq.center(), eq.half_width());
            let mass = rule.integrate(0.0, PI, |psi| eq.density(c - h * psi.cos()) * h * psi.sin());
            assert!((mass - 1.0).abs() < 1e-8);
            assert!((eq.integrate_against_density(16, |_| Complex64::new(1.0, 0.0)).re - 1.0).abs() < 1e-13);
        }
    }
}
