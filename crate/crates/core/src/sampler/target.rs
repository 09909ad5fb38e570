//! Composable unnormalized log-densities and their analytic gradients.

use serde::Serialize;

use super::{Configuration, MIN_GAP};
use crate::error::{Error, Result};
use crate::potential::Potential;

/// Frozen exterior particles for a window `[L+1, L+K]` (1-based).
///
/// `y` keeps the original indices `1..=L` followed by `L+K+1..=N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryCondition {
    l: usize,
    k: usize,
    y: Vec<f64>,
}

impl BoundaryCondition {
    pub fn new(l: usize, k: usize, y: Vec<f64>) -> Result<Self> {
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("boundary condition must be finite".into()));
        }
        if y.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("boundary condition must be sorted".into()));
        }
        let n = y.len() + k;
        if l < 1 || l + k > n.saturating_sub(1) {
            return Err(Error::WindowOutOfRange {
                first: l + 1,
                last: l + k,
                n,
            });
        }
        let bc = BoundaryCondition { l, k, y };
        if !(bc.left_wall() < bc.right_wall()) {
            return Err(Error::DegenerateWindow(format!(
                "y_L = {} must be below y_(L+K+1) = {}",
                bc.left_wall(),
                bc.right_wall()
            )));
        }
        Ok(bc)
    }

    /// Exterior coordinates of `config` for the window `(l, k)`.
    pub fn from_configuration(config: &Configuration, l: usize, k: usize) -> Result<Self> {
        let c = config.as_slice();
        if l + k > c.len() {
            return Err(Error::WindowOutOfRange {
                first: l + 1,
                last: l + k,
                n: c.len(),
            });
        }
        let y: Vec<f64> = c[..l].iter().chain(&c[l + k..]).copied().collect();
        Self::new(l, k, y)
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.y.len() + self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    /// `y_j` for a 1-based exterior index `j`.
    pub fn get(&self, j: usize) -> Option<f64> {
        if j >= 1 && j <= self.l {
            Some(self.y[j - 1])
        } else if j > self.l + self.k && j <= self.n() {
            Some(self.y[j - 1 - self.k])
        } else {
            None
        }
    }

    /// `y_L`.
    pub fn left_wall(&self) -> f64 {
        self.y[self.l - 1]
    }

    /// `y_{L+K+1}`.
    pub fn right_wall(&self) -> f64 {
        self.y[self.l]
    }

    /// Pairs `(1-based index, y_j)` in index order.
    pub fn indexed(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.y.iter().enumerate().map(move |(i, &v)| {
            let j = if i < self.l { i + 1 } else { i + 1 + self.k };
            (j, v)
        })
    }
}

/// Conditioning on the exterior particles of `[L+1, L+K]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Window {
    pub boundary: BoundaryCondition,
}

impl Window {
    pub fn l(&self) -> usize {
        self.boundary.l
    }

    pub fn k(&self) -> usize {
        self.boundary.k
    }
}

/// `N sum_j (x_j - center_j)^2 / (2 tau)` subtracted from the log-density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Confinement {
    pub tau: f64,
    /// One center per particle, by original index.
    pub centers: Vec<f64>,
}

/// Gap penalty on the block `[k-M, k+M]` (1-based `k`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalConstraint {
    pub k: usize,
    pub m: usize,
    pub eps: f64,
}

impl LocalConstraint {
    pub const DEFAULT_EPS: f64 = 0.1;

    /// `i_M = 2M + 1`.
    pub fn block_len(&self) -> usize {
        2 * self.m + 1
    }

    /// 0-based index range of the block.
    pub fn block(&self) -> std::ops::Range<usize> {
        self.k - 1 - self.m..self.k + self.m
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k < self.m + 1 || self.k + self.m > n {
            return Err(Error::WindowOutOfRange {
                first: self.k.saturating_sub(self.m),
                last: self.k + self.m,
                n,
            });
        }
        Ok(())
    }

    /// `N^(1-eps) / i_M`, the scale inside `theta`.
    pub fn scale(&self, n: usize) -> f64 {
        (n as f64).powf(1.0 - self.eps) / self.block_len() as f64
    }
}

/// All particles restricted to `(-R, R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncation {
    pub r: f64,
}

/// `theta(x) = (|x| - 1)^2` outside `[-1, 1]`, zero inside.
pub fn theta(x: f64) -> f64 {
    let excess = x.abs() - 1.0;
    if excess > 0.0 {
        excess * excess
    } else {
        0.0
    }
}

pub(crate) fn theta_prime(x: f64) -> f64 {
    if x > 1.0 {
        2.0 * (x - 1.0)
    } else if x < -1.0 {
        2.0 * (x + 1.0)
    } else {
        0.0
    }
}

pub(crate) fn theta_second(x: f64) -> f64 {
    if x.abs() > 1.0 {
        2.0
    } else {
        0.0
    }
}

/// `phi = beta sum_{i<j in block} theta(N^(1-eps) (lambda_i - lambda_j) / i_M)`.
pub fn penalty_phi(constraint: &LocalConstraint, beta: f64, lambda: &[f64]) -> f64 {
    let scale = constraint.scale(lambda.len());
    let block = constraint.block();
    let mut total = 0.0;
    for i in block.clone() {
        for j in i + 1..block.end {
            total += theta(scale * (lambda[i] - lambda[j]));
        }
    }
    beta * total
}

/// Gradient of [`penalty_phi`] (zero outside the block).
pub fn penalty_phi_gradient(constraint: &LocalConstraint, beta: f64, lambda: &[f64]) -> Vec<f64> {
    let mut grad = vec![0.0; lambda.len()];
    add_phi_gradient(constraint, beta, lambda, &mut grad, 1.0);
    grad
}

fn add_phi_gradient(
    constraint: &LocalConstraint,
    beta: f64,
    lambda: &[f64],
    grad: &mut [f64],
    sign: f64,
) {
    let scale = constraint.scale(lambda.len());
    let block = constraint.block();
    for i in block.clone() {
        for j in i + 1..block.end {
            let d = sign * beta * scale * theta_prime(scale * (lambda[i] - lambda[j]));
            grad[i] += d;
            grad[j] -= d;
        }
    }
}

/// A composed target density on ordered configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    pub potential: Potential,
    pub beta: f64,
    pub n: usize,
    pub window: Option<Window>,
    pub confinement: Option<Confinement>,
    pub constraint: Option<LocalConstraint>,
    pub truncation: Option<Truncation>,
}

impl TargetSpec {
    /// The plain beta-ensemble.
    pub fn new(potential: Potential, beta: f64, n: usize) -> Self {
        TargetSpec {
            potential,
            beta,
            n,
            window: None,
            confinement: None,
            constraint: None,
            truncation: None,
        }
    }

    pub fn with_window(mut self, boundary: BoundaryCondition) -> Self {
        self.window = Some(Window { boundary });
        self
    }

    pub fn with_confinement(mut self, tau: f64, centers: Vec<f64>) -> Self {
        self.confinement = Some(Confinement { tau, centers });
        self
    }

    pub fn with_constraint(mut self, constraint: LocalConstraint) -> Self {
        self.constraint = Some(constraint);
        self
    }

    pub fn with_truncation(mut self, r: f64) -> Self {
        self.truncation = Some(Truncation { r });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta must be positive, got {}", self.beta)));
        }
        if self.n == 0 {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        if let Some(w) = &self.window {
            if w.boundary.n() != self.n {
                return Err(Error::ShapeMismatch {
                    expected: self.n,
                    found: w.boundary.n(),
                });
            }
        }
        if let Some(c) = &self.confinement {
            if !(c.tau > 0.0) {
                return Err(Error::InvalidArgument("tau must be positive".into()));
            }
            if c.centers.len() != self.n {
                return Err(Error::ShapeMismatch {
                    expected: self.n,
                    found: c.centers.len(),
                });
            }
        }
        if let Some(c) = &self.constraint {
            c.validate(self.n)?;
        }
        if let Some(t) = &self.truncation {
            if !(t.r > 0.0) {
                return Err(Error::InvalidArgument("truncation radius must be positive".into()));
            }
        }
        Ok(())
    }

    /// 0-based range of coordinates that move.
    pub fn free_range(&self) -> std::ops::Range<usize> {
        match &self.window {
            Some(w) => w.l()..w.l() + w.k(),
            None => 0..self.n,
        }
    }

    /// Checks ordering and the hard constraints.
    pub fn is_feasible(&self, lambda: &[f64]) -> bool {
        if lambda.len() != self.n || lambda.windows(2).any(|w| !(w[1] > w[0])) {
            return false;
        }
        if let Some(t) = &self.truncation {
            if lambda.iter().any(|x| !(x.abs() < t.r)) {
                return false;
            }
        }
        if let Some(w) = &self.window {
            let free = self.free_range();
            let fixed_match = lambda[..free.start]
                .iter()
                .chain(&lambda[free.end..])
                .zip(w.boundary.values())
                .all(|(a, b)| a == b);
            if !fixed_match {
                return false;
            }
        }
        true
    }

    /// Full unnormalized log-density; `-inf` outside the support.
    pub fn log_density_unnormalized(&self, c: &Configuration) -> f64 {
        let lambda = c.as_slice();
        if !self.is_feasible(lambda) {
            return f64::NEG_INFINITY;
        }
        self.evaluate(lambda, None, false)
    }

    /// Gradient of the log-density; zero in frozen coordinates.
    pub fn grad_log_density(&self, c: &Configuration) -> Result<Vec<f64>> {
        let lambda = c.as_slice();
        if lambda.len() != self.n {
            return Err(Error::ShapeMismatch {
                expected: self.n,
                found: lambda.len(),
            });
        }
        if let Some(i) = lambda.windows(2).position(|w| !(w[1] - w[0] > MIN_GAP)) {
            return Err(Error::DegenerateGap {
                index: i,
                next: i + 1,
                threshold: MIN_GAP,
            });
        }
        let mut grad = vec![0.0; self.n];
        self.evaluate(lambda, Some(&mut grad), false);
        Ok(grad)
    }

    /// Log-density terms that involve at least one free coordinate, optionally
    /// with the gradient. With `free_only = false` every term is included.
    /// Feasibility is the caller's responsibility.
    pub(crate) fn evaluate(&self, lambda: &[f64], grad: Option<&mut [f64]>, free_only: bool) -> f64 {
        let n = self.n;
        let beta = self.beta;
        let free = self.free_range();
        let mut scratch;
        let grad: &mut [f64] = match grad {
            Some(g) => {
                g.iter_mut().for_each(|v| *v = 0.0);
                g
            }
            None => {
                scratch = Vec::new();
                &mut scratch
            }
        };
        let want_grad = !grad.is_empty();

        // pair interaction
        let rows = if free_only { free.clone() } else { 0..n };
        let mut log_sum = 0.0;
        for i in rows.clone() {
            let xi = lambda[i];
            let mut gi = 0.0;
            // j > i
            let (row_log, row_grad) = pair_row(
                &lambda[i + 1..],
                xi,
                if want_grad { Some(&mut grad[i + 1..]) } else { None },
            );
            log_sum += row_log;
            gi -= row_grad;
            if free_only && free.start > 0 {
                // fixed partners on the left are not visited as rows
                let (left_log, left_grad) = pair_row_left(&lambda[..free.start], xi);
                log_sum += left_log;
                gi += left_grad;
            }
            if want_grad {
                grad[i] += gi;
            }
        }
        if want_grad {
            // pair gradient is beta * sum_{j != i} 1/(lambda_i - lambda_j)
            grad.iter_mut().for_each(|g| *g *= beta);
        }
        let mut value = beta * log_sum;

        // external field
        let field = 0.5 * n as f64 * beta;
        let sites = if free_only { free.clone() } else { 0..n };
        for i in sites.clone() {
            let (v, d1, _) = self.potential.eval(lambda[i]);
            value -= field * v;
            if want_grad {
                grad[i] -= field * d1;
            }
        }

        if let Some(c) = &self.confinement {
            let weight = n as f64 / c.tau;
            for j in free.clone() {
                let d = lambda[j] - c.centers[j];
                value -= 0.5 * weight * d * d;
                if want_grad {
                    grad[j] -= weight * d;
                }
            }
        }

        if let Some(c) = &self.constraint {
            value -= penalty_phi(c, beta, lambda);
            if want_grad {
                add_phi_gradient(c, beta, lambda, grad, -1.0);
            }
        }

        if want_grad && self.window.is_some() {
            for (j, g) in grad.iter_mut().enumerate() {
                if !free.contains(&j) {
                    *g = 0.0;
                }
            }
        }
        value
    }
}

/// `sum_j log(x_j - xi)` over `right` (all greater than `xi`) and
/// `sum_j 1/(x_j - xi)`, also adding `1/(x_j - xi)` into `grad_right`.
/// Logs are taken of products of eight gaps at a time.
fn pair_row(right: &[f64], xi: f64, grad_right: Option<&mut [f64]>) -> (f64, f64) {
    let mut log_sum = 0.0;
    let mut inv_sum = 0.0;
    let mut chunks_ok = true;
    match grad_right {
        Some(g) => {
            for (xs, gs) in right.chunks(8).zip(g.chunks_mut(8)) {
                let mut prod = 1.0;
                for (x, gj) in xs.iter().zip(gs.iter_mut()) {
                    let d = x - xi;
                    let inv = 1.0 / d;
                    inv_sum += inv;
                    *gj += inv;
                    prod *= d;
                }
                chunks_ok &= prod.is_normal();
                log_sum += prod.ln();
            }
        }
        None => {
            for xs in right.chunks(8) {
                let prod: f64 = xs.iter().map(|x| x - xi).product();
                chunks_ok &= prod.is_normal();
                log_sum += prod.ln();
            }
        }
    }
    if !chunks_ok {
        log_sum = right.iter().map(|x| (x - xi).ln()).sum();
    }
    (log_sum, inv_sum)
}

/// Same as [`pair_row`] for partners below `xi`; returns `sum 1/(xi - x_j)`.
fn pair_row_left(left: &[f64], xi: f64) -> (f64, f64) {
    let mut log_sum = 0.0;
    let mut inv_sum = 0.0;
    let mut chunks_ok = true;
    for xs in left.chunks(8) {
        let mut prod = 1.0;
        for x in xs {
            let d = xi - x;
            inv_sum += 1.0 / d;
            prod *= d;
        }
        chunks_ok &= prod.is_normal();
        log_sum += prod.ln();
    }
    if !chunks_ok {
        log_sum = left.iter().map(|x| (xi - x).ln()).sum();
    }
    (log_sum, inv_sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gauss(beta: f64, n: usize) -> TargetSpec {
        TargetSpec::new(Potential::quadratic(1.0).unwrap(), beta, n)
    }

    fn cfg(v: &[f64]) -> Configuration {
        Configuration::new(v.to_vec()).unwrap()
    }

    #[test]
    fn log_density_examples() {
        assert_eq!(gauss(2.0, 1).log_density_unnormalized(&cfg(&[0.0])), 0.0);
        let v = gauss(2.0, 2).log_density_unnormalized(&cfg(&[-1.0, 1.0]));
        assert!((v - (2.0 * 2f64.ln() - 4.0)).abs() < 1e-14);
        let t = gauss(2.0, 2).with_truncation(1.0);
        assert_eq!(t.log_density_unnormalized(&cfg(&[0.0, 1.5])), f64::NEG_INFINITY);
    }

    #[test]
    fn gradient_examples() {
        let g = gauss(2.0, 2).grad_log_density(&cfg(&[-1.0, 1.0])).unwrap();
        assert!((g[0] - 3.0).abs() < 1e-14 && (g[1] + 3.0).abs() < 1e-14);
        let g = gauss(1.0, 5).grad_log_density(&cfg(&[-1.2, -0.5, 0.0, 0.5, 1.2])).unwrap();
        for i in 0..5 {
            assert!((g[i] + g[4 - i]).abs() < 1e-12);
        }
        assert!(matches!(
            gauss(1.0, 2).grad_log_density(&cfg(&[0.0, 1e-15])),
            Err(Error::DegenerateGap { .. })
        ));
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta(0.0), 0.0);
        assert_eq!(theta(2.0), 1.0);
        assert_eq!(theta(-3.0), 4.0);
        assert_eq!(theta(1.0), 0.0);
        let c = LocalConstraint { k: 3, m: 1, eps: 0.1 };
        // block gaps far below i_M / N^(1-eps)
        let lambda = [-1.0, 0.0, 0.001, 0.002, 1.0];
        assert_eq!(penalty_phi(&c, 2.0, &lambda), 0.0);
        assert!(penalty_phi_gradient(&c, 2.0, &lambda).iter().all(|&g| g == 0.0));
        let spread = [-1.0, -0.9, 0.0, 0.9, 1.0];
        assert!(penalty_phi(&c, 2.0, &spread) > 0.0);
    }

    #[test]
    fn window_limits_free_coordinates() {
        let base = cfg(&[-1.0, -0.5, 0.0, 0.5, 1.0]);
        let bc = BoundaryCondition::from_configuration(&base, 1, 3).unwrap();
        assert_eq!(bc.values(), &[-1.0, 1.0]);
        assert_eq!(bc.left_wall(), -1.0);
        assert_eq!(bc.right_wall(), 1.0);
        assert_eq!(bc.get(5), Some(1.0));
        assert_eq!(bc.get(3), None);
        let t = gauss(2.0, 5).with_window(bc);
        t.validate().unwrap();
        let g = t.grad_log_density(&base).unwrap();
        assert_eq!(g[0], 0.0);
        assert_eq!(g[4], 0.0);
        // moving a fixed coordinate leaves the support
        let moved = cfg(&[-1.1, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(t.log_density_unnormalized(&moved), f64::NEG_INFINITY);
        // window must leave both walls
        assert!(BoundaryCondition::from_configuration(&base, 0, 3).is_err());
        assert!(BoundaryCondition::from_configuration(&base, 2, 3).is_err());
    }

    #[test]
    fn free_only_differs_by_a_constant() {
        let base = [-1.3, -0.7, -0.2, 0.1, 0.6, 0.9, 1.4];
        let bc = BoundaryCondition::from_configuration(&cfg(&base), 2, 3).unwrap();
        let t = gauss(1.5, 7)
            .with_window(bc)
            .with_confinement(0.3, base.to_vec())
            .with_constraint(LocalConstraint { k: 4, m: 1, eps: 0.1 });
        let mut other = base;
        other[2] = -0.3;
        other[3] = 0.2;
        other[4] = 0.5;
        let full = |x: &[f64]| t.evaluate(x, None, false);
        let part = |x: &[f64]| t.evaluate(x, None, true);
        assert!(((full(&base) - part(&base)) - (full(&other) - part(&other))).abs() < 1e-12);
        let mut g1 = vec![0.0; 7];
        let mut g2 = vec![0.0; 7];
        t.evaluate(&other, Some(&mut g1), false);
        t.evaluate(&other, Some(&mut g2), true);
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    fn central_difference(t: &TargetSpec, x: &[f64], i: usize, h: f64) -> f64 {
        let mut p = x.to_vec();
        let mut m = x.to_vec();
        p[i] += h;
        m[i] -= h;
        (t.evaluate(&p, None, false) - t.evaluate(&m, None, false)) / (2.0 * h)
    }

    fn composed(kind: u8, x: &[f64]) -> TargetSpec {
        let n = x.len();
        let p = Potential::quartic(1.0, 0.3).unwrap();
        let t = TargetSpec::new(p, 1.7, n);
        let centers: Vec<f64> = x.iter().map(|v| v * 0.9 + 0.01).collect();
        match kind {
            0 => t,
            1 => t.with_confinement(0.4, centers),
            // eps chosen so part of the block sits outside theta's flat region
            2 => t.with_constraint(LocalConstraint { k: n / 2 + 1, m: 2, eps: -0.5 }),
            3 => t.with_window(
                BoundaryCondition::from_configuration(&Configuration::new(x.to_vec()).unwrap(), 2, n - 4).unwrap(),
            ),
            _ => t.with_truncation(10.0),
        }
    }

    proptest! {
        #[test]
        fn gradient_matches_finite_differences(
            raw in prop::collection::vec(-1.5f64..1.5, 8..12),
            kind in 0u8..5,
        ) {
            let mut x = raw;
            x.sort_by(|a, b| a.total_cmp(b));
            prop_assume!(x.windows(2).all(|w| w[1] - w[0] > 0.05));
            let t = composed(kind, &x);
            t.validate().unwrap();
            let g = t.grad_log_density(&Configuration::new(x.clone()).unwrap()).unwrap();
            for i in t.free_range() {
                let fd = central_difference(&t, &x, i, 1e-5);
                prop_assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1.0), "i={} fd={} g={}", i, fd, g[i]);
            }
        }
    }
}
