//! Boundary conditions: good-set classification and window matching.

use serde::Serialize;

use crate::equilibrium::ClassicalLocations;
use crate::error::{Error, Result};
use crate::sampler::{BoundaryCondition, SampleSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GoodSetParams {
    pub delta: f64,
    pub eps0: f64,
    pub kappa: f64,
    pub l: usize,
    pub k: usize,
}

impl GoodSetParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.eps0 > 0.0 && self.kappa > 0.0 && self.kappa < 0.5) {
            return Err(Error::InvalidArgument(
                "good-set parameters need delta > 0, eps0 > 0 and kappa in (0, 1/2)".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a condition that can only be estimated from samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    Violated,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodSetReport {
    /// `|y_k - gamma_k| <= delta` away from the edges.
    pub near_classical: bool,
    /// `|y_k - gamma_k| <= 1` for every fixed index.
    pub globally_close: bool,
    /// `E (x_j - gamma_j)^2 <= delta^2` inside the window, estimated from
    /// conditional samples when supplied.
    pub conditional_second_moment: Verdict,
    /// Largest estimated `E (x_j - gamma_j)^2`, if samples were supplied.
    pub max_conditional_second_moment: Option<f64>,
    /// Both gaps next to the window are at least `exp(-N^eps0)`.
    pub edge_gaps: bool,
    /// Fixed index (1-based) with the largest `|y_k - gamma_k|`.
    pub worst_index: usize,
    pub worst_deviation: f64,
}

impl GoodSetReport {
    /// True when every verdict is known and positive.
    pub fn is_good(&self) -> bool {
        self.near_classical
            && self.globally_close
            && self.edge_gaps
            && self.conditional_second_moment == Verdict::Satisfied
    }
}

pub fn good_set_check(
    y: &BoundaryCondition,
    gamma: &ClassicalLocations,
    params: &GoodSetParams,
    conditional: Option<&SampleSet>,
) -> Result<GoodSetReport> {
    params.validate()?;
    let n = y.n();
    if gamma.n() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            found: gamma.n(),
        });
    }
    if y.l() != params.l || y.k() != params.k {
        return Err(Error::InvalidArgument(format!(
            "boundary has (L, K) = ({}, {}) but parameters say ({}, {})",
            y.l(),
            y.k(),
            params.l,
            params.k
        )));
    }
    let nf = n as f64;
    let lo = (nf * params.kappa / 2.0).ceil() as usize;
    let hi = (nf * (1.0 - params.kappa / 2.0)).floor() as usize;
    let mut near = true;
    let mut global = true;
    let mut worst = (0, 0.0);
    for (j, value) in y.indexed() {
        let d = (value - gamma.gamma[j - 1]).abs();
        if d > worst.1 {
            worst = (j, d);
        }
        if j >= lo && j <= hi && d > params.delta {
            near = false;
        }
        if d > 1.0 {
            global = false;
        }
    }

    let (l, k) = (params.l, params.k);
    let floor = (-nf.powf(params.eps0)).exp();
    let get = |j: usize| y.get(j).expect("index outside the window");
    let left_ok = l < 2 || get(l) - get(l - 1) >= floor;
    let right_ok = l + k + 2 > n || get(l + k + 2) - get(l + k + 1) >= floor;

    let (verdict, max_moment) = match conditional {
        None => (Verdict::Unknown, None),
        Some(s) if s.is_empty() => (Verdict::Unknown, None),
        Some(s) => {
            if s.n() != n {
                return Err(Error::ShapeMismatch {
                    expected: n,
                    found: s.n(),
                });
            }
            let mut worst_moment: f64 = 0.0;
            for j in l..l + k {
                let m = s
                    .configs
                    .iter()
                    .map(|c| (c[j] - gamma.gamma[j]).powi(2))
                    .sum::<f64>()
                    / s.len() as f64;
                worst_moment = worst_moment.max(m);
            }
            let v = if worst_moment <= params.delta * params.delta {
                Verdict::Satisfied
            } else {
                Verdict::Violated
            };
            (v, Some(worst_moment))
        }
    };

    Ok(GoodSetReport {
        near_classical: near,
        globally_close: global,
        conditional_second_moment: verdict,
        max_conditional_second_moment: max_moment,
        edge_gaps: left_ok && right_ok,
        worst_index: worst.0,
        worst_deviation: worst.1,
    })
}

/// Rescaling that maps a centered boundary window onto the reference one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchingSpec {
    /// `s = theta_{L'} / y_L` after centering both windows.
    pub s: f64,
    /// Reference locations shifted so that `-theta_{L'} = theta_{L'+K+1}`.
    pub theta: Vec<f64>,
    /// Shift subtracted from `y` so that `-y_L = y_{L+K+1}`.
    pub shift: f64,
}

/// `theta` is the full reference location vector, `l_ref` its window start.
pub fn matching(y: &BoundaryCondition, theta: &[f64], l_ref: usize) -> Result<MatchingSpec> {
    let (l, k) = (y.l(), y.k());
    if l_ref < 1 || l_ref + k + 1 > theta.len() {
        return Err(Error::WindowOutOfRange {
            first: l_ref + 1,
            last: l_ref + k,
            n: theta.len(),
        });
    }
    let y_left = y.left_wall();
    let y_right = y.right_wall();
    let shift = 0.5 * (y_left + y_right);
    let yc = y_left - shift;
    if yc == 0.0 {
        return Err(Error::DegenerateWindow(format!("y_L coincides with y_(L+K+1) at L = {l}")));
    }
    let theta_shift = 0.5 * (theta[l_ref - 1] + theta[l_ref + k]);
    let centered: Vec<f64> = theta.iter().map(|t| t - theta_shift).collect();
    let s = centered[l_ref - 1] / yc;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::DegenerateWindow(format!("scaling factor {s} is not positive")));
    }
    Ok(MatchingSpec {
        s,
        theta: centered,
        shift,
    })
}

/// `(j, |gamma_{L+j} - theta_{L'+j}|)` for `|j| <= range` (indices that
/// fall outside either vector are skipped).
pub fn matching_error(gamma: &[f64], theta: &[f64], l: usize, l_ref: usize, range: usize) -> Vec<(i64, f64)> {
    let r = range as i64;
    (-r..=r)
        .filter_map(|j| {
            let a = l as i64 + j;
            let b = l_ref as i64 + j;
            if a < 1 || b < 1 || a as usize > gamma.len() || b as usize > theta.len() {
                return None;
            }
            Some((j, (gamma[a as usize - 1] - theta[b as usize - 1]).abs()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::EquilibriumMeasure;
    use crate::potential::Potential;
    use crate::sampler::Configuration;

    fn setup(n: usize) -> ClassicalLocations {
        EquilibriumMeasure::solve(&Potential::quadratic(1.0).unwrap())
            .unwrap()
            .classical_locations(n)
    }

    fn params(l: usize, k: usize) -> GoodSetParams {
        GoodSetParams {
            delta: 0.05,
            eps0: 0.5,
            kappa: 0.2,
            l,
            k,
        }
    }

    #[test]
    fn classical_boundary_is_good_except_unknown_moment() {
        let g = setup(40);
        let c = Configuration::new(g.gamma.clone()).unwrap();
        let y = BoundaryCondition::from_configuration(&c, 15, 6).unwrap();
        let r = good_set_check(&y, &g, &params(15, 6), None).unwrap();
        assert!(r.near_classical && r.globally_close && r.edge_gaps);
        assert_eq!(r.conditional_second_moment, Verdict::Unknown);
        assert!(!r.is_good());
        // conditional samples sitting on gamma satisfy the moment condition
        let s = SampleSet::from_configs(vec![c], 2.0, "").unwrap();
        let r = good_set_check(&y, &g, &params(15, 6), Some(&s)).unwrap();
        assert_eq!(r.conditional_second_moment, Verdict::Satisfied);
        assert!(r.is_good());
    }

    #[test]
    fn displaced_coordinate_breaks_global_closeness() {
        let g = setup(40);
        let mut x = g.gamma.clone();
        x[39] += 2.0;
        let c = Configuration::new(x).unwrap();
        let y = BoundaryCondition::from_configuration(&c, 15, 6).unwrap();
        let r = good_set_check(&y, &g, &params(15, 6), None).unwrap();
        assert!(!r.globally_close);
        assert_eq!(r.worst_index, 40);
    }

    #[test]
    fn matching_examples() {
        let theta: Vec<f64> = (0..12).map(|i| i as f64 - 5.5).collect();
        // y equal to theta: s = 1
        let c = Configuration::new(theta.clone()).unwrap();
        let y = BoundaryCondition::from_configuration(&c, 3, 5).unwrap();
        let m = matching(&y, &theta, 3).unwrap();
        assert!((m.s - 1.0).abs() < 1e-15);
        // doubling y halves s
        let c2 = Configuration::new(theta.iter().map(|t| 2.0 * t + 1.0).collect()).unwrap();
        let y2 = BoundaryCondition::from_configuration(&c2, 3, 5).unwrap();
        let m2 = matching(&y2, &theta, 3).unwrap();
        assert!((m2.s - 0.5).abs() < 1e-15);
        assert!((m2.shift - 0.0).abs() < 1e-14);
    }

    #[test]
    fn self_matching_error_vanishes() {
        let g = setup(1024);
        let rows = matching_error(&g.gamma, &g.gamma, 400, 400, 50);
        assert_eq!(rows.len(), 101);
        assert!(rows.iter().all(|&(_, d)| d <= 1e-3));
    }
}
