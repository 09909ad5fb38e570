//! Test functions for gap observables.

use serde::{Deserialize, Serialize};

/// A bounded test function on the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GapKernel {
    /// `exp(1 / (((x - center)/width)^2 - 1))` on `|x - center| < width`, else 0.
    Bump { center: f64, width: f64 },
    /// `exp(-x^2 / (2 sigma^2)) cos(omega x)`.
    GaussCosine { sigma: f64, omega: f64 },
}

impl Default for GapKernel {
    fn default() -> Self {
        GapKernel::Bump {
            center: 0.0,
            width: 2.0,
        }
    }
}

impl GapKernel {
    pub fn bump(width: f64) -> Self {
        GapKernel::Bump { center: 0.0, width }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            GapKernel::Bump { center, width } => {
                let u = (x - center) / width;
                let d = u * u - 1.0;
                if d < 0.0 {
                    (1.0 / d).exp()
                } else {
                    0.0
                }
            }
            GapKernel::GaussCosine { sigma, omega } => {
                (-(x * x) / (2.0 * sigma * sigma)).exp() * (omega * x).cos()
            }
        }
    }

    /// Short identifier used in output tables.
    pub fn id(&self) -> String {
        match *self {
            GapKernel::Bump { center, width } => format!("bump(c={center},w={width})"),
            GapKernel::GaussCosine { sigma, omega } => format!("gausscos(s={sigma},o={omega})"),
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let ok = match *self {
            GapKernel::Bump { center, width } => center.is_finite() && width.is_finite() && width > 0.0,
            GapKernel::GaussCosine { sigma, omega } => sigma.is_finite() && sigma > 0.0 && omega.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(crate::Error::InvalidArgument(format!("invalid kernel {self:?}")))
        }
    }
}

/// Separable kernel on `R^n`: the product of one-dimensional factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductKernel(pub Vec<GapKernel>);

impl ProductKernel {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.0.len());
        self.0.iter().zip(x).map(|(k, &v)| k.eval(v)).product()
    }

    pub fn id(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(GapKernel::id).collect();
        parts.join("x")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_compactly_supported() {
        let k = GapKernel::default();
        assert!((k.eval(0.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(k.eval(2.0), 0.0);
        assert_eq!(k.eval(-3.0), 0.0);
        assert!(k.eval(1.999) >= 0.0 && k.eval(1.999) < 1e-100);
        assert_eq!(k.eval(0.7), k.eval(-0.7));
    }

    #[test]
    fn gauss_cosine_values() {
        let k = GapKernel::GaussCosine { sigma: 1.0, omega: std::f64::consts::PI };
        assert_eq!(k.eval(0.0), 1.0);
        assert!((k.eval(1.0) + (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn product_kernel_multiplies() {
        let p = ProductKernel(vec![GapKernel::bump(2.0), GapKernel::bump(1.0)]);
        let x = [0.3, -0.2];
        assert_eq!(p.eval(&x), GapKernel::bump(2.0).eval(0.3) * GapKernel::bump(1.0).eval(-0.2));
        assert_eq!(p.dim(), 2);
    }
}
