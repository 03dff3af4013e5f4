use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compactly supported continuous test function `g` for Laplace functionals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    Zero,
    /// `a (e^{-u²/2} - e^{-k²/2})` for `u = (x - center)/width`, `|u| < k`,
    /// and zero elsewhere (`k = cutoff`).
    GaussianBump {
        amplitude: f64,
        center: f64,
        width: f64,
        #[serde(default = "default_cutoff")]
        cutoff: f64,
    },
    Sum {
        terms: Vec<TestFunction>,
    },
}

fn default_cutoff() -> f64 {
    3.0
}

impl TestFunction {
    pub fn bump(amplitude: f64, center: f64, width: f64) -> Self {
        TestFunction::GaussianBump {
            amplitude,
            center,
            width,
            cutoff: default_cutoff(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TestFunction::Zero => Ok(()),
            TestFunction::GaussianBump {
                amplitude,
                center,
                width,
                cutoff,
            } => {
                if !(amplitude.is_finite() && center.is_finite() && *width > 0.0 && *cutoff > 0.0)
                    || !width.is_finite()
                    || !cutoff.is_finite()
                {
                    return Err(Error::config(format!("invalid Gaussian bump {self:?}")));
                }
                Ok(())
            }
            TestFunction::Sum { terms } => terms.iter().try_for_each(TestFunction::validate),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Zero => 0.0,
            TestFunction::GaussianBump {
                amplitude,
                center,
                width,
                cutoff,
            } => {
                let u = (x - center) / width;
                if u.abs() >= *cutoff {
                    0.0
                } else {
                    amplitude * ((-0.5 * u * u).exp() - (-0.5 * cutoff * cutoff).exp())
                }
            }
            TestFunction::Sum { terms } => terms.iter().map(|t| t.eval(x)).sum(),
        }
    }

    /// Closed interval containing the support, `None` for `g ≡ 0`.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            TestFunction::Zero => None,
            TestFunction::GaussianBump {
                amplitude,
                center,
                width,
                cutoff,
            } => (*amplitude != 0.0).then(|| (center - cutoff * width, center + cutoff * width)),
            TestFunction::Sum { terms } => terms
                .iter()
                .filter_map(TestFunction::support)
                .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_continuous_and_compact() {
        let g = TestFunction::bump(2.0, 1.0, 0.5);
        assert_eq!(g.support(), Some((-0.5, 2.5)));
        assert_eq!(g.eval(2.5), 0.0);
        assert!(g.eval(2.5 - 1e-9).abs() < 1e-8);
        assert!((g.eval(1.0) - 2.0 * (1.0 - (-4.5f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn sums_add() {
        let a = TestFunction::bump(1.0, -3.0, 1.0);
        let b = TestFunction::bump(0.5, 4.0, 0.2);
        let s = TestFunction::Sum {
            terms: vec![a.clone(), b.clone(), TestFunction::Zero],
        };
        assert_eq!(s.support(), Some((-6.0, 4.6)));
        for x in [-3.5, 0.0, 4.1] {
            assert_eq!(s.eval(x), a.eval(x) + b.eval(x));
        }
        assert_eq!(TestFunction::Zero.support(), None);
    }
}
