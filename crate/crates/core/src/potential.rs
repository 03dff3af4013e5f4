//! Alloy-type potentials `V(t) = Σ_j w_j ω(j) f(t - j)` on `[0, n]`.
//!
//! Cells are `[j, j + 1)` for `j = 0 .. n - 1`. Cell 0 carries no potential;
//! cells `1 ..= n - 1` carry the weight `j^{-α}` ([`CouplingMode::Standard`])
//! or `n^{-α}` ([`CouplingMode::DecayingCoupling`]).

use serde::{Deserialize, Serialize};

use crate::amplitudes::{AmplitudeSpec, AmplitudeStream};
use crate::error::{Error, Result};

/// Single-site profile `f` supported in `[0, 1]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SiteProfile {
    /// `f = 1` on `[0, 1)`.
    #[default]
    Indicator,
    /// `f(s) = 16 s² (1 - s)²`, C¹ with `f(0) = f(1) = 0` and `max f = 1`.
    Bump,
    /// Piecewise constant on the uniform grid `[i/m, (i+1)/m)`.
    Table { values: Vec<f64> },
}

impl SiteProfile {
    pub fn validate(&self) -> Result<()> {
        if let SiteProfile::Table { values } = self {
            if values.is_empty() {
                return Err(Error::config("table profile needs at least one value"));
            }
            if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                return Err(Error::config(format!(
                    "table profile value {v} is not finite"
                )));
            }
        }
        Ok(())
    }

    /// `‖f‖_∞`.
    pub fn sup_norm(&self) -> f64 {
        match self {
            SiteProfile::Indicator | SiteProfile::Bump => 1.0,
            SiteProfile::Table { values } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// `f(s)` for `s ∈ [0, 1]`; zero outside.
    pub fn eval(&self, s: f64) -> f64 {
        if !(0.0..=1.0).contains(&s) {
            return 0.0;
        }
        match self {
            SiteProfile::Indicator => {
                if s < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            SiteProfile::Bump => {
                let u = s * (1.0 - s);
                16.0 * u * u
            }
            SiteProfile::Table { values } => {
                let m = values.len();
                if s >= 1.0 {
                    return 0.0;
                }
                values[((s * m as f64) as usize).min(m - 1)]
            }
        }
    }

    /// `(length, height)` pieces covering the unit cell, if `f` is piecewise
    /// constant.
    pub fn pieces(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            SiteProfile::Indicator => Some(vec![(1.0, 1.0)]),
            SiteProfile::Bump => None,
            SiteProfile::Table { values } => {
                let len = 1.0 / values.len() as f64;
                Some(values.iter().map(|&v| (len, v)).collect())
            }
        }
    }

    pub fn is_piecewise_constant(&self) -> bool {
        !matches!(self, SiteProfile::Bump)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    /// Weight `j^{-α}` on cell `j`.
    #[default]
    Standard,
    /// Weight `n^{-α}` on every cell of `[0, n]`.
    DecayingCoupling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialModel {
    pub alpha: f64,
    #[serde(default)]
    pub profile: SiteProfile,
    pub amplitudes: AmplitudeSpec,
    #[serde(default)]
    pub mode: CouplingMode,
}

impl PotentialModel {
    pub fn new(
        alpha: f64,
        profile: SiteProfile,
        amplitudes: AmplitudeSpec,
        mode: CouplingMode,
    ) -> Result<Self> {
        let model = Self {
            alpha,
            profile,
            amplitudes,
            mode,
        };
        model.validate()?;
        Ok(model)
    }

    /// Standard-mode model with an indicator profile.
    pub fn indicator(alpha: f64, amplitudes: AmplitudeSpec) -> Result<Self> {
        Self::new(
            alpha,
            SiteProfile::Indicator,
            amplitudes,
            CouplingMode::Standard,
        )
    }

    /// `V ≡ 0`.
    pub fn free() -> Self {
        Self {
            alpha: 1.0,
            profile: SiteProfile::Indicator,
            amplitudes: AmplitudeSpec::Zero,
            mode: CouplingMode::Standard,
        }
    }

    /// Checks `α > 1/2` in standard mode and `α > 0` with decaying coupling.
    pub fn validate(&self) -> Result<()> {
        let floor = match self.mode {
            CouplingMode::Standard => 0.5,
            CouplingMode::DecayingCoupling => 0.0,
        };
        if !(self.alpha > floor) || !self.alpha.is_finite() {
            return Err(Error::config(format!(
                "alpha = {} must exceed {floor} in {:?} mode",
                self.alpha, self.mode
            )));
        }
        self.profile.validate()?;
        self.amplitudes.validate()
    }

    pub fn is_free(&self) -> bool {
        self.amplitudes.is_zero() || self.profile.sup_norm() == 0.0
    }

    /// Cell weight `j^{-α}` or `n^{-α}` for `1 ≤ j ≤ n - 1`.
    pub fn weight(&self, j: usize, n: usize) -> Result<f64> {
        if j == 0 || j >= n {
            return Err(Error::domain(format!(
                "cell {j} outside the active range 1..{n}"
            )));
        }
        Ok(match self.mode {
            CouplingMode::Standard => (j as f64).powf(-self.alpha),
            CouplingMode::DecayingCoupling => (n as f64).powf(-self.alpha),
        })
    }

    /// `ω(j) · weight(j, n)`.
    pub fn cell_coefficient(&self, j: usize, n: usize, omega: f64) -> Result<f64> {
        Ok(omega * self.weight(j, n)?)
    }

    /// Draws the amplitudes of one realization on `[0, n]`.
    pub fn realize(&self, seed: u64, realization: u64, n: usize) -> Result<RealizedPotential> {
        if n < 1 {
            return Err(Error::domain("interval length must be at least 1"));
        }
        let mut coefficients = vec![0.0; n];
        if !self.amplitudes.is_zero() && n > 1 {
            let mut stream = AmplitudeStream::new(&self.amplitudes, seed, realization, n - 1)?;
            for (j, c) in coefficients.iter_mut().enumerate().skip(1) {
                *c = self.cell_coefficient(j, n, stream.next_value()?)?;
            }
        }
        Ok(RealizedPotential {
            profile: self.profile.clone(),
            coefficients,
        })
    }

    /// Same realization with every cell coefficient replaced by `coefficients`.
    pub fn with_coefficients(&self, coefficients: Vec<f64>) -> RealizedPotential {
        RealizedPotential {
            profile: self.profile.clone(),
            coefficients,
        }
    }

    /// `Σ_{j=1}^{n-1} weight(j, n) · ‖f‖_∞`.
    pub fn envelope_sum(&self, n: usize) -> f64 {
        let sup = self.profile.sup_norm();
        (1..n).map(|j| self.weight(j, n).unwrap_or(0.0) * sup).sum()
    }
}

/// One realization of `V` on `[0, n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizedPotential {
    pub profile: SiteProfile,
    /// Index `j` holds the coefficient of cell `[j, j + 1)`; index 0 is 0.
    pub coefficients: Vec<f64>,
}

impl RealizedPotential {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn is_free(&self) -> bool {
        self.profile.sup_norm() == 0.0 || self.coefficients.iter().all(|&c| c == 0.0)
    }

    pub fn cell_coefficient(&self, j: usize) -> f64 {
        self.coefficients[j]
    }

    /// `V(t)` for `t ∈ [0, n]`; `V(n) = 0`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        let n = self.coefficients.len();
        if !(0.0..=n as f64).contains(&t) {
            return Err(Error::domain(format!("t = {t} outside [0, {n}]")));
        }
        let j = t.floor() as usize;
        if j >= n {
            return Ok(0.0);
        }
        Ok(self.coefficients[j] * self.profile.eval(t - j as f64))
    }

    /// Truncation to `[0, m]`.
    pub fn truncated(&self, m: usize) -> RealizedPotential {
        RealizedPotential {
            profile: self.profile.clone(),
            coefficients: self.coefficients[..m.min(self.coefficients.len())].to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ones() -> AmplitudeSpec {
        AmplitudeSpec::MarkovChain {
            transition: vec![vec![1.0]],
            values: vec![1.0],
            initial: vec![1.0],
        }
    }

    fn minus_ones() -> AmplitudeSpec {
        AmplitudeSpec::MarkovChain {
            transition: vec![vec![1.0]],
            values: vec![-1.0],
            initial: vec![1.0],
        }
    }

    #[test]
    fn standard_coefficient() {
        let model = PotentialModel::indicator(0.75, ones()).unwrap();
        assert_eq!(model.cell_coefficient(16, 100, 1.0).unwrap(), 0.125);
        assert_eq!(model.cell_coefficient(16, 100, 0.0).unwrap(), 0.0);
        assert!(matches!(
            model.cell_coefficient(0, 100, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn decaying_coupling_is_flat() {
        let model = PotentialModel::new(
            0.5,
            SiteProfile::Indicator,
            minus_ones(),
            CouplingMode::DecayingCoupling,
        )
        .unwrap();
        let v = model.realize(0, 0, 100).unwrap();
        assert_eq!(v.coefficients[0], 0.0);
        assert!(v.coefficients[1..].iter().all(|&c| (c + 0.1).abs() < 1e-15));
    }

    #[test]
    fn alpha_gate() {
        assert!(PotentialModel::indicator(0.5, ones()).is_err());
        assert!(PotentialModel::indicator(0.51, ones()).is_ok());
        assert!(PotentialModel::new(
            0.0,
            SiteProfile::Indicator,
            ones(),
            CouplingMode::DecayingCoupling
        )
        .is_err());
    }

    #[test]
    fn evaluation_examples() {
        let model = PotentialModel::indicator(1.0, ones()).unwrap();
        let v = model.realize(0, 0, 10).unwrap();
        assert_eq!(v.evaluate(0.5).unwrap(), 0.0);
        assert_eq!(v.evaluate(2.5).unwrap(), 0.5);
        assert_eq!(v.evaluate(10.0).unwrap(), 0.0);
        assert!(v.evaluate(10.5).is_err());
        assert!(v.evaluate(-0.1).is_err());

        let bump =
            PotentialModel::new(1.0, SiteProfile::Bump, ones(), CouplingMode::Standard).unwrap();
        let b = bump.realize(0, 0, 10).unwrap();
        for j in 0..=10 {
            assert_eq!(b.evaluate(j as f64).unwrap(), 0.0);
        }
        assert!((b.evaluate(3.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn table_profile() {
        let p = SiteProfile::Table {
            values: vec![0.5, -2.0, 1.0, 0.0],
        };
        assert_eq!(p.sup_norm(), 2.0);
        assert_eq!(p.eval(0.3), -2.0);
        assert_eq!(p.eval(0.99), 0.0);
        assert_eq!(p.pieces().unwrap().len(), 4);
        assert!(SiteProfile::Table { values: vec![] }.validate().is_err());
    }

    #[test]
    fn json_shape() {
        let model: PotentialModel = serde_json::from_str(
            r#"{"alpha": 0.75, "profile": {"kind": "bump"}, "amplitudes": {"kind": "iid_uniform"}, "mode": "decaying_coupling"}"#,
        )
        .unwrap();
        assert_eq!(model.profile, SiteProfile::Bump);
        assert_eq!(model.mode, CouplingMode::DecayingCoupling);
        let err = serde_json::from_str::<PotentialModel>(
            r#"{"alpha": 0.75, "amplitudes": {"kind": "zero"}, "extra": 1}"#,
        );
        assert!(err.is_err());
    }

    proptest! {
        #[test]
        fn decay_envelope(seed in any::<u64>(), alpha in 0.55f64..2.0, bump in any::<bool>()) {
            let profile = if bump { SiteProfile::Bump } else { SiteProfile::Indicator };
            let model = PotentialModel::new(alpha, profile, AmplitudeSpec::IidUniform, CouplingMode::Standard).unwrap();
            let n = 64;
            let v = model.realize(seed, 0, n).unwrap();
            for i in 0..(n * 16) {
                let t = i as f64 / 16.0;
                let j = t.floor();
                let value = v.evaluate(t).unwrap();
                if j < 1.0 {
                    prop_assert_eq!(value, 0.0);
                } else {
                    prop_assert!(value.abs() <= j.powf(-alpha) * (1.0 + 1e-15));
                }
            }
        }
    }
}
