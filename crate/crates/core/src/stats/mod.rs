//! Monte Carlo experiments with reports.
//!
//! Realizations are independent tasks mapped in parallel and reduced in
//! realization order, so a report depends only on the configuration and the
//! seed, never on the number of worker threads. Every convergence experiment
//! carries a free-field control row (`V ≡ 0`) that must be exact.

mod clock;
mod holder;
mod laplace;
mod misc;
mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::potential::PotentialModel;
use crate::spectrum::{SpectrumConfig, TestFunction};

pub use clock::{run_clock_experiment, run_theta_experiment};
pub use holder::{run_holder_experiment, run_moment_experiment};
pub use laplace::{run_clock_laplace_experiment, subsequence_s, Subsequence};
pub use misc::{run_corr_experiment, run_dynsys_check, run_phase_dump, run_spectrum_dump};
pub use report::{config_hash, Comparison, ExperimentReport, Fit, Gate, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Clock,
    Theta,
    Holder,
    Moments,
    Laplace,
    Spectrum,
    PhaseDump,
    Corr,
    DynsysCheck,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Clock => "clock",
            ExperimentKind::Theta => "theta",
            ExperimentKind::Holder => "holder",
            ExperimentKind::Moments => "moments",
            ExperimentKind::Laplace => "laplace",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::PhaseDump => "phase-dump",
            ExperimentKind::Corr => "corr",
            ExperimentKind::DynsysCheck => "dynsys-check",
        }
    }
}

/// `n_k = round(k^exponent)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ladder {
    pub exponent: f64,
    pub k_values: Vec<u64>,
}

/// Pass/fail thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Gates {
    /// Largest allowed median `|n·gap - π|` at the largest `n`.
    pub clock_median_max: f64,
    /// Largest allowed median `sup_c |Θ(c) - c|` at the largest `n`.
    pub theta_median_max: f64,
    pub holder_slope_min: f64,
    pub holder_stderr_max: f64,
    /// Defaults to `(2α - 1) / 2`.
    pub moment_exponent_min: Option<f64>,
    pub laplace_sigmas: f64,
    pub laplace_identity_tol: f64,
    pub free_field_tol: f64,
    /// Expected correlation decay rate for `corr`, if known.
    pub decay_rate: Option<f64>,
    pub decay_rate_rel_tol: f64,
}

impl Default for Gates {
    fn default() -> Self {
        Self {
            clock_median_max: 0.1,
            theta_median_max: 0.15,
            holder_slope_min: 0.4,
            holder_stderr_max: 0.1,
            moment_exponent_min: None,
            laplace_sigmas: 3.0,
            laplace_identity_tol: 1e-6,
            free_field_tol: 1e-9,
            decay_rate: None,
            decay_rate_rel_tol: 0.1,
        }
    }
}

/// Parameters of every experiment; each experiment reads the fields it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentParams {
    pub kappa0: f64,
    /// Interval lengths, increasing.
    pub n_values: Vec<usize>,
    /// Replaces `n_values` by `round(k^exponent)` when present.
    pub ladder: Option<Ladder>,
    pub realizations: u64,
    /// Eigenvalue window half-width in rescaled units.
    pub c_max: f64,
    /// `Θ` is sampled on `[-c_range, c_range]` with step `c_step`.
    pub c_range: f64,
    pub c_step: f64,
    pub delta_kappas: Vec<f64>,
    /// Hölder runs: `sup` over `t ∈ [m, horizon]`.
    pub m: usize,
    pub horizon: usize,
    /// Moment runs: dyadic blocks `[2^k, 2^{k+1}]` for `k` in this range.
    pub block_k_min: u32,
    pub block_k_max: u32,
    /// Laplace runs along the subsequence `κ_0 n_k ≈ β mod π` when present,
    /// along `n_values` otherwise.
    pub beta: Option<f64>,
    pub subsequence_count: usize,
    pub search_stride: usize,
    pub search_limit: usize,
    pub test_function: TestFunction,
    pub histogram_bins: usize,
    /// Correlation runs.
    pub sequence_length: usize,
    pub max_lag: usize,
    /// Realization index for the single-realization dumps.
    pub realization: u64,
    pub samples: usize,
    pub spectrum: SpectrumConfig,
    pub gates: Gates,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        Self {
            kappa0: 1.0,
            n_values: vec![500, 1000, 2000, 5000],
            ladder: None,
            realizations: 200,
            c_max: 15.0,
            c_range: 10.0,
            c_step: 0.25,
            delta_kappas: vec![1e-3, 3e-3, 1e-2, 3e-2, 1e-1],
            m: 50,
            horizon: 2000,
            block_k_min: 4,
            block_k_max: 9,
            beta: None,
            subsequence_count: 4,
            search_stride: 200,
            search_limit: 1_000_000,
            test_function: TestFunction::bump(1.0, 0.0, 1.5),
            histogram_bins: 16,
            sequence_length: 1000,
            max_lag: 30,
            realization: 0,
            samples: 20_000,
            spectrum: SpectrumConfig::default(),
            gates: Gates::default(),
        }
    }
}

impl ExperimentParams {
    /// Interval lengths after applying the ladder.
    pub fn lengths(&self) -> Vec<usize> {
        match &self.ladder {
            Some(l) => l
                .k_values
                .iter()
                .map(|&k| (k as f64).powf(l.exponent).round() as usize)
                .collect(),
            None => self.n_values.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lengths = self.lengths();
        if lengths.is_empty() || lengths.windows(2).any(|w| w[1] <= w[0]) || lengths[0] < 2 {
            return Err(Error::config(format!(
                "interval lengths {lengths:?} must be increasing and ≥ 2"
            )));
        }
        if self.realizations < 2 {
            return Err(Error::config("at least 2 realizations are required"));
        }
        if !(self.kappa0 > 0.0)
            || !(self.c_max > 0.0)
            || !(self.c_range > 0.0)
            || !(self.c_step > 0.0)
        {
            return Err(Error::config(
                "kappa0, c_max, c_range and c_step must be positive",
            ));
        }
        if self.delta_kappas.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::config("delta_kappas must be positive"));
        }
        if self.m >= self.horizon {
            return Err(Error::config(format!(
                "m = {} must be below horizon = {}",
                self.m, self.horizon
            )));
        }
        if self.block_k_min > self.block_k_max || self.block_k_max > 24 {
            return Err(Error::config(
                "block range must satisfy block_k_min ≤ block_k_max ≤ 24",
            ));
        }
        if let Some(beta) = self.beta {
            if !(0.0..std::f64::consts::PI).contains(&beta) {
                return Err(Error::config(format!("beta = {beta} outside [0, π)")));
            }
        }
        if self.histogram_bins == 0 || self.search_stride == 0 || self.subsequence_count == 0 {
            return Err(Error::config(
                "histogram_bins, search_stride and subsequence_count must be positive",
            ));
        }
        self.test_function.validate()?;
        self.spectrum.validate()
    }
}

/// Model, parameters and seed of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: PotentialModel,
    pub params: ExperimentParams,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(model: PotentialModel, params: ExperimentParams, seed: u64) -> Self {
        Self {
            model,
            params,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.params.validate()
    }

    /// The configuration as embedded in reports; it excludes anything that
    /// does not influence results (worker count, output location).
    pub fn effective_json(&self) -> Value {
        json!({
            "model": self.model,
            "experiment": self.params,
            "run": { "seed": self.seed },
        })
    }

    fn with_model(&self, model: PotentialModel) -> Self {
        Self {
            model,
            params: self.params.clone(),
            seed: self.seed,
        }
    }

    fn free_control(&self) -> Self {
        let mut model = PotentialModel::free();
        model.profile = self.model.profile.clone();
        self.with_model(model)
    }
}

pub fn run_experiment(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    match kind {
        ExperimentKind::Clock => run_clock_experiment(cfg),
        ExperimentKind::Theta => run_theta_experiment(cfg),
        ExperimentKind::Holder => run_holder_experiment(cfg),
        ExperimentKind::Moments => run_moment_experiment(cfg),
        ExperimentKind::Laplace => run_clock_laplace_experiment(cfg),
        ExperimentKind::Spectrum => run_spectrum_dump(cfg),
        ExperimentKind::PhaseDump => run_phase_dump(cfg),
        ExperimentKind::Corr => run_corr_experiment(cfg),
        ExperimentKind::DynsysCheck => run_dynsys_check(cfg),
    }
}

/// Maps `f` over realizations `0 .. count` in parallel, in order.
pub(crate) fn map_realizations<T, F>(count: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..count)
        .into_par_iter()
        .map(|r| f(r).map_err(|e| e.in_realization(r)))
        .collect()
}

/// Mean and its standard error.
pub(crate) fn mean_se(xs: &[f64]) -> (f64, f64) {
    let (mean, var) = crate::amplitudes::mean_var(xs);
    (mean, (var / xs.len() as f64).sqrt())
}

/// Median and an order-statistic standard error: half the spread between
/// ranks `N/2 ± √N/2`.
pub(crate) fn median_se(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let median = if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    };
    let half = (n as f64).sqrt() / 2.0;
    let lo = ((n as f64 / 2.0 - half).floor().max(0.0)) as usize;
    let hi = ((n as f64 / 2.0 + half).ceil() as usize).min(n - 1);
    (median, 0.5 * (v[hi] - v[lo]))
}

/// Leave-one-out jackknife: `estimator` maps column means of `rows` (one row
/// per realization) to a scalar; returns the full-sample value and its
/// jackknife standard error.
pub(crate) fn jackknife(rows: &[Vec<f64>], estimator: impl Fn(&[f64]) -> f64) -> (f64, f64) {
    let r = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    let mut sums = vec![0.0; cols];
    for row in rows {
        for (s, x) in sums.iter_mut().zip(row) {
            *s += x;
        }
    }
    let full: Vec<f64> = sums.iter().map(|s| s / r as f64).collect();
    let value = estimator(&full);
    if r < 2 {
        return (value, f64::NAN);
    }
    let loo: Vec<f64> = rows
        .iter()
        .map(|row| {
            let means: Vec<f64> = sums
                .iter()
                .zip(row)
                .map(|(s, x)| (s - x) / (r - 1) as f64)
                .collect();
            estimator(&means)
        })
        .collect();
    let mean_loo = loo.iter().sum::<f64>() / r as f64;
    let var = loo.iter().map(|x| (x - mean_loo).powi(2)).sum::<f64>() * (r - 1) as f64 / r as f64;
    (value, var.sqrt())
}

/// With a free model the random rows are controls themselves, so only the
/// exactness gates apply.
pub(crate) fn applicable(cfg: &ExperimentConfig, mut gates: Vec<Gate>) -> Vec<Gate> {
    if cfg.model.is_free() {
        gates.retain(|g| g.name.starts_with("free_field") || g.name.starts_with("identity"));
    }
    gates
}

pub(crate) fn num(x: f64) -> Value {
    json!(x)
}
