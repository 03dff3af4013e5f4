//! Amplitude processes `ω(1), ω(2), ...` with `|ω(j)| ≤ 1`.
//!
//! Case A processes are i.i.d. (uniform or Rademacher). Case B processes have
//! exponentially decaying correlations: finite Markov chains, and observables
//! of the doubling map, the baker's map and the cat map sampled along an
//! orbit started from a Lebesgue-typical point. Every generator's state at
//! step `j` is a function of what it emitted up to `j`, so the processes are
//! adapted to their natural filtration by construction.

use std::f64::consts::PI;

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynsys::{
    dyadic_fraction, rectangle_value, validate_rectangles, BitWord, FixedPointT2, Observable,
    Rectangle,
};
use crate::error::{Error, Result};
use crate::rng::{lane, stream_rng};

const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AmplitudeSpec {
    /// `ω ≡ 0`, the free Laplacian.
    Zero,
    /// i.i.d. uniform on `[-1, 1]`.
    IidUniform,
    /// i.i.d. `±1` with equal probability.
    IidRademacher,
    /// Finite Markov chain; `transition[a][b] = P(next = b | current = a)`.
    MarkovChain {
        transition: Vec<Vec<f64>>,
        values: Vec<f64>,
        initial: Vec<f64>,
    },
    /// `ω(j) = F(T^j θ)` for the doubling map `T`.
    Dyadic { observable: Observable },
    /// `ω(j) = F(T^j u)` for the baker's map `T`.
    Baker { observable: Observable },
    /// Rectangle observable along a cat-map orbit. Without an explicit
    /// budget the orbit gets `2N + 64` bits for a sequence of length `N`.
    CatMap {
        rectangles: Vec<Rectangle>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        precision_bits: Option<u32>,
    },
    /// `ω(j) = cos(2^j · 2πθ)`: uncorrelated but not independent.
    CosineDyadic,
}

impl AmplitudeSpec {
    /// Two-state chain on values `(+1, -1)` that keeps its state with
    /// probability `stay`, started from its stationary law.
    pub fn two_state_chain(stay: f64) -> Self {
        AmplitudeSpec::MarkovChain {
            transition: vec![vec![stay, 1.0 - stay], vec![1.0 - stay, stay]],
            values: vec![1.0, -1.0],
            initial: vec![0.5, 0.5],
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, AmplitudeSpec::Zero)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AmplitudeSpec::MarkovChain {
                transition,
                values,
                initial,
            } => {
                let m = values.len();
                if m == 0 {
                    return Err(Error::config("Markov chain needs at least one state"));
                }
                if transition.len() != m || initial.len() != m {
                    return Err(Error::config(format!(
                        "Markov chain with {m} values needs an {m}x{m} matrix and {m} initial weights"
                    )));
                }
                for (a, row) in transition.iter().enumerate() {
                    check_distribution(row, m, &format!("transition row {a}"))?;
                }
                check_distribution(initial, m, "initial distribution")?;
                if let Some(v) = values.iter().find(|v| !(v.abs() <= 1.0)) {
                    return Err(Error::config(format!("Markov value {v} exceeds 1")));
                }
                Ok(())
            }
            AmplitudeSpec::Dyadic { observable } => observable.validate(false),
            AmplitudeSpec::Baker { observable } => observable.validate(true),
            AmplitudeSpec::CatMap {
                rectangles,
                precision_bits,
            } => {
                if precision_bits == &Some(0) {
                    return Err(Error::config("cat-map precision budget must be positive"));
                }
                validate_rectangles(rectangles)
            }
            _ => Ok(()),
        }
    }
}

fn check_distribution(p: &[f64], m: usize, what: &str) -> Result<()> {
    if p.len() != m {
        return Err(Error::config(format!(
            "{what} has {} entries, expected {m}",
            p.len()
        )));
    }
    if let Some(x) = p.iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::config(format!("{what} has negative entry {x}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::config(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    p.iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

fn sample_index(cum: &[f64], u: f64) -> usize {
    // u ∈ [0, 1); rounding in the last cumulative weight falls back to the
    // last state with positive mass
    cum.iter()
        .position(|&c| u < c)
        .unwrap_or_else(|| cum.len() - 1)
}

#[allow(clippy::large_enum_variant)]
enum Generator {
    Zero,
    Uniform(ChaCha8Rng),
    Rademacher(ChaCha8Rng),
    Markov {
        rng: ChaCha8Rng,
        state: Option<usize>,
        rows: Vec<Vec<f64>>,
        initial: Vec<f64>,
        values: Vec<f64>,
    },
    Word(BitWord),
    Torus(FixedPointT2),
}

/// One realization of an amplitude process.
///
/// `(spec, seed, realization)` fixes the whole sequence; consuming it one
/// value at a time or in batches gives the same values.
pub struct AmplitudeStream<'a> {
    spec: &'a AmplitudeSpec,
    seed: u64,
    realization: u64,
    cursor: u64,
    generator: Generator,
}

impl<'a> AmplitudeStream<'a> {
    /// `horizon` is the number of values the caller intends to draw; it only
    /// sizes the default cat-map precision budget.
    pub fn new(
        spec: &'a AmplitudeSpec,
        seed: u64,
        realization: u64,
        horizon: usize,
    ) -> Result<Self> {
        spec.validate()?;
        let rng = || stream_rng(seed, realization, lane::AMPLITUDES);
        let generator = match spec {
            AmplitudeSpec::Zero => Generator::Zero,
            AmplitudeSpec::IidUniform => Generator::Uniform(rng()),
            AmplitudeSpec::IidRademacher => Generator::Rademacher(rng()),
            AmplitudeSpec::MarkovChain {
                transition,
                values,
                initial,
            } => Generator::Markov {
                rng: rng(),
                state: None,
                rows: transition.iter().map(|r| cumulative(r)).collect(),
                initial: cumulative(initial),
                values: values.clone(),
            },
            AmplitudeSpec::Dyadic { .. } | AmplitudeSpec::CosineDyadic => {
                Generator::Word(BitWord::random_one_sided(seed, realization))
            }
            AmplitudeSpec::Baker { .. } => {
                Generator::Word(BitWord::random_two_sided(seed, realization))
            }
            AmplitudeSpec::CatMap { precision_bits, .. } => {
                let bits = precision_bits.unwrap_or_else(|| FixedPointT2::budget_for(horizon));
                Generator::Torus(FixedPointT2::random(bits, seed, realization))
            }
        };
        Ok(Self {
            spec,
            seed,
            realization,
            cursor: 0,
            generator,
        })
    }

    pub fn spec(&self) -> &AmplitudeSpec {
        self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn realization(&self) -> u64 {
        self.realization
    }

    /// Index of the last value emitted (0 before the first call).
    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    /// Emits `ω(j)` for `j = cursor + 1`.
    pub fn next_value(&mut self) -> Result<f64> {
        let value = match (&mut self.generator, self.spec) {
            (Generator::Zero, _) => 0.0,
            (Generator::Uniform(rng), _) => 2.0 * rng.random::<f64>() - 1.0,
            (Generator::Rademacher(rng), _) => {
                if rng.next_u32() & 1 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            (
                Generator::Markov {
                    rng,
                    state,
                    rows,
                    initial,
                    values,
                },
                _,
            ) => {
                let u: f64 = rng.random();
                let next = match *state {
                    None => sample_index(initial, u),
                    Some(s) => sample_index(&rows[s], u),
                };
                *state = Some(next);
                values[next]
            }
            (Generator::Word(word), AmplitudeSpec::CosineDyadic) => {
                word.shift();
                (2.0 * PI * dyadic_fraction(word, 0, 53)).cos()
            }
            (Generator::Word(word), AmplitudeSpec::Dyadic { observable })
            | (Generator::Word(word), AmplitudeSpec::Baker { observable }) => {
                word.shift();
                observable.eval_word(word)
            }
            (Generator::Torus(point), AmplitudeSpec::CatMap { rectangles, .. }) => {
                point.step()?;
                let (x, y) = point.to_f64();
                rectangle_value(rectangles, x, y)
            }
            _ => unreachable!("generator built from a different spec"),
        };
        debug_assert!(value.abs() <= 1.0, "amplitude {value} out of range");
        self.cursor += 1;
        Ok(value)
    }

    pub fn fill(&mut self, out: &mut [f64]) -> Result<()> {
        for slot in out.iter_mut() {
            *slot = self.next_value()?;
        }
        Ok(())
    }
}

/// `ω(1), ..., ω(n)` for one realization.
pub fn sample_sequence(
    spec: &AmplitudeSpec,
    seed: u64,
    realization: u64,
    n: usize,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("sequence length must be at least 1"));
    }
    let mut stream = AmplitudeStream::new(spec, seed, realization, n)?;
    let mut out = vec![0.0; n];
    stream.fill(&mut out)?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationPoint {
    pub lag: usize,
    /// Estimate of `E[(ω(j) - μ)(ω(j + lag) - μ)]`.
    pub corr: f64,
    /// Monte Carlo standard error across realizations.
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationCurve {
    pub points: Vec<CorrelationPoint>,
    pub mean: f64,
    pub realizations: u64,
    pub length: usize,
    /// Zero empirical variance: normalized correlations are undefined.
    pub degenerate: bool,
}

impl CorrelationCurve {
    /// `ĉ(k) / ĉ(0)` per lag, `None` when the variance is degenerate.
    pub fn normalized(&self) -> Vec<Option<f64>> {
        let c0 = self.points.first().map_or(0.0, |p| p.corr);
        self.points
            .iter()
            .map(|p| (!self.degenerate).then(|| p.corr / c0))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("lag,corr,stderr\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.lag, p.corr, p.stderr));
        }
        out
    }
}

struct LagSums {
    total: f64,
    // per lag: Σ ω_j ω_{j+k}, Σ_{j ≤ N-k} ω_j, Σ_{j > k} ω_j
    cross: Vec<f64>,
    head: Vec<f64>,
    tail: Vec<f64>,
}

fn lag_sums(seq: &[f64], max_lag: usize) -> LagSums {
    let n = seq.len();
    let total: f64 = seq.iter().sum();
    let mut cross = Vec::with_capacity(max_lag + 1);
    let mut head = Vec::with_capacity(max_lag + 1);
    let mut tail = Vec::with_capacity(max_lag + 1);
    for k in 0..=max_lag {
        cross.push(seq[..n - k].iter().zip(&seq[k..]).map(|(a, b)| a * b).sum());
        head.push(seq[..n - k].iter().sum());
        tail.push(seq[k..].iter().sum());
    }
    LagSums {
        total,
        cross,
        head,
        tail,
    }
}

/// Monte Carlo estimate of the centered pair correlation at lags
/// `0..=max_lag`, averaged over positions and over `realizations`
/// independent sequences of length `n`.
pub fn empirical_correlation(
    spec: &AmplitudeSpec,
    seed: u64,
    realizations: u64,
    n: usize,
    max_lag: usize,
) -> Result<CorrelationCurve> {
    if realizations < 2 {
        return Err(Error::config(
            "correlation estimates need at least 2 realizations",
        ));
    }
    if max_lag >= n {
        return Err(Error::config(format!(
            "max_lag {max_lag} must be below the length {n}"
        )));
    }
    let sums: Vec<LagSums> = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let seq = sample_sequence(spec, seed, r, n).map_err(|e| e.in_realization(r))?;
            Ok(lag_sums(&seq, max_lag))
        })
        .collect::<Result<_>>()?;

    let mu = sums.iter().map(|s| s.total).sum::<f64>() / (realizations as f64 * n as f64);
    let rf = realizations as f64;
    let points = (0..=max_lag)
        .map(|k| {
            let m = (n - k) as f64;
            let per: Vec<f64> = sums
                .iter()
                .map(|s| (s.cross[k] - mu * (s.head[k] + s.tail[k])) / m + mu * mu)
                .collect();
            let (mean, var) = mean_var(&per);
            CorrelationPoint {
                lag: k,
                corr: mean,
                stderr: (var / rf).sqrt(),
            }
        })
        .collect::<Vec<_>>();
    let degenerate = !(points[0].corr > 1e-300);
    Ok(CorrelationCurve {
        points,
        mean: mu,
        realizations,
        length: n,
        degenerate,
    })
}

/// `E[Π_j ω(j)^{e_j}]` with `e = exponents` (index 0 is `ω(1)`), estimated
/// over `realizations`; returns `(mean, stderr)`.
pub fn empirical_moment(
    spec: &AmplitudeSpec,
    seed: u64,
    realizations: u64,
    exponents: &[u32],
) -> Result<(f64, f64)> {
    if realizations < 2 || exponents.is_empty() {
        return Err(Error::config(
            "moments need ≥ 2 realizations and ≥ 1 exponent",
        ));
    }
    let values: Vec<f64> = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let seq = sample_sequence(spec, seed, r, exponents.len())?;
            Ok(seq
                .iter()
                .zip(exponents)
                .map(|(w, &e)| w.powi(e as i32))
                .product())
        })
        .collect::<Result<_>>()?;
    let (mean, var) = mean_var(&values);
    Ok((mean, (var / realizations as f64).sqrt()))
}

/// Sample mean and unbiased variance.
pub(crate) fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Outcome of fitting `|ĉ(k)| ≈ C e^{-ρk}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum DecayFit {
    Measured {
        rate: f64,
        rate_stderr: f64,
        intercept: f64,
        lags_used: Vec<usize>,
    },
    /// Fewer than three leading lags rise above the noise floor.
    NoMeasurableCorrelation { lags_above_floor: usize },
}

impl DecayFit {
    pub fn rate(&self) -> Option<f64> {
        match self {
            DecayFit::Measured { rate, .. } => Some(*rate),
            DecayFit::NoMeasurableCorrelation { .. } => None,
        }
    }
}

/// Noise floor multiple of the standard error below which a lag is noise.
pub const NOISE_FLOOR_SIGMAS: f64 = 3.0;

/// Least-squares slope of `log|ĉ(k)|` against `k` over the leading run of
/// lags whose estimate clears `3 × stderr`; `ρ̂ = -slope`.
///
/// When every lag carries a positive standard error the regression is
/// weighted by the delta-method variance `(stderr / ĉ)²` of `log|ĉ|`.
pub fn fit_decay_rate(points: &[CorrelationPoint]) -> DecayFit {
    let used: Vec<&CorrelationPoint> = points
        .iter()
        .take_while(|p| p.corr.abs() > NOISE_FLOOR_SIGMAS * p.stderr && p.corr != 0.0)
        .collect();
    if used.len() < 3 {
        return DecayFit::NoMeasurableCorrelation {
            lags_above_floor: used.len(),
        };
    }
    let xs: Vec<f64> = used.iter().map(|p| p.lag as f64).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.corr.abs().ln()).collect();
    let weighted = used.iter().all(|p| p.stderr > 0.0);
    let weights: Vec<f64> = if weighted {
        used.iter().map(|p| (p.corr / p.stderr).powi(2)).collect()
    } else {
        vec![1.0; used.len()]
    };
    let fit = linear_fit(&xs, &ys, &weights, weighted);
    DecayFit::Measured {
        rate: -fit.slope,
        rate_stderr: fit.slope_stderr,
        intercept: fit.intercept,
        lags_used: used.iter().map(|p| p.lag).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

/// Weighted least squares line. With `known_variance` the weights are
/// inverse variances and the slope error is `1/sqrt(S_xx)`; otherwise the
/// error comes from the residuals.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64], ws: &[f64], known_variance: bool) -> LineFit {
    let sw: f64 = ws.iter().sum();
    let xm = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / sw;
    let ym = ys.iter().zip(ws).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = xs
        .iter()
        .zip(ws)
        .map(|(x, w)| w * (x - xm) * (x - xm))
        .sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .zip(ws)
        .map(|((x, y), w)| w * (x - xm) * (y - ym))
        .sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let slope_stderr = if known_variance {
        (1.0 / sxx).sqrt()
    } else if xs.len() > 2 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .zip(ws)
            .map(|((x, y), w)| w * (y - intercept - slope * x).powi(2))
            .sum();
        (rss / (xs.len() as f64 - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    LineFit {
        slope,
        intercept,
        slope_stderr,
    }
}
