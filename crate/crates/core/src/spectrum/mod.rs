//! Dirichlet eigenvalues of `H_n` near `κ_0` by Sturm oscillation, the
//! rescaled point process `ξ_n = Σ_j δ_{n(κ_j - κ_0)}`, the relative phase
//! `Θ^(n)(c) = θ_n(κ_0 + c/n) - θ_n(κ_0)`, and the two sides of the
//! Laplace-functional identity
//!
//! `exp(-ξ_n(g)) = exp(-Σ_k g((Θ^(n))^{-1}(kπ - {θ_n(κ_0)}_π)))`.
//!
//! Eigenvalue parameters `κ_k` solve `θ_n(κ_k) = kπ`; `⌊θ_n(κ)/π⌋` is the
//! number of eigenvalues in `(0, κ²]`.

mod hermite;
mod testfn;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::RealizedPotential;
use crate::prufer::{self, IntegratorConfig};

pub use hermite::MonotoneCubic;
pub use prufer::oscillation_count;
pub use testfn::TestFunction;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub integrator: IntegratorConfig,
    /// Root tolerance on `κ`, relative to `κ_0`.
    pub root_tol: f64,
    /// Refinement depth when a scan interval is not monotone-sampled.
    pub max_subdivisions: u32,
    /// Spacing of the `c`-grid for `(Θ^(n))^{-1}`.
    pub grid_spacing: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            root_tol: 1e-12,
            max_subdivisions: 30,
            grid_spacing: 0.05,
        }
    }
}

impl SpectrumConfig {
    pub fn validate(&self) -> Result<()> {
        self.integrator.validate()?;
        if !(self.root_tol > 0.0 && self.root_tol < 1e-3) {
            return Err(Error::config(format!(
                "root tolerance {} outside (0, 1e-3)",
                self.root_tol
            )));
        }
        if !(self.grid_spacing > 0.0 && self.grid_spacing <= 1.0) {
            return Err(Error::config(format!(
                "grid spacing {} outside (0, 1]",
                self.grid_spacing
            )));
        }
        Ok(())
    }
}

/// `{x}_π = x - ⌊x/π⌋π ∈ [0, π)`.
pub fn frac_pi(x: f64) -> f64 {
    let r = x - (x / PI).floor() * PI;
    if r >= PI {
        r - PI
    } else if r < 0.0 {
        r + PI
    } else {
        r
    }
}

fn theta(potential: &RealizedPotential, kappa: f64, cfg: &SpectrumConfig) -> Result<f64> {
    prufer::theta_n(potential, kappa, &cfg.integrator)
}

fn count_of(theta: f64) -> i64 {
    (theta / PI).floor() as i64
}

/// Solves `θ_n(κ) = kπ` inside `[lo, hi]` where `θ_n(lo) < kπ ≤ θ_n(hi)`.
///
/// Illinois steps on `θ_n - kπ`, with a bisection step whenever the bracket
/// fails to halve, down to `tol` or the floating-point limit; the result is
/// the secant point of the final bracket.
pub fn locate_eigenvalue(
    potential: &RealizedPotential,
    k: i64,
    bracket: (f64, f64),
    tol: f64,
    cfg: &SpectrumConfig,
) -> Result<f64> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::RootFinding(format!("invalid bracket [{lo}, {hi}]")));
    }
    let target = k as f64 * PI;
    let f_lo = theta(potential, lo, cfg)? - target;
    let f_hi = theta(potential, hi, cfg)? - target;
    if !(f_lo < 0.0 && f_hi >= 0.0) {
        return Err(Error::RootFinding(format!(
            "bracket [{lo}, {hi}] does not straddle θ = {k}π (offsets {f_lo}, {f_hi})"
        )));
    }
    solve_bracketed(
        |x| Ok(theta(potential, x, cfg)? - target),
        (lo, f_lo),
        (hi, f_hi),
        tol,
    )
}

fn solve_bracketed(
    mut f: impl FnMut(f64) -> Result<f64>,
    (mut a, mut fa): (f64, f64),
    (mut b, mut fb): (f64, f64),
    tol: f64,
) -> Result<f64> {
    let (mut wa, mut wb) = (fa, fb);
    let mut side = 0i8;
    let mut width = b - a;
    for iter in 0..400 {
        if b - a <= tol {
            break;
        }
        let mut x = if iter % 3 == 2 && (b - a) > 0.5 * width {
            0.5 * (a + b)
        } else {
            (a * wb - b * wa) / (wb - wa)
        };
        if iter % 3 == 2 {
            width = b - a;
        }
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
            if !(x > a && x < b) {
                break;
            }
        }
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx > 0.0 {
            b = x;
            fb = fx;
            wb = fx;
            if side == 1 {
                wa *= 0.5;
            }
            side = 1;
        } else {
            a = x;
            fa = fx;
            wa = fx;
            if side == -1 {
                wb *= 0.5;
            }
            side = -1;
        }
    }
    let x = a - fa * (b - a) / (fb - fa);
    Ok(if x.is_finite() {
        x.clamp(a, b)
    } else {
        0.5 * (a + b)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Eigenvalue {
    /// Oscillation index: `θ_n(κ) = kπ`.
    pub k: i64,
    pub kappa: f64,
    /// `n(κ - κ_0)`.
    pub atom: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenvalueWindow {
    pub n: usize,
    pub kappa0: f64,
    pub c_max: f64,
    /// `θ_n(κ_0)`.
    pub theta0: f64,
    /// Increasing in `k` and `κ`.
    pub eigenvalues: Vec<Eigenvalue>,
    /// Index of `κ'_1`, the first eigenvalue parameter above `κ_0`.
    first_above: usize,
}

impl EigenvalueWindow {
    /// `κ'_j`: `κ'_0 ≤ κ_0 < κ'_1`, consecutive in between.
    pub fn rearranged(&self, j: i64) -> Option<f64> {
        let idx = self.first_above as i64 + j - 1;
        usize::try_from(idx)
            .ok()
            .and_then(|i| self.eigenvalues.get(i))
            .map(|e| e.kappa)
    }

    /// Labels `j` present in the window, ascending.
    pub fn labels(&self) -> std::ops::Range<i64> {
        let first = 1 - self.first_above as i64;
        first..first + self.eigenvalues.len() as i64
    }

    pub fn atoms(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e.atom).collect()
    }

    /// `n(κ'_{j+1} - κ'_j)` for consecutive pairs inside the window.
    pub fn rescaled_gaps(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.eigenvalues
            .windows(2)
            .map(|w| n * (w[1].kappa - w[0].kappa))
            .collect()
    }

    pub fn sample(&self) -> PointProcessSample {
        PointProcessSample {
            atoms: self.atoms(),
            frac_phase: frac_pi(self.theta0),
            c_max: self.c_max,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,kappa_k,atom\n");
        for e in &self.eigenvalues {
            out.push_str(&format!("{},{},{}\n", e.k, e.kappa, e.atom));
        }
        out
    }
}

/// Atoms of `ξ_n` inside `[-c_max, c_max]` and `{θ_n(κ_0)}_π`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointProcessSample {
    pub atoms: Vec<f64>,
    pub frac_phase: f64,
    pub c_max: f64,
}

/// All `κ` with `θ_n(κ) ∈ πℤ` and `n|κ - κ_0| ≤ c_max`.
///
/// The window is scanned at `Δκ = π / (4n(1 + ‖V‖_∞))`; scan intervals whose
/// counts decrease are refined up to `max_subdivisions` times before giving
/// up with [`Error::NonMonotone`].
pub fn eigenvalue_window(
    potential: &RealizedPotential,
    kappa0: f64,
    c_max: f64,
    cfg: &SpectrumConfig,
) -> Result<EigenvalueWindow> {
    let n = potential.len();
    if !(kappa0 > 0.0) || !(c_max > 0.0) || n == 0 {
        return Err(Error::domain(format!(
            "need κ_0 > 0, c_max > 0, n ≥ 1 (got {kappa0}, {c_max}, {n})"
        )));
    }
    let nf = n as f64;
    let (lo, hi) = (kappa0 - c_max / nf, kappa0 + c_max / nf);
    if !(lo > 0.0) {
        return Err(Error::domain(format!(
            "window reaches κ ≤ 0 (κ_0 - c_max/n = {lo})"
        )));
    }
    let envelope = potential
        .coefficients
        .iter()
        .fold(0.0f64, |m, c| m.max(c.abs()))
        * potential.profile.sup_norm();
    let dk = PI / (4.0 * nf * (1.0 + envelope));
    let steps = ((hi - lo) / dk).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| {
            if i == steps {
                hi
            } else {
                lo + (hi - lo) * i as f64 / steps as f64
            }
        })
        .collect();
    let thetas = grid
        .iter()
        .map(|&x| theta(potential, x, cfg))
        .collect::<Result<Vec<_>>>()?;
    let theta0 = theta(potential, kappa0, cfg)?;
    let tol = cfg.root_tol * kappa0;

    let mut eigenvalues = Vec::new();
    for i in 0..steps {
        let samples = monotone_samples(
            potential,
            (grid[i], thetas[i]),
            (grid[i + 1], thetas[i + 1]),
            cfg,
        )?;
        for pair in samples.windows(2) {
            let ((a, ta), (b, tb)) = (pair[0], pair[1]);
            let (ca, cb) = (count_of(ta), count_of(tb));
            for k in ca + 1..=cb {
                let kappa = if cb == ca + 1 {
                    let target = k as f64 * PI;
                    solve_bracketed(
                        |x| Ok(theta(potential, x, cfg)? - target),
                        (a, ta - target),
                        (b, tb - target),
                        tol,
                    )?
                } else {
                    isolate(potential, k, (a, b), tol, cfg)?
                };
                eigenvalues.push(Eigenvalue {
                    k,
                    kappa,
                    atom: nf * (kappa - kappa0),
                });
            }
        }
    }
    eigenvalues.retain(|e| e.atom.abs() <= c_max);
    if let Some(w) = eigenvalues.windows(2).find(|w| !(w[1].kappa > w[0].kappa)) {
        return Err(Error::RootFinding(format!(
            "eigenvalues {} and {} not separated ({} vs {})",
            w[0].k, w[1].k, w[0].kappa, w[1].kappa
        )));
    }
    let first_above = eigenvalues.partition_point(|e| e.kappa <= kappa0);
    Ok(EigenvalueWindow {
        n,
        kappa0,
        c_max,
        theta0,
        eigenvalues,
        first_above,
    })
}

/// Refines `[a, b]` until the oscillation counts along the samples are
/// non-decreasing.
fn monotone_samples(
    potential: &RealizedPotential,
    a: (f64, f64),
    b: (f64, f64),
    cfg: &SpectrumConfig,
) -> Result<Vec<(f64, f64)>> {
    let mut samples = vec![a, b];
    for _ in 0..=cfg.max_subdivisions {
        if samples
            .windows(2)
            .all(|w| count_of(w[1].1) >= count_of(w[0].1))
        {
            return Ok(samples);
        }
        let mut refined = Vec::with_capacity(2 * samples.len());
        for w in samples.windows(2) {
            refined.push(w[0]);
            if count_of(w[1].1) < count_of(w[0].1) {
                let m = 0.5 * (w[0].0 + w[1].0);
                refined.push((m, theta(potential, m, cfg)?));
            }
        }
        refined.push(*samples.last().unwrap_or(&b));
        samples = refined;
    }
    Err(Error::NonMonotone(format!(
        "oscillation count decreases inside [{}, {}] after {} refinements",
        a.0, b.0, cfg.max_subdivisions
    )))
}

/// Several crossings in one scan interval: bisect on the count first.
fn isolate(
    potential: &RealizedPotential,
    k: i64,
    (mut a, mut b): (f64, f64),
    tol: f64,
    cfg: &SpectrumConfig,
) -> Result<f64> {
    for _ in 0..cfg.max_subdivisions {
        let m = 0.5 * (a + b);
        let c = count_of(theta(potential, m, cfg)?);
        if c >= k {
            b = m;
        } else {
            a = m;
        }
        let (ca, cb) = (
            count_of(theta(potential, a, cfg)?),
            count_of(theta(potential, b, cfg)?),
        );
        if ca == k - 1 && cb == k {
            return locate_eigenvalue(potential, k, (a, b), tol, cfg);
        }
    }
    Err(Error::RootFinding(format!(
        "eigenvalue {k} not isolated inside [{a}, {b}]"
    )))
}

/// `Θ^(n)(c)` for each `c`, sharing `θ_n(κ_0)`.
pub fn relative_phase_curve(
    potential: &RealizedPotential,
    kappa0: f64,
    cs: &[f64],
    cfg: &SpectrumConfig,
) -> Result<Vec<f64>> {
    let n = potential.len() as f64;
    let theta0 = theta(potential, kappa0, cfg)?;
    cs.iter()
        .map(|&c| {
            if c == 0.0 {
                return Ok(0.0);
            }
            let kappa = kappa0 + c / n;
            if !(kappa > 0.0) {
                return Err(Error::domain(format!(
                    "κ_0 + c/n = {kappa} is not positive"
                )));
            }
            Ok(theta(potential, kappa, cfg)? - theta0)
        })
        .collect()
}

/// `Θ^(n)(c) = θ_n(κ_0 + c/n) - θ_n(κ_0)`.
pub fn relative_phase(
    potential: &RealizedPotential,
    kappa0: f64,
    c: f64,
    cfg: &SpectrumConfig,
) -> Result<f64> {
    Ok(relative_phase_curve(potential, kappa0, &[c], cfg)?[0])
}

/// CSV `c,Theta`.
pub fn phase_curve_csv(cs: &[f64], thetas: &[f64]) -> String {
    let mut out = String::from("c,Theta\n");
    for (c, t) in cs.iter().zip(thetas) {
        out.push_str(&format!("{c},{t}\n"));
    }
    out
}

/// `exp(-Σ_atoms g(atom))`.
pub fn laplace_functional_direct(sample: &PointProcessSample, g: &TestFunction) -> Result<f64> {
    if let Some((lo, hi)) = g.support() {
        if lo < -sample.c_max || hi > sample.c_max {
            return Err(Error::domain(format!(
                "test function support [{lo}, {hi}] exceeds the window ±{}",
                sample.c_max
            )));
        }
    }
    Ok((-sample.atoms.iter().map(|&x| g.eval(x)).sum::<f64>()).exp())
}

/// `Θ^(n)` on a `c`-grid of the configured spacing covering `supp g`, with
/// exact slopes `Θ'(c) = n^{-1} ∂θ_n/∂κ`.
pub fn relative_phase_interpolant(
    potential: &RealizedPotential,
    kappa0: f64,
    support: (f64, f64),
    cfg: &SpectrumConfig,
) -> Result<(MonotoneCubic, f64)> {
    let h = cfg.grid_spacing;
    let n = potential.len() as f64;
    let first = (support.0 / h).floor() as i64 - 1;
    let last = (support.1 / h).ceil() as i64 + 1;
    let (theta0, _) = prufer::theta_and_derivative(potential, kappa0, &cfg.integrator)?;
    let mut cs = Vec::new();
    let mut ys = Vec::new();
    let mut ds = Vec::new();
    for i in first..=last {
        let c = i as f64 * h;
        let kappa = kappa0 + c / n;
        if !(kappa > 0.0) {
            return Err(Error::domain(format!(
                "κ_0 + c/n = {kappa} is not positive"
            )));
        }
        let (t, d) = prufer::theta_and_derivative(potential, kappa, &cfg.integrator)?;
        cs.push(c);
        ys.push(if i == 0 { 0.0 } else { t - theta0 });
        ds.push(d / n);
    }
    Ok((MonotoneCubic::new(cs, ys, ds)?, theta0))
}

/// `exp(-Σ_k g((Θ^(n))^{-1}(kπ - {θ_n(κ_0)}_π)))` over the `k` whose
/// preimage falls in the interpolated range.
pub fn laplace_functional_phase(
    potential: &RealizedPotential,
    kappa0: f64,
    g: &TestFunction,
    cfg: &SpectrumConfig,
) -> Result<f64> {
    let Some(support) = g.support() else {
        return Ok(1.0);
    };
    let (curve, theta0) = relative_phase_interpolant(potential, kappa0, support, cfg)?;
    let beta = frac_pi(theta0);
    let (lo, hi) = curve.range();
    let k_first = ((lo + beta) / PI).ceil() as i64;
    let mut total = 0.0;
    let mut k = k_first;
    loop {
        let y = k as f64 * PI - beta;
        if y > hi {
            break;
        }
        if y >= lo {
            total += g.eval(curve.inverse(y)?);
        }
        k += 1;
    }
    Ok((-total).exp())
}
