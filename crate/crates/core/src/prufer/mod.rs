//! Prüfer phase and amplitude of the Dirichlet solution of
//! `-ψ'' + Vψ = κ²ψ` on `[0, n]`, written as
//! `(ψ, ψ'/κ) = r (sin θ, cos θ)` with `θ_0 = 0`, `r_0 = 1`, together with
//!
//! * `J^(t) = ∫_0^t e^{2iθ_s} V(s) ds`,
//! * `R^(t) = ∫_0^t (e^{2iθ_s} - 1) V(s) ds`,
//! * `A = ∫_0^t r_s² ds`, `B = ∫_0^t r_s² V(s) (1 - cos 2θ_s) ds`,
//!
//! from which `∂θ_t/∂κ = (A + B / 2κ²) / r_t²`.
//!
//! Two integrators are available: a closed-form transfer for piecewise
//! constant profiles and fixed-step RK4 for everything else. Runs of cells
//! without potential advance the phase by `κ` per cell in closed form.

mod exact;
mod rk4;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{PotentialModel, RealizedPotential, SiteProfile};

pub use exact::exact_cell_transfer;

/// Lower bound on RK4 substeps per unit cell.
pub const MIN_SUBSTEPS: u32 = 8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Exact transfer for piecewise-constant profiles, RK4 otherwise.
    #[default]
    Auto,
    Rk4,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    /// RK4 substeps per unit cell.
    pub substeps: u32,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            substeps: 64,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(substeps: u32) -> Self {
        Self {
            method: Method::Rk4,
            substeps,
        }
    }

    pub fn exact() -> Self {
        Self {
            method: Method::Exact,
            substeps: 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.substeps < MIN_SUBSTEPS {
            return Err(Error::config(format!(
                "{} substeps per cell is below the minimum {MIN_SUBSTEPS}",
                self.substeps
            )));
        }
        Ok(())
    }

    fn resolve(&self, profile: &SiteProfile) -> Result<Resolved> {
        self.validate()?;
        match self.method {
            Method::Rk4 => Ok(Resolved::Rk4),
            Method::Exact if !profile.is_piecewise_constant() => Err(Error::config(
                "the exact transfer needs a piecewise-constant profile",
            )),
            Method::Exact => Ok(Resolved::Exact),
            Method::Auto if profile.is_piecewise_constant() => Ok(Resolved::Exact),
            Method::Auto => Ok(Resolved::Rk4),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Resolved {
    Rk4,
    Exact,
}

/// Which accumulators to carry. Cheaper levels leave the others untouched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Track {
    /// `θ` only.
    Phase,
    /// `θ`, `log r`, `J`, `R`.
    Functionals,
    /// Everything, including `A` and `B`.
    Full,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PruferState {
    /// Number of unit cells integrated so far.
    pub t: usize,
    pub theta: f64,
    pub log_r: f64,
    pub j: Complex64,
    pub r: Complex64,
    a_mantissa: f64,
    b_mantissa: f64,
    log_scale: f64,
}

impl Default for PruferState {
    fn default() -> Self {
        Self::new()
    }
}

impl PruferState {
    /// Dirichlet initial condition at `t = 0`.
    pub fn new() -> Self {
        Self {
            t: 0,
            theta: 0.0,
            log_r: 0.0,
            j: Complex64::new(0.0, 0.0),
            r: Complex64::new(0.0, 0.0),
            a_mantissa: 0.0,
            b_mantissa: 0.0,
            log_scale: 0.0,
        }
    }

    /// `θ̃_t = θ_t - κt`.
    pub fn theta_tilde(&self, kappa: f64) -> f64 {
        self.theta - kappa * self.t as f64
    }

    /// `(A, B)` as `(mantissa_A, mantissa_B, log_scale)`, i.e.
    /// `A = mantissa_A · e^{log_scale}`.
    pub fn scaled_ab(&self) -> (f64, f64, f64) {
        (self.a_mantissa, self.b_mantissa, self.log_scale)
    }

    /// `(A + B / 2κ²) / r_t²`.
    pub fn dtheta_dkappa(&self, kappa: f64) -> Result<f64> {
        let value = (self.a_mantissa + self.b_mantissa / (2.0 * kappa * kappa))
            * (self.log_scale - 2.0 * self.log_r).exp();
        if !value.is_finite() {
            return Err(Error::numeric(format!(
                "phase derivative overflowed at t = {} (log r = {}, log scale = {})",
                self.t, self.log_r, self.log_scale
            )));
        }
        Ok(value)
    }

    /// Adds `(a, b) · e^{log_weight}` to `(A, B)`.
    fn add_ab(&mut self, a: f64, b: f64, log_weight: f64) {
        if log_weight > self.log_scale {
            let shrink = (self.log_scale - log_weight).exp();
            self.a_mantissa *= shrink;
            self.b_mantissa *= shrink;
            self.log_scale = log_weight;
        }
        let w = (log_weight - self.log_scale).exp();
        self.a_mantissa += a * w;
        self.b_mantissa += b * w;
    }

    fn free_advance(&mut self, kappa: f64, len: f64, track: Track) {
        self.theta += kappa * len;
        if track == Track::Full {
            self.add_ab(len, 0.0, 2.0 * self.log_r);
        }
    }

    fn exact_piece(&mut self, v: f64, len: f64, kappa: f64, track: Track) {
        if v == 0.0 {
            self.free_advance(kappa, len, track);
            return;
        }
        let (_, theta_r) = exact::reduce(self.theta);
        let step = exact::piece(
            v,
            len,
            kappa,
            theta_r,
            track == Track::Full,
            track != Track::Phase,
        );
        let before = (self.theta / PI).floor();
        self.theta += step.dtheta;
        debug_assert!(
            (self.theta / PI).floor() >= before,
            "phase crossed a multiple of π downward"
        );
        if track == Track::Phase {
            return;
        }
        let lr_in = self.log_r;
        self.log_r += step.dlog_r;
        let dr = Complex64::new(
            2.0 * kappa * (step.dtheta - kappa * len),
            2.0 * kappa * step.dlog_r,
        );
        self.r += dr;
        self.j += dr + v * len;
        if track == Track::Full {
            self.add_ab(step.int_a, step.int_b, 2.0 * lr_in);
        }
    }

    fn rk4_cell(&mut self, c: f64, profile: &SiteProfile, kappa: f64, substeps: u32, track: Track) {
        let lr0 = self.log_r;
        let mut y: rk4::Vector = [self.theta, lr0, 0.0, 0.0, 0.0, 0.0, 0.0];
        match profile.pieces() {
            Some(pieces) => {
                let mut s0 = 0.0;
                for (len, h) in pieces {
                    let steps = ((f64::from(substeps) * len).ceil() as u32).max(1);
                    let v = c * h;
                    rk4::segment(&mut y, &|_| v, s0, len, steps, kappa, lr0);
                    s0 += len;
                }
            }
            None => {
                let f = |s: f64| c * profile.eval(s);
                rk4::segment(&mut y, &f, 0.0, 1.0, substeps, kappa, lr0);
            }
        }
        self.theta = y[0];
        if track == Track::Phase {
            return;
        }
        self.log_r = y[1];
        self.j += Complex64::new(y[2], y[3]);
        self.r += Complex64::new(y[2] - y[4], y[3]);
        if track == Track::Full {
            self.add_ab(y[5], y[6], 2.0 * lr0);
        }
    }

    fn advance(
        &mut self,
        c: f64,
        profile: &SiteProfile,
        kappa: f64,
        method: Resolved,
        substeps: u32,
        track: Track,
    ) {
        if c == 0.0 {
            self.free_advance(kappa, 1.0, track);
        } else {
            match method {
                Resolved::Exact => match profile {
                    SiteProfile::Indicator => self.exact_piece(c, 1.0, kappa, track),
                    _ => {
                        for (len, h) in profile.pieces().unwrap_or_default() {
                            self.exact_piece(c * h, len, kappa, track);
                        }
                    }
                },
                Resolved::Rk4 => self.rk4_cell(c, profile, kappa, substeps, track),
            }
        }
        self.t += 1;
    }

    fn check_finite(&self) -> Result<()> {
        if self.theta.is_finite()
            && self.log_r.is_finite()
            && self.j.is_finite()
            && self.r.is_finite()
        {
            Ok(())
        } else {
            Err(Error::numeric(format!(
                "Prüfer state became non-finite at t = {}",
                self.t
            )))
        }
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("kappa = {kappa} must be positive")))
    }
}

/// Advances `state` across one unit cell of potential `c · f(s)`, carrying
/// every accumulator.
pub fn advance_cell(
    state: &mut PruferState,
    coefficient: f64,
    profile: &SiteProfile,
    kappa: f64,
    cfg: &IntegratorConfig,
) -> Result<()> {
    check_kappa(kappa)?;
    let method = cfg.resolve(profile)?;
    state.advance(
        coefficient,
        profile,
        kappa,
        method,
        cfg.substeps,
        Track::Full,
    );
    state.check_finite()
}

/// Integrates over `[0, n]`, calling `on_cell` after every cell.
pub fn integrate_with(
    potential: &RealizedPotential,
    kappa: f64,
    cfg: &IntegratorConfig,
    track: Track,
    mut on_cell: impl FnMut(&PruferState),
) -> Result<PruferState> {
    check_kappa(kappa)?;
    let method = cfg.resolve(&potential.profile)?;
    let free_profile = potential.profile.sup_norm() == 0.0;
    let mut state = PruferState::new();
    // free cells advance from the start of their run so that V ≡ 0 gives κt
    let mut run_start = (0usize, 0.0f64);
    for &c in &potential.coefficients {
        if c == 0.0 || free_profile {
            state.t += 1;
            state.theta = run_start.1 + kappa * (state.t - run_start.0) as f64;
            if track == Track::Full {
                state.add_ab(1.0, 0.0, 2.0 * state.log_r);
            }
        } else {
            state.advance(c, &potential.profile, kappa, method, cfg.substeps, track);
            run_start = (state.t, state.theta);
        }
        on_cell(&state);
    }
    state.check_finite()?;
    Ok(state)
}

pub fn integrate(
    potential: &RealizedPotential,
    kappa: f64,
    cfg: &IntegratorConfig,
    track: Track,
) -> Result<PruferState> {
    integrate_with(potential, kappa, cfg, track, |_| {})
}

/// `θ_n(κ)`.
pub fn theta_n(potential: &RealizedPotential, kappa: f64, cfg: &IntegratorConfig) -> Result<f64> {
    Ok(integrate(potential, kappa, cfg, Track::Phase)?.theta)
}

/// `∂θ_n/∂κ` from the accumulated `A`, `B` and `r_n`.
pub fn phase_derivative(
    potential: &RealizedPotential,
    kappa: f64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    integrate(potential, kappa, cfg, Track::Full)?.dtheta_dkappa(kappa)
}

/// `θ_n(κ)` together with `∂θ_n/∂κ`.
pub fn theta_and_derivative(
    potential: &RealizedPotential,
    kappa: f64,
    cfg: &IntegratorConfig,
) -> Result<(f64, f64)> {
    let state = integrate(potential, kappa, cfg, Track::Full)?;
    Ok((state.theta, state.dtheta_dkappa(kappa)?))
}

/// `⌊θ_n(κ)/π⌋`, the number of Dirichlet eigenvalues in `(0, κ²]`.
pub fn oscillation_count(
    potential: &RealizedPotential,
    kappa: f64,
    cfg: &IntegratorConfig,
) -> Result<i64> {
    Ok((theta_n(potential, kappa, cfg)? / PI).floor() as i64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseSummary {
    pub theta_n: f64,
    pub theta_tilde_n: f64,
    pub log_r_n: f64,
    pub j_n: Complex64,
    pub r_n: Complex64,
}

/// Draws one realization of `model` on `[0, n]` and integrates it.
pub fn integrate_phase(
    model: &PotentialModel,
    kappa: f64,
    n: usize,
    seed: u64,
    realization: u64,
    cfg: &IntegratorConfig,
) -> Result<PhaseSummary> {
    if n < 2 {
        return Err(Error::domain("interval length must be at least 2"));
    }
    let potential = model.realize(seed, realization, n)?;
    let s = integrate(&potential, kappa, cfg, Track::Functionals)?;
    Ok(PhaseSummary {
        theta_n: s.theta,
        theta_tilde_n: s.theta_tilde(kappa),
        log_r_n: s.log_r,
        j_n: s.j,
        r_n: s.r,
    })
}

/// Per-cell trajectory as CSV `t,theta,log_r,ReJ,ImJ,ReR,ImR`.
pub fn trajectory_csv(
    potential: &RealizedPotential,
    kappa: f64,
    cfg: &IntegratorConfig,
) -> Result<String> {
    let mut out = String::from("t,theta,log_r,ReJ,ImJ,ReR,ImR\n");
    out.push_str("0,0,0,0,0,0,0\n");
    integrate_with(potential, kappa, cfg, Track::Functionals, |s| {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            s.t, s.theta, s.log_r, s.j.re, s.j.im, s.r.re, s.r.im
        ));
    })?;
    Ok(out)
}
