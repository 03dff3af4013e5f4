//! Correlation fits, symbolic-dynamics checks and single-realization dumps.

use num_complex::Complex64;
use serde_json::json;

use super::{num, ExperimentConfig, ExperimentReport, Fit, Gate, Table};
use crate::amplitudes::{empirical_correlation, fit_decay_rate, AmplitudeSpec, DecayFit};
use crate::dynsys::{
    cylinder_diameter, max_uniform_zscore, pushforward_histogram, variation_estimate, FixedPointT2,
    Observable, Rectangle, SymbolicSystem,
};
use crate::error::Result;
use crate::prufer::{integrate_with, Track};
use crate::spectrum::eigenvalue_window;

/// Correlation curve of the model's amplitude process (`lag,corr,stderr`)
/// and the fitted decay rate; gated only when an expected rate is declared.
pub fn run_corr_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let p = &cfg.params;
    let curve = empirical_correlation(
        &cfg.model.amplitudes,
        cfg.seed,
        p.realizations,
        p.sequence_length,
        p.max_lag,
    )?;
    let mut table = Table::new(&["lag", "corr", "stderr"]);
    for pt in &curve.points {
        table.push(vec![json!(pt.lag), num(pt.corr), num(pt.stderr)]);
    }
    let mut fits = Vec::new();
    let fit = fit_decay_rate(&curve.points);
    if let DecayFit::Measured {
        rate, rate_stderr, ..
    } = &fit
    {
        fits.push(Fit {
            name: "decay_rate".into(),
            value: *rate,
            stderr: *rate_stderr,
            residual_stderr: None,
        });
    }
    let mut gates = vec![Gate::holds("variance_non_degenerate", !curve.degenerate)];
    if let Some(expected) = p.gates.decay_rate {
        let rel = fit
            .rate()
            .map_or(f64::INFINITY, |r| (r - expected).abs() / expected);
        gates.push(Gate::at_most(
            "decay_rate_rel_error",
            rel,
            p.gates.decay_rate_rel_tol,
        ));
    }
    Ok(ExperimentReport::new(
        "corr",
        cfg.effective_json(),
        cfg.seed,
        table,
        fits,
        gates,
    ))
}

/// Checks of the symbolic systems: cylinder diameters, quasi-locality of the
/// coordinate observables, invariance of Lebesgue measure, cat-map precision
/// budget and cat-map correlation decay.
pub fn run_dynsys_check(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let p = &cfg.params;
    let mut table = Table::new(&["check", "value", "expected"]);
    let mut gates = Vec::new();

    let mut exact = true;
    for depth in 1..=20u32 {
        let d = cylinder_diameter(SymbolicSystem::Dyadic, depth)?;
        let b = cylinder_diameter(SymbolicSystem::Baker, depth)?;
        let scale = 0.5f64.powi(depth as i32);
        exact &= d.x == scale && b.x == scale / 2.0 && b.y == Some(scale);
        table.push(vec![
            json!(format!("baker_cylinder_y_depth_{depth}")),
            num(b.y.unwrap_or(f64::NAN)),
            num(scale),
        ]);
    }
    gates.push(Gate::holds("cylinder_diameters_dyadic_scaled", exact));

    let mut quasi_local = true;
    for depth in [2u32, 6, 10] {
        let bound = 0.5f64.powi(depth as i32 + 1);
        let v = variation_estimate(
            &Observable::CoordinateX,
            SymbolicSystem::Baker,
            (depth, depth),
            2000,
            cfg.seed,
        )?;
        quasi_local &= v <= bound;
        table.push(vec![
            json!(format!("variation_x_window_{depth}")),
            num(v),
            num(bound),
        ]);
    }
    gates.push(Gate::holds(
        "coordinate_variation_within_cylinder_bound",
        quasi_local,
    ));

    for (name, system) in [
        ("dyadic", SymbolicSystem::Dyadic),
        ("baker", SymbolicSystem::Baker),
    ] {
        let z = max_uniform_zscore(&pushforward_histogram(system, p.samples, 8, cfg.seed));
        table.push(vec![
            json!(format!("{name}_pushforward_max_z")),
            num(z),
            num(5.0),
        ]);
        gates.push(Gate::below(&format!("{name}_preserves_lebesgue"), z, 5.0));
    }

    let steps = p.sequence_length;
    let mut orbit = FixedPointT2::random(FixedPointT2::budget_for(steps), cfg.seed, 0);
    let completed = (0..steps).try_for_each(|_| orbit.step()).is_ok();
    table.push(vec![
        json!("cat_orbit_steps"),
        json!(orbit.steps()),
        json!(steps),
    ]);
    gates.push(Gate::holds("cat_orbit_within_budget", completed));

    let spec = AmplitudeSpec::CatMap {
        rectangles: vec![Rectangle {
            x: [0.0, 0.5],
            y: [0.0, 1.0],
            value: 1.0,
        }],
        precision_bits: None,
    };
    let curve = empirical_correlation(&spec, cfg.seed, p.realizations, steps, p.max_lag)?;
    let tail = curve
        .points
        .last()
        .map_or(f64::NAN, |pt| pt.corr.abs() / pt.stderr);
    table.push(vec![json!("cat_corr_last_lag_in_se"), num(tail), num(3.0)]);
    gates.push(Gate::below(
        "cat_correlation_below_noise_at_max_lag",
        tail,
        3.0,
    ));

    Ok(ExperimentReport::new(
        "dynsys-check",
        cfg.effective_json(),
        cfg.seed,
        table,
        vec![],
        gates,
    ))
}

/// Eigenvalue window (`k,kappa_k,atom`) of one realization at the largest length.
pub fn run_spectrum_dump(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let p = &cfg.params;
    let n = *p.lengths().last().unwrap_or(&2);
    let potential = cfg.model.realize(cfg.seed, p.realization, n)?;
    let window = eigenvalue_window(&potential, p.kappa0, p.c_max, &p.spectrum)?;
    let mut table = Table::new(&["k", "kappa_k", "atom"]);
    for e in &window.eigenvalues {
        table.push(vec![json!(e.k), num(e.kappa), num(e.atom)]);
    }
    let gates = vec![Gate::holds(
        "gaps_positive",
        window.rescaled_gaps().iter().all(|&g| g > 0.0),
    )];
    Ok(ExperimentReport::new(
        "spectrum",
        cfg.effective_json(),
        cfg.seed,
        table,
        vec![],
        gates,
    ))
}

/// Per-cell trajectory `t,theta,log_r,ReJ,ImJ,ReR,ImR` of one realization.
pub fn run_phase_dump(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let p = &cfg.params;
    let n = *p.lengths().last().unwrap_or(&2);
    let potential = cfg.model.realize(cfg.seed, p.realization, n)?;
    let mut table = Table::new(&["t", "theta", "log_r", "ReJ", "ImJ", "ReR", "ImR"]);
    let row = |t: usize, theta: f64, log_r: f64, j: Complex64, r: Complex64| {
        vec![
            json!(t),
            num(theta),
            num(log_r),
            num(j.re),
            num(j.im),
            num(r.re),
            num(r.im),
        ]
    };
    let zero = Complex64::new(0.0, 0.0);
    table.push(row(0, 0.0, 0.0, zero, zero));
    let state = integrate_with(
        &potential,
        p.kappa0,
        &p.spectrum.integrator,
        Track::Functionals,
        |s| {
            table.push(row(s.t, s.theta, s.log_r, s.j, s.r));
        },
    )?;
    let gates = vec![Gate::holds("finite", state.theta.is_finite())];
    Ok(ExperimentReport::new(
        "phase-dump",
        cfg.effective_json(),
        cfg.seed,
        table,
        vec![],
        gates,
    ))
}
