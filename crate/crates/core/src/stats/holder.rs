//! Hölder continuity of `J` in `κ` and block moments of `R`.

use num_complex::Complex64;
use serde_json::json;

use super::{
    applicable, jackknife, map_realizations, mean_se, num, ExperimentConfig, ExperimentReport, Fit,
    Gate, Table,
};
use crate::amplitudes::linear_fit;
use crate::error::Result;
use crate::potential::RealizedPotential;
use crate::prufer::{integrate_with, IntegratorConfig, Track};

/// `J(t)` at `t = 0 ..= n`.
fn j_path(
    potential: &RealizedPotential,
    kappa: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<Complex64>> {
    let mut path = Vec::with_capacity(potential.len() + 1);
    path.push(Complex64::new(0.0, 0.0));
    integrate_with(potential, kappa, cfg, Track::Functionals, |s| {
        path.push(s.j)
    })?;
    Ok(path)
}

/// `sup_{m ≤ t ≤ N} |J^(m,t)(κ_2) - J^(m,t)(κ_1)|²` from two `J` paths.
pub(crate) fn sup_increment_sq(a: &[Complex64], b: &[Complex64], m: usize) -> f64 {
    let base = b[m] - a[m];
    a[m..]
        .iter()
        .zip(&b[m..])
        .map(|(x, y)| (y - x - base).norm_sqr())
        .fold(0.0, f64::max)
}

fn ols_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let fit = linear_fit(xs, ys, &vec![1.0; xs.len()], false);
    (fit.slope, fit.slope_stderr)
}

fn holder_rows(cfg: &ExperimentConfig, realizations: u64) -> Result<Vec<Vec<f64>>> {
    let p = &cfg.params;
    let integrator = &p.spectrum.integrator;
    map_realizations(realizations, |r| {
        let potential = cfg.model.realize(cfg.seed, r, p.horizon)?;
        let base = j_path(&potential, p.kappa0, integrator)?;
        p.delta_kappas
            .iter()
            .map(|dk| {
                Ok(sup_increment_sq(
                    &base,
                    &j_path(&potential, p.kappa0 + dk, integrator)?,
                    p.m,
                ))
            })
            .collect()
    })
}

/// Monte Carlo estimate of `E[sup_{m≤t≤N} |ΔJ^(m,t)|²]` per `Δκ` and its
/// log-log slope. The slope's standard error is the larger of the jackknife
/// (Monte Carlo) error and the regression-residual error.
pub fn run_holder_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let p = &cfg.params;
    let rows = holder_rows(cfg, p.realizations)?;
    let free_rows = holder_rows(&cfg.free_control(), 1)?;

    let mut table = Table::new(&[
        "control",
        "delta_kappa",
        "estimate",
        "estimate_se",
        "degenerate",
    ]);
    let mut estimates = Vec::with_capacity(p.delta_kappas.len());
    for (i, dk) in p.delta_kappas.iter().enumerate() {
        let column: Vec<f64> = rows.iter().map(|r| r[i]).collect();
        let (mean, se) = mean_se(&column);
        estimates.push(mean);
        table.push(vec![
            json!("random"),
            num(*dk),
            num(mean),
            num(se),
            json!(!(mean > 0.0)),
        ]);
    }
    let mut free_max = 0.0f64;
    for (i, dk) in p.delta_kappas.iter().enumerate() {
        free_max = free_max.max(free_rows[0][i]);
        table.push(vec![
            json!("free"),
            num(*dk),
            num(free_rows[0][i]),
            num(0.0),
            json!(true),
        ]);
    }

    let xs: Vec<f64> = p.delta_kappas.iter().map(|d| d.ln()).collect();
    let degenerate = estimates.iter().any(|e| !(*e > 0.0));
    let (slope, residual_se) =
        ols_slope(&xs, &estimates.iter().map(|e| e.ln()).collect::<Vec<_>>());
    let (_, mc_se) = jackknife(&rows, |means| {
        ols_slope(&xs, &means.iter().map(|e| e.ln()).collect::<Vec<_>>()).0
    });
    let stderr = mc_se.max(if residual_se.is_finite() {
        residual_se
    } else {
        0.0
    });
    let fits = vec![Fit {
        name: "log_log_slope".into(),
        value: slope,
        stderr: mc_se,
        residual_stderr: Some(residual_se),
    }];
    let gates = vec![
        Gate::holds("estimates_positive", !degenerate),
        Gate::at_least("slope", slope, p.gates.holder_slope_min),
        Gate::at_most("slope_stderr", stderr, p.gates.holder_stderr_max),
        Gate::at_most("free_field_estimate", free_max, p.gates.free_field_tol),
    ];
    Ok(ExperimentReport::new(
        "holder",
        cfg.effective_json(),
        cfg.seed,
        table,
        fits,
        applicable(cfg, gates),
    ))
}

/// Per block `k`: `sup_{2^k ≤ t ≤ 2^{k+1}} |R^(2^k,t)|²` and `|J^(2^k,2^{k+1})|²`.
fn moment_rows(cfg: &ExperimentConfig, realizations: u64) -> Result<Vec<Vec<f64>>> {
    let p = &cfg.params;
    let n = 1usize << (p.block_k_max + 1);
    map_realizations(realizations, |r| {
        let potential = cfg.model.realize(cfg.seed, r, n)?;
        let mut rs = Vec::with_capacity(n + 1);
        let mut js = Vec::with_capacity(n + 1);
        rs.push(Complex64::new(0.0, 0.0));
        js.push(Complex64::new(0.0, 0.0));
        integrate_with(
            &potential,
            p.kappa0,
            &p.spectrum.integrator,
            Track::Functionals,
            |s| {
                rs.push(s.r);
                js.push(s.j);
            },
        )?;
        let mut row = Vec::new();
        for k in p.block_k_min..=p.block_k_max {
            let (a, b) = (1usize << k, 1usize << (k + 1));
            let sup_r = rs[a..=b]
                .iter()
                .map(|x| (x - rs[a]).norm_sqr())
                .fold(0.0, f64::max);
            row.push(sup_r);
            row.push((js[b] - js[a]).norm_sqr());
        }
        Ok(row)
    })
}

/// Dyadic-block estimates of `E[sup |R^(2^k,t)|²]` and `E[|J^(2^k,2^{k+1})|²]`
/// with the fitted decay exponent of the former in `2^{-k}`.
pub fn run_moment_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let p = &cfg.params;
    let rows = moment_rows(cfg, p.realizations)?;
    let free_rows = moment_rows(&cfg.free_control(), 1)?;
    let ks: Vec<u32> = (p.block_k_min..=p.block_k_max).collect();

    let mut table = Table::new(&[
        "control",
        "k",
        "sup_r_sq",
        "sup_r_sq_se",
        "j_sq",
        "j_sq_se",
        "ratio_to_previous",
    ]);
    let mut sup_means = Vec::with_capacity(ks.len());
    for (i, k) in ks.iter().enumerate() {
        let (r_mean, r_se) = mean_se(&rows.iter().map(|r| r[2 * i]).collect::<Vec<_>>());
        let (j_mean, j_se) = mean_se(&rows.iter().map(|r| r[2 * i + 1]).collect::<Vec<_>>());
        let ratio = sup_means
            .last()
            .map_or(f64::NAN, |prev: &f64| r_mean / prev);
        sup_means.push(r_mean);
        table.push(vec![
            json!("random"),
            json!(k),
            num(r_mean),
            num(r_se),
            num(j_mean),
            num(j_se),
            num(ratio),
        ]);
    }
    let free_max = free_rows[0].iter().copied().fold(0.0, f64::max);
    for (i, k) in ks.iter().enumerate() {
        table.push(vec![
            json!("free"),
            json!(k),
            num(free_rows[0][2 * i]),
            num(0.0),
            num(free_rows[0][2 * i + 1]),
            num(0.0),
            num(f64::NAN),
        ]);
    }

    let xs: Vec<f64> = ks.iter().map(|&k| f64::from(k)).collect();
    let exponent_of = |means: &[f64]| {
        let ys: Vec<f64> = ks
            .iter()
            .enumerate()
            .map(|(i, _)| means[2 * i].log2())
            .collect();
        -ols_slope(&xs, &ys).0
    };
    let (exponent, mc_se) = jackknife(&rows, exponent_of);
    let ys: Vec<f64> = sup_means.iter().map(|m| m.log2()).collect();
    let residual_se = if xs.len() > 2 {
        ols_slope(&xs, &ys).1
    } else {
        f64::NAN
    };
    let minimum = p
        .gates
        .moment_exponent_min
        .unwrap_or(0.5 * (2.0 * cfg.model.alpha - 1.0));
    let fits = vec![Fit {
        name: "decay_exponent".into(),
        value: exponent,
        stderr: mc_se,
        residual_stderr: Some(residual_se),
    }];
    let gates = vec![
        Gate::holds("blocks_decrease", sup_means.windows(2).all(|w| w[1] < w[0])),
        Gate::at_least("decay_exponent", exponent, minimum),
        Gate::at_most("free_field_moments", free_max, p.gates.free_field_tol),
    ];
    Ok(ExperimentReport::new(
        "moments",
        cfg.effective_json(),
        cfg.seed,
        table,
        fits,
        applicable(cfg, gates),
    ))
}
