//! Gap statistics and relative-phase convergence.

use std::f64::consts::PI;

use serde_json::json;

use super::{
    applicable, map_realizations, mean_se, median_se, num, ExperimentConfig, ExperimentReport,
    Gate, Table,
};
use crate::error::Result;
use crate::spectrum::{eigenvalue_window, relative_phase_curve};

fn gaps_for(cfg: &ExperimentConfig, n: usize, realizations: u64) -> Result<Vec<Vec<f64>>> {
    let p = &cfg.params;
    map_realizations(realizations, |r| {
        let potential = cfg.model.realize(cfg.seed, r, n)?;
        Ok(eigenvalue_window(&potential, p.kappa0, p.c_max, &p.spectrum)?.rescaled_gaps())
    })
}

/// Distribution of `n(κ'_{j+1} - κ'_j)` over the window and realizations,
/// per `n`. Gates: the median of `|n·gap - π|` decreases strictly along the
/// lengths and ends below the declared tolerance; the free field is exact.
pub fn run_clock_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let p = &cfg.params;
    let lengths = p.lengths();
    let mut table = Table::new(&[
        "control",
        "n",
        "realizations",
        "gaps",
        "mean_gap",
        "mean_gap_se",
        "median_gap",
        "median_gap_se",
        "std_gap",
        "median_abs_dev",
        "median_abs_dev_se",
        "max_abs_dev",
    ]);
    let mut push = |label: &str, n: usize, realizations: u64, gaps: &[f64]| -> f64 {
        let devs: Vec<f64> = gaps.iter().map(|g| (g - PI).abs()).collect();
        let (mean, mean_err) = mean_se(gaps);
        let (median, median_err) = median_se(gaps);
        let (mdev, mdev_err) = median_se(&devs);
        let std = crate::amplitudes::mean_var(gaps).1.sqrt();
        let max_dev = devs.iter().copied().fold(0.0, f64::max);
        table.push(vec![
            json!(label),
            json!(n),
            json!(realizations),
            json!(gaps.len()),
            num(mean),
            num(mean_err),
            num(median),
            num(median_err),
            num(std),
            num(mdev),
            num(mdev_err),
            num(max_dev),
        ]);
        if label == "free" {
            max_dev
        } else {
            mdev
        }
    };

    let mut medians = Vec::with_capacity(lengths.len());
    for &n in &lengths {
        let gaps = gaps_for(cfg, n, p.realizations)?.concat();
        medians.push(push("random", n, p.realizations, &gaps));
    }
    let n_last = *lengths.last().unwrap_or(&2);
    let free_gaps = gaps_for(&cfg.free_control(), n_last, 1)?.concat();
    let free_dev = push("free", n_last, 1, &free_gaps);

    let gates = vec![
        Gate::holds(
            "median_abs_dev_strictly_decreasing",
            medians.windows(2).all(|w| w[1] < w[0]),
        ),
        Gate::at_most(
            "median_abs_dev_at_largest_n",
            *medians.last().unwrap_or(&f64::NAN),
            p.gates.clock_median_max,
        ),
        Gate::at_most("free_field_max_abs_dev", free_dev, p.gates.free_field_tol),
    ];
    Ok(ExperimentReport::new(
        "clock",
        cfg.effective_json(),
        cfg.seed,
        table,
        vec![],
        applicable(cfg, gates),
    ))
}

/// The `c`-grid `-c_range, ..., c_range` with step `c_step`, containing 0.
pub(crate) fn c_grid(c_range: f64, c_step: f64) -> Vec<f64> {
    let half = (c_range / c_step).round() as i64;
    (-half..=half).map(|i| i as f64 * c_step).collect()
}

struct PhaseDeviation {
    sup: f64,
    per_c: Vec<f64>,
    at_zero: f64,
}

fn deviations(
    cfg: &ExperimentConfig,
    n: usize,
    realizations: u64,
    cs: &[f64],
) -> Result<Vec<PhaseDeviation>> {
    let p = &cfg.params;
    let zero = cs.iter().position(|&c| c == 0.0);
    map_realizations(realizations, |r| {
        let potential = cfg.model.realize(cfg.seed, r, n)?;
        let theta = relative_phase_curve(&potential, p.kappa0, cs, &p.spectrum)?;
        let per_c: Vec<f64> = theta.iter().zip(cs).map(|(t, c)| (t - c).abs()).collect();
        Ok(PhaseDeviation {
            sup: per_c.iter().copied().fold(0.0, f64::max),
            at_zero: zero.map_or(0.0, |i| theta[i].abs()),
            per_c,
        })
    })
}

/// Distribution of `Θ^(n)(c) - c` on the `c`-grid per `n`. Gates: the median
/// over realizations of `sup_c |Θ(c) - c|` ends below the declared tolerance
/// and below its value at the smallest `n`; the free field is exact.
pub fn run_theta_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let p = &cfg.params;
    let lengths = p.lengths();
    let cs = c_grid(p.c_range, p.c_step);
    let mut table = Table::new(&[
        "control",
        "n",
        "realizations",
        "median_sup_dev",
        "median_sup_dev_se",
        "mean_sup_dev",
        "mean_sup_dev_se",
        "sup_median_dev",
        "max_abs_theta_at_zero",
    ]);
    let mut push = |label: &str, n: usize, realizations: u64, devs: &[PhaseDeviation]| -> f64 {
        let sups: Vec<f64> = devs.iter().map(|d| d.sup).collect();
        let (median, median_err) = median_se(&sups);
        let (mean, mean_err) = mean_se(&sups);
        let sup_median = (0..cs.len())
            .map(|i| median_se(&devs.iter().map(|d| d.per_c[i]).collect::<Vec<_>>()).0)
            .fold(0.0, f64::max);
        let at_zero = devs.iter().map(|d| d.at_zero).fold(0.0, f64::max);
        table.push(vec![
            json!(label),
            json!(n),
            json!(realizations),
            num(median),
            num(median_err),
            num(mean),
            num(mean_err),
            num(sup_median),
            num(at_zero),
        ]);
        median
    };

    let mut medians = Vec::with_capacity(lengths.len());
    for &n in &lengths {
        medians.push(push(
            "random",
            n,
            p.realizations,
            &deviations(cfg, n, p.realizations, &cs)?,
        ));
    }
    let n_last = *lengths.last().unwrap_or(&2);
    let free = push(
        "free",
        n_last,
        1,
        &deviations(&cfg.free_control(), n_last, 1, &cs)?,
    );

    let last = *medians.last().unwrap_or(&f64::NAN);
    let mut gates = vec![
        Gate::at_most(
            "median_sup_dev_at_largest_n",
            last,
            p.gates.theta_median_max,
        ),
        Gate::at_most("free_field_sup_dev", free, p.gates.free_field_tol),
    ];
    if medians.len() > 1 {
        gates.push(Gate::below(
            "median_sup_dev_below_smallest_n",
            last,
            medians[0],
        ));
    }
    Ok(ExperimentReport::new(
        "theta",
        cfg.effective_json(),
        cfg.seed,
        table,
        vec![],
        applicable(cfg, gates),
    ))
}
