//! Subsequences `κ_0 n_k ≈ β mod π` and the Laplace functional of `ξ_n`.

use std::f64::consts::PI;

use serde::Serialize;
use serde_json::json;

use super::{
    applicable, map_realizations, mean_se, num, ExperimentConfig, ExperimentReport, Fit, Gate,
    Table,
};
use crate::error::{Error, Result};
use crate::spectrum::{
    eigenvalue_window, frac_pi, laplace_functional_direct, laplace_functional_phase, TestFunction,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Subsequence {
    pub n: usize,
    /// Circular distance of `{κ_0 n}_π` from `β` on `[0, π)`.
    pub defect: f64,
}

pub(crate) fn circular_defect(x: f64, beta: f64) -> f64 {
    let d = (frac_pi(x) - beta).abs();
    d.min(PI - d)
}

/// `n_1 < ... < n_count`, `n_b` minimizing the defect over the block
/// `[stride · 2^b, stride · 2^{b+1})`.
pub fn subsequence_s(
    kappa0: f64,
    beta: f64,
    count: usize,
    stride: usize,
    search_limit: usize,
) -> Result<Vec<Subsequence>> {
    if !(0.0..PI).contains(&beta) || !(kappa0 > 0.0) || stride == 0 {
        return Err(Error::config(format!(
            "need κ_0 > 0, β ∈ [0, π), stride > 0 (got {kappa0}, {beta}, {stride})"
        )));
    }
    let mut out = Vec::with_capacity(count);
    for b in 0..count as u32 {
        let lo = stride.checked_shl(b).unwrap_or(usize::MAX);
        let hi = stride.checked_shl(b + 1).unwrap_or(usize::MAX);
        if hi - 1 > search_limit {
            return Err(Error::config(format!(
                "search limit {search_limit} reached after {} of {count} subsequence terms",
                out.len()
            )));
        }
        let best = (lo..hi)
            .map(|n| Subsequence {
                n,
                defect: circular_defect(kappa0 * n as f64, beta),
            })
            .reduce(|a, b| if b.defect < a.defect { b } else { a })
            .ok_or_else(|| Error::config("empty search block"))?;
        if best.defect >= PI / 4.0 {
            return Err(Error::config(format!(
                "no n in [{lo}, {hi}) comes within π/4 of β (best defect {})",
                best.defect
            )));
        }
        out.push(best);
    }
    Ok(out)
}

/// `exp(-Σ_j g(jπ - φ))`, the Laplace functional of the clock process with
/// phase `φ`.
pub(crate) fn clock_prediction(g: &TestFunction, phi: f64) -> f64 {
    let Some((lo, hi)) = g.support() else {
        return 1.0;
    };
    let first = ((lo + phi) / PI).floor() as i64;
    let last = ((hi + phi) / PI).ceil() as i64;
    (-(first..=last)
        .map(|j| g.eval(j as f64 * PI - phi))
        .sum::<f64>())
    .exp()
}

struct Sample {
    direct: f64,
    phase: f64,
    frac: f64,
}

fn samples(cfg: &ExperimentConfig, n: usize, realizations: u64) -> Result<Vec<Sample>> {
    let p = &cfg.params;
    map_realizations(realizations, |r| {
        let potential = cfg.model.realize(cfg.seed, r, n)?;
        let window = eigenvalue_window(&potential, p.kappa0, p.c_max, &p.spectrum)?;
        let sample = window.sample();
        Ok(Sample {
            direct: laplace_functional_direct(&sample, &p.test_function)?,
            phase: laplace_functional_phase(&potential, p.kappa0, &p.test_function, &p.spectrum)?,
            frac: sample.frac_phase,
        })
    })
}

pub(crate) fn bin_of(phi: f64, bins: usize) -> usize {
    ((phi / PI * bins as f64) as usize).min(bins - 1)
}

/// Along the subsequence (or the configured lengths): (i) the empirical
/// `E[exp(-ξ_n(g))]`, (ii) the histogram `μ̂` of `{θ_n(κ_0)}_π`, (iii) the
/// clock prediction `∫ dμ̂(φ) exp(-Σ_j g(jπ - φ))` from bin centers, and the
/// per-realization identity between the direct and phase forms.
pub fn run_clock_laplace_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let p = &cfg.params;
    let g = &p.test_function;
    if let Some((lo, hi)) = g.support() {
        if lo < -p.c_max || hi > p.c_max {
            return Err(Error::config(format!(
                "test function support [{lo}, {hi}] exceeds the window ±{}",
                p.c_max
            )));
        }
    }
    let terms: Vec<(usize, f64)> = match p.beta {
        Some(beta) => subsequence_s(
            p.kappa0,
            beta,
            p.subsequence_count,
            p.search_stride,
            p.search_limit,
        )?
        .into_iter()
        .map(|s| (s.n, s.defect))
        .collect(),
        None => p.lengths().into_iter().map(|n| (n, f64::NAN)).collect(),
    };
    let bins = p.histogram_bins;
    let centers: Vec<f64> = (0..bins)
        .map(|b| (b as f64 + 0.5) * PI / bins as f64)
        .collect();
    let center_prediction: Vec<f64> = centers.iter().map(|&c| clock_prediction(g, c)).collect();

    let mut table = Table::new(&[
        "control",
        "n",
        "defect",
        "realizations",
        "direct",
        "direct_se",
        "predicted",
        "predicted_se",
        "predicted_unbinned",
        "predicted_unbinned_se",
        "abs_diff",
        "combined_se",
        "identity_max_dev",
        "identity_pass_fraction",
    ]);
    let mut identity_ok = true;
    let mut last = (f64::NAN, f64::NAN);
    let mut histogram = vec![0u64; bins];
    let mut push = |label: &str, n: usize, defect: f64, s: &[Sample], histogram: &mut Vec<u64>| {
        let direct: Vec<f64> = s.iter().map(|x| x.direct).collect();
        let binned: Vec<f64> = s
            .iter()
            .map(|x| center_prediction[bin_of(x.frac, bins)])
            .collect();
        let unbinned: Vec<f64> = s.iter().map(|x| clock_prediction(g, x.frac)).collect();
        let (d, d_se) = mean_se(&direct);
        let (b, b_se) = mean_se(&binned);
        let (u, u_se) = mean_se(&unbinned);
        let devs: Vec<f64> = s.iter().map(|x| (x.direct - x.phase).abs()).collect();
        let max_dev = devs.iter().copied().fold(0.0, f64::max);
        let passing = devs
            .iter()
            .filter(|&&v| v <= p.gates.laplace_identity_tol)
            .count();
        let combined = (d_se * d_se + b_se * b_se).sqrt();
        table.push(vec![
            json!(label),
            json!(n),
            num(defect),
            json!(s.len()),
            num(d),
            num(d_se),
            num(b),
            num(b_se),
            num(u),
            num(u_se),
            num((d - b).abs()),
            num(combined),
            num(max_dev),
            num(passing as f64 / s.len() as f64),
        ]);
        histogram.iter_mut().for_each(|h| *h = 0);
        for x in s {
            histogram[bin_of(x.frac, bins)] += 1;
        }
        (passing == s.len(), (d - b).abs(), combined, (d - u).abs())
    };

    for &(n, defect) in &terms {
        let s = samples(cfg, n, p.realizations)?;
        let (ok, diff, combined, _) = push("random", n, defect, &s, &mut histogram);
        identity_ok &= ok;
        last = (diff, combined);
    }
    let fits: Vec<Fit> = histogram
        .iter()
        .enumerate()
        .map(|(b, &c)| {
            let freq = c as f64 / p.realizations as f64;
            Fit {
                name: format!("mu_hat_bin_{b}"),
                value: freq,
                stderr: (freq * (1.0 - freq) / p.realizations as f64).sqrt(),
                residual_stderr: None,
            }
        })
        .collect();
    let (n_last, defect_last) = *terms.last().unwrap_or(&(2, f64::NAN));
    let mut scratch = vec![0u64; bins];
    let (free_ok, _, _, free_diff) = push(
        "free",
        n_last,
        defect_last,
        &samples(&cfg.free_control(), n_last, 1)?,
        &mut scratch,
    );

    let gates = vec![
        Gate::holds("identity_in_every_realization", identity_ok && free_ok),
        Gate::below(
            "abs_diff_in_combined_se",
            last.0 / last.1,
            p.gates.laplace_sigmas,
        ),
        Gate::at_most("free_field_abs_diff", free_diff, p.gates.free_field_tol),
    ];
    Ok(ExperimentReport::new(
        "laplace",
        cfg.effective_json(),
        cfg.seed,
        table,
        fits,
        applicable(cfg, gates),
    ))
}
