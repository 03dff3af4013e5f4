//! Acceptance suite: one pass/fail line per criterion, non-zero exit if any
//! criterion fails. Every experiment runs on a one-thread pool first and is
//! rerun on a three-thread pool for the determinism criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use clockspec::amplitudes::{empirical_moment, AmplitudeSpec};
use clockspec::potential::{PotentialModel, SiteProfile};
use clockspec::prufer::{
    advance_cell, exact_cell_transfer, phase_derivative, theta_n, IntegratorConfig, PruferState,
};
use clockspec::spectrum::{eigenvalue_window, SpectrumConfig};
use clockspec::stats::{
    run_experiment, ExperimentConfig, ExperimentKind, ExperimentParams, ExperimentReport, Ladder,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

/// Experiments kept for the determinism rerun.
#[derive(Default)]
struct Runs {
    experiments: Vec<(String, ExperimentKind, ExperimentConfig, String, String)>,
}

impl Runs {
    fn run(
        &mut self,
        label: &str,
        kind: ExperimentKind,
        cfg: ExperimentConfig,
    ) -> ExperimentReport {
        let report = on_pool(1, || run_experiment(kind, &cfg)).expect("experiment failed");
        let json = report.to_json().unwrap();
        let csv = report.summary.to_csv();
        self.experiments
            .push((label.to_owned(), kind, cfg, json, csv));
        report
    }
}

fn on_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn iid_model() -> PotentialModel {
    PotentialModel::indicator(0.75, AmplitudeSpec::IidUniform).unwrap()
}

fn gate_summary(report: &ExperimentReport) -> String {
    report
        .gates
        .iter()
        .map(|g| {
            format!(
                "{}={:.4e}{}",
                g.name,
                g.value,
                if g.passed { "" } else { "(fail)" }
            )
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn timed(limit: Duration, started: Instant, passed: bool, detail: String) -> Outcome {
    let elapsed = started.elapsed();
    outcome(
        passed && elapsed < limit,
        format!(
            "{detail} runtime={:.2}s (limit {}s)",
            elapsed.as_secs_f64(),
            limit.as_secs()
        ),
    )
}

fn free_field() -> Outcome {
    let started = Instant::now();
    let free = PotentialModel::free();
    let cfg = IntegratorConfig::default();
    let mut theta_err = 0.0f64;
    for n in [1usize, 10, 100, 1000, 10_000] {
        let potential = free.realize(0, 0, n).unwrap();
        for kappa in [0.3, 1.0, 2.2, 7.5] {
            let theta = theta_n(&potential, kappa, &cfg).unwrap();
            theta_err = theta_err.max(((theta - kappa * n as f64) / (kappa * n as f64)).abs());
        }
    }
    let (mut gap_err, mut atom_err) = (0.0f64, 0.0f64);
    for (n, kappa0) in [(5000usize, 1.0), (10_000, 1.7)] {
        let potential = free.realize(0, 0, n).unwrap();
        let window =
            eigenvalue_window(&potential, kappa0, 15.0, &SpectrumConfig::default()).unwrap();
        for gap in window.rescaled_gaps() {
            gap_err = gap_err.max((gap - std::f64::consts::PI).abs());
        }
        for e in &window.eigenvalues {
            atom_err = atom_err
                .max((e.atom - (e.k as f64 * std::f64::consts::PI - n as f64 * kappa0)).abs());
        }
    }
    timed(
        Duration::from_secs(1),
        started,
        theta_err <= 1e-10 && gap_err <= 1e-9 && atom_err <= 1e-9,
        format!("theta_rel_err={theta_err:.2e} gap_err={gap_err:.2e} atom_err={atom_err:.2e}"),
    )
}

fn transfer_oracle() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rk4 = |v, kappa, theta, steps| {
        let mut state = PruferState::new();
        state.theta = theta;
        advance_cell(
            &mut state,
            v,
            &SiteProfile::Indicator,
            kappa,
            &IntegratorConfig::rk4(steps),
        )
        .unwrap();
        (state.theta, state.log_r)
    };
    let (mut dtheta, mut dlogr, mut fine) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let v: f64 = rng.random_range(-1.0..=1.0);
        let kappa: f64 = rng.random_range(0.5..=3.0);
        let theta: f64 = rng.random_range(0.0..2.0 * std::f64::consts::PI);
        let (te, le) = exact_cell_transfer(v, kappa, theta, 0.0);
        let (t64, l64) = rk4(v, kappa, theta, 64);
        let (t128, l128) = rk4(v, kappa, theta, 128);
        dtheta = dtheta.max((t64 - te).abs());
        dlogr = dlogr.max((l64 - le).abs());
        fine = fine.max((t128 - te).abs().max((l128 - le).abs()));
    }
    let improvement = dtheta.max(dlogr) / fine;
    timed(
        Duration::from_secs(5),
        started,
        dtheta <= 1e-8 && dlogr <= 1e-8 && improvement >= 8.0,
        format!("max_dtheta={dtheta:.2e} max_dlogr={dlogr:.2e} halving_gain={improvement:.1}"),
    )
}

fn derivative_check() -> Outcome {
    let started = Instant::now();
    let model = iid_model();
    let cfg = IntegratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for r in 0..50 {
        let potential = model.realize(3, r, 500).unwrap();
        let kappa: f64 = rng.random_range(0.5..=3.0);
        let analytic = phase_derivative(&potential, kappa, &cfg).unwrap();
        let fd = (theta_n(&potential, kappa + h, &cfg).unwrap()
            - theta_n(&potential, kappa - h, &cfg).unwrap())
            / (2.0 * h);
        worst = worst.max(((analytic - fd) / fd).abs());
    }
    timed(
        Duration::from_secs(60),
        started,
        worst <= 1e-4,
        format!("max_rel_err={worst:.2e}"),
    )
}

fn laplace_identity(runs: &mut Runs) -> Outcome {
    let started = Instant::now();
    let params = ExperimentParams {
        n_values: vec![2000],
        realizations: 200,
        ..ExperimentParams::default()
    };
    let report = runs.run(
        "laplace",
        ExperimentKind::Laplace,
        ExperimentConfig::new(iid_model(), params, 4),
    );
    let dev = report
        .summary
        .number(0, "identity_max_dev")
        .unwrap_or(f64::NAN);
    let fraction = report
        .summary
        .number(0, "identity_pass_fraction")
        .unwrap_or(f64::NAN);
    let ok = report
        .gate("identity_in_every_realization")
        .is_some_and(|g| g.passed)
        && dev <= 1e-6
        && fraction == 1.0;
    timed(
        Duration::from_secs(600),
        started,
        ok,
        format!(
            "identity_max_dev={dev:.2e} pass_fraction={fraction} {}",
            gate_summary(&report)
        ),
    )
}

fn strong_clock(runs: &mut Runs) -> Outcome {
    let cfg = ExperimentConfig::new(iid_model(), ExperimentParams::default(), 5);
    let report = runs.run("clock", ExperimentKind::Clock, cfg);
    outcome(report.passed, gate_summary(&report))
}

fn relative_phase(runs: &mut Runs) -> Outcome {
    let a = runs.run(
        "theta case A",
        ExperimentKind::Theta,
        ExperimentConfig::new(iid_model(), ExperimentParams::default(), 6),
    );
    let markov = PotentialModel::indicator(0.75, AmplitudeSpec::two_state_chain(0.8)).unwrap();
    let params = ExperimentParams {
        ladder: Some(Ladder {
            exponent: 3.0,
            k_values: vec![8, 10, 13, 17],
        }),
        ..ExperimentParams::default()
    };
    let b = runs.run(
        "theta case B",
        ExperimentKind::Theta,
        ExperimentConfig::new(markov, params, 6),
    );
    outcome(
        a.passed && b.passed,
        format!(
            "A: {} | B (n = k^3): {}",
            gate_summary(&a),
            gate_summary(&b)
        ),
    )
}

fn holder_slope(runs: &mut Runs) -> Outcome {
    let params = ExperimentParams {
        realizations: 500,
        ..ExperimentParams::default()
    };
    let report = runs.run(
        "holder",
        ExperimentKind::Holder,
        ExperimentConfig::new(iid_model(), params, 7),
    );
    outcome(report.passed, gate_summary(&report))
}

fn moment_decay(runs: &mut Runs) -> Outcome {
    let report = runs.run(
        "moments",
        ExperimentKind::Moments,
        ExperimentConfig::new(iid_model(), ExperimentParams::default(), 8),
    );
    outcome(report.passed, gate_summary(&report))
}

fn correlation_machinery(runs: &mut Runs) -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for p in [0.6, 0.8, 0.9] {
        let model = PotentialModel::indicator(0.75, AmplitudeSpec::two_state_chain(p)).unwrap();
        let mut params = ExperimentParams {
            sequence_length: 2000,
            ..ExperimentParams::default()
        };
        params.gates.decay_rate = Some(-(2.0f64 * p - 1.0).abs().ln());
        let report = runs.run(
            &format!("corr p={p}"),
            ExperimentKind::Corr,
            ExperimentConfig::new(model, params, 9),
        );
        ok &= report.passed;
        let rate = report.fit("decay_rate").map_or(f64::NAN, |f| f.value);
        detail.push(format!("rho(p={p})={rate:.4}"));
    }
    let (pair, _) = empirical_moment(&AmplitudeSpec::CosineDyadic, 9, 1_000_000, &[1, 1]).unwrap();
    let (third, _) = empirical_moment(&AmplitudeSpec::CosineDyadic, 9, 1_000_000, &[2, 1]).unwrap();
    ok &= pair.abs() < 0.01 && (third - 0.25).abs() <= 0.01;
    detail.push(format!("E[w1w2]={pair:.2e} E[w1^2w2]={third:.4}"));
    let report = runs.run(
        "dynsys-check",
        ExperimentKind::DynsysCheck,
        ExperimentConfig::new(PotentialModel::free(), ExperimentParams::default(), 9),
    );
    ok &= report.passed;
    detail.push(gate_summary(&report));
    outcome(ok, detail.join(" "))
}

fn determinism(runs: &Runs) -> Outcome {
    let mut mismatched = Vec::new();
    for (label, kind, cfg, json, csv) in &runs.experiments {
        let report = on_pool(3, || run_experiment(*kind, cfg)).expect("experiment failed");
        if report.to_json().unwrap() != *json || report.summary.to_csv() != *csv {
            mismatched.push(label.clone());
        }
    }
    outcome(
        mismatched.is_empty() && !runs.experiments.is_empty(),
        format!(
            "{} experiments rerun on 3 workers, mismatched: {mismatched:?}",
            runs.experiments.len()
        ),
    )
}

fn main() {
    let mut runs = Runs::default();
    let mut failures = 0;
    let mut report =
        |id: u32, name: &str, f: &mut dyn FnMut(&mut Runs) -> Outcome, runs: &mut Runs| {
            let result = catch_unwind(AssertUnwindSafe(|| f(runs))).unwrap_or_else(|e| {
                outcome(false, format!("panicked: {:?}", e.downcast_ref::<String>()))
            });
            let verdict = if result.passed { "PASS" } else { "FAIL" };
            if !result.passed {
                failures += 1;
            }
            println!("criterion {id:>2} {verdict} {name}: {}", result.detail);
        };
    report(1, "free-field exactness", &mut |_| free_field(), &mut runs);
    report(2, "transfer oracle", &mut |_| transfer_oracle(), &mut runs);
    report(
        3,
        "phase derivative",
        &mut |_| derivative_check(),
        &mut runs,
    );
    report(4, "Laplace identity", &mut laplace_identity, &mut runs);
    report(5, "strong clock", &mut strong_clock, &mut runs);
    report(6, "relative phase", &mut relative_phase, &mut runs);
    report(7, "Hölder slope", &mut holder_slope, &mut runs);
    report(8, "moment decay", &mut moment_decay, &mut runs);
    report(
        9,
        "correlation machinery",
        &mut correlation_machinery,
        &mut runs,
    );
    report(10, "determinism", &mut |r| determinism(r), &mut runs);
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
