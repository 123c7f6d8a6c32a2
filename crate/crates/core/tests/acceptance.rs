//! Acceptance checks. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; the process exits non-zero
//! if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;

use num_complex::Complex64;
use polsim_core::analysis::{fit_log_rate, modulation_period};
use polsim_core::gate::{gate_fidelity, gate_matrix, linear_gate_matrix, optimal_swap_time, target_swap};
use polsim_core::integrator::{convergence_order, IntegratorConfig};
use polsim_core::linear::{propagator, transfer_deficit};
use polsim_core::model::{rhs_reduced, FieldState, FullState, Mode, ModelParams, PerMode, ReservoirChannel};
use polsim_core::presets;
use polsim_core::stability::{analyze_trivial, multiset_distance, stability_eigenvalues_analytic};
use polsim_core::{evolve_full, evolve_reduced};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn within(value: f64, expected: f64, tol: f64) -> bool {
    (value - expected).abs() <= tol
}

fn swap_fidelity(u_s: f64, u_c: f64, gamma: f64) -> f64 {
    let cfg = IntegratorConfig::rk45(1.0, 1.0);
    let u = gate_matrix(&ModelParams::pt(u_s, u_c, gamma), PI / 2.0, &cfg).expect("gate run");
    gate_fidelity(&u, &target_swap())
}

fn fidelity_rows(rows: &[(f64, f64, f64, f64, f64)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for &(u_s, u_c, gamma, expected, tol) in rows {
        let f = swap_fidelity(u_s, u_c, gamma);
        let ok = within(f, expected, tol);
        pass &= ok;
        parts.push(format!(
            "(u_s={u_s}, u_c={u_c}, gamma={gamma}) F={f:.5} vs {expected}+-{tol} {}",
            if ok { "ok" } else { "out" }
        ));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion_1() -> Outcome {
    fidelity_rows(&[(0.0, 0.0, 0.1, 0.992, 0.003), (0.0, 0.0, 0.3, 0.935, 0.005)])
}

fn criterion_2() -> Outcome {
    fidelity_rows(&[(1.0, 1.0, 0.1, 0.991, 0.003), (1.0, 1.0, 0.3, 0.922, 0.005), (1.0, 1.0, 0.5, 0.799, 0.008)])
}

fn criterion_3() -> Outcome {
    fidelity_rows(&[(1.0, 0.5, 0.1, 0.982, 0.004), (1.0, 0.1, 0.1, 0.963, 0.004), (1.0, 0.1, 0.3, 0.867, 0.008)])
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let gamma = 0.999 * k as f64 / 199.0;
        let (analytic, numeric) = analyze_trivial(&presets::stability_params().with_pt_gamma(gamma)).unwrap();
        let numeric = numeric.expect("fixed point below J");
        for l in analytic.eigenvalues.iter().chain(&numeric.eigenvalues) {
            worst = worst.max(l.re.abs());
        }
    }
    let above =
        stability_eigenvalues_analytic(1.0, 1.001, 1.0, 0.9).unwrap().iter().map(|l| l.re).fold(f64::MIN, f64::max);
    Outcome {
        pass: worst < 1e-6 && above > 0.0,
        detail: format!("max |Re l| for gamma<=0.999: {worst:.2e}; max Re l at 1.001: {above:.4}"),
    }
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let j = rng.random_range(0.5..2.0);
        let mp = ModelParams::new(j, rng.random_range(0.0..2.0), rng.random_range(0.0..2.0))
            .with_pt_gamma(rng.random_range(0.0..0.95) * j);
        let (analytic, numeric) = analyze_trivial(&mp).unwrap();
        worst = worst.max(multiset_distance(&analytic.eigenvalues, &numeric.unwrap().eigenvalues));
    }
    Outcome { pass: worst < 1e-6, detail: format!("max multiset distance over 200 draws: {worst:.2e}") }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let j = rng.random_range(0.5..2.0);
        let gamma = rng.random_range(0.0..=0.9) * j;
        let t = rng.random_range(0.01..=10.0) / j;
        let mut f0 = FieldState::default();
        for m in Mode::ALL {
            f0[m] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let mp = ModelParams::new(j, 0.0, 0.0).with_pt_gamma(gamma);
        let tau = j * t;
        let cfg = IntegratorConfig::rk45(tau, tau).with_tolerances(1e-12, 1e-14);
        let end = *evolve_reduced(&mp, &f0, &cfg).unwrap().last().unwrap().1;
        let u = propagator(j, gamma, t).unwrap();
        let (lp, rp) = u.apply(f0.l_plus, f0.r_plus);
        let (lm, rm) = u.apply(f0.l_minus, f0.r_minus);
        for (x, y) in [(end.l_plus, lp), (end.r_plus, rp), (end.l_minus, lm), (end.r_minus, rm)] {
            worst = worst.max((x - y).norm());
        }
    }
    Outcome { pass: worst < 1e-7, detail: format!("max amplitude error over 50 cases: {worst:.2e}") }
}

fn criterion_7() -> Outcome {
    let decay = presets::unbalanced_decay();
    let cfg = IntegratorConfig::rk45(decay.tau_end, 0.01);
    let traj = evolve_reduced(&decay.params, &presets::default_initial_state(), &cfg).unwrap();
    let totals: Vec<f64> = traj.states.iter().map(|s| s.total_population()).collect();
    let rate = fit_log_rate(&traj.times, &totals).unwrap();
    let rate_ok = within(rate, -0.1, 0.002);

    let harmonic = presets::pt_interacting(1.0, 1.0);
    let cfg = IntegratorConfig::rk45(harmonic.tau_end, 0.01);
    let traj = evolve_reduced(&harmonic.params, &presets::default_initial_state(), &cfg).unwrap();
    let z: Vec<f64> = traj.observables().iter().map(|o| o.z_plus.unwrap_or(f64::NAN)).collect();
    let expected = 40.0 * PI;
    let period = modulation_period(&traj.times, &z, PI);
    let period_ok = period.is_some_and(|p| within(p, expected, 0.05 * expected));
    Outcome {
        pass: rate_ok && period_ok,
        detail: format!(
            "decay rate {rate:.5} vs -0.1+-2%; modulation period {} vs 40pi={expected:.3}+-5%",
            period.map_or("none".into(), |p| format!("{p:.3}"))
        ),
    }
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut drift: f64 = 0.0;
    for _ in 0..20 {
        let mp = ModelParams::new(1.0, rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let mut f0 = FieldState::default();
        for m in Mode::ALL {
            f0[m] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let (p0, m0) = f0.species_totals();
        let cfg = IntegratorConfig::rk45(20.0, 0.1).with_tolerances(1e-12, 1e-14);
        for s in &evolve_reduced(&mp, &f0, &cfg).unwrap().states {
            let (p, m) = s.species_totals();
            drift = drift.max((p / p0 - 1.0).abs()).max((m / m0 - 1.0).abs());
        }
    }
    let mp = ModelParams::pt(1.0, 0.9, 0.0);
    let report = convergence_order(|_, s| rhs_reduced(s, &mp), &presets::default_initial_state(), 5.0, 0.02).unwrap();
    let order = report.order.unwrap_or(f64::NAN);
    Outcome {
        pass: drift < 1e-9 && (3.8..=4.2).contains(&order),
        detail: format!("max relative drift {drift:.2e}; RK4 order {order:.3}"),
    }
}

fn criterion_9() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for gamma in [0.1, 0.3] {
        let at_half = gate_fidelity(&linear_gate_matrix(1.0, gamma, PI / 2.0).unwrap(), &target_swap());
        let t_opt = optimal_swap_time(1.0, gamma).unwrap();
        let cfg = IntegratorConfig::rk45(1.0, 1.0);
        let at_opt =
            gate_fidelity(&gate_matrix(&ModelParams::pt(0.0, 0.0, gamma), t_opt, &cfg).unwrap(), &target_swap());
        pass &= at_opt >= at_half;
        parts.push(format!("gamma={gamma}: F(opt)={at_opt:.5} F(pi/2)={at_half:.5}"));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion_10() -> Outcome {
    let mut worst: f64 = 0.0;
    for gamma in [0.1, 0.2, 0.3] {
        worst = worst.max((transfer_deficit(1.0, gamma).unwrap() - gamma * gamma / (1.0 - gamma * gamma)).abs());
    }
    Outcome { pass: worst < 1e-6, detail: format!("max |deficit - law| {worst:.2e}") }
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let rp = PerMode::from_fn(|m| {
        let g = if m.is_left() { 0.1 } else { -0.1 };
        ReservoirChannel::tuned_for_gain(g, 100.0, 0.1, 0.2).unwrap()
    });
    for case in 0..20 {
        let mut f0 = presets::default_initial_state();
        let (u_s, u_c) = if case == 0 {
            (1.0, 1.0)
        } else {
            for m in Mode::ALL {
                f0[m] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
            let scale = f0.total_population().sqrt();
            f0 = f0.map(|z| z / scale);
            (rng.random_range(0.0..1.5), rng.random_range(0.0..1.5))
        };
        let mp = ModelParams::pt(u_s, u_c, 0.0);
        let cfg = IntegratorConfig::rk45(20.0, 0.05);
        let full = evolve_full(&mp, &rp, &FullState::with_steady_reservoirs(f0, &rp).unwrap(), &cfg).unwrap();
        let reduced = evolve_reduced(&mp.with_pt_gamma(0.1), &f0, &cfg).unwrap();
        let peak = reduced.states.iter().flat_map(|s| Mode::ALL.map(|m| s[m].norm_sqr())).fold(0.0, f64::max);
        for (f, r) in full.states.iter().zip(&reduced.states) {
            for m in Mode::ALL {
                worst = worst.max((f.fields[m].norm_sqr() - r[m].norm_sqr()).abs() / peak);
            }
        }
    }
    Outcome { pass: worst < 0.02, detail: format!("max relative population deviation over 20 cases: {worst:.2e}") }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("1 linear PT SWAP fidelities", criterion_1),
        ("2 interacting fidelities", criterion_2),
        ("3 unequal-interaction fidelities", criterion_3),
        ("4 bifurcation at J", criterion_4),
        ("5 analytic vs numeric eigenvalues", criterion_5),
        ("6 propagator vs RK45", criterion_6),
        ("7 envelope rate and modulation period", criterion_7),
        ("8 norm conservation and RK4 order", criterion_8),
        ("9 optimal swap time improvement", criterion_9),
        ("10 incomplete-transfer law", criterion_10),
        ("11 full vs reduced tier", criterion_11),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let outcome = check();
        if !outcome.pass {
            failures += 1;
        }
        println!("{} criterion {name}: {}", if outcome.pass { "PASS" } else { "FAIL" }, outcome.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
