use std::f64::consts::PI;

use polsim_core::evolve_zphi;
use polsim_core::integrator::IntegratorConfig;
use polsim_core::model::{rhs_zphi, wrap_phase, ModelParams, ZPhiState};
use polsim_core::stability::{
    analyze_trivial, bifurcation_threshold, classify, find_fixed_points, jacobian_numeric, matrix_eigenvalues,
    multiset_distance, stability_eigenvalues_analytic, trivial_fixed_point, Classification, CLASSIFY_TOL,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn analytic_matches_numeric_jacobian(gamma_frac in 0.0..0.95f64, u_s in 0.0..2.0f64, u_c in 0.0..2.0f64, j in 0.5..2.0f64) {
        let mp = ModelParams::new(j, u_s, u_c).with_pt_gamma(gamma_frac * j);
        let (analytic, numeric) = analyze_trivial(&mp).unwrap();
        let numeric = numeric.expect("fixed point exists below J");
        let d = multiset_distance(&analytic.eigenvalues, &numeric.eigenvalues);
        prop_assert!(d < 1e-6, "distance {}", d);
        // eigenvalues come in +- pairs
        let negated = numeric.eigenvalues.map(|l| -l);
        prop_assert!(multiset_distance(&numeric.eigenvalues, &negated) < 1e-6);
    }
}

fn distance(a: &ZPhiState, b: &ZPhiState) -> f64 {
    [
        (a.z_plus - b.z_plus).abs(),
        (a.z_minus - b.z_minus).abs(),
        wrap_phase(a.phi_plus - b.phi_plus).abs(),
        wrap_phase(a.phi_minus - b.phi_minus).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn nudged(p: &ZPhiState, delta: f64) -> ZPhiState {
    ZPhiState::new(p.z_plus + delta, p.z_minus - delta, p.phi_plus + delta, p.phi_minus)
}

#[test]
fn elliptic_point_confines_nearby_orbits() {
    for (u_s, u_c, gamma) in [(1.0, 0.9, 0.0), (1.0, 0.9, 0.5), (0.2, 1.0, 0.3), (1.0, 1.0, 0.9)] {
        let mp = ModelParams::pt(u_s, u_c, gamma);
        let (report, _) = analyze_trivial(&mp).unwrap();
        assert_eq!(report.classification, Classification::Elliptic);
        let fp = trivial_fixed_point(1.0, gamma).unwrap();
        let traj = evolve_zphi(&mp, &nudged(&fp, 1e-3), &IntegratorConfig::rk45(50.0, 0.05)).unwrap();
        let worst = traj.states.iter().map(|s| distance(s, &fp)).fold(0.0, f64::max);
        assert!(worst < 1e-2, "({u_s}, {u_c}, {gamma}): {worst}");
    }
}

#[test]
fn unstable_point_repels_nearby_orbits() {
    let (u_s, u_c) = (0.2, 1.0);
    let threshold = bifurcation_threshold(1.0, u_s, u_c);
    assert!((threshold - 0.916515).abs() < 1e-6);
    let gamma = 0.95;
    assert!(gamma > threshold);
    let mp = ModelParams::pt(u_s, u_c, gamma);
    let (report, numeric) = analyze_trivial(&mp).unwrap();
    assert_eq!(report.classification, Classification::Unstable);
    assert_eq!(numeric.unwrap().classification, Classification::Unstable);
    let growth = report.max_real_part();
    let fp = trivial_fixed_point(1.0, gamma).unwrap();
    let start = nudged(&fp, 1e-3);
    let d0 = distance(&start, &fp);
    let horizon = 10.0 / growth;
    let traj = evolve_zphi(&mp, &start, &IntegratorConfig::rk45(horizon, 0.01)).unwrap();
    let worst = traj.states.iter().map(|s| distance(s, &fp)).fold(0.0, f64::max);
    assert!(worst >= 10.0 * d0, "grew only to {worst}");
}

fn residual(mp: &ModelParams, p: &ZPhiState) -> f64 {
    let d = rhs_zphi(p, mp).unwrap();
    d.to_array().iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Brute-force oracle: local minima of the residual on a periodic 4-D grid,
/// polished by shrinking coordinate search.
fn grid_minima(mp: &ModelParams, n: usize) -> Vec<ZPhiState> {
    let z = |k: usize| -0.95 + 1.9 * k as f64 / (n - 1) as f64;
    let phi = |k: usize| -PI + 2.0 * PI * k as f64 / n as f64;
    let idx = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
    let mut values = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    values[idx(a, b, c, d)] = residual(mp, &ZPhiState::new(z(a), z(b), phi(c), phi(d)));
                }
            }
        }
    }
    let mut distinct: Vec<ZPhiState> = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let v = values[idx(a, b, c, d)];
                    let mut neighbours = Vec::new();
                    if a > 0 {
                        neighbours.push(idx(a - 1, b, c, d));
                    }
                    if a + 1 < n {
                        neighbours.push(idx(a + 1, b, c, d));
                    }
                    if b > 0 {
                        neighbours.push(idx(a, b - 1, c, d));
                    }
                    if b + 1 < n {
                        neighbours.push(idx(a, b + 1, c, d));
                    }
                    neighbours.push(idx(a, b, (c + 1) % n, d));
                    neighbours.push(idx(a, b, (c + n - 1) % n, d));
                    neighbours.push(idx(a, b, c, (d + 1) % n));
                    neighbours.push(idx(a, b, c, (d + n - 1) % n));
                    if v > 1.0 || neighbours.iter().any(|&k| values[k] < v) {
                        continue;
                    }
                    let p = refine(mp, ZPhiState::new(z(a), z(b), phi(c), phi(d)));
                    let p = ZPhiState::new(p.z_plus, p.z_minus, wrap_phase(p.phi_plus), wrap_phase(p.phi_minus));
                    if residual(mp, &p) < 1e-6 && !distinct.iter().any(|q| distance(q, &p) < 1e-3) {
                        distinct.push(p);
                    }
                }
            }
        }
    }
    distinct
}

fn refine(mp: &ModelParams, mut p: ZPhiState) -> ZPhiState {
    let mut h = 0.05;
    for _ in 0..100_000 {
        if h < 1e-10 {
            break;
        }
        let mut improved = false;
        for k in 0..4 {
            for s in [-h, h] {
                let mut v = p.to_array();
                v[k] += s;
                let q = ZPhiState::from_array(v);
                if q.z_plus.abs() < 1.0 && q.z_minus.abs() < 1.0 && residual(mp, &q) < residual(mp, &p) {
                    p = q;
                    improved = true;
                }
            }
        }
        h = if improved { (2.0 * h).min(0.05) } else { 0.5 * h };
    }
    p
}

fn random_seeds(n: usize, seed: u64) -> Vec<ZPhiState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            ZPhiState::new(
                rng.random_range(-0.9..0.9),
                rng.random_range(-0.9..0.9),
                rng.random_range(-PI..PI),
                rng.random_range(-PI..PI),
            )
        })
        .collect()
}

#[test]
fn hermitian_root_set_contains_trivial_combinations() {
    let mp = ModelParams::pt(1.0, 0.9, 0.0);
    let search = find_fixed_points(&mp, &random_seeds(100, 7)).unwrap();
    let oracle = grid_minima(&mp, 20);
    assert_eq!(oracle.len(), 4, "{oracle:?}");
    for expected in &oracle {
        assert!(expected.z_plus.abs() < 1e-6 && expected.z_minus.abs() < 1e-6);
        for phi in [expected.phi_plus, expected.phi_minus] {
            assert!(phi.abs() < 1e-6 || (phi.abs() - PI).abs() < 1e-6, "{expected:?}");
        }
        assert!(
            search.roots.iter().any(|r| distance(r, expected) < 1e-6),
            "Newton missed {expected:?}; roots {:?}",
            search.roots
        );
    }
    for r in &search.roots {
        assert!(residual(&mp, r) < 1e-10);
    }
}

#[test]
fn balanced_gain_supports_no_stable_imbalanced_roots() {
    let mp = ModelParams::pt(1.0, 0.9, 0.3);
    let mut seeds = Vec::new();
    let n = 7;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let z = |k: usize| -0.9 + 1.8 * k as f64 / (n - 1) as f64;
                    let phi = |k: usize| -PI + 2.0 * PI * k as f64 / n as f64;
                    seeds.push(ZPhiState::new(z(a), z(b), phi(c), phi(d)));
                }
            }
        }
    }
    let search = find_fixed_points(&mp, &seeds).unwrap();
    assert!(!search.roots.is_empty());
    let mut imbalanced = 0;
    for r in &search.roots {
        if r.z_plus.abs() < 1e-8 && r.z_minus.abs() < 1e-8 {
            continue;
        }
        imbalanced += 1;
        let eigs = matrix_eigenvalues(&jacobian_numeric(r, &mp).unwrap());
        assert_eq!(classify(&eigs, CLASSIFY_TOL), Classification::Unstable, "imbalanced root {r:?}: {eigs:?}");
    }
    assert!(imbalanced > 0);
    let fp = trivial_fixed_point(1.0, 0.3).unwrap();
    assert!(search.roots.iter().any(|r| distance(r, &fp) < 1e-8));
}

#[test]
fn trivial_seed_is_already_a_root() {
    let mp = ModelParams::pt(1.0, 0.9, 0.3);
    let fp = trivial_fixed_point(1.0, 0.3).unwrap();
    let search = find_fixed_points(&mp, &[fp]).unwrap();
    assert_eq!(search.roots.len(), 1);
    assert!(distance(&search.roots[0], &fp) < 1e-12);
}

#[test]
fn analytic_eigenvalues_of_sweep_endpoints() {
    let eigs = stability_eigenvalues_analytic(1.0, 1.001, 1.0, 0.9).unwrap();
    assert!(eigs.iter().any(|l| l.re > 0.0));
}
