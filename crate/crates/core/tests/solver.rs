use std::f64::consts::{FRAC_PI_2, PI};

use compulse_core::presets::find;
use compulse_core::scan::{Axis, Grid, Variable};
use compulse_core::solver::*;
use compulse_core::taylor::FdConfig;
use compulse_core::*;
use proptest::prelude::*;

fn theta_grid() -> Grid {
    Grid::new(vec![Axis::linspace(Variable::Theta, 0.0, FRAC_PI_2, 101).unwrap()])
}

#[test]
fn finite_differences_match_cos_squared() {
    // P = cos²θ: ∂²P = −2, ∂⁴P = 8, ∂⁶P = −32
    let target = CompensationTarget::theta(System::V, 6).unwrap();
    let seq = find("single-pi").unwrap().sequence();
    for step in [1e-3, 5e-4] {
        let fd = FdConfig { step, ..FdConfig::default() };
        let terms = taylor_coefficients(&seq, &target, &fd).unwrap();
        let values: Vec<f64> = terms.iter().map(|t| t.value).collect();
        for (k, exact) in [(2, -2.0), (4, 8.0)] {
            assert!((values[k] - exact).abs() < 1e-6 * exact.abs(), "order {k}: {}", values[k]);
        }
        assert!((values[6] + 32.0).abs() < 1e-3 * 32.0);
        for k in [1, 3, 5] {
            assert!(values[k].abs() < 1e-6);
        }
    }
}

#[test]
fn three_pulse_preset_annuls_low_orders() {
    let target = CompensationTarget::theta(System::V, 4).unwrap();
    let terms = taylor_coefficients(&find("fig2-3pulse").unwrap().sequence(), &target, &FdConfig::default()).unwrap();
    assert!((terms[0].value - 1.0).abs() < 1e-12);
    for t in &terms[1..] {
        assert!(t.value.abs() < 1e-6, "{:?}", t);
    }
}

#[test]
fn joint_presets_annul_mixed_terms() {
    for (name, var) in [("fig3-area", Variable::Area), ("fig3-detuning", Variable::Detuning)] {
        let target = CompensationTarget::new(System::V, vec![Variable::Theta, var], 2).unwrap();
        let terms = taylor_coefficients(&find(name).unwrap().sequence(), &target, &FdConfig::default()).unwrap();
        assert_eq!(terms.len(), 6);
        assert_eq!(terms[3].orders, [2, 0, 0]);
        for t in &terms[1..] {
            assert!(t.value.abs() < 1e-6, "{name} {:?}", t);
        }
    }
}

#[test]
fn single_pulse_trivial_solution() {
    let target = CompensationTarget::theta(System::V, 2).unwrap();
    let cfg = SolverConfig { n_pulses: 1, ..Default::default() };
    let sols = solve_phases(&target, &cfg).unwrap();
    assert_eq!(sols.len(), 1);
    let s = &sols[0];
    assert!((s.nominal_fidelity - 1.0).abs() < 1e-12);
    assert!((s.residuals[1] - 2.0).abs() < 1e-6);
    assert!(!s.converged);
}

#[test]
fn converged_solutions_satisfy_their_constraints() {
    let cases = [
        (System::V, vec![Variable::Theta], 3, 4),
        (System::Y, vec![Variable::Theta], 2, 2),
        (System::V, vec![Variable::Theta, Variable::Detuning], 3, 2),
    ];
    for (system, vars, n, order) in cases {
        let target = CompensationTarget::new(system, vars, order).unwrap();
        let cfg = SolverConfig { n_pulses: n, restarts: 6, seed: 3, ..Default::default() };
        let sols = solve_phases(&target, &cfg).unwrap();
        assert!(sols.iter().any(|s| s.converged), "{system:?} n={n}");
        for s in sols.iter().filter(|s| s.converged) {
            assert_eq!(s.phases.len(), n);
            assert!(s.phases[0].components().iter().all(|&x| x == 0.0));
            let seq = target.sequence(&s.phases).unwrap();
            let terms = taylor_coefficients(&seq, &target, &cfg.fd()).unwrap();
            assert!(terms[0].value > 1.0 - cfg.convergence_tol);
            assert!(terms[1..].iter().all(|t| t.value.abs() < cfg.convergence_tol));
        }
    }
}

#[test]
fn more_pulses_never_annul_fewer_orders() {
    let target = CompensationTarget::theta(System::V, 4).unwrap();
    let mut previous = 0;
    for n in 1..=3 {
        let cfg = SolverConfig { n_pulses: n, restarts: 6, ..Default::default() };
        let best = &solve_phases(&target, &cfg).unwrap()[0];
        let report = verify_solution(best, &target, &theta_grid(), &cfg).unwrap();
        assert!(report.vanished_through >= previous, "n={n}");
        previous = report.vanished_through;
    }
    assert_eq!(previous, 4);
}

#[test]
fn solver_is_deterministic_and_order_independent() {
    let target = CompensationTarget::theta(System::V, 2).unwrap();
    let cfg = SolverConfig { n_pulses: 3, restarts: 5, seed: 42, ..Default::default() };
    let a = solve_phases(&target, &cfg).unwrap();
    let b = solve_phases(&target, &cfg).unwrap();
    assert_eq!(a, b);
    let reversed: Vec<_> = (0..5).rev().map(|i| solve_restart(&target, &cfg, i).unwrap()).collect();
    assert_eq!(merge_solutions(&target, reversed).unwrap(), a);
    let other = solve_phases(&target, &SolverConfig { seed: 43, ..cfg }).unwrap();
    assert_ne!(other, a);
}

#[test]
fn joint_theta_area_solve_converges() {
    let target = CompensationTarget::new(System::V, vec![Variable::Theta, Variable::Area], 2).unwrap();
    let cfg = SolverConfig { n_pulses: 3, restarts: 8, ..Default::default() };
    let sols = solve_phases(&target, &cfg).unwrap();
    assert!(sols[0].converged, "{:?}", sols[0]);
}

#[test]
fn refinement_keeps_a_converged_solution_in_place() {
    let target = CompensationTarget::theta(System::V, 4).unwrap();
    let start = find("fig2-3pulse").unwrap().phases();
    let refined = refine_phases(&target, &SolverConfig::default(), &start).unwrap();
    assert!(refined.converged);
    for (p, q) in refined.phases.iter().zip(&start) {
        for (x, y) in p.components().iter().zip(q.components()) {
            assert!(dynamics::wrap_phase(x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn verification_report_for_single_pulse() {
    let target = CompensationTarget::theta(System::V, 2).unwrap();
    let sol = &solve_phases(&target, &SolverConfig { n_pulses: 1, ..Default::default() }).unwrap()[0];
    let report = verify_solution(sol, &target, &theta_grid(), &SolverConfig::default()).unwrap();
    assert_eq!(report.vanished_orders, vec![1]);
    assert_eq!(report.vanished_through, 1);
    assert_eq!(report.grid_points, 101);
    // cos²θ > 0.999 for θ < 0.0316, i.e. the first three grid points
    assert_eq!(report.high_fidelity_fraction, Some(3.0 / 101.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn zeroth_coefficient_is_the_nominal_probability(
        phases in prop::collection::vec((-PI..PI, -PI..PI), 1..5),
    ) {
        let ph: Vec<_> = phases.iter().map(|&(a, b)| PhaseVector::v(a, b)).collect();
        let target = CompensationTarget::theta(System::V, 2).unwrap();
        let seq = target.sequence(&ph).unwrap();
        let terms = taylor_coefficients(&seq, &target, &FdConfig::default()).unwrap();
        let p = seq.transfer_probability(OperatingPoint::NOMINAL).unwrap();
        prop_assert_eq!(terms[0].value, p);
    }

    #[test]
    fn odd_theta_derivatives_vanish(
        phases in prop::collection::vec((-PI..PI, -PI..PI), 1..5),
    ) {
        // θ → −θ is the gauge φ13 → φ13 + π
        let ph: Vec<_> = phases.iter().map(|&(a, b)| PhaseVector::v(a, b)).collect();
        let target = CompensationTarget::theta(System::V, 3).unwrap();
        let terms = taylor_coefficients(&target.sequence(&ph).unwrap(), &target, &FdConfig::default()).unwrap();
        prop_assert!(terms[1].value.abs() < 1e-9);
        prop_assert!(terms[3].value.abs() < 1e-6);
    }
}
