use std::f64::consts::PI;

use mbo_core::benchmark::{circle_exact, fd_solve, FdConfig};
use mbo_core::evolve::GraphInterface;
use mbo_core::harness::l2_error;

fn half_sine(n: usize) -> GraphInterface {
    GraphInterface::from_fn(1.0, n, |x| 0.5 * (2.0 * PI * x).sin()).unwrap()
}

fn solve(n: usize, total: f64) -> GraphInterface {
    fd_solve(&half_sine(n), &FdConfig::with_safety(n, 1.0, 0.25, total)).unwrap()
}

#[test]
fn finite_differences_converge_at_second_order() {
    let total = 1.0 / 40.0;
    let reference = solve(1024, total);
    let errors: Vec<f64> = [64, 128, 256].iter().map(|&n| l2_error(&solve(n, total), &reference).unwrap()).collect();
    for pair in errors.windows(2) {
        let order = (pair[0] / pair[1]).log2();
        assert!((1.8..2.3).contains(&order), "orders from {errors:?}");
    }
}

#[test]
fn small_amplitude_decays_like_the_heat_equation() {
    let eps = 1e-6;
    let n = 256;
    let total = 0.01;
    let f0 = GraphInterface::from_fn(1.0, n, |x| eps * (2.0 * PI * x).sin()).unwrap();
    let out = fd_solve(&f0, &FdConfig::with_safety(n, 1.0, 0.25, total)).unwrap();
    let decay = (-4.0 * PI * PI * total).exp();
    let exact = GraphInterface::from_fn(1.0, n, |x| eps * decay * (2.0 * PI * x).sin()).unwrap();
    let err = l2_error(&out, &exact).unwrap();
    assert!(err < 1e-3 * eps, "{err:e}");
}

#[test]
fn ordered_graphs_stay_ordered() {
    let n = 128;
    let f = half_sine(n);
    let g = GraphInterface::from_fn(1.0, n, |x| 0.5 * (2.0 * PI * x).sin() + 0.05 * (1.0 + (6.0 * PI * x).cos())).unwrap();
    let cfg = FdConfig::with_safety(n, 1.0, 0.4, 0.02);
    let (f1, g1) = (fd_solve(&f, &cfg).unwrap(), fd_solve(&g, &cfg).unwrap());
    assert!(f1.samples().iter().zip(g1.samples()).all(|(a, b)| a <= b));
}

#[test]
fn unstable_step_is_rejected() {
    let cfg = FdConfig { n_space: 64, dt: 1e-3, final_time: 0.01 };
    assert!(fd_solve(&half_sine(64), &cfg).is_err());
}

#[test]
fn circle_radius_law() {
    assert_eq!(circle_exact(2.0, 1.5).unwrap(), 1.0);
    assert!(circle_exact(1.0, 0.5).is_err());
}
