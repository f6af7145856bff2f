//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mbo_core::consistency::{obstruction_check_3d, scheme_expansion_2d, scheme_expansion_3d, Expansion, GraphJet2D};
use mbo_core::evolve::{
    graph_convolution, graph_step, radial_step, GraphInterface, GridConvolver, GridField, StepParams,
};
use mbo_core::harness::{self, ExperimentConfig, ExperimentKind, InitialCondition, KernelChoice};
use mbo_core::kernel::{fourier_sign_probe, positivity_certificate, solve_special_kernel, Dimension, SpecialCubic};
use mbo_core::quad::composite_gauss;
use mbo_core::KernelSpec;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Check = fn() -> mbo_core::Result<Outcome>;

fn kernel_coefficients() -> mbo_core::Result<Outcome> {
    let spec = solve_special_kernel(1e-15)?;
    let (c1, c2) = (spec.coeffs()[1], spec.coeffs()[2]);
    let ratio = spec.step_ratio();
    let pass = (c1 - 0.2444098).abs() <= 1e-6 && (c2 + 0.2410874).abs() <= 1e-6 && (ratio - 2.137831).abs() <= 1e-5;
    Ok(outcome(pass, format!("c1 = {c1:.10}, c2 = {c2:.10}, step ratio = {ratio:.10}")))
}

fn ulp_distance(a: f64, b: f64) -> f64 {
    (a - b).abs() / (b.abs() * f64::EPSILON)
}

fn cubic_anchors() -> mbo_core::Result<Outcome> {
    let fifth = SpecialCubic::eval_rational(1, 5);
    let quarter = SpecialCubic::eval_rational(1, 4);
    let exact = fifth == (27, 1) && quarter == (-61, 16);
    let d_fifth = ulp_distance(SpecialCubic::eval(0.2), 27.0);
    let d_quarter = ulp_distance(SpecialCubic::eval(0.25), -61.0 / 16.0);
    let pass = exact && d_fifth <= 1.0 && d_quarter <= 1.0;
    Ok(outcome(
        pass,
        format!(
            "p(1/5) = {}/{}, p(1/4) = {}/{}; f64 within {d_fifth:.2} and {d_quarter:.2} ulp",
            fifth.0, fifth.1, quarter.0, quarter.1
        ),
    ))
}

fn positivity() -> mbo_core::Result<Outcome> {
    let spec = KernelSpec::second_order();
    let cert = positivity_certificate(&spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = f64::INFINITY;
    for _ in 0..10_000 {
        let u: f64 = rng.gen_range(0.0..1.0);
        let r = 40.0 * u * u;
        worst = worst.min(spec.eval_radial(r, Dimension::Two));
    }
    let pass = cert.is_positive && cert.min_value > 0.01 && cert.min_value < 0.03 && worst >= 0.0;
    Ok(outcome(
        pass,
        format!(
            "certificate min {:.7} at xi = {:.4}, smallest K over 1e4 random radii = {worst:.3e}",
            cert.min_value, cert.argmin_xi
        ),
    ))
}

fn residuals() -> mbo_core::Result<Outcome> {
    let jet = GraphJet2D { g2: 1.0, g4: 0.0 };
    let second = scheme_expansion_2d(&KernelSpec::second_order(), jet)?;
    let gauss = scheme_expansion_2d(&KernelSpec::gaussian(), jet)?;
    let pass = second.residual_theta1 < 1e-10
        && second.residual_theta2 < 1e-10
        && gauss.residual_theta1 == 0.0
        && (gauss.residual_theta2 - 1.0 / 3.0).abs() <= 1e-12;
    Ok(outcome(
        pass,
        format!(
            "second-order {:.2e}, {:.2e}; gaussian {:.2e}, {:.15}",
            second.residual_theta1, second.residual_theta2, gauss.residual_theta1, gauss.residual_theta2
        ),
    ))
}

fn obstruction() -> mbo_core::Result<Outcome> {
    let report = obstruction_check_3d(100, 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut constructed = 0;
    let mut worst_b1 = 0.0f64;
    let mut worst_gap = 0.0f64;
    while constructed < 100 {
        let n = rng.gen_range(2..=5);
        let scales: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..=10.0)).collect();
        let mut coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..=2.0)).collect();
        let head: f64 = scales[..n - 1].iter().zip(&coeffs).map(|(a, c)| a.sqrt() * c).sum();
        coeffs[n - 1] = -head / scales[n - 1].sqrt();
        let Ok(spec) = KernelSpec::new(scales, coeffs) else { continue };
        if spec.theta(-1).abs() < 0.1 {
            continue;
        }
        let Expansion::Spatial { b1, b2, b4, .. } = scheme_expansion_3d(&spec)?.expansion else { unreachable!() };
        worst_b1 = worst_b1.max(b1.abs());
        worst_gap = worst_gap.max((6.0 * b2 - b4).abs());
        constructed += 1;
    }
    let pass = report.passed() && worst_b1 < 1e-12 && worst_gap < 1e-10;
    Ok(outcome(
        pass,
        format!(
            "{} random kernels, max rel error {:.2e}; 100 kernels with theta(1) = 0: |B1| <= {worst_b1:.1e}, |6B2 - B4| <= {worst_gap:.1e}",
            report.checked, report.max_rel_error
        ),
    ))
}

fn lte_slopes() -> mbo_core::Result<Outcome> {
    let mut detail = Vec::new();
    let mut pass = true;
    for (kernel, lo, hi) in [(KernelChoice::SecondOrder, 2.8, 3.2), (KernelChoice::Gaussian, 1.8, 2.2)] {
        let mut cfg = ExperimentConfig::defaults(ExperimentKind::CircleLte);
        cfg.kernel = kernel.clone();
        let slopes: Vec<f64> = harness::run_circle_lte(&cfg)?
            .iter()
            .map(|t| t.metadata["slope"].parse::<f64>().unwrap())
            .collect();
        pass &= slopes.iter().all(|s| (lo..=hi).contains(s));
        let text: Vec<String> = slopes.iter().map(|s| format!("{s:.4}")).collect();
        detail.push(format!("{kernel} [{}]", text.join(", ")));
    }
    Ok(outcome(pass, format!("slopes for r0 = 1, 2, 3: {}", detail.join("; "))))
}

fn graph_convergence() -> mbo_core::Result<Outcome> {
    let mut pass = true;
    let mut detail = Vec::new();
    let cases = [
        (InitialCondition::HalfSine, [6.93e-6, 1.70e-6]),
        (InitialCondition::ExpCos, [1.45e-5, 3.64e-6]),
    ];
    for (initial, expected) in cases {
        let mut cfg = ExperimentConfig::defaults(ExperimentKind::GraphConverge);
        cfg.initial = initial.clone();
        cfg.raw_time = true;
        let table = harness::run_graph_convergence(&cfg)?;
        let rows = &table.rows;
        let tail = &rows[rows.len() - 2..];
        for (row, target) in tail.iter().zip(expected) {
            let order = row.order.unwrap_or(f64::NAN);
            let ratio = row.error / target;
            pass &= (1.85..=2.15).contains(&order) && (0.5..=2.0).contains(&ratio);
        }
        let cells: Vec<String> = rows
            .iter()
            .map(|r| match r.order {
                Some(o) => format!("{}:{:.3e}/{o:.2}", r.n_steps, r.error),
                None => format!("{}:{:.3e}", r.n_steps, r.error),
            })
            .collect();
        detail.push(format!("{initial} {}", cells.join(" ")));
    }
    Ok(outcome(pass, format!("kernel time T/n per step; {}", detail.join("; "))))
}

fn random_disks(rng: &mut ChaCha8Rng, n: usize, count: usize) -> mbo_core::Result<GridField> {
    let mut field = GridField::empty(n, n, 1.0, 1.0)?;
    for _ in 0..count {
        let centre = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let disk = GridField::disk(n, n, 1.0, 1.0, centre, rng.gen_range(0.03..0.2))?;
        field = field.union(&disk)?;
    }
    Ok(field)
}

fn random_pixels(rng: &mut ChaCha8Rng, n: usize, density: f64) -> mbo_core::Result<GridField> {
    let cells = (0..n * n).map(|_| rng.gen_bool(density)).collect();
    GridField::new(n, n, 1.0, 1.0, cells)
}

/// Smallest power of two for which the narrowest kernel component spans
/// enough cells that the sampled multiplier is negligible at the Nyquist mode.
fn grid_size_for(t: f64) -> usize {
    let mut n = 64;
    while 0.25 * t * (PI * n as f64).powi(2) < 36.0 {
        n *= 2;
    }
    n
}

fn random_graph(rng: &mut ChaCha8Rng, nodes: usize) -> mbo_core::Result<GraphInterface> {
    let modes: Vec<(f64, f64, f64)> = (1..=4)
        .map(|m| (m as f64, rng.gen_range(-0.1..0.1), rng.gen_range(0.0..2.0 * PI)))
        .collect();
    let samples = (0..nodes)
        .map(|i| {
            let x = i as f64 / nodes as f64;
            let smooth: f64 = modes.iter().map(|(m, a, p)| a * (2.0 * PI * m * x + p).sin()).sum();
            smooth + rng.gen_range(-0.005..0.005)
        })
        .collect();
    GraphInterface::new(1.0, samples)
}

fn monotonicity() -> mbo_core::Result<Outcome> {
    let spec = KernelSpec::second_order();
    let times = [1e-4, 1e-3, 1e-2];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut grid_violations = 0;
    for trial in 0..50 {
        let t = times[trial % 3];
        let n = grid_size_for(t);
        let (a, b) = if trial % 2 == 0 {
            let a = random_disks(&mut rng, n, 4)?;
            let extra = random_disks(&mut rng, n, 2)?;
            let b = a.union(&extra)?;
            (a, b)
        } else {
            let a = random_pixels(&mut rng, n, 0.4)?;
            let extra = random_pixels(&mut rng, n, 0.2)?;
            let b = a.union(&extra)?;
            (a, b)
        };
        let conv = GridConvolver::for_field(&a, &StepParams::new(t, spec.clone())?);
        let (mut a, mut b) = (a, b);
        for step in 1..=10 {
            a = conv.step(&a)?;
            b = conv.step(&b)?;
            if (step == 1 || step == 10) && !a.is_subset_of(&b) {
                grid_violations += 1;
            }
        }
    }
    let mut graph_violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for trial in 0..50 {
        let t = times[trial % 3];
        let f = random_graph(&mut rng, 256)?;
        let bump = random_graph(&mut rng, 256)?;
        let g = GraphInterface::new(
            1.0,
            f.samples().iter().zip(bump.samples()).map(|(a, d)| a + d.max(0.0)).collect(),
        )?;
        let params = StepParams::new(t, spec.clone())?;
        let (mut f, mut g) = (f, g);
        for step in 1..=10 {
            f = graph_step(&f, &params)?;
            g = graph_step(&g, &params)?;
            if step == 1 || step == 10 {
                let excess = f.samples().iter().zip(g.samples()).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
                worst = worst.max(excess);
                if excess > 1e-12 {
                    graph_violations += 1;
                }
            }
        }
    }
    Ok(outcome(
        grid_violations == 0 && graph_violations == 0,
        format!(
            "50 nested grid pairs: {grid_violations} violations; 50 ordered graph pairs: {graph_violations} violations, max(f - g) = {worst:.1e}"
        ),
    ))
}

fn fourier_sign() -> mbo_core::Result<Outcome> {
    let probe = fourier_sign_probe(&KernelSpec::second_order());
    Ok(outcome(
        probe.value < 0.0,
        format!("multiplier {:.5} at |k| = {:.4}, t = {}", probe.value, probe.k_norm, probe.t),
    ))
}

/// `∫∫_{y' ≤ f(x')} G_t(x − x', y − y') dx' dy'` by nested Gauss-Legendre
/// quadrature of the two-dimensional heat kernel.
fn brute_convolution(f: impl Fn(f64) -> f64, x: f64, y: f64, t: f64) -> f64 {
    let half = (4.0 * t * 36.0).sqrt();
    let g = |d: f64| (-d * d / (4.0 * t)).exp() / (4.0 * PI * t).sqrt();
    composite_gauss(
        |xb| {
            let top = f(xb).clamp(y - half, y + half);
            g(x - xb) * composite_gauss(|yb| g(y - yb), y - half, top, 8, 16)
        },
        x - half,
        x + half,
        64,
        16,
    )
}

fn oracles() -> mbo_core::Result<Outcome> {
    let t = 1e-3;
    let shape = |x: f64| 0.3 * (2.0 * PI * x).sin() + 0.1 * (6.0 * PI * x).cos();
    let graph = GraphInterface::from_fn(1.0, 2048, shape)?;
    let params = StepParams::new(t, KernelSpec::gaussian())?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x: f64 = rng.gen_range(0.0..1.0);
        let y = shape(x) + rng.gen_range(-0.1..0.1);
        let got = graph_convolution(&graph, x, y, &params)?;
        let want = brute_convolution(|xb| shape(xb.rem_euclid(1.0)), x, y, t);
        worst = worst.max((got - want).abs());
    }
    let n = 512;
    let r0 = 0.25;
    let params = StepParams::new(t, KernelSpec::second_order())?;
    let disk = GridField::disk(n, n, 1.0, 1.0, (0.5, 0.5), r0)?;
    let stepped = GridConvolver::for_field(&disk, &params).step(&disk)?;
    let radial = radial_step(r0, &params)?;
    let h = 1.0 / n as f64;
    let gap = (stepped.equivalent_radius() - radial).abs();
    Ok(outcome(
        worst <= 1e-8 && gap <= h,
        format!(
            "gaussian graph convolution vs brute quadrature at 20 points: {worst:.1e}; grid disk radius {:.6} vs radial {radial:.6} (cell {h:.2e})",
            stepped.equivalent_radius()
        ),
    ))
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 10] = [
        ("kernel coefficients", kernel_coefficients),
        ("cubic anchors", cubic_anchors),
        ("kernel positivity", positivity),
        ("consistency residuals", residuals),
        ("3D obstruction", obstruction),
        ("circle local error", lte_slopes),
        ("graph convergence", graph_convergence),
        ("monotonicity", monotonicity),
        ("Fourier sign", fourier_sign),
        ("convolution oracles", oracles),
    ];
    let mut failures = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(o) => {
                let tag = if o.pass { "PASS" } else { "FAIL" };
                failures += usize::from(!o.pass);
                println!("{tag} {:>2} {name}: {} ({secs:.1} s)", i + 1, o.detail);
            }
            Err(e) => {
                failures += 1;
                println!("FAIL {:>2} {name}: error: {e} ({secs:.1} s)", i + 1);
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
