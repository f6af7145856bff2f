//! Small-time expansions of one threshold step versus the exact flow.
//!
//! All quantities reduce to the kernel moments `θ(p)`, so the checks here are
//! floating-point evaluations of closed forms.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

/// Below this `|θ(-1)|` the expansion coefficients are not computed.
pub const DEGENERACY_TOL: f64 = 1e-6;

/// Second and fourth derivative at the origin of a curve `y = g(x)` with
/// `g(0) = g'(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphJet2D {
    pub g2: f64,
    pub g4: f64,
}

/// Curvature data at the origin of a surface `z = g(x, y)` with
/// `g(0,0) = 0`, `∇g(0,0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceJet3D {
    /// `Δg(0,0) = g_xx + g_yy`
    pub mean_curvature: f64,
    /// `g_xx g_yy − g_xy²`
    pub gauss_curvature: f64,
    /// `Δ²g(0,0)`
    pub biharmonic: f64,
}

impl SurfaceJet3D {
    /// Surface Laplacian of the mean curvature at the origin.
    pub fn surface_laplacian_of_mean_curvature(&self) -> f64 {
        let h = self.mean_curvature;
        self.biharmonic - 3.0 * h * h * h + 8.0 * h * self.gauss_curvature
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "dimension")]
pub enum Expansion {
    /// Interface height `a1 t + a2 t²` for a planar curve.
    #[serde(rename = "2")]
    Planar { a1: f64, a2: f64 },
    /// Coefficients of `t B1 H + t² (B2 Δ²g + B3 H³ + B4 H K)` for a surface.
    #[serde(rename = "3")]
    Spatial { b1: f64, b2: f64, b3: f64, b4: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub expansion: Expansion,
    /// `|θ²(1)/θ²(-1) − θ(3)/θ(-1)|`
    pub residual_theta1: f64,
    /// `|θ(3)/θ(-1) + (θ³(1)θ(-3) + 6θ²(1)θ²(-1) − 15θ³(-1)θ(3)) / (12θ⁴(-1))|`
    pub residual_theta2: f64,
}

impl ExpansionReport {
    /// Flat `key = value` record.
    pub fn to_record(&self) -> String {
        let mut s = String::new();
        match self.expansion {
            Expansion::Planar { a1, a2 } => {
                let _ = writeln!(s, "dimension = 2");
                let _ = writeln!(s, "a1 = {a1:.16e}");
                let _ = writeln!(s, "a2 = {a2:.16e}");
            }
            Expansion::Spatial { b1, b2, b3, b4 } => {
                let _ = writeln!(s, "dimension = 3");
                let _ = writeln!(s, "b1 = {b1:.16e}");
                let _ = writeln!(s, "b2 = {b2:.16e}");
                let _ = writeln!(s, "b3 = {b3:.16e}");
                let _ = writeln!(s, "b4 = {b4:.16e}");
            }
        }
        let _ = writeln!(s, "residual_theta1 = {:.16e}", self.residual_theta1);
        let _ = writeln!(s, "residual_theta2 = {:.16e}", self.residual_theta2);
        s
    }
}

/// Moments that appear in every expansion.
#[derive(Debug, Clone, Copy)]
struct Moments {
    p1: f64,
    m1: f64,
    p3: f64,
    m3: f64,
}

impl Moments {
    fn of(spec: &KernelSpec) -> Result<Self> {
        let m1 = spec.theta(-1);
        if m1.abs() < DEGENERACY_TOL {
            return Err(Error::DegenerateKernel { value: m1, tolerance: DEGENERACY_TOL });
        }
        Ok(Self { p1: spec.theta(1), m1, p3: spec.theta(3), m3: spec.theta(-3) })
    }

    /// `θ³(1)θ(-3) + 6θ²(1)θ²(-1) − 15θ³(-1)θ(3)` over `12θ⁴(-1)`.
    fn cubic_coefficient(&self) -> f64 {
        let Self { p1, m1, p3, m3 } = *self;
        (p1.powi(3) * m3 + 6.0 * p1 * p1 * m1 * m1 - 15.0 * m1.powi(3) * p3) / (12.0 * m1.powi(4))
    }

    fn residuals(&self) -> (f64, f64) {
        let r = self.p1 / self.m1;
        let q = self.p3 / self.m1;
        ((r * r - q).abs(), (q + self.cubic_coefficient()).abs())
    }
}

/// Height of the exact curve-shortening flow above the origin at time `t`,
/// truncated after the `t²` term.
pub fn exact_expansion_2d(jet: GraphJet2D, t: f64) -> f64 {
    let GraphJet2D { g2, g4 } = jet;
    t * g2 + t * t * (0.5 * g4 - g2 * g2 * g2)
}

/// Height of the exact mean-curvature flow of a surface at time `t`, through `t²`.
pub fn exact_expansion_3d(jet: SurfaceJet3D, t: f64) -> f64 {
    let h = jet.mean_curvature;
    t * h + 0.5 * t * t * (jet.biharmonic - 2.0 * h * h * h + 6.0 * h * jet.gauss_curvature)
}

/// Same expansion written with the surface Laplacian of `H`.
pub fn exact_expansion_3d_intrinsic(jet: SurfaceJet3D, t: f64) -> f64 {
    let h = jet.mean_curvature;
    let lap_h = jet.surface_laplacian_of_mean_curvature();
    t * h + 0.5 * t * t * (lap_h + h * h * h - 2.0 * h * jet.gauss_curvature)
}

/// Interface height after one threshold step, `a1 t + a2 t² + O(t³)`.
pub fn scheme_expansion_2d(spec: &KernelSpec, jet: GraphJet2D) -> Result<ExpansionReport> {
    let m = Moments::of(spec)?;
    let a1 = m.p1 / m.m1 * jet.g2;
    let a2 = m.p3 / (2.0 * m.m1) * jet.g4 + m.cubic_coefficient() * jet.g2.powi(3);
    let (residual_theta1, residual_theta2) = m.residuals();
    Ok(ExpansionReport { expansion: Expansion::Planar { a1, a2 }, residual_theta1, residual_theta2 })
}

pub fn scheme_expansion_3d(spec: &KernelSpec) -> Result<ExpansionReport> {
    let m = Moments::of(spec)?;
    let b1 = m.p1 / m.m1;
    let b2 = m.p3 / (2.0 * m.m1);
    let b3 = m.cubic_coefficient();
    let b4 = -(m.p1 * m.p1 - 3.0 * m.p3 * m.m1) / (m.m1 * m.m1);
    let (residual_theta1, residual_theta2) = m.residuals();
    Ok(ExpansionReport { expansion: Expansion::Spatial { b1, b2, b3, b4 }, residual_theta1, residual_theta2 })
}

/// Interface height in 3D from the B coefficients.
pub fn scheme_height_3d(report: &ExpansionReport, jet: SurfaceJet3D, t: f64) -> Option<f64> {
    match report.expansion {
        Expansion::Spatial { b1, b2, b3, b4 } => {
            let h = jet.mean_curvature;
            Some(t * b1 * h + t * t * (b2 * jet.biharmonic + b3 * h.powi(3) + b4 * h * jet.gauss_curvature))
        }
        Expansion::Planar { .. } => None,
    }
}

/// One sample of the three-dimensional obstruction check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObstructionSample {
    pub scales: Vec<f64>,
    pub coeffs: Vec<f64>,
    /// `6B₂ − B₄`
    pub gap: f64,
    /// `θ²(1)/θ²(-1) = B₁²`
    pub b1_squared: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObstructionReport {
    pub checked: usize,
    pub rejected: usize,
    pub max_rel_error: f64,
    pub first_failure: Option<ObstructionSample>,
    pub anchors: Vec<ObstructionSample>,
}

impl ObstructionReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

pub const OBSTRUCTION_REL_TOL: f64 = 1e-8;
const MIN_SAMPLE_THETA_M1: f64 = 0.1;

fn obstruction_sample(spec: &KernelSpec) -> Result<ObstructionSample> {
    let report = scheme_expansion_3d(spec)?;
    let Expansion::Spatial { b1, b2, b4, .. } = report.expansion else { unreachable!() };
    let gap = 6.0 * b2 - b4;
    let b1_squared = b1 * b1;
    let rel_error = (gap - b1_squared).abs() / b1_squared.abs().max(1.0);
    Ok(ObstructionSample {
        scales: spec.scales().to_vec(),
        coeffs: spec.coeffs().to_vec(),
        gap,
        b1_squared,
        rel_error,
    })
}

/// Checks `6B₂ − B₄ = B₁²` for the Gaussian, the second-order kernel and
/// `n_random` seeded random kernels (`N ≤ 5`, scales in `[0.1, 10]`,
/// coefficients in `[-2, 2]`, draws with `|θ(-1)| < 0.1` rejected). Matching
/// the exact 3D expansion needs `6B₂ = B₄`, which forces `B₁ = 0`.
pub fn obstruction_check_3d(n_random: usize, seed: u64) -> Result<ObstructionReport> {
    if n_random == 0 {
        return Err(Error::InvalidArgument("n_random must be at least 1".into()));
    }
    let anchors = vec![
        obstruction_sample(&KernelSpec::gaussian())?,
        obstruction_sample(&KernelSpec::second_order())?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ObstructionReport {
        checked: 0,
        rejected: 0,
        max_rel_error: anchors.iter().map(|a| a.rel_error).fold(0.0, f64::max),
        first_failure: anchors.iter().find(|a| a.rel_error > OBSTRUCTION_REL_TOL).cloned(),
        anchors,
    };
    while report.checked < n_random {
        let n = rng.gen_range(1..=5);
        let scales: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..=10.0)).collect();
        let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..=2.0)).collect();
        let spec = match KernelSpec::new(scales, coeffs) {
            Ok(s) if s.theta(-1).abs() >= MIN_SAMPLE_THETA_M1 => s,
            _ => {
                report.rejected += 1;
                log::debug!("rejected near-degenerate random kernel #{}", report.rejected);
                continue;
            }
        };
        let sample = obstruction_sample(&spec)?;
        report.max_rel_error = report.max_rel_error.max(sample.rel_error);
        if sample.rel_error > OBSTRUCTION_REL_TOL && report.first_failure.is_none() {
            report.first_failure = Some(sample);
        }
        report.checked += 1;
    }
    Ok(report)
}
