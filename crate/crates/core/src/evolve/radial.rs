//! Threshold steps for a disk.
//!
//! The convolution of a radial Gaussian with a disk is written as a contour
//! integral over the circle: for `f` radial about `p` with
//! `F(ρ) = ∫₀^ρ f(σ)σ dσ`, the field `(x − p) F(|x − p|)/|x − p|²` has
//! divergence `f(|x − p|)`. For the heat kernel `G_s` this gives
//!
//! ```text
//! (G_s * 1_disk)(p) = (1/2π) ∮ (1 − e^{−ρ²/4s}) (x − p)·n / ρ² ds,   ρ = |x − p|,
//! ```
//!
//! whose integrand is an entire periodic function of the boundary angle, so
//! the trapezoidal rule converges geometrically.

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::roots;

use super::StepParams;

/// Disk must satisfy `r0² > 2τ(1 + EXTINCTION_MARGIN)` to be stepped.
const EXTINCTION_MARGIN: f64 = 0.1;
const MAX_WIDENINGS: usize = 8;

/// `(1 − e^{−u})/u`, continuous at zero.
fn one_minus_exp_over(u: f64) -> f64 {
    if u < 1e-300 {
        1.0
    } else {
        -(-u).exp_m1() / u
    }
}

/// `(G_s * 1_{disk(R)})` evaluated at distance `r` from the centre.
pub(crate) fn disk_heat(radius: f64, r: f64, s: f64) -> f64 {
    if r == 0.0 {
        return -(-radius * radius / (4.0 * s)).exp_m1();
    }
    let width = (radius * r / s).sqrt();
    let n_full = (8.0 * width).ceil() as usize + 32;
    let m = n_full.div_ceil(2);
    let inv4s = 1.0 / (4.0 * s);
    let dr = radius - r;
    let integrand = |beta: f64| {
        let half = (0.5 * beta).sin();
        let rho2 = dr * dr + 4.0 * radius * r * half * half;
        radius * (radius - r * beta.cos()) * one_minus_exp_over(rho2 * inv4s) * inv4s
    };
    let mut sum = 0.5 * (integrand(0.0) + integrand(std::f64::consts::PI));
    for k in 1..m {
        sum += integrand(std::f64::consts::PI * k as f64 / m as f64);
    }
    sum / m as f64
}

/// `(K_t * 1_{disk(radius)})` at distance `r` from the centre.
pub fn disk_convolution(spec: &KernelSpec, t: f64, radius: f64, r: f64) -> f64 {
    spec.components().map(|(a, c)| c * disk_heat(radius, r, a * t)).sum()
}

/// Radius of the disk produced by one threshold step from a disk of radius `r0`.
pub fn radial_step(r0: f64, params: &StepParams) -> Result<f64> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r0}")));
    }
    let tau = params.effective_step();
    let two_tau = 2.0 * tau;
    if r0 * r0 <= two_tau * (1.0 + EXTINCTION_MARGIN) {
        return Err(Error::Extinct { r0_sq: r0 * r0, two_t: two_tau });
    }
    let spec = params.spec();
    let t = params.t();
    let lambda = spec.threshold();
    let g = |r: f64| disk_convolution(spec, t, r0, r) - lambda;

    let guess = (r0 * r0 - two_tau).sqrt();
    let mut delta = 0.5 * tau.sqrt();
    for _ in 0..=MAX_WIDENINGS {
        let lo = (guess - delta).max(0.0);
        let hi = guess + delta;
        let (g_lo, g_hi) = (g(lo), g(hi));
        if g_lo > 0.0 && g_hi < 0.0 {
            return roots::brent(g, lo, hi, 1e-15);
        }
        delta *= 2.0;
    }
    let lo = (guess - delta).max(0.0);
    let hi = guess + delta;
    Err(Error::NoBracket { lo, hi, f_lo: g(lo), f_hi: g(hi) })
}
