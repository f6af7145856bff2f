//! Reference solutions: the shrinking circle and an explicit finite-difference
//! solver for the graph equation `φ_t = φ_xx / (1 + φ_x²)`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::GraphInterface;

/// Radius at time `t` of a circle of initial radius `r0` under curve shortening.
pub fn circle_exact(r0: f64, t: f64) -> Result<f64> {
    let r2 = r0 * r0 - 2.0 * t;
    if !(r2 > 0.0) {
        return Err(Error::Extinct { r0_sq: r0 * r0, two_t: 2.0 * t });
    }
    Ok(r2.sqrt())
}

/// Explicit scheme parameters. Stable when `dt ≤ ½ dx²`, since the
/// coefficient `1/(1 + φ_x²)` never exceeds one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    pub n_space: usize,
    pub dt: f64,
    pub final_time: f64,
}

pub const FD_MAX_SAFETY: f64 = 0.5;

impl FdConfig {
    /// `dt = safety · dx²` for `n_space` nodes over `period`.
    pub fn with_safety(n_space: usize, period: f64, safety: f64, final_time: f64) -> Self {
        let dx = period / n_space as f64;
        Self { n_space, dt: safety * dx * dx, final_time }
    }

    pub fn validate(&self, period: f64) -> Result<()> {
        if self.n_space < 16 {
            return Err(Error::InvalidArgument(format!("n_space must be at least 16, got {}", self.n_space)));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(Error::InvalidArgument(format!("final time must be positive, got {}", self.final_time)));
        }
        let dx = period / self.n_space as f64;
        if !(self.dt > 0.0) || self.dt > FD_MAX_SAFETY * dx * dx * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "dt = {:e} violates dt <= {FD_MAX_SAFETY} dx^2 = {:e}",
                self.dt,
                FD_MAX_SAFETY * dx * dx
            )));
        }
        Ok(())
    }
}

/// Forward Euler with centred differences on the periodic grid.
///
/// `f0` is resampled to `config.n_space` nodes first; the result lives on
/// that grid. The last step is shortened to land on the final time.
pub fn fd_solve(f0: &GraphInterface, config: &FdConfig) -> Result<GraphInterface> {
    config.validate(f0.period())?;
    let n = config.n_space;
    let start = if f0.len() == n { f0.clone() } else { resample(f0, n)? };
    let dx = f0.period() / n as f64;
    let steps = (config.final_time / config.dt).ceil().max(1.0) as usize;
    let mut u = start.into_samples();
    let mut next = vec![0.0; n];
    for step in 0..steps {
        let dt = if step + 1 == steps { config.final_time - (steps - 1) as f64 * config.dt } else { config.dt };
        euler_update(&u, &mut next, dt, dx);
        std::mem::swap(&mut u, &mut next);
        if (step % 1024 == 0 || step + 1 == steps) && u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Unstable { step });
        }
    }
    GraphInterface::new(f0.period(), u)
}

#[inline]
fn node_update(left: f64, mid: f64, right: f64, a: f64, b: f64) -> f64 {
    let px = (right - left) * b;
    let pxx = right - 2.0 * mid + left;
    mid + a * pxx / (1.0 + px * px)
}

fn euler_update(u: &[f64], out: &mut [f64], dt: f64, dx: f64) {
    let n = u.len();
    let a = dt / (dx * dx);
    let b = 0.5 / dx;
    out[0] = node_update(u[n - 1], u[0], u[1], a, b);
    for (o, w) in out[1..n - 1].iter_mut().zip(u.windows(3)) {
        *o = node_update(w[0], w[1], w[2], a, b);
    }
    out[n - 1] = node_update(u[n - 2], u[n - 1], u[0], a, b);
}

/// Periodic resampling onto `n_target` uniform nodes.
///
/// Subsampling when `n_target` divides the current node count, trigonometric
/// interpolation otherwise (the Nyquist mode of an even grid is split evenly
/// between `±n/2`).
pub fn resample(f: &GraphInterface, n_target: usize) -> Result<GraphInterface> {
    if n_target < 4 {
        return Err(Error::InvalidArgument(format!("n_target must be at least 4, got {n_target}")));
    }
    let n = f.len();
    if n_target == n {
        return Ok(f.clone());
    }
    if n % n_target == 0 {
        let stride = n / n_target;
        let samples = f.samples().iter().step_by(stride).copied().collect();
        return GraphInterface::new(f.period(), samples);
    }
    let mut planner = FftPlanner::new();
    let fwd: Arc<dyn Fft<f64>> = planner.plan_fft_forward(n);
    let inv: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(n_target);
    let mut spec: Vec<Complex64> = f.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut spec);
    let mut out = vec![Complex64::new(0.0, 0.0); n_target];
    let keep = n.min(n_target);
    // modes |m| < keep/2 copy over; the Nyquist mode of the smaller grid is shared
    let half = keep / 2;
    for m in 0..=half {
        let even_nyquist = keep % 2 == 0 && m == half;
        let weight = if even_nyquist { 0.5 } else { 1.0 };
        if m == 0 {
            out[0] = spec[0];
            continue;
        }
        let pos = spec[m];
        let neg = spec[n - m];
        if even_nyquist {
            if n_target > n {
                // split the old Nyquist coefficient between ±m
                out[m] += pos * weight;
                out[n_target - m] += pos * weight;
            } else {
                // ±m of the old grid alias onto the new Nyquist mode
                out[m] += pos + neg;
            }
        } else {
            out[m] = pos;
            out[n_target - m] = neg;
        }
    }
    inv.process(&mut out);
    let scale = 1.0 / n as f64;
    GraphInterface::new(f.period(), out.iter().map(|v| v.re * scale).collect())
}
