//! Threshold steps for periodic graphs `Σ = {(x, y) : y ≤ f(x)}`.
//!
//! The vertical part of the convolution is exact:
//!
//! ```text
//! (G_s * 1_Σ)(x, y) = ½ + ½ ∫ g_s(x − x̄) erf((f(x̄) − y) / (2√s)) dx̄
//! ```
//!
//! with `g_s` the one-dimensional heat kernel. The remaining integral over
//! `x̄` uses the periodic trapezoidal rule on the interface nodes, truncated
//! where `g_s` drops below `1e-14` of its peak. Each trapezoid term is the
//! exact integral of the kernel over a vertical ray, so for a positive kernel
//! the discrete convolution keeps the comparison principle.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::roots;

use super::{check_evolve_args, StepParams, TimeMapping};

/// `ln(1e14)`: the Gaussian weight is dropped once it falls below `1e-14` of its peak.
const TRUNCATION_LOG: f64 = 32.236_191_301_916_64;
/// Truncation windows may wrap around the period at most this many times.
const MAX_IMAGES: usize = 16;
/// `erf(6) = 1 − 2e-17`, which rounds to one.
const ERF_SATURATION: f64 = 6.0;
const ROOT_XTOL: f64 = 1e-13;
const MAX_WIDENINGS: usize = 8;

/// Samples of a periodic function on uniform nodes `x_i = i L / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphInterface {
    period: f64,
    samples: Vec<f64>,
}

impl GraphInterface {
    pub fn new(period: f64, samples: Vec<f64>) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
        }
        if samples.len() < 4 {
            return Err(Error::InvalidArgument(format!(
                "a graph needs at least 4 nodes, got {}",
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("sample {i} is not finite")));
        }
        Ok(Self { period, samples })
    }

    pub fn from_fn(period: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = (0..n).map(|i| f(i as f64 * period / n as f64)).collect();
        Self::new(period, samples)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.samples.len() as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn shifted(&self, dy: f64) -> Self {
        Self { period: self.period, samples: self.samples.iter().map(|v| v + dy).collect() }
    }

    /// Cyclic shift by whole nodes: sample `i` of the result is sample `i − k`.
    pub fn rotated(&self, k: usize) -> Self {
        let mut samples = self.samples.clone();
        samples.rotate_right(k % self.samples.len());
        Self { period: self.period, samples }
    }

    /// Largest centred-difference slope.
    pub fn max_slope(&self) -> f64 {
        let n = self.samples.len();
        let h = self.spacing();
        (0..n)
            .map(|i| ((self.samples[(i + 1) % n] - self.samples[(i + n - 1) % n]) / (2.0 * h)).abs())
            .fold(0.0, f64::max)
    }

    /// Second centred difference at node `i`.
    pub fn second_difference(&self, i: usize) -> f64 {
        let n = self.samples.len();
        let h = self.spacing();
        (self.samples[(i + 1) % n] - 2.0 * self.samples[i] + self.samples[(i + n - 1) % n]) / (h * h)
    }
}

#[derive(Debug, Clone)]
struct Component {
    coeff: f64,
    /// `1/(2√s)`
    erf_scale: f64,
    /// half window in nodes
    reach: usize,
    /// trapezoid weights `h g_s(k h)` for `k = −reach..=reach`
    weights: Vec<f64>,
    var4: f64,
    norm: f64,
}

/// Evaluates `ψ = K_t * 1_Σ` for a fixed graph and kernel time.
#[derive(Debug, Clone)]
pub struct GraphConvolver<'a> {
    graph: &'a GraphInterface,
    threshold: f64,
    spacing: f64,
    components: Vec<Component>,
    /// samples padded by `pad` nodes on each side with their periodic images
    padded: Vec<f64>,
    pad: usize,
}

impl<'a> GraphConvolver<'a> {
    pub fn new(graph: &'a GraphInterface, params: &StepParams) -> Result<Self> {
        let spec: &KernelSpec = params.spec();
        let n = graph.len();
        let h = graph.spacing();
        let min_scale = spec.scales().iter().fold(f64::INFINITY, |m, a| m.min(*a));
        let mut components = Vec::with_capacity(spec.len());
        for (a, c) in spec.components() {
            let s = a * params.t();
            let half_width = (4.0 * s * TRUNCATION_LOG).sqrt();
            let reach = (half_width / h).ceil() as usize;
            if 2 * reach + 1 > MAX_IMAGES * n {
                return Err(Error::Quadrature(format!(
                    "truncation window {:.3e} spans more than {MAX_IMAGES} periods",
                    2.0 * half_width
                )));
            }
            let norm = h / (4.0 * PI * s).sqrt();
            let var4 = 4.0 * s;
            let weights = (-(reach as isize)..=reach as isize)
                .map(|k| {
                    let d = k as f64 * h;
                    norm * (-d * d / var4).exp()
                })
                .collect();
            components.push(Component { coeff: c, erf_scale: 0.5 / s.sqrt(), reach, weights, var4, norm });
        }
        let min_s = min_scale * params.t();
        let slope = graph.max_slope();
        if h > min_s.sqrt() * 1.15 / (1.0 + slope * slope).sqrt() {
            log::warn!(
                "graph spacing {h:.3e} under-resolves the narrowest kernel width {:.3e} (slope {slope:.2})",
                min_s.sqrt()
            );
        }
        let pad = components.iter().map(|c| c.reach).max().unwrap_or(0);
        let padded = (0..n + 2 * pad)
            .map(|k| graph.samples[(k as isize - pad as isize).rem_euclid(n as isize) as usize])
            .collect();
        Ok(Self { graph, threshold: spec.threshold(), spacing: h, components, padded, pad })
    }

    /// `ψ` and `∂ψ/∂y` at node `i` and height `y`.
    pub fn eval_node(&self, i: usize, y: f64) -> (f64, f64) {
        let mut psi = 0.0;
        let mut dpsi = 0.0;
        for comp in &self.components {
            let start = i + self.pad - comp.reach;
            let window = &self.padded[start..start + comp.weights.len()];
            let (sum, dsum) = erf_sums(window, &comp.weights, y, comp.erf_scale);
            psi += comp.coeff * 0.5 * (1.0 + sum);
            dpsi -= comp.coeff * comp.erf_scale / PI.sqrt() * dsum;
        }
        (psi, dpsi)
    }

    /// `ψ(x, y)` at an arbitrary abscissa.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let n = self.graph.len() as isize;
        let h = self.spacing;
        let mut psi = 0.0;
        for comp in &self.components {
            let lo = ((x / h).ceil() as isize) - comp.reach as isize - 1;
            let hi = ((x / h).floor() as isize) + comp.reach as isize + 1;
            let mut sum = 0.0;
            for m in lo..=hi {
                let d = x - m as f64 * h;
                let w = comp.norm * (-d * d / comp.var4).exp();
                let f = self.graph.samples[m.rem_euclid(n) as usize];
                sum += w * saturated_erf((f - y) * comp.erf_scale);
            }
            psi += comp.coeff * 0.5 * (1.0 + sum);
        }
        psi
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Height at node `i` where `ψ` crosses the threshold; `scale` sets the
    /// initial search step if Newton's method cannot start.
    pub fn solve_node(&self, i: usize, scale: f64) -> Result<f64> {
        let lambda = self.threshold;
        let fdf = |y: f64| {
            let (p, d) = self.eval_node(i, y);
            (p - lambda, d)
        };
        roots::decreasing_root(fdf, self.graph.samples[i], scale, ROOT_XTOL, MAX_WIDENINGS)
            .map_err(|e| Error::NodeBracket { node: i, x: self.graph.x(i), reason: e.to_string() })
    }
}

#[inline]
fn saturated_erf(z: f64) -> f64 {
    if z >= ERF_SATURATION {
        1.0
    } else if z <= -ERF_SATURATION {
        -1.0
    } else {
        libm::erf(z)
    }
}

/// `Σ w_k erf(z_k)` and `Σ w_k exp(−z_k²)` with `z_k = (f_k − y)·scale`.
#[inline]
fn erf_sums(values: &[f64], weights: &[f64], y: f64, scale: f64) -> (f64, f64) {
    let mut sum = 0.0;
    let mut dsum = 0.0;
    for (f, w) in values.iter().zip(weights) {
        let z = (f - y) * scale;
        if z >= ERF_SATURATION {
            sum += w;
        } else if z <= -ERF_SATURATION {
            sum -= w;
        } else {
            sum += w * libm::erf(z);
            dsum += w * (-z * z).exp();
        }
    }
    (sum, dsum)
}

/// `ψ(x, y) = (K_t * 1_Σ)(x, y)` for `Σ` below the graph.
pub fn graph_convolution(f: &GraphInterface, x: f64, y: f64, params: &StepParams) -> Result<f64> {
    Ok(GraphConvolver::new(f, params)?.eval(x, y))
}

/// One threshold step: at every node, the height where `ψ = λ`.
pub fn graph_step(f: &GraphInterface, params: &StepParams) -> Result<GraphInterface> {
    let conv = GraphConvolver::new(f, params)?;
    let scale = params.effective_step().sqrt();
    let samples = (0..f.len()).map(|i| conv.solve_node(i, scale)).collect::<Result<Vec<_>>>()?;
    GraphInterface::new(f.period(), samples)
}

/// `n_steps` threshold steps covering total time `total`.
pub fn graph_evolve(
    f0: &GraphInterface,
    total: f64,
    n_steps: usize,
    spec: &KernelSpec,
    mapping: TimeMapping,
) -> Result<GraphInterface> {
    check_evolve_args(total, n_steps)?;
    let params = StepParams::new(mapping.kernel_time(spec, total, n_steps), spec.clone())?;
    let mut f = f0.clone();
    for step in 0..n_steps {
        f = graph_step(&f, &params).map_err(|e| Error::at_step(step, e))?;
    }
    Ok(f)
}
