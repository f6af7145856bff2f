//! Convolution kernels `K = Σ_j c_j G_{α_j}` built from heat kernels.
//!
//! `G(x) = (4π)^{-d/2} exp(-|x|²/4)` is the heat kernel at unit time and
//! `G_α(x) = α^{-d/2} G(x/√α)` the one at time `α`. A kernel is determined by
//! its scales `α_j > 0` and coefficients `c_j`. Everything the threshold
//! scheme needs to know about it in the small-time limit is carried by the
//! moments `θ(p) = Σ_j α_j^{p/2} c_j`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots;

/// Relative size below which `θ(-1)` counts as zero when building a spec.
const DEGENERATE_REL: f64 = 1e-14;

/// Immutable kernel description with its derived threshold and step ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelSpec {
    scales: Vec<f64>,
    coeffs: Vec<f64>,
    threshold: f64,
    step_ratio: f64,
}

/// Spatial dimension for [`KernelSpec::eval_radial`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    One,
    Two,
}

impl Dimension {
    fn half_power(self) -> f64 {
        match self {
            Dimension::One => 0.5,
            Dimension::Two => 1.0,
        }
    }
}

impl KernelSpec {
    pub fn new(scales: Vec<f64>, coeffs: Vec<f64>) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::InvalidKernel("no components".into()));
        }
        if scales.len() != coeffs.len() {
            return Err(Error::InvalidKernel(format!(
                "{} scales but {} coefficients",
                scales.len(),
                coeffs.len()
            )));
        }
        for (i, &a) in scales.iter().enumerate() {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidKernel(format!("scale {i} is not positive: {a}")));
            }
            if scales[..i].contains(&a) {
                return Err(Error::InvalidKernel(format!("scale {a} repeated")));
            }
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidKernel("non-finite coefficient".into()));
        }
        let theta_m1 = theta_of(&scales, &coeffs, -1);
        let size: f64 = scales.iter().zip(&coeffs).map(|(a, c)| (c / a.sqrt()).abs()).sum();
        if theta_m1.abs() <= DEGENERATE_REL * size {
            return Err(Error::DegenerateKernel { value: theta_m1, tolerance: DEGENERATE_REL * size });
        }
        let threshold = 0.5 * coeffs.iter().sum::<f64>();
        let step_ratio = theta_of(&scales, &coeffs, 1) / theta_m1;
        Ok(Self { scales, coeffs, threshold, step_ratio })
    }

    /// The plain heat kernel, i.e. the classical MBO scheme.
    pub fn gaussian() -> Self {
        Self::new(vec![1.0], vec![1.0]).expect("unit gaussian is valid")
    }

    /// The positive second-order kernel `G + c₁ G₄ + c₂ G_{1/4}`.
    pub fn second_order() -> Self {
        solve_special_kernel(1e-14).expect("fixed cubic has a root in (1/5, 1/4)")
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    /// Thresholding level λ, half the total mass.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// `τ/t = θ(1)/θ(-1)`: curvature-flow time advanced per unit kernel time.
    pub fn step_ratio(&self) -> f64 {
        self.step_ratio
    }

    pub fn mass(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    pub fn theta(&self, p: i32) -> f64 {
        theta_of(&self.scales, &self.coeffs, p)
    }

    /// `K(x)` at `|x| = r`.
    pub fn eval_radial(&self, r: f64, dim: Dimension) -> f64 {
        let r2 = r * r;
        self.components()
            .map(|(a, c)| c * (4.0 * PI * a).powf(-dim.half_power()) * (-r2 / (4.0 * a)).exp())
            .sum()
    }

    /// `K_t(x) = t^{-d/2} K(x/√t)` at `|x| = r`.
    pub fn eval_radial_at_time(&self, r: f64, t: f64, dim: Dimension) -> f64 {
        t.powf(-dim.half_power()) * self.eval_radial(r / t.sqrt(), dim)
    }

    /// Fourier multiplier of `K_t`, `Σ_j c_j exp(-α_j t |k|²)`.
    ///
    /// Each unit-mass heat kernel `G_{αt}` transforms to `exp(-α t |k|²)`, so
    /// the value at `k = 0` is the total mass `2λ`.
    pub fn fourier_multiplier(&self, k_norm: f64, t: f64) -> f64 {
        let k2 = k_norm * k_norm;
        self.components().map(|(a, c)| c * (-a * t * k2).exp()).sum()
    }

    pub fn components(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.scales.iter().copied().zip(self.coeffs.iter().copied())
    }

    /// Plain-text record: one `component α c` line per Gaussian followed by
    /// the derived `threshold` and `step_ratio`, all with 17 significant digits.
    pub fn to_record(&self) -> String {
        let mut s = String::from("# kernel-spec v1\n");
        for (a, c) in self.components() {
            let _ = writeln!(s, "component {a:.16e} {c:.16e}");
        }
        let _ = writeln!(s, "threshold {:.16e}", self.threshold);
        let _ = writeln!(s, "step_ratio {:.16e}", self.step_ratio);
        s
    }

    /// Parses [`to_record`](Self::to_record) output. Derived lines are
    /// optional, but when present they must agree with the components.
    /// Diagnostic `positivity_*` and `fourier_*` lines from a kernel report
    /// are skipped.
    pub fn from_record(text: &str) -> Result<Self> {
        let mut scales = Vec::new();
        let mut coeffs = Vec::new();
        let mut threshold = None;
        let mut step_ratio = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let ctx = || format!("kernel record line {}", lineno + 1);
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or_default();
            if key.starts_with("positivity_") || key.starts_with("fourier_") {
                continue;
            }
            let values: Vec<f64> = parts
                .map(|v| v.parse::<f64>().map_err(|e| Error::parse(ctx(), format!("{v:?}: {e}"))))
                .collect::<Result<_>>()?;
            match (key, values.as_slice()) {
                ("component", [a, c]) => {
                    scales.push(*a);
                    coeffs.push(*c);
                }
                ("threshold", [v]) => threshold = Some(*v),
                ("step_ratio", [v]) => step_ratio = Some(*v),
                _ => return Err(Error::parse(ctx(), format!("unrecognised line {line:?}"))),
            }
        }
        let spec = Self::new(scales, coeffs)?;
        let agree = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
        if let Some(l) = threshold {
            if !agree(l, spec.threshold) {
                return Err(Error::InvalidKernel(format!(
                    "recorded threshold {l} disagrees with components ({})",
                    spec.threshold
                )));
            }
        }
        if let Some(r) = step_ratio {
            if !agree(r, spec.step_ratio) {
                return Err(Error::InvalidKernel(format!(
                    "recorded step_ratio {r} disagrees with components ({})",
                    spec.step_ratio
                )));
            }
        }
        Ok(spec)
    }
}

fn theta_of(scales: &[f64], coeffs: &[f64], p: i32) -> f64 {
    let half = p as f64 / 2.0;
    scales.iter().zip(coeffs).map(|(a, c)| a.powf(half) * c).sum()
}

/// The cubic `1000x³ − 2175x² + 210x + 64` whose root in `(1/5, 1/4)` fixes
/// the coefficient of `G₄` in the second-order kernel.
pub struct SpecialCubic;

impl SpecialCubic {
    const COEFFS: [i128; 4] = [1000, -2175, 210, 64];

    pub fn eval(x: f64) -> f64 {
        ((1000.0 * x - 2175.0) * x + 210.0) * x + 64.0
    }

    pub fn derivative(x: f64) -> f64 {
        (3000.0 * x - 4350.0) * x + 210.0
    }

    /// Exact value at `num/den` as a reduced fraction `(numerator, denominator)`.
    pub fn eval_rational(num: i64, den: i64) -> (i128, i128) {
        assert!(den != 0);
        let (n, d) = (num as i128, den as i128);
        let [a3, a2, a1, a0] = Self::COEFFS;
        let mut top = a3 * n * n * n + a2 * n * n * d + a1 * n * d * d + a0 * d * d * d;
        let mut bottom = d * d * d;
        if bottom < 0 {
            top = -top;
            bottom = -bottom;
        }
        let g = gcd(top.unsigned_abs(), bottom.unsigned_abs()) as i128;
        (top / g, bottom / g)
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Coefficient of `G_{1/4}` forced by the first matching condition given
/// the coefficient `c1` of `G₄`.
pub fn quarter_coefficient(c1: f64) -> f64 {
    -8.0 * c1 / (25.0 * c1 + 2.0)
}

/// Builds `G + c₁ G₄ + c₂ G_{1/4}` with `c₁` the root of [`SpecialCubic`] in
/// `(1/5, 1/4)`, located by bisection to width `tolerance` and polished with
/// one Newton step.
pub fn solve_special_kernel(tolerance: f64) -> Result<KernelSpec> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tolerance}")));
    }
    let c1 = roots::bisect(SpecialCubic::eval, 0.2, 0.25, tolerance)?;
    let polished = c1 - SpecialCubic::eval(c1) / SpecialCubic::derivative(c1);
    let c1 = if (polished - c1).abs() <= tolerance { polished } else { c1 };
    let c2 = quarter_coefficient(c1);
    KernelSpec::new(vec![1.0, 4.0, 0.25], vec![1.0, c1, c2])
}

/// Result of minimising the reduced polynomial `q(ξ)` over `ξ ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityCertificate {
    pub min_value: f64,
    pub argmin_xi: f64,
    pub is_positive: bool,
    /// Whether `q(ξ) ≥ ξ³(c₀/4 + c₂) + c₁/16 ≥ 0` holds termwise
    /// (`c₂ ≤ 0`, `c₀/4 + c₂ ≥ 0`, `c₁ ≥ 0`).
    pub lower_bound_holds: bool,
}

pub const POSITIVITY_TOL: f64 = 1e-12;
const POSITIVITY_SAMPLES: usize = 100_000;

/// Reduced form of a kernel with scales `{1, 4, 1/4}`.
///
/// With `ξ = exp(-r²/16)` the 2D kernel is `K = ξ q(ξ)/π` where
/// `q(ξ) = c_{1/4} ξ¹⁵ + (c_1/4) ξ³ + c_4/16`.
#[derive(Debug, Clone, Copy)]
pub struct ReducedPolynomial {
    unit: f64,
    wide: f64,
    narrow: f64,
}

impl ReducedPolynomial {
    pub fn from_spec(spec: &KernelSpec) -> Result<Self> {
        let mut slots = [None; 3];
        for (a, c) in spec.components() {
            let idx = if a == 1.0 {
                0
            } else if a == 4.0 {
                1
            } else if a == 0.25 {
                2
            } else {
                return Err(Error::InvalidKernel(format!(
                    "positivity reduction needs scales {{1, 4, 1/4}}, found {a}"
                )));
            };
            slots[idx] = Some(c);
        }
        match slots {
            [Some(unit), Some(wide), Some(narrow)] => Ok(Self { unit, wide, narrow }),
            _ => Err(Error::InvalidKernel("positivity reduction needs scales {1, 4, 1/4}".into())),
        }
    }

    pub fn eval(&self, xi: f64) -> f64 {
        let xi3 = xi * xi * xi;
        let xi12 = (xi3 * xi3) * (xi3 * xi3);
        self.narrow * xi12 * xi3 + 0.25 * self.unit * xi3 + self.wide / 16.0
    }
}

pub fn positivity_certificate(spec: &KernelSpec) -> Result<PositivityCertificate> {
    let q = ReducedPolynomial::from_spec(spec)?;
    let n = POSITIVITY_SAMPLES;
    let (mut best_i, mut best) = (0, f64::INFINITY);
    for i in 0..=n {
        let v = q.eval(i as f64 / n as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let lo = best_i.saturating_sub(1) as f64 / n as f64;
    let hi = (best_i + 1).min(n) as f64 / n as f64;
    let (xi, refined) = golden_section_min(|x| q.eval(x), lo, hi, POSITIVITY_TOL);
    let (argmin_xi, min_value) = if refined < best { (xi, refined) } else { (best_i as f64 / n as f64, best) };
    let lower_bound_holds = q.narrow <= 0.0 && 0.25 * q.unit + q.narrow >= 0.0 && q.wide >= 0.0;
    Ok(PositivityCertificate {
        min_value,
        argmin_xi,
        is_positive: min_value >= -POSITIVITY_TOL,
        lower_bound_holds,
    })
}

fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let candidates = [(a, f(a)), (b, f(b)), (c, fc), (d, fd)];
    candidates.into_iter().fold((a, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc })
}

/// A point where the kernel's Fourier multiplier is most negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourierProbe {
    pub k_norm: f64,
    pub t: f64,
    pub value: f64,
}

/// Scans `u = t|k|²` over `(0, 100]` at `t = 1` and reports the minimum of the
/// multiplier. The multiplier depends on `(k, t)` only through `u`.
pub fn fourier_sign_probe(spec: &KernelSpec) -> FourierProbe {
    let t = 1.0;
    let mut best = FourierProbe { k_norm: 0.0, t, value: spec.fourier_multiplier(0.0, t) };
    for i in 1..=20_000 {
        let u = 100.0 * i as f64 / 20_000.0;
        let k = u.sqrt();
        let v = spec.fourier_multiplier(k, t);
        if v < best.value {
            best = FourierProbe { k_norm: k, t, value: v };
        }
    }
    best
}
