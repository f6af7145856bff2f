//! WebAssembly bindings for the static page in `www/`: kernel profiles, a
//! grid evolution and the shrinking-circle local error sweep.
//!
//! The `*_values` functions hold the logic and are plain Rust so they can be
//! tested natively; the exported wrappers only convert errors to strings.

use mbo_core::evolve::{radial_step, GridConvolver, GridField, StepParams};
use mbo_core::kernel::Dimension;
use mbo_core::{benchmark, KernelSpec};
use wasm_bindgen::prelude::*;

fn kernel(name: &str) -> Result<KernelSpec, String> {
    match name {
        "gaussian" => Ok(KernelSpec::gaussian()),
        "second-order" => Ok(KernelSpec::second_order()),
        other => Err(format!("unknown kernel {other:?}")),
    }
}

fn err(e: impl ToString) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// `K(r)` in 2D at `n` radii evenly spaced on `[0, r_max]`.
pub fn kernel_profile_values(name: &str, r_max: f64, n: usize) -> Result<Vec<f64>, String> {
    let spec = kernel(name)?;
    if n < 2 || !(r_max > 0.0) {
        return Err("need n >= 2 and r_max > 0".into());
    }
    Ok((0..n).map(|i| spec.eval_radial(r_max * i as f64 / (n - 1) as f64, Dimension::Two)).collect())
}

/// Fourier multiplier at `t = 1` for `n` wave numbers evenly spaced on `[0, k_max]`.
pub fn fourier_profile_values(name: &str, k_max: f64, n: usize) -> Result<Vec<f64>, String> {
    let spec = kernel(name)?;
    if n < 2 || !(k_max > 0.0) {
        return Err("need n >= 2 and k_max > 0".into());
    }
    Ok((0..n).map(|i| spec.fourier_multiplier(k_max * i as f64 / (n - 1) as f64, 1.0)).collect())
}

/// Pairs `(t, |r1 − r_exact|)` flattened, for `t = 2^{-k} r0²`, `k = 4..=13`.
pub fn circle_lte_values(name: &str, r0: f64) -> Result<Vec<f64>, String> {
    let spec = kernel(name)?;
    let mut out = Vec::new();
    for k in 4..=13 {
        let t = r0 * r0 / (1u64 << k) as f64;
        let params = StepParams::new(t, spec.clone()).map_err(|e| e.to_string())?;
        let r1 = radial_step(r0, &params).map_err(|e| e.to_string())?;
        let exact = benchmark::circle_exact(r0, params.effective_step()).map_err(|e| e.to_string())?;
        out.push(t);
        out.push((r1 - exact).abs());
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn kernel_profile(name: &str, r_max: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    kernel_profile_values(name, r_max, n).map_err(err)
}

#[wasm_bindgen]
pub fn fourier_profile(name: &str, k_max: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    fourier_profile_values(name, k_max, n).map_err(err)
}

#[wasm_bindgen]
pub fn circle_lte(name: &str, r0: f64) -> Result<Vec<f64>, JsValue> {
    circle_lte_values(name, r0).map_err(err)
}

/// A set on the periodic unit square stepped with a fixed kernel time.
#[wasm_bindgen]
pub struct GridDemo {
    field: GridField,
    conv: GridConvolver,
    flow_time: f64,
    effective_step: f64,
}

impl GridDemo {
    /// `shape` is `disk`, `two-disks` or `square`.
    pub fn build(name: &str, shape: &str, n: usize, t: f64) -> Result<GridDemo, String> {
        let spec = kernel(name)?;
        let params = StepParams::new(t, spec).map_err(|e| e.to_string())?;
        let field = match shape {
            "disk" => GridField::disk(n, n, 1.0, 1.0, (0.5, 0.5), 0.3),
            "two-disks" => GridField::disk(n, n, 1.0, 1.0, (0.27, 0.5), 0.2)
                .and_then(|a| a.union(&GridField::disk(n, n, 1.0, 1.0, (0.73, 0.5), 0.2)?)),
            "square" => GridField::from_fn(n, n, 1.0, 1.0, |x, y| (x - 0.5).abs() < 0.3 && (y - 0.5).abs() < 0.3),
            other => return Err(format!("unknown shape {other:?}")),
        }
        .map_err(|e| e.to_string())?;
        let conv = GridConvolver::for_field(&field, &params);
        Ok(GridDemo { field, conv, flow_time: 0.0, effective_step: params.effective_step() })
    }

    pub fn advance(&mut self, steps: usize) -> Result<(), String> {
        for _ in 0..steps {
            self.field = self.conv.step(&self.field).map_err(|e| e.to_string())?;
            self.flow_time += self.effective_step;
        }
        Ok(())
    }

    pub fn field(&self) -> &GridField {
        &self.field
    }
}

#[wasm_bindgen]
impl GridDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(name: &str, shape: &str, n: usize, t: f64) -> Result<GridDemo, JsValue> {
        Self::build(name, shape, n, t).map_err(err)
    }

    pub fn step(&mut self, steps: usize) -> Result<(), JsValue> {
        self.advance(steps).map_err(err)
    }

    /// Row-major cell occupancy (1 inside), row 0 at the bottom of the domain.
    pub fn cells(&self) -> Vec<u8> {
        self.field.cells().iter().map(|&c| c as u8).collect()
    }

    pub fn area(&self) -> f64 {
        self.field.area()
    }

    pub fn time(&self) -> f64 {
        self.flow_time
    }

    pub fn resolved(&self) -> bool {
        self.conv.is_resolved()
    }
}
