//! The convolution/threshold iteration on three interface representations.
//!
//! One step with kernel time `t` convolves the indicator of the current set
//! with `K_t` and keeps the points where the result is at least `λ`. For the
//! kernels in this crate a step advances curvature flow by the effective time
//! `τ = step_ratio · t`.

mod graph;
mod grid;
mod radial;

pub use graph::{graph_convolution, graph_evolve, graph_step, GraphConvolver, GraphInterface};
pub use grid::{grid_evolve, grid_step, GridConvolver, GridField};
pub use radial::{disk_convolution, radial_step};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

/// Kernel and kernel time for one threshold step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepParams {
    t: f64,
    spec: KernelSpec,
}

impl StepParams {
    pub fn new(t: f64, spec: KernelSpec) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!("kernel time must be positive, got {t}")));
        }
        Ok(Self { t, spec })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    /// Curvature-flow time advanced by one step.
    pub fn effective_step(&self) -> f64 {
        self.spec.step_ratio() * self.t
    }
}

/// How the total time `T` of an evolution is split into kernel time steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeMapping {
    /// `t = (T/n)/step_ratio`, so the flow advances by `T` overall.
    Effective,
    /// `t = T/n`, so the flow advances by `step_ratio · T`.
    Raw,
}

impl TimeMapping {
    pub fn kernel_time(self, spec: &KernelSpec, total: f64, n_steps: usize) -> f64 {
        let dt = total / n_steps as f64;
        match self {
            TimeMapping::Effective => dt / spec.step_ratio(),
            TimeMapping::Raw => dt,
        }
    }

    /// Curvature-flow time covered by steps whose kernel times add up to
    /// `total` under this mapping.
    pub fn flow_time(self, spec: &KernelSpec, total: f64) -> f64 {
        match self {
            TimeMapping::Effective => total,
            TimeMapping::Raw => spec.step_ratio() * total,
        }
    }
}

pub(crate) fn check_evolve_args(total: f64, n_steps: usize) -> Result<()> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::InvalidArgument(format!("final time must be positive, got {total}")));
    }
    Ok(())
}
