//! Threshold steps for sets stored as cell indicators on a periodic grid.
//!
//! The convolution multiplies the discrete Fourier transform of the indicator
//! by the continuum multiplier of `K_t` sampled at the grid wave numbers.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

use super::{check_evolve_args, StepParams, TimeMapping};

/// Binary occupancy of the cells of a uniform periodic grid on
/// `[0, lx) × [0, ly)`. Cell `(i, j)` has centre `((i + ½)lx/nx, (j + ½)ly/ny)`
/// and is stored at index `j * nx + i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridField {
    nx: usize,
    ny: usize,
    lx: Extent,
    ly: Extent,
    cells: Vec<bool>,
}

/// Positive finite domain length, compared bitwise.
#[derive(Debug, Clone, Copy)]
struct Extent(f64);

impl PartialEq for Extent {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for Extent {}

impl GridField {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64, cells: Vec<bool>) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidArgument(format!("grid must be non-empty, got {nx}x{ny}")));
        }
        if !(lx > 0.0 && lx.is_finite() && ly > 0.0 && ly.is_finite()) {
            return Err(Error::InvalidArgument(format!("domain extents must be positive, got {lx}x{ly}")));
        }
        if cells.len() != nx * ny {
            return Err(Error::InvalidArgument(format!(
                "{} cells do not fill a {nx}x{ny} grid",
                cells.len()
            )));
        }
        Ok(Self { nx, ny, lx: Extent(lx), ly: Extent(ly), cells })
    }

    pub fn from_fn(nx: usize, ny: usize, lx: f64, ly: f64, inside: impl Fn(f64, f64) -> bool) -> Result<Self> {
        let (hx, hy) = (lx / nx as f64, ly / ny as f64);
        let cells = (0..ny)
            .flat_map(|j| (0..nx).map(move |i| (i, j)))
            .map(|(i, j)| inside((i as f64 + 0.5) * hx, (j as f64 + 0.5) * hy))
            .collect();
        Self::new(nx, ny, lx, ly, cells)
    }

    pub fn empty(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        Self::new(nx, ny, lx, ly, vec![false; nx * ny])
    }

    pub fn full(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        Self::new(nx, ny, lx, ly, vec![true; nx * ny])
    }

    /// Cells whose centres lie in the closed disk (no periodic wrap).
    pub fn disk(nx: usize, ny: usize, lx: f64, ly: f64, centre: (f64, f64), radius: f64) -> Result<Self> {
        Self::from_fn(nx, ny, lx, ly, |x, y| {
            let (dx, dy) = (x - centre.0, y - centre.1);
            dx * dx + dy * dy <= radius * radius
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx.0
    }

    pub fn ly(&self) -> f64 {
        self.ly.0
    }

    pub fn cell_width(&self) -> (f64, f64) {
        (self.lx.0 / self.nx as f64, self.ly.0 / self.ny as f64)
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[j * self.nx + i]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.cells[j * self.nx + i] = value;
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|c| **c).count()
    }

    pub fn area(&self) -> f64 {
        let (hx, hy) = self.cell_width();
        self.count() as f64 * hx * hy
    }

    /// Radius of the disk with the same area.
    pub fn equivalent_radius(&self) -> f64 {
        (self.area() / PI).sqrt()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.lx == other.lx && self.ly == other.ly
    }

    /// Cellwise inclusion `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.same_shape(other) && self.cells.iter().zip(&other.cells).all(|(a, b)| !*a || *b)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a && b)
    }

    fn combine(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(Error::InvalidArgument("grid shapes differ".into()));
        }
        let cells = self.cells.iter().zip(&other.cells).map(|(a, b)| op(*a, *b)).collect();
        Ok(Self { cells, ..self.clone() })
    }

    /// Periodic translation by whole cells: cell `(i, j)` moves to `(i + di, j + dj)`.
    pub fn shifted(&self, di: usize, dj: usize) -> Self {
        let (nx, ny) = (self.nx, self.ny);
        let mut cells = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                cells[((j + dj) % ny) * nx + (i + di) % nx] = self.cells[j * nx + i];
            }
        }
        Self { cells, ..self.clone() }
    }
}

/// Spectral convolution with `K_t` followed by thresholding, for one grid shape.
pub struct GridConvolver {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    threshold: f64,
    /// multiplier in transposed (column-major) layout, index `i * ny + j`
    multiplier: Vec<f64>,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    resolved: bool,
}

fn wave_number(index: usize, n: usize, length: f64) -> f64 {
    let m = if index <= n / 2 { index as f64 } else { index as f64 - n as f64 };
    2.0 * PI * m / length
}

impl GridConvolver {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64, params: &StepParams) -> Self {
        let spec: &KernelSpec = params.spec();
        let t = params.t();
        let mut multiplier = vec![0.0; nx * ny];
        for i in 0..nx {
            let kx = wave_number(i, nx, lx);
            for j in 0..ny {
                let ky = wave_number(j, ny, ly);
                multiplier[i * ny + j] = spec.fourier_multiplier((kx * kx + ky * ky).sqrt(), t);
            }
        }
        let mut planner = FftPlanner::new();
        let h = (lx / nx as f64).max(ly / ny as f64);
        let resolved = t.sqrt() >= 2.0 * h;
        if !resolved {
            log::warn!("sqrt(t) = {:.3e} is below two cell widths ({h:.3e})", t.sqrt());
        }
        Self {
            nx,
            ny,
            lx,
            ly,
            threshold: spec.threshold(),
            multiplier,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
            resolved,
        }
    }

    pub fn for_field(field: &GridField, params: &StepParams) -> Self {
        Self::new(field.nx, field.ny, field.lx(), field.ly(), params)
    }

    /// Whether `√t` spans at least two cells.
    pub fn is_resolved(&self) -> bool {
        self.resolved
    }

    fn check_shape(&self, field: &GridField) -> Result<()> {
        if field.nx != self.nx || field.ny != self.ny || field.lx() != self.lx || field.ly() != self.ly {
            return Err(Error::InvalidArgument("field does not match the convolver's grid".into()));
        }
        Ok(())
    }

    /// `ψ = K_t * 1_Σ` at the cell centres, row-major.
    pub fn convolve(&self, field: &GridField) -> Result<Vec<f64>> {
        self.check_shape(field)?;
        let (nx, ny) = (self.nx, self.ny);
        let mut rows: Vec<Complex64> =
            field.cells.iter().map(|&c| Complex64::new(if c { 1.0 } else { 0.0 }, 0.0)).collect();
        self.fwd_x.process(&mut rows);
        let mut cols = transpose(&rows, nx, ny);
        self.fwd_y.process(&mut cols);
        for (v, m) in cols.iter_mut().zip(&self.multiplier) {
            *v *= *m;
        }
        self.inv_y.process(&mut cols);
        let mut rows = transpose(&cols, ny, nx);
        self.inv_x.process(&mut rows);
        let scale = 1.0 / (nx * ny) as f64;
        Ok(rows.iter().map(|v| v.re * scale).collect())
    }

    pub fn step(&self, field: &GridField) -> Result<GridField> {
        let psi = self.convolve(field)?;
        let cells = psi.iter().map(|&v| v >= self.threshold).collect();
        Ok(GridField { cells, ..field.clone() })
    }
}

/// `src` is `rows × cols` row-major; returns the `cols × rows` transpose.
fn transpose(src: &[Complex64], cols: usize, rows: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = src[r * cols + c];
        }
    }
    out
}

pub fn grid_step(field: &GridField, params: &StepParams) -> Result<GridField> {
    GridConvolver::for_field(field, params).step(field)
}

pub fn grid_evolve(
    field: &GridField,
    total: f64,
    n_steps: usize,
    spec: &KernelSpec,
    mapping: TimeMapping,
) -> Result<GridField> {
    check_evolve_args(total, n_steps)?;
    let params = StepParams::new(mapping.kernel_time(spec, total, n_steps), spec.clone())?;
    let conv = GridConvolver::for_field(field, &params);
    let mut f = field.clone();
    for step in 0..n_steps {
        f = conv.step(&f).map_err(|e| Error::at_step(step, e))?;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(t: f64) -> StepParams {
        StepParams::new(t, KernelSpec::second_order()).unwrap()
    }

    #[test]
    fn empty_and_full_fields_are_fixed() {
        let e = GridField::empty(32, 16, 1.0, 0.5).unwrap();
        let f = GridField::full(32, 16, 1.0, 0.5).unwrap();
        assert_eq!(grid_step(&e, &params(1e-3)).unwrap(), e);
        assert_eq!(grid_step(&f, &params(1e-3)).unwrap(), f);
    }

    #[test]
    fn convolution_preserves_mass() {
        let spec = KernelSpec::second_order();
        let disk = GridField::disk(64, 64, 1.0, 1.0, (0.5, 0.5), 0.3).unwrap();
        let conv = GridConvolver::for_field(&disk, &params(1e-3));
        let psi = conv.convolve(&disk).unwrap();
        let total: f64 = psi.iter().sum();
        assert!((total - spec.mass() * disk.count() as f64).abs() < 1e-9);
    }

    #[test]
    fn shape_validation() {
        assert!(GridField::new(4, 4, 1.0, 1.0, vec![false; 15]).is_err());
        assert!(GridField::new(4, 4, 0.0, 1.0, vec![false; 16]).is_err());
        let a = GridField::empty(8, 8, 1.0, 1.0).unwrap();
        let conv = GridConvolver::new(16, 8, 1.0, 1.0, &params(1e-2));
        assert!(conv.step(&a).is_err());
    }

    #[test]
    fn whole_cell_shift_commutes_with_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let (cx, cy, r) = (rng.gen_range(0.3..0.7), rng.gen_range(0.3..0.7), rng.gen_range(0.1..0.25));
            let f = GridField::disk(64, 64, 1.0, 1.0, (cx, cy), r).unwrap();
            let p = params(5e-4);
            let (di, dj) = (rng.gen_range(0..64), rng.gen_range(0..64));
            let a = grid_step(&f.shifted(di, dj), &p).unwrap();
            let b = grid_step(&f, &p).unwrap().shifted(di, dj);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn aligned_strip_is_stationary() {
        let strip = GridField::from_fn(64, 64, 1.0, 1.0, |_, y| y < 0.5).unwrap();
        let next = grid_step(&strip, &params(2e-3)).unwrap();
        assert_eq!(next, strip);
    }

    #[test]
    fn nested_disks_stay_nested() {
        let spec = KernelSpec::second_order();
        let inner = GridField::disk(128, 128, 4.0, 4.0, (2.0, 2.0), 0.8).unwrap();
        let outer = GridField::disk(128, 128, 4.0, 4.0, (2.0, 2.0), 1.2).unwrap();
        let a = grid_evolve(&inner, 0.05, 10, &spec, TimeMapping::Effective).unwrap();
        let b = grid_evolve(&outer, 0.05, 10, &spec, TimeMapping::Effective).unwrap();
        assert!(a.is_subset_of(&b));
        assert!(a.count() > 0);
    }

    #[test]
    fn single_step_evolution_matches_step() {
        let spec = KernelSpec::second_order();
        let disk = GridField::disk(64, 64, 1.0, 1.0, (0.5, 0.5), 0.3).unwrap();
        let t = 1e-3;
        let p = StepParams::new(t, spec.clone()).unwrap();
        let a = grid_evolve(&disk, t, 1, &spec, TimeMapping::Raw).unwrap();
        assert_eq!(a, grid_step(&disk, &p).unwrap());
    }

    #[test]
    fn resolution_flag() {
        assert!(!GridConvolver::new(16, 16, 1.0, 1.0, &params(1e-4)).is_resolved());
        assert!(GridConvolver::new(256, 256, 1.0, 1.0, &params(1e-3)).is_resolved());
    }
}
