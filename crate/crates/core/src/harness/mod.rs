//! Experiment drivers: kernel reports, consistency checks, the circle
//! local-error sweep, graph convergence against a finite-difference
//! reference, and grid runs. Every driver is a pure function of its
//! [`ExperimentConfig`]; tables are assembled in configuration order.

mod config;
mod table;

pub use config::{ExperimentConfig, ExperimentKind, InitialCondition, KernelChoice, OutputFormat, SCHEMA_VERSION};
pub use table::{emit, l2_error, log_log_slope, observed_order, ErrorRow, ErrorTable, Norm};

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::benchmark::{circle_exact, fd_solve, resample, FdConfig};
use crate::consistency::{
    obstruction_check_3d, scheme_expansion_2d, scheme_expansion_3d, ExpansionReport, GraphJet2D,
    ObstructionReport,
};
use crate::error::{Error, Result};
use crate::evolve::{graph_evolve, grid_evolve, radial_step, GraphInterface, GridField, StepParams, TimeMapping};
use crate::io;
use crate::kernel::{fourier_sign_probe, positivity_certificate, FourierProbe, KernelSpec, PositivityCertificate};

/// Everything `solve-kernel` prints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelReport {
    pub kernel: KernelSpec,
    /// present for kernels with scales `{1, 4, 1/4}`
    pub positivity: Option<PositivityCertificate>,
    pub fourier_probe: FourierProbe,
}

impl KernelReport {
    pub fn new(spec: &KernelSpec) -> Result<Self> {
        let positivity = match positivity_certificate(spec) {
            Ok(c) => Some(c),
            Err(Error::InvalidKernel(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Self { kernel: spec.clone(), positivity, fourier_probe: fourier_sign_probe(spec) })
    }

    pub fn to_record(&self) -> String {
        let mut s = self.kernel.to_record();
        if let Some(c) = &self.positivity {
            let _ = writeln!(s, "positivity_min {:.16e}", c.min_value);
            let _ = writeln!(s, "positivity_argmin_xi {:.16e}", c.argmin_xi);
            let _ = writeln!(s, "positivity_holds {}", c.is_positive);
            let _ = writeln!(s, "positivity_lower_bound_holds {}", c.lower_bound_holds);
        }
        let p = &self.fourier_probe;
        let _ = writeln!(s, "fourier_min_k {:.16e}", p.k_norm);
        let _ = writeln!(s, "fourier_min_t {:.16e}", p.t);
        let _ = writeln!(s, "fourier_min_value {:.16e}", p.value);
        s
    }
}

/// Everything `verify` prints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub jet: GraphJet2D,
    pub planar: ExpansionReport,
    pub spatial: ExpansionReport,
    pub obstruction: ObstructionReport,
}

impl VerifyReport {
    pub fn new(spec: &KernelSpec, obstruction_samples: usize, seed: u64) -> Result<Self> {
        let jet = GraphJet2D { g2: 1.0, g4: 1.0 };
        Ok(Self {
            jet,
            planar: scheme_expansion_2d(spec, jet)?,
            spatial: scheme_expansion_3d(spec)?,
            obstruction: obstruction_check_3d(obstruction_samples, seed)?,
        })
    }

    pub fn to_record(&self) -> String {
        let mut s = String::from("# planar expansion (g2 = 1, g4 = 1)\n");
        s.push_str(&self.planar.to_record());
        s.push_str("# spatial expansion\n");
        s.push_str(&self.spatial.to_record());
        let o = &self.obstruction;
        s.push_str("# obstruction check\n");
        let _ = writeln!(s, "obstruction_checked = {}", o.checked);
        let _ = writeln!(s, "obstruction_rejected = {}", o.rejected);
        let _ = writeln!(s, "obstruction_max_rel_error = {:.16e}", o.max_rel_error);
        let _ = writeln!(s, "obstruction_passed = {}", o.passed());
        s
    }
}

fn time_mapping(cfg: &ExperimentConfig) -> TimeMapping {
    if cfg.raw_time {
        TimeMapping::Raw
    } else {
        TimeMapping::Effective
    }
}

fn mapping_name(m: TimeMapping) -> &'static str {
    match m {
        TimeMapping::Effective => "effective",
        TimeMapping::Raw => "raw",
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn base_table(cfg: &ExperimentConfig, spec: &KernelSpec, label: &str, norm: Norm) -> ErrorTable {
    ErrorTable::new(cfg.experiment.name(), &cfg.kernel.to_string(), label, norm)
        .with_meta("config_fingerprint", cfg.fingerprint())
        .with_meta("kernel_scales", join(spec.scales()))
        .with_meta("kernel_coeffs", join(spec.coeffs()))
        .with_meta("step_ratio", spec.step_ratio())
        .with_meta("time_mapping", mapping_name(time_mapping(cfg)))
}

/// One threshold step of kernel time `t = 2^{-k} r0²` for every configured
/// radius; the error is the distance to the exact radius after the step's flow
/// time `step_ratio · t`. The time mapping setting plays no role here.
/// Rows are labelled `n_steps = 2^k`, so the order column reads the
/// local-error order directly. The least-squares slope of `ln error` against
/// `ln t` is stored as `slope`.
pub fn run_circle_lte(cfg: &ExperimentConfig) -> Result<Vec<ErrorTable>> {
    cfg.validate()?;
    let spec = cfg.kernel.load()?;
    let mut tables = Vec::with_capacity(cfg.radii.len());
    for &r0 in &cfg.radii {
        let mut table = base_table(cfg, &spec, &format!("r0={r0}"), Norm::RadiusAbs).with_meta("r0", r0);
        let mut points = Vec::new();
        for k in cfg.lte_exponents.0..=cfg.lte_exponents.1 {
            let n = 1u64 << k;
            let t = r0 * r0 / n as f64;
            let params = StepParams::new(t, spec.clone())?;
            let r1 = radial_step(r0, &params)?;
            let exact = circle_exact(r0, params.effective_step())?;
            let err = (r1 - exact).abs();
            table.push(n, err);
            points.push((t, err));
        }
        let slope = log_log_slope(&points)?;
        tables.push(table.with_meta("slope", slope));
    }
    Ok(tables)
}

impl InitialCondition {
    /// Samples a graph initial condition on `nodes` nodes.
    pub fn graph(&self, nodes: usize) -> Result<GraphInterface> {
        match self {
            InitialCondition::HalfSine => GraphInterface::from_fn(1.0, nodes, |x| 0.5 * (2.0 * PI * x).sin()),
            InitialCondition::ExpCos => GraphInterface::from_fn(2.0, nodes, |x| (PI * x).cos().exp()),
            InitialCondition::File(path) => {
                let f = io::read_graph(path)?;
                if f.len() == nodes {
                    Ok(f)
                } else {
                    resample(&f, nodes)
                }
            }
            other => Err(Error::Config(format!("{other} is not a graph initial condition"))),
        }
    }

    /// Builds a grid initial condition; disks are centred in the domain.
    pub fn grid(&self, cfg: &ExperimentConfig) -> Result<GridField> {
        let (nx, ny, lx, ly, r) = (cfg.grid_nx, cfg.grid_ny, cfg.grid_lx, cfg.grid_ly, cfg.grid_radius);
        match self {
            InitialCondition::Disk => {
                if 2.0 * r >= lx.min(ly) {
                    return Err(Error::Config(format!("disk of radius {r} does not fit the domain")));
                }
                GridField::disk(nx, ny, lx, ly, (0.5 * lx, 0.5 * ly), r)
            }
            InitialCondition::TwoDisks => {
                if 4.0 * r >= lx || 2.0 * r >= ly {
                    return Err(Error::Config(format!("two disks of radius {r} do not fit the domain")));
                }
                let a = GridField::disk(nx, ny, lx, ly, (0.25 * lx, 0.5 * ly), r)?;
                let b = GridField::disk(nx, ny, lx, ly, (0.75 * lx, 0.5 * ly), r)?;
                a.union(&b)
            }
            InitialCondition::File(path) => io::read_grid(path),
            other => Err(Error::Config(format!("{other} is not a grid initial condition"))),
        }
    }
}

/// Evolves the graph with every configured step count and measures the L²
/// distance to a finite-difference solution at the same flow time.
pub fn run_graph_convergence(cfg: &ExperimentConfig) -> Result<ErrorTable> {
    cfg.validate()?;
    let spec = cfg.kernel.load()?;
    let mapping = time_mapping(cfg);
    let nodes = cfg.graph_nodes();
    let f0 = cfg.initial.graph(nodes)?;
    let flow_time = mapping.flow_time(&spec, cfg.final_time);
    let reference_nodes = cfg.reference_nodes_for(f0.period());
    let fd = FdConfig::with_safety(reference_nodes, f0.period(), cfg.reference_safety, flow_time);
    let reference = fd_solve(&cfg.initial.graph(reference_nodes)?, &fd)?;
    let mut table = base_table(cfg, &spec, &cfg.initial.to_string(), Norm::L2)
        .with_meta("initial", &cfg.initial)
        .with_meta("final_time", cfg.final_time)
        .with_meta("flow_time", flow_time)
        .with_meta("nodes", nodes)
        .with_meta("period", f0.period())
        .with_meta("reference_nodes", reference_nodes)
        .with_meta("reference_dt", fd.dt);
    for &n in &cfg.steps {
        let f = graph_evolve(&f0, cfg.final_time, n, &spec, mapping)?;
        table.push(n as u64, l2_error(&f, &reference)?);
        log::info!("graph-converge: {n} steps done");
    }
    Ok(table)
}

/// Number of 4-connected components of a periodic field.
pub fn count_components(field: &GridField) -> usize {
    let (nx, ny) = (field.nx(), field.ny());
    let mut seen = vec![false; nx * ny];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..nx * ny {
        if seen[start] || !field.cells()[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let (i, j) = (idx % nx, idx / nx);
            let neighbours = [
                j * nx + (i + 1) % nx,
                j * nx + (i + nx - 1) % nx,
                ((j + 1) % ny) * nx + i,
                ((j + ny - 1) % ny) * nx + i,
            ];
            for nb in neighbours {
                if field.cells()[nb] && !seen[nb] {
                    seen[nb] = true;
                    stack.push(nb);
                }
            }
        }
    }
    count
}

pub struct GridRun {
    pub table: ErrorTable,
    /// the field after the largest step count
    pub final_field: GridField,
}

/// Evolves a grid field with every configured step count. Each simply
/// connected component of area `A` shrinks under curve shortening at rate
/// `dA/dt = −2π`, so the error column is `|A(T) − (A(0) − 2π m T)|` with `m`
/// the number of components.
pub fn run_grid(cfg: &ExperimentConfig) -> Result<GridRun> {
    cfg.validate()?;
    let spec = cfg.kernel.load()?;
    let mapping = time_mapping(cfg);
    let field = cfg.initial.grid(cfg)?;
    let components = count_components(&field);
    let flow_time = mapping.flow_time(&spec, cfg.final_time);
    let expected = field.area() - 2.0 * PI * components as f64 * flow_time;
    let mut table = base_table(cfg, &spec, &cfg.initial.to_string(), Norm::AreaAbs)
        .with_meta("initial", &cfg.initial)
        .with_meta("final_time", cfg.final_time)
        .with_meta("flow_time", flow_time)
        .with_meta("grid", format!("{}x{}", field.nx(), field.ny()))
        .with_meta("extent", format!("{}x{}", field.lx(), field.ly()))
        .with_meta("components", components)
        .with_meta("initial_area", field.area());
    let mut last = field.clone();
    for &n in &cfg.steps {
        last = grid_evolve(&field, cfg.final_time, n, &spec, mapping)?;
        table.push(n as u64, (last.area() - expected).abs());
    }
    Ok(GridRun { table: table.with_meta("final_area", last.area()), final_field: last })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lte_config(kernel: KernelChoice) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::defaults(ExperimentKind::CircleLte);
        cfg.kernel = kernel;
        cfg
    }

    #[test]
    fn kernel_report_record() {
        let r = KernelReport::new(&KernelSpec::second_order()).unwrap();
        let rec = r.to_record();
        assert!(rec.contains("positivity_holds true"));
        assert!(r.fourier_probe.value < 0.0);
        assert!(KernelReport::new(&KernelSpec::gaussian()).unwrap().positivity.is_none());
    }

    #[test]
    fn verify_report_for_both_kernels() {
        let r = VerifyReport::new(&KernelSpec::second_order(), 20, 1).unwrap();
        assert!(r.planar.residual_theta1 < 1e-10 && r.planar.residual_theta2 < 1e-10);
        assert!(r.obstruction.passed());
        let g = VerifyReport::new(&KernelSpec::gaussian(), 5, 1).unwrap();
        assert!((g.planar.residual_theta2 - 1.0 / 3.0).abs() < 1e-12);
        assert!(g.to_record().contains("obstruction_passed = true"));
    }

    #[test]
    fn lte_tables_have_one_row_per_time() {
        let mut cfg = lte_config(KernelChoice::Gaussian);
        cfg.radii = vec![1.0];
        cfg.lte_exponents = (6, 9);
        let tables = run_circle_lte(&cfg).unwrap();
        assert_eq!(tables.len(), 1);
        let t = &tables[0];
        assert_eq!(t.rows.iter().map(|r| r.n_steps).collect::<Vec<_>>(), vec![64, 128, 256, 512]);
        assert_eq!(t.metadata["r0"], "1");
        assert!(t.metadata.contains_key("slope"));
    }

    #[test]
    fn graph_initial_conditions() {
        let f = InitialCondition::HalfSine.graph(8).unwrap();
        assert_eq!(f.period(), 1.0);
        assert!((f.samples()[2] - 0.5).abs() < 1e-15);
        let g = InitialCondition::ExpCos.graph(8).unwrap();
        assert_eq!(g.period(), 2.0);
        assert!((g.samples()[0] - 1f64.exp()).abs() < 1e-15);
        assert!(InitialCondition::Disk.graph(8).is_err());
    }

    #[test]
    fn grid_initial_conditions() {
        let mut cfg = ExperimentConfig::defaults(ExperimentKind::GridRun);
        cfg.grid_nx = 64;
        cfg.grid_ny = 64;
        cfg.grid_radius = 0.2;
        let disk = InitialCondition::Disk.grid(&cfg).unwrap();
        assert_eq!(count_components(&disk), 1);
        let two = InitialCondition::TwoDisks.grid(&cfg).unwrap();
        assert_eq!(count_components(&two), 2);
        cfg.grid_radius = 0.3;
        assert!(InitialCondition::TwoDisks.grid(&cfg).is_err());
        assert!(InitialCondition::HalfSine.grid(&cfg).is_err());
    }

    #[test]
    fn components_wrap_around_the_period() {
        let strip = GridField::from_fn(16, 16, 1.0, 1.0, |x, _| !(0.1..0.9).contains(&x)).unwrap();
        assert_eq!(count_components(&strip), 1);
        assert_eq!(count_components(&GridField::empty(4, 4, 1.0, 1.0).unwrap()), 0);
    }

    #[test]
    fn small_graph_run_is_deterministic() {
        let mut cfg = ExperimentConfig::defaults(ExperimentKind::GraphConverge);
        cfg.steps = vec![2, 4];
        cfg.nodes = 64;
        cfg.reference_nodes = 256;
        cfg.final_time = 1e-3;
        let a = run_graph_convergence(&cfg).unwrap();
        let b = run_graph_convergence(&cfg).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.rows.len(), 2);
        let mut g = cfg.clone();
        g.kernel = KernelChoice::Gaussian;
        let c = run_graph_convergence(&g).unwrap();
        assert_eq!(c.metadata["config_fingerprint"], a.metadata["config_fingerprint"]);
        assert_ne!(c.metadata["kernel_coeffs"], a.metadata["kernel_coeffs"]);
    }

    #[test]
    fn small_grid_run() {
        let mut cfg = ExperimentConfig::defaults(ExperimentKind::GridRun);
        cfg.grid_nx = 64;
        cfg.grid_ny = 64;
        cfg.final_time = 0.01;
        cfg.steps = vec![2, 4];
        let run = run_grid(&cfg).unwrap();
        assert_eq!(run.table.rows.len(), 2);
        assert!(run.final_field.area() < cfg.initial.grid(&cfg).unwrap().area());
        assert!(run.table.rows.iter().all(|r| r.error < 0.02));
    }
}
