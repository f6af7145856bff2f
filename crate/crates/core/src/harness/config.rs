//! Flat `key = value` experiment configuration.
//!
//! ```text
//! schema_version = 1
//! experiment = graph-converge
//! kernel = second-order
//! initial = half-sine
//! final_time = 0.025
//! steps = 32, 64, 128, 256, 512
//! ```
//!
//! `#` starts a comment line. Every key may appear at most once; unknown keys
//! are errors. Keys not given take the defaults of the experiment kind.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    KernelReport,
    Verify,
    CircleLte,
    GraphConverge,
    GridRun,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::KernelReport => "kernel-report",
            ExperimentKind::Verify => "verify",
            ExperimentKind::CircleLte => "circle-lte",
            ExperimentKind::GraphConverge => "graph-converge",
            ExperimentKind::GridRun => "grid-run",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "kernel-report" => ExperimentKind::KernelReport,
            "verify" => ExperimentKind::Verify,
            "circle-lte" => ExperimentKind::CircleLte,
            "graph-converge" => ExperimentKind::GraphConverge,
            "grid-run" => ExperimentKind::GridRun,
            other => return Err(Error::Config(format!("unknown experiment {other:?}"))),
        })
    }
}

/// Which kernel to run with. `paper` is accepted as an alias of `second-order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KernelChoice {
    Gaussian,
    SecondOrder,
    File(PathBuf),
}

impl KernelChoice {
    pub fn load(&self) -> Result<KernelSpec> {
        match self {
            KernelChoice::Gaussian => Ok(KernelSpec::gaussian()),
            KernelChoice::SecondOrder => Ok(KernelSpec::second_order()),
            KernelChoice::File(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                KernelSpec::from_record(&text)
            }
        }
    }
}

impl fmt::Display for KernelChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelChoice::Gaussian => f.write_str("gaussian"),
            KernelChoice::SecondOrder => f.write_str("second-order"),
            KernelChoice::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl FromStr for KernelChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "" => return Err(Error::Config("empty kernel choice".into())),
            "gaussian" => KernelChoice::Gaussian,
            "second-order" | "paper" => KernelChoice::SecondOrder,
            path => KernelChoice::File(PathBuf::from(path)),
        })
    }
}

/// Initial interface. Anything other than the built-in ids names a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialCondition {
    /// `½ sin(2πx)`, period 1.
    HalfSine,
    /// `exp(cos(πx))`, period 2.
    ExpCos,
    /// One disk centred in the grid domain.
    Disk,
    /// Two separated disks of equal radius.
    TwoDisks,
    File(PathBuf),
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialCondition::HalfSine => f.write_str("half-sine"),
            InitialCondition::ExpCos => f.write_str("exp-cos"),
            InitialCondition::Disk => f.write_str("disk"),
            InitialCondition::TwoDisks => f.write_str("two-disks"),
            InitialCondition::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl FromStr for InitialCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "" => return Err(Error::Config("empty initial condition".into())),
            "half-sine" => InitialCondition::HalfSine,
            "exp-cos" => InitialCondition::ExpCos,
            "disk" => InitialCondition::Disk,
            "two-disks" => InitialCondition::TwoDisks,
            path => InitialCondition::File(PathBuf::from(path)),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub kernel: KernelChoice,
    pub initial: InitialCondition,
    pub final_time: f64,
    pub steps: Vec<usize>,
    /// graph nodes; `0` picks a default for the initial condition
    pub nodes: usize,
    /// finite-difference reference nodes; `0` picks 4096 per unit of period
    pub reference_nodes: usize,
    pub reference_safety: f64,
    pub radii: Vec<f64>,
    /// the LTE sweep uses `t = 2^{-k} r0²` for `k` in this inclusive range
    pub lte_exponents: (u32, u32),
    pub grid_nx: usize,
    pub grid_ny: usize,
    pub grid_lx: f64,
    pub grid_ly: f64,
    pub grid_radius: f64,
    pub obstruction_samples: usize,
    pub seed: u64,
    pub raw_time: bool,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

const KEYS: &[&str] = &[
    "schema_version",
    "experiment",
    "kernel",
    "initial",
    "final_time",
    "steps",
    "nodes",
    "reference_nodes",
    "reference_safety",
    "radii",
    "lte_min_exponent",
    "lte_max_exponent",
    "grid_nx",
    "grid_ny",
    "grid_lx",
    "grid_ly",
    "grid_radius",
    "obstruction_samples",
    "seed",
    "raw_time",
    "output",
    "format",
];

impl ExperimentConfig {
    pub fn defaults(experiment: ExperimentKind) -> Self {
        let mut cfg = Self {
            experiment,
            kernel: KernelChoice::SecondOrder,
            initial: InitialCondition::HalfSine,
            final_time: 1.0 / 40.0,
            steps: vec![32, 64, 128, 256, 512],
            nodes: 0,
            reference_nodes: 0,
            reference_safety: 0.25,
            radii: vec![1.0, 2.0, 3.0],
            lte_exponents: (6, 13),
            grid_nx: 256,
            grid_ny: 256,
            grid_lx: 1.0,
            grid_ly: 1.0,
            grid_radius: 0.3,
            obstruction_samples: 100,
            seed: 0,
            raw_time: false,
            output: None,
            format: OutputFormat::Csv,
        };
        if experiment == ExperimentKind::GridRun {
            cfg.initial = InitialCondition::Disk;
            cfg.final_time = 0.02;
            cfg.steps = vec![4, 8, 16];
        }
        cfg
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }

    /// Graph nodes for the configured initial condition.
    pub fn graph_nodes(&self) -> usize {
        match (self.nodes, &self.initial) {
            (0, InitialCondition::ExpCos) => 2048,
            (0, _) => 1024,
            (n, _) => n,
        }
    }

    /// Reference nodes for a graph of the given period.
    pub fn reference_nodes_for(&self, period: f64) -> usize {
        match self.reference_nodes {
            0 => (4096.0 * period).round().max(16.0) as usize,
            n => n,
        }
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "schema_version" => {
                let v: u32 = parse_value(key, value)?;
                if v != SCHEMA_VERSION {
                    return Err(Error::Config(format!(
                        "unsupported schema_version {v} (expected {SCHEMA_VERSION})"
                    )));
                }
            }
            "experiment" => self.experiment = value.parse()?,
            "kernel" => self.kernel = value.parse()?,
            "initial" => self.initial = value.parse()?,
            "final_time" => self.final_time = parse_value(key, value)?,
            "steps" => self.steps = parse_list(key, value)?,
            "nodes" => self.nodes = parse_value(key, value)?,
            "reference_nodes" => self.reference_nodes = parse_value(key, value)?,
            "reference_safety" => self.reference_safety = parse_value(key, value)?,
            "radii" => self.radii = parse_list(key, value)?,
            "lte_min_exponent" => self.lte_exponents.0 = parse_value(key, value)?,
            "lte_max_exponent" => self.lte_exponents.1 = parse_value(key, value)?,
            "grid_nx" => self.grid_nx = parse_value(key, value)?,
            "grid_ny" => self.grid_ny = parse_value(key, value)?,
            "grid_lx" => self.grid_lx = parse_value(key, value)?,
            "grid_ly" => self.grid_ly = parse_value(key, value)?,
            "grid_radius" => self.grid_radius = parse_value(key, value)?,
            "obstruction_samples" => self.obstruction_samples = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "raw_time" => self.raw_time = parse_value(key, value)?,
            "output" => self.output = if value.is_empty() { None } else { Some(PathBuf::from(value)) },
            "format" => self.format = value.parse()?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return bad(format!("final_time must be positive, got {}", self.final_time));
        }
        if self.steps.is_empty() || self.steps[0] == 0 {
            return bad("steps must be a non-empty list of positive counts".into());
        }
        if self.steps.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("steps must be strictly increasing, got {:?}", self.steps));
        }
        if self.radii.is_empty() || self.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return bad(format!("radii must be positive, got {:?}", self.radii));
        }
        if self.lte_exponents.0 >= self.lte_exponents.1 {
            return bad(format!("lte exponent range {:?} is empty", self.lte_exponents));
        }
        if self.reference_nodes != 0 && self.reference_nodes < 16 {
            return bad(format!("reference_nodes must be at least 16, got {}", self.reference_nodes));
        }
        if !(self.reference_safety > 0.0 && self.reference_safety <= 0.5) {
            return bad(format!("reference_safety must be in (0, 0.5], got {}", self.reference_safety));
        }
        if self.nodes != 0 && self.nodes < 4 {
            return bad(format!("nodes must be at least 4, got {}", self.nodes));
        }
        if self.grid_nx == 0 || self.grid_ny == 0 {
            return bad("grid dimensions must be positive".into());
        }
        if !(self.grid_lx > 0.0 && self.grid_ly > 0.0 && self.grid_radius > 0.0) {
            return bad("grid extents and radius must be positive".into());
        }
        Ok(())
    }

    /// Canonical text form, every key in a fixed order.
    pub fn to_text(&self) -> String {
        self.lines().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    fn lines(&self) -> Vec<(&'static str, String)> {
        let join = |v: Vec<String>| v.join(", ");
        vec![
            ("schema_version", SCHEMA_VERSION.to_string()),
            ("experiment", self.experiment.to_string()),
            ("kernel", self.kernel.to_string()),
            ("initial", self.initial.to_string()),
            ("final_time", self.final_time.to_string()),
            ("steps", join(self.steps.iter().map(|s| s.to_string()).collect())),
            ("nodes", self.nodes.to_string()),
            ("reference_nodes", self.reference_nodes.to_string()),
            ("reference_safety", self.reference_safety.to_string()),
            ("radii", join(self.radii.iter().map(|r| r.to_string()).collect())),
            ("lte_min_exponent", self.lte_exponents.0.to_string()),
            ("lte_max_exponent", self.lte_exponents.1.to_string()),
            ("grid_nx", self.grid_nx.to_string()),
            ("grid_ny", self.grid_ny.to_string()),
            ("grid_lx", self.grid_lx.to_string()),
            ("grid_ly", self.grid_ly.to_string()),
            ("grid_radius", self.grid_radius.to_string()),
            ("obstruction_samples", self.obstruction_samples.to_string()),
            ("seed", self.seed.to_string()),
            ("raw_time", self.raw_time.to_string()),
            ("output", self.output.as_ref().map(|p| p.display().to_string()).unwrap_or_default()),
            ("format", self.format.to_string()),
        ]
    }

    /// Hash of every setting except the kernel and the output destination, so
    /// runs that differ only in the kernel share a fingerprint.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for (k, v) in self.lines() {
            if !matches!(k, "kernel" | "output" | "format") {
                hasher.update(format!("{k} = {v}\n"));
            }
        }
        hasher.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Config(format!("line {}: unknown key {k:?}", lineno + 1)));
            }
            if pairs.iter().any(|(seen, _)| seen == k) {
                return Err(Error::Config(format!("line {}: duplicate key {k:?}", lineno + 1)));
            }
            pairs.push((k.to_string(), v.to_string()));
        }
        let lookup = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        if lookup("schema_version").is_none() {
            return Err(Error::Config("missing schema_version".into()));
        }
        let kind: ExperimentKind =
            lookup("experiment").ok_or_else(|| Error::Config("missing experiment".into()))?.parse()?;
        let mut cfg = Self::defaults(kind);
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| Error::Config(format!("{key}: cannot parse {value:?}: {e}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    value.split(',').map(|v| parse_value(key, v.trim())).collect()
}
