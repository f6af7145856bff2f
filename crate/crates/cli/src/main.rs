//! `mbo`: solve the kernel, check its consistency algebra and run the
//! convergence experiments.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 configuration or
//! usage error, 3 I/O error, 4 invalid kernel, 5 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::LevelFilter;

use mbo_core::harness::{
    self, ErrorTable, ExperimentConfig, ExperimentKind, InitialCondition, KernelChoice, KernelReport,
    OutputFormat, VerifyReport,
};
use mbo_core::{io, Error, Result};

#[derive(Parser, Debug)]
#[command(name = "mbo", version, about = "Second-order threshold dynamics for curve shortening flow")]
struct Cli {
    /// gaussian, paper (alias second-order), or a kernel record file
    #[arg(long, global = true)]
    kernel: Option<String>,
    /// experiment config file (flat key = value)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output path; stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// use kernel time T/n per step instead of flow time T/n
    #[arg(long, global = true)]
    raw_time: bool,
    /// log progress
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the kernel record, positivity certificate and Fourier sign probe.
    SolveKernel,
    /// Print consistency residuals and the 3D obstruction check.
    Verify {
        #[arg(long)]
        samples: Option<usize>,
    },
    /// One-step radius error of shrinking circles over a sweep of step sizes.
    CircleLte,
    /// Global error of graph evolutions against a finite-difference reference.
    GraphConverge {
        /// half-sine, exp-cos or a graph file
        #[arg(long)]
        initial: Option<String>,
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Evolve a set on a periodic grid.
    GridRun {
        /// disk, two-disks or a raster file
        #[arg(long)]
        initial: Option<String>,
        /// write the final field as a raster (plus `.hdr` sidecar)
        #[arg(long)]
        field_out: Option<PathBuf>,
    },
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::SolveKernel => ExperimentKind::KernelReport,
            Command::Verify { .. } => ExperimentKind::Verify,
            Command::CircleLte => ExperimentKind::CircleLte,
            Command::GraphConverge { .. } => ExperimentKind::GraphConverge,
            Command::GridRun { .. } => ExperimentKind::GridRun,
        }
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig> {
    let kind = cli.command.kind();
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::defaults(kind),
    };
    if cfg.experiment != kind {
        return Err(Error::Config(format!(
            "config describes a {} experiment, not {}",
            cfg.experiment, kind
        )));
    }
    if let Some(k) = &cli.kernel {
        cfg.kernel = k.parse::<KernelChoice>()?;
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }
    if let Some(f) = &cli.format {
        cfg.format = f.parse::<OutputFormat>()?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.raw_time {
        cfg.raw_time = true;
    }
    match &cli.command {
        Command::Verify { samples: Some(n) } => cfg.obstruction_samples = *n,
        Command::GraphConverge { initial, nodes } => {
            if let Some(i) = initial {
                cfg.initial = i.parse::<InitialCondition>()?;
            }
            if let Some(n) = nodes {
                cfg.nodes = *n;
            }
        }
        Command::GridRun { initial: Some(i), .. } => cfg.initial = i.parse::<InitialCondition>()?,
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io { path: p.to_path_buf(), source: e }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `lte.csv` with label `r0=1` becomes `lte-r0_1.csv`.
fn labelled_path(path: &Path, label: &str) -> PathBuf {
    let clean: String = label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' }).collect();
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{clean}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{clean}"),
    };
    path.with_file_name(name)
}

fn write_tables(cfg: &ExperimentConfig, tables: &[ErrorTable]) -> Result<()> {
    let out = cfg.output.as_deref();
    match (cfg.format, tables) {
        (_, [single]) => write_output(out, &single.render(cfg.format)?),
        (OutputFormat::Json, _) => {
            let mut text = serde_json::to_string_pretty(tables)?;
            text.push('\n');
            write_output(out, &text)
        }
        (OutputFormat::Csv, _) => match out {
            Some(path) => tables.iter().try_for_each(|t| write_output(Some(&labelled_path(path, &t.label)), &t.to_csv())),
            None => {
                for t in tables {
                    print!("# {}\n{}", t.label, t.to_csv());
                }
                Ok(())
            }
        },
    }
}

fn report_text<T: serde::Serialize>(cfg: &ExperimentConfig, value: &T, record: String) -> Result<String> {
    Ok(match cfg.format {
        OutputFormat::Csv => record,
        OutputFormat::Json => serde_json::to_string_pretty(value)? + "\n",
    })
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = build_config(cli)?;
    match &cli.command {
        Command::SolveKernel => {
            let report = KernelReport::new(&cfg.kernel.load()?)?;
            write_output(cfg.output.as_deref(), &report_text(&cfg, &report, report.to_record())?)?;
            Ok(report.positivity.map_or(true, |c| c.is_positive))
        }
        Command::Verify { .. } => {
            let report = VerifyReport::new(&cfg.kernel.load()?, cfg.obstruction_samples, cfg.seed)?;
            write_output(cfg.output.as_deref(), &report_text(&cfg, &report, report.to_record())?)?;
            Ok(report.obstruction.passed())
        }
        Command::CircleLte => {
            write_tables(&cfg, &harness::run_circle_lte(&cfg)?)?;
            Ok(true)
        }
        Command::GraphConverge { .. } => {
            write_tables(&cfg, &[harness::run_graph_convergence(&cfg)?])?;
            Ok(true)
        }
        Command::GridRun { field_out, .. } => {
            let run = harness::run_grid(&cfg)?;
            if let Some(path) = field_out {
                io::write_grid(path, &run.final_field)?;
            }
            write_tables(&cfg, &[run.table])?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose { LevelFilter::Info } else { LevelFilter::Warn })
        .init();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("mbo: verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("mbo: {e}");
            ExitCode::from(e.category().exit_code() as u8)
        }
    }
}
