//! `tdc-forge`: command-line front end for the converter model.
//!
//! Subcommands: `simulate` (one conversion, JSON on stdout), `sweep`
//! (transfer curve CSV), `density` (code-density DNL/INL CSV), `sensor`
//! (resistance sweep CSV) and `codegen` (structural VHDL file set).
//! A JSON configuration file can be passed with `--config` or through
//! `TDC_FORGE_CONFIG`; explicit flags override file values. Exit codes:
//! 0 success, 1 runtime or range errors, 2 usage errors.

mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tdc_core::characterize::{
    code_density, sensor_sweep, transfer_sweep, PhasePolicy, SensorModel, Spacing,
};
use tdc_core::codegen::{emit, manifest, CodegenRequest};
use tdc_core::dtdc::{build_dtdc_netlist, convert};
use tdc_core::sim::format_log;
use tdc_core::time::SimTime;
use tdc_core::{ConversionResult, ConvertMode, Error, TdcConfig};

use config::{parse_time, RunConfigFile};

#[derive(Parser)]
#[command(
    name = "tdc-forge",
    version,
    about = "Deterministic multiple-delay-line time-to-digital converter: simulation, characterization and VHDL generation"
)]
struct Cli {
    /// JSON run configuration (falls back to $TDC_FORGE_CONFIG)
    #[arg(long, global = true, env = "TDC_FORGE_CONFIG", value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
enum Mode {
    Behavioral,
    Structural,
}

#[derive(Subcommand)]
enum Command {
    /// Convert one interval and print the result record as JSON
    Simulate {
        /// Interval to measure, e.g. "100ns"
        #[arg(long)]
        tin: String,
        /// Absolute start time (phase against the clock grid)
        #[arg(long, default_value = "0fs")]
        start: String,
        #[arg(long, value_enum, default_value_t = Mode::Behavioral)]
        mode: Mode,
        /// Write the ordered event log here (structural mode only)
        #[arg(long, value_name = "PATH")]
        events: Option<PathBuf>,
    },
    /// Sweep the transfer function and write a CSV curve
    Sweep {
        #[arg(long)]
        tmin: Option<String>,
        #[arg(long)]
        tmax: Option<String>,
        #[arg(long)]
        step: Option<String>,
        /// Fixed start phase (conflicts with --seed)
        #[arg(long)]
        phase: Option<String>,
        /// Draw a random phase per sample from this seed
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Code-density test: histogram, DNL and INL as CSV
    Density {
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Fixed measured interval (bins sweep with the random phase)
        #[arg(long)]
        tin: Option<String>,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Map a resistance range through the sensor front end and convert
    Sensor {
        /// Front-end gain in femtoseconds per ohm
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        rmin: Option<f64>,
        #[arg(long)]
        rmax: Option<f64>,
        #[arg(long)]
        points: Option<u32>,
        /// Space points logarithmically instead of linearly
        #[arg(long)]
        log: bool,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Emit the structural VHDL file set and its manifest
    Codegen {
        /// Output directory
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Top entity name
        #[arg(long)]
        top: Option<String>,
    },
}

/// Error carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> CliError {
        CliError {
            message: message.into(),
            code: 2,
        }
    }

    pub fn runtime(message: impl Into<String>) -> CliError {
        CliError {
            message: message.into(),
            code: 1,
        }
    }

    fn from_core(e: Error) -> CliError {
        match e {
            Error::RangeExceeded => CliError::runtime(format!("{e}")),
            _ => CliError::usage(format!("{e}")),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tdc-forge: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = RunConfigFile::load(cli.config.as_deref())?;
    let cfg = file.tdc_config()?;
    match cli.command {
        Command::Simulate {
            tin,
            start,
            mode,
            events,
        } => cmd_simulate(&cfg, &tin, &start, mode, events.as_deref()),
        Command::Sweep {
            tmin,
            tmax,
            step,
            phase,
            seed,
            out,
        } => cmd_sweep(&cfg, &file, tmin, tmax, step, phase, seed, &out),
        Command::Density {
            samples,
            seed,
            tin,
            out,
        } => cmd_density(&cfg, &file, samples, seed, tin, &out),
        Command::Sensor {
            alpha,
            rmin,
            rmax,
            points,
            log,
            out,
        } => cmd_sensor(&cfg, &file, alpha, rmin, rmax, points, log, &out),
        Command::Codegen { out, top } => cmd_codegen(&cfg, &file, &out, top),
    }
}

fn finish_conversion(r: &ConversionResult) -> Result<(), CliError> {
    println!("{}", output::conversion_json(r));
    if r.overflow {
        return Err(CliError::runtime("conversion overflowed the datapath"));
    }
    Ok(())
}

fn cmd_simulate(
    cfg: &TdcConfig,
    tin: &str,
    start: &str,
    mode: Mode,
    events: Option<&Path>,
) -> Result<(), CliError> {
    let t_in = parse_time(tin)?;
    let t_start = parse_time(start)?;
    if !t_in.is_positive() {
        return Err(CliError::usage("interval must be strictly positive"));
    }
    let t_stop = t_start
        .checked_add(t_in)
        .ok_or_else(|| CliError::usage("interval end overflows the time base"))?;
    match (mode, events) {
        (Mode::Behavioral, Some(_)) => Err(CliError::usage(
            "--events requires --mode structural (the behavioral path schedules no events)",
        )),
        (Mode::Behavioral, None) => {
            let r = convert(t_start, t_stop, cfg, ConvertMode::Behavioral)
                .map_err(CliError::from_core)?;
            finish_conversion(&r)
        }
        (Mode::Structural, dump) => {
            let netlist = build_dtdc_netlist(cfg).map_err(CliError::from_core)?;
            if let Some(path) = dump {
                let (r, log) = netlist
                    .convert_with_log(t_start, t_stop)
                    .map_err(CliError::from_core)?;
                write_file(path, &format_log(&netlist.netlist, &log))?;
                finish_conversion(&r)
            } else {
                let r = netlist
                    .convert(t_start, t_stop)
                    .map_err(CliError::from_core)?;
                finish_conversion(&r)
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    cfg: &TdcConfig,
    file: &RunConfigFile,
    tmin: Option<String>,
    tmax: Option<String>,
    step: Option<String>,
    phase: Option<String>,
    seed: Option<u64>,
    out: &Path,
) -> Result<(), CliError> {
    let tmin = required_time(tmin.or(file.sweep.t_min.clone()), "--tmin")?;
    let tmax = required_time(tmax.or(file.sweep.t_max.clone()), "--tmax")?;
    let step = required_time(step.or(file.sweep.step.clone()), "--step")?;
    let phase = match phase.or(file.sweep.phase.clone()) {
        Some(s) => Some(parse_time(&s)?),
        None => None,
    };
    let seed = seed.or(file.sweep.seed);
    let (policy, note) = match (phase, seed) {
        (Some(_), Some(_)) => {
            return Err(CliError::usage("--phase and --seed are mutually exclusive"));
        }
        (None, Some(seed)) => (
            PhasePolicy::Random { seed },
            format!("phase=random seed={seed}"),
        ),
        (fixed, None) => {
            let phi = fixed.unwrap_or(SimTime::ZERO);
            (PhasePolicy::Fixed(phi), format!("phase=fixed:{phi}"))
        }
    };
    let curve = transfer_sweep(cfg, tmin, tmax, step, policy).map_err(CliError::from_core)?;
    write_file(out, &output::sweep_csv(cfg, &curve, &note))?;
    println!(
        "sweep: {} points from {} to {} step {} -> {}",
        curve.points.len(),
        tmin,
        tmax,
        step,
        out.display()
    );
    Ok(())
}

fn cmd_density(
    cfg: &TdcConfig,
    file: &RunConfigFile,
    samples: Option<u64>,
    seed: Option<u64>,
    tin: Option<String>,
    out: &Path,
) -> Result<(), CliError> {
    let samples = samples.or(file.density.samples).unwrap_or(100_000);
    let seed = seed.or(file.density.seed).unwrap_or(1);
    let t_fixed = match tin.or(file.density.t_fixed.clone()) {
        Some(s) => parse_time(&s)?,
        // ten clock periods; the bins sweep with the phase, so any fixed
        // interval characterizes the same residues
        None => SimTime::from_fs(cfg.t_clk().fs() * 10),
    };
    let report = code_density(cfg, t_fixed, samples, seed).map_err(CliError::from_core)?;
    write_file(out, &output::density_csv(cfg, &report))?;
    let max_dnl = report.dnl.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    println!(
        "density: {} samples over {} bins, max |dnl| = {:.4} -> {}",
        samples,
        report.bins.len(),
        max_dnl,
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sensor(
    cfg: &TdcConfig,
    file: &RunConfigFile,
    alpha: Option<f64>,
    rmin: Option<f64>,
    rmax: Option<f64>,
    points: Option<u32>,
    log: bool,
    out: &Path,
) -> Result<(), CliError> {
    let model = SensorModel {
        alpha_fs_per_ohm: alpha
            .or(file.sensor.alpha_fs_per_ohm)
            .ok_or_else(|| CliError::usage("--alpha is required"))?,
        r_min_ohms: rmin
            .or(file.sensor.r_min_ohms)
            .ok_or_else(|| CliError::usage("--rmin is required"))?,
        r_max_ohms: rmax
            .or(file.sensor.r_max_ohms)
            .ok_or_else(|| CliError::usage("--rmax is required"))?,
    };
    let points = points.or(file.sensor.points).unwrap_or(10);
    let spacing = if log || file.sensor.log_spacing.unwrap_or(false) {
        Spacing::Log
    } else {
        Spacing::Linear
    };
    let rows = sensor_sweep(&model, cfg, points, spacing).map_err(CliError::from_core)?;
    let note = format!(
        "alpha_fs_per_ohm={} r_min_ohms={} r_max_ohms={} spacing={}",
        model.alpha_fs_per_ohm,
        model.r_min_ohms,
        model.r_max_ohms,
        if spacing == Spacing::Log {
            "log"
        } else {
            "linear"
        }
    );
    let flagged = rows.iter().filter(|p| p.result.is_err()).count();
    write_file(out, &output::sensor_csv(cfg, &rows, &note))?;
    println!(
        "sensor: {} points ({} out of range) -> {}",
        rows.len(),
        flagged,
        out.display()
    );
    Ok(())
}

fn cmd_codegen(
    cfg: &TdcConfig,
    file: &RunConfigFile,
    out: &Path,
    top: Option<String>,
) -> Result<(), CliError> {
    let top = top
        .or(file.codegen.top_name.clone())
        .unwrap_or_else(|| "dtdc_top".to_string());
    let req = CodegenRequest::new(cfg.clone(), &top);
    let m = manifest(&req).map_err(CliError::from_core)?;
    let files = emit(&req).map_err(CliError::from_core)?;
    fs::create_dir_all(out)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", out.display())))?;
    for f in &files {
        write_file(&out.join(&f.name), &f.contents)?;
    }
    println!(
        "codegen: top '{}' ({} buffers, {} counters, {} adders per fine interpolator) -> {}",
        top,
        m.buffers,
        m.counters,
        m.adders,
        out.display()
    );
    Ok(())
}

fn required_time(value: Option<String>, flag: &str) -> Result<SimTime, CliError> {
    match value {
        Some(s) => parse_time(&s),
        None => Err(CliError::usage(format!("{flag} is required"))),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}
