//! JSON run-configuration files and their merge with command-line flags.
//!
//! Every field is optional and unknown keys are rejected. Time-valued
//! fields are unit-suffixed strings ("1.25ns", "62.5ps", "15625fs") and
//! must land on whole femtoseconds; perturbation entries may carry a
//! leading minus. Explicit command-line flags override file values.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use tdc_core::fine::FineTdcConfig;
use tdc_core::time::SimTime;
use tdc_core::TdcConfig;

use crate::CliError;

#[derive(Deserialize, Default, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub f_clk_hz: Option<u64>,
    pub coarse_width: Option<u32>,
    #[serde(default)]
    pub fine: FineSection,
    #[serde(default)]
    pub sensor: SensorSection,
    #[serde(default)]
    pub density: DensitySection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub codegen: CodegenSection,
}

#[derive(Deserialize, Default, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct FineSection {
    pub n_lines: Option<u32>,
    pub taps_per_line: Option<u32>,
    pub cell_delay: Option<String>,
    pub line_offset: Option<String>,
    pub counter_width: Option<u32>,
    pub adder_width: Option<u32>,
    pub tap_perturbations: Option<Vec<String>>,
    pub perturbation_sigma: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Deserialize, Default, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct SensorSection {
    pub alpha_fs_per_ohm: Option<f64>,
    pub r_min_ohms: Option<f64>,
    pub r_max_ohms: Option<f64>,
    pub points: Option<u32>,
    pub log_spacing: Option<bool>,
}

#[derive(Deserialize, Default, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct DensitySection {
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub t_fixed: Option<String>,
}

#[derive(Deserialize, Default, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub t_min: Option<String>,
    pub t_max: Option<String>,
    pub step: Option<String>,
    pub phase: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Deserialize, Default, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct CodegenSection {
    pub top_name: Option<String>,
}

impl RunConfigFile {
    pub fn load(path: Option<&Path>) -> Result<RunConfigFile, CliError> {
        let Some(path) = path else {
            return Ok(RunConfigFile::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Builds the effective converter configuration from the file.
    pub fn tdc_config(&self) -> Result<TdcConfig, CliError> {
        let mut cfg = match self.f_clk_hz {
            Some(0) => return Err(CliError::usage("f_clk_hz must be positive")),
            Some(hz) => TdcConfig::from_f_clk(hz),
            None => TdcConfig::default(),
        };
        if let Some(w) = self.coarse_width {
            cfg.coarse_width = w;
        }
        cfg.fine = self.fine_config(cfg.fine)?;
        cfg.validate()
            .map_err(|e| CliError::usage(format!("invalid configuration: {e}")))?;
        Ok(cfg)
    }

    fn fine_config(&self, base: FineTdcConfig) -> Result<FineTdcConfig, CliError> {
        let f = &self.fine;
        let mut fine = base;
        if let Some(n) = f.n_lines {
            fine.n_lines = n;
        }
        if let Some(n) = f.taps_per_line {
            fine.taps_per_line = n;
        }
        if let Some(s) = &f.cell_delay {
            fine.cell_delay = parse_time(s)?;
        }
        if let Some(s) = &f.line_offset {
            fine.line_offset = parse_time(s)?;
        }
        if let Some(w) = f.counter_width {
            fine.counter_width = w;
        }
        if let Some(w) = f.adder_width {
            fine.adder_width = w;
        }
        match (&f.tap_perturbations, &f.perturbation_sigma) {
            (Some(_), Some(_)) => {
                return Err(CliError::usage(
                    "specify either fine.tap_perturbations or fine.perturbation_sigma, not both",
                ));
            }
            (Some(list), None) => {
                let deltas = list
                    .iter()
                    .map(|s| parse_signed_time(s))
                    .collect::<Result<Vec<_>, _>>()?;
                fine.tap_perturbations = Some(deltas);
                fine.seed = f.seed;
            }
            (None, Some(sigma)) => {
                let sigma_fs = parse_time(sigma)?.fs() as f64;
                let seed = f.seed.unwrap_or(1);
                fine = fine.with_gaussian_perturbations(sigma_fs, seed);
            }
            (None, None) => {}
        }
        Ok(fine)
    }
}

/// Parses a non-negative unit-suffixed time for a flag or config field.
pub fn parse_time(s: &str) -> Result<SimTime, CliError> {
    SimTime::parse(s).map_err(|e| CliError::usage(format!("{e}")))
}

/// Parses a time that may carry a leading minus (delay perturbations).
pub fn parse_signed_time(s: &str) -> Result<SimTime, CliError> {
    if let Some(rest) = s.trim().strip_prefix('-') {
        Ok(SimTime::from_fs(-parse_time(rest)?.fs()))
    } else {
        parse_time(s)
    }
}
