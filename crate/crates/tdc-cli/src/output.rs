//! Output rendering: the JSON result record, CSV tables with the
//! effective configuration echoed into their headers, and the one-line
//! summaries. Everything here is a pure function of its inputs so
//! repeated runs produce byte-identical files.

use std::fmt::Write as _;

use serde::Serialize;
use tdc_core::characterize::{DensityReport, SensorPoint, TransferCurve};
use tdc_core::ConversionResult;
use tdc_core::TdcConfig;

/// Flat key-value record for one conversion.
#[derive(Serialize)]
pub struct ResultRecord {
    pub n_c: u64,
    pub n_f1: u64,
    pub n_f2: u64,
    pub d_out: i64,
    pub time_fs: i64,
    pub time_ns: f64,
    pub overflow: bool,
}

impl From<&ConversionResult> for ResultRecord {
    fn from(r: &ConversionResult) -> Self {
        ResultRecord {
            n_c: r.n_c,
            n_f1: r.n_f1,
            n_f2: r.n_f2,
            d_out: r.d_out,
            time_fs: r.time_fs.fs(),
            time_ns: r.time_ns(),
            overflow: r.overflow,
        }
    }
}

pub fn conversion_json(r: &ConversionResult) -> String {
    serde_json::to_string(&ResultRecord::from(r)).expect("record serializes")
}

/// `#`-prefixed provenance lines naming the effective configuration.
pub fn config_echo(cfg: &TdcConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# f_clk_hz={} t_clk_fs={} n_lines={} taps_per_line={} cell_delay_fs={} line_offset_fs={}",
        cfg.f_clk_hz,
        cfg.t_clk().fs(),
        cfg.fine.n_lines,
        cfg.fine.taps_per_line,
        cfg.fine.cell_delay.fs(),
        cfg.fine.line_offset.fs()
    );
    let _ = write!(
        s,
        "# counter_width={} adder_width={} coarse_width={} scale_k={} lsb_fs={} perturbed={}",
        cfg.fine.counter_width,
        cfg.fine.adder_width,
        cfg.coarse_width,
        cfg.scale_k(),
        cfg.lsb(),
        cfg.fine.tap_perturbations.is_some()
    );
    if let Some(seed) = cfg.fine.seed {
        let _ = write!(s, " perturbation_seed={seed}");
    }
    s.push('\n');
    s
}

pub fn sweep_csv(cfg: &TdcConfig, curve: &TransferCurve, policy_note: &str) -> String {
    let mut s = config_echo(cfg);
    let _ = writeln!(s, "# {policy_note}");
    s.push_str("t_in_fs,phase_fs,d_out,time_fs\n");
    for p in &curve.points {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            p.t_in.fs(),
            p.phase.fs(),
            p.d_out,
            p.time_fs.fs()
        );
    }
    s
}

pub fn density_csv(cfg: &TdcConfig, report: &DensityReport) -> String {
    let mut s = config_echo(cfg);
    let _ = writeln!(
        s,
        "# samples={} seed={} t_fixed_fs={} rng={}",
        report.n_samples,
        report.seed,
        report.t_fixed.fs(),
        report.rng_algorithm
    );
    s.push_str("bin,count,dnl,inl\n");
    for (i, bin) in report.bins.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{:.6},{:.6}",
            bin, report.counts[i], report.dnl[i], report.inl[i]
        );
    }
    s
}

pub fn sensor_csv(cfg: &TdcConfig, points: &[SensorPoint], model_note: &str) -> String {
    let mut s = config_echo(cfg);
    let _ = writeln!(s, "# {model_note}");
    s.push_str("r_ohms,t_fs,d_out,time_fs,status\n");
    for p in points {
        match &p.result {
            Ok(r) => {
                let status = if r.overflow { "overflow" } else { "ok" };
                let _ = writeln!(
                    s,
                    "{},{},{},{},{status}",
                    p.r_ohms,
                    p.t.fs(),
                    r.d_out,
                    r.time_fs.fs()
                );
            }
            Err(e) => {
                let status = match e {
                    tdc_core::Error::RangeExceeded => "range_exceeded",
                    tdc_core::Error::NonPositiveInterval => "below_range",
                    _ => "error",
                };
                let _ = writeln!(s, "{},{},,,{status}", p.r_ohms, p.t.fs());
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use tdc_core::characterize::{transfer_sweep, PhasePolicy};
    use tdc_core::time::SimTime;

    #[test]
    fn conversion_record_shape() {
        let cfg = TdcConfig::default();
        let r = tdc_core::dtdc::convert(
            SimTime::from_ns(830),
            SimTime::from_ns(930),
            &cfg,
            tdc_core::ConvertMode::Behavioral,
        )
        .unwrap();
        let json = conversion_json(&r);
        assert_eq!(
            json,
            "{\"n_c\":80,\"n_f1\":80,\"n_f2\":80,\"d_out\":6400,\"time_fs\":100000000,\"time_ns\":100.0,\"overflow\":false}"
        );
    }

    #[test]
    fn sweep_csv_has_pinned_columns_and_echo() {
        let cfg = TdcConfig::default();
        let curve = transfer_sweep(
            &cfg,
            SimTime::from_ns(2),
            SimTime::from_ns(2),
            SimTime::from_ns(1),
            PhasePolicy::Fixed(SimTime::ZERO),
        )
        .unwrap();
        let csv = sweep_csv(&cfg, &curve, "phase=fixed:0fs");
        assert!(csv.starts_with("# f_clk_hz=800000000"));
        assert!(csv.contains("\nt_in_fs,phase_fs,d_out,time_fs\n"));
        assert!(csv.ends_with("2000000,0,128,2000000\n"));
    }
}
