//! Metrology harness: transfer-function sweeps, code-density DNL/INL,
//! single-shot precision and the resistive-sensor front-end mapping.
//!
//! Everything here is deterministic given its seed: phases come from the
//! documented stream in [`crate::rng`], counts are aggregated as exact
//! integers and only converted to floating ratios when a report is built,
//! and aggregation is order-independent so parallel evaluation of samples
//! could not change a result.

use alloc::vec;
use alloc::vec::Vec;

use crate::dtdc::{convert, ConversionResult, ConvertMode, TdcConfig};
use crate::error::Error;
use crate::rng::{SplitMix64, RNG_ALGORITHM};
use crate::time::SimTime;

/// How the absolute start time of each conversion is chosen.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum PhasePolicy {
    /// Every conversion starts at this offset from the clock grid.
    Fixed(SimTime),
    /// Start times drawn uniformly from `[0, t_clk)`.
    Random { seed: u64 },
}

/// One sample of the transfer function.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct TransferPoint {
    pub t_in: SimTime,
    pub phase: SimTime,
    pub d_out: i64,
    pub time_fs: SimTime,
}

/// Transfer-function samples, sorted by `t_in`, one per requested step.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TransferCurve {
    pub points: Vec<TransferPoint>,
}

/// Sweeps `t_in` from `t_min` to `t_max` (inclusive) in `step` increments,
/// converting once per sample.
pub fn transfer_sweep(
    cfg: &TdcConfig,
    t_min: SimTime,
    t_max: SimTime,
    step: SimTime,
    policy: PhasePolicy,
) -> Result<TransferCurve, Error> {
    cfg.validate()?;
    if !t_min.is_positive() || t_max < t_min {
        return Err(Error::NonPositiveInterval);
    }
    if !step.is_positive() {
        return Err(Error::InvalidConfig("sweep step must be positive".into()));
    }
    let mut rng = match policy {
        PhasePolicy::Random { seed } => Some(SplitMix64::new(seed)),
        PhasePolicy::Fixed(phase) => {
            if phase.is_negative() {
                return Err(Error::InvalidConfig("phase must be non-negative".into()));
            }
            None
        }
    };
    let mut points = Vec::new();
    let mut t_in = t_min;
    while t_in <= t_max {
        let phase = match (&mut rng, policy) {
            (Some(rng), _) => rng.next_phase(cfg.t_clk()),
            (None, PhasePolicy::Fixed(phase)) => phase,
            (None, PhasePolicy::Random { .. }) => unreachable!(),
        };
        let r = convert(phase, phase + t_in, cfg, ConvertMode::Behavioral)?;
        points.push(TransferPoint {
            t_in,
            phase,
            d_out: r.d_out,
            time_fs: r.time_fs,
        });
        t_in += step;
    }
    Ok(TransferCurve { points })
}

/// A code-density histogram with its differential and integral
/// nonlinearity, in LSB units.
#[derive(Clone, PartialEq, Debug)]
pub struct DensityReport {
    /// Code value of each histogram slot (`0..scale_k`).
    pub bins: Vec<u64>,
    pub counts: Vec<u64>,
    pub dnl: Vec<f64>,
    /// Running sum of `dnl`.
    pub inl: Vec<f64>,
    pub n_samples: u64,
    pub seed: u64,
    /// The PRNG stream that produced the phases (see [`crate::rng`]).
    pub rng_algorithm: &'static str,
    pub t_fixed: SimTime,
}

/// Builds a report from raw bin counts. Counts may be accumulated in any
/// order (they are plain sums); ratios are computed only here.
pub fn density_report_from_counts(counts: Vec<u64>, seed: u64, t_fixed: SimTime) -> DensityReport {
    let n_samples: u64 = counts.iter().sum();
    let n_bins = counts.len() as f64;
    let dnl: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 * n_bins / n_samples as f64 - 1.0)
        .collect();
    let mut inl = Vec::with_capacity(dnl.len());
    let mut acc = 0.0;
    for d in &dnl {
        acc += d;
        inl.push(acc);
    }
    DensityReport {
        bins: (0..counts.len() as u64).collect(),
        counts,
        dnl,
        inl,
        n_samples,
        seed,
        rng_algorithm: RNG_ALGORITHM,
        t_fixed,
    }
}

/// Code-density test: converts `t_fixed` at `n_samples` uniformly random
/// phases and histograms the sub-period fine code of the start
/// interpolator (`n_f1 - scale_k`, the code fraction within one clock
/// period). With uniform tap residues every one of the `scale_k` bins
/// covers the same phase span, so DNL measures residue placement error.
pub fn code_density(
    cfg: &TdcConfig,
    t_fixed: SimTime,
    n_samples: u64,
    seed: u64,
) -> Result<DensityReport, Error> {
    cfg.validate()?;
    if n_samples < 1 {
        return Err(Error::InvalidConfig("need at least one sample".into()));
    }
    if !t_fixed.is_positive() {
        return Err(Error::NonPositiveInterval);
    }
    let k = cfg.scale_k();
    let mut rng = SplitMix64::new(seed);
    let mut counts = vec![0u64; k as usize];
    for _ in 0..n_samples {
        let phase = rng.next_phase(cfg.t_clk());
        let r = convert(phase, phase + t_fixed, cfg, ConvertMode::Behavioral)?;
        let fraction = (r.n_f1.wrapping_sub(k)) % k;
        counts[fraction as usize] += 1;
    }
    Ok(density_report_from_counts(counts, seed, t_fixed))
}

/// Repeatedly converts the same interval and reports the sample mean and
/// sample standard deviation of the measured time, in femtoseconds.
pub fn single_shot_precision(
    cfg: &TdcConfig,
    t_in: SimTime,
    n_trials: u64,
    policy: PhasePolicy,
) -> Result<(f64, f64), Error> {
    cfg.validate()?;
    if n_trials < 2 {
        return Err(Error::InvalidConfig("need at least two trials".into()));
    }
    if !t_in.is_positive() {
        return Err(Error::NonPositiveInterval);
    }
    let mut rng = match policy {
        PhasePolicy::Random { seed } => Some(SplitMix64::new(seed)),
        PhasePolicy::Fixed(_) => None,
    };
    let mut sum: i128 = 0;
    let mut sum_sq: i128 = 0;
    for _ in 0..n_trials {
        let phase = match (&mut rng, policy) {
            (Some(rng), _) => rng.next_phase(cfg.t_clk()),
            (None, PhasePolicy::Fixed(phase)) => phase,
            (None, PhasePolicy::Random { .. }) => unreachable!(),
        };
        let r = convert(phase, phase + t_in, cfg, ConvertMode::Behavioral)?;
        let x = r.time_fs.fs() as i128;
        sum += x;
        sum_sq += x * x;
    }
    let n = n_trials as i128;
    let mean = sum as f64 / n as f64;
    // exact integer sum of squared deviations: n * sum_sq - sum^2, over
    // n * (n - 1)
    let numer = (n * sum_sq - sum * sum) as f64;
    let variance = numer / (n as f64 * (n - 1) as f64);
    let std = libm::sqrt(variance.max(0.0));
    Ok((mean, std))
}

/// Linear resistance-to-time front end: `t = alpha * r` femtoseconds.
#[derive(Copy, Clone, PartialEq, Debug)]
pub struct SensorModel {
    pub alpha_fs_per_ohm: f64,
    pub r_min_ohms: f64,
    pub r_max_ohms: f64,
}

impl SensorModel {
    pub fn validate(&self) -> Result<(), Error> {
        if !self.alpha_fs_per_ohm.is_finite() || self.alpha_fs_per_ohm <= 0.0 {
            return Err(Error::InvalidConfig("alpha must be positive".into()));
        }
        if !self.r_min_ohms.is_finite()
            || !self.r_max_ohms.is_finite()
            || self.r_min_ohms > self.r_max_ohms
        {
            return Err(Error::InvalidConfig("need r_min <= r_max, finite".into()));
        }
        Ok(())
    }
}

/// Spacing of sensor sweep points across `[r_min, r_max]`.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Spacing {
    Linear,
    Log,
}

/// One sensor sweep row. Points whose mapped time falls outside the
/// convertible range carry the error instead of a result, so a sweep
/// across a huge resistance range degrades row by row rather than
/// aborting.
#[derive(Clone, PartialEq, Debug)]
pub struct SensorPoint {
    pub r_ohms: f64,
    pub t: SimTime,
    pub result: Result<ConversionResult, Error>,
}

/// Maps `n_points` resistances through the front end and converts each.
pub fn sensor_sweep(
    model: &SensorModel,
    cfg: &TdcConfig,
    n_points: u32,
    spacing: Spacing,
) -> Result<Vec<SensorPoint>, Error> {
    model.validate()?;
    cfg.validate()?;
    if n_points < 1 {
        return Err(Error::InvalidConfig("need at least one point".into()));
    }
    if spacing == Spacing::Log && model.r_min_ohms <= 0.0 {
        return Err(Error::InvalidConfig(
            "log spacing requires r_min > 0".into(),
        ));
    }
    let mut points = Vec::with_capacity(n_points as usize);
    for i in 0..n_points {
        let fraction = if n_points == 1 {
            0.0
        } else {
            i as f64 / (n_points - 1) as f64
        };
        let r = match spacing {
            Spacing::Linear => model.r_min_ohms + (model.r_max_ohms - model.r_min_ohms) * fraction,
            Spacing::Log => {
                model.r_min_ohms * libm::pow(model.r_max_ohms / model.r_min_ohms, fraction)
            }
        };
        let t_float = libm::round(model.alpha_fs_per_ohm * r);
        if t_float.is_nan() || t_float < 0.0 || t_float > i64::MAX as f64 {
            points.push(SensorPoint {
                r_ohms: r,
                t: SimTime::ZERO,
                result: Err(Error::RangeExceeded),
            });
            continue;
        }
        let t = SimTime::from_fs(t_float as i64);
        let result = if t.is_positive() {
            convert(SimTime::ZERO, t, cfg, ConvertMode::Behavioral)
        } else {
            Err(Error::NonPositiveInterval)
        };
        points.push(SensorPoint {
            r_ohms: r,
            t,
            result,
        });
    }
    Ok(points)
}
