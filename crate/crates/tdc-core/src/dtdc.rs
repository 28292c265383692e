//! The assembled converter: time-to-pulse generator feeding two fine
//! interpolators and a coarse counter, with the ALU composing the output
//! code.
//!
//! The composed code is `d_out = scale_k * n_c + n_f1 - n_f2` where
//! `scale_k` is the number of taps: the coarse count is in units of
//! `t_clk`, the fine totals in units of `t_clk / scale_k`, so scaling the
//! coarse count aligns the two before the add/subtract. The converted
//! time is `d_out * t_clk / scale_k`, reported exactly in femtoseconds.
//!
//! Conversions are single-shot: the structural path builds fresh
//! simulator state per call and the behavioral path is pure, so repeated
//! conversions never interact.

use alloc::vec::Vec;

use crate::error::Error;
use crate::fine::{self, FineCode, FineTdcConfig, FineTdcPorts};
use crate::sim::{
    schedule_clock, CounterHandle, Level, LogEntry, NetId, Netlist, NetlistBuilder, Simulator,
};
use crate::time::{mul_div_round, Rational, SimTime, FS_PER_S};
use crate::tpg::{self, TpgPorts};

/// Full parameterization of the converter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TdcConfig {
    /// Clock frequency in Hz; the period is derived from it.
    pub f_clk_hz: u64,
    t_clk: SimTime,
    /// Shared configuration of both fine interpolators.
    pub fine: FineTdcConfig,
    pub coarse_width: u32,
}

impl Default for TdcConfig {
    fn default() -> Self {
        // 800 MHz system clock: t_clk = 1.25 ns exactly.
        TdcConfig::from_f_clk(800_000_000)
    }
}

impl TdcConfig {
    /// Derives the clock period as `round(1e15 / f_clk_hz)` femtoseconds.
    pub fn from_f_clk(f_clk_hz: u64) -> TdcConfig {
        assert!(f_clk_hz > 0, "clock frequency must be positive");
        let t_clk = SimTime::from_fs(((FS_PER_S as u64 + f_clk_hz / 2) / f_clk_hz) as i64);
        TdcConfig {
            f_clk_hz,
            t_clk,
            fine: FineTdcConfig::default(),
            coarse_width: 35,
        }
    }

    /// Uses an explicit clock period; the frequency field is derived for
    /// reporting.
    pub fn from_t_clk(t_clk: SimTime) -> TdcConfig {
        assert!(t_clk.is_positive(), "clock period must be positive");
        TdcConfig {
            f_clk_hz: (FS_PER_S as u64 + t_clk.fs() as u64 / 2) / t_clk.fs() as u64,
            t_clk,
            fine: FineTdcConfig::default(),
            coarse_width: 35,
        }
    }

    pub fn t_clk(&self) -> SimTime {
        self.t_clk
    }

    /// Number of taps across all lines; the coarse-to-fine code scale.
    pub fn scale_k(&self) -> u64 {
        self.fine.n_taps_total() as u64
    }

    /// Nominal bin width `t_clk / scale_k` as an exact ratio.
    pub fn lsb(&self) -> Rational {
        Rational::new(self.t_clk.fs(), self.scale_k() as i64)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !self.t_clk.is_positive() {
            return Err(Error::NonPositiveClock);
        }
        if !(1..=63).contains(&self.coarse_width) {
            return Err(Error::InvalidConfig(
                "coarse width must be in 1..=63".into(),
            ));
        }
        self.fine.validate()
    }
}

/// One completed conversion.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct ConversionResult {
    /// Coarse clock-period count of the synchronous span.
    pub n_c: u64,
    /// Fine total for the start fraction.
    pub n_f1: u64,
    /// Fine total for the stop fraction.
    pub n_f2: u64,
    /// Composed output code `scale_k * n_c + n_f1 - n_f2`.
    pub d_out: i64,
    /// `d_out * t_clk / scale_k`, rounded to the nearest femtosecond
    /// (exact whenever `t_clk` is divisible by `scale_k`).
    pub time_fs: SimTime,
    /// Latched when any counter saturated, any adder carried out, or the
    /// fixed-width ALU could not represent the code.
    pub overflow: bool,
}

impl ConversionResult {
    pub fn time_ns(&self) -> f64 {
        self.time_fs.fs() as f64 / 1e6
    }
}

/// Which implementation path a conversion runs through.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum ConvertMode {
    /// Closed-form arithmetic.
    Behavioral,
    /// Event-driven gate netlist.
    Structural,
}

/// Coarse count of a synchronous span: the number of rising edges in the
/// half-open window `[tc_start, tc_start + tc)`, which is exactly
/// `tc / t_clk`. Saturates at `2^width - 1` with a flag.
pub fn coarse_count(
    tc: SimTime,
    tc_start: SimTime,
    t_clk: SimTime,
    width: u32,
) -> Result<(u64, bool), Error> {
    if !t_clk.is_positive() {
        return Err(Error::NonPositiveClock);
    }
    if tc.is_negative()
        || tc.rem_euclid(t_clk) != SimTime::ZERO
        || tc_start.rem_euclid(t_clk) != SimTime::ZERO
    {
        return Err(Error::NotSynchronous);
    }
    let count = (tc.fs() / t_clk.fs()) as u64;
    let max = (1u64 << width) - 1;
    if count > max {
        Ok((max, true))
    } else {
        Ok((count, false))
    }
}

/// Composes the output code with width-unbounded integer arithmetic.
pub fn alu_compose(n_c: u64, n_f1: u64, n_f2: u64, scale_k: u64) -> i64 {
    let value = scale_k as i128 * n_c as i128 + n_f1 as i128 - n_f2 as i128;
    i64::try_from(value).expect("composed code exceeds i64")
}

/// Composes the code and reports whether a fixed-width datapath of
/// `width` bits (multiply, add, subtract in sequence) would have
/// represented it: the scaled-plus-fine intermediate must fit and the
/// result must be non-negative.
pub fn alu_compose_checked(
    n_c: u64,
    n_f1: u64,
    n_f2: u64,
    scale_k: u64,
    width: u32,
) -> (i64, bool) {
    let d_out = alu_compose(n_c, n_f1, n_f2, scale_k);
    let mask = (1u128 << width) - 1;
    let intermediate = scale_k as u128 * n_c as u128 + n_f1 as u128;
    let overflow = intermediate > mask || d_out < 0;
    (d_out, overflow)
}

/// Effective bin width: `t_clk` divided by the number of distinct tap
/// residues modulo `t_clk`. Equal to the nominal LSB for uniform
/// placements; duplicate residues reduce the divisor.
pub fn effective_lsb(cfg: &TdcConfig) -> Result<Rational, Error> {
    cfg.validate()?;
    let distinct = cfg.fine.distinct_residues(cfg.t_clk())?;
    Ok(Rational::new(cfg.t_clk().fs(), distinct as i64))
}

/// Converts the interval `[t_start, t_stop)` to a code and a time.
pub fn convert(
    t_start: SimTime,
    t_stop: SimTime,
    cfg: &TdcConfig,
    mode: ConvertMode,
) -> Result<ConversionResult, Error> {
    match mode {
        ConvertMode::Behavioral => convert_behavioral(t_start, t_stop, cfg),
        ConvertMode::Structural => {
            let netlist = build_dtdc_netlist(cfg)?;
            netlist.convert(t_start, t_stop)
        }
    }
}

fn check_interval(t_start: SimTime, t_stop: SimTime) -> Result<(), Error> {
    if t_start.is_negative() {
        return Err(Error::InvalidConfig("start must be non-negative".into()));
    }
    if t_stop <= t_start {
        return Err(Error::NonPositiveInterval);
    }
    Ok(())
}

fn convert_behavioral(
    t_start: SimTime,
    t_stop: SimTime,
    cfg: &TdcConfig,
) -> Result<ConversionResult, Error> {
    cfg.validate()?;
    check_interval(t_start, t_stop)?;
    let t_clk = cfg.t_clk();
    let pulses = tpg::decompose(t_start, t_stop, t_clk)?;
    let (n_c, saturated) = coarse_count(pulses.tc, pulses.tc_start, t_clk, cfg.coarse_width)?;
    if saturated {
        return Err(Error::RangeExceeded);
    }
    let f1 = fine::count_behavioral(pulses.tf1_start, pulses.tf1, &cfg.fine, t_clk)?;
    let f2 = fine::count_behavioral(pulses.tf2_start, pulses.tf2, &cfg.fine, t_clk)?;
    Ok(compose_result(cfg, n_c, &f1, &f2))
}

fn compose_result(cfg: &TdcConfig, n_c: u64, f1: &FineCode, f2: &FineCode) -> ConversionResult {
    let k = cfg.scale_k();
    let (d_out, alu_overflow) =
        alu_compose_checked(n_c, f1.total, f2.total, k, cfg.fine.adder_width);
    let time_fs = SimTime::from_fs(mul_div_round(d_out, cfg.t_clk().fs(), k as i64));
    ConversionResult {
        n_c,
        n_f1: f1.total,
        n_f2: f2.total,
        d_out,
        time_fs,
        overflow: f1.overflow | f2.overflow | alu_overflow,
    }
}

/// The full structural netlist with the handles needed to run and read a
/// conversion.
pub struct DtdcNetlist {
    pub netlist: Netlist,
    pub tin: NetId,
    pub clk: NetId,
    pub tpg: TpgPorts,
    pub fine1: FineTdcPorts,
    pub fine2: FineTdcPorts,
    pub coarse: CounterHandle,
    cfg: TdcConfig,
}

/// Assembles the converter netlist: TPG, two fine interpolators fed by
/// `tf1`/`tf2`, and the coarse counter gated by `tc`.
pub fn build_dtdc_netlist(cfg: &TdcConfig) -> Result<DtdcNetlist, Error> {
    cfg.validate()?;
    let mut builder = NetlistBuilder::new();
    let vcc = builder.net_with_init("vcc", Level::High);
    let tin = builder.net("tin");
    let clk = builder.clock_net("clk");
    let tpg_ports = tpg::instantiate(&mut builder, tin, clk, vcc, "tpg_");
    let fine1 = fine::instantiate(&mut builder, tpg_ports.tf1, clk, vcc, &cfg.fine, "f1_")?;
    let fine2 = fine::instantiate(&mut builder, tpg_ports.tf2, clk, vcc, &cfg.fine, "f2_")?;
    let coarse = builder.counter(clk, vcc, tpg_ports.tc, cfg.coarse_width);
    Ok(DtdcNetlist {
        netlist: builder.build()?,
        tin,
        clk,
        tpg: tpg_ports,
        fine1,
        fine2,
        coarse,
        cfg: cfg.clone(),
    })
}

impl DtdcNetlist {
    /// Runs one single-shot structural conversion on fresh simulator
    /// state. Field-for-field comparable with the behavioral mode.
    pub fn convert(&self, t_start: SimTime, t_stop: SimTime) -> Result<ConversionResult, Error> {
        self.run(t_start, t_stop, false).map(|(r, _)| r)
    }

    /// As [`DtdcNetlist::convert`], additionally returning the full
    /// ordered transition log of the run.
    pub fn convert_with_log(
        &self,
        t_start: SimTime,
        t_stop: SimTime,
    ) -> Result<(ConversionResult, Vec<LogEntry>), Error> {
        self.run(t_start, t_stop, true)
            .map(|(r, log)| (r, log.unwrap_or_default()))
    }

    fn run(
        &self,
        t_start: SimTime,
        t_stop: SimTime,
        with_log: bool,
    ) -> Result<(ConversionResult, Option<Vec<LogEntry>>), Error> {
        check_interval(t_start, t_stop)?;
        let t_clk = self.cfg.t_clk();
        // Closed form sizes the stimulus window only: the last fine pulse
        // ends one period after the stop-side clock edge and still has to
        // traverse the longest buffer chain.
        let pulses = tpg::decompose(t_start, t_stop, t_clk)?;
        let max_tap = self.max_tap_delay()?;
        let end = (pulses.tc_start + pulses.tc + t_clk + max_tap).ceil_multiple(t_clk) + t_clk;

        let mut sim = Simulator::new(&self.netlist);
        if with_log {
            sim.enable_log();
        }
        schedule_clock(&mut sim, self.clk, t_clk, end)?;
        sim.schedule(self.tin, Level::High, t_start)?;
        sim.schedule(self.tin, Level::Low, t_stop)?;
        sim.run_until(end);

        let (n_c, coarse_saturated) = sim.counter_value(self.coarse);
        if coarse_saturated {
            return Err(Error::RangeExceeded);
        }
        let f1 = fine::read_code(&sim, &self.fine1)?;
        let f2 = fine::read_code(&sim, &self.fine2)?;
        let result = compose_result(&self.cfg, n_c, &f1, &f2);
        let log = with_log.then(|| sim.log().to_vec());
        Ok((result, log))
    }

    fn max_tap_delay(&self) -> Result<SimTime, Error> {
        let mut max = SimTime::ZERO;
        for l in 0..self.cfg.fine.n_lines {
            for k in 0..self.cfg.fine.taps_per_line {
                max = max.max(self.cfg.fine.tap_delay(l, k)?);
            }
        }
        Ok(max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_derives_the_clock() {
        let cfg = TdcConfig::default();
        assert_eq!(cfg.f_clk_hz, 800_000_000);
        assert_eq!(cfg.t_clk(), SimTime::from_fs(1_250_000));
        assert_eq!(cfg.scale_k(), 80);
        assert_eq!(cfg.lsb().as_exact_fs(), Some(15_625));
    }

    #[test]
    fn coarse_count_examples() {
        let t_clk = SimTime::from_fs(1_250_000);
        assert_eq!(
            coarse_count(SimTime::from_ns(100), SimTime::from_ns(830), t_clk, 35).unwrap(),
            (80, false)
        );
        assert_eq!(
            coarse_count(SimTime::ZERO, SimTime::ZERO, t_clk, 35).unwrap(),
            (0, false)
        );
        assert_eq!(
            coarse_count(SimTime::from_fs(3_750_000), SimTime::ZERO, t_clk, 35).unwrap(),
            (3, false)
        );
    }

    #[test]
    fn coarse_count_rejects_unaligned_windows() {
        let t_clk = SimTime::from_fs(1_250_000);
        assert_eq!(
            coarse_count(SimTime::from_fs(17), SimTime::ZERO, t_clk, 35),
            Err(Error::NotSynchronous)
        );
        assert_eq!(
            coarse_count(t_clk, SimTime::from_fs(1), t_clk, 35),
            Err(Error::NotSynchronous)
        );
    }

    #[test]
    fn coarse_count_saturates_with_flag() {
        let t_clk = SimTime::from_fs(10);
        assert_eq!(
            coarse_count(SimTime::from_fs(50), SimTime::ZERO, t_clk, 2).unwrap(),
            (3, true)
        );
    }

    #[test]
    fn alu_compose_examples() {
        assert_eq!(alu_compose(80, 80, 80, 80), 6400);
        assert_eq!(alu_compose(0, 123, 123, 80), 0);
        assert_eq!(alu_compose(1, 0, 80, 80), 0);
    }

    #[test]
    fn alu_checked_flags_width_misses() {
        let (d, of) = alu_compose_checked(80, 80, 80, 80, 35);
        assert_eq!((d, of), (6400, false));
        // 4-bit datapath cannot hold 80 * 1 + 0
        let (_, of) = alu_compose_checked(1, 0, 0, 80, 4);
        assert!(of);
        // negative composed code flags as a borrow
        let (d, of) = alu_compose_checked(0, 0, 5, 80, 35);
        assert_eq!(d, -5);
        assert!(of);
    }

    #[test]
    fn hundred_ns_interval_reports_100ns() {
        let cfg = TdcConfig::default();
        let r = convert(
            SimTime::from_ns(830),
            SimTime::from_ns(930),
            &cfg,
            ConvertMode::Behavioral,
        )
        .unwrap();
        assert_eq!(r.n_c, 80);
        assert_eq!(r.n_f1, 80);
        assert_eq!(r.n_f2, 80);
        assert_eq!(r.d_out, 6400);
        assert_eq!(r.time_fs, SimTime::from_ns(100));
        assert_eq!(r.time_ns(), 100.0);
        assert!(!r.overflow);
    }

    #[test]
    fn one_clock_period_on_the_grid() {
        let cfg = TdcConfig::default();
        let r = convert(
            SimTime::ZERO,
            SimTime::from_fs(1_250_000),
            &cfg,
            ConvertMode::Behavioral,
        )
        .unwrap();
        assert_eq!(r.d_out, 80);
        assert_eq!(r.time_fs, SimTime::from_fs(1_250_000));
    }

    #[test]
    fn off_grid_100ns_is_exact_here() {
        // raw fractions of 950,000 fs quantize identically on both sides
        let cfg = TdcConfig::default();
        let r = convert(
            SimTime::from_fs(300_000),
            SimTime::from_fs(100_300_000),
            &cfg,
            ConvertMode::Behavioral,
        )
        .unwrap();
        assert_eq!(r.n_c, 80);
        assert_eq!(r.n_f1, 140);
        assert_eq!(r.n_f2, 140);
        assert_eq!(r.d_out, 6400);
        assert_eq!(r.time_fs, SimTime::from_ns(100));
    }

    #[test]
    fn rejects_empty_interval() {
        let cfg = TdcConfig::default();
        assert_eq!(
            convert(
                SimTime::from_ns(5),
                SimTime::from_ns(5),
                &cfg,
                ConvertMode::Behavioral
            ),
            Err(Error::NonPositiveInterval)
        );
    }

    #[test]
    fn coarse_saturation_is_range_exceeded() {
        let cfg = TdcConfig {
            coarse_width: 3,
            ..TdcConfig::default()
        };
        let r = convert(
            SimTime::ZERO,
            SimTime::from_ns(100), // 80 periods > 2^3 - 1
            &cfg,
            ConvertMode::Behavioral,
        );
        assert_eq!(r, Err(Error::RangeExceeded));
    }

    #[test]
    fn effective_lsb_defaults_and_single_line() {
        let cfg = TdcConfig::default();
        assert_eq!(effective_lsb(&cfg).unwrap().as_exact_fs(), Some(15_625));

        let mut one_line = TdcConfig::default();
        one_line.fine.n_lines = 1;
        one_line.fine.line_offset = SimTime::ZERO;
        assert_eq!(
            effective_lsb(&one_line).unwrap().as_exact_fs(),
            Some(62_500)
        );
    }

    #[test]
    fn duplicate_residue_shrinks_the_divisor() {
        let mut cfg = TdcConfig::default();
        // push the last tap of line 0 (residue 0) onto residue 62,500
        let mut deltas = alloc::vec![SimTime::ZERO; 80];
        deltas[19] = SimTime::from_fs(62_500);
        cfg.fine.tap_perturbations = Some(deltas);
        let lsb = effective_lsb(&cfg).unwrap();
        assert_eq!(lsb, Rational::new(1_250_000, 79));
    }

    #[test]
    fn structural_matches_behavioral_on_the_100ns_interval() {
        let cfg = TdcConfig::default();
        let behavioral = convert(
            SimTime::from_ns(830),
            SimTime::from_ns(930),
            &cfg,
            ConvertMode::Behavioral,
        )
        .unwrap();
        let structural = convert(
            SimTime::from_ns(830),
            SimTime::from_ns(930),
            &cfg,
            ConvertMode::Structural,
        )
        .unwrap();
        assert_eq!(structural, behavioral);
    }

    #[test]
    fn clock_shift_leaves_code_unchanged() {
        let cfg = TdcConfig::default();
        let t_clk = cfg.t_clk();
        let base = convert(
            SimTime::from_fs(300_001),
            SimTime::from_fs(5_431_777),
            &cfg,
            ConvertMode::Behavioral,
        )
        .unwrap();
        for k in 1..4 {
            let shift = SimTime::from_fs(t_clk.fs() * k);
            let shifted = convert(
                SimTime::from_fs(300_001) + shift,
                SimTime::from_fs(5_431_777) + shift,
                &cfg,
                ConvertMode::Behavioral,
            )
            .unwrap();
            assert_eq!(shifted.d_out, base.d_out);
        }
    }
}
