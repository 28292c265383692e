//! Multiple-delay-line fine interpolator.
//!
//! A one-shot pulse propagates down `n_lines` parallel buffer chains with
//! `taps_per_line` taps each. Every tap gates a counter that counts system
//! clock rising edges while the delayed pulse at that tap is high; the
//! per-line counts fold through a chain of two-input adders and a
//! multiplexer reads the per-line sums out.
//!
//! Resolution comes from delay wrapping: lines are staggered by
//! `line_offset` so that the tap delays' residues modulo the clock period
//! tile the period. With the defaults (4 lines x 20 taps, 62,500 fs cells,
//! 15,625 fs stagger against a 1,250,000 fs clock) the 80 residues are
//! uniformly spaced and one code step corresponds to t_clk / 80.
//!
//! The behavioral path computes each tap's count in closed form: the
//! number of clock multiples inside the half-open window
//! `[pulse_start + tap_delay, pulse_start + tap_delay + pulse_width)`.
//! The structural path schedules the same pulse through a real buffer
//! chain netlist; the two must agree exactly on every stimulus.

use alloc::format;
use alloc::vec::Vec;

use crate::error::Error;
use crate::logic::{adder_chain_sum, AdderSpec};
use crate::rng::gaussian_perturbations;
use crate::sim::{
    schedule_clock, CounterHandle, Level, MuxHandle, NetId, Netlist, NetlistBuilder, Simulator,
    ValueSrc,
};
use crate::time::{multiples_in, SimTime};

/// Full parameterization of one fine interpolator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FineTdcConfig {
    pub n_lines: u32,
    pub taps_per_line: u32,
    /// Delay of one buffer cell.
    pub cell_delay: SimTime,
    /// Extra delay of line `l` relative to line 0, applied `l` times.
    pub line_offset: SimTime,
    pub counter_width: u32,
    pub adder_width: u32,
    /// Additive per-tap delay deviations, row-major `[line][tap]`; `None`
    /// means all zero.
    pub tap_perturbations: Option<Vec<SimTime>>,
    /// Seed the perturbation list was generated from, when it was.
    pub seed: Option<u64>,
}

impl Default for FineTdcConfig {
    fn default() -> Self {
        FineTdcConfig {
            n_lines: 4,
            taps_per_line: 20,
            cell_delay: SimTime::from_fs(62_500),
            line_offset: SimTime::from_fs(15_625),
            counter_width: 35,
            adder_width: 35,
            tap_perturbations: None,
            seed: None,
        }
    }
}

impl FineTdcConfig {
    pub fn n_taps_total(&self) -> u32 {
        self.n_lines * self.taps_per_line
    }

    /// Replaces the perturbation list with seeded Gaussian deltas of
    /// standard deviation `sigma_fs`, rounded to whole femtoseconds.
    pub fn with_gaussian_perturbations(mut self, sigma_fs: f64, seed: u64) -> Self {
        self.tap_perturbations = Some(gaussian_perturbations(
            self.n_taps_total() as usize,
            sigma_fs,
            seed,
        ));
        self.seed = Some(seed);
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.n_lines < 1 {
            return Err(Error::InvalidConfig("n_lines must be at least 1".into()));
        }
        if self.taps_per_line < 1 {
            return Err(Error::InvalidConfig(
                "taps_per_line must be at least 1".into(),
            ));
        }
        if !self.cell_delay.is_positive() {
            return Err(Error::InvalidConfig("cell_delay must be positive".into()));
        }
        if self.line_offset.is_negative() {
            return Err(Error::InvalidConfig(
                "line_offset must be non-negative".into(),
            ));
        }
        if !(1..=63).contains(&self.counter_width) || !(1..=63).contains(&self.adder_width) {
            return Err(Error::InvalidConfig(
                "counter/adder widths must be in 1..=63".into(),
            ));
        }
        if let Some(perturbations) = &self.tap_perturbations {
            if perturbations.len() != self.n_taps_total() as usize {
                return Err(Error::InvalidConfig(format!(
                    "expected {} tap perturbations, got {}",
                    self.n_taps_total(),
                    perturbations.len()
                )));
            }
        }
        // Per-buffer delays must stay positive, i.e. tap delays strictly
        // increase along each line and the first tap is reachable.
        for l in 0..self.n_lines {
            let mut previous = SimTime::ZERO;
            for k in 0..self.taps_per_line {
                let d = self.tap_delay(l, k)?;
                if d <= previous {
                    return Err(Error::InvalidConfig(format!(
                        "perturbations make buffer (line {l}, tap {k}) non-causal"
                    )));
                }
                previous = d;
            }
        }
        Ok(())
    }

    /// Total delay from the interpolator input to tap `k` of line `l`:
    /// `l * line_offset + (k + 1) * cell_delay + perturbation`.
    pub fn tap_delay(&self, l: u32, k: u32) -> Result<SimTime, Error> {
        if l >= self.n_lines || k >= self.taps_per_line {
            return Err(Error::IndexOutOfRange {
                index: (l as usize) * self.taps_per_line as usize + k as usize,
                len: self.n_taps_total() as usize,
            });
        }
        let base = self
            .line_offset
            .checked_mul(l as i64)
            .zip(self.cell_delay.checked_mul((k + 1) as i64))
            .and_then(|(o, c)| o.checked_add(c))
            .ok_or_else(|| Error::InvalidConfig("tap delay overflows".into()))?;
        let delta = match &self.tap_perturbations {
            Some(p) => p[(l * self.taps_per_line + k) as usize],
            None => SimTime::ZERO,
        };
        base.checked_add(delta)
            .ok_or_else(|| Error::InvalidConfig("tap delay overflows".into()))
    }

    /// All tap delays reduced modulo the clock period, row-major.
    pub fn residues(&self, t_clk: SimTime) -> Result<Vec<SimTime>, Error> {
        if !t_clk.is_positive() {
            return Err(Error::NonPositiveClock);
        }
        let mut out = Vec::with_capacity(self.n_taps_total() as usize);
        for l in 0..self.n_lines {
            for k in 0..self.taps_per_line {
                out.push(self.tap_delay(l, k)?.rem_euclid(t_clk));
            }
        }
        Ok(out)
    }

    /// Number of distinct residues; the period divided by this is the
    /// effective bin width.
    pub fn distinct_residues(&self, t_clk: SimTime) -> Result<usize, Error> {
        let mut residues = self.residues(t_clk)?;
        residues.sort_unstable();
        residues.dedup();
        Ok(residues.len())
    }

    fn max_tap_delay(&self) -> Result<SimTime, Error> {
        let mut max = SimTime::ZERO;
        for l in 0..self.n_lines {
            for k in 0..self.taps_per_line {
                max = max.max(self.tap_delay(l, k)?);
            }
        }
        Ok(max)
    }
}

/// One fine measurement: the per-tap counter matrix, the per-line sums as
/// read through the adder chains, and the grand total.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FineCode {
    pub per_tap: Vec<Vec<u64>>,
    pub per_line_sum: Vec<u64>,
    pub total: u64,
    pub overflow: bool,
}

/// Closed-form fine measurement of a pulse that starts at `pulse_start`
/// (non-negative) and stays high for `pulse_width`.
pub fn count_behavioral(
    pulse_start: SimTime,
    pulse_width: SimTime,
    cfg: &FineTdcConfig,
    t_clk: SimTime,
) -> Result<FineCode, Error> {
    if !t_clk.is_positive() {
        return Err(Error::NonPositiveClock);
    }
    if pulse_width.is_negative() {
        return Err(Error::NonPositiveInterval);
    }
    if pulse_start.is_negative() {
        return Err(Error::InvalidConfig(
            "pulse start must be non-negative".into(),
        ));
    }
    cfg.validate()?;

    let max_count = (1u64 << cfg.counter_width) - 1;
    let mut per_tap = Vec::with_capacity(cfg.n_lines as usize);
    let mut overflow = false;
    for l in 0..cfg.n_lines {
        let mut line = Vec::with_capacity(cfg.taps_per_line as usize);
        for k in 0..cfg.taps_per_line {
            let from = pulse_start + cfg.tap_delay(l, k)?;
            let to = from + pulse_width;
            let count = multiples_in(from, to, t_clk) as u64;
            if count > max_count {
                overflow = true;
                line.push(max_count);
            } else {
                line.push(count);
            }
        }
        per_tap.push(line);
    }
    Ok(assemble_code(per_tap, cfg.adder_width, overflow))
}

/// Folds a per-tap matrix into per-line sums (through the adder chains)
/// and the grand total.
fn assemble_code(per_tap: Vec<Vec<u64>>, adder_width: u32, mut overflow: bool) -> FineCode {
    let spec = AdderSpec::new(adder_width);
    let mut per_line_sum = Vec::with_capacity(per_tap.len());
    for line in &per_tap {
        let (sum, carried) = adder_chain_sum(line, spec);
        overflow |= carried;
        per_line_sum.push(sum);
    }
    let wide: u128 = per_line_sum.iter().map(|&v| v as u128).sum();
    let total = match u64::try_from(wide) {
        Ok(t) => t,
        Err(_) => {
            overflow = true;
            u64::MAX
        }
    };
    FineCode {
        per_tap,
        per_line_sum,
        total,
        overflow,
    }
}

/// Grand total over the per-line sums, with the overflow flag carried
/// through. The multiplexer readout selects each line in order; summing
/// the selections reproduces `code.total`.
pub fn fine_total(code: &FineCode) -> (u64, bool) {
    let wide: u128 = code.per_line_sum.iter().map(|&v| v as u128).sum();
    match u64::try_from(wide) {
        Ok(t) => (t, code.overflow),
        Err(_) => (u64::MAX, true),
    }
}

/// Handles into one instantiated fine interpolator.
#[derive(Clone, Debug)]
pub struct FineTdcPorts {
    /// Counter handles, `[line][tap]`.
    pub counters: Vec<Vec<CounterHandle>>,
    /// Final adder (or lone counter) of each line.
    pub line_outputs: Vec<ValueSrc>,
    pub mux: MuxHandle,
}

/// Adds one fine interpolator to `builder`: buffer chains from
/// `pulse_in`, one gated counter per tap, per-line adder chains and the
/// readout multiplexer. `enable` is the shared counter-array enable.
pub fn instantiate(
    builder: &mut NetlistBuilder,
    pulse_in: NetId,
    clk: NetId,
    enable: NetId,
    cfg: &FineTdcConfig,
    prefix: &str,
) -> Result<FineTdcPorts, Error> {
    cfg.validate()?;
    let mut counters = Vec::with_capacity(cfg.n_lines as usize);
    let mut line_outputs = Vec::with_capacity(cfg.n_lines as usize);
    for l in 0..cfg.n_lines {
        let mut previous_delay = SimTime::ZERO;
        let mut chain_input = pulse_in;
        let mut line_counters = Vec::with_capacity(cfg.taps_per_line as usize);
        for k in 0..cfg.taps_per_line {
            let tap_delay = cfg.tap_delay(l, k)?;
            let tap = builder.net(&format!("{prefix}l{l}_tap{k}"));
            builder.buffer(chain_input, tap, tap_delay - previous_delay);
            line_counters.push(builder.counter(clk, enable, tap, cfg.counter_width));
            chain_input = tap;
            previous_delay = tap_delay;
        }
        let mut acc = ValueSrc::Counter(line_counters[0]);
        for &c in &line_counters[1..] {
            acc = builder.adder(cfg.adder_width, acc, ValueSrc::Counter(c));
        }
        counters.push(line_counters);
        line_outputs.push(acc);
    }
    let mux = builder.mux(line_outputs.clone());
    Ok(FineTdcPorts {
        counters,
        line_outputs,
        mux,
    })
}

/// A standalone fine interpolator netlist with its stimulus nets.
pub struct FineTdcNetlist {
    pub netlist: Netlist,
    pub pulse_in: NetId,
    pub clk: NetId,
    pub ports: FineTdcPorts,
    pub t_clk: SimTime,
    cfg: FineTdcConfig,
}

/// Builds a self-contained fine interpolator netlist.
pub fn build_fine_tdc_netlist(
    cfg: &FineTdcConfig,
    t_clk: SimTime,
) -> Result<FineTdcNetlist, Error> {
    if !t_clk.is_positive() {
        return Err(Error::NonPositiveClock);
    }
    let mut builder = NetlistBuilder::new();
    let enable = builder.net_with_init("enable", Level::High);
    let pulse_in = builder.net("pulse_in");
    let clk = builder.clock_net("clk");
    let ports = instantiate(&mut builder, pulse_in, clk, enable, cfg, "fine_")?;
    Ok(FineTdcNetlist {
        netlist: builder.build()?,
        pulse_in,
        clk,
        ports,
        t_clk,
        cfg: cfg.clone(),
    })
}

impl FineTdcNetlist {
    /// Drives one pulse through the buffer chains and reads the code back
    /// through the adder chains and multiplexer. Comparable field by field
    /// with [`count_behavioral`].
    pub fn measure(&self, pulse_start: SimTime, pulse_width: SimTime) -> Result<FineCode, Error> {
        if pulse_width.is_negative() {
            return Err(Error::NonPositiveInterval);
        }
        if pulse_start.is_negative() {
            return Err(Error::InvalidConfig(
                "pulse start must be non-negative".into(),
            ));
        }
        let end = (pulse_start + pulse_width + self.cfg.max_tap_delay()?).ceil_multiple(self.t_clk)
            + self.t_clk;

        let mut sim = Simulator::new(&self.netlist);
        schedule_clock(&mut sim, self.clk, self.t_clk, end)?;
        sim.schedule(self.pulse_in, Level::High, pulse_start)?;
        sim.schedule(self.pulse_in, Level::Low, pulse_start + pulse_width)?;
        sim.run_until(end);

        read_code(&sim, &self.ports)
    }
}

/// Assembles a [`FineCode`] from a finished simulation, reading per-line
/// sums through the multiplexer in selection order.
pub fn read_code(sim: &Simulator<'_>, ports: &FineTdcPorts) -> Result<FineCode, Error> {
    let mut per_tap = Vec::with_capacity(ports.counters.len());
    let mut overflow = false;
    for line in &ports.counters {
        let mut values = Vec::with_capacity(line.len());
        for &counter in line {
            let (value, saturated) = sim.counter_value(counter);
            overflow |= saturated;
            values.push(value);
        }
        per_tap.push(values);
    }
    let mut per_line_sum = Vec::with_capacity(ports.counters.len());
    for sel in 0..ports.counters.len() {
        let (sum, carried) = sim.read_mux(ports.mux, sel)?;
        overflow |= carried;
        per_line_sum.push(sum);
    }
    let wide: u128 = per_line_sum.iter().map(|&v| v as u128).sum();
    let total = match u64::try_from(wide) {
        Ok(t) => t,
        Err(_) => {
            overflow = true;
            u64::MAX
        }
    };
    Ok(FineCode {
        per_tap,
        per_line_sum,
        total,
        overflow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const T_CLK: SimTime = SimTime::from_fs(1_250_000);

    fn toy_cfg() -> FineTdcConfig {
        FineTdcConfig {
            n_lines: 2,
            taps_per_line: 3,
            cell_delay: SimTime::from_fs(400_000),
            line_offset: SimTime::from_fs(200_000),
            ..FineTdcConfig::default()
        }
    }

    #[test]
    fn tap_delay_formula() {
        let cfg = FineTdcConfig::default();
        assert_eq!(cfg.tap_delay(0, 0).unwrap(), SimTime::from_fs(62_500));
        assert_eq!(cfg.tap_delay(3, 19).unwrap(), SimTime::from_fs(1_296_875));
        assert!(matches!(
            cfg.tap_delay(4, 0),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn default_residues_tile_the_period() {
        // brute-force enumeration of {tap_delay mod t_clk}
        let cfg = FineTdcConfig::default();
        let mut residues = cfg.residues(T_CLK).unwrap();
        residues.sort_unstable();
        assert_eq!(residues.len(), 80);
        residues.dedup();
        assert_eq!(residues.len(), 80, "residues must be distinct");
        for (i, r) in residues.iter().enumerate() {
            assert_eq!(*r, SimTime::from_fs(15_625 * i as i64));
        }
        assert_eq!(cfg.distinct_residues(T_CLK).unwrap(), 80);
    }

    #[test]
    fn pulse_of_one_period_counts_every_tap_once() {
        let cfg = FineTdcConfig::default();
        for start in [0i64, 1, 300_000, 1_249_999, 5_000_000] {
            let code = count_behavioral(SimTime::from_fs(start), T_CLK, &cfg, T_CLK).unwrap();
            assert!(
                code.per_tap.iter().flatten().all(|&c| c == 1),
                "start {start}"
            );
            assert_eq!(code.total, 80);
            assert!(!code.overflow);
        }
    }

    #[test]
    fn zero_width_pulse_counts_nothing() {
        let cfg = FineTdcConfig::default();
        let code = count_behavioral(SimTime::from_fs(123), SimTime::ZERO, &cfg, T_CLK).unwrap();
        assert_eq!(code.total, 0);
    }

    #[test]
    fn one_and_a_half_periods_split_forty_forty() {
        let cfg = FineTdcConfig::default();
        let code =
            count_behavioral(SimTime::ZERO, SimTime::from_fs(1_875_000), &cfg, T_CLK).unwrap();
        let twos = code.per_tap.iter().flatten().filter(|&&c| c == 2).count();
        let ones = code.per_tap.iter().flatten().filter(|&&c| c == 1).count();
        assert_eq!((twos, ones), (40, 40));
        assert_eq!(code.total, 120);
    }

    #[test]
    fn behavioral_matches_brute_force_enumeration() {
        // independent oracle: walk every clock edge and test window
        // membership directly
        let cfg = toy_cfg();
        for (start, width) in [(0i64, 1_875_000i64), (777, 3_000_000), (1_249_999, 1)] {
            let code = count_behavioral(
                SimTime::from_fs(start),
                SimTime::from_fs(width),
                &cfg,
                T_CLK,
            )
            .unwrap();
            for l in 0..cfg.n_lines {
                for k in 0..cfg.taps_per_line {
                    let a = start + cfg.tap_delay(l, k).unwrap().fs();
                    let b = a + width;
                    let mut expected = 0u64;
                    let mut edge = 0i64;
                    while edge < b {
                        if edge >= a {
                            expected += 1;
                        }
                        edge += T_CLK.fs();
                    }
                    assert_eq!(code.per_tap[l as usize][k as usize], expected);
                }
            }
        }
    }

    #[test]
    fn period_additivity() {
        let cfg = FineTdcConfig::default();
        for width in [0i64, 1, 500_000, 1_200_000] {
            let base = count_behavioral(SimTime::from_fs(42), SimTime::from_fs(width), &cfg, T_CLK)
                .unwrap();
            let plus_period = count_behavioral(
                SimTime::from_fs(42),
                SimTime::from_fs(width) + T_CLK,
                &cfg,
                T_CLK,
            )
            .unwrap();
            assert_eq!(plus_period.total, base.total + 80);
        }
    }

    #[test]
    fn per_line_sums_and_grand_total() {
        let code = FineCode {
            per_tap: alloc::vec![alloc::vec![5; 4]; 4],
            per_line_sum: alloc::vec![20, 20, 20, 20],
            total: 80,
            overflow: false,
        };
        assert_eq!(fine_total(&code), (80, false));
    }

    #[test]
    fn default_netlist_component_counts() {
        let net = build_fine_tdc_netlist(&FineTdcConfig::default(), T_CLK).unwrap();
        let counts = net.netlist.component_counts();
        assert_eq!(counts.buffers, 80);
        assert_eq!(counts.counters, 80);
        assert_eq!(counts.adders, 76); // 19 per line
        assert_eq!(counts.muxes, 1);
    }

    #[test]
    fn toy_netlist_component_counts() {
        let net = build_fine_tdc_netlist(&toy_cfg(), T_CLK).unwrap();
        let counts = net.netlist.component_counts();
        assert_eq!(counts.buffers, 6);
        assert_eq!(counts.counters, 6);
        assert_eq!(counts.adders, 4); // 2 per line
        assert_eq!(counts.muxes, 1);
    }

    #[test]
    fn structural_equals_behavioral_on_sample_pulses() {
        let cfg = toy_cfg();
        let net = build_fine_tdc_netlist(&cfg, T_CLK).unwrap();
        for (start, width) in [
            (0i64, 1_250_000i64),
            (300_000, 1_875_000),
            (1_250_000, 2_500_000),
            (999_999, 1),
            (123, 0),
        ] {
            let structural = net
                .measure(SimTime::from_fs(start), SimTime::from_fs(width))
                .unwrap();
            let behavioral = count_behavioral(
                SimTime::from_fs(start),
                SimTime::from_fs(width),
                &cfg,
                T_CLK,
            )
            .unwrap();
            assert_eq!(structural, behavioral, "start {start} width {width}");
        }
    }

    #[test]
    fn code_transitions_are_spaced_one_effective_bin_apart() {
        // step the pulse width at 1 fs resolution across two bins: the
        // total must step by one count exactly every t_clk / 80 fs
        let cfg = FineTdcConfig::default();
        let base = T_CLK.fs();
        let mut transitions = Vec::new();
        let mut previous =
            count_behavioral(SimTime::from_fs(777), SimTime::from_fs(base), &cfg, T_CLK)
                .unwrap()
                .total;
        for width in base + 1..=base + 2 * 15_625 {
            let total =
                count_behavioral(SimTime::from_fs(777), SimTime::from_fs(width), &cfg, T_CLK)
                    .unwrap()
                    .total;
            assert!(total == previous || total == previous + 1);
            if total == previous + 1 {
                transitions.push(width);
            }
            previous = total;
        }
        assert_eq!(transitions.len(), 2);
        assert_eq!(transitions[1] - transitions[0], 15_625);
    }

    #[test]
    fn counter_saturation_flags_overflow() {
        let cfg = FineTdcConfig {
            counter_width: 2,
            ..toy_cfg()
        };
        // 5 periods: every tap would count 5, above the width-2 maximum
        let code =
            count_behavioral(SimTime::ZERO, SimTime::from_fs(5 * T_CLK.fs()), &cfg, T_CLK).unwrap();
        assert!(code.overflow);
        assert!(code.per_tap.iter().flatten().all(|&c| c == 3));
    }

    #[test]
    fn perturbation_list_length_is_checked() {
        let cfg = FineTdcConfig {
            tap_perturbations: Some(alloc::vec![SimTime::ZERO; 5]),
            ..toy_cfg()
        };
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn non_causal_perturbation_rejected() {
        let mut perturbations = alloc::vec![SimTime::ZERO; 6];
        perturbations[1] = SimTime::from_fs(-400_001); // pushes tap 1 before tap 0
        let cfg = FineTdcConfig {
            tap_perturbations: Some(perturbations),
            ..toy_cfg()
        };
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn gaussian_perturbations_are_recorded_with_seed() {
        let cfg = FineTdcConfig::default().with_gaussian_perturbations(500.0, 11);
        assert_eq!(cfg.seed, Some(11));
        assert_eq!(cfg.tap_perturbations.as_ref().unwrap().len(), 80);
        cfg.validate().unwrap();
    }
}
