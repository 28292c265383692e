//! Time-to-pulse generation.
//!
//! An input interval `[t_start, t_stop)` is segmented into a
//! clock-synchronous span `tc` and two fractional pulses `tf1`/`tf2`
//! measured from each endpoint to the next clock edge at or after it.
//! Both fractional pulses are extended by one clock period so the fine
//! interpolators never see a pulse narrower than `t_clk`, and the
//! identity `tc + tf1 - tf2 = t_stop - t_start` holds exactly.
//!
//! The module provides the closed-form decomposition and a structural
//! gate network with the same contract. In the gate network the input
//! pulse clocks a latch pair (rising edge for start, the inverted input's
//! rising edge for stop); two synchronizer flip-flops align each latched
//! event to the clock grid, a second pair delays those by one period, and
//! the outputs fall out of two NOR gates and one XOR:
//!
//! * `tf1 = NOR(start_latch.qn, q1_delayed)` — high from `t_start` until
//!   one period after the first clock edge at/after `t_start`,
//! * `tf2` likewise for the stop event,
//! * `tc = XOR(q1, q2)` — high for the whole synchronous span.

use alloc::format;

use crate::error::Error;
use crate::sim::{schedule_clock, Level, LogEntry, NetId, Netlist, NetlistBuilder, Simulator};
use crate::time::SimTime;

/// The three pulses produced from one input interval, with their absolute
/// start times.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct TpgOutput {
    /// Width of the clock-synchronous pulse; an exact multiple of `t_clk`.
    pub tc: SimTime,
    /// Width of the extended start fraction, in `[t_clk, 2*t_clk)`.
    pub tf1: SimTime,
    /// Width of the extended stop fraction, in `[t_clk, 2*t_clk)`.
    pub tf2: SimTime,
    /// First clock edge at or after `t_start`.
    pub tc_start: SimTime,
    pub tf1_start: SimTime,
    pub tf2_start: SimTime,
}

/// Closed-form decomposition of an interval against a clock whose rising
/// edges sit at every non-negative multiple of `t_clk`.
///
/// An endpoint that lands exactly on a clock edge resolves to that edge
/// (raw fraction zero), matching the gate network's behavior for data
/// edges coincident with a clock edge.
pub fn decompose(t_start: SimTime, t_stop: SimTime, t_clk: SimTime) -> Result<TpgOutput, Error> {
    if !t_clk.is_positive() {
        return Err(Error::NonPositiveClock);
    }
    if t_stop <= t_start {
        return Err(Error::NonPositiveInterval);
    }
    let edge1 = t_start.ceil_multiple(t_clk);
    let edge2 = t_stop.ceil_multiple(t_clk);
    Ok(TpgOutput {
        tc: edge2 - edge1,
        tf1: (edge1 - t_start) + t_clk,
        tf2: (edge2 - t_stop) + t_clk,
        tc_start: edge1,
        tf1_start: t_start,
        tf2_start: t_stop,
    })
}

/// Nets exposed by one instantiated time-to-pulse generator.
#[derive(Copy, Clone, Debug)]
pub struct TpgPorts {
    pub tf1: NetId,
    pub tf2: NetId,
    pub tc: NetId,
    /// Start event synchronized to the clock grid (rises at `tc_start`).
    pub q1: NetId,
    /// Stop event synchronized to the clock grid.
    pub q2: NetId,
}

/// Adds a time-to-pulse generator to `builder`, reading the input pulse
/// on `tin` and the system clock on `clk`. `vcc` must be a net tied high.
pub fn instantiate(
    builder: &mut NetlistBuilder,
    tin: NetId,
    clk: NetId,
    vcc: NetId,
    prefix: &str,
) -> TpgPorts {
    let tin_n = builder.net(&format!("{prefix}tin_n"));
    let start = builder.net(&format!("{prefix}start"));
    let start_n = builder.net(&format!("{prefix}start_n"));
    let stop = builder.net(&format!("{prefix}stop"));
    let stop_n = builder.net(&format!("{prefix}stop_n"));
    let q1 = builder.net(&format!("{prefix}q1"));
    let q2 = builder.net(&format!("{prefix}q2"));
    let q1d = builder.net(&format!("{prefix}q1d"));
    let q2d = builder.net(&format!("{prefix}q2d"));
    let tf1 = builder.net(&format!("{prefix}tf1"));
    let tf2 = builder.net(&format!("{prefix}tf2"));
    let tc = builder.net(&format!("{prefix}tc"));

    builder.inv(tin, tin_n);
    // Event latches: the input edge itself is the clock.
    builder.dff(vcc, tin, start, Some(start_n));
    builder.dff(vcc, tin_n, stop, Some(stop_n));
    // Clock-grid synchronizers and their one-period delays.
    builder.dff(start, clk, q1, None);
    builder.dff(stop, clk, q2, None);
    builder.dff(q1, clk, q1d, None);
    builder.dff(q2, clk, q2d, None);
    builder.nor(start_n, q1d, tf1);
    builder.nor(stop_n, q2d, tf2);
    builder.xor(q1, q2, tc);

    TpgPorts {
        tf1,
        tf2,
        tc,
        q1,
        q2,
    }
}

/// A standalone time-to-pulse generator netlist plus the stimulus nets
/// needed to exercise it.
pub struct TpgNetlist {
    pub netlist: Netlist,
    pub tin: NetId,
    pub clk: NetId,
    pub ports: TpgPorts,
    pub t_clk: SimTime,
}

/// Builds a self-contained TPG netlist for a clock of period `t_clk`.
pub fn build_tpg_netlist(t_clk: SimTime) -> Result<TpgNetlist, Error> {
    if !t_clk.is_positive() {
        return Err(Error::NonPositiveClock);
    }
    let mut builder = NetlistBuilder::new();
    let vcc = builder.net_with_init("vcc", Level::High);
    let tin = builder.net("tin");
    let clk = builder.clock_net("clk");
    let ports = instantiate(&mut builder, tin, clk, vcc, "tpg_");
    Ok(TpgNetlist {
        netlist: builder.build()?,
        tin,
        clk,
        ports,
        t_clk,
    })
}

impl TpgNetlist {
    /// Simulates one interval through the gate network and measures the
    /// produced pulses. The result is directly comparable with
    /// [`decompose`].
    pub fn measure(&self, t_start: SimTime, t_stop: SimTime) -> Result<TpgOutput, Error> {
        if t_start.is_negative() {
            return Err(Error::InvalidConfig(
                "structural runs start at non-negative times".into(),
            ));
        }
        // Closed form used only to size the stimulus window.
        let reference = decompose(t_start, t_stop, self.t_clk)?;
        let end = reference.tc_start + reference.tc + self.t_clk + self.t_clk;

        let mut sim = Simulator::new(&self.netlist);
        sim.enable_log();
        schedule_clock(&mut sim, self.clk, self.t_clk, end)?;
        sim.schedule(self.tin, Level::High, t_start)?;
        sim.schedule(self.tin, Level::Low, t_stop)?;
        sim.run_until(end);

        let log = sim.log();
        let (tf1_rise, tf1_fall) = pulse_bounds(log, self.ports.tf1);
        let (tf2_rise, tf2_fall) = pulse_bounds(log, self.ports.tf2);
        let (tc_rise, tc_fall) = pulse_bounds(log, self.ports.tc);
        let (q1_rise, _) = pulse_bounds(log, self.ports.q1);

        let tf1_start = tf1_rise.ok_or(Error::NonPositiveInterval)?;
        let tf1_end = tf1_fall.ok_or(Error::NonPositiveInterval)?;
        let tf2_start = tf2_rise.ok_or(Error::NonPositiveInterval)?;
        let tf2_end = tf2_fall.ok_or(Error::NonPositiveInterval)?;
        // A sub-period interval never raises tc; the synchronous span is
        // then empty and starts at the shared synchronizer edge.
        let (tc_start, tc) = match (tc_rise, tc_fall) {
            (Some(rise), Some(fall)) => (rise, fall - rise),
            _ => (q1_rise.ok_or(Error::NonPositiveInterval)?, SimTime::ZERO),
        };

        Ok(TpgOutput {
            tc,
            tf1: tf1_end - tf1_start,
            tf2: tf2_end - tf2_start,
            tc_start,
            tf1_start,
            tf2_start,
        })
    }
}

/// First rising and first subsequent falling transition of `net`.
fn pulse_bounds(log: &[LogEntry], net: NetId) -> (Option<SimTime>, Option<SimTime>) {
    let mut rise = None;
    for e in log.iter().filter(|e| e.net == net) {
        match (rise, e.level) {
            (None, Level::High) => rise = Some(e.at),
            (Some(_), Level::Low) => return (rise, Some(e.at)),
            _ => {}
        }
    }
    (rise, None)
}
