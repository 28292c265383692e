//! Brute-force reference implementations shared by the integration
//! suites. These deliberately avoid the library's closed-form arithmetic:
//! clock edges are found by linear search and tap counts by walking every
//! clock multiple, so agreement with the library is meaningful.

use tdc_core::dtdc::TdcConfig;
use tdc_core::rng::SplitMix64;
use tdc_core::time::SimTime;

/// Next clock edge at or after `t`, by linear search from zero.
pub fn oracle_next_edge(t: SimTime, t_clk: SimTime) -> SimTime {
    let mut edge = SimTime::ZERO;
    while edge < t {
        edge += t_clk;
    }
    edge
}

/// Number of clock multiples in `[from, to)`, by walking every multiple.
pub fn oracle_edges_in(from: SimTime, to: SimTime, t_clk: SimTime) -> u64 {
    let mut count = 0;
    let mut edge = SimTime::ZERO;
    while edge < to {
        if edge >= from {
            count += 1;
        }
        edge += t_clk;
    }
    count
}

/// Fine total of one pulse by per-tap enumeration.
pub fn oracle_fine_total(pulse_start: SimTime, pulse_width: SimTime, cfg: &TdcConfig) -> u64 {
    let mut total = 0;
    for l in 0..cfg.fine.n_lines {
        for k in 0..cfg.fine.taps_per_line {
            let d = cfg.fine.tap_delay(l, k).unwrap();
            total += oracle_edges_in(pulse_start + d, pulse_start + d + pulse_width, cfg.t_clk());
        }
    }
    total
}

pub struct OracleConversion {
    pub n_c: u64,
    pub n_f1: u64,
    pub n_f2: u64,
    pub d_out: i64,
}

/// Whole-chain reference conversion: decompose by edge search, count by
/// enumeration, compose in wide arithmetic.
pub fn oracle_convert(t_start: SimTime, t_stop: SimTime, cfg: &TdcConfig) -> OracleConversion {
    let t_clk = cfg.t_clk();
    let edge1 = oracle_next_edge(t_start, t_clk);
    let edge2 = oracle_next_edge(t_stop, t_clk);
    let n_c = oracle_edges_in(edge1, edge2, t_clk);
    let tf1 = (edge1 - t_start) + t_clk;
    let tf2 = (edge2 - t_stop) + t_clk;
    let n_f1 = oracle_fine_total(t_start, tf1, cfg);
    let n_f2 = oracle_fine_total(t_stop, tf2, cfg);
    let k = cfg.scale_k() as i128;
    let d_out = (k * n_c as i128 + n_f1 as i128 - n_f2 as i128) as i64;
    OracleConversion {
        n_c,
        n_f1,
        n_f2,
        d_out,
    }
}

/// Deterministic stream of (t_start, t_in) pairs for sweep tests.
pub fn random_intervals(
    seed: u64,
    count: usize,
    max_start_fs: i64,
    min_in_fs: i64,
    max_in_fs: i64,
) -> Vec<(SimTime, SimTime)> {
    let mut rng = SplitMix64::new(seed);
    (0..count)
        .map(|_| {
            let start = SimTime::from_fs(rng.next_below(max_start_fs as u64 + 1) as i64);
            let t_in = SimTime::from_fs(
                min_in_fs + rng.next_below((max_in_fs - min_in_fs) as u64 + 1) as i64,
            );
            (start, start + t_in)
        })
        .collect()
}
