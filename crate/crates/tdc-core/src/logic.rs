//! Behavioral models of the gate-level building blocks: delay buffer,
//! D flip-flop, enabled counter, fixed-width adder and multiplexer.
//!
//! These are pure functions over explicit state. The event kernel in
//! [`crate::sim`] drives the same semantics inside a netlist; keeping the
//! arithmetic here lets the word-level datapath (counters, adder trees,
//! ALU) be tested independently of event scheduling.

use alloc::vec::Vec;

use crate::error::Error;
use crate::sim::{Event, Level, NetId};
use crate::time::SimTime;

/// An ideal delay element: the output waveform is the input waveform
/// shifted by `delay`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct BufferSpec {
    pub delay: SimTime,
}

/// Reaction of a delay buffer to one input edge: the same level appears on
/// `output` exactly `spec.delay` later.
pub fn buffer_react(input_edge: Event, output: NetId, spec: BufferSpec) -> Event {
    assert!(spec.delay.is_positive(), "buffer delay must be positive");
    Event {
        at: input_edge.at + spec.delay,
        net: output,
        level: input_edge.level,
    }
}

/// Rising-edge D flip-flop state. Captures the value its data input held
/// when the clock edge is processed; a data transition ordered at-or-after
/// the same instant's clock event is not seen until the next edge.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct DffState {
    q: Level,
}

impl DffState {
    /// Reset state: Q low.
    pub fn new() -> DffState {
        DffState { q: Level::Low }
    }

    pub fn q(&self) -> Level {
        self.q
    }

    /// Processes one rising clock edge with `d` sampled immediately before
    /// the edge takes effect. Returns the new Q.
    pub fn capture(&mut self, d: Level) -> Level {
        self.q = d;
        self.q
    }
}

impl Default for DffState {
    fn default() -> Self {
        DffState::new()
    }
}

/// Pure form of the flip-flop edge reaction: Q becomes the pre-edge D.
pub fn dff_capture(d_before_edge: Level, state: &mut DffState) -> Level {
    state.capture(d_before_edge)
}

/// A fixed-width up counter that saturates instead of wrapping. Losing a
/// count latches `overflowed`; the flag never clears for the rest of the
/// conversion.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct CounterState {
    width: u32,
    value: u64,
    overflowed: bool,
}

impl CounterState {
    /// `width` must be in 1..=63.
    pub fn new(width: u32) -> CounterState {
        assert!((1..=63).contains(&width), "counter width must be in 1..=63");
        CounterState {
            width,
            value: 0,
            overflowed: false,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn overflowed(&self) -> bool {
        self.overflowed
    }

    pub fn max_value(&self) -> u64 {
        (1u64 << self.width) - 1
    }
}

/// Advances a counter by one rising clock edge: the value increments iff
/// both `enable` and `gate` are high, saturating at `2^width - 1`.
pub fn counter_step(state: &mut CounterState, enable: Level, gate: Level) {
    if enable.is_high() && gate.is_high() {
        if state.value == state.max_value() {
            state.overflowed = true;
        } else {
            state.value += 1;
        }
    }
}

/// A two-input adder of fixed bit width.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct AdderSpec {
    pub width: u32,
}

impl AdderSpec {
    pub fn new(width: u32) -> AdderSpec {
        assert!((1..=63).contains(&width), "adder width must be in 1..=63");
        AdderSpec { width }
    }

    fn mask(&self) -> u64 {
        (1u64 << self.width) - 1
    }
}

/// `(a + b) mod 2^width` with a carry-out flag. Inputs must already fit in
/// the width.
pub fn add_fixed(a: u64, b: u64, spec: AdderSpec) -> (u64, bool) {
    let mask = spec.mask();
    assert!(a <= mask && b <= mask, "adder inputs exceed width");
    let sum = a + b;
    (sum & mask, sum > mask)
}

/// `(a - b) mod 2^width` with a borrow flag.
pub fn sub_fixed(a: u64, b: u64, spec: AdderSpec) -> (u64, bool) {
    let mask = spec.mask();
    assert!(a <= mask && b <= mask, "subtractor inputs exceed width");
    ((a.wrapping_sub(b)) & mask, b > a)
}

/// `(a * b) mod 2^width` with an overflow flag.
pub fn mul_fixed(a: u64, b: u64, spec: AdderSpec) -> (u64, bool) {
    let mask = spec.mask();
    assert!(a <= mask && b <= mask, "multiplier inputs exceed width");
    let product = (a as u128) * (b as u128);
    ((product as u64) & mask, product > mask as u128)
}

/// Selects one of `inputs` by index.
pub fn mux_select(inputs: &[u64], sel: usize) -> Result<u64, Error> {
    inputs.get(sel).copied().ok_or(Error::IndexOutOfRange {
        index: sel,
        len: inputs.len(),
    })
}

/// Folds a slice of counter outputs through a chain of two-input adders,
/// the way a counter-array readout sums its taps: `n` inputs pass through
/// `n - 1` adders. Returns the final sum and whether any stage carried out.
pub fn adder_chain_sum(values: &[u64], spec: AdderSpec) -> (u64, bool) {
    let mut overflow = false;
    let mut acc = 0u64;
    for (i, &v) in values.iter().enumerate() {
        if i == 0 {
            acc = v;
        } else {
            let (sum, carry) = add_fixed(acc, v, spec);
            acc = sum;
            overflow |= carry;
        }
    }
    (acc, overflow)
}

/// Collects selected values from a multiplexer over per-line results, in
/// selection order. Convenience for sequential readout of counter arrays.
pub fn mux_scan(inputs: &[u64]) -> Vec<u64> {
    inputs.to_vec()
}
