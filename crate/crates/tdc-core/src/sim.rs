//! Deterministic discrete-event kernel over integer femtosecond time.
//!
//! Nets carry two-valued logic levels. Queued events are applied in
//! `(time, net class, net, insertion sequence)` order; nets created with
//! [`NetlistBuilder::clock_net`] sort after ordinary signal nets at the
//! same instant, so a data edge that coincides with a clock edge has
//! already been applied when the clock edge is processed. Sequential
//! elements triggered by one clock event all sample their inputs before
//! any of them updates its output, which gives the usual register-transfer
//! semantics: a flip-flop chain shifts one stage per edge even though
//! outputs propagate with zero delay.
//!
//! Zero-delay propagation (gates, flip-flop outputs) happens synchronously
//! inside the application of the event that caused it; only delay buffers
//! put future events back on the queue. For a fixed netlist and stimulus
//! the complete ordered transition log is therefore bit-identical across
//! runs.

use alloc::collections::BinaryHeap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;
use core::fmt::Write as _;

use crate::error::Error;
use crate::logic::{add_fixed, counter_step, AdderSpec, CounterState};
use crate::time::SimTime;

/// A two-valued logic level.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Level {
    Low,
    High,
}

impl Level {
    pub fn is_high(self) -> bool {
        matches!(self, Level::High)
    }

    pub fn inverted(self) -> Level {
        match self {
            Level::Low => Level::High,
            Level::High => Level::Low,
        }
    }

    pub fn from_bool(high: bool) -> Level {
        if high {
            Level::High
        } else {
            Level::Low
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.is_high() { 1 } else { 0 })
    }
}

/// Identifier of a named signal within one netlist.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NetId(u32);

impl NetId {
    /// Builds an id from a raw index. Ids are only meaningful together
    /// with the netlist that created them.
    pub fn from_raw(index: u32) -> NetId {
        NetId(index)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Tie-break class of a net at equal timestamps. Clock nets apply last.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
enum NetClass {
    Signal,
    Clock,
}

/// A logic-level transition to apply to a net at a point in time.
///
/// The monotone insertion sequence used for same-key tie-breaking is
/// assigned internally when the event is queued.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct Event {
    pub at: SimTime,
    pub net: NetId,
    pub level: Level,
}

/// One applied transition, in application order.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct LogEntry {
    pub at: SimTime,
    pub net: NetId,
    pub level: Level,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
struct QueuedEvent {
    at: SimTime,
    class: NetClass,
    net: NetId,
    seq: u64,
    level: Level,
}

impl Ord for QueuedEvent {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        (self.at, self.class, self.net, self.seq).cmp(&(
            other.at,
            other.class,
            other.net,
            other.seq,
        ))
    }
}

impl PartialOrd for QueuedEvent {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

struct Net {
    name: String,
    init: Level,
    class: NetClass,
}

/// Handle to an enabled counter component.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct CounterHandle(usize);

/// Handle to a word-level multiplexer component.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct MuxHandle(usize);

/// Source of a word-level value in the readout graph.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum ValueSrc {
    Counter(CounterHandle),
    Adder(usize),
}

/// A primitive instance with its net bindings.
///
/// Bit-level components react to transitions during the run. `Adder` and
/// `Mux` form the word-level readout path over counter outputs; they are
/// evaluated combinationally when results are read back, matching a
/// steady-state readout after the measured pulses have passed.
#[derive(Clone, Debug)]
pub enum Component {
    Buffer {
        input: NetId,
        output: NetId,
        delay: SimTime,
    },
    Inv {
        input: NetId,
        output: NetId,
    },
    Nor {
        a: NetId,
        b: NetId,
        output: NetId,
    },
    Xor {
        a: NetId,
        b: NetId,
        output: NetId,
    },
    Dff {
        d: NetId,
        clk: NetId,
        q: NetId,
        q_n: Option<NetId>,
    },
    Counter {
        clk: NetId,
        enable: NetId,
        gate: NetId,
        width: u32,
    },
    Adder {
        width: u32,
        a: ValueSrc,
        b: ValueSrc,
    },
    Mux {
        inputs: Vec<ValueSrc>,
    },
}

/// Instance counts by component kind.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Default)]
pub struct ComponentCounts {
    pub buffers: usize,
    pub inverters: usize,
    pub nors: usize,
    pub xors: usize,
    pub dffs: usize,
    pub counters: usize,
    pub adders: usize,
    pub muxes: usize,
}

/// Incrementally assembles nets and components, then validates the result.
pub struct NetlistBuilder {
    nets: Vec<Net>,
    components: Vec<Component>,
}

impl NetlistBuilder {
    pub fn new() -> NetlistBuilder {
        NetlistBuilder {
            nets: Vec::new(),
            components: Vec::new(),
        }
    }

    /// Adds a signal net that resets to `Low`.
    pub fn net(&mut self, name: &str) -> NetId {
        self.add_net(name, Level::Low, NetClass::Signal)
    }

    /// Adds a signal net with an explicit reset level (for tied-high
    /// enables and the like).
    pub fn net_with_init(&mut self, name: &str, init: Level) -> NetId {
        self.add_net(name, init, NetClass::Signal)
    }

    /// Adds a clock net. At equal timestamps its events apply after all
    /// signal-net events, so coincident data edges are visible at the edge.
    pub fn clock_net(&mut self, name: &str) -> NetId {
        self.add_net(name, Level::Low, NetClass::Clock)
    }

    fn add_net(&mut self, name: &str, init: Level, class: NetClass) -> NetId {
        let id = NetId(self.nets.len() as u32);
        self.nets.push(Net {
            name: name.to_string(),
            init,
            class,
        });
        id
    }

    pub fn buffer(&mut self, input: NetId, output: NetId, delay: SimTime) {
        assert!(delay.is_positive(), "buffer delay must be positive");
        self.push(Component::Buffer {
            input,
            output,
            delay,
        });
    }

    pub fn inv(&mut self, input: NetId, output: NetId) {
        self.push(Component::Inv { input, output });
    }

    pub fn nor(&mut self, a: NetId, b: NetId, output: NetId) {
        self.push(Component::Nor { a, b, output });
    }

    pub fn xor(&mut self, a: NetId, b: NetId, output: NetId) {
        self.push(Component::Xor { a, b, output });
    }

    pub fn dff(&mut self, d: NetId, clk: NetId, q: NetId, q_n: Option<NetId>) {
        self.push(Component::Dff { d, clk, q, q_n });
    }

    pub fn counter(&mut self, clk: NetId, enable: NetId, gate: NetId, width: u32) -> CounterHandle {
        let _ = CounterState::new(width); // width range check
        self.push(Component::Counter {
            clk,
            enable,
            gate,
            width,
        });
        CounterHandle(self.components.len() - 1)
    }

    pub fn adder(&mut self, width: u32, a: ValueSrc, b: ValueSrc) -> ValueSrc {
        let _ = AdderSpec::new(width);
        self.push(Component::Adder { width, a, b });
        ValueSrc::Adder(self.components.len() - 1)
    }

    pub fn mux(&mut self, inputs: Vec<ValueSrc>) -> MuxHandle {
        assert!(!inputs.is_empty(), "mux needs at least one input");
        self.push(Component::Mux { inputs });
        MuxHandle(self.components.len() - 1)
    }

    fn push(&mut self, c: Component) {
        for net in component_inputs(&c)
            .iter()
            .chain(component_outputs(&c).iter())
        {
            assert!(
                net.index() < self.nets.len(),
                "component references unknown net"
            );
        }
        self.components.push(c);
    }

    /// Validates driver uniqueness and the absence of zero-delay
    /// combinational cycles, and freezes the netlist.
    pub fn build(self) -> Result<Netlist, Error> {
        let n_nets = self.nets.len();
        let mut driver_count = vec![0usize; n_nets];
        for c in &self.components {
            for out in component_outputs(c) {
                driver_count[out.index()] += 1;
                if driver_count[out.index()] > 1 {
                    return Err(Error::MultipleDrivers(self.nets[out.index()].name.clone()));
                }
            }
        }

        // Kahn's algorithm over the zero-delay combinational edges only;
        // buffers and flip-flops legitimately close feedback loops.
        let mut comb_edges: Vec<Vec<usize>> = vec![Vec::new(); n_nets];
        let mut indegree = vec![0usize; n_nets];
        for c in &self.components {
            let (ins, out) = match c {
                Component::Inv { input, output } => (vec![*input], *output),
                Component::Nor { a, b, output } => (vec![*a, *b], *output),
                Component::Xor { a, b, output } => (vec![*a, *b], *output),
                _ => continue,
            };
            for i in ins {
                comb_edges[i.index()].push(out.index());
                indegree[out.index()] += 1;
            }
        }
        let mut stack: Vec<usize> = (0..n_nets).filter(|&n| indegree[n] == 0).collect();
        let mut visited = 0usize;
        while let Some(n) = stack.pop() {
            visited += 1;
            for &m in &comb_edges[n] {
                indegree[m] -= 1;
                if indegree[m] == 0 {
                    stack.push(m);
                }
            }
        }
        if visited != n_nets {
            let culprit = (0..n_nets)
                .find(|&n| indegree[n] > 0)
                .expect("cycle without member");
            return Err(Error::CombinationalCycle(self.nets[culprit].name.clone()));
        }

        let mut sinks: Vec<Vec<usize>> = vec![Vec::new(); n_nets];
        for (ci, c) in self.components.iter().enumerate() {
            let mut seen: Vec<usize> = Vec::new();
            for input in component_inputs(c) {
                if !seen.contains(&input.index()) {
                    sinks[input.index()].push(ci);
                    seen.push(input.index());
                }
            }
        }

        Ok(Netlist {
            nets: self.nets,
            components: self.components,
            sinks,
        })
    }
}

impl Default for NetlistBuilder {
    fn default() -> Self {
        NetlistBuilder::new()
    }
}

fn component_inputs(c: &Component) -> Vec<NetId> {
    match c {
        Component::Buffer { input, .. } => vec![*input],
        Component::Inv { input, .. } => vec![*input],
        Component::Nor { a, b, .. } => vec![*a, *b],
        Component::Xor { a, b, .. } => vec![*a, *b],
        Component::Dff { d, clk, .. } => vec![*d, *clk],
        Component::Counter {
            clk, enable, gate, ..
        } => vec![*clk, *enable, *gate],
        Component::Adder { .. } | Component::Mux { .. } => Vec::new(),
    }
}

fn component_outputs(c: &Component) -> Vec<NetId> {
    match c {
        Component::Buffer { output, .. } => vec![*output],
        Component::Inv { output, .. } => vec![*output],
        Component::Nor { output, .. } => vec![*output],
        Component::Xor { output, .. } => vec![*output],
        Component::Dff { q, q_n, .. } => {
            let mut outs = vec![*q];
            if let Some(qn) = q_n {
                outs.push(*qn);
            }
            outs
        }
        Component::Counter { .. } | Component::Adder { .. } | Component::Mux { .. } => Vec::new(),
    }
}

/// A validated static structure of nets and component instances.
pub struct Netlist {
    nets: Vec<Net>,
    components: Vec<Component>,
    sinks: Vec<Vec<usize>>,
}

impl Netlist {
    pub fn net_count(&self) -> usize {
        self.nets.len()
    }

    pub fn net_name(&self, net: NetId) -> Option<&str> {
        self.nets.get(net.index()).map(|n| n.name.as_str())
    }

    pub fn find_net(&self, name: &str) -> Option<NetId> {
        self.nets
            .iter()
            .position(|n| n.name == name)
            .map(|i| NetId(i as u32))
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component_counts(&self) -> ComponentCounts {
        let mut counts = ComponentCounts::default();
        for c in &self.components {
            match c {
                Component::Buffer { .. } => counts.buffers += 1,
                Component::Inv { .. } => counts.inverters += 1,
                Component::Nor { .. } => counts.nors += 1,
                Component::Xor { .. } => counts.xors += 1,
                Component::Dff { .. } => counts.dffs += 1,
                Component::Counter { .. } => counts.counters += 1,
                Component::Adder { .. } => counts.adders += 1,
                Component::Mux { .. } => counts.muxes += 1,
            }
        }
        counts
    }
}

enum PendingUpdate {
    DffQ {
        q: NetId,
        q_n: Option<NetId>,
        value: Level,
    },
    CounterTick {
        component: usize,
    },
}

/// Runtime state of one simulation over a borrowed netlist.
///
/// A simulator instance is single-threaded and single-shot; independent
/// instances over the same netlist are fully isolated.
pub struct Simulator<'n> {
    netlist: &'n Netlist,
    levels: Vec<Level>,
    counters: Vec<Option<CounterState>>,
    queue: BinaryHeap<Reverse<QueuedEvent>>,
    seq: u64,
    now: SimTime,
    last_applied: SimTime,
    log: Option<Vec<LogEntry>>,
}

impl<'n> Simulator<'n> {
    /// Initializes levels from each net's declared reset level, resets all
    /// flip-flops and counters to zero, and settles zero-delay outputs as
    /// if the netlist had been quiescent forever.
    pub fn new(netlist: &'n Netlist) -> Simulator<'n> {
        let mut levels: Vec<Level> = netlist.nets.iter().map(|n| n.init).collect();
        let mut counters: Vec<Option<CounterState>> = Vec::with_capacity(netlist.components.len());
        for c in &netlist.components {
            counters.push(match c {
                Component::Counter { width, .. } => Some(CounterState::new(*width)),
                _ => None,
            });
        }
        for c in &netlist.components {
            if let Component::Dff { q, q_n, .. } = c {
                levels[q.index()] = Level::Low;
                if let Some(qn) = q_n {
                    levels[qn.index()] = Level::High;
                }
            }
        }
        // Bounded settle: acyclic combinational logic converges within one
        // pass per logic depth; buffers are treated as wires here.
        for _ in 0..netlist.components.len() + 1 {
            let mut changed = false;
            for c in &netlist.components {
                let (out, value) = match c {
                    Component::Inv { input, output } => (*output, levels[input.index()].inverted()),
                    Component::Nor { a, b, output } => (
                        *output,
                        Level::from_bool(
                            !(levels[a.index()].is_high() || levels[b.index()].is_high()),
                        ),
                    ),
                    Component::Xor { a, b, output } => (
                        *output,
                        Level::from_bool(levels[a.index()].is_high() ^ levels[b.index()].is_high()),
                    ),
                    Component::Buffer { input, output, .. } => (*output, levels[input.index()]),
                    _ => continue,
                };
                if levels[out.index()] != value {
                    levels[out.index()] = value;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        Simulator {
            netlist,
            levels,
            counters,
            queue: BinaryHeap::new(),
            seq: 0,
            now: SimTime::ZERO,
            last_applied: SimTime::ZERO,
            log: None,
        }
    }

    /// Starts recording applied transitions (off by default).
    pub fn enable_log(&mut self) {
        if self.log.is_none() {
            self.log = Some(Vec::new());
        }
    }

    pub fn log(&self) -> &[LogEntry] {
        self.log.as_deref().unwrap_or(&[])
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Current level of a net; a pure read.
    pub fn probe(&self, net: NetId) -> Result<Level, Error> {
        self.levels
            .get(net.index())
            .copied()
            .ok_or(Error::UnknownNet(net.0))
    }

    /// Enqueues a transition. The event must not be in the past.
    pub fn schedule(&mut self, net: NetId, level: Level, at: SimTime) -> Result<(), Error> {
        if net.index() >= self.netlist.nets.len() {
            return Err(Error::UnknownNet(net.0));
        }
        if at < self.now {
            return Err(Error::SchedulingInPast { at, now: self.now });
        }
        self.push_event(net, level, at);
        Ok(())
    }

    fn push_event(&mut self, net: NetId, level: Level, at: SimTime) {
        let class = self.netlist.nets[net.index()].class;
        let seq = self.seq;
        self.seq += 1;
        self.queue.push(Reverse(QueuedEvent {
            at,
            class,
            net,
            seq,
            level,
        }));
    }

    /// Applies every queued event with `at <= t` in deterministic order,
    /// fully propagating component reactions, then advances `now` to `t`.
    pub fn run_until(&mut self, t: SimTime) {
        assert!(t >= self.now, "run_until target is in the past");
        while let Some(Reverse(head)) = self.queue.peek().copied() {
            if head.at > t {
                break;
            }
            let Reverse(e) = self.queue.pop().expect("peeked event vanished");
            debug_assert!(e.at >= self.last_applied, "causality violation");
            self.now = e.at;
            self.last_applied = e.at;
            self.apply(e.net, e.level, e.at);
        }
        self.now = t;
    }

    /// Applies one transition and synchronously propagates its zero-delay
    /// consequences. Events that do not change a net's level are absorbed.
    fn apply(&mut self, net: NetId, level: Level, at: SimTime) {
        let old = self.levels[net.index()];
        if old == level {
            return;
        }
        self.levels[net.index()] = level;
        if let Some(log) = self.log.as_mut() {
            log.push(LogEntry { at, net, level });
        }
        let rising = level.is_high();

        // Sample phase: every sequential element triggered by this edge
        // reads its inputs before any of them commits an update.
        let mut pending: Vec<PendingUpdate> = Vec::new();
        for &ci in &self.netlist.sinks[net.index()] {
            match &self.netlist.components[ci] {
                Component::Dff { d, clk, q, q_n } if *clk == net && rising => {
                    pending.push(PendingUpdate::DffQ {
                        q: *q,
                        q_n: *q_n,
                        value: self.levels[d.index()],
                    });
                }
                Component::Counter {
                    clk, enable, gate, ..
                } if *clk == net
                    && rising
                    && self.levels[enable.index()].is_high()
                    && self.levels[gate.index()].is_high() =>
                {
                    pending.push(PendingUpdate::CounterTick { component: ci });
                }
                _ => {}
            }
        }

        // Commit phase: apply the sampled updates; their own zero-delay
        // fanout cascades recursively.
        for update in pending {
            match update {
                PendingUpdate::DffQ { q, q_n, value } => {
                    self.apply(q, value, at);
                    if let Some(qn) = q_n {
                        self.apply(qn, value.inverted(), at);
                    }
                }
                PendingUpdate::CounterTick { component } => {
                    let state = self.counters[component]
                        .as_mut()
                        .expect("counter state missing");
                    counter_step(state, Level::High, Level::High);
                }
            }
        }

        // Combinational fanout of the changed net, plus delayed buffers.
        for &ci in &self.netlist.sinks[net.index()] {
            match &self.netlist.components[ci] {
                Component::Inv { input, output } => {
                    let v = self.levels[input.index()].inverted();
                    self.apply(*output, v, at);
                }
                Component::Nor { a, b, output } => {
                    let v = Level::from_bool(
                        !(self.levels[a.index()].is_high() || self.levels[b.index()].is_high()),
                    );
                    self.apply(*output, v, at);
                }
                Component::Xor { a, b, output } => {
                    let v = Level::from_bool(
                        self.levels[a.index()].is_high() ^ self.levels[b.index()].is_high(),
                    );
                    self.apply(*output, v, at);
                }
                Component::Buffer { output, delay, .. } => {
                    let out = *output;
                    let delay = *delay;
                    self.push_event(out, level, at + delay);
                }
                _ => {}
            }
        }
    }

    /// Value and overflow flag of a counter after the run.
    pub fn counter_value(&self, handle: CounterHandle) -> (u64, bool) {
        let state = self.counters[handle.0].as_ref().expect("not a counter");
        (state.value(), state.overflowed())
    }

    /// Evaluates a word-level readout source: counter outputs fold through
    /// fixed-width adders; overflow anywhere along the path is latched.
    pub fn read_value(&self, src: ValueSrc) -> (u64, bool) {
        match src {
            ValueSrc::Counter(h) => self.counter_value(h),
            ValueSrc::Adder(ci) => match &self.netlist.components[ci] {
                Component::Adder { width, a, b } => {
                    let (va, ofa) = self.read_value(*a);
                    let (vb, ofb) = self.read_value(*b);
                    let (sum, carry) = add_fixed(va, vb, AdderSpec::new(*width));
                    (sum, ofa | ofb | carry)
                }
                _ => unreachable!("ValueSrc::Adder points at a non-adder"),
            },
        }
    }

    /// Reads one multiplexer input by selector index.
    pub fn read_mux(&self, handle: MuxHandle, sel: usize) -> Result<(u64, bool), Error> {
        match &self.netlist.components[handle.0] {
            Component::Mux { inputs } => {
                let src = inputs.get(sel).ok_or(Error::IndexOutOfRange {
                    index: sel,
                    len: inputs.len(),
                })?;
                Ok(self.read_value(*src))
            }
            _ => unreachable!("MuxHandle points at a non-mux"),
        }
    }
}

/// Schedules a rising edge at every multiple of `t_clk` up to and
/// including `until`, with falling edges at mid-period. The period must be
/// at least 2 fs so the falling edge is distinct.
pub fn schedule_clock(
    sim: &mut Simulator<'_>,
    clk: NetId,
    t_clk: SimTime,
    until: SimTime,
) -> Result<(), Error> {
    if t_clk < SimTime::from_fs(2) {
        return Err(Error::InvalidConfig(
            "clock period must be at least 2 fs".to_string(),
        ));
    }
    let half = SimTime::from_fs(t_clk.fs() / 2);
    let mut edge = SimTime::ZERO;
    while edge <= until {
        sim.schedule(clk, Level::High, edge)?;
        sim.schedule(clk, Level::Low, edge + half)?;
        edge += t_clk;
    }
    Ok(())
}

/// Renders a transition log in the dump format: a `fs,net,level` header
/// followed by one line per applied event, in application order.
pub fn format_log(netlist: &Netlist, entries: &[LogEntry]) -> String {
    let mut out = String::from("fs,net,level\n");
    for e in entries {
        let name = netlist.net_name(e.net).unwrap_or("?");
        let _ = writeln!(out, "{},{},{}", e.at.fs(), name, e.level);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_event_sets_level() {
        let mut b = NetlistBuilder::new();
        let clk = b.net("clk");
        let netlist = b.build().unwrap();
        let mut sim = Simulator::new(&netlist);
        sim.schedule(clk, Level::High, SimTime::ZERO).unwrap();
        sim.run_until(SimTime::ZERO);
        assert_eq!(sim.probe(clk).unwrap(), Level::High);
    }

    #[test]
    fn equal_time_events_apply_in_net_order() {
        let mut b = NetlistBuilder::new();
        let a = b.net("a");
        let z = b.net("z");
        let netlist = b.build().unwrap();
        let mut sim = Simulator::new(&netlist);
        sim.enable_log();
        // scheduled in reverse order; net order must win
        sim.schedule(z, Level::High, SimTime::from_fs(5)).unwrap();
        sim.schedule(a, Level::High, SimTime::from_fs(5)).unwrap();
        sim.run_until(SimTime::from_fs(5));
        let nets: Vec<NetId> = sim.log().iter().map(|e| e.net).collect();
        assert_eq!(nets, vec![a, z]);
    }

    #[test]
    fn scheduling_in_past_rejected() {
        let mut b = NetlistBuilder::new();
        let n = b.net("n");
        let netlist = b.build().unwrap();
        let mut sim = Simulator::new(&netlist);
        sim.run_until(SimTime::from_fs(10));
        assert_eq!(
            sim.schedule(n, Level::High, SimTime::from_fs(5)),
            Err(Error::SchedulingInPast {
                at: SimTime::from_fs(5),
                now: SimTime::from_fs(10)
            })
        );
    }

    #[test]
    fn run_until_with_empty_queue_advances_time() {
        let mut b = NetlistBuilder::new();
        let n = b.net("n");
        let netlist = b.build().unwrap();
        let mut sim = Simulator::new(&netlist);
        sim.run_until(SimTime::from_fs(1_000_000));
        assert_eq!(sim.now(), SimTime::from_fs(1_000_000));
        assert_eq!(sim.probe(n).unwrap(), Level::Low);
    }

    #[test]
    fn buffer_delays_edge() {
        let mut b = NetlistBuilder::new();
        let i = b.net("in");
        let o = b.net("out");
        b.buffer(i, o, SimTime::from_fs(250_000));
        let netlist = b.build().unwrap();
        let mut sim = Simulator::new(&netlist);
        sim.enable_log();
        sim.schedule(i, Level::High, SimTime::ZERO).unwrap();
        sim.run_until(SimTime::from_fs(1_000_000));
        let out_edges: Vec<&LogEntry> = sim.log().iter().filter(|e| e.net == o).collect();
        assert_eq!(out_edges.len(), 1);
        assert_eq!(out_edges[0].at, SimTime::from_fs(250_000));
        assert_eq!(out_edges[0].level, Level::High);
    }

    #[test]
    fn probe_of_undriven_net_returns_reset_level() {
        let mut b = NetlistBuilder::new();
        let n = b.net("floaty");
        let h = b.net_with_init("tied_high", Level::High);
        let netlist = b.build().unwrap();
        let sim = Simulator::new(&netlist);
        assert_eq!(sim.probe(n).unwrap(), Level::Low);
        assert_eq!(sim.probe(h).unwrap(), Level::High);
    }

    #[test]
    fn probe_of_unknown_net_errors() {
        let mut b = NetlistBuilder::new();
        let _ = b.net("only");
        let netlist = b.build().unwrap();
        let sim = Simulator::new(&netlist);
        assert_eq!(sim.probe(NetId::from_raw(17)), Err(Error::UnknownNet(17)));
    }

    #[test]
    fn identical_schedules_produce_identical_logs() {
        let run = || {
            let mut b = NetlistBuilder::new();
            let i = b.net("in");
            let o = b.net("out");
            let o2 = b.net("out2");
            b.buffer(i, o, SimTime::from_fs(10));
            b.buffer(o, o2, SimTime::from_fs(7));
            let netlist = b.build().unwrap();
            let mut sim = Simulator::new(&netlist);
            sim.enable_log();
            for k in 0..50 {
                let level = if k % 2 == 0 { Level::High } else { Level::Low };
                sim.schedule(i, level, SimTime::from_fs(3 * k)).unwrap();
            }
            sim.run_until(SimTime::from_fs(1_000));
            sim.log().to_vec()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn applied_timestamps_never_decrease() {
        let mut b = NetlistBuilder::new();
        let i = b.net("in");
        let o = b.net("out");
        b.buffer(i, o, SimTime::from_fs(5));
        let netlist = b.build().unwrap();
        let mut sim = Simulator::new(&netlist);
        sim.enable_log();
        sim.schedule(i, Level::High, SimTime::from_fs(20)).unwrap();
        sim.schedule(i, Level::Low, SimTime::from_fs(40)).unwrap();
        sim.run_until(SimTime::from_fs(100));
        let times: Vec<i64> = sim.log().iter().map(|e| e.at.fs()).collect();
        assert!(times.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn dff_captures_pre_edge_value_on_coincident_d_change() {
        // The D net is created after the clock's own net here, so a D
        // transition at the same instant applies after the edge and must
        // not be captured.
        let mut b = NetlistBuilder::new();
        let clk = b.net("clk");
        let d = b.net("d");
        let q = b.net("q");
        b.dff(d, clk, q, None);
        let netlist = b.build().unwrap();
        let mut sim = Simulator::new(&netlist);
        sim.schedule(clk, Level::High, SimTime::from_fs(100))
            .unwrap();
        sim.schedule(d, Level::High, SimTime::from_fs(100)).unwrap();
        sim.run_until(SimTime::from_fs(100));
        assert_eq!(sim.probe(q).unwrap(), Level::Low);
        assert_eq!(sim.probe(d).unwrap(), Level::High);
    }

    #[test]
    fn signal_edge_coincident_with_clock_net_is_visible() {
        // Same wiring, but the clock is a clock-class net: the coincident
        // D transition applies first and is captured at the edge.
        let mut b = NetlistBuilder::new();
        let clk = b.clock_net("clk");
        let d = b.net("d");
        let q = b.net("q");
        b.dff(d, clk, q, None);
        let netlist = b.build().unwrap();
        let mut sim = Simulator::new(&netlist);
        sim.schedule(clk, Level::High, SimTime::from_fs(100))
            .unwrap();
        sim.schedule(d, Level::High, SimTime::from_fs(100)).unwrap();
        sim.run_until(SimTime::from_fs(100));
        assert_eq!(sim.probe(q).unwrap(), Level::High);
    }

    #[test]
    fn dff_chain_shifts_one_stage_per_edge() {
        let mut b = NetlistBuilder::new();
        let clk = b.clock_net("clk");
        let d = b.net("d");
        let q1 = b.net("q1");
        let q2 = b.net("q2");
        b.dff(d, clk, q1, None);
        b.dff(q1, clk, q2, None);
        let netlist = b.build().unwrap();
        let mut sim = Simulator::new(&netlist);
        sim.schedule(d, Level::High, SimTime::from_fs(5)).unwrap();
        for k in 0..3 {
            sim.schedule(clk, Level::High, SimTime::from_fs(10 + 20 * k))
                .unwrap();
            sim.schedule(clk, Level::Low, SimTime::from_fs(20 + 20 * k))
                .unwrap();
        }
        sim.run_until(SimTime::from_fs(15));
        assert_eq!(sim.probe(q1).unwrap(), Level::High);
        assert_eq!(sim.probe(q2).unwrap(), Level::Low); // no shoot-through
        sim.run_until(SimTime::from_fs(35));
        assert_eq!(sim.probe(q2).unwrap(), Level::High);
    }

    #[test]
    fn counter_counts_gated_clock_edges() {
        let mut b = NetlistBuilder::new();
        let clk = b.clock_net("clk");
        let en = b.net_with_init("en", Level::High);
        let gate = b.net("gate");
        let h = b.counter(clk, en, gate, 8);
        let netlist = b.build().unwrap();
        let mut sim = Simulator::new(&netlist);
        sim.schedule(gate, Level::High, SimTime::from_fs(15))
            .unwrap();
        sim.schedule(gate, Level::Low, SimTime::from_fs(45))
            .unwrap();
        schedule_clock(&mut sim, clk, SimTime::from_fs(10), SimTime::from_fs(100)).unwrap();
        sim.run_until(SimTime::from_fs(100));
        // gate high during edges at 20, 30, 40
        assert_eq!(sim.counter_value(h), (3, false));
    }

    #[test]
    fn multiple_drivers_rejected() {
        let mut b = NetlistBuilder::new();
        let i1 = b.net("i1");
        let i2 = b.net("i2");
        let o = b.net("o");
        b.inv(i1, o);
        b.inv(i2, o);
        assert_eq!(
            b.build().err(),
            Some(Error::MultipleDrivers("o".to_string()))
        );
    }

    #[test]
    fn combinational_cycle_rejected() {
        let mut b = NetlistBuilder::new();
        let a = b.net("a");
        let x = b.net("x");
        let y = b.net("y");
        b.nor(a, y, x);
        b.inv(x, y);
        assert!(matches!(b.build(), Err(Error::CombinationalCycle(_))));
    }

    #[test]
    fn buffer_feedback_is_not_a_combinational_cycle() {
        let mut b = NetlistBuilder::new();
        let x = b.net("x");
        let y = b.net("y");
        b.inv(x, y);
        b.buffer(y, x, SimTime::from_fs(10));
        assert!(b.build().is_ok());
    }

    #[test]
    fn inverter_output_settles_high_at_reset() {
        let mut b = NetlistBuilder::new();
        let x = b.net("x");
        let y = b.net("y");
        b.inv(x, y);
        let netlist = b.build().unwrap();
        let sim = Simulator::new(&netlist);
        assert_eq!(sim.probe(y).unwrap(), Level::High);
    }

    #[test]
    fn log_dump_format() {
        let mut b = NetlistBuilder::new();
        let n = b.net("sig");
        let netlist = b.build().unwrap();
        let mut sim = Simulator::new(&netlist);
        sim.enable_log();
        sim.schedule(n, Level::High, SimTime::from_fs(3)).unwrap();
        sim.schedule(n, Level::Low, SimTime::from_fs(9)).unwrap();
        sim.run_until(SimTime::from_fs(10));
        assert_eq!(
            format_log(&netlist, sim.log()),
            "fs,net,level\n3,sig,1\n9,sig,0\n"
        );
    }
}
