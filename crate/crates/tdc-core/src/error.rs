use alloc::string::String;
use core::fmt;

use crate::time::SimTime;

/// Errors reported by the converter model and its harnesses.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Error {
    /// An event was scheduled before the simulator's current time.
    SchedulingInPast { at: SimTime, now: SimTime },
    /// A net id does not belong to the simulated netlist.
    UnknownNet(u32),
    /// A stop time at or before the start time (or a zero-length interval
    /// where a positive one is required).
    NonPositiveInterval,
    /// A clock period that is not strictly positive.
    NonPositiveClock,
    /// An index outside the valid range of a selector or tap list.
    IndexOutOfRange { index: usize, len: usize },
    /// A coarse window that is not aligned to the clock grid.
    NotSynchronous,
    /// The measured interval saturated the coarse counter.
    RangeExceeded,
    /// A name that is not a legal HDL identifier.
    InvalidIdentifier(String),
    /// A configuration value that violates a documented constraint.
    InvalidConfig(String),
    /// A time string that could not be parsed to exact femtoseconds.
    InvalidTime(String),
    /// Two components driving the same net.
    MultipleDrivers(String),
    /// A zero-delay combinational loop in a netlist.
    CombinationalCycle(String),
}

impl Error {
    pub(crate) fn invalid_time(input: &str, reason: &str) -> Error {
        let mut msg = String::new();
        msg.push('"');
        msg.push_str(input);
        msg.push_str("\": ");
        msg.push_str(reason);
        Error::InvalidTime(msg)
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SchedulingInPast { at, now } => {
                write!(f, "event at {at} scheduled in the past (now = {now})")
            }
            Error::UnknownNet(id) => write!(f, "unknown net id {id}"),
            Error::NonPositiveInterval => write!(f, "interval must be strictly positive"),
            Error::NonPositiveClock => write!(f, "clock period must be strictly positive"),
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            Error::NotSynchronous => write!(f, "coarse window is not clock-aligned"),
            Error::RangeExceeded => write!(f, "interval exceeds the coarse counter range"),
            Error::InvalidIdentifier(name) => write!(f, "invalid HDL identifier: {name}"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::InvalidTime(msg) => write!(f, "invalid time {msg}"),
            Error::MultipleDrivers(net) => write!(f, "net {net} has multiple drivers"),
            Error::CombinationalCycle(net) => {
                write!(f, "zero-delay combinational cycle through net {net}")
            }
        }
    }
}

impl core::error::Error for Error {}
