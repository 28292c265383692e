//! Deterministic model of a multiple-delay-line time-to-digital converter.
//!
//! The crate provides three layers:
//!
//! * a discrete-event logic kernel over exact integer femtoseconds
//!   ([`sim`]) with behavioral gate primitives ([`logic`]),
//! * the converter itself — time-to-pulse generation ([`tpg`]), the
//!   multiple-delay-line fine interpolator ([`fine`]) and the assembled
//!   converter with its closed-form reference ([`dtdc`]),
//! * tooling around it — metrology sweeps and code-density tests
//!   ([`characterize`]) and a structural VHDL generator ([`codegen`]).
//!
//! Every conversion can run in two modes that must agree exactly: a
//! closed-form behavioral path and a structural path that schedules real
//! edges through a gate netlist. All results are reproducible: integer
//! time, deterministic event ordering and seeded pseudo-randomness.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats and the command
//! line live in the companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod characterize;
pub mod codegen;
pub mod dtdc;
pub mod error;
pub mod fine;
pub mod logic;
pub mod rng;
pub mod sim;
pub mod time;
pub mod tpg;

pub use dtdc::{ConversionResult, ConvertMode, TdcConfig};
pub use error::Error;
pub use fine::{FineCode, FineTdcConfig};
pub use sim::{Level, NetId, Netlist, NetlistBuilder, Simulator};
pub use time::{Rational, SimTime};
