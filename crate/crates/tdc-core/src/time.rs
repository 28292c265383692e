//! Integer femtosecond time base.
//!
//! All timing in this crate is exact integer arithmetic on femtoseconds.
//! Sub-picosecond tap placements (15,625 fs at the default configuration)
//! and nanosecond-scale intervals are both representable without rounding,
//! so quantization observed in results comes from the converter model and
//! never from the time representation itself.

use core::fmt;
use core::ops::{Add, AddAssign, Sub, SubAssign};

use crate::error::Error;

pub const FS_PER_PS: i64 = 1_000;
pub const FS_PER_NS: i64 = 1_000_000;
pub const FS_PER_US: i64 = 1_000_000_000;
/// Femtoseconds per second, used to derive clock periods from frequencies.
pub const FS_PER_S: i64 = 1_000_000_000_000_000;

/// A signed count of femtoseconds.
///
/// Arithmetic through the `+`/`-` operators is overflow-checked and panics
/// rather than wrapping; fallible call sites use the `checked_*` methods.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(i64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn from_fs(fs: i64) -> Self {
        SimTime(fs)
    }

    pub const fn from_ps(ps: i64) -> Self {
        SimTime(ps * FS_PER_PS)
    }

    pub const fn from_ns(ns: i64) -> Self {
        SimTime(ns * FS_PER_NS)
    }

    pub const fn from_us(us: i64) -> Self {
        SimTime(us * FS_PER_US)
    }

    pub const fn fs(self) -> i64 {
        self.0
    }

    pub fn checked_add(self, other: SimTime) -> Option<SimTime> {
        self.0.checked_add(other.0).map(SimTime)
    }

    pub fn checked_sub(self, other: SimTime) -> Option<SimTime> {
        self.0.checked_sub(other.0).map(SimTime)
    }

    pub fn checked_mul(self, factor: i64) -> Option<SimTime> {
        self.0.checked_mul(factor).map(SimTime)
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// Largest multiple of `step` that is ≤ `self` (euclidean, exact for
    /// negative times as well).
    pub fn floor_multiple(self, step: SimTime) -> SimTime {
        assert!(step.is_positive(), "step must be positive");
        SimTime(
            self.0
                .div_euclid(step.0)
                .checked_mul(step.0)
                .expect("SimTime overflow"),
        )
    }

    /// Smallest multiple of `step` that is ≥ `self`.
    pub fn ceil_multiple(self, step: SimTime) -> SimTime {
        assert!(step.is_positive(), "step must be positive");
        let q = self.0.div_euclid(step.0);
        let r = self.0.rem_euclid(step.0);
        let q = if r == 0 { q } else { q + 1 };
        SimTime(q.checked_mul(step.0).expect("SimTime overflow"))
    }

    /// Remainder of `self` modulo `step`, always in `[0, step)`.
    pub fn rem_euclid(self, step: SimTime) -> SimTime {
        assert!(step.is_positive(), "step must be positive");
        SimTime(self.0.rem_euclid(step.0))
    }

    /// Parses a decimal time with a mandatory `fs`/`ps`/`ns`/`us` unit
    /// suffix into exact femtoseconds.
    ///
    /// Decimals that do not land on an integer femtosecond count are
    /// rejected rather than silently rounded: `"62.5ps"` parses to
    /// 62,500 fs, `"0.0001fs"` is an error.
    pub fn parse(s: &str) -> Result<SimTime, Error> {
        let s = s.trim();
        let (number, unit_fs) = if let Some(n) = s.strip_suffix("fs") {
            (n, 1i64)
        } else if let Some(n) = s.strip_suffix("ps") {
            (n, FS_PER_PS)
        } else if let Some(n) = s.strip_suffix("ns") {
            (n, FS_PER_NS)
        } else if let Some(n) = s.strip_suffix("us") {
            (n, FS_PER_US)
        } else {
            return Err(Error::invalid_time(s, "missing fs/ps/ns/us unit suffix"));
        };

        let (int_part, frac_part) = match number.split_once('.') {
            Some((i, f)) => (i, f),
            None => (number, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(Error::invalid_time(s, "no digits"));
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(Error::invalid_time(s, "expected unsigned decimal digits"));
        }

        let mut mantissa: i128 = 0;
        for c in int_part.chars().chain(frac_part.chars()) {
            mantissa = mantissa
                .checked_mul(10)
                .and_then(|m| m.checked_add((c as u8 - b'0') as i128))
                .ok_or_else(|| Error::invalid_time(s, "value out of range"))?;
        }
        let scale: i128 = 10i128
            .checked_pow(frac_part.len() as u32)
            .ok_or_else(|| Error::invalid_time(s, "too many fractional digits"))?;

        let numer = mantissa
            .checked_mul(unit_fs as i128)
            .ok_or_else(|| Error::invalid_time(s, "value out of range"))?;
        if numer % scale != 0 {
            return Err(Error::invalid_time(
                s,
                "not an integer number of femtoseconds",
            ));
        }
        let fs = numer / scale;
        if fs > i64::MAX as i128 {
            return Err(Error::invalid_time(s, "value out of range"));
        }
        Ok(SimTime(fs as i64))
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, other: SimTime) -> SimTime {
        self.checked_add(other).expect("SimTime overflow")
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, other: SimTime) {
        *self = *self + other;
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, other: SimTime) -> SimTime {
        self.checked_sub(other).expect("SimTime overflow")
    }
}

impl SubAssign for SimTime {
    fn sub_assign(&mut self, other: SimTime) {
        *self = *self - other;
    }
}

impl fmt::Debug for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}fs", self.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}fs", self.0)
    }
}

/// Number of integer multiples of `step` in the half-open window
/// `[from, to)`. Returns 0 for empty windows.
pub fn multiples_in(from: SimTime, to: SimTime, step: SimTime) -> i64 {
    assert!(step.is_positive(), "step must be positive");
    if to <= from {
        return 0;
    }
    ceil_div(to.0, step.0) - ceil_div(from.0, step.0)
}

fn ceil_div(value: i64, divisor: i64) -> i64 {
    let q = value.div_euclid(divisor);
    if value.rem_euclid(divisor) != 0 {
        q + 1
    } else {
        q
    }
}

/// `value * num / den` rounded to the nearest integer, half away from zero.
/// Intermediate products are evaluated in 128-bit arithmetic.
pub fn mul_div_round(value: i64, num: i64, den: i64) -> i64 {
    assert!(den > 0, "denominator must be positive");
    let p = value as i128 * num as i128;
    let d = den as i128;
    let q = p.div_euclid(d);
    let r = p.rem_euclid(d);
    let rounded = if 2 * r >= d { q + 1 } else { q };
    i64::try_from(rounded).expect("mul_div_round overflow")
}

/// An exact ratio of femtosecond quantities, kept in lowest terms with a
/// positive denominator. Used for bin widths that need not be integers.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct Rational {
    num: i64,
    den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Rational {
        assert!(den != 0, "zero denominator");
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd(num.unsigned_abs(), den.unsigned_abs());
        if g == 0 {
            return Rational { num: 0, den: 1 };
        }
        Rational {
            num: num / g as i64,
            den: den / g as i64,
        }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    /// The exact femtosecond value when the ratio is an integer.
    pub fn as_exact_fs(&self) -> Option<i64> {
        self.is_integer().then_some(self.num)
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
