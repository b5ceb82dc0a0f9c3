//! The 3x+1 map `T`, its conjugate `U`, the shift, parity vectors and exact
//! orbit-cycle detection on rationals with odd denominator.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::padic::{OddRational, TruncatedPadic};

/// Default iteration budget for exact cycle detection.
pub const DEFAULT_BUDGET: usize = 100_000;

/// Finite 0/1 sequence `s_0 .. s_{j-1}` of parities.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParityVector(Vec<u8>);

impl ParityVector {
    pub fn new(entries: Vec<u8>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::parse("", "parity vector must not be empty"));
        }
        if entries.iter().any(|&b| b > 1) {
            return Err(Error::parse("", "parity entries must be 0 or 1"));
        }
        Ok(ParityVector(entries))
    }

    /// The `j` low bits of `bits`, low-order first.
    pub fn from_u64(bits: u64, j: u32) -> Result<Self> {
        Self::new((0..j).map(|k| ((bits >> k) & 1) as u8).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u8] {
        &self.0
    }

    /// `sigma_k = s_0 + ... + s_k` for every `k`.
    pub fn partial_sums(&self) -> Vec<u32> {
        self.0
            .iter()
            .scan(0u32, |acc, &s| {
                *acc += u32::from(s);
                Some(*acc)
            })
            .collect()
    }

    /// Packs the entries into a `u64` (entry `k` at bit `k`), for `len <= 64`.
    pub fn to_u64(&self) -> Option<u64> {
        (self.len() <= 64).then(|| {
            self.0
                .iter()
                .enumerate()
                .fold(0u64, |acc, (k, &b)| acc | (u64::from(b) << k))
        })
    }
}

impl fmt::Display for ParityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for ParityVector {
    type Err = Error;

    /// Reads a bit string with `s_0` first.
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::parse(s, "expected only 0 and 1")),
            })
            .collect::<Result<Vec<u8>>>()?;
        ParityVector::new(bits)
    }
}

/// `T(x) = (3x+1)/2` for odd `x`, `x/2` otherwise.
pub fn t_step(x: &OddRational) -> OddRational {
    let r = x.as_ratio();
    let next = if x.is_odd() {
        (r * BigInt::from(3) + BigInt::from(1)) / BigInt::from(2)
    } else {
        r / BigInt::from(2)
    };
    OddRational::from_ratio(next).expect("T preserves odd denominators")
}

/// `U(x) = (x+1)/2` for odd `x`, `3x/2` otherwise.
pub fn u_step(x: &OddRational) -> OddRational {
    let r = x.as_ratio();
    let next = if x.is_odd() {
        (r + BigInt::from(1)) / BigInt::from(2)
    } else {
        r * BigRational::new(BigInt::from(3), BigInt::from(2))
    };
    OddRational::from_ratio(next).expect("U preserves odd denominators")
}

/// Shift map on rationals: `(x-1)/2` for odd `x`, `x/2` otherwise.
pub fn shift_step(x: &OddRational) -> OddRational {
    let r = x.as_ratio() - BigInt::from(x.parity());
    OddRational::from_ratio(r / BigInt::from(2)).expect("odd denominator")
}

/// Shift map on a truncated value; loses one bit of precision.
pub fn shift_step_padic(x: &TruncatedPadic) -> Result<TruncatedPadic> {
    x.drop_low_bit()
}

/// `T` on a truncated value. The result is known to one bit less.
pub fn t_step_padic(x: &TruncatedPadic) -> Result<TruncatedPadic> {
    if x.precision() < 2 {
        return Err(Error::InsufficientPrecision {
            needed: 2,
            available: u64::from(x.precision()),
        });
    }
    let n = x.precision();
    let v = if x.is_odd() {
        (x.value() * 3u32 + 1u32) >> 1u32
    } else {
        x.value() >> 1u32
    };
    TruncatedPadic::new(v, n - 1)
}

/// One `T` step on a residue held in a `u64`; valid below the known precision minus one.
#[inline(always)]
pub fn t_step_u64(x: u64) -> u64 {
    if x & 1 == 1 {
        // (3x+1)/2 = x + (x+1)/2 without overflowing the top bit.
        x.wrapping_add((x >> 1) + 1)
    } else {
        x >> 1
    }
}

/// Parities of `x, T(x), ..., T^{j-1}(x)` packed low-order first, for `j <= 64`.
///
/// Only the low `j` bits of `x` matter.
#[inline]
pub fn parity_bits_u64(mut x: u64, j: u32) -> u64 {
    debug_assert!(j <= 64);
    let mut out = 0u64;
    for k in 0..j {
        let b = x & 1;
        out |= b << k;
        x = t_step_u64(x);
    }
    out
}

pub fn parity_vector(x: &OddRational, j: usize) -> Result<ParityVector> {
    let mut cur = x.clone();
    let mut v = Vec::with_capacity(j);
    for _ in 0..j {
        v.push(cur.parity());
        cur = t_step(&cur);
    }
    ParityVector::new(v)
}

/// Parity vector of a truncated value; needs `precision >= j`, spending one bit per step.
pub fn parity_vector_padic(x: &TruncatedPadic, j: usize) -> Result<ParityVector> {
    if (x.precision() as usize) < j {
        return Err(Error::InsufficientPrecision {
            needed: j as u64,
            available: u64::from(x.precision()),
        });
    }
    let mut v = Vec::with_capacity(j);
    let mut cur = x.clone();
    for k in 0..j {
        v.push(u8::from(cur.is_odd()));
        if k + 1 < j {
            cur = t_step_padic(&cur)?;
        }
    }
    ParityVector::new(v)
}

/// Exact T-orbit of a rational, stopped at the first repeated value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitReport {
    /// Distinct iterates `x, T(x), ...` in order.
    pub iterates: Vec<OddRational>,
    pub preperiod_length: usize,
    pub cycle_length: Option<usize>,
    pub budget_exhausted: bool,
}

impl OrbitReport {
    pub fn cycle(&self) -> Option<&[OddRational]> {
        let l = self.cycle_length?;
        Some(&self.iterates[self.preperiod_length..self.preperiod_length + l])
    }

    /// Parities of the preperiod and of one period.
    pub fn parity_split(&self) -> Option<(Vec<u8>, Vec<u8>)> {
        let l = self.cycle_length?;
        let p = self.preperiod_length;
        let par = |xs: &[OddRational]| xs.iter().map(OddRational::parity).collect::<Vec<_>>();
        Some((par(&self.iterates[..p]), par(&self.iterates[p..p + l])))
    }
}

/// Iterates `T` from `x` until a value repeats or `budget` steps are spent.
pub fn detect_orbit_cycle(x: &OddRational, budget: usize) -> OrbitReport {
    let mut index: HashMap<OddRational, usize> = HashMap::new();
    let mut iterates = Vec::new();
    let mut cur = x.clone();
    for _ in 0..=budget {
        if let Some(&start) = index.get(&cur) {
            let len = iterates.len() - start;
            return OrbitReport {
                iterates,
                preperiod_length: start,
                cycle_length: Some(len),
                budget_exhausted: false,
            };
        }
        index.insert(cur.clone(), iterates.len());
        let next = t_step(&cur);
        iterates.push(cur);
        cur = next;
    }
    OrbitReport {
        iterates,
        preperiod_length: 0,
        cycle_length: None,
        budget_exhausted: true,
    }
}
