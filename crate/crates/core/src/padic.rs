//! Exact 2-adic integers: residues known modulo `2^N`, rationals with odd
//! denominator, eventually periodic digit expansions and dyadic rationals.
//!
//! Digits are always stored low-order first: index `k` holds the coefficient
//! of `2^k`. Nothing in this module touches floating point, except the
//! explicit `to_f64` conversions used at rendering boundaries.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Mask selecting the low `n` bits of a `u64` (all bits for `n >= 64`).
#[inline]
pub fn low_mask(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Inverse of an odd `a` modulo `2^n`, for `n <= 64`.
///
/// Newton iteration `b <- b (2 - a b)`; the seed `b = a` is already correct
/// modulo 8 because every odd square is `1 mod 8`.
pub fn mod_inverse_odd_u64(a: u64, n: u32) -> Result<u64> {
    if a & 1 == 0 {
        return Err(Error::EvenResidue(a.to_string()));
    }
    if n > 64 {
        return Err(Error::ResidueTooWide(n));
    }
    let mut b = a;
    for _ in 0..5 {
        b = b.wrapping_mul(2u64.wrapping_sub(a.wrapping_mul(b)));
    }
    Ok(b & low_mask(n))
}

/// Inverse of an odd `a` modulo `2^n` at arbitrary precision.
pub fn mod_inverse_odd(a: &BigUint, n: u32) -> Result<BigUint> {
    if a.is_even() {
        return Err(Error::EvenResidue(a.to_string()));
    }
    let modulus = BigUint::one() << n;
    let a = a % &modulus;
    let mut b = &a % 8u32;
    let mut bits = 3u32;
    let two = BigUint::from(2u32);
    while bits < n {
        bits = (bits * 2).min(n);
        let m = BigUint::one() << bits;
        let ab = (&a * &b) % &m;
        let corr = (&m + &two - ab) % &m;
        b = (b * corr) % &m;
    }
    Ok(b % modulus)
}

/// Outcome of the 2-adic norm at finite precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadicNorm {
    /// `|x|_2 = 2^-l` with `l` the index of the lowest set bit.
    PowerOfTwo { exponent: u32 },
    /// No bit is set among the known digits.
    ZeroAtPrecision { precision: u32 },
}

impl fmt::Display for PadicNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PadicNorm::PowerOfTwo { exponent: 0 } => write!(f, "1"),
            PadicNorm::PowerOfTwo { exponent } => write!(f, "2^-{exponent}"),
            PadicNorm::ZeroAtPrecision { precision } => write!(f, "0 (at precision {precision})"),
        }
    }
}

/// A 2-adic integer known modulo `2^precision`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruncatedPadic {
    value: BigUint,
    precision: u32,
}

impl TruncatedPadic {
    pub fn new(value: BigUint, precision: u32) -> Result<Self> {
        if precision == 0 {
            return Err(Error::InsufficientPrecision {
                needed: 1,
                available: 0,
            });
        }
        let value = value % (BigUint::one() << precision);
        Ok(TruncatedPadic { value, precision })
    }

    pub fn from_u64(value: u64, precision: u32) -> Result<Self> {
        Self::new(BigUint::from(value), precision)
    }

    /// Builds from a signed integer, reducing it modulo `2^precision`.
    pub fn from_bigint(value: &BigInt, precision: u32) -> Result<Self> {
        let modulus = BigInt::one() << precision;
        let reduced = value.mod_floor(&modulus);
        Self::new(reduced.to_biguint().expect("non-negative"), precision)
    }

    /// Builds from digits listed low-order first.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut value = BigUint::zero();
        for (k, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => value.set_bit(k as u64, true),
                _ => return Err(Error::parse(&format!("{bits:?}"), "digits must be 0 or 1")),
            }
        }
        Self::new(value, bits.len() as u32)
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.value.to_u64()
    }

    pub fn bit(&self, k: u32) -> u8 {
        u8::from(k < self.precision && self.value.bit(u64::from(k)))
    }

    /// Digits low-order first; always exactly `precision` entries.
    pub fn bits(&self) -> Vec<u8> {
        (0..self.precision).map(|k| self.bit(k)).collect()
    }

    pub fn is_odd(&self) -> bool {
        self.value.bit(0)
    }

    /// Index of the lowest set bit, or `None` if every known bit is zero.
    pub fn valuation(&self) -> Option<u32> {
        self.value.trailing_zeros().map(|v| v as u32)
    }

    pub fn norm(&self) -> PadicNorm {
        match self.valuation() {
            Some(exponent) => PadicNorm::PowerOfTwo { exponent },
            None => PadicNorm::ZeroAtPrecision {
                precision: self.precision,
            },
        }
    }

    /// Forgets all digits at and above `n` (no-op when `n >= precision`).
    pub fn truncate(&self, n: u32) -> Result<Self> {
        Self::new(self.value.clone(), n.min(self.precision))
    }

    /// Drops the low digit: `(x - a_0) / 2`, one bit of precision lost.
    pub fn drop_low_bit(&self) -> Result<Self> {
        if self.precision < 2 {
            return Err(Error::InsufficientPrecision {
                needed: 2,
                available: u64::from(self.precision),
            });
        }
        Self::new(&self.value >> 1u32, self.precision - 1)
    }

    /// Exact division by two of an even value; precision decreases by one.
    pub fn halve(&self) -> Result<Self> {
        if self.is_odd() {
            return Err(Error::GuardViolation(format!("{self} is odd")));
        }
        self.drop_low_bit()
    }

    /// `2x`, gaining one (zero) low digit.
    pub fn double(&self) -> Self {
        TruncatedPadic {
            value: &self.value << 1u32,
            precision: self.precision + 1,
        }
    }

    /// `x ≡ other (mod 2^m)`, with `m` clamped to the known precision.
    pub fn congruent(&self, other: &Self, m: u32) -> bool {
        let m = m.min(self.precision).min(other.precision);
        let mask = (BigUint::one() << m) - 1u32;
        (&self.value & &mask) == (&other.value & &mask)
    }

    /// Digits as a string, low-order first.
    pub fn to_bit_string(&self) -> String {
        self.bits()
            .iter()
            .map(|b| if *b == 1 { '1' } else { '0' })
            .collect()
    }

    /// Residue interpreted as a signed integer in `[-2^(N-1), 2^(N-1))`.
    pub fn to_signed(&self) -> BigInt {
        let v = BigInt::from(self.value.clone());
        if self.value.bit(u64::from(self.precision - 1)) {
            v - (BigInt::one() << self.precision)
        } else {
            v
        }
    }
}

impl fmt::Display for TruncatedPadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod 2^{}", self.value, self.precision)
    }
}

impl Add for &TruncatedPadic {
    type Output = TruncatedPadic;
    fn add(self, rhs: &TruncatedPadic) -> TruncatedPadic {
        let p = self.precision.min(rhs.precision);
        TruncatedPadic::new(&self.value + &rhs.value, p).expect("precision >= 1")
    }
}

impl Sub for &TruncatedPadic {
    type Output = TruncatedPadic;
    fn sub(self, rhs: &TruncatedPadic) -> TruncatedPadic {
        let p = self.precision.min(rhs.precision);
        let m = BigUint::one() << p;
        let a = &self.value % &m;
        let b = &rhs.value % &m;
        TruncatedPadic::new(a + &m - b, p).expect("precision >= 1")
    }
}

impl Mul for &TruncatedPadic {
    type Output = TruncatedPadic;
    fn mul(self, rhs: &TruncatedPadic) -> TruncatedPadic {
        let p = self.precision.min(rhs.precision);
        TruncatedPadic::new(&self.value * &rhs.value, p).expect("precision >= 1")
    }
}

impl Neg for &TruncatedPadic {
    type Output = TruncatedPadic;
    fn neg(self) -> TruncatedPadic {
        let m = BigUint::one() << self.precision;
        TruncatedPadic::new(&m - &self.value, self.precision).expect("precision >= 1")
    }
}

/// A rational number `p/q` with `q` odd, i.e. a rational 2-adic integer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OddRational(BigRational);

impl OddRational {
    pub fn new(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let r = BigRational::new(num, den);
        Self::from_ratio(r)
    }

    pub fn from_ratio(r: BigRational) -> Result<Self> {
        if r.denom().is_even() {
            return Err(Error::EvenDenominator(r.denom().to_string()));
        }
        Ok(OddRational(r))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        OddRational(BigRational::from_integer(n.into()))
    }

    pub fn from_pair(num: i64, den: i64) -> Result<Self> {
        Self::new(BigInt::from(num), BigInt::from(den))
    }

    pub fn zero() -> Self {
        Self::from_integer(0)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    /// Always positive and odd.
    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// 2-adic parity, which is the parity of the numerator.
    pub fn parity(&self) -> u8 {
        u8::from(self.numer().is_odd())
    }

    pub fn is_odd(&self) -> bool {
        self.parity() == 1
    }

    /// 2-adic valuation; `None` for zero.
    pub fn valuation(&self) -> Option<u64> {
        self.numer().trailing_zeros()
    }

    /// `|self - other|_2` as an exponent `v` meaning `2^-v`; `None` if equal.
    pub fn distance_exponent(&self, other: &Self) -> Option<u64> {
        (self - other).valuation()
    }

    /// Multiplies by `2^-1`; only defined for even values.
    pub fn halve(&self) -> Result<Self> {
        if self.is_odd() {
            return Err(Error::GuardViolation(format!("{self} is odd")));
        }
        Ok(OddRational(&self.0 / BigInt::from(2)))
    }

    /// Divides by an odd integer.
    pub fn div_odd(&self, d: i64) -> Result<Self> {
        if d % 2 == 0 {
            return Err(Error::EvenDenominator(d.to_string()));
        }
        Ok(OddRational(&self.0 / BigInt::from(d)))
    }

    pub fn scale(&self, k: i64) -> Self {
        OddRational(&self.0 * BigInt::from(k))
    }

    pub fn offset(&self, k: i64) -> Self {
        OddRational(&self.0 + BigInt::from(k))
    }

    /// Value modulo `2^n` as a truncated 2-adic integer.
    pub fn to_padic(&self, n: u32) -> Result<TruncatedPadic> {
        padic_from_rational(self, n)
    }

    /// Residue modulo `2^n` for `n <= 64`.
    pub fn residue_u64(&self, n: u32) -> Result<u64> {
        if n > 64 {
            return Err(Error::ResidueTooWide(n));
        }
        let modulus = BigInt::one() << 64u32;
        let p = self.numer().mod_floor(&modulus).to_u64().expect("reduced");
        let q = self.denom().mod_floor(&modulus).to_u64().expect("reduced");
        let qinv = mod_inverse_odd_u64(q, 64)?;
        Ok(p.wrapping_mul(qinv) & low_mask(n))
    }
}

impl fmt::Display for OddRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl Serialize for OddRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for OddRational {
    type Err = Error;

    /// Accepts `p`, `p/q`, `-p/q` and `+p/q`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (num, den) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let num: BigInt = num
            .trim_start_matches('+')
            .parse()
            .map_err(|_| Error::parse(s, "bad numerator"))?;
        let den: BigInt = den
            .parse()
            .map_err(|_| Error::parse(s, "bad denominator"))?;
        OddRational::new(num, den)
    }
}

impl From<i64> for OddRational {
    fn from(n: i64) -> Self {
        OddRational::from_integer(n)
    }
}

macro_rules! rational_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for &OddRational {
            type Output = OddRational;
            fn $method(self, rhs: &OddRational) -> OddRational {
                OddRational((&self.0).$method(&rhs.0))
            }
        }
        impl $tr for OddRational {
            type Output = OddRational;
            fn $method(self, rhs: OddRational) -> OddRational {
                OddRational(self.0.$method(rhs.0))
            }
        }
    };
}

rational_binop!(Add, add);
rational_binop!(Sub, sub);
rational_binop!(Mul, mul);

impl Neg for &OddRational {
    type Output = OddRational;
    fn neg(self) -> OddRational {
        OddRational(-&self.0)
    }
}

impl Neg for OddRational {
    type Output = OddRational;
    fn neg(self) -> OddRational {
        OddRational(-self.0)
    }
}

/// The first `n` digits of a rational 2-adic integer.
pub fn padic_from_rational(x: &OddRational, n: u32) -> Result<TruncatedPadic> {
    if n == 0 {
        return Err(Error::InsufficientPrecision {
            needed: 1,
            available: 0,
        });
    }
    let modulus = BigInt::one() << n;
    let p = x
        .numer()
        .mod_floor(&modulus)
        .to_biguint()
        .expect("non-negative");
    let q = x
        .denom()
        .mod_floor(&modulus)
        .to_biguint()
        .expect("non-negative");
    let qinv = mod_inverse_odd(&q, n)?;
    TruncatedPadic::new(p * qinv, n)
}

/// Digit stream `preperiod, period, period, ...` (low-order first) in
/// canonical form: shortest period, then shortest preperiod.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EventuallyPeriodicBits {
    preperiod: Vec<u8>,
    period: Vec<u8>,
}

impl EventuallyPeriodicBits {
    pub fn new(preperiod: Vec<u8>, period: Vec<u8>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::parse("", "period must have at least one digit"));
        }
        if preperiod.iter().chain(period.iter()).any(|&b| b > 1) {
            return Err(Error::parse("", "digits must be 0 or 1"));
        }
        let mut e = EventuallyPeriodicBits { preperiod, period };
        e.canonicalize();
        Ok(e)
    }

    pub fn purely_periodic(period: Vec<u8>) -> Result<Self> {
        Self::new(Vec::new(), period)
    }

    fn canonicalize(&mut self) {
        let l = self.period.len();
        if let Some(d) = (1..=l)
            .filter(|d| l.is_multiple_of(*d))
            .find(|&d| (d..l).all(|i| self.period[i] == self.period[i - d]))
        {
            self.period.truncate(d);
        }
        while let Some(&last) = self.preperiod.last() {
            if last != *self.period.last().expect("non-empty period") {
                break;
            }
            self.preperiod.pop();
            self.period.rotate_right(1);
        }
    }

    pub fn preperiod(&self) -> &[u8] {
        &self.preperiod
    }

    pub fn period(&self) -> &[u8] {
        &self.period
    }

    pub fn bit(&self, k: usize) -> u8 {
        let a = self.preperiod.len();
        if k < a {
            self.preperiod[k]
        } else {
            self.period[(k - a) % self.period.len()]
        }
    }

    pub fn take(&self, n: usize) -> Vec<u8> {
        (0..n).map(|k| self.bit(k)).collect()
    }

    pub fn to_padic(&self, n: u32) -> Result<TruncatedPadic> {
        TruncatedPadic::from_bits(&self.take(n as usize))
    }

    pub fn to_rational(&self) -> OddRational {
        rational_from_periodic(self)
    }

    /// Right-to-left shorthand with the repeated block in parentheses,
    /// e.g. `(0011)101` for `17/5`.
    pub fn shorthand(&self) -> String {
        let rev = |v: &[u8]| -> String {
            v.iter()
                .rev()
                .map(|b| if *b == 1 { '1' } else { '0' })
                .collect()
        };
        format!("({}){}", rev(&self.period), rev(&self.preperiod))
    }
}

fn bits_value(bits: &[u8]) -> BigInt {
    let mut v = BigInt::zero();
    for (k, &b) in bits.iter().enumerate() {
        if b == 1 {
            v.set_bit(k as u64, true);
        }
    }
    v
}

/// Sums the expansion in closed form: `A + 2^a P / (1 - 2^l)`.
pub fn rational_from_periodic(e: &EventuallyPeriodicBits) -> OddRational {
    let a = e.preperiod.len();
    let l = e.period.len();
    let head = BigRational::from_integer(bits_value(&e.preperiod));
    let p = bits_value(&e.period) << a;
    let den = BigInt::one() - (BigInt::one() << l);
    OddRational::from_ratio(head + BigRational::new(p, den)).expect("1 - 2^l is odd")
}

/// Exact digit expansion of a rational 2-adic integer, found by running the
/// shift `x -> (x - a_0)/2` until a value repeats.
pub fn periodic_from_rational(x: &OddRational) -> EventuallyPeriodicBits {
    let mut seen: HashMap<OddRational, usize> = HashMap::new();
    let mut digits = Vec::new();
    let mut cur = x.clone();
    loop {
        if let Some(&start) = seen.get(&cur) {
            let period = digits.split_off(start);
            return EventuallyPeriodicBits::new(digits, period).expect("valid digits");
        }
        seen.insert(cur.clone(), digits.len());
        let b = cur.parity();
        digits.push(b);
        cur = OddRational((cur.0 - BigInt::from(b)) / BigInt::from(2));
    }
}

/// A dyadic rational `num / 2^exp`, kept with `num` odd (or zero with `exp = 0`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    num: BigInt,
    exp: u32,
}

impl DyadicRational {
    pub fn new(num: BigInt, exp: u32) -> Self {
        let mut d = DyadicRational { num, exp };
        d.normalize();
        d
    }

    pub fn from_integer(n: i64) -> Self {
        Self::new(BigInt::from(n), 0)
    }

    pub fn zero() -> Self {
        Self::from_integer(0)
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self
            .num
            .trailing_zeros()
            .unwrap_or(0)
            .min(u64::from(self.exp));
        if tz > 0 {
            self.num >>= tz;
            self.exp -= tz as u32;
        }
    }

    pub fn num(&self) -> &BigInt {
        &self.num
    }

    pub fn exp(&self) -> u32 {
        self.exp
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        Self::new(BigInt::one(), k)
    }

    pub fn half(&self) -> Self {
        Self::new(self.num.clone(), self.exp + 1)
    }

    pub fn to_ratio(&self) -> BigRational {
        BigRational::new(self.num.clone(), BigInt::one() << self.exp)
    }

    pub fn to_f64(&self) -> f64 {
        let n = self.num.to_f64().unwrap_or(f64::NAN);
        n / 2f64.powi(self.exp as i32)
    }

    fn aligned(&self, other: &Self) -> (BigInt, BigInt, u32) {
        let e = self.exp.max(other.exp);
        (
            &self.num << (e - self.exp),
            &other.num << (e - other.exp),
            e,
        )
    }
}

impl Add for &DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        let (a, b, e) = self.aligned(rhs);
        DyadicRational::new(a + b, e)
    }
}

impl Sub for &DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: &DyadicRational) -> DyadicRational {
        let (a, b, e) = self.aligned(rhs);
        DyadicRational::new(a - b, e)
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, BigInt::one() << self.exp)
        }
    }
}

/// Formats a rational as `p` or `p/q`.
pub fn ratio_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p` or `p/q` into an arbitrary rational (denominator may be even).
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let (n, d) = t.split_once('/').unwrap_or((t, "1"));
    let n: BigInt = n
        .trim()
        .parse()
        .map_err(|_| Error::parse(s, "bad numerator"))?;
    let d: BigInt = d
        .trim()
        .parse()
        .map_err(|_| Error::parse(s, "bad denominator"))?;
    if d.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    Ok(BigRational::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> OddRational {
        s.parse().unwrap()
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(mod_inverse_odd_u64(3, 3).unwrap(), 3);
        assert_eq!(mod_inverse_odd_u64(1, 17).unwrap(), 1);
        assert_eq!(mod_inverse_odd_u64(3, 5).unwrap(), 11);
        assert!(mod_inverse_odd_u64(4, 5).is_err());
        assert_eq!(
            mod_inverse_odd(&BigUint::from(3u32), 5).unwrap(),
            BigUint::from(11u32)
        );
        assert!(mod_inverse_odd(&BigUint::from(6u32), 5).is_err());
    }

    #[test]
    fn inverse_brute_force_small_moduli() {
        for n in 1..=10u32 {
            let m = 1u64 << n;
            for a in (1..m).step_by(2) {
                let brute = (0..m).find(|b| (a * b) % m == 1).unwrap();
                assert_eq!(mod_inverse_odd_u64(a, n).unwrap(), brute);
                assert_eq!(
                    mod_inverse_odd(&BigUint::from(a), n).unwrap(),
                    BigUint::from(brute)
                );
            }
        }
    }

    #[test]
    fn rational_to_digits() {
        assert_eq!(
            padic_from_rational(&q("-1/3"), 6).unwrap().bits(),
            vec![1, 0, 1, 0, 1, 0]
        );
        assert_eq!(
            padic_from_rational(&q("-1"), 4).unwrap().bits(),
            vec![1, 1, 1, 1]
        );
        let fifth = padic_from_rational(&q("1/5"), 5).unwrap();
        assert_eq!(fifth.bits(), vec![1, 0, 1, 1, 0]);
        assert_eq!(fifth.to_u64(), Some(13));
    }

    #[test]
    fn periodic_to_rational() {
        let e = EventuallyPeriodicBits::purely_periodic(vec![1, 0]).unwrap();
        assert_eq!(rational_from_periodic(&e), q("-1/3"));
        let e = EventuallyPeriodicBits::new(vec![1], vec![1, 0]).unwrap();
        assert_eq!(rational_from_periodic(&e), q("1/3"));
        let e = EventuallyPeriodicBits::purely_periodic(vec![1, 0, 0]).unwrap();
        assert_eq!(rational_from_periodic(&e), q("-1/7"));
    }

    #[test]
    fn canonical_form() {
        // 1/3 written with a redundant preperiod and a doubled period.
        let e = EventuallyPeriodicBits::new(vec![1, 1, 0], vec![1, 0, 1, 0]).unwrap();
        let c = EventuallyPeriodicBits::new(vec![1], vec![1, 0]).unwrap();
        assert_eq!(e.to_rational(), c.to_rational());
        assert_eq!(e.preperiod(), &[1]);
        assert_eq!(e.period(), &[1, 0]);
        assert_eq!(periodic_from_rational(&q("17/5")).shorthand(), "(0011)101");
        assert_eq!(periodic_from_rational(&q("5/7")).shorthand(), "(001)1");
    }

    #[test]
    fn norm_cases() {
        let t = |b: &[u8]| TruncatedPadic::from_bits(b).unwrap().norm();
        assert_eq!(t(&[1, 1, 1, 1]), PadicNorm::PowerOfTwo { exponent: 0 });
        assert_eq!(t(&[0, 0, 1, 0]), PadicNorm::PowerOfTwo { exponent: 2 });
        assert_eq!(
            t(&[0, 0, 0, 0]),
            PadicNorm::ZeroAtPrecision { precision: 4 }
        );
    }

    #[test]
    fn precision_propagation() {
        let a = TruncatedPadic::from_u64(5, 8).unwrap();
        let b = TruncatedPadic::from_u64(7, 5).unwrap();
        assert_eq!((&a + &b).precision(), 5);
        assert_eq!((&a * &b).to_u64(), Some(35 % 32));
        assert_eq!((&b - &a).to_u64(), Some(2));
        assert_eq!((-&a).to_u64(), Some(251));
        let h = TruncatedPadic::from_u64(6, 8).unwrap().halve().unwrap();
        assert_eq!((h.to_u64(), h.precision()), (Some(3), 7));
        assert!(a.halve().is_err());
        assert_eq!(
            TruncatedPadic::from_u64(255, 8).unwrap().to_signed(),
            BigInt::from(-1)
        );
    }

    #[test]
    fn parse_and_reject() {
        assert_eq!(q(" -13/3 ").to_string(), "-13/3");
        assert_eq!(q("+10/6").to_string(), "5/3");
        assert!("1/2".parse::<OddRational>().is_err());
        assert!("1/0".parse::<OddRational>().is_err());
        assert!("x".parse::<OddRational>().is_err());
    }

    #[test]
    fn dyadic_canonical() {
        let d = DyadicRational::new(BigInt::from(12), 4);
        assert_eq!((d.num().clone(), d.exp()), (BigInt::from(3), 2));
        assert_eq!(DyadicRational::new(BigInt::zero(), 9).exp(), 0);
        assert_eq!(d.to_string(), "3/4");
        assert!(DyadicRational::pow2_neg(3) < DyadicRational::pow2_neg(2));
        let s = &d + &DyadicRational::pow2_neg(2);
        assert_eq!(s, DyadicRational::from_integer(1));
    }

    #[test]
    fn residue_of_negative_fraction() {
        assert_eq!(q("-1/3").residue_u64(6).unwrap(), 21);
        assert_eq!(q("1/3").residue_u64(4).unwrap(), 11);
        assert_eq!(q("-1").residue_u64(64).unwrap(), u64::MAX);
    }
}
