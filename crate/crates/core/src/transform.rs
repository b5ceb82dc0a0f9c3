//! Inverse parity transforms.
//!
//! Given a parity vector `S = (s_0, .., s_{j-1})`, the integers `n` with
//! `V_j(n) = S` form one residue class modulo `2^j`. Two closed forms give
//! that class:
//!
//! ```text
//! n ≡ -Σ s_k 2^k 3^-σ_k                 (mod 2^j)
//! n ≡ -1 - Σ (1 - s_k) 2^k 3^-σ_k       (mod 2^j)
//! ```
//!
//! where `σ_k = s_0 + .. + s_k`. Their difference yields the invariant
//! `Σ (-1)^s_k 2^k 3^-σ_k ≡ -1 (mod 2^j)`. Letting `j` grow turns both sums
//! into 2-adically convergent series for the inverse of the parity-sequence
//! map. All sums run on a single running power of `3^-1`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::collatz::{parity_vector, t_step, ParityVector};
use crate::error::{Error, Result};
use crate::padic::{
    low_mask, mod_inverse_odd, mod_inverse_odd_u64, EventuallyPeriodicBits, OddRational,
    TruncatedPadic,
};

/// Residue class `residue mod 2^bits`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CongruenceClass {
    residue: BigUint,
    bits: u32,
}

impl CongruenceClass {
    pub fn new(residue: BigUint, bits: u32) -> Result<Self> {
        if bits == 0 {
            return Err(Error::InsufficientPrecision {
                needed: 1,
                available: 0,
            });
        }
        let residue = residue % (BigUint::one() << bits);
        Ok(CongruenceClass { residue, bits })
    }

    /// Least nonnegative representative.
    pub fn residue(&self) -> &BigUint {
        &self.residue
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn modulus(&self) -> BigUint {
        BigUint::one() << self.bits
    }

    pub fn contains(&self, n: &BigInt) -> bool {
        let m = BigInt::from(self.modulus());
        let r = ((n % &m) + &m) % &m;
        r == BigInt::from(self.residue.clone())
    }

    pub fn to_padic(&self) -> TruncatedPadic {
        TruncatedPadic::new(self.residue.clone(), self.bits).expect("bits >= 1")
    }
}

impl fmt::Display for CongruenceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.residue, self.modulus())
    }
}

/// Walks `2^k 3^-σ_k mod 2^j` alongside each digit and folds the terms.
fn weighted_sum(s: &ParityVector, mut weight: impl FnMut(u8) -> i8) -> BigUint {
    let j = s.len() as u32;
    let m = BigUint::one() << j;
    let inv3 = mod_inverse_odd(&BigUint::from(3u32), j).expect("3 is odd");
    let mut pow3 = BigUint::one();
    let mut pos = BigUint::zero();
    let mut neg = BigUint::zero();
    for (k, &b) in s.entries().iter().enumerate() {
        if b == 1 {
            pow3 = (pow3 * &inv3) % &m;
        }
        let term = (&pow3 << k) % &m;
        match weight(b) {
            1 => pos += term,
            -1 => neg += term,
            _ => {}
        }
    }
    let pos = pos % &m;
    let neg = neg % &m;
    (pos + &m - neg) % m
}

/// Class of all `n` with parity vector `S`, via `-Σ s_k 2^k 3^-σ_k`.
pub fn invert_v1(s: &ParityVector) -> CongruenceClass {
    let sum = weighted_sum(s, |b| if b == 1 { -1 } else { 0 });
    CongruenceClass::new(sum, s.len() as u32).expect("non-empty")
}

/// Same class via `-1 - Σ (1 - s_k) 2^k 3^-σ_k`.
pub fn invert_v2(s: &ParityVector) -> CongruenceClass {
    let j = s.len() as u32;
    let m = BigUint::one() << j;
    let sum = weighted_sum(s, |b| if b == 0 { -1 } else { 0 });
    // sum already carries the minus sign; subtract one more.
    let r = (sum + &m - 1u32) % &m;
    CongruenceClass::new(r, j).expect("non-empty")
}

/// `Σ (-1)^s_k 2^k 3^-σ_k mod 2^j`; always `2^j - 1`.
pub fn invariant_sum(s: &ParityVector) -> BigUint {
    weighted_sum(s, |b| if b == 0 { 1 } else { -1 })
}

/// First formulation on packed bits, for `j <= 64`.
pub fn invert_v1_u64(bits: u64, j: u32) -> u64 {
    debug_assert!((1..=64).contains(&j));
    let inv3 = mod_inverse_odd_u64(3, 64).expect("3 is odd");
    let mut pow3 = 1u64;
    let mut acc = 0u64;
    for k in 0..j {
        if (bits >> k) & 1 == 1 {
            pow3 = pow3.wrapping_mul(inv3);
            acc = acc.wrapping_add(pow3 << k);
        }
    }
    acc.wrapping_neg() & low_mask(j)
}

/// First `n` digits of the 2-adic integer whose parity sequence starts with
/// `stream`. Both series are summed and must agree.
pub fn inverse_2adic(stream: &[u8], n: u32) -> Result<TruncatedPadic> {
    if (stream.len() as u64) < u64::from(n) {
        return Err(Error::InsufficientPrecision {
            needed: u64::from(n),
            available: stream.len() as u64,
        });
    }
    let s = ParityVector::new(stream[..n as usize].to_vec())?;
    let a = invert_v1(&s);
    let b = invert_v2(&s);
    if a != b {
        return Err(Error::Consistency(format!(
            "inverse series disagree: {a} vs {b}"
        )));
    }
    Ok(a.to_padic())
}

pub fn inverse_2adic_periodic(e: &EventuallyPeriodicBits, n: u32) -> Result<TruncatedPadic> {
    inverse_2adic(&e.take(n as usize), n)
}

/// The exact rational whose parity sequence is the eventually periodic `e`.
///
/// The periodic point solves `2^l x = 3^σ (x + c)` with
/// `c = Σ_{k<l} s_k 2^k 3^-σ_k`; it is pulled back through the preperiod by
/// exact `T`-predecessors. The result is re-checked by forward iteration.
pub fn qinv_exact_rational(e: &EventuallyPeriodicBits) -> Result<OddRational> {
    let period = e.period();
    let l = period.len();
    let sigma: u32 = period.iter().map(|&b| u32::from(b)).sum();
    let three_sigma = BigInt::from(3u32).pow(sigma);

    // 3^σ c = Σ s_k 2^k 3^(σ - σ_k), an integer.
    let mut scaled_c = BigInt::zero();
    let mut partial = 0u32;
    for (k, &b) in period.iter().enumerate() {
        if b == 1 {
            partial += 1;
            scaled_c += BigInt::from(3u32).pow(sigma - partial) << k;
        }
    }
    let den = (BigInt::one() << l) - &three_sigma;
    if den.is_zero() {
        return Err(Error::Consistency("2^l equals 3^σ".into()));
    }
    let mut x = OddRational::from_ratio(BigRational::new(scaled_c, den))?;

    for &b in e.preperiod().iter().rev() {
        x = if b == 1 {
            OddRational::from_ratio(
                (x.as_ratio() * BigInt::from(2) - BigInt::one()) / BigInt::from(3),
            )?
        } else {
            x.scale(2)
        };
        if x.parity() != b {
            return Err(Error::Consistency(format!(
                "pullback produced parity {} where {b} was required",
                x.parity()
            )));
        }
    }

    // Forward check: preperiod digits, then one full period closing on itself.
    let a = e.preperiod().len();
    let mut cur = x.clone();
    let mut periodic_point = None;
    for k in 0..a + l {
        if k == a {
            periodic_point = Some(cur.clone());
        }
        if cur.parity() != e.bit(k) {
            return Err(Error::Consistency(format!(
                "forward check failed at step {k} for {x}"
            )));
        }
        cur = t_step(&cur);
    }
    if Some(&cur) != periodic_point.as_ref() {
        return Err(Error::Consistency(format!("{x} does not close its cycle")));
    }
    Ok(x)
}

/// Parity vector of the least nonnegative representative of `c`.
pub fn parity_of_class(c: &CongruenceClass) -> ParityVector {
    let n = OddRational::from_integer(BigInt::from(c.residue().clone()));
    parity_vector(&n, c.bits() as usize).expect("bits >= 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::periodic_from_rational;

    fn pv(s: &str) -> ParityVector {
        s.parse().unwrap()
    }

    fn q(s: &str) -> OddRational {
        s.parse().unwrap()
    }

    #[test]
    fn first_formulation_examples() {
        assert_eq!(invert_v1(&pv("100")).to_string(), "5 mod 8");
        assert_eq!(invert_v1(&pv("100100")).to_string(), "13 mod 64");
        assert_eq!(invert_v1(&pv("00000")).to_string(), "0 mod 32");
    }

    #[test]
    fn second_formulation_examples() {
        assert_eq!(invert_v2(&pv("111111")).to_string(), "63 mod 64");
        assert_eq!(invert_v2(&pv("100")), invert_v1(&pv("100")));
    }

    /// Exactly one 0 at position k: n ≡ -1 - (2/3)^k.
    #[test]
    fn single_zero_vectors() {
        let j = 12u32;
        let m = 1u64 << j;
        let inv3 = mod_inverse_odd_u64(3, j).unwrap();
        for k in 0..j {
            let mut bits = vec![1u8; j as usize];
            bits[k as usize] = 0;
            let s = ParityVector::new(bits).unwrap();
            let mut t = 1u64;
            for _ in 0..k {
                t = (t * 2 % m) * inv3 % m;
            }
            let expected = (2 * m - 1 - t) % m;
            assert_eq!(invert_v2(&s).residue(), &BigUint::from(expected), "k = {k}");
        }
    }

    #[test]
    fn invariant_examples() {
        assert_eq!(invariant_sum(&pv("0")), BigUint::from(1u32));
        assert_eq!(invariant_sum(&pv("1010")), BigUint::from(15u32));
    }

    #[test]
    fn u64_path_agrees() {
        for bits in 0u64..1024 {
            let s = ParityVector::from_u64(bits, 10).unwrap();
            assert_eq!(
                invert_v1(&s).residue(),
                &BigUint::from(invert_v1_u64(bits, 10))
            );
        }
    }

    #[test]
    fn inverse_series() {
        assert_eq!(
            inverse_2adic(&[1; 40], 40).unwrap(),
            q("-1").to_padic(40).unwrap()
        );
        let e = EventuallyPeriodicBits::purely_periodic(vec![1, 0, 0]).unwrap();
        assert_eq!(
            inverse_2adic_periodic(&e, 30).unwrap(),
            q("1/5").to_padic(30).unwrap()
        );
        let e = EventuallyPeriodicBits::purely_periodic(vec![1, 0]).unwrap();
        assert_eq!(
            inverse_2adic_periodic(&e, 30).unwrap(),
            q("1").to_padic(30).unwrap()
        );
        assert!(inverse_2adic(&[1, 0], 3).is_err());
    }

    #[test]
    fn exact_inverse_examples() {
        // Parity sequence 1,0,1,0,... belongs to 1.
        let e = EventuallyPeriodicBits::purely_periodic(vec![1, 0]).unwrap();
        assert_eq!(qinv_exact_rational(&e).unwrap(), q("1"));
        // Digits of 1 are 1,0,0,...; that parity sequence belongs to -1/3.
        let e = periodic_from_rational(&q("1"));
        assert_eq!(qinv_exact_rational(&e).unwrap(), q("-1/3"));
        // Digits of -1/5 repeat 1,1,0,0; they are the parities of 5/7.
        let e = periodic_from_rational(&q("-1/5"));
        assert_eq!(e.period(), &[1, 1, 0, 0]);
        assert_eq!(qinv_exact_rational(&e).unwrap(), q("5/7"));
        let e = EventuallyPeriodicBits::purely_periodic(vec![1]).unwrap();
        assert_eq!(qinv_exact_rational(&e).unwrap(), q("-1"));
    }

    #[test]
    fn class_membership() {
        let c = invert_v1(&pv("100"));
        assert!(c.contains(&BigInt::from(13)));
        assert!(c.contains(&BigInt::from(-3)));
        assert!(!c.contains(&BigInt::from(7)));
        assert_eq!(parity_of_class(&c), pv("100"));
    }
}
