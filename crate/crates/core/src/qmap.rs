//! The automorphism `Q(x) = Σ s_k 2^k`, where `(s_k)` is the parity sequence
//! of `x` under `T`, together with its inverse and the functional equations
//! it satisfies.

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use serde::Serialize;

use crate::collatz::{detect_orbit_cycle, parity_bits_u64, t_step_padic, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::padic::{
    low_mask, mod_inverse_odd_u64, periodic_from_rational, rational_from_periodic,
    EventuallyPeriodicBits, OddRational, TruncatedPadic,
};
use crate::transform::{invert_v1_u64, qinv_exact_rational};

/// `Q(x) mod 2^n` for a residue `x` and `n <= 64`.
///
/// The `k`-th digit of `Q(x)` is the parity of `T^k(x)`, which depends only
/// on `x mod 2^(k+1)`.
#[inline]
pub fn q_mod(x: u64, n: u32) -> u64 {
    parity_bits_u64(x, n)
}

/// `Q^-1(y) mod 2^n` for `n <= 64`: the residue class with parity vector `y`.
#[inline]
pub fn qinv_mod(y: u64, n: u32) -> u64 {
    invert_v1_u64(y & low_mask(n), n)
}

/// `Q` on a truncated value of any precision; the output has the same precision.
pub fn q_truncated(x: &TruncatedPadic) -> TruncatedPadic {
    let n = x.precision();
    let mut out = BigUint::from(0u32);
    let mut cur = x.clone();
    for k in 0..n {
        if cur.is_odd() {
            out.set_bit(u64::from(k), true);
        }
        if k + 1 < n {
            cur = t_step_padic(&cur).expect("precision tracked");
        }
    }
    TruncatedPadic::new(out, n).expect("n >= 1")
}

/// `Q^-1` on a truncated value of any precision.
pub fn qinv_truncated(y: &TruncatedPadic) -> TruncatedPadic {
    let s = crate::collatz::ParityVector::new(y.bits()).expect("precision >= 1");
    crate::transform::invert_v1(&s).to_padic()
}

/// A value of `Q` (or of one of its iterates), exact when the orbit cycled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QValue {
    Exact(OddRational),
    Truncated(TruncatedPadic),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QResult {
    pub value: QValue,
    pub exact: bool,
    pub budget_exhausted: bool,
}

impl QResult {
    fn exact(x: OddRational) -> Self {
        QResult {
            value: QValue::Exact(x),
            exact: true,
            budget_exhausted: false,
        }
    }

    fn truncated(x: TruncatedPadic) -> Self {
        QResult {
            value: QValue::Truncated(x),
            exact: false,
            budget_exhausted: true,
        }
    }

    pub fn as_exact(&self) -> Option<&OddRational> {
        match &self.value {
            QValue::Exact(x) => Some(x),
            QValue::Truncated(_) => None,
        }
    }

    pub fn into_exact(self) -> Result<OddRational> {
        match self.value {
            QValue::Exact(x) => Ok(x),
            QValue::Truncated(t) => Err(Error::Inexact(t.to_string())),
        }
    }

    /// Digits modulo `2^n`, whichever form the value has.
    pub fn to_padic(&self, n: u32) -> Result<TruncatedPadic> {
        match &self.value {
            QValue::Exact(x) => x.to_padic(n),
            QValue::Truncated(t) => t.truncate(n),
        }
    }
}

/// Parity sequence of `x` as an eventually periodic expansion, if the
/// `T`-orbit of `x` cycles within `budget` steps.
pub fn parity_sequence_exact(x: &OddRational, budget: usize) -> Option<EventuallyPeriodicBits> {
    let report = detect_orbit_cycle(x, budget);
    let (pre, per) = report.parity_split()?;
    Some(EventuallyPeriodicBits::new(pre, per).expect("parities are bits"))
}

/// Exact `Q(x)` when the orbit of `x` cycles within `budget` steps;
/// otherwise `Q(x) mod 2^fallback_precision` flagged as budget-exhausted.
pub fn q_exact(x: &OddRational, budget: usize, fallback_precision: u32) -> Result<QResult> {
    match parity_sequence_exact(x, budget) {
        Some(e) => Ok(QResult::exact(rational_from_periodic(&e))),
        None => {
            let t = x.to_padic(fallback_precision)?;
            Ok(QResult::truncated(q_truncated(&t)))
        }
    }
}

/// Exact `Q(x)` with the default budget, failing if the orbit did not cycle.
pub fn q_rational(x: &OddRational) -> Result<OddRational> {
    q_exact(x, DEFAULT_BUDGET, 64)?.into_exact()
}

/// Exact `Q^-1(y)`; always rational for rational `y`.
pub fn qinv_rational(y: &OddRational) -> Result<OddRational> {
    qinv_exact_rational(&periodic_from_rational(y))
}

/// `Q^j(x)`; negative `j` iterates the inverse. Falls back to `mod 2^precision`
/// as soon as one forward step does not cycle within `budget`.
pub fn q_iterate(x: &OddRational, j: i64, budget: usize, precision: u32) -> Result<QResult> {
    let mut cur = x.clone();
    if j < 0 {
        for _ in 0..j.unsigned_abs() {
            cur = qinv_rational(&cur)?;
        }
        return Ok(QResult::exact(cur));
    }
    for done in 0..j {
        let step = q_exact(&cur, budget, precision)?;
        match step.value {
            QValue::Exact(v) => cur = v,
            QValue::Truncated(mut t) => {
                for _ in done + 1..j {
                    t = q_truncated(&t);
                }
                return Ok(QResult::truncated(t));
            }
        }
    }
    Ok(QResult::exact(cur))
}

/// `Q^j(x) mod 2^n` on residues (`n <= 64`).
pub fn q_iterate_mod(x: u64, j: i64, n: u32) -> u64 {
    let mut cur = x & low_mask(n);
    for _ in 0..j.unsigned_abs() {
        cur = if j >= 0 {
            q_mod(cur, n)
        } else {
            qinv_mod(cur, n)
        };
    }
    cur
}

/// `α_k = -1 - (-2)^(k-2) mod 2^k`, for `2 <= k <= 64`.
pub fn alpha(k: u32) -> u64 {
    assert!((2..=64).contains(&k), "alpha_k needs 2 <= k <= 64");
    let p = 1u64 << (k - 2);
    let signed = if k.is_multiple_of(2) {
        // (-2)^(k-2) = +2^(k-2)
        0u64.wrapping_sub(1).wrapping_sub(p)
    } else {
        0u64.wrapping_sub(1).wrapping_add(p)
    };
    signed & low_mask(k)
}

/// The unique `k >= 2` with `x ≡ α_k (mod 2^k)`, searched up to `max_k <= 64`.
pub fn guard_level(x: u64, max_k: u32) -> Option<u32> {
    (2..=max_k.min(64)).find(|&k| x & low_mask(k) == alpha(k))
}

/// Pass/fail/skip status of one functional identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FeqStatus {
    Pass,
    Fail { detail: String },
    Skipped { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FeqCheck {
    pub equation: &'static str,
    #[serde(flatten)]
    pub status: FeqStatus,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FeqReport {
    pub checks: Vec<FeqCheck>,
}

impl FeqReport {
    fn push(&mut self, equation: &'static str, status: FeqStatus) {
        self.checks.push(FeqCheck { equation, status });
    }

    fn compare<T: PartialEq + std::fmt::Display>(
        &mut self,
        equation: &'static str,
        lhs: T,
        rhs: T,
    ) {
        let status = if lhs == rhs {
            FeqStatus::Pass
        } else {
            FeqStatus::Fail {
                detail: format!("{lhs} != {rhs}"),
            }
        };
        self.push(equation, status);
    }

    fn skip(&mut self, equation: &'static str, reason: impl Into<String>) {
        self.push(
            equation,
            FeqStatus::Skipped {
                reason: reason.into(),
            },
        );
    }

    pub fn all_passed(&self) -> bool {
        self.checks
            .iter()
            .all(|c| !matches!(c.status, FeqStatus::Fail { .. }))
    }

    pub fn passed(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.status == FeqStatus::Pass)
            .count()
    }
}

pub const EQ_QINV_2X: &str = "Qinv(2x) = 2 Qinv(x)";
pub const EQ_QINV_2XP1: &str = "Qinv(2x+1) = (2 Qinv(x) - 1)/3";
pub const EQ_Q_2X: &str = "Q(2x) = 2 Q(x)";
pub const EQ_Q_2XP1: &str = "Q(2x+1) = 2 Q(x) - 2^k + 1";
pub const EQ_Q_4XP1: &str = "Q(4x+1) = 4 Q(x) - 3";
pub const EQ_Q_8XP5: &str = "Q(8x+5) = 8 Q(x) - 2^(k+2) + 1";
pub const EQ_Q_3XP1: &str = "Q(3x+1) = Q(x) - 1";

/// Checks every identity on a residue `x` known modulo `2^n` (`n <= 61`).
///
/// Each side is computed at the precision it is actually determined to:
/// `Q(2x)` is known to `n+1` bits when `Q(x)` is known to `n`, and so on.
pub fn check_functional_equations_mod(x: u64, n: u32) -> Result<FeqReport> {
    if n == 0 || n > 61 {
        return Err(Error::ResidueTooWide(n));
    }
    let x = x & low_mask(n);
    let qx = q_mod(x, n);
    let qix = qinv_mod(x, n);
    let m = |bits: u32| low_mask(bits);
    let mut r = FeqReport::default();

    r.compare(EQ_QINV_2X, qinv_mod(2 * x, n + 1), (2 * qix) & m(n + 1));
    let inv3 = mod_inverse_odd_u64(3, 64)?;
    r.compare(
        EQ_QINV_2XP1,
        qinv_mod(2 * x + 1, n + 1),
        (2 * qix).wrapping_sub(1).wrapping_mul(inv3) & m(n + 1),
    );
    r.compare(EQ_Q_2X, q_mod(2 * x, n + 1), (2 * qx) & m(n + 1));

    match guard_level(x, n) {
        Some(k) => {
            let rhs = (2 * qx).wrapping_sub(1u64 << k).wrapping_add(1) & m(n + 1);
            r.compare(EQ_Q_2XP1, q_mod(2 * x + 1, n + 1), rhs);
            let rhs = (8 * qx).wrapping_sub(1u64 << (k + 2)).wrapping_add(1) & m(n + 3);
            r.compare(EQ_Q_8XP5, q_mod(8 * x + 5, n + 3), rhs);
        }
        None => {
            r.skip(EQ_Q_2XP1, format!("no k <= {n} with x ≡ α_k (mod 2^k)"));
            r.skip(EQ_Q_8XP5, format!("no k <= {n} with x ≡ α_k (mod 2^k)"));
        }
    }

    if x & 1 == 1 {
        r.compare(
            EQ_Q_4XP1,
            q_mod(4 * x + 1, n + 2),
            (4 * qx).wrapping_sub(3) & m(n + 2),
        );
        r.compare(
            EQ_Q_3XP1,
            q_mod(x.wrapping_mul(3).wrapping_add(1) & m(n), n),
            qx.wrapping_sub(1) & m(n),
        );
    } else {
        r.skip(EQ_Q_4XP1, "x is even");
        r.skip(EQ_Q_3XP1, "x is even");
    }
    Ok(r)
}

/// Checks every identity exactly on a rational `x`.
///
/// Identities involving `Q` need the relevant `T`-orbits to cycle within
/// `budget`; otherwise that identity is reported as skipped.
pub fn check_functional_equations(x: &OddRational, budget: usize) -> Result<FeqReport> {
    let mut r = FeqReport::default();
    let q = |v: &OddRational| -> Result<Option<OddRational>> {
        Ok(q_exact(v, budget, 64)?.as_exact().cloned())
    };
    let two_x = x.scale(2);
    let two_x1 = two_x.offset(1);

    let qix = qinv_rational(x)?;
    r.compare(EQ_QINV_2X, qinv_rational(&two_x)?, qix.scale(2));
    r.compare(
        EQ_QINV_2XP1,
        qinv_rational(&two_x1)?,
        qix.scale(2).offset(-1).div_odd(3)?,
    );

    let Some(qx) = q(x)? else {
        for eq in [EQ_Q_2X, EQ_Q_2XP1, EQ_Q_4XP1, EQ_Q_8XP5, EQ_Q_3XP1] {
            r.skip(eq, "orbit of x did not cycle within budget");
        }
        return Ok(r);
    };

    let exact_or_skip = |r: &mut FeqReport,
                         eq: &'static str,
                         lhs_arg: &OddRational,
                         rhs: OddRational|
     -> Result<()> {
        match q(lhs_arg)? {
            Some(lhs) => r.compare(eq, lhs, rhs),
            None => r.skip(
                eq,
                format!("orbit of {lhs_arg} did not cycle within budget"),
            ),
        }
        Ok(())
    };

    exact_or_skip(&mut r, EQ_Q_2X, &two_x, qx.scale(2))?;

    let residue = x.residue_u64(64)?;
    match guard_level(residue, 64) {
        Some(k) => {
            let pk = OddRational::from_integer(BigInt::one() << k);
            exact_or_skip(
                &mut r,
                EQ_Q_2XP1,
                &two_x1,
                qx.scale(2) - pk.clone() + OddRational::from(1),
            )?;
            exact_or_skip(
                &mut r,
                EQ_Q_8XP5,
                &x.scale(8).offset(5),
                qx.scale(8) - pk.scale(4) + OddRational::from(1),
            )?;
        }
        None => {
            r.skip(EQ_Q_2XP1, "no k <= 64 with x ≡ α_k (mod 2^k)");
            r.skip(EQ_Q_8XP5, "no k <= 64 with x ≡ α_k (mod 2^k)");
        }
    }

    if x.is_odd() {
        exact_or_skip(
            &mut r,
            EQ_Q_4XP1,
            &x.scale(4).offset(1),
            qx.scale(4).offset(-3),
        )?;
        exact_or_skip(&mut r, EQ_Q_3XP1, &x.scale(3).offset(1), qx.offset(-1))?;
    } else {
        r.skip(EQ_Q_4XP1, "x is even");
        r.skip(EQ_Q_3XP1, "x is even");
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> OddRational {
        s.parse().unwrap()
    }

    fn qe(s: &str) -> OddRational {
        q_rational(&q(s)).unwrap()
    }

    #[test]
    fn q_mod_examples() {
        assert_eq!(q_mod(1, 4), 5);
        assert_eq!(q_mod(5, 5), 17);
        assert_eq!(q_mod(0, 20), 0);
    }

    #[test]
    fn qinv_mod_examples() {
        assert_eq!(qinv_mod(5, 4), 1);
        assert_eq!(qinv_mod(1, 6), 21);
        assert_eq!(qinv_mod(0, 9), 0);
    }

    #[test]
    fn exact_values() {
        assert_eq!(qe("1/5"), q("-1/7"));
        assert_eq!(qe("5/7"), q("-1/5"));
        assert_eq!(qe("5"), q("-13/3"));
        assert_eq!(qe("7"), q("-1595/3"));
        assert_eq!(qinv_rational(&q("1")).unwrap(), q("-1/3"));
    }

    #[test]
    fn iterates_of_one_fifth() {
        let it = |j| {
            q_iterate(&q("1/5"), j, DEFAULT_BUDGET, 64)
                .unwrap()
                .into_exact()
                .unwrap()
        };
        assert_eq!(it(2), q("17/5"));
        assert_eq!(it(-1), q("13/21"));
        assert_eq!(it(-2), q("-1/11"));
    }

    #[test]
    fn truncated_agrees_with_u64() {
        for x in [0u64, 1, 5, 27, 12345, u64::MAX >> 3] {
            let t = TruncatedPadic::from_u64(x, 60).unwrap();
            assert_eq!(q_truncated(&t).to_u64(), Some(q_mod(x, 60)));
            assert_eq!(qinv_truncated(&t).to_u64(), Some(qinv_mod(x, 60)));
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let r = q_exact(&q("27"), 10, 32).unwrap();
        assert!(!r.exact && r.budget_exhausted);
        assert_eq!(r.to_padic(32).unwrap().to_u64(), Some(q_mod(27, 32)));
        let r = q_iterate(&q("27"), 2, 10, 32).unwrap();
        assert_eq!(
            r.to_padic(32).unwrap().to_u64(),
            Some(q_mod(q_mod(27, 32), 32))
        );
    }

    #[test]
    fn alpha_values() {
        assert_eq!(alpha(2), 2);
        assert_eq!(alpha(3), 1);
        assert_eq!(alpha(4), 11);
        assert_eq!(guard_level(2, 10), Some(2));
        assert_eq!(guard_level(u64::MAX, 64), None);
    }

    #[test]
    fn feq_examples() {
        assert_eq!(qinv_rational(&q("2")).unwrap(), q("-2/3"));
        // Q(5) = 2 Q(2) - 3 with Q(2) = 2 Q(1) = -2/3.
        assert_eq!(qe("2"), q("-2/3"));
        assert_eq!(qe("5"), qe("2").scale(2).offset(-3));
        // Q(4) = Q(1) - 1 = 4 Q(1).
        assert_eq!(qe("4"), q("-4/3"));
        assert_eq!(qe("4"), qe("1").offset(-1));
    }

    #[test]
    fn feq_reports() {
        let r = check_functional_equations(&q("2"), DEFAULT_BUDGET).unwrap();
        assert!(r.all_passed(), "{r:?}");
        assert_eq!(r.passed(), 5);
        let r = check_functional_equations(&q("1"), DEFAULT_BUDGET).unwrap();
        assert!(r.all_passed(), "{r:?}");
        let r = check_functional_equations_mod(11, 20).unwrap();
        assert!(r.all_passed() && r.passed() == 7, "{r:?}");
    }
}
