//! Search for odd rational `Q`-cycles among fractions `p/q` with small odd
//! numerator and denominator, and the locality of fixed residues of `Q_n`.
//!
//! Candidates are filtered modulo `2^w`: since `Q` is an isometry, a true
//! cycle of period `π` always satisfies `Q^π(x) ≡ x (mod 2^w)`. Survivors are
//! then checked with exact rational arithmetic.

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::collatz::{detect_orbit_cycle, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::padic::{low_mask, mod_inverse_odd_u64, OddRational};
use crate::qmap::{q_exact, q_mod, q_rational, QValue};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchConfig {
    /// Largest `|p|` and `q` considered.
    pub bound: u64,
    /// Largest period tested; a power of two.
    pub max_period: u32,
    pub modulus_bits: u32,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            bound: 999,
            max_period: 16,
            modulus_bits: 40,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bound == 0 {
            return Err(Error::GuardViolation("bound must be at least 1".into()));
        }
        if !self.max_period.is_power_of_two() {
            return Err(Error::GuardViolation(format!(
                "max period {} is not a power of two",
                self.max_period
            )));
        }
        if !(8..=64).contains(&self.modulus_bits) {
            return Err(Error::ResidueTooWide(self.modulus_bits));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleCandidate {
    pub seed: OddRational,
    /// Smallest tested period that passed the modular filter.
    pub period: u32,
    pub verified_exact: bool,
    /// `seed, Q(seed), ...` when the exact check succeeded.
    pub cycle_elements: Vec<OddRational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub config: SearchConfig,
    pub candidates_tested: u64,
    pub survivors: Vec<CycleCandidate>,
}

impl SearchReport {
    pub fn all_verified(&self) -> bool {
        self.survivors.iter().all(|c| c.verified_exact)
    }

    pub fn seeds(&self) -> Vec<&OddRational> {
        self.survivors.iter().map(|c| &c.seed).collect()
    }
}

/// Smallest power-of-two period `π <= max_period` with `Q^π(x) ≡ x mod 2^w`.
fn modular_period(x: u64, max_period: u32, w: u32) -> Option<u32> {
    let mut cur = x;
    for step in 1..=max_period {
        cur = q_mod(cur, w);
        if step.is_power_of_two() && cur == x {
            return Some(step);
        }
    }
    None
}

/// Follows `period` exact steps of `Q` from `seed`.
fn exact_cycle(seed: &OddRational, period: u32) -> Option<Vec<OddRational>> {
    let mut elems = vec![seed.clone()];
    let mut cur = seed.clone();
    for _ in 0..period {
        match q_exact(&cur, DEFAULT_BUDGET, 64).ok()?.value {
            QValue::Exact(v) => cur = v,
            QValue::Truncated(_) => return None,
        }
        elems.push(cur.clone());
    }
    let back = elems.pop()?;
    (back == *seed).then_some(elems)
}

fn candidates_for(p_abs: u64, cfg: &SearchConfig) -> (u64, Vec<CycleCandidate>) {
    let w = cfg.modulus_bits;
    let mut tested = 0;
    let mut out = Vec::new();
    for q in (1..=cfg.bound).step_by(2) {
        if p_abs.gcd(&q) != 1 {
            continue;
        }
        let qinv = mod_inverse_odd_u64(q, w).expect("q is odd");
        let base = p_abs.wrapping_mul(qinv) & low_mask(w);
        for sign in [1i64, -1] {
            tested += 1;
            let x = if sign > 0 {
                base
            } else {
                base.wrapping_neg() & low_mask(w)
            };
            let Some(period) = modular_period(x, cfg.max_period, w) else {
                continue;
            };
            let seed = OddRational::from_pair(sign * p_abs as i64, q as i64).expect("q odd");
            let elems = exact_cycle(&seed, period);
            out.push(CycleCandidate {
                seed,
                period,
                verified_exact: elems.is_some(),
                cycle_elements: elems.unwrap_or_default(),
            });
        }
    }
    (tested, out)
}

/// Runs the search. Survivors are ordered by `(|p|, q, sign)` with the
/// positive sign first, independent of thread count.
pub fn search(cfg: &SearchConfig) -> Result<SearchReport> {
    cfg.validate()?;
    let per_p: Vec<(u64, Vec<CycleCandidate>)> = (0..cfg.bound.div_ceil(2))
        .into_par_iter()
        .map(|i| candidates_for(2 * i + 1, cfg))
        .collect();
    let mut tested = 0;
    let mut survivors = Vec::new();
    for (t, s) in per_p {
        tested += t;
        survivors.extend(s);
    }
    Ok(SearchReport {
        config: cfg.clone(),
        candidates_tested: tested,
        survivors,
    })
}

/// One exact check against the known odd cycles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KnownCheck {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KnownCyclesReport {
    pub checks: Vec<KnownCheck>,
}

impl KnownCyclesReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn rat(s: &str) -> OddRational {
    s.parse().expect("literal")
}

fn join(xs: &[OddRational]) -> String {
    let parts: Vec<String> = xs.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

/// Rotates a cycle so it starts at `start`.
fn rotate_to(cycle: &[OddRational], start: &OddRational) -> Vec<OddRational> {
    let mut v = cycle.to_vec();
    if let Some(pos) = v.iter().position(|x| x == start) {
        v.rotate_left(pos);
    }
    v
}

/// Exact `Q` values on the known odd cycles, and the `T`-cycle reached from
/// each element.
pub fn verify_known_cycles() -> KnownCyclesReport {
    let q_pairs = [
        ("-1", "-1"),
        ("1/3", "1/3"),
        ("-1/3", "1"),
        ("1", "-1/3"),
        ("-1/5", "5/7"),
        ("5/7", "-1/5"),
    ];
    let t_cycles: [(&str, &[&str]); 6] = [
        ("-1", &["-1"]),
        ("1/3", &["1", "2"]),
        ("-1/3", &["0"]),
        ("1", &["1", "2"]),
        ("-1/5", &["1/5", "4/5", "2/5"]),
        ("5/7", &["5/7", "11/7", "20/7", "10/7"]),
    ];
    let mut checks = Vec::new();
    for (x, y) in q_pairs {
        let actual = q_rational(&rat(x)).map(|v| v.to_string());
        let actual = actual.unwrap_or_else(|e| format!("error: {e}"));
        checks.push(KnownCheck {
            name: format!("Q({x})"),
            expected: y.to_string(),
            passed: actual == y,
            actual,
        });
    }
    for (x, cyc) in t_cycles {
        let expected: Vec<OddRational> = cyc.iter().map(|s| rat(s)).collect();
        let report = detect_orbit_cycle(&rat(x), DEFAULT_BUDGET);
        let actual = report
            .cycle()
            .map(|c| rotate_to(c, &expected[0]))
            .unwrap_or_default();
        checks.push(KnownCheck {
            name: format!("T-cycle from {x}"),
            expected: join(&expected),
            actual: join(&actual),
            passed: actual == expected,
        });
    }
    KnownCyclesReport { checks }
}

/// A fixed odd residue of `Q_n` and how many low bits it shares with the two
/// known fixed points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedResidue {
    pub residue: u64,
    /// `v_2(x + 1)`, capped at `n`; distance to `-1` is `2^-bits`.
    pub bits_minus_one: u32,
    /// `v_2(x - 1/3)`, capped at `n`.
    pub bits_one_third: u32,
}

impl FixedResidue {
    pub fn nearest(&self) -> &'static str {
        if self.bits_minus_one >= self.bits_one_third {
            "-1"
        } else {
            "1/3"
        }
    }

    pub fn closest_bits(&self) -> u32 {
        self.bits_minus_one.max(self.bits_one_third)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedPointLocality {
    pub precision: u32,
    pub fixed: Vec<FixedResidue>,
}

fn agreement(a: u64, b: u64, n: u32) -> u32 {
    ((a ^ b) & low_mask(n)).trailing_zeros().min(n)
}

/// Odd residues fixed by `Q_n`, with their agreement to `-1` and `1/3`.
pub fn fixed_point_locality(n: u32) -> Result<FixedPointLocality> {
    if n == 0 || n > 32 {
        return Err(Error::LevelTooLarge { level: n, max: 32 });
    }
    let minus_one = low_mask(n);
    let third = mod_inverse_odd_u64(3, n)?;
    let fixed = (0..1u64 << (n - 1))
        .into_par_iter()
        .map(|i| 2 * i + 1)
        .filter(|&x| q_mod(x, n) == x)
        .map(|x| FixedResidue {
            residue: x,
            bits_minus_one: agreement(x, minus_one, n),
            bits_one_third: agreement(x, third, n),
        })
        .collect();
    Ok(FixedPointLocality {
        precision: n,
        fixed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seeds(r: &SearchReport) -> Vec<String> {
        r.survivors.iter().map(|c| c.seed.to_string()).collect()
    }

    #[test]
    fn bound_one() {
        let cfg = SearchConfig {
            bound: 1,
            ..Default::default()
        };
        let r = search(&cfg).unwrap();
        assert_eq!(r.candidates_tested, 2);
        assert_eq!(seeds(&r), vec!["1", "-1"]);
        assert!(r.all_verified());
        assert_eq!(r.survivors[0].period, 2);
        assert_eq!(r.survivors[1].period, 1);
    }

    #[test]
    fn bound_seven() {
        let cfg = SearchConfig {
            bound: 7,
            ..Default::default()
        };
        let r = search(&cfg).unwrap();
        assert_eq!(seeds(&r), vec!["1", "-1", "1/3", "-1/3", "-1/5", "5/7"]);
        assert!(r.all_verified());
        let c = &r.survivors[4];
        assert_eq!(c.cycle_elements, vec![rat("-1/5"), rat("5/7")]);
    }

    #[test]
    fn filter_keeps_planted_cycles() {
        for (s, period) in [("-1", 1), ("1/3", 1), ("-1/3", 2), ("5/7", 2)] {
            let x = rat(s).residue_u64(40).unwrap();
            assert_eq!(modular_period(x, 16, 40), Some(period), "{s}");
        }
    }

    #[test]
    fn config_checks() {
        assert!(SearchConfig {
            max_period: 12,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SearchConfig {
            bound: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SearchConfig {
            modulus_bits: 4,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn known_cycles() {
        let r = verify_known_cycles();
        for c in &r.checks {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn locality_small() {
        let l = fixed_point_locality(4).unwrap();
        let res: Vec<u64> = l.fixed.iter().map(|f| f.residue).collect();
        assert_eq!(res, vec![3, 7, 11, 15]);
        let f15 = &l.fixed[3];
        assert_eq!((f15.bits_minus_one, f15.nearest()), (4, "-1"));
        let f11 = &l.fixed[2];
        assert_eq!((f11.bits_one_third, f11.nearest()), (4, "1/3"));
        let l = fixed_point_locality(1).unwrap();
        assert_eq!(l.fixed[0].residue, 1);
        // Exhaustive cross-check at n = 8.
        let l = fixed_point_locality(8).unwrap();
        let brute: Vec<u64> = (1..256u64)
            .step_by(2)
            .filter(|&x| q_mod(x, 8) == x)
            .collect();
        assert_eq!(l.fixed.iter().map(|f| f.residue).collect::<Vec<_>>(), brute);
    }
}
