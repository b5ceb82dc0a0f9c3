//! Self-check suites run by `c2adic verify`: functional equations, golden
//! tables, and structural invariants. Sampling uses a fixed seed.

use num_bigint::BigUint;
use num_traits::One;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::collatz::{parity_bits_u64, parity_vector, t_step_u64, ParityVector, DEFAULT_BUDGET};
use crate::cycles::{build_qn, cycle_log_lengths, enumerate_ergodic_sets, permutation_order};
use crate::embedding::{
    box_cover, check_self_affine, generate_set, standard_rational_points, verify_interval_family,
    verify_square_pair,
};
use crate::error::Result;
use crate::padic::{low_mask, OddRational};
use crate::qmap::{
    alpha, check_functional_equations, check_functional_equations_mod, q_iterate, q_iterate_mod,
    q_mod, qinv_mod, FeqStatus, EQ_Q_2XP1, EQ_Q_3XP1, EQ_Q_4XP1, EQ_Q_8XP5,
};
use crate::search::{search, verify_known_cycles, SearchConfig};
use crate::transform::{invariant_sum, invert_v1, invert_v1_u64, invert_v2};

const SEED: u64 = 0x3a1;

/// Odd ergodic set counts `N_1 .. N_16`.
pub const ERGODIC_COUNTS: [u64; 16] =
    [0, 0, 0, 3, 0, 2, 10, 11, 11, 29, 54, 91, 118, 213, 282, 436];

/// Base cycles of the odd ergodic sets of measure at least `2^-6`.
pub const BASE_CYCLES: [(u32, &[u64]); 5] = [
    (5, &[5, 17]),
    (6, &[9, 29, 25, 13]),
    (6, &[41, 61, 57, 45]),
    (8, &[27, 251, 219, 59]),
    (8, &[91, 187, 155, 123]),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Feq,
    Tables,
    Invariants,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Feq, Suite::Tables, Suite::Invariants];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Feq => "feq",
            Suite::Tables => "tables",
            Suite::Invariants => "invariants",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<CheckLine>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(CheckLine {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }
}

pub fn run_suite(suite: Suite) -> Result<SuiteReport> {
    let mut r = SuiteReport {
        suite,
        checks: Vec::new(),
    };
    match suite {
        Suite::Feq => feq(&mut r)?,
        Suite::Tables => tables(&mut r)?,
        Suite::Invariants => invariants(&mut r)?,
    }
    Ok(r)
}

/// A rational `p/q` with small odd `q` and `p/q ≡ α_k (mod 2^k)`.
pub fn guarded_rational<R: Rng>(rng: &mut R, k: u32) -> OddRational {
    let q = 2 * rng.gen_range(0..8i64) + 1;
    let p0 = (alpha(k).wrapping_mul(q as u64) & low_mask(k)) as i64;
    let p = p0 + (rng.gen_range(-8..8i64) << k);
    OddRational::from_pair(p, q).expect("odd denominator")
}

/// A rational `p/q` with small odd `q` and odd `p`.
pub fn odd_rational<R: Rng>(rng: &mut R) -> OddRational {
    let q = 2 * rng.gen_range(0..8i64) + 1;
    let p = 2 * rng.gen_range(-200..200i64) + 1;
    OddRational::from_pair(p, q).expect("odd denominator")
}

fn feq(r: &mut SuiteReport) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failures = 0;
    for _ in 0..1000 {
        let x: u64 = rng.gen::<u64>() & low_mask(48);
        if !check_functional_equations_mod(x, 48)?.all_passed() {
            failures += 1;
        }
    }
    r.check(
        "identities on 1000 residues mod 2^48",
        failures == 0,
        format!("{failures} failures"),
    );

    let families: [(&str, &str); 4] = [
        (EQ_Q_2XP1, "guarded"),
        (EQ_Q_8XP5, "guarded"),
        (EQ_Q_4XP1, "odd"),
        (EQ_Q_3XP1, "odd"),
    ];
    for (eq, kind) in families {
        let (mut pass, mut fail, mut skip) = (0, 0, 0);
        for i in 0..200u32 {
            let x = if kind == "guarded" {
                guarded_rational(&mut rng, 2 + i % 11)
            } else {
                odd_rational(&mut rng)
            };
            let rep = check_functional_equations(&x, DEFAULT_BUDGET)?;
            for c in rep.checks.iter().filter(|c| c.equation == eq) {
                match c.status {
                    FeqStatus::Pass => pass += 1,
                    FeqStatus::Fail { .. } => fail += 1,
                    FeqStatus::Skipped { .. } => skip += 1,
                }
            }
            // Identities without a guard are checked on every input.
            if !rep.all_passed() {
                fail += 1;
            }
        }
        r.check(
            format!("{eq} on 200 exact rationals"),
            fail == 0 && pass == 200,
            format!("{pass} passed, {fail} failed, {skip} skipped"),
        );
    }
    Ok(())
}

fn rat(s: &str) -> OddRational {
    s.parse().expect("literal")
}

fn tables(r: &mut SuiteReport) -> Result<()> {
    let census = enumerate_ergodic_sets(6, 12)?;
    let mut found: Vec<(u32, Vec<u64>)> = census
        .records
        .iter()
        .map(|s| (s.m0, s.elements.clone()))
        .collect();
    found.sort();
    let mut want: Vec<(u32, Vec<u64>)> =
        BASE_CYCLES.iter().map(|(m, e)| (*m, e.to_vec())).collect();
    want.sort();
    r.check(
        "ergodic base cycles of measure >= 2^-6",
        found == want,
        format!("{} found", found.len()),
    );

    let census = enumerate_ergodic_sets(12, 18)?;
    r.check(
        "ergodic set counts k <= 12 (cap 18)",
        census.counts == ERGODIC_COUNTS[..12],
        format!("{:?}", census.counts),
    );

    let known = verify_known_cycles();
    let bad: Vec<&str> = known
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    r.check(
        "known odd Q-cycles and T-cycles",
        bad.is_empty(),
        bad.join(", "),
    );

    let rep = search(&SearchConfig {
        bound: 7,
        ..SearchConfig::default()
    })?;
    let seeds: Vec<String> = rep.survivors.iter().map(|c| c.seed.to_string()).collect();
    r.check(
        "cycle search with bound 7",
        seeds == ["1", "-1", "1/3", "-1/3", "-1/5", "5/7"] && rep.all_verified(),
        seeds.join(" "),
    );

    let x = rat("1/5");
    let mut ok = true;
    let mut detail = Vec::new();
    for (j, want) in [
        (1, "-1/7"),
        (2, "17/5"),
        (3, "1863/31"),
        (-1, "13/21"),
        (-2, "-1/11"),
        (-3, "373/781"),
    ] {
        let v = q_iterate(&x, j, DEFAULT_BUDGET, 64)?.into_exact()?;
        ok &= v == rat(want);
        detail.push(format!("Q^{j} = {v}"));
    }
    for (j, low) in [(4i64, 0b0000_1101u64), (-4, 0b1000_1101)] {
        let v = q_iterate(&x, j, DEFAULT_BUDGET, 64)?.to_padic(8)?;
        ok &= v.to_u64() == Some(low);
    }
    r.check("iterates of 1/5", ok, detail.join(", "));

    let pts = standard_rational_points()?;
    let got: Vec<String> = pts
        .iter()
        .map(|p| {
            let c = p.record();
            format!("{} {} {} {}", c.r, c.q_of_r, c.x, c.y)
        })
        .collect();
    r.check(
        "rational points table",
        got == STANDARD_POINT_ROWS,
        format!("{} rows", got.len()),
    );
    Ok(())
}

/// Rows `r Q(r) X(r) Y(r)` sorted by abscissa.
pub const STANDARD_POINT_ROWS: [&str; 14] = [
    "1 -1/3 1 4/3",
    "17 -401/3 17/16 493/384",
    "9 -6377/3 9/8 8941/6144",
    "-7 -5/7 5/4 10/7",
    "5 -13/3 5/4 13/12",
    "-1/3 1 4/3 1",
    "-3 -7 3/2 5/4",
    "3 -23/3 3/2 37/24",
    "5/7 -1/5 11/7 8/5",
    "-1/5 5/7 8/5 11/7",
    "1/3 1/3 5/3 5/3",
    "-5 -3/7 7/4 12/7",
    "7 -1595/3 7/4 2797/1536",
    "-1 -1 2 2",
];

fn invariants(r: &mut SuiteReport) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);

    let mut ok = true;
    for j in 1..=10u32 {
        for bits in 0..1u64 << j {
            let s = ParityVector::from_u64(bits, j)?;
            let c1 = invert_v1(&s);
            ok &= c1 == invert_v2(&s);
            let n = OddRational::from_integer(num_bigint::BigInt::from(c1.residue().clone()));
            ok &= parity_vector(&n, j as usize)? == s;
            ok &= invert_v1_u64(bits, j) == parity_inverse_brute(bits, j);
        }
    }
    r.check("inverse transform round trip, j <= 10", ok, "");

    let mut ok = true;
    for _ in 0..1000 {
        let j = rng.gen_range(1..=64u32);
        let s = ParityVector::from_u64(rng.gen(), j)?;
        let m = BigUint::one() << j;
        ok &= invariant_sum(&s) == &m - 1u32;
    }
    r.check("signed sum is -1 mod 2^j", ok, "1000 random vectors");

    let mut ok = true;
    let mut detail = String::new();
    for n in 1..=14u32 {
        let t = build_qn(n)?;
        cycle_log_lengths(&t)?;
        let order = permutation_order(&t)?;
        if n >= 6 && order != 1 << (n - 4) {
            ok = false;
            detail = format!("order of Q_{n} is {order}");
        }
    }
    r.check("Q_n cycle lengths and orders, n <= 14", ok, detail);

    let mut ok = true;
    for _ in 0..1000 {
        let x: u64 = rng.gen::<u64>() & low_mask(12);
        ok &= q_iterate_mod(x, 2, 4) == x & low_mask(4);
        for k in 2..=8u32 {
            let n = k + 4;
            ok &= q_iterate_mod(x, 1 << k, n) == x & low_mask(n);
        }
    }
    r.check(
        "Q^2 = id mod 16, Q^(2^k) = id mod 2^(k+4)",
        ok,
        "1000 residues, 2 <= k <= 8",
    );

    let mut ok = true;
    for _ in 0..1000 {
        let a: u64 = rng.gen::<u64>() & low_mask(60);
        let b: u64 = rng.gen::<u64>() & low_mask(60);
        let d = |u: u64, v: u64| ((u ^ v) & low_mask(60)).trailing_zeros().min(60);
        ok &= d(q_mod(a, 60), q_mod(b, 60)) == d(a, b);
        ok &= qinv_mod(q_mod(a, 60), 60) == a;
        // Q(T(x)) is the shift of Q(x).
        ok &= q_mod(t_step_u64(a), 59) == q_mod(a, 60) >> 1;
    }
    r.check("isometry, inverse and conjugacy mod 2^60", ok, "1000 pairs");

    let set = generate_set(12)?;
    let mut ok = true;
    for k in 1..=12 {
        ok &= box_cover(k)?.covers(&set)?;
    }
    r.check("box covers contain the depth-12 set", ok, "");

    let mut ok = true;
    for k in 2..=16 {
        ok &= verify_interval_family(k, 6)?.all_passed();
        ok &= verify_square_pair(k, 6)?.all_passed();
    }
    r.check("interval families and square pairs, k <= 16", ok, "");

    let mut ok = true;
    for _ in 0..1000 {
        let k = rng.gen_range(2..=16u32);
        let x = (rng.gen::<u64>() & low_mask(48) & !low_mask(k)) | alpha(k);
        ok &= check_self_affine(x, k, 48)?.passed();
    }
    r.check("self-affine relations", ok, "1000 guarded parameters");
    Ok(())
}

/// Smallest `n < 2^j` with the given parity bits, by exhaustive search.
fn parity_inverse_brute(bits: u64, j: u32) -> u64 {
    (0..1u64 << j)
        .find(|&n| parity_bits_u64(n, j) == bits)
        .expect("parity map is onto")
}
