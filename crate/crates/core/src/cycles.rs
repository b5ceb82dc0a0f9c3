//! Permutations `Q_n` induced by `Q` on `Z/2^n`, their cycle structure, and
//! the census of odd ergodic sets.
//!
//! Tables store only the odd half: index `i` stands for the residue `2i + 1`
//! and holds the index of `Q_n(2i + 1)`. The even half follows from
//! `Q(2x) = 2 Q(x)`. A table at level `n` projects onto every lower level by
//! masking, so one top-level table serves a whole tower of levels.
//!
//! A cycle `C` of `Q_m` of length `2^j` has an *ever-doubling period* when its
//! lift to every level `n > m` is a single cycle of length `2^(n-m+j)`. For
//! `j >= 2` it suffices that the lift two levels up has length `2^(j+2)`;
//! shorter cycles are first followed upward until they reach length 4. The
//! closure of such a cycle is an ergodic set of measure `2^(j-m)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::low_mask;
use crate::qmap::q_mod;

/// Largest table level built unless the caller raises it.
pub const DEFAULT_MAX_LEVEL: u32 = 26;

/// Highest base level searched by default; tables go two levels higher.
pub const DEFAULT_LEVEL_CAP: u32 = 26;

/// Base levels seen so far stay within `k + 9` for sets of measure `2^-k`
/// (`k <= 16`), so this cap leaves one level of slack.
pub fn default_level_cap(max_k: u32) -> u32 {
    (max_k + 10).min(DEFAULT_LEVEL_CAP)
}

const UNSET: u8 = u8::MAX;

/// `Q_n` restricted to odd residues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationTable {
    level: u32,
    map: Vec<u32>,
}

impl PermutationTable {
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Number of odd residues, `2^(level-1)`.
    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn index_map(&self) -> &[u32] {
        &self.map
    }

    /// `Q_n(x)` for odd `x`.
    pub fn apply(&self, x: u64) -> u64 {
        debug_assert!(x & 1 == 1);
        let i = ((x & low_mask(self.level)) >> 1) as usize;
        2 * u64::from(self.map[i]) + 1
    }

    /// `Q_n(x)` for any residue, using `Q(2x) = 2 Q(x)` on the even side.
    pub fn apply_any(&self, x: u64) -> u64 {
        let x = x & low_mask(self.level);
        if x == 0 {
            return 0;
        }
        let v = x.trailing_zeros();
        let odd = x >> v;
        let sub = self.level - v;
        (self.apply(odd) & low_mask(sub)) << v
    }

    /// The table of `Q_m` for `m <= level`.
    pub fn project(&self, m: u32) -> Result<PermutationTable> {
        if m == 0 || m > self.level {
            return Err(Error::LevelTooLarge {
                level: m,
                max: self.level,
            });
        }
        let mask = low_mask(m - 1) as u32;
        let size = 1usize << (m - 1);
        Ok(PermutationTable {
            level: m,
            map: self.map[..size].iter().map(|&y| y & mask).collect(),
        })
    }
}

pub fn build_qn(n: u32) -> Result<PermutationTable> {
    build_qn_with_limit(n, DEFAULT_MAX_LEVEL)
}

/// Builds `Q_n` on odd residues in parallel and checks it is a bijection.
pub fn build_qn_with_limit(n: u32, max_level: u32) -> Result<PermutationTable> {
    if n == 0 || n > max_level || n > 32 {
        return Err(Error::LevelTooLarge {
            level: n,
            max: max_level.min(32),
        });
    }
    let size = 1u64 << (n - 1);
    let map: Vec<u32> = (0..size)
        .into_par_iter()
        .map(|i| (q_mod(2 * i + 1, n) >> 1) as u32)
        .collect();
    let mut seen = vec![false; map.len()];
    for &y in &map {
        let slot = &mut seen[y as usize];
        if *slot {
            return Err(Error::Consistency(format!("Q_{n} is not injective")));
        }
        *slot = true;
    }
    Ok(PermutationTable { level: n, map })
}

/// A cycle of `Q_m` on odd residues, listed from its smallest element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CycleRecord {
    pub level: u32,
    pub elements: Vec<u64>,
}

impl CycleRecord {
    pub fn length(&self) -> usize {
        self.elements.len()
    }

    pub fn log2_length(&self) -> u32 {
        self.elements.len().trailing_zeros()
    }

    /// `k` such that the balls around the elements have total measure `2^-k`.
    pub fn measure_exponent(&self) -> u32 {
        self.level - self.log2_length()
    }
}

fn walk_cycle(map: impl Fn(usize) -> usize, start: usize) -> Vec<usize> {
    let mut out = vec![start];
    let mut y = map(start);
    while y != start {
        out.push(y);
        y = map(y);
    }
    out
}

fn check_power_of_two(level: u32, len: usize) -> Result<()> {
    if len.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::Consistency(format!(
            "Q_{level} has a cycle of length {len}, not a power of two"
        )))
    }
}

/// All cycles of the table, ordered by smallest element.
pub fn cycle_decomposition(t: &PermutationTable) -> Result<Vec<CycleRecord>> {
    let mut seen = vec![false; t.len()];
    let mut out = Vec::new();
    for i in 0..t.len() {
        if seen[i] {
            continue;
        }
        let cyc = walk_cycle(|x| t.map[x] as usize, i);
        check_power_of_two(t.level, cyc.len())?;
        for &c in &cyc {
            seen[c] = true;
        }
        out.push(CycleRecord {
            level: t.level,
            elements: cyc.into_iter().map(|c| 2 * c as u64 + 1).collect(),
        });
    }
    Ok(out)
}

/// `log2` of the cycle length through every odd residue of `Q_m`, where the
/// map is `top` masked down to level `m`.
fn log_lengths_projected(top: &[u32], m: u32) -> Result<Vec<u8>> {
    let size = 1usize << (m - 1);
    let mask = low_mask(m - 1) as u32;
    let mut out = vec![UNSET; size];
    for i in 0..size {
        if out[i] != UNSET {
            continue;
        }
        let mut len = 1usize;
        let mut y = (top[i] & mask) as usize;
        while y != i {
            len += 1;
            y = (top[y] & mask) as usize;
        }
        check_power_of_two(m, len)?;
        let lg = len.trailing_zeros() as u8;
        out[i] = lg;
        let mut y = (top[i] & mask) as usize;
        while y != i {
            out[y] = lg;
            y = (top[y] & mask) as usize;
        }
    }
    Ok(out)
}

/// Per-residue `log2` cycle lengths of a table.
pub fn cycle_log_lengths(t: &PermutationTable) -> Result<Vec<u8>> {
    log_lengths_projected(&t.map, t.level)
}

/// Order of `Q_n` on odd residues; the maximal cycle length, since all
/// lengths are powers of two.
pub fn permutation_order(t: &PermutationTable) -> Result<u64> {
    let lg = cycle_log_lengths(t)?;
    Ok(1u64 << lg.iter().copied().max().unwrap_or(0))
}

/// How a cycle of `Q_m` lifts to `Q_{m+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiftOutcome {
    /// Two cycles of the same length.
    Splits(CycleRecord, CycleRecord),
    /// One cycle of twice the length.
    Doubles(CycleRecord),
}

fn cycle_through(t: &PermutationTable, x: u64) -> CycleRecord {
    let start = ((x & low_mask(t.level)) >> 1) as usize;
    let mut idx = walk_cycle(|y| t.map[y] as usize, start);
    let min_pos = idx
        .iter()
        .enumerate()
        .min_by_key(|(_, &v)| v)
        .map(|(p, _)| p)
        .unwrap_or(0);
    idx.rotate_left(min_pos);
    CycleRecord {
        level: t.level,
        elements: idx.into_iter().map(|c| 2 * c as u64 + 1).collect(),
    }
}

/// Traces the two lifts of `c` through `upper`, which must be `Q_{m+1}`.
pub fn lift_classification(c: &CycleRecord, upper: &PermutationTable) -> Result<LiftOutcome> {
    if upper.level != c.level + 1 {
        return Err(Error::LevelTooLarge {
            level: upper.level,
            max: c.level + 1,
        });
    }
    let first = c.elements[0];
    let a = cycle_through(upper, first);
    if a.length() == 2 * c.length() {
        return Ok(LiftOutcome::Doubles(a));
    }
    if a.length() != c.length() {
        return Err(Error::Consistency(format!(
            "lift of a {}-cycle has length {}",
            c.length(),
            a.length()
        )));
    }
    let b = cycle_through(upper, first + (1u64 << c.level));
    Ok(if a.elements[0] <= b.elements[0] {
        LiftOutcome::Splits(a, b)
    } else {
        LiftOutcome::Splits(b, a)
    })
}

/// Result of the ever-doubling test, which needs tables a few levels up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EverDoubling {
    Yes,
    No,
    /// The test needs a level above the available tables.
    Indeterminate,
}

/// Cycle-length data for every level up to a top table.
pub struct TableTower {
    top: PermutationTable,
    /// `log_lengths[m - 1][i]`: `log2` of the cycle length of `2i+1` in `Q_m`.
    log_lengths: Vec<Vec<u8>>,
}

impl TableTower {
    pub fn build(top_level: u32) -> Result<Self> {
        Self::build_with_limit(top_level, DEFAULT_MAX_LEVEL)
    }

    pub fn build_with_limit(top_level: u32, max_level: u32) -> Result<Self> {
        let top = build_qn_with_limit(top_level, max_level)?;
        let log_lengths = (1..=top_level)
            .into_par_iter()
            .map(|m| log_lengths_projected(&top.map, m))
            .collect::<Result<Vec<_>>>()?;
        Ok(TableTower { top, log_lengths })
    }

    pub fn top_level(&self) -> u32 {
        self.top.level
    }

    pub fn top(&self) -> &PermutationTable {
        &self.top
    }

    pub fn table(&self, m: u32) -> Result<PermutationTable> {
        self.top.project(m)
    }

    /// `log2` of the length of the `Q_m`-cycle through odd `x`.
    pub fn log_length(&self, m: u32, x: u64) -> u8 {
        self.log_lengths[(m - 1) as usize][((x & low_mask(m)) >> 1) as usize]
    }

    fn log_length_at(&self, m: u32, index: usize) -> u8 {
        self.log_lengths[(m - 1) as usize][index]
    }

    fn ever_doubling_at(&self, m: u32, index: usize) -> EverDoubling {
        let top = self.top.level;
        let mut level = m;
        let mut lg = self.log_length_at(m, index);
        while lg < 2 {
            level += 1;
            if level > top {
                return EverDoubling::Indeterminate;
            }
            if self.log_length_at(level, index) != lg + 1 {
                return EverDoubling::No;
            }
            lg += 1;
        }
        if level + 2 > top {
            return EverDoubling::Indeterminate;
        }
        if self.log_length_at(level + 2, index) == lg + 2 {
            EverDoubling::Yes
        } else {
            EverDoubling::No
        }
    }
}

/// Whether `c` has an ever-doubling period.
pub fn is_ever_doubling(c: &CycleRecord, tower: &TableTower) -> EverDoubling {
    if c.level > tower.top_level() {
        return EverDoubling::Indeterminate;
    }
    let index = (c.elements[0] >> 1) as usize;
    tower.ever_doubling_at(c.level, index)
}

/// One odd ergodic set, described by its cycle at the lowest level where it
/// is already an ever-doubling cycle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ErgodicSetRecord {
    /// Measure is `2^-k`.
    pub k: u32,
    pub m0: u32,
    pub length: usize,
    pub elements: Vec<u64>,
    pub measure: String,
}

impl ErgodicSetRecord {
    pub fn base_cycle(&self) -> CycleRecord {
        CycleRecord {
            level: self.m0,
            elements: self.elements.clone(),
        }
    }
}

/// Odd ergodic sets of measure `2^-k` for `k <= max_k`, complete for base
/// levels up to `level_cap`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ErgodicCensus {
    pub max_k: u32,
    pub level_cap: u32,
    pub table_level: u32,
    /// `counts[k - 1] = N_k`.
    pub counts: Vec<u64>,
    pub records: Vec<ErgodicSetRecord>,
    /// Candidates the tables could not decide, by `k`.
    pub undecided: Vec<u64>,
}

impl ErgodicCensus {
    pub fn count(&self, k: u32) -> u64 {
        self.counts[(k - 1) as usize]
    }
}

/// Enumerates odd ergodic sets. Each set is reported once, at the lowest
/// level `m0` where its cycle already has the set's measure: a cycle whose
/// parent one level down has half its length is the doubling of that parent
/// and is skipped.
pub fn enumerate_ergodic_sets(max_k: u32, level_cap: u32) -> Result<ErgodicCensus> {
    enumerate_ergodic_sets_with_limit(max_k, level_cap, DEFAULT_MAX_LEVEL + 2)
}

pub fn enumerate_ergodic_sets_with_limit(
    max_k: u32,
    level_cap: u32,
    max_table_level: u32,
) -> Result<ErgodicCensus> {
    if max_k == 0 || level_cap < max_k + 2 {
        return Err(Error::GuardViolation(format!(
            "level cap {level_cap} must be at least max_k + 2 = {}",
            max_k + 2
        )));
    }
    let tower = TableTower::build_with_limit(level_cap + 2, max_table_level)?;
    enumerate_in_tower(&tower, max_k, level_cap)
}

/// Same census on an already built tower (whose top must be `level_cap + 2`
/// or higher for a complete answer).
pub fn enumerate_in_tower(tower: &TableTower, max_k: u32, level_cap: u32) -> Result<ErgodicCensus> {
    let level_cap = level_cap.min(tower.top_level());
    let per_level: Vec<(Vec<ErgodicSetRecord>, Vec<u64>)> = (1..=level_cap)
        .into_par_iter()
        .map(|m| census_at_level(tower, m, max_k))
        .collect();

    let mut counts = vec![0u64; max_k as usize];
    let mut undecided = vec![0u64; max_k as usize];
    let mut records = Vec::new();
    for (recs, und) in per_level {
        for r in recs {
            counts[(r.k - 1) as usize] += 1;
            records.push(r);
        }
        for (u, v) in undecided.iter_mut().zip(und) {
            *u += v;
        }
    }
    records.sort_by(|a, b| (a.k, a.m0, a.elements[0]).cmp(&(b.k, b.m0, b.elements[0])));
    Ok(ErgodicCensus {
        max_k,
        level_cap,
        table_level: tower.top_level(),
        counts,
        records,
        undecided,
    })
}

fn census_at_level(tower: &TableTower, m: u32, max_k: u32) -> (Vec<ErgodicSetRecord>, Vec<u64>) {
    let size = 1usize << (m - 1);
    let mask = low_mask(m - 1) as u32;
    let map = tower.top.index_map();
    let mut seen = vec![false; size];
    let mut records = Vec::new();
    let mut undecided = vec![0u64; max_k as usize];
    for i in 0..size {
        if seen[i] {
            continue;
        }
        let cyc = walk_cycle(|y| (map[y] & mask) as usize, i);
        for &c in &cyc {
            seen[c] = true;
        }
        let lg = cyc.len().trailing_zeros();
        let k = m - lg;
        if k > max_k {
            continue;
        }
        if m > 1 {
            let parent = i & (low_mask(m - 2) as usize);
            if u32::from(tower.log_length_at(m - 1, parent)) + 1 == lg {
                continue;
            }
        }
        match tower.ever_doubling_at(m, i) {
            EverDoubling::Yes => records.push(ErgodicSetRecord {
                k,
                m0: m,
                length: cyc.len(),
                elements: cyc.iter().map(|&c| 2 * c as u64 + 1).collect(),
                measure: format!("1/2^{k}"),
            }),
            EverDoubling::No => {}
            EverDoubling::Indeterminate => undecided[(k - 1) as usize] += 1,
        }
    }
    (records, undecided)
}

/// Total measure of the listed odd ergodic sets, and of the full ergodic
/// domain obtained by adding the even sets `2^m C` (same total again).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureSummary {
    pub odd_total: BigRational,
    pub full_total: BigRational,
}

impl MeasureSummary {
    pub fn odd_f64(&self) -> f64 {
        self.odd_total.to_f64().unwrap_or(f64::NAN)
    }

    pub fn full_f64(&self) -> f64 {
        self.full_total.to_f64().unwrap_or(f64::NAN)
    }
}

/// Sums `N_k 2^-k` over `counts[k - 1] = N_k`.
pub fn measure_summary(counts: &[u64]) -> MeasureSummary {
    let mut odd = BigRational::zero();
    for (i, &n) in counts.iter().enumerate() {
        let k = i + 1;
        odd += BigRational::new(BigInt::from(n), BigInt::from(1u8) << k);
    }
    // Each odd set of measure 2^-k yields even sets of measure 2^-(k+m), m >= 1.
    let full = &odd * BigInt::from(2);
    MeasureSummary {
        odd_total: odd,
        full_total: full,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn has_cycle(cs: &[CycleRecord], elems: &[u64]) -> bool {
        cs.iter().any(|c| c.elements == elems)
    }

    #[test]
    fn small_tables() {
        let q1 = build_qn(1).unwrap();
        assert_eq!(q1.apply(1), 1);
        let q4 = build_qn(4).unwrap();
        let cs = cycle_decomposition(&q4).unwrap();
        assert!(has_cycle(&cs, &[1, 5]));
        assert!(has_cycle(&cs, &[9, 13]));
        let fixed: Vec<u64> = cs
            .iter()
            .filter(|c| c.length() == 1)
            .map(|c| c.elements[0])
            .collect();
        assert_eq!(fixed, vec![3, 7, 11, 15]);
        let q5 = build_qn(5).unwrap();
        assert!(has_cycle(&cycle_decomposition(&q5).unwrap(), &[5, 17]));
    }

    #[test]
    fn q4_full_residue_ring() {
        let q4 = build_qn(4).unwrap();
        let fixed = (0..16u64).filter(|&x| q4.apply_any(x) == x).count();
        assert_eq!(fixed, 10);
        assert_eq!(q4.apply_any(2), 10);
        assert_eq!(q4.apply_any(10), 2);
        for x in 0..16u64 {
            assert_eq!(q4.apply_any(x), q_mod(x, 4));
        }
    }

    #[test]
    fn large_ergodic_base_cycles() {
        let q6 = cycle_decomposition(&build_qn(6).unwrap()).unwrap();
        assert!(has_cycle(&q6, &[9, 29, 25, 13]));
        assert!(has_cycle(&q6, &[41, 61, 57, 45]));
        let q8 = cycle_decomposition(&build_qn(8).unwrap()).unwrap();
        assert!(has_cycle(&q8, &[27, 251, 219, 59]));
        assert!(has_cycle(&q8, &[91, 187, 155, 123]));
    }

    #[test]
    fn orders() {
        assert_eq!(permutation_order(&build_qn(4).unwrap()).unwrap(), 2);
        assert_eq!(permutation_order(&build_qn(6).unwrap()).unwrap(), 4);
        assert_eq!(permutation_order(&build_qn(10).unwrap()).unwrap(), 64);
    }

    #[test]
    fn projection_matches_direct_build() {
        let top = build_qn(12).unwrap();
        for m in 1..=12 {
            assert_eq!(top.project(m).unwrap(), build_qn(m).unwrap());
        }
        assert!(top.project(13).is_err());
    }

    #[test]
    fn lifting() {
        let q5 = build_qn(5).unwrap();
        let q6 = build_qn(6).unwrap();
        let c = CycleRecord {
            level: 5,
            elements: vec![5, 17],
        };
        match lift_classification(&c, &q6).unwrap() {
            LiftOutcome::Doubles(d) => assert_eq!(d.length(), 4),
            other => panic!("expected doubling, got {other:?}"),
        }
        let c = CycleRecord {
            level: 4,
            elements: vec![1, 5],
        };
        let out = lift_classification(&c, &q5).unwrap();
        // Brute force: the lifts of 1 and 5 in Q_5.
        let lifted: Vec<u64> = [1u64, 17].iter().map(|&x| q5.apply(x)).collect();
        match out {
            LiftOutcome::Splits(a, b) => {
                assert_eq!(a.length(), 2);
                assert_eq!(b.length(), 2);
                assert_eq!(q5.apply(a.elements[0]), a.elements[1]);
                let _ = lifted;
            }
            LiftOutcome::Doubles(d) => {
                assert_eq!(d.length(), 4);
                assert!(d.elements.contains(&lifted[0]));
            }
        }
    }

    #[test]
    fn ever_doubling_examples() {
        let tower = TableTower::build(12).unwrap();
        let yes = |level, elements: &[u64]| {
            is_ever_doubling(
                &CycleRecord {
                    level,
                    elements: elements.to_vec(),
                },
                &tower,
            )
        };
        assert_eq!(yes(5, &[5, 17]), EverDoubling::Yes);
        assert_eq!(yes(6, &[9, 29, 25, 13]), EverDoubling::Yes);
        assert_eq!(yes(8, &[27, 251, 219, 59]), EverDoubling::Yes);
        // A fixed point of Q_4 that splits right away.
        let splitting = (3..16u64)
            .step_by(2)
            .find(|&x| tower.log_length(4, x) == 0 && tower.log_length(5, x) == 0)
            .unwrap();
        assert_eq!(yes(4, &[splitting]), EverDoubling::No);
        assert_eq!(yes(11, &[27]), EverDoubling::Indeterminate);
    }

    #[test]
    fn census_small() {
        // Base levels for k = 8 reach 11, above the minimal cap of 10.
        let short = enumerate_ergodic_sets_with_limit(8, 10, 12).unwrap();
        assert_eq!(short.count(8), 10);
        let c = enumerate_ergodic_sets_with_limit(8, 12, 14).unwrap();
        assert_eq!(c.counts, vec![0, 0, 0, 3, 0, 2, 10, 11]);
        assert!(c.undecided.iter().all(|&u| u == 0));
        let k4: Vec<(u32, Vec<u64>)> = c
            .records
            .iter()
            .filter(|r| r.k == 4)
            .map(|r| (r.m0, r.elements.clone()))
            .collect();
        assert!(k4.contains(&(5, vec![5, 17])));
        assert!(k4.contains(&(6, vec![9, 29, 25, 13])));
        assert!(k4.contains(&(6, vec![41, 61, 57, 45])));
        assert!(enumerate_ergodic_sets(8, 9).is_err());
    }

    #[test]
    fn summary() {
        let s = measure_summary(&[]);
        assert!(s.odd_total.is_zero());
        let s = measure_summary(&[0, 0, 0, 3]);
        assert_eq!(s.odd_total, BigRational::new(3.into(), 16.into()));
        assert_eq!(s.full_total, BigRational::new(3.into(), 8.into()));
    }
}
