//! The planar set `{(M(r), M(Q(r)))}` where `M(Σ r_k 2^k) = Σ r_k 2^-k`
//! sends 2-adic integers onto `[0, 2]`.
//!
//! On a `k`-bit grid every coordinate is `a / 2^(k-1)` with `a < 2^k`, so
//! point sets and box covers store bare `u64` numerators. `M` is not
//! injective on dyadic values (`M(1) = M(-2) = 1`); points are always keyed
//! by their parameter.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::collatz::DEFAULT_BUDGET;
use crate::error::{Error, Result};
use crate::padic::{
    low_mask, periodic_from_rational, ratio_string, rational_from_periodic, DyadicRational,
    EventuallyPeriodicBits, OddRational, TruncatedPadic,
};
use crate::qmap::{alpha, parity_sequence_exact, q_mod, q_truncated};

/// Largest bit depth for generated point sets.
pub const MAX_DEPTH: u32 = 24;

/// Low `k` bits of `x` in reverse order: the numerator of `M(x mod 2^k)`
/// over `2^(k-1)`.
#[inline]
pub fn bitrev(x: u64, k: u32) -> u64 {
    if k == 0 {
        0
    } else {
        x.reverse_bits() >> (64 - k)
    }
}

/// `M` of a truncated value; the result has denominator at most `2^(precision-1)`.
pub fn monna(x: &TruncatedPadic) -> DyadicRational {
    let n = x.precision();
    let mut num = BigInt::zero();
    for k in 0..n {
        if x.bit(k) == 1 {
            num.set_bit(u64::from(n - 1 - k), true);
        }
    }
    DyadicRational::new(num, n - 1)
}

/// `M(x mod 2^k)` for `1 <= k <= 64`.
pub fn monna_u64(x: u64, k: u32) -> DyadicRational {
    DyadicRational::new(BigInt::from(bitrev(x, k)), k - 1)
}

/// `M` of an eventually periodic digit stream, summed in closed form.
pub fn monna_exact(e: &EventuallyPeriodicBits) -> BigRational {
    let weigh = |bits: &[u8]| -> BigRational {
        let mut s = BigRational::zero();
        for (k, &b) in bits.iter().enumerate() {
            if b == 1 {
                s += BigRational::new(BigInt::one(), BigInt::one() << k);
            }
        }
        s
    };
    let a = e.preperiod().len();
    let l = e.period().len();
    let two_l = BigInt::one() << l;
    let tail = weigh(e.period()) * BigRational::new(two_l.clone(), two_l - 1)
        / BigRational::from_integer(BigInt::one() << a);
    weigh(e.preperiod()) + tail
}

/// `M` of a rational 2-adic integer.
pub fn monna_rational(x: &OddRational) -> BigRational {
    monna_exact(&periodic_from_rational(x))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coordinate {
    Dyadic(DyadicRational),
    Exact(BigRational),
}

impl Coordinate {
    pub fn to_ratio(&self) -> BigRational {
        match self {
            Coordinate::Dyadic(d) => d.to_ratio(),
            Coordinate::Exact(r) => r.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Coordinate::Dyadic(d) => d.to_f64(),
            Coordinate::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Parameter {
    Truncated(TruncatedPadic),
    Rational(OddRational),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddedPoint {
    pub parameter: Parameter,
    pub x: Coordinate,
    pub y: Coordinate,
}

impl EmbeddedPoint {
    pub fn is_exact(&self) -> bool {
        matches!(
            (&self.x, &self.y),
            (Coordinate::Exact(_), Coordinate::Exact(_))
        )
    }
}

/// `(M(x), M(Q(x)))` for a truncated parameter.
pub fn embed_point_truncated(x: &TruncatedPadic) -> EmbeddedPoint {
    EmbeddedPoint {
        parameter: Parameter::Truncated(x.clone()),
        x: Coordinate::Dyadic(monna(x)),
        y: Coordinate::Dyadic(monna(&q_truncated(x))),
    }
}

/// Exact `(r, Q(r), M(r), M(Q(r)))`; fails if the orbit of `r` does not cycle
/// within `budget` steps.
pub fn exact_point_parts(
    r: &OddRational,
    budget: usize,
) -> Result<(OddRational, BigRational, BigRational)> {
    let s = parity_sequence_exact(r, budget)
        .ok_or_else(|| Error::Inexact(format!("orbit of {r} did not cycle")))?;
    Ok((
        rational_from_periodic(&s),
        monna_rational(r),
        monna_exact(&s),
    ))
}

pub fn embed_point_exact(r: &OddRational) -> Result<EmbeddedPoint> {
    let (_, x, y) = exact_point_parts(r, DEFAULT_BUDGET)?;
    Ok(EmbeddedPoint {
        parameter: Parameter::Rational(r.clone()),
        x: Coordinate::Exact(x),
        y: Coordinate::Exact(y),
    })
}

/// Reduces `num / 2^exp` to an odd numerator (or `0 / 2^0`).
pub fn reduce_dyadic(num: u64, exp: u32) -> (u64, u32) {
    if num == 0 {
        return (0, 0);
    }
    let tz = num.trailing_zeros().min(exp);
    (num >> tz, exp - tz)
}

/// The points of all `n < 2^k`, using parity vectors of length `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    k: u32,
    x_num: Vec<u64>,
    y_num: Vec<u64>,
}

impl PointSet {
    pub fn depth(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.x_num.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_num.is_empty()
    }

    /// Common denominator exponent `k - 1`.
    pub fn exp(&self) -> u32 {
        self.k - 1
    }

    /// Numerators of `(X(n), Y(n))` over `2^(k-1)`.
    pub fn raw(&self, n: usize) -> (u64, u64) {
        (self.x_num[n], self.y_num[n])
    }

    pub fn point(&self, n: usize) -> (DyadicRational, DyadicRational) {
        let e = self.exp();
        (
            DyadicRational::new(BigInt::from(self.x_num[n]), e),
            DyadicRational::new(BigInt::from(self.y_num[n]), e),
        )
    }

    pub fn point_f64(&self, n: usize) -> (f64, f64) {
        let d = (1u64 << self.exp()) as f64;
        (self.x_num[n] as f64 / d, self.y_num[n] as f64 / d)
    }
}

pub fn generate_set(k: u32) -> Result<PointSet> {
    if k == 0 || k > MAX_DEPTH {
        return Err(Error::LevelTooLarge {
            level: k,
            max: MAX_DEPTH,
        });
    }
    let (x_num, y_num) = (0..1u64 << k)
        .into_par_iter()
        .map(|n| (bitrev(n, k), bitrev(q_mod(n, k), k)))
        .unzip();
    Ok(PointSet { k, x_num, y_num })
}

/// Square `[x0, x0 + 2^(1-k)] x [y0, y0 + 2^(1-k)]`, numerators over `2^(k-1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoxCell {
    pub n: u64,
    pub x0: u64,
    pub y0: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxCover {
    pub k: u32,
    pub boxes: Vec<BoxCell>,
}

impl BoxCover {
    pub fn side(&self) -> DyadicRational {
        DyadicRational::pow2_neg(self.k - 1)
    }

    pub fn corner(&self, n: usize) -> (DyadicRational, DyadicRational) {
        let b = self.boxes[n];
        let e = self.k - 1;
        (
            DyadicRational::new(BigInt::from(b.x0), e),
            DyadicRational::new(BigInt::from(b.y0), e),
        )
    }

    /// Whether every point of `set` lies in the closed box of its residue class.
    pub fn covers(&self, set: &PointSet) -> Result<bool> {
        if set.depth() < self.k {
            return Err(Error::GuardViolation(format!(
                "point depth {} is below box depth {}",
                set.depth(),
                self.k
            )));
        }
        let shift = set.depth() - self.k;
        let mask = low_mask(self.k) as usize;
        Ok((0..set.len()).into_par_iter().all(|n| {
            let b = self.boxes[n & mask];
            let (x, y) = set.raw(n);
            let inside = |v: u64, lo: u64| (lo << shift) <= v && v <= ((lo + 1) << shift);
            inside(x, b.x0) && inside(y, b.y0)
        }))
    }
}

pub fn box_cover(k: u32) -> Result<BoxCover> {
    if k == 0 || k > MAX_DEPTH {
        return Err(Error::LevelTooLarge {
            level: k,
            max: MAX_DEPTH,
        });
    }
    let boxes = (0..1u64 << k)
        .map(|n| BoxCell {
            n,
            x0: bitrev(n, k),
            y0: bitrev(q_mod(n, k), k),
        })
        .collect();
    Ok(BoxCover { k, boxes })
}

/// Closed real interval with dyadic endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: DyadicRational,
    pub hi: DyadicRational,
}

impl Interval {
    pub fn new(lo: DyadicRational, hi: DyadicRational) -> Self {
        Interval { lo, hi }
    }

    pub fn length(&self) -> DyadicRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, v: &DyadicRational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    /// `t -> 1 + t/2 - shift`, applied to both endpoints.
    fn half_shift(&self, shift: &DyadicRational) -> Interval {
        let one = DyadicRational::from_integer(1);
        let f = |v: &DyadicRational| &(&one + &v.half()) - shift;
        Interval::new(f(&self.lo), f(&self.hi))
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// `2 - 2^e` for `e` possibly negative, as a dyadic.
fn two_minus_pow2(e: i32, times: i64) -> DyadicRational {
    let two = DyadicRational::from_integer(2);
    let p = if e >= 0 {
        DyadicRational::from_integer(times << e)
    } else {
        DyadicRational::new(BigInt::from(times), e.unsigned_abs())
    };
    &two - &p
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalFamily {
    pub k: u32,
    pub alpha: u64,
    pub m: u64,
    pub n: u64,
    pub i: Interval,
    pub j: Interval,
}

/// `α_k`, `m_k = 2^(k-2) - 1`, `n_k = 3 2^(k-2) - 1`, and the intervals
/// `I_k = [M(m_k), M(n_k)]`, `J_k = [M(n_k), M(m_(k+1))]`.
pub fn interval_family(k: u32) -> Result<IntervalFamily> {
    if !(2..=62).contains(&k) {
        return Err(Error::GuardViolation(format!(
            "interval family needs 2 <= k <= 62, got {k}"
        )));
    }
    let ki = k as i32;
    Ok(IntervalFamily {
        k,
        alpha: alpha(k),
        m: (1u64 << (k - 2)) - 1,
        n: 3 * (1u64 << (k - 2)) - 1,
        i: Interval::new(two_minus_pow2(3 - ki, 1), two_minus_pow2(1 - ki, 3)),
        j: Interval::new(two_minus_pow2(1 - ki, 3), two_minus_pow2(2 - ki, 1)),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntervalCheck {
    pub k: u32,
    /// `Q` fixes `m_k, n_k` (k even) or swaps them (k odd) mod `2^k`.
    pub congruences: bool,
    /// Endpoints agree with `M(m_k)`, `M(n_k)`, `M(m_(k+1))`.
    pub endpoints: bool,
    /// `M` maps the ball around `α_k` onto `I_k` (k odd) or `J_k` (k even).
    pub x_ball: bool,
    /// `Y` maps the ball around `α_k` onto `J_k`.
    pub y_ball: bool,
    /// `Y` maps the ball around `2 α_k + 1` onto `I_(k+1)`.
    pub y_ball_next: bool,
}

impl IntervalCheck {
    pub fn all_passed(&self) -> bool {
        self.congruences && self.endpoints && self.x_ball && self.y_ball && self.y_ball_next
    }
}

/// Whether `f` maps the ball `c + 2^r Z_2` (scanned at level `r + extra`)
/// onto exactly `target`, hitting every grid point of the finer level.
fn ball_image_is(
    c: u64,
    r: u32,
    extra: u32,
    target: &Interval,
    f: impl Fn(u64, u32) -> u64,
) -> bool {
    let level = r + extra;
    let mut vals: Vec<u64> = (0..1u64 << extra)
        .map(|t| bitrev(f(c + (t << r), level), level))
        .collect();
    vals.sort_unstable();
    vals.dedup();
    let e = level - 1;
    let lo = DyadicRational::new(BigInt::from(vals[0]), e);
    let hi = DyadicRational::new(BigInt::from(*vals.last().expect("non-empty") + 1), e);
    vals.len() == 1usize << extra && lo == target.lo && hi == target.hi
}

/// Checks the congruences for `m_k, n_k` and the ball-to-interval images,
/// scanning balls exhaustively `extra` bits below their radius.
pub fn verify_interval_family(k: u32, extra: u32) -> Result<IntervalCheck> {
    if k + 1 + extra > 62 {
        return Err(Error::ResidueTooWide(k + 1 + extra));
    }
    let f = interval_family(k)?;
    let next = interval_family(k + 1)?;
    let (qm, qn) = (q_mod(f.m, k), q_mod(f.n, k));
    let congruences = if k.is_multiple_of(2) {
        qm == f.m && qn == f.n
    } else {
        qm == f.n && qn == f.m
    };
    let endpoints = monna_u64(f.m, k) == f.i.lo
        && monna_u64(f.n, k) == f.i.hi
        && f.j.lo == f.i.hi
        && monna_u64(next.m, k + 1) == f.j.hi
        && f.i.length() == DyadicRational::pow2_neg(k - 1)
        && f.j.length() == DyadicRational::pow2_neg(k - 1);
    let x_target = if k % 2 == 1 { &f.i } else { &f.j };
    let x_ball = ball_image_is(f.alpha, k, extra, x_target, |x, _| x);
    let y_ball = ball_image_is(f.alpha, k, extra, &f.j, q_mod);
    let y_ball_next = ball_image_is(2 * f.alpha + 1, k + 1, extra, &next.i, q_mod);
    Ok(IntervalCheck {
        k,
        congruences,
        endpoints,
        x_ball,
        y_ball,
        y_ball_next,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SelfAffineCheck {
    pub k: u32,
    pub even: bool,
    pub odd: bool,
}

impl SelfAffineCheck {
    pub fn passed(&self) -> bool {
        self.even && self.odd
    }
}

fn guard(r_low: u64, k: u32) -> Result<()> {
    if !(2..=62).contains(&k) || r_low & low_mask(k) != alpha(k) {
        return Err(Error::GuardViolation(format!(
            "parameter is not congruent to alpha_{k} mod 2^{k}"
        )));
    }
    Ok(())
}

/// Both affine relations on `n`-bit truncations of `r`, `k <= n <= 62`:
/// the points of `2r` and `2r + 1` are compared at `n + 1` bits.
pub fn check_self_affine(r: u64, k: u32, n: u32) -> Result<SelfAffineCheck> {
    guard(r, k)?;
    if n < k || n > 62 {
        return Err(Error::GuardViolation(format!(
            "precision {n} must be in {k}..=62"
        )));
    }
    let r = r & low_mask(n);
    let (x, y) = (bitrev(r, n), bitrev(q_mod(r, n), n));
    let m = n + 1;
    let at = |v: u64| (bitrev(v, m), bitrev(q_mod(v, m), m));
    let even = at(2 * r) == (x, y);
    let top = 1u64 << n;
    let odd = at(2 * r + 1) == (x + top, y + top - (1u64 << (n - k)));
    Ok(SelfAffineCheck { k, even, odd })
}

/// Both affine relations in exact rational arithmetic.
pub fn check_self_affine_exact(r: &OddRational, k: u32) -> Result<SelfAffineCheck> {
    guard(r.residue_u64(k)?, k)?;
    let pt = |v: &OddRational| -> Result<(BigRational, BigRational)> {
        let (_, x, y) = exact_point_parts(v, DEFAULT_BUDGET)?;
        Ok((x, y))
    };
    let (x, y) = pt(r)?;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let one = BigRational::one();
    let shift = BigRational::new(BigInt::one(), BigInt::one() << k);
    let even = pt(&r.scale(2))? == (&x * &half, &y * &half);
    let odd = pt(&r.scale(2).offset(1))? == (&x * &half + &one, &y * &half + &one - shift);
    Ok(SelfAffineCheck { k, even, odd })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x: Interval,
    pub y: Interval,
}

/// A pair of squares related by `(x, y) -> (1 + x/2, 1 + y/2 - 2^-k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquarePair {
    pub k: u32,
    pub box1: Rect,
    pub box2: Rect,
}

/// `J_k x J_k -> J_(k+1) x I_(k+1)` for even `k`, `I_k x J_k -> I_(k+1) x I_(k+1)` for odd `k`.
pub fn square_pair(k: u32) -> Result<SquarePair> {
    let f = interval_family(k)?;
    let g = interval_family(k + 1)?;
    let (box1, box2) = if k.is_multiple_of(2) {
        (
            Rect {
                x: f.j.clone(),
                y: f.j,
            },
            Rect { x: g.j, y: g.i },
        )
    } else {
        (
            Rect { x: f.i, y: f.j },
            Rect {
                x: g.i.clone(),
                y: g.i,
            },
        )
    };
    Ok(SquarePair { k, box1, box2 })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SquarePairCheck {
    pub k: u32,
    /// The affine map sends box 1 onto box 2.
    pub maps_box: bool,
    /// Every scanned parameter near `α_k` lands in box 1.
    pub points_in_box1: bool,
    /// Its image parameter `2r + 1` lands in box 2 at the mapped point.
    pub points_mapped: bool,
}

impl SquarePairCheck {
    pub fn all_passed(&self) -> bool {
        self.maps_box && self.points_in_box1 && self.points_mapped
    }
}

/// Checks a square pair on all `(k + extra)`-bit parameters `r ≡ α_k`.
pub fn verify_square_pair(k: u32, extra: u32) -> Result<SquarePairCheck> {
    let level = k + extra;
    if level + 1 > 62 {
        return Err(Error::ResidueTooWide(level + 1));
    }
    let sp = square_pair(k)?;
    let shift = DyadicRational::pow2_neg(k);
    let maps_box = sp.box1.x.half_shift(&DyadicRational::zero()) == sp.box2.x
        && sp.box1.y.half_shift(&shift) == sp.box2.y;
    let a = alpha(k);
    let mut in1 = true;
    let mut mapped = true;
    for t in 0..1u64 << extra {
        let r = a + (t << k);
        let x = monna_u64(r, level);
        let y = monna_u64(q_mod(r, level), level);
        in1 &= sp.box1.x.contains(&x) && sp.box1.y.contains(&y);
        let s = 2 * r + 1;
        let x2 = monna_u64(s, level + 1);
        let y2 = monna_u64(q_mod(s, level + 1), level + 1);
        let one = DyadicRational::from_integer(1);
        mapped &= x2 == &one + &x.half()
            && y2 == &(&one + &y.half()) - &shift
            && sp.box2.x.contains(&x2)
            && sp.box2.y.contains(&y2);
    }
    Ok(SquarePairCheck {
        k,
        maps_box,
        points_in_box1: in1,
        points_mapped: mapped,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxCountRow {
    pub k: u32,
    pub boxes: u64,
    /// `log(2^k) / log(2^(k-1))`.
    pub ratio: f64,
}

pub fn box_counting_stats(k_max: u32) -> Result<Vec<BoxCountRow>> {
    if !(2..=63).contains(&k_max) {
        return Err(Error::GuardViolation(format!(
            "k_max must be in 2..=63, got {k_max}"
        )));
    }
    Ok((2..=k_max)
        .map(|k| BoxCountRow {
            k,
            boxes: 1u64 << k,
            ratio: f64::from(k) / f64::from(k - 1),
        })
        .collect())
}

/// Residues `n < 2^k` whose point has its mirror image across the diagonal
/// in the depth-`k` set, i.e. `Q_k(Q_k(n)) = n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymmetryReport {
    pub k: u32,
    pub symmetric: Vec<u64>,
    pub total: u64,
}

pub fn symmetry_report(k: u32) -> Result<SymmetryReport> {
    if !(2..=MAX_DEPTH).contains(&k) {
        return Err(Error::LevelTooLarge {
            level: k,
            max: MAX_DEPTH,
        });
    }
    let symmetric = (0..1u64 << k)
        .into_par_iter()
        .filter(|&n| q_mod(q_mod(n, k), k) == n)
        .collect();
    Ok(SymmetryReport {
        k,
        symmetric,
        total: 1u64 << k,
    })
}

/// Parameters of the reference rational points.
pub const STANDARD_POINT_PARAMETERS: [&str; 14] = [
    "1", "17", "9", "-7", "5", "-1/3", "-3", "3", "5/7", "-1/5", "1/3", "-5", "7", "-1",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPoint {
    pub r: OddRational,
    pub q_of_r: OddRational,
    pub x: BigRational,
    pub y: BigRational,
}

/// String form `{r, q_of_r, x, y}` for JSON output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RationalPointRecord {
    pub r: String,
    pub q_of_r: String,
    pub x: String,
    pub y: String,
}

impl RationalPoint {
    pub fn new(r: &OddRational) -> Result<Self> {
        let (q, x, y) = exact_point_parts(r, DEFAULT_BUDGET)?;
        Ok(RationalPoint {
            r: r.clone(),
            q_of_r: q,
            x,
            y,
        })
    }

    pub fn record(&self) -> RationalPointRecord {
        RationalPointRecord {
            r: self.r.to_string(),
            q_of_r: self.q_of_r.to_string(),
            x: ratio_string(&self.x),
            y: ratio_string(&self.y),
        }
    }
}

/// Exact points for `params`, sorted by abscissa and then by parameter.
pub fn rational_points(params: &[OddRational]) -> Result<Vec<RationalPoint>> {
    let mut pts = params
        .iter()
        .map(RationalPoint::new)
        .collect::<Result<Vec<_>>>()?;
    pts.sort_by(|a, b| {
        a.x.cmp(&b.x)
            .then_with(|| a.r.as_ratio().cmp(b.r.as_ratio()))
    });
    Ok(pts)
}

/// The fourteen rational points of the 3x+1 set used as reference values.
pub fn standard_rational_points() -> Result<Vec<RationalPoint>> {
    let params: Vec<OddRational> = STANDARD_POINT_PARAMETERS
        .iter()
        .map(|s| s.parse().expect("literal"))
        .collect();
    rational_points(&params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::parse_ratio;

    fn q(s: &str) -> OddRational {
        s.parse().unwrap()
    }

    fn r(s: &str) -> BigRational {
        parse_ratio(s).unwrap()
    }

    #[test]
    fn monna_examples() {
        assert_eq!(monna_rational(&q("-1/3")), r("4/3"));
        assert_eq!(monna_rational(&q("-1")), r("2"));
        assert_eq!(monna_rational(&q("1")), r("1"));
        assert_eq!(monna_rational(&q("-2")), r("1"));
        assert_eq!(monna_u64(1, 8), DyadicRational::from_integer(1));
        let t = TruncatedPadic::from_bits(&[1, 0, 1, 1]).unwrap();
        assert_eq!(monna(&t).to_ratio(), r("11/8"));
    }

    #[test]
    fn monna_dyadic_collisions() {
        // M(n + 2^k) = M(n - 2^(k+1)) = M(n) + 2^-k for 0 <= n < 2^k.
        for k in 0..5u32 {
            for n in 0..(1i64 << k) {
                let base = monna_rational(&OddRational::from_integer(n));
                let inc = r(&format!("1/{}", 1u64 << k));
                assert_eq!(
                    monna_rational(&OddRational::from_integer(n + (1 << k))),
                    &base + &inc
                );
                assert_eq!(
                    monna_rational(&OddRational::from_integer(n - (2 << k))),
                    &base + &inc
                );
            }
        }
    }

    #[test]
    fn exact_points() {
        let p = embed_point_exact(&q("5")).unwrap();
        assert!(p.is_exact());
        assert_eq!((p.x.to_ratio(), p.y.to_ratio()), (r("5/4"), r("13/12")));
        let p = embed_point_exact(&q("-7")).unwrap();
        assert_eq!((p.x.to_ratio(), p.y.to_ratio()), (r("5/4"), r("10/7")));
        let p = embed_point_exact(&q("1/3")).unwrap();
        assert_eq!((p.x.to_ratio(), p.y.to_ratio()), (r("5/3"), r("5/3")));
    }

    #[test]
    fn truncated_point_matches_exact_prefix() {
        let t = q("5").to_padic(20).unwrap();
        let p = embed_point_truncated(&t);
        assert!(!p.is_exact());
        let diff = (p.y.to_f64() - 13.0 / 12.0).abs();
        assert!(diff <= 2f64.powi(-18), "{diff}");
    }

    #[test]
    fn small_sets() {
        let s = generate_set(1).unwrap();
        assert_eq!(s.point(0), (DyadicRational::zero(), DyadicRational::zero()));
        let one = DyadicRational::from_integer(1);
        assert_eq!(s.point(1), (one.clone(), one));
        let s = generate_set(12).unwrap();
        assert_eq!(s.len(), 4096);
        for n in 0..s.len() {
            let (x, y) = s.raw(n);
            assert!(x < 1 << 12 && y < 1 << 12);
            // Odd parameters land on [1, 2], even ones on [0, 1].
            assert_eq!(x >= 1 << 11, n % 2 == 1);
        }
    }

    #[test]
    fn covering_small() {
        let b = box_cover(1).unwrap();
        assert_eq!((b.boxes[0].x0, b.boxes[0].y0), (0, 0));
        assert_eq!((b.boxes[1].x0, b.boxes[1].y0), (1, 1));
        let set = generate_set(10).unwrap();
        for k in 1..=10 {
            let c = box_cover(k).unwrap();
            assert_eq!(c.boxes.len(), 1 << k);
            assert!(c.covers(&set).unwrap());
        }
        assert!(box_cover(11).unwrap().covers(&set).is_err());
    }

    #[test]
    fn x_projections_tile() {
        for k in 1..=8 {
            let c = box_cover(k).unwrap();
            let mut xs: Vec<u64> = c.boxes.iter().map(|b| b.x0).collect();
            xs.sort_unstable();
            assert_eq!(xs, (0..1u64 << k).collect::<Vec<_>>());
        }
    }

    #[test]
    fn families() {
        let f = interval_family(2).unwrap();
        assert_eq!((f.m, f.n, f.alpha), (0, 2, 2));
        let f = interval_family(3).unwrap();
        assert_eq!((f.m, f.n, f.alpha), (1, 5, 1));
        let f = interval_family(4).unwrap();
        assert_eq!(f.alpha, 11);
        assert_eq!(f.i.to_string(), "[3/2, 13/8]");
        assert_eq!(f.j.to_string(), "[13/8, 7/4]");
        for k in 2..=12 {
            let c = verify_interval_family(k, 6).unwrap();
            assert!(c.all_passed(), "{c:?}");
        }
        assert!(interval_family(1).is_err());
    }

    #[test]
    fn self_affine() {
        let c = check_self_affine(2, 2, 10).unwrap();
        assert!(c.passed());
        assert!(check_self_affine(3, 2, 10).is_err());
        // 2r + 1 = 5 with r = 2: (5/4, 13/12) = (1/4, 1/3) + (1, 3/4).
        let c = check_self_affine_exact(&q("2"), 2).unwrap();
        assert!(c.passed());
        for (x, k) in [("1/3", 4), ("-7", 3)] {
            assert_eq!(guard_for(&q(x)), k);
            assert!(check_self_affine_exact(&q(x), k).unwrap().passed());
        }
        assert!(check_self_affine_exact(&q("-1/5"), 2).is_err());
    }

    fn guard_for(x: &OddRational) -> u32 {
        crate::qmap::guard_level(x.residue_u64(62).unwrap(), 62).unwrap()
    }

    #[test]
    fn squares() {
        for k in 2..=9 {
            let c = verify_square_pair(k, 8).unwrap();
            assert!(c.all_passed(), "{c:?}");
        }
        let sp = square_pair(2).unwrap();
        assert_eq!(sp.box1.x.to_string(), "[1/2, 1]");
    }

    #[test]
    fn box_counts() {
        let rows = box_counting_stats(21).unwrap();
        assert_eq!(rows[0].ratio, 2.0);
        assert!((rows[9].ratio - 1.1).abs() < 1e-12);
        assert!((rows[19].ratio - 1.05).abs() < 1e-12);
    }

    #[test]
    fn symmetry() {
        assert_eq!(symmetry_report(4).unwrap().symmetric.len(), 16);
        let s5 = symmetry_report(5).unwrap();
        let table = crate::cycles::build_qn(5).unwrap();
        let short: Vec<u64> = crate::cycles::cycle_decomposition(&table)
            .unwrap()
            .into_iter()
            .filter(|c| c.length() <= 2)
            .flat_map(|c| c.elements)
            .collect();
        let mut odd_sym: Vec<u64> = s5
            .symmetric
            .iter()
            .copied()
            .filter(|n| n % 2 == 1)
            .collect();
        let mut short = short;
        short.sort_unstable();
        odd_sym.sort_unstable();
        assert_eq!(odd_sym, short);
    }

    #[test]
    fn standard_points() {
        let pts = standard_rational_points().unwrap();
        let rows: Vec<(String, String, String, String)> = pts
            .iter()
            .map(|p| {
                let r = p.record();
                (r.r, r.q_of_r, r.x, r.y)
            })
            .collect();
        let expect = [
            ("1", "-1/3", "1", "4/3"),
            ("17", "-401/3", "17/16", "493/384"),
            ("9", "-6377/3", "9/8", "8941/6144"),
            ("-7", "-5/7", "5/4", "10/7"),
            ("5", "-13/3", "5/4", "13/12"),
            ("-1/3", "1", "4/3", "1"),
            ("-3", "-7", "3/2", "5/4"),
            ("3", "-23/3", "3/2", "37/24"),
            ("5/7", "-1/5", "11/7", "8/5"),
            ("-1/5", "5/7", "8/5", "11/7"),
            ("1/3", "1/3", "5/3", "5/3"),
            ("-5", "-3/7", "7/4", "12/7"),
            ("7", "-1595/3", "7/4", "2797/1536"),
            ("-1", "-1", "2", "2"),
        ];
        assert_eq!(rows.len(), expect.len());
        for (got, want) in rows.iter().zip(expect) {
            assert_eq!(
                (
                    got.0.as_str(),
                    got.1.as_str(),
                    got.2.as_str(),
                    got.3.as_str()
                ),
                want
            );
        }
    }

    #[test]
    fn symmetric_rational_points() {
        let pts = standard_rational_points().unwrap();
        let has = |x: &BigRational, y: &BigRational| pts.iter().any(|p| &p.x == x && &p.y == y);
        let sym: Vec<String> = pts
            .iter()
            .filter(|p| has(&p.y, &p.x))
            .map(|p| p.r.to_string())
            .collect();
        assert_eq!(sym, vec!["1", "-1/3", "5/7", "-1/5", "1/3", "-1"]);
    }
}
