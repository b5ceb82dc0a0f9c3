//! Parity sequences of the 3x+1 map on the 2-adic integers.
//!
//! The crate covers exact 2-adic arithmetic ([`padic`]), the maps `T`, `U`
//! and the shift ([`collatz`]), the inverse parity transforms
//! ([`transform`]), the automorphism `Q` ([`qmap`]), the cycle structure of
//! the permutations `Q_n` ([`cycles`]), the search for rational `Q`-cycles
//! ([`search`]) and the plane embedding of the 3x+1 set ([`embedding`]).

pub mod collatz;
pub mod cycles;
pub mod embedding;
pub mod error;
pub mod padic;
pub mod qmap;
pub mod render;
pub mod search;
pub mod transform;
pub mod verify;

pub use collatz::{detect_orbit_cycle, parity_vector, t_step, u_step, OrbitReport, ParityVector};
pub use cycles::{
    build_qn, cycle_decomposition, default_level_cap, enumerate_ergodic_sets, is_ever_doubling,
    measure_summary, permutation_order, CycleRecord, ErgodicCensus, ErgodicSetRecord, EverDoubling,
    PermutationTable, TableTower,
};
pub use error::{Error, Result};
pub use padic::{
    mod_inverse_odd, mod_inverse_odd_u64, padic_from_rational, periodic_from_rational,
    rational_from_periodic, DyadicRational, EventuallyPeriodicBits, OddRational, PadicNorm,
    TruncatedPadic,
};
pub use qmap::{q_exact, q_iterate, q_mod, qinv_mod, QResult, QValue};
pub use search::{search, verify_known_cycles, CycleCandidate, SearchConfig, SearchReport};
pub use transform::{invariant_sum, invert_v1, invert_v2, qinv_exact_rational, CongruenceClass};
