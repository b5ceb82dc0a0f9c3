use c2adic_core::collatz::{parity_bits_u64, t_step_u64};
use c2adic_core::embedding::{bitrev, check_self_affine};
use c2adic_core::padic::low_mask;
use c2adic_core::qmap::{alpha, check_functional_equations_mod, q_mod, qinv_mod};
use c2adic_core::transform::{invariant_sum, invert_v1, invert_v1_u64, invert_v2};
use c2adic_core::{
    parity_vector, periodic_from_rational, rational_from_periodic, OddRational, ParityVector,
};
use num_bigint::BigUint;
use proptest::prelude::*;

fn odd_rational() -> impl Strategy<Value = OddRational> {
    (-10_000i64..10_000, 0i64..500).prop_map(|(p, h)| OddRational::from_pair(p, 2 * h + 1).unwrap())
}

proptest! {
    #[test]
    fn q_and_inverse_are_mutual_inverses(x: u64, n in 1u32..=64) {
        let x = x & low_mask(n);
        prop_assert_eq!(qinv_mod(q_mod(x, n), n), x);
        prop_assert_eq!(q_mod(qinv_mod(x, n), n), x);
    }

    #[test]
    fn q_is_an_isometry(x: u64, y: u64) {
        prop_assume!(x != y);
        let d = (x ^ y).trailing_zeros();
        let (qx, qy) = (q_mod(x, 64), q_mod(y, 64));
        prop_assert_eq!((qx ^ qy).trailing_zeros(), d);
    }

    #[test]
    fn q_conjugates_t_to_the_shift(x: u64) {
        prop_assert_eq!(q_mod(t_step_u64(x), 62), q_mod(x, 63) >> 1);
    }

    #[test]
    fn invert_formulas_agree(bits: u64, j in 1u32..=64) {
        let bits = bits & low_mask(j);
        let s = ParityVector::from_u64(bits, j).unwrap();
        let a = invert_v1(&s);
        prop_assert_eq!(&a, &invert_v2(&s));
        prop_assert_eq!(a.residue(), &BigUint::from(invert_v1_u64(bits, j)));
        prop_assert_eq!(parity_bits_u64(invert_v1_u64(bits, j), j), bits);
        prop_assert_eq!(invariant_sum(&s), BigUint::from(low_mask(j)));
    }

    #[test]
    fn rational_parity_matches_residue(x in odd_rational(), j in 1usize..=40) {
        let v = parity_vector(&x, j).unwrap();
        let r = x.residue_u64(64).unwrap();
        prop_assert_eq!(v.to_u64().unwrap(), parity_bits_u64(r, j as u32));
    }

    #[test]
    fn periodic_expansion_round_trips(x in odd_rational()) {
        let e = periodic_from_rational(&x);
        prop_assert_eq!(rational_from_periodic(&e), x);
    }

    #[test]
    fn functional_equations_hold_mod(x: u64, n in 8u32..=58) {
        prop_assert!(check_functional_equations_mod(x, n).unwrap().all_passed());
    }

    #[test]
    fn self_affine_on_truncations(t: u64, k in 2u32..=20, extra in 0u32..=20) {
        let n = k + extra;
        let r = alpha(k) | ((t << k) & low_mask(n));
        prop_assert!(check_self_affine(r, k, n).unwrap().passed());
    }

    #[test]
    fn bitrev_is_an_involution(x: u64, k in 1u32..=64) {
        let x = x & low_mask(k);
        prop_assert_eq!(bitrev(bitrev(x, k), k), x);
    }
}
