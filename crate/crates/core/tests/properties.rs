mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use surreal::Surreal;

fn nf(seed: u64) -> Surreal {
    common::random_nf(&mut StdRng::seed_from_u64(seed), 3, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn addition_is_a_group(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (a, b, c) = (nf(a), nf(b), nf(c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn multiplication_distributes(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (a, b, c) = (nf(a), nf(b), nf(c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
    }

    #[test]
    fn order_agrees_with_sign_of_difference(a in any::<u64>(), b in any::<u64>()) {
        let (a, b) = (nf(a), nf(b));
        prop_assert_eq!(a.cmp(&b) as i32, (&a - &b).signum());
    }

    #[test]
    fn positive_times_positive_is_positive(a in any::<u64>(), b in any::<u64>()) {
        let (a, b) = (nf(a), nf(b));
        prop_assert_eq!((&a * &b).signum(), a.signum() * b.signum());
    }

    #[test]
    fn json_round_trips(a in any::<u64>()) {
        let a = nf(a);
        prop_assert_eq!(Surreal::from_json(&a.to_json()).unwrap(), a);
    }
}
