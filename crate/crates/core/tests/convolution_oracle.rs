use malle_core::convolve::{csum_limit, product_count_exact, CountingSequence, CsumOptions};
use malle_testkit::counts::{count_power_products, divisor_summatory};
use num_rational::Rational64;
use proptest::prelude::*;

const WEIGHTS: [(u32, u32); 6] = [(1, 1), (1, 2), (3, 2), (2, 1), (1, 3), (2, 3)];

fn weight(w: (u32, u32)) -> Rational64 {
    Rational64::new(w.0 as i64, w.1 as i64)
}

#[test]
fn integers_against_divisor_sums() {
    let z = CountingSequence::integers();
    for x in [1, 2, 10, 97, 500, 1000] {
        assert_eq!(
            product_count_exact(&z, &z, weight((1, 1)), weight((1, 1)), x).unwrap(),
            divisor_summatory(x),
            "x = {x}"
        );
    }
}

#[test]
fn squares_against_double_loop() {
    let z = CountingSequence::integers();
    let ints: Vec<u64> = (1..=5000).collect();
    for x in [10, 333, 5000] {
        let want = count_power_products(&ints, &ints, (1, 1), (2, 1), x);
        assert_eq!(product_count_exact(&z, &z, weight((1, 1)), weight((2, 1)), x).unwrap(), want);
    }
}

#[test]
fn zeta_two_from_the_coefficient_sum() {
    let z = CountingSequence::integers();
    let lim = csum_limit(&z, 2.0, 1.0, CsumOptions::default()).unwrap();
    assert!((lim.value - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-6, "{}", lim.value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn finite_sequences_match_double_loop(
        s1 in prop::collection::vec(1u64..=300, 0..40),
        s2 in prop::collection::vec(1u64..=300, 0..40),
        wa in prop::sample::select(WEIGHTS.to_vec()),
        wb in prop::sample::select(WEIGHTS.to_vec()),
        x in 1u64..=3000,
    ) {
        let a = CountingSequence::from_values(s1.clone(), None).unwrap();
        let b = CountingSequence::from_values(s2.clone(), None).unwrap();
        let got = product_count_exact(&a, &b, weight(wa), weight(wb), x).unwrap();
        prop_assert_eq!(got, count_power_products(&s1, &s2, wa, wb, x));
    }

    #[test]
    fn integers_times_finite(
        s2 in prop::collection::vec(1u64..=50, 1..20),
        wb in prop::sample::select(WEIGHTS.to_vec()),
        x in 1u64..=2000,
    ) {
        let z = CountingSequence::integers();
        let b = CountingSequence::from_values(s2.clone(), None).unwrap();
        let ints: Vec<u64> = (1..=x).collect();
        let got = product_count_exact(&z, &b, weight((1, 1)), weight(wb), x).unwrap();
        prop_assert_eq!(got, count_power_products(&ints, &s2, (1, 1), wb, x));
    }
}
