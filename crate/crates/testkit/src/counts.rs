//! Pair counts by direct double loops.

use num_bigint::BigUint;

/// `#{(m, n) ∈ s1 × s2 : m^{a} n^{b} <= x}` for rational exponents given as
/// `(numerator, denominator)`.
pub fn count_power_products(s1: &[u64], s2: &[u64], a: (u32, u32), b: (u32, u32), x: u64) -> u64 {
    let bound = BigUint::from(x).pow(a.1 * b.1);
    let mut count = 0;
    for &m in s1 {
        let lhs_m = BigUint::from(m).pow(a.0 * b.1);
        if lhs_m > bound {
            continue;
        }
        for &n in s2 {
            if &lhs_m * BigUint::from(n).pow(b.0 * a.1) <= bound {
                count += 1;
            }
        }
    }
    count
}

/// `Σ_{n <= x} d(n)` from its definition.
pub fn divisor_summatory(x: u64) -> u64 {
    (1..=x).map(|n| (1..=n).filter(|d| n % d == 0).count() as u64).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divisor_sum_matches_pairs() {
        let ints: Vec<u64> = (1..=200).collect();
        assert_eq!(count_power_products(&ints, &ints, (1, 1), (1, 1), 200), divisor_summatory(200));
    }
}
