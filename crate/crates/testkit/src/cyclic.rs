//! Cyclic fields of prime degree `l` counted through primitive characters.

use crate::factor;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let (mut acc, mut b) = (1u128, b as u128 % m as u128);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m as u128;
        }
        b = b * b % m as u128;
        e >>= 1;
    }
    acc as u64
}

/// `#{x ∈ (Z/d)^* : x^l = 1}` by direct search over each prime-power factor.
fn l_torsion(d: u64, l: u64) -> u64 {
    factor(d)
        .into_iter()
        .map(|(p, e)| {
            let q = p.pow(e);
            (1..q).filter(|&x| gcd(x, q) == 1 && pow_mod(x, l, q) == 1).count() as u64
        })
        .product()
}

fn mobius(n: u64) -> i64 {
    let f = factor(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Number of cyclic degree-`l` fields with conductor exactly `f`.
pub fn fields_with_conductor(f: u64, l: u64) -> u64 {
    if f == 1 {
        return 0;
    }
    let mut primitive = 0i64;
    for d in 1..=f {
        if f % d == 0 {
            primitive += mobius(f / d) * l_torsion(d, l) as i64;
        }
    }
    primitive as u64 / (l - 1)
}

/// Discriminants `f^{l−1} <= x` of all cyclic degree-`l` fields, with
/// multiplicity.
pub fn cyclic_discriminants(l: u64, x: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2u64;
    while let Some(disc) = f.checked_pow((l - 1) as u32).filter(|&d| d <= x) {
        for _ in 0..fields_with_conductor(f, l) {
            out.push(disc);
        }
        f += 1;
    }
    out
}
