//! Small integer helpers shared across modules: sieving, factorization,
//! integer roots and modular powers.

use num_integer::Integer;

/// All primes `<= n`, ascending.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Trial-division factorization, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree(n: u64) -> bool {
    n >= 1 && factorize(n).iter().all(|&(_, e)| e == 1)
}

/// Number of distinct prime factors.
pub fn omega(n: u64) -> u32 {
    factorize(n).len() as u32
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(mut n: u64, p: u64) -> u32 {
    debug_assert!(n != 0 && p >= 2);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

pub fn lcm_all<I: IntoIterator<Item = u64>>(it: I) -> u64 {
    it.into_iter().fold(1, |acc, x| acc.lcm(&x))
}

pub fn pow_mod(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut acc: u128 = 1;
    let mut b = (base % modulus) as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Largest `r` with `r^k <= n`.
pub fn iroot(n: u128, k: u32) -> u128 {
    assert!(k >= 1);
    if k == 1 || n < 2 {
        return n;
    }
    let mut r = (n as f64).powf(1.0 / k as f64) as u128;
    // float estimate may be off by a few in either direction
    while r > 0 && checked_pow(r, k).map_or(true, |v| v > n) {
        r -= 1;
    }
    while checked_pow(r + 1, k).is_some_and(|v| v <= n) {
        r += 1;
    }
    r
}

pub fn checked_pow(base: u128, exp: u32) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Smallest primitive root modulo an odd prime `p`.
pub fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let phi = p - 1;
    let factors = factorize(phi);
    (2..p)
        .find(|&g| factors.iter().all(|&(q, _)| pow_mod(g, phi / q, p) != 1))
        .expect("every prime has a primitive root")
}

/// Discrete log of `x` to base `g` modulo prime `p` by linear search.
pub fn discrete_log(g: u64, x: u64, p: u64) -> u64 {
    let x = x % p;
    let mut acc = 1u64;
    for k in 0..p - 1 {
        if acc == x {
            return k;
        }
        acc = acc * g % p;
    }
    panic!("{x} is not a unit modulo {p}");
}

pub fn is_perfect_square(n: u64) -> bool {
    let r = iroot(n as u128, 2) as u64;
    r * r == n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_and_trial_division_agree() {
        let ps = primes_up_to(500);
        for n in 0..500 {
            assert_eq!(ps.contains(&n), is_prime(n), "n={n}");
        }
    }

    #[test]
    fn factorization_round_trips() {
        for n in 1..3000u64 {
            let prod: u64 = factorize(n).iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(prod, n);
        }
        assert_eq!(factorize(91), vec![(7, 1), (13, 1)]);
        assert!(is_squarefree(91));
        assert!(!is_squarefree(63));
        assert_eq!(omega(91), 2);
    }

    #[test]
    fn integer_roots_are_exact() {
        for n in 0..5000u128 {
            for k in 1..5 {
                let r = iroot(n, k);
                assert!(r.pow(k) <= n && (r + 1).pow(k) > n);
            }
        }
        assert_eq!(iroot(10u128.pow(16), 2), 10u128.pow(8));
        assert_eq!(iroot(10u128.pow(16) - 1, 2), 10u128.pow(8) - 1);
        assert_eq!(iroot(u128::MAX, 2), u64::MAX as u128);
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root(7), 3);
        assert_eq!(primitive_root(13), 2);
        let g = primitive_root(31);
        assert_eq!(pow_mod(g, discrete_log(g, 17, 31), 31), 17);
    }
}
