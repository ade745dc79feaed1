//! Brute-force reference implementations used only by tests.
//!
//! Nothing here shares code with `malle-core`; agreement between the two is
//! the point.

pub mod counts;
pub mod cubic;
pub mod cyclic;
pub mod lattice;
pub mod perms;

/// Trial-division factorization.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factor(n) == vec![(n, 1)]
}
