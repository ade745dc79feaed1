//! Cyclic fields of odd prime degree `l` as order-`l` groups of Dirichlet
//! characters.
//!
//! A character of order `l` and conductor `f` factors into components at the
//! primes of `f`; each prime `p ≡ 1 (mod l)` contributes one of the `l − 1`
//! order-`l` characters mod `p`, and `l` itself may appear through
//! `(Z/l²)^*`. The field cut out depends only on the group generated, so the
//! component exponents are normalized to start with 1. `disc = f^{l−1}`.

use crate::arith::{discrete_log, is_prime, iroot, pow_mod, primes_up_to, primitive_root};
use crate::permgroup::CycleType;

use super::record::{FieldRecord, LocalRamification};
use super::{FieldError, FieldList, Provenance};

/// One prime-power component of a conductor.
#[derive(Debug, Clone, Copy)]
struct Component {
    p: u64,
    modulus: u64,
    generator: u64,
}

impl Component {
    /// Exponent `e` with `χ(x) = ζ^{k·e}` for the order-`l` character sending
    /// the generator to `ζ^k`.
    fn log(&self, x: u64, l: u64) -> u64 {
        discrete_log_mod(self.generator, x % self.modulus, self.modulus) % l
    }
}

fn discrete_log_mod(g: u64, x: u64, modulus: u64) -> u64 {
    if is_prime(modulus) {
        return discrete_log(g, x, modulus);
    }
    let mut acc = 1u64;
    let mut k = 0;
    while acc != x {
        acc = acc * g % modulus;
        k += 1;
        assert!(k <= modulus, "{x} not in the cyclic group generated by {g} mod {modulus}");
    }
    k
}

/// Primitive root mod `l²` for an odd prime `l`.
fn primitive_root_sq(l: u64) -> u64 {
    let g = primitive_root(l);
    if pow_mod(g, l - 1, l * l) == 1 {
        g + l
    } else {
        g
    }
}

fn components_up_to(l: u64, max_conductor: u64) -> Vec<Component> {
    let mut out = Vec::new();
    if l * l <= max_conductor {
        out.push(Component { p: l, modulus: l * l, generator: primitive_root_sq(l) });
    }
    for p in primes_up_to(max_conductor) {
        if p % l == 1 {
            out.push(Component { p, modulus: p, generator: primitive_root(p) });
        }
    }
    out.sort_by_key(|c| c.modulus);
    out
}

/// All conductors `<= max`, each with its component indices.
fn conductors(comps: &[Component], max: u64) -> Vec<(u64, Vec<usize>)> {
    fn rec(
        comps: &[Component],
        start: usize,
        f: u64,
        chosen: &mut Vec<usize>,
        max: u64,
        out: &mut Vec<(u64, Vec<usize>)>,
    ) {
        for i in start..comps.len() {
            let next = f * comps[i].modulus;
            if next > max {
                break;
            }
            chosen.push(i);
            out.push((next, chosen.clone()));
            rec(comps, i + 1, next, chosen, max, out);
            chosen.pop();
        }
    }
    let mut out = Vec::new();
    rec(comps, 0, 1, &mut Vec::new(), max, &mut out);
    out.sort();
    out
}

/// Every cyclic field of degree `l` with `disc <= x`.
pub fn enumerate_cyclic(l: u64, x: u64) -> Result<FieldList, FieldError> {
    if l < 3 || !is_prime(l) {
        return Err(FieldError::NotOddPrime(l));
    }
    let max_f = iroot(x as u128, (l - 1) as u32) as u64;
    let comps = components_up_to(l, max_f);
    let l_cycle = CycleType::new(vec![l as u32]).expect("valid");
    let mut records = Vec::new();
    for (f, idx) in conductors(&comps, max_f) {
        let disc = (f as i64).pow((l - 1) as u32);
        let t = idx.len() as u32;
        // exponent vectors (1, k_2, ..., k_t) with k_i in 1..l
        let count = (l - 1).pow(t - 1);
        for mut code in 0..count {
            let mut ks = vec![1u64];
            for _ in 1..t {
                ks.push(code % (l - 1) + 1);
                code /= l - 1;
            }
            let mut ramification = idx
                .iter()
                .zip(&ks)
                .map(|(&i, &k)| {
                    let c = comps[i];
                    if c.p == l {
                        let twist = wild_twist(&comps, &idx, &ks, k, l);
                        LocalRamification::wild(
                            l,
                            format!("{l}:C{l}:t{twist}"),
                            2 * (l as u32 - 1),
                            Some(l as u32),
                        )
                    } else {
                        LocalRamification::tame(c.p, l_cycle.clone())
                    }
                })
                .collect::<Vec<_>>();
            ramification.sort_by_key(|r| r.p);
            records.push(FieldRecord {
                degree: l as u32,
                group_label: format!("C{l}"),
                disc,
                ramification,
            });
        }
    }
    Ok(FieldList {
        records,
        provenance: Provenance::Enumerated(format!("cyclic:l={l}")),
        complete_to: x,
    })
}

/// Exponent of `ζ` in the value at `l` of the tame part of the character,
/// scaled so the `l²` component has exponent 1. Together with the conductor
/// exponent this pins down the completion at `l`.
fn wild_twist(comps: &[Component], idx: &[usize], ks: &[u64], k_l: u64, l: u64) -> u64 {
    let total: u64 = idx
        .iter()
        .zip(ks)
        .filter(|(&i, _)| comps[i].p != l)
        .map(|(&i, &k)| k * comps[i].log(l, l) % l)
        .sum::<u64>()
        % l;
    let inv = pow_mod(k_l, l - 2, l);
    total * inv % l
}
