//! Permutations, cycle types and the index calculus of product embeddings.
//!
//! The index of a permutation `g` of degree `n` is `n - #orbits(g)`; for a
//! tame inertia generator it is the discriminant exponent. Two closed forms
//! give the index of `(g1, g2)` acting on pairs: one valid when the orders of
//! `g1` and `g2` are coprime, one (a gcd sum over cycle pairs) always valid.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("images do not form a bijection on 1..{0}")]
    NotBijection(usize),
    #[error("cycle type parts must be positive and sum to the degree")]
    InvalidCycleType,
    #[error("ramification indices {0} and {1} are not coprime")]
    CoprimalityViolation(u64, u64),
    #[error("cannot parse permutation `{0}`: {1}")]
    Parse(String, String),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
}

/// A permutation of `{1..n}`, stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u32>,
}

impl Permutation {
    /// Build from 1-based images.
    pub fn from_images(images: &[u32]) -> Result<Self, PermError> {
        let n = images.len();
        let mut seen = vec![false; n];
        let mut zero_based = Vec::with_capacity(n);
        for &x in images {
            if x == 0 || x as usize > n || seen[x as usize - 1] {
                return Err(PermError::NotBijection(n));
            }
            seen[x as usize - 1] = true;
            zero_based.push(x - 1);
        }
        Ok(Self { images: zero_based })
    }

    pub(crate) fn from_zero_based(images: Vec<u32>) -> Self {
        debug_assert!({
            let mut s = images.clone();
            s.sort_unstable();
            s.iter().enumerate().all(|(i, &x)| i as u32 == x)
        });
        Self { images }
    }

    pub fn identity(degree: usize) -> Self {
        Self { images: (0..degree as u32).collect() }
    }

    /// Build from disjoint cycles written 1-based.
    pub fn from_cycles(degree: usize, cycles: &[Vec<u32>]) -> Result<Self, PermError> {
        let mut images: Vec<u32> = (0..degree as u32).collect();
        let mut touched = vec![false; degree];
        for cycle in cycles {
            for (k, &x) in cycle.iter().enumerate() {
                if x == 0 || x as usize > degree || touched[x as usize - 1] {
                    return Err(PermError::NotBijection(degree));
                }
                touched[x as usize - 1] = true;
                let next = cycle[(k + 1) % cycle.len()];
                if next == 0 || next as usize > degree {
                    return Err(PermError::NotBijection(degree));
                }
                images[x as usize - 1] = next - 1;
            }
        }
        Ok(Self { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// Image of the 0-based point `i`.
    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }


    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        debug_assert_eq!(self.degree(), other.degree());
        Self { images: other.images.iter().map(|&x| self.images[x as usize]).collect() }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.degree()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Self { images: inv }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::identity(self.degree());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }

    /// Cycle lengths in order of smallest element, fixed points included.
    fn cycle_lengths(&self) -> Vec<u32> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.apply(x);
                len += 1;
            }
            out.push(len);
        }
        out
    }

    pub fn cycles(&self) -> Vec<Vec<u32>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cyc.push(x as u32 + 1);
                x = self.apply(x);
            }
            out.push(cyc);
        }
        out
    }

    pub fn order(&self) -> u64 {
        self.cycle_lengths().into_iter().fold(1u64, |acc, l| acc.lcm(&(l as u64)))
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nontrivial: Vec<_> = self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if nontrivial.is_empty() {
            return write!(f, "()");
        }
        let sep = if self.degree() > 9 { "," } else { "" };
        for c in nontrivial {
            let body: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            write!(f, "({})", body.join(sep))?;
        }
        Ok(())
    }
}

/// Parse one permutation in cycle notation, e.g. `(1,2,3)(4,5)`, `(123)(45)`
/// or `(1 2)`. Undelimited digit runs are read one point per digit.
pub fn parse_cycles(text: &str) -> Result<Vec<Vec<u32>>, PermError> {
    let err = |msg: &str| PermError::Parse(text.to_string(), msg.to_string());
    let mut cycles = Vec::new();
    let mut rest = text.trim();
    if rest.is_empty() || rest == "()" || rest == "e" {
        return Ok(cycles);
    }
    while !rest.is_empty() {
        let open = rest.strip_prefix('(').ok_or_else(|| err("expected `(`"))?;
        let close = open.find(')').ok_or_else(|| err("unbalanced parenthesis"))?;
        let body = open[..close].trim();
        let points: Vec<u32> = if body.contains([',', ' ']) {
            body.split([',', ' '])
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<u32>().map_err(|_| err("bad point")))
                .collect::<Result<_, _>>()?
        } else {
            body.chars()
                .map(|c| c.to_digit(10).ok_or_else(|| err("bad point")))
                .collect::<Result<_, _>>()?
        };
        if points.is_empty() {
            return Err(err("empty cycle"));
        }
        cycles.push(points);
        rest = open[close + 1..].trim_start();
    }
    Ok(cycles)
}

/// Parse a generator list separated by `;` (or by `,` between cycles).
pub fn parse_generators(text: &str, degree: Option<usize>) -> Result<Vec<Permutation>, PermError> {
    let normalized = text.replace("),(", ");(").replace("), (", ");(");
    let parsed: Vec<Vec<Vec<u32>>> = normalized
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(parse_cycles)
        .collect::<Result<_, _>>()?;
    let max_point = parsed.iter().flatten().flatten().copied().max().unwrap_or(1) as usize;
    let n = degree.unwrap_or(max_point);
    if n < max_point {
        return Err(PermError::DegreeMismatch(n, max_point));
    }
    parsed.iter().map(|cyc| Permutation::from_cycles(n, cyc)).collect()
}

impl FromStr for Permutation {
    type Err = PermError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let cycles = parse_cycles(s)?;
        let n = cycles.iter().flatten().copied().max().unwrap_or(1) as usize;
        Self::from_cycles(n, &cycles)
    }
}

/// A partition of the degree recording cycle lengths, parts descending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CycleType {
    degree: u32,
    parts: Vec<u32>,
}

impl CycleType {
    pub fn new(mut parts: Vec<u32>) -> Result<Self, PermError> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(PermError::InvalidCycleType);
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        let degree = parts.iter().sum();
        Ok(Self { degree, parts })
    }

    pub fn identity(degree: u32) -> Self {
        Self { degree, parts: vec![1; degree as usize] }
    }

    /// `copies` cycles each of length `len`.
    pub fn uniform(len: u32, copies: u32) -> Self {
        Self { degree: len * copies, parts: vec![len; copies as usize] }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn is_identity(&self) -> bool {
        self.parts.iter().all(|&p| p == 1)
    }

    /// Order of any permutation with this cycle type.
    pub fn order(&self) -> u64 {
        self.parts.iter().fold(1u64, |acc, &l| acc.lcm(&(l as u64)))
    }

    /// Every cycle type of the given degree, in reverse lexicographic order.
    pub fn all_of_degree(degree: u32) -> Vec<CycleType> {
        fn rec(remaining: u32, max: u32, acc: &mut Vec<u32>, out: &mut Vec<CycleType>) {
            if remaining == 0 {
                out.push(CycleType { degree: acc.iter().sum(), parts: acc.clone() });
                return;
            }
            for part in (1..=max.min(remaining)).rev() {
                acc.push(part);
                rec(remaining - part, part, acc, out);
                acc.pop();
            }
        }
        let mut out = Vec::new();
        rec(degree, degree, &mut Vec::new(), &mut out);
        out
    }

    /// A permutation realizing this cycle type on consecutive points.
    pub fn representative(&self) -> Permutation {
        let mut images = Vec::with_capacity(self.degree as usize);
        let mut start = 0u32;
        for &len in &self.parts {
            for k in 0..len {
                images.push(start + (k + 1) % len);
            }
            start += len;
        }
        Permutation::from_zero_based(images)
    }

    /// Cycle notation of [`Self::representative`], e.g. `(12)(34)`.
    pub fn label(&self) -> String {
        self.representative().to_string()
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "[{}]", body.join(","))
    }
}

impl Serialize for CycleType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.parts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycleType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let parts = Vec::<u32>::deserialize(d)?;
        CycleType::new(parts).map_err(serde::de::Error::custom)
    }
}

pub fn cycle_type(p: &Permutation) -> CycleType {
    let mut parts = p.cycle_lengths();
    parts.sort_unstable_by(|a, b| b.cmp(a));
    CycleType { degree: p.degree() as u32, parts }
}

/// `degree - #parts`.
pub fn index_of(ct: &CycleType) -> u64 {
    (ct.degree - ct.parts.len() as u32) as u64
}

pub fn orbit_count(p: &Permutation) -> usize {
    p.cycle_lengths().len()
}

/// The action of `(p1, p2)` on pairs `(i, j)`, pair `(i, j)` (1-based)
/// sitting at position `(i - 1) * n + j`.
pub fn embed_product(p1: &Permutation, p2: &Permutation) -> Permutation {
    let n = p2.degree();
    let mut images = Vec::with_capacity(p1.degree() * n);
    for i in 0..p1.degree() {
        let row = p1.apply(i) * n;
        for j in 0..n {
            images.push((row + p2.apply(j)) as u32);
        }
    }
    Permutation::from_zero_based(images)
}

/// `ind1·n + ind2·m − ind1·ind2`, valid when the two orders are coprime.
pub fn product_index_coprime(ct1: &CycleType, ct2: &CycleType) -> Result<u64, PermError> {
    let (e1, e2) = (ct1.order(), ct2.order());
    if e1.gcd(&e2) != 1 {
        return Err(PermError::CoprimalityViolation(e1, e2));
    }
    let (m, n) = (ct1.degree as u64, ct2.degree as u64);
    let (i1, i2) = (index_of(ct1), index_of(ct2));
    Ok(i1 * n + i2 * m - i1 * i2)
}

/// `m·n − Σ_{k,l} gcd(|c_k|, |d_l|)`.
pub fn product_index_general(ct1: &CycleType, ct2: &CycleType) -> u64 {
    let mn = ct1.degree as u64 * ct2.degree as u64;
    let orbits: u64 = ct1
        .parts
        .iter()
        .flat_map(|&a| ct2.parts.iter().map(move |&b| a.gcd(&b) as u64))
        .sum();
    mn - orbits
}
