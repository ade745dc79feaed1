//! Lattice points of scaled, sheared boxes whose reduction mod `q` lies on an
//! affine scheme over Z, and the scaling experiments built on those counts.
//!
//! A box is `m·r·B`: `B` a product of intervals, `r` a diagonal scaling and
//! `m` lower unitriangular. Counting runs either by walking every lattice
//! point or by enumerating the solutions mod `q` once (prime by prime, glued
//! with CRT) and counting each residue class by slicing the box.

use std::collections::HashMap;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{factorize, is_squarefree, omega, pow_mod};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SieveError {
    #[error("{0} is not squarefree")]
    NotSquarefree(u64),
    #[error("estimated work {work:.3e} exceeds the enumeration cap {cap:.3e}")]
    CapExceeded { work: f64, cap: f64 },
    #[error("insufficient grid: {0}")]
    InsufficientGrid(String),
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("scaling r_{coord} = {value} is below kappa = {kappa}")]
    BelowKappa { coord: usize, value: f64, kappa: f64 },
}

/// One monomial, `coef · Π x_i^{e_i}`. Serialized as `[coef, [e_1, ..]]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term(pub i64, pub Vec<u32>);

pub type Polynomial = Vec<Term>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawScheme")]
pub struct AffineScheme {
    pub n_vars: usize,
    /// Declared, never computed.
    pub codim: usize,
    pub polynomials: Vec<Polynomial>,
}

#[derive(Deserialize)]
struct RawScheme {
    n_vars: usize,
    codim: usize,
    polynomials: Vec<Polynomial>,
}

impl TryFrom<RawScheme> for AffineScheme {
    type Error = SieveError;

    fn try_from(raw: RawScheme) -> Result<Self, SieveError> {
        AffineScheme::new(raw.n_vars, raw.codim, raw.polynomials)
    }
}

impl AffineScheme {
    pub fn new(n_vars: usize, codim: usize, polynomials: Vec<Polynomial>) -> Result<Self, SieveError> {
        let bad = |m: String| Err(SieveError::InvalidScheme(m));
        if n_vars == 0 {
            return bad("no variables".into());
        }
        if codim == 0 || codim > n_vars {
            return bad(format!("codimension {codim} not in 1..={n_vars}"));
        }
        if polynomials.is_empty() {
            return bad("no polynomials".into());
        }
        for (i, poly) in polynomials.iter().enumerate() {
            if poly.iter().all(|t| t.0 == 0) {
                return bad(format!("polynomial {i} is zero"));
            }
            if let Some(t) = poly.iter().find(|t| t.1.len() != n_vars) {
                return bad(format!("polynomial {i}: exponent vector of length {}, expected {n_vars}", t.1.len()));
            }
        }
        Ok(AffineScheme { n_vars, codim, polynomials })
    }

    pub fn from_json(text: &str) -> Result<Self, SieveError> {
        serde_json::from_str(text).map_err(|e| SieveError::InvalidScheme(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scheme serializes")
    }

    /// `x_i = 0` for every `i` in `zero`, inside `A^n`.
    pub fn coordinate_subspace(n_vars: usize, zero: &[usize]) -> Result<Self, SieveError> {
        let polys = zero
            .iter()
            .map(|&i| {
                let mut e = vec![0; n_vars];
                if i < n_vars {
                    e[i] = 1;
                }
                vec![Term(1, e)]
            })
            .collect();
        let mut sorted = zero.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != zero.len() || sorted.iter().any(|&i| i >= n_vars) {
            return Err(SieveError::InvalidScheme(format!("bad coordinate list {zero:?}")));
        }
        Self::new(n_vars, zero.len(), polys)
    }

    /// Binary cubic forms `(a, b, c, d)` with vanishing discriminant.
    pub fn binary_cubic_discriminant() -> Self {
        let t = |c, e: [u32; 4]| Term(c, e.to_vec());
        let disc = vec![
            t(1, [0, 2, 2, 0]),
            t(-4, [1, 0, 3, 0]),
            t(-4, [0, 3, 0, 1]),
            t(-27, [2, 0, 0, 2]),
            t(18, [1, 1, 1, 1]),
        ];
        Self::new(4, 1, vec![disc]).expect("valid")
    }

    fn vanishes_mod(&self, x: &[u64], m: u64) -> bool {
        if m < 1 << 32 {
            // residues below 2^32, so products fit in u64
            return self.polynomials.iter().all(|poly| {
                let mut acc = 0u64;
                for Term(c, e) in poly {
                    let mut v = c.rem_euclid(m as i64) as u64;
                    for (&xi, &ei) in x.iter().zip(e) {
                        for _ in 0..ei {
                            v = v * xi % m;
                        }
                    }
                    acc = (acc + v) % m;
                }
                acc == 0
            });
        }
        self.polynomials.iter().all(|poly| {
            let mut acc: u128 = 0;
            for Term(c, e) in poly {
                let mut v = c.rem_euclid(m as i64) as u128;
                for (xi, &ei) in x.iter().zip(e) {
                    if ei > 0 {
                        v = v * pow_mod(*xi, ei as u64, m) as u128 % m as u128;
                    }
                }
                acc = (acc + v) % m as u128;
            }
            acc == 0
        })
    }
}

/// `m · diag(r) · B` with `B` a product of closed intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpec {
    pub base: Vec<(Rational64, Rational64)>,
    pub scale: Vec<Rational64>,
    /// Lower unitriangular, row-major.
    pub shear: Vec<Vec<Rational64>>,
}

impl BoxSpec {
    /// `r·[−1, 1]^n`.
    pub fn cube(n: usize, r: Rational64) -> Result<Self, SieveError> {
        Self::scaled(vec![r; n])
    }

    /// `diag(r)·[−1, 1]^n`.
    pub fn scaled(scale: Vec<Rational64>) -> Result<Self, SieveError> {
        let n = scale.len();
        let one = Rational64::one();
        Self::new(vec![(-one, one); n], scale, identity(n))
    }

    pub fn new(
        base: Vec<(Rational64, Rational64)>,
        scale: Vec<Rational64>,
        shear: Vec<Vec<Rational64>>,
    ) -> Result<Self, SieveError> {
        let n = base.len();
        let bad = |m: String| Err(SieveError::InvalidBox(m));
        if n == 0 {
            return bad("empty box".into());
        }
        if scale.len() != n || shear.len() != n || shear.iter().any(|row| row.len() != n) {
            return bad(format!("dimension mismatch: base {n}, scale {}, shear {}", scale.len(), shear.len()));
        }
        if let Some(i) = base.iter().position(|(lo, hi)| lo > hi) {
            return bad(format!("interval {i} is empty"));
        }
        if let Some(i) = scale.iter().position(|r| !r.is_positive()) {
            return bad(format!("scaling r_{i} must be positive"));
        }
        for (i, row) in shear.iter().enumerate() {
            if !row[i].is_one() || row[i + 1..].iter().any(|v| !v.is_zero()) {
                return bad(format!("shear row {i} is not lower unitriangular"));
            }
        }
        Ok(BoxSpec { base, scale, shear })
    }

    pub fn with_shear(mut self, shear: Vec<Vec<Rational64>>) -> Result<Self, SieveError> {
        self.shear = shear;
        Self::new(self.base, self.scale, self.shear)
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn is_unsheared(&self) -> bool {
        self.shear == identity(self.dim())
    }

    /// Lebesgue measure of `B`.
    pub fn base_volume(&self) -> f64 {
        self.base.iter().map(|(lo, hi)| to_f64(hi - lo)).product()
    }

    /// Rough lattice point count of the box, used for caps.
    pub fn point_estimate(&self) -> f64 {
        self.base.iter().zip(&self.scale).map(|((lo, hi), r)| to_f64((hi - lo) * r) + 1.0).product()
    }

    fn prepare(&self) -> Walker {
        let n = self.dim();
        // m is lower unitriangular, so is its inverse; solve column by column
        let mut inv = identity(n);
        for i in 0..n {
            for j in 0..i {
                let mut s = Rational64::zero();
                for k in j..i {
                    s += self.shear[i][k] * inv[k][j];
                }
                inv[i][j] = -s;
            }
        }
        let lo = (0..n).map(|i| self.scale[i] * self.base[i].0).collect();
        let hi = (0..n).map(|i| self.scale[i] * self.base[i].1).collect();
        Walker { inv, lo, hi, sheared: !self.is_unsheared() }
    }
}

fn identity(n: usize) -> Vec<Vec<Rational64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational64::one() } else { Rational64::zero() }).collect())
        .collect()
}

fn to_f64(r: Rational64) -> f64 {
    r.to_f64().expect("finite")
}

/// Integer ranges of each coordinate given the earlier ones. A point `a` is
/// in the box when `y = m^{-1} a` lies in `r·B`; `y_i = a_i + Σ_{l<i} inv_il a_l`.
struct Walker {
    inv: Vec<Vec<Rational64>>,
    lo: Vec<Rational64>,
    hi: Vec<Rational64>,
    sheared: bool,
}

impl Walker {
    fn bounds(&self, level: usize, prefix: &[i64]) -> (i64, i64) {
        let mut u = Rational64::zero();
        if self.sheared {
            for (l, &a) in prefix.iter().enumerate() {
                u += self.inv[level][l] * a;
            }
        }
        ((self.lo[level] - u).ceil().to_integer(), (self.hi[level] - u).floor().to_integer())
    }

    fn dim(&self) -> usize {
        self.lo.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Brute,
    ResidueClass,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SieveConfig {
    /// Boxes with at most this many points are walked directly.
    pub brute_cap: f64,
    /// Upper limit on the work of either path.
    pub enumeration_cap: f64,
    pub kappa: f64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig { brute_cap: 1e7, enumeration_cap: 4e9, kappa: 1.0 }
    }
}

fn check_inputs(scheme: &AffineScheme, bx: &BoxSpec, q: u64, kappa: f64) -> Result<(), SieveError> {
    if q == 0 || !is_squarefree(q) {
        return Err(SieveError::NotSquarefree(q));
    }
    if bx.dim() != scheme.n_vars {
        return Err(SieveError::InvalidBox(format!(
            "box has dimension {}, scheme has {} variables",
            bx.dim(),
            scheme.n_vars
        )));
    }
    if let Some((i, r)) = bx.scale.iter().enumerate().find(|(_, r)| to_f64(**r) < kappa) {
        return Err(SieveError::BelowKappa { coord: i, value: to_f64(*r), kappa });
    }
    Ok(())
}

/// Count of `a ∈ m·r·B ∩ Z^n` with `a mod q ∈ Y(Z/qZ)`, choosing the path by
/// box size.
pub fn count_points_mod_q(
    scheme: &AffineScheme,
    bx: &BoxSpec,
    q: u64,
    cfg: &SieveConfig,
) -> Result<(u64, Method), SieveError> {
    if bx.point_estimate() <= cfg.brute_cap {
        count_brute(scheme, bx, q, cfg).map(|c| (c, Method::Brute))
    } else {
        count_residue(scheme, bx, q, cfg).map(|c| (c, Method::ResidueClass))
    }
}

/// Walk every lattice point and test each polynomial mod `q`.
pub fn count_brute(scheme: &AffineScheme, bx: &BoxSpec, q: u64, cfg: &SieveConfig) -> Result<u64, SieveError> {
    check_inputs(scheme, bx, q, cfg.kappa)?;
    let work = bx.point_estimate();
    if work > cfg.enumeration_cap {
        return Err(SieveError::CapExceeded { work, cap: cfg.enumeration_cap });
    }
    let walker = bx.prepare();
    let (lo, hi) = walker.bounds(0, &[]);
    let total = (lo..=hi)
        .into_par_iter()
        .map(|a0| {
            let mut prefix = vec![a0];
            let mut residues = vec![0u64; walker.dim()];
            walk_points(scheme, &walker, q, &mut prefix, &mut residues)
        })
        .sum();
    Ok(total)
}

fn walk_points(scheme: &AffineScheme, w: &Walker, q: u64, prefix: &mut Vec<i64>, res: &mut [u64]) -> u64 {
    let level = prefix.len();
    res[level - 1] = prefix[level - 1].rem_euclid(q as i64) as u64;
    if level == w.dim() {
        return u64::from(scheme.vanishes_mod(res, q));
    }
    let (lo, hi) = w.bounds(level, prefix);
    let mut total = 0;
    for a in lo..=hi {
        prefix.push(a);
        total += walk_points(scheme, w, q, prefix, res);
        prefix.pop();
    }
    total
}

/// Zeros of the scheme in `(Z/pZ)^n`, lexicographically sorted.
fn solutions_mod_prime(scheme: &AffineScheme, p: u64) -> Vec<Vec<u64>> {
    let n = scheme.n_vars;
    (0..p)
        .into_par_iter()
        .flat_map_iter(|x0| {
            let mut out = Vec::new();
            let mut x = vec![0u64; n];
            x[0] = x0;
            loop {
                if scheme.vanishes_mod(&x, p) {
                    out.push(x.clone());
                }
                // odometer over coordinates 1..n
                let mut i = n;
                loop {
                    if i == 1 {
                        return out;
                    }
                    i -= 1;
                    x[i] += 1;
                    if x[i] < p {
                        break;
                    }
                    x[i] = 0;
                }
            }
        })
        .collect()
}

fn crt_pair(a: u64, m: u64, b: u64, n: u64) -> u64 {
    // m and n coprime; inverse of m mod n from the extended gcd
    let inv = (m as i128).extended_gcd(&(n as i128)).x.rem_euclid(n as i128);
    let t = ((b as i128 - a as i128).rem_euclid(n as i128) * inv).rem_euclid(n as i128);
    (a as i128 + m as i128 * t) as u64
}

/// Zeros of the scheme in `(Z/qZ)^n`, assembled prime by prime with CRT.
pub fn solutions_mod(scheme: &AffineScheme, q: u64, cfg: &SieveConfig) -> Result<Vec<Vec<u64>>, SieveError> {
    if q == 0 || !is_squarefree(q) {
        return Err(SieveError::NotSquarefree(q));
    }
    let primes: Vec<u64> = factorize(q).into_iter().map(|(p, _)| p).collect();
    let search: f64 = primes.iter().map(|&p| (p as f64).powi(scheme.n_vars as i32)).sum();
    if search > cfg.enumeration_cap {
        return Err(SieveError::CapExceeded { work: search, cap: cfg.enumeration_cap });
    }
    let mut sols = vec![vec![0u64; scheme.n_vars]];
    let mut modulus = 1u64;
    for p in primes {
        let local = solutions_mod_prime(scheme, p);
        let size = sols.len() as f64 * local.len() as f64;
        if size > cfg.enumeration_cap {
            return Err(SieveError::CapExceeded { work: size, cap: cfg.enumeration_cap });
        }
        let mut next = Vec::with_capacity(size as usize);
        for s in &sols {
            for t in &local {
                next.push(s.iter().zip(t).map(|(&a, &b)| crt_pair(a, modulus, b, p)).collect());
            }
        }
        sols = next;
        modulus *= p;
    }
    sols.sort_unstable();
    Ok(sols)
}

/// Number of zeros in `(Z/qZ)^n` as a product of the per-prime counts.
pub fn solution_count_crt(scheme: &AffineScheme, q: u64, cfg: &SieveConfig) -> Result<u64, SieveError> {
    if q == 0 || !is_squarefree(q) {
        return Err(SieveError::NotSquarefree(q));
    }
    let mut total = 1u64;
    for (p, _) in factorize(q) {
        let work = (p as f64).powi(scheme.n_vars as i32);
        if work > cfg.enumeration_cap {
            return Err(SieveError::CapExceeded { work, cap: cfg.enumeration_cap });
        }
        total *= solutions_mod_prime(scheme, p).len() as u64;
    }
    Ok(total)
}

/// Number of zeros in `(Z/qZ)^n` by testing every residue vector mod `q`.
pub fn solution_count_direct(scheme: &AffineScheme, q: u64, cfg: &SieveConfig) -> Result<u64, SieveError> {
    let work = (q as f64).powi(scheme.n_vars as i32);
    if work > cfg.enumeration_cap {
        return Err(SieveError::CapExceeded { work, cap: cfg.enumeration_cap });
    }
    Ok(solutions_mod_prime(scheme, q).len() as u64)
}

/// Integers `≡ s (mod q)` in `[lo, hi]`.
fn congruent_in(lo: i64, hi: i64, s: u64, q: u64) -> u64 {
    if lo > hi {
        return 0;
    }
    let (q, s) = (q as i64, s as i64);
    let first = lo + (s - lo).rem_euclid(q);
    if first > hi {
        0
    } else {
        ((hi - first) / q + 1) as u64
    }
}

/// Solve mod `q` once, then count each residue class inside the box.
pub fn count_residue(scheme: &AffineScheme, bx: &BoxSpec, q: u64, cfg: &SieveConfig) -> Result<u64, SieveError> {
    check_inputs(scheme, bx, q, cfg.kappa)?;
    check_residue_work(bx, cfg)?;
    let sols = solutions_mod(scheme, q, cfg)?;
    count_classes(bx, q, &sols)
}

fn check_residue_work(bx: &BoxSpec, cfg: &SieveConfig) -> Result<(), SieveError> {
    if bx.is_unsheared() {
        return Ok(());
    }
    // a sheared box is sliced coordinate by coordinate; the work is roughly
    // the number of prefixes in residue classes that extend to a solution
    let n = bx.dim();
    let last = to_f64((bx.base[n - 1].1 - bx.base[n - 1].0) * bx.scale[n - 1]) + 1.0;
    let work = bx.point_estimate() / last;
    if work > cfg.enumeration_cap {
        return Err(SieveError::CapExceeded { work, cap: cfg.enumeration_cap });
    }
    Ok(())
}

/// `sols` are the zeros mod `q`, sorted.
fn count_classes(bx: &BoxSpec, q: u64, sols: &[Vec<u64>]) -> Result<u64, SieveError> {
    let walker = bx.prepare();
    let n = walker.dim();
    if !walker.sheared {
        let tables: Vec<Vec<u64>> = (0..n)
            .map(|i| {
                let (lo, hi) = walker.bounds(i, &[]);
                (0..q).map(|s| congruent_in(lo, hi, s, q)).collect()
            })
            .collect();
        let total: u128 = sols
            .par_iter()
            .map(|s| s.iter().enumerate().map(|(i, &si)| tables[i][si as usize] as u128).product::<u128>())
            .sum();
        return u64::try_from(total).map_err(|_| SieveError::CapExceeded { work: total as f64, cap: u64::MAX as f64 });
    }
    let groups: Vec<&[Vec<u64>]> = sols.chunk_by(|a, b| a[0] == b[0]).collect();
    let (lo, hi) = walker.bounds(0, &[]);
    let total = groups
        .par_iter()
        .map(|group| {
            let s = group[0][0];
            if n == 1 {
                return congruent_in(lo, hi, s, q);
            }
            let mut prefix = Vec::with_capacity(n);
            let mut sum = 0;
            let mut a = lo + (s as i64 - lo).rem_euclid(q as i64);
            while a <= hi {
                prefix.push(a);
                sum += slice_classes(&walker, group, q, &mut prefix);
                prefix.pop();
                a += q as i64;
            }
            sum
        })
        .sum();
    Ok(total)
}

fn slice_classes(w: &Walker, sols: &[Vec<u64>], q: u64, prefix: &mut Vec<i64>) -> u64 {
    let level = prefix.len();
    let (lo, hi) = w.bounds(level, prefix);
    if lo > hi {
        return 0;
    }
    if level + 1 == w.dim() {
        return sols.iter().map(|s| congruent_in(lo, hi, s[level], q)).sum();
    }
    let mut total = 0;
    for group in sols.chunk_by(|a, b| a[level] == b[level]) {
        let s = group[0][level] as i64;
        let mut a = lo + (s - lo).rem_euclid(q as i64);
        while a <= hi {
            prefix.push(a);
            total += slice_classes(w, group, q, prefix);
            prefix.pop();
            a += q as i64;
        }
    }
    total
}

/// `(Π r_i / q^k) · max_{j ≤ k} q^j / (product of the j smallest r_i)`.
pub fn envelope(r: &[f64], q: u64, k: usize) -> f64 {
    let q = q as f64;
    let mut sorted = r.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best = 1f64;
    let mut acc = 1f64;
    for ri in sorted.iter().take(k) {
        acc *= q / ri;
        best = best.max(acc);
    }
    r.iter().product::<f64>() / q.powi(k as i32) * best
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub sieve: SieveConfig,
    /// Cells with `min r_i >= regime_ratio · q` count as `r ≫ q`, cells with
    /// `q >= regime_ratio · max r_i` as `r ≪ q`.
    pub regime_ratio: f64,
    /// Counts must stay below this multiple of `vol(B) · envelope · C^{ω(q)}`.
    pub envelope_constant: f64,
    pub seed: u64,
    /// Random shear entries are `num/den` with `|num/den| <= shear_bound`
    /// and `1 <= den <= shear_max_den`.
    pub shear_bound: i64,
    pub shear_max_den: i64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sieve: SieveConfig::default(),
            regime_ratio: 4.0,
            envelope_constant: 4.0,
            seed: 0,
            shear_bound: 3,
            shear_max_den: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cell {
    pub r: Vec<f64>,
    pub q: u64,
    pub omega: u32,
    /// 0 is the identity shear.
    pub shear: usize,
    pub count: u64,
    pub method: Method,
    pub envelope: f64,
    /// `count / (vol(B) · envelope · C^{ω(q)})`
    pub normalized: f64,
}

/// Least-squares line `log count = intercept + slope · log v` with the
/// other variable held at `fixed`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlopeFit {
    pub fixed: f64,
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiplicativityRow {
    pub q: u64,
    pub crt_product: u64,
    /// Direct count over `(Z/qZ)^n`, when affordable.
    pub direct: Option<u64>,
    pub residual: Option<i64>,
    /// `#Y(Z/qZ) / q^{n−k}`
    pub density: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub n_vars: usize,
    pub codim: usize,
    pub cells: Vec<Cell>,
    /// Fits in `log q` at each fixed `r`, over `r ≫ q` cells.
    pub q_fits: Vec<SlopeFit>,
    /// Fits in `log r` at each fixed `q`, over `r ≫ q` cells.
    pub r_fits_large: Vec<SlopeFit>,
    /// Fits in `log r` at each fixed `q`, over `r ≪ q` cells.
    pub r_fits_small: Vec<SlopeFit>,
    /// The `q` fit at the largest `r` that has one; predicted `−k`.
    pub q_exponent: Option<f64>,
    /// The `r ≫ q` fit at the smallest `q` that has one; predicted `n`.
    pub r_exponent: Option<f64>,
    /// The `r ≪ q` fit at the largest `q` that has one; predicted `n − k`.
    pub r_exponent_small: Option<f64>,
    /// `max_p #Y(F_p) / p^{n−k}` over primes dividing the grid, at least 1.
    pub local_constant: f64,
    pub multiplicativity: Vec<MultiplicativityRow>,
    pub max_normalized: f64,
    pub within_envelope: bool,
}

fn line_fit(points: &[(f64, f64)], fixed: f64) -> Option<SlopeFit> {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_rms =
        (points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Some(SlopeFit { fixed, slope, intercept, residual_rms, points: points.len() })
}

fn spans_decade(values: &[f64]) -> bool {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(0.0, f64::max);
    values.len() >= 2 && lo > 0.0 && hi / lo >= 10.0 - 1e-9
}

/// Count on every `(r, q)` cell with `r·[−1,1]^n` and fit the slopes.
pub fn scaling_experiment(
    scheme: &AffineScheme,
    r_grid: &[Rational64],
    q_grid: &[u64],
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, SieveError> {
    let rs: Vec<f64> = r_grid.iter().map(|&r| to_f64(r)).collect();
    if !spans_decade(&rs) {
        return Err(SieveError::InsufficientGrid(format!("r grid {rs:?} spans less than a decade")));
    }
    let boxes =
        r_grid.iter().map(|&r| BoxSpec::cube(scheme.n_vars, r).map(|b| vec![b])).collect::<Result<Vec<_>, _>>()?;
    run_experiment(scheme, boxes, q_grid, cfg)
}

/// Counts over anisotropic boxes under random lower unitriangular shears
/// (sample 0 is the identity), checked against the envelope.
pub fn sheared_experiment(
    scheme: &AffineScheme,
    r_vectors: &[Vec<Rational64>],
    shear_samples: usize,
    q_grid: &[u64],
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, SieveError> {
    if r_vectors.is_empty() {
        return Err(SieveError::InsufficientGrid("no r vectors".into()));
    }
    let shears = random_shears(scheme.n_vars, shear_samples, cfg)?;
    let boxes = r_vectors
        .iter()
        .map(|r| {
            let base = BoxSpec::scaled(r.clone())?;
            shears.iter().map(|m| base.clone().with_shear(m.clone())).collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    run_experiment(scheme, boxes, q_grid, cfg)
}

/// Identity followed by `samples` seeded random shears.
pub fn random_shears(n: usize, samples: usize, cfg: &ExperimentConfig) -> Result<Vec<Vec<Vec<Rational64>>>, SieveError> {
    if cfg.shear_bound < 0 || cfg.shear_max_den < 1 {
        return Err(SieveError::InvalidBox("shear bounds must be nonnegative with denominator >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = vec![identity(n)];
    for _ in 0..samples {
        let mut m = identity(n);
        for (i, row) in m.iter_mut().enumerate() {
            for v in row.iter_mut().take(i) {
                let den = rng.gen_range(1..=cfg.shear_max_den);
                let num = rng.gen_range(-cfg.shear_bound * den..=cfg.shear_bound * den);
                *v = Rational64::new(num, den);
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// `boxes[i]` are the shear samples of one scaling.
fn run_experiment(
    scheme: &AffineScheme,
    boxes: Vec<Vec<BoxSpec>>,
    q_grid: &[u64],
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, SieveError> {
    let qf: Vec<f64> = q_grid.iter().map(|&q| q as f64).collect();
    if !spans_decade(&qf) {
        return Err(SieveError::InsufficientGrid(format!("q grid {q_grid:?} spans less than a decade")));
    }
    if let Some(&q) = q_grid.iter().find(|&&q| q == 0 || !is_squarefree(q)) {
        return Err(SieveError::NotSquarefree(q));
    }
    let (n, k) = (scheme.n_vars, scheme.codim);

    let mut primes: Vec<u64> = q_grid.iter().flat_map(|&q| factorize(q).into_iter().map(|(p, _)| p)).collect();
    primes.sort_unstable();
    primes.dedup();
    let mut local_constant = 1f64;
    for &p in &primes {
        let rho = solution_count_crt(scheme, p, &cfg.sieve)? as f64;
        local_constant = local_constant.max(rho / (p as f64).powi((n - k) as i32));
    }
    let mut distinct_q = q_grid.to_vec();
    distinct_q.sort_unstable();
    distinct_q.dedup();
    let solutions: HashMap<u64, Vec<Vec<u64>>> = distinct_q
        .iter()
        .map(|&q| Ok((q, solutions_mod(scheme, q, &cfg.sieve)?)))
        .collect::<Result<_, SieveError>>()?;

    let jobs: Vec<(&BoxSpec, usize, u64)> = boxes
        .iter()
        .flat_map(|samples| samples.iter().enumerate())
        .flat_map(|(s, b)| q_grid.iter().map(move |&q| (b, s, q)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(b, shear, q)| {
            check_inputs(scheme, b, q, cfg.sieve.kappa)?;
            let (count, method) = if b.point_estimate() <= cfg.sieve.brute_cap {
                (count_brute(scheme, b, q, &cfg.sieve)?, Method::Brute)
            } else {
                check_residue_work(b, &cfg.sieve)?;
                (count_classes(b, q, &solutions[&q])?, Method::ResidueClass)
            };
            let r: Vec<f64> = b.scale.iter().map(|&v| to_f64(v)).collect();
            let env = envelope(&r, q, k);
            let w = omega(q);
            let normalized = count as f64 / (b.base_volume() * env * local_constant.powi(w as i32));
            Ok(Cell { r, q, omega: w, shear, count, method, envelope: env, normalized })
        })
        .collect::<Result<Vec<_>, SieveError>>()?;

    // fits use the unsheared cubes only
    let cube_cells: Vec<&Cell> = cells.iter().filter(|c| c.shear == 0 && c.count > 0).collect();
    let large = |c: &Cell| c.r.iter().copied().fold(f64::INFINITY, f64::min) >= cfg.regime_ratio * c.q as f64;
    let small = |c: &Cell| c.q as f64 >= cfg.regime_ratio * c.r.iter().copied().fold(0.0, f64::max);
    let mut r_values: Vec<f64> = cube_cells.iter().map(|c| c.r[0]).collect();
    r_values.sort_by(f64::total_cmp);
    r_values.dedup();
    let isotropic = cube_cells.iter().all(|c| c.r.iter().all(|&v| v == c.r[0]));

    let mut q_fits = Vec::new();
    for &r in &r_values {
        let pts: Vec<(f64, f64)> = cube_cells
            .iter()
            .filter(|c| c.r[0] == r && large(c))
            .map(|c| ((c.q as f64).ln(), (c.count as f64).ln()))
            .collect();
        q_fits.extend(line_fit(&pts, r));
    }
    let mut r_fits_large = Vec::new();
    let mut r_fits_small = Vec::new();
    if isotropic {
        for &q in q_grid {
            let pick = |keep: &dyn Fn(&Cell) -> bool| -> Vec<(f64, f64)> {
                cube_cells
                    .iter()
                    .filter(|c| c.q == q && keep(c))
                    .map(|c| (c.r[0].ln(), (c.count as f64).ln()))
                    .collect()
            };
            r_fits_large.extend(line_fit(&pick(&large), q as f64));
            r_fits_small.extend(line_fit(&pick(&small), q as f64));
        }
    }
    let q_exponent = q_fits.last().map(|f| f.slope);
    let r_exponent = r_fits_large.iter().min_by(|a, b| a.fixed.total_cmp(&b.fixed)).map(|f| f.slope);
    let r_exponent_small = r_fits_small.iter().max_by(|a, b| a.fixed.total_cmp(&b.fixed)).map(|f| f.slope);

    let mut multiplicativity = Vec::new();
    let mut seen = Vec::new();
    for &q in q_grid {
        if q == 1 || seen.contains(&q) {
            continue;
        }
        seen.push(q);
        let crt_product = solutions[&q].len() as u64;
        let direct = if omega(q) > 1 { solution_count_direct(scheme, q, &cfg.sieve).ok() } else { None };
        multiplicativity.push(MultiplicativityRow {
            q,
            crt_product,
            direct,
            residual: direct.map(|d| d as i64 - crt_product as i64),
            density: crt_product as f64 / (q as f64).powi((n - k) as i32),
        });
    }

    let max_normalized = cells.iter().map(|c| c.normalized).fold(0.0, f64::max);
    Ok(ExperimentReport {
        n_vars: n,
        codim: k,
        within_envelope: max_normalized <= cfg.envelope_constant,
        cells,
        q_fits,
        r_fits_large,
        r_fits_small,
        q_exponent,
        r_exponent,
        r_exponent_small,
        local_constant,
        multiplicativity,
        max_normalized,
    })
}
