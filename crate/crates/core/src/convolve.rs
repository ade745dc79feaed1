//! Weighted product counts `P_{a,b}(X) = #{(s1, s2) : s1^a s2^b <= X}` over
//! two multisets of positive integers, exactly and asymptotically.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{checked_pow, iroot};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvolveError {
    #[error("sequence entries must have strictly increasing values and positive multiplicities")]
    InvalidSequence,
    #[error("sequence is only known up to {complete_to}, but {needed} is required")]
    InsufficientRange { complete_to: u64, needed: u64 },
    #[error("weights must be positive rationals")]
    InvalidWeight,
    #[error("slopes differ: n1/a = {0}, n2/b = {1}")]
    SlopeMismatch(f64, f64),
    #[error("n1/a = {0} does not exceed n2/b = {1}")]
    SlopeNotGreater(f64, f64),
    #[error("sum exponent {exponent} does not exceed growth exponent {growth}")]
    DivergenceSuspected { exponent: f64, growth: f64 },
    #[error("need at least 8 points spanning 3 decades, got {points} points over {decades:.2} decades")]
    InsufficientData { points: usize, decades: f64 },
}

/// Closed-form generators for infinite sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceRule {
    /// Every positive integer once.
    Integers,
    /// `n^k` for every positive integer `n`.
    Powers(u32),
}

#[derive(Debug, Clone, PartialEq)]
enum Backing {
    Rule(SequenceRule),
    /// `complete_to = None` means the list is the whole (finite) sequence.
    Explicit { values: Vec<u64>, prefix: Vec<u64>, complete_to: Option<u64> },
}

/// A sorted multiset of positive integers.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingSequence {
    backing: Backing,
}

impl CountingSequence {
    pub fn rule(rule: SequenceRule) -> Self {
        Self { backing: Backing::Rule(rule) }
    }

    pub fn integers() -> Self {
        Self::rule(SequenceRule::Integers)
    }

    pub fn powers(k: u32) -> Self {
        Self::rule(SequenceRule::Powers(k.max(1)))
    }

    /// `(value, multiplicity)` pairs with strictly increasing values.
    pub fn from_entries(
        entries: Vec<(u64, u64)>,
        complete_to: Option<u64>,
    ) -> Result<Self, ConvolveError> {
        let ok = entries.iter().all(|&(v, m)| v >= 1 && m >= 1)
            && entries.windows(2).all(|w| w[0].0 < w[1].0);
        if !ok {
            return Err(ConvolveError::InvalidSequence);
        }
        let mut prefix = Vec::with_capacity(entries.len());
        let mut acc = 0u64;
        for &(_, m) in &entries {
            acc += m;
            prefix.push(acc);
        }
        let values = entries.into_iter().map(|(v, _)| v).collect();
        Ok(Self { backing: Backing::Explicit { values, prefix, complete_to } })
    }

    /// Aggregate raw values (any order, repeats allowed).
    pub fn from_values(
        mut values: Vec<u64>,
        complete_to: Option<u64>,
    ) -> Result<Self, ConvolveError> {
        values.sort_unstable();
        let mut entries: Vec<(u64, u64)> = Vec::new();
        for v in values {
            match entries.last_mut() {
                Some((last, m)) if *last == v => *m += 1,
                _ => entries.push((v, 1)),
            }
        }
        Self::from_entries(entries, complete_to)
    }

    pub fn empty() -> Self {
        Self::from_entries(Vec::new(), None).expect("empty is valid")
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.backing, Backing::Explicit { complete_to: None, .. })
    }

    /// Largest value up to which the multiset is known; `None` if unbounded.
    pub fn known_to(&self) -> Option<u64> {
        match &self.backing {
            Backing::Rule(_) => None,
            Backing::Explicit { complete_to: Some(c), .. } => Some(*c),
            Backing::Explicit { complete_to: None, .. } => None,
        }
    }

    pub fn min_value(&self) -> Option<u64> {
        match &self.backing {
            Backing::Rule(_) => Some(1),
            Backing::Explicit { values, .. } => values.first().copied(),
        }
    }

    /// Number of terms `<= x`, with multiplicity.
    pub fn count_le(&self, x: u64) -> Result<u64, ConvolveError> {
        match &self.backing {
            Backing::Rule(SequenceRule::Integers) => Ok(x),
            Backing::Rule(SequenceRule::Powers(k)) => Ok(iroot(x as u128, *k) as u64),
            Backing::Explicit { values, prefix, complete_to } => {
                if let Some(c) = complete_to {
                    if x > *c {
                        return Err(ConvolveError::InsufficientRange { complete_to: *c, needed: x });
                    }
                }
                let i = values.partition_point(|&v| v <= x);
                Ok(if i == 0 { 0 } else { prefix[i - 1] })
            }
        }
    }

    /// `(value, multiplicity)` for every term `<= x`.
    pub fn terms_le(&self, x: u64) -> Result<Vec<(u64, u64)>, ConvolveError> {
        match &self.backing {
            Backing::Rule(SequenceRule::Integers) => Ok((1..=x).map(|v| (v, 1)).collect()),
            Backing::Rule(SequenceRule::Powers(k)) => {
                let top = iroot(x as u128, *k) as u64;
                Ok((1..=top).map(|n| (n.pow(*k), 1)).collect())
            }
            Backing::Explicit { values, prefix, complete_to } => {
                if let Some(c) = complete_to {
                    if x > *c {
                        return Err(ConvolveError::InsufficientRange { complete_to: *c, needed: x });
                    }
                }
                let end = values.partition_point(|&v| v <= x);
                Ok((0..end)
                    .map(|i| (values[i], prefix[i] - if i == 0 { 0 } else { prefix[i - 1] }))
                    .collect())
            }
        }
    }

    /// Exponent `g` with `#{s <= x} ≈ x^g`, as used by tail estimates.
    pub fn growth_exponent(&self) -> f64 {
        match &self.backing {
            Backing::Rule(SequenceRule::Integers) => 1.0,
            Backing::Rule(SequenceRule::Powers(k)) => 1.0 / *k as f64,
            Backing::Explicit { complete_to: None, .. } => 0.0,
            Backing::Explicit { complete_to: Some(c), .. } => {
                let n = self.count_le(*c).unwrap_or(0);
                if n <= 1 || *c <= 1 {
                    0.0
                } else {
                    (n as f64).ln() / (*c as f64).ln()
                }
            }
        }
    }
}

/// `A · X^n · ln^r X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticForm {
    pub coefficient: f64,
    pub exponent: f64,
    pub logpower: u32,
}

impl AsymptoticForm {
    pub fn new(coefficient: f64, exponent: f64, logpower: u32) -> Self {
        Self { coefficient, exponent, logpower }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficient * x.powf(self.exponent) * x.ln().powi(self.logpower as i32)
    }
}

fn check_weight(w: Rational64) -> Result<(), ConvolveError> {
    if *w.numer() <= 0 || *w.denom() <= 0 {
        return Err(ConvolveError::InvalidWeight);
    }
    Ok(())
}

/// The pair condition `s1^A · s2^B <= N` after clearing denominators.
struct Threshold {
    exp_outer: u32,
    exp_inner: u32,
    bound: BigUint,
    small: Option<u128>,
}

impl Threshold {
    /// Largest `t` with `s^exp_outer · t^exp_inner <= bound`, or `None` if
    /// even `t = 1` fails.
    fn inner_limit(&self, s: u64) -> Option<u64> {
        if let Some(n) = self.small {
            let sp = checked_pow(s as u128, self.exp_outer)?;
            if sp > n {
                return None;
            }
            let q = n / sp;
            return Some(iroot(q, self.exp_inner).min(u64::MAX as u128) as u64);
        }
        let sp = BigUint::from(s).pow(self.exp_outer);
        if sp > self.bound {
            return None;
        }
        let q = &self.bound / sp;
        Some(q.nth_root(self.exp_inner).to_u64().unwrap_or(u64::MAX))
    }

    /// Largest `s` that can pair with the smallest inner value.
    fn outer_limit(&self, inner_min: u64) -> u64 {
        let ip = BigUint::from(inner_min).pow(self.exp_inner);
        if ip > self.bound {
            return 0;
        }
        (&self.bound / ip).nth_root(self.exp_outer).to_u64().unwrap_or(u64::MAX)
    }
}

fn rational_parts(w: Rational64) -> (u64, u64) {
    (*w.numer() as u64, *w.denom() as u64)
}

/// Exact `#{(s1, s2) : s1^a s2^b <= x}`, counting multiplicities.
pub fn product_count_exact(
    s1: &CountingSequence,
    s2: &CountingSequence,
    a: Rational64,
    b: Rational64,
    x: u64,
) -> Result<u64, ConvolveError> {
    check_weight(a)?;
    check_weight(b)?;
    let (min1, min2) = match (s1.min_value(), s2.min_value()) {
        (Some(m1), Some(m2)) => (m1, m2),
        _ => return Ok(0),
    };
    let (an, ad) = rational_parts(a);
    let (bn, bd) = rational_parts(b);
    let l = ad.lcm(&bd);
    let exp1 = (an * (l / ad)) as u32;
    let exp2 = (bn * (l / bd)) as u32;
    let bound = BigUint::from(x).pow(l as u32);
    let small = bound.to_u128();

    let t12 = Threshold { exp_outer: exp1, exp_inner: exp2, bound: bound.clone(), small };
    let t21 = Threshold { exp_outer: exp2, exp_inner: exp1, bound, small };
    let lim1 = t12.outer_limit(min2);
    let lim2 = t21.outer_limit(min1);
    let n1 = s1.count_le(lim1.min(s1.known_to().unwrap_or(u64::MAX)))?;
    let n2 = s2.count_le(lim2.min(s2.known_to().unwrap_or(u64::MAX)))?;
    let (outer, inner, th, lim) =
        if n1 <= n2 { (s1, s2, &t12, lim1) } else { (s2, s1, &t21, lim2) };
    if let Some(c) = outer.known_to() {
        if lim > c {
            return Err(ConvolveError::InsufficientRange { complete_to: c, needed: lim });
        }
    }

    let count_with = |s: u64, mult: u64| -> Result<u64, ConvolveError> {
        match th.inner_limit(s) {
            Some(t) => Ok(mult * inner.count_le(t)?),
            None => Ok(0),
        }
    };

    // Integers as the outer sequence can be huge; avoid materializing it.
    if let Backing::Rule(SequenceRule::Integers) = outer.backing {
        const BLOCK: u64 = 1 << 16;
        return (0..lim.div_ceil(BLOCK))
            .into_par_iter()
            .map(|i| {
                let hi = ((i + 1) * BLOCK).min(lim);
                (i * BLOCK + 1..=hi).try_fold(0u64, |acc, s| Ok(acc + count_with(s, 1)?))
            })
            .try_reduce(|| 0, |p, q| Ok(p + q));
    }
    outer
        .terms_le(lim)?
        .into_par_iter()
        .with_min_len(1 << 12)
        .map(|(s, m)| count_with(s, m))
        .try_reduce(|| 0, |p, q| Ok(p + q))
}

/// Brute-force double loop over the known parts of both sequences, for
/// cross-checking small cases.
pub fn product_count_naive(
    s1: &CountingSequence,
    s2: &CountingSequence,
    a: f64,
    b: f64,
    x: u64,
) -> Result<u64, ConvolveError> {
    let xf = x as f64;
    let top = |s: &CountingSequence, w: f64| {
        let t = xf.powf(1.0 / w).floor() as u64 + 1;
        s.known_to().map_or(t, |c| t.min(c))
    };
    let t1 = s1.terms_le(top(s1, a))?;
    let t2 = s2.terms_le(top(s2, b))?;
    let mut total = 0;
    for &(u, m) in &t1 {
        for &(v, n) in &t2 {
            // tolerate rounding at exact equality
            if (u as f64).powf(a) * (v as f64).powf(b) <= xf * (1.0 + 1e-12) {
                total += m * n;
            }
        }
    }
    Ok(total)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn slope(f: &AsymptoticForm, w: Rational64) -> f64 {
    f.exponent / w.to_f64().expect("finite weight")
}

fn same_slope(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0)
}

/// Leading term of `P_{a,b}` when `n1/a = n2/b`.
pub fn predict_equal(
    f1: &AsymptoticForm,
    f2: &AsymptoticForm,
    a: Rational64,
    b: Rational64,
) -> Result<AsymptoticForm, ConvolveError> {
    check_weight(a)?;
    check_weight(b)?;
    let (s1, s2) = (slope(f1, a), slope(f2, b));
    if !same_slope(s1, s2) {
        return Err(ConvolveError::SlopeMismatch(s1, s2));
    }
    let (af, bf) = (a.to_f64().unwrap(), b.to_f64().unwrap());
    let (r1, r2) = (f1.logpower, f2.logpower);
    let beta = factorial(r1) * factorial(r2) / factorial(r1 + r2 + 1);
    let coefficient = f1.coefficient * f2.coefficient
        / (af.powi(r1 as i32) * bf.powi(r2 as i32))
        * beta
        * s1;
    Ok(AsymptoticForm::new(coefficient, s1, r1 + r2 + 1))
}

fn require_greater(
    f1: &AsymptoticForm,
    f2: &AsymptoticForm,
    a: Rational64,
    b: Rational64,
) -> Result<(f64, f64), ConvolveError> {
    check_weight(a)?;
    check_weight(b)?;
    let (s1, s2) = (slope(f1, a), slope(f2, b));
    if s1 <= s2 || same_slope(s1, s2) {
        return Err(ConvolveError::SlopeNotGreater(s1, s2));
    }
    Ok((s1, s2))
}

/// Leading term of `P_{a,b}` when `n1/a > n2/b`, given the constant
/// `c_prime` from [`csum_limit`].
pub fn predict_unequal(
    f1: &AsymptoticForm,
    f2: &AsymptoticForm,
    a: Rational64,
    b: Rational64,
    c_prime: f64,
) -> Result<AsymptoticForm, ConvolveError> {
    let (s1, _) = require_greater(f1, f2, a, b)?;
    let af = a.to_f64().unwrap();
    Ok(AsymptoticForm::new(
        f1.coefficient * c_prime / af.powi(f1.logpower as i32),
        s1,
        f1.logpower,
    ))
}

/// Closed-form upper bound on `P_{a,b}` valid when each `F_i` is dominated
/// by its asymptotic form. `f2.exponent = 0` covers finite `S2`.
pub fn predict_unequal_bound(
    f1: &AsymptoticForm,
    f2: &AsymptoticForm,
    a: Rational64,
    b: Rational64,
) -> Result<AsymptoticForm, ConvolveError> {
    let (s1, s2) = require_greater(f1, f2, a, b)?;
    let (af, bf) = (a.to_f64().unwrap(), b.to_f64().unwrap());
    let (r1, r2) = (f1.logpower, f2.logpower);
    let coefficient = f1.coefficient * f2.coefficient * factorial(r2)
        / (bf.powi(r2 as i32) * af.powi(r1 as i32))
        / (s1 - s2).powi(r2 as i32 + 1)
        * s1;
    Ok(AsymptoticForm::new(coefficient, s1, r1))
}

/// `Σ_{m^b <= X} mult(m) · m^{−b·n1/a} · (1 − ln m^b / ln X)^{r1}`.
pub fn csum_partial(
    s2: &CountingSequence,
    b: f64,
    n1_over_a: f64,
    r1: u32,
    x: f64,
) -> Result<f64, ConvolveError> {
    let top = x.powf(1.0 / b).floor() as u64;
    let top = s2.known_to().map_or(top, |c| top.min(c));
    let s = b * n1_over_a;
    let lnx = x.ln();
    Ok(s2
        .terms_le(top)?
        .iter()
        .map(|&(m, mult)| {
            let mf = m as f64;
            let w = if r1 == 0 { 1.0 } else { (1.0 - b * mf.ln() / lnx).max(0.0).powi(r1 as i32) };
            mult as f64 * mf.powf(-s) * w
        })
        .sum())
}

#[derive(Debug, Clone, Serialize)]
pub struct CsumLimit {
    /// Partial sum plus tail estimate.
    pub value: f64,
    pub partial: f64,
    pub tail_estimate: f64,
    /// Terms `m <= cutoff` were summed.
    pub cutoff: u64,
    pub converged: bool,
    /// `(cutoff, value)` after each doubling.
    pub history: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, Copy)]
pub struct CsumOptions {
    pub start: u64,
    pub tolerance: f64,
    pub max_doublings: u32,
}

impl Default for CsumOptions {
    fn default() -> Self {
        Self { start: 1 << 10, tolerance: 1e-10, max_doublings: 30 }
    }
}

/// `lim_{X→∞}` of [`csum_partial`], i.e. `Σ mult(m) · m^{−s}` with
/// `s = b·n1/a`, summed in doubling blocks with a partial-summation tail
/// estimate `g/(s − g) · F2(M) · M^{−s}`.
pub fn csum_limit(
    s2: &CountingSequence,
    b: f64,
    n1_over_a: f64,
    opts: CsumOptions,
) -> Result<CsumLimit, ConvolveError> {
    let s = b * n1_over_a;
    let g = s2.growth_exponent();
    if s2.is_finite() {
        let all = s2.terms_le(u64::MAX)?;
        let value: f64 = all.iter().map(|&(m, k)| k as f64 * (m as f64).powf(-s)).sum();
        let cutoff = all.last().map_or(0, |t| t.0);
        return Ok(CsumLimit {
            value,
            partial: value,
            tail_estimate: 0.0,
            cutoff,
            converged: true,
            history: vec![(cutoff, value)],
        });
    }
    if s <= g {
        return Err(ConvolveError::DivergenceSuspected { exponent: s, growth: g });
    }
    let cap = s2.known_to().unwrap_or(u64::MAX);
    let mut partial = 0.0;
    let mut lo = 0u64;
    let mut hi = opts.start.min(cap);
    let mut history = Vec::new();
    let mut prev: Option<f64> = None;
    for _ in 0..=opts.max_doublings {
        let block = s2.terms_le(hi)?;
        partial += block
            .iter()
            .filter(|t| t.0 > lo)
            .rev()
            .map(|&(m, k)| k as f64 * (m as f64).powf(-s))
            .sum::<f64>();
        let count = s2.count_le(hi)? as f64;
        let tail = g / (s - g) * count * (hi as f64).powf(-s);
        let value = partial + tail;
        history.push((hi, value));
        let done = prev.is_some_and(|p| (value - p).abs() < opts.tolerance);
        if done || hi == cap {
            return Ok(CsumLimit {
                value,
                partial,
                tail_estimate: tail,
                cutoff: hi,
                converged: done,
                history,
            });
        }
        prev = Some(value);
        lo = hi;
        hi = hi.saturating_mul(2).min(cap);
    }
    let &(cutoff, value) = history.last().expect("at least one block");
    log::warn!("C' sum not converged at cutoff {cutoff}: value {value}");
    Err(ConvolveError::DivergenceSuspected { exponent: s, growth: g })
}

/// Growth of the lower bound for `G1 × G2` built from pairs: exponent
/// `1/min(deg2·a1, deg1·a2)` and log power. `g2 = None` treats the second
/// factor as trivial.
pub fn predict_product_lower(
    (a1, deg1, b1): (u64, u64, u64),
    g2: Option<(u64, u64, u64)>,
) -> (Rational64, u32) {
    let Some((a2, deg2, b2)) = g2 else {
        return (Rational64::new(1, a1 as i64), (b1 - 1) as u32);
    };
    let (w1, w2) = (deg2 * a1, deg1 * a2);
    let exponent = Rational64::new(1, w1.min(w2) as i64);
    let logpower = match w1.cmp(&w2) {
        std::cmp::Ordering::Less => b1 - 1,
        std::cmp::Ordering::Greater => b2 - 1,
        std::cmp::Ordering::Equal => b1 + b2 - 1,
    };
    (exponent, logpower as u32)
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub coefficient: f64,
    /// RMS of `ratio/coefficient − 1` over the fitted points.
    pub residual: f64,
    pub points_used: usize,
    pub ratios: Vec<(f64, f64)>,
}

/// Least-squares constant for `N(X) / (X^e ln^r X)` over the top decade of
/// the sample.
pub fn empirical_fit(
    counts: &[(f64, f64)],
    exponent: f64,
    logpower: u32,
) -> Result<FitReport, ConvolveError> {
    let xs = counts.iter().map(|c| c.0);
    let (lo, hi) = xs.fold((f64::INFINITY, 0f64), |(l, h), x| (l.min(x), h.max(x)));
    let decades = if counts.is_empty() { 0.0 } else { (hi / lo).log10() };
    if counts.len() < 8 || decades < 3.0 - 1e-9 {
        return Err(ConvolveError::InsufficientData { points: counts.len(), decades });
    }
    let shape = AsymptoticForm::new(1.0, exponent, logpower);
    let ratios: Vec<(f64, f64)> = counts
        .iter()
        .filter(|c| c.0 >= hi / 10.0 * (1.0 - 1e-12))
        .map(|&(x, n)| (x, n / shape.eval(x)))
        .collect();
    let coefficient = ratios.iter().map(|r| r.1).sum::<f64>() / ratios.len() as f64;
    let residual = if coefficient == 0.0 {
        0.0
    } else {
        (ratios.iter().map(|r| (r.1 / coefficient - 1.0).powi(2)).sum::<f64>()
            / ratios.len() as f64)
            .sqrt()
    };
    Ok(FitReport { coefficient, residual, points_used: ratios.len(), ratios })
}

/// Geometric grid of `points` values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<u64> {
    assert!(points >= 2 && lo > 0.0 && hi > lo);
    let step = (hi / lo).ln() / (points - 1) as f64;
    (0..points).map(|i| (lo * (step * i as f64).exp()).round() as u64).collect()
}
