//! Counting pairs `(K, L)` of an `S_n` field and an abelian `A` field by the
//! discriminant of the compositum.
//!
//! At a tame prime the compositum exponent is the index of the product of
//! the two inertia generators acting on pairs. At a prime ramified in only
//! one factor it is the product exponent `deg L · e_K + deg K · e_L`. Wild
//! primes ramified in both factors need local data: a [`WildTable`] in exact
//! mode, or the interval `[max(deg L·e_K, deg K·e_L), deg L·e_K + deg K·e_L]`
//! in interval mode (the lower end is the tame inequality, used as a
//! heuristic).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::arith::{iroot, primes_up_to};
use crate::convolve::{empirical_fit, FitReport};
use crate::fields::{FieldList, FieldRecord, LocalRamification};
use crate::permgroup::{product_index_general, CycleType};
use crate::tamecomp::{check_hypothesis, tail_exponent, verify_unin, AbelianGroupSpec, RkTable, TameError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CountingError {
    #[error("no wild table entry for p = {p}, K: {k_label}, L: {l_label}")]
    MissingWildEntry { p: u64, k_label: String, l_label: String },
    #[error("inadmissible pair: {0}")]
    InadmissiblePair(String),
    #[error("{which} list is complete to {complete_to}, but the window needs {needed}")]
    IncompleteList { which: &'static str, complete_to: u64, needed: u64 },
    #[error("uniformity inequality fails for n = {n}, A = {group}")]
    LemmaFails { n: u32, group: String },
    #[error("invalid wild table: {0}")]
    InvalidWildTable(String),
    #[error(transparent)]
    Tame(#[from] TameError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscMode {
    Exact,
    Interval,
}

impl FromStr for DiscMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Self::Exact),
            "interval" => Ok(Self::Interval),
            other => Err(format!("unknown mode {other:?}; expected exact or interval")),
        }
    }
}

impl fmt::Display for DiscMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::Interval => "interval",
        })
    }
}

/// Compositum exponents at wild primes, keyed by the local labels of both
/// factors. A tame side is keyed as `tame:[2,1]`.
///
/// ```json
/// {"entries":[{"p":3,"k":"3:1^3:v5","l":"3:C3:t0","exponent":21}]}
/// ```
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WildTable {
    entries: BTreeMap<(u64, String, String), u32>,
}

#[derive(Serialize, Deserialize)]
struct WildEntry {
    p: u64,
    k: String,
    l: String,
    exponent: u32,
}

#[derive(Serialize, Deserialize)]
struct WildTableJson {
    entries: Vec<WildEntry>,
}

impl WildTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, p: u64, k_label: &str, l_label: &str, exponent: u32) {
        self.entries.insert((p, k_label.to_string(), l_label.to_string()), exponent);
    }

    pub fn get(&self, p: u64, k_label: &str, l_label: &str) -> Option<u32> {
        self.entries.get(&(p, k_label.to_string(), l_label.to_string())).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn from_json(text: &str) -> Result<Self, CountingError> {
        let raw: WildTableJson =
            serde_json::from_str(text).map_err(|e| CountingError::InvalidWildTable(e.to_string()))?;
        let mut table = Self::new();
        for e in raw.entries {
            if !crate::arith::is_prime(e.p) {
                return Err(CountingError::InvalidWildTable(format!("{} is not prime", e.p)));
            }
            if table.get(e.p, &e.k, &e.l).is_some() {
                return Err(CountingError::InvalidWildTable(format!(
                    "duplicate entry for p = {}, {} / {}",
                    e.p, e.k, e.l
                )));
            }
            table.insert(e.p, &e.k, &e.l, e.exponent);
        }
        Ok(table)
    }

    pub fn to_json(&self) -> String {
        let entries = self
            .entries
            .iter()
            .map(|((p, k, l), &exponent)| WildEntry { p: *p, k: k.clone(), l: l.clone(), exponent })
            .collect();
        serde_json::to_string_pretty(&WildTableJson { entries }).expect("serializable")
    }

    fn entries(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.entries.iter().map(|((p, _, _), &e)| (*p, e))
    }
}

/// Key of a local algebra in a [`WildTable`].
pub fn local_label(r: &LocalRamification) -> String {
    match (&r.wild_label, &r.cycle_type) {
        (Some(label), _) => label.clone(),
        (None, Some(ct)) => format!("tame:{ct}"),
        (None, None) => format!("p{}:e{}", r.p, r.disc_exponent),
    }
}

/// Exponent of `p` in the compositum discriminant, as an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LocalExponent {
    pub p: u64,
    pub lo: u32,
    pub hi: u32,
    /// `deg L · e_K + deg K · e_L`
    pub product: u32,
    pub k_exponent: u32,
    pub l_exponent: u32,
    pub wild: bool,
}

impl LocalExponent {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

/// An integer known up to an interval; `lo == hi` when exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiscInterval {
    #[serde(serialize_with = "decimal")]
    pub lo: BigUint,
    #[serde(serialize_with = "decimal")]
    pub hi: BigUint,
}

fn decimal<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl DiscInterval {
    pub fn exact(v: BigUint) -> Self {
        Self { lo: v.clone(), hi: v }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    /// The exact value; `None` for a proper interval.
    pub fn value(&self) -> Option<&BigUint> {
        self.is_exact().then_some(&self.lo)
    }

    fn from_exponents(factors: impl Iterator<Item = (u64, u32, u32)>) -> Self {
        let (mut lo, mut hi) = (BigUint::one(), BigUint::one());
        for (p, elo, ehi) in factors {
            lo *= BigUint::from(p).pow(elo);
            hi *= BigUint::from(p).pow(ehi);
        }
        Self { lo, hi }
    }
}

impl fmt::Display for DiscInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

fn parse_symmetric(label: &str) -> Option<u32> {
    label.strip_prefix('S')?.parse().ok()
}

/// `(n, A)` for an `S_n` field `k` and an abelian field `l` satisfying the
/// coprimality hypothesis.
pub fn check_admissible(
    k: &FieldRecord,
    l: &FieldRecord,
) -> Result<(u32, AbelianGroupSpec), CountingError> {
    let inadmissible = |msg: String| CountingError::InadmissiblePair(msg);
    let n = parse_symmetric(&k.group_label)
        .filter(|&n| n == k.degree)
        .ok_or_else(|| inadmissible(format!("{} is not a symmetric group label", k.group_label)))?;
    let a: AbelianGroupSpec = l
        .group_label
        .parse()
        .map_err(|_| inadmissible(format!("{} is not an abelian group label", l.group_label)))?;
    if a.order() != l.degree as u64 {
        return Err(inadmissible(format!("{} does not have degree {}", l.group_label, l.degree)));
    }
    check_hypothesis(n, &a).map_err(|e| inadmissible(e.to_string()))?;
    Ok((n, a))
}

fn unramified(p: u64, degree: u32) -> LocalRamification {
    LocalRamification {
        p,
        kind: crate::fields::RamKind::Tame,
        cycle_type: Some(CycleType::identity(degree)),
        wild_label: None,
        ram_index: None,
        disc_exponent: 0,
    }
}

/// Compositum exponents at every prime ramified in `k` or `l`, sorted by `p`.
pub fn local_exponents(
    k: &FieldRecord,
    l: &FieldRecord,
    wild: &WildTable,
    mode: DiscMode,
) -> Result<Vec<LocalExponent>, CountingError> {
    check_admissible(k, l)?;
    let (deg_k, deg_l) = (k.degree, l.degree);
    let mut primes: Vec<u64> =
        k.ramification.iter().chain(&l.ramification).map(|r| r.p).collect();
    primes.sort_unstable();
    primes.dedup();
    primes
        .into_iter()
        .map(|p| {
            let lk = k.local(p).cloned().unwrap_or_else(|| unramified(p, deg_k));
            let ll = l.local(p).cloned().unwrap_or_else(|| unramified(p, deg_l));
            let (ek, el) = (lk.disc_exponent, ll.disc_exponent);
            let product = deg_l * ek + deg_k * el;
            let wild_here = lk.is_wild() || ll.is_wild();
            let exact = |e: u32| LocalExponent {
                p,
                lo: e,
                hi: e,
                product,
                k_exponent: ek,
                l_exponent: el,
                wild: wild_here,
            };
            if ek == 0 || el == 0 {
                return Ok(exact(product));
            }
            if !wild_here {
                let (ck, cl) = (lk.cycle_type.as_ref(), ll.cycle_type.as_ref());
                let (ck, cl) = (ck.expect("tame has cycle type"), cl.expect("tame has cycle type"));
                return Ok(exact(product_index_general(ck, cl) as u32));
            }
            match mode {
                DiscMode::Exact => {
                    let (kl, ll_label) = (local_label(&lk), local_label(&ll));
                    let e = wild.get(p, &kl, &ll_label).ok_or_else(|| {
                        CountingError::MissingWildEntry { p, k_label: kl.clone(), l_label: ll_label.clone() }
                    })?;
                    if e > product {
                        return Err(CountingError::InvalidWildTable(format!(
                            "exponent {e} at p = {p} for {kl} / {ll_label} exceeds the product bound {product}"
                        )));
                    }
                    Ok(exact(e))
                }
                DiscMode::Interval => Ok(LocalExponent {
                    lo: (deg_l * ek).max(deg_k * el),
                    ..exact(product)
                }),
            }
        })
        .collect()
}

pub fn compose_disc(
    k: &FieldRecord,
    l: &FieldRecord,
    wild: &WildTable,
    mode: DiscMode,
) -> Result<DiscInterval, CountingError> {
    let local = local_exponents(k, l, wild, mode)?;
    Ok(DiscInterval::from_exponents(local.iter().map(|e| (e.p, e.lo, e.hi))))
}

/// `|Disc(K)|^{deg L} · |Disc(L)|^{deg K}`.
pub fn disc_product_bound(k: &FieldRecord, l: &FieldRecord) -> BigUint {
    BigUint::from(k.abs_disc()).pow(l.degree) * BigUint::from(l.abs_disc()).pow(k.degree)
}

/// Compositum exponent at `p <= y`, product exponent above `y`.
fn truncate(local: &[LocalExponent], y: u64) -> DiscInterval {
    DiscInterval::from_exponents(local.iter().map(|e| {
        if e.p <= y {
            (e.p, e.lo, e.hi)
        } else {
            (e.p, e.product, e.product)
        }
    }))
}

/// `Disc_Y(KL)`: the true local factor at `p <= y`, the product factor at
/// `p > y`.
pub fn disc_truncated(
    k: &FieldRecord,
    l: &FieldRecord,
    wild: &WildTable,
    mode: DiscMode,
    y: u64,
) -> Result<DiscInterval, CountingError> {
    Ok(truncate(&local_exponents(k, l, wild, mode)?, y))
}

/// `d_Σ = disc_product_bound / Disc_Y(KL)`, always an integer `>= 1`.
pub fn dsigma(
    k: &FieldRecord,
    l: &FieldRecord,
    wild: &WildTable,
    mode: DiscMode,
    y: u64,
) -> Result<DiscInterval, CountingError> {
    let local = local_exponents(k, l, wild, mode)?;
    Ok(DiscInterval::from_exponents(local.iter().filter(|e| e.p <= y).map(|e| {
        (e.p, e.product - e.hi, e.product - e.lo)
    })))
}

/// Everything about one pair at once.
#[derive(Debug, Clone, Serialize)]
pub struct PairRecord {
    pub k_disc: i64,
    pub l_disc: i64,
    pub local: Vec<LocalExponent>,
    pub disc: DiscInterval,
    #[serde(serialize_with = "decimal")]
    pub product_bound: BigUint,
    /// `Y ↦ Disc_Y(KL)`.
    pub truncated: BTreeMap<u64, DiscInterval>,
}

pub fn pair_record(
    k: &FieldRecord,
    l: &FieldRecord,
    wild: &WildTable,
    mode: DiscMode,
    ys: &[u64],
) -> Result<PairRecord, CountingError> {
    let local = local_exponents(k, l, wild, mode)?;
    let disc = DiscInterval::from_exponents(local.iter().map(|e| (e.p, e.lo, e.hi)));
    let truncated = ys.iter().map(|&y| (y, truncate(&local, y))).collect();
    Ok(PairRecord {
        k_disc: k.disc,
        l_disc: l.disc,
        product_bound: disc_product_bound(k, l),
        local,
        disc,
        truncated,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CountOptions {
    pub mode: DiscMode,
    pub y_ladder: Vec<u64>,
    /// Extra factor on the enumeration window for both lists.
    pub extra_slack: u64,
}

impl Default for CountOptions {
    fn default() -> Self {
        Self { mode: DiscMode::Interval, y_ladder: vec![10, 100, 1000], extra_slack: 1 }
    }
}

/// Which fields must be present for the counts up to `x_max` to be complete.
#[derive(Debug, Clone, Serialize)]
pub struct Window {
    pub x_max: u64,
    pub k_slack: u64,
    pub l_slack: u64,
    pub k_needed: u64,
    pub l_needed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct YCount {
    pub y: u64,
    pub lo: u64,
    pub hi: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountRow {
    pub x: u64,
    /// Pairs certainly below `x` (upper end of the interval `<= x`).
    pub n_lo: u64,
    /// Pairs possibly below `x`.
    pub n_hi: u64,
    pub n_y: Vec<YCount>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Spread {
    pub max_ratio: f64,
    pub median_ratio: f64,
    /// `max <= 2 · median` over the top decade.
    pub bounded: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub n: u32,
    pub group: String,
    pub mode: DiscMode,
    pub window: Window,
    pub pairs_examined: u64,
    pub rows: Vec<CountRow>,
    /// `N_Y(X) <= N(X)` at every grid point and `Y`.
    pub truncation_below_full: bool,
    /// `N_Y(X)` nondecreasing in `Y` at every grid point.
    pub monotone_in_y: bool,
    pub exponent: f64,
    pub fit_lo: Option<FitReport>,
    pub fit_hi: Option<FitReport>,
    pub fit_error: Option<String>,
    pub spread_lo: Option<Spread>,
    pub spread_hi: Option<Spread>,
}

/// Largest `max(0, deg_other · E − e)` headroom a table entry can open, with
/// `E` the largest possible exponent of a degree-`deg` field at `p`.
fn table_slack(wild: &WildTable, deg: u32, deg_other: u32) -> u64 {
    let max_exponent = |p: u64| {
        let mut log = 0;
        let mut pk = p;
        while pk <= deg as u64 {
            log += 1;
            pk *= p;
        }
        deg - 1 + deg * log
    };
    wild.entries()
        .map(|(p, e)| {
            let room = (deg_other * max_exponent(p)).saturating_sub(e);
            p.checked_pow(room).unwrap_or(u64::MAX)
        })
        .max()
        .unwrap_or(1)
        .max(1)
}

/// The fields `count_pairs` needs for grid points up to `x_max`.
pub fn window(
    deg_k: u32,
    deg_l: u32,
    x_max: u64,
    wild: &WildTable,
    options: &CountOptions,
) -> Window {
    let (k_slack, l_slack) = match options.mode {
        DiscMode::Interval => (1, 1),
        DiscMode::Exact => (table_slack(wild, deg_k, deg_l), table_slack(wild, deg_l, deg_k)),
    };
    let k_slack = k_slack.saturating_mul(options.extra_slack.max(1));
    let l_slack = l_slack.saturating_mul(options.extra_slack.max(1));
    let reach = |slack: u64, deg: u32| {
        iroot((x_max as u128).saturating_mul(slack as u128), deg) as u64
    };
    Window { x_max, k_slack, l_slack, k_needed: reach(k_slack, deg_l), l_needed: reach(l_slack, deg_k) }
}

fn list_degree(list: &FieldList, what: &str) -> Result<Option<u32>, CountingError> {
    let mut degrees = list.records.iter().map(|r| r.degree);
    let Some(first) = degrees.next() else { return Ok(None) };
    if degrees.any(|d| d != first) {
        return Err(CountingError::InadmissiblePair(format!("{what} list mixes degrees")));
    }
    Ok(Some(first))
}

fn spread(rows: &[CountRow], exponent: f64, pick: impl Fn(&CountRow) -> u64) -> Option<Spread> {
    let top = rows.iter().map(|r| r.x).max()?;
    let mut ratios: Vec<f64> = rows
        .iter()
        .filter(|r| r.x as f64 >= top as f64 / 10.0 * (1.0 - 1e-12))
        .map(|r| pick(r) as f64 / (r.x as f64).powf(exponent))
        .collect();
    ratios.sort_by(f64::total_cmp);
    let max_ratio = *ratios.last()?;
    let mid = ratios.len() / 2;
    let median_ratio =
        if ratios.len() % 2 == 1 { ratios[mid] } else { (ratios[mid - 1] + ratios[mid]) / 2.0 };
    Some(Spread { max_ratio, median_ratio, bounded: max_ratio <= 2.0 * median_ratio })
}

/// Grid `top / 2^i` for `i = steps, ..., 0`.
pub fn halving_grid(top: u64, steps: u32) -> Vec<u64> {
    (0..=steps).rev().map(|i| top >> i).filter(|&x| x > 0).collect()
}

/// `N(X)` and `N_Y(X)` over `grid` for pairs from the two lists.
pub fn count_pairs(
    s_fields: &FieldList,
    a_fields: &FieldList,
    grid: &[u64],
    wild: &WildTable,
    options: &CountOptions,
) -> Result<CountReport, CountingError> {
    let mut grid = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let x_max = *grid.last().ok_or_else(|| CountingError::InadmissiblePair("empty grid".into()))?;
    let (Some(deg_k), Some(deg_l)) = (list_degree(s_fields, "S_n")?, list_degree(a_fields, "abelian")?)
    else {
        return Err(CountingError::InadmissiblePair("empty field list".into()));
    };
    let (n, group) = check_admissible(&s_fields.records[0], &a_fields.records[0])?;
    let win = window(deg_k, deg_l, x_max, wild, options);
    for (which, list, needed) in
        [("S_n", s_fields, win.k_needed), ("abelian", a_fields, win.l_needed)]
    {
        if list.complete_to < needed {
            return Err(CountingError::IncompleteList { which, complete_to: list.complete_to, needed });
        }
    }
    let ks = s_fields.up_to(win.k_needed);
    let ls = a_fields.up_to(win.l_needed);
    let xs: Vec<BigUint> = grid.iter().map(|&x| BigUint::from(x)).collect();
    let ys = &options.y_ladder;
    let cells = grid.len() * (2 + 2 * ys.len());
    // per grid point: n_lo, n_hi, then (lo, hi) per Y
    let tally = ks
        .par_iter()
        .map(|k| -> Result<Vec<u64>, CountingError> {
            let mut acc = vec![0u64; cells];
            for l in ls {
                let local = local_exponents(k, l, wild, options.mode)?;
                let full = DiscInterval::from_exponents(local.iter().map(|e| (e.p, e.lo, e.hi)));
                let truncated: Vec<DiscInterval> = ys.iter().map(|&y| truncate(&local, y)).collect();
                for (i, x) in xs.iter().enumerate() {
                    let base = i * (2 + 2 * ys.len());
                    acc[base] += u64::from(&full.hi <= x);
                    acc[base + 1] += u64::from(&full.lo <= x);
                    for (j, t) in truncated.iter().enumerate() {
                        acc[base + 2 + 2 * j] += u64::from(&t.hi <= x);
                        acc[base + 3 + 2 * j] += u64::from(&t.lo <= x);
                    }
                }
            }
            Ok(acc)
        })
        .try_reduce(
            || vec![0u64; cells],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    let rows: Vec<CountRow> = grid
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let base = i * (2 + 2 * ys.len());
            CountRow {
                x,
                n_lo: tally[base],
                n_hi: tally[base + 1],
                n_y: ys
                    .iter()
                    .enumerate()
                    .map(|(j, &y)| YCount {
                        y,
                        lo: tally[base + 2 + 2 * j],
                        hi: tally[base + 3 + 2 * j],
                    })
                    .collect(),
            }
        })
        .collect();
    let truncation_below_full =
        rows.iter().all(|r| r.n_y.iter().all(|c| c.lo <= r.n_lo && c.hi <= r.n_hi));
    let monotone_in_y = rows.iter().all(|r| {
        let mut by_y: Vec<&YCount> = r.n_y.iter().collect();
        by_y.sort_by_key(|c| c.y);
        by_y.windows(2).all(|w| w[0].lo <= w[1].lo && w[0].hi <= w[1].hi)
    });
    let exponent = 1.0 / group.order() as f64;
    let fit = |pick: fn(&CountRow) -> u64| {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.x as f64, pick(r) as f64)).collect();
        empirical_fit(&pts, exponent, 0)
    };
    let (fit_lo, fit_hi, fit_error) = match (fit(|r| r.n_lo), fit(|r| r.n_hi)) {
        (Ok(lo), Ok(hi)) => (Some(lo), Some(hi), None),
        (Err(e), _) | (_, Err(e)) => (None, None, Some(e.to_string())),
    };
    Ok(CountReport {
        n,
        group: group.to_string(),
        mode: options.mode,
        window: win,
        pairs_examined: (ks.len() * ls.len()) as u64,
        spread_lo: spread(&rows, exponent, |r| r.n_lo),
        spread_hi: spread(&rows, exponent, |r| r.n_hi),
        rows,
        truncation_below_full,
        monotone_in_y,
        exponent,
        fit_lo,
        fit_hi,
        fit_error,
    })
}

/// `3058·3^{−5} + 4·3^{4/3}`, the local factor at 3 for `S_3 × C_3`.
pub fn c3_default() -> f64 {
    3058.0 / 243.0 + 4.0 * 3f64.powf(4.0 / 3.0)
}

/// `c_p − 1` for `p ≠ 3`, expanded so small values keep full precision.
fn local_factor_minus_one(p: u64) -> f64 {
    let p = p as f64;
    if p as u64 % 3 == 1 {
        // (1 + 1/p + 5/p² + 2p^{−7/3})(1 − 1/p) − 1
        4.0 / (p * p) + 2.0 * p.powf(-7.0 / 3.0) - 5.0 / (p * p * p) - 2.0 * p.powf(-10.0 / 3.0)
    } else {
        // (1 + 1/p + 1/p²)(1 − 1/p) − 1
        -1.0 / (p * p * p)
    }
}

/// `c_p` for `p ≠ 3`.
pub fn local_factor(p: u64) -> f64 {
    1.0 + local_factor_minus_one(p)
}

#[derive(Debug, Clone, Serialize)]
pub struct EulerReport {
    pub p_max: u64,
    pub c3: f64,
    /// `2 · c_3 · Π_{p <= P, p ≠ 3} c_p`
    pub value: f64,
    pub primes_used: usize,
    /// `ln c_p` at the largest prime used.
    pub last_log_factor: f64,
    /// `Σ_{p > P} ln c_p ≈ 2 / (P ln P)` from the `4/p²` terms at
    /// `p ≡ 1 (mod 3)`.
    pub tail_estimate: f64,
    pub value_at_double: f64,
    /// `|value(2P) − value(P)|`
    pub doubling_change: f64,
}

fn euler_log_sum(primes: &[u64]) -> f64 {
    primes.iter().filter(|&&p| p != 3).map(|&p| local_factor_minus_one(p).ln_1p()).sum()
}

/// Partial Euler product for the count of homomorphisms `G_Q → S_3 × C_3`
/// onto the `S_3` factor, over all primes up to `p_max` (including 2).
pub fn euler_constant(p_max: u64, c3: Option<f64>) -> EulerReport {
    let c3 = c3.unwrap_or_else(c3_default);
    let all = primes_up_to(p_max.saturating_mul(2));
    let split = all.partition_point(|&p| p <= p_max);
    let head = euler_log_sum(&all[..split]);
    let tail = euler_log_sum(&all[split..]);
    let value = 2.0 * c3 * head.exp();
    let value_at_double = 2.0 * c3 * (head + tail).exp();
    let last = all[..split].iter().rev().find(|&&p| p != 3).copied();
    let pf = p_max as f64;
    EulerReport {
        p_max,
        c3,
        value,
        primes_used: split,
        last_log_factor: last.map_or(0.0, |p| local_factor_minus_one(p).ln_1p()),
        tail_estimate: if p_max > 2 { 2.0 / (pf * pf.ln()) } else { f64::NAN },
        value_at_double,
        doubling_change: (value_at_double - value).abs(),
    }
}

/// Constant `c` in `#{S_3 cubic fields, |D| <= Y} ~ c Y`: `1/(3 ζ(3))`.
pub fn s3_field_constant() -> f64 {
    const ZETA3: f64 = 1.202_056_903_159_594_2;
    1.0 / (3.0 * ZETA3)
}

/// Converts the homomorphism-count constant into the constant for
/// isomorphism classes of `S_3 × C_3` fields: homomorphisms with trivial
/// `C_3` part (`6` per cubic field `K`, counted at `|D_K|^3 <= X`) are
/// removed and the rest divided by `|Aut(S_3 × C_3)| = 12`. Reports never
/// apply this silently.
pub fn hom_to_iso_constant(hom_constant: f64, s3_constant: f64) -> f64 {
    (hom_constant - 6.0 * s3_constant) / 12.0
}

#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub n: u32,
    pub group: String,
    /// `max over k, c ≠ e of (−r_k + ind(k) − ind(k, c)/m)`
    pub delta: String,
    pub delta_value: f64,
    pub y: u64,
    /// `Σ_{Y < q <= M} q^δ` summed directly.
    pub direct_sum: f64,
    pub cutoff: u64,
    /// Euler–Maclaurin estimate of `Σ_{q > M} q^δ`.
    pub remainder: f64,
    pub tail: f64,
}

/// `Σ_{q > Y} q^δ` with `δ` the tail exponent of the uniformity lemma.
pub fn tail_bound_report(
    rk: &RkTable,
    n: u32,
    a: &AbelianGroupSpec,
    y: u64,
) -> Result<TailReport, CountingError> {
    let unin = verify_unin(n, a, rk)?;
    let delta = tail_exponent(n, a, rk)?;
    let d = *delta.numer() as f64 / *delta.denom() as f64;
    if !unin.holds || d >= -1.0 {
        return Err(CountingError::LemmaFails { n, group: a.to_string() });
    }
    let cutoff = y.max(1).saturating_mul(64).max(y + 100_000).min(y + 10_000_000);
    let direct_sum: f64 = (y + 1..=cutoff).map(|q| (q as f64).powf(d)).sum();
    let m = cutoff as f64;
    // ∫_M^∞ x^δ dx − M^δ/2 − (δ/12) M^{δ−1}
    let remainder = m.powf(d + 1.0) / (-d - 1.0) - m.powf(d) / 2.0 - d / 12.0 * m.powf(d - 1.0);
    Ok(TailReport {
        n,
        group: a.to_string(),
        delta: delta.to_string(),
        delta_value: d,
        y,
        direct_sum,
        cutoff,
        remainder,
        tail: direct_sum + remainder,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::io::record_from_json;

    fn rec(json: &str) -> FieldRecord {
        record_from_json(json).unwrap()
    }

    fn k23() -> FieldRecord {
        rec(r#"{"degree":3,"group":"S3","disc":-23,"ram":[{"p":23,"kind":"tame","cycle_type":[2,1]}]}"#)
    }

    fn l7() -> FieldRecord {
        rec(r#"{"degree":3,"group":"C3","disc":49,"ram":[{"p":7,"kind":"tame","cycle_type":[3]}]}"#)
    }

    fn k7() -> FieldRecord {
        // hypothetical cubic tamely ramified at 7 with a transposition
        rec(r#"{"degree":3,"group":"S3","disc":-7,"ram":[{"p":7,"kind":"tame","cycle_type":[2,1]}]}"#)
    }

    #[test]
    fn disjoint_ramification_is_the_product() {
        let wild = WildTable::new();
        let d = compose_disc(&k23(), &l7(), &wild, DiscMode::Exact).unwrap();
        let expected = BigUint::from(23u64).pow(3) * BigUint::from(7u64).pow(6);
        assert_eq!(d.value(), Some(&expected));
        assert_eq!(disc_product_bound(&k23(), &l7()), expected);
        let ds = dsigma(&k23(), &l7(), &wild, DiscMode::Exact, 1000).unwrap();
        assert_eq!(ds.value(), Some(&BigUint::one()));
    }

    #[test]
    fn shared_tame_prime() {
        let wild = WildTable::new();
        let local = local_exponents(&k7(), &l7(), &wild, DiscMode::Exact).unwrap();
        assert_eq!(local.len(), 1);
        assert_eq!((local[0].lo, local[0].product), (7, 9));
        let t = disc_truncated(&k7(), &l7(), &wild, DiscMode::Exact, 7).unwrap();
        assert_eq!(t.value(), Some(&BigUint::from(7u64).pow(7)));
        let t1 = disc_truncated(&k7(), &l7(), &wild, DiscMode::Exact, 1).unwrap();
        assert_eq!(t1.value(), Some(&disc_product_bound(&k7(), &l7())));
        let ds = dsigma(&k7(), &l7(), &wild, DiscMode::Exact, 7).unwrap();
        assert_eq!(ds.value(), Some(&BigUint::from(49u64)));
        let ds = dsigma(&k7(), &l7(), &wild, DiscMode::Exact, 5).unwrap();
        assert_eq!(ds.value(), Some(&BigUint::one()));
    }

    #[test]
    fn wild_modes() {
        let k = rec(r#"{"degree":3,"group":"S3","disc":-243,"ram":[{"p":3,"kind":"wild","label":"3:1^3:v5","exponent":5,"e":3}]}"#);
        let l = rec(r#"{"degree":3,"group":"C3","disc":81,"ram":[{"p":3,"kind":"wild","label":"3:C3:t0","exponent":4,"e":3}]}"#);
        let mut wild = WildTable::new();
        assert_eq!(
            compose_disc(&k, &l, &wild, DiscMode::Exact).unwrap_err(),
            CountingError::MissingWildEntry { p: 3, k_label: "3:1^3:v5".into(), l_label: "3:C3:t0".into() }
        );
        let iv = compose_disc(&k, &l, &wild, DiscMode::Interval).unwrap();
        assert_eq!(iv.lo, BigUint::from(3u64).pow(15));
        assert_eq!(iv.hi, BigUint::from(3u64).pow(27));
        wild.insert(3, "3:1^3:v5", "3:C3:t0", 20);
        let ex = compose_disc(&k, &l, &wild, DiscMode::Exact).unwrap();
        assert_eq!(ex.value(), Some(&BigUint::from(3u64).pow(20)));
        wild.insert(3, "3:1^3:v5", "3:C3:t0", 28);
        assert!(matches!(
            compose_disc(&k, &l, &wild, DiscMode::Exact),
            Err(CountingError::InvalidWildTable(_))
        ));
    }

    #[test]
    fn wild_table_json() {
        let text = r#"{"entries":[{"p":3,"k":"a","l":"b","exponent":12}]}"#;
        let t = WildTable::from_json(text).unwrap();
        assert_eq!(t.get(3, "a", "b"), Some(12));
        assert_eq!(WildTable::from_json(&t.to_json()).unwrap(), t);
        let dup = r#"{"entries":[{"p":3,"k":"a","l":"b","exponent":12},{"p":3,"k":"a","l":"b","exponent":11}]}"#;
        assert!(WildTable::from_json(dup).is_err());
    }

    #[test]
    fn admissibility() {
        let l5 = rec(r#"{"degree":5,"group":"C5","disc":14641,"ram":[{"p":11,"kind":"tame","cycle_type":[5]}]}"#);
        assert!(check_admissible(&k23(), &l5).is_ok());
        let c2 = rec(r#"{"degree":2,"group":"C2","disc":5,"ram":[{"p":5,"kind":"tame","cycle_type":[2]}]}"#);
        assert!(matches!(check_admissible(&k23(), &c2), Err(CountingError::InadmissiblePair(_))));
        assert!(check_admissible(&l7(), &k23()).is_err());
    }

    #[test]
    fn euler_product() {
        assert!((c3_default() - 29.8914).abs() < 1e-4);
        let r = euler_constant(5, None);
        let c2 = (1.0 + 0.5 + 0.25) * 0.5;
        let c5 = (1.0 + 0.2 + 0.04) * 0.8;
        assert!((r.value - 2.0 * c3_default() * c2 * c5).abs() < 1e-12);
        assert!((local_factor(7) - (1.0 + 1.0 / 7.0 + 5.0 / 49.0 + 2.0 * 7f64.powf(-7.0 / 3.0)) * (6.0 / 7.0)).abs() < 1e-15);
        let a = euler_constant(1000, None).doubling_change;
        let b = euler_constant(100_000, None).doubling_change;
        assert!(b < a);
    }

    #[test]
    fn tail_report() {
        let a = AbelianGroupSpec::cyclic(5).unwrap();
        let r = tail_bound_report(&RkTable::default_for(3).unwrap(), 3, &a, 100).unwrap();
        assert!(r.delta_value < -1.0);
        let r2 = tail_bound_report(&RkTable::default_for(3).unwrap(), 3, &a, 200).unwrap();
        assert!(r2.tail <= r.tail / 2.0);
        assert_eq!(
            tail_bound_report(&RkTable::zeroed(3), 3, &a, 100).unwrap_err(),
            CountingError::LemmaFails { n: 3, group: a.to_string() }
        );
    }

    #[test]
    fn grid_helper() {
        assert_eq!(halving_grid(1024, 3), vec![128, 256, 512, 1024]);
    }
}
