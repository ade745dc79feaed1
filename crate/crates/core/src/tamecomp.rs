//! Tame local discriminant exponents for `S_n × A`, with `A` abelian acting
//! regularly on itself.
//!
//! An element `c` of order `d` in the regular representation of `A` has cycle
//! type `[d; m/d]`, so nothing here ever builds a permutation of degree `m`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::factorize;
use crate::permgroup::{index_of, product_index_general, CycleType, PermError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TameError {
    #[error("cyclic factor orders must be at least 2, got {0}")]
    InvalidFactor(u64),
    #[error("cannot parse abelian group `{0}`")]
    Parse(String),
    #[error("the group is trivial")]
    TrivialGroup,
    #[error("degree {0} is not supported (expected 3, 4 or 5)")]
    UnsupportedDegree(u32),
    #[error("|A| = {1} violates the coprimality hypothesis for n = {0}")]
    HypothesisViolated(u32, u64),
    #[error("r_k table has no entry for class {0}")]
    IncompleteRkTable(String),
    #[error("invalid r_k table: {0}")]
    InvalidRkTable(String),
    #[error(transparent)]
    Perm(#[from] PermError),
}

/// `C_{n_1} × ... × C_{n_t}`; elements are residue tuples.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AbelianGroupSpec {
    factors: Vec<u64>,
}

impl AbelianGroupSpec {
    pub fn new(factors: Vec<u64>) -> Result<Self, TameError> {
        if let Some(&bad) = factors.iter().find(|&&f| f < 2) {
            return Err(TameError::InvalidFactor(bad));
        }
        if factors.is_empty() {
            return Err(TameError::TrivialGroup);
        }
        Ok(Self { factors })
    }

    pub fn cyclic(n: u64) -> Result<Self, TameError> {
        Self::new(vec![n])
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    pub fn identity(&self) -> Vec<u64> {
        vec![0; self.factors.len()]
    }

    pub fn element_order(&self, c: &[u64]) -> u64 {
        self.factors
            .iter()
            .zip(c)
            .fold(1u64, |acc, (&n, &x)| acc.lcm(&(n / x.gcd(&n))))
    }

    /// All elements in mixed-radix order, identity first.
    pub fn elements(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        let total = self.order();
        (0..total).map(move |mut k| {
            let mut out = vec![0; self.factors.len()];
            for (slot, &n) in out.iter_mut().zip(&self.factors).rev() {
                *slot = k % n;
                k /= n;
            }
            out
        })
    }

    /// Cycle type of `c` acting on `A` by translation.
    pub fn regular_cycle_type(&self, c: &[u64]) -> CycleType {
        let d = self.element_order(c);
        CycleType::uniform(d as u32, (self.order() / d) as u32)
    }
}

impl fmt::Display for AbelianGroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.factors.iter().map(|n| format!("C{n}")).collect();
        write!(f, "{}", body.join("x"))
    }
}

impl FromStr for AbelianGroupSpec {
    type Err = TameError;

    /// Accepts `7`, `7x7`, `C7xC7`, `7,7`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let factors = s
            .split(['x', 'X', ',', '*'])
            .map(|t| t.trim().trim_start_matches(['C', 'c']))
            .map(|t| t.parse::<u64>().map_err(|_| TameError::Parse(s.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(factors)
    }
}

/// `m − m/ord(c)`.
pub fn ind_abelian(a: &AbelianGroupSpec, c: &[u64]) -> u64 {
    let m = a.order();
    m - m / a.element_order(c)
}

/// `m(p−1)/p` with `p` the least prime dividing `m`.
pub fn min_index_abelian(a: &AbelianGroupSpec) -> Result<u64, TameError> {
    let m = a.order();
    let (p, _) = *factorize(m).first().ok_or(TameError::TrivialGroup)?;
    Ok(m / p * (p - 1))
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentTableRow {
    pub sn_class: CycleType,
    /// The `A` element has order `l^{k−r}`.
    pub r: u32,
    pub a_cycle_type: CycleType,
    pub a_element_index: u64,
    pub compositum_exponent: u64,
}

/// Exponents of `p` in `Disc(KL)` for `S_3 × C_{l^k}`, both sides ramified:
/// one row per class in `{(12), (123)}` and `r` in `0..k`.
pub fn disc_table(l: u64, k: u32) -> Vec<ExponentTableRow> {
    let lk = l.pow(k);
    let mut rows = Vec::new();
    for class in [CycleType::new(vec![2, 1]), CycleType::new(vec![3])] {
        let class = class.expect("valid S_3 class");
        for r in 0..k {
            let lr = l.pow(r);
            let a_ct = CycleType::uniform((lk / lr) as u32, lr as u32);
            rows.push(ExponentTableRow {
                compositum_exponent: product_index_general(&class, &a_ct),
                a_element_index: index_of(&a_ct),
                a_cycle_type: a_ct,
                sn_class: class.clone(),
                r,
            });
        }
    }
    rows
}

/// The closed forms printed in the reference tables: `3l^k − 2l^r` for a
/// transposition, `3l^k − l^r` for a 3-cycle (`3l^k − 3l^r` when `l = 3`).
pub fn table_formula(l: u64, k: u32, r: u32, three_cycle: bool) -> u64 {
    let (lk, lr) = (l.pow(k), l.pow(r));
    match (three_cycle, l == 3) {
        (false, _) => 3 * lk - 2 * lr,
        (true, false) => 3 * lk - lr,
        (true, true) => 3 * lk - 3 * lr,
    }
}

pub(crate) fn check_hypothesis(n: u32, a: &AbelianGroupSpec) -> Result<(), TameError> {
    let m = a.order();
    let forbidden: &[u64] = match n {
        3 => &[2],
        4 => &[2, 3],
        5 => &[2, 3, 5],
        _ => return Err(TameError::UnsupportedDegree(n)),
    };
    if forbidden.iter().any(|p| m % p == 0) {
        return Err(TameError::HypothesisViolated(n, m));
    }
    Ok(())
}

fn ratio(num: u64, den: u64) -> Rational64 {
    Rational64::new(num as i64, den as i64)
}

/// Exhaustive min of `ind(k, c)/m` over non-identity `c`, with a witness.
fn min_ratio_nontrivial(k: &CycleType, a: &AbelianGroupSpec) -> (Rational64, Vec<u64>) {
    let m = a.order();
    a.elements()
        .skip(1)
        .map(|c| (ratio(product_index_general(k, &a.regular_cycle_type(&c)), m), c))
        .min_by(|x, y| x.0.cmp(&y.0))
        .expect("A is nontrivial")
}

fn nonidentity_classes(n: u32) -> Vec<CycleType> {
    CycleType::all_of_degree(n).into_iter().filter(|c| !c.is_identity()).collect()
}

mod rational_string {
    use num_rational::Rational64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(Rational64::from_integer(n)),
            Raw::Text(t) => t.trim().parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaRow {
    pub class: CycleType,
    pub label: String,
    pub index: u64,
    #[serde(with = "rational_string")]
    pub min_ratio: Rational64,
    pub witness: Vec<u64>,
    #[serde(with = "rational_string")]
    pub margin: Rational64,
    #[serde(with = "rational_string")]
    pub identity_ratio: Rational64,
    #[serde(with = "rational_string")]
    pub threshold: Rational64,
    pub strict: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaReport {
    pub n: u32,
    pub group: String,
    pub order: u64,
    pub rows: Vec<DeltaRow>,
    pub passed: bool,
}

/// Lower bounds on `ind(k, c)/m` for non-identity `c`: strict for `n = 3, 4`,
/// `≥ ind(k) + 6/7` for `n = 5`.
fn delta_threshold(n: u32, k: &CycleType) -> (Rational64, bool) {
    let one = Rational64::one();
    match (n, k.parts()) {
        (3, [2, 1]) | (4, [2, 1, 1]) => (Rational64::from_integer(2), true),
        (3, [3]) | (4, [2, 2]) => (one, true),
        (4, [3, 1]) => (Rational64::from_integer(3), true),
        (4, [4]) => (Rational64::from_integer(2), true),
        _ => (Rational64::from_integer(index_of(k) as i64) + Rational64::new(6, 7), false),
    }
}

pub fn verify_delta(n: u32, a: &AbelianGroupSpec) -> Result<DeltaReport, TameError> {
    check_hypothesis(n, a)?;
    let rows: Vec<DeltaRow> = nonidentity_classes(n)
        .into_iter()
        .map(|k| {
            let (min_ratio, witness) = min_ratio_nontrivial(&k, a);
            let (threshold, strict) = delta_threshold(n, &k);
            let ind = Rational64::from_integer(index_of(&k) as i64);
            let pass = if strict { min_ratio > threshold } else { min_ratio >= threshold };
            DeltaRow {
                label: k.label(),
                index: index_of(&k),
                margin: min_ratio - ind,
                identity_ratio: ind,
                class: k,
                min_ratio,
                witness,
                threshold,
                strict,
                pass,
            }
        })
        .collect();
    let passed = rows.iter().all(|r| r.pass);
    Ok(DeltaReport { n, group: a.to_string(), order: a.order(), rows, passed })
}

/// Uniformity exponents `r_k` per non-identity class of `S_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RkTable {
    pub n: u32,
    pub entries: BTreeMap<CycleType, Rational64>,
}

#[derive(Serialize, Deserialize)]
struct RkEntryJson {
    class: CycleType,
    #[serde(with = "rational_string")]
    r: Rational64,
}

#[derive(Serialize, Deserialize)]
struct RkTableJson {
    n: u32,
    entries: Vec<RkEntryJson>,
}

impl RkTable {
    /// Shipped defaults. `S_3`: (12)→1, (123)→2. `S_4`: (12)→1, (123)→1,
    /// (12)(34)→2, (1234)→2. `S_5`: 5-cycles→4/15, everything else→1.
    /// The values for non-totally-ramified `S_5` classes are a configuration
    /// choice.
    pub fn default_for(n: u32) -> Result<Self, TameError> {
        let one = Rational64::one();
        let entries = nonidentity_classes(n)
            .into_iter()
            .map(|k| {
                let r = match (n, k.parts()) {
                    (3, [2, 1]) => Ok(one),
                    (3, [3]) => Ok(Rational64::from_integer(2)),
                    (4, [2, 1, 1]) | (4, [3, 1]) => Ok(one),
                    (4, [2, 2]) | (4, [4]) => Ok(Rational64::from_integer(2)),
                    (5, [5]) => Ok(Rational64::new(4, 15)),
                    (5, _) => Ok(one),
                    _ => Err(TameError::UnsupportedDegree(n)),
                }?;
                Ok((k, r))
            })
            .collect::<Result<_, TameError>>()?;
        Ok(Self { n, entries })
    }

    pub fn zeroed(n: u32) -> Self {
        let entries = nonidentity_classes(n).into_iter().map(|k| (k, Rational64::zero())).collect();
        Self { n, entries }
    }

    pub fn from_json(text: &str) -> Result<Self, TameError> {
        let raw: RkTableJson =
            serde_json::from_str(text).map_err(|e| TameError::InvalidRkTable(e.to_string()))?;
        let mut entries = BTreeMap::new();
        for e in raw.entries {
            if e.class.degree() != raw.n || e.class.is_identity() {
                return Err(TameError::InvalidRkTable(format!(
                    "class {} is not a non-identity class of S_{}",
                    e.class, raw.n
                )));
            }
            if e.r < Rational64::zero() {
                return Err(TameError::InvalidRkTable(format!("negative r for {}", e.class)));
            }
            entries.insert(e.class, e.r);
        }
        Ok(Self { n: raw.n, entries })
    }

    pub fn to_json(&self) -> String {
        let raw = RkTableJson {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|(k, r)| RkEntryJson { class: k.clone(), r: *r })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("serializable")
    }

    pub fn get(&self, k: &CycleType) -> Result<Rational64, TameError> {
        self.entries.get(k).copied().ok_or_else(|| TameError::IncompleteRkTable(k.label()))
    }

    fn check_complete(&self, n: u32) -> Result<(), TameError> {
        for k in nonidentity_classes(n) {
            self.get(&k)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UninCase {
    pub class: CycleType,
    pub label: String,
    pub element: Vec<u64>,
    /// `ind(k, c)/m − ind(k) + r_k`
    #[serde(with = "rational_string")]
    pub value: Rational64,
}

#[derive(Debug, Clone, Serialize)]
pub struct UninReport {
    pub n: u32,
    pub group: String,
    /// Verdict over non-identity `c`.
    pub holds: bool,
    pub violations: Vec<UninCase>,
    /// The tightest non-identity case per class.
    pub tightest: Vec<UninCase>,
    /// `c = e`: the pair is ramified only in `K`; reported, not judged.
    pub identity_cases: Vec<UninCase>,
    pub identity_holds: bool,
}

pub fn verify_unin(n: u32, a: &AbelianGroupSpec, rk: &RkTable) -> Result<UninReport, TameError> {
    check_hypothesis(n, a)?;
    rk.check_complete(n)?;
    let m = a.order();
    let one = Rational64::one();
    let mut violations = Vec::new();
    let mut tightest = Vec::new();
    let mut identity_cases = Vec::new();
    for k in nonidentity_classes(n) {
        let r_k = rk.get(&k)?;
        let ind_k = Rational64::from_integer(index_of(&k) as i64);
        let value_of = |c: &[u64]| {
            ratio(product_index_general(&k, &a.regular_cycle_type(c)), m) - ind_k + r_k
        };
        let mut best: Option<UninCase> = None;
        for c in a.elements() {
            let value = value_of(&c);
            let case = UninCase { class: k.clone(), label: k.label(), element: c, value };
            if case.element.iter().all(|&x| x == 0) {
                identity_cases.push(case);
                continue;
            }
            if value < one {
                violations.push(case.clone());
            }
            if best.as_ref().map_or(true, |b| value < b.value) {
                best = Some(case);
            }
        }
        tightest.extend(best);
    }
    let identity_holds = identity_cases.iter().all(|c| c.value >= one);
    Ok(UninReport {
        n,
        group: a.to_string(),
        holds: violations.is_empty(),
        violations,
        tightest,
        identity_cases,
        identity_holds,
    })
}

/// `max over k, c ≠ e of (−r_k + ind(k) − ind(k, c)/m)`; below `−1` exactly
/// when [`verify_unin`] holds strictly.
pub fn tail_exponent(n: u32, a: &AbelianGroupSpec, rk: &RkTable) -> Result<Rational64, TameError> {
    let report = verify_unin(n, a, rk)?;
    Ok(report
        .tightest
        .iter()
        .map(|c| -c.value)
        .max()
        .expect("S_n has non-identity classes"))
}
