//! Non-Galois cubic fields from integral binary cubic forms.
//!
//! `GL_2(Z)` classes of irreducible forms `F = (a, b, c, d)` correspond to
//! orders in cubic fields with `disc(F)` equal to the order's discriminant;
//! maximal orders are the forms that are maximal at every `p` with
//! `p² | disc(F)`. Candidates are generated inside boxes known to contain a
//! reduced representative of every class, brought to a canonical
//! representative, and deduplicated.
//!
//! Reduction: for `D > 0` the Hessian `(P, Q, R)` is positive definite and is
//! Gauss-reduced; for `D < 0` the non-real root is moved into the standard
//! fundamental domain of the upper half plane, where an irreducible form can
//! never sit on the boundary.

use std::collections::HashSet;

use num_integer::Integer;
use rayon::prelude::*;

use crate::arith::{factorize, iroot, is_perfect_square};
use crate::permgroup::CycleType;

use super::record::{FieldRecord, LocalRamification};
use super::{FieldList, Provenance};

/// `a x³ + b x² y + c x y² + d y³`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryCubicForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

/// `[[α, β], [γ, δ]]` acting by `(x, y) ↦ (αx + βy, γx + δy)`.
pub type Matrix = [[i64; 2]; 2];

fn poly_mul(p: &[i128], q: &[i128]) -> Vec<i128> {
    let mut out = vec![0i128; p.len() + q.len() - 1];
    for (i, &u) in p.iter().enumerate() {
        for (j, &v) in q.iter().enumerate() {
            out[i + j] += u * v;
        }
    }
    out
}

impl BinaryCubicForm {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self { a, b, c, d }
    }

    pub fn coefficients(&self) -> [i64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn disc(&self) -> i128 {
        let (a, b, c, d) = (self.a as i128, self.b as i128, self.c as i128, self.d as i128);
        b * b * c * c - 4 * a * c * c * c - 4 * b * b * b * d - 27 * a * a * d * d
            + 18 * a * b * c * d
    }

    pub fn eval(&self, x: i128, y: i128) -> i128 {
        let (a, b, c, d) = (self.a as i128, self.b as i128, self.c as i128, self.d as i128);
        ((a * x + b * y) * x + c * y * y) * x + d * y * y * y
    }

    /// Hessian `(P, Q, R) = (b² − 3ac, bc − 9ad, c² − 3bd)`.
    pub fn hessian(&self) -> (i128, i128, i128) {
        let (a, b, c, d) = (self.a as i128, self.b as i128, self.c as i128, self.d as i128);
        (b * b - 3 * a * c, b * c - 9 * a * d, c * c - 3 * b * d)
    }

    /// `det(m)^{-1} · F((x, y) m)`; `det(m)` must be `±1`.
    pub fn transform(&self, m: Matrix) -> Self {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        debug_assert!(det == 1 || det == -1);
        let l1 = [m[0][0] as i128, m[0][1] as i128];
        let l2 = [m[1][0] as i128, m[1][1] as i128];
        let l1sq = poly_mul(&l1, &l1);
        let l2sq = poly_mul(&l2, &l2);
        let terms = [
            (self.a, poly_mul(&l1sq, &l1)),
            (self.b, poly_mul(&l1sq, &l2)),
            (self.c, poly_mul(&l1, &l2sq)),
            (self.d, poly_mul(&l2sq, &l2)),
        ];
        let mut out = [0i128; 4];
        for (coef, poly) in terms {
            for (slot, v) in out.iter_mut().zip(poly) {
                *slot += coef as i128 * v;
            }
        }
        let conv = |v: i128| i64::try_from(v * det as i128).expect("form coefficients fit in i64");
        Self::new(conv(out[0]), conv(out[1]), conv(out[2]), conv(out[3]))
    }

    pub fn negate(&self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }

    /// No linear factor over Q.
    pub fn is_irreducible(&self) -> bool {
        if self.a == 0 || self.d == 0 {
            return false;
        }
        let divisors = |n: i64| -> Vec<i128> {
            let mut out = vec![1i128];
            for (p, e) in factorize(n.unsigned_abs()) {
                let prev = out.clone();
                let mut pk = 1i128;
                for _ in 0..e {
                    pk *= p as i128;
                    out.extend(prev.iter().map(|&x| x * pk));
                }
            }
            out
        };
        let (dd, da) = (divisors(self.d), divisors(self.a));
        for &u in &dd {
            for &v in &da {
                if u.gcd(&v) == 1 && (self.eval(u, v) == 0 || self.eval(-u, v) == 0) {
                    return false;
                }
            }
        }
        true
    }

    /// Canonical representative of the `GL_2(Z)` class of an irreducible form.
    pub fn canonical(&self) -> Self {
        if self.disc() > 0 {
            self.canonical_positive()
        } else {
            self.canonical_negative()
        }
    }

    fn hessian_reduced(&self) -> bool {
        let (p, q, r) = self.hessian();
        q.abs() <= p && p <= r
    }

    fn canonical_positive(&self) -> Self {
        let mut f = *self;
        loop {
            let (p, q, r) = f.hessian();
            if q.abs() > p {
                let k = -Integer::div_floor(&(q + p), &(2 * p));
                f = f.transform([[1, k as i64], [0, 1]]);
            } else if p > r {
                f = f.transform([[0, -1], [1, 0]]);
            } else {
                break;
            }
        }
        // Every matrix between two Gauss-reduced positive definite forms has
        // entries in {-1, 0, 1}.
        let mut best: Option<Self> = None;
        for m in small_unimodular() {
            let g = f.transform(m);
            if g.hessian_reduced() && best.map_or(true, |b| g < b) {
                best = Some(g);
            }
        }
        best.expect("identity keeps the form reduced")
    }

    fn canonical_negative(&self) -> Self {
        let mut f = *self;
        for _ in 0..10_000 {
            let (re, abs2) = f.complex_root();
            let k = re.round();
            if k != 0.0 {
                f = f.transform([[1, k as i64], [0, 1]]);
            } else if abs2 < 1.0 {
                f = f.transform([[0, -1], [1, 0]]);
            } else {
                if re < 0.0 {
                    f = f.transform([[-1, 0], [0, 1]]);
                }
                return if f.a < 0 { f.negate() } else { f };
            }
        }
        panic!("reduction of {self:?} did not terminate");
    }

    /// `(Re ρ, |ρ|²)` for the root `ρ` of `F(x, 1)` in the upper half plane.
    /// Requires `D < 0` and `a ≠ 0`.
    fn complex_root(&self) -> (f64, f64) {
        let (a, b, c, d) = (self.a as f64, self.b as f64, self.c as f64, self.d as f64);
        let f = |x: f64| ((a * x + b) * x + c) * x + d;
        let df = |x: f64| (3.0 * a * x + 2.0 * b) * x + c;
        // Cardano for the single real root, then Newton polishing
        let p = (3.0 * a * c - b * b) / (3.0 * a * a);
        let q = (2.0 * b * b * b - 9.0 * a * b * c + 27.0 * a * a * d) / (27.0 * a * a * a);
        let s = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
        let mut theta = (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() - b / (3.0 * a);
        for _ in 0..4 {
            let step = f(theta) / df(theta);
            if !step.is_finite() {
                break;
            }
            theta -= step;
        }
        // F(x, 1) = (x − θ)(a x² + B x + C)
        let qb = b + a * theta;
        let qc = c + qb * theta;
        (-qb / (2.0 * a), qc / a)
    }

    /// Whether the complex root lies in (a slight enlargement of) the
    /// standard fundamental domain.
    fn nearly_reduced_negative(&self) -> bool {
        let (re, abs2) = self.complex_root();
        re.abs() <= 0.5 + 1e-6 && abs2 >= 1.0 - 1e-6
    }

    /// Whether the cubic ring of `F` is maximal at `p`.
    pub fn is_maximal_at(&self, p: u64) -> bool {
        let p = p as i128;
        if self.coefficients().iter().all(|&x| x as i128 % p == 0) {
            return false;
        }
        let p2 = p * p;
        for (col, other) in projective_line(p as i64) {
            let g = self.transform([[col.0, other.0], [col.1, other.1]]);
            if (g.a as i128).rem_euclid(p2) == 0 && (g.b as i128).rem_euclid(p) == 0 {
                return false;
            }
        }
        true
    }

    pub fn is_maximal(&self) -> bool {
        let d = self.disc().unsigned_abs() as u64;
        factorize(d).into_iter().filter(|&(_, e)| e >= 2).all(|(p, _)| self.is_maximal_at(p))
    }

    /// Repeated-root type of `F mod p`: `Some(2)` for a double root,
    /// `Some(3)` for a triple root, `None` if squarefree mod `p`.
    pub fn multiple_root_mod(&self, p: u64) -> Option<u32> {
        if p < 64 {
            return self.multiple_root_by_search(p);
        }
        let m = |x: i64| x.rem_euclid(p as i64) as u64;
        let (a, b, c, d) = (m(self.a), m(self.b), m(self.c), m(self.d));
        if a == 0 && d == 0 {
            // xy(bx + cy): a repeated root needs b or c to vanish, never both
            return (b == 0 || c == 0).then_some(2);
        }
        // move a root away from infinity
        let coeffs = if a == 0 { [d, c, b, a] } else { [a, b, c, d] };
        let f: Vec<u64> = coeffs.iter().rev().copied().collect();
        let df = poly_derivative_mod(&f, p);
        let g = poly_gcd_mod(f, df, p);
        match g.len() {
            0 | 1 => None,
            n => Some(n as u32),
        }
    }

    fn multiple_root_by_search(&self, p: u64) -> Option<u32> {
        let p = p as i128;
        for (col, other) in projective_line(p as i64) {
            let g = self.transform([[col.0, other.0], [col.1, other.1]]);
            let m = |x: i64| (x as i128).rem_euclid(p) == 0;
            if m(g.a) && m(g.b) {
                return Some(if m(g.c) { 3 } else { 2 });
            }
        }
        None
    }
}

/// Coefficients in increasing degree, trailing zeros trimmed.
fn trim(mut f: Vec<u64>) -> Vec<u64> {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

fn poly_derivative_mod(f: &[u64], p: u64) -> Vec<u64> {
    trim(f.iter().enumerate().skip(1).map(|(i, &c)| (i as u64 % p) * c % p).collect())
}

fn poly_gcd_mod(f: Vec<u64>, g: Vec<u64>, p: u64) -> Vec<u64> {
    let (mut f, mut g) = (trim(f), trim(g));
    while !g.is_empty() {
        let inv = crate::arith::pow_mod(*g.last().expect("nonempty"), p - 2, p);
        while f.len() >= g.len() {
            let lead = *f.last().expect("nonempty") * inv % p;
            let shift = f.len() - g.len();
            for (i, &c) in g.iter().enumerate() {
                f[shift + i] = (f[shift + i] + p - lead * c % p) % p;
            }
            f = trim(f);
            if f.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut f, &mut g);
    }
    f
}

impl std::fmt::Display for BinaryCubicForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {}, {})", self.a, self.b, self.c, self.d)
    }
}

/// Representatives `(u, v)` of the points of `P¹(F_p)`, each with a second
/// column completing it to a determinant-one matrix.
fn projective_line(p: i64) -> impl Iterator<Item = ((i64, i64), (i64, i64))> {
    std::iter::once(((1, 0), (0, 1))).chain((0..p).map(|u| ((u, 1), (-1, 0))))
}

fn small_unimodular() -> Vec<Matrix> {
    let mut out = Vec::new();
    for a in -1..=1 {
        for b in -1..=1 {
            for c in -1..=1 {
                for d in -1..=1 {
                    let det = a * d - b * c;
                    if det == 1 || det == -1 {
                        out.push([[a, b], [c, d]]);
                    }
                }
            }
        }
    }
    out
}

/// Integers `d` in `[dmin, dmax]` with `lo <= q2 d² + q1 d + q0 <= hi`, for
/// `q2 < 0`.
fn concave_window(
    (q2, q1, q0): (i128, i128, i128),
    lo: i128,
    hi: i128,
    (dmin, dmax): (i64, i64),
) -> Vec<i64> {
    let value = |d: i64| (q2 * d as i128 + q1) * d as i128 + q0;
    // real interval where the quadratic is >= level
    let region = |level: i128| -> Option<(f64, f64)> {
        let (a, b, c) = (q2 as f64, q1 as f64, (q0 - level) as f64);
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return None;
        }
        let s = disc.sqrt();
        let (r1, r2) = ((-b + s) / (2.0 * a), (-b - s) / (2.0 * a));
        Some((r1.min(r2), r1.max(r2)))
    };
    let Some((o1, o2)) = region(lo) else {
        return Vec::new();
    };
    let clamp = |x: f64| x.max(dmin as f64 - 2.0).min(dmax as f64 + 2.0) as i64;
    let mut ranges = Vec::new();
    match region(hi + 1) {
        Some((i1, i2)) => {
            ranges.push((clamp(o1.floor()) - 1, clamp(i1.ceil()) + 1));
            ranges.push((clamp(i2.floor()) - 1, clamp(o2.ceil()) + 1));
        }
        None => ranges.push((clamp(o1.floor()) - 1, clamp(o2.ceil()) + 1)),
    }
    let mut out = Vec::new();
    let mut last = i64::MIN;
    for (s, e) in ranges {
        for d in s.max(dmin).max(last.saturating_add(1))..=e.min(dmax) {
            let v = value(d);
            if v >= lo && v <= hi {
                out.push(d);
            }
            last = d;
        }
    }
    out
}

/// Candidate forms with `0 < disc <= x` whose Hessian is reduced and `a > 0`.
fn positive_candidates(x: u64, a: i64) -> Vec<BinaryCubicForm> {
    let sx = iroot(x as u128, 2) as i128;
    let a128 = a as i128;
    let p_min = ((27 * a128 * a128 + 3) / 4).max(1);
    let b_max = iroot(sx as u128, 2) as i64 + (3 * a + 1) / 2 + 1;
    let mut out = Vec::new();
    for b in -b_max..=b_max {
        let b128 = b as i128;
        let c_lo = Integer::div_ceil(&(b128 * b128 - sx), &(3 * a128));
        let c_hi = Integer::div_floor(&(b128 * b128 - p_min), &(3 * a128));
        for c in c_lo..=c_hi {
            let p = b128 * b128 - 3 * a128 * c;
            let d_lo = Integer::div_ceil(&(b128 * c - p), &(9 * a128));
            let d_hi = Integer::div_floor(&(b128 * c + p), &(9 * a128));
            for d in d_lo..=d_hi {
                if d == 0 {
                    continue;
                }
                let f = BinaryCubicForm::new(a, b, c as i64, d as i64);
                let (_, _, r) = f.hessian();
                let disc = f.disc();
                if r >= p && disc >= 1 && disc <= x as i128 {
                    out.push(f);
                }
            }
        }
    }
    out
}

/// Candidate forms with `-x <= disc < 0` and `a > 0` that contain every
/// representative whose complex root lies in the fundamental domain.
fn negative_candidates(x: u64, a: i64) -> Vec<BinaryCubicForm> {
    let af = a as f64;
    let t = (x as f64 / 3.0).powf(0.25) / af;
    let b_max = (af * (1.5 + t)).floor() as i64 + 1;
    let c_max = (af * (0.75 + t + t * t)).floor() as i64 + 1;
    let d_max = (af * (0.5 + t) * (0.25 + t * t)).floor() as i64 + 1;
    let a128 = a as i128;
    let mut out = Vec::new();
    for b in -b_max..=b_max {
        let b128 = b as i128;
        for c in -c_max..=c_max {
            let c128 = c as i128;
            let q2 = -27 * a128 * a128;
            let q1 = 18 * a128 * b128 * c128 - 4 * b128 * b128 * b128;
            let q0 = b128 * b128 * c128 * c128 - 4 * a128 * c128 * c128 * c128;
            for d in concave_window((q2, q1, q0), -(x as i128), -1, (-d_max, d_max)) {
                if d != 0 {
                    out.push(BinaryCubicForm::new(a, b, c, d));
                }
            }
        }
    }
    out
}

/// Canonical representatives of all irreducible forms with
/// `0 < |disc| <= x` and non-square discriminant.
pub fn reduced_forms(x: u64) -> Vec<BinaryCubicForm> {
    let xf = x as f64;
    let a_pos = ((4.0 * xf.sqrt() / 27.0).sqrt()).floor() as i64 + 1;
    let a_neg = ((16.0 * xf / 27.0).powf(0.25)).floor() as i64 + 1;
    let jobs: Vec<(bool, i64)> = (1..=a_pos)
        .map(|a| (true, a))
        .chain((1..=a_neg).map(|a| (false, a)))
        .collect();
    let found: Vec<Vec<BinaryCubicForm>> = jobs
        .into_par_iter()
        .map(|(positive, a)| {
            let raw = if positive { positive_candidates(x, a) } else { negative_candidates(x, a) };
            let mut seen = HashSet::new();
            for f in raw {
                let d = f.disc();
                if d > 0 && is_perfect_square(d as u64) {
                    continue;
                }
                if d < 0 && !f.nearly_reduced_negative() {
                    continue;
                }
                if f.is_irreducible() {
                    seen.insert(f.canonical());
                }
            }
            seen.into_iter().collect()
        })
        .collect();
    let mut all: Vec<BinaryCubicForm> = found.into_iter().flatten().collect();
    all.sort_unstable();
    all.dedup();
    all
}

/// Local data at the ramified primes of the maximal form `f`.
pub fn local_data(f: &BinaryCubicForm) -> Vec<LocalRamification> {
    let d = f.disc().unsigned_abs() as u64;
    factorize(d)
        .into_iter()
        .map(|(p, v)| {
            let mult = f.multiple_root_mod(p).expect("p | disc forces a repeated root");
            let wild = p as u32 == mult || (p == 2 && mult == 2);
            if wild {
                let shape = if mult == 3 { "1^3" } else { "1^2 1" };
                LocalRamification::wild(p, format!("{p}:{shape}:v{v}"), v, Some(mult))
            } else {
                let ct = if mult == 3 { vec![3] } else { vec![2, 1] };
                LocalRamification::tame(p, CycleType::new(ct).expect("valid"))
            }
        })
        .collect()
}

/// All `S_3` cubic fields with `|disc| <= x`.
pub fn enumerate_cubic(x: u64) -> FieldList {
    let forms: Vec<BinaryCubicForm> =
        reduced_forms(x).into_par_iter().filter(|f| f.is_maximal()).collect();
    let mut records: Vec<(FieldRecord, BinaryCubicForm)> = forms
        .into_iter()
        .map(|f| {
            let rec = FieldRecord {
                degree: 3,
                group_label: "S3".into(),
                disc: f.disc() as i64,
                ramification: local_data(&f),
            };
            debug_assert!(rec.validate().is_ok(), "{f}: {:?}", rec.validate());
            (rec, f)
        })
        .collect();
    records.sort_by(|(r1, f1), (r2, f2)| {
        (r1.abs_disc(), r1.disc, f1).cmp(&(r2.abs_disc(), r2.disc, f2))
    });
    FieldList {
        records: records.into_iter().map(|(r, _)| r).collect(),
        provenance: Provenance::Enumerated("cubic-forms".into()),
        complete_to: x,
    }
}
