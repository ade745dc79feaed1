//! Cubic fields by exhaustive search over monic defining polynomials.
//!
//! Every cubic field has an integral `α ∉ Z` with `Tr α ∈ {0, 1}` and
//! `T2(α) <= (Tr α)²/3 + (2/3)·sqrt|D|`, so its minimal polynomial
//! `x³ − s1 x² + s2 x − s3` has `s1 ∈ {0, 1}`,
//! `|s1² − 2 s2| <= T2` and `|s3| <= (T2/3)^{3/2}`. The field discriminant is
//! recovered by computing the index of `Z[α]` in the maximal order through
//! repeated searches for integral elements of the form `β/p`, and
//! isomorphic fields are merged by matching roots.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::factor;

/// `x³ + c[2] x² + c[1] x + c[0]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Monic(pub [i64; 3]);

impl Monic {
    pub fn disc(&self) -> i128 {
        let [c, b, a] = self.0.map(|v| v as i128);
        // x³ + a x² + b x + c
        a * a * b * b - 4 * b * b * b - 4 * a * a * a * c - 27 * c * c + 18 * a * b * c
    }

    fn eval(&self, x: i128) -> i128 {
        let [c, b, a] = self.0.map(|v| v as i128);
        ((x + a) * x + b) * x + c
    }

    pub fn has_integer_root(&self) -> bool {
        let c = self.0[0];
        if c == 0 {
            return true;
        }
        let c = c.unsigned_abs();
        (1..=c).filter(|d| c % d == 0).any(|d| self.eval(d as i128) == 0 || self.eval(-(d as i128)) == 0)
    }

    /// `v · w` reduced modulo the polynomial, on coefficient vectors in the
    /// power basis.
    fn mul(&self, v: &[i128; 3], w: &[i128; 3]) -> [i128; 3] {
        let mut prod = [0i128; 5];
        for i in 0..3 {
            for j in 0..3 {
                prod[i + j] += v[i] * w[j];
            }
        }
        let c = self.0.map(|v| v as i128);
        for k in (3..5).rev() {
            let top = prod[k];
            prod[k] = 0;
            for i in 0..3 {
                prod[k - 3 + i] -= top * c[i];
            }
        }
        [prod[0], prod[1], prod[2]]
    }

    fn trace(&self, v: &[i128; 3]) -> i128 {
        let [_, b, a] = self.0.map(|v| v as i128);
        let p1 = -a;
        let p2 = a * a - 2 * b;
        3 * v[0] + p1 * v[1] + p2 * v[2]
    }

    fn norm(&self, v: &[i128; 3]) -> i128 {
        let cols = [*v, self.mul(v, &[0, 1, 0]), self.mul(v, &[0, 0, 1])];
        let m = |i: usize, j: usize| cols[j][i];
        m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
    }

    /// Whether `v / den` is an algebraic integer.
    fn is_integral(&self, v: &[i128; 3], den: i128) -> bool {
        let t = self.trace(v);
        if t % den != 0 {
            return false;
        }
        let t2 = self.trace(&self.mul(v, v));
        let e2 = t * t - t2;
        if e2 % 2 != 0 || (e2 / 2) % (den * den) != 0 {
            return false;
        }
        self.norm(v) % (den * den * den) == 0
    }

    /// `[O_K : Z[α]]`.
    pub fn index(&self) -> u64 {
        let d = self.disc().unsigned_abs() as u64;
        factor(d).into_iter().filter(|&(_, e)| e >= 2).map(|(p, _)| self.index_at(p)).product()
    }

    fn index_at(&self, p: u64) -> u64 {
        let p_i = p as i128;
        let mut basis = [[1i128, 0, 0], [0, 1, 0], [0, 0, 1]];
        let mut den = 1i128;
        let mut index = 1u64;
        'grow: loop {
            let mut tr = [[0i128; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    tr[i][j] = self.trace(&self.mul(&basis[i], &basis[j])) / (den * den);
                }
            }
            let kernel = kernel_mod_p(tr, p);
            let total = (p as u128).pow(kernel.len() as u32);
            assert!(total <= 50_000_000, "kernel search too large at p = {p}");
            for code in 1..total {
                let mut c = [0i128; 3];
                let mut rest = code;
                for k in &kernel {
                    let digit = (rest % p as u128) as i128;
                    rest /= p as u128;
                    for i in 0..3 {
                        c[i] = (c[i] + digit * k[i]) % p_i;
                    }
                }
                let mut v = [0i128; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        v[j] += c[i] * basis[i][j];
                    }
                }
                if self.is_integral(&v, den * p_i) {
                    let rows = vec![
                        basis[0].map(|x| x * p_i),
                        basis[1].map(|x| x * p_i),
                        basis[2].map(|x| x * p_i),
                        v,
                    ];
                    basis = echelon(rows);
                    den *= p_i;
                    let g = basis.iter().flatten().fold(den, |g, &x| gcd(g, x));
                    basis = basis.map(|r| r.map(|x| x / g));
                    den /= g;
                    index *= p;
                    continue 'grow;
                }
            }
            return index;
        }
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Basis of `{c ∈ F_p³ : c · M = 0}`.
fn kernel_mod_p(m: [[i128; 3]; 3], p: u64) -> Vec<[i128; 3]> {
    let p = p as i128;
    // rows of the transpose: equations Σ_i c_i m[i][j] = 0 for each j
    let mut eq: Vec<[i128; 3]> = (0..3).map(|j| [m[0][j], m[1][j], m[2][j]].map(|x| x.rem_euclid(p))).collect();
    let inv = |x: i128| {
        let mut acc = 1i128;
        let (mut b, mut e) = (x, p - 2);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        acc
    };
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..3 {
        let Some(r) = (row..eq.len()).find(|&r| eq[r][col] != 0) else { continue };
        eq.swap(row, r);
        let s = inv(eq[row][col]);
        eq[row] = eq[row].map(|x| x * s % p);
        for r2 in 0..eq.len() {
            if r2 != row && eq[r2][col] != 0 {
                let f = eq[r2][col];
                for k in 0..3 {
                    eq[r2][k] = (eq[r2][k] - f * eq[row][k]).rem_euclid(p);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free: Vec<usize> = (0..3).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = [0i128; 3];
            v[f] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = (-eq[r][f]).rem_euclid(p);
            }
            v
        })
        .collect()
}

/// Row echelon basis of the integer row span (full rank 3 assumed).
fn echelon(mut rows: Vec<[i128; 3]>) -> [[i128; 3]; 3] {
    let mut out = [[0i128; 3]; 3];
    for col in 0..3 {
        loop {
            let nonzero: Vec<usize> = (0..rows.len()).filter(|&r| rows[r][col] != 0).collect();
            if nonzero.len() <= 1 {
                break;
            }
            let piv = *nonzero.iter().min_by_key(|&&r| rows[r][col].abs()).expect("nonempty");
            for &r in &nonzero {
                if r != piv {
                    let q = rows[r][col] / rows[piv][col];
                    for k in 0..3 {
                        rows[r][k] -= q * rows[piv][k];
                    }
                }
            }
        }
        let piv = (0..rows.len()).find(|&r| rows[r][col] != 0).expect("full rank");
        out[col] = rows.remove(piv);
    }
    out
}

fn roots(f: &Monic) -> [Complex64; 3] {
    let [c, b, a] = f.0.map(|v| Complex64::new(v as f64, 0.0));
    let eval = |z: Complex64| ((z + a) * z + b) * z + c;
    let deriv = |z: Complex64| (z * 3.0 + a * 2.0) * z + b;
    let mut z = [Complex64::new(0.4, 0.9), Complex64::new(0.4, 0.9).powu(2), Complex64::new(0.4, 0.9).powu(3)];
    let scale = 1.0 + f.0.iter().map(|v| v.abs() as f64).fold(0.0, f64::max);
    for zi in z.iter_mut() {
        *zi *= scale;
    }
    for _ in 0..500 {
        let prev = z;
        for i in 0..3 {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..3 {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            z[i] -= eval(z[i]) / denom;
        }
        if (0..3).all(|i| (z[i] - prev[i]).norm() < 1e-15 * scale) {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let d = deriv(*zi);
            if d.norm() > 0.0 {
                *zi -= eval(*zi) / d;
            }
        }
    }
    z
}

/// Polynomial with rational coefficients, lowest degree first.
type QPoly = Vec<BigRational>;

fn qmul_mod(f: &Monic, u: &QPoly, v: &QPoly) -> QPoly {
    let mut prod = vec![BigRational::zero(); u.len() + v.len() - 1];
    for (i, a) in u.iter().enumerate() {
        for (j, b) in v.iter().enumerate() {
            prod[i + j] += a * b;
        }
    }
    for k in (3..prod.len()).rev() {
        let top = std::mem::take(&mut prod[k]);
        for i in 0..3 {
            prod[k - 3 + i] -= &top * BigRational::from_integer(BigInt::from(f.0[i]));
        }
    }
    prod.truncate(3);
    prod.resize(3, BigRational::zero());
    prod
}

/// Whether `g` has a root `P(α)` in `Q(α)`, `f(α) = 0`, with the denominator
/// of `P` dividing `den`.
fn has_root_in(f: &Monic, g: &Monic, den: u64) -> bool {
    let ra = roots(f);
    let rb = roots(g);
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for perm in perms {
        // solve Σ_k P_k α_i^k = β_{perm[i]} by Cramer's rule
        let m = |i: usize, k: usize| ra[i].powu(k as u32);
        let det3 = |col: &dyn Fn(usize, usize) -> Complex64| {
            col(0, 0) * (col(1, 1) * col(2, 2) - col(1, 2) * col(2, 1))
                - col(0, 1) * (col(1, 0) * col(2, 2) - col(1, 2) * col(2, 0))
                + col(0, 2) * (col(1, 0) * col(2, 1) - col(1, 1) * col(2, 0))
        };
        let base = det3(&|i, k| m(i, k));
        let mut coeffs = Vec::new();
        let mut ok = true;
        for target in 0..3 {
            let d = det3(&|i, k| if k == target { rb[perm[i]] } else { m(i, k) });
            let value = d / base * den as f64;
            let rounded = value.re.round();
            if value.im.abs() > 1e-4 || (value.re - rounded).abs() > 1e-4 {
                ok = false;
                break;
            }
            coeffs.push(BigRational::new(BigInt::from(rounded as i64), BigInt::from(den)));
        }
        if !ok {
            continue;
        }
        // exact check: g(P(α)) ≡ 0 mod f
        let mut acc: QPoly = vec![BigRational::one(), BigRational::zero(), BigRational::zero()];
        let mut value: QPoly = vec![BigRational::zero(); 3];
        let gc = [g.0[0], g.0[1], g.0[2], 1];
        for (k, &c) in gc.iter().enumerate() {
            if k > 0 {
                acc = qmul_mod(f, &acc, &coeffs);
            }
            for i in 0..3 {
                value[i] += &acc[i] * BigRational::from_integer(BigInt::from(c));
            }
        }
        if value.iter().all(Zero::is_zero) {
            return true;
        }
    }
    false
}

/// One defining polynomial per non-Galois cubic field with `|D| <= x`,
/// keyed by signed field discriminant.
pub fn cubic_fields(x: u64) -> BTreeMap<i64, Vec<Monic>> {
    let mut by_disc: BTreeMap<i64, Vec<(Monic, u64)>> = BTreeMap::new();
    for s1 in 0..=1i64 {
        let t2 = (s1 * s1) as f64 / 3.0 + 2.0 * (x as f64).sqrt() / 3.0 + 1e-9;
        let s2_lo = (((s1 * s1) as f64 - t2) / 2.0).ceil() as i64;
        let s2_hi = (((s1 * s1) as f64 + t2) / 2.0).floor() as i64;
        let s3_max = (t2 / 3.0).powf(1.5).floor() as i64;
        for s2 in s2_lo..=s2_hi {
            for s3 in -s3_max..=s3_max {
                let f = Monic([-s3, s2, -s1]);
                if f.has_integer_root() {
                    continue;
                }
                let df = f.disc();
                let root = (df.unsigned_abs() as f64).sqrt().round() as i128;
                if df > 0 && root * root == df {
                    continue;
                }
                let index = f.index();
                let dk = df / (index as i128 * index as i128);
                if dk.unsigned_abs() > x as u128 {
                    continue;
                }
                let reps = by_disc.entry(dk as i64).or_default();
                if !reps.iter().any(|(g, g_index)| has_root_in(g, &f, *g_index)) {
                    reps.push((f, index));
                }
            }
        }
    }
    by_disc.into_iter().map(|(d, v)| (d, v.into_iter().map(|(f, _)| f).collect())).collect()
}

/// Signed discriminants of all non-Galois cubic fields with `|D| <= x`, with
/// multiplicity, sorted by `(|D|, D)`.
pub fn cubic_discriminants(x: u64) -> Vec<i64> {
    let mut out: Vec<i64> = cubic_fields(x)
        .into_iter()
        .flat_map(|(d, fs)| std::iter::repeat(d).take(fs.len()))
        .collect();
    out.sort_by_key(|&d| (d.unsigned_abs(), d));
    out
}
