//! Direct lattice-point counts.

/// Monomial-sum polynomial: `(coefficient, exponents)` terms.
pub type Poly = Vec<(i64, Vec<u32>)>;

pub fn eval_mod(poly: &Poly, point: &[i64], q: u64) -> u64 {
    let q = q as i128;
    let mut acc = 0i128;
    for (coef, exps) in poly {
        let mut term = (*coef as i128).rem_euclid(q);
        for (&x, &e) in point.iter().zip(exps) {
            for _ in 0..e {
                term = term * (x as i128).rem_euclid(q) % q;
            }
        }
        acc = (acc + term) % q;
    }
    acc as u64
}

/// Points of `∏ [lo_i, hi_i] ∩ Z^n` passing `keep` at which every polynomial
/// vanishes mod `q`.
pub fn count_points(
    polys: &[Poly],
    bounds: &[(i64, i64)],
    q: u64,
    keep: impl Fn(&[i64]) -> bool,
) -> u64 {
    let n = bounds.len();
    let mut point: Vec<i64> = bounds.iter().map(|b| b.0).collect();
    if bounds.iter().any(|b| b.0 > b.1) {
        return 0;
    }
    let mut count = 0;
    loop {
        if keep(&point) && polys.iter().all(|p| eval_mod(p, &point, q) == 0) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == n {
                return count;
            }
            if point[i] < bounds[i].1 {
                point[i] += 1;
                break;
            }
            point[i] = bounds[i].0;
            i += 1;
        }
    }
}

/// Solutions in `(Z/q)^n` of the system.
pub fn count_solutions_mod(polys: &[Poly], n: usize, q: u64) -> u64 {
    count_points(polys, &vec![(0, q as i64 - 1); n], q, |_| true)
}
