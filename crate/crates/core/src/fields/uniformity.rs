//! Counts of cyclic fields whose discriminant is divisible by a fixed `q`,
//! compared against `(X/q)^{1/a} ln^{b−1} X` with `a, b` the invariants of
//! the regular cyclic group.

use serde::Serialize;

use crate::arith::{is_squarefree, omega};
use crate::invariants::cyclic_regular;

use super::{FieldError, FieldList};

#[derive(Debug, Clone, Serialize)]
pub struct UniformityRow {
    pub q: u64,
    pub x: u64,
    pub omega: u32,
    pub count: u64,
    /// `(X/q)^{1/a} · ln^{b−1} X`
    pub shape: f64,
    pub ratio: f64,
    /// `ratio / ratio(q = 1)` at the same `X`.
    pub relative: f64,
    /// `(l − 1)^{ω(q)}`
    pub allowance: f64,
    pub within: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformityReport {
    pub l: u64,
    pub a: u64,
    pub b: u64,
    pub rows: Vec<UniformityRow>,
    /// Largest `relative / allowance` over the grid.
    pub worst: f64,
    pub bounded: bool,
}

/// For each `X` in `xs` and `q` in `qs`, count fields of `list` with
/// `disc <= X` and `q | disc`. The grid is declared bounded when every ratio
/// is at most `(l − 1)^{ω(q)}` times the unrestricted (`q = 1`) ratio.
pub fn abelian_uniformity_check(
    list: &FieldList,
    l: u64,
    qs: &[u64],
    xs: &[u64],
) -> Result<UniformityReport, FieldError> {
    for &x in xs {
        list.require_complete(x)?;
    }
    if let Some(&q) = qs.iter().find(|&&q| !is_squarefree(q)) {
        return Err(FieldError::NotSquarefree(q));
    }
    let group = cyclic_regular(l as usize);
    let a = group.a_invariant().expect("l >= 3");
    let b = group.b_invariant_q().expect("l >= 3");
    let shape = |x: u64, q: u64| {
        let xf = x as f64;
        (xf / q as f64).powf(1.0 / a as f64) * xf.ln().powi(b as i32 - 1)
    };
    let count = |x: u64, q: u64| {
        list.up_to(x).iter().filter(|r| r.abs_disc() % q == 0).count() as u64
    };
    let mut rows = Vec::new();
    for &x in xs {
        let base = count(x, 1) as f64 / shape(x, 1);
        let mut q_list = vec![1];
        q_list.extend(qs.iter().copied().filter(|&q| q != 1));
        for q in q_list {
            let n = count(x, q);
            let s = shape(x, q);
            let ratio = n as f64 / s;
            let relative = if base > 0.0 { ratio / base } else { 0.0 };
            let allowance = ((l - 1) as f64).powi(omega(q) as i32);
            rows.push(UniformityRow {
                q,
                x,
                omega: omega(q),
                count: n,
                shape: s,
                ratio,
                relative,
                allowance,
                within: relative <= allowance,
            });
        }
    }
    let worst = rows.iter().map(|r| r.relative / r.allowance).fold(0.0, f64::max);
    let bounded = rows.iter().all(|r| r.within);
    Ok(UniformityReport { l, a, b, rows, worst, bounded })
}
