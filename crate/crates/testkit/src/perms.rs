//! Permutations as plain index vectors.

/// A permutation of `0..sum(parts)` with the given cycle lengths.
pub fn with_cycle_type(parts: &[u32]) -> Vec<usize> {
    let n: usize = parts.iter().map(|&p| p as usize).sum();
    let mut perm = vec![0; n];
    let mut start = 0;
    for &len in parts {
        let len = len as usize;
        for i in 0..len {
            perm[start + i] = start + (i + 1) % len;
        }
        start += len;
    }
    perm
}

pub fn cycle_lengths(perm: &[usize]) -> Vec<u32> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        out.push(len);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

/// `degree − #orbits`.
pub fn index(perm: &[usize]) -> u32 {
    (perm.len() - cycle_lengths(perm).len()) as u32
}

/// The product permutation on pairs `(i, j)`.
pub fn product(s: &[usize], t: &[usize]) -> Vec<usize> {
    let m = t.len();
    let mut out = vec![0; s.len() * m];
    for i in 0..s.len() {
        for j in 0..m {
            out[i * m + j] = s[i] * m + t[j];
        }
    }
    out
}

/// Index of `σ × τ` acting on pairs, for `σ`, `τ` of the given cycle types.
pub fn product_index(ct1: &[u32], ct2: &[u32]) -> u32 {
    index(&product(&with_cycle_type(ct1), &with_cycle_type(ct2)))
}

/// Cycle types of the regular action of every element of `Z/m_1 × … × Z/m_k`,
/// identity first.
pub fn regular_cycle_types(factors: &[u64]) -> Vec<Vec<u32>> {
    let order: u64 = factors.iter().product();
    let digits = |mut x: u64| {
        factors
            .iter()
            .map(|&m| {
                let d = x % m;
                x /= m;
                d
            })
            .collect::<Vec<_>>()
    };
    let encode = |ds: &[u64]| ds.iter().rev().zip(factors.iter().rev()).fold(0, |acc, (&d, &m)| acc * m + d);
    (0..order)
        .map(|g| {
            let gd = digits(g);
            let perm: Vec<usize> = (0..order)
                .map(|h| {
                    let hd = digits(h);
                    let sum: Vec<u64> =
                        hd.iter().zip(&gd).zip(factors).map(|((a, b), m)| (a + b) % m).collect();
                    encode(&sum) as usize
                })
                .collect();
            cycle_lengths(&perm)
        })
        .collect()
}

/// Every cycle type of `S_n`.
pub fn partitions(n: u32) -> Vec<Vec<u32>> {
    fn rec(n: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for k in (1..=n.min(max)).rev() {
            prefix.push(k);
            rec(n - k, k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        assert_eq!(cycle_lengths(&with_cycle_type(&[3, 2, 1])), vec![3, 2, 1]);
        assert_eq!(product_index(&[2, 1], &[1, 1, 1]), 3);
        assert_eq!(product_index(&[2, 1], &[3]), 7);
        assert_eq!(partitions(4).len(), 5);
        assert_eq!(regular_cycle_types(&[3, 3])[1], vec![3, 3, 3]);
    }
}
