//! Parsers for numeric arguments and grids.

use anyhow::{anyhow, bail, Context, Result};
use malle_core::arith::primes_up_to;
use malle_core::convolve::log_grid;
use num_rational::Rational64;

/// Nonnegative integer, accepting `100000`, `1_000`, `1e8`, `2.5e6` and `10^8`.
pub fn parse_u64(text: &str) -> Result<u64> {
    let t = text.trim().replace('_', "");
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    if let Some((base, exp)) = t.split_once('^') {
        let base: u64 = base.parse().with_context(|| format!("bad base in `{text}`"))?;
        let exp: u32 = exp.parse().with_context(|| format!("bad exponent in `{text}`"))?;
        return base.checked_pow(exp).ok_or_else(|| anyhow!("`{text}` overflows u64"));
    }
    let v: f64 = t.parse().map_err(|_| anyhow!("`{text}` is not a number"))?;
    if !(0.0..1.9e19).contains(&v) || v.fract() != 0.0 {
        bail!("`{text}` is not a nonnegative integer");
    }
    Ok(v as u64)
}

/// Exact rational from `3`, `7/2` or a decimal such as `2.5`.
pub fn parse_rational(text: &str) -> Result<Rational64> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: i64 = n.trim().parse().with_context(|| format!("bad numerator in `{t}`"))?;
        let d: i64 = d.trim().parse().with_context(|| format!("bad denominator in `{t}`"))?;
        if d == 0 {
            bail!("zero denominator in `{t}`");
        }
        return Ok(Rational64::new(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let digits = frac.len() as u32;
        if digits > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
            bail!("`{t}` is not a decimal");
        }
        let neg = whole.starts_with('-');
        let w: i64 = if whole.is_empty() || whole == "-" { 0 } else { whole.parse()? };
        let f: i64 = if frac.is_empty() { 0 } else { frac.parse()? };
        let den = 10i64.pow(digits);
        let num = w.abs() * den + f;
        return Ok(Rational64::new(if neg { -num } else { num }, den));
    }
    Ok(Rational64::from_integer(parse_u64(t)? as i64))
}

/// Comma-separated integers.
pub fn parse_u64_list(text: &str) -> Result<Vec<u64>> {
    text.split(',').filter(|s| !s.trim().is_empty()).map(parse_u64).collect()
}

/// Integer grid: `a,b,c`, `lo:hi` (7 geometric points), `lo:hi:points`, or
/// `primes:N` (all primes up to `N`).
pub fn parse_int_grid(text: &str) -> Result<Vec<u64>> {
    let t = text.trim();
    if let Some(n) = t.strip_prefix("primes:") {
        return Ok(primes_up_to(parse_u64(n)?));
    }
    if t.contains(':') {
        let parts: Vec<&str> = t.split(':').collect();
        let (lo, hi) = (parse_u64(parts[0])?, parse_u64(parts[1])?);
        let points = match parts.get(2) {
            Some(p) => parse_u64(p)? as usize,
            None => 7,
        };
        if parts.len() > 3 || lo == 0 || hi <= lo || points < 2 {
            bail!("grid `{t}` must be lo:hi[:points] with 0 < lo < hi and points >= 2");
        }
        let mut grid = log_grid(lo as f64, hi as f64, points);
        grid.dedup();
        return Ok(grid);
    }
    parse_u64_list(t)
}

/// Rational grid: `lo:hi[:points]` (rounded geometric points) or a comma list.
pub fn parse_rational_grid(text: &str) -> Result<Vec<Rational64>> {
    if text.contains(':') {
        return Ok(parse_int_grid(text)?.into_iter().map(|v| Rational64::from_integer(v as i64)).collect());
    }
    text.split(',').filter(|s| !s.trim().is_empty()).map(parse_rational).collect()
}

/// Scaling vectors separated by `;`, entries by `,`.
pub fn parse_vectors(text: &str) -> Result<Vec<Vec<Rational64>>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|v| v.split(',').map(parse_rational).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(parse_u64("1e8").unwrap(), 100_000_000);
        assert_eq!(parse_u64("2.5e3").unwrap(), 2500);
        assert_eq!(parse_u64("10^4").unwrap(), 10_000);
        assert_eq!(parse_u64("1_000").unwrap(), 1000);
        assert!(parse_u64("1.5").is_err());
        assert!(parse_u64("-3").is_err());
        assert!(parse_u64("abc").is_err());
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("7/2").unwrap(), Rational64::new(7, 2));
        assert_eq!(parse_rational("2.25").unwrap(), Rational64::new(9, 4));
        assert_eq!(parse_rational("1e2").unwrap(), Rational64::from_integer(100));
    }

    #[test]
    fn grids() {
        assert_eq!(parse_int_grid("primes:12").unwrap(), vec![2, 3, 5, 7, 11]);
        assert_eq!(parse_int_grid("10:1000:3").unwrap(), vec![10, 100, 1000]);
        assert_eq!(parse_int_grid("7,13,91").unwrap(), vec![7, 13, 91]);
        assert!(parse_int_grid("10:5").is_err());
        let v = parse_vectors("30,20;4,4.5").unwrap();
        assert_eq!(v[1][1], Rational64::new(9, 2));
    }
}
