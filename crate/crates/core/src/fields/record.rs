use serde::{Deserialize, Serialize};

use crate::arith::checked_pow;
use crate::permgroup::{index_of, CycleType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RamKind {
    Tame,
    Wild,
}

/// Local behaviour of one ramified prime.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalRamification {
    pub p: u64,
    pub kind: RamKind,
    /// Inertia cycle type; always present for tame primes.
    pub cycle_type: Option<CycleType>,
    /// Opaque identifier of the local algebra at a wild prime.
    pub wild_label: Option<String>,
    /// Ramification index, when known for a wild prime.
    pub ram_index: Option<u32>,
    pub disc_exponent: u32,
}

impl LocalRamification {
    pub fn tame(p: u64, cycle_type: CycleType) -> Self {
        let disc_exponent = index_of(&cycle_type) as u32;
        Self {
            p,
            kind: RamKind::Tame,
            cycle_type: Some(cycle_type),
            wild_label: None,
            ram_index: None,
            disc_exponent,
        }
    }

    pub fn wild(p: u64, label: String, disc_exponent: u32, ram_index: Option<u32>) -> Self {
        Self {
            p,
            kind: RamKind::Wild,
            cycle_type: None,
            wild_label: Some(label),
            ram_index,
            disc_exponent,
        }
    }

    pub fn is_wild(&self) -> bool {
        self.kind == RamKind::Wild
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.p < 2 || !crate::arith::is_prime(self.p) {
            return Err(format!("{} is not prime", self.p));
        }
        match self.kind {
            RamKind::Tame => {
                let ct = self.cycle_type.as_ref().ok_or("tame entry without cycle_type")?;
                if ct.is_identity() {
                    return Err(format!("tame entry at {} has trivial inertia", self.p));
                }
                if ct.order() % self.p == 0 {
                    return Err(format!("inertia of order {} at {} is not tame", ct.order(), self.p));
                }
                if self.disc_exponent as u64 != index_of(ct) {
                    return Err(format!(
                        "exponent {} at {} differs from index {}",
                        self.disc_exponent,
                        self.p,
                        index_of(ct)
                    ));
                }
            }
            RamKind::Wild => {
                if self.wild_label.as_deref().map_or(true, str::is_empty) {
                    return Err(format!("wild entry at {} without label", self.p));
                }
                if let Some(e) = self.ram_index {
                    if e as u64 % self.p != 0 {
                        return Err(format!("ramification index {e} at {} is not wild", self.p));
                    }
                }
                if self.disc_exponent == 0 {
                    return Err(format!("wild entry at {} with zero exponent", self.p));
                }
            }
        }
        Ok(())
    }
}

/// One number field over Q.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldRecord {
    pub degree: u32,
    pub group_label: String,
    /// Signed discriminant.
    pub disc: i64,
    pub ramification: Vec<LocalRamification>,
}

impl FieldRecord {
    pub fn abs_disc(&self) -> u64 {
        self.disc.unsigned_abs()
    }

    pub fn local(&self, p: u64) -> Option<&LocalRamification> {
        self.ramification.iter().find(|r| r.p == p)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.degree == 0 {
            return Err("degree must be positive".into());
        }
        if self.disc == 0 {
            return Err("discriminant must be nonzero".into());
        }
        check_group_label(&self.group_label, self.degree)?;
        let mut seen = std::collections::HashSet::new();
        let mut product: u128 = 1;
        for r in &self.ramification {
            r.validate()?;
            if !seen.insert(r.p) {
                return Err(format!("prime {} listed twice", r.p));
            }
            if let Some(ct) = &r.cycle_type {
                if ct.degree() != self.degree {
                    return Err(format!("cycle type {} has wrong degree", ct));
                }
            }
            let local = checked_pow(r.p as u128, r.disc_exponent).ok_or("local factor overflow")?;
            product = product.checked_mul(local).ok_or("discriminant overflow")?;
        }
        if product != self.abs_disc() as u128 {
            return Err(format!(
                "|disc| = {} but the local factors multiply to {}",
                self.abs_disc(),
                product
            ));
        }
        Ok(())
    }
}

/// `S<n>`, `A<n>` and `C<m>` (also `C<a>xC<b>...`) must match the degree;
/// other labels are accepted unchecked.
fn check_group_label(label: &str, degree: u32) -> Result<(), String> {
    let mismatch = |expected: u64| {
        Err(format!("group {label} has degree {expected}, record says {degree}"))
    };
    let parse = |s: &str| s.parse::<u64>().ok();
    if let Some(n) = label.strip_prefix('S').or_else(|| label.strip_prefix('A')).and_then(parse) {
        return if n == degree as u64 { Ok(()) } else { mismatch(n) };
    }
    if label.starts_with('C') {
        let orders: Option<Vec<u64>> =
            label.split('x').map(|t| t.strip_prefix('C').and_then(parse)).collect();
        if let Some(orders) = orders {
            let m: u64 = orders.iter().product();
            return if m == degree as u64 { Ok(()) } else { mismatch(m) };
        }
    }
    Ok(())
}
