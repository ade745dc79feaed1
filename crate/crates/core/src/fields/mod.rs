//! Number fields over Q: records, list files, enumerators for cyclic fields
//! of odd prime degree and for non-Galois cubic fields, and the filtered
//! counts used to probe uniformity.

use std::fmt;

use thiserror::Error;

use crate::convolve::CountingSequence;

pub mod cubic;
pub mod cyclic;
pub mod io;
pub mod record;
pub mod uniformity;

pub use cubic::enumerate_cubic;
pub use cyclic::enumerate_cyclic;
pub use io::{parse_field_file, write_field_file};
pub use record::{FieldRecord, LocalRamification, RamKind};
pub use uniformity::{abelian_uniformity_check, UniformityReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("line {line}: {msg}")]
    MalformedLine { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    InvariantViolation { line: usize, msg: String },
    #[error("field list is complete to {complete_to}, but {needed} is required")]
    IncompleteList { complete_to: u64, needed: u64 },
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("{0} is not squarefree")]
    NotSquarefree(u64),
    #[error("io error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Enumerated(String),
    Ingested(String),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Enumerated(s) => write!(f, "enumerated:{s}"),
            Provenance::Ingested(s) => write!(f, "ingested:{s}"),
        }
    }
}

/// Fields sorted by absolute discriminant, with every field of
/// `|disc| <= complete_to` present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldList {
    pub records: Vec<FieldRecord>,
    pub provenance: Provenance,
    pub complete_to: u64,
}

impl FieldList {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records with `|disc| <= x`.
    pub fn up_to(&self, x: u64) -> &[FieldRecord] {
        let end = self.records.partition_point(|r| r.abs_disc() <= x);
        &self.records[..end]
    }

    pub fn require_complete(&self, needed: u64) -> Result<(), FieldError> {
        if needed > self.complete_to {
            return Err(FieldError::IncompleteList { complete_to: self.complete_to, needed });
        }
        Ok(())
    }

    /// Absolute discriminants as a counting sequence known up to
    /// `complete_to`.
    pub fn disc_sequence(&self) -> CountingSequence {
        CountingSequence::from_values(
            self.records.iter().map(FieldRecord::abs_disc).collect(),
            Some(self.complete_to),
        )
        .expect("discriminants are positive")
    }

    /// Keep records up to `x` and lower the completeness bound accordingly.
    pub fn truncated(&self, x: u64) -> FieldList {
        FieldList {
            records: self.up_to(x).to_vec(),
            provenance: self.provenance.clone(),
            complete_to: self.complete_to.min(x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgroup::CycleType;

    const EXAMPLE: &str =
        r#"{"degree":3,"group":"S3","disc":-23,"ram":[{"p":23,"kind":"tame","cycle_type":[2,1]}]}"#;

    #[test]
    fn parse_single_record() {
        let list = parse_field_file(EXAMPLE.as_bytes()).unwrap();
        assert_eq!(list.len(), 1);
        let rec = &list.records[0];
        assert_eq!((rec.degree, rec.disc, rec.abs_disc()), (3, -23, 23));
        assert_eq!(rec.ramification[0].cycle_type, Some(CycleType::new(vec![2, 1]).unwrap()));
        assert_eq!(list.complete_to, 23);
        assert_eq!(io::record_to_json(rec), EXAMPLE);
    }

    #[test]
    fn empty_stream() {
        let list = parse_field_file("".as_bytes()).unwrap();
        assert!(list.is_empty());
        assert_eq!(list.complete_to, 0);
    }

    #[test]
    fn rejects_inconsistent_records() {
        let bad = r#"{"degree":3,"group":"S3","disc":-24,"ram":[{"p":23,"kind":"tame","cycle_type":[2,1]}]}"#;
        let text = format!("{EXAMPLE}\n{bad}\n");
        match parse_field_file(text.as_bytes()) {
            Err(FieldError::InvariantViolation { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let wrong_group = EXAMPLE.replace("S3", "S4");
        assert!(parse_field_file(wrong_group.as_bytes()).is_err());
        let not_tame = r#"{"degree":3,"group":"C3","disc":81,"ram":[{"p":3,"kind":"tame","cycle_type":[3]}]}"#;
        assert!(parse_field_file(not_tame.as_bytes()).is_err());
        assert!(matches!(
            parse_field_file("{not json".as_bytes()),
            Err(FieldError::MalformedLine { line: 1, .. })
        ));
    }

    #[test]
    fn wild_entries_and_header() {
        let text = concat!(
            r#"{"complete_to":100}"#,
            "\n",
            r#"{"degree":3,"group":"C3","disc":81,"ram":[{"p":3,"kind":"wild","label":"3:C3:t0","exponent":4,"e":3}]}"#,
            "\n",
            r#"{"degree":3,"group":"C3","disc":49,"ram":[{"p":7,"kind":"tame","cycle_type":[3]}]}"#,
            "\n"
        );
        let list = parse_field_file(text.as_bytes()).unwrap();
        assert_eq!(list.complete_to, 100);
        assert_eq!(list.records[0].abs_disc(), 49);
        let mut out = Vec::new();
        write_field_file(&list, &mut out).unwrap();
        let back = parse_field_file(out.as_slice()).unwrap();
        assert_eq!(back.records, list.records);
        let bad_e = text.replace(r#""e":3"#, r#""e":2"#);
        assert!(parse_field_file(bad_e.as_bytes()).is_err());
    }
}
