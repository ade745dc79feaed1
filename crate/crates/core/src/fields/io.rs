//! JSON-lines field files.
//!
//! ```text
//! {"complete_to":10000,"provenance":"enumerated:cubic"}
//! {"degree":3,"group":"S3","disc":-23,"ram":[{"p":23,"kind":"tame","cycle_type":[2,1]}]}
//! ```
//!
//! The header line is optional; without it the list is taken to be complete
//! up to its largest discriminant. Wild entries carry `label`, `exponent` and
//! optionally the ramification index `e`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::permgroup::CycleType;

use super::record::{FieldRecord, LocalRamification, RamKind};
use super::{FieldError, FieldList, Provenance};

#[derive(Serialize, Deserialize)]
struct RamLine {
    p: u64,
    kind: RamKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cycle_type: Option<CycleType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exponent: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    e: Option<u32>,
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    degree: u32,
    group: String,
    disc: i64,
    ram: Vec<RamLine>,
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    complete_to: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
}

fn ram_from_line(r: RamLine) -> Result<LocalRamification, String> {
    match r.kind {
        RamKind::Tame => {
            let ct = r.cycle_type.ok_or("tame entry needs cycle_type")?;
            let local = LocalRamification::tame(r.p, ct);
            if let Some(e) = r.exponent {
                if e != local.disc_exponent {
                    return Err(format!(
                        "exponent {e} at {} differs from the inertia index {}",
                        r.p, local.disc_exponent
                    ));
                }
            }
            Ok(local)
        }
        RamKind::Wild => {
            let label = r.label.ok_or("wild entry needs label")?;
            let exponent = r.exponent.ok_or("wild entry needs exponent")?;
            let mut local = LocalRamification::wild(r.p, label, exponent, r.e);
            local.cycle_type = r.cycle_type;
            Ok(local)
        }
    }
}

fn ram_to_line(r: &LocalRamification) -> RamLine {
    match r.kind {
        RamKind::Tame => RamLine {
            p: r.p,
            kind: RamKind::Tame,
            cycle_type: r.cycle_type.clone(),
            label: None,
            exponent: None,
            e: None,
        },
        RamKind::Wild => RamLine {
            p: r.p,
            kind: RamKind::Wild,
            cycle_type: r.cycle_type.clone(),
            label: r.wild_label.clone(),
            exponent: Some(r.disc_exponent),
            e: r.ram_index,
        },
    }
}

pub fn record_to_json(rec: &FieldRecord) -> String {
    let line = RecordLine {
        degree: rec.degree,
        group: rec.group_label.clone(),
        disc: rec.disc,
        ram: rec.ramification.iter().map(ram_to_line).collect(),
    };
    serde_json::to_string(&line).expect("serializable")
}

pub fn record_from_json(text: &str) -> Result<FieldRecord, FieldError> {
    parse_record(text, 1)
}

fn parse_record(text: &str, line: usize) -> Result<FieldRecord, FieldError> {
    let malformed = |msg: String| FieldError::MalformedLine { line, msg };
    let raw: RecordLine = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    let ramification = raw
        .ram
        .into_iter()
        .map(ram_from_line)
        .collect::<Result<Vec<_>, _>>()
        .map_err(malformed)?;
    let mut rec =
        FieldRecord { degree: raw.degree, group_label: raw.group, disc: raw.disc, ramification };
    rec.ramification.sort_by_key(|r| r.p);
    rec.validate().map_err(|msg| FieldError::InvariantViolation { line, msg })?;
    Ok(rec)
}

/// Read a field list; blank lines are skipped.
pub fn parse_field_file<R: BufRead>(reader: R) -> Result<FieldList, FieldError> {
    let mut records = Vec::new();
    let mut header: Option<HeaderLine> = None;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let text = line.map_err(|e| FieldError::Io(e.to_string()))?;
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        if records.is_empty() && header.is_none() && text.contains("\"complete_to\"") {
            let h: HeaderLine = serde_json::from_str(text)
                .map_err(|e| FieldError::MalformedLine { line: line_no, msg: e.to_string() })?;
            header = Some(h);
            continue;
        }
        records.push(parse_record(text, line_no)?);
    }
    let sorted = records.windows(2).all(|w| sort_key(&w[0]) <= sort_key(&w[1]));
    if !sorted {
        log::warn!("field file is not sorted by |disc|; sorting");
        records.sort_by_key(sort_key);
    }
    let max_disc = records.last().map_or(0, FieldRecord::abs_disc);
    let (complete_to, source) = match header {
        Some(h) => {
            if h.complete_to < max_disc {
                log::warn!(
                    "header claims completeness to {} but the file reaches {}",
                    h.complete_to,
                    max_disc
                );
            }
            (h.complete_to, h.provenance)
        }
        None => (max_disc, None),
    };
    Ok(FieldList {
        records,
        provenance: Provenance::Ingested(source.unwrap_or_else(|| "file".into())),
        complete_to,
    })
}

pub fn write_field_file<W: Write>(list: &FieldList, mut out: W) -> std::io::Result<()> {
    let header = HeaderLine {
        complete_to: list.complete_to,
        provenance: Some(list.provenance.to_string()),
    };
    writeln!(out, "{}", serde_json::to_string(&header).expect("serializable"))?;
    for rec in &list.records {
        writeln!(out, "{}", record_to_json(rec))?;
    }
    Ok(())
}

pub(super) fn sort_key(r: &FieldRecord) -> (u64, i64) {
    (r.abs_disc(), r.disc)
}
