//! Report envelopes and output sinks.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

pub const TOOL: &str = "malle-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Every report carries the tool, its version, the subcommand and the
/// configuration that produced it.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a Value,
    result: &'a T,
}

pub struct Sink {
    out: Box<dyn Write>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Sink { out })
    }

    pub fn json<T: Serialize>(&mut self, command: &str, config: &Value, result: &T) -> Result<()> {
        let env = Envelope { tool: TOOL, version: VERSION, command, config, result };
        serde_json::to_writer_pretty(&mut self.out, &env)?;
        writeln!(self.out)?;
        self.out.flush()?;
        Ok(())
    }

    /// CSV with `# ` provenance lines, then the header and rows. `notes` are
    /// extra comment lines such as fitted exponents.
    pub fn csv(
        &mut self,
        command: &str,
        config: &Value,
        notes: &[String],
        header: &[&str],
        rows: &[Vec<String>],
    ) -> Result<()> {
        writeln!(self.out, "# {TOOL} {VERSION} {command}")?;
        writeln!(self.out, "# config {}", serde_json::to_string(config)?)?;
        for n in notes {
            writeln!(self.out, "# {n}")?;
        }
        writeln!(self.out, "{}", header.join(","))?;
        for r in rows {
            writeln!(self.out, "{}", r.iter().map(|c| quote(c)).collect::<Vec<_>>().join(","))?;
        }
        self.out.flush()?;
        Ok(())
    }
}

fn quote(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// `--format` if given, else from the output extension, else `default`.
pub fn resolve_format(explicit: Option<Format>, out: Option<&PathBuf>, default: Format) -> Format {
    explicit.unwrap_or_else(|| match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        _ => default,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting() {
        assert_eq!(quote("a,b"), "\"a,b\"");
        assert_eq!(quote("[2, 1]"), "\"[2, 1]\"");
        assert_eq!(quote("plain"), "plain");
    }

    #[test]
    fn format_from_extension() {
        let p = PathBuf::from("x.csv");
        assert_eq!(resolve_format(None, Some(&p), Format::Json), Format::Csv);
        assert_eq!(resolve_format(Some(Format::Json), Some(&p), Format::Csv), Format::Json);
        assert_eq!(resolve_format(None, None, Format::Csv), Format::Csv);
    }
}
