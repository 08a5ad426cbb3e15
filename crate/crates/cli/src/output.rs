use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

/// Failure classes, mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or unreadable input: exit 2.
    Usage(String),
    /// A check ran and did not pass, or a computation failed: exit 1.
    Failed(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

pub fn usage(msg: impl fmt::Display) -> CliError {
    CliError::Usage(msg.to_string())
}

pub fn failed(msg: impl fmt::Display) -> CliError {
    CliError::Failed(msg.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Report produced, but a verification inside it failed.
    CheckFailed,
    BudgetExhausted,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::CheckFailed => 1,
            Status::BudgetExhausted => 3,
        }
    }
}

pub struct Outcome {
    pub report: Value,
    pub status: Status,
}

impl Outcome {
    pub fn ok(report: Value) -> Self {
        Outcome {
            report,
            status: Status::Ok,
        }
    }

    pub fn checked(report: Value, passed: bool) -> Self {
        Outcome {
            report,
            status: if passed { Status::Ok } else { Status::CheckFailed },
        }
    }
}

/// A data file as read, with the digest that goes into every report.
#[derive(Debug, Clone, Serialize)]
pub struct Source {
    pub path: String,
    pub sha256: String,
    #[serde(skip)]
    pub bytes: Vec<u8>,
}

impl Source {
    pub fn read(path: &Path) -> Result<Source, CliError> {
        let bytes = fs::read(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        Ok(Source::from_bytes(path.display().to_string(), bytes))
    }

    pub fn from_bytes(path: String, bytes: Vec<u8>) -> Source {
        Source {
            sha256: sha256_hex(&bytes),
            path,
            bytes,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `contents` to `path` and returns its digest record.
pub fn write_file(path: &Path, contents: &[u8]) -> Result<Source, CliError> {
    fs::write(path, contents).map_err(|e| failed(format!("cannot write {}: {e}", path.display())))?;
    Ok(Source {
        path: path.display().to_string(),
        sha256: sha256_hex(contents),
        bytes: Vec::new(),
    })
}

/// `out.mat` and `out` both give the prefix `out`.
pub fn output_prefix(out: &Path) -> PathBuf {
    match out.extension() {
        Some(ext) if ext == "mat" => out.with_extension(""),
        _ => out.to_path_buf(),
    }
}

pub fn relation_path(prefix: &Path, i: usize) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(format!("_A{i}.mat"));
    PathBuf::from(name)
}

pub fn emit(report: &Value, format: Format, mut out: impl Write) -> io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out)
        }
        Format::Tsv => write_tsv(report, out),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Arrays of objects become a header plus one row per element; anything
/// else becomes `key<TAB>value` lines, with a `rows` array rendered as a
/// table after the scalar keys.
fn write_tsv(report: &Value, mut out: impl Write) -> io::Result<()> {
    fn table(rows: &[Value], out: &mut impl Write) -> io::Result<()> {
        let Some(Value::Object(first)) = rows.first() else {
            for r in rows {
                writeln!(out, "{}", cell(r))?;
            }
            return Ok(());
        };
        let keys: Vec<&String> = first.keys().collect();
        writeln!(
            out,
            "{}",
            keys.iter().map(|k| k.as_str()).collect::<Vec<_>>().join("\t")
        )?;
        for r in rows {
            let line: Vec<String> = keys.iter().map(|k| cell(&r[k.as_str()])).collect();
            writeln!(out, "{}", line.join("\t"))?;
        }
        Ok(())
    }
    match report {
        Value::Array(rows) => table(rows, &mut out),
        Value::Object(map) => {
            for (k, v) in map {
                if !(k == "rows" && v.is_array()) {
                    writeln!(out, "{k}\t{}", cell(v))?;
                }
            }
            if let Some(Value::Array(rows)) = map.get("rows") {
                writeln!(out)?;
                table(rows, &mut out)?;
            }
            Ok(())
        }
        other => writeln!(out, "{}", cell(other)),
    }
}
