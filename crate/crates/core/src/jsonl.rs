//! Line-delimited JSON readers and writers.
//!
//! Every file this crate exchanges — library catalogs, vulnerability
//! datasets, recommendation lists, generation dumps, prediction files — is
//! JSONL: one JSON object per line. Loading is tolerant: a line that fails
//! to parse is reported with its line number and skipped instead of
//! aborting the whole file, so one corrupt record cannot take down a run.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

/// A line that could not be parsed, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineIssue {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for LineIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Parsed records plus the lines that had to be skipped.
#[derive(Debug)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    pub issues: Vec<LineIssue>,
}

impl<T> Loaded<T> {
    /// Number of lines that were skipped.
    pub fn skipped(&self) -> usize {
        self.issues.len()
    }
}

/// Read every line of `reader` as a value of type `T`.
///
/// Blank lines are ignored. Lines that fail to deserialize are collected
/// into [`Loaded::issues`] with their line numbers; only I/O failures abort.
pub fn read<T: DeserializeOwned>(reader: impl BufRead) -> io::Result<Loaded<T>> {
    let mut records = Vec::new();
    let mut issues = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<T>(&line) {
            Ok(value) => records.push(value),
            Err(err) => issues.push(LineIssue {
                line: idx + 1,
                message: err.to_string(),
            }),
        }
    }
    Ok(Loaded { records, issues })
}

/// Read a JSONL file from disk. See [`read`].
pub fn read_path<T: DeserializeOwned>(path: impl AsRef<Path>) -> io::Result<Loaded<T>> {
    let file = File::open(path.as_ref())?;
    read(BufReader::new(file))
}

/// Write `items` to `writer`, one JSON object per line.
pub fn write<'a, T, I>(mut writer: impl Write, items: I) -> io::Result<usize>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let mut written = 0;
    for item in items {
        let line = serde_json::to_string(item).map_err(io::Error::other)?;
        writer.write_all(line.as_bytes())?;
        writer.write_all(b"\n")?;
        written += 1;
    }
    writer.flush()?;
    Ok(written)
}

/// Write `items` to a file at `path`, one JSON object per line.
///
/// Returns the number of lines written.
pub fn write_path<'a, T, I>(path: impl AsRef<Path>, items: I) -> io::Result<usize>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let file = File::create(path.as_ref())?;
    write(BufWriter::new(file), items)
}
