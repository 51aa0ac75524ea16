//! Dataset files (E2E CSV, RNNLG JSON) and the plain-text evaluation inputs.

use std::fs;
use std::path::Path;

use ensnlg_core::corpus::{parse_mr, Dataset, Dialect, Domain, MeaningRepresentation, Sample, SlotValue, Split};
use serde::Serialize;

use crate::error::{NlgError, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| NlgError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| NlgError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| NlgError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| NlgError::format(path, e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

/// Loads a dataset. E2E files are CSV with an `mr,ref` header (any case);
/// RNNLG files are JSON arrays of `[da, reference, ...]` entries, optionally
/// preceded by `#` comment lines. Sample ids are the 0-based row indices.
pub fn load_dataset(path: &Path, dialect: Dialect, domain: Domain, split: Split) -> Result<Dataset> {
    let text = read_text(path)?;
    if text.trim().is_empty() {
        return Err(NlgError::format(path, "file is empty"));
    }
    let mut samples = match dialect {
        Dialect::E2e => parse_e2e_csv(path, &text)?,
        Dialect::Rnnlg => parse_rnnlg_json(path, &text)?,
    };
    if domain == Domain::Tv {
        for s in &mut samples {
            impute_request_slots(&mut s.mr, &s.reference);
        }
    }
    if samples.is_empty() {
        return Err(NlgError::format(path, "no samples"));
    }
    Ok(Dataset::new(samples, domain, split)?)
}

fn parse_e2e_csv(path: &Path, text: &str) -> Result<Vec<Sample>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| NlgError::format(path, e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let (Some(mr_col), Some(ref_col)) = (col("mr"), col("ref")) else {
        return Err(NlgError::Parse { path: path.into(), row: 0, message: "header must contain `mr` and `ref`".into() });
    };
    let mut samples = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| NlgError::Parse { path: path.into(), row, message: e.to_string() })?;
        let field = |c: usize| record.get(c).unwrap_or("").trim().to_string();
        let mr = parse_mr(&field(mr_col), Dialect::E2e)
            .map_err(|e| NlgError::Parse { path: path.into(), row, message: e.to_string() })?;
        samples.push(Sample::new(row.to_string(), mr, field(ref_col)));
    }
    Ok(samples)
}

fn parse_rnnlg_json(path: &Path, text: &str) -> Result<Vec<Sample>> {
    let body: String = text.lines().filter(|l| !l.trim_start().starts_with('#')).collect::<Vec<_>>().join("\n");
    let entries: Vec<Vec<serde_json::Value>> =
        serde_json::from_str(&body).map_err(|e| NlgError::format(path, e.to_string()))?;
    entries
        .iter()
        .enumerate()
        .map(|(row, entry)| {
            let field = |i: usize| entry.get(i).and_then(|v| v.as_str()).map(str::to_string);
            let (Some(da), Some(reference)) = (field(0), field(1)) else {
                return Err(NlgError::Parse { path: path.into(), row, message: "entry needs a DA and a reference string".into() });
            };
            let mr = parse_mr(&da, Dialect::Rnnlg).map_err(|e| NlgError::Parse { path: path.into(), row, message: e.to_string() })?;
            Ok(Sample::new(row.to_string(), mr, reference))
        })
        .collect()
}

/// Requestable TV slots with the cue words that identify them in a question.
/// The slot names follow the `?request` MRs of the Laptop set, mapped to the
/// TV inventory.
pub const TV_REQUEST_SCHEMA: [(&str, &[&str]); 6] = [
    ("pricerange", &["price", "budget", "cost", "expensive", "cheap"]),
    ("screensizerange", &["screen", "size", "inch", "big", "small", "large"]),
    ("ecorating", &["eco", "energy", "power", "efficient", "efficiency"]),
    ("hdmiport", &["hdmi"]),
    ("hasusbport", &["usb"]),
    ("family", &["family", "series", "line"]),
];

/// Fills a slotless TV `?request` MR with every requestable slot cued in the
/// question, with empty values. Returns whether anything was added.
pub fn impute_request_slots(mr: &mut MeaningRepresentation, reference: &str) -> bool {
    if mr.da_type != "?request" || !mr.slots.is_empty() {
        return false;
    }
    let words = ensnlg_core::corpus::tokenize(reference).tokens;
    for (slot, cues) in TV_REQUEST_SCHEMA {
        if words.iter().any(|w| cues.iter().any(|c| w == c || w.trim_end_matches('s') == *c)) {
            mr.slots.push(SlotValue::new(slot, ""));
        }
    }
    !mr.slots.is_empty()
}

pub fn write_e2e_csv(path: &Path, dataset: &Dataset) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let err = |e: csv::Error| NlgError::format(path, e.to_string());
    w.write_record(["mr", "ref"]).map_err(err)?;
    for s in &dataset.samples {
        w.write_record([s.mr.serialize(), s.reference.clone()]).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| NlgError::format(path, e.to_string()))?;
    write_text(path, &String::from_utf8_lossy(&bytes))
}

pub fn write_rnnlg_json(path: &Path, dataset: &Dataset) -> Result<()> {
    let entries: Vec<[String; 2]> = dataset.samples.iter().map(|s| [s.mr.serialize(), s.reference.clone()]).collect();
    write_json(path, &entries)
}

pub fn write_dataset(path: &Path, dataset: &Dataset, dialect: Dialect) -> Result<()> {
    match dialect {
        Dialect::E2e => write_e2e_csv(path, dataset),
        Dialect::Rnnlg => write_rnnlg_json(path, dataset),
    }
}

/// One hypothesis per line (trailing empty lines dropped).
pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = read_text(path)?;
    let mut lines: Vec<String> = text.lines().map(|l| l.trim().to_string()).collect();
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    Ok(lines)
}

/// Reference groups separated by blank lines.
pub fn read_reference_groups(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = read_text(path)?;
    let mut groups = Vec::new();
    let mut cur = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() {
            if !cur.is_empty() {
                groups.push(std::mem::take(&mut cur));
            }
        } else {
            cur.push(line.to_string());
        }
    }
    if !cur.is_empty() {
        groups.push(cur);
    }
    Ok(groups)
}

/// One MR per line.
pub fn read_mrs(path: &Path, dialect: Dialect) -> Result<Vec<MeaningRepresentation>> {
    read_lines(path)?
        .iter()
        .enumerate()
        .map(|(row, l)| parse_mr(l, dialect).map_err(|e| NlgError::Parse { path: path.into(), row, message: e.to_string() }))
        .collect()
}
