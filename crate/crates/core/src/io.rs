//! Dataset and artifact serialization.
//!
//! A dataset directory holds `terminals.csv`, `sorts.csv`, `loads.jsonl`,
//! and optionally `tiers.json`. Parse failures carry the file and line.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::datagen::Dataset;
use crate::error::{Error, Result};
use crate::model::{Load, Network, Sort, Terminal, TerminalId};

pub const TERMINALS_FILE: &str = "terminals.csv";
pub const SORTS_FILE: &str = "sorts.csv";
pub const LOADS_FILE: &str = "loads.jsonl";
pub const TIERS_FILE: &str = "tiers.json";

fn file_name(path: &Path) -> String {
    path.display().to_string()
}

fn csv_parse_err(path: &Path, line: usize, e: impl std::fmt::Display) -> Error {
    Error::Parse {
        file: file_name(path),
        line,
        msg: e.to_string(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TerminalRow {
    id: String,
    lat: f64,
    lon: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SortRow {
    terminal: String,
    sort_id: String,
    dep_minutes: u32,
    arr_minutes: u32,
}

pub fn read_terminals_csv(path: &Path) -> Result<Vec<Terminal>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<TerminalRow>().enumerate() {
        // +2: one for the header, one for 1-based numbering
        let row = row.map_err(|e| csv_parse_err(path, i + 2, e))?;
        out.push(Terminal {
            id: row.id.as_str().into(),
            lat: row.lat,
            lon: row.lon,
        });
    }
    Ok(out)
}

pub fn read_sorts_csv(path: &Path) -> Result<Vec<Sort>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<SortRow>().enumerate() {
        let row = row.map_err(|e| csv_parse_err(path, i + 2, e))?;
        out.push(Sort {
            terminal: row.terminal.as_str().into(),
            sort_id: row.sort_id.as_str().into(),
            dep_minutes: row.dep_minutes,
            arr_minutes: row.arr_minutes,
        });
    }
    Ok(out)
}

pub fn write_terminals_csv(path: &Path, terminals: &[Terminal]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for t in terminals {
        writer.serialize(TerminalRow {
            id: t.id.as_str().to_owned(),
            lat: t.lat,
            lon: t.lon,
        })?;
    }
    writer.flush().map_err(Error::Io)?;
    Ok(())
}

pub fn write_sorts_csv(path: &Path, sorts: &[Sort]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for s in sorts {
        writer.serialize(SortRow {
            terminal: s.terminal.as_str().to_owned(),
            sort_id: s.sort_id.as_str().to_owned(),
            dep_minutes: s.dep_minutes,
            arr_minutes: s.arr_minutes,
        })?;
    }
    writer.flush().map_err(Error::Io)?;
    Ok(())
}

/// Read newline-delimited JSON records, reporting the failing line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::Parse {
            file: file_name(path),
            line: i + 1,
            msg: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

/// Write records as newline-delimited JSON.
pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path)?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

/// Read a dataset directory into a network plus optional tier map.
pub fn read_dataset(dir: &Path) -> Result<(Network, BTreeMap<TerminalId, String>)> {
    let terminals = read_terminals_csv(&dir.join(TERMINALS_FILE))?;
    let sorts = read_sorts_csv(&dir.join(SORTS_FILE))?;
    let loads: Vec<Load> = read_jsonl(&dir.join(LOADS_FILE))?;
    let tiers_path = dir.join(TIERS_FILE);
    let tiers = if tiers_path.exists() {
        read_json(&tiers_path)?
    } else {
        BTreeMap::new()
    };
    Ok((
        Network {
            terminals,
            sorts,
            loads,
        },
        tiers,
    ))
}

pub fn write_dataset(dir: &Path, dataset: &Dataset) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_terminals_csv(&dir.join(TERMINALS_FILE), &dataset.network.terminals)?;
    write_sorts_csv(&dir.join(SORTS_FILE), &dataset.network.sorts)?;
    write_jsonl(&dir.join(LOADS_FILE), &dataset.network.loads)?;
    write_json_pretty(&dir.join(TIERS_FILE), &dataset.tiers)?;
    Ok(())
}
