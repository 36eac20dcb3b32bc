//! Versioned CSV files: the first line is `# schema: logbandit/<name>/v1`.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
const PREFIX: &str = "# schema: logbandit/";

pub fn schema_line(name: &str) -> String {
    format!("{PREFIX}{name}/v{SCHEMA_VERSION}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_csv_to<W: Write, T: Serialize>(mut w: W, name: &str, rows: &[T]) -> Result<()> {
    writeln!(w, "{}", schema_line(name))?;
    let mut cw = csv::Writer::from_writer(w);
    for r in rows {
        cw.serialize(r).map_err(csv_err)?;
    }
    cw.flush()?;
    Ok(())
}

pub fn csv_string<T: Serialize>(name: &str, rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv_to(&mut buf, name, rows)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

pub fn write_csv<T: Serialize>(path: &Path, name: &str, rows: &[T]) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_csv_to(std::io::BufWriter::new(f), name, rows)
}

/// Reads rows after checking the schema line names `name` at a supported version.
pub fn read_csv_from<R: Read, T: DeserializeOwned>(r: R, name: &str) -> Result<Vec<T>> {
    let mut br = BufReader::new(r);
    let mut first = String::new();
    br.read_line(&mut first)?;
    let first = first.trim_end();
    let rest = first
        .strip_prefix(PREFIX)
        .ok_or_else(|| Error::Io(format!("missing schema line, found '{first}'")))?;
    let (found, version) = rest
        .rsplit_once("/v")
        .ok_or_else(|| Error::Io(format!("malformed schema line '{first}'")))?;
    if found != name {
        return Err(Error::Io(format!(
            "expected schema '{name}', found '{found}'"
        )));
    }
    if version.parse::<u32>().ok() != Some(SCHEMA_VERSION) {
        return Err(Error::Io(format!(
            "unsupported {name} schema version 'v{version}'"
        )));
    }
    csv::Reader::from_reader(br)
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(csv_err)
}

pub fn read_csv<T: DeserializeOwned>(path: &Path, name: &str) -> Result<Vec<T>> {
    read_csv_from(std::fs::File::open(path)?, name)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
