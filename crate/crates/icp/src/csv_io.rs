//! Comma-separated tables with a header row, read into [`RawTable`] and
//! written back with quoting where needed.

use std::io::{Read, Write};
use std::path::Path;

use icp_core::{Dataset, RawTable};

use crate::error::{Error, Result};

/// Reads a table; rows may have any length here, shape checks happen when the
/// table is turned into a dataset.
pub fn read_table<R: Read>(reader: R) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let headers = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok(RawTable::new(headers, rows))
}

pub fn read_table_file(path: &Path) -> Result<RawTable> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    read_table(std::io::BufReader::new(f))
}

pub fn write_table<W: Write>(table: &RawTable, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(writer);
    w.write_record(&table.headers)?;
    for r in &table.rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// Predictors, then the target, then an environment column holding the
/// original environment labels. Numbers use the shortest representation
/// that parses back to the same value.
pub fn dataset_table(d: &Dataset, env_col: &str) -> RawTable {
    let mut headers: Vec<String> = d.names().to_vec();
    headers.push(d.target_name().to_string());
    headers.push(env_col.to_string());
    let rows = (0..d.n())
        .map(|i| {
            let mut r: Vec<String> = (0..d.p()).map(|j| format!("{}", d.x().get(i, j))).collect();
            r.push(format!("{}", d.y()[i]));
            r.push(d.env_labels()[d.env()[i]].clone());
            r
        })
        .collect();
    RawTable::new(headers, rows)
}
