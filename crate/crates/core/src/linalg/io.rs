//! Matrix files.
//!
//! Two formats are understood:
//!
//! * CSV, one matrix row per line, no header.
//! * Raw little-endian: `rows: u32`, `cols: u32`, then `rows·cols` `f64` values
//!   in row-major order.
//!
//! [`read_matrix`] picks the format from the file extension (`.csv` or anything else).

use std::io::{Read, Write};
use std::path::Path;

use super::DenseMatrix;
use crate::error::{invalid, Result};

pub fn parse_csv<R: Read>(reader: R) -> Result<DenseMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut entries = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in rdr.records() {
        let record = record?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(invalid(format!(
                    "row {} has {} fields, expected {c}",
                    rows + 1,
                    record.len()
                )))
            }
            _ => {}
        }
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| invalid(format!("cannot parse {field:?} as a number")))?;
            entries.push(v);
        }
        rows += 1;
    }
    DenseMatrix::from_row_major(rows, cols.unwrap_or(0), entries)
}

pub fn write_csv<W: Write>(a: &DenseMatrix, writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    for i in 0..a.rows() {
        wtr.write_record((0..a.cols()).map(|j| a.get(i, j).to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn parse_raw(bytes: &[u8]) -> Result<DenseMatrix> {
    if bytes.len() < 8 {
        return Err(invalid("raw matrix file shorter than its 8-byte header"));
    }
    let rows = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let body = &bytes[8..];
    if body.len() != rows * cols * 8 {
        return Err(invalid(format!(
            "raw matrix header says {rows}×{cols} but body holds {} bytes",
            body.len()
        )));
    }
    let entries = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DenseMatrix::from_row_major(rows, cols, entries)
}

pub fn to_raw(a: &DenseMatrix) -> Result<Vec<u8>> {
    let dims = |n: usize| u32::try_from(n).map_err(|_| invalid("dimension exceeds u32"));
    let mut out = Vec::with_capacity(8 + 8 * a.rows() * a.cols());
    out.extend_from_slice(&dims(a.rows())?.to_le_bytes());
    out.extend_from_slice(&dims(a.cols())?.to_le_bytes());
    for v in a.to_row_major() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    if is_csv(path) {
        parse_csv(std::fs::File::open(path)?)
    } else {
        parse_raw(&std::fs::read(path)?)
    }
}

pub fn write_matrix(a: &DenseMatrix, path: &Path) -> Result<()> {
    if is_csv(path) {
        write_csv(a, std::fs::File::create(path)?)
    } else {
        Ok(std::fs::write(path, to_raw(a)?)?)
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_parses_rows() {
        let a = parse_csv("1, 2\n3,4\n".as_bytes()).unwrap();
        assert_eq!(a.to_row_major(), vec![1.0, 2.0, 3.0, 4.0]);
        assert!(parse_csv("1,2\n3\n".as_bytes()).is_err());
        assert!(parse_csv("1,x\n".as_bytes()).is_err());
        assert!(parse_csv("".as_bytes()).is_err());
    }

    #[test]
    fn raw_layout_is_little_endian_row_major() {
        let a = DenseMatrix::from_row_major(1, 2, vec![1.5, -2.0]).unwrap();
        let bytes = to_raw(&a).unwrap();
        assert_eq!(&bytes[0..8], &[1, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(&bytes[8..16], &1.5f64.to_le_bytes());
        assert_eq!(parse_raw(&bytes).unwrap(), a);
        assert!(parse_raw(&bytes[..15]).is_err());
    }

    #[test]
    fn files_round_trip_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let a = DenseMatrix::from_row_major(2, 2, vec![0.1, 1e-300, -3.25, 7.0 / 3.0]).unwrap();
        for name in ["m.csv", "m.bin"] {
            let path = dir.path().join(name);
            write_matrix(&a, &path).unwrap();
            assert_eq!(read_matrix(&path).unwrap(), a);
        }
    }
}
