//! CSV matrix files.
//!
//! Format: comma separated, one sample per row, `.` as decimal point, no
//! thousands separators. A single header row is allowed and is detected by
//! a first line containing a cell that does not parse as a number.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Parsed matrix plus the header names, when the file had one.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvMatrix {
    pub header: Option<Vec<String>>,
    pub values: DMatrix<f64>,
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<CsvMatrix> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    parse_matrix(&text, path)
}

pub fn parse_matrix(text: &str, origin: &Path) -> Result<CsvMatrix> {
    let err = |line: usize, col: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        col,
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut header = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(idx + 1);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let parsed: Vec<std::result::Result<f64, usize>> = record
            .iter()
            .enumerate()
            .map(|(c, cell)| cell.parse::<f64>().map_err(|_| c + 1))
            .collect();
        if idx == 0 && parsed.iter().any(|p| p.is_err()) {
            header = Some(record.iter().map(str::to_owned).collect::<Vec<_>>());
            width = Some(record.len());
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(err(
                line,
                record.len().min(expected) + 1,
                format!("ragged row: {} fields, expected {expected}", record.len()),
            ));
        }
        let mut row = Vec::with_capacity(expected);
        for (c, p) in parsed.into_iter().enumerate() {
            match p {
                Ok(v) => row.push(v),
                Err(col) => {
                    return Err(err(line, col, format!("non-numeric cell `{}`", &record[c])));
                }
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(err(1, 1, "no numeric rows".into()));
    }
    let d = rows[0].len();
    let values = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
    Ok(CsvMatrix { header, values })
}

/// Write a matrix with shortest round-trip float formatting, so re-reading
/// the file reproduces every value exactly.
pub fn write_matrix(path: impl AsRef<Path>, m: &DMatrix<f64>, header: Option<&[String]>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        if let Some(h) = header {
            writeln!(out, "{}", h.join(","))?;
        }
        for i in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn parse(s: &str) -> Result<CsvMatrix> {
        parse_matrix(s, Path::new("test.csv"))
    }

    #[test]
    fn plain_rows() {
        let m = parse("1,2\n3,4\n").unwrap();
        assert_eq!(m.values, dmatrix![1.0, 2.0; 3.0, 4.0]);
        assert!(m.header.is_none());
    }

    #[test]
    fn header_detected() {
        let m = parse("a,b\n1,2\n").unwrap();
        assert_eq!(m.values, dmatrix![1.0, 2.0]);
        assert_eq!(m.header.unwrap(), vec!["a", "b"]);
    }

    #[test]
    fn ragged_row_reports_line() {
        match parse("1,2\n3\n").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_reports_location() {
        match parse("1,2\n3,x\n").unwrap_err() {
            Error::Parse { line, col, .. } => assert_eq!((line, col), (2, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_file() {
        assert!(matches!(parse(""), Err(Error::Parse { .. })));
        assert!(matches!(parse("a,b\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn write_then_read_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = dmatrix![0.1 + 0.2, -1e-300; std::f64::consts::PI, 12345.678901234567];
        let header = vec!["x".to_string(), "y".to_string()];
        write_matrix(&path, &m, Some(&header)).unwrap();
        let back = read_matrix(&path).unwrap();
        assert_eq!(back.values, m);
        assert_eq!(back.header.unwrap(), header);
    }
}
