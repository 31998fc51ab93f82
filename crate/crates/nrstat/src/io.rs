//! Response-matrix files.
//!
//! Two formats are supported:
//!
//! - CSV: one stimulus per row, comma separated, UTF-8. A first row that
//!   does not parse as numbers is taken as column labels. A first column
//!   that does not parse as numbers is taken as row labels.
//! - NRSM binary: the 4 magic bytes `NRSM`, a little-endian `u32` version
//!   (1), little-endian `u64` rows and cols, then `rows * cols` little-endian
//!   IEEE-754 doubles in row-major order. No padding.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nrstat_core::ResponseMatrix;
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"NRSM";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Binary,
}

impl Format {
    /// `.csv` files are CSV; everything else is NRSM binary.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Binary,
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("not an NRSM file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported NRSM version {0}")]
    UnsupportedVersion(u32),
    #[error("NRSM payload holds {got} bytes, header promises {expected}")]
    PayloadSize { expected: u64, got: u64 },
    #[error("NRSM header truncated")]
    TruncatedHeader,
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("line {line}: expected {expected} fields, found {got}")]
    Ragged { line: u64, expected: usize, got: usize },
    #[error("line {line}, column {col}: cannot parse {cell:?} as a number")]
    NonNumeric { line: u64, col: usize, cell: String },
    #[error("line {line}, column {col}: non-finite value {cell:?}")]
    NonFiniteCell { line: u64, col: usize, cell: String },
    #[error("file holds no data rows")]
    Empty,
    #[error(transparent)]
    Matrix(#[from] nrstat_core::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn load_matrix(path: &Path, format: Format) -> Result<ResponseMatrix, IoError> {
    let file = File::open(path).map_err(io_err(path))?;
    let reader = BufReader::new(file);
    match format {
        Format::Csv => read_csv(reader),
        Format::Binary => read_binary(reader).map_err(|e| match e {
            IoError::Io { source, .. } => io_err(path)(source),
            other => other,
        }),
    }
}

pub fn save_matrix(m: &ResponseMatrix, path: &Path, format: Format) -> Result<(), IoError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut writer = BufWriter::new(file);
    match format {
        Format::Csv => write_csv(m, &mut writer)?,
        Format::Binary => write_binary(m, &mut writer).map_err(io_err(path))?,
    }
    writer.flush().map_err(io_err(path))
}

pub fn write_binary<W: Write>(m: &ResponseMatrix, w: &mut W) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    for v in m.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<ResponseMatrix, IoError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|source| IoError::Io {
        path: PathBuf::new(),
        source,
    })?;
    decode_binary(&bytes)
}

pub fn decode_binary(bytes: &[u8]) -> Result<ResponseMatrix, IoError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(IoError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(IoError::TruncatedHeader);
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(IoError::UnsupportedVersion(version));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let payload = (bytes.len() - HEADER_LEN) as u64;
    let expected = rows.checked_mul(cols).and_then(|n| n.checked_mul(8));
    if expected != Some(payload) {
        return Err(IoError::PayloadSize {
            expected: expected.unwrap_or(u64::MAX),
            got: payload,
        });
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(ResponseMatrix::new(rows as usize, cols as usize, values)?)
}

pub fn encode_binary(m: &ResponseMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * m.values().len());
    write_binary(m, &mut out).expect("writing to a Vec cannot fail");
    out
}

fn parse_cell(cell: &str) -> Option<f64> {
    f64::from_str(cell.trim()).ok()
}

pub fn read_csv<R: Read>(r: R) -> Result<ResponseMatrix, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(r);
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| IoError::Csv(e.to_string()))?;
        if rec.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line());
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(IoError::Empty);
    }

    let row_labelled = records
        .get(1)
        .or(records.first())
        .and_then(|(_, rec)| rec.get(0))
        .is_some_and(|c| parse_cell(c).is_none());
    let first_data_col = usize::from(row_labelled);
    let header = records[0]
        .1
        .iter()
        .skip(first_data_col)
        .any(|c| parse_cell(c).is_none());

    let col_labels: Option<Vec<String>> = header.then(|| {
        records[0]
            .1
            .iter()
            .skip(first_data_col)
            .map(|c| c.trim().to_string())
            .collect()
    });
    let data = if header { &records[1..] } else { &records[..] };
    if data.is_empty() {
        return Err(IoError::Empty);
    }
    let width = data[0].1.len();
    if width <= first_data_col {
        return Err(IoError::Empty);
    }
    let cols = width - first_data_col;

    let mut values = Vec::with_capacity(data.len() * cols);
    let mut row_labels = Vec::new();
    for (line, rec) in data {
        if rec.len() != width {
            return Err(IoError::Ragged {
                line: *line,
                expected: width,
                got: rec.len(),
            });
        }
        if row_labelled {
            row_labels.push(rec.get(0).unwrap_or("").trim().to_string());
        }
        for (j, cell) in rec.iter().enumerate().skip(first_data_col) {
            let v = parse_cell(cell).ok_or_else(|| IoError::NonNumeric {
                line: *line,
                col: j + 1,
                cell: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(IoError::NonFiniteCell {
                    line: *line,
                    col: j + 1,
                    cell: cell.to_string(),
                });
            }
            values.push(v);
        }
    }
    if let Some(labels) = &col_labels {
        if labels.len() != cols {
            return Err(IoError::Ragged {
                line: records[0].0,
                expected: width,
                got: labels.len() + first_data_col,
            });
        }
    }
    let mut m = ResponseMatrix::new(data.len(), cols, values)?;
    if let Some(labels) = col_labels {
        m = m.with_col_labels(labels)?;
    }
    if row_labelled {
        m = m.with_row_labels(row_labels)?;
    }
    Ok(m)
}

/// Writes values in shortest round-trip notation, so a CSV round trip
/// reproduces every value exactly.
pub fn write_csv<W: Write>(m: &ResponseMatrix, w: W) -> Result<(), IoError> {
    let mut writer = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| IoError::Csv(e.to_string());
    let row_labels = m.row_labels();
    if let Some(labels) = m.col_labels() {
        let mut header: Vec<&str> = Vec::with_capacity(labels.len() + 1);
        if row_labels.is_some() {
            header.push("stimulus");
        }
        header.extend(labels.iter().map(String::as_str));
        writer.write_record(&header).map_err(csv_err)?;
    }
    let mut fields: Vec<String> = Vec::with_capacity(m.cols() + 1);
    for i in 0..m.rows() {
        fields.clear();
        if let Some(labels) = row_labels {
            fields.push(labels[i].clone());
        }
        fields.extend(m.row(i).iter().map(|v| format!("{v:?}")));
        writer.write_record(&fields).map_err(csv_err)?;
    }
    writer.flush().map_err(|e| IoError::Csv(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_plain() {
        let m = read_csv("1,2,3\n4,5,6".as_bytes()).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 3));
        assert_eq!(m.values(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert!(m.col_labels().is_none());
    }

    #[test]
    fn csv_header_and_row_labels() {
        let m = read_csv("img,n1,n2\na,1,2\nb,3,4\n".as_bytes()).unwrap();
        assert_eq!(m.values(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.col_labels().unwrap(), &["n1".to_string(), "n2".to_string()]);
        assert_eq!(m.row_labels().unwrap(), &["a".to_string(), "b".to_string()]);
        let mut out = Vec::new();
        write_csv(&m, &mut out).unwrap();
        assert_eq!(read_csv(out.as_slice()).unwrap(), m);
    }

    #[test]
    fn csv_errors_carry_position() {
        match read_csv("1,2\n3,nan\n".as_bytes()) {
            Err(IoError::NonFiniteCell { line: 2, col: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match read_csv("1,2\n3\n".as_bytes()) {
            Err(IoError::Ragged {
                line: 2,
                expected: 2,
                got: 1,
            }) => {}
            other => panic!("{other:?}"),
        }
        match read_csv("1,2\n3,x\n".as_bytes()) {
            Err(IoError::NonNumeric { line: 2, col: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_csv("".as_bytes()), Err(IoError::Empty)));
        assert!(matches!(read_csv("a,b\n".as_bytes()), Err(IoError::Empty)));
    }

    #[test]
    fn binary_layout_is_exact() {
        let m = ResponseMatrix::new(1, 1, vec![0.0]).unwrap();
        let bytes = encode_binary(&m);
        let mut expected = b"NRSM".to_vec();
        expected.extend_from_slice(&1u32.to_le_bytes());
        expected.extend_from_slice(&1u64.to_le_bytes());
        expected.extend_from_slice(&1u64.to_le_bytes());
        expected.extend_from_slice(&0.0f64.to_le_bytes());
        assert_eq!(bytes, expected);
        assert_eq!(decode_binary(&bytes).unwrap(), m);
    }

    #[test]
    fn binary_rejects_corruption() {
        let m = ResponseMatrix::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let bytes = encode_binary(&m);
        assert!(matches!(decode_binary(b"XXXX"), Err(IoError::BadMagic)));
        assert!(matches!(decode_binary(&bytes[..10]), Err(IoError::TruncatedHeader)));
        assert!(matches!(
            decode_binary(&bytes[..bytes.len() - 1]),
            Err(IoError::PayloadSize { .. })
        ));
        let mut v2 = bytes.clone();
        v2[4] = 2;
        assert!(matches!(decode_binary(&v2), Err(IoError::UnsupportedVersion(2))));
        let mut nan = bytes.clone();
        nan[24..32].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(
            decode_binary(&nan),
            Err(IoError::Matrix(nrstat_core::Error::NonFinite { row: 0, col: 0 }))
        ));
    }
}
