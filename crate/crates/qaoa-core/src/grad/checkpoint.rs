//! Versioned text dump for named parameter tensors.
//!
//! Layout: a `tensordump v1` magic line, the tensor count, then for each
//! tensor a `name rows cols` header followed by one whitespace-separated
//! line per row. Values use shortest round-trip scientific notation, so a
//! dump reloads bit-exactly.

use ndarray::Array2;
use std::io::{self, BufRead, Write};
use thiserror::Error;

const MAGIC: &str = "tensordump v1";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic line {found:?}, expected {expected:?}")]
    BadMagic { found: String, expected: &'static str },
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
}

pub fn write_tensors<W: Write>(w: &mut W, tensors: &[(String, Array2<f64>)]) -> io::Result<()> {
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "{}", tensors.len())?;
    for (name, t) in tensors {
        writeln!(w, "{name} {} {}", t.nrows(), t.ncols())?;
        for row in t.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
    }
    Ok(())
}

pub fn read_tensors<R: BufRead>(r: &mut R) -> Result<Vec<(String, Array2<f64>)>, CheckpointError> {
    let mut lines = r.lines();
    let mut next = || -> Result<String, CheckpointError> {
        lines
            .next()
            .ok_or_else(|| CheckpointError::Malformed("unexpected end of file".into()))?
            .map_err(CheckpointError::Io)
    };
    let magic = next()?;
    if magic.trim() != MAGIC {
        return Err(CheckpointError::BadMagic { found: magic, expected: MAGIC });
    }
    let count: usize = next()?
        .trim()
        .parse()
        .map_err(|e| CheckpointError::Malformed(format!("tensor count: {e}")))?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let header = next()?;
        let mut it = header.split_whitespace();
        let name = it
            .next()
            .ok_or_else(|| CheckpointError::Malformed("missing tensor name".into()))?
            .to_string();
        let rows: usize = it
            .next()
            .ok_or_else(|| CheckpointError::Malformed("missing row count".into()))?
            .parse()
            .map_err(|e| CheckpointError::Malformed(format!("rows: {e}")))?;
        let cols: usize = it
            .next()
            .ok_or_else(|| CheckpointError::Malformed("missing col count".into()))?
            .parse()
            .map_err(|e| CheckpointError::Malformed(format!("cols: {e}")))?;
        let mut data = Array2::zeros((rows, cols));
        for i in 0..rows {
            let line = next()?;
            let mut vals = line.split_whitespace();
            for j in 0..cols {
                let tok = vals
                    .next()
                    .ok_or_else(|| CheckpointError::Malformed(format!("{name}: row {i} too short")))?;
                data[[i, j]] = tok
                    .parse()
                    .map_err(|e| CheckpointError::Malformed(format!("{name}[{i},{j}]: {e}")))?;
            }
        }
        out.push((name, data));
    }
    Ok(out)
}

pub fn save_tensors(path: &std::path::Path, tensors: &[(String, Array2<f64>)]) -> Result<(), CheckpointError> {
    let mut file = io::BufWriter::new(std::fs::File::create(path)?);
    write_tensors(&mut file, tensors)?;
    Ok(())
}

pub fn load_tensors(path: &std::path::Path) -> Result<Vec<(String, Array2<f64>)>, CheckpointError> {
    let mut file = io::BufReader::new(std::fs::File::open(path)?);
    read_tensors(&mut file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn round_trip_is_bit_exact() {
        let tensors = vec![
            ("w0".to_string(), array![[1.0, -2.5e-17], [f64::MIN_POSITIVE, 3.0]]),
            ("b0".to_string(), array![[0.1234567890123456789]]),
        ];
        let mut buf = Vec::new();
        write_tensors(&mut buf, &tensors).unwrap();
        let back = read_tensors(&mut buf.as_slice()).unwrap();
        assert_eq!(tensors.len(), back.len());
        for ((n1, t1), (n2, t2)) in tensors.iter().zip(&back) {
            assert_eq!(n1, n2);
            assert_eq!(t1, t2);
        }
    }

    #[test]
    fn rejects_wrong_version() {
        let text = b"tensordump v999\n0\n";
        assert!(matches!(
            read_tensors(&mut text.as_slice()),
            Err(CheckpointError::BadMagic { .. })
        ));
    }

    #[test]
    fn rejects_truncated_file() {
        let text = b"tensordump v1\n1\nw 2 2\n1.0 2.0\n";
        assert!(matches!(
            read_tensors(&mut text.as_slice()),
            Err(CheckpointError::Malformed(_))
        ));
    }
}
