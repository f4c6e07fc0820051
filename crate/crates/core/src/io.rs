//! Binary matrix format and small file helpers.
//!
//! Layout: the 6-byte magic `CISAR1`, `rows` and `cols` as little-endian
//! `u64`, then `rows·cols` complex samples in row-major order, each as two
//! little-endian `f64` (real, imaginary).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::{CMatrix, C64};

pub const MAGIC: &[u8; 6] = b"CISAR1";

pub fn write_matrix_to<W: Write>(m: &CMatrix, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_matrix_from<R: Read>(mut r: R, path: &Path) -> Result<CMatrix> {
    let bad = |msg: String| Error::Format {
        path: path.to_path_buf(),
        msg,
    };
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)
        .map_err(|_| bad("truncated header".into()))?;
    if &magic != MAGIC {
        return Err(bad("missing CISAR1 magic".into()));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word)
        .map_err(|_| bad("truncated header".into()))?;
    let rows = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)
        .map_err(|_| bad("truncated header".into()))?;
    let cols = u64::from_le_bytes(word) as usize;
    let count = rows
        .checked_mul(cols)
        .filter(|c| *c <= (1 << 32))
        .ok_or_else(|| bad(format!("implausible shape {rows}×{cols}")))?;
    let mut data = Vec::with_capacity(count);
    for k in 0..count {
        let mut pair = [0u8; 16];
        r.read_exact(&mut pair)
            .map_err(|_| bad(format!("truncated payload at sample {k} of {count}")))?;
        let re = f64::from_le_bytes(pair[..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(pair[8..].try_into().expect("8 bytes"));
        data.push(C64::new(re, im));
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(bad("trailing bytes after payload".into()));
    }
    Ok(CMatrix::from_row_slice(rows, cols, &data))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_matrix(m: &CMatrix, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    write_matrix_to(m, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<CMatrix> {
    read_matrix_from(BufReader::new(open(path)?), path)
}

/// Sequences are stored as `N × 1` matrices.
pub fn write_sequence(c: &[C64], path: &Path) -> Result<()> {
    write_matrix(&CMatrix::from_column_slice(c.len(), 1, c), path)
}

pub fn read_sequence(path: &Path) -> Result<Vec<C64>> {
    let m = read_matrix(path)?;
    if m.ncols() != 1 && m.nrows() != 1 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            msg: format!(
                "expected a single row or column, found {}×{}",
                m.nrows(),
                m.ncols()
            ),
        });
    }
    Ok(m.iter().cloned().collect())
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(open(path)?))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.bin");
        let m = CMatrix::from_fn(3, 4, |i, j| C64::new(i as f64 - 0.25, j as f64 * 1e-300));
        write_matrix(&m, &p).unwrap();
        assert_eq!(read_matrix(&p).unwrap(), m);
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(bytes.len(), 6 + 16 + 12 * 16);
        assert_eq!(&bytes[..6], b"CISAR1");
        // row-major: the second sample is (0, 1)
        let re = f64::from_le_bytes(bytes[22 + 16..22 + 24].try_into().unwrap());
        assert_eq!(re, -0.25);
    }

    #[test]
    fn rejects_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.bin");
        write_matrix(&CMatrix::zeros(2, 2), &p).unwrap();
        let mut bytes = std::fs::read(&p).unwrap();
        bytes.pop();
        std::fs::write(&p, &bytes).unwrap();
        assert!(matches!(read_matrix(&p), Err(Error::Format { .. })));
        std::fs::write(&p, b"NOTCISAR").unwrap();
        assert!(matches!(read_matrix(&p), Err(Error::Format { .. })));
    }

    #[test]
    fn sequences() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.bin");
        let c = vec![C64::new(1.0, 2.0), C64::new(-3.0, 0.5)];
        write_sequence(&c, &p).unwrap();
        assert_eq!(read_sequence(&p).unwrap(), c);
        write_matrix(&CMatrix::zeros(2, 2), &p).unwrap();
        assert!(read_sequence(&p).is_err());
    }
}
