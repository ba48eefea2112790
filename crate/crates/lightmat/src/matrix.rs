//! Dense row-major `f64` matrices and the project matrix file formats.
//!
//! Two interchangeable on-disk formats are supported:
//!
//! * **CSV** — one row per line, comma-separated decimal reals.
//! * **Binary** — 8-byte magic `LMHPMAT1`, two little-endian `u64` dims
//!   (rows, cols), then `rows * cols` little-endian `f64` values row-major.
//!
//! Readers auto-detect the format from the magic bytes; writers pick CSV for
//! paths ending in `.csv` and the binary format otherwise.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Magic bytes of the binary matrix format.
pub const MATRIX_MAGIC: &[u8; 8] = b"LMHPMAT1";

/// Dense row-major matrix of finite `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl RealMatrix {
    /// Build a matrix from row-major values, validating shape and finiteness.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidConfig(format!(
                "matrix dimensions must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::ShapeError(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "matrix contains non-finite value {v}"
            )));
        }
        Ok(Self { rows, cols, values })
    }

    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        Ok(m)
    }

    /// Build from a function of `(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                values.push(f(i, j));
            }
        }
        Self::new(rows, cols, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.values[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.values[i * self.cols + j] = v;
    }

    /// Row `i` as a contiguous slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    /// Column `j` copied out.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Plain binary64 reference GEMM (`self * rhs`), row-parallel.
    pub fn matmul(&self, rhs: &RealMatrix) -> Result<RealMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeError(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        use rayon::prelude::*;
        let n = rhs.cols;
        let k_dim = self.cols;
        let mut out = vec![0.0; self.rows * n];
        out.par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, out_row)| {
                // ikj order keeps the inner loop contiguous on both operands.
                let a_row = self.row(i);
                for (k, &aik) in a_row.iter().enumerate().take(k_dim) {
                    let b_row = &rhs.values[k * n..(k + 1) * n];
                    for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                        *o += aik * bkj;
                    }
                }
            });
        RealMatrix::new(self.rows, n, out)
    }

    /// Read a matrix file, auto-detecting binary vs CSV from the magic bytes.
    pub fn read_file(path: &Path) -> Result<Self> {
        let mut file = std::fs::File::open(path)?;
        let mut magic = [0u8; 8];
        let got = read_up_to(&mut file, &mut magic)?;
        if got == 8 && &magic == MATRIX_MAGIC {
            return Self::read_binary_body(&mut BufReader::new(file));
        }
        drop(file);
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text)
    }

    /// Write the matrix; CSV when the path ends in `.csv`, binary otherwise.
    pub fn write_file(&self, path: &Path) -> Result<()> {
        let is_csv = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("csv"))
            .unwrap_or(false);
        let file = std::fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        if is_csv {
            w.write_all(self.to_csv_string().as_bytes())?;
        } else {
            self.write_binary(&mut w)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parse CSV text: one row per line, comma-separated decimals.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        let mut cols = None;
        let mut rows = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut n = 0;
            for field in line.split(',') {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Parse(format!(
                        "line {}: cannot parse '{}' as a real number",
                        lineno + 1,
                        field.trim()
                    ))
                })?;
                values.push(v);
                n += 1;
            }
            match cols {
                None => cols = Some(n),
                Some(c) if c != n => {
                    return Err(Error::Parse(format!(
                        "line {}: expected {} columns, found {}",
                        lineno + 1,
                        c,
                        n
                    )))
                }
                _ => {}
            }
            rows += 1;
        }
        let cols = cols.ok_or_else(|| Error::Parse("matrix file is empty".into()))?;
        Self::new(rows, cols, values)
    }

    /// Render as CSV. `f64` Display is shortest round-trip, so reading the
    /// output back reproduces the matrix exactly.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::new();
        for i in 0..self.rows {
            let row = self.row(i);
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                s.push_str(&v.to_string());
            }
            s.push('\n');
        }
        s
    }

    fn write_binary(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MATRIX_MAGIC)?;
        w.write_all(&(self.rows as u64).to_le_bytes())?;
        w.write_all(&(self.cols as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    fn read_binary_body(r: &mut impl BufRead) -> Result<Self> {
        let mut dims = [0u8; 16];
        r.read_exact(&mut dims)
            .map_err(|_| Error::Parse("binary matrix header truncated".into()))?;
        let rows = u64::from_le_bytes(dims[..8].try_into().unwrap()) as usize;
        let cols = u64::from_le_bytes(dims[8..].try_into().unwrap()) as usize;
        let count = rows.checked_mul(cols).ok_or_else(|| {
            Error::Parse(format!("binary matrix dims overflow: {rows}x{cols}"))
        })?;
        let mut values = Vec::with_capacity(count);
        let mut buf = [0u8; 8];
        for _ in 0..count {
            r.read_exact(&mut buf)
                .map_err(|_| Error::Parse("binary matrix body truncated".into()))?;
            values.push(f64::from_le_bytes(buf));
        }
        Self::new(rows, cols, values)
    }
}

fn read_up_to(r: &mut impl Read, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        let n = r.read(&mut buf[filled..])?;
        if n == 0 {
            break;
        }
        filled += n;
    }
    Ok(filled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(RealMatrix::new(0, 3, vec![]).is_err());
        assert!(RealMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(RealMatrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn matmul_matches_hand_example() {
        let a = RealMatrix::new(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let b = RealMatrix::new(3, 2, vec![7.0, 8.0, 9.0, 10.0, 11.0, 12.0]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.values(), &[58.0, 64.0, 139.0, 154.0]);
    }

    #[test]
    fn matmul_shape_mismatch() {
        let a = RealMatrix::zeros(2, 3).unwrap();
        let b = RealMatrix::zeros(2, 2).unwrap();
        assert!(matches!(a.matmul(&b), Err(Error::ShapeError(_))));
    }

    #[test]
    fn csv_parse_errors() {
        assert!(RealMatrix::from_csv_str("").is_err());
        assert!(RealMatrix::from_csv_str("1,2\n3").is_err());
        assert!(RealMatrix::from_csv_str("1,x").is_err());
    }

    #[test]
    fn binary_round_trip_via_files() {
        let dir = tempfile::tempdir().unwrap();
        let m = RealMatrix::new(2, 3, vec![1.5, -2.25, 3.0, 0.0, 1e-30, 9.9e20]).unwrap();
        let bin = dir.path().join("m.mat");
        let csv = dir.path().join("m.csv");
        m.write_file(&bin).unwrap();
        m.write_file(&csv).unwrap();
        assert_eq!(RealMatrix::read_file(&bin).unwrap(), m);
        assert_eq!(RealMatrix::read_file(&csv).unwrap(), m);
    }

    #[test]
    fn truncated_binary_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.mat");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(MATRIX_MAGIC);
        bytes.extend_from_slice(&3u64.to_le_bytes());
        bytes.extend_from_slice(&3u64.to_le_bytes());
        bytes.extend_from_slice(&1.0f64.to_le_bytes());
        std::fs::write(&path, bytes).unwrap();
        assert!(RealMatrix::read_file(&path).is_err());
    }

    proptest! {
        #[test]
        fn csv_text_round_trips(rows in 1usize..5, cols in 1usize..5, raw in proptest::collection::vec(-1e12f64..1e12, 1..25)) {
            let mut values = vec![0.0; rows * cols];
            for (i, v) in values.iter_mut().enumerate() {
                *v = raw[i % raw.len()];
            }
            let m = RealMatrix::new(rows, cols, values).unwrap();
            let back = RealMatrix::from_csv_str(&m.to_csv_string()).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
