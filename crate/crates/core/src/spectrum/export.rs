//! Spectrum CSV and the binary eigenvector format.
//!
//! Eigenvector files are little-endian:
//!
//! ```text
//! offset  size        content
//! 0       8           magic b"NHQCVEC1"
//! 8       8           rows (u64)
//! 16      8           cols (u64)
//! 24      16*rows*cols column-major entries, each (re: f64, im: f64)
//! ```

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use faer::Mat;
use num_complex::Complex64 as C64;

use super::SpectralDecomposition;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"NHQCVEC1";

/// `index,re_e,im_e` rows in sorted order.
pub fn spectrum_csv(dec: &SpectralDecomposition) -> String {
    let mut out = String::from("index,re_e,im_e\n");
    for (j, e) in dec.eigenvalues.iter().enumerate() {
        let _ = writeln!(out, "{j},{:e},{:e}", e.re, e.im);
    }
    out
}

pub fn write_spectrum_csv(dec: &SpectralDecomposition, path: &Path) -> Result<()> {
    fs::write(path, spectrum_csv(dec)).map_err(|e| Error::io(path, e))
}

pub fn write_eigenvectors(vectors: &Mat<C64>, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| Error::io(path, e));
    put(MAGIC)?;
    put(&(vectors.nrows() as u64).to_le_bytes())?;
    put(&(vectors.ncols() as u64).to_le_bytes())?;
    for c in 0..vectors.ncols() {
        for r in 0..vectors.nrows() {
            let z = vectors[(r, c)];
            put(&z.re.to_le_bytes())?;
            put(&z.im.to_le_bytes())?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_eigenvectors(path: &Path) -> Result<Mat<C64>> {
    let mut bytes = Vec::new();
    fs::File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(|e| Error::io(path, e))?;
    let bad = |why: &str| Error::InvalidSpec(format!("{}: {why}", path.display()));
    if bytes.len() < 24 || &bytes[..8] != MAGIC {
        return Err(bad("not an eigenvector file"));
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let (rows, cols) = (word(8) as usize, word(16) as usize);
    if bytes.len() != 24 + 16 * rows * cols {
        return Err(bad("truncated payload"));
    }
    let f = |at: usize| f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    Ok(Mat::from_fn(rows, cols, |r, c| {
        let at = 24 + 16 * (c * rows + r);
        C64::new(f(at), f(at + 8))
    }))
}
