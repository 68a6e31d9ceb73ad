//! Binary matrix dump: 64-byte header (magic, rows, cols, tag) + row-major complex128.

use std::io::{Read, Write};
use std::path::Path;

use faer::Mat;

use crate::error::{Error, Result};
use crate::spinor::C64;

pub const MATRIX_MAGIC: &[u8; 8] = b"DBIEMATX";

pub fn write_matrix(path: &Path, mat: &Mat<C64>, tag: &str) -> Result<()> {
    let mut buf = Vec::with_capacity(64 + 16 * mat.nrows() * mat.ncols());
    buf.extend_from_slice(MATRIX_MAGIC);
    buf.extend_from_slice(&(mat.nrows() as u64).to_le_bytes());
    buf.extend_from_slice(&(mat.ncols() as u64).to_le_bytes());
    let mut t = [0u8; 40];
    let tb = tag.as_bytes();
    let n = tb.len().min(40);
    t[..n].copy_from_slice(&tb[..n]);
    buf.extend_from_slice(&t);
    for i in 0..mat.nrows() {
        for j in 0..mat.ncols() {
            let z = mat[(i, j)];
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    std::fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<(Mat<C64>, String)> {
    let mut buf = vec![];
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.len() < 64 || &buf[..8] != MATRIX_MAGIC {
        return Err(Error::Validation("not a matrix dump".into()));
    }
    let u = |o: usize| u64::from_le_bytes(buf[o..o + 8].try_into().unwrap()) as usize;
    let (rows, cols) = (u(8), u(16));
    let tag = String::from_utf8_lossy(&buf[24..64]).trim_end_matches('\0').to_string();
    if buf.len() != 64 + 16 * rows * cols {
        return Err(Error::Validation("matrix dump has wrong length".into()));
    }
    let f = |o: usize| f64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
    let mat = Mat::from_fn(rows, cols, |i, j| {
        let o = 64 + 16 * (i * cols + j);
        C64::new(f(o), f(o + 8))
    });
    Ok((mat, tag))
}
