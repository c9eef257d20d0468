//! Little-endian binary CSR dump:
//! `u64 n, u64 nz, IA (n+1 x u64), JA (nz x u64), AA (nz x (f64 re, f64 im))`.
//! Indices are zero-based. Only square matrices are representable.

use std::io::{Read, Write};

use super::CsrMatrix;
use crate::cnum::Cplx;
use crate::error::{Error, Result};

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_index<R: Read>(r: &mut R) -> Result<usize> {
    usize::try_from(read_u64(r)?).map_err(|_| Error::Format("index does not fit in usize".into()))
}

fn alloc<T>(len: usize) -> Result<Vec<T>> {
    let mut v = Vec::new();
    v.try_reserve_exact(len)
        .map_err(|e| Error::Resource(format!("cannot allocate {len} elements: {e}")))?;
    Ok(v)
}

pub fn write_csr_binary<W: Write>(a: &CsrMatrix, mut w: W) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Format(format!(
            "binary dump requires a square matrix, got {}x{}",
            a.n_rows(),
            a.n_cols()
        )));
    }
    w.write_all(&(a.n() as u64).to_le_bytes())?;
    w.write_all(&(a.nnz() as u64).to_le_bytes())?;
    for &p in a.row_ptr() {
        w.write_all(&(p as u64).to_le_bytes())?;
    }
    for &j in a.col_idx() {
        w.write_all(&(j as u64).to_le_bytes())?;
    }
    for v in a.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a dump and validates every CSR invariant before returning.
pub fn read_csr_binary<R: Read>(mut r: R) -> Result<CsrMatrix> {
    let n = read_index(&mut r)?;
    let nz = read_index(&mut r)?;
    let mut ia = alloc(n.checked_add(1).ok_or_else(|| Error::Format("n overflows".into()))?)?;
    for _ in 0..=n {
        ia.push(read_index(&mut r)?);
    }
    let mut ja = alloc(nz)?;
    for _ in 0..nz {
        ja.push(read_index(&mut r)?);
    }
    let mut aa = alloc(nz)?;
    let mut buf = [0u8; 16];
    for _ in 0..nz {
        r.read_exact(&mut buf)?;
        aa.push(Cplx::from_le_bytes(buf));
    }
    CsrMatrix::from_parts(n, n, ia, ja, aa)
}
