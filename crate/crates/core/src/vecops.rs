//! Level-1 complex vector kernels.
//!
//! The kernels mutate their last operand in place, as BLAS does (`zaxpy`
//! overwrites `y`, `zscal` overwrites `x`). Pure variants that return a fresh
//! vector live alongside them for call sites that want value semantics.
//!
//! Dot products and norms go through a [`ReductionPlan`]. In blocked mode the
//! input is split into fixed-size blocks, each block is summed left to right
//! (possibly on different threads), and the partial sums are then added in
//! ascending block order. The summation tree depends only on the block size,
//! never on the thread count, so results are reproducible run to run.

use std::io::{Read, Write};
use std::ops::{Deref, DerefMut, Index, IndexMut};

use rayon::prelude::*;

use crate::cnum::{cabs2, cadd, cmul, conj, Cplx, ZERO};
use crate::error::{Error, Result};

/// Elementwise kernels switch to rayon above this length.
const PAR_MIN_LEN: usize = 1 << 15;
const PAR_CHUNK: usize = 1 << 13;

/// Dense complex vector.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ZVector {
    data: Vec<Cplx>,
}

impl ZVector {
    pub fn zeros(len: usize) -> Self {
        ZVector {
            data: vec![ZERO; len],
        }
    }

    pub fn filled(len: usize, value: Cplx) -> Self {
        ZVector {
            data: vec![value; len],
        }
    }

    pub fn from_vec(data: Vec<Cplx>) -> Self {
        ZVector { data }
    }

    pub fn from_fn(len: usize, f: impl FnMut(usize) -> Cplx) -> Self {
        ZVector {
            data: (0..len).map(f).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Cplx] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Cplx] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Cplx> {
        self.data
    }

    /// Writes `u64 len` followed by `len` little-endian `(re, im)` pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.data.len() as u64).to_le_bytes())?;
        for z in &self.data {
            w.write_all(&z.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut len = [0u8; 8];
        r.read_exact(&mut len)?;
        let len = usize::try_from(u64::from_le_bytes(len))
            .map_err(|_| Error::Format("vector length does not fit in memory".into()))?;
        let mut data = Vec::new();
        data.try_reserve_exact(len)
            .map_err(|e| Error::Resource(format!("cannot allocate {len} elements: {e}")))?;
        let mut buf = [0u8; 16];
        for _ in 0..len {
            r.read_exact(&mut buf)?;
            data.push(Cplx::from_le_bytes(buf));
        }
        Ok(ZVector { data })
    }
}

impl Deref for ZVector {
    type Target = [Cplx];
    fn deref(&self) -> &[Cplx] {
        &self.data
    }
}

impl DerefMut for ZVector {
    fn deref_mut(&mut self) -> &mut [Cplx] {
        &mut self.data
    }
}

impl Index<usize> for ZVector {
    type Output = Cplx;
    fn index(&self, i: usize) -> &Cplx {
        &self.data[i]
    }
}

impl IndexMut<usize> for ZVector {
    fn index_mut(&mut self, i: usize) -> &mut Cplx {
        &mut self.data[i]
    }
}

impl From<Vec<Cplx>> for ZVector {
    fn from(data: Vec<Cplx>) -> Self {
        ZVector { data }
    }
}

impl FromIterator<Cplx> for ZVector {
    fn from_iter<T: IntoIterator<Item = Cplx>>(iter: T) -> Self {
        ZVector {
            data: iter.into_iter().collect(),
        }
    }
}

/// Whether the first operand of a dot product is conjugated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conjugate {
    /// `sum(conj(x[i]) * y[i])`, BLAS zdotc.
    Yes,
    /// `sum(x[i] * y[i])`, BLAS zdotu.
    No,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionMode {
    /// A single left-to-right loop.
    Sequential,
    /// Per-block partial sums, then a sequential pass over the partials.
    Blocked,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReductionPlan {
    block_size: usize,
    mode: ReductionMode,
}

impl ReductionPlan {
    pub const MIN_BLOCK: usize = 64;
    pub const MAX_BLOCK: usize = 65536;
    pub const DEFAULT_BLOCK: usize = 4096;

    /// `block_size` must be a power of two in `[64, 65536]`.
    pub fn blocked(block_size: usize) -> Result<Self> {
        if !block_size.is_power_of_two()
            || !(Self::MIN_BLOCK..=Self::MAX_BLOCK).contains(&block_size)
        {
            return Err(Error::Parameter(format!(
                "reduction block size {block_size} must be a power of two in [{}, {}]",
                Self::MIN_BLOCK,
                Self::MAX_BLOCK
            )));
        }
        Ok(ReductionPlan {
            block_size,
            mode: ReductionMode::Blocked,
        })
    }

    pub const fn sequential() -> Self {
        ReductionPlan {
            block_size: Self::DEFAULT_BLOCK,
            mode: ReductionMode::Sequential,
        }
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn mode(&self) -> ReductionMode {
        self.mode
    }

    fn reduce<T, F, G>(&self, len: usize, zero: T, partial: F, combine: G) -> T
    where
        T: Copy + Send + Sync,
        F: Fn(std::ops::Range<usize>) -> T + Sync,
        G: Fn(T, T) -> T,
    {
        match self.mode {
            ReductionMode::Sequential => partial(0..len),
            ReductionMode::Blocked => {
                let nblocks = len.div_ceil(self.block_size);
                let bs = self.block_size;
                let partials: Vec<T> = if len >= PAR_MIN_LEN {
                    (0..nblocks)
                        .into_par_iter()
                        .map(|b| partial(b * bs..((b + 1) * bs).min(len)))
                        .collect()
                } else {
                    (0..nblocks)
                        .map(|b| partial(b * bs..((b + 1) * bs).min(len)))
                        .collect()
                };
                partials.into_iter().fold(zero, combine)
            }
        }
    }
}

impl Default for ReductionPlan {
    fn default() -> Self {
        ReductionPlan {
            block_size: Self::DEFAULT_BLOCK,
            mode: ReductionMode::Blocked,
        }
    }
}

fn check_len(op: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::dim(op, expected, found));
    }
    Ok(())
}

fn for_each_mut(y: &mut [Cplx], f: impl Fn(usize, &mut Cplx) + Sync + Send) {
    if y.len() >= PAR_MIN_LEN {
        y.par_chunks_mut(PAR_CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| {
                let base = c * PAR_CHUNK;
                for (k, v) in chunk.iter_mut().enumerate() {
                    f(base + k, v);
                }
            });
    } else {
        for (i, v) in y.iter_mut().enumerate() {
            f(i, v);
        }
    }
}

/// `dst[i] = src[i]`.
pub fn zassign(dst: &mut [Cplx], src: &[Cplx]) -> Result<()> {
    check_len("zassign", dst.len(), src.len())?;
    if dst.len() >= PAR_MIN_LEN {
        dst.par_chunks_mut(PAR_CHUNK)
            .zip(src.par_chunks(PAR_CHUNK))
            .for_each(|(d, s)| d.copy_from_slice(s));
    } else {
        dst.copy_from_slice(src);
    }
    Ok(())
}

/// `x[i] = alpha * x[i]`.
pub fn zscal(alpha: Cplx, x: &mut [Cplx]) {
    for_each_mut(x, |_, v| *v = cmul(alpha, *v));
}

/// `y[i] = alpha * x[i] + y[i]`.
pub fn zaxpy(alpha: Cplx, x: &[Cplx], y: &mut [Cplx]) -> Result<()> {
    check_len("zaxpy", x.len(), y.len())?;
    for_each_mut(y, |i, v| *v = cadd(cmul(alpha, x[i]), *v));
    Ok(())
}

/// `y[i] = x[i] * y[i]`.
pub fn zaxmy(x: &[Cplx], y: &mut [Cplx]) -> Result<()> {
    check_len("zaxmy", x.len(), y.len())?;
    for_each_mut(y, |i, v| *v = cmul(x[i], *v));
    Ok(())
}

/// `y[i] = x[i] + beta * y[i]`. Used for the search-direction updates of the
/// Krylov recurrences.
pub fn zxpby(x: &[Cplx], beta: Cplx, y: &mut [Cplx]) -> Result<()> {
    check_len("zxpby", x.len(), y.len())?;
    for_each_mut(y, |i, v| *v = cadd(x[i], cmul(beta, *v)));
    Ok(())
}

/// Dot product with optional conjugation of `x`.
pub fn zdot(x: &[Cplx], y: &[Cplx], conjugate: Conjugate, plan: &ReductionPlan) -> Result<Cplx> {
    check_len("zdot", x.len(), y.len())?;
    let sum = match conjugate {
        Conjugate::Yes => plan.reduce(
            x.len(),
            ZERO,
            |r| {
                let mut acc = ZERO;
                for i in r {
                    acc = cadd(acc, cmul(conj(x[i]), y[i]));
                }
                acc
            },
            cadd,
        ),
        Conjugate::No => plan.reduce(
            x.len(),
            ZERO,
            |r| {
                let mut acc = ZERO;
                for i in r {
                    acc = cadd(acc, cmul(x[i], y[i]));
                }
                acc
            },
            cadd,
        ),
    };
    Ok(sum)
}

/// Euclidean norm `sqrt(sum |x[i]|^2)`.
pub fn znorm2(x: &[Cplx], plan: &ReductionPlan) -> f64 {
    plan.reduce(
        x.len(),
        0.0,
        |r| {
            let mut acc = 0.0;
            for i in r {
                acc += cabs2(x[i]);
            }
            acc
        },
        |a, b| a + b,
    )
    .sqrt()
}

/// Value-returning wrappers around the in-place kernels.
pub mod pure {
    use super::*;

    pub fn scal(alpha: Cplx, x: &ZVector) -> ZVector {
        let mut out = x.clone();
        zscal(alpha, &mut out);
        out
    }

    pub fn axpy(alpha: Cplx, x: &ZVector, y: &ZVector) -> Result<ZVector> {
        check_len("zaxpy", x.len(), y.len())?;
        let mut out = y.clone();
        zaxpy(alpha, x, &mut out)?;
        Ok(out)
    }

    pub fn axmy(x: &ZVector, y: &ZVector) -> Result<ZVector> {
        check_len("zaxmy", x.len(), y.len())?;
        let mut out = y.clone();
        zaxmy(x, &mut out)?;
        Ok(out)
    }
}
