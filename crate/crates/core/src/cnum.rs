//! Complex double-precision scalar and the real-flop accounting model.
//!
//! [`Cplx`] is a plain pair of `f64` with `#[repr(C)]` layout, so a slice of
//! `Cplx` is bit-compatible with an interleaved `re, im, re, im, ...` array of
//! doubles. All arithmetic is spelled out in real operations so that the flop
//! counts in [`FlopModel`] describe exactly what the kernels execute.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Complex number stored as two contiguous doubles (real part first).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[repr(C)]
pub struct Cplx {
    pub re: f64,
    pub im: f64,
}

pub const ZERO: Cplx = Cplx { re: 0.0, im: 0.0 };
pub const ONE: Cplx = Cplx { re: 1.0, im: 0.0 };
pub const I: Cplx = Cplx { re: 0.0, im: 1.0 };

impl Cplx {
    #[inline]
    pub const fn new(re: f64, im: f64) -> Self {
        Cplx { re, im }
    }

    #[inline]
    pub const fn real(re: f64) -> Self {
        Cplx { re, im: 0.0 }
    }

    /// `exp(i * theta)`.
    #[inline]
    pub fn cis(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Cplx { re: c, im: s }
    }

    #[inline]
    pub fn conj(self) -> Self {
        conj(self)
    }

    #[inline]
    pub fn abs2(self) -> f64 {
        cabs2(self)
    }

    /// Modulus, computed with `hypot` to avoid intermediate overflow.
    #[inline]
    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    #[inline]
    pub fn scale(self, s: f64) -> Self {
        Cplx {
            re: self.re * s,
            im: self.im * s,
        }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    /// Reciprocal via Smith's algorithm.
    #[inline]
    pub fn recip(self) -> Self {
        cdiv(ONE, self)
    }

    /// Little-endian binary encoding: `re` then `im`, 16 bytes.
    pub fn to_le_bytes(self) -> [u8; 16] {
        let mut out = [0u8; 16];
        out[..8].copy_from_slice(&self.re.to_le_bytes());
        out[8..].copy_from_slice(&self.im.to_le_bytes());
        out
    }

    pub fn from_le_bytes(bytes: [u8; 16]) -> Self {
        let mut re = [0u8; 8];
        let mut im = [0u8; 8];
        re.copy_from_slice(&bytes[..8]);
        im.copy_from_slice(&bytes[8..]);
        Cplx {
            re: f64::from_le_bytes(re),
            im: f64::from_le_bytes(im),
        }
    }
}

#[inline]
pub fn cadd(a: Cplx, b: Cplx) -> Cplx {
    Cplx {
        re: a.re + b.re,
        im: a.im + b.im,
    }
}

#[inline]
pub fn csub(a: Cplx, b: Cplx) -> Cplx {
    Cplx {
        re: a.re - b.re,
        im: a.im - b.im,
    }
}

/// Complex product, 6 real flops (4 multiplies, 2 adds).
#[inline]
pub fn cmul(a: Cplx, b: Cplx) -> Cplx {
    Cplx {
        re: a.re * b.re - a.im * b.im,
        im: a.re * b.im + a.im * b.re,
    }
}

#[inline]
pub fn conj(a: Cplx) -> Cplx {
    Cplx {
        re: a.re,
        im: -a.im,
    }
}

/// Squared modulus, 3 real flops.
#[inline]
pub fn cabs2(a: Cplx) -> f64 {
    a.re * a.re + a.im * a.im
}

/// Complex quotient `a / b` using Smith's scaling, which avoids forming
/// `|b|^2` and so stays finite for denominators near the overflow or
/// underflow thresholds.
#[inline]
pub fn cdiv(a: Cplx, b: Cplx) -> Cplx {
    if b.re.abs() >= b.im.abs() {
        if b.re == 0.0 && b.im == 0.0 {
            // 0/0 and x/0 follow IEEE real division componentwise.
            return Cplx {
                re: a.re / b.re,
                im: a.im / b.re,
            };
        }
        let ratio = b.im / b.re;
        let denom = b.re + b.im * ratio;
        Cplx {
            re: (a.re + a.im * ratio) / denom,
            im: (a.im - a.re * ratio) / denom,
        }
    } else {
        let ratio = b.re / b.im;
        let denom = b.re * ratio + b.im;
        Cplx {
            re: (a.re * ratio + a.im) / denom,
            im: (a.im * ratio - a.re) / denom,
        }
    }
}

impl Add for Cplx {
    type Output = Cplx;
    #[inline]
    fn add(self, rhs: Cplx) -> Cplx {
        cadd(self, rhs)
    }
}

impl Sub for Cplx {
    type Output = Cplx;
    #[inline]
    fn sub(self, rhs: Cplx) -> Cplx {
        csub(self, rhs)
    }
}

impl Mul for Cplx {
    type Output = Cplx;
    #[inline]
    fn mul(self, rhs: Cplx) -> Cplx {
        cmul(self, rhs)
    }
}

impl Mul<f64> for Cplx {
    type Output = Cplx;
    #[inline]
    fn mul(self, rhs: f64) -> Cplx {
        self.scale(rhs)
    }
}

impl Div for Cplx {
    type Output = Cplx;
    #[inline]
    fn div(self, rhs: Cplx) -> Cplx {
        cdiv(self, rhs)
    }
}

impl Div<f64> for Cplx {
    type Output = Cplx;
    #[inline]
    fn div(self, rhs: f64) -> Cplx {
        Cplx {
            re: self.re / rhs,
            im: self.im / rhs,
        }
    }
}

impl Neg for Cplx {
    type Output = Cplx;
    #[inline]
    fn neg(self) -> Cplx {
        Cplx {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl AddAssign for Cplx {
    #[inline]
    fn add_assign(&mut self, rhs: Cplx) {
        *self = cadd(*self, rhs);
    }
}

impl SubAssign for Cplx {
    #[inline]
    fn sub_assign(&mut self, rhs: Cplx) {
        *self = csub(*self, rhs);
    }
}

impl MulAssign for Cplx {
    #[inline]
    fn mul_assign(&mut self, rhs: Cplx) {
        *self = cmul(*self, rhs);
    }
}

impl Sum for Cplx {
    fn sum<It: Iterator<Item = Cplx>>(iter: It) -> Cplx {
        iter.fold(ZERO, cadd)
    }
}

impl From<f64> for Cplx {
    fn from(re: f64) -> Self {
        Cplx::real(re)
    }
}

impl From<(f64, f64)> for Cplx {
    fn from((re, im): (f64, f64)) -> Self {
        Cplx { re, im }
    }
}

impl fmt::Display for Cplx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_sign_negative() {
            write!(f, "{}-{}i", self.re, -self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// Operations whose real-flop cost is tracked for Gflops reporting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kernel {
    Assign,
    Scal,
    Axpy,
    Axmy,
    Dot,
    Norm2,
    /// Counted per stored nonzero rather than per vector element.
    Spmv,
}

impl Kernel {
    pub const VECTOR_KERNELS: [Kernel; 6] = [
        Kernel::Assign,
        Kernel::Scal,
        Kernel::Axpy,
        Kernel::Axmy,
        Kernel::Dot,
        Kernel::Norm2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Assign => "zassign",
            Kernel::Scal => "zscal",
            Kernel::Axpy => "zaxpy",
            Kernel::Axmy => "zaxmy",
            Kernel::Dot => "zdot",
            Kernel::Norm2 => "znorm",
            Kernel::Spmv => "spmv",
        }
    }

    pub fn from_name(name: &str) -> Option<Kernel> {
        match name.to_ascii_lowercase().as_str() {
            "zassign" | "assign" => Some(Kernel::Assign),
            "zscal" | "scal" => Some(Kernel::Scal),
            "zaxpy" | "axpy" => Some(Kernel::Axpy),
            "zaxmy" | "axmy" => Some(Kernel::Axmy),
            "zdot" | "dot" => Some(Kernel::Dot),
            "znorm" | "znorm2" | "norm2" | "norm" => Some(Kernel::Norm2),
            "spmv" => Some(Kernel::Spmv),
            _ => None,
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Real flops charged per vector element (or per nonzero for SpMV).
///
/// A complex multiply counts 6 and a complex add 2. The assign kernel is
/// charged 1 per element. These are the only small integers that reproduce
/// the published time/Gflops pairs of all six level-1 kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlopModel {
    pub assign: u64,
    pub scal: u64,
    pub axpy: u64,
    pub axmy: u64,
    pub dot: u64,
    pub norm2: u64,
    pub spmv_per_nz: u64,
}

impl FlopModel {
    pub const STANDARD: FlopModel = FlopModel {
        assign: 1,
        scal: 6,
        axpy: 8,
        axmy: 6,
        dot: 8,
        norm2: 5,
        spmv_per_nz: 8,
    };

    pub fn per_unit(&self, kernel: Kernel) -> u64 {
        match kernel {
            Kernel::Assign => self.assign,
            Kernel::Scal => self.scal,
            Kernel::Axpy => self.axpy,
            Kernel::Axmy => self.axmy,
            Kernel::Dot => self.dot,
            Kernel::Norm2 => self.norm2,
            Kernel::Spmv => self.spmv_per_nz,
        }
    }

    /// Total real flops for one execution over `size` elements (or nonzeros).
    pub fn flops(&self, kernel: Kernel, size: u64) -> f64 {
        self.per_unit(kernel) as f64 * size as f64
    }

    /// Gflops for one execution taking `time_ms` milliseconds.
    pub fn gflops(&self, kernel: Kernel, size: u64, time_ms: f64) -> f64 {
        gflops_from(self.per_unit(kernel), size, time_ms)
    }
}

impl Default for FlopModel {
    fn default() -> Self {
        FlopModel::STANDARD
    }
}

/// `flops_per_unit * size / (time_ms * 1e6)`, the one place the Gflops
/// identity is evaluated.
pub fn gflops_from(flops_per_unit: u64, size: u64, time_ms: f64) -> f64 {
    (flops_per_unit as f64 * size as f64) / (time_ms * 1e6)
}

/// Shortest decimal that parses back to the same double, in scientific
/// notation outside `[1e-5, 1e16)`.
pub fn fmt_shortest(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}
