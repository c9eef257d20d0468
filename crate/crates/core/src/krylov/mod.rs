//! Preconditioned Krylov solvers for complex non-Hermitian systems.
//!
//! All three methods are right-preconditioned: they iterate on
//! `A M^{-1} u = b - A x0` and return `x = x0 + M^{-1} u`, so the residual the
//! iteration tracks is the residual of the original system. Convergence is
//! declared on the relative residual `||b - A x|| / ||b||`, and the value
//! stored in [`SolveReport::final_relative_residual`] is always recomputed
//! from the returned `x` with an explicit SpMV, never taken from a recurrence.
//!
//! Inner products use the conjugated dot product with the shadow residual (or
//! the vector being projected onto) in the conjugated slot.

mod bicgstab;
mod bicgstab_l;
mod tfqmr;

pub use bicgstab::solve_bicgstab;
pub use bicgstab_l::solve_bicgstab_l;
pub use tfqmr::solve_tfqmr;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::cnum::{cadd, csub, Cplx};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::vecops::{self, Conjugate, ReductionPlan, ZVector};

/// Magnitudes below this are treated as a breakdown before dividing.
pub const BREAKDOWN_THRESHOLD: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq)]
pub enum InitialGuess {
    Zero,
    Explicit(ZVector),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub initial_guess: InitialGuess,
    /// Degree of the minimal-residual polynomial in BiCGSTAB(l).
    pub l: usize,
    pub plan: ReductionPlan,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-9,
            max_iterations: 1000,
            initial_guess: InitialGuess::Zero,
            l: 8,
            plan: ReductionPlan::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(Error::Parameter(format!(
                "tolerance must be positive and finite, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Parameter("max_iterations must be at least 1".into()));
        }
        if self.l == 0 {
            return Err(Error::Parameter("l must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_relative_residual: f64,
    pub converged: bool,
    /// Relative residual before the first iteration, then one entry per
    /// iteration. The last entry is the recomputed true residual.
    pub residual_history: Vec<f64>,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Preconditioner {
    Identity,
    /// Stores `1 / A[i][i]`.
    Jacobi { inv_diag: Vec<Cplx> },
}

impl Preconditioner {
    /// `dst = M^{-1} src`.
    pub fn apply(&self, src: &[Cplx], dst: &mut [Cplx]) -> Result<()> {
        if src.len() != dst.len() {
            return Err(Error::dim("preconditioner", src.len(), dst.len()));
        }
        match self {
            Preconditioner::Identity => dst.copy_from_slice(src),
            Preconditioner::Jacobi { inv_diag } => {
                if inv_diag.len() != src.len() {
                    return Err(Error::dim("preconditioner", inv_diag.len(), src.len()));
                }
                for ((d, &s), &w) in dst.iter_mut().zip(src).zip(inv_diag) {
                    *d = w * s;
                }
            }
        }
        Ok(())
    }

    pub fn apply_vec(&self, src: &[Cplx]) -> Result<ZVector> {
        let mut out = ZVector::zeros(src.len());
        self.apply(src, &mut out)?;
        Ok(out)
    }

    fn check_compatible(&self, n: usize) -> Result<()> {
        match self {
            Preconditioner::Identity => Ok(()),
            Preconditioner::Jacobi { inv_diag } if inv_diag.len() == n => Ok(()),
            Preconditioner::Jacobi { inv_diag } => {
                Err(Error::dim("preconditioner", n, inv_diag.len()))
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preconditioner::Identity => "identity",
            Preconditioner::Jacobi { .. } => "jacobi",
        }
    }
}

/// Inverse-diagonal preconditioner. Fails on the first row whose diagonal is
/// zero or absent from the pattern.
pub fn build_jacobi(a: &CsrMatrix) -> Result<Preconditioner> {
    if !a.is_square() {
        return Err(Error::dim("build_jacobi", a.n_rows(), a.n_cols()));
    }
    let diag = a.diagonal();
    let mut inv_diag = Vec::with_capacity(diag.len());
    for (row, d) in diag.into_iter().enumerate() {
        if d.is_zero() {
            return Err(Error::SingularPreconditioner { row });
        }
        inv_diag.push(d.recip());
    }
    Ok(Preconditioner::Jacobi { inv_diag })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    BiCgStab,
    BiCgStabL,
    Tfqmr,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::BiCgStab, Method::BiCgStabL, Method::Tfqmr];

    pub fn name(self) -> &'static str {
        match self {
            Method::BiCgStab => "bicgstab",
            Method::BiCgStabL => "bicgstab_l",
            Method::Tfqmr => "tfqmr",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bicgstab" => Ok(Method::BiCgStab),
            "bicgstab_l" | "bicgstabl" | "bicgstab(l)" => Ok(Method::BiCgStabL),
            "tfqmr" => Ok(Method::Tfqmr),
            other => Err(Error::Parameter(format!("unknown method '{other}'"))),
        }
    }
}

pub fn solve(
    method: Method,
    a: &CsrMatrix,
    b: &[Cplx],
    m: &Preconditioner,
    cfg: &SolverConfig,
) -> Result<(ZVector, SolveReport)> {
    match method {
        Method::BiCgStab => solve_bicgstab(a, b, m, cfg),
        Method::BiCgStabL => solve_bicgstab_l(a, b, m, cfg),
        Method::Tfqmr => solve_tfqmr(a, b, m, cfg),
    }
}

/// State shared by every solver: the operator, the preconditioner, the
/// right-hand side and the bookkeeping that turns an iterate in the
/// preconditioned space into a checked solution.
pub(crate) struct Workspace<'a> {
    method: &'static str,
    a: &'a CsrMatrix,
    m: &'a Preconditioner,
    b: &'a [Cplx],
    x0: Option<&'a [Cplx]>,
    pub plan: ReductionPlan,
    pub tol: f64,
    pub max_iterations: usize,
    b_norm: f64,
    started: Instant,
    pub history: Vec<f64>,
    tmp: ZVector,
    x_buf: ZVector,
    r_buf: ZVector,
}

/// Result of the setup phase.
pub(crate) enum Start<'a> {
    /// Nothing to iterate: the initial guess (or zero for `b = 0`) is final.
    Done(ZVector, SolveReport),
    Iterate(Workspace<'a>, ZVector),
}

impl<'a> Workspace<'a> {
    /// Validates inputs and computes the initial residual `b - A x0`.
    pub fn start(
        method: &'static str,
        a: &'a CsrMatrix,
        b: &'a [Cplx],
        m: &'a Preconditioner,
        cfg: &'a SolverConfig,
    ) -> Result<Start<'a>> {
        let started = Instant::now();
        cfg.validate()?;
        if !a.is_square() {
            return Err(Error::dim(method, a.n_rows(), a.n_cols()));
        }
        let n = a.n();
        if b.len() != n {
            return Err(Error::dim(method, n, b.len()));
        }
        m.check_compatible(n)?;
        let x0 = match &cfg.initial_guess {
            InitialGuess::Zero => None,
            InitialGuess::Explicit(x0) => {
                if x0.len() != n {
                    return Err(Error::dim(method, n, x0.len()));
                }
                Some(x0.as_slice())
            }
        };
        let b_norm = vecops::znorm2(b, &cfg.plan);

        let mut ws = Workspace {
            method,
            a,
            m,
            b,
            x0,
            plan: cfg.plan,
            tol: cfg.tolerance,
            max_iterations: cfg.max_iterations,
            b_norm,
            started,
            history: Vec::new(),
            tmp: ZVector::zeros(n),
            x_buf: ZVector::zeros(n),
            r_buf: ZVector::zeros(n),
        };

        if b_norm == 0.0 {
            // x = 0 solves the system exactly
            let report = SolveReport {
                iterations: 0,
                final_relative_residual: 0.0,
                converged: true,
                residual_history: vec![0.0],
                elapsed_ms: ws.elapsed_ms(),
            };
            return Ok(Start::Done(ZVector::zeros(n), report));
        }

        let r0 = match x0 {
            None => ZVector::from(b.to_vec()),
            Some(x0) => {
                let mut r = ZVector::zeros(n);
                a.spmv_into(x0, &mut r)?;
                for (ri, &bi) in r.iter_mut().zip(b) {
                    *ri = csub(bi, *ri);
                }
                r
            }
        };
        let rel0 = ws.norm(&r0) / b_norm;
        if !rel0.is_finite() {
            return Err(Error::Parameter("initial residual is not finite".into()));
        }
        ws.history.push(rel0);
        if rel0 <= ws.tol {
            let (x, report) = ws.finish(&ZVector::zeros(n), 0);
            return Ok(Start::Done(x, report));
        }
        Ok(Start::Iterate(ws, r0))
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn b_norm(&self) -> f64 {
        self.b_norm
    }

    /// `<x, y>` with `x` conjugated.
    pub fn dot(&self, x: &[Cplx], y: &[Cplx]) -> Cplx {
        vecops::zdot(x, y, Conjugate::Yes, &self.plan).expect("workspace vectors share one length")
    }

    pub fn norm(&self, x: &[Cplx]) -> f64 {
        vecops::znorm2(x, &self.plan)
    }

    /// `out = A M^{-1} v`.
    pub fn op(&mut self, v: &[Cplx], out: &mut [Cplx]) {
        self.m
            .apply(v, &mut self.tmp)
            .expect("preconditioner checked at start");
        self.a
            .spmv_into(&self.tmp, out)
            .expect("operator checked at start");
    }

    /// `x = x0 + M^{-1} u` into `x_buf`, then the true relative residual.
    pub fn true_residual(&mut self, u: &[Cplx]) -> f64 {
        self.m
            .apply(u, &mut self.x_buf)
            .expect("preconditioner checked at start");
        if let Some(x0) = self.x0 {
            for (xi, &x0i) in self.x_buf.iter_mut().zip(x0) {
                *xi = cadd(x0i, *xi);
            }
        }
        self.a
            .spmv_into(&self.x_buf, &mut self.r_buf)
            .expect("operator checked at start");
        for (ri, &bi) in self.r_buf.iter_mut().zip(self.b) {
            *ri = csub(bi, *ri);
        }
        vecops::znorm2(&self.r_buf, &self.plan) / self.b_norm
    }

    /// Residual vector from the last [`Workspace::true_residual`] call.
    pub fn last_true_residual(&self) -> &[Cplx] {
        &self.r_buf
    }

    fn elapsed_ms(&self) -> f64 {
        self.started.elapsed().as_secs_f64() * 1e3
    }

    /// Builds the returned solution and report. Solvers keep one history
    /// entry per completed iteration; the last entry is overwritten with the
    /// true residual of the returned `x`.
    pub fn finish(&mut self, u: &[Cplx], iterations: usize) -> (ZVector, SolveReport) {
        debug_assert_eq!(self.history.len(), iterations + 1);
        let rel = self.true_residual(u);
        if let Some(last) = self.history.last_mut() {
            *last = rel;
        }
        let report = SolveReport {
            iterations,
            final_relative_residual: rel,
            converged: rel <= self.tol,
            residual_history: std::mem::take(&mut self.history),
            elapsed_ms: self.elapsed_ms(),
        };
        (self.x_buf.clone(), report)
    }

    pub fn breakdown(
        &mut self,
        u: &[Cplx],
        iterations: usize,
        quantity: &'static str,
        value: f64,
    ) -> Error {
        let (_, report) = self.finish(u, iterations);
        Error::Breakdown {
            method: self.method,
            quantity,
            value,
            report: Box::new(report),
        }
    }
}

/// `y -= alpha * x`.
#[inline]
pub(crate) fn sub_scaled(alpha: Cplx, x: &[Cplx], y: &mut [Cplx]) {
    vecops::zaxpy(-alpha, x, y).expect("workspace vectors share one length");
}

/// `y += alpha * x`.
#[inline]
pub(crate) fn add_scaled(alpha: Cplx, x: &[Cplx], y: &mut [Cplx]) {
    vecops::zaxpy(alpha, x, y).expect("workspace vectors share one length");
}

#[inline]
pub(crate) fn tiny(z: Cplx) -> bool {
    !(z.abs() >= BREAKDOWN_THRESHOLD)
}
