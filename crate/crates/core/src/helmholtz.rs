//! Finite-difference Helmholtz systems on boxes.
//!
//! `-lap(u) - k^2 u = g` on `[0, L]^dim` with Dirichlet data on the whole
//! boundary, discretised by the second-order `2*dim + 1` point stencil on a
//! uniform grid of `cells_per_axis` cells per axis. Unknowns are the interior
//! nodes in lexicographic order (x fastest); boundary values are moved to the
//! right-hand side.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::cnum::{Cplx, ZERO};
use crate::error::{Error, Result};
use crate::sparse::{CooMatrix, CsrMatrix};
use crate::vecops::ZVector;

pub type Point = [f64; 3];

/// A complex-valued function of position, or a constant.
#[derive(Clone)]
pub enum Field {
    Constant(Cplx),
    Function(Arc<dyn Fn(Point) -> Cplx + Send + Sync>),
}

impl Field {
    pub fn function(f: impl Fn(Point) -> Cplx + Send + Sync + 'static) -> Self {
        Field::Function(Arc::new(f))
    }

    pub fn eval(&self, p: Point) -> Cplx {
        match self {
            Field::Constant(c) => *c,
            Field::Function(f) => f(p),
        }
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Constant(c) => write!(f, "Constant({c})"),
            Field::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// Sound speed as a function of position, overriding the uniform velocity.
pub type VelocityField = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct HelmholtzProblem {
    pub dim: usize,
    pub cells_per_axis: usize,
    /// Edge length of the box, meters.
    pub domain_length: f64,
    /// Hz.
    pub frequency: f64,
    /// m/s.
    pub velocity: f64,
    pub dirichlet: Field,
    pub source: Field,
    pub velocity_field: Option<VelocityField>,
}

impl fmt::Debug for HelmholtzProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HelmholtzProblem")
            .field("dim", &self.dim)
            .field("cells_per_axis", &self.cells_per_axis)
            .field("domain_length", &self.domain_length)
            .field("frequency", &self.frequency)
            .field("velocity", &self.velocity)
            .field("dirichlet", &self.dirichlet)
            .field("source", &self.source)
            .field("velocity_field", &self.velocity_field.as_ref().map(|_| ".."))
            .finish()
    }
}

impl HelmholtzProblem {
    /// Unit box, zero boundary data, unit source, speed of sound in air.
    pub fn new(dim: usize, cells_per_axis: usize, frequency: f64) -> Self {
        HelmholtzProblem {
            dim,
            cells_per_axis,
            domain_length: 1.0,
            frequency,
            velocity: 343.0,
            dirichlet: Field::Constant(ZERO),
            source: Field::Constant(Cplx::real(1.0)),
            velocity_field: None,
        }
    }

    /// Sets the frequency so that the uniform wavenumber equals `k`.
    pub fn with_wavenumber(mut self, k: f64) -> Self {
        self.frequency = k * self.velocity / (2.0 * PI);
        self
    }

    /// `k = 2 pi F / c`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI * self.frequency / self.velocity
    }

    pub fn wavelength(&self) -> f64 {
        self.velocity / self.frequency
    }

    fn wavenumber_at(&self, p: Point) -> f64 {
        match &self.velocity_field {
            None => self.wavenumber(),
            Some(c) => 2.0 * PI * self.frequency / c(p),
        }
    }

    pub fn spacing(&self) -> f64 {
        self.domain_length / self.cells_per_axis as f64
    }

    /// Interior nodes per axis.
    pub fn interior_per_axis(&self) -> usize {
        self.cells_per_axis.saturating_sub(1)
    }

    pub fn n_unknowns(&self) -> usize {
        self.interior_per_axis().pow(self.dim as u32)
    }

    /// Grid index triple of unknown `idx`, each in `1..=interior_per_axis`.
    fn node_index(&self, idx: usize) -> [usize; 3] {
        let m = self.interior_per_axis();
        let mut out = [0usize; 3];
        let mut rest = idx;
        for slot in out.iter_mut().take(self.dim) {
            *slot = rest % m + 1;
            rest /= m;
        }
        out
    }

    fn coords(&self, node: [usize; 3]) -> Point {
        let h = self.spacing();
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            p[a] = node[a] as f64 * h;
        }
        p
    }

    /// Physical position of unknown `idx`.
    pub fn node_coords(&self, idx: usize) -> Point {
        self.coords(self.node_index(idx))
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::Parameter(format!("dim must be 1, 2 or 3, got {}", self.dim)));
        }
        if self.cells_per_axis < 3 {
            return Err(Error::Parameter(format!(
                "cells_per_axis must be at least 3, got {}",
                self.cells_per_axis
            )));
        }
        if !(self.domain_length > 0.0 && self.domain_length.is_finite()) {
            return Err(Error::Parameter(format!(
                "domain_length must be positive, got {}",
                self.domain_length
            )));
        }
        if !(self.velocity > 0.0 && self.velocity.is_finite()) {
            return Err(Error::Parameter(format!(
                "velocity must be positive, got {}",
                self.velocity
            )));
        }
        if !(self.frequency >= 0.0) || !self.wavenumber().is_finite() {
            return Err(Error::Parameter(format!(
                "frequency must be non-negative with a finite wavenumber, got {}",
                self.frequency
            )));
        }
        Ok(())
    }

    /// Parses `key = value` lines. Keys: `dim`, `cells`, `length`,
    /// `frequency` or `wavelength` or `wavenumber`, `velocity`,
    /// `dirichlet_re`, `dirichlet_im`, `source_re`, `source_im`.
    /// `#` starts a comment.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut p = HelmholtzProblem::new(3, 8, 0.0);
        let mut dirichlet = Cplx::new(0.0, 0.0);
        let mut source = Cplx::new(1.0, 0.0);
        enum Freq {
            Hz(f64),
            Wavelength(f64),
            Wavenumber(f64),
        }
        let mut freq = None;
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(line_no, format!("expected key=value, got '{line}'")))?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            let real = || -> Result<f64> {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::parse(line_no, format!("invalid number '{value}' for {key}")))
            };
            let int = || -> Result<usize> {
                value
                    .parse::<usize>()
                    .map_err(|_| Error::parse(line_no, format!("invalid integer '{value}' for {key}")))
            };
            match key.as_str() {
                "dim" => p.dim = int()?,
                "cells" | "cells_per_axis" => p.cells_per_axis = int()?,
                "length" | "domain_length" => p.domain_length = real()?,
                "velocity" => p.velocity = real()?,
                "frequency" => freq = Some(Freq::Hz(real()?)),
                "wavelength" => freq = Some(Freq::Wavelength(real()?)),
                "wavenumber" | "k" => freq = Some(Freq::Wavenumber(real()?)),
                "dirichlet_re" => dirichlet.re = real()?,
                "dirichlet_im" => dirichlet.im = real()?,
                "source_re" => source.re = real()?,
                "source_im" => source.im = real()?,
                other => return Err(Error::parse(line_no, format!("unknown key '{other}'"))),
            }
        }
        p.frequency = match freq {
            None => 0.0,
            Some(Freq::Hz(f)) => f,
            Some(Freq::Wavelength(lambda)) => p.velocity / lambda,
            Some(Freq::Wavenumber(k)) => k * p.velocity / (2.0 * PI),
        };
        p.dirichlet = Field::Constant(dirichlet);
        p.source = Field::Constant(source);
        p.validate()?;
        Ok(p)
    }

    pub fn from_config_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_config_str(&std::fs::read_to_string(path)?)
    }
}

/// Assembles the interior system `(-lap_h - k^2) u = g` with Dirichlet data
/// folded into the right-hand side.
pub fn assemble(p: &HelmholtzProblem) -> Result<(CsrMatrix, ZVector)> {
    p.validate()?;
    let m = p.interior_per_axis();
    let n = p.n_unknowns();
    let inv_h = p.cells_per_axis as f64 / p.domain_length;
    let inv_h2 = inv_h * inv_h;
    let off = Cplx::real(-inv_h2);
    let diag_lap = 2.0 * p.dim as f64 * inv_h2;

    let mut strides = [0usize; 3];
    let mut s = 1;
    for stride in strides.iter_mut().take(p.dim) {
        *stride = s;
        s *= m;
    }

    let mut coo = CooMatrix::square(n);
    coo.entries.reserve(n * (2 * p.dim + 1));
    let mut rhs = ZVector::zeros(n);
    for idx in 0..n {
        let node = p.node_index(idx);
        let x = p.coords(node);
        let k = p.wavenumber_at(x);
        let mut b = p.source.eval(x);

        // lower neighbours, highest stride first, keeps columns ascending
        for a in (0..p.dim).rev() {
            if node[a] > 1 {
                coo.push(idx, idx - strides[a], off);
            } else {
                let mut nb = node;
                nb[a] = 0;
                b += p.dirichlet.eval(p.coords(nb)).scale(inv_h2);
            }
        }
        coo.push(idx, idx, Cplx::real(diag_lap - k * k));
        for a in 0..p.dim {
            if node[a] < m {
                coo.push(idx, idx + strides[a], off);
            } else {
                let mut nb = node;
                nb[a] = m + 1;
                b += p.dirichlet.eval(p.coords(nb)).scale(inv_h2);
            }
        }
        rhs[idx] = b;
    }
    Ok((coo.to_csr()?, rhs))
}

/// Plane-wave verification data for a uniform-velocity problem.
#[derive(Clone, Debug)]
pub struct ManufacturedSolution {
    /// The input problem with Dirichlet data `u*` on the boundary and the
    /// matching source.
    pub problem: HelmholtzProblem,
    /// `u*` at the interior nodes.
    pub exact: ZVector,
    /// Continuous source `-lap(u*) - k^2 u*` at the interior nodes.
    pub source: ZVector,
}

/// Uses `u*(x) = exp(i k x_1)`, for which `-lap(u*) - k^2 u* = 0` exactly, so
/// the discrete solution differs from `u*` only by the O(h^2) truncation
/// error. For `k = 0` this is the constant 1.
pub fn manufactured_solution(p: &HelmholtzProblem) -> Result<ManufacturedSolution> {
    p.validate()?;
    if p.velocity_field.is_some() {
        return Err(Error::Parameter(
            "manufactured plane wave needs a uniform velocity".into(),
        ));
    }
    let k = p.wavenumber();
    let plane_wave = move |x: Point| Cplx::cis(k * x[0]);
    let mut problem = p.clone();
    problem.dirichlet = Field::function(plane_wave);
    problem.source = Field::Constant(ZERO);
    let n = p.n_unknowns();
    let exact = ZVector::from_fn(n, |i| plane_wave(p.node_coords(i)));
    let source = ZVector::zeros(n);
    Ok(ManufacturedSolution {
        problem,
        exact,
        source,
    })
}
