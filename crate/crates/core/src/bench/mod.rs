//! Benchmark harness: repeated timed kernel runs, single timed solves, and
//! CSV / markdown reports.
//!
//! Kernels run once untimed, then at least `repetitions` timed runs (never
//! fewer than [`MIN_REPETITIONS`]), extended until the total measured time
//! is at least 100 times the monotonic clock resolution. The reported time
//! is the mean. Gflops always come from [`crate::cnum::FlopModel`] applied
//! to the record's own `(op, size, time)`.

pub mod reference;

use std::fmt::Write as _;
use std::hint::black_box;
use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cnum::{fmt_shortest, gflops_from, Cplx, FlopModel, Kernel};
use crate::error::{Error, Result};
use crate::krylov::{self, Method, Preconditioner, SolverConfig};
use crate::sparse::CsrMatrix;
use crate::vecops::{self, Conjugate, ReductionPlan, ZVector};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_REPETITIONS: usize = 100;
pub const MIN_REPETITIONS: usize = 10;

/// One row of a benchmark table.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub op_name: String,
    /// Vector length, nonzero count (SpMV) or unknown count (solvers).
    pub size: u64,
    pub repetitions: usize,
    pub mean_time_ms: f64,
    pub gflops: f64,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    pub converged: Option<bool>,
    /// Published CPU time at this exact size, when one exists.
    pub paper_cpu_ms: Option<f64>,
}

/// Real flops per unit of `size` for an op name. Solver records carry no
/// flop model (the published solver tables report iterations and seconds
/// only), so their Gflops is zero by the same identity.
pub fn flops_per_unit(op_name: &str) -> u64 {
    Kernel::from_name(op_name)
        .map(|k| FlopModel::STANDARD.per_unit(k))
        .unwrap_or(0)
}

impl BenchRecord {
    pub fn new(op_name: impl Into<String>, size: u64, repetitions: usize, mean_time_ms: f64) -> Self {
        let op_name = op_name.into();
        let gflops = gflops_from(flops_per_unit(&op_name), size, mean_time_ms);
        BenchRecord {
            op_name,
            size,
            repetitions,
            mean_time_ms,
            gflops,
            iterations: None,
            residual: None,
            converged: None,
            paper_cpu_ms: None,
        }
    }

    /// Recomputes Gflops from `(op, size, time)`.
    pub fn expected_gflops(&self) -> f64 {
        gflops_from(flops_per_unit(&self.op_name), self.size, self.mean_time_ms)
    }

    pub fn is_solver(&self) -> bool {
        self.iterations.is_some()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchOptions {
    pub seed: u64,
    pub plan: ReductionPlan,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            seed: DEFAULT_SEED,
            plan: ReductionPlan::default(),
        }
    }
}

/// Uniform entries in the unit square `[0, 1) x [0, 1)`.
pub fn random_vector(len: usize, seed: u64) -> Result<ZVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::new();
    data.try_reserve_exact(len)
        .map_err(|e| Error::Resource(format!("cannot allocate vector of {len} elements: {e}")))?;
    data.extend((0..len).map(|_| Cplx::new(rng.gen::<f64>(), rng.gen::<f64>())));
    Ok(ZVector::from_vec(data))
}

/// Smallest observable step of the monotonic clock.
pub fn clock_resolution() -> Duration {
    static RES: OnceLock<Duration> = OnceLock::new();
    *RES.get_or_init(|| {
        let mut best = Duration::from_millis(1);
        for _ in 0..200 {
            let t0 = Instant::now();
            let mut t1 = Instant::now();
            while t1 == t0 {
                t1 = Instant::now();
            }
            best = best.min(t1 - t0);
        }
        best
    })
}

/// Warm-up once, then time at least `repetitions` runs and until the total
/// exceeds 100 clock ticks. Returns `(runs, mean_ms)`.
fn time_repeated(repetitions: usize, mut run: impl FnMut()) -> (usize, f64) {
    run();
    let min_total = clock_resolution() * 100;
    let target = repetitions.max(MIN_REPETITIONS);
    let start = Instant::now();
    let mut runs = 0usize;
    loop {
        run();
        runs += 1;
        if runs >= target && start.elapsed() >= min_total {
            break;
        }
    }
    let total = start.elapsed().as_secs_f64() * 1e3;
    (runs, total / runs as f64)
}

/// Times one level-1 kernel on random vectors of length `h`.
pub fn bench_kernel(kernel: Kernel, h: usize, repetitions: usize, opts: &BenchOptions) -> Result<BenchRecord> {
    if h == 0 {
        return Err(Error::Parameter("benchmark size must be at least 1".into()));
    }
    let x = random_vector(h, opts.seed)?;
    let mut y = random_vector(h, opts.seed.wrapping_add(1))?;
    let plan = opts.plan;
    let (runs, mean_ms) = match kernel {
        Kernel::Assign => time_repeated(repetitions, || {
            vecops::zassign(&mut y, &x).expect("equal lengths");
            black_box(&y);
        }),
        Kernel::Scal => {
            // unit modulus keeps repeated scaling bounded
            let alpha = Cplx::cis(x[0].re * std::f64::consts::TAU);
            time_repeated(repetitions, || {
                vecops::zscal(alpha, &mut y);
                black_box(&y);
            })
        }
        Kernel::Axpy => {
            let alpha = x[0];
            time_repeated(repetitions, || {
                vecops::zaxpy(alpha, &x, &mut y).expect("equal lengths");
                black_box(&y);
            })
        }
        Kernel::Axmy => {
            let unit: ZVector = x.iter().map(|z| Cplx::cis(z.re * std::f64::consts::TAU)).collect();
            time_repeated(repetitions, || {
                vecops::zaxmy(&unit, &mut y).expect("equal lengths");
                black_box(&y);
            })
        }
        Kernel::Dot => time_repeated(repetitions, || {
            black_box(vecops::zdot(&x, &y, Conjugate::Yes, &plan).expect("equal lengths"));
        }),
        Kernel::Norm2 => time_repeated(repetitions, || {
            black_box(vecops::znorm2(&x, &plan));
        }),
        Kernel::Spmv => {
            return Err(Error::Parameter(
                "spmv is benchmarked with bench_spmv on a matrix".into(),
            ))
        }
    };
    let mut rec = BenchRecord::new(kernel.name(), h as u64, runs, mean_ms);
    rec.paper_cpu_ms = reference::paper_cpu_ms(kernel, h as u64);
    Ok(rec)
}

/// Times `y = A x` for a random fixed-seed `x`. The record's size is `nz`.
pub fn bench_spmv(a: &CsrMatrix, repetitions: usize, opts: &BenchOptions) -> Result<BenchRecord> {
    let x = random_vector(a.n_cols(), opts.seed)?;
    let mut y = ZVector::zeros(a.n_rows());
    let (runs, mean_ms) = time_repeated(repetitions, || {
        a.spmv_into(&x, &mut y).expect("dimensions fixed above");
        black_box(&y);
    });
    Ok(BenchRecord::new(Kernel::Spmv.name(), a.nnz() as u64, runs, mean_ms))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreconditionerKind {
    Identity,
    Jacobi,
}

impl PreconditionerKind {
    pub fn build(self, a: &CsrMatrix) -> Result<Preconditioner> {
        match self {
            PreconditionerKind::Identity => Ok(Preconditioner::Identity),
            PreconditionerKind::Jacobi => krylov::build_jacobi(a),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveStatus {
    Converged,
    NotConverged,
    Breakdown(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverRun {
    pub record: BenchRecord,
    pub status: SolveStatus,
    pub solution: Option<ZVector>,
}

/// One timed solve (solver runs are not repetition-averaged). Preconditioner
/// setup is included in the measured time.
pub fn bench_solver(
    a: &CsrMatrix,
    b: &[Cplx],
    method: Method,
    precond: PreconditionerKind,
    cfg: &SolverConfig,
) -> Result<SolverRun> {
    let start = Instant::now();
    let m = precond.build(a)?;
    let outcome = krylov::solve(method, a, b, &m, cfg);
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let (report, status, solution) = match outcome {
        Ok((x, report)) => {
            let status = if report.converged {
                SolveStatus::Converged
            } else {
                SolveStatus::NotConverged
            };
            (report, status, Some(x))
        }
        Err(Error::Breakdown {
            method,
            quantity,
            value,
            report,
        }) => (
            *report,
            SolveStatus::Breakdown(format!("{method}: |{quantity}| = {value:e}")),
            None,
        ),
        Err(e) => return Err(e),
    };
    let mut record = BenchRecord::new(method.name(), a.n() as u64, 1, elapsed_ms);
    record.iterations = Some(report.iterations);
    record.residual = Some(report.final_relative_residual);
    record.converged = Some(report.converged);
    Ok(SolverRun {
        record,
        status,
        solution,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" | "markdown-table" => Ok(ReportFormat::Markdown),
            other => Err(Error::Parameter(format!("unknown report format '{other}'"))),
        }
    }
}

pub const CSV_COLUMNS: [&str; 9] = [
    "op",
    "size",
    "reps",
    "time_ms",
    "gflops",
    "iterations",
    "residual",
    "converged",
    "paper_cpu_ms",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::parse(line, format!("{other:?}")),
    }
}

pub fn write_csv<W: Write>(records: &[BenchRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_COLUMNS).map_err(csv_error)?;
    for r in records {
        out.write_record([
            r.op_name.clone(),
            r.size.to_string(),
            r.repetitions.to_string(),
            fmt_shortest(r.mean_time_ms),
            fmt_shortest(r.gflops),
            opt(r.iterations),
            r.residual.map(fmt_shortest).unwrap_or_default(),
            opt(r.converged),
            r.paper_cpu_ms.map(fmt_shortest).unwrap_or_default(),
        ])
        .map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is ASCII")
}

/// Parses the output of [`to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<BenchRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(csv_error)?;
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::parse(1, "missing CSV header"));
    }
    fn num<T: std::str::FromStr>(s: &str, no: usize, what: &str) -> Result<T> {
        s.parse().map_err(|_| Error::parse(no, format!("invalid {what} '{s}'")))
    }
    fn maybe<T: std::str::FromStr>(s: &str, no: usize, what: &str) -> Result<Option<T>> {
        if s.is_empty() {
            Ok(None)
        } else {
            num(s, no, what).map(Some)
        }
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let f = row.map_err(csv_error)?;
        let no = f.position().map(|p| p.line() as usize).unwrap_or(0);
        out.push(BenchRecord {
            op_name: f[0].to_string(),
            size: num(&f[1], no, "size")?,
            repetitions: num(&f[2], no, "reps")?,
            mean_time_ms: num(&f[3], no, "time_ms")?,
            gflops: num(&f[4], no, "gflops")?,
            iterations: maybe(&f[5], no, "iterations")?,
            residual: maybe(&f[6], no, "residual")?,
            converged: maybe(&f[7], no, "converged")?,
            paper_cpu_ms: maybe(&f[8], no, "paper_cpu_ms")?,
        });
    }
    Ok(out)
}

/// Kernel rows as `h | time (ms) | Gflops`, solver rows as
/// `#iter | time (s)`, mirroring the published table shapes.
pub fn to_markdown(records: &[BenchRecord]) -> String {
    let mut out = String::new();
    let (solvers, kernels): (Vec<&BenchRecord>, Vec<&BenchRecord>) =
        records.iter().partition(|r| r.is_solver());
    if !kernels.is_empty() || solvers.is_empty() {
        out.push_str("| op | h | reps | time (ms) | Gflops | paper cpu (ms) |\n");
        out.push_str("|---|---:|---:|---:|---:|---:|\n");
        for r in kernels {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {:.4} | {:.3} | {} |",
                r.op_name,
                r.size,
                r.repetitions,
                r.mean_time_ms,
                r.gflops,
                r.paper_cpu_ms.map(|t| format!("{t:.2}")).unwrap_or_else(|| "-".into()),
            );
        }
    }
    if !solvers.is_empty() {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str("| method | h | #iter | time (s) | residual | converged |\n");
        out.push_str("|---|---:|---:|---:|---:|:---:|\n");
        for r in solvers {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {:.3} | {:.3e} | {} |",
                r.op_name,
                r.size,
                opt(r.iterations),
                r.mean_time_ms / 1e3,
                r.residual.unwrap_or(f64::NAN),
                opt(r.converged),
            );
        }
    }
    out
}

pub fn emit_report<W: Write>(records: &[BenchRecord], format: ReportFormat, mut w: W) -> Result<()> {
    match format {
        ReportFormat::Csv => write_csv(records, &mut w)?,
        ReportFormat::Markdown => w.write_all(to_markdown(records).as_bytes())?,
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gflops_identity_on_construction() {
        let r = BenchRecord::new("zaxpy", 1_000_000, 100, 8.33);
        assert_eq!(r.gflops, 8e6 / (8.33 * 1e6));
        assert_eq!(r.gflops, r.expected_gflops());
        let s = BenchRecord::new("tfqmr", 512, 1, 3.0);
        assert_eq!(s.gflops, 0.0);
    }

    #[test]
    fn random_vectors_are_seeded_and_in_unit_square() {
        let a = random_vector(1000, 42).unwrap();
        let b = random_vector(1000, 42).unwrap();
        let c = random_vector(1000, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|z| (0.0..1.0).contains(&z.re) && (0.0..1.0).contains(&z.im)));
    }

    #[test]
    fn smallest_kernel_benchmark() {
        let opts = BenchOptions::default();
        for k in Kernel::VECTOR_KERNELS {
            let r = bench_kernel(k, 1, 100, &opts).unwrap();
            assert!(r.mean_time_ms > 0.0);
            assert!(r.gflops.is_finite());
            assert!(r.repetitions >= 100);
            assert_eq!(r.gflops, r.expected_gflops());
        }
        assert!(bench_kernel(Kernel::Axpy, 0, 100, &opts).is_err());
        assert!(bench_kernel(Kernel::Spmv, 10, 100, &opts).is_err());
    }

    #[test]
    fn repetition_floor() {
        let r = bench_kernel(Kernel::Dot, 16, 1, &BenchOptions::default()).unwrap();
        assert!(r.repetitions >= MIN_REPETITIONS);
    }

    #[test]
    fn paper_annotation_at_published_sizes() {
        let r = bench_kernel(Kernel::Axpy, 100_000, 10, &BenchOptions::default()).unwrap();
        assert_eq!(r.paper_cpu_ms, Some(0.83));
        let r = bench_kernel(Kernel::Axpy, 1000, 10, &BenchOptions::default()).unwrap();
        assert_eq!(r.paper_cpu_ms, None);
    }

    #[test]
    fn csv_shape() {
        assert_eq!(to_csv(&[]), format!("{}\n", CSV_COLUMNS.join(",")));
        let r = BenchRecord::new("zaxpy", 10, 100, 0.5);
        let csv = to_csv(&[r]);
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("zaxpy,10,100,0.5,"));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut s = BenchRecord::new("bicgstab", 512, 1, 12.345678901234567);
        s.iterations = Some(17);
        s.residual = Some(3.2e-10);
        s.converged = Some(true);
        let mut k = BenchRecord::new("znorm", 8_000_000, 100, 1.0 / 3.0);
        k.paper_cpu_ms = Some(140.0);
        let records = vec![k, s];
        let back = parse_csv(&to_csv(&records)).unwrap();
        assert_eq!(back, records);
        for r in &back {
            assert_eq!(r.gflops, r.expected_gflops());
        }
    }

    #[test]
    fn csv_parse_errors() {
        assert!(parse_csv("op,size\n").is_err());
        let bad = format!("{}\nzaxpy,1,2\n", CSV_COLUMNS.join(","));
        assert!(matches!(parse_csv(&bad), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn markdown_shapes() {
        let k = BenchRecord::new("zdot", 1000, 100, 0.01);
        let md = to_markdown(&[k]);
        assert!(md.starts_with("| op | h |"));
        assert_eq!(md.lines().count(), 3);
        let mut s = BenchRecord::new("tfqmr", 512, 1, 1500.0);
        s.iterations = Some(40);
        s.residual = Some(1e-10);
        s.converged = Some(true);
        let md = to_markdown(&[s]);
        assert!(md.contains("| tfqmr | 512 | 40 | 1.500 |"));
        assert!(to_markdown(&[]).starts_with("| op |"));
    }

    #[test]
    fn identity_solver_run() {
        let a = CsrMatrix::identity(10);
        let b = random_vector(10, 1).unwrap();
        for method in Method::ALL {
            let run = bench_solver(&a, &b, method, PreconditionerKind::Jacobi, &SolverConfig::default()).unwrap();
            assert_eq!(run.status, SolveStatus::Converged);
            assert_eq!(run.record.iterations, Some(1));
            assert_eq!(run.record.repetitions, 1);
        }
    }
}
