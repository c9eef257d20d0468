use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use zsparse::bench::{
    self, BenchOptions, BenchRecord, PreconditionerKind, ReportFormat, SolveStatus,
    DEFAULT_REPETITIONS, DEFAULT_SEED,
};
use zsparse::cnum::Kernel;
use zsparse::helmholtz::{assemble, HelmholtzProblem};
use zsparse::krylov::{Method, SolverConfig};
use zsparse::sparse::{self, CsrMatrix};
use zsparse::vecops::ZVector;
use zsparse::Error;

const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_BREAKDOWN: u8 = 4;
const EXIT_OTHER: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "bench", version, about = "Complex sparse kernel and Krylov solver benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,

    /// Seed for random vectors.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Worker threads for parallel kernels (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Md,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum PrecondArg {
    Identity,
    Jacobi,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Time a level-1 vector kernel.
    Kernel {
        /// zassign, zscal, zaxpy, zaxmy, zdot, znorm, or "all".
        #[arg(long)]
        op: String,
        /// Vector length(s), comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1000000")]
        size: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
        reps: usize,
    },
    /// Time the CSR matrix-vector product.
    Spmv {
        #[command(flatten)]
        input: MatrixInput,
        #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
        reps: usize,
    },
    /// Run one timed preconditioned solve.
    Solve {
        #[command(flatten)]
        input: MatrixInput,
        /// bicgstab, bicgstab_l, tfqmr, or "all".
        #[arg(long, default_value = "bicgstab")]
        method: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 1000)]
        maxit: usize,
        #[arg(long, value_enum, default_value_t = PrecondArg::Jacobi)]
        precond: PrecondArg,
        /// Polynomial degree for bicgstab_l.
        #[arg(long, default_value_t = 8)]
        l: usize,
    },
    /// Assemble a Helmholtz problem and write it as .mtx or .bin.
    Export {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long = "to")]
        to: PathBuf,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct MatrixInput {
    /// Matrix Market file or binary CSR dump (.bin).
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Helmholtz problem config (key=value lines).
    #[arg(long)]
    problem: Option<PathBuf>,
}

fn load_matrix(path: &Path) -> zsparse::Result<CsrMatrix> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("bin") => sparse::read_csr_binary(io::BufReader::new(File::open(path)?)),
        _ => sparse::read_matrix_market(path)?.to_csr(),
    }
}

/// Returns the matrix and a right-hand side: the assembled one for a
/// problem, a seeded random vector for a matrix file.
fn load_system(input: &MatrixInput, seed: u64) -> zsparse::Result<(CsrMatrix, ZVector)> {
    if let Some(p) = &input.problem {
        let problem = HelmholtzProblem::from_config_file(p)?;
        return assemble(&problem);
    }
    let path = input.matrix.as_ref().expect("clap enforces one input");
    let a = load_matrix(path)?;
    if !a.is_square() {
        return Err(Error::dim("solve", a.n_rows(), a.n_cols()));
    }
    let b = bench::random_vector(a.n_rows(), seed)?;
    Ok((a, b))
}

fn parse_list<T>(s: &str, all: &[T]) -> zsparse::Result<Vec<T>>
where
    T: Copy + std::str::FromStr<Err = Error>,
{
    if s.eq_ignore_ascii_case("all") {
        return Ok(all.to_vec());
    }
    s.split(',').map(|t| t.trim().parse()).collect()
}

fn parse_kernels(s: &str) -> zsparse::Result<Vec<Kernel>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Kernel::VECTOR_KERNELS.to_vec());
    }
    s.split(',')
        .map(|t| match Kernel::from_name(t.trim()) {
            Some(Kernel::Spmv) | None => Err(Error::Parameter(format!("unknown kernel '{t}'"))),
            Some(k) => Ok(k),
        })
        .collect()
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Format(_) => EXIT_PARSE,
        Error::Breakdown { .. } => EXIT_BREAKDOWN,
        _ => EXIT_OTHER,
    }
}

fn run(cli: Cli) -> zsparse::Result<u8> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    }
    let opts = BenchOptions {
        seed: cli.seed,
        ..BenchOptions::default()
    };
    let mut records: Vec<BenchRecord> = Vec::new();
    let mut code = 0u8;

    match &cli.command {
        Command::Kernel { op, size, reps } => {
            for k in parse_kernels(op)? {
                for &h in size {
                    records.push(bench::bench_kernel(k, h, *reps, &opts)?);
                }
            }
        }
        Command::Spmv { input, reps } => {
            let (a, _) = load_system(input, cli.seed)?;
            records.push(bench::bench_spmv(&a, *reps, &opts)?);
        }
        Command::Solve {
            input,
            method,
            tol,
            maxit,
            precond,
            l,
        } => {
            let methods = parse_list(method, &Method::ALL)?;
            let (a, b) = load_system(input, cli.seed)?;
            let cfg = SolverConfig {
                tolerance: *tol,
                max_iterations: *maxit,
                l: *l,
                ..SolverConfig::default()
            };
            cfg.validate()?;
            let kind = match precond {
                PrecondArg::Identity => PreconditionerKind::Identity,
                PrecondArg::Jacobi => PreconditionerKind::Jacobi,
            };
            for m in methods {
                let run = bench::bench_solver(&a, &b, m, kind, &cfg)?;
                match &run.status {
                    SolveStatus::Converged => {}
                    SolveStatus::NotConverged => {
                        eprintln!("{m}: not converged after {} iterations", cfg.max_iterations);
                        code = code.max(EXIT_NOT_CONVERGED);
                    }
                    SolveStatus::Breakdown(msg) => {
                        eprintln!("breakdown in {msg}");
                        code = code.max(EXIT_BREAKDOWN);
                    }
                }
                records.push(run.record);
            }
        }
        Command::Export { problem, to } => {
            let p = HelmholtzProblem::from_config_file(problem)?;
            let (a, _) = assemble(&p)?;
            match to.extension().and_then(|e| e.to_str()) {
                Some("bin") => {
                    let mut w = BufWriter::new(File::create(to)?);
                    sparse::write_csr_binary(&a, &mut w)?;
                    w.flush()?;
                }
                _ => sparse::write_matrix_market(&a, to)?,
            }
            let s = a.stats();
            eprintln!("wrote {} (h = {}, nz = {})", to.display(), s.h, s.nz);
            return Ok(0);
        }
    }

    let format = match cli.format {
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Md => ReportFormat::Markdown,
    };
    match &cli.out {
        Some(path) => bench::emit_report(&records, format, BufWriter::new(File::create(path)?))?,
        None => bench::emit_report(&records, format, io::stdout().lock())?,
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_PARSE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let _ = io::stdout().flush();
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
