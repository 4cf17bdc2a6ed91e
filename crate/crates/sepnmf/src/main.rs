//! Command-line surface: extract, generate, bench, mvee.
//!
//! Exit codes: 0 success, 2 parse failures (matrix or config files),
//! 3 dimension/argument errors, 4 numerical failures, 5 i/o errors.
//! Log level comes from the SEPNMF_LOG environment variable.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;

use sepnmf::io::{self, GroundTruthSidecar, MatrixFormat};
use sepnmf::report::{
    self, BenchReport, InputDigest, MveeRunReport, RunReport, TimingReport,
    REPORT_SCHEMA_VERSION,
};
use sepnmf::sweep::{self, SweepTable};
use sepnmf::{
    BoundReport, DenseMatrix, Error, ExtractOptions, MveeOptions, NoiseModel, NoiseSpec, Result,
    SelectorRegistry,
};

#[derive(Parser)]
#[command(
    name = "sepnmf",
    version,
    about = "Separable NMF: successive projection with optional ellipsoidal preconditioning",
    after_help = "Matrix formats: csv (headerless comma-separated rows), mm/mtx (Matrix Market \
                  array or coordinate, real, general), bin (lossless binary). All indices in \
                  files and reports are 0-based.\n\
                  Exit codes: 2 parse failure, 3 argument error, 4 numerical failure, 5 i/o error.\n\
                  Set SEPNMF_LOG=info (or debug) for progress logging."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select r basis columns from a matrix file and report them as JSON
    Extract(ExtractArgs),
    /// Generate a synthetic near-separable instance plus ground-truth sidecar
    Generate(GenerateArgs),
    /// Run a noise sweep from a config file and write CSV + JSON tables
    Bench(BenchArgs),
    /// Solve the origin-centered minimum-volume enclosing ellipsoid of a points file
    Mvee(MveeArgs),
}

#[derive(Args)]
struct ExtractArgs {
    /// Input matrix file (columns are data points)
    #[arg(long)]
    input: PathBuf,
    /// Input format: csv, mm, bin (default: inferred from the extension)
    #[arg(long)]
    format: Option<String>,
    /// Number of columns to select
    #[arg(long)]
    rank: usize,
    /// Algorithm: spa (plain) or pspa (preconditioned)
    #[arg(long, default_value = "spa")]
    algo: String,
    /// Relative duality-gap tolerance of the ellipsoid solver (pspa)
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Iteration cap of the ellipsoid solver (default 100*m*r)
    #[arg(long)]
    max_iter: Option<usize>,
    /// Ground-truth sidecar; enables recovery and bound evaluation
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of rows d
    #[arg(long)]
    rows: usize,
    /// Number of columns m
    #[arg(long)]
    cols: usize,
    /// Factorization rank r (basis column count)
    #[arg(long)]
    rank: usize,
    /// Basis condition number target (>= 1)
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Interior mixture model: dirichlet or midpoints
    #[arg(long, default_value = "dirichlet")]
    interior: String,
    /// Noise model: spectral or column
    #[arg(long, default_value = "spectral")]
    noise_model: String,
    /// Noise magnitude (0 = noiseless)
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Root seed for the geometry substreams
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seed of the noise substream (default: same as --seed)
    #[arg(long)]
    noise_seed: Option<u64>,
    /// Output matrix file; format inferred from the extension unless --format
    #[arg(long)]
    out: PathBuf,
    /// Output format override: csv, mm, bin
    #[arg(long)]
    format: Option<String>,
    /// Sidecar path (default: <out>.truth.json)
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Also write the basis matrix F here (enables bound checks on extract)
    #[arg(long)]
    basis_out: Option<PathBuf>,
    /// Also write a bit-exact binary copy of the matrix here
    #[arg(long)]
    bin_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Flat key-value sweep config file
    #[arg(long)]
    config: PathBuf,
    /// Output prefix; writes <out>.csv and <out>.json
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for the trial pool (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct MveeArgs {
    /// Points file: an r x m matrix whose columns are the points
    #[arg(long)]
    input: PathBuf,
    /// Input format: csv, mm, bin (default: inferred from the extension)
    #[arg(long)]
    format: Option<String>,
    /// Relative duality-gap tolerance
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Iteration cap (default 100*m*r)
    #[arg(long)]
    max_iter: Option<usize>,
    /// Ridge added to the mass matrix for degenerate point sets
    #[arg(long, default_value_t = 0.0)]
    ridge: f64,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SEPNMF_LOG", "warn")).init();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract(args) => cmd_extract(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Mvee(args) => cmd_mvee(args),
    }
}

fn command_echo() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn parse_format(spec: &Option<String>) -> Result<Option<MatrixFormat>> {
    spec.as_deref().map(str::parse).transpose()
}

fn emit(out: &Option<PathBuf>, json: String) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, json + "\n")?;
            Ok(())
        }
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn cmd_extract(args: ExtractArgs) -> Result<()> {
    let start = Instant::now();
    let matrix = io::read_matrix(&args.input, parse_format(&args.format)?)?;
    let (d, m) = (matrix.rows(), matrix.cols());
    info!("extract: {}x{} matrix from {}", d, m, args.input.display());

    let registry = SelectorRegistry::with_builtins();
    let selector = registry.resolve(&args.algo)?;
    let r = args.rank;
    if r < 1 || r > d.min(m) {
        return Err(Error::InvalidArgument(format!(
            "--rank must satisfy 1 <= r <= min(d, m) = {}; got {r}",
            d.min(m)
        )));
    }
    if r < selector.min_rank() {
        return Err(Error::InvalidArgument(format!(
            "algorithm '{}' requires --rank >= {}; got {r}",
            args.algo,
            selector.min_rank()
        )));
    }

    let mut opts = ExtractOptions::default();
    opts.mvee.tol = args.tol;
    opts.mvee.max_iter = args.max_iter;
    let outcome = selector.extract(&matrix, r, &opts)?;
    let total_ms = start.elapsed().as_secs_f64() * 1e3;

    let extraction = outcome.extraction().clone();
    let (exact_recovery, bounds) = match &args.sidecar {
        Some(path) => evaluate_against_sidecar(path, &matrix, r, &extraction.indices)?,
        None => (None, None),
    };

    let report = RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        command: command_echo(),
        input: InputDigest {
            path: Some(args.input.display().to_string()),
            rows: d,
            cols: m,
            digest: io::matrix_digest(&matrix),
        },
        r,
        algorithm: args.algo.clone(),
        indices: extraction.indices,
        step_norms: extraction.step_norms,
        residual_final: extraction.residual_final,
        timing: TimingReport::from_stages(&outcome.timings(), total_ms),
        sigma_tail: outcome.pipeline().map(|p| p.sigma_tail),
        mvee: outcome.pipeline().map(|p| (&p.mvee).into()),
        exact_recovery,
        bounds,
    };
    emit(&args.out, report::to_pretty_json(&report))
}

fn evaluate_against_sidecar(
    path: &Path,
    matrix: &DenseMatrix,
    r: usize,
    indices: &[usize],
) -> Result<(Option<bool>, Option<BoundReport>)> {
    let sidecar = GroundTruthSidecar::read(path)?;
    if sidecar.d != matrix.rows() || sidecar.m != matrix.cols() {
        return Err(Error::InvalidArgument(format!(
            "sidecar describes a {}x{} matrix but the input is {}x{}",
            sidecar.d,
            sidecar.m,
            matrix.rows(),
            matrix.cols()
        )));
    }
    let mut got = indices.to_vec();
    let mut want = sidecar.true_indices.clone();
    got.sort_unstable();
    want.sort_unstable();
    let exact = Some(got == want);

    let bounds = match &sidecar.basis_path {
        Some(rel) => {
            let base = path.parent().unwrap_or_else(|| Path::new("."));
            let basis = io::read_matrix(&base.join(rel), None)?;
            let eps = sidecar.noise.map_or(0.0, |n| n.epsilon);
            let selected = matrix.select_columns(indices)?;
            Some(BoundReport::evaluate(
                &basis,
                eps,
                r,
                &selected,
                indices,
                &sidecar.true_indices,
            )?)
        }
        None => None,
    };
    Ok((exact, bounds))
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    if args.epsilon < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "--epsilon must be >= 0, got {}",
            args.epsilon
        )));
    }
    let interior = args.interior.parse()?;
    let mut inst = sepnmf::gen_instance(
        args.rows,
        args.cols,
        args.rank,
        args.kappa,
        interior,
        args.seed,
    )?;
    if args.epsilon > 0.0 {
        let model: NoiseModel = args.noise_model.parse()?;
        let spec = NoiseSpec {
            model,
            epsilon: args.epsilon,
        };
        inst = sepnmf::add_noise(&inst, &spec, args.noise_seed.unwrap_or(args.seed))?;
    }

    io::write_matrix(&args.out, &inst.a_tilde, parse_format(&args.format)?)?;
    info!("generate: wrote matrix to {}", args.out.display());
    if let Some(bin) = &args.bin_out {
        io::write_matrix(bin, &inst.a_tilde, Some(MatrixFormat::Binary))?;
    }
    if let Some(basis) = &args.basis_out {
        io::write_matrix(basis, &inst.f, None)?;
    }

    let sidecar_path = args
        .sidecar
        .clone()
        .unwrap_or_else(|| append_ext(&args.out, "truth.json"));
    let file_name = |p: &PathBuf| p.file_name().map(|s| s.to_string_lossy().into_owned());
    let sidecar =
        GroundTruthSidecar::from_instance(&inst, file_name(&args.out), args.basis_out.as_ref().and_then(|p| file_name(p)))?;
    sidecar.write(&sidecar_path)?;

    let mut written = vec![
        args.out.display().to_string(),
        sidecar_path.display().to_string(),
    ];
    if let Some(p) = &args.basis_out {
        written.push(p.display().to_string());
    }
    if let Some(p) = &args.bin_out {
        written.push(p.display().to_string());
    }
    println!("{}", serde_json::json!({ "written": written }));
    Ok(())
}

fn append_ext(path: &Path, ext: &str) -> PathBuf {
    let mut name = path.file_name().map_or_else(
        || "out".to_string(),
        |s| s.to_string_lossy().into_owned(),
    );
    name.push('.');
    name.push_str(ext);
    path.with_file_name(name)
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let spec = sweep::parse_bench_spec(&text)?;
    let registry = SelectorRegistry::with_builtins();
    let selectors = spec
        .algorithms
        .iter()
        .map(|name| registry.resolve(name))
        .collect::<Result<Vec<_>>>()?;

    let run_all = || -> Result<Vec<SweepTable>> {
        selectors
            .iter()
            .map(|s| sweep::threshold_sweep(&spec.config, s.as_ref()))
            .collect()
    };
    let tables = match args.jobs {
        Some(jobs) => {
            if jobs == 0 {
                return Err(Error::InvalidArgument("--jobs must be >= 1".into()));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::Numerical(format!("worker pool: {e}")))?;
            pool.install(run_all)?
        }
        None => run_all()?,
    };

    for table in &tables {
        info!(
            "bench: {} threshold = {:?}",
            table.algorithm, table.threshold
        );
    }

    let csv_path = args.out.with_extension("csv");
    let json_path = args.out.with_extension("json");
    std::fs::write(&csv_path, report::sweep_tables_to_csv(&tables))?;
    let bench = BenchReport {
        schema_version: REPORT_SCHEMA_VERSION,
        command: command_echo(),
        config: spec.config,
        tables,
    };
    std::fs::write(&json_path, report::to_pretty_json(&bench) + "\n")?;
    println!(
        "{}",
        serde_json::json!({
            "written": [csv_path.display().to_string(), json_path.display().to_string()]
        })
    );
    Ok(())
}

fn cmd_mvee(args: MveeArgs) -> Result<()> {
    let start = Instant::now();
    let points = io::read_matrix(&args.input, parse_format(&args.format)?)?;
    let opts = MveeOptions {
        tol: args.tol,
        max_iter: args.max_iter,
        regularization: args.ridge,
        ..Default::default()
    };
    let sol = sepnmf::solve_mvee(&points, &opts)?;
    let report = MveeRunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        command: command_echo(),
        input: InputDigest {
            path: Some(args.input.display().to_string()),
            rows: points.rows(),
            cols: points.cols(),
            digest: io::matrix_digest(&points),
        },
        l_star: sol.l_star.to_nested_rows(),
        weights: sol.weights,
        gap: sol.gap,
        iterations: sol.iterations,
        certified: sol.certified,
        regularized: sol.regularized,
        total_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    emit(&args.out, report::to_pretty_json(&report))
}
