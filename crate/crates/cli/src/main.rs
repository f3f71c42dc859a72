//! Command-line front end: closed-form kernels, propagation engines,
//! stochastic sampling, partition functions, and the verification suite.
//!
//! Exit-code contract: 0 success, 1 numerical/verification failure, 2 usage
//! error. System specifications are JSON documents with a `type` tag; see
//! `SystemDoc` in the library crate.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use wickbridge::closed_form::EuclideanKernelSpec;
use wickbridge::grid::{position_fn, ComplexField, Grid1D, RealField};
use wickbridge::lattice::{euclid_propagate, splitstep_quantum_propagate, SplittingOrder, TimeSlicing};
use wickbridge::master::{
    coeff_fn, evolve_with_snapshots, Boundary, FokkerPlanckSpec, SmoluchowskiSpec, SolverConfig,
};
use wickbridge::mc::{feynman_kac_estimate, simulate_ensemble, LangevinSpec};
use wickbridge::observables::{moments, partition_exact, partition_from_lattice, partition_function};
use wickbridge::verify::{run_all, run_scenario, scenarios};
use wickbridge::wick::{GeneratorSpec, SystemDoc};
use wickbridge::{Error, Result};

const EXIT_NUMERICAL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "wickbridge", version, about = "Diffusion/quantum kernel toolbox", long_about = None)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a closed-form kernel over the grid for a fixed source point
    Kernel(KernelArgs),
    /// Evolve an initial field with one of the propagation engines
    Propagate(PropagateArgs),
    /// Stochastic sampling (path ensembles and kernel estimates)
    Sample {
        #[command(subcommand)]
        which: SampleCmd,
    },
    /// Harmonic partition function, closed-form or lattice-diagonal
    Partition(PartitionArgs),
    /// Run registered verification scenarios
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GridArgs {
    /// Left grid edge
    #[arg(long, default_value_t = -8.0, allow_hyphen_values = true)]
    x_min: f64,
    /// Right grid edge
    #[arg(long, default_value_t = 8.0, allow_hyphen_values = true)]
    x_max: f64,
    /// Node count
    #[arg(long, default_value_t = 401)]
    nodes: usize,
}

impl GridArgs {
    fn build(&self) -> Result<Grid1D> {
        Grid1D::new(self.x_min, self.x_max, self.nodes)
    }
}

#[derive(Args)]
struct KernelArgs {
    /// JSON system document
    #[arg(long)]
    spec: PathBuf,
    /// Source point
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    xa: f64,
    /// Duration (real time for quantum specs, diffusion time otherwise)
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    /// Evaluate a quantum kernel at t = -i tau (result is real)
    #[arg(long, requires = "tau")]
    continued: bool,
    /// Imaginary-time extent for --continued
    #[arg(long)]
    tau: Option<f64>,
    #[command(flatten)]
    grid: GridArgs,
    /// Output CSV path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    /// Transfer-matrix composition of the short-time Euclidean kernel
    Lattice,
    /// Crank-Nicolson master-equation solver
    Cn,
    /// Split-operator quantum propagation
    Splitstep,
}

#[derive(Args)]
struct PropagateArgs {
    /// JSON system document
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum)]
    engine: Engine,
    /// Evolution time
    #[arg(long)]
    t: f64,
    /// Number of time steps
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[command(flatten)]
    grid: GridArgs,
    /// Initial Gaussian center
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    x0: f64,
    /// Initial Gaussian width
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    /// Initial wave number (splitstep engine only)
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    k0: f64,
    /// Symmetrized splitting (splitstep engine only)
    #[arg(long)]
    strang: bool,
    /// Write an intermediate snapshot CSV every N steps (cn engine, needs --out)
    #[arg(long, default_value_t = 0)]
    snapshot_every: usize,
    /// Output CSV path for the final field (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SampleCmd {
    /// Euler-Maruyama path ensemble with summary statistics
    Langevin(LangevinArgs),
    /// Bridge-sampling kernel estimate for a potential-like generator
    FeynmanKac(FkArgs),
}

#[derive(Args)]
struct LangevinArgs {
    /// JSON system document
    #[arg(long)]
    spec: PathBuf,
    /// Initial position
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    y0: f64,
    /// Final time
    #[arg(long)]
    t: f64,
    /// Number of time steps
    #[arg(long, default_value_t = 200)]
    steps: usize,
    /// Number of paths
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    /// RNG seed (required: every run must be reproducible)
    #[arg(long)]
    seed: u64,
    /// Also write the full path ensemble as CSV
    #[arg(long)]
    paths_out: Option<PathBuf>,
    /// Output JSON path for the statistics (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FkArgs {
    /// JSON system document
    #[arg(long)]
    spec: PathBuf,
    /// Source point
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    xa: f64,
    /// Target point
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    xb: f64,
    /// Kernel duration
    #[arg(long)]
    tau: f64,
    /// Bridge discretization steps
    #[arg(long, default_value_t = 200)]
    steps: usize,
    /// Number of bridge samples
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// RNG seed (required: every run must be reproducible)
    #[arg(long)]
    seed: u64,
    /// Output JSON path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PartitionMethod {
    /// Diagonal quadrature of the closed-form kernel
    Closed,
    /// Lattice-diagonal trace with a step-refinement table
    Lattice,
}

#[derive(Args)]
struct PartitionArgs {
    /// Inverse-diffusion mass parameter
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Oscillator frequency
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Imaginary-time extent (beta times hbar)
    #[arg(long)]
    beta_hbar: f64,
    #[arg(long, value_enum, default_value_t = PartitionMethod::Closed)]
    method: PartitionMethod,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run one scenario by name
    #[arg(long, conflicts_with_all = ["all", "list"])]
    scenario: Option<String>,
    /// Run every registered scenario
    #[arg(long)]
    all: bool,
    /// List registered scenarios and exit
    #[arg(long, conflicts_with = "all")]
    list: bool,
    /// Also write the JSON reports to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}

fn run(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::Kernel(args) => cmd_kernel(args),
        Cmd::Propagate(args) => cmd_propagate(args),
        Cmd::Sample { which: SampleCmd::Langevin(args) } => cmd_sample_langevin(args),
        Cmd::Sample { which: SampleCmd::FeynmanKac(args) } => cmd_sample_fk(args),
        Cmd::Partition(args) => cmd_partition(args),
        Cmd::Verify(args) => cmd_verify(args),
    }
}

/// Library errors split into the two failing exit classes: malformed or
/// unsupported requests are usage errors, everything else is numerical.
fn exit_for(e: &Error) -> u8 {
    match e {
        Error::UnknownScenario(_)
        | Error::GridMismatch(_)
        | Error::UnsupportedSpec(_)
        | Error::Io(_)
        | Error::Json(_) => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

fn usage(msg: &str) -> Result<ExitCode> {
    eprintln!("usage error: {msg}");
    Ok(ExitCode::from(EXIT_USAGE))
}

/// Relative output paths are resolved against `WICKBRIDGE_OUT_DIR` when set.
fn resolve_out(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Some(dir) = std::env::var_os("WICKBRIDGE_OUT_DIR") {
            return PathBuf::from(dir).join(path);
        }
    }
    path.to_path_buf()
}

fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(fs::File::create(resolve_out(p))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn load_doc(path: &Path) -> Result<SystemDoc> {
    let text = fs::read_to_string(path)?;
    let doc: SystemDoc = serde_json::from_str(&text)?;
    doc.validate()?;
    Ok(doc)
}

fn cmd_kernel(args: KernelArgs) -> Result<ExitCode> {
    let doc = load_doc(&args.spec)?;
    let grid = args.grid.build()?;
    let mut w = open_out(&args.out)?;

    if let Some(q) = doc.as_quantum() {
        if args.continued {
            let tau = args.tau.expect("clap enforces --tau with --continued");
            let t = Complex64::new(0.0, -tau);
            let mut values = Vec::with_capacity(grid.n);
            for x in grid.nodes() {
                let k = q.kernel(x, args.xa, t)?;
                if k.im.abs() > 1e-9 * (1.0 + k.re.abs()) {
                    return Err(Error::Domain(format!(
                        "continued kernel has imaginary part {:.3e} at x = {x}",
                        k.im
                    )));
                }
                values.push(k.re);
            }
            RealField::new(grid, values)?.write_csv(&mut w)?;
            return Ok(ExitCode::SUCCESS);
        }
        let Some(t) = args.t else {
            return usage("quantum kernels need --t (or --continued with --tau)");
        };
        let tc = Complex64::new(t, 0.0);
        let mut values = Vec::with_capacity(grid.n);
        for x in grid.nodes() {
            values.push(q.kernel(x, args.xa, tc)?);
        }
        ComplexField::new(grid, values)?.write_csv(&mut w)?;
        return Ok(ExitCode::SUCCESS);
    }

    let e: EuclideanKernelSpec = doc.as_euclidean().expect("non-quantum docs are Euclidean");
    let Some(t) = args.t else {
        return usage("diffusion kernels need --t");
    };
    if args.continued {
        return usage("--continued applies to quantum specs only");
    }
    let mut values = Vec::with_capacity(grid.n);
    for x in grid.nodes() {
        values.push(e.kernel(x, args.xa, t)?);
    }
    RealField::new(grid, values)?.write_csv(&mut w)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_propagate(args: PropagateArgs) -> Result<ExitCode> {
    let doc = load_doc(&args.spec)?;
    let grid = args.grid.build()?;
    if args.sigma <= 0.0 {
        return usage("--sigma must be positive");
    }
    let slicing = TimeSlicing::over(args.t, args.steps)?;

    match args.engine {
        Engine::Lattice => {
            let Some(g) = doc.as_generator() else {
                return usage("engine 'lattice' needs a diffusion-generator spec (brown, harmonic-euclid, ou)");
            };
            let init = RealField::gaussian(grid, args.x0, args.sigma);
            let out = euclid_propagate(&init, &g, slicing)?;
            out.write_csv(open_out(&args.out)?)?;
            let m = moments(&out)?;
            eprintln!("{}", serde_json::to_string(&m)?);
        }
        Engine::Cn => {
            let fp = match doc {
                SystemDoc::Brown { d } => FokkerPlanckSpec::diffusion(d)?,
                SystemDoc::DriftBrown { d, v } => {
                    FokkerPlanckSpec::new(d, coeff_fn(move |_, _| v), coeff_fn(|_, _| 1.0))?
                }
                SystemDoc::Ou { d, eta } => {
                    SmoluchowskiSpec::new(d, position_fn(move |x| eta * x), 1.0)?.to_fokker_planck()
                }
                _ => {
                    return usage("engine 'cn' needs a density-evolution spec (brown, drift-brown, ou)")
                }
            };
            let init = RealField::gaussian(grid, args.x0, args.sigma);
            let config = SolverConfig::new(slicing.dt(), Boundary::ZeroFlux)?;
            let snap_prefix = args.out.clone();
            let every = args.snapshot_every;
            let (out, report) = evolve_with_snapshots(
                &init,
                &fp,
                args.t,
                &config,
                |step, _t, values| {
                    if every > 0 && step % every == 0 {
                        if let Some(prefix) = &snap_prefix {
                            let path = resolve_out(prefix).with_extension(format!("{step:05}.csv"));
                            if let Ok(f) = fs::File::create(path) {
                                let field = RealField { grid, values: values.to_vec() };
                                let _ = field.write_csv(f);
                            }
                        }
                    }
                },
            )?;
            out.write_csv(open_out(&args.out)?)?;
            eprintln!("{}", serde_json::to_string(&report)?);
        }
        Engine::Splitstep => {
            let Some(h) = doc.as_hamiltonian() else {
                return usage("engine 'splitstep' needs a quantum spec (free, qho)");
            };
            let order = if args.strang { SplittingOrder::Strang } else { SplittingOrder::First };
            let init = ComplexField::gaussian_packet(grid, args.x0, args.sigma, args.k0);
            let out = splitstep_quantum_propagate(&init, &h, slicing, order)?;
            out.write_csv(open_out(&args.out)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sample_langevin(args: LangevinArgs) -> Result<ExitCode> {
    let doc = load_doc(&args.spec)?;
    let spec = match doc {
        SystemDoc::Brown { d } => LangevinSpec::free(d)?,
        SystemDoc::DriftBrown { d, v } => LangevinSpec::drifted(d, v)?,
        SystemDoc::Ou { d, eta } => LangevinSpec::ou(d, eta)?,
        _ => return usage("langevin sampling needs a stochastic spec (brown, drift-brown, ou)"),
    };
    let ensemble = simulate_ensemble(&spec, args.y0, args.t, args.steps, args.paths, args.seed)?;
    if let Some(p) = &args.paths_out {
        ensemble.write_csv(fs::File::create(resolve_out(p))?)?;
    }
    let finals = ensemble.at_step(args.steps);
    let n = finals.len() as f64;
    let mean = finals.iter().sum::<f64>() / n;
    let variance = finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let stats = serde_json::json!({
        "seed": args.seed,
        "n_paths": args.paths,
        "n_steps": args.steps,
        "dt": ensemble.dt,
        "t_final": args.t,
        "mean": mean,
        "variance": variance,
        "std_err_mean": (variance / n).sqrt(),
    });
    writeln!(open_out(&args.out)?, "{}", serde_json::to_string_pretty(&stats)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sample_fk(args: FkArgs) -> Result<ExitCode> {
    let doc = load_doc(&args.spec)?;
    let Some(g) = doc.as_generator() else {
        return usage("feynman-kac needs a diffusion-generator spec (brown, harmonic-euclid)");
    };
    let est = feynman_kac_estimate(
        args.xa, args.xb, args.tau, &g, args.steps, args.samples, args.seed,
    )?;
    writeln!(open_out(&args.out)?, "{}", serde_json::to_string_pretty(&est)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_partition(args: PartitionArgs) -> Result<ExitCode> {
    let grid = args.grid.build()?;
    let exact = partition_exact(args.omega, args.beta_hbar);
    match args.method {
        PartitionMethod::Closed => {
            let z = partition_function(args.mu, args.omega, args.beta_hbar, grid)?;
            let out = serde_json::json!({ "z": z, "exact": exact, "abs_error": (z - exact).abs() });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        PartitionMethod::Lattice => {
            let g = GeneratorSpec::harmonic(args.mu, args.omega)?;
            println!("dt,steps,z,abs_error");
            for &steps in &[25usize, 50, 100, 200, 400] {
                let slicing = TimeSlicing::over(args.beta_hbar, steps)?;
                let k = wickbridge::lattice::euclid_kernel_matrix(&g, grid, slicing)?;
                let z = partition_from_lattice(&k);
                println!("{:.6e},{steps},{z:.12e},{:.6e}", slicing.dt(), (z - exact).abs());
            }
            println!("# closed-form value: {exact:.12e}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    if args.list {
        for s in scenarios() {
            println!("{}: {}", s.name, s.description);
        }
        return Ok(ExitCode::SUCCESS);
    }
    let mut reports = match (&args.scenario, args.all) {
        (Some(name), false) => vec![run_scenario(name)?],
        (None, true) => run_all()?,
        _ => return usage("pass exactly one of --scenario NAME, --all, or --list"),
    };
    if let Some(p) = &args.out {
        let path = resolve_out(p);
        for r in &mut reports {
            r.artifacts.push(path.display().to_string());
        }
        fs::write(&path, serde_json::to_string_pretty(&reports)?)?;
    }
    println!("{}", serde_json::to_string_pretty(&reports)?);
    let all_passed = reports.iter().all(|r| r.passed);
    for r in &reports {
        eprintln!(
            "{} [{}] error {:.3e} vs tolerance {:.3e} ({:.2}s)",
            r.scenario,
            if r.passed { "pass" } else { "FAIL" },
            r.measured_error,
            r.tolerance,
            r.runtime_seconds
        );
    }
    Ok(if all_passed { ExitCode::SUCCESS } else { ExitCode::from(EXIT_NUMERICAL) })
}
