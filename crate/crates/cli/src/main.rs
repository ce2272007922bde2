//! `sensor-place`: generate systems, evaluate sensor sets, run the greedy
//! placements, bounds, sweeps and the exhaustive oracle.
//!
//! Exit codes: 0 success, 2 usage, 3 infeasible budget, 4 excluded parameter
//! domain (`mu = 1`), 5 size cap.

mod commands;
mod failure;
mod source;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sensor_place_core::{BoundTarget, GreedyOptions};

use commands::{OracleAction, PlaceMode};
use failure::{CliResult, Failure};
use source::GenSpec;

#[derive(Parser)]
#[command(name = "sensor-place", version, about = "Sensor placement for optimal Kalman filtering")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "SENSOR_PLACE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a system description as JSON.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Error statistics of one sensor set.
    Eval {
        #[command(flatten)]
        input: SystemInput,
        /// 1-based sensor indices, e.g. `3,5`; empty for no sensors.
        #[arg(long, default_value = "")]
        sensors: String,
        /// Also report the log-volume of the error ellipsoid at this level.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Greedy placement: minimal set meeting a budget (p1) or best set of size r (p2).
    Place {
        #[command(flatten)]
        input: SystemInput,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Log-det budget R (p1).
        #[arg(long, allow_hyphen_values = true)]
        budget: Option<f64>,
        /// Cardinality budget (p2).
        #[arg(long)]
        r: Option<usize>,
        /// Number of sensors actually placed (p2, default r).
        #[arg(long)]
        l: Option<usize>,
        #[command(flatten)]
        greedy: GreedyFlags,
    },
    /// Mean-square-error limits for a sensor count.
    Bounds {
        #[command(flatten)]
        input: SystemInput,
        #[arg(long, default_value = "")]
        sensors: String,
        #[arg(long, value_enum, default_value = "x0")]
        target: Target,
        /// Error level for the minimum sensor count and minimum interval length.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Greedy p2 values over a range of budgets, as CSV.
    Sweep {
        #[command(flatten)]
        input: SystemInput,
        #[arg(long, value_enum, default_value = "p2")]
        mode: SweepMode,
        #[arg(long, default_value_t = 0)]
        r_from: usize,
        /// Defaults to n.
        #[arg(long)]
        r_to: Option<usize>,
        #[arg(long, default_value_t = 1)]
        step: usize,
        #[command(flatten)]
        greedy: GreedyFlags,
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Exhaustive enumeration of all 2^n sensor sets (n <= 20).
    Oracle {
        #[command(flatten)]
        input: SystemInput,
        #[command(flatten)]
        action: OracleArgs,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Integrator chain: -1 on the diagonal, 1 on the subdiagonal.
    Chain {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long)]
        k: usize,
        /// Identity covariances and sigma = 1; explicit values must agree.
        #[arg(long)]
        identity_cov: bool,
        /// Measurement noise standard deviation [default: 1].
        #[arg(long)]
        sigma: Option<f64>,
        /// Prior covariance as a multiple of the identity [default: 1].
        #[arg(long)]
        cov_x0: Option<f64>,
        /// Process noise covariance as a multiple of the identity [default: 1].
        #[arg(long)]
        cov_w: Option<f64>,
        #[arg(long)]
        zero_process_noise: bool,
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Diffusion on a rows x cols grid with symmetric nearest-neighbour coupling.
    Grid {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        coupling: f64,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long)]
        zero_process_noise: bool,
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Random system with SPD covariances, reproducible from the seed.
    Random {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scale the dynamics to this spectral norm.
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        time_varying: bool,
        #[arg(long)]
        zero_process_noise: bool,
        #[arg(short, long)]
        output: Option<String>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SystemInput {
    /// System JSON file, or `-` for stdin.
    #[arg(long)]
    system: Option<String>,
    /// Inline generator, e.g. `chain:n=5,k=5` or `grid:rows=3,cols=3,coupling=0.2,k=20,zero`.
    #[arg(long = "gen")]
    generator: Option<String>,
}

#[derive(Args)]
struct GreedyFlags {
    /// Lazy (priority-queue) evaluation of marginal gains.
    #[arg(long)]
    lazy: bool,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct OracleArgs {
    /// Write `bitmask,logdet` CSV to this file (`-` for stdout).
    #[arg(long)]
    dump: Option<String>,
    /// Exit 0 iff no diminishing-returns violation exists.
    #[arg(long)]
    check_supermodularity: bool,
    /// `p1 R` or `p2 r`.
    #[arg(long, num_args = 2, value_names = ["MODE", "VALUE"], allow_hyphen_values = true)]
    optimal: Option<Vec<String>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    P1,
    P2,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepMode {
    P2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    X0,
    Xk,
}

impl SystemInput {
    fn load(&self) -> CliResult<sensor_place_core::LtvSystem> {
        source::load(self.system.as_deref(), self.generator.as_deref())
    }
}

impl GreedyFlags {
    fn options(&self) -> GreedyOptions {
        GreedyOptions { lazy: self.lazy, parallel: !self.lazy }
    }
}

fn place_mode(mode: Mode, budget: Option<f64>, r: Option<usize>, l: Option<usize>) -> CliResult<PlaceMode> {
    match (mode, budget, r, l) {
        (Mode::P1, Some(budget), None, None) => Ok(PlaceMode::MinSet { budget }),
        (Mode::P1, None, _, _) => Err(Failure::usage("--mode p1 requires --budget")),
        (Mode::P1, _, _, _) => Err(Failure::usage("--r and --l apply to --mode p2 only")),
        (Mode::P2, None, Some(r), l) => Ok(PlaceMode::Budgeted { r, l: l.unwrap_or(r) }),
        (Mode::P2, Some(_), _, _) => Err(Failure::usage("--budget applies to --mode p1 only")),
        (Mode::P2, None, None, _) => Err(Failure::usage("--mode p2 requires --r")),
    }
}

fn oracle_action(args: OracleArgs) -> CliResult<OracleAction> {
    if let Some(path) = args.dump {
        return Ok(OracleAction::Dump(path));
    }
    if args.check_supermodularity {
        return Ok(OracleAction::CheckSupermodularity);
    }
    let optimal = args.optimal.expect("clap enforces one oracle action");
    let bad = |what: &str| Failure::usage(format!("--optimal: bad {what} {:?}", optimal[1]));
    match optimal[0].as_str() {
        "p1" => Ok(OracleAction::OptimalMinSet(optimal[1].parse().map_err(|_| bad("budget"))?)),
        "p2" => Ok(OracleAction::OptimalBudgeted(optimal[1].parse().map_err(|_| bad("size"))?)),
        other => Err(Failure::usage(format!("--optimal: unknown mode {other:?}, expected p1 or p2"))),
    }
}

fn gen_spec(kind: &GenKind) -> CliResult<(GenSpec, Option<&str>)> {
    Ok(match *kind {
        GenKind::Chain { n, k, identity_cov, sigma, cov_x0, cov_w, zero_process_noise, ref output } => {
            let given = [("--sigma", sigma), ("--cov-x0", cov_x0), ("--cov-w", cov_w)];
            if identity_cov {
                if let Some((flag, _)) = given.iter().find(|(_, v)| v.is_some_and(|v| v != 1.0)) {
                    return Err(Failure::usage(format!("{flag} contradicts --identity-cov")));
                }
            }
            let [sigma, cov_x0, cov_w] = given.map(|(_, v)| v.unwrap_or(1.0));
            let spec = GenSpec::Chain { n: n as usize, k, sigma, cov_x0, cov_w, zero_noise: zero_process_noise };
            (spec, output.as_deref())
        }
        GenKind::Grid { rows, cols, coupling, k, sigma, zero_process_noise, ref output } => {
            (GenSpec::Grid { rows, cols, coupling, k, sigma, zero_noise: zero_process_noise }, output.as_deref())
        }
        GenKind::Random { n, k, seed, mu, time_varying, zero_process_noise, ref output } => (
            GenSpec::Random { n: n as usize, k, seed, mu, time_varying, zero_noise: zero_process_noise },
            output.as_deref(),
        ),
    })
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Gen { kind } => {
            let (spec, output) = gen_spec(&kind)?;
            commands::gen(&spec.build()?, output)
        }
        Command::Eval { input, sensors, epsilon } => {
            let system = input.load()?;
            let set = commands::parse_sensors(&sensors, system.n())?;
            commands::eval(&system, &set, epsilon)
        }
        Command::Place { input, mode, budget, r, l, greedy } => {
            let mode = place_mode(mode, budget, r, l)?;
            commands::place(&input.load()?, mode, greedy.options())
        }
        Command::Bounds { input, sensors, target, alpha } => {
            let system = input.load()?;
            let set = commands::parse_sensors(&sensors, system.n())?;
            let target = match target {
                Target::X0 => BoundTarget::X0,
                Target::Xk => BoundTarget::Xk,
            };
            commands::bounds(&system, &set, target, alpha)
        }
        Command::Sweep { input, mode: SweepMode::P2, r_from, r_to, step, greedy, output } => {
            let system = input.load()?;
            let r_to = r_to.unwrap_or(system.n());
            let csv = commands::sweep(&system, r_from, r_to, step, greedy.options())?;
            commands::write_text(output.as_deref(), &csv)
        }
        Command::Oracle { input, action } => {
            let action = oracle_action(action)?;
            commands::oracle(&input.load()?, action)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            std::process::exit(failure::EXIT_USAGE);
        }
    }
    if let Err(failure) = run(cli.command) {
        eprintln!("error: {failure}");
        std::process::exit(failure.code);
    }
}
