use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use lorouter::analytics::{
    self, random_signals, result_cells, Cell, FixedParams, RouterKind, SweepParameter, SweepSpec,
    Table,
};
use lorouter::format;
use lorouter::router::{self, ControlQubit, RouterResult, SignalQubit, SimOptions};
use lorouter::verify::{self, VerifyConfig};

#[derive(Parser, Debug)]
#[command(
    name = "lorouter",
    version,
    about = "Linear-optical quantum router simulator"
)]
struct Cli {
    /// Read angle arguments in radians instead of degrees.
    #[arg(long, global = true)]
    radians: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fixed-gate router.
    Route {
        #[command(flatten)]
        common: Common,
        /// Attenuate output 1 so the success probability is the same for every theta.
        #[arg(long)]
        equalize: bool,
        /// Run a circuit document instead of the built-in topology.
        #[arg(long)]
        circuit: Option<PathBuf>,
    },
    /// Router with two tunable c-phase gates.
    Tunable {
        #[command(flatten)]
        common: Common,
        /// Gate phase (degrees unless --radians).
        #[arg(long, default_value_t = 180.0, allow_negative_numbers = true)]
        phi: f64,
        #[arg(long)]
        circuit: Option<PathBuf>,
    },
    /// Several signals routed by one control photon.
    Multi {
        #[command(flatten)]
        common: Common,
        /// Number of signal photons.
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Parameter sweeps and figure tables.
    Sweep(SweepArgs),
    /// Run the acceptance suite.
    Verify {
        #[arg(long, default_value_t = VerifyConfig::default().seed)]
        seed: u64,
        /// Directory for the CSV artifacts.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Control angle theta in [0, 90] degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    theta: f64,
    /// Control phase vartheta in [0, 360) degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    vartheta: f64,
    /// Signal amplitude of H, as `re` or `re,im`.
    #[arg(long, value_parser = parse_complex, allow_negative_numbers = true)]
    alpha: Option<Complex64>,
    /// Signal amplitude of V, as `re` or `re,im`.
    #[arg(long, value_parser = parse_complex, allow_negative_numbers = true)]
    beta: Option<Complex64>,
    /// Draw signal states uniformly on the Bloch sphere.
    #[arg(long)]
    random_signal: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Efficiency of the polarization-analysis detector.
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ParamArg {
    Theta,
    Phi,
    ChiLimit,
    N,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum RouterArg {
    Fixed,
    Equalized,
    Tunable,
    Multi,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Reproduce a figure table: 3 (fixed router) or 5 (tunable extremes).
    #[arg(long, conflicts_with = "param")]
    figure: Option<u32>,
    /// Swept parameter.
    #[arg(long, value_enum)]
    param: Option<ParamArg>,
    #[arg(long, allow_negative_numbers = true)]
    lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    hi: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Router used by a theta sweep.
    #[arg(long, value_enum, default_value_t = RouterArg::Fixed)]
    router: RouterArg,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    theta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    vartheta: f64,
    #[arg(long, default_value_t = 180.0, allow_negative_numbers = true)]
    phi: f64,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let mut parts = s.split(',');
    let num = |p: Option<&str>| -> Result<f64, String> {
        p.unwrap_or("0")
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("'{s}' is not `re` or `re,im`"))
    };
    let re = num(parts.next())?;
    let im = num(parts.next())?;
    if parts.next().is_some() {
        return Err(format!("'{s}' is not `re` or `re,im`"));
    }
    Ok(Complex64::new(re, im))
}

/// Failure modes mapped onto exit codes.
enum Failure {
    Verification,
    Usage(String),
}

impl From<lorouter::Error> for Failure {
    fn from(e: lorouter::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(format!("I/O error: {e}"))
    }
}

struct Angles {
    radians: bool,
}

impl Angles {
    fn get(&self, v: f64) -> f64 {
        if self.radians {
            v
        } else {
            v.to_radians()
        }
    }
}

fn signals(common: &Common, n: usize) -> Result<Vec<SignalQubit>, Failure> {
    match (common.random_signal, common.alpha, common.beta) {
        (true, None, None) => Ok(random_signals(common.seed, n)),
        (true, _, _) => Err(Failure::Usage(
            "--random-signal cannot be combined with --alpha/--beta".into(),
        )),
        (false, None, None) => Ok(vec![SignalQubit::horizontal(); n]),
        (false, a, b) => {
            let zero = Complex64::new(0.0, 0.0);
            let s = SignalQubit::new(a.unwrap_or(zero), b.unwrap_or(zero))?;
            Ok(vec![s; n])
        }
    }
}

fn emit(table: &Table, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(path) => table.write_csv(fs::File::create(path)?)?,
        None => table.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn single_row(
    params: &[(&str, f64)],
    result: &RouterResult,
    p_analytic: Option<f64>,
    seed: u64,
) -> Table {
    let names: Vec<&str> = params.iter().map(|p| p.0).collect();
    let mut table = Table::new(&names);
    table.comments.push(format!("seed={seed}"));
    let mut row: Vec<Cell> = params.iter().map(|p| Cell::Num(p.1)).collect();
    row.extend(result_cells(Some(result), p_analytic));
    table.rows.push(row);
    table
}

fn run_document(
    path: &Path,
    phi: Option<f64>,
    signal: SignalQubit,
    control: &ControlQubit,
    options: &SimOptions,
) -> Result<RouterResult, Failure> {
    let text = fs::read_to_string(path)?;
    let spec =
        format::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(router::run_spec(&spec, phi, &[signal], control, options)?.result)
}

fn sweep_spec(args: &SweepArgs, angles: &Angles) -> Result<SweepSpec, Failure> {
    let mut fixed = FixedParams {
        router: match args.router {
            RouterArg::Fixed => RouterKind::Fixed { equalize: false },
            RouterArg::Equalized => RouterKind::Fixed { equalize: true },
            RouterArg::Tunable => RouterKind::Tunable,
            RouterArg::Multi => RouterKind::Multi,
        },
        theta: angles.get(args.theta),
        vartheta: angles.get(args.vartheta),
        phi: angles.get(args.phi),
        n: args.n,
        efficiency: args.eta,
        seed: args.seed,
        ..FixedParams::default()
    };
    let (parameter, lo, hi, points) = match (args.figure, args.param) {
        (Some(3), None) => {
            fixed.router = RouterKind::Fixed { equalize: false };
            (SweepParameter::Theta, 0.0, 90.0, 101)
        }
        (Some(5), None) => (SweepParameter::ChiLimit, 0.0, 90.0, 31),
        (Some(f), None) => {
            return Err(Failure::Usage(format!(
                "no table for figure {f}; use 3 or 5"
            )))
        }
        (None, Some(p)) => match p {
            ParamArg::Theta => (SweepParameter::Theta, 0.0, 90.0, 51),
            ParamArg::Phi => (SweepParameter::Phi, 0.0, 180.0, 51),
            ParamArg::ChiLimit => (SweepParameter::ChiLimit, 0.0, 90.0, 31),
            ParamArg::N => (SweepParameter::N, 1.0, 3.0, 0),
        },
        (None, None) => return Err(Failure::Usage("give --figure or --param".into())),
        (Some(_), Some(_)) => unreachable!("clap rejects --figure with --param"),
    };
    let angle = |v: f64| {
        if parameter == SweepParameter::N {
            v
        } else if args.lo.is_some() || args.hi.is_some() {
            angles.get(v)
        } else {
            v.to_radians()
        }
    };
    Ok(SweepSpec {
        parameter,
        lo: angle(args.lo.unwrap_or(lo)),
        hi: angle(args.hi.unwrap_or(hi)),
        points: args.points.unwrap_or(points),
        fixed,
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let angles = Angles {
        radians: cli.radians,
    };
    match cli.command {
        Command::Route {
            common,
            equalize,
            circuit,
        } => {
            let (th, vt) = (angles.get(common.theta), angles.get(common.vartheta));
            let ctl = ControlQubit::new(th, vt)?;
            let signal = signals(&common, 1)?[0];
            let opts = SimOptions {
                efficiency: common.eta,
                ..SimOptions::default()
            };
            let (result, p) = match &circuit {
                Some(path) => (run_document(path, None, signal, &ctl, &opts)?, None),
                None => {
                    let (r, p) = analytics::evaluate(
                        RouterKind::Fixed { equalize },
                        &[signal],
                        th,
                        vt,
                        0.0,
                        &opts,
                    )?;
                    (r, Some(p))
                }
            };
            let table = single_row(&[("theta", th), ("vartheta", vt)], &result, p, common.seed);
            emit(&table, common.output.as_deref())
        }
        Command::Tunable {
            common,
            phi,
            circuit,
        } => {
            let (th, vt, phi) = (
                angles.get(common.theta),
                angles.get(common.vartheta),
                angles.get(phi),
            );
            let ctl = ControlQubit::new(th, vt)?;
            let signal = signals(&common, 1)?[0];
            let opts = SimOptions {
                efficiency: common.eta,
                ..SimOptions::default()
            };
            let (result, p) = match &circuit {
                Some(path) => (run_document(path, Some(phi), signal, &ctl, &opts)?, None),
                None => {
                    let (r, p) =
                        analytics::evaluate(RouterKind::Tunable, &[signal], th, vt, phi, &opts)?;
                    (r, Some(p))
                }
            };
            let params = [("theta", th), ("vartheta", vt), ("phi", phi)];
            emit(
                &single_row(&params, &result, p, common.seed),
                common.output.as_deref(),
            )
        }
        Command::Multi { common, n } => {
            let (th, vt) = (angles.get(common.theta), angles.get(common.vartheta));
            if n == 0 {
                return Err(Failure::Usage("--n must be at least 1".into()));
            }
            let sig = signals(&common, n)?;
            let opts = SimOptions {
                efficiency: common.eta,
                ..SimOptions::default()
            };
            let (r, p) =
                analytics::evaluate(RouterKind::Multi, &sig, th, vt, std::f64::consts::PI, &opts)?;
            let params = [("n", n as f64), ("theta", th), ("vartheta", vt)];
            emit(
                &single_row(&params, &r, Some(p), common.seed),
                common.output.as_deref(),
            )
        }
        Command::Sweep(args) => {
            let spec = sweep_spec(&args, &angles)?;
            let table = analytics::sweep(&spec)?;
            emit(&table, args.output.as_deref())
        }
        Command::Verify { seed, output } => {
            let cfg = VerifyConfig { seed };
            let reports = verify::run_all(&cfg);
            let mut out = io::stdout().lock();
            for r in &reports {
                write!(out, "{r}")?;
            }
            if let Some(dir) = output {
                fs::create_dir_all(&dir)?;
                for (name, csv) in verify::artifacts(&cfg)? {
                    fs::write(dir.join(name), csv)?;
                }
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            writeln!(
                out,
                "{} of {} criteria passed",
                reports.len() - failed,
                reports.len()
            )?;
            if failed > 0 {
                return Err(Failure::Verification);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
