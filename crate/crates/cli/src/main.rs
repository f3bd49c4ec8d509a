use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use qcmin::brute::brute_force;
use qcmin::format::{ProblemFile, ResultFile};
use qcmin::generate::gen_instance;
use qcmin::{Bound, Mode, ProblemSpec, Rational, SolveResult, SolverOptions, Status, TestPointKind};

/// Largest dimension and radius accepted by `--verify`.
const VERIFY_MAX_DIM: usize = 4;
const VERIFY_MAX_RADIUS: u64 = 12;

const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "qcmin", version, about = "Exact integer minimization of quasiconvex polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and print the result as JSON.
    Solve(SolveArgs),
    /// Print a random quasiconvex instance as a problem file.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Feasibility,
    Minimize,
}

#[derive(Clone, Copy, ValueEnum)]
enum PointsArg {
    Cross,
    Net,
}

#[derive(clap::Args)]
struct SolveArgs {
    /// Problem file; standard input when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Bound radius, replacing the one in the file.
    #[arg(long)]
    radius: Option<u64>,
    #[arg(long = "test-points", value_enum, default_value = "net")]
    test_points: PointsArg,
    /// Number of test points at the top dimension.
    #[arg(long)]
    m: Option<usize>,
    /// Rational such as `1/2`.
    #[arg(long)]
    gamma: Option<Rational>,
    #[arg(long)]
    sigma: Option<Rational>,
    /// Write trace events as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Cross-check against exhaustive enumeration.
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    parallel: bool,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    d: u32,
    #[arg(long, default_value_t = 2)]
    s: usize,
    #[arg(long, default_value_t = 5)]
    radius: u64,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn exit_code(s: Status) -> u8 {
    match s {
        Status::Optimal | Status::Feasible => 0,
        Status::Infeasible => 1,
        Status::BoundExhausted => 2,
    }
}

fn read_problem(path: Option<&PathBuf>) -> Result<ProblemSpec, Failure> {
    let mut text = String::new();
    match path {
        Some(p) => {
            File::open(p)
                .and_then(|mut f| f.read_to_string(&mut text))
                .map_err(|e| Failure(format!("{}: {e}", p.display())))?;
        }
        None => {
            io::stdin().read_to_string(&mut text)?;
        }
    }
    // serde_json reports line and column; field errors name the field
    let file: ProblemFile = serde_json::from_str(&text).map_err(|e| Failure(format!("problem file: {e}")))?;
    file.to_spec().map_err(|e| Failure(format!("problem file: {e}")))
}

fn verify(spec: &ProblemSpec, res: &SolveResult) -> Result<bool, Failure> {
    let radius = spec.bound.as_ref().map_or(&res.bound_used, |b| &b.radius);
    if spec.n > VERIFY_MAX_DIM || *radius > BigInt::from(VERIFY_MAX_RADIUS) {
        return Err(Failure(format!(
            "--verify needs n <= {VERIFY_MAX_DIM} and radius <= {VERIFY_MAX_RADIUS}"
        )));
    }
    let form = spec.bound.as_ref().and_then(|b| b.form.clone());
    let bounded = spec.with_bound(Bound { radius: radius.clone(), form });
    let bf = brute_force(&bounded)?;
    Ok(match spec.mode {
        Mode::Minimize => bf.status == res.status && bf.value == res.objective_value,
        // any feasible point will do; check it against the enumeration's verdict
        Mode::Feasibility => match &res.point {
            Some(p) => {
                let x: Option<Vec<i64>> = p.iter().map(|v| i64::try_from(v).ok()).collect();
                bf.status == Status::Feasible && x.is_some_and(|x| qcmin::brute::is_feasible(&bounded, &x).unwrap_or(false))
            }
            None => bf.status == res.status,
        },
    })
}

fn solve(args: &SolveArgs) -> Result<u8, Failure> {
    let mut spec = read_problem(args.input.as_ref())?;
    if let Some(m) = args.mode {
        spec.mode = match m {
            ModeArg::Feasibility => Mode::Feasibility,
            ModeArg::Minimize => Mode::Minimize,
        };
    }
    if let Some(r) = args.radius {
        let form = spec.bound.as_ref().and_then(|b| b.form.clone());
        spec.bound = Some(Bound { radius: r.into(), form });
    }
    spec.validate()?;
    if args.verify {
        // refuse early when the file already fixes a bound that is too large
        if let Some(b) = &spec.bound {
            if spec.n > VERIFY_MAX_DIM || b.radius > BigInt::from(VERIFY_MAX_RADIUS) {
                return Err(Failure(format!(
                    "--verify needs n <= {VERIFY_MAX_DIM} and radius <= {VERIFY_MAX_RADIUS}"
                )));
            }
        }
    }
    let defaults = SolverOptions::default();
    let opts = SolverOptions {
        test_points: match args.test_points {
            PointsArg::Cross => TestPointKind::CrossPolytope,
            PointsArg::Net => TestPointKind::SphereNet,
        },
        m: args.m,
        sigma: args.sigma.clone().unwrap_or(defaults.sigma.clone()),
        gamma: args.gamma.clone(),
        parallel: args.parallel,
        trace: args.trace.is_some(),
        ..defaults
    };
    let start = Instant::now();
    let res = qcmin::minimize(&spec, &opts)?;
    let wall_ms = start.elapsed().as_millis() as u64;

    if let Some(path) = &args.trace {
        let mut w = BufWriter::new(File::create(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?);
        for ev in &res.trace {
            serde_json::to_writer(&mut w, ev)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }

    let mut out = ResultFile::from_result(&res, wall_ms);
    if args.verify {
        out.verified = Some(verify(&spec, &res)?);
    }
    writeln!(io::stdout().lock(), "{}", serde_json::to_string_pretty(&out)?)?;
    Ok(exit_code(res.status))
}

fn generate(args: &GenArgs) -> Result<u8, Failure> {
    let spec = gen_instance(args.seed, args.n, args.d, args.s, args.radius)?;
    let file = ProblemFile::from_spec(&spec)?;
    writeln!(io::stdout().lock(), "{}", serde_json::to_string_pretty(&file)?)?;
    Ok(0)
}

fn main() -> ExitCode {
    // clap's own usage-error code (2) is taken by BoundExhausted
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let res = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Gen(a) => generate(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
