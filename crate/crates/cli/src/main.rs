use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use entsub_cli::corpus::{format_table, run_corpus, write_csv};
use entsub_cli::gridfile::parse_axis;
use entsub_cli::instance::read_instance;
use entsub_cli::run::{run, Command, Settings, Which, EXIT_ERROR, EXIT_OK};
use entsub_cli::write_heat_csv;
use entsub_core::Axis;

/// Sharp constants and numerical checks for rank-one Brascamp–Lieb and
/// entropy subadditivity instances.
#[derive(Parser)]
#[command(name = "entsub", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Relative rank tolerance (overrides the instance).
    #[arg(long, global = true, allow_hyphen_values = true)]
    tol_rank: Option<f64>,
    /// Tolerance for subset equalities and the scaling condition (overrides the instance).
    #[arg(long, global = true, allow_hyphen_values = true)]
    tol_eq: Option<f64>,
    /// Grid for 1-dim densities and factors, `lo:hi:count`.
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = axis, default_value = "-12:12:2048")]
    grid_1d: Axis,
    /// Per-axis grid for 2- and 3-dim densities, `lo:hi:count`.
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = axis, default_value = "-8:8:256")]
    grid_2d: Axis,
    /// Write the report (or corpus table) here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// CSV output: heat-flow scan for `verify`, summary for `corpus`.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Stamp reports with the current Unix time.
    #[arg(long, global = true)]
    timestamp: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide whether the weights lie in the feasibility polytope.
    Feasibility { instance: PathBuf },
    /// The constant D, its splitting tree and whether it is attained.
    Constant { instance: PathBuf },
    /// The matrix R turning the family into a weighted tight frame.
    Frame { instance: PathBuf },
    /// Block structure of the extremizing densities.
    Extremizers { instance: PathBuf },
    /// Grid checks of the inequalities against the computed constant.
    Verify {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = WhichArg::All)]
        which: WhichArg,
    },
    /// Summary of `verify --which all` over every `.inst` file in a directory.
    Corpus {
        dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichArg {
    Entropy,
    Bl,
    Fisher,
    Eigen,
    All,
}

impl From<WhichArg> for Which {
    fn from(w: WhichArg) -> Which {
        match w {
            WhichArg::Entropy => Which::Entropy,
            WhichArg::Bl => Which::Bl,
            WhichArg::Fisher => Which::Fisher,
            WhichArg::Eigen => Which::Eigen,
            WhichArg::All => Which::All,
        }
    }
}

fn axis(s: &str) -> Result<Axis, String> {
    parse_axis(s)
}

fn positive(name: &str, v: Option<f64>) -> Result<Option<f64>, String> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(format!("--{name} must be positive, got {x}")),
        _ => Ok(v),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main_inner(cli: Cli) -> Result<i32, String> {
    let c = cli.common;
    let timestamp = c.timestamp.then(|| {
        std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
    });
    let settings = Settings {
        rank_tol: positive("tol-rank", c.tol_rank)?,
        eq_tol: positive("tol-eq", c.tol_eq)?,
        grid_1d: c.grid_1d,
        grid_2d: c.grid_2d,
        timestamp,
        heat_scan: c.csv.is_some(),
    };
    let (path, cmd) = match cli.cmd {
        Cmd::Corpus { dir, jobs } => {
            let rows = run_corpus(&dir, &settings, jobs)?;
            emit(&format_table(&rows), c.out.as_deref())?;
            if let Some(p) = &c.csv {
                write_csv(&rows, p)?;
            }
            return Ok(EXIT_OK);
        }
        Cmd::Feasibility { instance } => (instance, Command::Feasibility),
        Cmd::Constant { instance } => (instance, Command::Constant),
        Cmd::Frame { instance } => (instance, Command::Frame),
        Cmd::Extremizers { instance } => (instance, Command::Extremizers),
        Cmd::Verify { instance, which } => (instance, Command::Verify(which.into())),
    };
    let inst = read_instance(&path)?;
    let outcome = run(&inst, &settings, cmd)?;
    emit(&outcome.report.to_toml(), c.out.as_deref())?;
    if let (Some(p), Command::Verify(_)) = (&c.csv, cmd) {
        write_heat_csv(outcome.heat.as_ref(), p)?;
    }
    Ok(outcome.exit)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits with 2 on usage errors, which here means "infeasible"
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR as u8 } else { 0 });
        }
    };
    let code = match main_inner(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    };
    ExitCode::from(code as u8)
}
