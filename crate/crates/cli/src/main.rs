//! `chordal-qc`: command-line front end.
//!
//! Exit status: 0 success, 2 computed failure, 1 usage or evaluation error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use chordal_qc::carleson::{default_scales, DEFAULT_POSITIONS, DEFAULT_REL_TOL, DEFAULT_VANISH_FACTOR};
use chordal_qc::extension::{DEFAULT_FD_STEP, DEFAULT_MU_TOL};
use chordal_qc::loewner::{Variant, DEFAULT_K, DEFAULT_RK_STEP, DEFAULT_SCAN_MAX};
use chordal_qc::maps::parse_complex;
use chordal_qc::schwarz::{StripGrid, DEFAULT_NY, DEFAULT_PER_DECADE, DEFAULT_X_MIN, DEFAULT_Y_MAX};
use chordal_qc::C64;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "chordal-qc", version, about = "Loewner chains, quasiconformal extensions and Carleson checks on the right half-plane")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DensityKind {
    /// (2Re z)|Ph|² on H
    Vmoa,
    /// |μ|²/(-2Re z) on the reflected strip
    Mu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OuterKind {
    None,
    Zero,
}

fn complex(s: &str) -> Result<C64, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

fn variant(s: &str) -> Result<Variant, String> {
    s.parse::<Variant>().map_err(|e| e.to_string())
}

#[derive(Args, Debug, Clone)]
pub struct Io {
    /// JSON file of flag values; explicit flags win
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report path (written atomically); stdout when absent
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct MapArgs {
    /// Map spec, e.g. `perturbed-identity:0.3` or `compose:cayley,phi`
    #[arg(long)]
    pub map: String,
}

#[derive(Args, Debug, Clone)]
pub struct LevelArgs {
    #[arg(long, value_parser = variant, default_value = "schwarzian")]
    pub variant: Variant,
    /// Level k in (0, 1)
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: f64,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Smallest strip abscissa
    #[arg(long, default_value_t = DEFAULT_X_MIN)]
    pub x_min: f64,
    /// Log-grid columns per decade
    #[arg(long, default_value_t = DEFAULT_PER_DECADE)]
    pub per_decade: usize,
    /// Grid covers |Im z| ≤ y-max
    #[arg(long, default_value_t = DEFAULT_Y_MAX)]
    pub y_max: f64,
    /// Rows on [-y-max, y-max]
    #[arg(long, default_value_t = DEFAULT_NY)]
    pub ny: usize,
}

impl GridArgs {
    pub fn grid(&self) -> StripGrid {
        StripGrid {
            x_min: self.x_min,
            per_decade: self.per_decade,
            y_max: self.y_max,
            ny: self.ny,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct HorizonArgs {
    /// Forced horizon; scanned when absent
    #[arg(long)]
    pub tau: Option<f64>,
    /// Upper end of the horizon scan
    #[arg(long, default_value_t = DEFAULT_SCAN_MAX)]
    pub t_max: f64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List registered maps
    MapsList {
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        io: Io,
    },
    /// Value, Ph and Sh at points
    Eval {
        #[command(flatten)]
        map: MapArgs,
        /// Point, e.g. `0.5+1i`; repeatable
        #[arg(long, required = true, value_parser = complex, allow_hyphen_values = true)]
        z: Vec<C64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        io: Io,
    },
    /// Strip norms β(t), σ(t)
    Norms {
        #[command(flatten)]
        map: MapArgs,
        /// Strip widths
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 0.1, 0.01])]
        t: Vec<f64>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        io: Io,
    },
    /// Horizon τ at level k
    Horizon {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        level: LevelArgs,
        /// Upper end of the horizon scan
        #[arg(long, default_value_t = DEFAULT_SCAN_MAX)]
        t_max: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        io: Io,
    },
    /// RK4 evolution φ_{s,t}(z)
    Evolve {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        /// End time; min(0.05, τ) when absent
        #[arg(long)]
        t: Option<f64>,
        /// Start point; repeatable
        #[arg(long, required = true, value_parser = complex, allow_hyphen_values = true)]
        z: Vec<C64>,
        #[arg(long, default_value_t = DEFAULT_RK_STEP)]
        rk_step: f64,
        #[command(flatten)]
        horizon: HorizonArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        io: Io,
    },
    /// Chain PDE residual and Herglotz disk identity at random (z, t)
    PdeCheck {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        pde_tol: f64,
        #[arg(long, default_value_t = 1e-12)]
        disk_tol: f64,
        #[command(flatten)]
        horizon: HorizonArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        io: Io,
    },
    /// Extension value and dilatation at points
    Extend {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        level: LevelArgs,
        /// Point; repeatable
        #[arg(long, required = true, value_parser = complex, allow_hyphen_values = true)]
        z: Vec<C64>,
        #[command(flatten)]
        horizon: HorizonArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        io: Io,
    },
    /// Difference-quotient dilatation against the closed form
    VerifyMu {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long, default_value_t = DEFAULT_FD_STEP)]
        fd_step: f64,
        #[arg(long, default_value_t = DEFAULT_MU_TOL)]
        mu_tol: f64,
        #[command(flatten)]
        horizon: HorizonArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        io: Io,
    },
    /// Boundary-trace extension against the closed form
    TraceCheck {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        horizon: HorizonArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        io: Io,
    },
    /// Carleson box ratios of a density
    Carleson {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, value_enum, default_value_t = DensityKind::Vmoa)]
        density: DensityKind,
        #[command(flatten)]
        level: LevelArgs,
        /// Box sizes |I|
        #[arg(long, value_delimiter = ',', default_values_t = default_scales())]
        scales: Vec<f64>,
        /// Interval centers
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = DEFAULT_POSITIONS.to_vec())]
        positions: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_VANISH_FACTOR)]
        vanish_factor: f64,
        #[arg(long, default_value_t = DEFAULT_REL_TOL)]
        rel_tol: f64,
        #[command(flatten)]
        horizon: HorizonArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        io: Io,
    },
    /// Box split of the composite dilatation μ̃
    MuTilde {
        #[command(flatten)]
        map: MapArgs,
        /// Inner strip width
        #[arg(long)]
        t: f64,
        #[arg(long, value_enum, default_value_t = OuterKind::None)]
        outer: OuterKind,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = vec![0.0])]
        center_y: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = default_scales())]
        length: Vec<f64>,
        #[arg(long, default_value_t = 1e-12)]
        rel_tol: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        io: Io,
    },
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {}", message(&e));
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(commands::Status::Pass) => ExitCode::SUCCESS,
        Ok(commands::Status::Fail(msg)) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {}", message(&e));
            ExitCode::from(1)
        }
    }
}

/// The error chain, skipping causes already spelled out by their parent.
fn message(e: &anyhow::Error) -> String {
    let mut msg = e.to_string();
    for cause in e.chain().skip(1) {
        let s = cause.to_string();
        if !msg.contains(&s) {
            msg = format!("{msg}: {s}");
        }
    }
    msg
}
