//! `gutkin`: reproducible experiments on constant-angle billiards.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 invalid input.

mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "gutkin",
    version,
    about = "Constant-angle billiard experiments (angles in radians)"
)]
pub struct Cli {
    /// Print a one-line JSON summary on stdout instead of the text report.
    #[arg(long, global = true)]
    pub json: bool,

    /// Seed for every random choice a command makes.
    #[arg(long, global = true, env = "GUTKIN_SEED", default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solutions of tan(nδ) = n tan δ in (0, π/2).
    Roots {
        #[arg(long)]
        n: usize,
    },
    /// Writes a table file; without --n the table is a circle of radius --a0.
    Table {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        root_index: usize,
        #[arg(long, default_value_t = 1.0)]
        a0: f64,
        #[arg(long, default_value_t = 0.0)]
        an: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest arrival-angle error of chords leaving at angle δ.
    Verify {
        #[arg(long)]
        table: PathBuf,
        /// Defaults to the angle recorded in the table file.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 360, value_parser = clap::value_parser!(u64).range(8..))]
        grid: u64,
    },
    /// One billiard orbit as CSV.
    Orbit {
        #[arg(long)]
        table: PathBuf,
        #[command(flatten)]
        start: PlanarStart,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        steps: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Orbits from a (φ, p) grid, as CSV and optionally SVG.
    PhasePortrait {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..))]
        p_grid: u64,
        #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..))]
        phi_grid: u64,
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
        steps: u64,
        #[arg(long)]
        out_csv: Option<PathBuf>,
        #[arg(long)]
        out_svg: Option<PathBuf>,
    },
    /// Rigidity integral over the strip δ₁ < α < δ₂, by quadrature and in closed form.
    Rigidity {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        delta1: f64,
        #[arg(long)]
        delta2: f64,
        #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(8..))]
        order: u64,
    },
    /// Billiard orbit inside an ellipsoid given by a JSON spec.
    Ellipsoid {
        #[arg(long)]
        spec: PathBuf,
        /// Start on the constant-angle set at this angle from a seeded boundary point.
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        steps: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks m₁ = D₁S, m₂ = −D₂S and the twist condition on random direction pairs.
    GradientCheck {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        pairs: u64,
    },
    /// Constant-angle chords along a geodesic, as a CSV report.
    Chords(ChordArgs),
}

#[derive(Debug, Args)]
pub struct PlanarStart {
    /// Signed distance of the starting line.
    #[arg(long, requires = "phi", conflicts_with_all = ["delta", "psi"])]
    pub p: Option<f64>,
    /// Normal angle of the starting line.
    #[arg(long)]
    pub phi: Option<f64>,
    /// Start on the constant-angle line at this angle ...
    #[arg(long, requires = "psi")]
    pub delta: Option<f64>,
    /// ... leaving the boundary point with this normal angle.
    #[arg(long)]
    pub psi: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SurfaceKind {
    Sphere,
    Ellipsoid,
}

#[derive(Debug, Args)]
pub struct ChordArgs {
    #[arg(long, value_enum, default_value_t = SurfaceKind::Sphere)]
    pub surface: SurfaceKind,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Ellipsoid spec (JSON, d = 3).
    #[arg(long, required_if_eq("surface", "ellipsoid"))]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub delta: f64,
    /// Geodesic length; defaults to one circumference of the sphere of the same diameter.
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Start on a principal section instead of a seeded random point.
    #[arg(long)]
    pub principal: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(report) => {
            report.print(cli.json);
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
