use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "latstat",
    version,
    about = "Arithmetic cut-and-project point sets and their fine-scale statistics"
)]
pub struct Cli {
    /// Worker threads for parallel loops (0 = one per CPU). Results are
    /// identical for every value.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the exact and floating-point Haar measure of a window.
    Measure {
        /// Window specification (TOML).
        #[arg(long)]
        window: PathBuf,
        /// Euler-product prime bound for exact-tail measures.
        #[arg(long, default_value_t = 1_000_000)]
        prime_bound: u64,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate the configured point set into a CSV of coordinates.
    Gen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Local direction statistics: the law of the disc count over random
    /// disc centres.
    Dirs {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 10_000)]
        draws: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Normalized gap distribution of the directions (d = 2).
    Gaps {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Empirical Boltzmann-Grad free path length distribution.
    Fpl {
        #[arg(long)]
        config: PathBuf,
        /// Scatterer radius (repeatable).
        #[arg(long, required = true)]
        rho: Vec<f64>,
        #[arg(long, default_value_t = 4.0)]
        xi_max: f64,
        /// Grid step in xi.
        #[arg(long, default_value_t = 0.05)]
        xi_step: f64,
        #[arg(long, default_value_t = 10_000)]
        dirs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Monte Carlo evaluation of the limit laws on level-N marked lattices.
    LimitMc {
        #[arg(long, value_enum)]
        mode: LimitMode,
        /// Window specification (TOML); truncated to its own level.
        #[arg(long)]
        window: PathBuf,
        /// Sampling level N (a multiple of the window level; the window is
        /// lifted). Defaults to the window's own level.
        #[arg(long)]
        level: Option<u64>,
        /// Real shift alpha deciding the rational/irrational limit formula;
        /// e.g. "1/2,1/2" (rational) or "irrational".
        #[arg(long, default_value = "irrational")]
        shift: String,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 4.0)]
        xi_max: f64,
        #[arg(long, default_value_t = 0.05)]
        xi_step: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0.0)]
        c: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Siegel and Siegel-Weil mean-value checks at a given level.
    SiegelCheck {
        #[arg(long, default_value_t = 30)]
        level: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate one of the bundled figures (gap distributions).
    ReproduceFigure {
        #[arg(long, value_enum)]
        figure: Figure,
        /// Disc radius T.
        #[arg(long = "T", alias = "t", default_value_t = 500.0)]
        t: f64,
        #[arg(long, default_value = "gaps.csv")]
        out: PathBuf,
        #[arg(long, default_value = "gaps.svg")]
        svg: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LimitMode {
    Fpl,
    Dir,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Figure {
    /// Visible points shifted by (1/2, 1/2).
    GapsHalfshift,
    /// Visible points shifted by (sqrt 2, sqrt 3).
    GapsIrrational,
    /// Squarefree-coordinate points shifted by (1/2, 1/2).
    GapsSquarefreeHalfshift,
    /// Squarefree-coordinate points shifted by (sqrt 2, sqrt 3).
    GapsSquarefreeIrrational,
}
