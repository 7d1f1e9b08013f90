use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "qlimit", version)]
#[command(about = "Error exponents for resolving one versus two incoherent point sources")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output encoding
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,

    /// Output file; standard output when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for sweeps and simulations
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// All exponents at one parameter point
    #[command(allow_negative_numbers = true)]
    Exponent {
        /// Half-separation of the sources in diffraction units
        #[arg(long)]
        mu: f64,
        /// Mean photon number per temporal mode
        #[arg(long)]
        n0: f64,
        /// Pixel width of the focal-plane array
        #[arg(long)]
        delta: Option<f64>,
        /// Temporal modes; adds the error-probability bounds
        #[arg(long)]
        m: Option<u64>,
    },

    /// Data table behind one of the standard plots
    Figure {
        #[arg(long, value_enum)]
        figure: FigureId,
    },

    /// Monte Carlo error probability of one receiver
    #[command(allow_negative_numbers = true)]
    Simulate {
        #[arg(long, value_enum)]
        receiver: ReceiverKind,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        n0: f64,
        #[arg(long)]
        m: u64,
        /// Pixel width, required for the pixelated receiver
        #[arg(long)]
        delta: Option<f64>,
        /// Trials per hypothesis
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = EstimatorKind::Plain)]
        estimator: EstimatorKind,
        /// Tilt of the importance-sampling law, in [0, 1]
        #[arg(long, default_value_t = 0.5)]
        tilt: f64,
    },

    /// Cross-checks between independent computations
    Validate {
        #[arg(long, value_enum, default_value_t = Level::Quick)]
        level: Level,
    },

    /// Exponents along a one-parameter sweep
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[arg(long, value_enum)]
        variable: Variable,
        /// Explicit values, comma separated
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["start", "stop", "count"])]
        values: Option<Vec<f64>>,
        #[arg(long, requires_all = ["stop", "count"])]
        start: Option<f64>,
        #[arg(long)]
        stop: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, value_enum, default_value_t = Scale::Linear)]
        scale: Scale,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        n0: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        m: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    #[value(name = "2a")]
    PixelWidth,
    #[value(name = "2b")]
    PixelBounds,
    #[value(name = "3")]
    ReceiverBounds,
    #[value(name = "4")]
    PhotonNumber,
    #[value(name = "5")]
    Normalized,
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::PixelWidth => "2a",
            FigureId::PixelBounds => "2b",
            FigureId::ReceiverBounds => "3",
            FigureId::PhotonNumber => "4",
            FigureId::Normalized => "5",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReceiverKind {
    Continuum,
    Pixelated,
    ModeSorted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorKind {
    Plain,
    Tilted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variable {
    Mu,
    N0,
    Delta,
    M,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Linear,
    Log,
}
