use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "selfaffine", version, about = "Two-digit self-affine attractors {Mv - u, Mv + u}")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Pgm,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Global {
    /// System configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Destination of the primary output (see --format).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Cylinder depth, projection length, or largest interior search depth.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Depth cap of the uniqueness search.
    #[arg(long, global = true, default_value_t = 64)]
    pub depth_cap: usize,
    #[arg(long, global = true, default_value_t = 10_000_000)]
    pub node_budget: u64,
    /// Enclosure width for constants.
    #[arg(long, global = true)]
    pub precision: Option<f64>,
    /// Force exact rational arithmetic.
    #[arg(long, global = true, conflicts_with = "float")]
    pub exact: bool,
    /// Force floating-point arithmetic.
    #[arg(long, global = true)]
    pub float: bool,
    /// Exit with status 2 when a verdict is unknown or undetermined.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Use the line `x ↦ λx ± 1` instead of a configuration file.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderMethod {
    Chaos,
    Cylinders,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PixelStyle {
    Binary,
    Hits,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum Command {
    /// Classify the set of uniqueness from the spectrum.
    Classify,
    /// Interior verdict from |det M|, and a covering certificate search.
    Interior {
        /// Radius halvings tried per depth.
        #[arg(long, default_value_t = 6)]
        halvings: usize,
        /// Skip the certificate search.
        #[arg(long)]
        no_certificate: bool,
    },
    /// Path-connectivity verdict from |det M|.
    Connectivity,
    /// Render the attractor (first two coordinates).
    Render {
        #[arg(long, value_enum, default_value_t = RenderMethod::Chaos)]
        method: RenderMethod,
        /// Chaos-game sample count.
        #[arg(long, default_value_t = 200_000)]
        points: usize,
        #[arg(long, default_value_t = 512)]
        width: usize,
        #[arg(long, default_value_t = 512)]
        height: usize,
        #[arg(long, value_enum, default_value_t = PixelStyle::Binary)]
        pixels: PixelStyle,
        /// Half-width of a centred square viewport; the bounding box otherwise.
        #[arg(long)]
        extent: Option<f64>,
    },
    /// Certify one address, or count unique periodic words up to a length.
    Unique {
        /// Eventually periodic address such as `+-(-+)`.
        #[arg(long, allow_hyphen_values = true)]
        address: Option<String>,
        #[arg(long)]
        length: Option<usize>,
    },
    /// List the periodic words of one length certified unique.
    Enumerate {
        #[arg(long)]
        length: usize,
    },
    /// Komornik-Loreti constant and golden ratio enclosures.
    Constants,
    /// Check the Minkowski regrouping of cylinder centres exactly.
    DecomposeCheck {
        /// Residue classes; defaults to the dimension.
        #[arg(long)]
        groups: Option<usize>,
    },
    /// Truncated projection of an address with its tail bound.
    Project {
        #[arg(long, allow_hyphen_values = true)]
        address: String,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Interior { .. } => "interior",
            Command::Connectivity => "connectivity",
            Command::Render { .. } => "render",
            Command::Unique { .. } => "unique",
            Command::Enumerate { .. } => "enumerate",
            Command::Constants => "constants",
            Command::DecomposeCheck { .. } => "decompose-check",
            Command::Project { .. } => "project",
        }
    }
}
