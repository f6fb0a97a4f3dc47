use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "umbilic", version, about = "Conformal geometry and eta-invariant checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Metric file (JSON).
    #[arg(long, global = true)]
    pub metric: Option<PathBuf>,
    /// Embedding file (JSON); refers to its ambient metric file.
    #[arg(long, global = true)]
    pub embedding: Option<PathBuf>,
    /// Spectrum file: CSV list or JSON descriptor.
    #[arg(long, global = true)]
    pub spectrum: Option<PathBuf>,
    /// Manifold or cobordism record (JSON). Repeatable for `phi`.
    #[arg(long, global = true)]
    pub record: Vec<PathBuf>,
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Gauss–Legendre order per axis.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Also write the structured report to this file.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    #[serde(skip)]
    pub format: Format,
    #[arg(long, global = true, env = "UMBILIC_CACHE")]
    #[serde(skip)]
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Parse and validate every given input file.
    Validate,
    /// Curvature tensors at a point.
    Curvature {
        /// Comma-separated coordinates; the chart center when omitted.
        #[arg(long)]
        point: Option<String>,
    },
    /// Classify conformal flatness by the Weyl or Cotton tensor.
    Flatness {
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Second fundamental form; with `--phi`, the conformal transformation law.
    Sff {
        #[arg(long)]
        phi: Option<String>,
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
    /// Umbilicity of a hypersurface.
    Umbilic {
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Rescale so an umbilic hypersurface becomes totally geodesic.
    MakeGeodesic {
        #[arg(long, default_value_t = 0.2)]
        half_width: f64,
        #[arg(long, default_value_t = 32)]
        samples: usize,
    },
    /// Fit the collar expansion of the metric near a hypersurface.
    CollarFit {
        #[arg(long, default_value_t = 0.1)]
        half_width: f64,
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
    /// Pontryagin and L-forms; the integral of L over the chart.
    Forms {
        #[arg(long, default_value_t = 16)]
        samples: usize,
        /// Expected value of the L integral.
        #[arg(long)]
        expect: Option<f64>,
    },
    /// Transgression form of a collar metric against its product metric.
    Transgress {
        /// Collar file (JSON).
        #[arg(long)]
        collar: PathBuf,
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
    /// Pointwise conformal invariance of p1.
    PontryaginCheck {
        #[arg(long)]
        phi: String,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Eta invariant; with `--s`, the eta function at `s`.
    Eta {
        #[arg(long)]
        s: Option<f64>,
    },
    /// Eta invariant from the heat trace, compared with the series value.
    EtaHeat {
        #[arg(long, default_value_t = 10_000)]
        radius: u64,
    },
    /// APS identity on a cobordism record.
    ApsCheck,
    /// Even-integer obstruction on a manifold record.
    Obstruct,
    /// `exp(iπη)` of each record and of their disjoint union.
    Phi,
    /// Conformal equivalence of an annulus with a cylinder.
    Neck {
        #[arg(long)]
        inner: f64,
        #[arg(long)]
        outer: f64,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Curvature { .. } => "curvature",
            Command::Flatness { .. } => "flatness",
            Command::Sff { .. } => "sff",
            Command::Umbilic { .. } => "umbilic",
            Command::MakeGeodesic { .. } => "make-geodesic",
            Command::CollarFit { .. } => "collar-fit",
            Command::Forms { .. } => "forms",
            Command::Transgress { .. } => "transgress",
            Command::PontryaginCheck { .. } => "pontryagin-check",
            Command::Eta { .. } => "eta",
            Command::EtaHeat { .. } => "eta-heat",
            Command::ApsCheck => "aps-check",
            Command::Obstruct => "obstruct",
            Command::Phi => "phi",
            Command::Neck { .. } => "neck",
        }
    }
}
