use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

/// Phase-space numerics: Wigner functions, displacement overlaps,
/// microcanonical shell averages and ringing analysis.
#[derive(Parser, Debug)]
#[command(name = "subplanck", version = env!("SUBPLANCK_BUILD_ID"))]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Wigner function of a Gaussian, cat or compass state on a grid.
    Wigner(WignerArgs),
    /// ⟨ψ|D|ψ⟩ of a grid state along a ray, by one or all three routes.
    Overlap(OverlapArgs),
    /// Monte Carlo shell averages along a ray.
    Mc(McArgs),
    /// Closed-form shell overlaps along a ray.
    Oracle(OracleArgs),
    /// Zeros, peaks and envelope exponent of an overlap series.
    Ring(RingArgs),
    /// Convergence and variance studies.
    Study(StudyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Units {
    /// Reduced Planck constant.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub hbar: f64,
    /// Momentum scale P.
    #[arg(long = "momentum", allow_negative_numbers = true, visible_alias = "P", default_value_t = 1.0)]
    pub momentum: f64,
    /// Length scale L: disk radius or box side.
    #[arg(long = "length", allow_negative_numbers = true, visible_alias = "L", default_value_t = 1.0)]
    pub length: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    /// Single packet at (x0, p0).
    Gaussian,
    /// Packets at x = ±sep/2.
    Cat2,
    /// Packets at x = ±sep/2 and at p = ±pk.
    Cat4,
    /// Packets at p = ±pk.
    MomentumCat,
}

impl StateKind {
    pub fn name(self) -> &'static str {
        match self {
            StateKind::Gaussian => "gaussian",
            StateKind::Cat2 => "cat2",
            StateKind::Cat4 => "cat4",
            StateKind::MomentumCat => "momentum-cat",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct StateParams {
    /// Packet separation in x (cat2, cat4).
    #[arg(long, allow_negative_numbers = true, default_value_t = 8.0)]
    pub sep: f64,
    /// Position spread of each packet.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub sigma: f64,
    /// Packet center (gaussian).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x0: f64,
    /// Packet momentum (gaussian).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub p0: f64,
    /// Momentum offset of the packets (momentum-cat, cat4).
    #[arg(long, allow_negative_numbers = true, default_value_t = 4.0)]
    pub pk: f64,
    /// Grid points (power of two, at least 64).
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    /// The grid spans [-xmax, xmax).
    #[arg(long, allow_negative_numbers = true, default_value_t = 24.0)]
    pub xmax: f64,
}

#[derive(Args, Debug, Clone)]
#[group(multiple = false)]
pub struct Direction {
    /// Pure position displacements.
    #[arg(long)]
    pub dx_ray: bool,
    /// Pure momentum displacements.
    #[arg(long)]
    pub dp_ray: bool,
    /// Mixed ray with weights DX,DP for the position and momentum parts.
    #[arg(long, value_name = "DX,DP", value_parser = floats::<2>, allow_negative_numbers = true)]
    pub ray: Option<[f64; 2]>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DpAxis {
    /// δp along the first coordinate.
    #[default]
    Axis,
    /// δp with equal components.
    Diagonal,
}

#[derive(Args, Debug, Clone)]
pub struct RayArgs {
    #[command(flatten)]
    pub direction: Direction,
    /// Largest ray parameter; t is in units of ħ/P along δx and ħ/L along δp.
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    /// Number of ray points.
    #[arg(long)]
    pub n: Option<usize>,
    /// Orientation of δp in more than one dimension.
    #[arg(long, value_enum, default_value_t = DpAxis::Axis)]
    pub dp_axis: DpAxis,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridFormat {
    Csv,
    Binary,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FringeAxis {
    X,
    P,
}

#[derive(Args, Debug)]
pub struct WignerArgs {
    #[arg(long, value_enum)]
    pub state: StateKind,
    #[command(flatten)]
    pub params: StateParams,
    #[command(flatten)]
    pub units: Units,
    /// Output file; the summary goes to <out>.summary.json.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = GridFormat::Csv)]
    pub format: GridFormat,
    /// Measure the fringe period along this axis.
    #[arg(long, value_enum)]
    pub fringes: Option<FringeAxis>,
    /// Fringe window XLO,XHI,PLO,PHI.
    #[arg(long, value_name = "XLO,XHI,PLO,PHI", value_parser = floats::<4>, allow_negative_numbers = true, requires = "fringes")]
    pub window: Option<[f64; 4]>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteArg {
    Direct,
    WignerFt,
    Autocorr,
    All,
}

#[derive(Args, Debug)]
pub struct OverlapArgs {
    #[arg(long, value_enum)]
    pub state: StateKind,
    #[command(flatten)]
    pub params: StateParams,
    #[command(flatten)]
    pub units: Units,
    #[command(flatten)]
    pub ray: RayArgs,
    #[arg(long, value_enum, default_value_t = RouteArg::Direct)]
    pub route: RouteArg,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Disk,
    Gas,
}

#[derive(Args, Debug)]
pub struct McArgs {
    #[arg(long, value_enum)]
    pub geometry: Geometry,
    /// Particle number for the gas.
    #[arg(long, default_value_t = 1)]
    pub particles: usize,
    #[command(flatten)]
    pub units: Units,
    #[command(flatten)]
    pub ray: RayArgs,
    /// Shell samples per ray point.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    /// Disk billiard: J₀(P|δx|/ħ)·2J₁(L|δp|/ħ)/(L|δp|/ħ).
    #[value(alias = "eq7")]
    Disk,
    /// Hard-sphere gas: Λ_ν(√N·P|δx|/ħ)·Π sinc(Lδpᵢ/2ħ).
    #[value(alias = "eq12")]
    Gas,
    /// Large-N gas: exp(−P²|δx|²/6ħ²)·exp(−L²|δp|²/24ħ²).
    #[value(alias = "eq13")]
    GasGaussian,
}

impl Formula {
    pub fn name(self) -> &'static str {
        match self {
            Formula::Disk => "disk",
            Formula::Gas => "gas",
            Formula::GasGaussian => "gas-gaussian",
        }
    }
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub formula: Formula,
    /// Particle number for the gas formulas.
    #[arg(long, default_value_t = 1)]
    pub particles: usize,
    #[command(flatten)]
    pub units: Units,
    #[command(flatten)]
    pub ray: RayArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroModeArg {
    /// Sign changes of the real part.
    Sign,
    /// Local minima of the modulus.
    Modulus,
}

#[derive(Args, Debug)]
pub struct RingArgs {
    /// Series CSV written by `overlap`, `oracle` or `mc`.
    #[arg(long, conflicts_with_all = ["formula", "state"])]
    pub input: Option<PathBuf>,
    /// Analyze a closed-form series instead of a file.
    #[arg(long, value_enum, conflicts_with = "state")]
    pub formula: Option<Formula>,
    #[arg(long, default_value_t = 1)]
    pub particles: usize,
    /// Analyze the direct overlap of a grid state instead of a file.
    #[arg(long, value_enum)]
    pub state: Option<StateKind>,
    #[command(flatten)]
    pub params: StateParams,
    #[command(flatten)]
    pub units: Units,
    #[command(flatten)]
    pub ray: RayArgs,
    #[arg(long, value_enum, default_value_t = ZeroModeArg::Sign)]
    pub mode: ZeroModeArg,
    /// Fit peaks FIRST,LAST (0-based, inclusive).
    #[arg(long, value_name = "FIRST,LAST", value_parser = peak_range)]
    pub window: Option<(usize, usize)>,
    /// Report file; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StudyArgs {
    #[command(subcommand)]
    pub study: Study,
}

#[derive(Subcommand, Debug)]
pub enum Study {
    /// Distance between the exact gas overlap and its large-N Gaussian form.
    GaussianConvergence(ConvergenceArgs),
    /// Ensemble fluctuation of the coarse-grained random-wave intensity.
    VarianceScaling(VarianceArgs),
}

#[derive(Args, Debug)]
pub struct ConvergenceArgs {
    /// Particle numbers, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub particles: Vec<usize>,
    /// Window P|δx|/ħ ∈ [0, t_max], at most 3.
    #[arg(long, allow_negative_numbers = true, default_value_t = 3.0)]
    pub t_max: f64,
    /// Window |δp| ∈ [0, dp_max·ħ/L].
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub dp_max: f64,
    #[arg(long, default_value_t = 301)]
    pub points: usize,
    #[command(flatten)]
    pub units: Units,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct VarianceArgs {
    /// Wavenumbers, comma separated and increasing.
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',', required = true)]
    pub k: Vec<f64>,
    #[arg(long, default_value_t = 60)]
    pub ensemble: usize,
    /// Side of the square averaging cell.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub cell: f64,
    /// Radius of the normalization disk.
    #[arg(long, allow_negative_numbers = true, default_value_t = 4.0)]
    pub radius: f64,
    /// Plane waves per state.
    #[arg(long, default_value_t = 400)]
    pub components: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Exactly N comma-separated floats.
fn floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {}", parts.len()));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.trim().parse().map_err(|_| format!("`{p}` is not a number"))?;
    }
    Ok(out)
}

fn peak_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected FIRST,LAST")?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("`{v}` is not a peak index"));
    Ok((parse(a)?, parse(b)?))
}
