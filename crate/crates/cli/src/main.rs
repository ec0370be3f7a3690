use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

#[derive(Parser, Debug)]
#[command(name = "qcat", version, allow_negative_numbers = true)]
#[command(about = "Solvable crypto-Hermitian chain models near an exceptional point")]
pub struct Cli {
    /// Overrides every tolerance at once.
    #[arg(long, global = true, env = "QCAT_TOL")]
    pub tol: Option<f64>,

    /// Output file (default: standard output).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Chain,
    Qc,
    Multiparam,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricForm {
    Poly,
    Numeric,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Dense Hamiltonian matrix.
    #[command(allow_negative_numbers = true)]
    Hamiltonian(HamiltonianArgs),
    /// Metric as z-polynomials or as a numeric matrix.
    #[command(allow_negative_numbers = true)]
    Metric(MetricArgs),
    /// Reality and metric conditioning along a lambda grid.
    #[command(allow_negative_numbers = true)]
    Scan(ScanArgs),
    /// Basis of the real observables compatible with the metric.
    Observables(ObservablesArgs),
    /// Left eigenvectors as homogeneous polynomials in (u, v).
    Ketkets(DimArgs),
    /// Coefficient matrices M(1)..M(N) as sparse triplets.
    Coeffmats(DimArgs),
    /// Collapse indicators on a decreasing lambda sequence.
    EpReport(EpReportArgs),
    /// Layer classification of multi-parameter coefficients.
    #[command(allow_negative_numbers = true)]
    Domain(DomainArgs),
}

#[derive(Args, Debug)]
pub struct HamiltonianArgs {
    #[arg(long)]
    pub n: usize,
    /// Required for the chain and multiparam variants.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum, default_value_t = Variant::Chain)]
    pub variant: Variant,
    /// Comma-separated coefficients A,B,... for the multiparam variant.
    #[arg(long, value_delimiter = ',')]
    pub coeffs: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct MetricArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum, default_value_t = MetricForm::Poly)]
    pub form: MetricForm,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub lambda_min: f64,
    #[arg(long)]
    pub lambda_max: f64,
    #[arg(long)]
    pub steps: usize,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("where").required(true).args(["z", "z_independent"])))]
pub struct ObservablesArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub z: Option<f64>,
    #[arg(long)]
    pub z_independent: bool,
}

#[derive(Args, Debug)]
pub struct DimArgs {
    #[arg(long)]
    pub n: usize,
}

#[derive(Args, Debug)]
pub struct EpReportArgs {
    #[arg(long)]
    pub n: usize,
    /// Strictly decreasing, comma-separated values in (0, 1].
    #[arg(long, value_delimiter = ',', required = true)]
    pub lambdas: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct DomainArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long = "A")]
    pub a: Option<f64>,
    #[arg(long = "B")]
    pub b: Option<f64>,
    #[arg(long = "C")]
    pub c: Option<f64>,
    #[arg(long = "D")]
    pub d: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Also compare with the oracle spectrum at a small lambda (N = 4).
    #[arg(long)]
    pub validate: bool,
    #[arg(long, default_value_t = 1e-3)]
    pub lambda_small: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(commands::run(&cli) as u8)
}
