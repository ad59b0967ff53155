use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use semrdp::{build_model, SemanticModel, TrialConfig};

#[derive(Parser, Debug)]
#[command(name = "semrdp", version, about = "Rate-distortion-perception curves for a binary semantic source")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sweep D or P and print one rate column per method.
    Curve(CurveArgs),
    /// Minimum rate at one (D, P) point, with the minimizing decoder.
    Oracle(OracleArgs),
    /// Monte Carlo statistics of a decoder or a random-binning code.
    Simulate(SimulateArgs),
    /// Cross-check the closed form against the oracle and simulations.
    Verify(VerifyArgs),
}

/// Accepts `inf` as well as finite non-negative numbers.
pub fn parse_constraint(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
    if v.is_nan() || v < 0.0 {
        return Err(format!("{s:?} must be non-negative"));
    }
    Ok(v)
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// P(S = 1).
    #[arg(long, default_value_t = 0.5)]
    pub pi: f64,
    /// Symmetric crossover of X given S.
    #[arg(long, conflicts_with_all = ["q1", "q2"])]
    pub q: Option<f64>,
    /// P(X = 1 | S = 0).
    #[arg(long, requires = "q2")]
    pub q1: Option<f64>,
    /// P(X = 0 | S = 1).
    #[arg(long, requires = "q1")]
    pub q2: Option<f64>,
    /// P(Y = 1 | X = 0).
    #[arg(long, requires = "b", conflicts_with = "pi_x")]
    pub a: Option<f64>,
    /// P(Y = 0 | X = 1).
    #[arg(long, requires = "a")]
    pub b: Option<f64>,
    /// Symmetric crossover of Y given X.
    #[arg(long = "pi-x", conflicts_with_all = ["a", "b"])]
    pub pi_x: Option<f64>,
}

impl ModelArgs {
    pub fn crossovers(&self) -> (f64, f64) {
        match (self.q, self.q1, self.q2) {
            (Some(q), _, _) => (q, q),
            (None, Some(q1), Some(q2)) => (q1, q2),
            _ => (0.1, 0.1),
        }
    }

    pub fn side(&self) -> (f64, f64) {
        match (self.a, self.b, self.pi_x) {
            (Some(a), Some(b), _) => (a, b),
            (_, _, Some(p)) => (p, p),
            _ => (0.2, 0.2),
        }
    }

    pub fn build(&self) -> Result<SemanticModel> {
        let (q1, q2) = self.crossovers();
        let (a, b) = self.side();
        Ok(build_model(self.pi, q1, q2, a, b)?)
    }
}

#[derive(Args, Debug, Clone)]
pub struct TrialArgs {
    /// Block length.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl TrialArgs {
    pub fn config(&self) -> Result<TrialConfig> {
        Ok(TrialConfig::new(self.n, self.trials, self.seed)?)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    #[value(name = "D", alias = "d")]
    D,
    #[value(name = "P", alias = "p")]
    P,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[value(rename_all = "snake_case")]
pub enum MethodArg {
    ClosedForm,
    Min2,
    Oracle,
    Simulate,
}

impl MethodArg {
    pub fn column(self) -> &'static str {
        match self {
            MethodArg::ClosedForm => "R_closed",
            MethodArg::Min2 => "R_min2",
            MethodArg::Oracle => "R_oracle",
            MethodArg::Simulate => "R_sim",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct CurveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Constraint swept along the rows.
    #[arg(long, value_enum, default_value_t = Axis::D)]
    pub axis: Axis,
    #[arg(long = "d-min", default_value_t = 0.0)]
    pub d_min: f64,
    #[arg(long = "d-max", default_value_t = 0.5)]
    pub d_max: f64,
    #[arg(long = "p-min", default_value_t = 0.0)]
    pub p_min: f64,
    #[arg(long = "p-max", default_value_t = 0.2)]
    pub p_max: f64,
    /// Number of axis points, endpoints included.
    #[arg(long, default_value_t = 51)]
    pub steps: usize,
    /// Perception bound when sweeping D (`inf` for none).
    #[arg(long = "P", value_parser = parse_constraint, default_value = "inf")]
    pub perception: f64,
    /// Distortion bound when sweeping P.
    #[arg(long = "D", value_parser = parse_constraint, default_value_t = 0.2)]
    pub distortion: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "closed_form")]
    pub methods: Vec<MethodArg>,
    /// Oracle and branch-program grid step.
    #[arg(long, default_value_t = 0.01)]
    pub resolution: f64,
    #[command(flatten)]
    pub trials: TrialArgs,
    /// Output file; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl CurveArgs {
    pub fn axis_points(&self) -> Result<Vec<f64>> {
        let (lo, hi) = match self.axis {
            Axis::D => (self.d_min, self.d_max),
            Axis::P => (self.p_min, self.p_max),
        };
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            bail!("axis range [{lo}, {hi}] must satisfy 0 <= min <= max <= 1");
        }
        if self.steps < 2 {
            bail!("--steps must be at least 2, got {}", self.steps);
        }
        let last = (self.steps - 1) as f64;
        Ok((0..self.steps)
            .map(|i| lo + (hi - lo) * i as f64 / last)
            .collect())
    }
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "D", value_parser = parse_constraint, default_value_t = 0.2)]
    pub distortion: f64,
    #[arg(long = "P", value_parser = parse_constraint, default_value = "inf")]
    pub perception: f64,
    #[arg(long, default_value_t = 0.01)]
    pub resolution: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Decoder law `s0,t0,s1,t1` (P(Ŝ=0 | X, Y) for X=0,1 given Y=0, then
    /// Y=1), or `copy`, `side`, `uniform`. Defaults to the oracle's
    /// minimizer at (--D, --P).
    #[arg(long)]
    pub law: Option<String>,
    #[arg(long = "D", value_parser = parse_constraint, default_value_t = 0.2)]
    pub distortion: f64,
    #[arg(long = "P", value_parser = parse_constraint, default_value = "inf")]
    pub perception: f64,
    #[arg(long, default_value_t = 0.01)]
    pub resolution: f64,
    /// Codebook rate; with --r2, runs random binning instead of the
    /// memoryless decoder.
    #[arg(long, requires = "r2")]
    pub r1: Option<f64>,
    /// Bin rate.
    #[arg(long, requires = "r1")]
    pub r2: Option<f64>,
    #[command(flatten)]
    pub trials: TrialArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    Sandwich,
    Reduction,
    Spot,
    Threshold,
    Monotonicity,
    Continuity,
    Transform,
    Simulation,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// Observation crossovers, one DSBS curve family each.
    #[arg(long, value_delimiter = ',', value_parser = parse_constraint, default_value = "0,0.1,0.2")]
    pub qs: Vec<f64>,
    /// Perception bounds.
    #[arg(long, value_delimiter = ',', value_parser = parse_constraint, default_value = "0.02,0.05,0.1,inf")]
    pub ps: Vec<f64>,
    #[arg(long = "pi-x", default_value_t = 0.2)]
    pub pi_x: f64,
    /// Distortion points per curve, spread over [q + 0.01, 0.45].
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, default_value_t = 0.01)]
    pub resolution: f64,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "sandwich,reduction,spot,threshold,monotonicity,continuity,transform,simulation"
    )]
    pub checks: Vec<Check>,
    /// Seed for decoder laws and Monte Carlo runs.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-point CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plain-text summary; always echoed to standard output.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Adds a constant to every closed-form rate.
    #[arg(long = "corrupt-closed-form", hide = true, default_value_t = 0.0)]
    pub corrupt_closed_form: f64,
}

