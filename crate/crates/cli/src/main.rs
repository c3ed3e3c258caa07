use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use tridiag_cli::commands;
use tridiag_cli::config::{OutputFormat, RunConfig};

/// Random tridiagonal matrices: spectra, limit moments, Stieltjes transforms
/// and deformation profiles.
#[derive(Parser)]
#[command(name = "tridiag", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues and histogram summaries for independent replicas.
    SampleEsd(Flags),
    /// Predicted limit moments against simulated normalized traces.
    Moments(Flags),
    /// Particle solution of the fixed point and the composed transform at each --z.
    Fixpoint(Flags),
    /// Density from a transform by inversion along Im z = eta.
    ///
    /// eta defaults to 1e-3 for closed forms and 0.05 x (support scale) for
    /// simulated spectra.
    Density(Flags),
    /// A deformation profile and its diagnostics.
    Sigma(Flags),
    /// Truncated Bernoulli-coupling limit law (--law bernoulli:p --trunc-k K).
    Bernoulli(Flags),
    /// Colored-path prediction against simulated word traces (--word XYXY).
    JointMoments(Flags),
    /// Run validation scenarios; exits nonzero if any row fails.
    Validate(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// JSON file with any RunConfig fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Entry law: constant:c, bernoulli:p, gaussian:mean,sd, uniform:a,b,
    /// pareto:scale,shape or empirical:<csv>.
    #[arg(long)]
    law: Option<String>,
    /// Optional diagonal law, same syntax as --law.
    #[arg(long)]
    diag_law: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    sigma_csv: Option<PathBuf>,
    /// Profile target: constant:c, uniform:a,b, exponential:rate,
    /// pareto:scale,shape or empirical:<csv>.
    #[arg(long)]
    sigma_target: Option<String>,
    /// Evaluation point "re,im" with im > 0; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    z: Vec<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    /// Monte Carlo draws for the composed transform.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    trunc_k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Density source: semicircle:r, arcsine:r, bernoulli:p or esd.
    #[arg(long)]
    source: Option<String>,
    /// Grid "lo,hi,points".
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Thresholds M for tail second moments; repeatable.
    #[arg(long)]
    tail_m: Vec<f64>,
    /// Word over X, Y, Z, ... for joint moments.
    #[arg(long)]
    word: Option<String>,
    /// Validation scenario: arcsine, fixpoint, resolvent, mixture, sigma,
    /// bernoulli, perturbation, joint, half-plane or all; repeatable.
    #[arg(long = "scenario")]
    scenarios: Vec<String>,
    /// Replace every row's tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Eigenvalue bisection tolerance.
    #[arg(long)]
    eig_tol: Option<f64>,
}

impl Flags {
    fn resolve(self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        macro_rules! set_opt {
            ($($f:ident),*) => { $( if self.$f.is_some() { c.$f = self.$f; } )* };
        }
        macro_rules! set_vec {
            ($($f:ident),*) => { $( if !self.$f.is_empty() { c.$f = self.$f; } )* };
        }
        set!(n, law, population, iters, samples, replicas, k_max, trunc_k, seed, out, format, eig_tol);
        set_opt!(diag_law, alpha, sigma_csv, sigma_target, eta, source, grid, word, tolerance);
        set_vec!(z, tail_m, scenarios);
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<bool> {
    let (name, flags) = match cli.command {
        Command::SampleEsd(f) => ("sample-esd", f),
        Command::Moments(f) => ("moments", f),
        Command::Fixpoint(f) => ("fixpoint", f),
        Command::Density(f) => ("density", f),
        Command::Sigma(f) => ("sigma", f),
        Command::Bernoulli(f) => ("bernoulli", f),
        Command::JointMoments(f) => ("joint-moments", f),
        Command::Validate(f) => ("validate", f),
    };
    let config = flags.resolve()?;
    let files = match name {
        "sample-esd" => commands::cmd_sample_esd(&config)?,
        "moments" => commands::cmd_moments(&config)?,
        "fixpoint" => commands::cmd_fixpoint(&config)?,
        "density" => commands::cmd_density(&config)?,
        "sigma" => commands::cmd_sigma(&config)?,
        "bernoulli" => commands::cmd_bernoulli(&config)?,
        "joint-moments" => commands::cmd_joint_moments(&config)?,
        _ => {
            let report = commands::cmd_validate(&config)?;
            println!("{}", if report.pass { "all rows pass" } else { "some rows failed" });
            return Ok(report.pass);
        }
    };
    for f in files {
        println!("{}", config.out.join(f).display());
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
