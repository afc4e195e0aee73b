use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use stable_exit::{PvQuadSpec, SpectralMeasure};
use stable_exit_cli::commands::{
    cmd_closed_form, cmd_estimate, cmd_mass_equivalence, cmd_scaling_check, cmd_verify_generator,
    cmd_verify_getoor, cmd_verify_lemma, ClosedFormArgs, EstimateArgs, GeneratorArgs, GetoorArgs,
    LemmaArgs, MassEquivalenceArgs, ScalingArgs, ALPHA_GRID, DEFAULT_BIAS_FRACTION,
};
use stable_exit_cli::config::SamplerKind;
use stable_exit_cli::{ExperimentConfig, ExperimentReport, Format, HarnessError};

#[derive(Parser)]
#[command(
    name = "stable-exit",
    version,
    about = "Exit-time verification and Monte Carlo experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Leave wall_time null so repeated runs give identical bytes.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Args)]
struct QuadArgs {
    #[arg(long, default_value_t = PvQuadSpec::default().abs_tol)]
    abs_tol: f64,
    #[arg(long, default_value_t = PvQuadSpec::default().rel_tol)]
    rel_tol: f64,
    #[arg(long, default_value_t = PvQuadSpec::default().max_subdivisions)]
    max_subdivisions: usize,
    #[arg(long, default_value_t = PvQuadSpec::default().inner_cutoff)]
    inner_cutoff: f64,
}

impl QuadArgs {
    fn spec(&self) -> PvQuadSpec {
        PvQuadSpec {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_subdivisions: self.max_subdivisions,
            inner_cutoff: self.inner_cutoff,
            ..PvQuadSpec::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// One-dimensional identity for the profile function, expected -1.
    VerifyGetoor {
        #[arg(long, value_delimiter = ',', default_values_t = ALPHA_GRID)]
        alphas: Vec<f64>,
        /// Evaluation points as fractions of r.
        #[arg(long = "u", value_delimiter = ',', allow_negative_numbers = true,
              default_values_t = [0.0, 0.3, -0.3, 0.6, -0.6, 0.9, -0.9])]
        u_fractions: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
        radii: Vec<f64>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Directional operator on the profile at random (v, x), expected -|v|^alpha.
    VerifyLemma {
        #[arg(long)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3, 5])]
        dims: Vec<usize>,
        /// Random cases per dimension.
        #[arg(long, default_value_t = 50)]
        cases: usize,
        #[arg(long, value_delimiter = ',', default_values_t = ALPHA_GRID)]
        alphas: Vec<f64>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Generator values on the profile, closed form against quadrature.
    VerifyGenerator {
        #[arg(long, value_delimiter = ',', default_values_t = ALPHA_GRID)]
        alphas: Vec<f64>,
        /// Extra spectral-measure document to sweep.
        #[arg(long)]
        measure: Option<PathBuf>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Table of closed-form mean exit times at s·e1.
    ClosedForm {
        #[arg(long, value_delimiter = ',', default_values_t = ALPHA_GRID)]
        alphas: Vec<f64>,
        #[arg(long = "s", value_delimiter = ',', allow_negative_numbers = true,
              default_values_t = [0.0, 0.25, 0.5, 0.75])]
        s_values: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 4.0)]
        mass: f64,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Monte Carlo mean exit time against the closed form.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Bias allowance as a fraction of the expected mean.
        #[arg(long, default_value_t = DEFAULT_BIAS_FRACTION)]
        bias_budget: f64,
    },
    /// Antipodal, axis-cross and isotropic measures of equal mass.
    MassEquivalence {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 4.0)]
        mass: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 100_000)]
        n_paths: usize,
        /// Grid step as a fraction of the closed-form mean.
        #[arg(long, default_value_t = 1e-3)]
        h_factor: f64,
        /// Sampler for the discrete measures.
        #[arg(long, value_enum, default_value = "cpg")]
        sampler: SamplerArg,
        #[arg(long)]
        delta: Option<f64>,
        /// Override the three masses (antipodal, cross, isotropic).
        #[arg(long, value_delimiter = ',')]
        masses: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_BIAS_FRACTION)]
        bias_budget: f64,
    },
    /// Self-similarity: (x0, r) against (lambda x0, lambda r).
    ScalingCheck {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SamplerArg {
    Exact,
    Cpg,
}

fn read_measure(path: &PathBuf) -> Result<SpectralMeasure, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    SpectralMeasure::from_json_str(&text)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

fn run(command: Command) -> Result<ExperimentReport, HarnessError> {
    match command {
        Command::VerifyGetoor {
            alphas,
            u_fractions,
            radii,
            quad,
        } => cmd_verify_getoor(&GetoorArgs {
            alphas,
            u_fractions,
            radii,
            spec: quad.spec(),
        }),
        Command::VerifyLemma {
            seed,
            dims,
            cases,
            alphas,
            quad,
        } => cmd_verify_lemma(&LemmaArgs {
            dims,
            cases,
            seed,
            alphas,
            spec: quad.spec(),
        }),
        Command::VerifyGenerator {
            alphas,
            measure,
            quad,
        } => {
            let extra = measure.as_ref().map(read_measure).transpose()?;
            cmd_verify_generator(&GeneratorArgs {
                alphas,
                spec: quad.spec(),
                extra,
            })
        }
        Command::ClosedForm {
            alphas,
            s_values,
            r,
            mass,
            d,
        } => cmd_closed_form(&ClosedFormArgs {
            alphas,
            s_values,
            r,
            mass,
            d,
        }),
        Command::Estimate {
            config,
            seed,
            bias_budget,
        } => cmd_estimate(&EstimateArgs {
            config: ExperimentConfig::load(&config)?,
            seed,
            bias_fraction: bias_budget,
        }),
        Command::MassEquivalence {
            seed,
            mass,
            alpha,
            d,
            r,
            n_paths,
            h_factor,
            sampler,
            delta,
            masses,
            bias_budget,
        } => {
            let mut args = MassEquivalenceArgs::new(mass, alpha, d, r, n_paths, seed);
            args.h_factor = h_factor;
            args.sampler = match sampler {
                SamplerArg::Exact => SamplerKind::Exact,
                SamplerArg::Cpg => SamplerKind::Cpg,
            };
            args.delta = delta;
            args.masses = match masses.as_deref() {
                None => None,
                Some(&[a, b, c]) => Some([a, b, c]),
                Some(_) => {
                    return Err(HarnessError::Config(
                        "--masses takes exactly three values".into(),
                    ))
                }
            };
            args.bias_fraction = bias_budget;
            cmd_mass_equivalence(&args)
        }
        Command::ScalingCheck {
            config,
            seed,
            lambda,
        } => cmd_scaling_check(&ScalingArgs {
            config: ExperimentConfig::load(&config)?,
            lambda,
            seed,
        }),
    }
}

fn emit(
    report: &ExperimentReport,
    format: Format,
    out: Option<&PathBuf>,
) -> Result<(), HarnessError> {
    let text = report.render(format)?;
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match cli.threads {
        Some(0) => {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let start = Instant::now();
    let result = pool.install(|| run(cli.command));
    let mut report = match result {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if !cli.no_timing {
        report.wall_time = Some(start.elapsed().as_secs_f64());
    }
    if let Err(e) = emit(&report, cli.format, cli.out.as_ref()) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    for row in report.rows.iter().filter(|r| !r.pass) {
        eprintln!(
            "FAIL {}: expected {} observed {} tolerance {}",
            row.label, row.expected, row.observed, row.tolerance
        );
    }
    eprintln!(
        "{}: {}/{} rows pass",
        report.command,
        report.rows.len() - report.failures(),
        report.rows.len()
    );
    ExitCode::from(report.exit_code())
}
