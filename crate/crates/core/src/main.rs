use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use num_rational::BigRational;

use gnm_awpp::cli::{emit_report, run_pipeline, Format, Mode, RunOptions, RunRequest};
use gnm_awpp::exact::parse_rational;
use gnm_awpp::group::{ValidationMode, DEFAULT_CLOSURE_CAP};
use gnm_awpp::statevector::DEFAULT_BRUTE_CAP_BITS;
use gnm_awpp::walk::{sample_monte_carlo, WalkConfig, DEFAULT_STEP_CEILING};

/// Exit status for errors raised while running the pipeline.
const EXIT_RUNTIME: u8 = 1;
/// Exit status for usage and instance-file errors.
const EXIT_USAGE: u8 = 2;

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum Validate {
    Trust,
    Check,
}

/// Decide modified group non-membership by exact simulation of the
/// postselected protocol and evaluate its AWPP certificate.
#[derive(Debug, Parser)]
#[command(name = "gnm-awpp", version)]
struct Args {
    /// Instance file (key = value lines).
    #[arg(long)]
    instance: PathBuf,

    #[arg(long, value_enum, default_value = "analytic")]
    mode: Mode,

    /// Override epsilon, e.g. 1/256 or 2^-8.
    #[arg(long, value_parser = parse_epsilon)]
    epsilon: Option<BigRational>,

    /// Fix the walk length instead of searching for the smallest one.
    #[arg(long)]
    steps: Option<u64>,

    /// Largest S (random bits) accepted by the brute-force simulator.
    #[arg(long, default_value_t = DEFAULT_BRUTE_CAP_BITS)]
    brute_cap: u64,

    #[arg(long, value_enum, default_value = "text")]
    format: Format,

    #[arg(long, value_enum, default_value = "trust")]
    validate: Validate,

    /// Largest walk length tried by the step search.
    #[arg(long, default_value_t = DEFAULT_STEP_CEILING)]
    step_ceiling: u64,

    /// Also draw this many seeded Monte-Carlo walks and print their endpoint
    /// frequencies next to the exact probabilities.
    #[arg(long)]
    monte_carlo: Option<u64>,

    /// Seed for --monte-carlo.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_epsilon(text: &str) -> Result<BigRational, String> {
    let eps = parse_rational(text)?;
    if eps <= BigRational::from_integer(0.into()) {
        return Err(format!("epsilon must be positive, got {eps}"));
    }
    Ok(eps)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let request = RunRequest {
        instance_path: args.instance.clone(),
        format: args.format,
        options: RunOptions {
            mode: args.mode,
            epsilon: args.epsilon.clone(),
            steps: args.steps,
            brute_cap_bits: args.brute_cap,
            validation: match args.validate {
                Validate::Trust => ValidationMode::Trust,
                Validate::Check => ValidationMode::Check,
            },
            step_ceiling: args.step_ceiling,
            closure_cap: DEFAULT_CLOSURE_CAP,
        },
    };
    let report = match run_pipeline(&request) {
        Ok(r) => r,
        Err(gnm_awpp::cli::PipelineError::Instance(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    print!("{}", emit_report(&report, request.format));

    if let Some(trials) = args.monte_carlo {
        if let Err(e) = print_monte_carlo(&args, report.sampler.steps, trials) {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    ExitCode::from(report.outcome.exit_code() as u8)
}

fn print_monte_carlo(
    args: &Args,
    steps: u64,
    trials: u64,
) -> Result<(), Box<dyn std::error::Error>> {
    let file = gnm_awpp::cli::parse_instance(&args.instance)?;
    let inst = &file.instance;
    let config = WalkConfig::new(inst.generators().len(), steps)?;
    let freq = sample_monte_carlo(&config, inst.oracle(), inst.generators(), args.seed, trials)?;
    eprintln!("monte carlo ({trials} walks, seed {}):", args.seed);
    for (g, n) in freq {
        eprintln!(
            "  {:<16} {:>8} {:.6}",
            inst.oracle().format_element(g),
            n,
            n as f64 / trials as f64
        );
    }
    Ok(())
}
