//! End-to-end run: sampler → analytics → optional brute force → certificate.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::instance::{parse_instance, InstanceError, InstanceFile};
use crate::analytics::{outcome_report, AnalyticsError, ProbabilityReport};
use crate::certificate::{
    build_certificate, extract_gap_numerator, Certificate, CertificateError, Decision,
    SoundnessIssue,
};
use crate::exact;
use crate::group::{
    validate_instance, EpsilonPolicy, GroupError, ProblemInstance, ValidationMode,
    DEFAULT_CLOSURE_CAP,
};
use crate::statevector::{compare_reports, simulate_full, StateError, DEFAULT_BRUTE_CAP_BITS};
use crate::walk::{choose_steps, gamma_exact, WalkConfig, WalkError, DEFAULT_STEP_CEILING};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Certificate(#[from] CertificateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Closed forms only.
    #[default]
    Analytic,
    /// Enumeration only.
    Brute,
    /// Both, with an exact field-by-field comparison.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Structured,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub mode: Mode,
    pub epsilon: Option<BigRational>,
    pub steps: Option<u64>,
    pub brute_cap_bits: u64,
    pub validation: ValidationMode,
    pub step_ceiling: u64,
    pub closure_cap: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Analytic,
            epsilon: None,
            steps: None,
            brute_cap_bits: DEFAULT_BRUTE_CAP_BITS,
            validation: ValidationMode::Trust,
            step_ceiling: DEFAULT_STEP_CEILING,
            closure_cap: DEFAULT_CLOSURE_CAP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunRequest {
    pub instance_path: PathBuf,
    pub options: RunOptions,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceEcho {
    pub group: String,
    pub width: u32,
    pub generators: Vec<String>,
    pub target: String,
    pub claimed_order: u64,
    #[serde(with = "exact::rational")]
    pub epsilon: BigRational,
    pub default_epsilon: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaEntry {
    pub element: String,
    pub count: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerSummary {
    pub steps: u64,
    pub bits_per_step: u32,
    pub s_bits: u64,
    pub t_bits: u64,
    pub branches: String,
    pub subgroup_order: u64,
    #[serde(with = "exact::rational")]
    pub max_deviation: BigRational,
    pub meets_epsilon: bool,
    pub steps_from: StepSource,
    pub gamma: Vec<GammaEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepSource {
    /// Smallest step count meeting ε.
    Search,
    /// Fixed by the instance file or the command line.
    Override,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub all_equal: bool,
    pub mismatches: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub true_order: u64,
    pub order_matches: bool,
    pub target_member: bool,
    /// Decision agrees with actual membership; false for an Invalid decision.
    pub decision_agrees: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// A decision was reached and nothing contradicts it.
    Decided,
    /// The certificate refused to decide.
    InvalidCertificate,
    /// Check mode or brute-force comparison disagrees with the result.
    Contradiction,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Decided => 0,
            Outcome::InvalidCertificate => 3,
            Outcome::Contradiction => 4,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timings {
    pub validation: Duration,
    pub sampler: Duration,
    pub analytic: Duration,
    pub brute: Duration,
    pub certificate: Duration,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: InstanceEcho,
    pub mode: Mode,
    pub sampler: SamplerSummary,
    /// Analytic report, or the brute-force one in brute mode.
    pub probabilities: ProbabilityReport,
    pub brute: Option<ProbabilityReport>,
    pub comparison: Option<ComparisonSummary>,
    pub certificate: Certificate,
    pub ground_truth: Option<GroundTruth>,
    pub outcome: Outcome,
    /// Wall-clock timings; excluded from structured output.
    #[serde(skip)]
    pub timings: Timings,
}

pub fn run_pipeline(request: &RunRequest) -> Result<RunReport, PipelineError> {
    let file = parse_instance(&request.instance_path)?;
    run_instance(&file, &request.options)
}

pub fn run_instance(file: &InstanceFile, options: &RunOptions) -> Result<RunReport, PipelineError> {
    let mut timings = Timings::default();
    let instance = &file.instance;
    let oracle = instance.oracle();

    let clock = Instant::now();
    let validation = validate_instance(instance, options.validation, options.closure_cap)?;
    timings.validation = clock.elapsed();

    let epsilon = options
        .epsilon
        .clone()
        .unwrap_or_else(|| instance.epsilon());
    let default_epsilon =
        options.epsilon.is_none() && *instance.epsilon_policy() == EpsilonPolicy::Default;

    let clock = Instant::now();
    let fixed_steps = options.steps.or(file.steps);
    let (steps, gamma) = match fixed_steps {
        Some(steps) => (
            steps,
            gamma_exact(oracle, instance.generators(), steps, options.closure_cap)?,
        ),
        None => choose_steps(
            oracle,
            instance.generators(),
            &epsilon,
            options.step_ceiling,
            options.closure_cap,
        )?,
    };
    let config = WalkConfig::new(instance.generators().len(), steps)?;
    let max_deviation = gamma.max_deviation();
    let meets_epsilon = max_deviation < epsilon;
    timings.sampler = clock.elapsed();

    let clock = Instant::now();
    let analytic = match options.mode {
        Mode::Analytic | Mode::Both => Some(outcome_report(&gamma, instance.target(), oracle)?),
        Mode::Brute => None,
    };
    timings.analytic = clock.elapsed();

    let clock = Instant::now();
    let brute = match options.mode {
        Mode::Brute | Mode::Both => Some(simulate_full(instance, &config, options.brute_cap_bits)?),
        Mode::Analytic => None,
    };
    timings.brute = clock.elapsed();

    let comparison = match (&analytic, &brute) {
        (Some(a), Some(b)) => {
            let cmp = compare_reports(a, b);
            Some(ComparisonSummary {
                all_equal: cmp.all_equal(),
                mismatches: cmp.mismatches.iter().map(|m| m.to_string()).collect(),
            })
        }
        _ => None,
    };

    let clock = Instant::now();
    let probabilities = analytic
        .or_else(|| brute.clone())
        .expect("every mode produces at least one report");
    let (g_w, q) = extract_gap_numerator(&probabilities.p_o1_joint);
    let mut certificate = build_certificate(
        &g_w,
        q,
        probabilities.s_bits,
        probabilities.t_bits,
        instance.claimed_order(),
        oracle.width(),
        &epsilon,
    )?;
    if !meets_epsilon {
        certificate.flag(SoundnessIssue::SamplerAboveEpsilon);
    }
    timings.certificate = clock.elapsed();

    let ground_truth = match (validation.true_order, validation.target_member) {
        (Some(true_order), Some(target_member)) => Some(GroundTruth {
            true_order,
            order_matches: true_order == instance.claimed_order(),
            target_member,
            decision_agrees: match certificate.decision {
                Decision::NonMember => !target_member,
                Decision::Member => target_member,
                Decision::Invalid => false,
            },
        }),
        _ => None,
    };

    let contradicted = comparison.as_ref().is_some_and(|c| !c.all_equal)
        || ground_truth.as_ref().is_some_and(|g| {
            !g.order_matches || (certificate.decision != Decision::Invalid && !g.decision_agrees)
        });
    let outcome = if contradicted {
        Outcome::Contradiction
    } else if certificate.decision == Decision::Invalid {
        Outcome::InvalidCertificate
    } else {
        Outcome::Decided
    };

    Ok(RunReport {
        instance: echo(instance, &epsilon, default_epsilon),
        mode: options.mode,
        sampler: SamplerSummary {
            steps,
            bits_per_step: config.bits_per_step(),
            s_bits: gamma.total_bits(),
            t_bits: gamma.garbage_bits(),
            branches: gamma.branches().to_string(),
            subgroup_order: gamma.subgroup_order(),
            max_deviation,
            meets_epsilon,
            steps_from: if fixed_steps.is_some() {
                StepSource::Override
            } else {
                StepSource::Search
            },
            gamma: gamma
                .counts()
                .iter()
                .map(|(&g, c)| GammaEntry {
                    element: oracle.format_element(g),
                    count: c.to_string(),
                })
                .collect(),
        },
        probabilities,
        brute,
        comparison,
        certificate,
        ground_truth,
        outcome,
        timings,
    })
}

fn echo(instance: &ProblemInstance, epsilon: &BigRational, default_epsilon: bool) -> InstanceEcho {
    let oracle = instance.oracle();
    InstanceEcho {
        group: oracle.name(),
        width: oracle.width(),
        generators: instance
            .generators()
            .iter()
            .map(|&g| oracle.format_element(g))
            .collect(),
        target: oracle.format_element(instance.target()),
        claimed_order: instance.claimed_order(),
        epsilon: epsilon.clone(),
        default_epsilon,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::instance::parse_instance_str;

    fn run(text: &str, options: RunOptions) -> RunReport {
        run_instance(&parse_instance_str(text).unwrap(), &options).unwrap()
    }

    const Z4_YES: &str = "group = cyclic(4)\ngenerators = 2\ntarget = 1\norder = 2\n";

    #[test]
    fn z4_yes_instance() {
        let r = run(Z4_YES, RunOptions::default());
        assert_eq!(r.certificate.decision, Decision::NonMember);
        assert_eq!(r.certificate.ratio.to_string(), "3072/4225");
        assert_eq!(r.outcome, Outcome::Decided);
        assert_eq!(r.sampler.steps, 1);
        assert!(r.brute.is_none());
    }

    #[test]
    fn z4_member_target() {
        let r = run(
            "group = cyclic(4)\ngenerators = 2\ntarget = 2\norder = 2\n",
            RunOptions::default(),
        );
        assert_eq!(r.certificate.decision, Decision::Member);
    }

    #[test]
    fn z3_both_modes_agree() {
        let r = run(
            "group = cyclic(3)\ngenerators = 1\ntarget = 2\norder = 3\nsteps = 1\n",
            RunOptions {
                mode: Mode::Both,
                ..RunOptions::default()
            },
        );
        assert!(r.comparison.unwrap().all_equal);
        // one step leaves ε̂ = 1/6, far above the default ε
        assert!(!r.sampler.meets_epsilon);
        assert_eq!(r.certificate.decision, Decision::Invalid);
        assert_eq!(r.outcome, Outcome::InvalidCertificate);
    }

    #[test]
    fn check_mode_flags_wrong_order() {
        let r = run(
            "group = cyclic(4)\ngenerators = 2\ntarget = 1\norder = 1\n",
            RunOptions {
                validation: ValidationMode::Check,
                ..RunOptions::default()
            },
        );
        let truth = r.ground_truth.unwrap();
        assert!(!truth.order_matches);
        assert_eq!(r.outcome, Outcome::Contradiction);
    }

    #[test]
    fn brute_mode_respects_cap() {
        let err = run_instance(
            &parse_instance_str(Z4_YES).unwrap(),
            &RunOptions {
                mode: Mode::Brute,
                steps: Some(8),
                ..RunOptions::default()
            },
        )
        .unwrap_err();
        assert!(matches!(
            err,
            PipelineError::State(StateError::CapExceeded { .. })
        ));
    }
}
