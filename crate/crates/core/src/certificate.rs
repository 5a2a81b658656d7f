//! Counting certificate `G(w) / F(w)` and its decision thresholds.
//!
//! The joint acceptance probability `P(o=1, p=1)` is a dyadic `g(w) / 2^q`.
//! From it
//!
//! ```text
//! G(w) = g(w) · 2^{2t − 2s} · |H|²
//! F(w) = 2^q · (1 + 2^{2n} ε²)²
//! ```
//!
//! and the ratio lands in `[2/3, 1]` for non-members and in `[0, 1/3]` for
//! members, provided the claimed order is right and the sampler met ε.
//! When `2t < 2s` the power of two moves into `F` so both stay integral.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dyadic::Dyadic;
use crate::exact;

/// Smallest denominator exponent used for the numerator g(w).
pub const MIN_Q: u64 = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("claimed order must be at least 1")]
    ZeroOrder,
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(BigRational),
    #[error("denominator exponent {0} is below the minimum {MIN_Q}")]
    ExponentTooSmall(u64),
    #[error("F = {0} is not an integer")]
    NonIntegralF(BigRational),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    /// ratio in [2/3, 1]: h is outside the subgroup.
    NonMember,
    /// ratio in [0, 1/3]: h is in the subgroup.
    Member,
    /// Neither band; the certificate's assumptions do not hold.
    Invalid,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::NonMember => "NonMember",
            Decision::Member => "Member",
            Decision::Invalid => "Invalid",
        })
    }
}

/// Why a certificate cannot be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SoundnessIssue {
    /// ratio > 1.
    RatioAboveOne,
    /// 1/3 < ratio < 2/3.
    RatioInGap,
    /// 3 / (4 (1 + 2^{2n} ε²)²) does not exceed 2/3 for this ε.
    ThresholdGuardFailed,
    /// F is a fraction (ε has no dyadic-square structure compatible with q).
    NonIntegralF,
    /// The sampler's achieved deviation is not below ε.
    SamplerAboveEpsilon,
}

impl SoundnessIssue {
    pub fn describe(&self) -> &'static str {
        match self {
            SoundnessIssue::RatioAboveOne => {
                "ratio exceeds 1: the claimed subgroup order is too large"
            }
            SoundnessIssue::RatioInGap => {
                "ratio falls strictly between 1/3 and 2/3: claimed order or epsilon is wrong"
            }
            SoundnessIssue::ThresholdGuardFailed => {
                "3/(4(1+2^{2n}eps^2)^2) does not exceed 2/3: epsilon is too large to separate"
            }
            SoundnessIssue::NonIntegralF => "F(w) is not an integer for this epsilon",
            SoundnessIssue::SamplerAboveEpsilon => {
                "the sampler's maximum deviation is not below epsilon"
            }
        }
    }
}

/// `g(w)` and `q` with `g(w) / 2^q = p_joint` and `q = max(exponent, 12)`.
pub fn extract_gap_numerator(p_joint: &Dyadic) -> (BigUint, u64) {
    let q = p_joint.exponent().max(MIN_Q);
    let g = p_joint
        .numerator_at(q)
        .expect("q is at least the canonical exponent");
    (g, q)
}

/// Value of `3 / (4 (1 + 2^{2n} ε²)²)` and whether it exceeds 2/3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardResult {
    pub value: BigRational,
    pub passes: bool,
}

fn slack(n: u32, epsilon: &BigRational) -> BigRational {
    // (1 + 2^{2n} ε²)²
    let scale = BigRational::from_integer(BigInt::one() << (2 * n as usize));
    let inner = BigRational::one() + scale * epsilon * epsilon;
    &inner * &inner
}

pub fn threshold_guard(n: u32, epsilon: &BigRational) -> GuardResult {
    let value = BigRational::new(3.into(), 4.into()) / slack(n, epsilon);
    let passes = value > BigRational::new(2.into(), 3.into());
    GuardResult { value, passes }
}

/// The certificate for one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(with = "exact::biguint")]
    pub g_w: BigUint,
    pub q: u64,
    #[serde(with = "exact::biguint")]
    pub big_g: BigUint,
    /// F(w); an integer unless `NonIntegralF` is flagged.
    #[serde(with = "exact::rational")]
    pub big_f: BigRational,
    #[serde(with = "exact::rational")]
    pub ratio: BigRational,
    #[serde(with = "exact::rational")]
    pub epsilon: BigRational,
    pub n: u32,
    pub s_bits: u64,
    pub t_bits: u64,
    pub claimed_order: u64,
    #[serde(with = "exact::rational")]
    pub guard_value: BigRational,
    pub decision: Decision,
    pub issues: Vec<SoundnessIssue>,
}

impl Certificate {
    /// F as an integer, when it is one.
    pub fn f_integer(&self) -> Option<BigUint> {
        self.big_f
            .is_integer()
            .then(|| self.big_f.to_integer().magnitude().clone())
    }

    /// Like [`Certificate::f_integer`] but as an error.
    pub fn require_integral_f(&self) -> Result<BigUint, CertificateError> {
        self.f_integer()
            .ok_or_else(|| CertificateError::NonIntegralF(self.big_f.clone()))
    }

    /// Threshold line matching the decision.
    pub fn threshold_line(&self) -> &'static str {
        match self.decision {
            Decision::NonMember => "2/3 ≤ ratio ≤ 1",
            Decision::Member => "0 ≤ ratio ≤ 1/3",
            Decision::Invalid => "ratio outside [0, 1/3] ∪ [2/3, 1]",
        }
    }

    pub fn is_sound(&self) -> bool {
        self.issues.is_empty()
    }

    /// Records an externally detected problem and refuses to decide.
    pub fn flag(&mut self, issue: SoundnessIssue) {
        if !self.issues.contains(&issue) {
            self.issues.push(issue);
        }
        self.decision = Decision::Invalid;
    }
}

/// Classifies a ratio into the two decision bands.
pub fn classify(ratio: &BigRational) -> Result<Decision, SoundnessIssue> {
    let third = BigRational::new(1.into(), 3.into());
    let two_thirds = BigRational::new(2.into(), 3.into());
    if ratio.is_negative() {
        // g(w) is a probability numerator, so this cannot happen
        Err(SoundnessIssue::RatioInGap)
    } else if *ratio <= third {
        Ok(Decision::Member)
    } else if *ratio < two_thirds {
        Err(SoundnessIssue::RatioInGap)
    } else if *ratio <= BigRational::one() {
        Ok(Decision::NonMember)
    } else {
        Err(SoundnessIssue::RatioAboveOne)
    }
}

pub fn build_certificate(
    g_w: &BigUint,
    q: u64,
    s_bits: u64,
    t_bits: u64,
    claimed_order: u64,
    n: u32,
    epsilon: &BigRational,
) -> Result<Certificate, CertificateError> {
    if claimed_order == 0 {
        return Err(CertificateError::ZeroOrder);
    }
    if !epsilon.is_positive() {
        return Err(CertificateError::NonPositiveEpsilon(epsilon.clone()));
    }
    if q < MIN_Q {
        return Err(CertificateError::ExponentTooSmall(q));
    }

    let order_sq = BigUint::from(claimed_order) * claimed_order;
    let mut big_g = g_w * order_sq;
    let mut big_f = BigRational::from_integer(BigInt::one() << q as usize) * slack(n, epsilon);
    let (two_t, two_s) = (2 * t_bits, 2 * s_bits);
    if two_t >= two_s {
        big_g <<= two_t - two_s;
    } else {
        big_f *= BigRational::from_integer(BigInt::one() << (two_s - two_t) as usize);
    }
    let ratio = BigRational::from_integer(BigInt::from(big_g.clone())) / &big_f;

    let guard = threshold_guard(n, epsilon);
    let mut issues = Vec::new();
    let mut decision = match classify(&ratio) {
        Ok(d) => d,
        Err(issue) => {
            issues.push(issue);
            Decision::Invalid
        }
    };
    if !guard.passes {
        issues.push(SoundnessIssue::ThresholdGuardFailed);
        decision = Decision::Invalid;
    }
    if !big_f.is_integer() {
        issues.push(SoundnessIssue::NonIntegralF);
    }

    Ok(Certificate {
        g_w: g_w.clone(),
        q,
        big_g,
        big_f,
        ratio,
        epsilon: epsilon.clone(),
        n,
        s_bits,
        t_bits,
        claimed_order,
        guard_value: guard.value,
        decision,
        issues,
    })
}

/// `2^{q−12} · 4225`, the value of F under the default ε = 2^-(n+3).
pub fn default_f(q: u64) -> BigUint {
    debug_assert!(q >= MIN_Q);
    BigUint::from(4225u32) << (q - MIN_Q) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn default_eps(n: u32) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::one() << (n as usize + 3))
    }

    #[test]
    fn numerator_extraction() {
        assert_eq!(
            extract_gap_numerator(&Dyadic::new(3u32.into(), 4)),
            (768u32.into(), 12)
        );
        assert_eq!(extract_gap_numerator(&Dyadic::zero()), (0u32.into(), 12));
        assert_eq!(
            extract_gap_numerator(&Dyadic::pow2_inv(12)),
            (1u32.into(), 12)
        );
        assert_eq!(
            extract_gap_numerator(&Dyadic::new(5u32.into(), 20)),
            (5u32.into(), 20)
        );
    }

    #[test]
    fn yes_instance_certificate() {
        let c = build_certificate(&768u32.into(), 12, 2, 2, 2, 2, &default_eps(2)).unwrap();
        assert_eq!(c.big_g, BigUint::from(3072u32));
        assert_eq!(c.f_integer(), Some(4225u32.into()));
        assert_eq!(c.ratio, rat(3072, 4225));
        assert_eq!(c.decision, Decision::NonMember);
        assert!(c.is_sound());
        assert_eq!(c.threshold_line(), "2/3 ≤ ratio ≤ 1");
    }

    #[test]
    fn no_instance_and_falsified_order() {
        let c = build_certificate(&0u32.into(), 12, 2, 2, 2, 2, &default_eps(2)).unwrap();
        assert_eq!(c.decision, Decision::Member);
        assert_eq!(c.threshold_line(), "0 ≤ ratio ≤ 1/3");

        let c = build_certificate(&768u32.into(), 12, 2, 2, 4, 2, &default_eps(2)).unwrap();
        assert_eq!(c.ratio, rat(12288, 4225));
        assert_eq!(c.decision, Decision::Invalid);
        assert_eq!(c.issues, vec![SoundnessIssue::RatioAboveOne]);
    }

    #[test]
    fn guard_values() {
        for n in [1, 2, 5, 17, 40] {
            let g = threshold_guard(n, &default_eps(n));
            assert_eq!(g.value, rat(3072, 4225));
            assert!(g.passes);
        }
        assert!(!threshold_guard(1, &rat(1, 1)).passes);
        assert_eq!(threshold_guard(3, &rat(0, 1)).value, rat(3, 4));
    }

    #[test]
    fn default_f_is_integral() {
        for q in [12u64, 13, 20, 64] {
            for n in [1u32, 3, 6] {
                let c = build_certificate(&1u32.into(), q, 4, 4, 1, n, &default_eps(n)).unwrap();
                assert_eq!(c.require_integral_f().unwrap(), default_f(q));
            }
        }
    }

    #[test]
    fn power_of_two_moves_into_f_when_t_is_small() {
        let a = build_certificate(&768u32.into(), 12, 3, 5, 2, 2, &default_eps(2)).unwrap();
        let b = build_certificate(&768u32.into(), 12, 5, 3, 2, 2, &default_eps(2)).unwrap();
        assert_eq!(a.big_g, BigUint::from(3072u32 * 16));
        assert_eq!(b.big_g, BigUint::from(3072u32));
        assert_eq!(b.f_integer(), Some(BigUint::from(4225u32 * 16)));
        assert_eq!(a.ratio * rat(1, 256), b.ratio);
    }

    #[test]
    fn non_dyadic_epsilon_is_flagged() {
        let c = build_certificate(&768u32.into(), 12, 2, 2, 2, 2, &rat(1, 100)).unwrap();
        assert!(c.issues.contains(&SoundnessIssue::NonIntegralF));
        assert!(c.f_integer().is_none());
        assert!(matches!(
            c.require_integral_f(),
            Err(CertificateError::NonIntegralF(_))
        ));
        assert_eq!(c.decision, Decision::NonMember);
    }

    #[test]
    fn large_epsilon_refuses_to_decide() {
        let c = build_certificate(&768u32.into(), 12, 2, 2, 2, 2, &rat(1, 2)).unwrap();
        assert_eq!(c.decision, Decision::Invalid);
        assert!(c.issues.contains(&SoundnessIssue::ThresholdGuardFailed));
    }

    #[test]
    fn argument_errors() {
        let e = default_eps(2);
        assert_eq!(
            build_certificate(&1u32.into(), 12, 2, 2, 0, 2, &e).unwrap_err(),
            CertificateError::ZeroOrder
        );
        assert_eq!(
            build_certificate(&1u32.into(), 11, 2, 2, 1, 2, &e).unwrap_err(),
            CertificateError::ExponentTooSmall(11)
        );
        assert!(build_certificate(&1u32.into(), 12, 2, 2, 1, 2, &rat(0, 1)).is_err());
    }

    #[test]
    fn classification_bands() {
        assert_eq!(classify(&rat(1, 3)), Ok(Decision::Member));
        assert_eq!(classify(&rat(0, 1)), Ok(Decision::Member));
        assert_eq!(classify(&rat(1, 2)), Err(SoundnessIssue::RatioInGap));
        assert_eq!(classify(&rat(2, 3)), Ok(Decision::NonMember));
        assert_eq!(classify(&rat(1, 1)), Ok(Decision::NonMember));
        assert_eq!(classify(&rat(101, 100)), Err(SoundnessIssue::RatioAboveOne));
    }
}
