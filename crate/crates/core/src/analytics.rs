//! Closed-form protocol probabilities from the branch counts γ_g.
//!
//! With `|h±> = Σ_g γ_g (|g> ± |gh>)`, both norms follow from one cross term
//! `X = Σ_g γ_g γ_{g h^-1}`:
//!
//! ```text
//! <h+|h+> = 2 Σγ² + 2X        <h-|h-> = 2 Σγ² − 2X
//! P(p=1)        = (Σγ²)² / (N² 2^{2t})
//! P(o=0 | p=1)  = (<h+|h+> / 4Σγ²)²
//! ```
//!
//! X vanishes when h lies outside the subgroup, which pins P(o=1 | p=1) to
//! 3/4 for any counts.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dyadic::Dyadic;
use crate::exact;
use crate::group::{ElementCode, GroupError, GroupOracle};
use crate::walk::GammaTable;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("P(o=1|p=1) = {lhs} exceeds 2·ε̂²·|H|² = {rhs}")]
    BoundViolation {
        lhs: Box<BigRational>,
        rhs: Box<BigRational>,
    },
}

/// Every probability of one protocol run, exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbabilityReport {
    #[serde(with = "exact::biguint")]
    pub sum_gamma_sq: BigUint,
    #[serde(with = "exact::biguint")]
    pub plus_norm: BigUint,
    #[serde(with = "exact::biguint")]
    pub minus_norm: BigUint,
    /// P(p=1).
    pub p_post: Dyadic,
    /// P(o=0, p=1).
    pub p_o0_joint: Dyadic,
    /// P(o=1, p=1).
    pub p_o1_joint: Dyadic,
    #[serde(with = "exact::rational")]
    pub p_o0_given: BigRational,
    #[serde(with = "exact::rational")]
    pub p_o1_given: BigRational,
    pub t_bits: u64,
    pub s_bits: u64,
}

/// `(<h+|h+>, <h-|h->)` for target `h`.
pub fn h_norms(
    gamma: &GammaTable,
    h: ElementCode,
    oracle: &dyn GroupOracle,
) -> Result<(BigUint, BigUint), AnalyticsError> {
    let h_inv = oracle.invert(h)?;
    let mut cross = BigUint::zero();
    for (&g, c) in gamma.counts() {
        if c.is_zero() {
            continue;
        }
        let shifted = gamma.count(oracle.multiply(g, h_inv)?);
        cross += c * shifted;
    }
    let twice_sq = gamma.sum_of_squares() << 1u32;
    let twice_cross = cross << 1u32;
    // Cauchy-Schwarz: X ≤ Σγ², so the difference is non-negative.
    Ok((&twice_sq + &twice_cross, twice_sq - twice_cross))
}

/// P(p=1) = (Σγ²)² / 2^{2S + 2t}.
pub fn postselection_probability(gamma: &GammaTable) -> Dyadic {
    let sq = gamma.sum_of_squares();
    Dyadic::new(&sq * &sq, 2 * gamma.total_bits() + 2 * gamma.garbage_bits())
}

/// P(p=1) rebuilt from the deviations: `2^{2S−2t} (1/|H| + Σ ε_g²)²`.
pub fn postselection_from_deviations(gamma: &GammaTable) -> BigRational {
    let eps_sq: BigRational = gamma.deviations().values().map(|e| e * e).sum();
    let base = BigRational::new(BigInt::one(), BigInt::from(gamma.subgroup_order())) + eps_sq;
    let shift = 2 * gamma.total_bits() as i64 - 2 * gamma.garbage_bits() as i64;
    let scale = BigInt::one() << shift.unsigned_abs() as usize;
    let scale = if shift >= 0 {
        BigRational::from_integer(scale)
    } else {
        BigRational::new(BigInt::one(), scale)
    };
    scale * &base * &base
}

pub fn outcome_report(
    gamma: &GammaTable,
    h: ElementCode,
    oracle: &dyn GroupOracle,
) -> Result<ProbabilityReport, AnalyticsError> {
    let (plus_norm, minus_norm) = h_norms(gamma, h, oracle)?;
    let sum_gamma_sq = gamma.sum_of_squares();
    let p_post = postselection_probability(gamma);

    // P(o=0, p=1) = <h+|h+>² / (16 · 2^{2S+2t})
    let exponent = 2 * gamma.total_bits() + 2 * gamma.garbage_bits() + 4;
    let p_o0_joint = Dyadic::new(&plus_norm * &plus_norm, exponent);
    let p_o1_joint = p_post
        .checked_sub(&p_o0_joint)
        .expect("<h+|h+> ≤ 4Σγ² keeps the joint probability below P(p=1)");

    let four_sq = BigInt::from(&sum_gamma_sq << 2u32);
    let ratio = BigRational::new(BigInt::from(plus_norm.clone()), four_sq);
    let p_o0_given = &ratio * &ratio;
    let p_o1_given = BigRational::one() - &p_o0_given;

    Ok(ProbabilityReport {
        sum_gamma_sq,
        plus_norm,
        minus_norm,
        p_post,
        p_o0_joint,
        p_o1_joint,
        p_o0_given,
        p_o1_given,
        t_bits: gamma.garbage_bits(),
        s_bits: gamma.total_bits(),
    })
}

/// Both sides of `P(o=1|p=1) ≤ 2 ε̂² |H|²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCheck {
    pub lhs: BigRational,
    pub rhs: BigRational,
}

/// Checks the member-case bound on P(o=1|p=1) with the achieved deviation.
pub fn membership_bound_check(
    report: &ProbabilityReport,
    epsilon_hat: &BigRational,
    order: u64,
) -> Result<BoundCheck, AnalyticsError> {
    let order = BigRational::from_integer(BigInt::from(order));
    let rhs = BigRational::from_integer(2.into()) * epsilon_hat * epsilon_hat * &order * &order;
    let lhs = report.p_o1_given.clone();
    if lhs > rhs {
        return Err(AnalyticsError::BoundViolation {
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        });
    }
    Ok(BoundCheck { lhs, rhs })
}
