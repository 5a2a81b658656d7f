//! Brute-force construction of the protocol state.
//!
//! Every random-bit branch `z` is enumerated, each circuit step is applied to
//! an explicit sparse amplitude map, and the probabilities are read off the
//! resulting vectors. Nothing here uses the γ closed forms, so agreement with
//! [`crate::analytics::outcome_report`] certifies them.
//!
//! Amplitudes are integers over a shared power of √2, so every squared norm is
//! an exact [`Dyadic`].

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::analytics::ProbabilityReport;
use crate::dyadic::Dyadic;
use crate::group::{ElementCode, GroupError, GroupOracle, ProblemInstance};
use crate::walk::{GammaTable, WalkConfig, WalkError};

/// Default cap on S for enumeration (2^24 branch pairs).
pub const DEFAULT_BRUTE_CAP_BITS: u64 = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("brute force needs S = {required} random bits, cap is {cap}")]
    CapExceeded { required: u64, cap: u64 },
}

/// One random-bit branch: the string `z`, the walk endpoint η_z, and the
/// leftover garbage (here `z` itself).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Branch {
    pub z: u64,
    pub eta: ElementCode,
    pub garbage: u64,
}

/// Sparse state with amplitudes `a / √2^half_exponent`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseAmplitudeState<L: Ord> {
    amplitudes: BTreeMap<L, BigInt>,
    half_exponent: u64,
}

impl<L: Ord + Clone> SparseAmplitudeState<L> {
    pub fn new(half_exponent: u64) -> Self {
        Self {
            amplitudes: BTreeMap::new(),
            half_exponent,
        }
    }

    pub fn add(&mut self, label: L, amplitude: impl Into<BigInt>) {
        let entry = self.amplitudes.entry(label.clone()).or_default();
        *entry += amplitude.into();
        if entry.is_zero() {
            self.amplitudes.remove(&label);
        }
    }

    pub fn amplitude(&self, label: &L) -> BigInt {
        self.amplitudes.get(label).cloned().unwrap_or_default()
    }

    pub fn half_exponent(&self) -> u64 {
        self.half_exponent
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&L, &BigInt)> {
        self.amplitudes.iter()
    }

    /// Σ a² / 2^half_exponent.
    pub fn norm_sq(&self) -> Dyadic {
        let total: BigUint = self
            .amplitudes
            .values()
            .map(|a| a.magnitude() * a.magnitude())
            .sum();
        Dyadic::new(total, self.half_exponent)
    }

    /// Applies a map that sends each basis label to a combination of labels
    /// with integer coefficients, adding `extra_half` to the half exponent.
    pub fn transform<M, F>(&self, extra_half: u64, mut f: F) -> SparseAmplitudeState<M>
    where
        M: Ord + Clone,
        F: FnMut(&L) -> Vec<(M, i64)>,
    {
        let mut out = SparseAmplitudeState::new(self.half_exponent + extra_half);
        for (label, a) in &self.amplitudes {
            for (m, c) in f(label) {
                out.add(m, a * c);
            }
        }
        out
    }
}

/// Basis label of one protocol copy: element register, coupled qubit,
/// garbage register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CopyLabel {
    pub element: ElementCode,
    pub coupled: u8,
    pub garbage: u64,
}

impl fmt::Display for CopyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "|{}>|{}>|{:b}>",
            self.element, self.coupled, self.garbage
        )
    }
}

/// One branch per `z ∈ {0,1}^S`, in increasing `z`.
pub fn enumerate_branches(
    config: &WalkConfig,
    oracle: &dyn GroupOracle,
    generators: &[ElementCode],
    cap_bits: u64,
) -> Result<Vec<Branch>, StateError> {
    let s = config.total_bits();
    if s > cap_bits || s > 32 {
        return Err(StateError::CapExceeded {
            required: s,
            cap: cap_bits.min(32),
        });
    }
    let actions = config.actions(oracle, generators)?;
    (0..1u64 << s)
        .map(|z| {
            Ok(Branch {
                z,
                eta: config.endpoint(oracle, &actions, z)?,
                garbage: z,
            })
        })
        .collect()
}

/// γ_g counted directly from the branch list.
pub fn branch_counts(branches: &[Branch]) -> BTreeMap<ElementCode, u64> {
    let mut counts = BTreeMap::new();
    for b in branches {
        *counts.entry(b.eta).or_default() += 1;
    }
    counts
}

/// `|<+^t|garbage(g)>|²` per endpoint, with `garbage(g)` normalized by the
/// supplied γ table. Equals `γ_g / 2^t` exactly when the table is correct.
pub fn garbage_overlaps(
    branches: &[Branch],
    gamma: &GammaTable,
    t: u64,
) -> BTreeMap<ElementCode, BigRational> {
    // Each <+^t|z> contributes 1/√2^t, so the overlap numerator is a count.
    let mut overlap: BTreeMap<ElementCode, BigInt> = BTreeMap::new();
    for b in branches {
        *overlap.entry(b.eta).or_default() += 1;
    }
    overlap
        .into_iter()
        .map(|(g, amp)| {
            let denom = BigInt::from(gamma.count(g)) << t as usize;
            let value = if denom.is_zero() {
                BigRational::zero()
            } else {
                BigRational::new(&amp * &amp, denom)
            };
            (g, value)
        })
        .collect()
}

/// |Ψ> = 2^{-S/2} Σ_z |η_z>|z>, with the coupled qubit slot set to 0.
pub fn initial_state(branches: &[Branch], total_bits: u64) -> SparseAmplitudeState<CopyLabel> {
    let mut psi = SparseAmplitudeState::new(total_bits);
    for b in branches {
        psi.add(
            CopyLabel {
                element: b.eta,
                coupled: 0,
                garbage: b.garbage,
            },
            1,
        );
    }
    psi
}

/// Couples |+>, multiplies the element register by `h` when the coupled
/// qubit is 1, then applies Hadamard to the coupled qubit.
pub fn prepare_copy(
    psi: &SparseAmplitudeState<CopyLabel>,
    oracle: &dyn GroupOracle,
    h: ElementCode,
) -> Result<SparseAmplitudeState<CopyLabel>, StateError> {
    let plus = psi.transform(1, |l| {
        vec![
            (CopyLabel { coupled: 0, ..*l }, 1),
            (CopyLabel { coupled: 1, ..*l }, 1),
        ]
    });
    let mut failure = None;
    let shifted = plus.transform(0, |l| {
        if l.coupled == 0 {
            return vec![(*l, 1)];
        }
        match oracle.multiply(l.element, h) {
            Ok(e) => vec![(CopyLabel { element: e, ..*l }, 1)],
            Err(err) => {
                failure = Some(err);
                vec![]
            }
        }
    });
    if let Some(err) = failure {
        return Err(err.into());
    }
    Ok(shifted.transform(1, |l| {
        let sign = if l.coupled == 0 { 1 } else { -1 };
        vec![
            (CopyLabel { coupled: 0, ..*l }, 1),
            (CopyLabel { coupled: 1, ..*l }, sign),
        ]
    }))
}

/// Projects the garbage register onto |+^t>: returns the coefficients of
/// `|element>|coupled>`, over `√2^(half_exponent + t)`.
pub fn project_garbage(
    copy: &SparseAmplitudeState<CopyLabel>,
    t: u64,
) -> SparseAmplitudeState<(ElementCode, u8)> {
    copy.transform(t, |l| vec![((l.element, l.coupled), 1)])
}

/// Probabilities measured on the literal two-copy state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoCopyMeasurement {
    /// Squared norm before postselection.
    pub norm_before: Dyadic,
    pub p_post: Dyadic,
    pub p_o0_joint: Dyadic,
    pub p_o1_joint: Dyadic,
}

/// Tensors two copies, flips the ancilla (initially 1) when both coupled
/// qubits read 0, and postselects both garbage registers onto |+^t>.
///
/// The product state is enumerated pair by pair over the basis states of
/// the two copies; the garbage projection sums the pairs that share the
/// remaining registers.
pub fn measure_two_copies(copy: &SparseAmplitudeState<CopyLabel>, t: u64) -> TwoCopyMeasurement {
    // Dense slot for (element, coupled) so the projected amplitudes can live
    // in a flat accumulator.
    let mut slots: BTreeMap<(ElementCode, u8), usize> = BTreeMap::new();
    for (l, _) in copy.iter() {
        let next = slots.len();
        slots.entry((l.element, l.coupled)).or_insert(next);
    }
    let width = slots.len();
    let entries: Vec<(usize, u8, i64)> = copy
        .iter()
        .map(|(l, a)| {
            let a = i64::try_from(a).expect("single-copy amplitudes are small integers");
            (slots[&(l.element, l.coupled)], l.coupled, a)
        })
        .collect();

    // Per first-copy entry: accumulate a1·a2 into the projected slot pair and
    // (a1·a2)² into the pre-projection norm.
    let (acc, norm) = entries
        .par_iter()
        .fold(
            || (vec![0i128; width * width], 0u128),
            |(mut acc, mut norm), &(s1, _b1, a1)| {
                for &(s2, _b2, a2) in &entries {
                    let amp = i128::from(a1) * i128::from(a2);
                    acc[s1 * width + s2] += amp;
                    norm += (amp * amp) as u128;
                }
                (acc, norm)
            },
        )
        .reduce(
            || (vec![0i128; width * width], 0u128),
            |(mut a, na), (b, nb)| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                (a, na + nb)
            },
        );

    let coupled_of: Vec<u8> = {
        let mut v = vec![0u8; width];
        for (&(_, b), &s) in &slots {
            v[s] = b;
        }
        v
    };
    let mut ancilla0 = BigUint::zero();
    let mut ancilla1 = BigUint::zero();
    for s1 in 0..width {
        for s2 in 0..width {
            let a = acc[s1 * width + s2].unsigned_abs();
            let sq = BigUint::from(a) * BigUint::from(a);
            // ancilla flipped to 0 exactly on coupled pair |00>
            if coupled_of[s1] == 0 && coupled_of[s2] == 0 {
                ancilla0 += sq;
            } else {
                ancilla1 += sq;
            }
        }
    }
    let pre = 2 * copy.half_exponent();
    let post = pre + 2 * t;
    TwoCopyMeasurement {
        norm_before: Dyadic::new(BigUint::from(norm), pre),
        p_post: Dyadic::new(&ancilla0 + &ancilla1, post),
        p_o0_joint: Dyadic::new(ancilla0, post),
        p_o1_joint: Dyadic::new(ancilla1, post),
    }
}

/// Runs the whole circuit by enumeration and reports every probability.
pub fn simulate_full(
    instance: &ProblemInstance,
    config: &WalkConfig,
    cap_bits: u64,
) -> Result<ProbabilityReport, StateError> {
    let oracle = instance.oracle();
    let branches = enumerate_branches(config, oracle, instance.generators(), cap_bits)?;
    let s = config.total_bits();
    let t = s;

    let sum_gamma_sq: BigUint = branch_counts(&branches)
        .values()
        .map(|&c| BigUint::from(c) * c)
        .sum();

    let copy = prepare_copy(&initial_state(&branches, s), oracle, instance.target())?;

    let projected = project_garbage(&copy, t);
    let mut plus_norm = BigUint::zero();
    let mut minus_norm = BigUint::zero();
    for (&(_, coupled), a) in projected.iter() {
        let sq = a.magnitude() * a.magnitude();
        if coupled == 0 {
            plus_norm += sq;
        } else {
            minus_norm += sq;
        }
    }

    let m = measure_two_copies(&copy, t);
    debug_assert_eq!(m.norm_before, Dyadic::one());
    let p_post_r = m.p_post.to_rational();
    let p_o0_given = m.p_o0_joint.to_rational() / &p_post_r;
    let p_o1_given = m.p_o1_joint.to_rational() / &p_post_r;
    Ok(ProbabilityReport {
        sum_gamma_sq,
        plus_norm,
        minus_norm,
        p_post: m.p_post,
        p_o0_joint: m.p_o0_joint,
        p_o1_joint: m.p_o1_joint,
        p_o0_given,
        p_o1_given,
        t_bits: t,
        s_bits: s,
    })
}

/// One differing field of two reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMismatch {
    pub field: &'static str,
    pub analytic: String,
    pub brute: String,
    /// brute / analytic, when both are non-zero numbers.
    pub ratio: Option<BigRational>,
}

impl fmt::Display for FieldMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: analytic {} vs brute {}",
            self.field, self.analytic, self.brute
        )?;
        if let Some(r) = &self.ratio {
            write!(f, " (ratio {r})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ComparisonResult {
    pub mismatches: Vec<FieldMismatch>,
}

impl ComparisonResult {
    pub fn all_equal(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn mismatch(&self, field: &str) -> Option<&FieldMismatch> {
        self.mismatches.iter().find(|m| m.field == field)
    }
}

pub fn compare_reports(
    analytic: &ProbabilityReport,
    brute: &ProbabilityReport,
) -> ComparisonResult {
    let mut out = ComparisonResult::default();
    let mut check = |field: &'static str, a: BigRational, b: BigRational| {
        if a != b {
            let ratio = (!a.is_zero() && !b.is_zero()).then(|| &b / &a);
            out.mismatches.push(FieldMismatch {
                field,
                analytic: a.to_string(),
                brute: b.to_string(),
                ratio: ratio.map(|r| r.abs()),
            });
        }
    };
    let int = |v: &BigUint| BigRational::from_integer(BigInt::from(v.clone()));
    let small = |v: u64| BigRational::from_integer(BigInt::from(v));
    check(
        "sum_gamma_sq",
        int(&analytic.sum_gamma_sq),
        int(&brute.sum_gamma_sq),
    );
    check("plus_norm", int(&analytic.plus_norm), int(&brute.plus_norm));
    check(
        "minus_norm",
        int(&analytic.minus_norm),
        int(&brute.minus_norm),
    );
    check(
        "p_post",
        analytic.p_post.to_rational(),
        brute.p_post.to_rational(),
    );
    check(
        "p_o0_joint",
        analytic.p_o0_joint.to_rational(),
        brute.p_o0_joint.to_rational(),
    );
    check(
        "p_o1_joint",
        analytic.p_o1_joint.to_rational(),
        brute.p_o1_joint.to_rational(),
    );
    check(
        "p_o0_given",
        analytic.p_o0_given.clone(),
        brute.p_o0_given.clone(),
    );
    check(
        "p_o1_given",
        analytic.p_o1_given.clone(),
        brute.p_o1_given.clone(),
    );
    check("t_bits", small(analytic.t_bits), small(brute.t_bits));
    check("s_bits", small(analytic.s_bits), small(brute.s_bits));
    out
}
