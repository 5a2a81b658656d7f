//! Lazy random walk on the Cayley graph of `<g_1, ..., g_k>`.
//!
//! Each step reads a `c`-bit pattern with `c = ceil(log2(2k + 2))` and
//! right-multiplies the current element by the action assigned to that
//! pattern. Patterns `0..k` select the generators, `k..2k` their inverses,
//! and every remaining pattern (at least one) leaves the walk in place. With
//! `steps` steps the walk consumes `S = steps * c` random bits, so the branch
//! count is exactly `N = 2^S`.
//!
//! [`gamma_exact`] counts, by dynamic programming, how many of the `2^S` bit
//! strings end at each subgroup element. [`choose_steps`] extends the walk
//! one step at a time until every element's probability is strictly within
//! ε of uniform.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{closure, ElementCode, GroupError, GroupOracle, Subgroup};

/// Default ceiling on the number of walk steps tried by [`choose_steps`].
pub const DEFAULT_STEP_CEILING: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WalkError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("no step count up to {ceiling} reaches max deviation below {epsilon} (best {best})")]
    NoConvergence {
        ceiling: u64,
        epsilon: Box<BigRational>,
        best: Box<BigRational>,
    },
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(BigRational),
    #[error("{total} branch counts do not sum to 2^{bits}")]
    BadCounts { total: BigUint, bits: u64 },
    #[error("walk uses {bits} random bits; at most {max} supported here")]
    TooManyBits { bits: u64, max: u64 },
}

/// What one step does for a given bit pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WalkOption {
    Generator(usize),
    Inverse(usize),
    Identity,
}

/// Assignment of every `c`-bit pattern to a [`WalkOption`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptionTable {
    bits_per_step: u32,
    options: Vec<WalkOption>,
}

impl OptionTable {
    pub fn bits_per_step(&self) -> u32 {
        self.bits_per_step
    }

    /// Options indexed by pattern value (first bit read is the most
    /// significant).
    pub fn options(&self) -> &[WalkOption] {
        &self.options
    }

    pub fn identity_patterns(&self) -> usize {
        self.options
            .iter()
            .filter(|o| **o == WalkOption::Identity)
            .count()
    }
}

/// Builds the pattern table for `k` generators.
pub fn build_option_table(k: usize) -> Result<OptionTable, WalkError> {
    if k == 0 {
        return Err(GroupError::NoGenerators.into());
    }
    let needed = 2 * k + 2;
    let bits_per_step = usize::BITS - (needed - 1).leading_zeros();
    let mut options: Vec<WalkOption> = (0..k)
        .map(WalkOption::Generator)
        .chain((0..k).map(WalkOption::Inverse))
        .collect();
    options.resize(1 << bits_per_step, WalkOption::Identity);
    Ok(OptionTable {
        bits_per_step,
        options,
    })
}

/// A walk length together with its option table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkConfig {
    steps: u64,
    table: OptionTable,
}

impl WalkConfig {
    pub fn new(generator_count: usize, steps: u64) -> Result<Self, WalkError> {
        Ok(Self {
            steps,
            table: build_option_table(generator_count)?,
        })
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn table(&self) -> &OptionTable {
        &self.table
    }

    pub fn bits_per_step(&self) -> u32 {
        self.table.bits_per_step
    }

    /// S, the number of random bits one walk consumes.
    pub fn total_bits(&self) -> u64 {
        self.steps * u64::from(self.table.bits_per_step)
    }

    /// Resolves every pattern to the group element it multiplies by.
    pub fn actions(
        &self,
        oracle: &dyn GroupOracle,
        generators: &[ElementCode],
    ) -> Result<Vec<ElementCode>, WalkError> {
        if generators.len() * 2 + 2 > self.table.options.len() {
            return Err(GroupError::BadParameter(format!(
                "option table built for fewer than {} generators",
                generators.len()
            ))
            .into());
        }
        self.table
            .options
            .iter()
            .map(|opt| match *opt {
                WalkOption::Generator(i) => Ok(oracle.check(generators[i], "generator")?),
                WalkOption::Inverse(i) => Ok(oracle.invert(generators[i])?),
                WalkOption::Identity => Ok(oracle.identity()),
            })
            .collect()
    }

    /// Walk endpoint for the bit string `z` (S ≤ 64), starting at the
    /// identity. Step `j` reads the `j`-th most significant `c`-bit block.
    pub fn endpoint(
        &self,
        oracle: &dyn GroupOracle,
        actions: &[ElementCode],
        z: u64,
    ) -> Result<ElementCode, WalkError> {
        let s = self.total_bits();
        if s > 64 {
            return Err(WalkError::TooManyBits { bits: s, max: 64 });
        }
        let c = u64::from(self.bits_per_step());
        let mask = (1u64 << c) - 1;
        let mut x = oracle.identity();
        for j in 0..self.steps {
            let shift = c * (self.steps - 1 - j);
            let pattern = (z >> shift) & mask;
            x = oracle.multiply(x, actions[pattern as usize])?;
        }
        Ok(x)
    }
}

/// Exact branch counts γ_g of the walk endpoints over the subgroup H.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaTable {
    counts: BTreeMap<ElementCode, BigUint>,
    total_bits: u64,
    garbage_bits: u64,
}

impl GammaTable {
    /// Wraps raw counts over the subgroup elements (every element of H must
    /// appear, possibly with count zero). The garbage width defaults to S.
    pub fn from_counts(
        counts: BTreeMap<ElementCode, BigUint>,
        total_bits: u64,
    ) -> Result<Self, WalkError> {
        let total: BigUint = counts.values().sum();
        if total != BigUint::one() << total_bits {
            return Err(WalkError::BadCounts {
                total,
                bits: total_bits,
            });
        }
        Ok(Self {
            counts,
            total_bits,
            garbage_bits: total_bits,
        })
    }

    /// Same counts with a different garbage-register width t.
    pub fn with_garbage_bits(mut self, t: u64) -> Self {
        self.garbage_bits = t;
        self
    }

    pub fn counts(&self) -> &BTreeMap<ElementCode, BigUint> {
        &self.counts
    }

    /// γ_g, zero for elements outside the subgroup.
    pub fn count(&self, g: ElementCode) -> BigUint {
        self.counts.get(&g).cloned().unwrap_or_default()
    }

    /// S.
    pub fn total_bits(&self) -> u64 {
        self.total_bits
    }

    /// t, the width of one garbage register.
    pub fn garbage_bits(&self) -> u64 {
        self.garbage_bits
    }

    /// N = 2^S.
    pub fn branches(&self) -> BigUint {
        BigUint::one() << self.total_bits
    }

    /// |H| as enumerated.
    pub fn subgroup_order(&self) -> u64 {
        self.counts.len() as u64
    }

    pub fn sum_of_squares(&self) -> BigUint {
        self.counts.values().map(|c| c * c).sum()
    }

    /// ε_g = γ_g / N − 1/|H| for each g in H.
    pub fn deviations(&self) -> BTreeMap<ElementCode, BigRational> {
        let n = BigInt::from(self.branches());
        let uniform = BigRational::new(BigInt::one(), BigInt::from(self.subgroup_order()));
        self.counts
            .iter()
            .map(|(&g, c)| {
                (
                    g,
                    BigRational::new(BigInt::from(c.clone()), n.clone()) - &uniform,
                )
            })
            .collect()
    }

    /// ε̂ = max_g |ε_g|.
    pub fn max_deviation(&self) -> BigRational {
        // |γ_g |H| − N| / (N |H|)
        let n = BigInt::from(self.branches());
        let order = BigInt::from(self.subgroup_order());
        let worst = self
            .counts
            .values()
            .map(|c| (BigInt::from(c.clone()) * &order - &n).abs())
            .max()
            .unwrap_or_default();
        BigRational::new(worst, n * order)
    }

    /// Smallest γ_g over the subgroup.
    pub fn min_count(&self) -> BigUint {
        self.counts.values().min().cloned().unwrap_or_default()
    }
}

/// Precomputed right-multiplication tables on the subgroup.
struct Dynamics {
    elements: Vec<ElementCode>,
    // (multiplicity, successor index for each element)
    moves: Vec<(u64, Vec<usize>)>,
}

impl Dynamics {
    fn new(
        oracle: &dyn GroupOracle,
        subgroup: &Subgroup,
        actions: &[ElementCode],
    ) -> Result<Self, WalkError> {
        let elements: Vec<ElementCode> = subgroup.iter().collect();
        let index: BTreeMap<ElementCode, usize> =
            elements.iter().enumerate().map(|(i, &g)| (g, i)).collect();
        let mut multiplicity: BTreeMap<ElementCode, u64> = BTreeMap::new();
        for &a in actions {
            *multiplicity.entry(a).or_default() += 1;
        }
        let mut moves = Vec::with_capacity(multiplicity.len());
        for (a, m) in multiplicity {
            let succ = elements
                .iter()
                .map(|&x| Ok(index[&oracle.multiply(x, a)?]))
                .collect::<Result<Vec<_>, GroupError>>()?;
            moves.push((m, succ));
        }
        Ok(Self { elements, moves })
    }

    fn initial(&self, identity: ElementCode) -> Vec<BigUint> {
        self.elements
            .iter()
            .map(|&g| {
                if g == identity {
                    BigUint::one()
                } else {
                    BigUint::zero()
                }
            })
            .collect()
    }

    fn step(&self, current: &[BigUint]) -> Vec<BigUint> {
        let mut next = vec![BigUint::zero(); current.len()];
        for (m, succ) in &self.moves {
            for (i, c) in current.iter().enumerate() {
                if !c.is_zero() {
                    next[succ[i]] += c * *m;
                }
            }
        }
        next
    }

    fn table(&self, counts: &[BigUint], total_bits: u64) -> GammaTable {
        GammaTable {
            counts: self
                .elements
                .iter()
                .copied()
                .zip(counts.iter().cloned())
                .collect(),
            total_bits,
            garbage_bits: total_bits,
        }
    }
}

/// Exact endpoint counts after `steps` steps.
pub fn gamma_exact(
    oracle: &dyn GroupOracle,
    generators: &[ElementCode],
    steps: u64,
    cap: usize,
) -> Result<GammaTable, WalkError> {
    let config = WalkConfig::new(generators.len(), steps)?;
    let subgroup = closure(oracle, generators, cap)?;
    let dynamics = Dynamics::new(oracle, &subgroup, &config.actions(oracle, generators)?)?;
    let mut counts = dynamics.initial(oracle.identity());
    for _ in 0..steps {
        counts = dynamics.step(&counts);
    }
    Ok(dynamics.table(&counts, config.total_bits()))
}

/// Smallest step count whose endpoint distribution has ε̂ < `epsilon`.
pub fn choose_steps(
    oracle: &dyn GroupOracle,
    generators: &[ElementCode],
    epsilon: &BigRational,
    ceiling: u64,
    cap: usize,
) -> Result<(u64, GammaTable), WalkError> {
    if !epsilon.is_positive() {
        return Err(WalkError::NonPositiveEpsilon(epsilon.clone()));
    }
    let config = WalkConfig::new(generators.len(), 0)?;
    let c = u64::from(config.bits_per_step());
    let subgroup = closure(oracle, generators, cap)?;
    let dynamics = Dynamics::new(oracle, &subgroup, &config.actions(oracle, generators)?)?;
    let mut counts = dynamics.initial(oracle.identity());
    let mut best: Option<BigRational> = None;
    for steps in 0..=ceiling {
        if steps > 0 {
            counts = dynamics.step(&counts);
        }
        let table = dynamics.table(&counts, steps * c);
        let dev = table.max_deviation();
        if dev < *epsilon {
            return Ok((steps, table));
        }
        if best.as_ref().is_none_or(|b| dev < *b) {
            best = Some(dev);
        }
    }
    Err(WalkError::NoConvergence {
        ceiling,
        epsilon: Box::new(epsilon.clone()),
        best: Box::new(best.unwrap_or_default()),
    })
}

/// Endpoint frequencies of `trials` seeded pseudo-random walks.
pub fn sample_monte_carlo(
    config: &WalkConfig,
    oracle: &dyn GroupOracle,
    generators: &[ElementCode],
    seed: u64,
    trials: u64,
) -> Result<BTreeMap<ElementCode, u64>, WalkError> {
    let actions = config.actions(oracle, generators)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut freq = BTreeMap::new();
    for _ in 0..trials {
        let mut x = oracle.identity();
        for _ in 0..config.steps() {
            x = oracle.multiply(x, actions[rng.gen_range(0..actions.len())])?;
        }
        *freq.entry(x).or_default() += 1;
    }
    Ok(freq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{ConcreteGroup, GroupKind, DEFAULT_CLOSURE_CAP};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn counts_of(t: &GammaTable) -> Vec<u64> {
        t.counts().values().map(|c| c.try_into().unwrap()).collect()
    }

    // Literal enumeration of every S-bit string.
    fn enumerate(
        g: &dyn GroupOracle,
        gens: &[ElementCode],
        steps: u64,
    ) -> BTreeMap<ElementCode, u64> {
        let config = WalkConfig::new(gens.len(), steps).unwrap();
        let actions = config.actions(g, gens).unwrap();
        let mut out = BTreeMap::new();
        for z in 0..1u64 << config.total_bits() {
            *out.entry(config.endpoint(g, &actions, z).unwrap())
                .or_default() += 1;
        }
        out
    }

    #[test]
    fn option_tables() {
        let t = build_option_table(1).unwrap();
        assert_eq!(t.bits_per_step(), 2);
        assert_eq!(
            t.options(),
            &[
                WalkOption::Generator(0),
                WalkOption::Inverse(0),
                WalkOption::Identity,
                WalkOption::Identity
            ]
        );
        let t = build_option_table(2).unwrap();
        assert_eq!(t.bits_per_step(), 3);
        assert_eq!(t.options().len(), 8);
        assert_eq!(t.identity_patterns(), 4);
        let t = build_option_table(3).unwrap();
        assert_eq!(t.bits_per_step(), 3);
        assert_eq!(t.identity_patterns(), 2);
        assert_eq!(build_option_table(4).unwrap().bits_per_step(), 4);
        assert!(build_option_table(0).is_err());
    }

    #[test]
    fn gamma_small_cases() {
        let z4 = ConcreteGroup::cyclic(4).unwrap();
        let t = gamma_exact(&z4, &[z4.code(2)], 1, DEFAULT_CLOSURE_CAP).unwrap();
        assert_eq!(counts_of(&t), vec![2, 2]);
        assert_eq!(t.branches(), BigUint::from(4u32));
        assert_eq!(t.max_deviation(), rat(0, 1));

        let z3 = ConcreteGroup::cyclic(3).unwrap();
        let t = gamma_exact(&z3, &[z3.code(1)], 1, DEFAULT_CLOSURE_CAP).unwrap();
        assert_eq!(counts_of(&t), vec![2, 1, 1]);
        assert_eq!(t.max_deviation(), rat(1, 6));

        let t = gamma_exact(&z3, &[z3.code(1)], 2, DEFAULT_CLOSURE_CAP).unwrap();
        assert_eq!(counts_of(&t), vec![6, 5, 5]);
        assert_eq!(t.max_deviation(), rat(1, 24));

        let t = gamma_exact(&z3, &[z3.code(1)], 0, DEFAULT_CLOSURE_CAP).unwrap();
        assert_eq!(t.branches(), BigUint::one());
        assert_eq!(t.count(z3.identity()), BigUint::one());
        assert_eq!(t.count(z3.code(1)), BigUint::zero());
    }

    #[test]
    fn dp_matches_literal_enumeration() {
        let groups: Vec<(ConcreteGroup, Vec<&str>)> = vec![
            (ConcreteGroup::cyclic(4).unwrap(), vec!["1"]),
            (ConcreteGroup::cyclic(6).unwrap(), vec!["2", "3"]),
            (ConcreteGroup::symmetric(3).unwrap(), vec!["(12)", "(123)"]),
            (ConcreteGroup::dihedral(4).unwrap(), vec!["r", "s"]),
            (
                ConcreteGroup::dihedral(4).unwrap(),
                vec!["s", "sr^1", "r^2"],
            ),
            (
                ConcreteGroup::product(GroupKind::Cyclic(2), GroupKind::Cyclic(2)).unwrap(),
                vec!["<1, 1>"],
            ),
        ];
        for (g, lits) in &groups {
            let gens: Vec<_> = lits.iter().map(|l| g.parse_element(l).unwrap()).collect();
            for steps in 0..=3 {
                let table = gamma_exact(g, &gens, steps, DEFAULT_CLOSURE_CAP).unwrap();
                assert!(table.subgroup_order() <= 8);
                let literal = enumerate(g, &gens, steps);
                for (x, c) in table.counts() {
                    let want = literal.get(x).copied().unwrap_or(0);
                    assert_eq!(*c, BigUint::from(want), "{} steps {steps}", g.name());
                }
                assert!(literal.keys().all(|x| table.counts().contains_key(x)));
            }
        }
    }

    #[test]
    fn conservation_support_and_zero_sum() {
        let s4 = ConcreteGroup::symmetric(4).unwrap();
        let gens = [
            s4.parse_element("(12)").unwrap(),
            s4.parse_element("(1234)").unwrap(),
        ];
        let h = closure(&s4, &gens, DEFAULT_CLOSURE_CAP).unwrap();
        for steps in 0..12u64 {
            let t = gamma_exact(&s4, &gens, steps, DEFAULT_CLOSURE_CAP).unwrap();
            let total: BigUint = t.counts().values().sum();
            assert_eq!(total, t.branches());
            assert!(t.counts().keys().all(|&x| h.contains(x)));
            let dev_sum: BigRational = t.deviations().values().sum();
            assert_eq!(dev_sum, rat(0, 1));
            if steps as usize >= h.radius() {
                assert!(t.min_count() > BigUint::zero(), "steps {steps}");
            }
        }
    }

    #[test]
    fn choose_steps_examples() {
        let z4 = ConcreteGroup::cyclic(4).unwrap();
        let (steps, t) =
            choose_steps(&z4, &[z4.code(2)], &rat(1, 32), 64, DEFAULT_CLOSURE_CAP).unwrap();
        assert_eq!(steps, 1);
        assert_eq!(t.max_deviation(), rat(0, 1));

        let z3 = ConcreteGroup::cyclic(3).unwrap();
        let (steps, _) =
            choose_steps(&z3, &[z3.code(1)], &rat(1, 5), 64, DEFAULT_CLOSURE_CAP).unwrap();
        assert_eq!(steps, 1);
        let (steps, t) =
            choose_steps(&z3, &[z3.code(1)], &rat(1, 8), 64, DEFAULT_CLOSURE_CAP).unwrap();
        assert_eq!(steps, 2);
        assert_eq!(counts_of(&t), vec![6, 5, 5]);

        // identity generator: already uniform with no steps
        let (steps, t) =
            choose_steps(&z3, &[z3.identity()], &rat(1, 1000), 4, DEFAULT_CLOSURE_CAP).unwrap();
        assert_eq!((steps, t.total_bits()), (0, 0));
    }

    #[test]
    fn choose_steps_errors() {
        let s4 = ConcreteGroup::symmetric(4).unwrap();
        let gens = [s4.parse_element("(1234)").unwrap()];
        let err = choose_steps(&s4, &gens, &rat(1, 1 << 20), 2, DEFAULT_CLOSURE_CAP).unwrap_err();
        assert!(matches!(err, WalkError::NoConvergence { ceiling: 2, .. }));
        assert!(matches!(
            choose_steps(&s4, &gens, &rat(0, 1), 2, DEFAULT_CLOSURE_CAP),
            Err(WalkError::NonPositiveEpsilon(_))
        ));
    }

    #[test]
    fn from_counts_checks_total() {
        let z3 = ConcreteGroup::cyclic(3).unwrap();
        let counts: BTreeMap<_, _> = [(z3.code(0), 2u32), (z3.code(1), 1), (z3.code(2), 2)]
            .into_iter()
            .map(|(g, c)| (g, BigUint::from(c)))
            .collect();
        assert!(matches!(
            GammaTable::from_counts(counts, 2),
            Err(WalkError::BadCounts { .. })
        ));
    }

    #[test]
    fn monte_carlo_basics() {
        let z4 = ConcreteGroup::cyclic(4).unwrap();
        let gens = [z4.code(2)];
        let config = WalkConfig::new(1, 1).unwrap();
        let a = sample_monte_carlo(&config, &z4, &gens, 7, 500).unwrap();
        let b = sample_monte_carlo(&config, &z4, &gens, 7, 500).unwrap();
        assert_eq!(a, b);
        let one = sample_monte_carlo(&config, &z4, &gens, 1, 1).unwrap();
        assert_eq!(one.values().sum::<u64>(), 1);
        let h = closure(&z4, &gens, DEFAULT_CLOSURE_CAP).unwrap();
        assert!(one.keys().all(|&x| h.contains(x)));
    }
}
