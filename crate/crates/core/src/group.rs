//! Black-box group oracles.
//!
//! Group elements are handled only through fixed-width bit strings
//! ([`ElementCode`]) and an oracle implementing multiplication, inversion and
//! the identity. The concrete groups shipped here (cyclic, dihedral,
//! symmetric and direct products) encode each element by an index in
//! `0..order` using the minimal width `ceil(log2(order))`; the identity is
//! always index zero.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Largest closure enumerated before giving up.
pub const DEFAULT_CLOSURE_CAP: usize = 1 << 16;

/// Largest symmetric-group degree accepted (8! = 40320 elements).
pub const MAX_SYMMETRIC_DEGREE: u8 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("invalid {operand} code {code} for group {group}")]
    InvalidCode {
        code: ElementCode,
        operand: &'static str,
        group: String,
    },
    #[error("closure exceeded the cap of {cap} elements")]
    ClosureCap { cap: usize },
    #[error("at least one generator is required")]
    NoGenerators,
    #[error("claimed order {claimed} outside [1, 2^{width}]")]
    OrderOutOfRange { claimed: u64, width: u32 },
    #[error("cannot parse element {text:?} in {group}: {reason}")]
    ElementSyntax {
        text: String,
        group: String,
        reason: String,
    },
    #[error("unknown group {0:?}")]
    UnknownGroup(String),
    #[error("unsupported group parameter: {0}")]
    BadParameter(String),
}

/// Fixed-width bit-string encoding of a group element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementCode {
    bits: u64,
    width: u32,
}

impl ElementCode {
    pub fn new(bits: u64, width: u32) -> Self {
        debug_assert!(width >= 64 || bits >> width == 0);
        Self { bits, width }
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn width(self) -> u32 {
        self.width
    }
}

impl fmt::Display for ElementCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.width == 0 {
            return f.write_str("<empty>");
        }
        write!(f, "{:0w$b}", self.bits, w = self.width as usize)
    }
}

/// Abstract group oracle over n-bit element codes.
///
/// `multiply` and `invert` must reject codes that fail `is_valid`; on valid
/// inputs they must satisfy the group axioms.
pub trait GroupOracle: fmt::Debug + Send + Sync {
    /// Group identifier, in the same syntax accepted by [`parse_group`].
    fn name(&self) -> String;

    /// Encoding width n.
    fn width(&self) -> u32;

    fn is_valid(&self, code: ElementCode) -> bool;

    fn identity(&self) -> ElementCode;

    fn multiply(&self, a: ElementCode, b: ElementCode) -> Result<ElementCode, GroupError>;

    fn invert(&self, a: ElementCode) -> Result<ElementCode, GroupError>;

    /// Order of the whole group, when the oracle knows it.
    fn order(&self) -> Option<u64> {
        None
    }

    /// Renders an element in group-natural notation.
    fn format_element(&self, code: ElementCode) -> String {
        code.to_string()
    }

    /// Parses an element literal. The default accepts a binary string of
    /// exactly `width` digits.
    fn parse_element(&self, text: &str) -> Result<ElementCode, GroupError> {
        let text = text.trim();
        let bad = |reason: &str| GroupError::ElementSyntax {
            text: text.to_string(),
            group: self.name(),
            reason: reason.to_string(),
        };
        if text.len() != self.width() as usize {
            return Err(bad("wrong bit-string length"));
        }
        let bits = u64::from_str_radix(text, 2).map_err(|_| bad("not a binary string"))?;
        let code = ElementCode::new(bits, self.width());
        if !self.is_valid(code) {
            return Err(bad("not an element encoding"));
        }
        Ok(code)
    }

    fn check(&self, code: ElementCode, operand: &'static str) -> Result<ElementCode, GroupError> {
        if self.is_valid(code) {
            Ok(code)
        } else {
            Err(GroupError::InvalidCode {
                code,
                operand,
                group: self.name(),
            })
        }
    }
}

pub fn multiply(
    oracle: &dyn GroupOracle,
    a: ElementCode,
    b: ElementCode,
) -> Result<ElementCode, GroupError> {
    oracle.multiply(a, b)
}

pub fn invert(oracle: &dyn GroupOracle, a: ElementCode) -> Result<ElementCode, GroupError> {
    oracle.invert(a)
}

/// Minimal encoding width for a group of the given order.
pub fn encoding_width(order: u64) -> u32 {
    match order {
        0 | 1 => 0,
        m => 64 - (m - 1).leading_zeros(),
    }
}

// ---------------------------------------------------------------------------
// Concrete groups

/// Structural description of a built-in group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupKind {
    /// Z_m under addition.
    Cyclic(u64),
    /// Symmetries of the m-gon, order 2m.
    Dihedral(u64),
    /// All permutations of k points.
    Symmetric(u8),
    Product(Box<GroupKind>, Box<GroupKind>),
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Cyclic(m) => write!(f, "cyclic({m})"),
            GroupKind::Dihedral(m) => write!(f, "dihedral({m})"),
            GroupKind::Symmetric(k) => write!(f, "symmetric({k})"),
            GroupKind::Product(a, b) => write!(f, "product({a}, {b})"),
        }
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Cyclic(u64),
    // elements s^j r^i stored at index i + m*j
    Dihedral(u64),
    Symmetric(u8),
    // (a, b) stored at index a*|B| + b
    Product(Box<ConcreteGroup>, Box<ConcreteGroup>),
}

/// An exactly enumerable group with index encoding.
#[derive(Debug, Clone)]
pub struct ConcreteGroup {
    kind: GroupKind,
    order: u64,
    width: u32,
    repr: Repr,
}

impl ConcreteGroup {
    pub fn new(kind: GroupKind) -> Result<Self, GroupError> {
        let (order, repr) = match &kind {
            GroupKind::Cyclic(m) => {
                if *m == 0 || *m > 1 << 40 {
                    return Err(GroupError::BadParameter(format!("cyclic order {m}")));
                }
                (*m, Repr::Cyclic(*m))
            }
            GroupKind::Dihedral(m) => {
                if *m < 1 || *m > 1 << 39 {
                    return Err(GroupError::BadParameter(format!("dihedral degree {m}")));
                }
                (2 * m, Repr::Dihedral(*m))
            }
            GroupKind::Symmetric(k) => {
                if *k < 1 || *k > MAX_SYMMETRIC_DEGREE {
                    return Err(GroupError::BadParameter(format!(
                        "symmetric degree {k} (supported: 1..={MAX_SYMMETRIC_DEGREE})"
                    )));
                }
                ((1..=*k as u64).product(), Repr::Symmetric(*k))
            }
            GroupKind::Product(a, b) => {
                let a = ConcreteGroup::new((**a).clone())?;
                let b = ConcreteGroup::new((**b).clone())?;
                let order = a
                    .order
                    .checked_mul(b.order)
                    .filter(|o| *o <= 1 << 40)
                    .ok_or_else(|| GroupError::BadParameter("product too large".into()))?;
                (order, Repr::Product(Box::new(a), Box::new(b)))
            }
        };
        Ok(Self {
            kind,
            order,
            width: encoding_width(order),
            repr,
        })
    }

    pub fn cyclic(m: u64) -> Result<Self, GroupError> {
        Self::new(GroupKind::Cyclic(m))
    }

    pub fn dihedral(m: u64) -> Result<Self, GroupError> {
        Self::new(GroupKind::Dihedral(m))
    }

    pub fn symmetric(k: u8) -> Result<Self, GroupError> {
        Self::new(GroupKind::Symmetric(k))
    }

    pub fn product(a: GroupKind, b: GroupKind) -> Result<Self, GroupError> {
        Self::new(GroupKind::Product(Box::new(a), Box::new(b)))
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn code(&self, index: u64) -> ElementCode {
        debug_assert!(index < self.order);
        ElementCode::new(index, self.width)
    }

    /// Every element, in index order.
    pub fn elements(&self) -> impl Iterator<Item = ElementCode> + '_ {
        (0..self.order).map(|i| self.code(i))
    }

    fn mul_index(&self, a: u64, b: u64) -> u64 {
        match &self.repr {
            Repr::Cyclic(m) => (a + b) % m,
            Repr::Dihedral(m) => {
                let (i, j) = (a % m, a / m);
                let (k, l) = (b % m, b / m);
                // (s^j r^i)(s^l r^k) = s^(j+l) r^((-1)^l i + k)
                let i = if l == 1 { (m - i) % m } else { i };
                (i + k) % m + m * ((j + l) % 2)
            }
            Repr::Symmetric(k) => {
                let p = unrank_permutation(a, *k);
                let q = unrank_permutation(b, *k);
                // left-to-right: x^(pq) = (x^p)^q
                let pq: Vec<u8> = p.iter().map(|&x| q[x as usize]).collect();
                rank_permutation(&pq)
            }
            Repr::Product(ga, gb) => {
                let (a1, a2) = (a / gb.order, a % gb.order);
                let (b1, b2) = (b / gb.order, b % gb.order);
                ga.mul_index(a1, b1) * gb.order + gb.mul_index(a2, b2)
            }
        }
    }

    fn inv_index(&self, a: u64) -> u64 {
        match &self.repr {
            Repr::Cyclic(m) => (m - a) % m,
            Repr::Dihedral(m) => {
                if a < *m {
                    (m - a) % m
                } else {
                    a
                }
            }
            Repr::Symmetric(k) => {
                let p = unrank_permutation(a, *k);
                let mut inv = vec![0u8; p.len()];
                for (x, &y) in p.iter().enumerate() {
                    inv[y as usize] = x as u8;
                }
                rank_permutation(&inv)
            }
            Repr::Product(ga, gb) => {
                let (a1, a2) = (a / gb.order, a % gb.order);
                ga.inv_index(a1) * gb.order + gb.inv_index(a2)
            }
        }
    }

    fn format_index(&self, a: u64) -> String {
        match &self.repr {
            Repr::Cyclic(_) | Repr::Dihedral(_) => a.to_string(),
            Repr::Symmetric(k) => format_cycles(&unrank_permutation(a, *k)),
            Repr::Product(ga, gb) => format!(
                "<{}, {}>",
                ga.format_index(a / gb.order),
                gb.format_index(a % gb.order)
            ),
        }
    }

    fn parse_index(&self, text: &str) -> Result<u64, String> {
        let text = text.trim();
        match &self.repr {
            Repr::Cyclic(m) => {
                let v: i64 = text
                    .parse()
                    .map_err(|_| "expected an integer".to_string())?;
                Ok(v.rem_euclid(*m as i64) as u64)
            }
            Repr::Dihedral(m) => parse_dihedral(text, *m),
            Repr::Symmetric(k) => parse_cycles(text, *k).map(|p| rank_permutation(&p)),
            Repr::Product(ga, gb) => {
                let inner = text
                    .strip_prefix('<')
                    .and_then(|t| t.strip_suffix('>'))
                    .ok_or_else(|| "expected <a, b>".to_string())?;
                let parts = split_top_level(inner, ',');
                if parts.len() != 2 {
                    return Err("expected exactly two components".into());
                }
                Ok(ga.parse_index(parts[0])? * gb.order + gb.parse_index(parts[1])?)
            }
        }
    }
}

impl GroupOracle for ConcreteGroup {
    fn name(&self) -> String {
        self.kind.to_string()
    }

    fn width(&self) -> u32 {
        self.width
    }

    fn is_valid(&self, code: ElementCode) -> bool {
        code.width == self.width && code.bits < self.order
    }

    fn identity(&self) -> ElementCode {
        self.code(0)
    }

    fn multiply(&self, a: ElementCode, b: ElementCode) -> Result<ElementCode, GroupError> {
        let a = self.check(a, "left")?;
        let b = self.check(b, "right")?;
        Ok(self.code(self.mul_index(a.bits, b.bits)))
    }

    fn invert(&self, a: ElementCode) -> Result<ElementCode, GroupError> {
        let a = self.check(a, "inverted")?;
        Ok(self.code(self.inv_index(a.bits)))
    }

    fn order(&self) -> Option<u64> {
        Some(self.order)
    }

    fn format_element(&self, code: ElementCode) -> String {
        if self.is_valid(code) {
            self.format_index(code.bits)
        } else {
            format!("?{code}")
        }
    }

    fn parse_element(&self, text: &str) -> Result<ElementCode, GroupError> {
        self.parse_index(text)
            .map(|i| self.code(i))
            .map_err(|reason| GroupError::ElementSyntax {
                text: text.trim().to_string(),
                group: self.name(),
                reason,
            })
    }
}

/// Parses `cyclic(m)`, `dihedral(m)`, `symmetric(k)` or `product(G, H)`.
pub fn parse_group(text: &str) -> Result<GroupKind, GroupError> {
    let text = text.trim();
    let unknown = || GroupError::UnknownGroup(text.to_string());
    let open = text.find('(').ok_or_else(unknown)?;
    let args = text[open + 1..].strip_suffix(')').ok_or_else(unknown)?;
    let head = text[..open].trim().to_ascii_lowercase();
    let int_arg = || -> Result<u64, GroupError> {
        args.trim()
            .parse()
            .map_err(|_| GroupError::BadParameter(format!("{head}: {args:?} is not an integer")))
    };
    match head.as_str() {
        "cyclic" | "z" => Ok(GroupKind::Cyclic(int_arg()?)),
        "dihedral" | "d" => Ok(GroupKind::Dihedral(int_arg()?)),
        "symmetric" | "s" => {
            let k = int_arg()?;
            u8::try_from(k)
                .map(GroupKind::Symmetric)
                .map_err(|_| GroupError::BadParameter(format!("symmetric degree {k}")))
        }
        "product" => {
            let parts = split_top_level(args, ',');
            if parts.len() < 2 {
                return Err(GroupError::BadParameter(
                    "product needs at least two factors".into(),
                ));
            }
            let mut factors = parts.into_iter().map(parse_group);
            let first = factors.next().unwrap()?;
            factors.try_fold(first, |acc, next| {
                Ok(GroupKind::Product(Box::new(acc), Box::new(next?)))
            })
        }
        _ => Err(unknown()),
    }
}

/// Splits on `sep` outside any (), [] or <> nesting.
pub(crate) fn split_top_level(text: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' | '[' | '<' => depth += 1,
            ')' | ']' | '>' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(text[start..i].trim());
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(text[start..].trim());
    parts
}

fn parse_dihedral(text: &str, m: u64) -> Result<u64, String> {
    if let Ok(v) = text.parse::<u64>() {
        return if v < 2 * m {
            Ok(v)
        } else {
            Err(format!("index {v} out of range 0..{}", 2 * m))
        };
    }
    // r^i, s, sr^i
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let (reflect, rest) = match compact.strip_prefix('s') {
        Some(rest) => (1, rest),
        None => (0, compact.as_str()),
    };
    let rot = match rest {
        "" | "e" => 0,
        "r" => 1,
        r => r
            .strip_prefix("r^")
            .and_then(|e| e.parse::<i64>().ok())
            .map(|e| e.rem_euclid(m as i64) as u64)
            .ok_or_else(|| "expected an index or r^i / s r^i".to_string())?,
    };
    Ok(rot % m + m * reflect)
}

// ---------------------------------------------------------------------------
// Permutations, ranked lexicographically by image array (0-based points).

fn factorial(n: u8) -> u64 {
    (1..=n as u64).product()
}

pub(crate) fn rank_permutation(perm: &[u8]) -> u64 {
    let n = perm.len() as u8;
    let mut rank = 0;
    for (i, &x) in perm.iter().enumerate() {
        let smaller_later = perm[i + 1..].iter().filter(|&&y| y < x).count() as u64;
        rank += smaller_later * factorial(n - 1 - i as u8);
    }
    rank
}

pub(crate) fn unrank_permutation(mut rank: u64, n: u8) -> Vec<u8> {
    let mut pool: Vec<u8> = (0..n).collect();
    let mut perm = Vec::with_capacity(n as usize);
    for i in (0..n).rev() {
        let f = factorial(i);
        perm.push(pool.remove((rank / f) as usize));
        rank %= f;
    }
    perm
}

fn format_cycles(perm: &[u8]) -> String {
    let mut seen = vec![false; perm.len()];
    let mut out = String::new();
    let spaced = perm.len() > 9;
    for start in 0..perm.len() {
        if seen[start] || perm[start] as usize == start {
            continue;
        }
        out.push('(');
        let mut x = start;
        let mut first = true;
        while !seen[x] {
            seen[x] = true;
            if !first && spaced {
                out.push(' ');
            }
            out.push_str(&(x + 1).to_string());
            first = false;
            x = perm[x] as usize;
        }
        out.push(')');
    }
    if out.is_empty() {
        out.push_str("()");
    }
    out
}

fn parse_cycles(text: &str, degree: u8) -> Result<Vec<u8>, String> {
    let mut perm: Vec<u8> = (0..degree).collect();
    let text = text.trim();
    if text == "e" || text == "id" {
        return Ok(perm);
    }
    let mut rest = text;
    // cycles compose left to right
    while !rest.is_empty() {
        let inner_end = rest.find(')').ok_or("unclosed cycle")?;
        let inner = rest
            .strip_prefix('(')
            .ok_or("expected '('")?
            .get(..inner_end - 1)
            .ok_or("malformed cycle")?;
        rest = rest[inner_end + 1..].trim_start();
        let points: Vec<u8> = if inner.contains([' ', ',']) || degree > 9 {
            inner
                .split([' ', ','])
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<u8>().map_err(|_| format!("bad point {s:?}")))
                .collect::<Result<_, _>>()?
        } else {
            inner
                .chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as u8)
                        .ok_or_else(|| format!("bad point {c:?}"))
                })
                .collect::<Result<_, _>>()?
        };
        let mut uniq = points.clone();
        uniq.sort_unstable();
        uniq.dedup();
        if uniq.len() != points.len() {
            return Err("repeated point in cycle".into());
        }
        if let Some(p) = points.iter().find(|&&p| p == 0 || p > degree) {
            return Err(format!("point {p} outside 1..={degree}"));
        }
        let mut cycle = vec![0u8; degree as usize];
        for (x, c) in cycle.iter_mut().enumerate() {
            *c = x as u8;
        }
        for (i, &p) in points.iter().enumerate() {
            let next = points[(i + 1) % points.len()];
            cycle[p as usize - 1] = next - 1;
        }
        perm = perm.iter().map(|&x| cycle[x as usize]).collect();
    }
    Ok(perm)
}

// ---------------------------------------------------------------------------
// Closure and problem instances

/// A subgroup enumerated by breadth-first closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    elements: BTreeSet<ElementCode>,
    /// BFS depth of the Cayley graph from the identity, over generators and
    /// their inverses.
    radius: usize,
}

impl Subgroup {
    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn contains(&self, code: ElementCode) -> bool {
        self.elements.contains(&code)
    }

    pub fn iter(&self) -> impl Iterator<Item = ElementCode> + '_ {
        self.elements.iter().copied()
    }

    pub fn elements(&self) -> &BTreeSet<ElementCode> {
        &self.elements
    }

    pub fn radius(&self) -> usize {
        self.radius
    }
}

/// The subgroup generated by `generators`, by BFS from the identity.
pub fn closure(
    oracle: &dyn GroupOracle,
    generators: &[ElementCode],
    cap: usize,
) -> Result<Subgroup, GroupError> {
    if generators.is_empty() {
        return Err(GroupError::NoGenerators);
    }
    let mut steps = Vec::with_capacity(2 * generators.len());
    for &g in generators {
        steps.push(oracle.check(g, "generator")?);
    }
    for &g in generators {
        steps.push(oracle.invert(g)?);
    }
    let identity = oracle.identity();
    let mut elements = BTreeSet::from([identity]);
    let mut frontier = VecDeque::from([(identity, 0usize)]);
    let mut radius = 0;
    while let Some((x, depth)) = frontier.pop_front() {
        radius = radius.max(depth);
        for &s in &steps {
            let y = oracle.multiply(x, s)?;
            if elements.insert(y) {
                if elements.len() > cap {
                    return Err(GroupError::ClosureCap { cap });
                }
                frontier.push_back((y, depth + 1));
            }
        }
    }
    Ok(Subgroup { elements, radius })
}

/// How ε is chosen for an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EpsilonPolicy {
    /// ε = 2^-(n+3).
    Default,
    Explicit(BigRational),
}

impl EpsilonPolicy {
    pub fn resolve(&self, width: u32) -> BigRational {
        match self {
            EpsilonPolicy::Default => {
                BigRational::new(BigInt::one(), BigInt::one() << (width as usize + 3))
            }
            EpsilonPolicy::Explicit(eps) => eps.clone(),
        }
    }
}

/// Input of the modified non-membership problem: generators, target, and
/// the claimed order of the generated subgroup.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    oracle: Arc<dyn GroupOracle>,
    generators: Vec<ElementCode>,
    target: ElementCode,
    claimed_order: u64,
    epsilon: EpsilonPolicy,
}

impl ProblemInstance {
    pub fn new(
        oracle: Arc<dyn GroupOracle>,
        generators: Vec<ElementCode>,
        target: ElementCode,
        claimed_order: u64,
        epsilon: EpsilonPolicy,
    ) -> Result<Self, GroupError> {
        if generators.is_empty() {
            return Err(GroupError::NoGenerators);
        }
        for &g in &generators {
            oracle.check(g, "generator")?;
        }
        oracle.check(target, "target")?;
        let width = oracle.width();
        let max = if width >= 64 { u64::MAX } else { 1u64 << width };
        if claimed_order == 0 || claimed_order > max {
            return Err(GroupError::OrderOutOfRange {
                claimed: claimed_order,
                width,
            });
        }
        if let EpsilonPolicy::Explicit(eps) = &epsilon {
            if *eps <= BigRational::zero() {
                return Err(GroupError::BadParameter(format!(
                    "epsilon {eps} must be positive"
                )));
            }
        }
        Ok(Self {
            oracle,
            generators,
            target,
            claimed_order,
            epsilon,
        })
    }

    pub fn oracle(&self) -> &dyn GroupOracle {
        self.oracle.as_ref()
    }

    pub fn shared_oracle(&self) -> Arc<dyn GroupOracle> {
        Arc::clone(&self.oracle)
    }

    pub fn generators(&self) -> &[ElementCode] {
        &self.generators
    }

    pub fn target(&self) -> ElementCode {
        self.target
    }

    pub fn claimed_order(&self) -> u64 {
        self.claimed_order
    }

    pub fn epsilon_policy(&self) -> &EpsilonPolicy {
        &self.epsilon
    }

    /// The ε in force for this instance.
    pub fn epsilon(&self) -> BigRational {
        self.epsilon.resolve(self.oracle.width())
    }

    /// Same instance with a different claimed order.
    pub fn with_claimed_order(&self, claimed_order: u64) -> Result<Self, GroupError> {
        Self::new(
            Arc::clone(&self.oracle),
            self.generators.clone(),
            self.target,
            claimed_order,
            self.epsilon.clone(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValidationMode {
    /// Take the claimed order as given.
    #[default]
    Trust,
    /// Enumerate the closure and compare against ground truth.
    Check,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationResult {
    pub mode: ValidationMode,
    pub true_order: Option<u64>,
    pub order_matches: Option<bool>,
    pub target_member: Option<bool>,
}

pub fn validate_instance(
    instance: &ProblemInstance,
    mode: ValidationMode,
    cap: usize,
) -> Result<ValidationResult, GroupError> {
    let oracle = instance.oracle();
    for &g in instance.generators() {
        oracle.check(g, "generator")?;
    }
    oracle.check(instance.target(), "target")?;
    match mode {
        ValidationMode::Trust => Ok(ValidationResult {
            mode,
            true_order: None,
            order_matches: None,
            target_member: None,
        }),
        ValidationMode::Check => {
            let h = closure(oracle, instance.generators(), cap)?;
            Ok(ValidationResult {
                mode,
                true_order: Some(h.order()),
                order_matches: Some(h.order() == instance.claimed_order()),
                target_member: Some(h.contains(instance.target())),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_codes(g: &ConcreteGroup) -> Vec<ElementCode> {
        g.elements().collect()
    }

    #[test]
    fn cyclic_arithmetic() {
        let z4 = ConcreteGroup::cyclic(4).unwrap();
        assert_eq!(z4.width(), 2);
        assert_eq!(z4.multiply(z4.code(2), z4.code(2)).unwrap(), z4.code(0));
        assert_eq!(z4.invert(z4.code(1)).unwrap(), z4.code(3));
        assert_eq!(z4.invert(z4.identity()).unwrap(), z4.identity());
    }

    #[test]
    fn symmetric_named_elements() {
        let s3 = ConcreteGroup::symmetric(3).unwrap();
        let t = s3.parse_element("(12)").unwrap();
        assert_eq!(s3.multiply(t, t).unwrap(), s3.identity());
        let c = s3.parse_element("(123)").unwrap();
        // brute-force search for the inverse
        let inv = all_codes(&s3)
            .into_iter()
            .find(|&x| s3.multiply(c, x).unwrap() == s3.identity())
            .unwrap();
        assert_eq!(s3.format_element(inv), "(132)");
        assert_eq!(s3.invert(c).unwrap(), inv);
    }

    #[test]
    fn rejects_invalid_codes() {
        let z3 = ConcreteGroup::cyclic(3).unwrap();
        let bogus = ElementCode::new(3, 2);
        let err = z3.multiply(z3.identity(), bogus).unwrap_err();
        assert!(matches!(
            err,
            GroupError::InvalidCode {
                operand: "right",
                ..
            }
        ));
        assert!(z3.invert(ElementCode::new(1, 3)).is_err());
    }

    #[test]
    fn group_axioms_exhaustive() {
        let groups = [
            ConcreteGroup::cyclic(6).unwrap(),
            ConcreteGroup::dihedral(4).unwrap(),
            ConcreteGroup::dihedral(5).unwrap(),
            ConcreteGroup::symmetric(3).unwrap(),
            ConcreteGroup::symmetric(4).unwrap(),
            ConcreteGroup::product(GroupKind::Cyclic(2), GroupKind::Cyclic(2)).unwrap(),
            ConcreteGroup::product(GroupKind::Symmetric(3), GroupKind::Cyclic(3)).unwrap(),
        ];
        for g in &groups {
            let els = all_codes(g);
            assert!(els.len() <= 64);
            let e = g.identity();
            for &a in &els {
                assert_eq!(g.multiply(e, a).unwrap(), a);
                assert_eq!(g.multiply(a, e).unwrap(), a);
                let ai = g.invert(a).unwrap();
                assert_eq!(g.multiply(a, ai).unwrap(), e);
                assert_eq!(g.multiply(ai, a).unwrap(), e);
                assert_eq!(g.invert(ai).unwrap(), a);
                for &b in &els {
                    let ab = g.multiply(a, b).unwrap();
                    assert!(g.is_valid(ab));
                    for &c in &els {
                        assert_eq!(
                            g.multiply(ab, c).unwrap(),
                            g.multiply(a, g.multiply(b, c).unwrap()).unwrap(),
                            "{} not associative",
                            g.name()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn dihedral_relations() {
        let d4 = ConcreteGroup::dihedral(4).unwrap();
        let r = d4.parse_element("r").unwrap();
        let s = d4.parse_element("s").unwrap();
        assert_eq!(d4.order(), Some(8));
        // s r s = r^-1
        let srs = d4.multiply(d4.multiply(s, r).unwrap(), s).unwrap();
        assert_eq!(srs, d4.invert(r).unwrap());
        assert_eq!(
            d4.parse_element("3").unwrap(),
            d4.parse_element("r^3").unwrap()
        );
        assert_eq!(d4.parse_element("s r^2").unwrap(), d4.code(6));
    }

    #[test]
    fn closure_examples() {
        let z4 = ConcreteGroup::cyclic(4).unwrap();
        let h = closure(&z4, &[z4.code(2)], DEFAULT_CLOSURE_CAP).unwrap();
        assert_eq!(h.iter().collect::<Vec<_>>(), vec![z4.code(0), z4.code(2)]);

        let s3 = ConcreteGroup::symmetric(3).unwrap();
        let gens = [
            s3.parse_element("(12)").unwrap(),
            s3.parse_element("(123)").unwrap(),
        ];
        assert_eq!(closure(&s3, &gens, DEFAULT_CLOSURE_CAP).unwrap().order(), 6);
        let trivial = closure(&s3, &[s3.identity()], DEFAULT_CLOSURE_CAP).unwrap();
        assert_eq!(trivial.order(), 1);
        assert_eq!(trivial.radius(), 0);

        assert_eq!(closure(&s3, &[], 10).unwrap_err(), GroupError::NoGenerators);
        assert_eq!(
            closure(&s3, &gens, 4).unwrap_err(),
            GroupError::ClosureCap { cap: 4 }
        );
    }

    #[test]
    fn closure_is_a_subgroup_dividing_the_order() {
        let s4 = ConcreteGroup::symmetric(4).unwrap();
        let els = all_codes(&s4);
        for &a in &els {
            for &b in els.iter().step_by(5) {
                let h = closure(&s4, &[a, b], DEFAULT_CLOSURE_CAP).unwrap();
                assert!(h.contains(s4.identity()));
                assert_eq!(24 % h.order(), 0);
                for x in h.iter() {
                    assert!(h.contains(s4.invert(x).unwrap()));
                    for y in h.iter() {
                        assert!(h.contains(s4.multiply(x, y).unwrap()));
                    }
                }
            }
        }
    }

    #[test]
    fn validation_modes() {
        let z4: Arc<dyn GroupOracle> = Arc::new(ConcreteGroup::cyclic(4).unwrap());
        let two = ElementCode::new(2, 2);
        let one = ElementCode::new(1, 2);
        let inst =
            ProblemInstance::new(z4.clone(), vec![two], one, 2, EpsilonPolicy::Default).unwrap();
        let v = validate_instance(&inst, ValidationMode::Check, DEFAULT_CLOSURE_CAP).unwrap();
        assert_eq!(v.order_matches, Some(true));
        assert_eq!(v.target_member, Some(false));

        let wrong = inst.with_claimed_order(4).unwrap();
        let v = validate_instance(&wrong, ValidationMode::Check, DEFAULT_CLOSURE_CAP).unwrap();
        assert_eq!(v.order_matches, Some(false));
        let v = validate_instance(&wrong, ValidationMode::Trust, DEFAULT_CLOSURE_CAP).unwrap();
        assert_eq!(v.order_matches, None);

        let s3: Arc<dyn GroupOracle> = Arc::new(ConcreteGroup::symmetric(3).unwrap());
        let c = s3.parse_element("(123)").unwrap();
        let t = s3.parse_element("(12)").unwrap();
        let inst = ProblemInstance::new(s3, vec![c], t, 3, EpsilonPolicy::Default).unwrap();
        let v = validate_instance(&inst, ValidationMode::Check, DEFAULT_CLOSURE_CAP).unwrap();
        assert_eq!(v.true_order, Some(3));
        assert_eq!(v.target_member, Some(false));
    }

    #[test]
    fn instance_rejects_bad_input() {
        let z4: Arc<dyn GroupOracle> = Arc::new(ConcreteGroup::cyclic(4).unwrap());
        let one = ElementCode::new(1, 2);
        assert_eq!(
            ProblemInstance::new(z4.clone(), vec![], one, 2, EpsilonPolicy::Default).unwrap_err(),
            GroupError::NoGenerators
        );
        assert!(matches!(
            ProblemInstance::new(z4.clone(), vec![one], one, 0, EpsilonPolicy::Default),
            Err(GroupError::OrderOutOfRange { .. })
        ));
        assert!(matches!(
            ProblemInstance::new(z4.clone(), vec![one], one, 5, EpsilonPolicy::Default),
            Err(GroupError::OrderOutOfRange { .. })
        ));
        assert!(ProblemInstance::new(
            z4,
            vec![ElementCode::new(1, 3)],
            one,
            2,
            EpsilonPolicy::Default
        )
        .is_err());
    }

    #[test]
    fn default_epsilon() {
        let eps = EpsilonPolicy::Default.resolve(2);
        assert_eq!(eps, BigRational::new(1.into(), 32.into()));
    }

    #[test]
    fn group_and_element_syntax_round_trip() {
        for text in [
            "cyclic(4)",
            "dihedral(4)",
            "symmetric(3)",
            "product(cyclic(2), cyclic(2))",
            "product(symmetric(3), dihedral(3))",
        ] {
            let kind = parse_group(text).unwrap();
            assert_eq!(kind.to_string(), text);
            let g = ConcreteGroup::new(kind).unwrap();
            for x in g.elements() {
                assert_eq!(g.parse_element(&g.format_element(x)).unwrap(), x);
            }
        }
        assert!(matches!(
            parse_group("klein(4)"),
            Err(GroupError::UnknownGroup(_))
        ));
        assert!(parse_group("symmetric(12)").is_ok());
        assert!(ConcreteGroup::new(parse_group("symmetric(12)").unwrap()).is_err());
    }

    #[test]
    fn cycle_notation_variants() {
        let s4 = ConcreteGroup::symmetric(4).unwrap();
        let a = s4.parse_element("(1 2 3)").unwrap();
        assert_eq!(a, s4.parse_element("(123)").unwrap());
        assert_eq!(a, s4.parse_element("(2,3,1)").unwrap());
        assert_eq!(s4.parse_element("()").unwrap(), s4.identity());
        // (12)(23) applied left to right sends 1->2->3
        let p = s4.parse_element("(12)(23)").unwrap();
        assert_eq!(s4.format_element(p), "(132)");
        assert!(s4.parse_element("(15)").is_err());
        assert!(s4.parse_element("(11)").is_err());
    }

    #[test]
    fn widths() {
        assert_eq!(encoding_width(1), 0);
        assert_eq!(encoding_width(2), 1);
        assert_eq!(encoding_width(6), 3);
        assert_eq!(encoding_width(8), 3);
        assert_eq!(encoding_width(24), 5);
    }
}
