//! Non-negative dyadic rationals `numerator / 2^exponent`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Exact value `numerator / 2^exponent`, kept canonical: either the numerator
/// is odd or the exponent is zero (zero is `0 / 2^0`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DyadicRepr", into = "DyadicRepr")]
pub struct Dyadic {
    numerator: BigUint,
    exponent: u64,
}

impl Dyadic {
    pub fn new(numerator: BigUint, exponent: u64) -> Self {
        if numerator.is_zero() {
            return Self::zero();
        }
        let shift = numerator.trailing_zeros().unwrap_or(0).min(exponent);
        Self {
            numerator: numerator >> shift,
            exponent: exponent - shift,
        }
    }

    pub fn zero() -> Self {
        Self {
            numerator: BigUint::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Self::from_integer(BigUint::one())
    }

    pub fn from_integer(n: BigUint) -> Self {
        Self::new(n, 0)
    }

    /// `2^-k`.
    pub fn pow2_inv(k: u64) -> Self {
        Self::new(BigUint::one(), k)
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn denominator(&self) -> BigUint {
        BigUint::one() << self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// `self - rhs`, or `None` when the result would be negative.
    pub fn checked_sub(&self, rhs: &Dyadic) -> Option<Dyadic> {
        let e = self.exponent.max(rhs.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &rhs.numerator << (e - rhs.exponent);
        (a >= b).then(|| Dyadic::new(a - b, e))
    }

    /// Multiplies by `2^-k`.
    pub fn shr(&self, k: u64) -> Dyadic {
        Dyadic::new(self.numerator.clone(), self.exponent + k)
    }

    /// Numerator rescaled to the given exponent, if that is exact.
    pub fn numerator_at(&self, exponent: u64) -> Option<BigUint> {
        (exponent >= self.exponent).then(|| &self.numerator << (exponent - self.exponent))
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.numerator.clone()),
            BigInt::from(self.denominator()),
        )
    }

    /// Exact conversion from a rational whose reduced denominator is a power
    /// of two.
    pub fn from_rational(r: &BigRational) -> Option<Dyadic> {
        if r.numer().sign() == num_bigint::Sign::Minus {
            return None;
        }
        let den = r.denom().magnitude();
        let k = den.trailing_zeros().unwrap_or(0);
        if *den != BigUint::one() << k {
            return None;
        }
        Some(Dyadic::new(r.numer().magnitude().clone(), k))
    }

    /// Lossy decimal value for display.
    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.to_rational())
    }
}

/// Lossy conversion of an exact rational, robust to very large terms.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000) as usize;
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

impl Default for Dyadic {
    fn default() -> Self {
        Self::zero()
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &other.numerator << (e - other.exponent);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &Dyadic) -> Dyadic {
        let e = self.exponent.max(rhs.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &rhs.numerator << (e - rhs.exponent);
        Dyadic::new(a + b, e)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;

    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(
            &self.numerator * &rhs.numerator,
            self.exponent + rhs.exponent,
        )
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;

    fn mul(self, rhs: Dyadic) -> Dyadic {
        &self * &rhs
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, self.denominator())
        }
    }
}

/// Serialized form: decimal-integer strings.
#[derive(Serialize, Deserialize)]
struct DyadicRepr {
    numerator: String,
    exponent: u64,
}

impl From<Dyadic> for DyadicRepr {
    fn from(d: Dyadic) -> Self {
        Self {
            numerator: d.numerator.to_str_radix(10),
            exponent: d.exponent,
        }
    }
}

impl TryFrom<DyadicRepr> for Dyadic {
    type Error = String;

    fn try_from(r: DyadicRepr) -> Result<Self, String> {
        let n: BigUint = r
            .numerator
            .parse()
            .map_err(|e| format!("bad dyadic numerator {:?}: {e}", r.numerator))?;
        let d = Dyadic::new(n, r.exponent);
        if d.exponent != r.exponent {
            return Err(format!(
                "dyadic {}/2^{} is not canonical",
                r.numerator, r.exponent
            ));
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(n: u64, e: u64) -> Dyadic {
        Dyadic::new(BigUint::from(n), e)
    }

    #[test]
    fn canonical_form() {
        assert_eq!(d(64, 8), d(1, 2));
        assert_eq!(d(64, 8).exponent(), 2);
        assert_eq!(d(0, 9), Dyadic::zero());
        assert_eq!(d(0, 9).exponent(), 0);
        assert_eq!(d(12, 0).numerator(), &BigUint::from(12u32));
        assert_eq!(d(3, 4).to_string(), "3/16");
    }

    #[test]
    fn arithmetic() {
        assert_eq!(&d(1, 2) + &d(1, 2), d(1, 1));
        assert_eq!(&d(3, 4) * &d(1, 2), d(3, 6));
        assert_eq!(d(1, 2).checked_sub(&d(1, 4)), Some(d(3, 4)));
        assert_eq!(d(1, 4).checked_sub(&d(1, 2)), None);
        assert!(d(3, 4) < d(1, 2));
        assert_eq!(d(3, 4).numerator_at(12), Some(BigUint::from(768u32)));
        assert_eq!(d(3, 4).numerator_at(3), None);
    }

    #[test]
    fn rational_conversion() {
        let r = BigRational::new(9.into(), 64.into());
        assert_eq!(Dyadic::from_rational(&r), Some(d(9, 6)));
        assert_eq!(
            Dyadic::from_rational(&BigRational::new(1.into(), 3.into())),
            None
        );
        assert_eq!(
            Dyadic::from_rational(&BigRational::new((-1).into(), 2.into())),
            None
        );
    }

    #[test]
    fn serde_rejects_non_canonical() {
        let ok: Dyadic = serde_json::from_str(r#"{"numerator":"3","exponent":4}"#).unwrap();
        assert_eq!(ok, d(3, 4));
        assert!(serde_json::from_str::<Dyadic>(r#"{"numerator":"6","exponent":5}"#).is_err());
    }

    proptest! {
        #[test]
        fn matches_rational_arithmetic(a in 0u64..1 << 40, ea in 0u64..80, b in 0u64..1 << 40, eb in 0u64..80) {
            let (x, y) = (d(a, ea), d(b, eb));
            prop_assert_eq!((&x + &y).to_rational(), x.to_rational() + y.to_rational());
            prop_assert_eq!((&x * &y).to_rational(), x.to_rational() * y.to_rational());
            prop_assert_eq!(x.cmp(&y), x.to_rational().cmp(&y.to_rational()));
            if let Some(diff) = x.checked_sub(&y) {
                prop_assert_eq!(diff.to_rational(), x.to_rational() - y.to_rational());
            } else {
                prop_assert!(x < y);
            }
            let s = &x + &y;
            prop_assert!(s.numerator().bit(0) || s.exponent() == 0);
            let json = serde_json::to_string(&x).unwrap();
            prop_assert_eq!(serde_json::from_str::<Dyadic>(&json).unwrap(), x);
        }
    }
}
