//! Exact values of the form `sign * sqrt(p/q)`.
//!
//! Every Clebsch-Gordan coefficient of two equal spins is plus or minus the
//! square root of a rational number, so this single shape is closed under the
//! products and (commensurable) sums the coupling algebra produces. The
//! radicand is kept in lowest terms with a positive denominator; perfect
//! squares are *not* extracted, which makes the `(sign, p, q)` triple a
//! canonical form: two values are equal iff their fields are equal.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exact real number `sign * sqrt(radicand)` with a rational radicand.
///
/// Invariants: `radicand >= 0` in lowest terms, and `sign == 0` exactly when
/// `radicand == 0` (the canonical zero is `(0, 0/1)`).
#[derive(Clone, PartialEq, Eq)]
pub struct SignedSqrtRational {
    sign: i8,
    radicand: BigRational,
}

fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let root = n.sqrt();
    (&root * &root == *n).then_some(root)
}

impl SignedSqrtRational {
    pub fn zero() -> Self {
        SignedSqrtRational { sign: 0, radicand: BigRational::zero() }
    }

    pub fn one() -> Self {
        SignedSqrtRational { sign: 1, radicand: BigRational::one() }
    }

    /// Canonicalizes `sign * sqrt(num/den)`. The radicand `num/den` must be
    /// non-negative with `den` non-zero; `sign` must be 0 exactly when `num` is.
    pub fn new(sign: i32, num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Parse("zero denominator in radicand".into()));
        }
        let radicand = BigRational::new(num, den);
        if radicand.is_negative() {
            return Err(Error::Parse(format!("negative radicand {radicand}")));
        }
        if radicand.is_zero() {
            return Ok(Self::zero());
        }
        let sign = match sign {
            1 => 1,
            -1 => -1,
            _ => return Err(Error::Parse(format!("sign {sign} must be +1 or -1 for a non-zero value"))),
        };
        Ok(SignedSqrtRational { sign, radicand })
    }

    /// `+sqrt(r)` for a non-negative rational `r`. Panics on a negative radicand,
    /// which never arises from the coupling formulas this crate evaluates.
    pub fn sqrt_of(radicand: BigRational) -> Self {
        assert!(!radicand.is_negative(), "radicand must be non-negative");
        if radicand.is_zero() {
            Self::zero()
        } else {
            SignedSqrtRational { sign: 1, radicand }
        }
    }

    /// Convenience constructor for `+sqrt(num/den)` from machine integers.
    pub fn sqrt_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let r = BigRational::new(BigInt::from(num), BigInt::from(den));
        Self::sqrt_of(r)
    }

    /// Embeds the rational value `r` itself (not its square root).
    pub fn from_rational(r: BigRational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        let sign = if r.is_negative() { -1 } else { 1 };
        SignedSqrtRational { sign, radicand: &r * &r }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn sign(&self) -> i32 {
        self.sign as i32
    }

    pub fn radicand(&self) -> &BigRational {
        &self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn is_positive(&self) -> bool {
        self.sign > 0
    }

    pub fn is_negative(&self) -> bool {
        self.sign < 0
    }

    pub fn abs(&self) -> Self {
        if self.sign == 0 {
            Self::zero()
        } else {
            SignedSqrtRational { sign: 1, radicand: self.radicand.clone() }
        }
    }

    pub fn negate(&self) -> Self {
        SignedSqrtRational { sign: -self.sign, radicand: self.radicand.clone() }
    }

    /// Exact product; always representable.
    pub fn mul(&self, other: &Self) -> Self {
        let sign = self.sign * other.sign;
        if sign == 0 {
            return Self::zero();
        }
        SignedSqrtRational { sign, radicand: &self.radicand * &other.radicand }
    }

    /// Exact sum. Defined only when one operand is zero or the radicand
    /// quotient is the square of a rational; otherwise the value would leave
    /// the `sign * sqrt(p/q)` field and `IncommensurableRadicals` is returned.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        // self = s1*sqrt(r1), other = s2*sqrt(r2) with r1/r2 = c^2:
        // self + other = (s1*c + s2) * sqrt(r2).
        let quotient = &self.radicand / &other.radicand;
        let (num_root, den_root) = match (exact_sqrt(quotient.numer()), exact_sqrt(quotient.denom())) {
            (Some(n), Some(d)) => (n, d),
            _ => {
                return Err(Error::IncommensurableRadicals {
                    left: self.radicand.clone(),
                    right: other.radicand.clone(),
                })
            }
        };
        let c = BigRational::new(num_root, den_root);
        let mut t = c * BigRational::from_integer(BigInt::from(self.sign));
        t += BigRational::from_integer(BigInt::from(other.sign));
        if t.is_zero() {
            return Ok(Self::zero());
        }
        let sign = if t.is_negative() { -1 } else { 1 };
        Ok(SignedSqrtRational { sign, radicand: &t * &t * &other.radicand })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.negate())
    }

    /// The exact square, i.e. the radicand (the sign squares away).
    pub fn square(&self) -> BigRational {
        if self.sign == 0 {
            BigRational::zero()
        } else {
            self.radicand.clone()
        }
    }

    /// If the radicand is a perfect rational square, the value itself as a rational.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.sign == 0 {
            return Some(BigRational::zero());
        }
        let num_root = exact_sqrt(self.radicand.numer())?;
        let den_root = exact_sqrt(self.radicand.denom())?;
        let mag = BigRational::new(num_root, den_root);
        Some(if self.sign < 0 { -mag } else { mag })
    }

    /// Nearest floating-point value.
    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        self.sign as f64 * ratio_sqrt_f64(self.radicand.numer(), self.radicand.denom())
    }
}

/// sqrt(n/d) for positive n, d. The radicand may overflow or underflow f64
/// even when its square root does not (factorial-scale values), so the ratio
/// is rescaled by an exact power of four first: sqrt(n/d) =
/// sqrt(n / (d * 2^(2s))) * 2^s.
fn ratio_sqrt_f64(n: &BigInt, d: &BigInt) -> f64 {
    let excess = n.bits() as i64 - d.bits() as i64;
    let s = if excess.abs() > 500 { excess / 2 } else { 0 };
    let (n2, d2) = if s >= 0 {
        (n.clone(), d.clone() << (2 * s) as usize)
    } else {
        (n.clone() << (-2 * s) as usize, d.clone())
    };
    let scaled = BigRational::new(n2, d2).to_f64().expect("scaled ratio is finite");
    scaled.sqrt() * (s as f64).exp2()
}

impl std::ops::Neg for SignedSqrtRational {
    type Output = SignedSqrtRational;
    fn neg(self) -> SignedSqrtRational {
        self.negate()
    }
}

impl std::ops::Mul for &SignedSqrtRational {
    type Output = SignedSqrtRational;
    fn mul(self, rhs: &SignedSqrtRational) -> SignedSqrtRational {
        SignedSqrtRational::mul(self, rhs)
    }
}

/// Canonical string form: `0`, `[-]p/q` when the radicand is a perfect square
/// (`+sqrt(4)` prints as `2`), `[-]sqrt(p/q)` otherwise. `/q` is omitted when
/// `q == 1`. `parse` inverts `format` exactly.
impl fmt::Display for SignedSqrtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign == 0 {
            return write!(f, "0");
        }
        if let Some(r) = self.as_rational() {
            return write!(f, "{}", r);
        }
        let neg = if self.sign < 0 { "-" } else { "" };
        write!(f, "{}sqrt({})", neg, self.radicand)
    }
}

impl fmt::Debug for SignedSqrtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignedSqrtRational({})", self)
    }
}

fn parse_unsigned_rational(s: &str) -> Result<(BigInt, BigInt)> {
    let bad = || Error::Parse(format!("malformed rational `{s}`"));
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    if num_str.is_empty() || den_str.is_empty() || num_str.starts_with('+') || den_str.starts_with('+')
        || num_str.starts_with('-') || den_str.starts_with('-')
    {
        return Err(bad());
    }
    let num = BigInt::from_str(num_str).map_err(|_| bad())?;
    let den = BigInt::from_str(den_str).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok((num, den))
}

impl FromStr for SignedSqrtRational {
    type Err = Error;

    /// Grammar: `0` | `[-]p[/q]` | `[-]sqrt(p[/q])` with non-negative integers p, q.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, s),
        };
        if let Some(inner) = body.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            let (num, den) = parse_unsigned_rational(inner)?;
            if num.is_zero() {
                return Ok(Self::zero());
            }
            return Self::new(sign, num, den);
        }
        let (num, den) = parse_unsigned_rational(body)?;
        let r = BigRational::new(num, den);
        let value = if sign < 0 { -r } else { r };
        Ok(Self::from_rational(value))
    }
}

#[derive(Serialize, Deserialize)]
struct SsrDto {
    sign: i8,
    num: String,
    den: String,
}

impl Serialize for SignedSqrtRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SsrDto {
            sign: self.sign,
            num: self.radicand.numer().to_string(),
            den: self.radicand.denom().to_string(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SignedSqrtRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let dto = SsrDto::deserialize(deserializer)?;
        let num = BigInt::from_str(&dto.num).map_err(|e| D::Error::custom(format!("num: {e}")))?;
        let den = BigInt::from_str(&dto.den).map_err(|e| D::Error::custom(format!("den: {e}")))?;
        if num.is_zero() {
            if dto.sign != 0 {
                return Err(D::Error::custom("sign must be 0 for a zero radicand"));
            }
            return Ok(SignedSqrtRational::zero());
        }
        SignedSqrtRational::new(dto.sign as i32, num, den).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ssr(s: &str) -> SignedSqrtRational {
        s.parse().unwrap()
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(ssr("sqrt(1/2)").mul(&ssr("sqrt(1/3)")), ssr("sqrt(1/6)"));
        // (-sqrt(2)) * (-sqrt(2)) = +sqrt(4): the radicand stays 4, not 2.
        let prod = ssr("-sqrt(2)").mul(&ssr("-sqrt(2)"));
        assert_eq!(prod.sign(), 1);
        assert_eq!(*prod.radicand(), BigRational::from_integer(BigInt::from(4)));
        assert_eq!(prod, ssr("2"));
        assert_eq!(SignedSqrtRational::zero().mul(&ssr("sqrt(5)")), SignedSqrtRational::zero());
    }

    #[test]
    fn add_examples() {
        // sqrt(2) + sqrt(8) = 3*sqrt(2) = sqrt(18)
        assert_eq!(ssr("sqrt(2)").try_add(&ssr("sqrt(8)")).unwrap(), ssr("sqrt(18)"));
        // sqrt(1/2) + (-sqrt(1/2)) = 0, canonical zero
        let z = ssr("sqrt(1/2)").try_add(&ssr("-sqrt(1/2)")).unwrap();
        assert_eq!(z, SignedSqrtRational::zero());
        assert_eq!(z.sign(), 0);
        assert!(z.radicand().is_zero());
        // sqrt(2) + sqrt(3) leaves the field
        assert!(matches!(
            ssr("sqrt(2)").try_add(&ssr("sqrt(3)")),
            Err(Error::IncommensurableRadicals { .. })
        ));
    }

    #[test]
    fn add_zero_is_identity() {
        let x = ssr("-sqrt(7/3)");
        assert_eq!(x.try_add(&SignedSqrtRational::zero()).unwrap(), x);
        assert_eq!(SignedSqrtRational::zero().try_add(&x).unwrap(), x);
    }

    #[test]
    fn square_examples() {
        assert_eq!(ssr("-sqrt(1/3)").square(), BigRational::new(1.into(), 3.into()));
        assert!(SignedSqrtRational::zero().square().is_zero());
        assert_eq!(ssr("2").square(), BigRational::from_integer(4.into()));
    }

    #[test]
    fn float_examples() {
        assert!((ssr("sqrt(1/2)").to_f64() - 0.5f64.sqrt()).abs() <= f64::EPSILON);
        assert!((ssr("-sqrt(1/3)").to_f64() + (1.0f64 / 3.0).sqrt()).abs() <= f64::EPSILON);
        assert_eq!(SignedSqrtRational::zero().to_f64(), 0.0);
    }

    #[test]
    fn float_survives_huge_radicands() {
        // factorial-scale radicand: (100!)^2 / (100! * 2) = 100!/2; only finiteness
        // and rough magnitude matter here.
        let mut fact = BigInt::from(1);
        for i in 1..=100u32 {
            fact *= i;
        }
        let big = SignedSqrtRational::new(1, fact.clone() * &fact, BigInt::from(2)).unwrap();
        let expect = 0.5f64.sqrt() * 9.33262154439441e157;
        assert!((big.to_f64() / expect - 1.0).abs() < 1e-10);

        // and the reciprocal: radicand underflows f64, root does not
        let tiny = SignedSqrtRational::new(-1, BigInt::from(2), fact.clone() * &fact).unwrap();
        assert!((tiny.to_f64() * expect + 1.0).abs() < 1e-10);
    }

    #[test]
    fn format_examples() {
        assert_eq!(ssr("-sqrt(1/3)").to_string(), "-sqrt(1/3)");
        assert_eq!(SignedSqrtRational::new(1, 4.into(), 1.into()).unwrap().to_string(), "2");
        assert_eq!(SignedSqrtRational::new(-1, 4.into(), 9.into()).unwrap().to_string(), "-2/3");
        assert_eq!(SignedSqrtRational::zero().to_string(), "0");
        assert_eq!(ssr("sqrt(2)").to_string(), "sqrt(2)");
    }

    #[test]
    fn parse_examples() {
        let v = ssr("sqrt(2/3)");
        assert_eq!(v.sign(), 1);
        assert_eq!(*v.radicand(), BigRational::new(2.into(), 3.into()));
        assert_eq!(ssr("0"), SignedSqrtRational::zero());
        assert_eq!(ssr("-1/3"), SignedSqrtRational::new(-1, 1.into(), 9.into()).unwrap());
        assert_eq!(ssr("sqrt(4/6)"), ssr("sqrt(2/3)"));
        for bad in ["", "sqrt", "sqrt(", "sqrt(-2)", "1/0", "sqrt(1/0)", "+2", "2/-3", "abc", "sqrt(2))"] {
            assert!(bad.parse::<SignedSqrtRational>().is_err(), "`{bad}` should not parse");
        }
    }

    #[test]
    fn construction_canonicalizes() {
        // common factors cancel
        let a = SignedSqrtRational::new(1, 12.into(), 18.into()).unwrap();
        let b = SignedSqrtRational::new(1, 2.into(), 3.into()).unwrap();
        assert_eq!(a, b);
        // negative denominators normalize
        let c = SignedSqrtRational::new(1, BigInt::from(-2), BigInt::from(-3)).unwrap();
        assert_eq!(c, b);
        // zero forces canonical fields regardless of denominator
        let z = SignedSqrtRational::new(1, 0.into(), 7.into()).unwrap();
        assert_eq!(z, SignedSqrtRational::zero());
        // sign 0 with non-zero radicand is rejected
        assert!(SignedSqrtRational::new(0, 2.into(), 3.into()).is_err());
        assert!(SignedSqrtRational::new(1, 2.into(), 0.into()).is_err());
        assert!(SignedSqrtRational::new(1, BigInt::from(-2), 3.into()).is_err());
    }

    #[test]
    fn multiplication_commutative_associative_over_generators() {
        let gens: Vec<SignedSqrtRational> = [
            "0", "1", "-1", "sqrt(1/2)", "-sqrt(1/2)", "sqrt(2/3)", "2", "-sqrt(18)", "sqrt(4/9)", "-3/5",
        ]
        .iter()
        .map(|s| ssr(s))
        .collect();
        for a in &gens {
            for b in &gens {
                assert_eq!(a.mul(b), b.mul(a));
                for c in &gens {
                    assert_eq!(a.mul(b).mul(c), a.mul(&b.mul(c)));
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        for s in ["0", "1", "-sqrt(1/3)", "sqrt(50/49)", "-2/3"] {
            let v = ssr(s);
            let j = serde_json::to_string(&v).unwrap();
            let back: SignedSqrtRational = serde_json::from_str(&j).unwrap();
            assert_eq!(back, v);
        }
        let j = serde_json::to_value(&ssr("-sqrt(1/3)")).unwrap();
        assert_eq!(j, serde_json::json!({"sign": -1, "num": "1", "den": "3"}));
        // malformed documents are rejected
        for bad in [
            r#"{"sign": 0, "num": "2", "den": "3"}"#,
            r#"{"sign": 2, "num": "2", "den": "3"}"#,
            r#"{"sign": 1, "num": "2", "den": "0"}"#,
            r#"{"sign": 1, "num": "-2", "den": "3"}"#,
            r#"{"sign": 1, "num": "x", "den": "3"}"#,
        ] {
            assert!(serde_json::from_str::<SignedSqrtRational>(bad).is_err(), "`{bad}` should be rejected");
        }
    }

    fn arb_value() -> impl Strategy<Value = SignedSqrtRational> {
        (any::<i8>(), 0u64..2000, 1u64..2000).prop_map(|(s, n, d)| {
            let sign = if n == 0 { 0 } else if s < 0 { -1 } else { 1 };
            if n == 0 {
                SignedSqrtRational::zero()
            } else {
                SignedSqrtRational::new(sign, n.into(), d.into()).unwrap()
            }
        })
    }

    proptest! {
        #[test]
        fn parse_format_identity(v in arb_value()) {
            let s = v.to_string();
            let back: SignedSqrtRational = s.parse().unwrap();
            prop_assert_eq!(back, v);
        }

        #[test]
        fn scaling_radicand_by_common_factor_is_canonical(v in arb_value(), k in 1u64..50) {
            let scaled_num = v.radicand().numer() * BigInt::from(k);
            let scaled_den = v.radicand().denom() * BigInt::from(k);
            let rebuilt = SignedSqrtRational::new(v.sign(), scaled_num, scaled_den).unwrap();
            prop_assert_eq!(rebuilt, v);
        }

        #[test]
        fn square_of_product_is_product_of_squares(a in arb_value(), b in arb_value()) {
            prop_assert_eq!(a.mul(&b).square(), a.square() * b.square());
        }

        #[test]
        fn commensurable_add_matches_floats(v in arb_value(), num in 0i64..40, den in 1i64..40, neg in any::<bool>()) {
            // w = (num/den) * v is always commensurable with v
            let scale = BigRational::new(num.into(), den.into()) * BigInt::from(if neg { -1 } else { 1 });
            let w = SignedSqrtRational::from_rational(scale).mul(&v);
            let sum = v.try_add(&w).unwrap();
            let float_sum = v.to_f64() + w.to_f64();
            let tol = 1e-12 * (1.0 + float_sum.abs());
            prop_assert!((sum.to_f64() - float_sum).abs() <= tol);
            // and subtracting w back returns exactly v
            prop_assert_eq!(sum.try_sub(&w).unwrap(), v);
        }
    }
}
