//! Truncated p-adic numbers with explicit precision bookkeeping.
//!
//! A nonzero [`PAdicNumber`] is `p^v * unit` where the unit is known modulo
//! `p^N` (`N` = relative precision). Zero is represented with valuation
//! `Inf` together with the absolute precision it is known to: "zero modulo
//! `p^abs`". Operations never report more digits than their inputs justify.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::{mod_inverse, pow_big, split_p, Rat, Valuation};

pub const DEFAULT_PRECISION: u32 = 32;

/// Working precision from `PW_PRECISION`, falling back to 32 digits.
pub fn default_precision() -> u32 {
    std::env::var("PW_PRECISION")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&n: &u32| n >= 1)
        .unwrap_or(DEFAULT_PRECISION)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Repr {
    Zero { abs: i64 },
    Unit { valuation: i64, unit: BigUint, precision: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PAdicNumber {
    prime: u64,
    repr: Repr,
}

/// `x` modulo `p^N` is embedded with `N` significant digits past its valuation.
pub fn embed(x: &Rat, p: u64, precision: u32) -> PAdicNumber {
    assert!(precision >= 1, "precision must be positive");
    match x.valp(p) {
        Valuation::Inf => PAdicNumber::zero(p, precision as i64),
        Valuation::Finite(v) => {
            let (_, num) = split_p(x.numer(), p);
            let (_, den) = split_p(x.denom(), p);
            let m = BigInt::from(pow_big(p, precision));
            let inv = mod_inverse(&den, &m).expect("p-free denominator");
            let unit = (num * inv).mod_floor(&m).to_biguint().unwrap();
            PAdicNumber { prime: p, repr: Repr::Unit { valuation: v, unit, precision } }
        }
    }
}

impl PAdicNumber {
    /// Zero known modulo `p^abs`.
    pub fn zero(p: u64, abs: i64) -> PAdicNumber {
        PAdicNumber { prime: p, repr: Repr::Zero { abs } }
    }

    /// `p^valuation * unit`, unit taken modulo `p^precision`.
    pub fn from_parts(p: u64, valuation: i64, unit: BigUint, precision: u32) -> Result<PAdicNumber> {
        if precision == 0 {
            return Err(Error::Invalid("precision must be positive".into()));
        }
        let unit = unit % pow_big(p, precision);
        if (&unit % p).is_zero() {
            return Err(Error::Invalid("unit part must be prime to p".into()));
        }
        Ok(PAdicNumber { prime: p, repr: Repr::Unit { valuation, unit, precision } })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn valuation(&self) -> Valuation {
        match &self.repr {
            Repr::Zero { .. } => Valuation::Inf,
            Repr::Unit { valuation, .. } => Valuation::Finite(*valuation),
        }
    }

    /// Unit digits; zero for the `Inf` case.
    pub fn unit(&self) -> BigUint {
        match &self.repr {
            Repr::Zero { .. } => BigUint::zero(),
            Repr::Unit { unit, .. } => unit.clone(),
        }
    }

    /// Relative precision (significant digits of the unit). For zero this is
    /// the absolute precision, clamped at 0.
    pub fn precision(&self) -> u32 {
        match &self.repr {
            Repr::Zero { abs } => (*abs).max(0) as u32,
            Repr::Unit { precision, .. } => *precision,
        }
    }

    /// The value is known modulo `p^absolute_precision()`.
    pub fn absolute_precision(&self) -> i64 {
        match &self.repr {
            Repr::Zero { abs } => *abs,
            Repr::Unit { valuation, precision, .. } => valuation + *precision as i64,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    /// `Some(true)` when certainly in `Z_p`, `Some(false)` when certainly not,
    /// `None` when a zero is only known modulo a negative power of `p`.
    pub fn is_integral(&self) -> Option<bool> {
        match &self.repr {
            Repr::Zero { abs } => (*abs >= 0).then_some(true),
            Repr::Unit { valuation, .. } => Some(*valuation >= 0),
        }
    }

    fn same_prime(&self, other: &PAdicNumber) -> Result<()> {
        if self.prime == other.prime {
            Ok(())
        } else {
            Err(Error::PrimeMismatch(self.prime, other.prime))
        }
    }

    /// Integer `m` with value ≡ m·p^base (mod p^abs), for `base <= valuation`.
    fn scaled_to(&self, base: i64) -> BigUint {
        match &self.repr {
            Repr::Zero { .. } => BigUint::zero(),
            Repr::Unit { valuation, unit, .. } => unit * pow_big(self.prime, (valuation - base) as u32),
        }
    }

    fn normalize(p: u64, base: i64, m: BigUint, abs: i64) -> PAdicNumber {
        // value = m * p^base known mod p^abs
        let width = abs - base;
        if width <= 0 {
            return PAdicNumber::zero(p, abs);
        }
        let m = m % pow_big(p, width as u32);
        if m.is_zero() {
            return PAdicNumber::zero(p, abs);
        }
        let (v, unit) = split_p(&BigInt::from(m), p);
        let valuation = base + v as i64;
        let precision = (abs - valuation) as u32;
        let unit = unit.to_biguint().unwrap() % pow_big(p, precision);
        PAdicNumber { prime: p, repr: Repr::Unit { valuation, unit, precision } }
    }

    pub fn add(&self, other: &PAdicNumber) -> Result<PAdicNumber> {
        self.same_prime(other)?;
        let abs = self.absolute_precision().min(other.absolute_precision());
        let base = match (self.valuation(), other.valuation()) {
            (Valuation::Inf, Valuation::Inf) => return Ok(PAdicNumber::zero(self.prime, abs)),
            (a, b) => a.min(b).finite().unwrap(),
        };
        let m = self.scaled_to(base) + other.scaled_to(base);
        Ok(PAdicNumber::normalize(self.prime, base, m, abs))
    }

    pub fn neg(&self) -> PAdicNumber {
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::Unit { valuation, unit, precision } => {
                let m = pow_big(self.prime, *precision);
                PAdicNumber {
                    prime: self.prime,
                    repr: Repr::Unit { valuation: *valuation, unit: &m - unit, precision: *precision },
                }
            }
        }
    }

    pub fn sub(&self, other: &PAdicNumber) -> Result<PAdicNumber> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &PAdicNumber) -> Result<PAdicNumber> {
        self.same_prime(other)?;
        let p = self.prime;
        Ok(match (&self.repr, &other.repr) {
            (Repr::Zero { abs: a }, Repr::Zero { abs: b }) => PAdicNumber::zero(p, a + b),
            (Repr::Zero { abs }, Repr::Unit { valuation, .. })
            | (Repr::Unit { valuation, .. }, Repr::Zero { abs }) => PAdicNumber::zero(p, abs + valuation),
            (
                Repr::Unit { valuation: va, unit: ua, precision: na },
                Repr::Unit { valuation: vb, unit: ub, precision: nb },
            ) => {
                let precision = (*na).min(*nb);
                let unit = (ua * ub) % pow_big(p, precision);
                PAdicNumber { prime: p, repr: Repr::Unit { valuation: va + vb, unit, precision } }
            }
        })
    }

    pub fn div(&self, other: &PAdicNumber) -> Result<PAdicNumber> {
        self.same_prime(other)?;
        let p = self.prime;
        let (vb, ub, nb) = match &other.repr {
            Repr::Zero { .. } => {
                return Err(Error::PrecisionExhausted("divisor is zero to working precision".into()))
            }
            Repr::Unit { valuation, unit, precision } => (*valuation, unit, *precision),
        };
        Ok(match &self.repr {
            Repr::Zero { abs } => PAdicNumber::zero(p, abs - vb),
            Repr::Unit { valuation, unit, precision } => {
                let precision = (*precision).min(nb);
                let m = BigInt::from(pow_big(p, precision));
                let inv = mod_inverse(&BigInt::from(ub.clone()), &m).unwrap();
                let unit = (BigInt::from(unit.clone()) * inv).mod_floor(&m).to_biguint().unwrap();
                PAdicNumber { prime: p, repr: Repr::Unit { valuation: valuation - vb, unit, precision } }
            }
        })
    }

    /// Drops to `PAdicInt` form; requires valuation ≥ 0.
    pub fn to_padic_int(&self) -> Result<PAdicInt> {
        let abs = self.absolute_precision();
        if abs <= 0 {
            return Err(Error::PrecisionExhausted(format!("no digits left in {self}")));
        }
        match self.is_integral() {
            Some(true) => {}
            _ => return Err(Error::Invalid(format!("{self} is not a p-adic integer"))),
        }
        let residue = self.scaled_to(0) % pow_big(self.prime, abs as u32);
        Ok(PAdicInt { prime: self.prime, residue, precision: abs as u32 })
    }
}

impl fmt::Display for PAdicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Zero { abs } => write!(f, "O({}^{})", self.prime, abs),
            Repr::Unit { valuation, unit, precision } => {
                write!(f, "{}^{}*{} + O({}^{})", self.prime, valuation, unit, self.prime, valuation + *precision as i64)
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PAdicJson {
    p: u64,
    v: serde_json::Value,
    #[serde(with = "crate::json::biguint")]
    unit: BigUint,
    #[serde(rename = "N")]
    n: i64,
}

impl Serialize for PAdicNumber {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (v, n) = match &self.repr {
            Repr::Zero { abs } => (serde_json::Value::String("INF".into()), *abs),
            Repr::Unit { valuation, precision, .. } => (serde_json::Value::from(*valuation), *precision as i64),
        };
        PAdicJson { p: self.prime, v, unit: self.unit(), n }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PAdicNumber {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = PAdicJson::deserialize(d)?;
        match j.v {
            serde_json::Value::String(s) if s == "INF" => Ok(PAdicNumber::zero(j.p, j.n)),
            v => {
                let v = v.as_i64().ok_or_else(|| D::Error::custom("v must be an integer or \"INF\""))?;
                let n = u32::try_from(j.n).map_err(D::Error::custom)?;
                PAdicNumber::from_parts(j.p, v, j.unit, n).map_err(D::Error::custom)
            }
        }
    }
}

/// A coset `residue + p^N Z_p` of the p-adic integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PAdicInt {
    #[serde(rename = "p")]
    prime: u64,
    #[serde(with = "crate::json::biguint")]
    residue: BigUint,
    #[serde(rename = "N")]
    precision: u32,
}

impl PAdicInt {
    pub fn new(p: u64, residue: BigUint, precision: u32) -> PAdicInt {
        let residue = residue % pow_big(p, precision);
        PAdicInt { prime: p, residue, precision }
    }

    pub fn from_rat(x: &Rat, p: u64, precision: u32) -> Result<PAdicInt> {
        Ok(PAdicInt { prime: p, residue: x.residue(p, precision)?, precision })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn residue(&self) -> &BigUint {
        &self.residue
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Valuation of the residue, `Inf` when it is zero modulo `p^N`.
    pub fn valuation(&self) -> Valuation {
        if self.residue.is_zero() {
            Valuation::Inf
        } else {
            Valuation::Finite(split_p(&BigInt::from(self.residue.clone()), self.prime).0 as i64)
        }
    }

    pub fn to_padic_number(&self) -> PAdicNumber {
        PAdicNumber::normalize(self.prime, 0, self.residue.clone(), self.precision as i64)
    }

    /// Same coset seen at a lower precision.
    pub fn truncate(&self, precision: u32) -> PAdicInt {
        PAdicInt::new(self.prime, self.residue.clone(), precision.min(self.precision))
    }

    pub fn is_one_mod(&self) -> bool {
        self.residue.is_one()
    }
}

impl fmt::Display for PAdicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O({}^{})", self.residue, self.prime, self.precision)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn embed_examples() {
        let x = embed(&r("1/3"), 2, 4);
        assert_eq!(x.valuation(), Valuation::Finite(0));
        assert_eq!(x.unit(), BigUint::from(11u32));
        let y = embed(&r("4"), 2, 3);
        assert_eq!(y.valuation(), Valuation::Finite(2));
        assert_eq!(y.unit(), BigUint::one());
        assert!(embed(&r("0"), 7, 5).valuation().is_inf());
    }

    #[test]
    fn addition_reports_honest_precision() {
        // 1 + 3 = 4, both known mod 16, so the sum is 2^2 * 1 known mod 2^4.
        let s = embed(&r("1"), 2, 4).add(&embed(&r("3"), 2, 4)).unwrap();
        assert_eq!(s.valuation(), Valuation::Finite(2));
        assert_eq!(s.unit(), BigUint::one());
        assert_eq!(s.precision(), 2);
        assert_eq!(s.absolute_precision(), 4);
    }

    #[test]
    fn self_difference_is_zero() {
        let x = embed(&r("17/5"), 3, 6);
        let z = x.sub(&x).unwrap();
        assert!(z.valuation().is_inf());
        assert_eq!(z.absolute_precision(), 6);
    }

    #[test]
    fn product_of_units() {
        let a = embed(&r("1"), 2, 8);
        let b = PAdicNumber::from_parts(2, 5, BigUint::one(), 8).unwrap();
        let c = a.mul(&b).unwrap();
        assert_eq!(c.valuation(), Valuation::Finite(5));
        assert_eq!(c.unit(), BigUint::one());
    }

    #[test]
    fn division_by_zero_to_precision() {
        let z = embed(&r("0"), 5, 3);
        assert!(matches!(embed(&r("2"), 5, 3).div(&z), Err(Error::PrecisionExhausted(_))));
        assert!(matches!(embed(&r("2"), 5, 3).add(&embed(&r("2"), 3, 3)), Err(Error::PrimeMismatch(5, 3))));
    }

    #[test]
    fn json_shape() {
        let x = embed(&r("12"), 2, 4);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"p":2,"v":2,"unit":3,"N":4}"#);
        let back: PAdicNumber = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        let z = serde_json::to_string(&embed(&r("0"), 3, 5)).unwrap();
        assert_eq!(z, r#"{"p":3,"v":"INF","unit":0,"N":5}"#);
    }

    fn small_rat() -> impl Strategy<Value = Rat> {
        (-2000i64..2000, 1i64..200).prop_map(|(n, d)| Rat::new(n, d).unwrap())
    }

    proptest! {
        #[test]
        fn embedding_is_multiplicative(x in small_rat(), y in small_rat(), pi in 0usize..3, n in 1u32..12) {
            let p = [2u64, 3, 5][pi];
            let lhs = embed(&(&x * &y), p, n);
            let rhs = embed(&x, p, n).mul(&embed(&y, p, n)).unwrap();
            // agree modulo the weaker of the two absolute precisions
            let abs = lhs.absolute_precision().min(rhs.absolute_precision());
            let diff = lhs.sub(&rhs).unwrap();
            prop_assert!(diff.is_zero() || diff.valuation() >= Valuation::Finite(abs));
        }

        #[test]
        fn valuation_laws(x in small_rat(), y in small_rat(), pi in 0usize..3) {
            let p = [2u64, 3, 5][pi];
            prop_assert_eq!((&x * &y).valp(p), x.valp(p) + y.valp(p));
            let s = (&x + &y).valp(p);
            prop_assert!(s >= x.valp(p).min(y.valp(p)));
            if x.valp(p) != y.valp(p) {
                prop_assert_eq!(s, x.valp(p).min(y.valp(p)));
            }
        }

        #[test]
        fn residue_round_trip(n in -5000i64..5000, d in 1i64..500, pi in 0usize..3, k in 1u32..10) {
            let p = [2u64, 3, 5][pi];
            let x = Rat::new(n, d).unwrap();
            prop_assume!(x.is_p_integral(p) && !x.is_zero() && x.valp(p) == Valuation::Finite(0));
            let e = embed(&x, p, k);
            // brute-force modular oracle: find r in [0, p^k) with d*r ≡ n
            let m = p.pow(k) as i64;
            let (n, d) = (x.numer().to_string().parse::<i64>().unwrap(), x.denom().to_string().parse::<i64>().unwrap());
            let r = (0..m).find(|r| ((d * r - n) % m + m) % m == 0).unwrap();
            prop_assert_eq!(e.unit(), BigUint::from(r as u64));
        }
    }
}
