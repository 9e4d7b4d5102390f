//! Dense polynomials over Q with exact coefficients.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::Rat;

/// `coeffs[i]` is the coefficient of `x^i`; no trailing zeros, so the zero
/// polynomial has an empty coefficient list.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RatPoly {
    coeffs: Vec<Rat>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> RatPoly {
        while coeffs.last().is_some_and(Rat::is_zero) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn zero() -> RatPoly {
        RatPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rat) -> RatPoly {
        RatPoly::new(vec![c])
    }

    pub fn one() -> RatPoly {
        RatPoly::constant(Rat::one())
    }

    pub fn x() -> RatPoly {
        RatPoly::monomial(Rat::one(), 1)
    }

    pub fn monomial(c: Rat, n: usize) -> RatPoly {
        let mut coeffs = vec![Rat::zero(); n + 1];
        coeffs[n] = c;
        RatPoly::new(coeffs)
    }

    /// `∏ (x - r)` over the given roots.
    pub fn from_roots<'a>(roots: impl IntoIterator<Item = &'a Rat>) -> RatPoly {
        let mut acc = RatPoly::one();
        for r in roots {
            acc = acc.mul_linear(r);
        }
        acc
    }

    /// `binom(x, n) = x(x-1)...(x-n+1)/n!`.
    pub fn binomial(n: usize) -> RatPoly {
        let roots: Vec<Rat> = (0..n as i64).map(Rat::from).collect();
        let mut fact = BigInt::one();
        for k in 2..=n as u64 {
            fact *= k;
        }
        RatPoly::from_roots(&roots).scale(&Rat::new(1, fact).unwrap())
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial counted as 0.
    pub fn degree_or_zero(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn leading(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// `self * (x - r)`.
    pub fn mul_linear(&self, r: &Rat) -> RatPoly {
        let mut out = vec![Rat::zero(); self.coeffs.len() + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i + 1] = &out[i + 1] + c;
            out[i] = &out[i] - &(c * r);
        }
        RatPoly::new(out)
    }

    pub fn scale(&self, c: &Rat) -> RatPoly {
        RatPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn add(&self, other: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        RatPoly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        RatPoly::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &RatPoly) -> RatPoly {
        if self.is_zero() || other.is_zero() {
            return RatPoly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        RatPoly::new(out)
    }

    /// `f(d·x)`.
    pub fn compose_scale(&self, d: &Rat) -> RatPoly {
        let mut pw = Rat::one();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(c * &pw);
            pw = pw * d;
        }
        RatPoly::new(out)
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Coordinates in the binomial basis: `f = Σ b_k binom(x, k)`, with
    /// `b_k = Δ^k f(0)`.
    pub fn binomial_coordinates(&self) -> Vec<Rat> {
        let n = self.degree_or_zero();
        let mut values: Vec<Rat> = (0..=n as i64).map(|k| self.eval(&Rat::from(k))).collect();
        let mut out = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            out.push(values[0].clone());
            values = values.windows(2).map(|w| &w[1] - &w[0]).collect();
        }
        out
    }

    /// Minimal valuation of the coefficients, `None` for zero.
    pub fn min_valuation(&self, p: u64) -> Option<i64> {
        self.coeffs.iter().filter_map(|c| c.valp(p).finite()).min()
    }
}

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.numer().is_negative();
            let a = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { "-" } else { "+" })?;
            }
            first = false;
            match (i, a.numer().is_one() && a.denom().is_one()) {
                (0, _) => write!(f, "{a}")?,
                (_, true) => {}
                (_, false) => write!(f, "{a}*")?,
            }
            match i {
                0 => {}
                1 => f.write_str("x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatPoly({self})")
    }
}

/// Parses the infix form `a/b*x^n` terms joined by `+`/`-`, e.g.
/// `1/2*x^2-1/2*x`, `x^3 - 3`, `-x`, `2*x + 1/3`.
impl FromStr for RatPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<RatPoly> {
        let src: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if src.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        for (i, ch) in src.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with('^') {
                terms.push((neg, std::mem::take(&mut cur)));
                neg = ch == '-';
            } else if (ch == '+' || ch == '-') && i == 0 {
                neg = ch == '-';
            } else {
                cur.push(ch);
            }
        }
        terms.push((neg, cur));
        let mut coeffs: Vec<Rat> = Vec::new();
        for (neg, t) in terms {
            if t.is_empty() {
                return Err(Error::Parse(format!("empty term in {s:?}")));
            }
            let (c, e) = parse_term(&t)?;
            if coeffs.len() <= e {
                coeffs.resize(e + 1, Rat::zero());
            }
            let c = if neg { -c } else { c };
            coeffs[e] = &coeffs[e] + &c;
        }
        Ok(RatPoly::new(coeffs))
    }
}

fn parse_term(t: &str) -> Result<(Rat, usize)> {
    let bad = || Error::Parse(format!("bad term {t:?}"));
    let (coef, mono) = match t.find('x') {
        None => return Ok((t.parse::<Rat>().map_err(|_| bad())?, 0)),
        Some(pos) => {
            let head = &t[..pos];
            let coef = if head.is_empty() {
                Rat::one()
            } else {
                head.strip_suffix('*').ok_or_else(bad)?.parse::<Rat>().map_err(|_| bad())?
            };
            (coef, &t[pos..])
        }
    };
    let exp = match mono {
        "x" => 1,
        m => m.strip_prefix("x^").ok_or_else(bad)?.parse::<usize>().map_err(|_| bad())?,
    };
    Ok((coef, exp))
}
