//! Points, polynomials and orderings in `Ẑ = ∏ Z_p`, plus the scaling
//! reductions that move a bounded set into `Ẑ`.
//!
//! Only finitely many primes are ever materialized. Every other component of
//! a point or polynomial is given by a single rational value or polynomial
//! (the diagonal embedding of `Q`).

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::padic::{embed, PAdicInt, PAdicNumber};
use crate::poly::RatPoly;
use crate::pordering::{basis_poly, p_ordering, padic_eval, POrdering};
use crate::rat::{pow_big, primes_up_to, strip_primes, valp_int, Rat, Valuation};
use crate::sets::{AdelicSet, Ball, CompactSet, DefaultFamily};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdelicPoint {
    pub tracked: BTreeMap<u64, PAdicInt>,
    pub default: Rat,
}

impl Serialize for AdelicPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let tracked: BTreeMap<String, serde_json::Value> = self
            .tracked
            .iter()
            .map(|(p, r)| (p.to_string(), serde_json::Value::Number(r.residue().to_string().parse().unwrap())))
            .collect();
        let mut st = s.serialize_struct("AdelicPoint", 2)?;
        st.serialize_field("tracked", &tracked)?;
        st.serialize_field("default", &self.default)?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdelicPoly {
    pub degree: usize,
    /// Coefficient lists (length `degree + 1`) at the materialized primes.
    pub tracked: BTreeMap<u64, Vec<PAdicNumber>>,
    /// The component at every prime not in `tracked`.
    pub default: RatPoly,
    /// No prime outside `tracked` divides a denominator of `default`.
    pub integral_elsewhere: bool,
}

impl AdelicPoly {
    /// `f` in every component, materialized at `primes`.
    pub fn from_rat_poly(f: &RatPoly, primes: impl IntoIterator<Item = u64>, precision: u32) -> AdelicPoly {
        let degree = f.degree_or_zero();
        let tracked: BTreeMap<u64, Vec<PAdicNumber>> =
            primes.into_iter().map(|p| (p, embed_coeffs(f, degree, p, precision))).collect();
        let integral_elsewhere = strip_primes(&f.denominator(), tracked.keys().copied()).is_one();
        AdelicPoly { degree, tracked, default: f.clone(), integral_elsewhere }
    }

    /// Component at `p`.
    pub fn component(&self, p: u64, precision: u32) -> Vec<PAdicNumber> {
        match self.tracked.get(&p) {
            Some(c) => c.clone(),
            None => embed_coeffs(&self.default, self.degree, p, precision),
        }
    }
}

fn embed_coeffs(f: &RatPoly, degree: usize, p: u64, precision: u32) -> Vec<PAdicNumber> {
    (0..=degree).map(|i| embed(&f.coeff(i), p, precision)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdelicOrdering {
    set: AdelicSet,
    precision: u32,
    components: BTreeMap<u64, POrdering>,
    default_points: Vec<Rat>,
    exceptions: Vec<Vec<u64>>,
}

impl AdelicOrdering {
    pub fn set(&self) -> &AdelicSet {
        &self.set
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.default_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.default_points.is_empty()
    }

    /// The p-ordering at a tracked prime.
    pub fn component(&self, p: u64) -> Option<&POrdering> {
        self.components.get(&p)
    }

    pub fn components(&self) -> &BTreeMap<u64, POrdering> {
        &self.components
    }

    pub fn default_points(&self) -> &[Rat] {
        &self.default_points
    }

    /// Primes `p` with `v_p(∏_{k<n}(α_n - α_k)) > 0`.
    pub fn exceptions(&self, n: usize) -> &[u64] {
        &self.exceptions[n]
    }

    /// The exact component of `α_n` at `p`.
    pub fn coordinate(&self, n: usize, p: u64) -> &Rat {
        match self.components.get(&p) {
            Some(o) => &o.points()[n],
            None => &self.default_points[n],
        }
    }

    pub fn point(&self, n: usize) -> AdelicPoint {
        let tracked = self.components.iter().map(|(p, o)| (*p, o.residues()[n].clone())).collect();
        AdelicPoint { tracked, default: self.default_points[n].clone() }
    }

    pub fn points(&self) -> Vec<AdelicPoint> {
        (0..self.len()).map(|n| self.point(n)).collect()
    }
}

impl Serialize for AdelicOrdering {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let w: BTreeMap<String, &[u64]> = self.components.iter().map(|(p, o)| (p.to_string(), o.w())).collect();
        let mut st = s.serialize_struct("AdelicOrdering", 4)?;
        st.serialize_field("points", &self.points())?;
        st.serialize_field("w", &w)?;
        st.serialize_field("exceptions", &self.exceptions)?;
        st.serialize_field("N", &self.precision)?;
        st.end()
    }
}

/// An adelic ordering with `length` points: the greedy p-ordering at each
/// tracked prime and `0, 1, 2, ...` at every other prime.
pub fn adelic_ordering(a: &AdelicSet, length: usize, precision: u32) -> Result<AdelicOrdering> {
    if length == 0 {
        return Err(Error::Invalid("an ordering needs at least one point".into()));
    }
    if a.default_family() == DefaultFamily::Pzp && length >= 2 {
        return Err(Error::NoAdelicOrdering(length));
    }
    let mut components = BTreeMap::new();
    for (p, s) in a.tracked() {
        components.insert(*p, p_ordering(s, length - 1, precision)?);
    }
    let default_points: Vec<Rat> = (0..length as i64).map(Rat::from).collect();
    let exceptions = (0..length)
        .map(|n| {
            let mut e: BTreeSet<u64> = primes_up_to(n as u64).into_iter().filter(|p| !a.is_tracked(*p)).collect();
            e.extend(components.iter().filter(|(_, o)| o.w()[n] > 0).map(|(p, _)| *p));
            e.into_iter().collect()
        })
        .collect();
    Ok(AdelicOrdering { set: a.clone(), precision, components, default_points, exceptions })
}

/// `g_n = ∏_{k<n} (x - α_k)/(α_n - α_k)`, materialized at the tracked primes
/// and at the primes where the default component has a denominator.
pub fn adelic_basis(o: &AdelicOrdering, n: usize) -> Result<AdelicPoly> {
    if n >= o.len() {
        return Err(Error::Invalid(format!("degree {n} exceeds ordering length {}", o.len() - 1)));
    }
    let r = &o.default_points;
    let step = r[..n].iter().fold(Rat::one(), |acc, rk| acc * (&r[n] - rk));
    let default = RatPoly::from_roots(&r[..n]).scale(&(Rat::one() / step));
    let mut tracked = BTreeMap::new();
    for (p, po) in &o.components {
        let f = basis_poly(po, n)?;
        tracked.insert(*p, embed_coeffs(&f, n, *p, o.precision));
    }
    for p in &o.exceptions[n] {
        tracked.entry(*p).or_insert_with(|| embed_coeffs(&default, n, *p, o.precision));
    }
    let integral_elsewhere = strip_primes(&default.denominator(), tracked.keys().copied()).is_one();
    Ok(AdelicPoly { degree: n, tracked, default, integral_elsewhere })
}

/// Is `g(α_k) ∈ Ẑ` for `k = 0..=deg g`? By the basis criterion this decides
/// `g ∈ Int(E, Ẑ)`.
pub fn adelic_membership(g: &AdelicPoly, o: &AdelicOrdering) -> Result<bool> {
    if g.degree >= o.len() {
        return Err(Error::Invalid(format!("degree {} exceeds ordering length {}", g.degree, o.len() - 1)));
    }
    let mut primes: BTreeSet<u64> = g.tracked.keys().copied().collect();
    primes.extend(o.components.keys().copied());
    for &p in &primes {
        let coeffs = g.component(p, o.precision);
        let work = coeffs.iter().map(PAdicNumber::precision).max().unwrap_or(1) + 64;
        for k in 0..=g.degree {
            let x = embed(o.coordinate(k, p), p, work);
            let value = padic_eval(&coeffs, &x)?;
            match value.is_integral() {
                Some(true) => {}
                Some(false) => return Ok(false),
                None => {
                    return Err(Error::PrecisionExhausted(format!(
                        "value at alpha_{k} in component {p} is zero only modulo p^{}",
                        value.absolute_precision()
                    )))
                }
            }
        }
    }
    for r in &o.default_points[..=g.degree] {
        let v = g.default.eval(r);
        if !strip_primes(v.denom(), primes.iter().copied()).is_one() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A ball `center + p^exp Z_p` in `Q_p`; `exp` may be negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QpBall {
    pub center: Rat,
    pub exp: i64,
}

impl QpBall {
    pub fn new(center: Rat, exp: i64) -> QpBall {
        QpBall { center, exp }
    }

    fn min_valuation(&self, p: u64) -> i64 {
        match self.center.valp(p) {
            Valuation::Finite(v) => v.min(self.exp),
            Valuation::Inf => self.exp,
        }
    }
}

/// The least `d >= 1` with `d·E ⊆ Ẑ`, and `d·E` as an adelic set.
pub fn scale_into_z(default: DefaultFamily, components: &BTreeMap<u64, Vec<QpBall>>) -> Result<(BigUint, AdelicSet)> {
    let mut d = BigUint::one();
    for (p, balls) in components {
        let low = balls.iter().map(|b| b.min_valuation(*p)).min().unwrap_or(0);
        if low < 0 {
            d *= pow_big(*p, (-low) as u32);
        }
    }
    let d_rat = Rat::from(BigInt::from(d.clone()));
    let mut sets = Vec::new();
    for (p, balls) in components {
        let shift = valp_int(&BigInt::from(d.clone()), *p).finite().unwrap_or(0);
        let mut scaled = Vec::with_capacity(balls.len());
        for b in balls {
            let exp = b.exp + shift;
            if exp < 0 {
                return Err(Error::Invalid(format!("ball at {p} still outside Z_p after scaling")));
            }
            let center = (&d_rat * &b.center).residue(*p, exp as u32)?;
            scaled.push(Ball::new(center, exp as u32));
        }
        sets.push(CompactSet::balls(*p, scaled)?);
    }
    Ok((d, AdelicSet::new(default, sets)?))
}

/// `(1/d1)·f(d·x)`.
pub fn conjugate_poly(f: &RatPoly, d: &BigUint, d1: &BigUint) -> Result<RatPoly> {
    if d.is_zero() || d1.is_zero() {
        return Err(Error::Invalid("scaling factors must be positive".into()));
    }
    let d = Rat::from(BigInt::from(d.clone()));
    let inv = Rat::one() / Rat::from(BigInt::from(d1.clone()));
    Ok(f.compose_scale(&d).scale(&inv))
}
