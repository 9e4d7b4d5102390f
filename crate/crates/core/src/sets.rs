//! Compact subsets of `Z_p` and their adelic products.
//!
//! A [`CompactSet`] is either a finite union of balls `c + p^k Z_p` or a
//! finite list of p-integral rationals. An [`AdelicSet`] tracks finitely
//! many primes explicitly; every other prime gets the default component,
//! `Z_p` or `pZ_p`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::PAdicNumber;
use crate::rat::{check_prime, pow_big, Rat, Valuation};

/// The ball `center + p^exp Z_p`, center canonical in `[0, p^exp)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Ball {
    #[serde(with = "crate::json::biguint")]
    pub center: BigUint,
    pub exp: u32,
}

impl Ball {
    pub fn new(center: impl Into<BigUint>, exp: u32) -> Ball {
        Ball { center: center.into(), exp }
    }

    fn contains_ball(&self, other: &Ball, p: u64) -> bool {
        self.exp <= other.exp && &other.center % pow_big(p, self.exp) == self.center
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SetKind {
    Balls(Vec<Ball>),
    Finite(Vec<Rat>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompactSet {
    prime: u64,
    kind: SetKind,
}

/// Three-valued answer for membership at finite precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Yes,
    No,
    Unknown,
}

impl CompactSet {
    /// A union of balls, normalized.
    pub fn balls(p: u64, balls: Vec<Ball>) -> Result<CompactSet> {
        CompactSet::raw(p, SetKind::Balls(balls))?.normalize()
    }

    /// A finite set of p-integral rationals, normalized.
    pub fn finite(p: u64, elems: Vec<Rat>) -> Result<CompactSet> {
        CompactSet::raw(p, SetKind::Finite(elems))?.normalize()
    }

    /// No normalization; only the prime is checked.
    pub fn raw(p: u64, kind: SetKind) -> Result<CompactSet> {
        check_prime(p)?;
        Ok(CompactSet { prime: p, kind })
    }

    pub fn zp(p: u64) -> CompactSet {
        CompactSet::balls(p, vec![Ball::new(0u32, 0)]).expect("Z_p")
    }

    pub fn pzp(p: u64) -> CompactSet {
        CompactSet::balls(p, vec![Ball::new(0u32, 1)]).expect("pZ_p")
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, SetKind::Finite(_))
    }

    /// Number of elements for finite sets.
    pub fn size(&self) -> Option<usize> {
        match &self.kind {
            SetKind::Finite(v) => Some(v.len()),
            SetKind::Balls(_) => None,
        }
    }

    /// Deepest ball exponent (0 for finite sets).
    pub fn max_exp(&self) -> u32 {
        match &self.kind {
            SetKind::Balls(b) => b.iter().map(|b| b.exp).max().unwrap_or(0),
            SetKind::Finite(_) => 0,
        }
    }

    /// Canonical form: disjoint balls sorted by `(exp, center)`, or a sorted
    /// duplicate-free element list.
    pub fn normalize(&self) -> Result<CompactSet> {
        let p = self.prime;
        let kind = match &self.kind {
            SetKind::Balls(balls) => {
                let mut bs: Vec<Ball> =
                    balls.iter().map(|b| Ball { center: &b.center % pow_big(p, b.exp), exp: b.exp }).collect();
                bs.sort();
                bs.dedup();
                let mut kept: Vec<Ball> = Vec::new();
                for b in bs {
                    // sorted by exponent, so any container is already kept
                    if !kept.iter().any(|k| k.contains_ball(&b, p)) {
                        kept.push(b);
                    }
                }
                if kept.is_empty() {
                    return Err(Error::EmptySet);
                }
                SetKind::Balls(kept)
            }
            SetKind::Finite(elems) => {
                if let Some(bad) = elems.iter().find(|x| !x.is_p_integral(p)) {
                    return Err(Error::Invalid(format!("{bad} is not in Z_{p}")));
                }
                let set: BTreeSet<Rat> = elems.iter().cloned().collect();
                if set.is_empty() {
                    return Err(Error::EmptySet);
                }
                SetKind::Finite(set.into_iter().collect())
            }
        };
        Ok(CompactSet { prime: p, kind })
    }

    /// Residues modulo `p^m` that meet the set.
    pub fn residues(&self, m: u32) -> BTreeSet<BigUint> {
        let p = self.prime;
        let modulus = pow_big(p, m);
        let mut out = BTreeSet::new();
        match &self.kind {
            SetKind::Balls(balls) => {
                for b in balls {
                    if b.exp >= m {
                        out.insert(&b.center % &modulus);
                    } else {
                        let step = pow_big(p, b.exp);
                        let count = pow_big(p, m - b.exp);
                        let mut j = BigUint::zero();
                        while j < count {
                            out.insert(&b.center + &j * &step);
                            j += 1u32;
                        }
                    }
                }
            }
            SetKind::Finite(elems) => {
                for x in elems {
                    out.insert(x.residue(p, m).expect("normalized elements are p-integral"));
                }
            }
        }
        out
    }

    pub fn count_mod_p(&self) -> usize {
        self.residues(1).len()
    }

    /// Exact membership for a rational.
    pub fn contains_rat(&self, x: &Rat) -> bool {
        match &self.kind {
            SetKind::Finite(elems) => elems.binary_search(x).is_ok(),
            SetKind::Balls(balls) => {
                x.is_p_integral(self.prime)
                    && balls.iter().any(|b| x.residue(self.prime, b.exp).map(|r| r == b.center).unwrap_or(false))
            }
        }
    }

    /// Membership of a truncated p-adic number; `Unknown` when its digits
    /// run out before the answer is determined.
    pub fn contains(&self, x: &PAdicNumber) -> Result<Membership> {
        if x.prime() != self.prime {
            return Err(Error::PrimeMismatch(x.prime(), self.prime));
        }
        let p = self.prime;
        if let Valuation::Finite(v) = x.valuation() {
            if v < 0 {
                return Ok(Membership::No);
            }
        }
        let abs = x.absolute_precision();
        if abs <= 0 {
            return Ok(Membership::Unknown);
        }
        let known = x.to_padic_int()?;
        let abs = abs as u32;
        let targets: Vec<(BigUint, u32)> = match &self.kind {
            SetKind::Balls(balls) => balls.iter().map(|b| (b.center.clone(), b.exp)).collect(),
            // finite elements are points; exact equality is never decidable
            SetKind::Finite(elems) => {
                let any = elems.iter().any(|e| e.residue(p, abs).ok().as_ref() == Some(known.residue()));
                return Ok(if any { Membership::Unknown } else { Membership::No });
            }
        };
        let mut unknown = false;
        for (center, exp) in targets {
            let depth = exp.min(abs);
            let modulus = pow_big(p, depth);
            if known.residue() % &modulus == &center % &modulus {
                if exp <= abs {
                    return Ok(Membership::Yes);
                }
                unknown = true;
            }
        }
        Ok(if unknown { Membership::Unknown } else { Membership::No })
    }
}

impl fmt::Display for CompactSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={}; ", self.prime)?;
        match &self.kind {
            SetKind::Balls(bs) => {
                f.write_str("balls: ")?;
                for (i, b) in bs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}+p^{}", b.center, b.exp)?;
                }
            }
            SetKind::Finite(es) => {
                f.write_str("finite: ")?;
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// `p=INT; balls: c+p^k, ...` or `p=INT; finite: r, ...`.
impl FromStr for CompactSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<CompactSet> {
        let (head, body) = s.split_once(';').ok_or_else(|| Error::Parse(format!("missing ';' in {s:?}")))?;
        parse_set_parts(head, body)
    }
}

fn parse_set_parts(head: &str, body: &str) -> Result<CompactSet> {
    let p: u64 = head
        .trim()
        .strip_prefix("p=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::Parse(format!("expected p=INT, got {head:?}")))?;
    let body = body.trim();
    if let Some(rest) = body.strip_prefix("balls:") {
        let balls = rest
            .split(',')
            .map(|b| {
                let bad = || Error::Parse(format!("bad ball {b:?}"));
                let (c, e) = b.split_once('+').ok_or_else(bad)?;
                let center: BigUint = c.trim().parse().map_err(|_| bad())?;
                let exp: u32 = e.trim().strip_prefix("p^").ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
                Ok(Ball { center, exp })
            })
            .collect::<Result<Vec<_>>>()?;
        CompactSet::balls(p, balls)
    } else if let Some(rest) = body.strip_prefix("finite:") {
        let elems = rest.split(',').map(|r| r.parse::<Rat>()).collect::<Result<Vec<_>>>()?;
        CompactSet::finite(p, elems)
    } else {
        Err(Error::Parse(format!("expected 'balls:' or 'finite:', got {body:?}")))
    }
}

/// JSON mirror of the set grammar: `{"p":2,"balls":[{"center":0,"exp":1}]}`
/// or `{"p":3,"finite":[{"num":1,"den":2}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompactSetJson {
    pub p: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balls: Option<Vec<Ball>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finite: Option<Vec<Rat>>,
}

impl From<&CompactSet> for CompactSetJson {
    fn from(s: &CompactSet) -> Self {
        match &s.kind {
            SetKind::Balls(b) => CompactSetJson { p: s.prime, balls: Some(b.clone()), finite: None },
            SetKind::Finite(f) => CompactSetJson { p: s.prime, balls: None, finite: Some(f.clone()) },
        }
    }
}

impl TryFrom<CompactSetJson> for CompactSet {
    type Error = Error;
    fn try_from(j: CompactSetJson) -> Result<CompactSet> {
        match (j.balls, j.finite) {
            (Some(b), None) => CompactSet::balls(j.p, b),
            (None, Some(f)) => CompactSet::finite(j.p, f),
            _ => Err(Error::Parse("set needs exactly one of 'balls' or 'finite'".into())),
        }
    }
}

impl Serialize for CompactSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CompactSetJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for CompactSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        CompactSetJson::deserialize(d)?.try_into().map_err(serde::de::Error::custom)
    }
}

/// Component used at every untracked prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DefaultFamily {
    /// `Z_p`
    #[serde(rename = "Zp")]
    Full,
    /// `pZ_p`
    #[serde(rename = "pZp")]
    Pzp,
}

impl DefaultFamily {
    pub fn instantiate(self, p: u64) -> CompactSet {
        match self {
            DefaultFamily::Full => CompactSet::zp(p),
            DefaultFamily::Pzp => CompactSet::pzp(p),
        }
    }
}

impl fmt::Display for DefaultFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DefaultFamily::Full => "Zp",
            DefaultFamily::Pzp => "pZp",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdelicSet {
    tracked: BTreeMap<u64, CompactSet>,
    default: DefaultFamily,
}

impl AdelicSet {
    pub fn new(default: DefaultFamily, sets: impl IntoIterator<Item = CompactSet>) -> Result<AdelicSet> {
        let mut tracked = BTreeMap::new();
        for s in sets {
            let p = s.prime();
            if tracked.insert(p, s).is_some() {
                return Err(Error::Invalid(format!("prime {p} listed twice")));
            }
        }
        Ok(AdelicSet { tracked, default })
    }

    /// `Ẑ` itself: every component `Z_p`.
    pub fn full() -> AdelicSet {
        AdelicSet { tracked: BTreeMap::new(), default: DefaultFamily::Full }
    }

    pub fn default_family(&self) -> DefaultFamily {
        self.default
    }

    pub fn tracked(&self) -> &BTreeMap<u64, CompactSet> {
        &self.tracked
    }

    pub fn is_tracked(&self, p: u64) -> bool {
        self.tracked.contains_key(&p)
    }

    pub fn tracked_primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.tracked.keys().copied()
    }

    /// The component `E_p`.
    pub fn component(&self, p: u64) -> Result<CompactSet> {
        check_prime(p)?;
        Ok(match self.tracked.get(&p) {
            Some(s) => s.clone(),
            None => self.default.instantiate(p),
        })
    }
}

impl fmt::Display for AdelicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "default={}", self.default)?;
        for s in self.tracked.values() {
            write!(f, "; {s}")?;
        }
        Ok(())
    }
}

/// `default=(Zp|pZp) (; set)*`, where each set is `p=INT; balls: ...`.
impl FromStr for AdelicSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<AdelicSet> {
        let mut parts = s.split(';');
        let head = parts.next().unwrap_or_default().trim();
        let default = match head.strip_prefix("default=").map(str::trim) {
            Some("Zp") => DefaultFamily::Full,
            Some("pZp") => DefaultFamily::Pzp,
            _ => return Err(Error::Parse(format!("expected default=Zp|pZp, got {head:?}"))),
        };
        let rest: Vec<&str> = parts.collect();
        if !rest.len().is_multiple_of(2) {
            return Err(Error::Parse(format!("unbalanced set list in {s:?}")));
        }
        let sets = rest.chunks(2).map(|c| parse_set_parts(c[0], c[1])).collect::<Result<Vec<_>>>()?;
        AdelicSet::new(default, sets)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdelicSetJson {
    pub default: DefaultFamily,
    #[serde(default)]
    pub sets: Vec<CompactSet>,
}

impl Serialize for AdelicSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AdelicSetJson { default: self.default, sets: self.tracked.values().cloned().collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AdelicSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = AdelicSetJson::deserialize(d)?;
        AdelicSet::new(j.default, j.sets).map_err(serde::de::Error::custom)
    }
}
