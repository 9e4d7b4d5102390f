//! Bhargava p-orderings, their valuation sequences `w_p(n)`, and the two
//! local bases built from them.
//!
//! Ordering points are kept as exact rationals lying in the set: for ball
//! unions the greedy step always picks a non-negative integer, for finite sets
//! an element of the set. Every basis polynomial is therefore an exact element
//! of `Q[x]`, and p-adic views are produced by embedding at the ordering's
//! precision.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{embed, PAdicInt, PAdicNumber};
use crate::poly::RatPoly;
use crate::rat::{mod_inverse, pow_big, split_p, Rat, Valuation};
use crate::sets::{CompactSet, SetKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct POrdering {
    prime: u64,
    set: CompactSet,
    points: Vec<Rat>,
    w: Vec<u64>,
    precision: u32,
}

/// Greedy p-ordering `a_0, ..., a_length` of `s`.
///
/// Among minimizers the smallest non-negative integer (ball unions) or the
/// element with the smallest residue mod `p^precision` (finite sets) is taken.
/// Fails with `PrecisionExhausted` once a step's minimal valuation reaches
/// `precision`.
pub fn p_ordering(s: &CompactSet, length: usize, precision: u32) -> Result<POrdering> {
    if precision == 0 {
        return Err(Error::Invalid("precision must be positive".into()));
    }
    let empty = POrdering { prime: s.prime(), set: s.clone(), points: Vec::new(), w: Vec::new(), precision };
    empty.grow(length + 1, Some(precision))
}

impl POrdering {
    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn set(&self) -> &CompactSet {
        &self.set
    }

    pub fn points(&self) -> &[Rat] {
        &self.points
    }

    pub fn w(&self) -> &[u64] {
        &self.w
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Index of the last point.
    pub fn length(&self) -> usize {
        self.points.len() - 1
    }

    /// Points as residues modulo `p^N`.
    pub fn residues(&self) -> Vec<PAdicInt> {
        self.points
            .iter()
            .map(|a| PAdicInt::from_rat(a, self.prime, self.precision).expect("points are p-integral"))
            .collect()
    }

    pub fn max_w(&self) -> u64 {
        self.w.iter().copied().max().unwrap_or(0)
    }

    /// A longer ordering sharing this one as a prefix, at the same precision.
    pub fn extend(&self, length: usize) -> Result<POrdering> {
        self.grow(length + 1, Some(self.precision))
    }

    /// Like [`extend`](Self::extend) but raises the precision as far as the
    /// new valuations require instead of failing.
    pub fn extend_unbounded(&self, length: usize) -> Result<POrdering> {
        let mut o = self.grow(length + 1, None)?;
        o.precision = o.precision.max(o.max_w() as u32 + 1);
        Ok(o)
    }

    fn grow(&self, count: usize, cap: Option<u32>) -> Result<POrdering> {
        let mut out = self.clone();
        if out.points.len() >= count {
            return Ok(out);
        }
        match self.set.kind().clone() {
            SetKind::Finite(elems) => {
                if count > elems.len() {
                    return Err(Error::LengthExceedsSet { length: count - 1, size: elems.len() });
                }
                while out.points.len() < count {
                    let (a, w) = greedy_finite(&elems, &out.points, self.prime, self.precision, cap)?;
                    out.points.push(a);
                    out.w.push(w);
                }
            }
            SetKind::Balls(balls) => {
                let mut trie = ResidueTrie::new(self.prime);
                for a in &out.points {
                    trie.insert(a.numer().to_biguint().expect("ball points are non-negative integers"));
                }
                while out.points.len() < count {
                    let (a, w) = greedy_balls(&balls, &mut trie, cap)?;
                    trie.insert(a.clone());
                    out.points.push(Rat::from(a));
                    out.w.push(w);
                }
            }
        }
        Ok(out)
    }

    /// The first `len` points.
    pub fn prefix(&self, len: usize) -> POrdering {
        let len = len.clamp(1, self.points.len());
        POrdering { points: self.points[..len].to_vec(), w: self.w[..len].to_vec(), ..self.clone() }
    }

    /// `∏_{k<n} (a_n - a_k)`.
    pub fn step_product(&self, n: usize) -> Rat {
        let an = &self.points[n];
        self.points[..n].iter().fold(Rat::one(), |acc, ak| acc * (an - ak))
    }
}

// ---------------------------------------------------------------------------
// greedy steps

fn greedy_finite(elems: &[Rat], chosen: &[Rat], p: u64, tie_depth: u32, cap: Option<u32>) -> Result<(Rat, u64)> {
    let mut best: Option<(u64, BigUint, &Rat)> = None;
    for y in elems {
        if chosen.contains(y) {
            continue;
        }
        let mut value = 0u64;
        for a in chosen {
            value += (y - a).valp(p).finite().expect("distinct points") as u64;
        }
        let key = y.residue(p, tie_depth)?;
        let better = match &best {
            None => true,
            Some((bv, bk, by)) => (value, &key, y) < (*bv, bk, *by),
        };
        if better {
            best = Some((value, key, y));
        }
    }
    let (value, _, y) = best.expect("count checked against set size");
    check_cap(value, cap)?;
    Ok((y.clone(), value))
}

fn check_cap(value: u64, cap: Option<u32>) -> Result<()> {
    match cap {
        Some(c) if value >= c as u64 => Err(Error::PrecisionExhausted(format!(
            "minimal step valuation {value} reaches precision {c}"
        ))),
        _ => Ok(()),
    }
}

/// Counts of chosen points in each residue class `r mod p^j`, `j >= 1`.
struct ResidueTrie {
    p: u64,
    depth: u32,
    points: Vec<BigUint>,
    counts: HashMap<(u32, BigUint), u64>,
}

impl ResidueTrie {
    fn new(p: u64) -> Self {
        ResidueTrie { p, depth: 0, points: Vec::new(), counts: HashMap::new() }
    }

    fn insert(&mut self, a: BigUint) {
        for j in 1..=self.depth {
            *self.counts.entry((j, &a % pow_big(self.p, j))).or_default() += 1;
        }
        self.points.push(a);
    }

    fn deepen(&mut self, depth: u32) {
        while self.depth < depth {
            self.depth += 1;
            let m = pow_big(self.p, self.depth);
            for a in &self.points {
                *self.counts.entry((self.depth, a % &m)).or_default() += 1;
            }
        }
    }

    fn count(&mut self, depth: u32, r: &BigUint) -> u64 {
        if depth == 0 {
            return self.points.len() as u64;
        }
        self.deepen(depth);
        self.counts.get(&(depth, r.clone())).copied().unwrap_or(0)
    }
}

/// One greedy step over a union of balls.
///
/// For `y` in the class `r mod p^d` that holds none of the chosen points,
/// `Σ_k v_p(y - a_k)` equals `Σ_{j<=d} #{k : a_k ≡ r mod p^j}`; for classes
/// that do hold points the same sum is a lower bound. Classes are refined
/// level by level until every class that could still beat the best empty
/// class has been resolved. The smallest integer of an empty class is its
/// residue, so the result is the least non-negative integer minimizer.
fn greedy_balls(balls: &[crate::sets::Ball], trie: &mut ResidueTrie, cap: Option<u32>) -> Result<(BigUint, u64)> {
    let p = trie.p;
    let mut frontier: Vec<(BigUint, u32, u64)> = Vec::new();
    for b in balls {
        let mut lb = 0;
        for j in 1..=b.exp {
            lb += trie.count(j, &(&b.center % pow_big(p, j)));
        }
        frontier.push((b.center.clone(), b.exp, lb));
    }
    let mut best: Option<(u64, BigUint)> = None;
    let mut starved = false;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (r, d, lb) in frontier {
            if let Some((bv, br)) = &best {
                if lb > *bv || (lb == *bv && &r >= br) {
                    continue;
                }
            }
            let inside = trie.count(d, &r);
            if inside == 0 {
                let better = match &best {
                    None => true,
                    Some((bv, br)) => (lb, &r) < (*bv, br),
                };
                if better {
                    best = Some((lb, r));
                }
                continue;
            }
            if let Some(c) = cap {
                if lb >= c as u64 {
                    starved = true;
                    continue;
                }
            }
            let step = pow_big(p, d);
            for j in 0..p {
                let child = &r + &step * j;
                let c = trie.count(d + 1, &child);
                next.push((child, d + 1, lb + c));
            }
        }
        frontier = next;
    }
    match best {
        Some((v, r)) => {
            check_cap(v, cap)?;
            Ok((r, v))
        }
        None => {
            debug_assert!(starved);
            Err(Error::PrecisionExhausted("every candidate class reaches the precision cap".into()))
        }
    }
}

// ---------------------------------------------------------------------------
// local bases

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum BasisForm {
    /// Coefficients of `f_{n,p} = ∏_{k<n} (x - a_k)/(a_n - a_k)` in `Q_p`.
    PAdicCoeffs(Vec<PAdicNumber>),
    /// `h_{n,p} / p^{w_p(n)}` with `h_{n,p} ∈ Z[x]` monic.
    RationalLift(RatPoly),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalBasisPoly {
    pub degree: usize,
    pub form: BasisForm,
}

/// The exact polynomial `f_{n,p}(x) = ∏_{k<n} (x - a_k)/(a_n - a_k)` over Q.
pub fn basis_poly(o: &POrdering, n: usize) -> Result<RatPoly> {
    check_degree(o, n)?;
    let g = RatPoly::from_roots(&o.points[..n]);
    Ok(g.scale(&(Rat::one() / o.step_product(n))))
}

fn check_degree(o: &POrdering, n: usize) -> Result<()> {
    if n > o.length() {
        Err(Error::Invalid(format!("degree {n} exceeds ordering length {}", o.length())))
    } else {
        Ok(())
    }
}

/// `f_{n,p}` with coefficients embedded in `Q_p` at the ordering's precision.
pub fn local_basis(o: &POrdering, n: usize) -> Result<LocalBasisPoly> {
    let f = basis_poly(o, n)?;
    let coeffs = f.coeffs().iter().map(|c| embed(c, o.prime, o.precision)).collect();
    Ok(LocalBasisPoly { degree: n, form: BasisForm::PAdicCoeffs(coeffs) })
}

/// `h_{n,p}/p^{w_p(n)}` where `h_{n,p}` is monic with lower coefficients the
/// canonical residues of `g_{n,p} = ∏_{k<n}(x - a_k)` modulo `p^{w_p(n)}`.
pub fn rational_lift(o: &POrdering, n: usize) -> Result<LocalBasisPoly> {
    let h = lift_numerator(o, n)?;
    let scale = Rat::new(1, BigInt::from(pow_big(o.prime, o.w[n] as u32))).unwrap();
    Ok(LocalBasisPoly { degree: n, form: BasisForm::RationalLift(h.scale(&scale)) })
}

/// Just the monic integer polynomial `h_{n,p}`.
pub fn lift_numerator(o: &POrdering, n: usize) -> Result<RatPoly> {
    check_degree(o, n)?;
    let w = o.w[n];
    if (o.precision as u64) < w {
        return Err(Error::PrecisionExhausted(format!("w({n}) = {w} exceeds precision {}", o.precision)));
    }
    let g = RatPoly::from_roots(&o.points[..n]);
    let mut coeffs: Vec<Rat> = g.coeffs()[..n]
        .iter()
        .map(|c| c.residue(o.prime, w as u32).map(Rat::from))
        .collect::<Result<_>>()?;
    coeffs.push(Rat::one());
    Ok(RatPoly::new(coeffs))
}

/// Evaluates a polynomial with p-adic coefficients at a p-adic point.
pub fn padic_eval(coeffs: &[PAdicNumber], x: &PAdicNumber) -> Result<PAdicNumber> {
    let p = x.prime();
    let mut acc: Option<PAdicNumber> = None;
    for c in coeffs.iter().rev() {
        acc = Some(match acc {
            None => c.clone(),
            Some(a) => a.mul(x)?.add(c)?,
        });
    }
    Ok(acc.unwrap_or_else(|| PAdicNumber::zero(p, i64::MAX / 4)))
}

impl LocalBasisPoly {
    pub fn eval(&self, x: &PAdicNumber) -> Result<PAdicNumber> {
        match &self.form {
            BasisForm::PAdicCoeffs(c) => padic_eval(c, x),
            BasisForm::RationalLift(f) => {
                let c: Vec<PAdicNumber> = f.coeffs().iter().map(|c| embed(c, x.prime(), x.precision().max(1))).collect();
                padic_eval(&c, x)
            }
        }
    }
}

/// Is `f` in `Int(s, Z_p)`? Decided by `f(a_k) ∈ Z_p` for `k <= deg f` along
/// a p-ordering of `s` (all elements when `s` is finite and small).
pub fn local_membership(f: &RatPoly, s: &CompactSet, precision: u32) -> Result<bool> {
    let p = s.prime();
    let deg = f.degree_or_zero();
    let points: Vec<Rat> = match s.kind() {
        SetKind::Finite(elems) if elems.len() <= deg + 1 => elems.clone(),
        _ => p_ordering(s, deg, precision)?.points,
    };
    Ok(points.iter().all(|a| f.eval(a).valp(p) >= Valuation::Finite(0)))
}

// ---------------------------------------------------------------------------
// fast evaluation of f_0..f_L modulo p^N

/// Valuation and unit residue of a nonzero p-integral rational.
pub(crate) fn val_unit(x: &Rat, p: u64, modulus: &BigInt) -> (u64, BigInt) {
    let (vn, un) = split_p(x.numer(), p);
    let (vd, ud) = split_p(x.denom(), p);
    debug_assert!(vd == 0 || vn >= vd);
    let unit = if ud.is_one() {
        un.mod_floor(modulus)
    } else {
        (un * mod_inverse(&ud, modulus).expect("unit")).mod_floor(modulus)
    };
    (vn - vd, unit)
}

/// Evaluates the ordering basis `f_0, ..., f_{L}` modulo `p^N` at arbitrary
/// points of the set, tracking valuations and units separately so no
/// rational with a large denominator is ever formed.
#[derive(Debug, Clone)]
pub struct BasisEvaluator {
    p: u64,
    precision: u32,
    modulus: BigInt,
    points: Vec<Rat>,
    /// `(w(n), unit(∏_{k<n}(a_n - a_k))^{-1} mod p^N)`
    denoms: Vec<(u64, BigInt)>,
}

impl BasisEvaluator {
    pub fn new(o: &POrdering, precision: u32) -> BasisEvaluator {
        let p = o.prime;
        let modulus = BigInt::from(pow_big(p, precision));
        let mut denoms = Vec::with_capacity(o.points.len());
        for n in 0..o.points.len() {
            let mut v = 0u64;
            let mut u = BigInt::one();
            for k in 0..n {
                let (dv, du) = val_unit(&(&o.points[n] - &o.points[k]), p, &modulus);
                v += dv;
                u = (u * du).mod_floor(&modulus);
            }
            debug_assert_eq!(v, o.w[n]);
            let inv = mod_inverse(&u, &modulus).expect("unit");
            denoms.push((v, inv));
        }
        BasisEvaluator { p, precision, modulus, points: o.points.clone(), denoms }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    /// `[f_0(y), ..., f_{count-1}(y)]` modulo `p^N`; fails if some value has
    /// negative valuation, i.e. `y` is outside the set.
    pub fn values(&self, y: &Rat, count: usize) -> Result<Vec<BigInt>> {
        let count = count.min(self.points.len());
        let mut out = Vec::with_capacity(count);
        let mut v = 0u64;
        let mut u = BigInt::one();
        let mut vanished = false;
        for n in 0..count {
            if n > 0 {
                let diff = y - &self.points[n - 1];
                if diff.is_zero() {
                    vanished = true;
                } else if !vanished {
                    let (dv, du) = val_unit(&diff, self.p, &self.modulus);
                    v += dv;
                    u = (u * du).mod_floor(&self.modulus);
                }
            }
            if vanished {
                out.push(BigInt::zero());
                continue;
            }
            let (w, inv) = &self.denoms[n];
            if v < *w {
                return Err(Error::NotInDomain(format!("f_{n}({y}) has negative {}-adic valuation", self.p)));
            }
            let shift = v - w;
            if shift >= self.precision as u64 {
                out.push(BigInt::zero());
            } else {
                let pw = BigInt::from(pow_big(self.p, shift as u32));
                out.push((&u * inv * pw).mod_floor(&self.modulus));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::Ball;

    fn ints(v: &[Rat]) -> Vec<i64> {
        v.iter().map(|r| r.to_string().parse().unwrap()).collect()
    }

    #[test]
    fn z2_ordering_is_natural() {
        let o = p_ordering(&CompactSet::zp(2), 4, 16).unwrap();
        assert_eq!(ints(o.points()), vec![0, 1, 2, 3, 4]);
        assert_eq!(o.w(), &[0, 0, 1, 1, 3]);
    }

    #[test]
    fn finite_set_ordering() {
        let s = CompactSet::finite(2, vec![Rat::from(0), Rat::from(2), Rat::from(4)]).unwrap();
        let o = p_ordering(&s, 2, 8).unwrap();
        assert_eq!(o.w(), &[0, 1, 3]);
        assert!(matches!(p_ordering(&s, 3, 8), Err(Error::LengthExceedsSet { .. })));
    }

    #[test]
    fn pzp_first_step() {
        let o = p_ordering(&CompactSet::pzp(3), 1, 8).unwrap();
        assert_eq!(o.w(), &[0, 1]);
    }

    #[test]
    fn precision_cap() {
        // w(4) = 3 for Z_2, so precision 3 runs out at the fifth point
        assert!(p_ordering(&CompactSet::zp(2), 3, 3).is_ok());
        assert!(matches!(p_ordering(&CompactSet::zp(2), 4, 3), Err(Error::PrecisionExhausted(_))));
        let o = p_ordering(&CompactSet::zp(2), 3, 3).unwrap();
        let long = o.extend_unbounded(8).unwrap();
        assert_eq!(ints(long.points()), (0..=8).collect::<Vec<_>>());
        assert!(long.precision() > long.max_w() as u32);
    }

    #[test]
    fn local_basis_examples() {
        let z2 = p_ordering(&CompactSet::zp(2), 4, 16).unwrap();
        assert_eq!(basis_poly(&z2, 0).unwrap(), RatPoly::one());
        assert_eq!(basis_poly(&z2, 2).unwrap(), RatPoly::binomial(2));
        let s = CompactSet::finite(2, vec![Rat::from(0), Rat::from(2), Rat::from(4)]).unwrap();
        let o = p_ordering(&s, 2, 8).unwrap();
        assert_eq!(basis_poly(&o, 2).unwrap(), "1/8*x^2-1/4*x".parse().unwrap());
        let lb = local_basis(&z2, 2).unwrap();
        let BasisForm::PAdicCoeffs(c) = &lb.form else { panic!() };
        assert_eq!(c.len(), 3);
        assert_eq!(c[2].valuation(), Valuation::Finite(-1));
    }

    #[test]
    fn rational_lift_examples() {
        let z2 = p_ordering(&CompactSet::zp(2), 4, 16).unwrap();
        assert_eq!(lift_numerator(&z2, 2).unwrap(), "x^2+x".parse().unwrap());
        // x^2 + x ≡ x^2 - x (mod 2)
        let LocalBasisPoly { form: BasisForm::RationalLift(f), .. } = rational_lift(&z2, 2).unwrap() else { panic!() };
        assert_eq!(f, "1/2*x^2+1/2*x".parse().unwrap());
        let LocalBasisPoly { form: BasisForm::RationalLift(f), .. } = rational_lift(&z2, 0).unwrap() else { panic!() };
        assert_eq!(f, RatPoly::one());
        let o = p_ordering(&CompactSet::pzp(3), 1, 8).unwrap();
        let LocalBasisPoly { form: BasisForm::RationalLift(f), .. } = rational_lift(&o, 1).unwrap() else { panic!() };
        assert_eq!(f, "1/3*x".parse().unwrap());
        let low = p_ordering(&CompactSet::zp(2), 4, 16).unwrap();
        let starved = POrdering { precision: 2, ..low };
        assert!(matches!(rational_lift(&starved, 4), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn membership_examples() {
        assert!(local_membership(&RatPoly::binomial(3), &CompactSet::zp(5), 16).unwrap());
        let x3: RatPoly = "1/3*x".parse().unwrap();
        assert!(!local_membership(&x3, &CompactSet::zp(3), 16).unwrap());
        assert!(local_membership(&x3, &CompactSet::pzp(3), 16).unwrap());
        let f = CompactSet::finite(3, vec![Rat::from(0), Rat::from(9)]).unwrap();
        assert!(local_membership(&"1/9*x^5".parse().unwrap(), &f, 16).unwrap());
        assert!(local_membership(&"1/59049*x^5".parse().unwrap(), &f, 16).unwrap());
        assert!(!local_membership(&"1/177147*x^5".parse().unwrap(), &f, 16).unwrap());
    }

    #[test]
    fn evaluator_matches_exact_polys() {
        let s = CompactSet::balls(3, vec![Ball::new(1u32, 1), Ball::new(0u32, 2)]).unwrap();
        let o = p_ordering(&s, 12, 32).unwrap();
        let ev = BasisEvaluator::new(&o, 10);
        for y in [0i64, 1, 4, 7, 9, 18, 100, 250] {
            let y = Rat::from(y);
            if !s.contains_rat(&y) {
                continue;
            }
            let fast = ev.values(&y, 13).unwrap();
            for (n, got) in fast.iter().enumerate() {
                let exact = basis_poly(&o, n).unwrap().eval(&y);
                let want = BigInt::from(exact.residue(3, 10).unwrap());
                assert_eq!(got, &want, "n={n} y={y}");
            }
        }
        assert!(ev.values(&Rat::from(2), 13).is_err());
    }
}
