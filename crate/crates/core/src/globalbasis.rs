//! Characteristic ideals, coefficientwise CRT, regular bases of
//! `Int_Q(E, Ẑ)`, and global membership.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
pub use crate::poly::RatPoly;
use crate::pordering::{lift_numerator, local_membership, p_ordering, POrdering};
use crate::rat::{mod_inverse, rat_mod, pow_big, prime_factors, primes_up_to, strip_primes, valp_factorial, Rat};
use crate::sets::{AdelicSet, CompactSet, DefaultFamily, SetKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum CharOutcome {
    /// `I_n = (1/D) Z` with `D = ∏ p^{n_p}`; `factors` lists the `n_p > 0`.
    Fractional {
        #[serde(with = "crate::json::biguint")]
        denominator: BigUint,
        factors: BTreeMap<u64, u64>,
    },
    NotFinitelyGenerated { witness: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CharIdeal {
    pub degree: usize,
    pub outcome: CharOutcome,
}

impl CharIdeal {
    pub fn denominator(&self) -> Option<&BigUint> {
        match &self.outcome {
            CharOutcome::Fractional { denominator, .. } => Some(denominator),
            CharOutcome::NotFinitelyGenerated { .. } => None,
        }
    }
}

/// Ordering of the `p`-component with at least `n + 1` points. The valuation
/// sequence is exact regardless of the working precision, so the precision
/// is raised if the requested one cannot hold it.
pub(crate) fn component_ordering(s: &CompactSet, n: usize, precision: u32) -> Result<POrdering> {
    let start = p_ordering(s, 0, precision.max(1))?;
    start.extend_unbounded(n)
}

fn check_sizes(a: &AdelicSet, n: usize) -> Result<()> {
    for (p, s) in a.tracked() {
        if let SetKind::Finite(e) = s.kind() {
            if e.len() <= n {
                return Err(Error::SetTooSmall { prime: *p, size: e.len(), degree: n });
            }
        }
    }
    Ok(())
}

fn pzp_witness(n: usize) -> Error {
    Error::NotFinitelyGenerated {
        degree: n,
        witness: "every untracked prime p has #(pZ_p mod p) = 1 <= n, so w_p(n) > 0 for infinitely many p".into(),
    }
}

/// `I_n(E)` as `(1/∏ p^{w_p(n)}) Z`, or the reason it is not finitely
/// generated.
pub fn char_ideal(a: &AdelicSet, n: usize, precision: u32) -> Result<CharIdeal> {
    check_sizes(a, n)?;
    if n >= 1 && a.default_family() == DefaultFamily::Pzp {
        let Error::NotFinitelyGenerated { witness, .. } = pzp_witness(n) else { unreachable!() };
        return Ok(CharIdeal { degree: n, outcome: CharOutcome::NotFinitelyGenerated { witness } });
    }
    let mut factors = BTreeMap::new();
    for (p, s) in a.tracked() {
        let o = component_ordering(s, n, precision)?;
        if o.w()[n] > 0 {
            factors.insert(*p, o.w()[n]);
        }
    }
    for p in primes_up_to(n as u64) {
        if !a.is_tracked(p) {
            let e = valp_factorial(n as u64, p);
            if e > 0 {
                factors.insert(p, e);
            }
        }
    }
    let denominator = factors.iter().fold(BigUint::one(), |acc, (p, e)| acc * pow_big(*p, *e as u32));
    Ok(CharIdeal { degree: n, outcome: CharOutcome::Fractional { denominator, factors } })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrtPart {
    pub prime: u64,
    pub exponent: u32,
    pub poly: RatPoly,
}

impl CrtPart {
    pub fn new(prime: u64, exponent: u32, poly: RatPoly) -> CrtPart {
        CrtPart { prime, exponent, poly }
    }
}

/// A polynomial `f` with `f ≡ f_p (mod p^k Z_(p)[x])` for every part and
/// `f ∈ Z_(q)[x]` at every other prime `q`.
///
/// With `e_p` the largest power of `p` in a denominator of `f_p` and
/// `D = ∏ p^{e_p}`, each coefficient of `D·f` is fixed modulo `p^{k+e_p}` and
/// the least non-negative solution `C` of the system is taken; `f = C/D`.
pub fn crt_combine(parts: &[CrtPart], degree_cap: usize) -> Result<RatPoly> {
    let mut seen = std::collections::BTreeSet::new();
    for part in parts {
        if !seen.insert(part.prime) {
            return Err(Error::Invalid(format!("prime {} appears twice", part.prime)));
        }
        if part.exponent == 0 {
            return Err(Error::Invalid("CRT exponent must be positive".into()));
        }
        if let Some(d) = part.poly.degree() {
            if d > degree_cap {
                return Err(Error::DegreeOverflow { degree: d, cap: degree_cap });
            }
        }
    }
    if parts.is_empty() {
        return Ok(RatPoly::zero());
    }
    let shifts: Vec<u32> = parts
        .iter()
        .map(|pt| pt.poly.min_valuation(pt.prime).map_or(0, |v| (-v).max(0) as u32))
        .collect();
    let d: BigInt = parts
        .iter()
        .zip(&shifts)
        .fold(BigInt::one(), |acc, (pt, e)| acc * BigInt::from(pow_big(pt.prime, *e)));
    let d_rat = Rat::from(d.clone());
    let moduli: Vec<BigInt> =
        parts.iter().zip(&shifts).map(|(pt, e)| BigInt::from(pow_big(pt.prime, pt.exponent + e))).collect();
    let total: BigInt = moduli.iter().product();
    // CRT idempotents: E_i ≡ 1 mod m_i, ≡ 0 mod m_j
    let idempotents: Vec<BigInt> = moduli
        .iter()
        .map(|m| {
            let rest = &total / m;
            let inv = mod_inverse(&rest, m).expect("coprime moduli");
            rest * inv
        })
        .collect();
    let len = parts.iter().map(|pt| pt.poly.coeffs().len()).max().unwrap_or(0);
    let mut coeffs = Vec::with_capacity(len);
    for i in 0..len {
        let mut c = BigInt::zero();
        for ((pt, m), idem) in parts.iter().zip(&moduli).zip(&idempotents) {
            let target = &d_rat * &pt.poly.coeff(i);
            let r = BigInt::from(rat_mod(&target, pt.prime, &m.to_biguint().unwrap())?);
            c += r * idem;
        }
        coeffs.push(Rat::new(c.mod_floor(&total), d.clone()).unwrap());
    }
    Ok(RatPoly::new(coeffs))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasisFamily {
    pub set: AdelicSet,
    pub polys: Vec<RatPoly>,
    /// Precision of the ordering used at each tracked prime.
    pub certified_depth: BTreeMap<u64, u32>,
}

/// `(u, v)` with `u·a + v·b = 1` and `u` in `(-b/2, b/2]`.
fn bezout_minimal(a: &BigInt, b: &BigInt) -> (BigInt, BigInt) {
    if b.is_one() {
        return (BigInt::zero(), BigInt::one());
    }
    let mut u = mod_inverse(&a.mod_floor(b), b).expect("lc in lowest terms");
    if &(&u * 2) > b {
        u -= b;
    }
    let v = (BigInt::one() - &u * a) / b;
    (u, v)
}

/// A regular basis `g_0, ..., g_D` of `Int_Q(E, Ẑ)`.
///
/// For each degree `n`, the local rational lifts at the primes where
/// `#(E_p mod p) <= n` are glued modulo `p` into `f_n`; with
/// `lc(f_n) = a/b`, `g_n = u f_n + v x^n` has leading coefficient `1/b`.
pub fn regular_basis(a: &AdelicSet, max_degree: usize, precision: u32) -> Result<BasisFamily> {
    check_sizes(a, max_degree)?;
    if max_degree >= 1 && a.default_family() == DefaultFamily::Pzp {
        return Err(pzp_witness(1));
    }
    let mut orderings: BTreeMap<u64, POrdering> = BTreeMap::new();
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for (p, s) in a.tracked() {
        orderings.insert(*p, component_ordering(s, max_degree, precision)?);
        counts.insert(*p, s.count_mod_p());
    }
    for p in primes_up_to(max_degree as u64) {
        if !a.is_tracked(p) {
            orderings.insert(p, component_ordering(&CompactSet::zp(p), max_degree, precision)?);
            counts.insert(p, p as usize);
        }
    }
    let mut polys = Vec::with_capacity(max_degree + 1);
    for n in 0..=max_degree {
        let parts: Vec<CrtPart> = orderings
            .iter()
            .filter(|(p, _)| counts[*p] <= n)
            .map(|(p, o)| {
                let h = lift_numerator(o, n)?;
                let scale = Rat::new(1, BigInt::from(pow_big(*p, o.w()[n] as u32))).unwrap();
                Ok(CrtPart::new(*p, 1, h.scale(&scale)))
            })
            .collect::<Result<_>>()?;
        let g = if parts.is_empty() {
            RatPoly::monomial(Rat::one(), n)
        } else {
            let f = crt_combine(&parts, n)?;
            let lc = f.leading();
            let (u, v) = bezout_minimal(lc.numer(), lc.denom());
            f.scale(&Rat::from(u)).add(&RatPoly::monomial(Rat::from(v), n))
        };
        polys.push(g);
    }
    let certified_depth = a.tracked().keys().map(|p| (*p, orderings[p].precision())).collect();
    Ok(BasisFamily { set: a.clone(), polys, certified_depth })
}

/// Is `f ∈ Int_Q(E, Ẑ)`?
pub fn global_membership(f: &RatPoly, a: &AdelicSet, precision: u32) -> Result<bool> {
    for s in a.tracked().values() {
        if !local_membership(f, s, precision)? {
            return Ok(false);
        }
    }
    let tracked: Vec<u64> = a.tracked_primes().collect();
    match a.default_family() {
        DefaultFamily::Full => {
            for b in f.binomial_coordinates() {
                let rest = strip_primes(b.denom(), tracked.iter().copied());
                if !rest.is_one() {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        DefaultFamily::Pzp => {
            let den = strip_primes(&f.denominator(), tracked.iter().copied());
            for q in prime_factors(&den.to_biguint().unwrap()) {
                let q = u64::try_from(&q)
                    .map_err(|_| Error::Invalid(format!("denominator prime {q} exceeds 64 bits")))?;
                if !local_membership(f, &CompactSet::pzp(q), precision)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn poly(s: &str) -> RatPoly {
        s.parse().unwrap()
    }

    #[test]
    fn char_ideal_examples() {
        let full = AdelicSet::full();
        let c = char_ideal(&full, 4, 32).unwrap();
        assert_eq!(c.denominator(), Some(&BigUint::from(24u32)));
        let pzp: AdelicSet = "default=pZp".parse().unwrap();
        assert!(matches!(char_ideal(&pzp, 1, 32).unwrap().outcome, CharOutcome::NotFinitelyGenerated { .. }));
        assert_eq!(char_ideal(&pzp, 0, 32).unwrap().denominator(), Some(&BigUint::one()));
        let small: AdelicSet = "default=Zp; p=2; finite: 0, 1".parse().unwrap();
        assert!(matches!(char_ideal(&small, 2, 32), Err(Error::SetTooSmall { .. })));
    }

    #[test]
    fn crt_examples() {
        let out = crt_combine(&[CrtPart::new(2, 1, poly("x+1")), CrtPart::new(3, 1, poly("x"))], 1).unwrap();
        assert_eq!(out, poly("x+3"));
        assert_eq!(crt_combine(&[CrtPart::new(2, 3, poly("3*x"))], 1).unwrap(), poly("3*x"));
        assert_eq!(crt_combine(&[], 4).unwrap(), RatPoly::zero());
        assert!(matches!(
            crt_combine(&[CrtPart::new(2, 1, poly("x^3"))], 2),
            Err(Error::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn crt_with_denominators() {
        let f2 = poly("1/2*x^2+1/2*x");
        let f3 = poly("1/3*x+2");
        let out = crt_combine(&[CrtPart::new(2, 2, f2.clone()), CrtPart::new(3, 1, f3.clone())], 2).unwrap();
        for (p, k, f) in [(2u64, 2i64, &f2), (3, 1, &f3)] {
            let diff = out.sub(f);
            assert!(diff.min_valuation(p).is_none_or(|v| v >= k));
        }
        assert!(strip_primes(&out.denominator(), [2, 3]).is_one());
    }

    #[test]
    fn binomial_lcs() {
        let b = regular_basis(&AdelicSet::full(), 3, 32).unwrap();
        let lcs: Vec<Rat> = b.polys.iter().map(RatPoly::leading).collect();
        assert_eq!(lcs, vec![Rat::from(1), Rat::from(1), Rat::new(1, 2).unwrap(), Rat::new(1, 6).unwrap()]);
        assert_eq!(b.polys[0], RatPoly::one());
    }

    #[test]
    fn pzp_component_basis() {
        let a: AdelicSet = "default=Zp; p=3; balls: 0+p^1".parse().unwrap();
        let b = regular_basis(&a, 4, 32).unwrap();
        assert_eq!(b.polys[1].leading(), Rat::new(1, 3).unwrap());
        for g in &b.polys {
            assert!(global_membership(g, &a, 32).unwrap(), "{g}");
        }
    }

    #[test]
    fn membership_examples() {
        let full = AdelicSet::full();
        assert!(global_membership(&RatPoly::binomial(2), &full, 32).unwrap());
        assert!(!global_membership(&poly("1/3*x"), &full, 32).unwrap());
        let pzp: AdelicSet = "default=pZp".parse().unwrap();
        assert!(global_membership(&poly("1/3*x"), &pzp, 32).unwrap());
        assert!(!global_membership(&poly("1/9*x"), &pzp, 32).unwrap());
    }

    #[test]
    fn bezout() {
        let (u, v) = bezout_minimal(&BigInt::from(7), &BigInt::from(12));
        assert_eq!(&u * 7 + &v * 12, BigInt::one());
        assert!(u.abs() <= BigInt::from(6));
    }
}
