//! One rational polynomial that is simultaneously close to given continuous
//! functions at finitely many primes and integer-valued on the whole set.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::globalbasis::{char_ideal, crt_combine, global_membership, CharOutcome, CrtPart};
use crate::mahler::{expand_with, ExpandOptions, StepFunction};
use crate::poly::RatPoly;
use crate::pordering::p_ordering;
use crate::rat::{pow_big, Rat, Valuation};
use crate::sets::{AdelicSet, CompactSet, SetKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Target {
    pub function: StepFunction,
    /// Required closeness: `v_p(φ(a) - f(a)) >= k` on the whole component.
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproxRequest {
    pub set: AdelicSet,
    pub targets: BTreeMap<u64, Target>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TargetReport {
    pub k: u32,
    /// `min_a v_p(φ(a) - f(a))` over the component, capped at the precision
    /// of the function's values.
    pub achieved: Valuation,
    /// Number of terms of the local expansion that were used.
    pub terms: usize,
    /// Residue depth `k + max w` that the local expansion was certified for.
    pub certificate_depth: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApproxCertificate {
    pub poly: RatPoly,
    pub degree: usize,
    pub closeness: BTreeMap<u64, TargetReport>,
    pub member: bool,
    pub precision: u32,
}

/// Expands each target in the local ordering basis to its closeness
/// exponent, glues the partial sums coefficientwise modulo `p^{max k}`, and
/// re-verifies closeness and membership before returning.
pub fn approximate(r: &ApproxRequest, precision: u32) -> Result<ApproxCertificate> {
    match approximate_once(r, precision, ExpandOptions::default()) {
        Err(e) if e.is_precision_failure() => {
            let opts = ExpandOptions { max_terms: 2 * ExpandOptions::default().max_terms, ..Default::default() };
            approximate_once(r, precision.saturating_mul(2), opts)
        }
        other => other,
    }
}

fn approximate_once(r: &ApproxRequest, precision: u32, opts: ExpandOptions) -> Result<ApproxCertificate> {
    if precision == 0 {
        return Err(Error::Invalid("precision must be positive".into()));
    }
    let mut parts = Vec::new();
    let mut reports = BTreeMap::new();
    let mut big_k = 0;
    for (p, t) in &r.targets {
        if t.k == 0 {
            return Err(Error::Invalid(format!("closeness exponent at {p} must be positive")));
        }
        if t.function.prime() != *p {
            return Err(Error::PrimeMismatch(t.function.prime(), *p));
        }
        let comp = r.set.component(*p)?;
        if t.function.domain().normalize()? != comp.normalize()? {
            return Err(Error::Invalid(format!("function at {p} is not defined on the component of the set")));
        }
        let o = p_ordering(&comp, 0, precision)?;
        let s = expand_with(&t.function, &o, t.k, opts)?;
        parts.push(CrtPart::new(*p, 0, s.partial_sum()?));
        reports.insert(
            *p,
            TargetReport {
                k: t.k,
                achieved: Valuation::Inf,
                terms: s.degree_bound(),
                certificate_depth: s.certificate_depth(),
            },
        );
        big_k = big_k.max(t.k);
    }
    for part in &mut parts {
        part.exponent = big_k;
    }
    let degree = parts.iter().filter_map(|pt| pt.poly.degree()).max().unwrap_or(0);
    if degree >= 1 {
        for n in 1..=degree {
            let c = char_ideal(&r.set, n, precision)?;
            if let CharOutcome::NotFinitelyGenerated { witness } = c.outcome {
                return Err(Error::NotFinitelyGenerated { degree: n, witness });
            }
        }
    }
    let poly = crt_combine(&parts, degree)?;
    let mut failures = Vec::new();
    for (p, t) in &r.targets {
        let achieved = closeness(&poly, &t.function)?;
        if achieved < Valuation::Finite(t.k as i64) {
            failures.push(format!("p={p}: achieved {achieved} < {}", t.k));
        }
        reports.get_mut(p).unwrap().achieved = achieved;
    }
    let member = global_membership(&poly, &r.set, precision)?;
    if !member {
        failures.push("polynomial is not integer-valued on the set".into());
    }
    if !failures.is_empty() {
        return Err(Error::CertificateFailed(failures.join("; ")));
    }
    Ok(ApproxCertificate { degree: poly.degree_or_zero(), poly, closeness: reports, member, precision })
}

/// `min_{a ∈ E} v_p(φ(a) - f(a))`, capped at the precision of `φ`.
///
/// On each class `r + p^d Z_p` with `d` at least the function's modulus and
/// every ball exponent, `φ` is constant, and the minimum of `v_p(g)` over the
/// class for a polynomial `g` of degree `D` is attained among the values at
/// `r + j p^d`, `j = 0..=D`.
pub fn closeness(f: &RatPoly, phi: &StepFunction) -> Result<Valuation> {
    let p = phi.prime();
    let cap = Valuation::Finite(phi.precision() as i64);
    let set: &CompactSet = phi.domain();
    let mut best = cap;
    let mut check = |y: &Rat| -> Result<()> {
        let target = Rat::from(BigInt::from(phi.value_at(y)?.residue().clone()));
        let v = (&f.eval(y) - &target).valp(p);
        best = best.min(v);
        Ok(())
    };
    match set.kind() {
        SetKind::Finite(elems) => {
            for y in elems {
                check(y)?;
            }
        }
        SetKind::Balls(_) => {
            let d = phi.modulus_exp().max(set.max_exp());
            let step = BigInt::from(pow_big(p, d));
            for r in set.residues(d) {
                let base = BigInt::from(r);
                for j in 0..=f.degree_or_zero() {
                    check(&Rat::from(&base + &step * j))?;
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn target(p: u64, m: u32, k: u32, f: impl Fn(&BigUint) -> Rat) -> Target {
        Target { function: StepFunction::sample(&CompactSet::zp(p), m, k.max(m), f).unwrap(), k }
    }

    #[test]
    fn parity() {
        let mut targets = BTreeMap::new();
        targets.insert(2, target(2, 1, 1, |r| Rat::from(BigInt::from(r % 2u32))));
        let cert = approximate(&ApproxRequest { set: AdelicSet::full(), targets }, 32).unwrap();
        assert!(cert.member);
        assert!(cert.closeness[&2].achieved >= Valuation::Finite(1));
        assert!(closeness(&"x".parse().unwrap(), &target(2, 1, 1, |r| Rat::from(BigInt::from(r % 2u32))).function).unwrap() >= Valuation::Finite(1));
    }

    #[test]
    fn square_and_constant() {
        let mut targets = BTreeMap::new();
        targets.insert(2, target(2, 3, 3, |r| Rat::from(BigInt::from(r * r))));
        targets.insert(3, target(3, 2, 2, |_| Rat::from(2)));
        let cert = approximate(&ApproxRequest { set: AdelicSet::full(), targets }, 32).unwrap();
        assert!(cert.member);
        for x in 0..200i64 {
            let v = cert.poly.eval(&Rat::from(x));
            assert!((&v - &Rat::from(x * x)).valp(2) >= Valuation::Finite(3));
            assert!((&v - &Rat::from(2)).valp(3) >= Valuation::Finite(2));
            assert!(v.is_integer());
        }
    }

    #[test]
    fn empty_targets() {
        let cert = approximate(&ApproxRequest { set: AdelicSet::full(), targets: BTreeMap::new() }, 32).unwrap();
        assert_eq!(cert.poly, RatPoly::zero());
        assert!(cert.member);
    }

    #[test]
    fn pzp_needs_fractional_ideals() {
        let set: AdelicSet = "default=pZp".parse().unwrap();
        let mut targets = BTreeMap::new();
        let dom = CompactSet::pzp(2);
        let phi = StepFunction::sample(&dom, 3, 3, |r| Rat::from(BigInt::from(r / 2u32))).unwrap();
        targets.insert(2, Target { function: phi, k: 2 });
        assert!(matches!(
            approximate(&ApproxRequest { set, targets }, 32),
            Err(Error::NotFinitelyGenerated { .. })
        ));
    }
}
