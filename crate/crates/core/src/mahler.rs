//! Expansions of locally constant functions in the basis attached to a
//! p-ordering, with certified truncation.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::adelic::{AdelicOrdering, AdelicPoint};
use crate::error::{Error, Result};
use crate::padic::PAdicInt;
use crate::poly::RatPoly;
use crate::pordering::{basis_poly, BasisEvaluator, POrdering};
use crate::rat::{pow_big, split_p, Rat, Valuation};
use crate::sets::{CompactSet, SetKind};

/// A function on `domain` that only depends on `x mod p^m`, with values
/// known modulo `p^N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepFunction {
    prime: u64,
    domain: CompactSet,
    modulus_exp: u32,
    precision: u32,
    table: BTreeMap<BigUint, PAdicInt>,
}

impl StepFunction {
    /// Checks that the keys are exactly the residues of `domain` mod `p^m`.
    pub fn new(domain: CompactSet, m: u32, precision: u32, table: BTreeMap<BigUint, BigInt>) -> Result<StepFunction> {
        let p = domain.prime();
        if precision == 0 {
            return Err(Error::Invalid("precision must be positive".into()));
        }
        let keys = domain.residues(m);
        if keys.len() != table.len() || !table.keys().all(|k| keys.contains(k)) {
            return Err(Error::Invalid(format!("table keys must be the residues of the domain mod {p}^{m}")));
        }
        let modulus = BigInt::from(pow_big(p, precision));
        let table = table
            .into_iter()
            .map(|(k, v)| (k, PAdicInt::new(p, v.mod_floor(&modulus).to_biguint().unwrap(), precision)))
            .collect();
        Ok(StepFunction { prime: p, domain, modulus_exp: m, precision, table })
    }

    /// Tabulates `f` on the residues of `domain` mod `p^m`, evaluating at
    /// the smallest non-negative integer of each class that lies in a ball of
    /// the domain (for finite domains, at the residue itself). This is only a
    /// faithful picture of `f` when `f` is constant modulo `p^N` on each
    /// residue class, which uniform continuity guarantees for `m` large.
    pub fn sample(domain: &CompactSet, m: u32, precision: u32, f: impl Fn(&BigUint) -> Rat) -> Result<StepFunction> {
        let p = domain.prime();
        let modulus = pow_big(p, m);
        let depth = match domain.kind() {
            SetKind::Balls(_) => m.max(domain.max_exp()),
            SetKind::Finite(_) => m,
        };
        let mut table = BTreeMap::new();
        for rep in domain.residues(depth) {
            if let std::collections::btree_map::Entry::Vacant(e) = table.entry(&rep % &modulus) {
                e.insert(BigInt::from(f(&rep).residue(p, precision)?));
            }
        }
        StepFunction::new(domain.clone(), m, precision, table)
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn domain(&self) -> &CompactSet {
        &self.domain
    }

    pub fn modulus_exp(&self) -> u32 {
        self.modulus_exp
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn table(&self) -> &BTreeMap<BigUint, PAdicInt> {
        &self.table
    }

    /// `φ(y)` for `y` in the domain.
    pub fn value_at(&self, y: &Rat) -> Result<&PAdicInt> {
        let r = y.residue(self.prime, self.modulus_exp)?;
        self.table.get(&r).ok_or_else(|| Error::NotInDomain(format!("{y} is outside the domain")))
    }

    /// Smallest valuation among the values, `Inf` when all vanish mod `p^N`.
    pub fn min_valuation(&self) -> Valuation {
        self.table.values().map(PAdicInt::valuation).min().unwrap_or(Valuation::Inf)
    }
}

#[derive(Serialize, Deserialize)]
struct StepFunctionJson {
    p: u64,
    set: CompactSet,
    m: u32,
    #[serde(rename = "N")]
    precision: u32,
    table: BTreeMap<String, serde_json::Number>,
}

impl Serialize for StepFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let table = self
            .table
            .iter()
            .map(|(k, v)| (k.to_string(), v.residue().to_string().parse().unwrap()))
            .collect();
        StepFunctionJson {
            p: self.prime,
            set: self.domain.clone(),
            m: self.modulus_exp,
            precision: self.precision,
            table,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StepFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = StepFunctionJson::deserialize(d)?;
        if j.p != j.set.prime() {
            return Err(D::Error::custom("prime of 'p' and 'set' differ"));
        }
        let mut table = BTreeMap::new();
        for (k, v) in j.table {
            let k: BigUint = k.parse().map_err(D::Error::custom)?;
            let v: BigInt = v.to_string().parse().map_err(D::Error::custom)?;
            table.insert(k, v);
        }
        StepFunction::new(j.set, j.m, j.precision, table).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MahlerSeries {
    ordering: POrdering,
    coeffs: Vec<BigUint>,
    precision: u32,
    certified: bool,
    certificate_depth: u64,
}

impl MahlerSeries {
    pub fn prime(&self) -> u64 {
        self.ordering.prime()
    }

    pub fn ordering(&self) -> &POrdering {
        &self.ordering
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    /// `N + max w(n)` over the materialized terms: agreement on residues
    /// to this depth implies agreement to `p^{-N}` on the whole domain.
    pub fn certificate_depth(&self) -> u64 {
        self.certificate_depth
    }

    pub fn coeffs(&self) -> Vec<PAdicInt> {
        self.coeffs.iter().map(|c| PAdicInt::new(self.prime(), c.clone(), self.precision)).collect()
    }

    /// Coefficient residues in `[0, p^N)`.
    pub fn coeff_residues(&self) -> &[BigUint] {
        &self.coeffs
    }

    /// Number of terms up to the last nonzero coefficient.
    pub fn degree_bound(&self) -> usize {
        self.coeffs.iter().rposition(|c| !c.is_zero()).map_or(0, |i| i + 1)
    }

    /// `Σ c_n f_n` as an exact polynomial over Q (trailing zero terms dropped).
    pub fn partial_sum(&self) -> Result<RatPoly> {
        let used = self.degree_bound();
        let pts = self.ordering.points();
        let mut acc = RatPoly::zero();
        // ∏_{k<n} (x - a_k), grown one factor at a time
        let mut prod = RatPoly::one();
        for (n, c) in self.coeffs[..used].iter().enumerate() {
            if n > 0 {
                prod = prod.mul_linear(&pts[n - 1]);
            }
            if !c.is_zero() {
                let scale = Rat::from(c.clone()) / self.ordering.step_product(n);
                acc = acc.add(&prod.scale(&scale));
            }
        }
        Ok(acc)
    }
}

impl Serialize for MahlerSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let points: Vec<serde_json::Value> = self.ordering.points()[..self.coeffs.len()]
            .iter()
            .map(|a| serde_json::to_value(a).unwrap())
            .collect();
        let coeffs: Vec<serde_json::Number> = self.coeffs.iter().map(|c| c.to_string().parse().unwrap()).collect();
        let mut st = s.serialize_struct("MahlerSeries", 7)?;
        st.serialize_field("p", &self.prime())?;
        st.serialize_field("points", &points)?;
        st.serialize_field("w", &self.ordering.w()[..self.coeffs.len()])?;
        st.serialize_field("coeffs", &coeffs)?;
        st.serialize_field("N", &self.precision)?;
        st.serialize_field("certified", &self.certified)?;
        st.serialize_field("M", &self.certificate_depth)?;
        st.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpandOptions {
    /// Consecutive zero coefficients required before a certificate attempt;
    /// `None` means `p^m`.
    pub window: Option<usize>,
    /// Hard cap on the number of terms.
    pub max_terms: usize,
}

impl Default for ExpandOptions {
    fn default() -> Self {
        ExpandOptions { window: None, max_terms: 4096 }
    }
}

pub fn expand(phi: &StepFunction, o: &POrdering, precision: u32) -> Result<MahlerSeries> {
    expand_with(phi, o, precision, ExpandOptions::default())
}

fn check_domain(phi: &StepFunction, o: &POrdering) -> Result<()> {
    if phi.domain.normalize()? != o.set().normalize()? {
        return Err(Error::Invalid("ordering and function live on different sets".into()));
    }
    Ok(())
}

/// Coefficients `c_n = φ(a_n) - Σ_{k<n} c_k f_k(a_n)` until the tail
/// vanishes modulo `p^N` and the partial sum is verified against `φ`.
pub fn expand_with(phi: &StepFunction, o: &POrdering, precision: u32, opts: ExpandOptions) -> Result<MahlerSeries> {
    check_domain(phi, o)?;
    if precision == 0 {
        return Err(Error::Invalid("precision must be positive".into()));
    }
    if precision > phi.precision {
        return Err(Error::PrecisionExhausted(format!(
            "values are known mod p^{}, expansion asked for p^{precision}",
            phi.precision
        )));
    }
    let p = phi.prime;
    let modulus = BigInt::from(pow_big(p, precision));
    let finite_size = o.set().size();
    let window = match opts.window {
        Some(w) => w.max(1),
        None => pow_big(p, phi.modulus_exp).to_usize().unwrap_or(usize::MAX).min(opts.max_terms),
    };
    let mut ord = o.clone();
    let mut ev: Option<BasisEvaluator> = None;
    let mut coeffs: Vec<BigInt> = Vec::new();
    let mut zero_run = 0usize;
    let mut last_attempt = 0usize;
    loop {
        let n = coeffs.len();
        let done_finite = finite_size == Some(n);
        if done_finite || (finite_size.is_none() && zero_run >= window && n - last_attempt >= window) {
            last_attempt = n;
            let evr = ev.as_ref().expect("at least one term computed");
            if certify(phi, &ord, evr, &coeffs, &modulus)? {
                let certificate_depth = precision as u64 + ord.w()[..n].iter().copied().max().unwrap_or(0);
                ord = truncate_ordering(&ord, n);
                return Ok(MahlerSeries {
                    ordering: ord,
                    coeffs: coeffs.into_iter().map(|c| c.to_biguint().unwrap()).collect(),
                    precision,
                    certified: true,
                    certificate_depth,
                });
            }
            if done_finite {
                return Err(Error::CertificateFailed("interpolation on every point does not reproduce the table".into()));
            }
        }
        if n >= opts.max_terms {
            return Err(Error::CertificateFailed(format!(
                "no verified truncation within {} terms at precision {precision}",
                opts.max_terms
            )));
        }
        if ev.as_ref().is_none_or(|e| e.len() <= n) {
            let target = match finite_size {
                Some(s) => s,
                None => (2 * n + window + 1).min(opts.max_terms + 1).max(n + 1),
            };
            if ord.points().len() < target {
                ord = ord.extend_unbounded(target - 1)?;
            }
            ev = Some(BasisEvaluator::new(&ord, precision));
        }
        let evr = ev.as_ref().unwrap();
        let a = &ord.points()[n];
        let vals = evr.values(a, n)?;
        let mut c = BigInt::from(phi.value_at(a)?.residue().clone());
        for (ck, fk) in coeffs.iter().zip(&vals) {
            c -= ck * fk;
        }
        let c = c.mod_floor(&modulus);
        zero_run = if c.is_zero() { zero_run + 1 } else { 0 };
        coeffs.push(c);
    }
}

fn truncate_ordering(o: &POrdering, len: usize) -> POrdering {
    if o.points().len() <= len.max(1) {
        return o.clone();
    }
    o.prefix(len.max(1))
}

/// Does `Σ c_n f_n ≡ φ (mod p^N)` hold on the whole domain?
///
/// For a finite domain every element is checked. For a union of balls, on
/// each class `r + p^d Z_p` (`d` at least `m` and every ball exponent) the
/// polynomial `(S - φ(r))/p^N` is integer-valued iff it is integral at
/// `r, r + p^d, ..., r + deg·p^d`, which form a p-ordering of the class.
fn certify(phi: &StepFunction, o: &POrdering, ev: &BasisEvaluator, coeffs: &[BigInt], modulus: &BigInt) -> Result<bool> {
    let used = coeffs.iter().rposition(|c| !c.is_zero()).map_or(0, |i| i + 1);
    let sum_at = |y: &Rat| -> Result<BigInt> {
        let vals = ev.values(y, used)?;
        let mut s = BigInt::zero();
        for (c, f) in coeffs[..used].iter().zip(&vals) {
            s += c * f;
        }
        Ok(s.mod_floor(modulus))
    };
    match o.set().kind() {
        SetKind::Finite(elems) => {
            for y in elems {
                let want = BigInt::from(phi.value_at(y)?.residue().clone()).mod_floor(modulus);
                if sum_at(y)? != want {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        SetKind::Balls(_) => {
            let p = phi.prime;
            let d = phi.modulus_exp.max(o.set().max_exp());
            let step = BigInt::from(pow_big(p, d));
            for r in o.set().residues(d) {
                let base = BigInt::from(r);
                let want = BigInt::from(phi.value_at(&Rat::from(base.clone()))?.residue().clone()).mod_floor(modulus);
                for j in 0..used.max(1) {
                    let y = Rat::from(&base + &step * j);
                    if sum_at(&y)? != want {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
    }
}

/// Coefficients for `n < count` by forward substitution in the lower
/// triangular system `Σ_{k<=n} c_k f_k(a_n) = φ(a_n)`, with every matrix
/// entry `∏_{j<k}(a_n - a_j) / ∏_{j<k}(a_k - a_j)` formed exactly over Q
/// before reduction mod `p^N`.
pub fn solve_triangular(phi: &StepFunction, o: &POrdering, precision: u32, count: usize) -> Result<Vec<BigUint>> {
    check_domain(phi, o)?;
    let p = phi.prime;
    let modulus = BigInt::from(pow_big(p, precision));
    let ord = if o.points().len() < count { o.extend_unbounded(count - 1)? } else { o.clone() };
    let pts = ord.points();
    let denoms: Vec<Rat> = (0..count).map(|k| ord.step_product(k)).collect();
    let mut c: Vec<BigInt> = Vec::with_capacity(count);
    for n in 0..count {
        let a = &pts[n];
        let mut rhs = BigInt::from(phi.value_at(a)?.residue().clone());
        let mut prod = Rat::from(1);
        for (k, ck) in c.iter().enumerate() {
            if k > 0 {
                prod = prod * (a - &pts[k - 1]);
            }
            let entry = BigInt::from((&prod / &denoms[k]).residue(p, precision)?);
            rhs -= ck * entry;
        }
        // the diagonal entry f_n(a_n) is exactly 1
        c.push(rhs.mod_floor(&modulus));
    }
    Ok(c.into_iter().map(|x| x.to_biguint().unwrap()).collect())
}

/// Coordinates of the certified partial sum in another regular basis
/// `g_0, g_1, ...` of the same module: writing `g_k = Σ_j T[k][j] f_j`, solve
/// `c_j = Σ_{k>=j} d_k T[k][j]` from the top down.
pub fn coordinates_in_basis(s: &MahlerSeries, basis: &[RatPoly]) -> Result<Vec<BigUint>> {
    let p = s.prime();
    let len = s.degree_bound();
    if basis.len() < len {
        return Err(Error::Invalid(format!("need {len} basis polynomials, got {}", basis.len())));
    }
    let o = &s.ordering;
    let modulus = BigInt::from(pow_big(p, s.precision));
    let f: Vec<RatPoly> = (0..len).map(|k| basis_poly(o, k)).collect::<Result<_>>()?;
    // T[k][j]: exact Newton-style recursion on the values g_k(a_n)
    let mut t: Vec<Vec<Rat>> = Vec::with_capacity(len);
    for g in &basis[..len] {
        if g.degree_or_zero() >= len && !g.is_zero() && g.degree_or_zero() != t.len() {
            return Err(Error::Invalid("basis must have one polynomial of each degree".into()));
        }
        let mut row: Vec<Rat> = Vec::with_capacity(len);
        for n in 0..len {
            let a = &o.points()[n];
            let mut v = g.eval(a);
            for (j, tj) in row.iter().enumerate() {
                v = v - tj * &f[j].eval(a);
            }
            row.push(v);
        }
        t.push(row);
    }
    let c: Vec<BigInt> = s.coeffs[..len].iter().map(|x| BigInt::from(x.clone())).collect();
    let mut d: Vec<BigInt> = vec![BigInt::zero(); len];
    for j in (0..len).rev() {
        let mut rhs = Rat::from(c[j].clone());
        for k in j + 1..len {
            rhs = rhs - &t[k][j] * &Rat::from(d[k].clone());
        }
        let diag = &t[j][j];
        if diag.valp(p) != Valuation::Finite(0) {
            return Err(Error::Invalid(format!("basis polynomial {j} does not generate the degree-{j} leading ideal at {p}")));
        }
        d[j] = BigInt::from((rhs / diag.clone()).residue(p, s.precision)?).mod_floor(&modulus);
    }
    Ok(d.into_iter().map(|x| x.to_biguint().unwrap()).collect())
}

/// Value of the partial sum at a p-adic integer known modulo `p^k`.
///
/// Since `f_n` divides by `p^{w(n)}`, the result is only known modulo
/// `p^{min(N, k - max w)}`.
pub fn evaluate(s: &MahlerSeries, x: &PAdicInt) -> Result<PAdicInt> {
    let p = s.prime();
    if x.prime() != p {
        return Err(Error::PrimeMismatch(x.prime(), p));
    }
    let used = s.degree_bound();
    let max_w = s.ordering.w()[..used.max(1)].iter().copied().max().unwrap_or(0);
    let prec = (x.precision() as i64 - max_w as i64).min(s.precision as i64);
    if prec <= 0 {
        return Err(Error::PrecisionExhausted(format!(
            "input known mod {p}^{}, but the series divides by {p}^{max_w}",
            x.precision()
        )));
    }
    let rep = match s.ordering.set().kind() {
        SetKind::Finite(elems) => {
            let hits: Vec<&Rat> = elems
                .iter()
                .filter(|e| e.residue(p, x.precision()).map(|r| &r == x.residue()).unwrap_or(false))
                .collect();
            match hits.as_slice() {
                [one] => (*one).clone(),
                [] => return Err(Error::NotInDomain(format!("{x} is not in the domain"))),
                _ => return Err(Error::PrecisionExhausted(format!("{x} does not single out a point of the domain"))),
            }
        }
        SetKind::Balls(_) => {
            if x.precision() < s.ordering.set().max_exp() {
                return Err(Error::PrecisionExhausted(format!("{x} is too coarse to decide membership")));
            }
            let r = Rat::from(x.residue().clone());
            if !s.ordering.set().contains_rat(&r) {
                return Err(Error::NotInDomain(format!("{x} is not in the domain")));
            }
            r
        }
    };
    let v = evaluate_rat(s, &rep)?;
    Ok(v.truncate(prec as u32))
}

/// Value of the partial sum at an exact point of the domain, modulo `p^N`.
pub fn evaluate_rat(s: &MahlerSeries, y: &Rat) -> Result<PAdicInt> {
    let p = s.prime();
    if !s.ordering.set().contains_rat(y) {
        return Err(Error::NotInDomain(format!("{y} is not in the domain")));
    }
    let used = s.degree_bound();
    let modulus = BigInt::from(pow_big(p, s.precision));
    let ev = BasisEvaluator::new(&s.ordering.prefix(used.max(1)), s.precision);
    let vals = ev.values(y, used)?;
    let mut acc = BigInt::zero();
    for (c, f) in s.coeffs.iter().zip(&vals) {
        acc += BigInt::from(c.clone()) * f;
    }
    Ok(PAdicInt::new(p, acc.mod_floor(&modulus).to_biguint().unwrap(), s.precision))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SupNorm {
    /// `min_n v_p(c_n)`, `Inf` meaning at least `N`.
    pub coeffs: Valuation,
    /// `min_y v_p(φ(y))`, `Inf` meaning at least `N`.
    pub values: Valuation,
}

/// Both sides of `inf_n v_p(c_n) = inf_y v_p(φ(y))`, capped at `N`.
pub fn sup_norm_data(s: &MahlerSeries, phi: &StepFunction) -> Result<SupNorm> {
    if !s.certified {
        return Err(Error::NotCertified);
    }
    let p = s.prime();
    let cap = |v: Valuation| if v >= Valuation::Finite(s.precision as i64) { Valuation::Inf } else { v };
    let coeffs = cap(
        s.coeffs
            .iter()
            .map(|c| if c.is_zero() { Valuation::Inf } else { Valuation::Finite(split_p(&BigInt::from(c.clone()), p).0 as i64) })
            .min()
            .unwrap_or(Valuation::Inf),
    );
    let values = cap(phi.table.values().map(|v| v.truncate(s.precision).valuation()).min().unwrap_or(Valuation::Inf));
    if coeffs != values {
        return Err(Error::SupNormMismatch { coeffs: coeffs.to_string(), values: values.to_string() });
    }
    Ok(SupNorm { coeffs, values })
}

/// Componentwise expansion over an adelic ordering; untracked components
/// are the zero function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdelicSeries {
    pub components: BTreeMap<u64, MahlerSeries>,
}

impl AdelicSeries {
    pub fn certified(&self) -> bool {
        self.components.values().all(MahlerSeries::certified)
    }

    pub fn len(&self) -> usize {
        self.components.values().map(MahlerSeries::len).max().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The n-th coefficient as a tuple over the tracked primes.
    pub fn coeff(&self, n: usize) -> BTreeMap<u64, PAdicInt> {
        self.components
            .iter()
            .map(|(p, s)| {
                let c = s.coeffs.get(n).cloned().unwrap_or_default();
                (*p, PAdicInt::new(*p, c, s.precision))
            })
            .collect()
    }
}

pub fn expand_adelic(
    phi: &BTreeMap<u64, StepFunction>,
    o: &AdelicOrdering,
    precision: &BTreeMap<u64, u32>,
) -> Result<AdelicSeries> {
    for p in phi.keys() {
        if o.component(*p).is_none() {
            return Err(Error::Invalid(format!("function given at untracked prime {p}")));
        }
    }
    let mut components = BTreeMap::new();
    for (p, po) in o.components() {
        let n = precision.get(p).copied().unwrap_or(o.precision());
        let f = match phi.get(p) {
            Some(f) => f.clone(),
            None => StepFunction::sample(po.set(), 0, n, |_| Rat::zero())?,
        };
        components.insert(*p, expand(&f, po, n)?);
    }
    Ok(AdelicSeries { components })
}

/// Values of the tracked components at an adelic point.
pub fn evaluate_adelic(s: &AdelicSeries, x: &AdelicPoint) -> Result<BTreeMap<u64, PAdicInt>> {
    s.components
        .iter()
        .map(|(p, series)| {
            let xp = x
                .tracked
                .get(p)
                .cloned()
                .map_or_else(|| PAdicInt::from_rat(&x.default, *p, series.precision + 64), Ok)?;
            Ok((*p, evaluate(series, &xp)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pordering::p_ordering;
    use crate::sets::Ball;

    fn z(p: u64) -> CompactSet {
        CompactSet::zp(p)
    }

    fn res(s: &MahlerSeries) -> Vec<u64> {
        s.coeff_residues().iter().map(|c| c.to_u64().unwrap()).collect()
    }

    #[test]
    fn square_on_z2() {
        let phi = StepFunction::sample(&z(2), 6, 6, |r| Rat::from(BigInt::from(r * r))).unwrap();
        let o = p_ordering(&z(2), 0, 6).unwrap();
        let s = expand(&phi, &o, 6).unwrap();
        assert!(s.certified());
        assert_eq!(&res(&s)[..5], &[0, 1, 2, 0, 0]);
        assert_eq!(s.partial_sum().unwrap(), "x^2".parse().unwrap());
        let nine = evaluate(&s, &PAdicInt::new(2, BigUint::from(3u32), 20)).unwrap();
        assert_eq!(nine.residue(), &BigUint::from(9u32));
        let sn = sup_norm_data(&s, &phi).unwrap();
        assert_eq!((sn.coeffs, sn.values), (Valuation::Finite(0), Valuation::Finite(0)));
    }

    #[test]
    fn constant_and_zero() {
        let phi = StepFunction::sample(&z(3), 1, 4, |_| Rat::from(5)).unwrap();
        let s = expand(&phi, &p_ordering(&z(3), 0, 4).unwrap(), 4).unwrap();
        assert_eq!(res(&s)[0], 5);
        assert!(res(&s)[1..].iter().all(|c| *c == 0));
        assert_eq!(s.degree_bound(), 1);
        let v = evaluate_rat(&s, &Rat::from(17)).unwrap();
        assert_eq!(v.residue(), &BigUint::from(5u32));

        let zero = StepFunction::sample(&z(2), 2, 5, |_| Rat::zero()).unwrap();
        let s = expand(&zero, &p_ordering(&z(2), 0, 5).unwrap(), 5).unwrap();
        let sn = sup_norm_data(&s, &zero).unwrap();
        assert_eq!((sn.coeffs, sn.values), (Valuation::Inf, Valuation::Inf));
    }

    #[test]
    fn twice_x() {
        let phi = StepFunction::sample(&z(2), 5, 5, |r| Rat::from(BigInt::from(r * 2u32))).unwrap();
        let s = expand(&phi, &p_ordering(&z(2), 0, 5).unwrap(), 5).unwrap();
        let sn = sup_norm_data(&s, &phi).unwrap();
        assert_eq!((sn.coeffs, sn.values), (Valuation::Finite(1), Valuation::Finite(1)));
    }

    #[test]
    fn parity_indicator_matches_differences() {
        let phi = StepFunction::sample(&z(2), 1, 4, |r| Rat::from(BigInt::from(r % 2u32))).unwrap();
        let s = expand(&phi, &p_ordering(&z(2), 0, 4).unwrap(), 4).unwrap();
        // Δ^n of 0,1,0,1,... at 0 is (-1)^{n+1} 2^{n-1} for n >= 1
        let mut vals: Vec<BigInt> = (0..s.len() as u64).map(|k| BigInt::from(k % 2)).collect();
        let m = BigInt::from(16);
        for c in s.coeff_residues() {
            assert_eq!(BigInt::from(c.clone()), vals[0].mod_floor(&m));
            vals = vals.windows(2).map(|w| &w[1] - &w[0]).collect();
        }
        for r in 0..64u32 {
            let v = evaluate_rat(&s, &Rat::from(r as i64)).unwrap();
            assert_eq!(v.residue(), &BigUint::from(r % 2));
        }
    }

    #[test]
    fn recursion_matches_direct_solve() {
        let dom = CompactSet::balls(3, vec![Ball::new(1u32, 1), Ball::new(3u32, 2)]).unwrap();
        let phi = StepFunction::sample(&dom, 2, 4, |r| Rat::from(BigInt::from(r * r * r + 1u32))).unwrap();
        let o = p_ordering(&dom, 0, 4).unwrap();
        let s = expand(&phi, &o, 4).unwrap();
        let direct = solve_triangular(&phi, &o, 4, s.len()).unwrap();
        assert_eq!(s.coeff_residues(), &direct[..]);
    }

    #[test]
    fn finite_domain() {
        let dom = CompactSet::finite(2, vec![Rat::from(0), Rat::from(2), Rat::from(4), Rat::from(5)]).unwrap();
        let phi = StepFunction::sample(&dom, 3, 6, |r| Rat::from(BigInt::from(r + 7u32))).unwrap();
        let s = expand(&phi, &p_ordering(&dom, 0, 6).unwrap(), 6).unwrap();
        assert!(s.certified());
        assert_eq!(s.len(), 4);
        let v = evaluate(&s, &PAdicInt::new(2, BigUint::from(5u32), 10)).unwrap();
        assert_eq!(v.residue(), &BigUint::from(12u32));
    }

    #[test]
    fn binomial_basis_coordinates() {
        let phi = StepFunction::sample(&z(2), 6, 6, |r| Rat::from(BigInt::from(r * r))).unwrap();
        let s = expand(&phi, &p_ordering(&z(2), 0, 6).unwrap(), 6).unwrap();
        let basis: Vec<RatPoly> = (0..4).map(RatPoly::binomial).collect();
        let d = coordinates_in_basis(&s, &basis).unwrap();
        assert_eq!(d, vec![BigUint::from(0u32), BigUint::from(1u32), BigUint::from(2u32)]);
    }

    #[test]
    fn adelic_expansion() {
        let a: crate::sets::AdelicSet = "default=Zp; p=2; balls: 0+p^0; p=3; balls: 0+p^0".parse().unwrap();
        let o = crate::adelic::adelic_ordering(&a, 4, 16).unwrap();
        let mut phi = BTreeMap::new();
        phi.insert(2, StepFunction::sample(&z(2), 5, 5, |r| Rat::from(BigInt::from(r * r))).unwrap());
        phi.insert(3, StepFunction::sample(&z(3), 0, 5, |_| Rat::from(1)).unwrap());
        let prec: BTreeMap<u64, u32> = [(2, 5), (3, 5)].into();
        let s = expand_adelic(&phi, &o, &prec).unwrap();
        assert!(s.certified());
        let c: Vec<(u64, u64)> = (0..4)
            .map(|n| {
                let t = s.coeff(n);
                (t[&2].residue().to_u64().unwrap(), t[&3].residue().to_u64().unwrap())
            })
            .collect();
        assert_eq!(c, vec![(0, 1), (1, 0), (2, 0), (0, 0)]);
        let v = evaluate_adelic(&s, &o.point(3)).unwrap();
        assert_eq!(v[&2].residue(), &BigUint::from(9u32));
    }

    #[test]
    fn json_round_trip() {
        let phi = StepFunction::sample(&z(3), 1, 4, |r| Rat::from(BigInt::from(r.clone()))).unwrap();
        let s = serde_json::to_string(&phi).unwrap();
        assert_eq!(s, r#"{"p":3,"set":{"p":3,"balls":[{"center":0,"exp":0}]},"m":1,"N":4,"table":{"0":0,"1":1,"2":2}}"#);
        let back: StepFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, phi);
    }
}
