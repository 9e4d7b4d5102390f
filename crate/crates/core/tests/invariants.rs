use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use proptest::prelude::*;

use pw_core::adelic::conjugate_poly;
use pw_core::globalbasis::{crt_combine, global_membership, CrtPart};
use pw_core::mahler::{expand, StepFunction};
use pw_core::pordering::{basis_poly, local_membership, p_ordering, rational_lift, BasisForm};
use pw_core::{AdelicSet, Ball, CompactSet, Rat, RatPoly, Valuation};

fn ball_set() -> impl Strategy<Value = CompactSet> {
    (prop_oneof![Just(2u64), Just(3), Just(5)], proptest::collection::vec((0u32..=2, any::<u32>()), 1..4)).prop_map(
        |(p, raw)| {
            let balls = raw.into_iter().map(|(e, c)| Ball::new(c % p.pow(e) as u32, e)).collect();
            CompactSet::balls(p, balls).unwrap()
        },
    )
}

fn small_poly() -> impl Strategy<Value = RatPoly> {
    proptest::collection::vec((-40i64..40, 1i64..30), 0..6)
        .prop_map(|cs| RatPoly::new(cs.into_iter().map(|(a, b)| Rat::new(a, b).unwrap()).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_is_triangular(s in ball_set(), len in 1usize..7) {
        let o = p_ordering(&s, len, 64).unwrap();
        for n in 0..=len {
            let f = basis_poly(&o, n).unwrap();
            for (j, a) in o.points()[..=n].iter().enumerate() {
                let want = if j == n { Rat::one() } else { Rat::from(0) };
                prop_assert_eq!(f.eval(a), want);
            }
            prop_assert!(local_membership(&f, &s, 64).unwrap());
        }
    }

    #[test]
    fn rational_lift_is_congruent(s in ball_set(), len in 1usize..7) {
        let o = p_ordering(&s, len, 64).unwrap();
        let p = s.prime();
        for n in 0..=len {
            let w = o.w()[n];
            let BasisForm::RationalLift(h) = rational_lift(&o, n).unwrap().form else { panic!("form") };
            let scaled = h.scale(&Rat::from(BigInt::from(p).pow(w as u32)));
            let diff = scaled.sub(&RatPoly::from_roots(&o.points()[..n]));
            for c in diff.coeffs() {
                prop_assert!(c.valp(p) >= Valuation::Finite(w as i64));
            }
        }
    }

    #[test]
    fn crt_meets_every_congruence(polys in proptest::collection::vec(small_poly(), 1..4), k in 1u32..4) {
        let primes = [2u64, 3, 5, 7];
        let parts: Vec<CrtPart> = polys.iter().zip(primes).map(|(f, p)| CrtPart::new(p, k, f.clone())).collect();
        let g = crt_combine(&parts, 8).unwrap();
        for part in &parts {
            let p = part.prime;
            for c in g.sub(&part.poly).coeffs() {
                prop_assert!(c.valp(p) >= Valuation::Finite(k as i64));
            }
        }
        // no prime outside the parts appears in a denominator
        let mut den = g.denominator();
        for part in &parts {
            while (&den % part.prime) == BigInt::from(0) {
                den /= part.prime;
            }
        }
        prop_assert!(den.is_one());
    }

    #[test]
    fn full_membership_matches_integer_values(f in small_poly()) {
        let oracle = (0..=f.degree_or_zero() as i64).all(|k| f.eval(&Rat::from(k)).is_integer());
        prop_assert_eq!(global_membership(&f, &AdelicSet::full(), 32).unwrap(), oracle);
    }

    #[test]
    fn conjugation_is_substitution(f in small_poly(), d in 1u32..20, d1 in 1u32..20, x in -30i64..30) {
        let g = conjugate_poly(&f, &BigUint::from(d), &BigUint::from(d1)).unwrap();
        let want = f.eval(&Rat::from(x * d as i64)) / Rat::from(d1 as i64);
        prop_assert_eq!(g.eval(&Rat::from(x)), want);
    }

    #[test]
    fn residue_counts_grow_by_at_most_p(s in ball_set()) {
        let p = s.prime() as usize;
        for m in 0..5 {
            let a = s.residues(m).len();
            let b = s.residues(m + 1).len();
            prop_assert!(a <= b && b <= p * a);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// A certified partial sum, tabulated again, expands to the same coefficients.
    #[test]
    fn mahler_expansion_is_unique(s in ball_set(), m in 0u32..3, seed in any::<u64>()) {
        let p = s.prime();
        let n = 4;
        let modulus = p.pow(n);
        let table: BTreeMap<BigUint, BigInt> = s
            .residues(m)
            .into_iter()
            .enumerate()
            .map(|(i, r)| (r, BigInt::from(seed.wrapping_mul(i as u64 + 1).wrapping_add(seed >> 7) % modulus)))
            .collect();
        let phi = StepFunction::new(s.clone(), m, n, table).unwrap();
        let o = p_ordering(&s, 0, 64).unwrap();
        let first = expand(&phi, &o, n).unwrap();
        let f = first.partial_sum().unwrap();
        let again = StepFunction::sample(&s, m, n, |r| f.eval(&Rat::from(BigInt::from(r.clone())))).unwrap();
        prop_assert_eq!(&again, &phi);
        let second = expand(&again, &o, n).unwrap();
        prop_assert_eq!(second.coeff_residues(), first.coeff_residues());
    }
}
