use kurzweil::contfrac::ContinuedFraction;
use kurzweil::exact::{brute_force_hit, contains_integer_point, orbit_summary, RationalPair};
use kurzweil::numeric::interval::Interval;
use kurzweil::numeric::{affine_orbit_point, torus_dist};
use kurzweil::psi::{discretize_reciprocal, membership_W, PsiSpec};
use kurzweil::records::{scan_records_from, scan_records_sequential, window_min, Gauge};
use kurzweil::sums::{partial_S, SumSpec};
use kurzweil::{Precision, Real, TorusVector};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use proptest::prelude::*;

fn rat() -> impl Strategy<Value = BigRational> {
    (1i64..200).prop_flat_map(|q| (-3 * q..3 * q).prop_map(move |p| BigRational::new(p.into(), q.into())))
}

fn point(d: usize) -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec(rat(), d)
}

fn pair() -> impl Strategy<Value = (Vec<BigRational>, Vec<BigRational>)> {
    (1usize..=2).prop_flat_map(|d| (point(d), point(d)))
}

fn tv(v: &[BigRational]) -> TorusVector {
    TorusVector::from_rationals(v.to_vec()).unwrap()
}

fn exact(v: &Real) -> BigRational {
    v.as_exact().expect("exact").clone()
}

fn dist_oracle(v: &[BigRational]) -> BigRational {
    v.iter()
        .map(|c| {
            let f = c - c.floor();
            let g = BigRational::one() - &f;
            f.min(g)
        })
        .max()
        .unwrap()
}

fn ctx() -> Precision {
    Precision::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduction_is_idempotent(v in point(2)) {
        let once = tv(&v);
        let twice = TorusVector::new(once.coords().to_vec()).unwrap();
        prop_assert!(once.same_as(&twice));
        for c in once.exact_coords().unwrap() {
            prop_assert!(!c.is_negative() && c < BigRational::one());
        }
    }

    #[test]
    fn distance_is_symmetric((x, _) in pair()) {
        let neg: Vec<BigRational> = x.iter().map(|c| -c).collect();
        prop_assert_eq!(exact(&torus_dist(&tv(&x))), exact(&torus_dist(&tv(&neg))));
        prop_assert_eq!(exact(&torus_dist(&tv(&x))), dist_oracle(&x));
    }

    #[test]
    fn enclosures_contain_the_value(num in 1u64..1000, root in 2u32..5, bits in 8u32..200) {
        let base = BigRational::new(num.into(), 7.into());
        let v = Real::Exact(base.clone()).pow(&BigRational::new(1.into(), root.into())).unwrap();
        let iv: Interval = v.enclose(bits).unwrap();
        let lo = num_traits::pow(iv.lo().clone(), root as usize);
        let hi = num_traits::pow(iv.hi().clone(), root as usize);
        prop_assert!(lo <= base && base <= hi);
    }

    #[test]
    fn records_match_window_minima((x, y) in pair(), ell in 1u64..8, span in 1u64..300) {
        let (xs, ys) = (tv(&x), tv(&y));
        let n_max = ell + span;
        let rs = scan_records_from(&xs, &ys, ell, n_max, &Gauge::Sup, &ctx()).unwrap();
        let mut best: Option<BigRational> = None;
        for n in ell..=n_max {
            let p: Vec<BigRational> = x.iter().zip(&y).map(|(a, b)| BigRational::from_integer(n.into()) * a + b).collect();
            let d = dist_oracle(&p);
            let improves = best.as_ref().is_none_or(|b| d < *b);
            if improves {
                best = Some(d.clone());
            }
            if n <= rs.scan_bound {
                prop_assert_eq!(exact(rs.min_at(n).unwrap()), best.clone().unwrap());
                prop_assert_eq!(rs.times().contains(&n), improves);
            }
            if best.as_ref().unwrap() == &BigRational::from_integer(0.into()) {
                prop_assert!(rs.zero_hit);
                break;
            }
        }
        prop_assert_eq!(exact(&window_min(&xs, &ys, ell, n_max, &ctx()).unwrap()), best.unwrap());
    }

    #[test]
    fn parallel_scan_equals_sequential((x, y) in pair(), n_max in 1u64..20_000) {
        let (xs, ys) = (tv(&x), tv(&y));
        let a = scan_records_from(&xs, &ys, 1, n_max, &Gauge::Sup, &ctx()).unwrap();
        let b = scan_records_sequential(&xs, &ys, 1, n_max, &Gauge::Sup, &ctx()).unwrap();
        prop_assert_eq!(a.times(), b.times());
    }

    #[test]
    fn parallel_scan_equals_sequential_irrational(y in rat(), n_max in 5_000u64..50_000) {
        let xs = TorusVector::new(vec![ContinuedFraction::golden().value()]).unwrap();
        let ys = tv(&[y]);
        let a = scan_records_from(&xs, &ys, 1, n_max, &Gauge::Sup, &ctx()).unwrap();
        let b = scan_records_sequential(&xs, &ys, 1, n_max, &Gauge::Sup, &ctx()).unwrap();
        prop_assert_eq!(a.times(), b.times());
    }

    #[test]
    fn shift_identity((x, y) in pair(), ell in 1u64..10, k in 1u64..10, span in 0u64..200) {
        let spec = SumSpec::plain(x.len());
        let n_max = ell + span;
        let shifted: Vec<BigRational> = x.iter().zip(&y).map(|(a, b)| BigRational::from_integer(k.into()) * a + b).collect();
        let lhs = partial_S(&tv(&x), &tv(&y), ell + k, n_max + k, &spec, &ctx()).unwrap();
        let rhs = partial_S(&tv(&x), &tv(&shifted), ell, n_max, &spec, &ctx()).unwrap();
        prop_assert_eq!(exact(&lhs), exact(&rhs));
    }

    #[test]
    fn split_inequality((x, y) in pair(), ell in 1u64..10, span in 1u64..200) {
        let spec = SumSpec::plain(x.len());
        let n_max = ell + span;
        let s = |l| exact(&partial_S(&tv(&x), &tv(&y), l, n_max, &spec, &ctx()).unwrap());
        let first: Vec<BigRational> = x.iter().zip(&y).map(|(a, b)| BigRational::from_integer(ell.into()) * a + b).collect();
        prop_assert!(s(ell) <= num_traits::pow(dist_oracle(&first), x.len()) + s(ell + 1));
    }

    #[test]
    fn integer_points_match_brute_force((x, y) in pair()) {
        let p = RationalPair::new(x, y).unwrap();
        let period = orbit_summary(&p).unwrap().period.to_u64().unwrap();
        let hit = brute_force_hit(&p, period);
        prop_assert_eq!(contains_integer_point(&p).map(|h| h.least_n), hit.map(BigUint::from));
    }

    #[test]
    fn discretization_dominated(c in 1i64..50, a in 1i64..4, q in 1i64..4, prefix in 1u64..300) {
        let psi = PsiSpec::power_law(BigRational::new(c.into(), 7.into()), BigRational::new(a.into(), q.into())).unwrap();
        let seq = discretize_reciprocal(&psi, prefix, &ctx()).unwrap();
        for (i, k) in seq.k.iter().enumerate() {
            let v = psi.eval(i as u64 + 1, &ctx()).unwrap();
            let inv = Real::Exact(BigRational::new(BigInt::one(), k.clone().into()));
            prop_assert!(inv.le(&v, &ctx()).unwrap());
            if *k > BigUint::one() {
                let looser = Real::Exact(BigRational::new(BigInt::one(), (k - 1u32).into()));
                prop_assert!(v.lt(&looser, &ctx()).unwrap());
            }
        }
    }

    #[test]
    fn membership_matches_definition((x, y) in pair(), c in 1i64..20, n_max in 1u64..200) {
        let psi = PsiSpec::power_law(BigRational::new(c.into(), 10.into()), BigRational::one()).unwrap();
        let w = membership_W(&tv(&x), &tv(&y), &psi, n_max, &ctx()).unwrap();
        let expect: Vec<u64> = (1..=n_max)
            .filter(|&n| {
                let p: Vec<BigRational> = x.iter().zip(&y).map(|(a, b)| BigRational::from_integer(n.into()) * a + b).collect();
                dist_oracle(&p) < BigRational::new(c.into(), (10 * n).into())
            })
            .collect();
        prop_assert_eq!(w, expect);
    }

    #[test]
    fn orbit_points_are_affine((x, y) in pair(), n in 1i64..10_000) {
        let p = affine_orbit_point(&tv(&x), &tv(&y), &BigInt::from(n)).unwrap();
        let expect: Vec<BigRational> = x.iter().zip(&y).map(|(a, b)| BigRational::from_integer(n.into()) * a + b).collect();
        prop_assert!(p.same_as(&tv(&expect)));
    }
}
