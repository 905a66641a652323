use num_traits::{One, Zero};
use proptest::prelude::*;

use onsk::field::rat;
use onsk::kmatrix::{build_kkk, build_ktr, check_unitarity, reference_entry};
use onsk::linalg::{rank, rank_scalar};
use onsk::spectra::{eval_rho_tr, wedge};
use onsk::spinrep::popcount;
use onsk::{make_params, Field, Params, Scalar};

fn gaussian() -> impl Strategy<Value = Scalar> {
    (-9i64..10, -9i64..10, 1i64..12).prop_map(|(a, b, d)| Scalar::new(rat(a, d), rat(b, d)))
}

/// `0 < t < 1` and a real `z` in `(0, 1)`, both generic enough to build K.
fn point() -> impl Strategy<Value = Params> {
    (1i64..12, 13i64..40, 1i64..30, 31i64..60, any::<bool>(), any::<bool>())
        .prop_filter_map("non-generic point", |(a, b, c, d, e, m)| {
            let z = Scalar::real(rat(c, d));
            make_params(rat(a, b), z, if e { 1 } else { -1 }, if m { 1 } else { -1 }).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn field_identities(a in gaussian(), b in gaussian(), c in gaussian()) {
        prop_assert_eq!(a.clone() * (b.clone() + &c), a.clone() * &b + a.clone() * &c);
        if !b.is_zero() {
            prop_assert_eq!(a.clone() * &b / &b, a.clone());
            prop_assert_eq!(b.inv().unwrap() * &b, Scalar::one());
        }
        prop_assert_eq!(a.conj().conj(), a);
    }

    #[test]
    fn integer_rank_agrees(m in proptest::collection::vec(proptest::collection::vec(gaussian(), 4), 1..5)) {
        prop_assert_eq!(rank_scalar(&m), rank(&m));
    }

    #[test]
    fn ktr_reverses_particle_number(p in point()) {
        let k = build_ktr(3, &p.z, &p).unwrap();
        prop_assert!(k.op.entries().all(|(r, c, _)| popcount(r) + popcount(c) == 3));
    }

    #[test]
    fn ktr_unitarity(p in point()) {
        let rep = check_unitarity(3, &p.z, &p);
        prop_assume!(rep.is_ok());
        prop_assert!(rep.unwrap().passed());
    }

    #[test]
    fn boundary_corner_entry(p in point(), k in 1u8..3, kp in 1u8..3) {
        prop_assume!((k, kp) != (2, 2));
        let km = build_kkk(k, kp, 2, &p.z, &p);
        prop_assume!(km.is_ok());
        prop_assert_eq!(km.unwrap().op.get(0b11, 0), reference_entry(k, kp, 2, &p.z, &p));
    }

    #[test]
    fn rho_reciprocity(p in point(), n in 2usize..5) {
        let w = p.z.inv().unwrap();
        for l in 0..=n {
            for j in wedge(n, l) {
                let a = eval_rho_tr(n, l, j, &p.z, &p).unwrap();
                let b = eval_rho_tr(n, n - l, n - j, &w, &p).unwrap();
                prop_assert_eq!(a * b, Scalar::one());
            }
        }
    }
}
