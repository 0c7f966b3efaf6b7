//! Randomized invariants of the algebra, checked with proptest so failing
//! inputs shrink to small witnesses.

use proptest::prelude::*;
use qtlab::random::{
    qtensor_with_block_indices, random_qtensor, ChaCha8Rng, SeedableRng,
};
use qtlab::{Options, QTensor, Quat};

fn quat() -> impl Strategy<Value = Quat> {
    (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0)
        .prop_map(|(w, x, y, z)| Quat { w, x, y, z })
}

fn close(p: Quat, q: Quat, tol: f64) -> bool {
    (p - q).abs() <= tol * (1.0 + p.abs().max(q.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_merge_is_identity(q in quat()) {
        let r = q.split().merge();
        prop_assert_eq!(q.w, r.w);
        prop_assert_eq!(q.x, r.x);
        prop_assert_eq!(q.y, r.y);
        prop_assert_eq!(q.z, r.z);
    }

    #[test]
    fn multiplication_is_associative(p in quat(), q in quat(), r in quat()) {
        prop_assert!(close((p * q) * r, p * (q * r), 1e-13));
    }

    #[test]
    fn conjugation_reverses_products(p in quat(), q in quat()) {
        prop_assert!(close((p * q).conj(), q.conj() * p.conj(), 1e-13));
    }

    #[test]
    fn modulus_is_multiplicative(p in quat(), q in quat()) {
        let lhs = (p * q).abs();
        let rhs = p.abs() * q.abs();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn split_respects_multiplication(p in quat(), q in quat()) {
        // c1/c2 components of a product follow the twisted rule induced
        // by j c = conj(c) j
        let (a, b) = (p.split(), q.split());
        let prod = (p * q).split();
        let c1 = a.c1 * b.c1 - a.c2.conj() * b.c2;
        let c2 = a.c2 * b.c1 + a.c1.conj() * b.c2;
        prop_assert!((prod.c1 - c1).norm() <= 1e-13 * (1.0 + c1.norm()));
        prop_assert!((prod.c2 - c2).norm() <= 1e-13 * (1.0 + c2.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn product_transfers_to_bcirc(
        seed in any::<u64>(),
        n1 in 1usize..=3,
        n2 in 1usize..=3,
        p in 1usize..=3,
        n3 in 1usize..=4,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_qtensor(&mut rng, n1, n2, n3);
        let b = random_qtensor(&mut rng, n2, p, n3);
        let ab = a.qt_product(&b).unwrap();
        let direct = a.bcirc_z().matmul(b.bcirc_z()).unwrap();
        prop_assert!(ab.bcirc_z().approx_eq(&direct, 1e-13, 1e-12));
    }

    #[test]
    fn adjoint_is_an_involution_and_reverses_products(
        seed in any::<u64>(),
        n1 in 1usize..=3,
        n2 in 1usize..=3,
        n3 in 1usize..=4,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_qtensor(&mut rng, n1, n2, n3);
        prop_assert!(a.adjoint().adjoint().approx_eq(&a, 0.0, 1e-15));
        // transfer: bcirc of the adjoint is the adjoint of bcirc
        prop_assert!(a.adjoint().bcirc_z().approx_eq(&a.bcirc_z().adjoint(), 1e-15, 1e-14));

        let b = random_qtensor(&mut rng, n2, n1, n3);
        let lhs = a.qt_product(&b).unwrap().adjoint();
        let rhs = b.adjoint().qt_product(&a.adjoint()).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, 1e-13, 1e-12));
    }

    #[test]
    fn product_is_bilinear(
        seed in any::<u64>(),
        n in 1usize..=3,
        n3 in 1usize..=3,
        s in -2.0f64..2.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_qtensor(&mut rng, n, n, n3);
        let b = random_qtensor(&mut rng, n, n, n3);
        let c = random_qtensor(&mut rng, n, n, n3);
        let lhs = (&a + &b).qt_product(&c).unwrap();
        let rhs = &a.qt_product(&c).unwrap() + &b.qt_product(&c).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, 1e-13, 1e-12));
        let lhs = a.scale(s).qt_product(&c).unwrap();
        let rhs = a.qt_product(&c).unwrap().scale(s);
        prop_assert!(lhs.approx_eq(&rhs, 1e-13, 1e-12));
    }

    #[test]
    fn unfold_fold_round_trips(
        seed in any::<u64>(),
        n1 in 1usize..=3,
        n2 in 1usize..=3,
        n3 in 1usize..=4,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_qtensor(&mut rng, n1, n2, n3);
        let back = QTensor::fold(&a.unfold(), n1, n3).unwrap();
        prop_assert!(back.approx_eq(&a, 0.0, 0.0));
    }

    #[test]
    fn bcirc_round_trips_verified(
        seed in any::<u64>(),
        n1 in 1usize..=3,
        n2 in 1usize..=3,
        n3 in 1usize..=4,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_qtensor(&mut rng, n1, n2, n3);
        let back = QTensor::from_bcirc_z_verified(a.bcirc_z(), n1, n3).unwrap();
        prop_assert!(back.approx_eq(&a, 0.0, 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pinv_satisfies_penrose_equations(
        seed in any::<u64>(),
        n1 in 1usize..=3,
        n2 in 1usize..=3,
        n3 in 1usize..=3,
    ) {
        let opts = Options::fast();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_qtensor(&mut rng, n1, n2, n3);
        let x = a.qt_pinv(&opts).unwrap();
        let scale = a.bcirc_z().norm2().max(1.0);
        let ax = a.qt_product(&x).unwrap();
        let xa = x.qt_product(&a).unwrap();
        prop_assert!((&ax.qt_product(&a).unwrap() - &a).norm_fro() <= 1e-8 * scale);
        prop_assert!(
            (&xa.qt_product(&x).unwrap() - &x).norm_fro()
                <= 1e-8 * x.norm_fro().max(1.0)
        );
        prop_assert!((&ax.adjoint() - &ax).norm_fro() <= 1e-8 * scale);
        prop_assert!((&xa.adjoint() - &xa).norm_fro() <= 1e-8 * scale);
    }

    #[test]
    fn planted_block_indices_are_recovered(
        seed in any::<u64>(),
        n in 2usize..=3,
        raw in proptest::collection::vec(0usize..=3, 1..=3),
    ) {
        let ks: Vec<usize> = raw.iter().map(|&k| k.min(n)).collect();
        let n3 = ks.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = qtensor_with_block_indices(&mut rng, n, n3, &ks);
        let k = a.qt_index(&Options::fast()).unwrap();
        prop_assert_eq!(k, *ks.iter().max().unwrap());
    }

    #[test]
    fn svd_reconstructs_and_orders_tubes(
        seed in any::<u64>(),
        n1 in 1usize..=3,
        n2 in 1usize..=3,
        n3 in 1usize..=3,
    ) {
        let opts = Options::fast();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_qtensor(&mut rng, n1, n2, n3);
        let (u, s, v) = a.qt_svd(&opts).unwrap();
        let back = u.qt_product(&s).unwrap().qt_product(&v.adjoint()).unwrap();
        prop_assert!(back.approx_eq(&a, 1e-12, 1e-10));
        let tubes = qtlab::spectral::singular_tube_norms(&s);
        for w in tubes.windows(2) {
            prop_assert!(w[0] >= w[1] - 1e-12);
        }
    }
}
