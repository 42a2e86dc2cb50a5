use chball_core::linalg::norm;
use chball_core::sampling::{random_ball_point, random_group_element, random_loxodromic};
use chball_core::siegel::{cayley, cayley_inv};
use chball_core::{kak, lambda1, make_a, sigma1, CVec, Tolerances};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dim() -> impl Strategy<Value = usize> {
    2usize..=3
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn products_stay_in_the_group(m in dim(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_group_element(m, 2.0, &mut rng);
        let h = random_group_element(m, 2.0, &mut rng);
        let gh = g.compose(&h);
        prop_assert!(gh.membership_residual() <= 1e-10);
        prop_assert!(gh.compose(&gh.inverse()).distance(&chball_core::GroupElement::identity(m)) <= 1e-10);
    }

    #[test]
    fn action_preserves_the_ball(m in dim(), seed in any::<u64>(), r in 0.0f64..0.999) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_group_element(m, 3.0, &mut rng);
        let z = random_ball_point(m, r, &mut rng).into_vec();
        prop_assert!(norm(&g.act(&z).unwrap()) < 1.0);
    }

    #[test]
    fn lambda1_is_a_conjugacy_invariant(m in dim(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, _, t) = random_loxodromic(m, 0.3, 1.5, 1.0, &mut rng);
        let h = random_group_element(m, 1.0, &mut rng);
        let l = lambda1(&g.conjugate_by(&h)).unwrap();
        prop_assert!((l.ln() - t).abs() <= 1e-8);
        // sigma1 bounds lambda1 from above
        prop_assert!(sigma1(&g) >= t.exp() * (1.0 - 1e-12));
    }

    #[test]
    fn kak_t_is_distance_from_origin(m in dim(), seed in any::<u64>(), t in 0.0f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k1 = random_group_element(m, 0.0, &mut rng);
        let k2 = random_group_element(m, 0.0, &mut rng);
        let g = k1.compose(&make_a(m, t)).compose(&k2);
        let f = kak(&g).unwrap();
        prop_assert!((f.t - t).abs() <= 1e-9);
        prop_assert!(f.k1.compose(&make_a(m, f.t)).compose(&f.k2).distance(&g) <= 1e-9);
    }

    #[test]
    fn cayley_round_trip(m in dim(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z: CVec = random_ball_point(m, 0.99, &mut rng).into_vec();
        let p = cayley(&z, &Tolerances::default()).unwrap();
        prop_assert!(norm(&(cayley_inv(&p) - &z)) <= 1e-12);
    }
}
