//! λ1 and the elliptic / parabolic / loxodromic split checked against the
//! roots of the characteristic polynomial, computed without any eigen solver.

use chball_core::sampling::{random_group_element, random_k, random_loxodromic, unipotent_parabolic};
use chball_core::{classify, lambda1, CMat, GroupElement, Kind, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Faddeev-LeVerrier: coefficients of det(x I - A), leading 1 first.
fn char_poly(a: &CMat) -> Vec<C64> {
    let n = a.nrows();
    let mut coeffs = vec![C64::new(1.0, 0.0)];
    let mut m = CMat::zeros(n, n);
    let mut c = C64::new(1.0, 0.0);
    for k in 1..=n {
        m = a * &m + CMat::identity(n, n) * c;
        let am = a * &m;
        c = -am.trace() / C64::new(k as f64, 0.0);
        coeffs.push(c);
    }
    coeffs
}

/// Durand-Kerner iteration on a monic polynomial.
fn roots(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let eval = |z: C64| coeffs.iter().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let seed = C64::new(0.4, 0.9);
    let mut r: Vec<C64> = (0..n).map(|k| seed.powu(k as u32) * (1.0 + coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max))).collect();
    for _ in 0..2000 {
        let prev = r.clone();
        for i in 0..n {
            let mut den = C64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    den *= r[i] - r[j];
                }
            }
            let step = eval(r[i]) / den;
            r[i] -= step;
        }
        if r.iter().zip(&prev).all(|(a, b)| (a - b).norm() <= 1e-16 * (1.0 + a.norm())) {
            break;
        }
    }
    r
}

fn oracle_lambda1(g: &GroupElement) -> (f64, f64) {
    let rs = roots(&char_poly(&g.unitary_lift()));
    let mods: Vec<f64> = rs.iter().map(|z| z.norm()).collect();
    (mods.iter().copied().fold(0.0, f64::max), mods.iter().copied().fold(f64::INFINITY, f64::min))
}

#[test]
fn char_poly_of_diagonal() {
    let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(2.0, 0.0), C64::new(0.0, 1.0), C64::new(0.5, 0.0)]));
    let mut rs: Vec<f64> = roots(&char_poly(&d)).iter().map(|z| z.norm()).collect();
    rs.sort_by(f64::total_cmp);
    assert!((rs[0] - 0.5).abs() < 1e-12 && (rs[1] - 1.0).abs() < 1e-12 && (rs[2] - 2.0).abs() < 1e-12);
}

#[test]
fn lambda1_matches_roots_for_loxodromic() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for m in [2, 3] {
        for _ in 0..100 {
            let (g, _, t) = random_loxodromic(m, 0.3, 1.5, 1.0, &mut rng);
            let (top, bottom) = oracle_lambda1(&g);
            let l = lambda1(&g).unwrap();
            assert!((l / top - 1.0).abs() < 1e-8, "m={m}: {l} vs {top}");
            assert!((top - t.exp()).abs() < 1e-8 * top);
            // eigenvalues of U(m,1) come in pairs lambda, 1/conj(lambda)
            assert!((top * bottom - 1.0).abs() < 1e-8);
            assert_eq!(classify(&g).unwrap().kind, Kind::Loxodromic);
        }
    }
}

#[test]
fn lambda1_matches_roots_for_generic_elements() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for m in [2, 3] {
        for _ in 0..100 {
            let g = random_group_element(m, 2.0, &mut rng);
            let (top, _) = oracle_lambda1(&g);
            let d = classify(&g).unwrap();
            if top > 1.0 + 1e-4 {
                assert_eq!(d.kind, Kind::Loxodromic);
                assert!((d.lambda1 / top - 1.0).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn unit_circle_spectrum_for_elliptic_and_parabolic() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in [2, 3] {
        for _ in 0..20 {
            let h = random_group_element(m, 1.0, &mut rng);
            let g = random_k(m, &mut rng).conjugate_by(&h);
            let (top, bottom) = oracle_lambda1(&g);
            assert!((top - 1.0).abs() < 1e-8 && (bottom - 1.0).abs() < 1e-8);
            assert_eq!(classify(&g).unwrap().kind, Kind::Elliptic);

            let p = unipotent_parabolic(m, 0.7).conjugate_by(&h);
            // a triple root only resolves to about (eps kappa)^(1/3), and the
            // coefficient recursion amplifies kappa further
            let (top, bottom) = oracle_lambda1(&p);
            assert!((top - 1.0).abs() < 1e-3 && (bottom - 1.0).abs() < 1e-3, "{top} {bottom}");
            assert_eq!(classify(&p).unwrap().kind, Kind::Parabolic);
        }
    }
}
