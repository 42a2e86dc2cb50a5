//! Random points and automorphisms for tests, fixtures and Monte Carlo checks.

use rand::Rng;

use crate::geometry::{BallPoint, BoundaryPoint, GroupElement};
use crate::linalg::{self, norm, CVec, C64};
use crate::normal_forms::{make_a, make_k_unchecked, make_m_unchecked};

/// Uniform direction, radius `r^{1/(2m)}` scaled so the point is uniform in the
/// ball of radius `max_radius`.
pub fn random_ball_point<R: Rng + ?Sized>(m: usize, max_radius: f64, rng: &mut R) -> BallPoint {
    let dir = random_boundary_point(m, rng).into_vec();
    let u: f64 = rng.random();
    let r = max_radius.min(1.0 - 1e-12) * u.powf(1.0 / (2 * m) as f64);
    BallPoint::new(dir * C64::new(r, 0.0)).expect("radius below one")
}

pub fn random_boundary_point<R: Rng + ?Sized>(m: usize, rng: &mut R) -> BoundaryPoint {
    loop {
        let v = linalg::random_vector(m, rng);
        if norm(&v) > 1e-6 {
            return BoundaryPoint::renormalized(v);
        }
    }
}

pub fn random_k<R: Rng + ?Sized>(m: usize, rng: &mut R) -> GroupElement {
    make_k_unchecked(&linalg::haar_unitary(m, rng))
}

pub fn random_m<R: Rng + ?Sized>(m: usize, rng: &mut R) -> GroupElement {
    if m == 1 {
        return GroupElement::identity(1);
    }
    make_m_unchecked(&linalg::haar_unitary(m - 1, rng))
}

/// `k1 a_t k2` with Haar `k1, k2` and `t` uniform on `[0, t_max]`.
pub fn random_group_element<R: Rng + ?Sized>(m: usize, t_max: f64, rng: &mut R) -> GroupElement {
    let t = rng.random_range(0.0..=t_max);
    random_k(m, rng).compose(&make_a(m, t)).compose(&random_k(m, rng))
}

/// `h k a_t h^{-1}` with `t` uniform on `[t_min, t_max]`, `k` Haar in `M` and
/// `h = k' a_s k''` a random conjugator with `s <= h_spread`.
pub fn random_loxodromic<R: Rng + ?Sized>(
    m: usize,
    t_min: f64,
    t_max: f64,
    h_spread: f64,
    rng: &mut R,
) -> (GroupElement, GroupElement, f64) {
    let t = rng.random_range(t_min..=t_max);
    let h = random_group_element(m, h_spread, rng);
    let core = random_m(m, rng).compose(&make_a(m, t));
    (core.conjugate_by(&h), h, t)
}

pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    random_boundary_point(n, rng).into_vec()
}

/// `exp(s N)` for the nilpotent `N = q u^* J - u q^* J` with `q = e1 + e_{m+1}`
/// and `u = e2` (for `m = 1`, `N = i q q^* J`). Fixes the boundary point `e1`
/// and nothing else.
pub fn unipotent_parabolic(m: usize, s: f64) -> GroupElement {
    use crate::linalg::{CMat, I, ONE};
    let n = m + 1;
    let mut q = CVec::zeros(n);
    q[0] = ONE;
    q[m] = ONE;
    let mut jq = q.clone();
    jq[m] = -ONE;
    let nil = if m == 1 {
        &q * jq.adjoint() * I
    } else {
        let mut u = CVec::zeros(n);
        u[1] = ONE;
        &q * u.adjoint() - &u * jq.adjoint()
    };
    let g = CMat::identity(n, n) + &nil * C64::new(s, 0.0) + &nil * &nil * C64::new(0.5 * s * s, 0.0);
    GroupElement::from_unitary_lift(&g)
}
