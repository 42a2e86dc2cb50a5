//! Pairs `(φ, ψ)` with `f ∘ φ = ψ ∘ f`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{lift_point, random_interior, RationalProperMap};
use crate::error::{Error, Result};
use crate::geometry::GroupElement;
use crate::linalg::{self, norm, CMat, C64};
use crate::spectral::{classify_with, Kind};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetryPair {
    pub phi: GroupElement,
    pub psi: GroupElement,
}

#[derive(Debug, Clone, Serialize)]
pub struct LoxoPairReport {
    pub psi_kind: Kind,
    pub lambda_phi: f64,
    pub lambda_psi: f64,
    pub alpha: f64,
    /// `λ1(ψ) <= λ1(φ)`.
    pub upper_ok: bool,
    /// `λ1(ψ) >= λ1(φ)^α`.
    pub lower_ok: bool,
    /// `max dist(f(w), L_ψ)` over `w ∈ L_φ ∩ closed ball`.
    pub axis_residual: f64,
    pub passed: bool,
}

const SAMPLE_RADIUS: f64 = 0.9;

/// `max ‖f(φ(z)) - ψ(f(z))‖` over random interior samples.
pub fn verify_symmetry_pair(f: &RationalProperMap, pair: &SymmetryPair, n_samples: usize, seed: u64) -> Result<f64> {
    if pair.phi.m() != f.m() {
        return Err(Error::DimensionMismatch { expected: f.m(), found: pair.phi.m() });
    }
    if pair.psi.m() != f.big_m() {
        return Err(Error::DimensionMismatch { expected: f.big_m(), found: pair.psi.m() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for z in random_interior(f.m(), n_samples, SAMPLE_RADIUS, &mut rng) {
        let lhs = f.eval(&pair.phi.act(&z)?)?;
        let rhs = pair.psi.act(&f.eval(&z)?)?;
        worst = worst.max(norm(&(lhs - rhs)));
    }
    Ok(worst)
}

/// `φ` acting on the first `m` coordinates of `B^M` and trivially on the rest.
pub fn block_extension(phi: &GroupElement, big_m: usize) -> Result<GroupElement> {
    let m = phi.m();
    if big_m < m {
        return Err(Error::DimensionMismatch { expected: m, found: big_m });
    }
    let l = phi.unitary_lift();
    let mut out = CMat::identity(big_m + 1, big_m + 1);
    let map = |i: usize| if i < m { i } else { big_m };
    for i in 0..=m {
        for j in 0..=m {
            out[(map(i), map(j))] = l[(i, j)];
        }
    }
    GroupElement::new(out)
}

fn j_mul(x: &CMat) -> CMat {
    let mut y = x.clone();
    let last = y.nrows() - 1;
    y.row_mut(last).neg_mut();
    y
}

fn invert(a: &CMat) -> Option<CMat> {
    a.clone().try_inverse().filter(|inv| inv.iter().all(|c| c.re.is_finite() && c.im.is_finite()))
}

/// Columns `X` rescaled so that `X^* J X = Id`, assuming a positive definite Gram matrix.
fn j_orthonormalize(x: &CMat) -> Option<CMat> {
    if x.ncols() == 0 {
        return Some(x.clone());
    }
    let gram = x.adjoint() * j_mul(x);
    let gram = (&gram + gram.adjoint()) * C64::new(0.5, 0.0);
    let chol = gram.cholesky()?;
    let l_inv = invert(&chol.l())?;
    Some(x * l_inv.adjoint())
}

/// Newton iteration towards the nearest element of `U(n,1)`.
pub(crate) fn project_to_group(mut g: CMat) -> Option<CMat> {
    let n = g.nrows();
    let j = j_mul(&CMat::identity(n, n));
    for _ in 0..20 {
        let defect = linalg::frobenius(&(g.adjoint() * &j * &g - &j));
        if defect < 1e-14 * n as f64 {
            break;
        }
        let inv_adj = invert(&g.adjoint())?;
        g = (&g + &j * inv_adj * &j) * C64::new(0.5, 0.0);
    }
    Some(g)
}

/// Least-squares partner `ψ` of `φ` in the stabilizer of `f`, with its residual.
pub fn find_psi(f: &RationalProperMap, phi: &GroupElement, n_samples: usize, seed: u64) -> Result<(GroupElement, f64)> {
    if phi.m() != f.m() {
        return Err(Error::DimensionMismatch { expected: f.m(), found: phi.m() });
    }
    let big_m = f.big_m();
    let n = big_m + 1;
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zs = random_interior(f.m(), n_samples, SAMPLE_RADIUS, &mut rng);
    let mut src = Vec::with_capacity(zs.len());
    let mut dst = Vec::with_capacity(zs.len());
    for z in &zs {
        src.push(lift_point(&f.eval(z)?));
        dst.push(f.eval(&phi.act(z)?)?);
    }
    // restrict to the span S of the lifted images
    let b = linalg::column_span(&CMat::from_columns(&src), 1e-10);
    let r = b.ncols();
    let unknowns = n * r;
    let mut rows = CMat::zeros(zs.len() * big_m, unknowns);
    for (i, (v, u)) in src.iter().zip(&dst).enumerate() {
        let y = b.adjoint() * v;
        for j in 0..big_m {
            let row = i * big_m + j;
            for k in 0..r {
                rows[(row, j + n * k)] += y[k];
                rows[(row, big_m + n * k)] -= u[j] * y[k];
            }
        }
    }
    let (_, null) = linalg::nullspace(&rows, tol.rank);
    if null.ncols() > 1 {
        return Err(Error::Inconclusive(format!("fit matrix has a {}-dimensional nullspace", null.ncols())));
    }
    let sol = if null.ncols() == 1 {
        null.column(0).into_owned()
    } else {
        linalg::smallest_right_singular(&rows).1
    };
    let y = CMat::from_fn(n, r, |a, k| sol[a + n * k]);

    let identity = GroupElement::identity(big_m);
    let id_residual = verify_symmetry_pair(f, &SymmetryPair { phi: phi.clone(), psi: identity.clone() }, n_samples, seed ^ 0x5eed)?;
    let mut best = (identity, id_residual);
    if let Some(g) = extend_fit(&b, &y) {
        if let Ok(psi) = GroupElement::new(g) {
            let res = verify_symmetry_pair(f, &SymmetryPair { phi: phi.clone(), psi: psi.clone() }, n_samples, seed ^ 0x5eed)?;
            if res < best.1 {
                best = (psi, res);
            }
        }
    }
    Ok(best)
}

/// Extends `Y` on `S = span(B)` to a J-unitary map, sending the J-orthogonal
/// complement of `S` to that of `Y(S)` as close to the identity as possible.
fn extend_fit(b: &CMat, y: &CMat) -> Option<CMat> {
    let n = b.nrows();
    let r = b.ncols();
    let g_s = b.adjoint() * j_mul(b);
    let g_inv = invert(&g_s)?;
    let h = y.adjoint() * j_mul(y);
    let s = (&g_inv * &h).trace().re / r as f64;
    if !(s > 0.0 && s.is_finite()) {
        return None;
    }
    let y = y / C64::new(s.sqrt(), 0.0);
    let psi_s = &y * &g_inv * j_mul(b).adjoint();
    let mut q = CMat::zeros(n, n);
    if r < n {
        let (_, c_basis) = linalg::nullspace(&j_mul(b).adjoint(), 1e-10);
        let e = j_orthonormalize(&c_basis)?;
        let h_inv = invert(&(y.adjoint() * j_mul(&y)))?;
        let p_c = CMat::identity(n, n) - &y * h_inv * j_mul(&y).adjoint();
        let e_img = j_orthonormalize(&(p_c * &e))?;
        q = e_img * j_mul(&e).adjoint();
    }
    // the phase on S is free; take the one closest to the identity
    let target = CMat::identity(n, n) - &q;
    let overlap = (target.adjoint() * &psi_s).trace();
    let phase = if overlap.norm() > 0.0 { overlap.conj() / overlap.norm() } else { C64::new(1.0, 0.0) };
    project_to_group(psi_s * phase + q)
}

/// Checks the conclusions for a loxodromic `φ`: `ψ` is loxodromic,
/// `λ1(φ)^α <= λ1(ψ) <= λ1(φ)`, and `f` maps the axis of `φ` into the axis of `ψ`.
pub fn check_loxo_pair(f: &RationalProperMap, pair: &SymmetryPair, alpha: f64, tol: &Tolerances) -> Result<LoxoPairReport> {
    let residual = verify_symmetry_pair(f, pair, 200, 17)?;
    if residual > tol.sym {
        return Err(Error::Precondition(format!("symmetry residual {residual:.3e} exceeds {:.1e}", tol.sym)));
    }
    let sp = classify_with(&pair.phi, tol)?;
    if sp.kind != Kind::Loxodromic {
        return Err(Error::NotLoxodromic { kind: sp.kind.to_string() });
    }
    let sq = classify_with(&pair.psi, tol)?;
    let (lp, lq) = (sp.lambda1, sq.lambda1);
    let slack = 1e-9;
    let upper_ok = lq.ln() <= lp.ln() * (1.0 + slack) + slack;
    let lower_ok = lq.ln() >= alpha * lp.ln() * (1.0 - slack) - slack;
    let axis_residual = match (&sp.axis, &sq.axis) {
        (Some(lphi), Some(lpsi)) => {
            let mut worst: f64 = 0.0;
            for w in lphi.disk_points(4, 8) {
                worst = worst.max(lpsi.distance(&f.eval_with(&w, tol)?));
            }
            worst
        }
        _ => f64::INFINITY,
    };
    let passed = sq.kind == Kind::Loxodromic && upper_ok && lower_ok && axis_residual <= tol.line;
    Ok(LoxoPairReport {
        psi_kind: sq.kind,
        lambda_phi: lp,
        lambda_psi: lq,
        alpha,
        upper_ok,
        lower_ok,
        axis_residual,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{degree2_homogeneous, random_interior, sym2, trivial_embedding};
    use crate::normal_forms::{make_a, make_k};
    use crate::sampling::{random_group_element, random_k, random_loxodromic};

    #[test]
    fn block_extension_commutes_with_trivial_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = trivial_embedding(2, 4);
        for _ in 0..5 {
            let phi = random_group_element(2, 1.5, &mut rng);
            let psi = block_extension(&phi, 4).unwrap();
            let r = verify_symmetry_pair(&f, &SymmetryPair { phi, psi }, 100, 2).unwrap();
            assert!(r <= 1e-10, "{r}");
        }
    }

    #[test]
    fn sym2_pair_for_degree2_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = linalg::haar_unitary(2, &mut rng);
        let s = sym2(&u);
        assert!(linalg::unitarity_defect(&s) < 1e-14);
        let pair = SymmetryPair { phi: make_k(&u).unwrap(), psi: make_k(&s).unwrap() };
        assert!(verify_symmetry_pair(&degree2_homogeneous(), &pair, 100, 4).unwrap() <= 1e-10);
    }

    #[test]
    fn find_psi_recovers_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = trivial_embedding(2, 3);
        for _ in 0..5 {
            let phi = random_group_element(2, 1.5, &mut rng);
            let (psi, res) = find_psi(&f, &phi, 60, 8).unwrap();
            assert!(res <= 1e-9, "{res}");
            // acts as phi on C^2 x {0}
            let block = block_extension(&phi, 3).unwrap();
            for z in random_interior(2, 5, 0.9, &mut rng) {
                let w = z.insert_row(2, crate::linalg::ZERO);
                assert!(norm(&(psi.act(&w).unwrap() - block.act(&w).unwrap())) < 1e-9);
            }
        }
        let (psi, res) = find_psi(&f, &GroupElement::identity(2), 60, 8).unwrap();
        assert!(res <= 1e-12);
        assert!(psi.distance(&GroupElement::identity(3)) < 1e-10);
    }

    #[test]
    fn find_psi_on_conjugated_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let phi0 = random_group_element(2, 0.8, &mut rng);
        let psi0 = random_group_element(4, 0.8, &mut rng);
        let f = trivial_embedding(2, 4).precompose(&phi0).unwrap().postcompose(&psi0).unwrap();
        let phi = random_group_element(2, 1.0, &mut rng);
        let (_, res) = find_psi(&f, &phi, 80, 3).unwrap();
        assert!(res <= 1e-9, "{res}");
    }

    #[test]
    fn degree2_map_has_no_partner_for_a_t() {
        let f = degree2_homogeneous();
        let (_, res) = find_psi(&f, &make_a(2, 0.5), 80, 5).unwrap();
        assert!(res >= 0.1, "{res}");
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let k = random_k(2, &mut rng);
        let (_, res) = find_psi(&f, &k, 80, 5).unwrap();
        assert!(res <= 1e-9, "{res}");
    }

    #[test]
    fn loxo_pair_on_trivial_family() {
        let tol = Tolerances::default();
        let f = trivial_embedding(2, 3);
        let phi = make_a(2, 0.7);
        let pair = SymmetryPair { psi: block_extension(&phi, 3).unwrap(), phi };
        let r = check_loxo_pair(&f, &pair, 1.0, &tol).unwrap();
        assert!(r.passed, "{r:?}");
        assert!((r.lambda_psi / r.lambda_phi - 1.0).abs() < 1e-9);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let phi0 = random_group_element(2, 0.8, &mut rng);
        let psi0 = random_group_element(3, 0.8, &mut rng);
        let g = f.precompose(&phi0).unwrap().postcompose(&psi0).unwrap();
        for _ in 0..5 {
            let (phi, _, _) = random_loxodromic(2, 0.3, 1.5, 1.0, &mut rng);
            let pair = SymmetryPair {
                phi: phi.conjugate_by(&phi0.inverse()),
                psi: block_extension(&phi, 3).unwrap().conjugate_by(&psi0),
            };
            let r = check_loxo_pair(&g, &pair, 1.0, &tol).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn loxo_pair_rejects_elliptic() {
        let f = trivial_embedding(2, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let k = random_k(2, &mut rng);
        let pair = SymmetryPair { psi: block_extension(&k, 3).unwrap(), phi: k };
        assert!(matches!(
            check_loxo_pair(&f, &pair, 1.0, &Tolerances::default()),
            Err(Error::NotLoxodromic { .. })
        ));
    }
}
