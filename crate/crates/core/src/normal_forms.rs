//! The subgroups `A`, `K`, `M`, the Cartan decomposition `g = k1 a_t k2`, and
//! the normal form `g = h k a_t h^{-1}` of a loxodromic element.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{form_value, GroupElement, HermitianForm};
use crate::linalg::{self, norm, unitarity_defect, CMat, CVec, C64, ONE};
use crate::spectral::{classify_with, Kind};
use crate::tolerance::Tolerances;

/// `a_t`: `cosh t` on the two diagonal corners, `sinh t` on the two
/// off-diagonal corners, identity in the middle.
pub fn make_a(m: usize, t: f64) -> GroupElement {
    assert!(t.is_finite(), "make_a needs a finite parameter");
    // Stored as e^{-|t|} a_t so that large |t| does not overflow.
    let n = m + 1;
    let s = t.abs();
    let decay = (-2.0 * s).exp();
    let ch = 0.5 * (1.0 + decay);
    let sh = 0.5 * (1.0 - decay) * t.signum();
    let mut lift = CMat::identity(n, n) * C64::new((-s).exp(), 0.0);
    lift[(0, 0)] = C64::new(ch, 0.0);
    lift[(m, m)] = C64::new(ch, 0.0);
    lift[(0, m)] = C64::new(sh, 0.0);
    lift[(m, 0)] = C64::new(sh, 0.0);
    GroupElement::from_parts(lift, s)
}

/// `diag(U, 1)` for an `m x m` unitary `U`.
pub fn make_k(u: &CMat) -> Result<GroupElement> {
    check_unitary(u)?;
    Ok(make_k_unchecked(u))
}

/// `diag(1, U, 1)` for an `(m-1) x (m-1)` unitary `U`.
pub fn make_m(u: &CMat) -> Result<GroupElement> {
    check_unitary(u)?;
    Ok(make_m_unchecked(u))
}

fn check_unitary(u: &CMat) -> Result<()> {
    if u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch { expected: u.nrows(), found: u.ncols() });
    }
    let residual = unitarity_defect(u);
    if residual > Tolerances::default().group {
        return Err(Error::NotUnitary { residual });
    }
    Ok(())
}

pub(crate) fn make_k_unchecked(u: &CMat) -> GroupElement {
    let m = u.nrows();
    let mut g = CMat::identity(m + 1, m + 1);
    g.view_mut((0, 0), (m, m)).copy_from(u);
    GroupElement::from_unitary_lift(&g)
}

pub(crate) fn make_m_unchecked(u: &CMat) -> GroupElement {
    let k = u.nrows();
    let mut g = CMat::identity(k + 2, k + 2);
    g.view_mut((1, 1), (k, k)).copy_from(u);
    GroupElement::from_unitary_lift(&g)
}

/// Relative size of the entries of `g` outside the `K` pattern `[[U,0],[0,*]]`.
pub fn k_shape_residual(g: &GroupElement) -> f64 {
    let l = g.lift();
    let m = g.m();
    let mut off = 0.0;
    for i in 0..m {
        off += l[(i, m)].norm_sqr() + l[(m, i)].norm_sqr();
    }
    off.sqrt() / linalg::frobenius(l)
}

/// Relative size of the entries of `g` outside the `M` pattern `diag(u, U, u)`.
pub fn m_shape_residual(g: &GroupElement) -> f64 {
    let l = g.lift();
    let m = g.m();
    let n = m + 1;
    let mut off = 0.0;
    for i in 0..n {
        for j in 0..n {
            let inside = (i == j) || (1..m).contains(&i) && (1..m).contains(&j);
            if !inside {
                off += l[(i, j)].norm_sqr();
            }
        }
    }
    off += (l[(0, 0)] - l[(m, m)]).norm_sqr();
    off.sqrt() / linalg::frobenius(l)
}

/// The unitary block of an element of `K`, phase-normalized so the corner is 1.
pub fn k_block(g: &GroupElement) -> CMat {
    let m = g.m();
    let l = g.lift();
    let d = l[(m, m)];
    l.view((0, 0), (m, m)).into_owned() / d
}

/// The `(m-1) x (m-1)` unitary block of an element of `M`, corner normalized to 1.
pub fn m_block(g: &GroupElement) -> CMat {
    let m = g.m();
    let l = g.lift();
    let d = l[(m, m)];
    l.view((1, 1), (m - 1, m - 1)).into_owned() / d
}

#[derive(Debug, Clone, Serialize)]
pub struct KakFactors {
    pub k1: GroupElement,
    pub t: f64,
    pub k2: GroupElement,
    /// Projective distance between `k1 a_t k2` and the input.
    pub residual: f64,
}

pub fn kak(g: &GroupElement) -> Result<KakFactors> {
    kak_with(g, &Tolerances::default())
}

/// Cartan decomposition following the constructive proof: `k1` rotates
/// `g(0)` onto the positive `e1` axis, `t = atanh |g(0)|`, and
/// `k2 = a_t^{-1} k1^{-1} g` is then checked to lie in `K`.
pub fn kak_with(g: &GroupElement, tol: &Tolerances) -> Result<KakFactors> {
    let m = g.m();
    let g0 = g.act_with(&CVec::zeros(m), tol.denom)?;
    let r = norm(&g0);
    if r >= 1.0 - 1e-15 {
        return Err(Error::Degenerate(format!(
            "|g(0)| = {r} is not below 1; the input is not a bounded automorphism"
        )));
    }
    let t = r.atanh();
    let k1 = if r == 0.0 {
        GroupElement::identity(m)
    } else {
        make_k_unchecked(&linalg::unitary_completion(&(g0 / C64::new(r, 0.0))))
    };
    let rest = make_a(m, -t).compose(&k1.inverse()).compose(g);
    let shape = k_shape_residual(&rest);
    if shape > tol.group.max(1e-9) {
        return Err(Error::BlockShape { residual: shape });
    }
    let k2 = make_k_unchecked(&nearest_unitary(&k_block(&rest)));
    let residual = k1.compose(&make_a(m, t)).compose(&k2).distance(g);
    Ok(KakFactors { k1, t, k2, residual })
}

/// Polar factor of a nearly unitary matrix.
fn nearest_unitary(a: &CMat) -> CMat {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    u * v_t
}

#[derive(Debug, Clone, Serialize)]
pub struct LoxodromicNormalForm {
    pub h: GroupElement,
    pub k: GroupElement,
    pub t: f64,
    /// Projective distance between `h k a_t h^{-1}` and the input.
    pub residual: f64,
}

pub fn loxodromic_normal_form(g: &GroupElement) -> Result<LoxodromicNormalForm> {
    loxodromic_normal_form_with(g, &Tolerances::default())
}

pub fn loxodromic_normal_form_with(g: &GroupElement, tol: &Tolerances) -> Result<LoxodromicNormalForm> {
    let data = classify_with(g, tol)?;
    if data.kind != Kind::Loxodromic {
        return Err(Error::NotLoxodromic { kind: data.kind.to_string() });
    }
    let xp = data.fixed_plus.expect("loxodromic data carries fixed points");
    let xm = data.fixed_minus.expect("loxodromic data carries fixed points");
    let h = pair_mover(xp.as_vec(), xm.as_vec())?;
    let m = g.m();
    let x = h.inverse().compose(g).compose(&h).unitary_lift();
    // X = mu k a_t fixes the null line through q+ = e1 + e_{m+1} with eigenvalue mu e^t.
    let lam = x[(m, 0)] + x[(m, m)];
    let t = lam.norm().ln();
    let mu = lam / lam.norm();
    let core = GroupElement::from_unitary_lift(&(x / mu));
    let k = core.compose(&make_a(m, -t));
    let shape = m_shape_residual(&k);
    if shape > 1e-8 {
        return Err(Error::BlockShape { residual: shape });
    }
    let k = if m == 1 { GroupElement::identity(1) } else { make_m_unchecked(&nearest_unitary(&m_block(&k))) };
    let residual = h.compose(&k).compose(&make_a(m, t)).compose(&h.inverse()).distance(g);
    Ok(LoxodromicNormalForm { h, k, t, residual })
}

/// An automorphism sending `e1` to `xp` and `-e1` to `xm`.
///
/// The first and last columns are built from null lifts of the two points,
/// the middle columns are a form-orthonormal basis of their complement.
pub fn pair_mover(xp: &CVec, xm: &CVec) -> Result<GroupElement> {
    let m = xp.len();
    let form = HermitianForm::new(m);
    let pp = crate::geometry::homogenize(xp);
    let pm = crate::geometry::homogenize(xm);
    let pair = form_value(&pp, &pm, &form)?;
    if pair.norm() < 1e-14 {
        return Err(Error::Degenerate("the two boundary points coincide".into()));
    }
    let beta = C64::new(-2.0, 0.0) / pair.conj();
    let pm = pm * beta;
    let half = C64::new(0.5, 0.0);
    let first = (&pp - &pm) * half;
    let last = (&pp + &pm) * half;
    let mut cols: Vec<CVec> = vec![first.clone()];
    let mut middle: Vec<CVec> = Vec::new();
    let project = |v: &CVec, middle: &[CVec]| -> CVec {
        let mut r = v.clone();
        for _ in 0..2 {
            let a = form_value(&r, &first, &form).unwrap();
            let b = form_value(&r, &last, &form).unwrap();
            r = r - &first * a + &last * b;
            for c in middle {
                let k = form_value(&r, c, &form).unwrap();
                r -= c * k;
            }
        }
        r
    };
    let mut used = vec![false; m + 1];
    while middle.len() + 1 < m {
        let mut best: Option<(usize, CVec, f64)> = None;
        for (j, _) in used.iter().enumerate().filter(|(_, u)| !**u) {
            let mut e = CVec::zeros(m + 1);
            e[j] = ONE;
            let r = project(&e, &middle);
            let q = form_value(&r, &r, &form)?.re;
            if best.as_ref().is_none_or(|b| q > b.2) {
                best = Some((j, r, q));
            }
        }
        let (j, r, q) = best.expect("complement is nonempty");
        if !(q > 1e-12) {
            return Err(Error::Degenerate("could not complete a form-orthonormal basis".into()));
        }
        used[j] = true;
        middle.push(r / C64::new(q.sqrt(), 0.0));
    }
    cols.extend(middle);
    cols.push(last);
    let h = CMat::from_columns(&cols);
    GroupElement::with_tolerance(h, 1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::basis_vector;
    use crate::sampling::{random_k, random_loxodromic, random_m};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn a_zero_is_identity() {
        assert!(make_a(3, 0.0).approx_eq(&GroupElement::identity(3), 1e-15));
    }

    #[test]
    fn a_ln2_corners() {
        let g = make_a(2, 2f64.ln()).unitary_lift();
        assert!((g[(0, 0)].re - 1.25).abs() < 1e-14);
        assert!((g[(0, 2)].re - 0.75).abs() < 1e-14);
        assert!((g[(2, 2)].re - 1.25).abs() < 1e-14);
        assert!((g[(1, 1)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn a_group_law_and_large_parameters() {
        let a = make_a(2, 0.3).compose(&make_a(2, 0.5));
        assert!(a.approx_eq(&make_a(2, 0.8), 1e-14));
        let big = make_a(2, 900.0);
        assert!(big.lift().iter().all(|c| c.re.is_finite()));
        assert!((crate::spectral::log_sigma1(&big) - 900.0).abs() < 1e-9);
    }

    #[test]
    fn k_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let k = random_k(3, &mut rng);
        let v = CVec::from_vec(vec![C64::new(0.1, 0.2), C64::new(0.3, 0.0), C64::new(0.0, -0.4)]);
        assert!((norm(&k.act(&v).unwrap()) - norm(&v)).abs() < 1e-14);
    }

    #[test]
    fn m_commutes_with_a() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let k = random_m(3, &mut rng);
        let a = make_a(3, 0.7);
        assert!(k.compose(&a).distance(&a.compose(&k)) < 1e-12);
    }

    #[test]
    fn make_k_rejects_non_unitary() {
        let u = CMat::identity(2, 2) * C64::new(1.1, 0.0);
        assert!(matches!(make_k(&u), Err(Error::NotUnitary { .. })));
        assert!(make_k(&CMat::identity(2, 2)).unwrap().approx_eq(&GroupElement::identity(2), 1e-15));
    }

    #[test]
    fn kak_of_k_element() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = random_k(2, &mut rng);
        let f = kak(&k).unwrap();
        assert!(f.t.abs() < 1e-15);
        assert!(f.k1.compose(&f.k2).approx_eq(&k, 1e-12));
    }

    #[test]
    fn kak_of_a() {
        let f = kak(&make_a(3, 1.3)).unwrap();
        assert!((f.t - 1.3).abs() < 1e-12);
    }

    #[test]
    fn kak_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let s: f64 = rand::Rng::random_range(&mut rng, 0.0..4.0);
            let g = random_k(2, &mut rng).compose(&make_a(2, s)).compose(&random_k(2, &mut rng));
            let f = kak(&g).unwrap();
            assert!(f.residual < 1e-10);
            assert!((f.t - s).abs() < 1e-10);
            assert!(k_shape_residual(&f.k1) < 1e-14 && k_shape_residual(&f.k2) < 1e-14);
            assert!(norm(&f.k1.act(&CVec::zeros(2)).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn kak_rejects_boundary_escape() {
        let g = make_a(2, 40.0);
        assert!(kak(&g).is_err());
    }

    #[test]
    fn pair_mover_sends_basis_to_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in 1..4 {
            let x = crate::sampling::random_boundary_point(m, &mut rng).into_vec();
            let y = crate::sampling::random_boundary_point(m, &mut rng).into_vec();
            let h = pair_mover(&x, &y).unwrap();
            let e1 = basis_vector(m, 0);
            assert!(norm(&(h.act(&e1).unwrap() - &x)) < 1e-10);
            assert!(norm(&(h.act(&(-&e1)).unwrap() - &y)) < 1e-10);
        }
    }

    #[test]
    fn normal_form_of_a() {
        let nf = loxodromic_normal_form(&make_a(2, 0.9)).unwrap();
        assert!((nf.t - 0.9).abs() < 1e-12);
        assert!(nf.residual < 1e-12);
    }

    #[test]
    fn normal_form_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for m in 1..4 {
            for _ in 0..20 {
                let (g, h0, t) = random_loxodromic(m, 0.3, 1.5, 1.0, &mut rng);
                let nf = loxodromic_normal_form(&g).unwrap();
                assert!((nf.t - t).abs() < 1e-9, "t {} vs {}", nf.t, t);
                assert!(nf.residual < 1e-9);
                assert!(m_shape_residual(&nf.k) < 1e-12);
                let e1 = basis_vector(m, 0);
                let a = nf.h.act(&e1).unwrap();
                let b = h0.act(&e1).unwrap();
                assert!(norm(&(a - b)) < 1e-9);
            }
        }
    }

    #[test]
    fn normal_form_rejects_elliptic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let k = random_k(2, &mut rng);
        assert!(matches!(loxodromic_normal_form(&k), Err(Error::NotLoxodromic { .. })));
    }
}
