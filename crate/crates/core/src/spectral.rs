//! Spectral radius, top singular value and the elliptic / parabolic /
//! loxodromic trichotomy.

use std::fmt;

use nalgebra::Schur;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dehomogenize, form_value, line_through, AffineLine, BallPoint, BoundaryPoint, GroupElement, HermitianForm};
use crate::linalg::{self, norm, CMat, CVec, C64};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    Elliptic,
    Parabolic,
    Loxodromic,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Elliptic => "Elliptic",
            Kind::Parabolic => "Parabolic",
            Kind::Loxodromic => "Loxodromic",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralData {
    pub lambda1: f64,
    pub sigma1: f64,
    pub kind: Kind,
    pub fixed_plus: Option<BoundaryPoint>,
    pub fixed_minus: Option<BoundaryPoint>,
    pub interior_fixed: Option<BallPoint>,
    pub axis: Option<AffineLine>,
}

/// `ln sigma_1` of the `U(m,1)` lift.
pub fn log_sigma1(g: &GroupElement) -> f64 {
    linalg::largest_singular_value(g.lift()).ln() + g.log_scale()
}

/// Top singular value of the `U(m,1)` lift; independent of the lift phase.
pub fn sigma1(g: &GroupElement) -> f64 {
    log_sigma1(g).exp()
}

/// `|g(0)| = (sigma1^2 - 1) / (sigma1^2 + 1)`, evaluated as `tanh(ln sigma1)`.
pub fn norm_at_origin(g: &GroupElement) -> f64 {
    log_sigma1(g).max(0.0).tanh()
}

/// Eigenvalues of the normalized lift from a complex Schur form.
fn schur_eigenvalues(a: &CMat) -> Vec<C64> {
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 10_000)
        .unwrap_or_else(|| Schur::new(a.clone()));
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Above this spectral-radius margin the top eigenvalue is treated as simple
/// and well separated; below it a Jordan block at modulus one can masquerade
/// as a small expansion, so the radius is taken from the growth of powers.
const SIMPLE_MARGIN: f64 = 1e-3;

/// Rounding in 2^16 sequential products shows up as apparent growth of
/// order 1e-7 per step; below this the growth estimate cannot tell a
/// Jordan block from a slow expansion.
const GROWTH_FLOOR: f64 = 1e-6;

/// Shifted inverse iteration; returns the eigenvector and refined eigenvalue.
fn inverse_iteration(a: &CMat, shift: C64, start: &CVec) -> Option<(CVec, C64)> {
    let n = a.nrows();
    let nudge = shift * C64::new(1.0 + 1e-11, 1e-11);
    let lu = (a - CMat::identity(n, n) * nudge).lu();
    let mut v = start / C64::new(norm(start), 0.0);
    for _ in 0..6 {
        let w = lu.solve(&v)?;
        let nw = norm(&w);
        if !(nw.is_finite() && nw > 0.0) {
            return None;
        }
        v = w / C64::new(nw, 0.0);
    }
    let av = a * &v;
    Some((v.clone(), linalg::inner(&av, &v)))
}

/// Eigenpair of the largest (or smallest) modulus eigenvalue of the normalized lift.
fn extreme_eigenpair(g: &GroupElement, largest: bool) -> Option<(CVec, C64)> {
    let l = g.lift();
    let eig = schur_eigenvalues(l);
    let pick = eig.iter().copied().fold(None::<C64>, |acc, e| match acc {
        None => Some(e),
        Some(b) => {
            let better = if largest { e.norm() > b.norm() } else { e.norm() < b.norm() };
            Some(if better { e } else { b })
        }
    })?;
    let n = l.nrows();
    let start = CVec::from_fn(n, |i, _| C64::new(1.0 + 0.1 * i as f64, 0.3 - 0.05 * i as f64));
    inverse_iteration(l, pick, &start)
}

/// Growth estimate of `ln lambda_1` from sequential powers `g^n`, `n <= 2^16`.
///
/// Writing `ln sigma_1(g^n) = n ln lambda_1 + p ln n + c + o(1)`, the second
/// difference over `n, 2n, 4n` removes the polynomial and constant terms.
/// Powers are accumulated one factor at a time: repeated squaring of a
/// unipotent lift cancels catastrophically and manufactures spurious growth.
fn sequential_growth(g: &GroupElement) -> (f64, f64) {
    const N: usize = 1 << 16;
    let l = g.lift();
    let n = l.nrows();
    let mut p = CMat::identity(n, n);
    let mut log_acc = 0.0;
    let mut marks = [0.0; 3];
    for step in 1..=N {
        p = l * &p;
        let f = linalg::frobenius(&p);
        p /= C64::new(f, 0.0);
        log_acc += f.ln() + g.log_scale();
        let slot = match step {
            s if s == N / 4 => Some(0),
            s if s == N / 2 => Some(1),
            s if s == N => Some(2),
            _ => None,
        };
        if let Some(i) = slot {
            marks[i] = log_acc + linalg::largest_singular_value(&p).ln();
        }
    }
    let a = (marks[2] - 2.0 * marks[1] + marks[0]) / (N / 4) as f64;
    (a, marks[2] / N as f64)
}

/// Spectral radius of the `U(m,1)` lift.
pub fn lambda1(g: &GroupElement) -> Result<f64> {
    lambda1_with(g, &Tolerances::default())
}

pub fn lambda1_with(g: &GroupElement, tol: &Tolerances) -> Result<f64> {
    Ok(log_lambda1(g, tol)?.exp())
}

/// `ln lambda_1`, computed without forming large matrix entries.
pub fn log_lambda1(g: &GroupElement, tol: &Tolerances) -> Result<f64> {
    Ok(analyze(g, tol)?.log_lambda1)
}

struct Analysis {
    log_lambda1: f64,
    interior: Option<CVec>,
    null_points: Vec<CVec>,
}

/// Spectral radius together with the fixed-point structure at modulus one.
///
/// A top eigenvalue clearly off the unit circle is simple and is refined
/// by inverse iteration. Otherwise the eigenspaces decide: a negative-type
/// eigenvector means an elliptic element (whose spectrum is then reliable),
/// and in the remaining case the radius is read off the growth of powers.
fn analyze(g: &GroupElement, tol: &Tolerances) -> Result<Analysis> {
    let l = g.lift();
    let eig = schur_eigenvalues(l);
    let schur_top = eig.iter().map(|e| e.norm()).fold(0.0, f64::max).ln() + g.log_scale();
    let refined = || extreme_eigenpair(g, true).map(|(_, mu)| mu.norm().ln() + g.log_scale());
    if schur_top > SIMPLE_MARGIN {
        let log_l = refined().unwrap_or(schur_top);
        return Ok(Analysis { log_lambda1: log_l, interior: None, null_points: Vec::new() });
    }
    let (interior, null_points) = unit_circle_fixed_vectors(l, &eig, tol)?;
    if interior.is_some() {
        return Ok(Analysis { log_lambda1: schur_top.max(0.0), interior, null_points });
    }
    let (a, upper) = sequential_growth(g);
    if !a.is_finite() {
        return Err(Error::NonConvergence { lower: 1.0, upper: upper.exp() });
    }
    // a single null fixed direction points to a Jordan block, whose rounding
    // perturbation (eps kappa)^(1/3) sets how much growth is meaningful
    let floor = if null_points.len() == 1 {
        (f64::EPSILON * sigma1(g).powi(2)).cbrt().clamp(GROWTH_FLOOR, SIMPLE_MARGIN)
    } else {
        GROWTH_FLOOR
    };
    if a > tol.class.max(floor) {
        let log_l = match refined() {
            Some(r) if (r - a).abs() <= 0.75 * r => r,
            _ => a,
        };
        return Ok(Analysis { log_lambda1: log_l, interior: None, null_points });
    }
    if null_points.len() != 1 {
        // Too slow to show in the growth window, yet no single parabolic
        // fixed point: trust a clearly simple top eigenvalue.
        if let Some(r) = refined().filter(|r| *r > tol.class) {
            return Ok(Analysis { log_lambda1: r, interior: None, null_points });
        }
    }
    // growth below resolution: the radius is one
    Ok(Analysis { log_lambda1: 0.0, interior: None, null_points })
}

/// Scans the eigenspaces of `l` for a negative-type vector (returned first)
/// and collects the distinct null eigenvectors.
fn unit_circle_fixed_vectors(l: &CMat, eig: &[C64], tol: &Tolerances) -> Result<(Option<CVec>, Vec<CVec>)> {
    let n = l.nrows();
    let form = HermitianForm::new(n - 1);
    let mut null_points: Vec<CVec> = Vec::new();
    for mu in cluster_means(eig, 1e-4) {
        let shifted = l - CMat::identity(n, n) * mu;
        let (_, basis) = linalg::nullspace(&shifted, 1e-7);
        if basis.ncols() == 0 {
            continue;
        }
        let restricted = basis.adjoint() * crate::geometry::j_left(&basis);
        let herm = (&restricted + restricted.adjoint()) * C64::new(0.5, 0.0);
        let se = herm.symmetric_eigen();
        let (imin, &emin) = se
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty eigenspace");
        let v = &basis * se.eigenvectors.column(imin).into_owned();
        if emin < -tol.class {
            return Ok((Some(v), null_points));
        }
        if emin.abs() <= tol.class.max(1e-7) {
            if let Some(z) = dehomogenize(&v) {
                let q = form_value(&v, &v, &form)?.re / norm(&v).powi(2);
                if q.abs() <= 1e-6 && !null_points.iter().any(|p| norm(&(p - &z)) < 1e-6) {
                    null_points.push(z);
                }
            }
        }
    }
    Ok((None, null_points))
}

pub fn classify(g: &GroupElement) -> Result<SpectralData> {
    classify_with(g, &Tolerances::default())
}

pub fn classify_with(g: &GroupElement, tol: &Tolerances) -> Result<SpectralData> {
    let Analysis { log_lambda1, interior, mut null_points } = analyze(g, tol)?;
    let lambda1 = log_lambda1.exp();
    let sigma1 = sigma1(g).max(lambda1);
    let mut data = SpectralData {
        lambda1,
        sigma1,
        kind: Kind::Elliptic,
        fixed_plus: None,
        fixed_minus: None,
        interior_fixed: None,
        axis: None,
    };
    if lambda1 > 1.0 + tol.class {
        let (xp, xm) = loxodromic_fixed_points(g)?;
        data.axis = Some(line_through(xp.as_vec(), xm.as_vec(), tol.line)?);
        data.kind = Kind::Loxodromic;
        data.fixed_plus = Some(xp);
        data.fixed_minus = Some(xm);
        return Ok(data);
    }
    if let Some(v) = interior {
        let z = dehomogenize(&v).ok_or_else(|| Error::Degenerate("fixed vector at infinity".into()))?;
        data.interior_fixed = Some(BallPoint::new(z)?);
        return Ok(data);
    }
    if null_points.len() == 1 {
        data.kind = Kind::Parabolic;
        data.fixed_plus = Some(BoundaryPoint::renormalized(null_points.remove(0)));
        return Ok(data);
    }
    Err(Error::Borderline {
        lambda1,
        detail: format!("no negative-type eigenvector and {} null fixed directions", null_points.len()),
    })
}

fn cluster_means(eig: &[C64], radius: f64) -> Vec<C64> {
    let mut clusters: Vec<Vec<C64>> = Vec::new();
    for &e in eig {
        match clusters.iter_mut().find(|c| (c[0] - e).norm() < radius) {
            Some(c) => c.push(e),
            None => clusters.push(vec![e]),
        }
    }
    clusters
        .into_iter()
        .map(|c| c.iter().sum::<C64>() / C64::new(c.len() as f64, 0.0))
        .collect()
}

/// Attracting and repelling fixed points of a loxodromic element, from the
/// eigenvectors of the largest and smallest modulus eigenvalues.
pub fn fixed_points_loxodromic(g: &GroupElement) -> Result<(BoundaryPoint, BoundaryPoint)> {
    let data = classify(g)?;
    match (data.kind, data.fixed_plus, data.fixed_minus) {
        (Kind::Loxodromic, Some(p), Some(q)) => Ok((p, q)),
        (kind, _, _) => Err(Error::NotLoxodromic { kind: kind.to_string() }),
    }
}

fn loxodromic_fixed_points(g: &GroupElement) -> Result<(BoundaryPoint, BoundaryPoint)> {
    let top = extreme_eigenpair(g, true);
    let bottom = extreme_eigenpair(g, false);
    let to_point = |v: Option<(CVec, C64)>| -> Option<BoundaryPoint> {
        let (v, _) = v?;
        let z = dehomogenize(&v)?;
        Some(BoundaryPoint::renormalized(z))
    };
    match (to_point(top), to_point(bottom)) {
        (Some(p), Some(q)) if norm(&(p.as_vec() - q.as_vec())) > 1e-9 => Ok((p, q)),
        _ => Err(Error::Degenerate("could not separate the two fixed points".into())),
    }
}
