//! The line detector: does `f` send the chord line through `x` and `y` into
//! a single complex affine line?

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::RationalProperMap;
use crate::error::{Error, Result};
use crate::geometry::line_through;
use crate::linalg::{self, inner, norm, CMat, CVec, C64};
use crate::tolerance::Tolerances;

/// Fixed data of the detector around a base direction `y0`.
#[derive(Debug, Clone, Serialize)]
pub struct DetectorSetup {
    #[serde(with = "crate::json::cvec")]
    pub x: CVec,
    #[serde(with = "crate::json::cvec")]
    pub y0: CVec,
    /// `u_2, ..., u_M`.
    #[serde(with = "crate::json::cvec_list")]
    pub u_basis: Vec<CVec>,
    pub n_max: usize,
    #[serde(skip)]
    fx: CVec,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleLine {
    pub points: usize,
    pub max_distance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    pub h0: f64,
    /// `h_1, ..., h_{n_max}`.
    pub h: Vec<f64>,
    pub detector: bool,
    pub oracle: OracleLine,
    pub member: bool,
}

fn midpoint(x: &CVec, y: &CVec) -> CVec {
    (x + y) * C64::new(0.5, 0.0)
}

/// `((2n+1)/(4n)) y + ((2n-1)/(4n)) x`.
fn sample_point(x: &CVec, y: &CVec, n: usize) -> CVec {
    let n = n as f64;
    y * C64::new((2.0 * n + 1.0) / (4.0 * n), 0.0) + x * C64::new((2.0 * n - 1.0) / (4.0 * n), 0.0)
}

impl DetectorSetup {
    pub fn new(f: &RationalProperMap, x: &CVec, y0: &CVec, n_max: usize, seed: u64) -> Result<Self> {
        let tol = Tolerances::default();
        check_boundary(x, f.m(), &tol)?;
        check_boundary(y0, f.m(), &tol)?;
        if norm(&(x - y0)) <= tol.line {
            return Err(Error::Precondition("x and y0 coincide".into()));
        }
        let fx = f.eval_with(x, &tol)?;
        let v = f.eval_with(&midpoint(x, y0), &tol)? - &fx;
        let nv = norm(&v);
        if nv <= tol.line {
            return Err(Error::Degenerate("f(z(y0)) = f(x)".into()));
        }
        let mut basis = vec![v / C64::new(nv, 0.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while basis.len() < f.big_m() {
            let mut r = linalg::random_vector(f.big_m(), &mut rng);
            r /= C64::new(norm(&r), 0.0);
            for _ in 0..2 {
                for b in &basis {
                    let c = inner(&r, b);
                    r -= b * c;
                }
            }
            let nr = norm(&r);
            // redraw on near dependence
            if nr > 0.1 {
                basis.push(r / C64::new(nr, 0.0));
            }
        }
        basis.remove(0);
        Ok(Self { x: x.clone(), y0: y0.clone(), u_basis: basis, n_max, fx })
    }

    /// `A(y)^{-1}` for `A(y) = [f(z(y)) - f(x), u_2, ..., u_M]`.
    pub fn a_inverse(&self, f: &RationalProperMap, y: &CVec, tol: &Tolerances) -> Result<CMat> {
        let mut cols = vec![f.eval_with(&midpoint(&self.x, y), tol)? - &self.fx];
        cols.extend(self.u_basis.iter().cloned());
        let a = CMat::from_columns(&cols);
        let det = a.determinant().norm();
        if !(det >= tol.det) {
            return Err(Error::Precondition(format!(
                "|det A(y)| = {det:.3e} below {:.1e}; shrink the neighborhood of y0",
                tol.det
            )));
        }
        a.try_inverse().ok_or_else(|| Error::Degenerate("A(y) is singular".into()))
    }
}

fn check_boundary(p: &CVec, m: usize, tol: &Tolerances) -> Result<()> {
    if p.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: p.len() });
    }
    if (norm(p) - 1.0).abs() > tol.bdry {
        return Err(Error::Precondition(format!("|p| = {} is not on the sphere", norm(p))));
    }
    Ok(())
}

/// `1 - ‖y‖^2`.
pub fn h0(y: &CVec) -> f64 {
    1.0 - norm(y).powi(2)
}

/// `‖π[A(y)^{-1} (f(w_n) - f(x))]‖^2` where `π` drops the first coordinate.
pub fn detector_h(f: &RationalProperMap, setup: &DetectorSetup, y: &CVec, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("h_n needs n >= 1".into()));
    }
    let tol = Tolerances::default();
    let a_inv = setup.a_inverse(f, y, &tol)?;
    let w = sample_point(&setup.x, y, n);
    let c = a_inv * (f.eval_with(&w, &tol)? - &setup.fx);
    Ok(c.rows(1, c.len() - 1).norm_squared())
}

/// Direct check: 32 points of `L_xy ∩ closed ball` against the best-fit
/// complex line through their images.
fn collinearity_oracle(f: &RationalProperMap, x: &CVec, y: &CVec, tol: f64) -> Result<OracleLine> {
    let t = Tolerances::default();
    let line = line_through(x, y, t.line)?;
    let pts = line.disk_points(4, 8);
    let imgs: Vec<CVec> = pts.iter().map(|w| f.eval_with(w, &t)).collect::<Result<_>>()?;
    let k = imgs.len();
    let mut center = CVec::zeros(f.big_m());
    for v in &imgs {
        center += v;
    }
    center /= C64::new(k as f64, 0.0);
    let centered = CMat::from_fn(k, f.big_m(), |i, j| imgs[i][j] - center[j]);
    let svd = centered.transpose().svd(true, false);
    let u = svd.u.expect("u requested");
    let top = (0..svd.singular_values.len())
        .max_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
        .expect("nonempty");
    let dir = u.column(top).into_owned();
    let mut max_distance: f64 = 0.0;
    for v in &imgs {
        let u = v - &center;
        let c = inner(&u, &dir);
        max_distance = max_distance.max(norm(&(u - &dir * c)));
    }
    Ok(OracleLine { points: k, max_distance, passed: max_distance <= tol })
}

/// Detector values and the direct oracle for `y ∈ Z_x`.
pub fn z_x_report(f: &RationalProperMap, x: &CVec, y: &CVec, n_max: usize, tol: f64) -> Result<MembershipReport> {
    let setup = DetectorSetup::new(f, x, y, n_max, 0)?;
    let h0v = h0(y).abs();
    let h = (1..=n_max).map(|n| detector_h(f, &setup, y, n)).collect::<Result<Vec<_>>>()?;
    let detector = h0v <= tol && h.iter().all(|&v| v <= tol);
    let oracle = collinearity_oracle(f, x, y, tol)?;
    let member = detector && oracle.passed;
    Ok(MembershipReport { h0: h0v, h, detector, oracle, member })
}

pub fn z_x_membership(f: &RationalProperMap, x: &CVec, y: &CVec, n_max: usize, tol: f64) -> Result<bool> {
    Ok(z_x_report(f, x, y, n_max, tol)?.member)
}
