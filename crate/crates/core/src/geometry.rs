//! The projective model of ball automorphisms.
//!
//! Points of the ball are column vectors `z` in `C^m` with `|z| < 1`. An
//! automorphism is represented by a lift in `U(m,1)`, the group preserving
//!
//! ```text
//! [v, w] = v_1 conj(w_1) + ... + v_m conj(w_m) - v_{m+1} conj(w_{m+1}),
//! ```
//!
//! acting by `z -> (A z + b) / (c^T z + d)`. Since `U(m,1)` only acts
//! projectively, a [`GroupElement`] stores a normalized lift (Frobenius norm
//! `sqrt(m+1)`, largest entry real positive) together with the logarithm of
//! the factor that turns it back into a genuine `U(m,1)` matrix.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json;
use crate::linalg::{self, frobenius, inner, norm, normalize_projective, CMat, CVec, C64, ONE, ZERO};
use crate::tolerance::Tolerances;

/// The signature-(m,1) Hermitian form on `C^{m+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HermitianForm {
    m: usize,
}

impl HermitianForm {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "ball dimension must be at least 1");
        Self { m }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `J = diag(1, ..., 1, -1)`.
    pub fn matrix(&self) -> CMat {
        let n = self.m + 1;
        let mut j = CMat::identity(n, n);
        j[(self.m, self.m)] = -ONE;
        j
    }

    pub fn value(&self, v: &CVec, w: &CVec) -> Result<C64> {
        form_value(v, w, self)
    }
}

/// `[v, w]_{m,1}`.
pub fn form_value(v: &CVec, w: &CVec, form: &HermitianForm) -> Result<C64> {
    let n = form.m + 1;
    for x in [v, w] {
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: x.len() });
        }
    }
    let mut s = ZERO;
    for i in 0..form.m {
        s += v[i] * w[i].conj();
    }
    Ok(s - v[form.m] * w[form.m].conj())
}

/// `J A` without forming `J`: negates the last row.
pub(crate) fn j_left(a: &CMat) -> CMat {
    let mut out = a.clone();
    let last = out.nrows() - 1;
    out.row_mut(last).neg_mut();
    out
}

/// `A J`: negates the last column.
pub(crate) fn j_right(a: &CMat) -> CMat {
    let mut out = a.clone();
    let last = out.ncols() - 1;
    out.column_mut(last).neg_mut();
    out
}

/// `J A^* J`, the inverse of a `U(m,1)` matrix.
pub(crate) fn j_adjoint(a: &CMat) -> CMat {
    j_right(&j_left(&a.adjoint()))
}

/// Homogeneous coordinates `(z, 1)`.
pub fn homogenize(z: &CVec) -> CVec {
    let m = z.len();
    let mut v = CVec::zeros(m + 1);
    v.rows_mut(0, m).copy_from(z);
    v[m] = ONE;
    v
}

/// `v[..m] / v[m]`.
pub fn dehomogenize(v: &CVec) -> Option<CVec> {
    let m = v.len() - 1;
    let d = v[m];
    if d.norm() == 0.0 {
        return None;
    }
    Some(v.rows(0, m).into_owned() / d)
}

pub fn basis_vector(m: usize, i: usize) -> CVec {
    let mut e = CVec::zeros(m);
    e[i] = ONE;
    e
}

/// An element of `Aut(B^m) = PU(m,1)`.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "GroupElementRepr", into = "GroupElementRepr")]
pub struct GroupElement {
    m: usize,
    lift: CMat,
    /// `lift * exp(log_scale)` lies in `U(m,1)`.
    log_scale: f64,
}

#[derive(Serialize, Deserialize)]
struct GroupElementRepr {
    m: usize,
    #[serde(with = "json::cmat")]
    lift: CMat,
}

impl TryFrom<GroupElementRepr> for GroupElement {
    type Error = Error;

    fn try_from(r: GroupElementRepr) -> Result<Self> {
        let g = GroupElement::new(r.lift)?;
        if g.m != r.m {
            return Err(Error::DimensionMismatch { expected: r.m, found: g.m });
        }
        Ok(g)
    }
}

impl From<GroupElement> for GroupElementRepr {
    fn from(g: GroupElement) -> Self {
        GroupElementRepr { m: g.m, lift: g.lift }
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupElement(m = {}, lift = {})", self.m, self.lift)
    }
}

impl GroupElement {
    /// Validates `lift` against the default group tolerance.
    pub fn new(lift: CMat) -> Result<Self> {
        Self::with_tolerance(lift, Tolerances::default().group)
    }

    /// Accepts any nonzero multiple of a `U(m,1)` matrix.
    pub fn with_tolerance(lift: CMat, tol_group: f64) -> Result<Self> {
        let (r, c) = lift.shape();
        if r != c {
            return Err(Error::DimensionMismatch { expected: r, found: c });
        }
        if r < 2 {
            return Err(Error::Degenerate("lift must be at least 2x2".into()));
        }
        if lift.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::Degenerate("non-finite entry in lift".into()));
        }
        let n = r;
        // X^* J X = c J with c > 0 for a multiple of a U(m,1) matrix.
        let gram = lift.adjoint() * j_left(&lift);
        let c = j_left(&gram).trace().re / n as f64;
        if !(c > 0.0) {
            return Err(Error::NotInGroup { residual: f64::INFINITY, tol: tol_group });
        }
        let g = &lift / C64::new(c.sqrt(), 0.0);
        let residual = membership_residual_of(&g);
        if residual > tol_group {
            return Err(Error::NotInGroup { residual, tol: tol_group });
        }
        Ok(Self::from_unitary_lift(&g))
    }

    /// Wraps a matrix already known to lie in `U(m,1)` (up to rounding).
    pub(crate) fn from_unitary_lift(g: &CMat) -> Self {
        let n = g.nrows();
        let f = frobenius(g);
        let lift = normalize_projective(g);
        Self { m: n - 1, lift, log_scale: (f / (n as f64).sqrt()).ln() }
    }

    /// Wraps `lift` where `lift * exp(log_scale)` lies in `U(m,1)`.
    pub(crate) fn from_parts(lift: CMat, log_scale: f64) -> Self {
        let n = lift.nrows();
        let f = frobenius(&lift);
        let normalized = normalize_projective(&lift);
        Self { m: n - 1, lift: normalized, log_scale: log_scale + (f / (n as f64).sqrt()).ln() }
    }

    pub fn identity(m: usize) -> Self {
        Self::from_unitary_lift(&CMat::identity(m + 1, m + 1))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The normalized lift: Frobenius norm `sqrt(m+1)`, pivot entry real positive.
    pub fn lift(&self) -> &CMat {
        &self.lift
    }

    /// A representative in `U(m,1)`.
    pub fn unitary_lift(&self) -> CMat {
        &self.lift * C64::new(self.log_scale.exp(), 0.0)
    }

    /// `ln` of the factor relating the normalized lift to the `U(m,1)` lift.
    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// `(A, b, c, d)` of the normalized lift.
    pub fn blocks(&self) -> (CMat, CVec, CVec, C64) {
        let m = self.m;
        let a = self.lift.view((0, 0), (m, m)).into_owned();
        let b = self.lift.view((0, m), (m, 1)).column(0).into_owned();
        let c = self.lift.view((m, 0), (1, m)).transpose().column(0).into_owned();
        (a, b, c, self.lift[(m, m)])
    }

    /// `|G^* J G - J|_F / |G|_F^2` for the unitary lift `G`.
    pub fn membership_residual(&self) -> f64 {
        membership_residual_of(&self.unitary_lift())
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        assert_eq!(self.m, other.m, "composing elements of different dimension");
        let p = &self.lift * &other.lift;
        Self::from_parts(p, self.log_scale + other.log_scale)
    }

    pub fn inverse(&self) -> GroupElement {
        // L = e^{-s} G with G in U(m,1), so J L^* J = e^{-s} G^{-1}.
        Self::from_parts(j_adjoint(&self.lift), self.log_scale)
    }

    /// `h g h^{-1}`.
    pub fn conjugate_by(&self, h: &GroupElement) -> GroupElement {
        h.compose(self).compose(&h.inverse())
    }

    /// `g^n` by repeated squaring, renormalizing after each product.
    pub fn power(&self, n: i64) -> GroupElement {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = GroupElement::identity(self.m);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.compose(&sq);
            }
        }
        acc
    }

    /// `g(z) = (A z + b) / (c^T z + d)` using the default denominator tolerance.
    pub fn act(&self, z: &CVec) -> Result<CVec> {
        self.act_with(z, Tolerances::default().denom)
    }

    pub fn act_with(&self, z: &CVec, tol_denom: f64) -> Result<CVec> {
        if z.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, found: z.len() });
        }
        let y = &self.lift * homogenize(z);
        let den = y[self.m];
        // compare against the U(m,1) lift so the threshold is scale free
        let log_den = den.norm().ln() + self.log_scale;
        if !(log_den >= tol_denom.ln()) {
            return Err(Error::Degenerate(format!(
                "denominator |c^T z + d| = {:.3e} below tolerance",
                log_den.exp()
            )));
        }
        Ok(y.rows(0, self.m).into_owned() / den)
    }

    /// Acts on a boundary point and renormalizes the image onto the sphere.
    pub fn act_boundary(&self, x: &BoundaryPoint) -> Result<BoundaryPoint> {
        let y = self.act(x.as_vec())?;
        Ok(BoundaryPoint::renormalized(y))
    }

    /// Projective distance between normalized lifts.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        linalg::projective_distance(&self.lift, &other.lift)
    }

    pub fn approx_eq(&self, other: &GroupElement, tol: f64) -> bool {
        self.m == other.m && self.distance(other) <= tol
    }
}

impl Mul for &GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: &GroupElement) -> GroupElement {
        self.compose(rhs)
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: GroupElement) -> GroupElement {
        self.compose(&rhs)
    }
}

pub(crate) fn membership_residual_of(g: &CMat) -> f64 {
    let n = g.nrows();
    let gram = g.adjoint() * j_left(g);
    let mut j = CMat::identity(n, n);
    j[(n - 1, n - 1)] = -ONE;
    let f2 = frobenius(g).powi(2);
    frobenius(&(gram - j)) / f2
}

/// A point of the open ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BallPoint(#[serde(with = "json::cvec")] CVec);

impl BallPoint {
    pub fn new(z: CVec) -> Result<Self> {
        let n = norm(&z);
        if !(n < 1.0) {
            return Err(Error::Degenerate(format!("|z| = {n} is not inside the unit ball")));
        }
        Ok(Self(z))
    }

    pub fn origin(m: usize) -> Self {
        Self(CVec::zeros(m))
    }

    pub fn as_vec(&self) -> &CVec {
        &self.0
    }

    pub fn into_vec(self) -> CVec {
        self.0
    }
}

/// A point of the unit sphere, renormalized to exact unit norm on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoundaryPoint(#[serde(with = "json::cvec")] CVec);

impl BoundaryPoint {
    pub fn new(z: CVec, tol_bdry: f64) -> Result<Self> {
        let n = norm(&z);
        if !((n - 1.0).abs() <= tol_bdry) {
            return Err(Error::Degenerate(format!("|z| = {n} is not on the unit sphere")));
        }
        Ok(Self::renormalized(z))
    }

    /// Projects any nonzero vector radially onto the sphere.
    pub fn renormalized(z: CVec) -> Self {
        let n = norm(&z);
        Self(z / C64::new(n, 0.0))
    }

    pub fn basis(m: usize, i: usize) -> Self {
        Self(basis_vector(m, i))
    }

    pub fn as_vec(&self) -> &CVec {
        &self.0
    }

    pub fn into_vec(self) -> CVec {
        self.0
    }
}

/// A complex affine line `{a + lambda b}` in canonical form: `|b| = 1`, the
/// first entry of `b` with modulus above `1e-9` is real positive, and `a` is
/// the point of the line closest to the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineLine {
    #[serde(with = "json::cvec")]
    base: CVec,
    #[serde(with = "json::cvec")]
    direction: CVec,
}

const LINE_PIVOT_CUT: f64 = 1e-9;

impl AffineLine {
    pub fn new(base: CVec, direction: CVec) -> Result<Self> {
        if base.len() != direction.len() {
            return Err(Error::DimensionMismatch { expected: base.len(), found: direction.len() });
        }
        if !(norm(&direction) > 0.0) {
            return Err(Error::Degenerate("line direction is zero".into()));
        }
        Ok(Self { base, direction }.canonical())
    }

    pub fn base(&self) -> &CVec {
        &self.base
    }

    pub fn direction(&self) -> &CVec {
        &self.direction
    }

    /// Canonical representative; applying it twice is a bit-for-bit no-op.
    pub fn canonical(&self) -> AffineLine {
        let mut b = self.direction.clone();
        let nb = norm(&b);
        if (nb - 1.0).abs() > 4.0 * f64::EPSILON {
            b /= C64::new(nb, 0.0);
        }
        if let Some(k) = b.iter().position(|c| c.norm() > LINE_PIVOT_CUT) {
            let p = b[k];
            if !(p.im == 0.0 && p.re > 0.0) {
                b *= p.conj() / p.norm();
                b[k] = C64::new(b[k].norm(), 0.0);
            }
        }
        let mut a = self.base.clone();
        // repeat so a second pass sees a residual below the guard
        for _ in 0..4 {
            let proj = inner(&a, &b);
            if proj.norm() <= 1e-15 * (1.0 + norm(&a)) {
                break;
            }
            a -= &b * proj;
        }
        AffineLine { base: a, direction: b }
    }

    /// `|(z - a) - <z - a, b> b|`.
    pub fn distance(&self, z: &CVec) -> f64 {
        let u = z - &self.base;
        let c = inner(&u, &self.direction);
        norm(&(u - &self.direction * c))
    }

    pub fn approx_eq(&self, other: &AffineLine, tol: f64) -> bool {
        if self.base.len() != other.base.len() {
            return false;
        }
        let parallel = 1.0 - inner(&self.direction, &other.direction).norm();
        parallel <= tol && norm(&(&self.base - &other.base)) <= tol
    }

    /// Radius of the disk `L ∩ closed ball` around the base point, or `None`
    /// when the line misses the closed ball.
    pub fn disk_radius(&self) -> Option<f64> {
        let a2 = norm(&self.base).powi(2);
        if a2 > 1.0 {
            None
        } else {
            Some((1.0 - a2).sqrt())
        }
    }

    /// Points of `L ∩ closed ball` on a polar grid, boundary circle included.
    pub fn disk_points(&self, radii: usize, angles: usize) -> Vec<CVec> {
        let Some(rho) = self.disk_radius() else {
            return Vec::new();
        };
        let mut out = Vec::with_capacity(radii * angles);
        for i in 1..=radii {
            let r = rho * i as f64 / radii as f64;
            for k in 0..angles {
                let th = std::f64::consts::TAU * (k as f64 + 0.5 * (i % 2) as f64) / angles as f64;
                out.push(&self.base + &self.direction * C64::from_polar(r, th));
            }
        }
        out
    }
}

/// The complex affine line through `x` and `y`.
pub fn line_through(x: &CVec, y: &CVec, tol_line: f64) -> Result<AffineLine> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let d = y - x;
    if norm(&d) <= tol_line {
        return Err(Error::Degenerate("points coincide; line is undefined".into()));
    }
    AffineLine::new(x.clone(), d)
}

pub fn point_on_line(line: &AffineLine, z: &CVec, tol: f64) -> bool {
    line.distance(z) <= tol
}
