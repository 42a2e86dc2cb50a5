//! The Cayley transform `F: B^m -> P^m`, the boundary chart `ζ = π ∘ F`, and
//! rescaled polynomials along the straightened loxodromic flow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GroupElement;
use crate::linalg::{self, norm, CMat, CVec, C64, I, ONE};
use crate::normal_forms::{m_block, m_shape_residual};
use crate::poly::Poly;
use crate::tolerance::Tolerances;

/// A point of the closed Siegel domain `Im z1 >= |z2|^2 + ... + |zm|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SiegelPoint(#[serde(with = "crate::json::cvec")] CVec);

impl SiegelPoint {
    pub fn new(z: CVec, tol_bdry: f64) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::Degenerate("empty point".into()));
        }
        let defect = siegel_defect(&z);
        if defect < -tol_bdry {
            return Err(Error::Precondition(format!("Im z1 - |w|^2 = {defect:.3e} < 0")));
        }
        Ok(Self(z))
    }

    pub fn as_vec(&self) -> &CVec {
        &self.0
    }

    pub fn into_vec(self) -> CVec {
        self.0
    }
}

/// `Im z1 - (|z2|^2 + ... + |zm|^2)`; zero on the boundary.
pub fn siegel_defect(z: &CVec) -> f64 {
    z[0].im - z.rows(1, z.len() - 1).norm_squared()
}

/// `(v, w) ∈ R x C^{m-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub v: f64,
    #[serde(with = "crate::json::cvec")]
    pub w: CVec,
}

/// `F(z) = (i (1 - z1)/(1 + z1), i z2/(1 + z1), ..., i zm/(1 + z1))` on the closed ball.
pub fn cayley(z: &CVec, tol: &Tolerances) -> Result<SiegelPoint> {
    if z.is_empty() {
        return Err(Error::Degenerate("empty point".into()));
    }
    if norm(z) > 1.0 + tol.bdry {
        return Err(Error::Precondition(format!("|z| = {} outside the closed ball", norm(z))));
    }
    let den = ONE + z[0];
    if den.norm() <= tol.bdry {
        return Err(Error::Pole { value: den.norm() });
    }
    let mut out = z.map(|c| I * c / den);
    out[0] = I * (ONE - z[0]) / den;
    Ok(SiegelPoint(out))
}

/// `F^{-1}(z) = ((i - z1)/(z1 + i), 2 z2/(z1 + i), ..., 2 zm/(z1 + i))`.
pub fn cayley_inv(p: &SiegelPoint) -> CVec {
    let z = &p.0;
    // |z1 + i| >= 1 on the closed domain
    let den = z[0] + I;
    let mut out = z.map(|c| c * C64::new(2.0, 0.0) / den);
    out[0] = (I - z[0]) / den;
    out
}

/// `ζ(x) = (Re F(x)_1, F(x)_2, ..., F(x)_m)` for `x ∈ ∂B^m \ {-e1}`.
pub fn zeta(x: &CVec, tol: &Tolerances) -> Result<ChartPoint> {
    if (norm(x) - 1.0).abs() > tol.bdry {
        return Err(Error::Precondition(format!("|x| = {} is not on the sphere", norm(x))));
    }
    let f = cayley(x, tol)?.0;
    Ok(ChartPoint { v: f[0].re, w: f.rows(1, f.len() - 1).into_owned() })
}

/// `ζ^{-1}(v, w) = F^{-1}(v + i |w|^2, w)`.
pub fn zeta_inv(p: &ChartPoint) -> CVec {
    let mut z = CVec::zeros(p.w.len() + 1);
    z[0] = C64::new(p.v, p.w.norm_squared());
    z.rows_mut(1, p.w.len()).copy_from(&p.w);
    cayley_inv(&SiegelPoint(z))
}

/// `(v, w) -> (e^{-2t} v, e^{-t} U w)`, the chart picture of `k a_t`.
#[derive(Debug, Clone, Serialize)]
pub struct ConjugatedFlow {
    pub t: f64,
    #[serde(with = "crate::json::cmat")]
    pub u: CMat,
}

impl ConjugatedFlow {
    pub fn apply(&self, p: &ChartPoint) -> ChartPoint {
        self.power(p, 1)
    }

    /// `φ^n` in closed form.
    pub fn power(&self, p: &ChartPoint, n: u32) -> ChartPoint {
        let s = self.t * n as f64;
        let un = matrix_power(&self.u, n);
        ChartPoint { v: (-2.0 * s).exp() * p.v, w: (un * &p.w) * C64::new((-s).exp(), 0.0) }
    }

    /// `max ‖ζ(k a_t x) - φ(ζ(x))‖` over boundary samples.
    pub fn conjugacy_residual(&self, k: &GroupElement, samples: &[CVec], tol: &Tolerances) -> Result<f64> {
        let g = k.compose(&crate::normal_forms::make_a(k.m(), self.t));
        let mut worst: f64 = 0.0;
        for x in samples {
            let lhs = zeta(&crate::geometry::BoundaryPoint::renormalized(g.act(x)?).into_vec(), tol)?;
            let rhs = self.apply(&zeta(x, tol)?);
            let d = ((lhs.v - rhs.v).powi(2) + (lhs.w - rhs.w).norm_squared()).sqrt();
            worst = worst.max(d);
        }
        Ok(worst)
    }
}

fn matrix_power(u: &CMat, n: u32) -> CMat {
    let mut acc = CMat::identity(u.nrows(), u.ncols());
    let mut base = u.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

/// The flow `ζ ∘ (k a_t) ∘ ζ^{-1}` for `k ∈ M`.
pub fn conjugated_flow(k: &GroupElement, t: f64) -> Result<ConjugatedFlow> {
    if !t.is_finite() {
        return Err(Error::Degenerate("non-finite flow time".into()));
    }
    let residual = m_shape_residual(k);
    if residual > 1e-9 {
        return Err(Error::BlockShape { residual });
    }
    let m = k.m();
    let u = if m > 1 { m_block(k) } else { CMat::zeros(0, 0) };
    Ok(ConjugatedFlow { t, u })
}

/// `h(v, Re w1, Im w1, ...)` with the flow `(e^{-2t} v, e^{-t} U w)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ProblemRepr", into = "ProblemRepr")]
pub struct RescalingProblem {
    m: usize,
    h: Poly,
    t: f64,
    u: CMat,
    n_lead: u32,
    lead: Poly,
}

#[derive(Serialize, Deserialize)]
struct ProblemRepr {
    m: usize,
    h: Poly,
    t: f64,
    #[serde(with = "crate::json::cmat")]
    u: CMat,
}

impl TryFrom<ProblemRepr> for RescalingProblem {
    type Error = Error;

    fn try_from(r: ProblemRepr) -> Result<Self> {
        RescalingProblem::new(r.m, r.h, r.t, r.u)
    }
}

impl From<RescalingProblem> for ProblemRepr {
    fn from(p: RescalingProblem) -> Self {
        ProblemRepr { m: p.m, h: p.h, t: p.t, u: p.u }
    }
}

/// Weights of `(v, Re w1, Im w1, ...)`.
fn weights(m: usize) -> Vec<u32> {
    let mut w = vec![1; 2 * m - 1];
    w[0] = 2;
    w
}

impl RescalingProblem {
    pub fn new(m: usize, h: Poly, t: f64, u: CMat) -> Result<Self> {
        if m == 0 {
            return Err(Error::Degenerate("m must be positive".into()));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Precondition(format!("t = {t} must be positive")));
        }
        if u.nrows() != m - 1 || u.ncols() != m - 1 {
            return Err(Error::DimensionMismatch { expected: m - 1, found: u.nrows() });
        }
        if m > 1 && linalg::unitarity_defect(&u) > 1e-10 {
            return Err(Error::NotUnitary { residual: linalg::unitarity_defect(&u) });
        }
        if h.nvars() > 2 * m - 1 {
            return Err(Error::DimensionMismatch { expected: 2 * m - 1, found: h.nvars() });
        }
        if h.terms().iter().any(|t| t.coeff.im.abs() > 1e-14 * t.coeff.norm().max(1.0)) {
            return Err(Error::Precondition("h must have real coefficients".into()));
        }
        if h.is_zero() {
            return Err(Error::Degenerate("h is zero".into()));
        }
        let w = weights(m);
        let n_lead = h.weighted_degrees(&w).0;
        let lead = h.weighted_part(&w, n_lead);
        Ok(Self { m, h, t, u, n_lead, lead })
    }

    /// `N = min (2α + |β|)` over the nonzero terms.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_lead(&self) -> u32 {
        self.n_lead
    }

    /// The terms of weighted degree `N`.
    pub fn leading_part(&self) -> &Poly {
        &self.lead
    }

    pub fn flow(&self) -> ConjugatedFlow {
        ConjugatedFlow { t: self.t, u: self.u.clone() }
    }

    pub fn eval(&self, p: &ChartPoint) -> f64 {
        self.h.eval_real(&real_coords(p)).re
    }

    /// Smallest `q <= max_n` with `‖U^q - Id‖_F <= tol_u`.
    pub fn return_time(&self, tol_u: f64, max_n: u32) -> Result<u32> {
        let k = self.u.nrows();
        let id = CMat::identity(k, k);
        let mut p = id.clone();
        for q in 1..=max_n {
            p = &p * &self.u;
            if linalg::frobenius(&(&p - &id)) <= tol_u {
                return Ok(q);
            }
        }
        Err(Error::Precondition(format!("no n <= {max_n} with |U^n - Id| <= {tol_u}")))
    }
}

fn real_coords(p: &ChartPoint) -> Vec<f64> {
    let mut r = Vec::with_capacity(1 + 2 * p.w.len());
    r.push(p.v);
    for c in p.w.iter() {
        r.push(c.re);
        r.push(c.im);
    }
    r
}

#[derive(Debug, Clone, Serialize)]
pub struct RescalingReport {
    pub n_lead: u32,
    pub return_time: u32,
    /// `n_j = n * return_time` for each requested `n`.
    pub n_effective: Vec<u32>,
    /// `max |e^{N n_j t} h(φ^{n_j}(s)) - P(s)|` per `n_j`.
    pub gaps: Vec<f64>,
    /// Fitted from the first `n_j`: `gap <= C ‖s‖^{N+1} e^{-n_j t}`.
    pub c_report: f64,
    pub decreasing: bool,
    pub within_envelope: bool,
}

const MAX_RETURN: u32 = 100_000;
const ROUNDING_SLACK: f64 = 1e-12;

/// `e^{N n t} h ∘ φ^n` against its limit `P` on `samples`.
pub fn rescaling_limit(
    prob: &RescalingProblem,
    n_list: &[u32],
    samples: &[ChartPoint],
    tol: &Tolerances,
) -> Result<RescalingReport> {
    if n_list.is_empty() || samples.is_empty() {
        return Err(Error::Precondition("need at least one n and one sample".into()));
    }
    if samples.iter().any(|s| s.w.len() != prob.m - 1) {
        return Err(Error::DimensionMismatch { expected: prob.m - 1, found: samples[0].w.len() });
    }
    let q = if prob.m > 1 { prob.return_time(tol.unitary_return, MAX_RETURN)? } else { 1 };
    let flow = prob.flow();
    let big_n = prob.n_lead as f64;
    let n_effective: Vec<u32> = n_list.iter().map(|&n| n * q).collect();
    let mut table = Vec::with_capacity(n_effective.len());
    for &n in &n_effective {
        let scale = (big_n * n as f64 * prob.t).exp();
        let row: Vec<f64> = samples
            .iter()
            .map(|s| (scale * prob.eval(&flow.power(s, n)) - prob.lead.eval_real(&real_coords(s)).re).abs())
            .collect();
        table.push(row);
    }
    let size = |s: &ChartPoint| (s.v * s.v + s.w.norm_squared()).sqrt();
    let envelope = |s: &ChartPoint, n: u32| size(s).powi(prob.n_lead as i32 + 1) * (-(n as f64) * prob.t).exp();
    let mut c_report: f64 = 0.0;
    for (s, g) in samples.iter().zip(&table[0]) {
        let e = envelope(s, n_effective[0]);
        if e > 0.0 {
            c_report = c_report.max(g / e);
        }
    }
    let mut decreasing = true;
    let mut within_envelope = true;
    for j in 0..n_effective.len() {
        for (i, s) in samples.iter().enumerate() {
            // rounding floor: U^q is only Id to machine precision
            let slack = ROUNDING_SLACK * (1.0 + prob.lead.eval_real(&real_coords(s)).re.abs());
            if j > 0 && table[j][i] > table[j - 1][i] + slack {
                decreasing = false;
            }
            if table[j][i] > 10.0 * c_report * envelope(s, n_effective[j]) + slack {
                within_envelope = false;
            }
        }
    }
    let gaps = table.iter().map(|row| row.iter().copied().fold(0.0, f64::max)).collect();
    Ok(RescalingReport { n_lead: prob.n_lead, return_time: q, n_effective, gaps, c_report, decreasing, within_envelope })
}

/// `(v, w)` on a grid of the unit box `[-1, 1] x {|Re w_j|, |Im w_j| <= 1}`.
pub fn unit_box_grid(m: usize, per_axis: usize) -> Vec<ChartPoint> {
    let dims = 2 * m - 1;
    let ticks: Vec<f64> = (0..per_axis)
        .map(|i| if per_axis == 1 { 0.0 } else { -1.0 + 2.0 * i as f64 / (per_axis - 1) as f64 })
        .collect();
    let total = per_axis.pow(dims as u32);
    (0..total)
        .map(|mut idx| {
            let mut r = Vec::with_capacity(dims);
            for _ in 0..dims {
                r.push(ticks[idx % per_axis]);
                idx /= per_axis;
            }
            let w = CVec::from_iterator(m - 1, (0..m - 1).map(|j| C64::new(r[1 + 2 * j], r[2 + 2 * j])));
            ChartPoint { v: r[0], w }
        })
        .collect()
}

/// `h(v, w) = Re(w1) + v^2` on `R x C^{m-1}`.
pub fn re_w1_plus_v_squared(m: usize) -> Poly {
    let n = 2 * m - 1;
    let mut e = vec![0; n];
    e[1] = 1;
    let mut v2 = vec![0; n];
    v2[0] = 2;
    &Poly::monomial(ONE, e) + &Poly::monomial(ONE, v2)
}
