//! Orbits, contraction rates toward the attracting fixed point, and
//! North-South convergence of divergent sequences.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{point_on_line, GroupElement};
use crate::linalg::{norm, CMat, CVec, C64};
use crate::normal_forms::loxodromic_normal_form_with;
use crate::spectral::{classify_with, Kind};
use crate::tolerance::Tolerances;

/// `g^n(z)`, with `g^n` formed by renormalized repeated squaring.
pub fn iterate(g: &GroupElement, z: &CVec, n: u64) -> Result<CVec> {
    if n == 0 {
        return Ok(z.clone());
    }
    g.power(n as i64).act(z)
}

#[derive(Debug, Clone, Serialize)]
pub struct RateEstimate {
    /// `(n, ln |g^n(z) - x+|)`.
    pub samples: Vec<(usize, f64)>,
    pub slope: f64,
    pub predicted: f64,
    pub on_axis: bool,
}

impl RateEstimate {
    pub fn relative_error(&self) -> f64 {
        ((self.slope - self.predicted) / self.predicted).abs()
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Distances `|g^n(z) - x+|` for `n = 1..=n_max`.
///
/// Evaluated through the normal form `g = h k a_t h^{-1}`: with `w = h^{-1}(z)`
/// the displacement `(k a_t)^n(w) - e1` has a closed form that never
/// subtracts nearly equal numbers, and `h(e1 + delta) - h(e1)` is expanded
/// to first order in the lift, so distances far below rounding of the
/// points themselves remain accurate.
pub fn attracting_distances(g: &GroupElement, z: &CVec, n_max: usize, tol: &Tolerances) -> Result<(Vec<f64>, bool)> {
    let data = classify_with(g, tol)?;
    if data.kind != Kind::Loxodromic {
        return Err(Error::NotLoxodromic { kind: data.kind.to_string() });
    }
    let xp = data.fixed_plus.expect("loxodromic");
    let xm = data.fixed_minus.expect("loxodromic");
    if norm(&(z - xp.as_vec())) <= tol.bdry || norm(&(z - xm.as_vec())) <= tol.bdry {
        return Err(Error::AtFixedPoint);
    }
    let axis = data.axis.expect("loxodromic");
    let on_axis = point_on_line(&axis, z, tol.line);

    let nf = loxodromic_normal_form_with(g, tol)?;
    let m = g.m();
    let mut w = nf.h.inverse().act_with(z, tol.denom)?;
    if on_axis {
        // rounding would otherwise leave an O(1e-16) transverse part that
        // dominates the e^{-2nt} on-axis decay
        for c in w.iter_mut().skip(1) {
            *c = C64::new(0.0, 0.0);
        }
    }
    let unit = if m > 1 { crate::normal_forms::m_block(&nf.k) } else { CMat::zeros(0, 0) };
    let hl = nf.h.unitary_lift();
    let a = hl.view((0, 0), (m, m)).into_owned();
    let c = hl.view((m, 0), (1, m)).transpose().column(0).into_owned();
    let p_v = hl.view((0, 0), (m, 1)).column(0) + hl.view((0, m), (m, 1)).column(0);
    let q_v = hl[(m, 0)] + hl[(m, m)];

    let w1 = w[0];
    let mut rotated = w.rows(1, m - 1).into_owned();
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let s = n as f64 * nf.t;
        let e1 = (-s).exp();
        let e2 = (-2.0 * s).exp();
        let den = (C64::new(1.0, 0.0) + w1) * 0.5 + (C64::new(1.0, 0.0) - w1) * (0.5 * e2);
        if m > 1 {
            rotated = &unit * &rotated;
        }
        let mut delta = CVec::zeros(m);
        delta[0] = (w1 - 1.0) * e2 / den;
        for i in 1..m {
            delta[i] = rotated[i - 1] * e1 / den;
        }
        let ad = &a * &delta;
        let cd: C64 = c.iter().zip(delta.iter()).map(|(x, y)| x * y).sum();
        let diff = (ad * q_v - &p_v * cd) / (q_v * (q_v + cd));
        out.push(norm(&diff));
    }
    Ok((out, on_axis))
}

/// Empirical rate of `(1/n) ln |g^n(z) - x+|`, fitted on `n in [n_max/2, n_max]`.
pub fn contraction_rate(g: &GroupElement, z: &CVec, n_max: usize, tol: &Tolerances) -> Result<RateEstimate> {
    if n_max < 2 {
        return Err(Error::Precondition("n_max must be at least 2".into()));
    }
    let (dist, on_axis) = attracting_distances(g, z, n_max, tol)?;
    let start = (n_max / 2).max(1);
    if let Some(n) = (1..=n_max).find(|&n| !(dist[n - 1] > 1e-300)) {
        if n < start {
            return Err(Error::Underflow { n });
        }
    }
    let samples: Vec<(usize, f64)> = dist.iter().enumerate().map(|(i, d)| (i + 1, d.ln())).collect();
    let fit: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(n, l)| *n >= start && l.is_finite())
        .map(|&(n, l)| (n as f64, l))
        .collect();
    let slope = fit_slope(&fit);
    let log_l = crate::spectral::log_lambda1(g, tol)?;
    let predicted = if on_axis { -2.0 * log_l } else { -log_l };
    Ok(RateEstimate { samples, slope, predicted, on_axis })
}

#[derive(Debug, Clone, Serialize)]
pub struct NorthSouthReport {
    #[serde(with = "crate::json::cvec")]
    pub attracting: CVec,
    #[serde(with = "crate::json::cvec")]
    pub repelling: CVec,
    /// Largest `|g_n(z) - x|` over the admissible samples, one entry per `g_n`.
    pub max_distance: Vec<f64>,
    pub excluded: usize,
    pub decreasing_trend: bool,
}

/// Checks that `g_n(z) -> x` uniformly on samples kept `exclusion` away from `y`.
///
/// For `g = k1 a_t k2` the top singular direction of the lift is
/// `k1 (e1 + e_{m+1})`, so `x = k1(e1)` and `y = k2^{-1}(-e1)` are read off
/// the singular vectors of the last element and of its inverse; unlike
/// `g(0)` these stay resolved when `tanh t` rounds to 1.
pub fn verify_north_south(gs: &[GroupElement], z_samples: &[CVec], exclusion: f64) -> Result<NorthSouthReport> {
    let last = gs.last().ok_or_else(|| Error::Precondition("empty sequence".into()))?;
    let max_norm = crate::spectral::norm_at_origin(last);
    if max_norm < 0.99 {
        return Err(Error::NoEscape { max_norm });
    }
    let x = top_direction(last)?;
    let y = top_direction(&last.inverse())?;
    let kept: Vec<&CVec> = z_samples.iter().filter(|z| norm(&(*z - &y)) >= exclusion).collect();
    let excluded = z_samples.len() - kept.len();
    let mut max_distance = Vec::with_capacity(gs.len());
    for g in gs {
        let mut worst: f64 = 0.0;
        for z in &kept {
            worst = worst.max(norm(&(g.act(z)? - &x)));
        }
        max_distance.push(worst);
    }
    let pts: Vec<(f64, f64)> = max_distance
        .iter()
        .enumerate()
        .map(|(i, d)| (i as f64, d.max(1e-300).ln()))
        .collect();
    let decreasing_trend = pts.len() < 2
        || (fit_slope(&pts) < 0.0 && max_distance.last() < max_distance.first());
    Ok(NorthSouthReport { attracting: x, repelling: y, max_distance, excluded, decreasing_trend })
}

fn top_direction(g: &GroupElement) -> Result<CVec> {
    let svd = g.lift().clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("nonempty");
    let v = u.column(k).into_owned();
    let z = crate::geometry::dehomogenize(&v).ok_or_else(|| Error::Degenerate("singular direction at infinity".into()))?;
    Ok(crate::geometry::BoundaryPoint::renormalized(z).into_vec())
}
