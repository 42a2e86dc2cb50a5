//! Fitting `w = (A z + b) / (c^T z + d)` (or the same in `z̄`) to samples.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, norm, CMat, CVec, ONE};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Holomorphic,
    AntiHolomorphic,
}

#[derive(Debug, Clone, Serialize)]
pub struct FtagFit {
    /// Projective matrix `[[A, b], [c^T, d]]`, Frobenius norm `sqrt(m+1)`.
    #[serde(with = "crate::json::cmat")]
    pub g: CMat,
    pub branch: Branch,
    /// `max_i ‖w_i - g(z_i)‖`.
    pub residual: f64,
    /// The same for the other branch.
    pub other_residual: f64,
}

impl FtagFit {
    pub fn apply(&self, z: &CVec) -> Option<CVec> {
        apply(&self.g, &branch_input(z, self.branch))
    }
}

fn branch_input(z: &CVec, branch: Branch) -> CVec {
    match branch {
        Branch::Holomorphic => z.clone(),
        Branch::AntiHolomorphic => z.map(|c| c.conj()),
    }
}

fn apply(g: &CMat, z: &CVec) -> Option<CVec> {
    let m = z.len();
    let mut h = CVec::from_element(m + 1, ONE);
    h.rows_mut(0, m).copy_from(z);
    let y = g * h;
    let den = y[m];
    if den.norm() <= 1e-300 {
        return None;
    }
    Some(y.rows(0, m) / den)
}

fn affine_rank(points: &[&CVec], rel_tol: f64) -> usize {
    let Some(first) = points.first() else { return 0 };
    let diffs: Vec<CVec> = points[1..].iter().map(|p| *p - *first).collect();
    if diffs.is_empty() {
        return 0;
    }
    let a = CMat::from_columns(&diffs);
    let sv = a.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

struct BranchFit {
    g: CMat,
    null_dim: usize,
    residual: f64,
}

fn fit_branch(samples: &[(CVec, CVec)], m: usize, branch: Branch, tol: &Tolerances) -> BranchFit {
    let n = m + 1;
    let mut rows = CMat::zeros(samples.len() * m, n * n);
    for (i, (z, w)) in samples.iter().enumerate() {
        let zb = branch_input(z, branch);
        for j in 0..m {
            let r = i * m + j;
            for b in 0..n {
                let zh = if b < m { zb[b] } else { ONE };
                rows[(r, m * n + b)] += w[j] * zh;
                rows[(r, j * n + b)] -= zh;
            }
        }
    }
    let (_, null) = linalg::nullspace(&rows, tol.rank);
    let v = if null.ncols() >= 1 { null.column(0).into_owned() } else { linalg::smallest_right_singular(&rows).1 };
    let g = linalg::normalize_projective(&CMat::from_fn(n, n, |a, b| v[a * n + b]));
    let mut residual: f64 = 0.0;
    for (z, w) in samples {
        residual = match apply(&g, &branch_input(z, branch)) {
            Some(p) => residual.max(norm(&(p - w))),
            None => f64::INFINITY,
        };
    }
    BranchFit { g, null_dim: null.ncols(), residual }
}

pub fn ftag_fit(samples: &[(CVec, CVec)], m: usize) -> Result<FtagFit> {
    ftag_fit_with(samples, m, &Tolerances::default())
}

/// Holomorphic and anti-holomorphic fits; the branch with the smaller
/// residual among those with a one-dimensional nullspace wins.
pub fn ftag_fit_with(samples: &[(CVec, CVec)], m: usize, tol: &Tolerances) -> Result<FtagFit> {
    let needed = 2 * (m + 1) * (m + 1);
    if samples.len() < needed {
        return Err(Error::Precondition(format!("{} samples, need at least {needed}", samples.len())));
    }
    for (z, w) in samples {
        if z.len() != m || w.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: if z.len() != m { z.len() } else { w.len() } });
        }
    }
    for pts in [samples.iter().map(|s| &s.0).collect::<Vec<_>>(), samples.iter().map(|s| &s.1).collect()] {
        let rank = affine_rank(&pts, 1e-8);
        if rank < m {
            return Err(Error::DegenerateImage { rank, needed: m });
        }
    }
    let hol = fit_branch(samples, m, Branch::Holomorphic, tol);
    let anti = fit_branch(samples, m, Branch::AntiHolomorphic, tol);
    let best_residual = hol.residual.min(anti.residual);
    let pick = |f: BranchFit, other: f64, branch: Branch| FtagFit { g: f.g, branch, residual: f.residual, other_residual: other };
    match (hol.null_dim == 1, anti.null_dim == 1) {
        (true, true) if anti.residual < hol.residual => {
            let other = hol.residual;
            Ok(pick(anti, other, Branch::AntiHolomorphic))
        }
        (true, _) => {
            let other = anti.residual;
            Ok(pick(hol, other, Branch::Holomorphic))
        }
        (false, true) => {
            let other = hol.residual;
            Ok(pick(anti, other, Branch::AntiHolomorphic))
        }
        (false, false) => Err(Error::NoFractionalLinearModel { best_residual }),
    }
}
