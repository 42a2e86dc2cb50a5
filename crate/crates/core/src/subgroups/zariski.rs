//! Finite-degree proxy for Zariski density.
//!
//! Real polynomials of degree at most `d` in the `2(m+1)^2` real coordinates
//! of a lift are evaluated on random lifts of group words (with random unit
//! phases, so the whole circle preimage is sampled) and on random elements
//! of `U(m,1)`. A polynomial vanishing on the group samples but not on
//! `U(m,1)` shows up as an extra nullspace direction of the feature matrix.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::GeneratorSet;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::normal_forms::make_a;
use crate::sampling::random_k;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    DenseAtDegree,
    NotDense,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZariskiReport {
    pub degree: usize,
    pub monomial_count: usize,
    pub samples: usize,
    pub null_dim_group: usize,
    pub null_dim_ambient: usize,
    /// Ratio across the rank cutoff of the worse of the two spectra.
    pub gap: f64,
    pub verdict: Verdict,
    /// Coefficients of a vanishing polynomial on the monomial basis
    /// (see [`monomials`]) when the verdict is `NotDense`.
    pub witness: Option<Vec<f64>>,
    #[serde(skip)]
    column_scales: Vec<f64>,
    #[serde(skip)]
    m: usize,
}

impl ZariskiReport {
    /// `|p(X)|` divided by the norm of the scaled feature vector of `X`, for a
    /// lift `X`; `None` without a witness.
    pub fn evaluate_witness(&self, x: &CMat) -> Option<f64> {
        let w = self.witness.as_ref()?;
        let mons = monomials(2 * (self.m + 1).pow(2), self.degree);
        let f = features(x, &mons);
        let mut dot = 0.0;
        let mut n2 = 0.0;
        for j in 0..f.len() {
            dot += w[j] * f[j];
            n2 += (f[j] / self.column_scales[j]).powi(2);
        }
        Some(dot.abs() / n2.sqrt())
    }
}

/// Multisets of variable indices of size at most `degree`, constant first,
/// then by degree and lexicographically.
pub fn monomials(nvars: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..degree {
        let mut next = Vec::new();
        for m in &layer {
            let start = m.last().copied().unwrap_or(0);
            for v in start..nvars {
                let mut e = m.clone();
                e.push(v);
                next.push(e);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn real_coordinates(x: &CMat) -> Vec<f64> {
    let mut r = Vec::with_capacity(2 * x.len());
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            r.push(x[(i, j)].re);
            r.push(x[(i, j)].im);
        }
    }
    r
}

fn features(x: &CMat, mons: &[Vec<usize>]) -> Vec<f64> {
    let r = real_coordinates(x);
    mons.iter().map(|m| m.iter().map(|&v| r[v]).product()).collect()
}

/// Words longer than this in lift norm swamp the low-order features.
const LIFT_NORM_CAP: f64 = 1e3;

/// Random lifts of words of length `1..=6`, times random unit phases. A word
/// stops growing once its lift norm passes [`LIFT_NORM_CAP`].
pub fn sample_group_lifts(gens: &GeneratorSet, n: usize, rng: &mut ChaCha8Rng) -> Vec<CMat> {
    let alphabet = gens.alphabet();
    (0..n)
        .map(|_| {
            let len = rng.random_range(1..=6);
            let mut g = alphabet[rng.random_range(0..alphabet.len())].clone();
            for _ in 1..len {
                let next = g.compose(&alphabet[rng.random_range(0..alphabet.len())]);
                if next.unitary_lift().norm() > LIFT_NORM_CAP {
                    break;
                }
                g = next;
            }
            g.unitary_lift() * linalg::random_phase(rng)
        })
        .collect()
}

/// `k1 a_t k2` with Haar `k1, k2`, `t` uniform on `[0, 3]`, random phase.
pub fn sample_ambient_lifts(m: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<CMat> {
    (0..n)
        .map(|_| {
            let t = rng.random_range(0.0..3.0);
            let g = random_k(m, rng).compose(&make_a(m, t)).compose(&random_k(m, rng));
            g.unitary_lift() * linalg::random_phase(rng)
        })
        .collect()
}

struct Spectrum {
    null_dim: usize,
    gap: f64,
    null_basis: DMatrix<f64>,
}

fn spectrum(a: &DMatrix<f64>, rel_tol: f64) -> Spectrum {
    let ncols = a.ncols();
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = sv.first().copied().unwrap_or(0.0);
    let cut = rel_tol * smax;
    let rank = sv.iter().filter(|&&s| s > cut).count();
    // rows of v_t beyond the computed ones (wide matrices) are null directions too
    let mut null: Vec<DVector<f64>> = idx[rank..].iter().map(|&i| v_t.row(i).transpose()).collect();
    if sv.len() < ncols {
        let full = a.transpose() * a;
        let eig = full.symmetric_eigen();
        let mut order: Vec<usize> = (0..ncols).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        null = order[..ncols - rank].iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    }
    let above = sv[..rank].last().copied().unwrap_or(smax);
    let below = sv.get(rank).copied().unwrap_or(0.0).max(cut * 1e-6);
    let gap = if rank == sv.len() && sv.len() >= ncols { above / cut } else { above / below.max(f64::MIN_POSITIVE) };
    let null_basis = if null.is_empty() { DMatrix::zeros(ncols, 0) } else { DMatrix::from_columns(&null) };
    Spectrum { null_dim: ncols - rank, gap, null_basis }
}

pub fn zariski_test(gens: &GeneratorSet, degree: usize, n_samples: usize, seed: u64) -> Result<ZariskiReport> {
    zariski_test_with(gens, degree, n_samples, seed, &Tolerances::default())
}

pub fn zariski_test_with(
    gens: &GeneratorSet,
    degree: usize,
    n_samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ZariskiReport> {
    if !(1..=4).contains(&degree) {
        return Err(Error::Precondition(format!("degree {degree} outside 1..=4")));
    }
    let m = gens.m();
    let nvars = 2 * (m + 1).pow(2);
    let mons = monomials(nvars, degree);
    let k = mons.len();
    if n_samples < 3 * k {
        return Err(Error::Precondition(format!("{n_samples} samples, need at least {} (3x monomials)", 3 * k)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let group = sample_group_lifts(gens, n_samples, &mut rng);
    let ambient = sample_ambient_lifts(m, n_samples, &mut rng);
    let raw = |lifts: &[CMat]| -> DMatrix<f64> {
        let rows: Vec<Vec<f64>> = lifts.iter().map(|x| features(x, &mons)).collect();
        DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j])
    };
    let mut fg = raw(&group);
    let mut fa = raw(&ambient);
    let scales: Vec<f64> = (0..k)
        .map(|j| {
            let s = (fg.column(j).norm_squared() + fa.column(j).norm_squared()) / (2 * n_samples) as f64;
            if s > 0.0 {
                s.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    for f in [&mut fg, &mut fa] {
        for (j, s) in scales.iter().enumerate() {
            f.column_mut(j).scale_mut(1.0 / s);
        }
        for i in 0..f.nrows() {
            let n = f.row(i).norm();
            if n > 0.0 {
                f.row_mut(i).scale_mut(1.0 / n);
            }
        }
    }
    let sg = spectrum(&fg, tol.rank);
    let sa = spectrum(&fa, tol.rank);
    let gap = sg.gap.min(sa.gap);
    let mut report = ZariskiReport {
        degree,
        monomial_count: k,
        samples: n_samples,
        null_dim_group: sg.null_dim,
        null_dim_ambient: sa.null_dim,
        gap,
        verdict: Verdict::Inconclusive,
        witness: None,
        column_scales: scales.clone(),
        m,
    };
    if gap < 10.0 {
        return Ok(report);
    }
    if sg.null_dim == sa.null_dim {
        report.verdict = Verdict::DenseAtDegree;
        return Ok(report);
    }
    if sg.null_dim < sa.null_dim {
        return Ok(report);
    }
    // component of the group nullspace orthogonal to the ambient nullspace
    let ng = &sg.null_basis;
    let na = &sa.null_basis;
    let proj = if na.ncols() > 0 { ng - na * (na.transpose() * ng) } else { ng.clone() };
    let svd = proj.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let best = (0..svd.singular_values.len())
        .max_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]))
        .expect("nonempty");
    let c = u.column(best).into_owned();
    let on_group = (&fg * &c).amax();
    let on_ambient = (&fa * &c).amax();
    if on_group <= tol.poly && on_ambient > 10.0 * tol.poly {
        report.verdict = Verdict::NotDense;
        report.witness = Some((0..k).map(|j| c[j] / scales[j]).collect());
    }
    Ok(report)
}
