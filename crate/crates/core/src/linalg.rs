//! Small complex linear-algebra kernels used throughout the crate.

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Standard Hermitian inner product, linear in the first slot: `sum u_i conj(v_i)`.
pub fn inner(u: &CVec, v: &CVec) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm(v: &CVec) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Index (row-major) of the first entry whose modulus is within a relative
/// `1e-9` of the largest modulus. Ties are common (identity-like lifts), so a
/// fixed scan order keeps the choice deterministic.
fn phase_pivot(a: &CMat) -> Option<(usize, usize)> {
    let max = a.iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
    if max == 0.0 {
        return None;
    }
    let cut = max * (1.0 - 1e-9);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if a[(i, j)].norm() >= cut {
                return Some((i, j));
            }
        }
    }
    None
}

/// Rescales `a` to Frobenius norm `sqrt(n)` (n = number of rows) and rotates
/// its phase so the pivot entry is real and positive.
pub fn normalize_projective(a: &CMat) -> CMat {
    let f = frobenius(a);
    if f == 0.0 || !f.is_finite() {
        return a.clone();
    }
    let target = (a.nrows() as f64).sqrt();
    let mut out = a * C64::new(target / f, 0.0);
    if let Some((i, j)) = phase_pivot(&out) {
        let p = out[(i, j)];
        let rot = p.conj() / p.norm();
        out *= rot;
        out[(i, j)] = C64::new(out[(i, j)].norm(), 0.0);
    }
    out
}

/// `min_{|mu| = 1} |A - mu B|_F` after scaling both to Frobenius norm `sqrt(n)`.
pub fn projective_distance(a: &CMat, b: &CMat) -> f64 {
    let target = (a.nrows() as f64).sqrt();
    let fa = frobenius(a);
    let fb = frobenius(b);
    if fa == 0.0 || fb == 0.0 {
        return f64::INFINITY;
    }
    let a = a * C64::new(target / fa, 0.0);
    let b = b * C64::new(target / fb, 0.0);
    let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum();
    let mu = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    frobenius(&(a - b * mu))
}

/// Completes a unit vector to a unitary matrix whose first column is `v`.
///
/// Modified Gram-Schmidt over the standard basis, always taking next the
/// candidate with the largest residual.
pub fn unitary_completion(v: &CVec) -> CMat {
    let n = v.len();
    let mut cols: Vec<CVec> = Vec::with_capacity(n);
    let nv = norm(v);
    cols.push(v / C64::new(nv, 0.0));
    let mut used = vec![false; n];
    while cols.len() < n {
        let mut best: Option<(usize, CVec, f64)> = None;
        for j in 0..n {
            if used[j] {
                continue;
            }
            let mut r = CVec::zeros(n);
            r[j] = ONE;
            for c in &cols {
                let coef = inner(&r, c);
                r -= c * coef;
            }
            // second pass for stability
            for c in &cols {
                let coef = inner(&r, c);
                r -= c * coef;
            }
            let rn = norm(&r);
            if best.as_ref().is_none_or(|b| rn > b.2) {
                best = Some((j, r, rn));
            }
        }
        let (j, r, rn) = best.expect("basis exhausted before completion");
        used[j] = true;
        cols.push(r / C64::new(rn, 0.0));
    }
    CMat::from_columns(&cols)
}

/// Singular values (descending) and an orthonormal basis of the numerical
/// nullspace: right singular vectors with `sigma <= rel_tol * sigma_max`.
pub fn nullspace(a: &CMat, rel_tol: f64) -> (Vec<f64>, CMat) {
    let (r, c) = a.shape();
    let padded = if r < c {
        let mut p = CMat::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = SVD::new(padded, false, true);
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let v_t = svd.v_t.expect("v_t requested");
    let smax = sv.first().copied().unwrap_or(0.0);
    let cut = rel_tol * smax;
    let null_rows: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= cut).collect();
    let mut basis = CMat::zeros(c, null_rows.len());
    for (k, &i) in null_rows.iter().enumerate() {
        for j in 0..c {
            basis[(j, k)] = v_t[(i, j)].conj();
        }
    }
    (sv, basis)
}

/// Right singular vector of the smallest singular value, with the singular values.
pub fn smallest_right_singular(a: &CMat) -> (Vec<f64>, CVec) {
    let (r, c) = a.shape();
    let padded = if r < c {
        let mut p = CMat::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = SVD::new(padded, false, true);
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let v_t = svd.v_t.expect("v_t requested");
    let last = sv.len() - 1;
    let v = CVec::from_iterator(c, (0..c).map(|j| v_t[(last, j)].conj()));
    (sv, v)
}

/// Orthonormal basis of the column span with relative rank cutoff.
pub fn column_span(a: &CMat, rel_tol: f64) -> CMat {
    let svd = SVD::new(a.clone(), true, false);
    let u = svd.u.expect("u requested");
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > rel_tol * smax).count();
    u.columns(0, rank).into_owned()
}

pub fn largest_singular_value(a: &CMat) -> f64 {
    let svd = SVD::new(a.clone(), false, false);
    svd.singular_values.iter().copied().fold(0.0, f64::max)
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    CVec::from_iterator(n, (0..n).map(|_| complex_normal(rng)))
}

/// Haar-distributed unitary matrix (QR of a Ginibre matrix with phase fix).
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let z = CMat::from_fn(n, n, |_, _| complex_normal(rng));
    let qr = z.qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = q;
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            out[(i, j)] *= ph;
        }
    }
    out
}

pub fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    C64::from_polar(1.0, th)
}

/// `|U^* U - Id|_F`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let n = u.nrows();
    frobenius(&(u.adjoint() * u - CMat::identity(n, n)))
}
