//! Numerical run of the rigidity argument: symmetries with Zariski dense
//! projection force `f` to be equivalent to `z -> (z, 0)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::detector::{z_x_report, MembershipReport};
use super::ftag::{ftag_fit_with, Branch};
use super::symmetry::{check_loxo_pair, project_to_group, verify_symmetry_pair, LoxoPairReport, SymmetryPair};
use super::{holder_estimate, move_to_origin, random_interior, RationalProperMap};
use crate::error::{Error, Result};
use crate::geometry::GroupElement;
use crate::linalg::{self, norm, CMat, CVec};
use crate::normal_forms::make_k_unchecked;
use crate::sampling::random_boundary_point;
use crate::spectral::{classify_with, Kind};
use crate::subgroups::{monomials, word_ball, zariski_test_with, GeneratorSet, Verdict, ZariskiReport};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RigidityConfig {
    /// Word length for the loxodromic pair checks.
    pub word_length: usize,
    /// Random boundary pairs `(x, y)` for the line detector.
    pub n_lines: usize,
    pub n_max: usize,
    /// Samples for the final residual.
    pub n_samples: usize,
    pub zariski_degree: usize,
    /// Largest accepted final residual.
    pub final_tol: f64,
    pub seed: u64,
    pub tol: Tolerances,
}

impl Default for RigidityConfig {
    fn default() -> Self {
        Self {
            word_length: 2,
            n_lines: 20,
            n_max: 8,
            n_samples: 1000,
            zariski_degree: 2,
            final_tol: 1e-7,
            seed: 0,
            tol: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RigidityVerdict {
    Equivalent,
    NotEquivalent,
    PreconditionFailed,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind")]
pub enum Certificate {
    FailingPair { index: usize, residual: f64 },
    Zariski { report: ZariskiReport },
    LoxoPair { word: String, report: LoxoPairReport },
    FailingLine {
        #[serde(with = "crate::json::cvec")]
        x: CVec,
        #[serde(with = "crate::json::cvec")]
        y: CVec,
        report: MembershipReport,
    },
    FailingFit { subset: Vec<usize>, best_residual: f64 },
    SpanDimension { dimension: usize, expected: usize },
    FinalFit { residual: f64, detail: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct RigidityReport {
    pub verdict: RigidityVerdict,
    pub certificate: Option<Certificate>,
    /// `φ1 ∈ Aut(B^m)` and `φ2 ∈ Aut(B^M)` with `φ2 ∘ f ∘ φ1 = (z, 0)`.
    pub phi1: Option<GroupElement>,
    pub phi2: Option<GroupElement>,
    pub residual: Option<f64>,
    pub alpha_hat: Option<f64>,
    pub loxo_pairs_checked: usize,
    pub lines_checked: usize,
    pub subsets_fitted: usize,
    /// Hypotheses the numerics cannot certify.
    pub assumptions: Vec<String>,
}

impl RigidityReport {
    fn new() -> Self {
        Self {
            verdict: RigidityVerdict::Equivalent,
            certificate: None,
            phi1: None,
            phi2: None,
            residual: None,
            alpha_hat: None,
            loxo_pairs_checked: 0,
            lines_checked: 0,
            subsets_fitted: 0,
            assumptions: vec!["boundary extension is Hölder with exponent > 1/2".into()],
        }
    }

    fn fail(mut self, verdict: RigidityVerdict, c: Certificate) -> Self {
        self.verdict = verdict;
        self.certificate = Some(c);
        self
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out.sort();
    out
}

pub fn rigidity_verify(f: &RationalProperMap, pairs: &[SymmetryPair], config: &RigidityConfig) -> Result<RigidityReport> {
    use RigidityVerdict::*;
    let tol = &config.tol;
    let (m, big_m) = (f.m(), f.big_m());
    let report = RigidityReport::new();
    if pairs.is_empty() {
        return Err(Error::Precondition("no symmetry pairs given".into()));
    }
    for (index, pair) in pairs.iter().enumerate() {
        let residual = verify_symmetry_pair(f, pair, 200, config.seed)?;
        if !(residual <= tol.sym) {
            return Ok(report.fail(PreconditionFailed, Certificate::FailingPair { index, residual }));
        }
    }
    let phis = GeneratorSet::from_elements(pairs.iter().map(|p| p.phi.clone()).collect(), config.seed)?;
    let psis = GeneratorSet::from_elements(pairs.iter().map(|p| p.psi.clone()).collect(), config.seed)?;
    let nmon = monomials(2 * (m + 1).pow(2), config.zariski_degree).len();
    let z = zariski_test_with(&phis, config.zariski_degree, 3 * nmon, config.seed, tol)?;
    if z.verdict != Verdict::DenseAtDegree {
        return Ok(report.fail(PreconditionFailed, Certificate::Zariski { report: z }));
    }

    // (1) f(0) = 0
    let psi0 = move_to_origin(&f.eval_with(&CVec::zeros(m), tol)?)?;
    let g = f.postcompose(&psi0)?;
    let mut report = report;
    let alpha = holder_estimate(&g, 20, (1e-4, 1e-1), config.seed)?.alpha_hat;
    report.alpha_hat = Some(alpha);

    // (2) loxodromic pairs in the word ball
    let psis0 = GeneratorSet::from_elements(psis.gens().iter().map(|p| p.conjugate_by(&psi0)).collect(), config.seed)?;
    let names: Vec<String> = (1..=pairs.len()).map(|i| format!("g{i}")).collect();
    for (word, phi) in word_ball(&phis, config.word_length, crate::subgroups::DEFAULT_WORD_BUDGET)? {
        if word.is_empty() {
            continue;
        }
        match classify_with(&phi, tol) {
            Ok(d) if d.kind == Kind::Loxodromic => {}
            _ => continue,
        }
        let pair = SymmetryPair { phi, psi: psis0.evaluate(&word) };
        let r = check_loxo_pair(&g, &pair, alpha, tol)?;
        report.loxo_pairs_checked += 1;
        if !r.passed {
            return Ok(report.fail(NotEquivalent, Certificate::LoxoPair { word: word.label(&names), report: r }));
        }
    }

    // (3) every chord line maps into a line
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut attempts = 0;
    while report.lines_checked < config.n_lines && attempts < 4 * config.n_lines {
        attempts += 1;
        let x = random_boundary_point(m, &mut rng).into_vec();
        let y = random_boundary_point(m, &mut rng).into_vec();
        let r = match z_x_report(&g, &x, &y, config.n_max, tol.line) {
            Ok(r) => r,
            // det A(y) too small at this base point: draw another pair
            Err(Error::Precondition(_)) | Err(Error::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        };
        report.lines_checked += 1;
        if !r.member {
            return Ok(report.fail(NotEquivalent, Certificate::FailingLine { x, y, report: r }));
        }
    }

    // (4) coordinate projections are fractional linear
    let zs = random_interior(m, 4 * (m + 1).pow(2), 0.95, &mut rng);
    let images: Vec<CVec> = zs.iter().map(|z| g.eval_with(z, tol)).collect::<Result<_>>()?;
    for subset in subsets(big_m, m) {
        let samples: Vec<(CVec, CVec)> = zs
            .iter()
            .zip(&images)
            .map(|(z, w)| (z.clone(), CVec::from_iterator(m, subset.iter().map(|&j| w[j]))))
            .collect();
        match ftag_fit_with(&samples, m, tol) {
            Ok(fit) if fit.branch == Branch::Holomorphic => report.subsets_fitted += 1,
            Ok(fit) => {
                return Ok(report.fail(NotEquivalent, Certificate::FailingFit { subset, best_residual: fit.other_residual }))
            }
            Err(Error::DegenerateImage { .. }) => {}
            Err(Error::NoFractionalLinearModel { best_residual }) => {
                return Ok(report.fail(NotEquivalent, Certificate::FailingFit { subset, best_residual }))
            }
            Err(e) => return Err(e),
        }
    }

    // (5) span reduction and the final automorphism fit
    let span = linalg::column_span(&CMat::from_columns(&images), 1e-9);
    if span.ncols() != m {
        return Ok(report.fail(NotEquivalent, Certificate::SpanDimension { dimension: span.ncols(), expected: m }));
    }
    let mut cols: Vec<CVec> = (0..m).map(|j| span.column(j).into_owned()).collect();
    let full = linalg::unitary_completion(&cols[0]);
    // complete the span basis with the standard vectors least aligned with it
    for j in 0..big_m {
        if cols.len() == big_m {
            break;
        }
        let mut r = full.column(j).into_owned();
        for c in &cols {
            let k = linalg::inner(&r, c);
            r -= c * k;
        }
        let nr = norm(&r);
        if nr > 1e-6 {
            cols.push(r / crate::linalg::C64::new(nr, 0.0));
        }
    }
    if cols.len() < big_m {
        let basis = CMat::identity(big_m, big_m);
        for j in 0..big_m {
            if cols.len() == big_m {
                break;
            }
            let mut r = basis.column(j).into_owned();
            for _ in 0..2 {
                for c in &cols {
                    let k = linalg::inner(&r, c);
                    r -= c * k;
                }
            }
            let nr = norm(&r);
            if nr > 1e-6 {
                cols.push(r / crate::linalg::C64::new(nr, 0.0));
            }
        }
    }
    let u = CMat::from_columns(&cols);
    let rotate = make_k_unchecked(&u.adjoint());
    let samples: Vec<(CVec, CVec)> = zs
        .iter()
        .zip(&images)
        .map(|(z, w)| (z.clone(), (u.adjoint() * w).rows(0, m).into_owned()))
        .collect();
    let fit = match ftag_fit_with(&samples, m, tol) {
        Ok(fit) if fit.branch == Branch::Holomorphic => fit,
        Ok(fit) => {
            return Ok(report.fail(
                NotEquivalent,
                Certificate::FinalFit { residual: fit.residual, detail: "anti-holomorphic self-map".into() },
            ))
        }
        Err(Error::NoFractionalLinearModel { best_residual }) => {
            return Ok(report.fail(
                NotEquivalent,
                Certificate::FinalFit { residual: best_residual, detail: "reduced map is not an automorphism".into() },
            ))
        }
        Err(e) => return Err(e),
    };
    let phi_fit = match project_to_group(fit.g.clone()).map(|g| GroupElement::with_tolerance(g, 1e-8)) {
        Some(Ok(p)) => p,
        _ => {
            return Ok(report.fail(
                NotEquivalent,
                Certificate::FinalFit { residual: fit.residual, detail: "fitted matrix is not in U(m,1)".into() },
            ))
        }
    };
    let phi1 = phi_fit.inverse();
    let phi2 = rotate.compose(&psi0);
    let mut residual: f64 = 0.0;
    for z in random_interior(m, config.n_samples, 0.99, &mut rng) {
        let w = phi2.act(&f.eval_with(&phi1.act(&z)?, tol)?)?;
        let mut target = CVec::zeros(big_m);
        target.rows_mut(0, m).copy_from(&z);
        residual = residual.max(norm(&(w - target)));
    }
    report.residual = Some(residual);
    report.phi1 = Some(phi1);
    report.phi2 = Some(phi2);
    if !(residual <= config.final_tol) {
        return Ok(report.fail(NotEquivalent, Certificate::FinalFit { residual, detail: "final residual too large".into() }));
    }
    Ok(report)
}
