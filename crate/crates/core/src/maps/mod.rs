//! Rational proper maps `B^m -> B^M` and the numerical checks built on them.

mod detector;
mod ftag;
mod rigidity;
mod symmetry;

pub use detector::{detector_h, h0, z_x_membership, z_x_report, DetectorSetup, MembershipReport, OracleLine};
pub use ftag::{ftag_fit, ftag_fit_with, Branch, FtagFit};
pub use rigidity::{rigidity_verify, Certificate, RigidityConfig, RigidityReport, RigidityVerdict};
pub use symmetry::{
    block_extension, check_loxo_pair, find_psi, verify_symmetry_pair, LoxoPairReport, SymmetryPair,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GroupElement;
use crate::linalg::{norm, CMat, CVec, C64, ONE};
use crate::poly::Poly;
use crate::sampling::{random_ball_point, random_boundary_point};
use crate::tolerance::Tolerances;

/// `f(z) = (p_1(z), ..., p_M(z)) / q(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapRepr", into = "MapRepr")]
pub struct RationalProperMap {
    m: usize,
    big_m: usize,
    numerator: Vec<Poly>,
    denominator: Poly,
}

#[derive(Serialize, Deserialize)]
struct MapRepr {
    m: usize,
    #[serde(rename = "M")]
    big_m: usize,
    numerator: Vec<Poly>,
    denominator: Poly,
}

impl TryFrom<MapRepr> for RationalProperMap {
    type Error = Error;

    fn try_from(r: MapRepr) -> Result<Self> {
        RationalProperMap::new(r.m, r.big_m, r.numerator, r.denominator)
    }
}

impl From<RationalProperMap> for MapRepr {
    fn from(f: RationalProperMap) -> Self {
        MapRepr { m: f.m, big_m: f.big_m, numerator: f.numerator, denominator: f.denominator }
    }
}

/// Sample-based check of the map invariants.
#[derive(Debug, Clone, Serialize)]
pub struct MapCheck {
    pub q_min: f64,
    /// `max |‖f(x)‖ - 1|` over boundary samples.
    pub boundary_defect: f64,
    /// `max ‖f(z)‖` over interior samples.
    pub interior_max: f64,
    pub degree: u32,
    pub proper: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchwarzReport {
    pub samples: usize,
    /// `max (‖f(z)‖ - ‖z‖)`.
    pub worst_excess: f64,
    #[serde(with = "crate::json::cvec")]
    pub worst_point: CVec,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderEstimate {
    pub alpha_hat: f64,
    pub c_hat: f64,
    /// `(δ, max ‖f(x) - f(y)‖)` per separation scale.
    pub moduli: Vec<(f64, f64)>,
    /// `max (1 - ‖f(z)‖) - C (1 - ‖z‖)^α` over fresh radial samples.
    pub lemma_worst: f64,
    pub lemma_holds: bool,
}

impl RationalProperMap {
    pub fn new(m: usize, big_m: usize, numerator: Vec<Poly>, denominator: Poly) -> Result<Self> {
        if m == 0 || big_m == 0 {
            return Err(Error::Degenerate("dimensions must be positive".into()));
        }
        if numerator.len() != big_m {
            return Err(Error::DimensionMismatch { expected: big_m, found: numerator.len() });
        }
        for p in numerator.iter().chain(std::iter::once(&denominator)) {
            if p.nvars() > m {
                return Err(Error::DimensionMismatch { expected: m, found: p.nvars() });
            }
        }
        if denominator.is_zero() {
            return Err(Error::Degenerate("denominator is the zero polynomial".into()));
        }
        Ok(Self { m, big_m, numerator, denominator })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn big_m(&self) -> usize {
        self.big_m
    }

    pub fn numerator(&self) -> &[Poly] {
        &self.numerator
    }

    pub fn denominator(&self) -> &Poly {
        &self.denominator
    }

    pub fn degree(&self) -> u32 {
        self.numerator.iter().map(Poly::degree).chain(std::iter::once(self.denominator.degree())).max().unwrap_or(0)
    }

    pub fn eval(&self, z: &CVec) -> Result<CVec> {
        self.eval_with(z, &Tolerances::default())
    }

    /// Evaluates on the closed ball.
    pub fn eval_with(&self, z: &CVec, tol: &Tolerances) -> Result<CVec> {
        if z.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, found: z.len() });
        }
        if norm(z) > 1.0 + tol.bdry {
            return Err(Error::Precondition(format!("|z| = {} outside the closed ball", norm(z))));
        }
        let zs = z.as_slice();
        let q = self.denominator.eval(zs);
        if !(q.norm() >= tol.denom) {
            return Err(Error::Pole { value: q.norm() });
        }
        Ok(CVec::from_iterator(self.big_m, self.numerator.iter().map(|p| p.eval(zs) / q)))
    }

    /// Checks the invariants on `n` boundary and `n` interior samples.
    pub fn check(&self, n: usize, seed: u64, tol: &Tolerances) -> Result<MapCheck> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut q_min = f64::INFINITY;
        let mut boundary_defect: f64 = 0.0;
        let mut interior_max: f64 = 0.0;
        for _ in 0..n {
            let x = random_boundary_point(self.m, &mut rng).into_vec();
            q_min = q_min.min(self.denominator.eval(x.as_slice()).norm());
            let fx = self.eval_with(&x, tol)?;
            boundary_defect = boundary_defect.max((norm(&fx) - 1.0).abs());
            let z = random_ball_point(self.m, 1.0, &mut rng).into_vec();
            interior_max = interior_max.max(norm(&self.eval_with(&z, tol)?));
        }
        let proper = q_min >= tol.denom && boundary_defect <= tol.proper && interior_max < 1.0;
        Ok(MapCheck { q_min, boundary_defect, interior_max, degree: self.degree(), proper })
    }

    /// `f ∘ φ` for `φ ∈ Aut(B^m)`, kept in lowest common degree.
    pub fn precompose(&self, phi: &GroupElement) -> Result<RationalProperMap> {
        if phi.m() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, found: phi.m() });
        }
        let m = self.m;
        let l = phi.lift();
        let linear = |row: usize| -> Poly {
            let mut p = Poly::constant(m, l[(row, m)]);
            for j in 0..m {
                p = &p + &Poly::variable(m, j).scale(l[(row, j)]);
            }
            p
        };
        let subs: Vec<Poly> = (0..m).map(linear).collect();
        let den = linear(m);
        let d = self.degree();
        let homog = |p: &Poly| -> Poly {
            let mut acc = Poly::zero();
            for t in p.terms() {
                let deg: u32 = t.exponents.iter().sum();
                let mut v = Poly::constant(m, t.coeff);
                for (i, &e) in t.exponents.iter().enumerate() {
                    if e > 0 {
                        v = &v * &subs[i].pow(e);
                    }
                }
                v = &v * &den.pow(d - deg);
                acc = &acc + &v;
            }
            acc
        };
        let numerator = self.numerator.iter().map(homog).collect();
        let denominator = homog(&self.denominator);
        RationalProperMap::new(m, self.big_m, numerator, denominator).map(|f| f.rescaled())
    }

    /// `ψ ∘ f` for `ψ ∈ Aut(B^M)`.
    pub fn postcompose(&self, psi: &GroupElement) -> Result<RationalProperMap> {
        if psi.m() != self.big_m {
            return Err(Error::DimensionMismatch { expected: self.big_m, found: psi.m() });
        }
        let n = self.big_m;
        let l = psi.lift();
        let row = |i: usize| -> Poly {
            let mut p = self.denominator.scale(l[(i, n)]);
            for j in 0..n {
                p = &p + &self.numerator[j].scale(l[(i, j)]);
            }
            p
        };
        let numerator = (0..n).map(row).collect();
        let denominator = row(n);
        RationalProperMap::new(self.m, n, numerator, denominator).map(|f| f.rescaled())
    }

    fn rescaled(self) -> Self {
        let s = self.denominator.max_coeff();
        if s > 0.0 && s.is_finite() {
            let c = C64::new(1.0 / s, 0.0);
            Self {
                m: self.m,
                big_m: self.big_m,
                numerator: self.numerator.iter().map(|p| p.scale(c)).collect(),
                denominator: self.denominator.scale(c),
            }
        } else {
            self
        }
    }
}

/// `f(z) = (z, 0) ∈ C^M`.
pub fn trivial_embedding(m: usize, big_m: usize) -> RationalProperMap {
    assert!(big_m >= m && m >= 1, "trivial embedding needs 1 <= m <= M");
    let numerator = (0..big_m).map(|i| if i < m { Poly::variable(m, i) } else { Poly::zero() }).collect();
    RationalProperMap::new(m, big_m, numerator, Poly::constant(m, ONE)).expect("valid fixture")
}

/// `f(z1, z2) = (z1^2, √2 z1 z2, z2^2)`, with `‖f(z)‖ = ‖z‖^2`.
pub fn degree2_homogeneous() -> RationalProperMap {
    let s2 = C64::new(std::f64::consts::SQRT_2, 0.0);
    let numerator = vec![
        Poly::monomial(ONE, vec![2, 0]),
        Poly::monomial(s2, vec![1, 1]),
        Poly::monomial(ONE, vec![0, 2]),
    ];
    RationalProperMap::new(2, 3, numerator, Poly::constant(2, ONE)).expect("valid fixture")
}

/// The `3 x 3` unitary `S` with `f(Uz) = S f(z)` for [`degree2_homogeneous`].
pub fn sym2(u: &CMat) -> CMat {
    let (a, b, c, d) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    let s2 = C64::new(std::f64::consts::SQRT_2, 0.0);
    CMat::from_row_slice(
        3,
        3,
        &[a * a, s2 * a * b, b * b, s2 * a * c, a * d + b * c, s2 * b * d, c * c, s2 * c * d, d * d],
    )
}

/// `max (‖f(z)‖ - ‖z‖)` over `samples`; requires `f(0) = 0`.
pub fn schwarz_check(f: &RationalProperMap, samples: &[CVec], tol: &Tolerances) -> Result<SchwarzReport> {
    let f0 = f.eval_with(&CVec::zeros(f.m), tol)?;
    if norm(&f0) > tol.sym {
        return Err(Error::Precondition(format!("|f(0)| = {:.3e}; normalize by postcomposition first", norm(&f0))));
    }
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_point = CVec::zeros(f.m);
    for z in samples {
        let e = norm(&f.eval_with(z, tol)?) - norm(z);
        if e > worst_excess {
            worst_excess = e;
            worst_point = z.clone();
        }
    }
    Ok(SchwarzReport { samples: samples.len(), worst_excess, worst_point, passed: worst_excess <= 1e-12 })
}

/// An automorphism of `B^M` sending `p` to the origin.
pub fn move_to_origin(p: &CVec) -> Result<GroupElement> {
    let r = norm(p);
    if r >= 1.0 {
        return Err(Error::Precondition(format!("|p| = {r} is not inside the ball")));
    }
    let n = p.len();
    if r == 0.0 {
        return Ok(GroupElement::identity(n));
    }
    // k sends e1 to p/|p|; a_{-t} pulls tanh(t) e1 back to 0
    let k = crate::normal_forms::make_k_unchecked(&crate::linalg::unitary_completion(&(p / C64::new(r, 0.0))));
    let a = crate::normal_forms::make_a(n, -r.atanh());
    Ok(a.compose(&k.inverse()))
}

/// Empirical Hölder exponent of `f` on the sphere, plus the constant of
/// `1 - ‖f(z)‖ <= C (1 - ‖z‖)^α` on radial samples.
pub fn holder_estimate(
    f: &RationalProperMap,
    n_pairs: usize,
    scale_range: (f64, f64),
    seed: u64,
) -> Result<HolderEstimate> {
    let (lo, hi) = scale_range;
    if !(lo > 0.0 && hi > lo && hi <= 1.0) || n_pairs == 0 {
        return Err(Error::Precondition("scale range must satisfy 0 < lo < hi <= 1".into()));
    }
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const SCALES: usize = 8;
    let deltas: Vec<f64> = (0..SCALES).map(|i| lo * (hi / lo).powf(i as f64 / (SCALES - 1) as f64)).collect();
    let mut moduli = vec![0.0f64; SCALES];
    let mut alpha_hat = f64::INFINITY;
    for _ in 0..n_pairs {
        let x = random_boundary_point(f.m, &mut rng).into_vec();
        let fx = f.eval_with(&x, &tol)?;
        let u = crate::linalg::random_vector(f.m, &mut rng);
        let mut pts = Vec::with_capacity(SCALES);
        for (i, &d) in deltas.iter().enumerate() {
            let y = (&x + &u * C64::new(d / norm(&u), 0.0)).normalize();
            let sep = norm(&(&y - &x));
            let gap = norm(&(f.eval_with(&y, &tol)? - &fx));
            moduli[i] = moduli[i].max(gap);
            if sep > 0.0 && gap > 0.0 {
                pts.push((sep.ln(), gap.ln()));
            }
        }
        if pts.len() >= 2 {
            alpha_hat = alpha_hat.min(crate::dynamics::fit_slope(&pts));
        }
    }
    if !alpha_hat.is_finite() {
        return Err(Error::Degenerate("boundary values are constant".into()));
    }
    let alpha_hat = alpha_hat.min(1.0);
    let radial = |rng: &mut ChaCha8Rng, k: usize| -> Result<(f64, f64)> {
        let x = random_boundary_point(f.m, rng).into_vec();
        let r = if k.is_multiple_of(4) { 1.0 - 10f64.powi(-((k / 4) as i32 % 10) - 1) } else { rng.random::<f64>() };
        let fz = f.eval_with(&(x * C64::new(r, 0.0)), &tol)?;
        Ok((1.0 - r, 1.0 - norm(&fz)))
    };
    let mut c_hat: f64 = 1.0;
    for k in 0..200 {
        let (dz, dfz) = radial(&mut rng, k)?;
        if dz > 0.0 {
            c_hat = c_hat.max(dfz / dz.powf(alpha_hat));
        }
    }
    let mut lemma_worst = f64::NEG_INFINITY;
    for k in 0..1000 {
        let (dz, dfz) = radial(&mut rng, k + 1)?;
        lemma_worst = lemma_worst.max(dfz - c_hat * dz.powf(alpha_hat));
    }
    Ok(HolderEstimate {
        alpha_hat,
        c_hat,
        moduli: deltas.into_iter().zip(moduli).collect(),
        lemma_worst,
        lemma_holds: lemma_worst <= 1e-12,
    })
}

pub(crate) fn random_interior(m: usize, n: usize, max_radius: f64, rng: &mut ChaCha8Rng) -> Vec<CVec> {
    (0..n).map(|_| random_ball_point(m, max_radius, rng).into_vec()).collect()
}

pub(crate) fn lift_point(v: &CVec) -> CVec {
    let mut h = CVec::from_element(v.len() + 1, ONE);
    h.rows_mut(0, v.len()).copy_from(v);
    h
}
