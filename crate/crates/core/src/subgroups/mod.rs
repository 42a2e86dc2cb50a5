//! Finitely generated subgroups: word balls, orbits of the origin, limit
//! set samples, loxodromic elements with prescribed endpoints, and a
//! finite-degree Zariski density test.

mod words;
mod zariski;

pub use words::{Letter, Word};
pub use zariski::{monomials, zariski_test, zariski_test_with, Verdict, ZariskiReport};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, GroupElement};
use crate::linalg::{norm, CVec};
use crate::normal_forms::{make_a, make_k};
use crate::spectral::{classify, Kind};

/// Longest word length accepted by the enumerators.
pub const MAX_WORD_LENGTH: usize = 12;

/// Default cap on the number of reduced words enumerated in one call.
pub const DEFAULT_WORD_BUDGET: u128 = 2_000_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "GeneratorSetRepr", into = "GeneratorSetRepr")]
pub struct GeneratorSet {
    gens: Vec<GroupElement>,
    labels: Vec<String>,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct GeneratorSetRepr {
    gens: Vec<GroupElement>,
    #[serde(default)]
    labels: Vec<String>,
    #[serde(default)]
    seed: u64,
}

impl TryFrom<GeneratorSetRepr> for GeneratorSet {
    type Error = Error;

    fn try_from(r: GeneratorSetRepr) -> Result<Self> {
        let labels = if r.labels.is_empty() {
            (1..=r.gens.len()).map(|i| format!("g{i}")).collect()
        } else {
            r.labels
        };
        GeneratorSet::new(r.gens, labels, r.seed)
    }
}

impl From<GeneratorSet> for GeneratorSetRepr {
    fn from(g: GeneratorSet) -> Self {
        GeneratorSetRepr { gens: g.gens, labels: g.labels, seed: g.seed }
    }
}

impl GeneratorSet {
    pub fn new(gens: Vec<GroupElement>, labels: Vec<String>, seed: u64) -> Result<Self> {
        let first = gens.first().ok_or_else(|| Error::Precondition("empty generator set".into()))?;
        let m = first.m();
        if let Some(g) = gens.iter().find(|g| g.m() != m) {
            return Err(Error::DimensionMismatch { expected: m, found: g.m() });
        }
        if labels.len() != gens.len() {
            return Err(Error::Precondition("one label per generator is required".into()));
        }
        Ok(Self { gens, labels, seed })
    }

    /// Generators labelled `g1, g2, ...`.
    pub fn from_elements(gens: Vec<GroupElement>, seed: u64) -> Result<Self> {
        let labels = (1..=gens.len()).map(|i| format!("g{i}")).collect();
        Self::new(gens, labels, seed)
    }

    pub fn m(&self) -> usize {
        self.gens[0].m()
    }

    pub fn gens(&self) -> &[GroupElement] {
        &self.gens
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Generators followed by their inverses, indexed like [`Letter::index`].
    fn alphabet(&self) -> Vec<GroupElement> {
        let mut out = self.gens.clone();
        out.extend(self.gens.iter().map(|g| g.inverse()));
        out
    }

    pub fn evaluate(&self, word: &Word) -> GroupElement {
        let alphabet = self.alphabet();
        let k = self.gens.len();
        word.letters()
            .iter()
            .fold(GroupElement::identity(self.m()), |acc, l| acc.compose(&alphabet[l.index(k)]))
    }
}

/// `a_t` and its conjugate by a rotation taking `e1` to `e2`: fixed points
/// `+-e1` and `+-e2`; for `t >= 2` the pair plays ping-pong.
pub fn schottky_pair(m: usize, t: f64) -> GeneratorSet {
    assert!(m >= 2, "needs two independent directions");
    let a = make_a(m, t);
    let mut swap = crate::linalg::CMat::identity(m, m);
    swap[(0, 0)] = crate::linalg::ZERO;
    swap[(1, 1)] = crate::linalg::ZERO;
    swap[(0, 1)] = crate::linalg::ONE;
    swap[(1, 0)] = crate::linalg::ONE;
    let k = make_k(&swap).expect("permutation is unitary");
    let b = a.conjugate_by(&k);
    GeneratorSet::new(vec![a, b], vec!["a".into(), "b".into()], 0).expect("consistent dimensions")
}

/// Number of reduced words of length at most `length` on `k` generators.
pub fn reduced_word_count(k: usize, length: usize) -> u128 {
    if k == 0 {
        return 1;
    }
    let letters = 2 * k as u128;
    let mut total = 1u128;
    let mut layer = letters;
    for _ in 0..length {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(letters - 1);
    }
    total
}

/// All reduced words up to `length` with their group elements, in
/// breadth-first order (by length, then lexicographically by letter).
pub fn word_ball(gens: &GeneratorSet, length: usize, budget: u128) -> Result<Vec<(Word, GroupElement)>> {
    if length > MAX_WORD_LENGTH {
        return Err(Error::Precondition(format!("word length {length} exceeds {MAX_WORD_LENGTH}")));
    }
    let k = gens.gens.len();
    let needed = reduced_word_count(k, length);
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }
    let alphabet = gens.alphabet();
    let mut out = vec![(Word::empty(), GroupElement::identity(gens.m()))];
    let mut frontier = 0..1;
    for _ in 0..length {
        let start = out.len();
        for i in frontier.clone() {
            let (w, g) = out[i].clone();
            for letter in Letter::all(k) {
                if let Some(last) = w.last() {
                    if last.is_inverse_of(&letter) {
                        continue;
                    }
                }
                let elem = g.compose(&alphabet[letter.index(k)]);
                out.push((w.extended(letter), elem));
            }
        }
        frontier = start..out.len();
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitPoint {
    pub word: String,
    #[serde(with = "crate::json::cvec")]
    pub point: CVec,
}

/// Keeps the first of any group of points closer than `tol`, in input order.
fn dedup_points<T>(items: Vec<T>, point: impl Fn(&T) -> &CVec, tol: f64) -> Vec<T> {
    // coarse grid on the first real coordinate pair, exact check inside
    let cell = tol.max(1e-12) * 4.0;
    let key = |z: &CVec| -> (i64, i64) {
        let a = z.get(0).map_or(0.0, |c| c.re);
        let b = z.get(0).map_or(0.0, |c| c.im);
        ((a / cell).floor() as i64, (b / cell).floor() as i64)
    };
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut kept: Vec<T> = Vec::new();
    for item in items {
        let z = point(&item);
        let (kx, ky) = key(z);
        let mut dup = false;
        'scan: for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = grid.get(&(kx + dx, ky + dy)) {
                    if ids.iter().any(|&i| norm(&(point(&kept[i]) - z)) <= tol) {
                        dup = true;
                        break 'scan;
                    }
                }
            }
        }
        if !dup {
            grid.entry((kx, ky)).or_default().push(kept.len());
            kept.push(item);
        }
    }
    kept
}

pub const ORBIT_DEDUP_TOL: f64 = 1e-9;

/// `{(w, w(basepoint))}` over reduced words `w` of length at most `length`,
/// deduplicated by point proximity.
pub fn word_ball_orbit(gens: &GeneratorSet, length: usize, basepoint: &CVec, budget: u128) -> Result<Vec<OrbitPoint>> {
    let ball = word_ball(gens, length, budget)?;
    let mut pts = Vec::with_capacity(ball.len());
    for (w, g) in &ball {
        pts.push(OrbitPoint { word: w.label(gens.labels()), point: g.act(basepoint)? });
    }
    Ok(dedup_points(pts, |p| &p.point, ORBIT_DEDUP_TOL))
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitSetSample {
    pub points: Vec<BoundaryPoint>,
    pub words: Vec<String>,
    pub radius_cut: f64,
}

/// Orbit points of the origin with norm above `1 - eps`, pushed radially to the sphere.
pub fn limit_set(gens: &GeneratorSet, length: usize, eps: f64, budget: u128) -> Result<LimitSetSample> {
    let m = gens.m();
    let orbit = word_ball_orbit(gens, length, &CVec::zeros(m), budget)?;
    let radius_cut = 1.0 - eps;
    let near: Vec<(String, BoundaryPoint)> = orbit
        .into_iter()
        .filter(|p| norm(&p.point) > radius_cut)
        .map(|p| (p.word, BoundaryPoint::renormalized(p.point)))
        .collect();
    let near = dedup_points(near, |p| p.1.as_vec(), ORBIT_DEDUP_TOL);
    if near.is_empty() {
        return Err(Error::LimitSetUnresolved { length, eps });
    }
    let (words, points) = near.into_iter().unzip();
    Ok(LimitSetSample { points, words, radius_cut })
}

#[derive(Debug, Clone, Serialize)]
pub struct LoxodromicWord {
    pub word: String,
    pub element: GroupElement,
    pub fixed_plus: BoundaryPoint,
    pub fixed_minus: BoundaryPoint,
}

/// Fixed points of every loxodromic element in the word ball.
pub fn loxodromic_fixed_points_in_ball(gens: &GeneratorSet, length: usize, budget: u128) -> Result<Vec<LoxodromicWord>> {
    let ball = word_ball(gens, length, budget)?;
    let mut out = Vec::new();
    for (w, g) in ball {
        if let Ok(d) = classify(&g) {
            if let (Kind::Loxodromic, Some(p), Some(q)) = (d.kind, d.fixed_plus, d.fixed_minus) {
                out.push(LoxodromicWord { word: w.label(gens.labels()), element: g, fixed_plus: p, fixed_minus: q });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct PairApproximation {
    pub word: String,
    pub element: GroupElement,
    pub fixed_plus: BoundaryPoint,
    pub fixed_minus: BoundaryPoint,
    /// `|x+ - x| + |x- - y|`.
    pub error: f64,
}

const PAIR_CANDIDATES_PER_LAYER: usize = 8;

/// A loxodromic word whose attracting / repelling fixed points approximate
/// `x` / `y`.
///
/// Candidates are all words of the ball plus products `g h^{-1}` where, in
/// each word-length layer, `g(0)` is among the closest to `x` and `h(0)`
/// among the closest to `y`. The candidate pool only grows with `length`,
/// so the returned error is non-increasing in `length`.
pub fn loxodromic_pair_approx(
    gens: &GeneratorSet,
    x: &BoundaryPoint,
    y: &BoundaryPoint,
    length: usize,
    budget: u128,
) -> Result<PairApproximation> {
    if norm(&(x.as_vec() - y.as_vec())) <= 1e-9 {
        return Err(Error::Precondition("x and y must be distinct".into()));
    }
    let ball = word_ball(gens, length, budget)?;
    let m = gens.m();
    let origin = CVec::zeros(m);
    let images: Vec<CVec> = ball.iter().map(|(_, g)| g.act(&origin)).collect::<Result<_>>()?;
    let mut near_x: Vec<usize> = Vec::new();
    let mut near_y: Vec<usize> = Vec::new();
    for len in 0..=length {
        let layer: Vec<usize> = (0..ball.len()).filter(|&i| ball[i].0.len() == len).collect();
        for (target, dest) in [(x, &mut near_x), (y, &mut near_y)] {
            let mut scored: Vec<(f64, usize)> =
                layer.iter().map(|&i| (norm(&(&images[i] - target.as_vec())), i)).collect();
            scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            dest.extend(scored.iter().take(PAIR_CANDIDATES_PER_LAYER).map(|s| s.1));
        }
    }
    let mut candidates: Vec<(Word, GroupElement)> = ball.clone();
    for &i in &near_x {
        for &j in &near_y {
            if i == j {
                continue;
            }
            let w = ball[i].0.concat(&ball[j].0.inverse());
            if !w.is_empty() {
                candidates.push((w, ball[i].1.compose(&ball[j].1.inverse())));
            }
        }
    }
    let mut best: Option<PairApproximation> = None;
    let mut best_len = usize::MAX;
    for (w, g) in candidates {
        let Ok(d) = classify(&g) else { continue };
        let (Kind::Loxodromic, Some(p), Some(q)) = (d.kind, d.fixed_plus, d.fixed_minus) else { continue };
        let err = norm(&(p.as_vec() - x.as_vec())) + norm(&(q.as_vec() - y.as_vec()));
        let better = match &best {
            None => true,
            Some(b) => err < b.error - 1e-12 || ((err - b.error).abs() <= 1e-12 && w.len() < best_len),
        };
        if better {
            best_len = w.len();
            best = Some(PairApproximation {
                word: w.label(gens.labels()),
                element: g,
                fixed_plus: p,
                fixed_minus: q,
                error: err,
            });
        }
    }
    best.ok_or_else(|| Error::Inconclusive("no loxodromic word in the ball".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::basis_vector;
    use crate::sampling::random_k;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn word_counts() {
        assert_eq!(reduced_word_count(1, 3), 7);
        assert_eq!(reduced_word_count(2, 2), 1 + 4 + 12);
        let g = schottky_pair(2, 2.0);
        assert_eq!(word_ball(&g, 3, DEFAULT_WORD_BUDGET).unwrap().len() as u128, reduced_word_count(2, 3));
    }

    #[test]
    fn budget_and_length_guards() {
        let g = schottky_pair(2, 2.0);
        assert!(matches!(word_ball(&g, 8, 100), Err(Error::Budget { .. })));
        assert!(matches!(word_ball(&g, 13, u128::MAX), Err(Error::Precondition(_))));
    }

    #[test]
    fn abelian_orbit() {
        let t = 0.4;
        let g = GeneratorSet::from_elements(vec![make_a(2, t)], 0).unwrap();
        let orbit = word_ball_orbit(&g, 5, &CVec::zeros(2), DEFAULT_WORD_BUDGET).unwrap();
        assert_eq!(orbit.len(), 11);
        for p in &orbit {
            let j = (p.point[0].re.atanh() / t).round();
            assert!(j.abs() <= 5.0);
            assert!((p.point[0].re - (j * t).tanh()).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_orbit_is_a_point() {
        let g = GeneratorSet::from_elements(vec![GroupElement::identity(2)], 0).unwrap();
        let orbit = word_ball_orbit(&g, 4, &CVec::zeros(2), DEFAULT_WORD_BUDGET).unwrap();
        assert_eq!(orbit.len(), 1);
        assert_eq!(orbit[0].word, "e");
    }

    #[test]
    fn orbit_dedup_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let gens = GeneratorSet::from_elements(
            vec![crate::sampling::random_group_element(2, 1.0, &mut rng), crate::sampling::random_group_element(2, 1.0, &mut rng)],
            0,
        )
        .unwrap();
        for len in 1..=4 {
            let orbit = word_ball_orbit(&gens, len, &CVec::zeros(2), DEFAULT_WORD_BUDGET).unwrap();
            let ball = word_ball(&gens, len, DEFAULT_WORD_BUDGET).unwrap();
            let pts: Vec<CVec> = ball.iter().map(|(_, g)| g.act(&CVec::zeros(2)).unwrap()).collect();
            let mut distinct: Vec<CVec> = Vec::new();
            for p in pts {
                if !distinct.iter().any(|q| norm(&(q - &p)) <= ORBIT_DEDUP_TOL) {
                    distinct.push(p);
                }
            }
            assert_eq!(orbit.len(), distinct.len());
        }
    }

    #[test]
    fn limit_set_of_a() {
        let g = GeneratorSet::from_elements(vec![make_a(2, 1.0)], 0).unwrap();
        let ls = limit_set(&g, 6, 1e-3, DEFAULT_WORD_BUDGET).unwrap();
        assert_eq!(ls.points.len(), 2);
        let e1 = basis_vector(2, 0);
        assert!(ls.points.iter().any(|p| norm(&(p.as_vec() - &e1)) < 1e-12));
        assert!(ls.points.iter().any(|p| norm(&(p.as_vec() + &e1)) < 1e-12));
    }

    #[test]
    fn limit_set_of_compact_group_is_unresolved() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = GeneratorSet::from_elements(vec![random_k(2, &mut rng), random_k(2, &mut rng)], 0).unwrap();
        assert!(matches!(limit_set(&g, 5, 1e-3, DEFAULT_WORD_BUDGET), Err(Error::LimitSetUnresolved { .. })));
    }

    #[test]
    fn pair_approx_for_a() {
        let g = GeneratorSet::from_elements(vec![make_a(2, 1.0)], 0).unwrap();
        let x = BoundaryPoint::basis(2, 0);
        let y = BoundaryPoint::renormalized(-basis_vector(2, 0));
        let p = loxodromic_pair_approx(&g, &x, &y, 3, DEFAULT_WORD_BUDGET).unwrap();
        assert_eq!(p.word, "g1");
        assert!(p.error < 1e-12);
        assert!(loxodromic_pair_approx(&g, &x, &x, 3, DEFAULT_WORD_BUDGET).is_err());
    }

    #[test]
    fn pair_approx_error_is_monotone() {
        let g = schottky_pair(2, 2.0);
        let ls = limit_set(&g, 6, 1e-3, DEFAULT_WORD_BUDGET).unwrap();
        let x = ls.points[ls.points.len() / 3].clone();
        let y = ls.points[2 * ls.points.len() / 3].clone();
        let mut last = f64::INFINITY;
        for len in [4, 6, 8] {
            let p = loxodromic_pair_approx(&g, &x, &y, len, DEFAULT_WORD_BUDGET).unwrap();
            assert!(p.error <= last + 1e-15);
            last = p.error;
        }
    }
}
