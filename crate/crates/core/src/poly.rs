//! Sparse multivariate polynomials with complex coefficients.
//!
//! JSON form: a list of terms `{"coeff": [re, im], "exponents": [e1, ..., en]}`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::linalg::{C64, ONE, ZERO};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    #[serde(with = "pair")]
    pub coeff: C64,
    pub exponents: Vec<u32>,
}

mod pair {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &C64, s: S) -> Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// Terms are kept sorted by exponent vector with like terms merged.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    terms: Vec<Term>,
}

impl Poly {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(nvars: usize, c: C64) -> Self {
        Self::monomial(c, vec![0; nvars])
    }

    pub fn monomial(coeff: C64, exponents: Vec<u32>) -> Self {
        Self::from_terms(vec![Term { coeff, exponents }])
    }

    /// The coordinate function `z_i` in `nvars` variables.
    pub fn variable(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(ONE, e)
    }

    pub fn from_terms(terms: Vec<Term>) -> Self {
        let nvars = terms.iter().map(|t| t.exponents.len()).max().unwrap_or(0);
        let mut acc: BTreeMap<Vec<u32>, C64> = BTreeMap::new();
        for t in terms {
            let mut e = t.exponents;
            e.resize(nvars, 0);
            *acc.entry(e).or_insert(ZERO) += t.coeff;
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| *c != ZERO)
            .map(|(exponents, coeff)| Term { coeff, exponents })
            .collect();
        Self { terms }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Number of variables the exponent vectors mention.
    pub fn nvars(&self) -> usize {
        self.terms.iter().map(|t| t.exponents.len()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.weighted_degrees(&[]).1
    }

    /// `(min, max)` of `sum_i w_i e_i` over the terms, with weight 1 for
    /// variables beyond `weights`.
    pub fn weighted_degrees(&self, weights: &[u32]) -> (u32, u32) {
        let w = |t: &Term| -> u32 {
            t.exponents
                .iter()
                .enumerate()
                .map(|(i, e)| weights.get(i).copied().unwrap_or(1) * e)
                .sum()
        };
        let lo = self.terms.iter().map(w).min().unwrap_or(0);
        let hi = self.terms.iter().map(w).max().unwrap_or(0);
        (lo, hi)
    }

    /// The terms of weighted degree exactly `d`.
    pub fn weighted_part(&self, weights: &[u32], d: u32) -> Poly {
        let terms = self
            .terms
            .iter()
            .filter(|t| {
                let s: u32 = t
                    .exponents
                    .iter()
                    .enumerate()
                    .map(|(i, e)| weights.get(i).copied().unwrap_or(1) * e)
                    .sum();
                s == d
            })
            .cloned()
            .collect();
        Poly { terms }
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        let mut s = ZERO;
        for t in &self.terms {
            let mut v = t.coeff;
            for (i, &e) in t.exponents.iter().enumerate() {
                if e > 0 {
                    v *= z[i].powu(e);
                }
            }
            s += v;
        }
        s
    }

    /// Evaluation at a real point.
    pub fn eval_real(&self, x: &[f64]) -> C64 {
        let z: Vec<C64> = x.iter().map(|&r| C64::new(r, 0.0)).collect();
        self.eval(&z)
    }

    pub fn scale(&self, c: C64) -> Poly {
        Poly::from_terms(self.terms.iter().map(|t| Term { coeff: t.coeff * c, exponents: t.exponents.clone() }).collect())
    }

    pub fn pow(&self, k: u32) -> Poly {
        let n = self.nvars();
        let mut acc = Poly::constant(n, ONE);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Substitutes `z_i -> subs[i]`.
    pub fn compose(&self, subs: &[Poly]) -> Poly {
        let n = subs.iter().map(|p| p.nvars()).max().unwrap_or(0);
        let mut acc = Poly::zero();
        for t in &self.terms {
            let mut v = Poly::constant(n, t.coeff);
            for (i, &e) in t.exponents.iter().enumerate() {
                if e > 0 {
                    v = &v * &subs[i].pow(e);
                }
            }
            acc = &acc + &v;
        }
        acc
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }
}

impl Add for &Poly {
    type Output = Poly;

    fn add(self, rhs: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        Poly::from_terms(terms)
    }
}

impl Sub for &Poly {
    type Output = Poly;

    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        self.scale(-ONE)
    }
}

impl Mul for &Poly {
    type Output = Poly;

    fn mul(self, rhs: &Poly) -> Poly {
        let n = self.nvars().max(rhs.nvars());
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                let mut e = vec![0; n];
                for (i, x) in a.exponents.iter().enumerate() {
                    e[i] += x;
                }
                for (i, x) in b.exponents.iter().enumerate() {
                    e[i] += x;
                }
                terms.push(Term { coeff: a.coeff * b.coeff, exponents: e });
            }
        }
        Poly::from_terms(terms)
    }
}
