//! JSON encodings: a complex scalar is `[re, im]`, a vector is an array of
//! scalars and a matrix is a row-major array of rows.

use crate::linalg::{CMat, CVec, C64};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn complex_to_pair(c: &C64) -> [f64; 2] {
    [c.re, c.im]
}

pub fn vec_to_rows(v: &CVec) -> Vec<[f64; 2]> {
    v.iter().map(complex_to_pair).collect()
}

pub fn rows_to_vec(rows: &[[f64; 2]]) -> CVec {
    CVec::from_iterator(rows.len(), rows.iter().map(|p| C64::new(p[0], p[1])))
}

pub fn mat_to_rows(a: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| complex_to_pair(&a[(i, j)])).collect())
        .collect()
}

pub fn rows_to_mat(rows: &[Vec<[f64; 2]>]) -> Result<CMat, String> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if rows.iter().any(|row| row.len() != c) {
        return Err("ragged matrix rows".into());
    }
    Ok(CMat::from_fn(r, c, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

/// `#[serde(with = "crate::json::cvec")]`
pub mod cvec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &CVec, s: S) -> Result<S::Ok, S::Error> {
        vec_to_rows(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVec, D::Error> {
        let rows: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(rows_to_vec(&rows))
    }
}

/// `#[serde(with = "crate::json::cmat")]`
pub mod cmat {
    use super::*;

    pub fn serialize<S: Serializer>(a: &CMat, s: S) -> Result<S::Ok, S::Error> {
        mat_to_rows(a).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        rows_to_mat(&rows).map_err(D::Error::custom)
    }
}

/// `#[serde(with = "crate::json::cvec_list")]`
pub mod cvec_list {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[CVec], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = v.iter().map(vec_to_rows).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CVec>, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        Ok(rows.iter().map(|r| rows_to_vec(r)).collect())
    }
}

/// A complex vector wrapper with the `[re, im]` encoding, handy for
/// reading bare point files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JsonVec(#[serde(with = "cvec")] pub CVec);
