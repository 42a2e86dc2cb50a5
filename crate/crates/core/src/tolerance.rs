//! Numerical thresholds shared across the crate.
//!
//! Defaults are tuned for double precision with lift dimension `m + 1 <= 8`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Membership of a lift in U(m,1), relative to `|lift|_F^2`.
    pub group: f64,
    /// Distance of a boundary point from the unit sphere.
    pub bdry: f64,
    /// Point-to-line distance and line equality.
    pub line: f64,
    /// Smallest admissible denominator `|c^T z + d|`.
    pub denom: f64,
    /// Separates `lambda1 > 1` from `lambda1 = 1`.
    pub class: f64,
    /// Symmetry-pair residual.
    pub sym: f64,
    /// Boundary norm defect of a proper map.
    pub proper: f64,
    /// Smallest admissible `|det A(y)|` in the line detector.
    pub det: f64,
    /// Relative singular value cutoff for numerical rank.
    pub rank: f64,
    /// Normalized polynomial evaluation threshold for Zariski witnesses.
    pub poly: f64,
    /// Relative error allowed between fitted and predicted contraction rates.
    pub rate: f64,
    /// `|U^n - Id|_F` threshold when selecting rescaling subsequences.
    pub unitary_return: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            group: 1e-10,
            bdry: 1e-9,
            line: 1e-9,
            denom: 1e-12,
            class: 1e-8,
            sym: 1e-8,
            proper: 1e-9,
            det: 1e-6,
            rank: 1e-8,
            poly: 1e-8,
            rate: 0.02,
            unitary_return: 1e-3,
        }
    }
}

impl Tolerances {
    /// Returns the name of the first non-positive (or non-finite) tolerance, if any.
    pub fn first_invalid(&self) -> Option<&'static str> {
        let fields = [
            ("group", self.group),
            ("bdry", self.bdry),
            ("line", self.line),
            ("denom", self.denom),
            ("class", self.class),
            ("sym", self.sym),
            ("proper", self.proper),
            ("det", self.det),
            ("rank", self.rank),
            ("poly", self.poly),
            ("rate", self.rate),
            ("unitary_return", self.unitary_return),
        ];
        fields
            .into_iter()
            .find(|(_, v)| !(v.is_finite() && *v > 0.0))
            .map(|(k, _)| k)
    }
}
