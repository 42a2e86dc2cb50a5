//! Numerical geometry of the complex unit ball.
//!
//! Automorphisms of `B^m` are handled as projective lifts in `U(m,1)`. On
//! top of the matrix model the crate provides spectral classification,
//! normal forms, orbit dynamics, limit sets and finite-degree Zariski tests
//! for finitely generated subgroups, diagnostics for rational proper maps
//! between balls, and the Siegel-domain picture of loxodromic dynamics.

// `!(x <= tol)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod json;
pub mod linalg;
pub mod maps;
pub mod normal_forms;
pub mod poly;
pub mod sampling;
pub mod siegel;
pub mod spectral;
pub mod subgroups;
pub mod tolerance;

pub use error::{Error, Result};
pub use geometry::{
    form_value, line_through, point_on_line, AffineLine, BallPoint, BoundaryPoint, GroupElement,
    HermitianForm,
};
pub use linalg::{CMat, CVec, C64};
pub use normal_forms::{kak, loxodromic_normal_form, make_a, make_k, make_m, KakFactors, LoxodromicNormalForm};
pub use spectral::{classify, lambda1, norm_at_origin, sigma1, Kind, SpectralData};
pub use tolerance::Tolerances;
