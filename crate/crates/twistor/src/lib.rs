//! Twistorial 4-metrics from 3-dimensional data.
//!
//! Builds 4-metrics over a 3-dimensional chart via the Gibbons-Hawking and
//! Beltrami-fields constructions, verifies the Ricci-soliton equation and its
//! equivalent relation systems, propagates soliton-flow series coefficients,
//! and evaluates contour-integral Einstein/self-duality criteria.

pub mod beltrami;
pub mod catalogue;
pub mod chart;
pub mod curvature4;
pub mod error;
pub mod expr;
pub mod exterior3;
pub mod gibbons_hawking;
pub mod report;
pub mod series;
pub mod soliton;

pub use chart::Chart;
pub use error::{Error, Result};
pub use expr::ScalarExpr;
