//! Numerical workbench for explicit constructions in one-dimensional complex
//! dynamics, real interval dynamics and complex Hénon maps.

// Negated comparisons are how NaN gets rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod henon;
pub mod interval;
pub mod linearize;
pub mod maps;
pub mod rays;
pub mod render;
pub mod roots;
pub mod solvers;

pub use error::{Error, Result};
pub use maps::{Complex, Map, Point, PointSet, PolynomialMap, RationalMap};
