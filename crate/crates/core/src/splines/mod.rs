//! Univariate B-splines and bivariate tensor-product NURBS.

mod knots;
mod nurbs;
pub mod refine;

pub use knots::{BasisEval, KnotVector};
pub use nurbs::{eval_nurbs_2d, RationalBasis, WeightedNet};
pub use refine::{degree_elevate, k_refine, knot_insert, subdivide, Axis};
