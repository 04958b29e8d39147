//! Isogeometric smoothing of scalar fields on NURBS surfaces.
//!
//! Noisy observations `y_i = f(p_i) + e_i` taken at points of a NURBS surface
//! are smoothed by minimising a least-squares misfit plus `lambda` times the
//! integral of the squared Laplace-Beltrami operator of the estimate. The
//! estimate lives in the (refined) NURBS space that describes the surface,
//! which is globally C¹ or smoother, so the penalty can be discretised with a
//! plain Galerkin method.
//!
//! Module map:
//!
//! * [`splines`]: knot vectors, B-spline and tensor NURBS bases, refinement.
//! * [`geometry`]: the surface mapping, metric quantities, quadrature and
//!   point inversion.
//! * [`smoothing`]: assembly of `Psi` and `R`, penalised solves, GCV and
//!   the distributional quantities of the estimator.
//! * [`functionals`]: surface integrals (area, MISE, lattice MSE, pressure
//!   force).
//! * [`sim`]: built-in geometries, test fields and seeded Monte-Carlo studies.

pub mod error;
pub mod functionals;
pub mod geometry;
pub mod sim;
pub mod smoothing;
pub mod splines;

pub use error::{Error, Result};
pub use functionals::{FieldOnSurface, FreeStream};
pub use geometry::{GeometryFrame, NurbsSurface, QuadRule, SurfaceMap};
pub use smoothing::{FitResult, Observations, SmoothingSystem};
pub use splines::{BasisEval, KnotVector, WeightedNet};
