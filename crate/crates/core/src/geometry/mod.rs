//! Surface mapping, metric quantities, quadrature and point inversion.

mod frame;
mod inversion;
mod quadrature;
pub mod shapes;
mod surface;

pub use frame::{frame_at, GeometryFrame, DEGENERACY_FACTOR};
pub use inversion::{invert_point, Inversion, InversionOptions};
pub use quadrature::{build_quadrature, gauss_legendre, QuadElement, QuadRule};
pub use surface::{AnalyticSurface, MapDerivatives, NurbsSurface, SurfaceMap};

/// `x = X(s)` for a NURBS surface.
pub fn surface_point(surface: &NurbsSurface, s: [f64; 2]) -> crate::Result<[f64; 3]> {
    surface.point(s)
}
