//! Surface integrals of scalar fields: area, MISE, lattice MSE and the
//! pressure force.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{frame_at, GeometryFrame, NurbsSurface, QuadRule, SurfaceMap};

type PhysicalFn<'a> = dyn Fn(&[f64; 3]) -> f64 + Sync + 'a;

/// A scalar field on the surface: either a coefficient vector over the
/// surface's NURBS space or a closed-form function of the physical point.
pub enum FieldOnSurface<'a> {
    Coefficients(&'a [f64]),
    Physical(&'a PhysicalFn<'a>),
}

impl FieldOnSurface<'_> {
    fn check(&self, surface: &NurbsSurface) -> Result<()> {
        match self {
            FieldOnSurface::Coefficients(c) if c.len() != surface.num_basis() => Err(Error::InvalidInput(format!(
                "{} coefficients for a space of dimension {}",
                c.len(),
                surface.num_basis()
            ))),
            _ => Ok(()),
        }
    }

    fn at_frame(&self, f: &GeometryFrame) -> f64 {
        match self {
            FieldOnSurface::Coefficients(c) => f.active.iter().zip(&f.values).map(|(&i, v)| v * c[i]).sum(),
            FieldOnSurface::Physical(g) => g(&f.point),
        }
    }

    /// Field value at parametric location `s`.
    pub fn value(&self, surface: &NurbsSurface, s: [f64; 2]) -> Result<f64> {
        match self {
            FieldOnSurface::Coefficients(c) => {
                let r = surface.basis(s, 0)?;
                Ok(r.indices.iter().zip(&r.values).map(|(&i, v)| v * c[i]).sum())
            }
            FieldOnSurface::Physical(g) => Ok(g(&surface.point(s)?)),
        }
    }
}

/// Free-stream conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeStream {
    /// Density (kg/m^3).
    pub rho: f64,
    /// Speed (m/s).
    pub speed: f64,
    /// Static pressure (Pa).
    pub pressure: f64,
}

impl FreeStream {
    pub fn new(rho: f64, speed: f64, pressure: f64) -> Result<Self> {
        if !(rho > 0.0 && speed > 0.0) {
            return Err(Error::InvalidInput(format!(
                "free stream needs rho > 0 and v > 0 (got {rho}, {speed})"
            )));
        }
        Ok(FreeStream { rho, speed, pressure })
    }

    /// `rho v^2 / 2`.
    pub fn dynamic_pressure(&self) -> f64 {
        0.5 * self.rho * self.speed * self.speed
    }
}

// Per-element partial sums in element order keep the result independent of
// the thread count.
fn element_sums<const K: usize, F>(surface: &NurbsSurface, quad: &QuadRule, integrand: F) -> Result<[f64; K]>
where
    F: Fn(&GeometryFrame) -> [f64; K] + Sync,
{
    let parts: Vec<[f64; K]> = quad
        .elements
        .par_iter()
        .map(|el| {
            let mut acc = [0.0; K];
            for (&s, &w) in el.points.iter().zip(&el.weights) {
                let f = frame_at(surface, s, false)?;
                let v = integrand(&f);
                for k in 0..K {
                    acc[k] += w * f.g * v[k];
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = [0.0; K];
    for p in parts {
        for k in 0..K {
            total[k] += p[k];
        }
    }
    Ok(total)
}

/// `int_Sigma field dSigma`.
pub fn integrate_scalar(surface: &NurbsSurface, field: &FieldOnSurface, quad: &QuadRule) -> Result<f64> {
    field.check(surface)?;
    Ok(element_sums(surface, quad, |f| [field.at_frame(f)])?[0])
}

/// Surface area.
pub fn area(surface: &NurbsSurface, quad: &QuadRule) -> Result<f64> {
    Ok(element_sums(surface, quad, |_| [1.0])?[0])
}

/// Mean integrated squared error `(1/|Sigma|) int (fitted - exact)^2 dSigma`.
pub fn mise(surface: &NurbsSurface, fitted: &FieldOnSurface, exact: &PhysicalFn, quad: &QuadRule) -> Result<f64> {
    fitted.check(surface)?;
    let [num, area] = element_sums(surface, quad, |f| {
        let e = fitted.at_frame(f) - exact(&f.point);
        [e * e, 1.0]
    })?;
    Ok(num / area)
}

/// Uniform lattice of `dims.0 x dims.1` parametric points including the
/// domain boundary, in row-major order.
pub fn parametric_lattice<M: SurfaceMap + ?Sized>(map: &M, dims: (usize, usize)) -> Vec<[f64; 2]> {
    let [[a, b], [c, d]] = map.domain();
    let (n1, n2) = dims;
    let coord = |lo: f64, hi: f64, k: usize, n: usize| {
        if n == 1 {
            0.5 * (lo + hi)
        } else if k + 1 == n {
            hi
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(n1 * n2);
    for i in 0..n1 {
        for j in 0..n2 {
            out.push([coord(a, b, i, n1), coord(c, d, j, n2)]);
        }
    }
    out
}

/// Mean squared error over a uniform parametric lattice.
pub fn mse_on_lattice(
    surface: &NurbsSurface,
    fitted: &FieldOnSurface,
    exact: &PhysicalFn,
    dims: (usize, usize),
) -> Result<f64> {
    if dims.0 < 2 || dims.1 < 2 {
        return Err(Error::InvalidInput(format!(
            "lattice must be at least 2x2, got {dims:?}"
        )));
    }
    fitted.check(surface)?;
    let pts = parametric_lattice(surface, dims);
    let errs: Vec<f64> = pts
        .par_iter()
        .map(|&s| -> Result<f64> {
            let r = surface.basis(s, 0)?;
            let x = surface.derivatives_from_basis(&r).x;
            let v = match fitted {
                FieldOnSurface::Coefficients(c) => r.indices.iter().zip(&r.values).map(|(&i, v)| v * c[i]).sum(),
                FieldOnSurface::Physical(g) => g(&x),
            };
            Ok((v - exact(&x)).powi(2))
        })
        .collect::<Result<_>>()?;
    Ok(errs.iter().sum::<f64>() / errs.len() as f64)
}

/// Pressure force `(rho v^2 / 2) int C_p n dSigma`, with `n` oriented as
/// `X_1 x X_2` (negated when `flip_normal`).
pub fn aero_force(
    surface: &NurbsSurface,
    cp: &FieldOnSurface,
    fs: &FreeStream,
    quad: &QuadRule,
    flip_normal: bool,
) -> Result<[f64; 3]> {
    cp.check(surface)?;
    let sign = if flip_normal { -1.0 } else { 1.0 };
    let q = fs.dynamic_pressure() * sign;
    let v = element_sums(surface, quad, |f| {
        let c = cp.at_frame(f);
        [c * f.normal[0], c * f.normal[1], c * f.normal[2]]
    })?;
    Ok([q * v[0], q * v[1], q * v[2]])
}

/// Direction difference (degrees) and relative magnitude difference (%)
/// between a force and a reference force.
pub fn force_comparison(force: &[f64; 3], reference: &[f64; 3]) -> Result<(f64, f64)> {
    let norm = |v: &[f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let nr = norm(reference);
    if nr == 0.0 {
        return Err(Error::InvalidInput("reference force is zero".into()));
    }
    let nf = norm(force);
    let diff = [
        force[0] - reference[0],
        force[1] - reference[1],
        force[2] - reference[2],
    ];
    let rel = 100.0 * norm(&diff) / nr;
    let angle = if nf == 0.0 {
        f64::NAN
    } else {
        // atan2 form stays accurate for nearly parallel vectors
        let cr = [
            force[1] * reference[2] - force[2] * reference[1],
            force[2] * reference[0] - force[0] * reference[2],
            force[0] * reference[1] - force[1] * reference[0],
        ];
        let dot = force[0] * reference[0] + force[1] * reference[1] + force[2] * reference[2];
        norm(&cr).atan2(dot).to_degrees()
    };
    Ok((angle, rel))
}
