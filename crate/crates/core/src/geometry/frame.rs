use super::surface::{MapDerivatives, NurbsSurface, SurfaceMap};
use crate::error::{Error, Result};

/// Relative threshold for the degenerate-metric check: a frame is rejected
/// when `det G <= (DEGENERACY_FACTOR * scale)^2`.
pub const DEGENERACY_FACTOR: f64 = 1e-10;

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Geometric data of the mapping at one parametric point.
///
/// `jac[a]` is the column `dX/ds_a`. The Laplace-Beltrami operator acts on a
/// pulled-back function with parametric gradient `grad` and Hessian `hess` as
///
/// ```text
/// lap(phi) = (1/g) div(g G^-1 grad phi) = G^-1 : hess + div_coeff . grad
/// ```
///
/// where `div_coeff_b = (1/g) sum_a d/ds_a (g G^-1)_ab`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryFrame {
    pub s: [f64; 2],
    pub point: [f64; 3],
    pub jac: [[f64; 3]; 2],
    pub metric: [[f64; 2]; 2],
    pub inv_metric: [[f64; 2]; 2],
    pub g: f64,
    pub normal: [f64; 3],
    pub div_coeff: [f64; 2],
    /// Global indices of the basis functions active at `s` (empty for
    /// frames built from a bare mapping).
    pub active: Vec<usize>,
    pub values: Vec<f64>,
    pub grad_coeff: Vec<[f64; 2]>,
    /// Laplace-Beltrami of each active basis function; empty unless
    /// requested.
    pub lb_coeff: Vec<f64>,
}

impl GeometryFrame {
    /// Builds the metric quantities from mapping derivatives. Derivatives of
    /// `g` and `G^-1` use the second partials of `X` directly.
    pub fn from_derivatives(s: [f64; 2], d: &MapDerivatives, scale: f64) -> Result<Self> {
        let (x1, x2) = (&d.d1, &d.d2);
        let g11 = dot(x1, x1);
        let g12 = dot(x1, x2);
        let g22 = dot(x2, x2);
        let det = g11 * g22 - g12 * g12;
        let g_min = DEGENERACY_FACTOR * scale;
        if !(det > g_min * g_min) {
            return Err(Error::DegenerateMetric {
                s1: s[0],
                s2: s[1],
                det,
            });
        }
        let g = det.sqrt();
        let inv = [[g22 / det, -g12 / det], [-g12 / det, g11 / det]];

        // d/ds_c of G entries, c = 0, 1
        let second = [[&d.d11, &d.d12], [&d.d12, &d.d22]];
        let mut div = [0.0; 2];
        for (c, xc) in second.iter().enumerate() {
            let dg11 = 2.0 * dot(xc[0], x1);
            let dg12 = dot(xc[0], x2) + dot(x1, xc[1]);
            let dg22 = 2.0 * dot(xc[1], x2);
            let ddet = dg11 * g22 + g11 * dg22 - 2.0 * g12 * dg12;
            let dg = ddet / (2.0 * g);
            // g G^-1 = adj(G) / g
            let adj = [[g22, -g12], [-g12, g11]];
            let dadj = [[dg22, -dg12], [-dg12, dg11]];
            // row c of d/ds_c (adj / g) contributes to the divergence
            for b in 0..2 {
                div[b] += dadj[c][b] / g - adj[c][b] * dg / (g * g);
            }
        }
        div[0] /= g;
        div[1] /= g;

        let n = cross(x1, x2);
        let nn = dot(&n, &n).sqrt();
        Ok(GeometryFrame {
            s,
            point: d.x,
            jac: [*x1, *x2],
            metric: [[g11, g12], [g12, g22]],
            inv_metric: inv,
            g,
            normal: [n[0] / nn, n[1] / nn, n[2] / nn],
            div_coeff: div,
            active: Vec::new(),
            values: Vec::new(),
            grad_coeff: Vec::new(),
            lb_coeff: Vec::new(),
        })
    }

    /// Frame of an arbitrary mapping without basis data.
    pub fn of_map<M: SurfaceMap + ?Sized>(map: &M, s: [f64; 2]) -> Result<Self> {
        Self::from_derivatives(s, &map.derivatives(s)?, map.scale())
    }

    /// Laplace-Beltrami of a function with the given parametric gradient and
    /// Hessian.
    pub fn laplace_beltrami(&self, grad: [f64; 2], hess: [[f64; 2]; 2]) -> f64 {
        let gi = &self.inv_metric;
        gi[0][0] * hess[0][0]
            + 2.0 * gi[0][1] * hess[0][1]
            + gi[1][1] * hess[1][1]
            + self.div_coeff[0] * grad[0]
            + self.div_coeff[1] * grad[1]
    }

    /// Surface gradient `grad X G^-1 grad phi` as a 3-vector.
    pub fn surface_gradient(&self, grad: [f64; 2]) -> [f64; 3] {
        let gi = &self.inv_metric;
        let c = [
            gi[0][0] * grad[0] + gi[0][1] * grad[1],
            gi[1][0] * grad[0] + gi[1][1] * grad[1],
        ];
        let mut out = [0.0; 3];
        for k in 0..3 {
            out[k] = self.jac[0][k] * c[0] + self.jac[1][k] * c[1];
        }
        out
    }

    /// Tangent-plane projector `I - n n^T`.
    pub fn projector(&self) -> [[f64; 3]; 3] {
        let n = &self.normal;
        let mut p = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                p[i][j] = f64::from(u8::from(i == j)) - n[i] * n[j];
            }
        }
        p
    }
}

/// Full frame of a NURBS surface at `s`, including basis data. The
/// Laplace-Beltrami coefficients are filled when `need_lb` is set.
pub fn frame_at(surface: &NurbsSurface, s: [f64; 2], need_lb: bool) -> Result<GeometryFrame> {
    let r = surface.basis(s, 2)?;
    let d = surface.derivatives_from_basis(&r);
    let mut frame = GeometryFrame::from_derivatives(s, &d, surface.scale())?;
    frame.grad_coeff = (0..r.len()).map(|k| r.grad(k)).collect();
    if need_lb {
        frame.lb_coeff = (0..r.len())
            .map(|k| frame.laplace_beltrami(r.grad(k), r.hessian(k)))
            .collect();
    }
    frame.active = r.indices;
    frame.values = r.values;
    Ok(frame)
}
