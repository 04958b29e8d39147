use crate::error::{Error, Result};
use crate::splines::{self, eval_nurbs_2d, Axis, KnotVector, RationalBasis, WeightedNet};

/// Position and partial derivatives of a surface mapping at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MapDerivatives {
    pub x: [f64; 3],
    pub d1: [f64; 3],
    pub d2: [f64; 3],
    pub d11: [f64; 3],
    pub d12: [f64; 3],
    pub d22: [f64; 3],
}

/// A parametrised surface `X: Omega -> R^3` on a rectangle.
pub trait SurfaceMap: Sync {
    /// `[[s1_lo, s1_hi], [s2_lo, s2_hi]]`.
    fn domain(&self) -> [[f64; 2]; 2];

    fn derivatives(&self, s: [f64; 2]) -> Result<MapDerivatives>;

    /// Length scale used for relative tolerances.
    fn scale(&self) -> f64;
}

/// Tensor-product NURBS surface.
#[derive(Debug, Clone, PartialEq)]
pub struct NurbsSurface {
    kv_xi: KnotVector,
    kv_eta: KnotVector,
    net: WeightedNet,
}

impl NurbsSurface {
    pub fn new(kv_xi: KnotVector, kv_eta: KnotVector, net: WeightedNet) -> Result<Self> {
        let (n, m) = net.dims();
        if kv_xi.len() != n || kv_eta.len() != m {
            return Err(Error::ControlNet(format!(
                "net is {n}x{m} but knot vectors define {}x{} functions",
                kv_xi.len(),
                kv_eta.len()
            )));
        }
        Ok(NurbsSurface { kv_xi, kv_eta, net })
    }

    pub fn kv_xi(&self) -> &KnotVector {
        &self.kv_xi
    }

    pub fn kv_eta(&self) -> &KnotVector {
        &self.kv_eta
    }

    pub fn net(&self) -> &WeightedNet {
        &self.net
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.kv_xi.degree(), self.kv_eta.degree())
    }

    /// Basis functions per direction.
    pub fn dims(&self) -> (usize, usize) {
        self.net.dims()
    }

    /// Dimension `N^h` of the NURBS space.
    pub fn num_basis(&self) -> usize {
        self.net.len()
    }

    pub fn basis(&self, s: [f64; 2], max_deriv: usize) -> Result<RationalBasis> {
        eval_nurbs_2d(&self.kv_xi, &self.kv_eta, &self.net, s, max_deriv)
    }

    /// `X(s) = sum R_ij(s) B_ij`.
    pub fn point(&self, s: [f64; 2]) -> Result<[f64; 3]> {
        let r = self.basis(s, 0)?;
        Ok(self.combine(&r.indices, &r.values))
    }

    fn combine(&self, indices: &[usize], coeffs: &[f64]) -> [f64; 3] {
        let pts = self.net.points();
        let mut x = [0.0; 3];
        for (&idx, &c) in indices.iter().zip(coeffs) {
            for k in 0..3 {
                x[k] += c * pts[idx][k];
            }
        }
        x
    }

    /// Mapping derivatives computed from an already evaluated basis.
    pub fn derivatives_from_basis(&self, r: &RationalBasis) -> MapDerivatives {
        MapDerivatives {
            x: self.combine(&r.indices, &r.values),
            d1: self.combine(&r.indices, &r.d1),
            d2: self.combine(&r.indices, &r.d2),
            d11: self.combine(&r.indices, &r.d11),
            d12: self.combine(&r.indices, &r.d12),
            d22: self.combine(&r.indices, &r.d22),
        }
    }

    /// Inserts a knot along `axis`.
    pub fn insert_knot(&self, axis: Axis, u: f64) -> Result<Self> {
        match axis {
            Axis::Xi => {
                let (kv, net) = splines::knot_insert(&self.kv_xi, &self.net, axis, u)?;
                Self::new(kv, self.kv_eta.clone(), net)
            }
            Axis::Eta => {
                let (kv, net) = splines::knot_insert(&self.kv_eta, &self.net, axis, u)?;
                Self::new(self.kv_xi.clone(), kv, net)
            }
        }
    }

    /// Raises the degree along `axis` by one.
    pub fn elevate_degree(&self, axis: Axis) -> Result<Self> {
        match axis {
            Axis::Xi => {
                let (kv, net) = splines::degree_elevate(&self.kv_xi, &self.net, axis)?;
                Self::new(kv, self.kv_eta.clone(), net)
            }
            Axis::Eta => {
                let (kv, net) = splines::degree_elevate(&self.kv_eta, &self.net, axis)?;
                Self::new(self.kv_xi.clone(), kv, net)
            }
        }
    }

    /// Uniform h-refinement: `inserts_per_span` new knots in every span of
    /// both directions.
    pub fn h_refine(&self, inserts_per_span: usize) -> Result<Self> {
        let (kx, net) = splines::subdivide(&self.kv_xi, &self.net, Axis::Xi, inserts_per_span)?;
        let (ke, net) = splines::subdivide(&self.kv_eta, &net, Axis::Eta, inserts_per_span)?;
        Self::new(kx, ke, net)
    }

    /// Degree elevation to `target_degree` followed by uniform subdivision.
    pub fn k_refine(&self, target_degree: usize, inserts_per_span: usize) -> Result<Self> {
        let (kx, ke, net) = splines::k_refine(&self.kv_xi, &self.kv_eta, &self.net, target_degree, inserts_per_span)?;
        Self::new(kx, ke, net)
    }

    /// k-refines to `target_degree` with exactly `n_xi x n_eta` basis
    /// functions, inserting equally spaced knots in each existing span.
    pub fn k_refine_to(&self, target_degree: usize, n_xi: usize, n_eta: usize) -> Result<Self> {
        let elevated = self.k_refine(target_degree, 0)?;
        let inserts = |kv: &KnotVector, target: usize| -> Result<usize> {
            let spans = kv.spans().len();
            let have = kv.len();
            if target < have || !(target - have).is_multiple_of(spans) {
                return Err(Error::Refinement(format!(
                    "cannot reach {target} functions from {have} by uniform insertion in {spans} span(s)"
                )));
            }
            Ok((target - have) / spans)
        };
        let ix = inserts(elevated.kv_xi(), n_xi)?;
        let ie = inserts(elevated.kv_eta(), n_eta)?;
        let (kx, net) = splines::subdivide(elevated.kv_xi(), elevated.net(), Axis::Xi, ix)?;
        let (ke, net) = splines::subdivide(elevated.kv_eta(), &net, Axis::Eta, ie)?;
        Self::new(kx, ke, net)
    }

    /// Basis indices whose functions have a nonzero trace on the boundary
    /// (the outermost layer of the index grid).
    pub fn boundary_indices(&self) -> Vec<usize> {
        let (n, m) = self.dims();
        (0..n * m)
            .filter(|k| {
                let (i, j) = (k / m, k % m);
                i == 0 || j == 0 || i == n - 1 || j == m - 1
            })
            .collect()
    }
}

impl SurfaceMap for NurbsSurface {
    fn domain(&self) -> [[f64; 2]; 2] {
        let (a, b) = self.kv_xi.domain();
        let (c, d) = self.kv_eta.domain();
        [[a, b], [c, d]]
    }

    fn derivatives(&self, s: [f64; 2]) -> Result<MapDerivatives> {
        let r = self.basis(s, 2)?;
        Ok(self.derivatives_from_basis(&r))
    }

    fn scale(&self) -> f64 {
        self.net.scale()
    }
}

type MapFn = dyn Fn([f64; 2]) -> MapDerivatives + Send + Sync;

/// A closed-form mapping, mainly for checking geometric identities against
/// exact parametrisations.
pub struct AnalyticSurface {
    domain: [[f64; 2]; 2],
    scale: f64,
    map: Box<MapFn>,
}

impl AnalyticSurface {
    pub fn new<F>(domain: [[f64; 2]; 2], scale: f64, map: F) -> Self
    where
        F: Fn([f64; 2]) -> MapDerivatives + Send + Sync + 'static,
    {
        AnalyticSurface {
            domain,
            scale,
            map: Box::new(map),
        }
    }

    /// `X(theta, z) = (cos theta, sin theta, z)` on `(0, pi/2) x (0, 2)`.
    /// This parametrisation is an isometry.
    pub fn quarter_cylinder() -> Self {
        Self::new([[0.0, std::f64::consts::FRAC_PI_2], [0.0, 2.0]], 6f64.sqrt(), |s| {
            let (sn, cs) = s[0].sin_cos();
            MapDerivatives {
                x: [cs, sn, s[1]],
                d1: [-sn, cs, 0.0],
                d2: [0.0, 0.0, 1.0],
                d11: [-cs, -sn, 0.0],
                d12: [0.0; 3],
                d22: [0.0; 3],
            }
        })
    }
}

impl SurfaceMap for AnalyticSurface {
    fn domain(&self) -> [[f64; 2]; 2] {
        self.domain
    }

    fn derivatives(&self, s: [f64; 2]) -> Result<MapDerivatives> {
        let [[a, b], [c, d]] = self.domain;
        if !(a..=b).contains(&s[0]) {
            return Err(Error::Domain {
                value: s[0],
                lower: a,
                upper: b,
            });
        }
        if !(c..=d).contains(&s[1]) {
            return Err(Error::Domain {
                value: s[1],
                lower: c,
                upper: d,
            });
        }
        Ok((self.map)(s))
    }

    fn scale(&self) -> f64 {
        self.scale
    }
}
