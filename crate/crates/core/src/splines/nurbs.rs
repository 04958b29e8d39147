use super::knots::KnotVector;
use crate::error::{Error, Result};

/// `n x m` grid of control points with positive weights.
///
/// Storage is row-major over `(i, j)`: entry `i * m + j` belongs to the
/// `i`-th function along the first parametric direction and the `j`-th along
/// the second. The same flattening defines the global basis ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedNet {
    n: usize,
    m: usize,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl WeightedNet {
    pub fn new(n: usize, m: usize, points: Vec<[f64; 3]>, weights: Vec<f64>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::ControlNet("empty control net".into()));
        }
        if points.len() != n * m || weights.len() != n * m {
            return Err(Error::ControlNet(format!(
                "expected {} points and weights, got {} and {}",
                n * m,
                points.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::ControlNet(format!("weights must be positive, found {w}")));
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::ControlNet("non-finite control point".into()));
        }
        Ok(WeightedNet { n, m, points, weights })
    }

    /// Builds a net from homogeneous points `(w x, w y, w z, w)`.
    pub(crate) fn from_homogeneous(n: usize, m: usize, hom: &[[f64; 4]]) -> Result<Self> {
        let weights: Vec<f64> = hom.iter().map(|h| h[3]).collect();
        let points = hom.iter().map(|h| [h[0] / h[3], h[1] / h[3], h[2] / h[3]]).collect();
        Self::new(n, m, points, weights)
    }

    pub(crate) fn homogeneous(&self) -> Vec<[f64; 4]> {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| [w * p[0], w * p[1], w * p[2], w])
            .collect()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.m + j
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Diagonal of the axis-aligned bounding box of the control points.
    pub fn scale(&self) -> f64 {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.points {
            for c in 0..3 {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
        (0..3).map(|c| (hi[c] - lo[c]).powi(2)).sum::<f64>().sqrt()
    }
}

/// Nonzero bivariate rational basis functions at one parametric point, with
/// first and second partial derivatives.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RationalBasis {
    /// Global (flattened) basis indices.
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d11: Vec<f64>,
    pub d12: Vec<f64>,
    pub d22: Vec<f64>,
}

impl RationalBasis {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Parametric gradient of local function `k`.
    pub fn grad(&self, k: usize) -> [f64; 2] {
        [self.d1[k], self.d2[k]]
    }

    /// Parametric Hessian of local function `k`.
    pub fn hessian(&self, k: usize) -> [[f64; 2]; 2] {
        [[self.d11[k], self.d12[k]], [self.d12[k], self.d22[k]]]
    }
}

/// Evaluates the tensor-product NURBS basis at `s = (xi, eta)`.
///
/// Rational derivatives follow from the quotient rule applied to
/// `W(s) = sum N_k(s) w_k` through second order. Derivative arrays are
/// zero-filled when `max_deriv` is below the order.
pub fn eval_nurbs_2d(
    kv_xi: &KnotVector,
    kv_eta: &KnotVector,
    net: &WeightedNet,
    s: [f64; 2],
    max_deriv: usize,
) -> Result<RationalBasis> {
    let (n, m) = net.dims();
    if kv_xi.len() != n || kv_eta.len() != m {
        return Err(Error::ControlNet(format!(
            "net is {n}x{m} but knot vectors define {}x{} functions",
            kv_xi.len(),
            kv_eta.len()
        )));
    }
    let bu = kv_xi.eval(s[0], max_deriv)?;
    let bv = kv_eta.eval(s[1], max_deriv)?;
    let (iu, iv) = (bu.first_index(), bv.first_index());
    let nloc = bu.values.len() * bv.values.len();

    let mut out = RationalBasis {
        indices: Vec::with_capacity(nloc),
        values: Vec::with_capacity(nloc),
        d1: Vec::with_capacity(nloc),
        d2: Vec::with_capacity(nloc),
        d11: Vec::with_capacity(nloc),
        d12: Vec::with_capacity(nloc),
        d22: Vec::with_capacity(nloc),
    };
    // weighted products and sums of their derivatives
    let mut w = [0.0; 6];
    for (a, _) in bu.values.iter().enumerate() {
        for (b, _) in bv.values.iter().enumerate() {
            let idx = net.index(iu + a, iv + b);
            let wt = net.weights()[idx];
            let terms = [
                bu.values[a] * bv.values[b] * wt,
                bu.d1[a] * bv.values[b] * wt,
                bu.values[a] * bv.d1[b] * wt,
                bu.d2[a] * bv.values[b] * wt,
                bu.d1[a] * bv.d1[b] * wt,
                bu.values[a] * bv.d2[b] * wt,
            ];
            for (acc, t) in w.iter_mut().zip(terms) {
                *acc += t;
            }
            out.indices.push(idx);
            out.values.push(terms[0]);
            out.d1.push(terms[1]);
            out.d2.push(terms[2]);
            out.d11.push(terms[3]);
            out.d12.push(terms[4]);
            out.d22.push(terms[5]);
        }
    }
    let [w0, w1, w2, w11, w12, w22] = w;
    if !(w0 > 0.0) {
        return Err(Error::ControlNet(format!("vanishing weight function at {s:?}")));
    }
    for k in 0..nloc {
        let r = out.values[k] / w0;
        let r1 = (out.d1[k] - r * w1) / w0;
        let r2 = (out.d2[k] - r * w2) / w0;
        let r11 = (out.d11[k] - 2.0 * r1 * w1 - r * w11) / w0;
        let r12 = (out.d12[k] - r1 * w2 - r2 * w1 - r * w12) / w0;
        let r22 = (out.d22[k] - 2.0 * r2 * w2 - r * w22) / w0;
        out.values[k] = r;
        out.d1[k] = r1;
        out.d2[k] = r2;
        out.d11[k] = r11;
        out.d12[k] = r12;
        out.d22[k] = r22;
    }
    Ok(out)
}
