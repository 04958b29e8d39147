use crate::error::{Error, Result};
use crate::splines::KnotVector;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_q
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=q {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            // p1 = P_q(x), p0 = P_{q-1}(x)
            dp = q as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    (nodes, weights)
}

/// Quadrature points of one knot-span element.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadElement {
    pub xi: (f64, f64),
    pub eta: (f64, f64),
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

/// Tensor Gauss-Legendre rule with `order` points per direction on every
/// nonempty knot-span element. Weights integrate over the parametric domain.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub order: usize,
    pub elements: Vec<QuadElement>,
}

impl QuadRule {
    pub fn new(kv_xi: &KnotVector, kv_eta: &KnotVector, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("quadrature order must be at least 1".into()));
        }
        let (nodes, weights) = gauss_legendre(order);
        let mut elements = Vec::new();
        for (a, b) in kv_xi.spans() {
            for (c, d) in kv_eta.spans() {
                let (hx, hy) = (0.5 * (b - a), 0.5 * (d - c));
                let mut points = Vec::with_capacity(order * order);
                let mut ws = Vec::with_capacity(order * order);
                for (u, wu) in nodes.iter().zip(&weights) {
                    for (v, wv) in nodes.iter().zip(&weights) {
                        points.push([a + hx * (u + 1.0), c + hy * (v + 1.0)]);
                        ws.push(wu * wv * hx * hy);
                    }
                }
                elements.push(QuadElement {
                    xi: (a, b),
                    eta: (c, d),
                    points,
                    weights: ws,
                });
            }
        }
        Ok(QuadRule { order, elements })
    }

    pub fn num_points(&self) -> usize {
        self.elements.iter().map(|e| e.points.len()).sum()
    }

    /// All `(point, weight)` pairs in element order.
    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.elements
            .iter()
            .flat_map(|e| e.points.iter().copied().zip(e.weights.iter().copied()))
    }
}

/// Quadrature rule over the knot-span elements of `surface`.
pub fn build_quadrature(surface: &super::NurbsSurface, order: usize) -> Result<QuadRule> {
    QuadRule::new(surface.kv_xi(), surface.kv_eta(), order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rules_integrate_polynomials() {
        for q in 1..=8 {
            let (x, w) = gauss_legendre(q);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            // exact up to degree 2q - 1
            for deg in 0..2 * q {
                let num: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((num - exact).abs() < 1e-13, "q={q} deg={deg}");
            }
        }
    }

    #[test]
    fn single_point_rule() {
        let kv = KnotVector::new(2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let rule = QuadRule::new(&kv, &kv, 1).unwrap();
        assert_eq!(rule.elements.len(), 1);
        assert_eq!(rule.elements[0].points, vec![[0.5, 0.5]]);
        assert!((rule.elements[0].weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_domain_area() {
        let kx = KnotVector::open_uniform(2, 0.0, 1.0, 3).unwrap();
        let ke = KnotVector::open_uniform(3, 0.0, 2.0, 4).unwrap();
        let rule = QuadRule::new(&kx, &ke, 4).unwrap();
        assert_eq!(rule.elements.len(), 12);
        for e in &rule.elements {
            let area = (e.xi.1 - e.xi.0) * (e.eta.1 - e.eta.0);
            assert!((e.weights.iter().sum::<f64>() - area).abs() < 1e-14);
            assert!(e.weights.iter().all(|&w| w > 0.0));
        }
        assert!((rule.iter().map(|(_, w)| w).sum::<f64>() - 2.0).abs() < 1e-13);
        assert!(QuadRule::new(&kx, &ke, 0).is_err());
    }
}
