//! Reference patches used by the simulations and tests.

use std::f64::consts::FRAC_1_SQRT_2;

use super::NurbsSurface;
use crate::error::Result;
use crate::splines::{KnotVector, WeightedNet};

fn build(kx: Vec<f64>, px: usize, ke: Vec<f64>, pe: usize, pts: Vec<[f64; 3]>, w: Vec<f64>) -> NurbsSurface {
    let kx = KnotVector::new(px, kx).expect("valid built-in knot vector");
    let ke = KnotVector::new(pe, ke).expect("valid built-in knot vector");
    let net = WeightedNet::new(kx.len(), ke.len(), pts, w).expect("valid built-in net");
    NurbsSurface::new(kx, ke, net).expect("consistent built-in patch")
}

/// Quarter of the unit cylinder, `x^2 + y^2 = 1`, `x, y >= 0`, `0 <= z <= 2`.
///
/// The first direction is an exact rational quadratic arc from `(1, 0)` to
/// `(0, 1)` on `[0, 1]`; the second is linear with `eta = z` on `[0, 2]`. The
/// normal `X_xi x X_eta` points away from the axis.
pub fn quarter_cylinder() -> NurbsSurface {
    let ring = [[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let wr = [1.0, FRAC_1_SQRT_2, 1.0];
    let mut pts = Vec::new();
    let mut w = Vec::new();
    for (c, wc) in ring.iter().zip(wr) {
        for z in [0.0, 2.0] {
            pts.push([c[0], c[1], z]);
            w.push(wc);
        }
    }
    build(
        vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
        2,
        vec![0.0, 0.0, 2.0, 2.0],
        1,
        pts,
        w,
    )
}

/// Full unit-cylinder barrel (no caps) of height `height`, built from the
/// nine-point rational circle. C0 at the quarter knots.
pub fn full_cylinder(height: f64) -> NurbsSurface {
    let ring = [
        [1.0, 0.0],
        [1.0, 1.0],
        [0.0, 1.0],
        [-1.0, 1.0],
        [-1.0, 0.0],
        [-1.0, -1.0],
        [0.0, -1.0],
        [1.0, -1.0],
        [1.0, 0.0],
    ];
    let mut pts = Vec::new();
    let mut w = Vec::new();
    for (k, c) in ring.iter().enumerate() {
        let wc = if k % 2 == 1 { FRAC_1_SQRT_2 } else { 1.0 };
        for z in [0.0, height] {
            pts.push([c[0], c[1], z]);
            w.push(wc);
        }
    }
    let kx = vec![0.0, 0.0, 0.0, 0.25, 0.25, 0.5, 0.5, 0.75, 0.75, 1.0, 1.0, 1.0];
    build(kx, 2, vec![0.0, 0.0, height, height], 1, pts, w)
}

/// Planar patch `X(s) = (s1, s2, 0)` on the unit square, degree `p` in both
/// directions with `spans` equal spans, unit weights. The control points sit
/// at the Greville abscissae, which reproduces the identity map.
pub fn unit_square(p: usize, spans: usize) -> Result<NurbsSurface> {
    let kv = KnotVector::open_uniform(p, 0.0, 1.0, spans)?;
    let gr = kv.greville();
    let n = kv.len();
    let mut pts = Vec::with_capacity(n * n);
    for &a in &gr {
        for &b in &gr {
            pts.push([a, b, 0.0]);
        }
    }
    let net = WeightedNet::new(n, n, pts, vec![1.0; n * n])?;
    NurbsSurface::new(kv.clone(), kv, net)
}

/// The quadratic rational patch of the second simulation study: control
/// points `P1..P9` and weights `(1, 1/sqrt2, 1, 1/sqrt2, 1/2, 1/sqrt2, 1,
/// 1/sqrt2, 1)` on `{0,0,0,1,1,1}` in both directions, stored row-major.
pub fn sim2_patch() -> NurbsSurface {
    let pts = vec![
        [1.0, 0.0, 0.0],
        [0.0, 0.75, 0.0],
        [0.0, 1.0, 0.0],
        [1.0, 0.0, 1.0],
        [1.0, 1.0, 0.5],
        [0.0, 1.0, 1.0],
        [0.25, 0.0, 1.0],
        [0.25, 0.25, 0.25],
        [0.25, 0.0, 1.0],
    ];
    let h = FRAC_1_SQRT_2;
    let w = vec![1.0, h, 1.0, h, 0.5, h, 1.0, h, 1.0];
    let k = vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
    build(k.clone(), 2, k, 2, pts, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_cylinder_points() {
        let s = quarter_cylinder();
        for k in 0..50 {
            let t = [(k as f64 * 0.618034).fract(), 2.0 * (k as f64 * 0.754878).fract()];
            let x = s.point(t).unwrap();
            assert!((x[0] * x[0] + x[1] * x[1] - 1.0).abs() < 1e-14);
            assert!((x[2] - t[1]).abs() < 1e-14);
        }
        assert_eq!(s.point([0.0, 1.3]).unwrap(), [1.0, 0.0, 1.3]);
    }

    #[test]
    fn sim2_corners() {
        let s = sim2_patch();
        assert_eq!(s.point([0.0, 0.0]).unwrap(), [1.0, 0.0, 0.0]);
        let c = s.point([1.0, 1.0]).unwrap();
        for k in 0..3 {
            assert!((c[k] - [0.25, 0.0, 1.0][k]).abs() < 1e-15);
        }
        let r = s.basis([0.0, 0.0], 0).unwrap();
        for (idx, v) in r.indices.iter().zip(&r.values) {
            assert_eq!(*v, if *idx == 0 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn unit_square_is_identity() {
        let s = unit_square(3, 4).unwrap();
        let x = s.point([0.3, 0.71]).unwrap();
        assert!((x[0] - 0.3).abs() < 1e-14 && (x[1] - 0.71).abs() < 1e-14 && x[2] == 0.0);
    }
}
