//! Geometry-preserving refinement of tensor NURBS patches.
//!
//! All operations act on homogeneous control points `(w x, w y, w z, w)`, so
//! the rational mapping is reproduced exactly (up to roundoff).

use nalgebra::DMatrix;

use super::knots::KnotVector;
use super::nurbs::WeightedNet;
use crate::error::{Error, Result};

/// Parametric direction of a tensor patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Xi,
    Eta,
}

type Hom = [f64; 4];

fn lerp(a: &Hom, b: &Hom, t: f64) -> Hom {
    [
        (1.0 - t) * a[0] + t * b[0],
        (1.0 - t) * a[1] + t * b[1],
        (1.0 - t) * a[2] + t * b[2],
        (1.0 - t) * a[3] + t * b[3],
    ]
}

/// Boehm insertion of a single knot into a curve.
pub(crate) fn insert_knot_curve(kv: &KnotVector, pts: &[Hom], u: f64) -> Result<(KnotVector, Vec<Hom>)> {
    let p = kv.degree();
    let (lo, hi) = kv.domain();
    if !(u > lo && u < hi) {
        return Err(Error::Refinement(format!(
            "knot {u} must lie strictly inside ({lo}, {hi})"
        )));
    }
    let mult = kv.multiplicity(u);
    if mult + 1 > p {
        return Err(Error::Refinement(format!(
            "inserting {u} would raise its multiplicity to {} > degree {p}",
            mult + 1
        )));
    }
    let k = kv.find_span(u)?;
    let knots = kv.knots();
    let n = pts.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let q = if i + p <= k {
            pts[i]
        } else if i > k {
            pts[i - 1]
        } else {
            let alpha = (u - knots[i]) / (knots[i + p] - knots[i]);
            lerp(&pts[i - 1], &pts[i], alpha)
        };
        out.push(q);
    }
    Ok((kv.with_inserted(u), out))
}

fn eval_curve(kv: &KnotVector, pts: &[Hom], x: f64) -> Result<Hom> {
    let b = kv.eval(x, 0)?;
    let first = b.first_index();
    let mut acc = [0.0; 4];
    for (k, v) in b.values.iter().enumerate() {
        for c in 0..4 {
            acc[c] += v * pts[first + k][c];
        }
    }
    Ok(acc)
}

/// Raises the degree of a curve by one.
///
/// The elevated knot vector repeats every breakpoint once more, so the
/// continuity at each knot is unchanged. The new control points are the
/// unique element of the elevated space that interpolates the original curve
/// at the Greville abscissae; since the original curve lies in that space the
/// interpolant reproduces it exactly.
pub(crate) fn elevate_curve(kv: &KnotVector, pts: &[Hom]) -> Result<(KnotVector, Vec<Hom>)> {
    let elevated = kv.elevated();
    let tau = elevated.greville();
    let n = elevated.len();
    let mut colloc = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DMatrix::<f64>::zeros(n, 4);
    for (row, &t) in tau.iter().enumerate() {
        let b = elevated.eval(t, 0)?;
        let first = b.first_index();
        for (k, v) in b.values.iter().enumerate() {
            colloc[(row, first + k)] = *v;
        }
        let c = eval_curve(kv, pts, t)?;
        for (col, v) in c.iter().enumerate() {
            rhs[(row, col)] = *v;
        }
    }
    let sol = colloc
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Refinement("singular collocation matrix in degree elevation".into()))?;
    let out = (0..n)
        .map(|i| [sol[(i, 0)], sol[(i, 1)], sol[(i, 2)], sol[(i, 3)]])
        .collect();
    Ok((elevated, out))
}

/// Applies a curve operation to every row (or column) of the net along
/// `axis`. The operation must return the same knot vector for every curve.
fn map_curves<F>(kv: &KnotVector, net: &WeightedNet, axis: Axis, op: F) -> Result<(KnotVector, WeightedNet)>
where
    F: Fn(&KnotVector, &[Hom]) -> Result<(KnotVector, Vec<Hom>)>,
{
    let (n, m) = net.dims();
    let along = match axis {
        Axis::Xi => n,
        Axis::Eta => m,
    };
    if kv.len() != along {
        return Err(Error::ControlNet(format!(
            "knot vector defines {} functions but the net has {along} along {axis:?}",
            kv.len()
        )));
    }
    let hom = net.homogeneous();
    let across = hom.len() / along;
    let mut new_kv = None;
    let mut curves = Vec::with_capacity(across);
    for c in 0..across {
        let curve: Vec<Hom> = (0..along)
            .map(|a| match axis {
                Axis::Xi => hom[a * m + c],
                Axis::Eta => hom[c * m + a],
            })
            .collect();
        let (k2, pts) = op(kv, &curve)?;
        new_kv.get_or_insert(k2);
        curves.push(pts);
    }
    let new_kv = new_kv.expect("net has at least one curve");
    let len = new_kv.len();
    let (n2, m2) = match axis {
        Axis::Xi => (len, m),
        Axis::Eta => (n, len),
    };
    let mut out = vec![[0.0; 4]; n2 * m2];
    for (c, pts) in curves.iter().enumerate() {
        for (a, q) in pts.iter().enumerate() {
            let idx = match axis {
                Axis::Xi => a * m2 + c,
                Axis::Eta => c * m2 + a,
            };
            out[idx] = *q;
        }
    }
    Ok((new_kv, WeightedNet::from_homogeneous(n2, m2, &out)?))
}

/// Inserts `u` into the knot vector `kv` of direction `axis`.
pub fn knot_insert(kv: &KnotVector, net: &WeightedNet, axis: Axis, u: f64) -> Result<(KnotVector, WeightedNet)> {
    map_curves(kv, net, axis, |k, pts| insert_knot_curve(k, pts, u))
}

/// Raises the degree along `axis` by one, preserving the mapping.
pub fn degree_elevate(kv: &KnotVector, net: &WeightedNet, axis: Axis) -> Result<(KnotVector, WeightedNet)> {
    map_curves(kv, net, axis, elevate_curve)
}

/// Inserts `inserts_per_span` equally spaced knots into every nonempty span.
pub fn subdivide(
    kv: &KnotVector,
    net: &WeightedNet,
    axis: Axis,
    inserts_per_span: usize,
) -> Result<(KnotVector, WeightedNet)> {
    let parts = (inserts_per_span + 1) as f64;
    let new_knots: Vec<f64> = kv
        .spans()
        .into_iter()
        .flat_map(|(a, b)| (1..=inserts_per_span).map(move |k| a + (b - a) * k as f64 / parts))
        .collect();
    map_curves(kv, net, axis, |k, pts| {
        let mut k = k.clone();
        let mut pts = pts.to_vec();
        for &u in &new_knots {
            (k, pts) = insert_knot_curve(&k, &pts, u)?;
        }
        Ok((k, pts))
    })
}

/// k-refinement: elevate both directions to `target_degree` on the coarse
/// patch, then subdivide every span with `inserts_per_span` new knots. The
/// new knots are simple, so the basis is `C^(target_degree - 1)` across them.
pub fn k_refine(
    kv_xi: &KnotVector,
    kv_eta: &KnotVector,
    net: &WeightedNet,
    target_degree: usize,
    inserts_per_span: usize,
) -> Result<(KnotVector, KnotVector, WeightedNet)> {
    if target_degree < kv_xi.degree() || target_degree < kv_eta.degree() {
        return Err(Error::Refinement(format!(
            "target degree {target_degree} is below the patch degrees ({}, {})",
            kv_xi.degree(),
            kv_eta.degree()
        )));
    }
    let (mut kx, mut ke, mut net) = (kv_xi.clone(), kv_eta.clone(), net.clone());
    while kx.degree() < target_degree {
        (kx, net) = degree_elevate(&kx, &net, Axis::Xi)?;
    }
    while ke.degree() < target_degree {
        (ke, net) = degree_elevate(&ke, &net, Axis::Eta)?;
    }
    if inserts_per_span > 0 {
        (kx, net) = subdivide(&kx, &net, Axis::Xi, inserts_per_span)?;
        (ke, net) = subdivide(&ke, &net, Axis::Eta, inserts_per_span)?;
    }
    Ok((kx, ke, net))
}
