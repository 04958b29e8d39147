use super::surface::SurfaceMap;
use crate::error::{Error, Result};

/// Settings for [`invert_point`]. Distances are relative to the surface
/// scale (bounding-box diagonal of the control net).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionOptions {
    pub max_iter: usize,
    /// Target distance below which a point counts as on the surface.
    pub tol: f64,
    /// Points farther than this from their foot point are rejected.
    pub max_distance: f64,
    /// Seed grid resolution per direction, used when no guess is supplied.
    pub seed_grid: usize,
}

impl Default for InversionOptions {
    fn default() -> Self {
        InversionOptions {
            max_iter: 50,
            tol: 1e-8,
            max_distance: 1e-2,
            seed_grid: 11,
        }
    }
}

/// Result of a point inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub s: [f64; 2],
    /// `|X(s) - x|`.
    pub distance: f64,
    pub iterations: usize,
}

impl Inversion {
    /// Whether the point lies on the surface within `opts.tol`.
    pub fn on_surface(&self, scale: f64, opts: &InversionOptions) -> bool {
        self.distance <= opts.tol * scale
    }
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Finds the parametric foot point of `x` by Gauss-Newton minimisation of
/// `|X(s) - x|^2`, clamped to the closed parametric domain.
///
/// Without an initial guess the best node of a `seed_grid x seed_grid`
/// lattice is used.
pub fn invert_point<M: SurfaceMap + ?Sized>(
    map: &M,
    x: [f64; 3],
    guess: Option<[f64; 2]>,
    opts: &InversionOptions,
) -> Result<Inversion> {
    let dom = map.domain();
    let scale = map.scale();
    let clamp = |s: [f64; 2]| [s[0].clamp(dom[0][0], dom[0][1]), s[1].clamp(dom[1][0], dom[1][1])];
    let mut s = match guess {
        Some(g) => clamp(g),
        None => seed(map, x, opts.seed_grid.max(2))?,
    };
    let widths = [dom[0][1] - dom[0][0], dom[1][1] - dom[1][0]];
    let mut d = map.derivatives(s)?;
    let mut r = sub(&d.x, &x);
    for it in 1..=opts.max_iter {
        let (j1, j2) = (&d.d1, &d.d2);
        let a11 = dot(j1, j1);
        let a12 = dot(j1, j2);
        let a22 = dot(j2, j2);
        let b1 = -dot(j1, &r);
        let b2 = -dot(j2, &r);
        let det = a11 * a22 - a12 * a12;
        if !(det > 0.0) {
            break;
        }
        let step = [(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det];
        let next = clamp([s[0] + step[0], s[1] + step[1]]);
        let moved = [(next[0] - s[0]) / widths[0], (next[1] - s[1]) / widths[1]];
        s = next;
        d = map.derivatives(s)?;
        r = sub(&d.x, &x);
        if moved[0].abs().max(moved[1].abs()) < 1e-15 {
            return finish(s, r, it, scale, opts);
        }
    }
    let dist = dot(&r, &r).sqrt();
    if dist <= opts.tol * scale {
        return Ok(Inversion {
            s,
            distance: dist,
            iterations: opts.max_iter,
        });
    }
    Err(Error::Inversion {
        residual: dist,
        iterations: opts.max_iter,
    })
}

fn finish(s: [f64; 2], r: [f64; 3], it: usize, scale: f64, opts: &InversionOptions) -> Result<Inversion> {
    let distance = dot(&r, &r).sqrt();
    if distance > opts.max_distance * scale {
        return Err(Error::Inversion {
            residual: distance,
            iterations: it,
        });
    }
    Ok(Inversion {
        s,
        distance,
        iterations: it,
    })
}

fn seed<M: SurfaceMap + ?Sized>(map: &M, x: [f64; 3], k: usize) -> Result<[f64; 2]> {
    let dom = map.domain();
    let mut best = ([dom[0][0], dom[1][0]], f64::INFINITY);
    for i in 0..k {
        for j in 0..k {
            let s = [
                dom[0][0] + (dom[0][1] - dom[0][0]) * i as f64 / (k - 1) as f64,
                dom[1][0] + (dom[1][1] - dom[1][0]) * j as f64 / (k - 1) as f64,
            ];
            let r = sub(&map.derivatives(s)?.x, &x);
            let d2 = dot(&r, &r);
            if d2 < best.1 {
                best = (s, d2);
            }
        }
    }
    Ok(best.0)
}
