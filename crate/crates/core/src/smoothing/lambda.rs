use super::solve::{solve_fixed_lambda, FitResult};
use super::system::SmoothingSystem;
use crate::error::{Error, Result};

/// Search settings for GCV minimisation over `log10(lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaSearch {
    pub log10_lo: f64,
    pub log10_hi: f64,
    /// Final bracket width in decades.
    pub tol: f64,
    /// Points of the initial scan used to locate the global basin.
    pub scan_points: usize,
}

impl Default for LambdaSearch {
    fn default() -> Self {
        LambdaSearch {
            log10_lo: -12.0,
            log10_hi: 6.0,
            tol: 1e-4,
            scan_points: 73,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSelection {
    pub lambda: f64,
    pub gcv: f64,
    pub fit: FitResult,
    /// Set when GCV is constant over the bracket to within `tol`; the
    /// bracket midpoint is returned.
    pub flat: bool,
    pub evaluations: usize,
}

/// Brent's derivative-free minimiser (golden section with parabolic steps)
/// on `[a, b]`. Returns `(x_min, f_min, evaluations)`.
pub fn brent_minimize<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> (f64, f64, usize) {
    const GOLDEN: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = (a, b);
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut evals = 1;
    let (mut d, mut e) = (0.0f64, 0.0f64);
    for _ in 0..max_iter {
        let mid = 0.5 * (a + b);
        let tol1 = 0.5 * tol + 1e-12;
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            let mut q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            let e_old = e;
            if p.abs() < (0.5 * q * e_old).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < mid { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < mid { b - x } else { a - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        evals += 1;
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            (v, fv) = (w, fw);
            (w, fw) = (x, fx);
            (x, fx) = (u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, fv) = (w, fw);
                (w, fw) = (u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    (x, fx, evals)
}

/// Selects `lambda` by minimising GCV over `log10(lambda)`.
///
/// A uniform scan of the bracket locates the lowest basin, which is then
/// refined with Brent's method to `search.tol` decades. Points where GCV is
/// undefined or the solve fails count as `+inf`.
pub fn select_lambda(sys: &SmoothingSystem, y: &[f64], search: &LambdaSearch) -> Result<LambdaSelection> {
    let (lo, hi) = (search.log10_lo, search.log10_hi);
    if !(lo < hi) {
        return Err(Error::InvalidInput(format!("empty lambda bracket [1e{lo}, 1e{hi}]")));
    }
    let score = |t: f64| -> f64 {
        solve_fixed_lambda(sys, y, 10f64.powf(t))
            .ok()
            .and_then(|f| f.gcv)
            .unwrap_or(f64::INFINITY)
    };
    let k = search.scan_points.max(3);
    let grid: Vec<f64> = (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&t| score(t)).collect();
    let mut evaluations = k;

    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Err(Error::Solve("GCV is undefined everywhere on the lambda bracket".into()));
    }
    let fmin = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let fmax = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if finite.len() == k && fmax - fmin <= search.tol * fmin.abs() {
        let t = 0.5 * (lo + hi);
        let fit = solve_fixed_lambda(sys, y, 10f64.powf(t))?;
        let gcv = fit.gcv.unwrap_or(f64::INFINITY);
        return Ok(LambdaSelection {
            lambda: 10f64.powf(t),
            gcv,
            fit,
            flat: true,
            evaluations: evaluations + 1,
        });
    }

    let best = (0..k)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("nonempty grid");
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(k - 1)];
    let (t_brent, f_brent, ev) = brent_minimize(score, a, b, search.tol, 200);
    evaluations += ev;
    let t = if f_brent <= values[best] { t_brent } else { grid[best] };
    let lambda = 10f64.powf(t);
    let fit = solve_fixed_lambda(sys, y, lambda)?;
    let gcv = fit.gcv.ok_or(Error::GcvUndefined {
        n: sys.num_obs(),
        trace: fit.edf,
    })?;
    Ok(LambdaSelection {
        lambda,
        gcv,
        fit,
        flat: false,
        evaluations,
    })
}
