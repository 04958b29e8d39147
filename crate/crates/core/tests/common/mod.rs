#![allow(dead_code)]

// Recursive Cox-de Boor definition, with the last nonempty span closed on the
// right so the domain end is covered.
pub fn cox_de_boor(t: &[f64], i: usize, p: usize, k: usize, x: f64) -> f64 {
    if k > 0 {
        if p == 0 {
            return 0.0;
        }
        let mut v = 0.0;
        if t[i + p] > t[i] {
            v += p as f64 / (t[i + p] - t[i]) * cox_de_boor(t, i, p - 1, k - 1, x);
        }
        if t[i + p + 1] > t[i + 1] {
            v -= p as f64 / (t[i + p + 1] - t[i + 1]) * cox_de_boor(t, i + 1, p - 1, k - 1, x);
        }
        return v;
    }
    if p == 0 {
        let last = *t.last().unwrap();
        let inside = t[i] <= x && x < t[i + 1];
        let right_end = x == last && t[i + 1] == last && t[i] < last;
        return if inside || right_end { 1.0 } else { 0.0 };
    }
    let mut v = 0.0;
    if t[i + p] > t[i] {
        v += (x - t[i]) / (t[i + p] - t[i]) * cox_de_boor(t, i, p - 1, 0, x);
    }
    if t[i + p + 1] > t[i + 1] {
        v += (t[i + p + 1] - x) / (t[i + p + 1] - t[i + 1]) * cox_de_boor(t, i + 1, p - 1, 0, x);
    }
    v
}

/// Gauss-Legendre nodes and weights on [-1, 1] from the eigen-decomposition
/// of the Jacobi matrix.
pub fn golub_welsch(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = nalgebra::DMatrix::<f64>::zeros(q, q);
    for k in 1..q {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..q)
        .map(|k| (eig.eigenvalues[k], 2.0 * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

fn distinct(t: &[f64]) -> Vec<f64> {
    let mut v = t.to_vec();
    v.dedup();
    v
}

/// Galerkin matrix of the squared Laplacian for the tensor B-spline space on
/// the affine plane `X = a (xi, eta)`, whose metric `G = a^T a` is constant.
/// Flattened index `i * m + j`.
pub fn planar_bilaplacian(
    tx: &[f64],
    px: usize,
    te: &[f64],
    pe: usize,
    a: [[f64; 2]; 3],
    q: usize,
) -> nalgebra::DMatrix<f64> {
    let n = tx.len() - px - 1;
    let m = te.len() - pe - 1;
    let mut g = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            g[r][c] = (0..3).map(|k| a[k][r] * a[k][c]).sum();
        }
    }
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let gi = [[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]];
    let area = det.sqrt();
    let (x, w) = golub_welsch(q);
    let bx = distinct(tx);
    let be = distinct(te);
    let mut r = nalgebra::DMatrix::<f64>::zeros(n * m, n * m);
    for sx in bx.windows(2) {
        for se in be.windows(2) {
            for (xa, wa) in x.iter().zip(&w) {
                for (xb, wb) in x.iter().zip(&w) {
                    let u = 0.5 * (sx[0] + sx[1]) + 0.5 * (sx[1] - sx[0]) * xa;
                    let v = 0.5 * (se[0] + se[1]) + 0.5 * (se[1] - se[0]) * xb;
                    let jw = 0.25 * (sx[1] - sx[0]) * (se[1] - se[0]) * wa * wb * area;
                    let nu: Vec<[f64; 3]> = (0..n)
                        .map(|i| [0, 1, 2].map(|k| cox_de_boor(tx, i, px, k, u)))
                        .collect();
                    let mv: Vec<[f64; 3]> = (0..m)
                        .map(|j| [0, 1, 2].map(|k| cox_de_boor(te, j, pe, k, v)))
                        .collect();
                    let lap: Vec<f64> = (0..n * m)
                        .map(|k| {
                            let (a, b) = (nu[k / m], mv[k % m]);
                            gi[0][0] * a[2] * b[0] + 2.0 * gi[0][1] * a[1] * b[1] + gi[1][1] * a[0] * b[2]
                        })
                        .collect();
                    for i in 0..n * m {
                        if lap[i] == 0.0 {
                            continue;
                        }
                        for j in 0..n * m {
                            r[(i, j)] += jw * lap[i] * lap[j];
                        }
                    }
                }
            }
        }
    }
    r
}

/// Dense `Psi` with `Psi[(i, k)] = psi_k(s_i)`.
pub fn dense_psi(surface: &igs_core::NurbsSurface, points: &[[f64; 2]]) -> nalgebra::DMatrix<f64> {
    let mut psi = nalgebra::DMatrix::<f64>::zeros(points.len(), surface.num_basis());
    for (i, &s) in points.iter().enumerate() {
        let r = surface.basis(s, 0).unwrap();
        for (&k, v) in r.indices.iter().zip(&r.values) {
            psi[(i, k)] = *v;
        }
    }
    psi
}

pub fn rel_diff(a: &nalgebra::DMatrix<f64>, b: &nalgebra::DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}
