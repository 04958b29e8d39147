use std::io::{self, Write};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{frame_at, NurbsSurface, QuadRule};

/// Observed values `y_i` at parametric locations `s_i` of the data points.
/// Duplicate locations are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    points: Vec<[f64; 2]>,
    values: Vec<f64>,
}

impl Observations {
    pub fn new(points: Vec<[f64; 2]>, values: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("at least one observation is required".into()));
        }
        if points.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} locations but {} values",
                points.len(),
                values.len()
            )));
        }
        if points.iter().flatten().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite observation".into()));
        }
        Ok(Observations { points, values })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Same locations with new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.points.clone(), values)
    }
}

/// Row-compressed sparse matrix, used for the evaluation matrix `Psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows {
    ncols: usize,
    rows: Vec<(Vec<usize>, Vec<f64>)>,
}

impl SparseRows {
    pub fn new(ncols: usize, rows: Vec<(Vec<usize>, Vec<f64>)>) -> Self {
        SparseRows { ncols, rows }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (c, v) = &self.rows[i];
        (c, v)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|(c, _)| c.len()).sum()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|(c, v)| c.iter().zip(v).map(|(&j, a)| a * x[j]).sum())
            .collect()
    }

    /// `Psi^T y`.
    pub fn t_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        for ((c, v), yi) in self.rows.iter().zip(y) {
            for (&j, a) in c.iter().zip(v) {
                out[j] += a * yi;
            }
        }
        out
    }

    /// `Psi^T Psi`.
    pub fn gram(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.ncols, self.ncols);
        for (c, v) in &self.rows {
            for (&a, va) in c.iter().zip(v) {
                for (&b, vb) in c.iter().zip(v) {
                    g[(a, b)] += va * vb;
                }
            }
        }
        g
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.rows.len(), self.ncols);
        for (i, (c, v)) in self.rows.iter().enumerate() {
            for (&j, a) in c.iter().zip(v) {
                d[(i, j)] += a;
            }
        }
        d
    }
}

/// Boundary treatment of the estimation space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryCondition {
    /// Nothing imposed; the free variational problem carries natural
    /// conditions.
    #[default]
    Natural,
    /// Basis functions with a nonzero boundary trace are removed, so the
    /// estimate vanishes on the boundary.
    DirichletZero,
}

/// Assembled discrete smoothing problem.
///
/// `psi` is `N x n`, `penalty` is `n x n` with
/// `R_ij = int_Sigma lap(psi_i) lap(psi_j) dSigma`, where `n` is the number of
/// free basis functions (`N^h` under natural conditions). `free[k]` is the
/// global basis index of free function `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingSystem {
    pub psi: SparseRows,
    pub penalty: DMatrix<f64>,
    pub gram: DMatrix<f64>,
    pub free: Vec<usize>,
    pub num_basis: usize,
    pub basis_dims: (usize, usize),
    pub quad_order: usize,
    pub boundary: BoundaryCondition,
}

/// Checks that the NURBS space is globally C1 (degree >= 2, interior
/// multiplicity <= p - 1), which the squared Laplacian penalty requires.
pub fn check_c1(surface: &NurbsSurface) -> Result<()> {
    for kv in [surface.kv_xi(), surface.kv_eta()] {
        let ok = kv.degree() >= 2 && kv.min_interior_continuity().is_none_or(|c| c >= 1);
        if !ok {
            return Err(Error::Contract(format!(
                "penalty requires a square-integrable surface Laplacian: degree {} basis with \
                 continuity C{} is not globally C1",
                kv.degree(),
                kv.min_interior_continuity().unwrap_or(kv.degree())
            )));
        }
    }
    Ok(())
}

/// Assembles `Psi` and `R` for the NURBS space of `surface`.
///
/// Element matrices of `R` are computed in parallel and scattered in element
/// order, so the result does not depend on the thread count. `R` is
/// symmetrised by averaging with its transpose.
pub fn assemble(surface: &NurbsSurface, obs: &Observations, quad: &QuadRule) -> Result<SmoothingSystem> {
    check_c1(surface)?;
    let nh = surface.num_basis();

    let rows: Vec<(Vec<usize>, Vec<f64>)> = obs
        .points()
        .par_iter()
        .map(|&s| surface.basis(s, 0).map(|r| (r.indices, r.values)))
        .collect::<Result<_>>()?;
    let psi = SparseRows::new(nh, rows);

    let locals: Vec<(Vec<usize>, Vec<f64>)> = quad
        .elements
        .par_iter()
        .map(|el| -> Result<(Vec<usize>, Vec<f64>)> {
            let mut active: Vec<usize> = Vec::new();
            let mut local: Vec<f64> = Vec::new();
            for (&s, &w) in el.points.iter().zip(&el.weights) {
                let f = frame_at(surface, s, true)?;
                if active.is_empty() {
                    active = f.active.clone();
                    local = vec![0.0; active.len() * active.len()];
                }
                debug_assert_eq!(active, f.active);
                let n = active.len();
                let wg = w * f.g;
                for a in 0..n {
                    let la = wg * f.lb_coeff[a];
                    for b in 0..n {
                        local[a * n + b] += la * f.lb_coeff[b];
                    }
                }
            }
            Ok((active, local))
        })
        .collect::<Result<_>>()?;

    let mut r = DMatrix::zeros(nh, nh);
    for (active, local) in &locals {
        let n = active.len();
        for (a, &ga) in active.iter().enumerate() {
            for (b, &gb) in active.iter().enumerate() {
                r[(ga, gb)] += local[a * n + b];
            }
        }
    }
    let r = (&r + r.transpose()) * 0.5;
    let gram = psi.gram();
    Ok(SmoothingSystem {
        psi,
        penalty: r,
        gram,
        free: (0..nh).collect(),
        num_basis: nh,
        basis_dims: surface.dims(),
        quad_order: quad.order,
        boundary: BoundaryCondition::Natural,
    })
}

impl SmoothingSystem {
    pub fn num_obs(&self) -> usize {
        self.psi.nrows()
    }

    /// Number of free coefficients.
    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Reduced index of global basis function `global`, if free.
    pub fn reduced_index(&self, global: usize) -> Option<usize> {
        self.free.binary_search(&global).ok()
    }

    /// Expands reduced coefficients to all `N^h` basis functions (removed
    /// functions get zero).
    pub fn expand(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_basis];
        for (&g, &c) in self.free.iter().zip(coeffs) {
            out[g] = c;
        }
        out
    }

    /// Restriction of a global basis row to the free functions.
    pub fn restrict_row(&self, indices: &[usize], values: &[f64]) -> (Vec<usize>, Vec<f64>) {
        indices
            .iter()
            .zip(values)
            .filter_map(|(&g, &v)| self.reduced_index(g).map(|k| (k, v)))
            .unzip()
    }

    /// Writes the nonzero entries of `m` as `row col value` lines (0-based).
    pub fn write_coo<W: Write>(m: &DMatrix<f64>, out: &mut W) -> io::Result<()> {
        writeln!(out, "# {} {} coordinate", m.nrows(), m.ncols())?;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != 0.0 {
                    writeln!(out, "{i} {j} {v:.16e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Removes every basis function with a nonzero boundary trace (the outer
/// layer of the tensor index grid), so the estimate vanishes on the
/// boundary.
pub fn apply_dirichlet_zero(sys: &SmoothingSystem) -> SmoothingSystem {
    let (n, m) = sys.basis_dims;
    let keep: Vec<usize> = (0..sys.dim())
        .filter(|&k| {
            let g = sys.free[k];
            let (i, j) = (g / m, g % m);
            i > 0 && j > 0 && i + 1 < n && j + 1 < m
        })
        .collect();
    let mut map = vec![None; sys.dim()];
    for (new, &old) in keep.iter().enumerate() {
        map[old] = Some(new);
    }
    let rows = (0..sys.psi.nrows())
        .map(|i| {
            let (c, v) = sys.psi.row(i);
            c.iter().zip(v).filter_map(|(&j, &a)| map[j].map(|k| (k, a))).unzip()
        })
        .collect();
    let psi = SparseRows::new(keep.len(), rows);
    let penalty = sys.penalty.select_rows(&keep).select_columns(&keep);
    let gram = psi.gram();
    SmoothingSystem {
        psi,
        penalty,
        gram,
        free: keep.iter().map(|&k| sys.free[k]).collect(),
        num_basis: sys.num_basis,
        basis_dims: sys.basis_dims,
        quad_order: sys.quad_order,
        boundary: BoundaryCondition::DirichletZero,
    }
}

/// Convenience wrapper: assemble with the default rule (`p + 1` points per
/// direction) and the requested boundary condition.
pub fn assemble_default(surface: &NurbsSurface, obs: &Observations, bc: BoundaryCondition) -> Result<SmoothingSystem> {
    let (px, pe) = surface.degrees();
    let quad = QuadRule::new(surface.kv_xi(), surface.kv_eta(), px.max(pe) + 1)?;
    let sys = assemble(surface, obs, &quad)?;
    Ok(match bc {
        BoundaryCondition::Natural => sys,
        BoundaryCondition::DirichletZero => apply_dirichlet_zero(&sys),
    })
}
