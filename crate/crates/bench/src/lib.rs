//! Fixtures shared by the benchmarks.

use igs_core::geometry::{shapes, QuadRule};
use igs_core::sim::{exact_field, generate_data, grid_layout, FieldId};
use igs_core::{NurbsSurface, Observations};

/// Quarter cylinder refined to degree `p` with `side x side` functions and
/// noisy samples of the first test field on a `grid x grid` layout.
pub fn cylinder_problem(p: usize, side: usize, grid: usize) -> (NurbsSurface, Observations, QuadRule) {
    let s = shapes::quarter_cylinder()
        .k_refine_to(p, side, side)
        .expect("refinement");
    let pts = grid_layout(&s, (grid, grid));
    let obs = generate_data(&s, |x| exact_field(FieldId::F1, x), &pts, 0.125, 1, 0).expect("data");
    let quad = QuadRule::new(s.kv_xi(), s.kv_eta(), p + 1).expect("quadrature");
    (s, obs, quad)
}
