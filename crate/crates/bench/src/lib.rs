//! Fixed workloads shared by the benchmarks.

use anisoflow::fokker_planck::{to_selfsimilar, RescaledField};
use anisoflow::pde_solver::cosine_bump;
use anisoflow::{ExponentSet, Grid, GridField};

/// A unit-mass cosine bump of radius `extent / 3` on a `nodes^dim` grid.
pub fn bump_field(p: &[f64], extent: f64, nodes: usize) -> (ExponentSet, GridField) {
    let e = ExponentSet::new(p.len(), p).expect("valid exponents");
    let grid = Grid::uniform(p.len(), extent, nodes).expect("valid grid");
    let u = cosine_bump(grid, 1.0, extent / 3.0).expect("bump fits the grid");
    (e, u)
}

/// The same field in self-similar variables at `t = 1`.
pub fn rescaled_field(p: &[f64], extent: f64, nodes: usize) -> RescaledField {
    let (e, mut u) = bump_field(p, extent, nodes);
    u.time = 1.0;
    to_selfsimilar(&u, &e).expect("rescaling succeeds")
}
