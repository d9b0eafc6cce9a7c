//! Tensor-product grids and nodal fields.
//!
//! Nodes along axis `i` sit at `x = -L_i + k h_i`, `k = 0..n_i`, with
//! `h_i = 2 L_i / (n_i - 1)`, so every grid is symmetric about the origin.
//! Values are stored row-major: the last axis varies fastest, which is also
//! the lexicographic node order used by the CSV writer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaling_laws::MassMeasure;

pub const MIN_NODES_PER_AXIS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    extents: Vec<f64>,
    nodes: Vec<usize>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
}

/// Serialized form of a [`Grid`]: half-widths and node counts per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub extents: Vec<f64>,
    pub nodes: Vec<usize>,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;
    fn try_from(s: GridSpec) -> Result<Self> {
        Grid::new(&s.extents, &s.nodes)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec {
            extents: g.extents,
            nodes: g.nodes,
        }
    }
}

impl Grid {
    pub fn new(extents: &[f64], nodes: &[usize]) -> Result<Self> {
        if extents.is_empty() || extents.len() != nodes.len() {
            return Err(Error::arg(
                "grid needs one extent and one node count per axis",
            ));
        }
        if let Some(l) = extents.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::arg(format!(
                "grid extents must be positive, got {l}"
            )));
        }
        if let Some(n) = nodes.iter().find(|&&n| n < MIN_NODES_PER_AXIS) {
            return Err(Error::arg(format!(
                "grid needs at least {MIN_NODES_PER_AXIS} nodes per axis, got {n}"
            )));
        }
        let spacing = extents
            .iter()
            .zip(nodes)
            .map(|(&l, &n)| 2.0 * l / (n - 1) as f64)
            .collect();
        let mut strides = vec![1; nodes.len()];
        for i in (0..nodes.len() - 1).rev() {
            strides[i] = strides[i + 1] * nodes[i + 1];
        }
        Ok(Self {
            extents: extents.to_vec(),
            nodes: nodes.to_vec(),
            spacing,
            strides,
        })
    }

    /// Same number of nodes per axis and half-width on every axis.
    pub fn uniform(dim: usize, extent: f64, nodes: usize) -> Result<Self> {
        Self::new(&vec![extent; dim], &vec![nodes; dim])
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(0.0, f64::max)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    #[inline]
    pub fn coord(&self, axis: usize, k: usize) -> f64 {
        -self.extents[axis] + k as f64 * self.spacing[axis]
    }

    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.nodes[axis]).map(|k| self.coord(axis, k)).collect()
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(k, s)| k * s).sum()
    }

    pub fn multi_index(&self, mut flat: usize, out: &mut [usize]) {
        for (o, &s) in out.iter_mut().zip(&self.strides) {
            *o = flat / s;
            flat %= s;
        }
    }

    pub fn node_coords(&self, flat: usize, out: &mut [f64]) {
        let mut rem = flat;
        for (axis, o) in out.iter_mut().enumerate() {
            let k = rem / self.strides[axis];
            rem %= self.strides[axis];
            *o = self.coord(axis, k);
        }
    }

    /// Calls `f(flat_index, coords)` for every node in lexicographic order.
    pub fn for_each_node(&self, mut f: impl FnMut(usize, &[f64])) {
        let mut x = vec![0.0; self.dim()];
        for flat in 0..self.len() {
            self.node_coords(flat, &mut x);
            f(flat, &x);
        }
    }

    /// Grid with every half-width multiplied by the matching factor.
    pub fn scaled(&self, factors: &[f64]) -> Result<Self> {
        if factors.len() != self.dim() {
            return Err(Error::arg("one scale factor per axis expected"));
        }
        let ext: Vec<f64> = self
            .extents
            .iter()
            .zip(factors)
            .map(|(l, f)| l * f)
            .collect();
        Grid::new(&ext, &self.nodes)
    }
}

/// Smallest index box holding every value above a threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportBox {
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
    /// `max(|x_lo|, |x_hi|)` per axis.
    pub half_width: Vec<f64>,
    /// Fewest cells between the box and the grid boundary over all axes.
    pub boundary_gap: usize,
}

/// Nodal values on a [`Grid`] at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub time: f64,
}

impl GridField {
    pub fn zeros(grid: Grid, time: f64) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values, time }
    }

    pub fn from_fn(grid: Grid, time: f64, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        grid.for_each_node(|_, x| values.push(f(x)));
        Self { grid, values, time }
    }

    pub fn new(grid: Grid, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::arg(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, time })
    }

    /// Discrete integral `Σ u_k Π h_i`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Multilinear interpolation; zero outside the grid.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let g = &self.grid;
        let dim = g.dim();
        debug_assert_eq!(x.len(), dim);
        let mut base = 0usize;
        let mut frac = vec![0.0; dim];
        for axis in 0..dim {
            let s = (x[axis] + g.extents[axis]) / g.spacing[axis];
            let n = g.nodes[axis];
            if !(s >= 0.0 && s <= (n - 1) as f64) {
                return 0.0;
            }
            let k = (s.floor() as usize).min(n - 2);
            frac[axis] = s - k as f64;
            base += k * g.strides[axis];
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << dim) {
            let mut w = 1.0;
            let mut idx = base;
            for (axis, (&fr, &stride)) in frac.iter().zip(&g.strides).enumerate() {
                if corner & (1 << axis) != 0 {
                    w *= fr;
                    idx += stride;
                } else {
                    w *= 1.0 - fr;
                }
            }
            if w != 0.0 {
                acc += w * self.values[idx];
            }
        }
        acc
    }

    /// Support box for values above `rel_threshold · max`, or `None` when the
    /// field has no positive values.
    pub fn support_box(&self, rel_threshold: f64) -> Option<SupportBox> {
        let max = self.max();
        if !(max > 0.0) {
            return None;
        }
        let thr = rel_threshold * max;
        let g = &self.grid;
        let dim = g.dim();
        let mut lo = g.nodes.iter().map(|&n| n - 1).collect::<Vec<_>>();
        let mut hi = vec![0usize; dim];
        let mut idx = vec![0usize; dim];
        for (flat, &v) in self.values.iter().enumerate() {
            if v > thr {
                g.multi_index(flat, &mut idx);
                for a in 0..dim {
                    lo[a] = lo[a].min(idx[a]);
                    hi[a] = hi[a].max(idx[a]);
                }
            }
        }
        let half_width = (0..dim)
            .map(|a| g.coord(a, lo[a]).abs().max(g.coord(a, hi[a]).abs()))
            .collect();
        let boundary_gap = (0..dim)
            .map(|a| lo[a].min(g.nodes[a] - 1 - hi[a]))
            .min()
            .unwrap_or(0);
        Some(SupportBox {
            lo,
            hi,
            half_width,
            boundary_gap,
        })
    }
}

impl MassMeasure for GridField {
    fn dim(&self) -> usize {
        self.grid.dim()
    }

    fn mass_in_ball(&self, rho: f64) -> f64 {
        let r2 = rho * rho;
        let mut acc = 0.0;
        self.grid.for_each_node(|k, x| {
            if x.iter().map(|v| v * v).sum::<f64>() <= r2 {
                acc += self.values[k].abs();
            }
        });
        acc * self.grid.cell_volume()
    }

    fn mass_in_box(&self, half_widths: &[f64]) -> f64 {
        let mut acc = 0.0;
        self.grid.for_each_node(|k, x| {
            if x.iter().zip(half_widths).all(|(v, w)| v.abs() <= *w) {
                acc += self.values[k].abs();
            }
        });
        acc * self.grid.cell_volume()
    }

    fn domain_half_extents(&self) -> Option<Vec<f64>> {
        Some(self.grid.extents.clone())
    }

    fn has_negative_part(&self) -> bool {
        self.values.iter().any(|&v| v < 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_geometry() {
        let g = Grid::new(&[1.0, 2.0], &[21, 41]).unwrap();
        assert_eq!(g.len(), 21 * 41);
        assert_relative_eq!(g.spacing()[0], 0.1);
        assert_relative_eq!(g.spacing()[1], 0.1);
        assert_relative_eq!(g.coord(0, 10), 0.0, epsilon = 1e-15);
        assert_relative_eq!(g.coord(1, 40), 2.0, epsilon = 1e-15);
        let mut idx = [0; 2];
        g.multi_index(g.flat_index(&[3, 7]), &mut idx);
        assert_eq!(idx, [3, 7]);
        assert!(Grid::new(&[1.0], &[8]).is_err());
        assert!(Grid::new(&[0.0], &[32]).is_err());
    }

    #[test]
    fn interpolation_is_exact_for_multilinear_data() {
        let g = Grid::new(&[1.0, 1.5], &[17, 25]).unwrap();
        let f = GridField::from_fn(g, 0.0, |x| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1]);
        for x in [[0.13, -0.71], [-0.99, 1.49], [0.5, 0.0]] {
            let exact = 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1];
            assert_relative_eq!(f.interpolate(&x), exact, epsilon = 1e-12);
        }
        assert_eq!(f.interpolate(&[1.01, 0.0]), 0.0);
    }

    #[test]
    fn support_box_of_indicator() {
        let g = Grid::uniform(2, 1.0, 21).unwrap();
        let f = GridField::from_fn(g, 0.0, |x| {
            if x[0].abs() <= 0.35 && x[1].abs() <= 0.55 {
                1.0
            } else {
                0.0
            }
        });
        let b = f.support_box(1e-10).unwrap();
        assert_relative_eq!(b.half_width[0], 0.3, epsilon = 1e-12);
        assert_relative_eq!(b.half_width[1], 0.5, epsilon = 1e-12);
        assert_eq!(b.boundary_gap, 5);
        assert!(GridField::zeros(Grid::uniform(1, 1.0, 16).unwrap(), 0.0)
            .support_box(1e-10)
            .is_none());
    }
}
