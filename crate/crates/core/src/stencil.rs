//! Face loops and the degenerate flux shared by both steppers.

use crate::grid::Grid;

/// `|g|^q` with an integer fast path; `q = p - 2 > 0`.
#[derive(Debug, Clone, Copy)]
pub(crate) enum AbsPow {
    Int(i32),
    Real(f64),
}

impl AbsPow {
    pub fn new(q: f64) -> Self {
        if q == q.round() && q.abs() <= 16.0 {
            AbsPow::Int(q as i32)
        } else {
            AbsPow::Real(q)
        }
    }

    #[inline(always)]
    pub fn eval(self, a: f64) -> f64 {
        match self {
            AbsPow::Int(k) => a.powi(k),
            AbsPow::Real(q) => {
                if a == 0.0 {
                    0.0
                } else {
                    a.powf(q)
                }
            }
        }
    }
}

/// Interior faces along one axis. Face `(a, k)` joins node `a` (axis index
/// `k`) to node `a + stride`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AxisFaces {
    pub outer: usize,
    pub n: usize,
    pub stride: usize,
}

impl AxisFaces {
    pub fn new(grid: &Grid, axis: usize) -> Self {
        let n = grid.nodes()[axis];
        let stride = grid.strides()[axis];
        Self {
            outer: grid.len() / (n * stride),
            n,
            stride,
        }
    }

    #[inline(always)]
    pub fn for_each(&self, mut f: impl FnMut(usize, usize)) {
        let s = self.stride;
        let block = self.n * s;
        for o in 0..self.outer {
            let base = o * block;
            for k in 0..self.n - 1 {
                let row = base + k * s;
                for a in row..row + s {
                    f(a, k);
                }
            }
        }
    }
}

/// Runs `flux(left, right, k)` on every interior face normal to `axis` and
/// adds its divergence to `out`: `out[a] += f`, `out[a + stride] -= f`.
#[inline(always)]
pub(crate) fn face_pass(
    grid: &Grid,
    axis: usize,
    u: &[f64],
    out: &mut [f64],
    mut flux: impl FnMut(f64, f64, usize) -> f64,
) {
    let faces = AxisFaces::new(grid, axis);
    let (n, s) = (faces.n, faces.stride);
    let block = n * s;
    for (ub, ob) in u.chunks_exact(block).zip(out.chunks_exact_mut(block)) {
        if s == 1 {
            let mut prev = 0.0;
            for k in 0..n - 1 {
                let f = flux(ub[k], ub[k + 1], k);
                ob[k] += f - prev;
                prev = f;
            }
            ob[n - 1] -= prev;
        } else {
            for k in 0..n - 1 {
                let ul = &ub[k * s..(k + 1) * s];
                let ur = &ub[(k + 1) * s..(k + 2) * s];
                let (lo, hi) = ob[k * s..(k + 2) * s].split_at_mut(s);
                for j in 0..s {
                    let f = flux(ul[j], ur[j], k);
                    lo[j] += f;
                    hi[j] -= f;
                }
            }
        }
    }
}

/// Calls `body(|g|^q)` with the power specialised for small integer `q`.
macro_rules! with_abs_pow {
    ($pw:expr, $pow:ident => $body:expr) => {
        match $pw {
            AbsPow::Int(1) => {
                let $pow = |a: f64| a;
                $body
            }
            AbsPow::Int(2) => {
                let $pow = |a: f64| a * a;
                $body
            }
            AbsPow::Int(3) => {
                let $pow = |a: f64| a * a * a;
                $body
            }
            pw => {
                let $pow = move |a: f64| pw.eval(a);
                $body
            }
        }
    };
}
pub(crate) use with_abs_pow;

/// Adds `Σ_i ∂_i(|∂_i u|^{p_i-2} ∂_i u)` to `out` and returns the largest
/// one-sided gradient magnitude seen along each axis. Outer faces carry no
/// flux.
pub(crate) fn accumulate_diffusion(
    grid: &Grid,
    powers: &[AbsPow],
    u: &[f64],
    out: &mut [f64],
    gmax: &mut [f64],
) {
    for axis in 0..grid.dim() {
        let inv_h = 1.0 / grid.spacing()[axis];
        let mut gm = 0.0f64;
        with_abs_pow!(powers[axis], pow => face_pass(grid, axis, u, out, |l, r, _| {
            let g = (r - l) * inv_h;
            let ag = g.abs();
            if ag > gm {
                gm = ag;
            }
            pow(ag) * g * inv_h
        }));
        gmax[axis] = gm;
    }
}

/// `|g|^{p-2} g` at the given gradient.
#[inline]
pub(crate) fn degenerate_flux(pw: AbsPow, g: f64) -> f64 {
    pw.eval(g.abs()) * g
}

pub(crate) fn powers_for(p: &[f64]) -> Vec<AbsPow> {
    p.iter().map(|&pi| AbsPow::new(pi - 2.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_and_real_powers_agree() {
        for a in [0.0, 0.3, 1.0, 2.7] {
            assert_eq!(AbsPow::new(2.0).eval(a), a * a);
            let r = AbsPow::Real(2.0).eval(a);
            assert!((r - a * a).abs() <= 1e-15 * (1.0 + a * a));
        }
        assert!(matches!(AbsPow::new(1.5), AbsPow::Real(_)));
    }

    #[test]
    fn face_pass_telescopes() {
        let g = Grid::new(&[1.0, 1.0], &[16, 19]).unwrap();
        let u: Vec<f64> = (0..g.len()).map(|k| ((k * 37) % 11) as f64).collect();
        for axis in 0..2 {
            let mut out = vec![0.0; g.len()];
            let mut calls = 0;
            face_pass(&g, axis, &u, &mut out, |l, r, _| {
                calls += 1;
                r - l
            });
            assert_eq!(calls, g.len() / g.nodes()[axis] * (g.nodes()[axis] - 1));
            assert!(out.iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn faces_visit_each_neighbour_pair_once() {
        let g = Grid::new(&[1.0, 1.0, 1.0], &[16, 17, 18]).unwrap();
        for axis in 0..3 {
            let mut count = 0;
            let mut idx = [0usize; 3];
            AxisFaces::new(&g, axis).for_each(|a, k| {
                g.multi_index(a, &mut idx);
                assert_eq!(idx[axis], k);
                count += 1;
            });
            let mut expect = g.len() / g.nodes()[axis];
            expect *= g.nodes()[axis] - 1;
            assert_eq!(count, expect);
        }
    }
}
