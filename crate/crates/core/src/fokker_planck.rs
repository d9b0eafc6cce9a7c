//! Self-similar variables and the rescaled (Fokker–Planck) equation.
//!
//! With `y_i = x_i t^{α_i}`, `w = t^β u` and `τ = ln t` the evolution becomes
//!
//! ```text
//! w_τ = Σ_i ∂_{y_i} [ |∂_{y_i} w|^{p_i-2} ∂_{y_i} w - α_i y_i w ],
//! ```
//!
//! the zeroth-order term `(β + Σ α_i) w` having cancelled for `β = N/λ`.
//! Source-type solutions are the stationary states of this equation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_solutions::StationaryProfile;
use crate::grid::{Grid, GridField};
use crate::scaling_laws::ExponentSet;
use crate::stencil::{self, with_abs_pow, AbsPow};

/// A field in self-similar coordinates at logarithmic time `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledField {
    /// Values `w(y)` on a grid over `y`; `field.time` mirrors `tau`.
    pub field: GridField,
    pub tau: f64,
    pub exponents: ExponentSet,
}

impl RescaledField {
    pub fn new(field: GridField, tau: f64, exponents: ExponentSet) -> Result<Self> {
        if field.grid.dim() != exponents.dim() {
            return Err(Error::arg("field and exponents differ in dimension"));
        }
        let mut field = field;
        field.time = tau;
        Ok(Self {
            field,
            tau,
            exponents,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.field.grid
    }

    pub fn mass(&self) -> f64 {
        self.field.mass()
    }

    /// Same field multilinearly resampled onto `grid`.
    pub fn resample(&self, grid: &Grid) -> Self {
        let field = GridField::from_fn(grid.clone(), self.tau, |y| self.field.interpolate(y));
        Self {
            field,
            tau: self.tau,
            exponents: self.exponents.clone(),
        }
    }

    /// The isotropic profile with exponent `p̄` and mass `mass`, sampled on
    /// `grid` and renormalized to that discrete mass. A warm start for the
    /// stationary search.
    pub fn warm_start(grid: Grid, e: &ExponentSet, mass: f64) -> Result<Self> {
        let iso = ExponentSet::isotropic(e.dim(), e.p_bar())?;
        let prof = StationaryProfile::with_mass(&iso, mass)?;
        let mut f = GridField::from_fn(grid, 0.0, |y| prof.value(y));
        let m = f.mass();
        if !(m > 0.0) {
            return Err(Error::arg("warm start does not cover any grid node"));
        }
        f.values.iter_mut().for_each(|v| *v *= mass / m);
        Self::new(f, 0.0, e.clone())
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!("rescaling needs t > 0, got {t}")))
    }
}

/// `w(y) = t^β u(y_i t^{-α_i})` at `τ = ln t`. The y-grid is the x-grid
/// stretched by `t^{α_i}`, so nodes map onto nodes and no interpolation is
/// involved.
pub fn to_selfsimilar(u: &GridField, e: &ExponentSet) -> Result<RescaledField> {
    let t = u.time;
    check_time(t)?;
    let factors: Vec<f64> = e.alpha().iter().map(|a| t.powf(*a)).collect();
    let grid = u.grid.scaled(&factors)?;
    let amp = t.powf(e.beta());
    let values = u.values.iter().map(|v| amp * v).collect();
    RescaledField::new(GridField::new(grid, values, t.ln())?, t.ln(), e.clone())
}

/// As [`to_selfsimilar`], resampled onto a given y-grid by multilinear
/// interpolation.
pub fn to_selfsimilar_on(u: &GridField, e: &ExponentSet, grid: &Grid) -> Result<RescaledField> {
    Ok(to_selfsimilar(u, e)?.resample(grid))
}

/// `u(x) = t^{-β} w(x_i t^{α_i})` at time `t`, on the y-grid stretched by
/// `t^{-α_i}`.
pub fn from_selfsimilar(w: &RescaledField, t: f64) -> Result<GridField> {
    check_time(t)?;
    let e = &w.exponents;
    let factors: Vec<f64> = e.alpha().iter().map(|a| t.powf(-a)).collect();
    let grid = w.grid().scaled(&factors)?;
    let amp = t.powf(-e.beta());
    let values = w.field.values.iter().map(|v| amp * v).collect();
    GridField::new(grid, values, t)
}

/// As [`from_selfsimilar`], resampled onto a given x-grid.
pub fn from_selfsimilar_on(w: &RescaledField, t: f64, grid: &Grid) -> Result<GridField> {
    let u = from_selfsimilar(w, t)?;
    Ok(GridField::from_fn(grid.clone(), t, |x| u.interpolate(x)))
}

/// Work arrays for the rescaled operator on one grid.
pub(crate) struct FpStepper<'a> {
    e: &'a ExponentSet,
    grid: &'a Grid,
    powers: Vec<AbsPow>,
    pub rate: Vec<f64>,
    gmax: Vec<f64>,
}

impl<'a> FpStepper<'a> {
    pub fn new(e: &'a ExponentSet, grid: &'a Grid) -> Self {
        Self {
            e,
            grid,
            powers: stencil::powers_for(e.p()),
            rate: vec![0.0; grid.len()],
            gmax: vec![0.0; grid.dim()],
        }
    }

    /// Right-hand side of the rescaled equation: degenerate diffusion plus
    /// the drift `α_i y_i w`, upwinded on the sign of the face velocity.
    pub fn rates(&mut self, w: &[f64]) {
        self.rate.iter_mut().for_each(|r| *r = 0.0);
        for axis in 0..self.grid.dim() {
            let h = self.grid.spacing()[axis];
            let inv_h = 1.0 / h;
            let alpha = self.e.alpha()[axis];
            let y0 = -self.grid.extents()[axis] + 0.5 * h;
            let mut gm = 0.0f64;
            with_abs_pow!(self.powers[axis], pow => stencil::face_pass(
                self.grid, axis, w, &mut self.rate, |l, r, k| {
                    let g = (r - l) * inv_h;
                    let ag = g.abs();
                    if ag > gm {
                        gm = ag;
                    }
                    let v = alpha * (y0 + k as f64 * h);
                    let up = if v > 0.0 { l } else { r };
                    (pow(ag) * g - v * up) * inv_h
                }
            ));
            self.gmax[axis] = gm;
        }
    }

    /// `cfl / Σ_i (2 D_i / h_i² + c_i max|α_i y_i| / h_i)`, where `c_i = 1`
    /// for an inward drift and 2 otherwise.
    pub fn dtau(&self, cfl: f64) -> f64 {
        let mut rate = 0.0;
        for axis in 0..self.grid.dim() {
            let p = self.e.p()[axis];
            let h = self.grid.spacing()[axis];
            let alpha = self.e.alpha()[axis];
            let d = (p - 1.0) * self.powers[axis].eval(self.gmax[axis]);
            let vmax = alpha.abs() * (self.grid.extents()[axis] - 0.5 * h);
            let c = if alpha <= 0.0 { 1.0 } else { 2.0 };
            rate += 2.0 * d / (h * h) + c * vmax / h;
        }
        if rate > 0.0 {
            cfl / rate
        } else {
            f64::INFINITY
        }
    }

    pub fn apply(&self, w: &mut [f64], dtau: f64) -> Result<(f64, f64)> {
        let mut sum = 0.0;
        let mut max = f64::NEG_INFINITY;
        for (v, r) in w.iter_mut().zip(&self.rate) {
            *v += dtau * r;
            sum += *v;
            max = max.max(*v);
        }
        if !sum.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite value in the rescaled field after a step of {dtau}"
            )));
        }
        Ok((sum, max))
    }
}

/// Largest stable `dτ` for `w`, scaled by `cfl`.
pub fn stable_dtau(w: &RescaledField, cfl: f64) -> f64 {
    let mut s = FpStepper::new(&w.exponents, w.grid());
    s.rates(&w.field.values);
    s.dtau(cfl)
}

/// One forward-Euler step of the rescaled equation.
pub fn fp_step(w: &RescaledField, dtau: f64) -> Result<RescaledField> {
    if !(dtau > 0.0 && dtau.is_finite()) {
        return Err(Error::arg(format!("dtau must be positive, got {dtau}")));
    }
    let mut s = FpStepper::new(&w.exponents, w.grid());
    s.rates(&w.field.values);
    let limit = s.dtau(1.0);
    if dtau > limit * (1.0 + 1e-12) {
        return Err(Error::arg(format!(
            "dtau {dtau} exceeds the stability limit {limit}"
        )));
    }
    let mut next = w.clone();
    s.apply(&mut next.field.values, dtau)?;
    next.tau += dtau;
    next.field.time = next.tau;
    Ok(next)
}

/// `∫ |Σ_i ∂_i[|∂_i w|^{p_i-2} ∂_i w - α_i y_i w]| dy / ∫ w`, with the same
/// discretization as [`fp_step`]. Zero for the zero field.
pub fn steady_residual(w: &RescaledField) -> f64 {
    let mass = w.field.l1_norm();
    if mass == 0.0 {
        return 0.0;
    }
    let mut s = FpStepper::new(&w.exponents, w.grid());
    s.rates(&w.field.values);
    s.rate.iter().map(|r| r.abs()).sum::<f64>() * w.grid().cell_volume() / mass
}

/// Controls for [`evolve_to_stationary`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StationaryOptions {
    /// Stop once `‖w(τ+1) - w(τ)‖_1 < tol ‖w(τ)‖_1`.
    pub tol: f64,
    pub tau_max: f64,
    /// Upper bound on [`steady_residual`] for a converged verdict.
    pub residual_tol: f64,
    pub cfl: f64,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            tau_max: 100.0,
            residual_tol: 1e-4,
            cfl: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryVerdict {
    pub converged: bool,
    pub tau_reached: f64,
    /// Last relative L¹ change over a unit τ window.
    pub l1_change: f64,
    /// Ratio of the last two unit-window changes.
    pub l1_rate: f64,
    pub final_residual: f64,
    pub mass_drift: f64,
    pub steps: u64,
    pub reason: String,
}

/// Marches the rescaled equation from `w0` until the unit-τ L¹ change falls
/// below `opts.tol` or `opts.tau_max` is reached.
pub fn evolve_to_stationary(
    w0: &RescaledField,
    opts: &StationaryOptions,
) -> Result<(RescaledField, StationaryVerdict)> {
    if !(opts.tol > 0.0 && opts.tau_max > 0.0 && opts.cfl > 0.0 && opts.cfl < 1.0) {
        return Err(Error::arg(
            "tol and tau_max must be positive, cfl in (0, 1)",
        ));
    }
    let m0 = w0.mass();
    if !(m0 > 0.0) || w0.field.min() < 0.0 {
        return Err(Error::arg(
            "initial field must be nonnegative with positive mass",
        ));
    }
    let e = &w0.exponents;
    let grid = w0.grid();
    let cell = grid.cell_volume();
    let max0 = w0.field.max();
    let mut w = w0.clone();
    let mut window_start = w.field.values.clone();
    let mut s = FpStepper::new(e, grid);
    let tau0 = w.tau;
    let mut steps = 0u64;
    let mut drift: f64 = 0.0;
    let mut prev_change = f64::NAN;
    let mut change = f64::INFINITY;
    let mut rate = f64::NAN;
    let mut window = 0u32;

    while w.tau - tau0 < opts.tau_max {
        window += 1;
        let target = tau0 + (window as f64).min(opts.tau_max);
        while w.tau < target {
            s.rates(&w.field.values);
            let remaining = target - w.tau;
            let mut d = s.dtau(opts.cfl);
            let landing = d >= remaining * (1.0 - 1e-12);
            if landing {
                d = remaining;
            }
            let (sum, max) = s.apply(&mut w.field.values, d)?;
            w.tau = if landing { target } else { w.tau + d };
            steps += 1;
            drift = drift.max((sum * cell - m0).abs() / m0);
            if max > 10.0 * max0 {
                return Err(Error::Numerical(format!(
                    "rescaled field grew to {max:e}, over ten times its initial maximum, at tau = {}",
                    w.tau
                )));
            }
        }
        let diff: f64 = w
            .field
            .values
            .iter()
            .zip(&window_start)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
        let norm: f64 = w.field.values.iter().map(|v| v.abs()).sum();
        change = diff / norm;
        rate = change / prev_change;
        prev_change = change;
        window_start.copy_from_slice(&w.field.values);
        log::debug!("tau = {:.3}: unit-window L1 change {change:.3e}", w.tau);
        if change < opts.tol {
            break;
        }
    }
    w.field.time = w.tau;

    let residual = steady_residual(&w);
    let (converged, reason) = if change >= opts.tol {
        (
            false,
            format!(
                "tau_max {} reached with L1 change {change:.3e}",
                opts.tau_max
            ),
        )
    } else if residual >= opts.residual_tol {
        (
            false,
            format!(
                "L1 change settled but the steady residual {residual:.3e} exceeds {:.3e}",
                opts.residual_tol
            ),
        )
    } else {
        (true, "unit-window L1 change below tolerance".to_string())
    };
    Ok((
        w.clone(),
        StationaryVerdict {
            converged,
            tau_reached: w.tau,
            l1_change: change,
            l1_rate: rate,
            final_residual: residual,
            mass_drift: drift,
            steps,
            reason,
        },
    ))
}

/// Half-width of the support along each axis, for values above
/// `rel_threshold · max`.
pub fn support_extents(w: &RescaledField, rel_threshold: f64) -> Option<Vec<f64>> {
    w.field.support_box(rel_threshold).map(|b| b.half_width)
}
