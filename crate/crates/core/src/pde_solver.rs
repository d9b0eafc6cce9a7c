//! Explicit conservative solver for the Cauchy problem.
//!
//! Forward Euler in time, central differences in conservation form in space:
//!
//! ```text
//! u_k += dt Σ_i (F_{k+1/2} - F_{k-1/2}) / h_i,   F = |g|^{p_i-2} g,  g = Δ_i u / h_i
//! ```
//!
//! Outer faces carry no flux, so the discrete mass telescopes exactly. The
//! step is monotone in every stencil value under
//! `dt ≤ 1 / (2 Σ_i D_i / h_i²)` with `D_i = (p_i-1) max |g_i|^{p_i-2}`, which
//! gives the discrete comparison and maximum principles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_solutions::{Barenblatt, SeparableParams, SpaceTimeFn};
use crate::grid::{Grid, GridField, SupportBox};
use crate::scaling_laws::{support_radius, ExponentSet};
use crate::stencil::{self, AbsPow, AxisFaces};

pub const DEFAULT_CFL: f64 = 0.9;
pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-10;
/// Support closer than this many cells to the boundary triggers a warning.
pub const BOUNDARY_WARNING_CELLS: usize = 5;
const DEFAULT_MAX_STEPS: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialDatum {
    /// Cosine bump of total mass `mass` on the ball of radius `radius`
    /// (default ten times the coarsest spacing), standing in for `M δ`.
    DiracApprox {
        mass: f64,
        #[serde(default)]
        radius: Option<f64>,
    },
    /// The source solution sampled at `t_start > 0`.
    BarenblattSnapshot {
        t_start: f64,
    },
    /// The separable solution sampled at `t_start`; `kappa` defaults to the
    /// exact coefficients.
    SeparableSnapshot {
        t_blowup: Vec<f64>,
        #[serde(default)]
        kappa: Option<Vec<f64>>,
        #[serde(default)]
        t_start: f64,
    },
    /// Node values in lexicographic order.
    Custom {
        values: Vec<f64>,
        #[serde(default)]
        time: f64,
    },
    Zero,
}

impl InitialDatum {
    pub fn start_time(&self) -> f64 {
        match self {
            InitialDatum::BarenblattSnapshot { t_start }
            | InitialDatum::SeparableSnapshot { t_start, .. } => *t_start,
            InitialDatum::Custom { time, .. } => *time,
            _ => 0.0,
        }
    }
}

fn default_cfl() -> f64 {
    DEFAULT_CFL
}

fn default_threshold() -> f64 {
    DEFAULT_SUPPORT_THRESHOLD
}

/// Description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub exponents: ExponentSet,
    pub grid: Grid,
    pub initial: InitialDatum,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Times at which the field is recorded; `t_end` is always added.
    #[serde(default)]
    pub output_times: Vec<f64>,
    /// Step used while the field is constant; defaults to the time to the
    /// next output.
    #[serde(default)]
    pub dt_max: Option<f64>,
    #[serde(default = "default_threshold")]
    pub support_threshold: f64,
    #[serde(default)]
    pub max_steps: Option<u64>,
}

impl SimConfig {
    pub fn new(exponents: ExponentSet, grid: Grid, initial: InitialDatum, t_end: f64) -> Self {
        Self {
            exponents,
            grid,
            initial,
            t_end,
            cfl: DEFAULT_CFL,
            output_times: Vec::new(),
            dt_max: None,
            support_threshold: DEFAULT_SUPPORT_THRESHOLD,
            max_steps: None,
        }
    }

    /// `count` output times spaced geometrically from `first` to `t_end`.
    pub fn with_geometric_outputs(mut self, first: f64, count: usize) -> Self {
        self.output_times = geometric_times(first, self.t_end, count);
        self
    }

    /// Checks the configuration and returns the sorted output schedule,
    /// ending at `t_end`.
    pub fn validate(&self) -> Result<Vec<f64>> {
        if self.exponents.dim() != self.grid.dim() {
            return Err(Error::arg(format!(
                "exponents have dimension {} but the grid has {}",
                self.exponents.dim(),
                self.grid.dim()
            )));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::arg(format!(
                "cfl must lie in (0, 1), got {}",
                self.cfl
            )));
        }
        if !(self.support_threshold > 0.0 && self.support_threshold < 1.0) {
            return Err(Error::arg("support threshold must lie in (0, 1)"));
        }
        if let Some(d) = self.dt_max {
            if !(d > 0.0) {
                return Err(Error::arg("dt_max must be positive"));
            }
        }
        let t0 = self.initial.start_time();
        if !(self.t_end > 0.0 && self.t_end.is_finite() && self.t_end > t0) {
            return Err(Error::arg(format!(
                "t_end = {} must be positive and after the start time {t0}",
                self.t_end
            )));
        }
        let mut times = self.output_times.clone();
        if let Some(t) = times.iter().find(|t| !(**t > t0 && **t <= self.t_end)) {
            return Err(Error::arg(format!(
                "output time {t} lies outside ({t0}, {}]",
                self.t_end
            )));
        }
        times.push(self.t_end);
        times.sort_by(f64::total_cmp);
        times.dedup();
        Ok(times)
    }
}

/// `count` times from `first` to `last` with a constant ratio.
pub fn geometric_times(first: f64, last: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![last];
    }
    let r = (last / first).ln() / (count - 1) as f64;
    let mut t: Vec<f64> = (0..count).map(|k| first * (r * k as f64).exp()).collect();
    t[count - 1] = last;
    t
}

/// Samples the initial datum of `config` on its grid.
pub fn init_field(config: &SimConfig) -> Result<GridField> {
    let grid = config.grid.clone();
    let e = &config.exponents;
    let t0 = config.initial.start_time();
    match &config.initial {
        InitialDatum::DiracApprox { mass, radius } => {
            let rho = radius.unwrap_or(10.0 * grid.max_spacing());
            let mut f = cosine_bump(grid, *mass, rho)?;
            f.time = t0;
            Ok(f)
        }
        InitialDatum::BarenblattSnapshot { t_start } => {
            if !(*t_start > 0.0) {
                return Err(Error::arg("Barenblatt snapshot needs t_start > 0"));
            }
            let b = Barenblatt::new(e)?;
            Ok(GridField::from_fn(grid, t0, |x| b.value(x, *t_start)))
        }
        InitialDatum::SeparableSnapshot {
            t_blowup,
            kappa,
            t_start,
        } => {
            let params = match kappa {
                Some(k) => SeparableParams::new(k.clone(), t_blowup.clone(), e)?,
                None => SeparableParams::with_default_kappa(t_blowup.clone(), e)?,
            };
            if config.t_end >= params.blowup_time() {
                return Err(Error::arg(format!(
                    "t_end must precede the blow-up time {}",
                    params.blowup_time()
                )));
            }
            Ok(GridField::from_fn(grid, t0, |x| params.eval(x, *t_start)))
        }
        InitialDatum::Custom { values, time } => {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::arg("custom datum contains non-finite values"));
            }
            GridField::new(grid, values.clone(), *time)
        }
        InitialDatum::Zero => Ok(GridField::zeros(grid, t0)),
    }
}

/// `(1 + cos(π|x|/ρ))/2` on `|x| < ρ`, rescaled to discrete mass `mass`.
pub fn cosine_bump(grid: Grid, mass: f64, rho: f64) -> Result<GridField> {
    let h = grid.max_spacing();
    if !(mass >= 0.0 && mass.is_finite()) {
        return Err(Error::arg("bump mass must be nonnegative"));
    }
    if !(rho >= 2.0 * h) {
        return Err(Error::arg(format!(
            "bump radius {rho} is below two grid spacings ({})",
            2.0 * h
        )));
    }
    let mut f = GridField::from_fn(grid, 0.0, |x| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r < rho {
            0.5 * (1.0 + (std::f64::consts::PI * r / rho).cos())
        } else {
            0.0
        }
    });
    let m = f.mass();
    if !(m > 0.0) {
        return Err(Error::arg("bump does not cover any grid node"));
    }
    let scale = mass / m;
    f.values.iter_mut().for_each(|v| *v *= scale);
    Ok(f)
}

/// Fluxes `|g|^{p_i-2} g` on the faces normal to `axis`.
///
/// The result is laid out like the node array with `n_axis + 1` entries along
/// `axis`: entry `k` is the face between nodes `k-1` and `k`, and the two
/// outer faces are zero.
pub fn flux(u: &GridField, e: &ExponentSet, axis: usize) -> Result<Vec<f64>> {
    let grid = &u.grid;
    if axis >= grid.dim() || e.dim() != grid.dim() {
        return Err(Error::arg(
            "axis or exponent dimension does not match the grid",
        ));
    }
    let n = grid.nodes()[axis];
    let s = grid.strides()[axis];
    let outer = grid.len() / (n * s);
    let inv_h = 1.0 / grid.spacing()[axis];
    let pw = AbsPow::new(e.p()[axis] - 2.0);
    let mut out = vec![0.0; outer * (n + 1) * s];
    AxisFaces::new(grid, axis).for_each(|a, k| {
        let o = a / (n * s);
        let j = a % s;
        let g = (u.values[a + s] - u.values[a]) * inv_h;
        out[o * (n + 1) * s + (k + 1) * s + j] = stencil::degenerate_flux(pw, g);
    });
    Ok(out)
}

fn dt_from_gradients(grid: &Grid, e: &ExponentSet, gmax: &[f64], cfl: f64) -> Option<f64> {
    let mut rate = 0.0;
    for (axis, &g) in gmax.iter().enumerate() {
        let p = e.p()[axis];
        let h = grid.spacing()[axis];
        rate += (p - 1.0) * AbsPow::new(p - 2.0).eval(g) / (h * h);
    }
    (rate > 0.0).then(|| cfl * 0.5 / rate)
}

/// Largest stable step scaled by `cfl`, or `dt_max` for a constant field.
pub fn stable_dt(u: &GridField, e: &ExponentSet, cfl: f64, dt_max: f64) -> f64 {
    let mut s = Stepper::new(e, &u.grid);
    s.rates(&u.values);
    s.dt(cfl).unwrap_or(dt_max)
}

/// Diagnostics of a single step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepStats {
    pub dt: f64,
    /// `max_i (p_i-1) max |g_i|^{p_i-2}` before the step.
    pub max_diffusivity: f64,
    pub mass_before: f64,
    pub mass_after: f64,
    pub min_value: f64,
}

/// Advances `u` by `dt`, which must not exceed the stable step.
pub fn step(u: &GridField, e: &ExponentSet, dt: f64) -> Result<(GridField, StepStats)> {
    if e.dim() != u.grid.dim() {
        return Err(Error::arg("exponent dimension does not match the grid"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::arg(format!("time step must be positive, got {dt}")));
    }
    let mut s = Stepper::new(e, &u.grid);
    s.rates(&u.values);
    if let Some(limit) = s.dt(1.0) {
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::arg(format!(
                "time step {dt} exceeds the stability limit {limit}"
            )));
        }
    }
    let mass_before = u.mass();
    let max_diffusivity = s.max_diffusivity();
    let mut next = u.clone();
    let (sum, min_value) = s.apply(&mut next.values, dt)?;
    next.time += dt;
    let mass_after = sum * u.grid.cell_volume();
    Ok((
        next,
        StepStats {
            dt,
            max_diffusivity,
            mass_before,
            mass_after,
            min_value,
        },
    ))
}

/// Reusable work arrays for repeated steps on one grid.
pub(crate) struct Stepper<'a> {
    e: &'a ExponentSet,
    grid: &'a Grid,
    powers: Vec<AbsPow>,
    rate: Vec<f64>,
    gmax: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(e: &'a ExponentSet, grid: &'a Grid) -> Self {
        Self {
            e,
            grid,
            powers: stencil::powers_for(e.p()),
            rate: vec![0.0; grid.len()],
            gmax: vec![0.0; grid.dim()],
        }
    }

    /// Fills the right-hand side for `u` and the per-axis gradient maxima.
    pub fn rates(&mut self, u: &[f64]) {
        self.rate.iter_mut().for_each(|r| *r = 0.0);
        stencil::accumulate_diffusion(self.grid, &self.powers, u, &mut self.rate, &mut self.gmax);
    }

    pub fn dt(&self, cfl: f64) -> Option<f64> {
        dt_from_gradients(self.grid, self.e, &self.gmax, cfl)
    }

    pub fn max_diffusivity(&self) -> f64 {
        self.gmax
            .iter()
            .zip(self.e.p())
            .map(|(&g, &p)| (p - 1.0) * AbsPow::new(p - 2.0).eval(g))
            .fold(0.0, f64::max)
    }

    /// `u += dt · rate`; returns the new value sum and minimum.
    pub fn apply(&self, u: &mut [f64], dt: f64) -> Result<(f64, f64)> {
        let mut sum = 0.0;
        let mut min = f64::INFINITY;
        for (v, r) in u.iter_mut().zip(&self.rate) {
            *v += dt * r;
            sum += *v;
            min = min.min(*v);
        }
        if !sum.is_finite() {
            let bad = u.iter().position(|v| !v.is_finite()).unwrap_or(0);
            return Err(Error::Numerical(format!(
                "non-finite value at node {bad} after a step of {dt}"
            )));
        }
        Ok((sum, min))
    }
}

/// Step statistics aggregated between two outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentStats {
    pub steps: u64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub max_diffusivity: f64,
    /// Largest `|mass - initial mass| / initial mass` seen after any step.
    pub max_mass_drift: f64,
    pub min_value: f64,
}

impl SegmentStats {
    fn empty() -> Self {
        Self {
            steps: 0,
            dt_min: f64::INFINITY,
            dt_max: 0.0,
            max_diffusivity: 0.0,
            max_mass_drift: 0.0,
            min_value: f64::INFINITY,
        }
    }

    fn record(&mut self, dt: f64, diffusivity: f64, drift: f64, min: f64) {
        self.steps += 1;
        self.dt_min = self.dt_min.min(dt);
        self.dt_max = self.dt_max.max(dt);
        self.max_diffusivity = self.max_diffusivity.max(diffusivity);
        self.max_mass_drift = self.max_mass_drift.max(drift);
        self.min_value = self.min_value.min(min);
    }

    fn merge(&mut self, o: &SegmentStats) {
        self.steps += o.steps;
        self.dt_min = self.dt_min.min(o.dt_min);
        self.dt_max = self.dt_max.max(o.dt_max);
        self.max_diffusivity = self.max_diffusivity.max(o.max_diffusivity);
        self.max_mass_drift = self.max_mass_drift.max(o.max_mass_drift);
        self.min_value = self.min_value.min(o.min_value);
    }
}

/// The field and its summary at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputRecord {
    pub time: f64,
    pub field: GridField,
    pub mass: f64,
    pub max: f64,
    pub support: Option<SupportBox>,
    pub stats: SegmentStats,
}

impl OutputRecord {
    pub fn from_field(field: GridField, threshold: f64) -> Self {
        Self {
            time: field.time,
            mass: field.mass(),
            max: field.max(),
            support: field.support_box(threshold),
            stats: SegmentStats::empty(),
            field,
        }
    }
}

/// Recorded solution of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub exponents: ExponentSet,
    pub initial: OutputRecord,
    pub outputs: Vec<OutputRecord>,
    pub totals: SegmentStats,
    pub warnings: Vec<String>,
}

impl Trajectory {
    /// Wraps externally computed fields, e.g. exact solutions sampled on a
    /// grid, so the verification checks can consume them.
    pub fn from_fields(
        exponents: ExponentSet,
        initial: GridField,
        fields: Vec<GridField>,
        threshold: f64,
    ) -> Self {
        Self {
            exponents,
            initial: OutputRecord::from_field(initial, threshold),
            outputs: fields
                .into_iter()
                .map(|f| OutputRecord::from_field(f, threshold))
                .collect(),
            totals: SegmentStats::empty(),
            warnings: Vec::new(),
        }
    }

    /// Per-axis half-width of the initial support.
    pub fn initial_half_width(&self) -> Vec<f64> {
        match &self.initial.support {
            Some(b) => b.half_width.clone(),
            None => vec![0.0; self.exponents.dim()],
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.outputs.iter().map(|o| o.time).collect()
    }
}

/// Integrates the configured problem up to `t_end`.
pub fn run(config: &SimConfig) -> Result<Trajectory> {
    let times = config.validate()?;
    let e = &config.exponents;
    let mut u = init_field(config)?;
    let initial = OutputRecord::from_field(u.clone(), config.support_threshold);
    let mut warnings = Vec::new();

    let m0 = initial.mass;
    if m0 > 0.0 {
        let r0 = initial
            .support
            .as_ref()
            .map(|b| b.half_width.iter().cloned().fold(0.0, f64::max))
            .unwrap_or(0.0)
            .max(config.grid.max_spacing());
        let elapsed = config.t_end - config.initial.start_time();
        for axis in 0..e.dim() {
            let r = support_radius(e, axis, elapsed, r0, m0, 1.0)?;
            if r >= config.grid.extents()[axis] {
                warnings.push(format!(
                    "support bound {r:.4} on axis {axis} reaches the domain half-width {}",
                    config.grid.extents()[axis]
                ));
            }
        }
    }

    let max_steps = config.max_steps.unwrap_or(DEFAULT_MAX_STEPS);
    let mut stepper = Stepper::new(e, &config.grid);
    let mut outputs = Vec::with_capacity(times.len());
    let mut totals = SegmentStats::empty();
    let mut warned = false;

    for &t_out in &times {
        let mut seg = SegmentStats::empty();
        while u.time < t_out {
            stepper.rates(&u.values);
            let remaining = t_out - u.time;
            let dt_cap = config.dt_max.unwrap_or(remaining);
            let mut dt = stepper.dt(config.cfl).unwrap_or(dt_cap).min(dt_cap);
            let landing = dt >= remaining * (1.0 - 1e-12);
            if landing {
                dt = remaining;
            }
            if !(dt > 0.0) || dt < 1e-14 * t_out.abs().max(1e-300) {
                return Err(Error::Numerical(format!(
                    "time step collapsed to {dt:e} at t = {}",
                    u.time
                )));
            }
            let diffusivity = stepper.max_diffusivity();
            let (sum, min) = stepper.apply(&mut u.values, dt)?;
            u.time = if landing { t_out } else { u.time + dt };
            let mass = sum * config.grid.cell_volume();
            let drift = if m0 > 0.0 {
                (mass - m0).abs() / m0
            } else {
                mass.abs()
            };
            seg.record(dt, diffusivity, drift, min);
            if totals.steps + seg.steps > max_steps {
                return Err(Error::Numerical(format!(
                    "step limit {max_steps} reached at t = {}",
                    u.time
                )));
            }
        }
        let mut rec = OutputRecord::from_field(u.clone(), config.support_threshold);
        rec.stats = seg;
        totals.merge(&seg);
        if let Some(b) = &rec.support {
            if b.boundary_gap < BOUNDARY_WARNING_CELLS && !warned {
                warned = true;
                warnings.push(format!(
                    "support within {} cells of the boundary at t = {}",
                    b.boundary_gap, rec.time
                ));
                log::warn!("{}", warnings.last().unwrap());
            }
        }
        log::debug!(
            "t = {:.6e}: {} steps, mass {:.16e}, max {:.6e}",
            rec.time,
            seg.steps,
            rec.mass,
            rec.max
        );
        outputs.push(rec);
    }

    Ok(Trajectory {
        exponents: e.clone(),
        initial,
        outputs,
        totals,
        warnings,
    })
}
