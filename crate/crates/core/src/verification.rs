//! Measurable checks of the decay, propagation, Harnack and a-priori
//! estimates on computed or sampled trajectories.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_solutions::SpaceTimeFn;
use crate::grid::GridField;
use crate::pde_solver::{OutputRecord, Trajectory};
use crate::scaling_laws::{triple_norm, MassMeasure, NormKind, DEFAULT_LADDER_RATIO};

pub const DECAY_TOLERANCE: f64 = 0.10;
pub const SUPPORT_TOLERANCE: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped(String),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn is_skipped(&self) -> bool {
        matches!(self, Verdict::Skipped(_))
    }
}

/// One named comparison of a measured value against a target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub target: f64,
    pub measured: f64,
    /// Relative tolerance for exponent checks; for bounds, the allowed
    /// relative excess.
    pub tolerance: f64,
    pub verdict: Verdict,
    pub detail: String,
}

impl Check {
    /// Passes when `|measured - target| ≤ tol |target|`.
    pub fn relative(name: impl Into<String>, target: f64, measured: f64, tol: f64) -> Self {
        let ok = (measured - target).abs() <= tol * target.abs();
        Self {
            name: name.into(),
            target,
            measured,
            tolerance: tol,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            detail: format!(
                "relative error {:.3e}",
                (measured - target).abs() / target.abs()
            ),
        }
    }

    /// Passes when `measured ≤ bound (1 + slack)`.
    pub fn upper_bound(name: impl Into<String>, bound: f64, measured: f64, slack: f64) -> Self {
        let ok = measured <= bound * (1.0 + slack);
        Self {
            name: name.into(),
            target: bound,
            measured,
            tolerance: slack,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            detail: String::new(),
        }
    }

    pub fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            target: f64::NAN,
            measured: f64::NAN,
            tolerance: f64::NAN,
            verdict: Verdict::Skipped(reason.into()),
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    /// No check failed; skipped checks do not count against the report.
    pub fn all_passed(&self) -> bool {
        self.checks
            .iter()
            .all(|c| !matches!(c.verdict, Verdict::Fail))
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Least-squares line through `(ln t, ln value)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub samples: Vec<(f64, f64)>,
    pub exponent: f64,
    pub constant: f64,
    pub r_squared: f64,
}

impl PowerLawFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.constant * t.powf(self.exponent)
    }
}

/// Fits `value ≈ c t^a` on the samples with `t > 0` and `value > 0`.
pub fn fit_power_law(samples: &[(f64, f64)]) -> Result<PowerLawFit> {
    let used: Vec<(f64, f64)> = samples
        .iter()
        .cloned()
        .filter(|(t, v)| *t > 0.0 && *v > 0.0 && t.is_finite() && v.is_finite())
        .collect();
    if used.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "a power-law fit needs two positive samples, got {}",
            used.len()
        )));
    }
    let n = used.len() as f64;
    let lx: Vec<f64> = used.iter().map(|s| s.0.ln()).collect();
    let ly: Vec<f64> = used.iter().map(|s| s.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all samples share one time".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let sse: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - a * x - b).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(PowerLawFit {
        samples: used,
        exponent: a,
        constant: b.exp(),
        r_squared,
    })
}

/// Which outputs of a trajectory enter a fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct FitWindow {
    /// Leading fraction of outputs dropped as transient.
    pub discard_fraction: f64,
    pub min_samples: usize,
    /// Required ratio between the last and first fitted time.
    pub min_time_ratio: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self {
            discard_fraction: 0.2,
            min_samples: 5,
            min_time_ratio: 10.0,
        }
    }
}

impl FitWindow {
    fn select<'a>(&self, tr: &'a Trajectory) -> &'a [OutputRecord] {
        let skip = (tr.outputs.len() as f64 * self.discard_fraction).floor() as usize;
        &tr.outputs[skip.min(tr.outputs.len())..]
    }

    fn check(&self, samples: &[(f64, f64)]) -> Result<()> {
        if samples.len() < self.min_samples {
            return Err(Error::InsufficientData(format!(
                "{} samples after the transient, need {}",
                samples.len(),
                self.min_samples
            )));
        }
        let ratio = samples.last().unwrap().0 / samples[0].0;
        if !(ratio >= self.min_time_ratio * (1.0 - 1e-12)) {
            return Err(Error::InsufficientData(format!(
                "fitted times span a factor {ratio:.3}, need {}",
                self.min_time_ratio
            )));
        }
        Ok(())
    }
}

/// A fitted exponent next to the value theory predicts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub fit: PowerLawFit,
    pub target: f64,
}

impl ExponentFit {
    pub fn relative_error(&self) -> f64 {
        (self.fit.exponent - self.target).abs() / self.target.abs()
    }

    pub fn check(&self, name: impl Into<String>, tol: f64) -> Check {
        Check::relative(name, self.target, self.fit.exponent, tol).with_detail(format!(
            "r² = {:.6}, {} samples",
            self.fit.r_squared,
            self.fit.samples.len()
        ))
    }
}

/// Fits `max u(·, t)` against `t`; the target is `-N/λ`.
pub fn fit_decay(tr: &Trajectory, window: &FitWindow) -> Result<ExponentFit> {
    let samples: Vec<(f64, f64)> = window
        .select(tr)
        .iter()
        .filter(|o| o.time > 0.0 && o.max > 0.0)
        .map(|o| (o.time, o.max))
        .collect();
    window.check(&samples)?;
    Ok(ExponentFit {
        fit: fit_power_law(&samples)?,
        target: -tr.exponents.beta(),
    })
}

/// What is subtracted from the support half-width before fitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportOffset {
    /// `2 R_0` with `R_0` the initial half-width along the axis.
    TwiceInitialRadius,
    None,
}

/// Fits the support half-width along `axis` against `t`; the target is
/// `(N(p̄-p_j)+p̄)/(λ p_j)`. Outputs whose half-width does not exceed the
/// offset by two cells are left out.
pub fn fit_support_growth(
    tr: &Trajectory,
    axis: usize,
    offset: SupportOffset,
    window: &FitWindow,
) -> Result<ExponentFit> {
    let e = &tr.exponents;
    if axis >= e.dim() {
        return Err(Error::arg(format!("axis {axis} out of range")));
    }
    let off = match offset {
        SupportOffset::TwiceInitialRadius => 2.0 * tr.initial_half_width()[axis],
        SupportOffset::None => 0.0,
    };
    let mut samples = Vec::new();
    for o in window.select(tr) {
        let Some(b) = &o.support else { continue };
        if b.boundary_gap == 0 {
            return Err(Error::arg(format!(
                "support reached the boundary at t = {}; the fit would be biased",
                o.time
            )));
        }
        let h = o.field.grid.spacing()[axis];
        let hw = b.half_width[axis];
        if o.time > 0.0 && hw > off + 2.0 * h {
            samples.push((o.time, hw - off));
        }
    }
    window.check(&samples)?;
    Ok(ExponentFit {
        fit: fit_power_law(&samples)?,
        target: e.support_time_exponent(axis),
    })
}

/// The field at time `t`, linear in time between the stored records.
pub fn field_at(tr: &Trajectory, t: f64) -> Result<GridField> {
    let mut recs: Vec<&OutputRecord> = Vec::with_capacity(tr.outputs.len() + 1);
    recs.push(&tr.initial);
    recs.extend(tr.outputs.iter());
    let first = recs[0].time;
    let last = recs[recs.len() - 1].time;
    if !(t >= first && t <= last) {
        return Err(Error::arg(format!(
            "time {t} lies outside the recorded interval [{first}, {last}]"
        )));
    }
    let k = recs.partition_point(|r| r.time < t);
    if recs[k].time == t || k == 0 {
        return Ok(recs[k].field.clone());
    }
    let (a, b) = (recs[k - 1], recs[k]);
    let s = (t - a.time) / (b.time - a.time);
    let values = a
        .field
        .values
        .iter()
        .zip(&b.field.values)
        .map(|(x, y)| (1.0 - s) * x + s * y)
        .collect();
    GridField::new(a.field.grid.clone(), values, t)
}

/// Base point `(x_0, t_0)` of a Harnack check.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct HarnackPoint {
    pub x0: Vec<f64>,
    pub t0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnackCheck {
    pub point: HarnackPoint,
    pub u_value: f64,
    pub rho: f64,
    pub c_intrinsic: f64,
    /// `C ρ^p / u(x_0, t_0)^{p-2}`.
    pub theta: f64,
    /// Minimum of `u(·, t_0 + θ)` over the nodes strictly inside `B_ρ(x_0)`.
    pub inf_value: f64,
    /// `u(x_0, t_0) / inf`; infinite when the infimum vanishes.
    pub gamma_required: f64,
    /// Whether `Q_{4ρ}(θ)` lies inside the computed space-time domain.
    pub cylinder_ok: bool,
    pub verdict: Verdict,
}

/// Evaluates `u(x_0,t_0) ≤ γ inf_{B_ρ(x_0)} u(·, t_0+θ)` for every point and
/// every candidate `C`, reporting the smallest admissible `γ`.
pub fn check_harnack(
    tr: &Trajectory,
    points: &[HarnackPoint],
    rho: f64,
    c_grid: &[f64],
) -> Result<Vec<HarnackCheck>> {
    let p = tr
        .exponents
        .require_isotropic("the intrinsic Harnack estimate")?;
    if !(rho > 0.0) || c_grid.iter().any(|c| !(*c > 0.0)) {
        return Err(Error::arg("rho and every C must be positive"));
    }
    let grid = &tr.initial.field.grid;
    let t_first = tr.initial.time;
    let t_last = tr.outputs.last().map(|o| o.time).unwrap_or(t_first);
    let mut out = Vec::new();
    for pt in points {
        if pt.x0.len() != grid.dim() {
            return Err(Error::arg("Harnack point has the wrong dimension"));
        }
        let u0 = if pt.t0 >= t_first && pt.t0 <= t_last {
            field_at(tr, pt.t0)?.interpolate(&pt.x0)
        } else {
            f64::NAN
        };
        for &c in c_grid {
            let mut chk = HarnackCheck {
                point: pt.clone(),
                u_value: u0,
                rho,
                c_intrinsic: c,
                theta: f64::NAN,
                inf_value: f64::NAN,
                gamma_required: f64::NAN,
                cylinder_ok: false,
                verdict: Verdict::Pass,
            };
            if !(u0 > 0.0) {
                chk.verdict = Verdict::Skipped(if u0.is_nan() {
                    "t0 outside the recorded interval".into()
                } else {
                    "u(x0, t0) = 0".into()
                });
                out.push(chk);
                continue;
            }
            let theta = c * rho.powf(p) / u0.powf(p - 2.0);
            chk.theta = theta;
            let inside_space = pt
                .x0
                .iter()
                .zip(grid.extents())
                .all(|(x, l)| x - 4.0 * rho >= -l && x + 4.0 * rho <= *l);
            let inside_time = pt.t0 - 4.0 * theta >= t_first && pt.t0 + 4.0 * theta <= t_last;
            chk.cylinder_ok = inside_space && inside_time;
            if !chk.cylinder_ok {
                chk.verdict = Verdict::Skipped(
                    "the cylinder Q_4rho(theta) leaves the computed domain".into(),
                );
                out.push(chk);
                continue;
            }
            let later = field_at(tr, pt.t0 + theta)?;
            let mut inf = f64::INFINITY;
            later.grid.for_each_node(|k, x| {
                let d2: f64 = x.iter().zip(&pt.x0).map(|(a, b)| (a - b) * (a - b)).sum();
                if d2 < rho * rho {
                    inf = inf.min(later.values[k]);
                }
            });
            if inf == f64::INFINITY {
                chk.verdict = Verdict::Skipped("no grid node inside the ball".into());
                out.push(chk);
                continue;
            }
            chk.inf_value = inf;
            chk.gamma_required = if inf > 0.0 { u0 / inf } else { f64::INFINITY };
            if !chk.gamma_required.is_finite() {
                chk.verdict = Verdict::Fail;
            }
            out.push(chk);
        }
    }
    Ok(out)
}

/// A single `(C, γ)` pair that works at every checked point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnackConstants {
    pub c_intrinsic: f64,
    pub gamma: f64,
    pub points: usize,
}

/// For each candidate `C`, the smallest `γ` valid at all points; returns the
/// `C` with the smallest such `γ`. Points skipped for every `C` are ignored;
/// a `C` under which any other point is skipped is not eligible.
pub fn uniform_harnack_constants(checks: &[HarnackCheck]) -> Option<HarnackConstants> {
    let mut cs: Vec<f64> = checks.iter().map(|c| c.c_intrinsic).collect();
    cs.sort_by(f64::total_cmp);
    cs.dedup();
    let relevant = |pt: &HarnackPoint| {
        checks
            .iter()
            .any(|c| &c.point == pt && !c.verdict.is_skipped())
    };
    let mut best: Option<HarnackConstants> = None;
    for c in cs {
        let group: Vec<&HarnackCheck> = checks
            .iter()
            .filter(|k| k.c_intrinsic == c && relevant(&k.point))
            .collect();
        if group.is_empty() || group.iter().any(|k| k.verdict.is_skipped()) {
            continue;
        }
        let gamma = group.iter().map(|k| k.gamma_required).fold(0.0, f64::max);
        if gamma.is_finite() && best.as_ref().is_none_or(|b| gamma < b.gamma) {
            best = Some(HarnackConstants {
                c_intrinsic: c,
                gamma,
                points: group.len(),
            });
        }
    }
    best
}

/// Applies `(x, t, u) ↦ (L x, T t, K u)` to every record. For
/// `T K^{p-2} = L^p` this maps solutions to solutions.
pub fn scale_trajectory(tr: &Trajectory, k: f64, l: f64, t: f64) -> Result<Trajectory> {
    if !(k > 0.0 && l > 0.0 && t > 0.0) {
        return Err(Error::arg("scaling factors must be positive"));
    }
    let dim = tr.exponents.dim();
    let scale = |r: &OutputRecord| -> Result<GridField> {
        let grid = r.field.grid.scaled(&vec![l; dim])?;
        GridField::new(
            grid,
            r.field.values.iter().map(|v| k * v).collect(),
            r.time * t,
        )
    };
    let threshold = crate::pde_solver::DEFAULT_SUPPORT_THRESHOLD;
    let initial = scale(&tr.initial)?;
    let outputs = tr.outputs.iter().map(scale).collect::<Result<Vec<_>>>()?;
    Ok(Trajectory::from_fields(
        tr.exponents.clone(),
        initial,
        outputs,
        threshold,
    ))
}

/// Options for [`check_apriori_estimates`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct AprioriOptions {
    /// Relative excess over the fitted bound tolerated at later outputs.
    pub slack: f64,
    /// Leading fraction of outputs treated as transient; `C` is fitted at
    /// the first output after it.
    pub discard_fraction: f64,
    pub ladder_ratio: f64,
}

impl Default for AprioriOptions {
    fn default() -> Self {
        Self {
            slack: 0.05,
            discard_fraction: 0.2,
            ladder_ratio: DEFAULT_LADDER_RATIO,
        }
    }
}

fn max_in_set(f: &GridField, inside: impl Fn(&[f64]) -> bool) -> f64 {
    let mut m: f64 = 0.0;
    f.grid.for_each_node(|k, x| {
        if inside(x) {
            m = m.max(f.values[k].abs());
        }
    });
    m
}

/// Checks `|||u(t)|||_r ≤ C |||u_0|||_r` and the `L∞` bound at radius `r`
/// along the trajectory, with both constants fitted at the first output
/// after the transient. `u0` is the initial datum as a measure.
pub fn check_apriori_estimates(
    tr: &Trajectory,
    u0: &dyn MassMeasure,
    r: f64,
    opts: &AprioriOptions,
) -> Result<VerificationReport> {
    let e = &tr.exponents;
    let n = e.dim() as f64;
    let mut report = VerificationReport::default();
    let names = ["norm_bound", "sup_bound"];

    let limit = e.p_bar() * (1.0 + 1.0 / n);
    let worst = e.p()[e.dim() - 1];
    if worst > limit * (1.0 + 1e-12) {
        for name in names {
            report.push(Check::skipped(
                name,
                format!("max p_i = {worst} exceeds p_bar (1 + 1/N) = {limit}"),
            ));
        }
        return Ok(report);
    }
    if u0.has_negative_part() || tr.outputs.iter().any(|o| o.field.min() < 0.0) {
        for name in names {
            report.push(Check::skipped(
                name,
                "the estimates assume nonnegative solutions",
            ));
        }
        return Ok(report);
    }
    let kind = if e.is_isotropic() {
        NormKind::Isotropic
    } else {
        NormKind::Anisotropic
    };
    let norm0 = triple_norm(u0, r, kind, e, opts.ladder_ratio)?.value;
    if norm0 == 0.0 {
        report.push(Check::upper_bound(names[0], 0.0, 0.0, 0.0).with_detail("zero datum"));
        report.push(Check::upper_bound(names[1], 0.0, 0.0, 0.0).with_detail("zero datum"));
        return Ok(report);
    }
    // data on a bounded grid has vanishing growth-norm limit, so the
    // waiting time is infinite and every output time is admissible
    let (sup_weight, norm_power) = if e.is_isotropic() {
        let p = e.p()[0];
        (r.powf(p / (p - 2.0)), p / e.lambda())
    } else {
        (r.powf(e.p_bar() / n), e.p_bar() / e.lambda())
    };
    let in_set = |x: &[f64]| -> bool {
        match kind {
            NormKind::Isotropic => x.iter().map(|v| v * v).sum::<f64>() <= r * r,
            NormKind::Anisotropic => x
                .iter()
                .enumerate()
                .all(|(i, v)| v.abs() <= e.anisotropic_box_half_width(i, r)),
        }
    };

    let skip = (tr.outputs.len() as f64 * opts.discard_fraction).floor() as usize;
    let mut ratios: [Vec<(f64, f64)>; 2] = [Vec::new(), Vec::new()];
    for o in tr.outputs.iter().skip(skip) {
        if !(o.time > 0.0) {
            continue;
        }
        let lhs1 = triple_norm(&o.field, r, kind, e, opts.ladder_ratio)?.value;
        ratios[0].push((o.time, lhs1 / norm0));
        let lhs2 = max_in_set(&o.field, in_set);
        let rhs2 = sup_weight * o.time.powf(-e.beta()) * norm0.powf(norm_power);
        ratios[1].push((o.time, lhs2 / rhs2));
    }
    for (name, rs) in names.iter().zip(ratios) {
        if rs.len() < 2 {
            report.push(Check::skipped(
                *name,
                "fewer than two outputs after the transient",
            ));
            continue;
        }
        let c_fit = rs[0].1;
        let worst = rs[1..].iter().map(|s| s.1).fold(0.0, f64::max);
        report.push(
            Check::upper_bound(*name, c_fit, worst, opts.slack).with_detail(format!(
                "C fitted at t = {:.4e}; largest later ratio at {} outputs",
                rs[0].0,
                rs.len() - 1
            )),
        );
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorNorm {
    L1,
    Linf,
}

/// Discrete distance between a field and an exact solution at the field's
/// time; the L¹ norm is weighted by the cell volume.
pub fn error_vs_exact(numerical: &GridField, exact: &dyn SpaceTimeFn, norm: ErrorNorm) -> f64 {
    let t = numerical.time;
    let mut acc: f64 = 0.0;
    numerical.grid.for_each_node(|k, x| {
        let d = (numerical.values[k] - exact.eval(x, t)).abs();
        match norm {
            ErrorNorm::L1 => acc += d,
            ErrorNorm::Linf => acc = acc.max(d),
        }
    });
    match norm {
        ErrorNorm::L1 => acc * numerical.grid.cell_volume(),
        ErrorNorm::Linf => acc,
    }
}

/// Empirical order `ln(e_coarse / e_fine) / ln(h_coarse / h_fine)`.
pub fn observed_order(err_coarse: f64, err_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (err_coarse / err_fine).ln() / (h_coarse / h_fine).ln()
}
