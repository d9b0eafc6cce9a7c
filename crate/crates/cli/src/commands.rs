//! One function per subcommand. Each writes its data files into the output
//! directory and returns what it wrote.

use std::path::{Path, PathBuf};

use serde::Serialize;

use anisoflow::exact_solutions::{
    general_barenblatt, heat_kernel, separable_solution, zero_flux_residual, Barenblatt,
    BarenblattParams, SeparableParams, SpaceTimeFn, StationaryProfile,
};
use anisoflow::fokker_planck::{
    evolve_to_stationary, from_selfsimilar, support_extents, to_selfsimilar, RescaledField,
};
use anisoflow::pde_solver::{cosine_bump, geometric_times, run};
use anisoflow::scaling_laws::{check_boundedness_condition, MassMeasure, PointMass};
use anisoflow::verification::{
    check_apriori_estimates, check_harnack, error_vs_exact, fit_decay, fit_support_growth,
    uniform_harnack_constants, Check, ErrorNorm, ExponentFit, Verdict, VerificationReport,
};
use anisoflow::{ExponentSet, GridField, InitialDatum, Trajectory};

use crate::config::{
    ExactConfig, ExactSolution, RescaleConfig, RescaleDirection, SteadyConfig, SteadyStart,
    TrajectorySource, VerifyConfig, VerifyTarget,
};
use crate::csv_io;
use crate::error::{CliError, CliResult};
use crate::svg::loglog_plot;

/// Pointwise evaluator of a closed-form field at the configured time.
type PointEval = dyn Fn(&[f64]) -> anisoflow::Result<f64>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmittedFile {
    pub path: String,
    pub role: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub struct CheckSummary {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl CheckSummary {
    pub fn of(report: &VerificationReport) -> Self {
        let mut s = Self::default();
        for c in &report.checks {
            match c.verdict {
                Verdict::Pass => s.passed += 1,
                Verdict::Fail => s.failed += 1,
                Verdict::Skipped(_) => s.skipped += 1,
            }
        }
        s
    }
}

/// Output directory plus the record of everything written to it.
pub struct Sink {
    dir: PathBuf,
    pub files: Vec<EmittedFile>,
    pub summary: Option<CheckSummary>,
    pub warnings: Vec<String>,
    /// One-line human summary printed unless `--quiet`.
    pub message: String,
}

impl Sink {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            summary: None,
            warnings: Vec::new(),
            message: String::new(),
        }
    }

    fn record(&mut self, name: &str, role: &str) -> PathBuf {
        self.files.push(EmittedFile {
            path: name.to_string(),
            role: role.to_string(),
        });
        self.dir.join(name)
    }

    pub fn json(&mut self, name: &str, role: &str, value: &impl Serialize) -> CliResult<()> {
        let path = self.record(name, role);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }

    pub fn field(&mut self, name: &str, role: &str, f: &GridField) -> CliResult<()> {
        let path = self.record(name, role);
        csv_io::write_field(&path, f)
    }

    fn pairs(&mut self, name: &str, role: &str, rows: &[(f64, f64)]) -> CliResult<()> {
        let path = self.record(name, role);
        csv_io::write_pairs(&path, rows)
    }

    fn text(&mut self, name: &str, role: &str, body: &str) -> CliResult<()> {
        let path = self.record(name, role);
        std::fs::write(&path, body).map_err(|e| CliError::io(&path, e))
    }
}

#[derive(Serialize)]
struct ExponentsOut<'a> {
    exponents: &'a ExponentSet,
    support_time_exponents: Vec<f64>,
    support_mass_exponents: Vec<f64>,
    reaction_coefficient: f64,
    rescaling_contracts: bool,
    boundedness: anisoflow::scaling_laws::BoundednessReport,
    apriori_hypothesis: Hypothesis,
}

#[derive(Serialize)]
struct Hypothesis {
    /// `p̄ (1 + 1/N)`.
    limit: f64,
    holds: bool,
}

pub fn cmd_exponents(e: &ExponentSet, sink: &mut Sink) -> CliResult<()> {
    let n = e.dim() as f64;
    let limit = e.p_bar() * (1.0 + 1.0 / n);
    let out = ExponentsOut {
        exponents: e,
        support_time_exponents: (0..e.dim()).map(|j| e.support_time_exponent(j)).collect(),
        support_mass_exponents: (0..e.dim()).map(|j| e.support_mass_exponent(j)).collect(),
        reaction_coefficient: e.reaction_coefficient(),
        rescaling_contracts: e.rescaling_contracts(),
        boundedness: check_boundedness_condition(e),
        apriori_hypothesis: Hypothesis {
            limit,
            holds: e.p()[e.dim() - 1] <= limit,
        },
    };
    sink.json("exponents.json", "exponent set and condition checks", &out)?;
    sink.message = serde_json::to_string_pretty(&out)?;
    Ok(())
}

#[derive(Serialize)]
struct ExactHeader<'a> {
    solution: &'a ExactSolution,
    p: &'a [f64],
    grid: &'a anisoflow::Grid,
    t: f64,
    rows: usize,
    max_value: f64,
    min_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_abs_residual: Option<f64>,
}

pub fn cmd_exact(c: &ExactConfig, sink: &mut Sink) -> CliResult<()> {
    let e = &c.exponents;
    if c.grid.dim() != e.dim() {
        return Err(CliError::Validation(
            "grid and exponents differ in dimension".into(),
        ));
    }
    if let ExactSolution::ProfileResidual { points } = c.solution {
        if points < 2 {
            return Err(CliError::Validation(
                "a residual sweep needs at least 2 points".into(),
            ));
        }
        let radius = Barenblatt::new(e)?.profile_radius();
        let rows = (0..points)
            .map(|k| {
                let eta = radius * k as f64 / (points - 1) as f64;
                Ok((eta, zero_flux_residual(eta, e)?))
            })
            .collect::<anisoflow::Result<Vec<_>>>()?;
        let worst = rows.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
        sink.pairs("residual.csv", "zero-flux residual against eta", &rows)?;
        let h = ExactHeader {
            solution: &c.solution,
            p: e.p(),
            grid: &c.grid,
            t: c.t,
            rows: rows.len(),
            max_value: rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max),
            min_value: rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
            max_abs_residual: Some(worst),
        };
        sink.json("header.json", "parameters and summary", &h)?;
        sink.message =
            format!("profile residual: max |residual| = {worst:.3e} over {points} points");
        return Ok(());
    }

    let eval: Box<PointEval> = match &c.solution {
        ExactSolution::Barenblatt => {
            let b = Barenblatt::new(e)?;
            let t = c.t;
            Box::new(move |x| Ok(b.value(x, t)))
        }
        ExactSolution::GeneralBarenblatt {
            k,
            rho,
            x_bar,
            t_bar,
        } => {
            let params = BarenblattParams::new(*k, *rho, x_bar.clone(), *t_bar, e)?;
            let t = c.t;
            Box::new(move |x| general_barenblatt(&params, x, t))
        }
        ExactSolution::Separable { t_blowup, kappa } => {
            let params = match kappa {
                Some(k) => SeparableParams::new(k.clone(), t_blowup.clone(), e)?,
                None => SeparableParams::with_default_kappa(t_blowup.clone(), e)?,
            };
            let t = c.t;
            Box::new(move |x| separable_solution(&params, x, t))
        }
        ExactSolution::StationaryProfile { mass } => {
            let prof = StationaryProfile::with_mass(e, *mass)?;
            Box::new(move |y| Ok(prof.value(y)))
        }
        ExactSolution::HeatKernel => {
            let t = c.t;
            Box::new(move |x| heat_kernel(x, t))
        }
        ExactSolution::ProfileResidual { .. } => unreachable!(),
    };
    let mut values = Vec::with_capacity(c.grid.len());
    let mut first_err = None;
    c.grid.for_each_node(|_, x| match eval(x) {
        Ok(v) => values.push(v),
        Err(err) => {
            first_err.get_or_insert(err);
            values.push(f64::NAN);
        }
    });
    if let Some(err) = first_err {
        return Err(err.into());
    }
    let f = GridField::new(c.grid.clone(), values, c.t)?;
    sink.field("field.csv", "solution sampled on the grid", &f)?;
    let h = ExactHeader {
        solution: &c.solution,
        p: e.p(),
        grid: &c.grid,
        t: c.t,
        rows: f.grid.len(),
        max_value: f.max(),
        min_value: f.min(),
        max_abs_residual: None,
    };
    sink.json("header.json", "parameters and summary", &h)?;
    sink.message = format!("exact: {} rows, max value {:.6e}", f.grid.len(), f.max());
    Ok(())
}

#[derive(Serialize)]
struct TrajectoryOut<'a> {
    p: &'a [f64],
    grid: &'a anisoflow::Grid,
    records: Vec<RecordOut<'a>>,
    totals: &'a anisoflow::pde_solver::SegmentStats,
    warnings: &'a [String],
}

#[derive(Serialize)]
struct RecordOut<'a> {
    file: String,
    time: f64,
    mass: f64,
    max: f64,
    support: &'a Option<anisoflow::SupportBox>,
    steps: u64,
}

fn write_trajectory(tr: &Trajectory, sink: &mut Sink) -> CliResult<()> {
    let mut records = Vec::new();
    let all = std::iter::once(&tr.initial).chain(tr.outputs.iter());
    for (k, r) in all.enumerate() {
        let name = format!("u_{k:04}.csv");
        let role = if k == 0 {
            "initial field"
        } else {
            "field at an output time"
        };
        sink.field(&name, role, &r.field)?;
        records.push(RecordOut {
            file: name,
            time: r.time,
            mass: r.mass,
            max: r.max,
            support: &r.support,
            steps: r.stats.steps,
        });
    }
    let out = TrajectoryOut {
        p: tr.exponents.p(),
        grid: &tr.initial.field.grid,
        records,
        totals: &tr.totals,
        warnings: &tr.warnings,
    };
    sink.json(
        "trajectory.json",
        "per-output mass, maximum, support and step statistics",
        &out,
    )?;
    sink.warnings.extend(tr.warnings.iter().cloned());
    Ok(())
}

pub fn cmd_simulate(cfg: &anisoflow::SimConfig, sink: &mut Sink) -> CliResult<()> {
    let tr = run(cfg)?;
    write_trajectory(&tr, sink)?;
    sink.message = format!(
        "simulate: {} outputs up to t = {}, {} steps",
        tr.outputs.len(),
        cfg.t_end,
        tr.totals.steps
    );
    Ok(())
}

#[derive(Serialize)]
struct SteadyOut<'a> {
    verdict: &'a anisoflow::fokker_planck::StationaryVerdict,
    mass: f64,
    tau: f64,
    support_extents: Option<Vec<f64>>,
}

pub fn cmd_steady(c: &SteadyConfig, sink: &mut Sink, base: &Path) -> CliResult<()> {
    let e = &c.exponents;
    let w0 = match &c.initial {
        SteadyStart::Bump { mass, radius } => {
            RescaledField::new(cosine_bump(c.grid.clone(), *mass, *radius)?, 0.0, e.clone())?
        }
        SteadyStart::WarmStart { mass } => RescaledField::warm_start(c.grid.clone(), e, *mass)?,
        SteadyStart::Field { path } => {
            let f = csv_io::read_field(&base.join(path), 0.0)?;
            RescaledField::new(f, 0.0, e.clone())?.resample(&c.grid)
        }
    };
    let (w, verdict) = evolve_to_stationary(&w0, &c.options)?;
    sink.field("profile.csv", "final rescaled field", &w.field)?;
    let out = SteadyOut {
        verdict: &verdict,
        mass: w.mass(),
        tau: w.tau,
        support_extents: support_extents(&w, 1e-10),
    };
    sink.json("verdict.json", "stationarity verdict", &out)?;
    sink.message = format!(
        "steady: converged = {} at tau = {}, residual {:.3e}",
        verdict.converged, verdict.tau_reached, verdict.final_residual
    );
    Ok(())
}

#[derive(Serialize)]
struct RescaleOut {
    direction: RescaleDirection,
    time: f64,
    tau: f64,
    /// Per-axis factor applied to the input grid.
    grid_factors: Vec<f64>,
    /// Factor applied to the values.
    amplitude: f64,
}

pub fn cmd_rescale(c: &RescaleConfig, sink: &mut Sink, base: &Path) -> CliResult<()> {
    let e = &c.exponents;
    let input = csv_io::read_field(&base.join(&c.input), c.time)?;
    if input.grid.dim() != e.dim() {
        return Err(CliError::Validation(
            "field and exponents differ in dimension".into(),
        ));
    }
    let t = c.time;
    let (out, sign) = match c.direction {
        RescaleDirection::ToSelfsimilar => (to_selfsimilar(&input, e)?.field, 1.0),
        RescaleDirection::FromSelfsimilar => {
            let w = RescaledField::new(input.clone(), t.ln(), e.clone())?;
            (from_selfsimilar(&w, t)?, -1.0)
        }
    };
    sink.field("rescaled.csv", "transformed field", &out)?;
    let meta = RescaleOut {
        direction: c.direction,
        time: t,
        tau: t.ln(),
        grid_factors: e.alpha().iter().map(|a| t.powf(sign * a)).collect(),
        amplitude: t.powf(sign * e.beta()),
    };
    sink.json("rescale.json", "transformation parameters", &meta)?;
    sink.message = format!("rescale: {:?} at t = {t}", c.direction);
    Ok(())
}

fn build_trajectory(src: &TrajectorySource) -> CliResult<Trajectory> {
    match src {
        TrajectorySource::Simulate { config } => Ok(run(config)?),
        TrajectorySource::ExactBarenblatt {
            exponents,
            grid,
            t_start,
            t_first,
            t_last,
            count,
        } => {
            if !(*t_start > 0.0 && t_start <= t_first && t_first < t_last && *count >= 2) {
                return Err(CliError::Validation(
                    "need 0 < t_start <= t_first < t_last and count >= 2".into(),
                ));
            }
            if grid.dim() != exponents.dim() {
                return Err(CliError::Validation(
                    "grid and exponents differ in dimension".into(),
                ));
            }
            let b = Barenblatt::new(exponents)?;
            let sample = |t: f64| GridField::from_fn(grid.clone(), t, |x| b.value(x, t));
            let fields = geometric_times(*t_first, *t_last, *count)
                .into_iter()
                .map(sample)
                .collect();
            Ok(Trajectory::from_fields(
                exponents.clone(),
                sample(*t_start),
                fields,
                anisoflow::pde_solver::DEFAULT_SUPPORT_THRESHOLD,
            ))
        }
    }
}

fn exact_for(src: &TrajectorySource) -> CliResult<Box<dyn SpaceTimeFn>> {
    let none = || CliError::Validation("no exact solution is known for this source".into());
    match src {
        TrajectorySource::ExactBarenblatt { exponents, .. } => {
            Ok(Box::new(Barenblatt::new(exponents)?))
        }
        TrajectorySource::Simulate { config } => match &config.initial {
            InitialDatum::BarenblattSnapshot { .. } => {
                Ok(Box::new(Barenblatt::new(&config.exponents)?))
            }
            InitialDatum::SeparableSnapshot {
                t_blowup, kappa, ..
            } => {
                let e = &config.exponents;
                Ok(Box::new(match kappa {
                    Some(k) => SeparableParams::new(k.clone(), t_blowup.clone(), e)?,
                    None => SeparableParams::with_default_kappa(t_blowup.clone(), e)?,
                }))
            }
            InitialDatum::Zero => Ok(Box::new(|_: &[f64], _: f64| 0.0)),
            _ => Err(none()),
        },
    }
}

fn push_fit(
    sink: &mut Sink,
    report: &mut VerificationReport,
    fits: &mut Vec<(String, ExponentFit)>,
    name: String,
    y_label: &str,
    fit: ExponentFit,
    tol: f64,
) -> CliResult<()> {
    report.push(fit.check(name.clone(), tol));
    sink.text(
        &format!("{name}.svg"),
        "log-log plot of the fit",
        &loglog_plot(&name, y_label, &fit),
    )?;
    fits.push((name, fit));
    Ok(())
}

#[derive(Serialize)]
struct FitOut<'a> {
    name: &'a str,
    #[serde(flatten)]
    fit: &'a ExponentFit,
}

pub fn cmd_verify(c: &VerifyConfig, sink: &mut Sink) -> CliResult<()> {
    let tr = build_trajectory(&c.source)?;
    sink.warnings.extend(tr.warnings.iter().cloned());
    let e = &tr.exponents;
    let mut report = VerificationReport::default();
    let mut fits = Vec::new();
    match &c.target {
        VerifyTarget::Decay { tolerance } => {
            let fit = fit_decay(&tr, &c.window)?;
            push_fit(
                sink,
                &mut report,
                &mut fits,
                "decay".into(),
                "max u",
                fit,
                *tolerance,
            )?;
        }
        VerifyTarget::Support {
            axes,
            offset,
            tolerance,
        } => {
            let axes: Vec<usize> = axes.clone().unwrap_or_else(|| (0..e.dim()).collect());
            let mut fitted = Vec::new();
            for &j in &axes {
                let fit = fit_support_growth(&tr, j, *offset, &c.window)?;
                fitted.push((j, fit.fit.exponent));
                let label = format!("support half-width, axis {j}");
                push_fit(
                    sink,
                    &mut report,
                    &mut fits,
                    format!("support_axis{j}"),
                    &label,
                    fit,
                    *tolerance,
                )?;
            }
            // a strictly smaller exponent must spread strictly faster
            let mut ordered = true;
            for &(i, ai) in &fitted {
                for &(j, aj) in &fitted {
                    if e.p()[i] < e.p()[j] && ai <= aj {
                        ordered = false;
                    }
                }
            }
            if fitted.len() > 1 && e.p()[axes[0]] != e.p()[axes[axes.len() - 1]] {
                report.push(Check {
                    name: "support_ordering".into(),
                    target: f64::NAN,
                    measured: f64::NAN,
                    tolerance: 0.0,
                    verdict: if ordered {
                        Verdict::Pass
                    } else {
                        Verdict::Fail
                    },
                    detail: "axes with smaller p have larger support exponents".into(),
                });
            }
        }
        VerifyTarget::Harnack {
            points,
            rho,
            c_grid,
        } => {
            let checks = check_harnack(&tr, points, *rho, c_grid)?;
            let pair = uniform_harnack_constants(&checks);
            let check = match &pair {
                Some(k) => Check {
                    name: "harnack_uniform_pair".into(),
                    target: f64::NAN,
                    measured: k.gamma,
                    tolerance: 0.0,
                    verdict: Verdict::Pass,
                    detail: format!(
                        "C = {}, gamma = {} over {} points",
                        k.c_intrinsic, k.gamma, k.points
                    ),
                },
                None if checks.iter().all(|k| k.verdict.is_skipped()) => {
                    Check::skipped("harnack_uniform_pair", "every point was skipped")
                }
                None => Check {
                    name: "harnack_uniform_pair".into(),
                    target: f64::NAN,
                    measured: f64::INFINITY,
                    tolerance: 0.0,
                    verdict: Verdict::Fail,
                    detail: "no candidate C admits a finite gamma at every point".into(),
                },
            };
            report.push(check);
            #[derive(Serialize)]
            struct HarnackOut<'a> {
                checks: &'a [anisoflow::verification::HarnackCheck],
                uniform: &'a Option<anisoflow::verification::HarnackConstants>,
            }
            sink.json(
                "harnack.json",
                "per-point Harnack evaluations",
                &HarnackOut {
                    checks: &checks,
                    uniform: &pair,
                },
            )?;
        }
        VerifyTarget::Estimates {
            r,
            point_mass,
            options,
        } => {
            let pm;
            let u0: &dyn MassMeasure = match point_mass {
                Some(m) => {
                    pm = PointMass {
                        dim: e.dim(),
                        mass: *m,
                    };
                    &pm
                }
                None => &tr.initial.field,
            };
            report = check_apriori_estimates(&tr, u0, *r, options)?;
        }
        VerifyTarget::ExactError { norm, tolerance } => {
            let exact = exact_for(&c.source)?;
            let mut worst: f64 = 0.0;
            for o in &tr.outputs {
                let err = error_vs_exact(&o.field, exact.as_ref(), *norm);
                let zero = GridField::zeros(o.field.grid.clone(), o.time);
                let scale = error_vs_exact(&zero, exact.as_ref(), *norm);
                worst = worst.max(if scale > 0.0 { err / scale } else { err });
            }
            let label = match norm {
                ErrorNorm::L1 => "relative L1 error",
                ErrorNorm::Linf => "relative Linf error",
            };
            report.push(
                Check::upper_bound("exact_error", *tolerance, worst, 0.0)
                    .with_detail(format!("largest {label} over {} outputs", tr.outputs.len())),
            );
        }
    }
    sink.json("report.json", "verification report", &report)?;
    if !fits.is_empty() {
        let out: Vec<FitOut> = fits
            .iter()
            .map(|(n, f)| FitOut { name: n, fit: f })
            .collect();
        sink.json("fits.json", "power-law fits with their samples", &out)?;
    }
    let s = CheckSummary::of(&report);
    sink.summary = Some(s);
    sink.message = format!(
        "verify: {} passed, {} failed, {} skipped",
        s.passed, s.failed, s.skipped
    );
    Ok(())
}
