//! The JSON run document: a `command` tag plus that command's section.

use serde::{Deserialize, Serialize};

use anisoflow::fokker_planck::StationaryOptions;
use anisoflow::verification::{AprioriOptions, ErrorNorm, FitWindow, HarnackPoint, SupportOffset};
use anisoflow::verification::{DECAY_TOLERANCE, SUPPORT_TOLERANCE};
use anisoflow::{ExponentSet, Grid, SimConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case", deny_unknown_fields)]
pub enum RunConfig {
    Exponents { exponents: ExponentSet },
    Exact { exact: ExactConfig },
    Simulate { simulate: SimConfig },
    Steady { steady: SteadyConfig },
    Rescale { rescale: RescaleConfig },
    Verify { verify: VerifyConfig },
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Exponents { .. } => "exponents",
            RunConfig::Exact { .. } => "exact",
            RunConfig::Simulate { .. } => "simulate",
            RunConfig::Steady { .. } => "steady",
            RunConfig::Rescale { .. } => "rescale",
            RunConfig::Verify { .. } => "verify",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactConfig {
    pub exponents: ExponentSet,
    pub grid: Grid,
    #[serde(default = "one")]
    pub t: f64,
    pub solution: ExactSolution,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExactSolution {
    Barenblatt,
    GeneralBarenblatt {
        k: f64,
        rho: f64,
        x_bar: Vec<f64>,
        t_bar: f64,
    },
    Separable {
        t_blowup: Vec<f64>,
        #[serde(default)]
        kappa: Option<Vec<f64>>,
    },
    /// Stationary profile of the rescaled equation with the given mass.
    StationaryProfile {
        mass: f64,
    },
    HeatKernel,
    /// `|C'|^{p-2}C' + ηC/λ` on `points` values of η across the support.
    ProfileResidual {
        #[serde(default = "default_points")]
        points: usize,
    },
}

fn default_points() -> usize {
    1000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SteadyConfig {
    pub exponents: ExponentSet,
    pub grid: Grid,
    pub initial: SteadyStart,
    #[serde(default)]
    pub options: StationaryOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SteadyStart {
    /// Cosine bump of the given mass and radius.
    Bump { mass: f64, radius: f64 },
    /// Isotropic profile with exponent `p̄` and the given mass.
    WarmStart { mass: f64 },
    /// A field CSV, resampled onto the configured grid.
    Field { path: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RescaleDirection {
    ToSelfsimilar,
    FromSelfsimilar,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RescaleConfig {
    pub exponents: ExponentSet,
    /// Field CSV to transform.
    pub input: String,
    /// Physical time `t` of the field (or the target time when mapping back).
    pub time: f64,
    pub direction: RescaleDirection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyConfig {
    #[serde(flatten)]
    pub target: VerifyTarget,
    pub source: TrajectorySource,
    #[serde(default)]
    pub window: FitWindow,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum VerifyTarget {
    Decay {
        #[serde(default = "decay_tolerance")]
        tolerance: f64,
    },
    Support {
        /// Defaults to every axis.
        #[serde(default)]
        axes: Option<Vec<usize>>,
        #[serde(default = "default_offset")]
        offset: SupportOffset,
        #[serde(default = "support_tolerance")]
        tolerance: f64,
    },
    Harnack {
        points: Vec<HarnackPoint>,
        rho: f64,
        c_grid: Vec<f64>,
    },
    Estimates {
        r: f64,
        /// Treat the datum as this point mass instead of the stored initial
        /// field.
        #[serde(default)]
        point_mass: Option<f64>,
        #[serde(default)]
        options: AprioriOptions,
    },
    #[serde(rename = "exact-error", alias = "exact_error")]
    ExactError {
        #[serde(default = "default_norm")]
        norm: ErrorNorm,
        #[serde(default = "exact_tolerance")]
        tolerance: f64,
    },
}

fn decay_tolerance() -> f64 {
    DECAY_TOLERANCE
}

fn support_tolerance() -> f64 {
    SUPPORT_TOLERANCE
}

fn default_offset() -> SupportOffset {
    SupportOffset::TwiceInitialRadius
}

fn default_norm() -> ErrorNorm {
    ErrorNorm::L1
}

fn exact_tolerance() -> f64 {
    0.05
}

/// Where the checked trajectory comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrajectorySource {
    Simulate {
        config: SimConfig,
    },
    /// The source solution sampled at `count` geometric times from
    /// `t_first` to `t_last`, with the initial record at `t_start`.
    ExactBarenblatt {
        exponents: ExponentSet,
        grid: Grid,
        t_start: f64,
        t_first: f64,
        t_last: f64,
        count: usize,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_command() {
        let docs = [
            r#"{"command":"exponents","exponents":{"p":[3,4]}}"#,
            r#"{"command":"exact","exact":{"exponents":{"p":[3]},"grid":{"extents":[5],"nodes":[101]},"solution":{"kind":"barenblatt"}}}"#,
            r#"{"command":"simulate","simulate":{"exponents":{"p":[3]},"grid":{"extents":[5],"nodes":[101]},"initial":{"kind":"zero"},"t_end":1}}"#,
            r#"{"command":"steady","steady":{"exponents":{"p":[3]},"grid":{"extents":[5],"nodes":[101]},"initial":{"kind":"bump","mass":1,"radius":1},"options":{"tau_max":5}}}"#,
            r#"{"command":"rescale","rescale":{"exponents":{"p":[3]},"input":"u.csv","time":2,"direction":"to_selfsimilar"}}"#,
            r#"{"command":"verify","verify":{"target":"exact-error","source":{"kind":"exact_barenblatt","exponents":{"p":[3]},"grid":{"extents":[5],"nodes":[101]},"t_start":0.5,"t_first":1,"t_last":10,"count":5}}}"#,
        ];
        for d in docs {
            let c: RunConfig = serde_json::from_str(d).unwrap();
            let back: RunConfig =
                serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
            assert_eq!(c.name(), back.name());
        }
        let c: RunConfig = serde_json::from_str(docs[3]).unwrap();
        let RunConfig::Steady { steady } = c else {
            panic!()
        };
        assert_eq!(steady.options.tau_max, 5.0);
        assert_eq!(steady.options.tol, StationaryOptions::default().tol);
    }

    #[test]
    fn rejects_bad_documents() {
        for d in [
            r#"{"command":"launch"}"#,
            r#"{"command":"exponents","exponents":{"p":[2]}}"#,
            r#"{"command":"exponents","exponents":{"p":[4,3]}}"#,
            r#"{"command":"exponents"}"#,
        ] {
            assert!(serde_json::from_str::<RunConfig>(d).is_err(), "{d}");
        }
    }
}
