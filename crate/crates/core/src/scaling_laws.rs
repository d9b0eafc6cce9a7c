//! Scaling constants of the anisotropic p-Laplace evolution
//!
//! `u_t = Σ_i (|u_{x_i}|^{p_i-2} u_{x_i})_{x_i}`, `p_i > 2`.
//!
//! Everything that depends only on the exponent vector lives here: the
//! harmonic mean `p̄`, the scaling weight `λ = N(p̄-2)+p̄`, the decay rate
//! `β = N/λ`, the per-axis rescaling rates `α_i = β - (1+2β)/p_i`, the
//! Barenblatt constant `γ_p`, and the closed-form time and size bounds built
//! from them. All functions are pure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Harmonic mean `N / Σ 1/p_i` of an exponent vector.
pub fn harmonic_mean(p: &[f64]) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::InvalidExponents("exponent vector is empty".into()));
    }
    validate_degenerate(p)?;
    let inv_sum: f64 = p.iter().map(|pi| 1.0 / pi).sum();
    Ok(p.len() as f64 / inv_sum)
}

fn validate_degenerate(p: &[f64]) -> Result<()> {
    for (i, &pi) in p.iter().enumerate() {
        if !pi.is_finite() || pi <= 2.0 {
            return Err(Error::InvalidExponents(format!(
                "p_i must exceed 2 (p_{} = {pi})",
                i + 1
            )));
        }
    }
    Ok(())
}

/// All scaling constants derived from `(N, p)`.
///
/// Construct with [`ExponentSet::new`]; the fields are read-only so the
/// invariants established there cannot be broken afterwards. Deserializes
/// from `{"p": [...]}`; every derived field is recomputed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExponentSpec")]
pub struct ExponentSet {
    dim: usize,
    p: Vec<f64>,
    p_bar: f64,
    /// Sobolev exponent `N p̄ / (N - p̄)`, only meaningful when `p̄ < N`.
    p_star: Option<f64>,
    /// `N(p-2)+p`, present only when every `p_i` is equal.
    lambda_iso: Option<f64>,
    lambda: f64,
    /// `(1/λ)^{1/(p-1)} (p-2)/p`, isotropic case only.
    gamma_p: Option<f64>,
    beta: f64,
    alpha: Vec<f64>,
}

#[derive(Deserialize)]
struct ExponentSpec {
    p: Vec<f64>,
}

impl TryFrom<ExponentSpec> for ExponentSet {
    type Error = Error;
    fn try_from(s: ExponentSpec) -> Result<Self> {
        ExponentSet::new(s.p.len(), &s.p)
    }
}

impl ExponentSet {
    /// Builds the exponent set for dimension `dim` and exponents `p`.
    ///
    /// The exponents must all exceed 2 and be listed in non-decreasing order;
    /// axis `i` of every grid in this crate diffuses with exponent `p[i]`.
    pub fn new(dim: usize, p: &[f64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidExponents("dimension must be positive".into()));
        }
        if p.len() != dim {
            return Err(Error::InvalidExponents(format!(
                "expected {dim} exponents, got {}",
                p.len()
            )));
        }
        let p_bar = harmonic_mean(p)?;
        if p.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidExponents(
                "exponents must be ordered increasingly".into(),
            ));
        }
        let n = dim as f64;
        let lambda = n * (p_bar - 2.0) + p_bar;
        let beta = n / lambda;
        let alpha = p.iter().map(|&pi| beta - (1.0 + 2.0 * beta) / pi).collect();
        let p_star = (p_bar < n).then(|| n * p_bar / (n - p_bar));

        let isotropic = p.iter().all(|&pi| pi == p[0]);
        let (lambda_iso, gamma_p) = if isotropic {
            let pp = p[0];
            let l = n * (pp - 2.0) + pp;
            (
                Some(l),
                Some((1.0 / l).powf(1.0 / (pp - 1.0)) * (pp - 2.0) / pp),
            )
        } else {
            (None, None)
        };

        Ok(Self {
            dim,
            p: p.to_vec(),
            p_bar,
            p_star,
            lambda_iso,
            lambda,
            gamma_p,
            beta,
            alpha,
        })
    }

    /// Shorthand for `N` equal exponents.
    pub fn isotropic(dim: usize, p: f64) -> Result<Self> {
        Self::new(dim, &vec![p; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn p_bar(&self) -> f64 {
        self.p_bar
    }

    pub fn p_star(&self) -> Option<f64> {
        self.p_star
    }

    pub fn lambda_iso(&self) -> Option<f64> {
        self.lambda_iso
    }

    /// `N(p̄-2)+p̄`; equals `lambda_iso` in the isotropic case.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma_p(&self) -> Option<f64> {
        self.gamma_p
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn is_isotropic(&self) -> bool {
        self.lambda_iso.is_some()
    }

    /// The common exponent, or an error naming `what` needs it.
    pub fn require_isotropic(&self, what: &str) -> Result<f64> {
        if self.is_isotropic() {
            Ok(self.p[0])
        } else {
            Err(Error::InvalidExponents(format!(
                "{what} requires equal exponents, got {:?}",
                self.p
            )))
        }
    }

    pub(crate) fn isotropic_constants(&self, what: &str) -> Result<(f64, f64, f64)> {
        let p = self.require_isotropic(what)?;
        Ok((
            p,
            self.lambda,
            self.gamma_p.expect("isotropic set carries gamma_p"),
        ))
    }

    /// Exponent of `t` in the support bound along `axis`:
    /// `(N(p̄-p_j)+p̄)/(λ p_j)`.
    pub fn support_time_exponent(&self, axis: usize) -> f64 {
        let pj = self.p[axis];
        (self.dim as f64 * (self.p_bar - pj) + self.p_bar) / (self.lambda * pj)
    }

    /// Exponent of the initial mass in the support bound along `axis`.
    pub fn support_mass_exponent(&self, axis: usize) -> f64 {
        let pj = self.p[axis];
        (self.p_bar / pj) * (pj - 2.0) / self.lambda
    }

    /// True when every `α_i < 0`, i.e. `p_i < p̄ (1 + 1/N)` on every axis.
    /// Only then do the rescaled coordinates `y_i = x_i t^{α_i}` shrink the
    /// spreading support onto a fixed region.
    pub fn rescaling_contracts(&self) -> bool {
        self.alpha.iter().all(|&a| a < 0.0)
    }

    /// `β + Σ α_i`, the coefficient of the zeroth-order term of the rescaled
    /// equation. Zero (to round-off) for the decay rate `β = N/λ`.
    pub fn reaction_coefficient(&self) -> f64 {
        self.beta + self.alpha.iter().sum::<f64>()
    }

    /// Half-width along `axis` of the anisotropic box of size `rho` used by
    /// the anisotropic growth norm.
    pub fn anisotropic_box_half_width(&self, axis: usize, rho: f64) -> f64 {
        let pi = self.p[axis];
        let expo = self.p_bar * (pi - 2.0) / (pi * (self.p_bar - 2.0));
        0.5 * rho.powf(expo)
    }
}

/// Outcome of the boundedness condition `p̄ < N`, `max p_i < p̄*`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundednessReport {
    pub holds: bool,
    pub harmonic_mean_below_dimension: bool,
    pub max_exponent_below_sobolev: bool,
    pub failures: Vec<String>,
}

pub fn check_boundedness_condition(e: &ExponentSet) -> BoundednessReport {
    let mut failures = Vec::new();
    let first = e.p_bar < e.dim as f64;
    if !first {
        failures.push(format!(
            "harmonic mean p_bar = {} is not below the dimension N = {}",
            e.p_bar, e.dim
        ));
    }
    let p_max = e.p[e.dim - 1];
    let second = match e.p_star {
        Some(ps) => {
            let ok = p_max < ps;
            if !ok {
                failures.push(format!(
                    "max p_i = {p_max} is not below the Sobolev exponent p_bar* = {ps}"
                ));
            }
            ok
        }
        None => {
            failures.push("p_bar* is undefined because p_bar >= N".into());
            false
        }
    };
    BoundednessReport {
        holds: first && second,
        harmonic_mean_below_dimension: first,
        max_exponent_below_sobolev: second,
        failures,
    }
}

/// Upper bound on the support half-width along `axis`:
/// `2 R0 + C t^{(N(p̄-p_j)+p̄)/(λ p_j)} ‖u0‖_1^{(p̄/p_j)(p_j-2)/λ}`.
pub fn support_radius(
    e: &ExponentSet,
    axis: usize,
    t: f64,
    r0: f64,
    mass1: f64,
    c: f64,
) -> Result<f64> {
    if axis >= e.dim {
        return Err(Error::arg(format!(
            "axis {axis} out of range for N = {}",
            e.dim
        )));
    }
    if !(t >= 0.0) || !(r0 > 0.0) || !(mass1 > 0.0) || !(c > 0.0) {
        return Err(Error::arg(
            "support_radius needs t >= 0 and positive R0, mass and constant",
        ));
    }
    let growth = if t == 0.0 {
        0.0
    } else {
        c * t.powf(e.support_time_exponent(axis)) * mass1.powf(e.support_mass_exponent(axis))
    };
    Ok(2.0 * r0 + growth)
}

/// `C t^{-N/λ} ‖u0‖_1^{p̄/λ}`.
pub fn decay_bound(e: &ExponentSet, t: f64, mass1: f64, c: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::arg(format!("decay bound needs t > 0, got {t}")));
    }
    if !(mass1 >= 0.0) {
        return Err(Error::arg("mass must be nonnegative"));
    }
    Ok(c * t.powf(-e.beta) * mass1.powf(e.p_bar / e.lambda))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// Euclidean balls weighted by `ρ^{-λ/(p-2)}`.
    Isotropic,
    /// Anisotropic boxes weighted by `ρ^{-λ/N}`.
    Anisotropic,
}

/// Something that can report how much (absolute) mass lies inside balls and
/// boxes centred at the origin.
pub trait MassMeasure {
    fn dim(&self) -> usize;
    /// `∫_{|x| <= rho} |f|`.
    fn mass_in_ball(&self, rho: f64) -> f64;
    /// `∫_{|x_i| <= half_widths[i]} |f|`.
    fn mass_in_box(&self, half_widths: &[f64]) -> f64;
    /// Half-extents of the region the measure is known on, `None` for a
    /// measure on all of `R^N` with nothing beyond its atoms.
    fn domain_half_extents(&self) -> Option<Vec<f64>>;
    /// True if some value is negative.
    fn has_negative_part(&self) -> bool {
        false
    }
}

/// `M δ_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMass {
    pub dim: usize,
    pub mass: f64,
}

impl MassMeasure for PointMass {
    fn dim(&self) -> usize {
        self.dim
    }
    fn mass_in_ball(&self, _rho: f64) -> f64 {
        self.mass.abs()
    }
    fn mass_in_box(&self, _half_widths: &[f64]) -> f64 {
        self.mass.abs()
    }
    fn domain_half_extents(&self) -> Option<Vec<f64>> {
        None
    }
    fn has_negative_part(&self) -> bool {
        self.mass < 0.0
    }
}

/// Value of a growth norm together with the radii it was maximized over.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthNorm {
    pub kind: NormKind,
    pub r: f64,
    pub value: f64,
    pub argmax_rho: f64,
    pub ladder: Vec<f64>,
}

pub const DEFAULT_LADDER_RATIO: f64 = 1.25;
const MAX_LADDER_LEN: usize = 4096;

/// Growth norm `sup_{ρ >= r} w(ρ) ∫_{B_ρ} |f|`, with the supremum taken over
/// the geometric ladder `ρ = r q^k` until the sets cover the domain.
pub fn triple_norm<M: MassMeasure + ?Sized>(
    f: &M,
    r: f64,
    kind: NormKind,
    e: &ExponentSet,
    ladder_ratio: f64,
) -> Result<GrowthNorm> {
    if !(r > 0.0) {
        return Err(Error::arg(format!("norm radius must be positive, got {r}")));
    }
    if !(ladder_ratio > 1.0) {
        return Err(Error::arg("ladder ratio must exceed 1"));
    }
    if f.dim() != e.dim {
        return Err(Error::arg(
            "measure dimension does not match the exponent set",
        ));
    }
    let weight_exponent = match kind {
        NormKind::Isotropic => {
            let (p, lambda, _) = e.isotropic_constants("the isotropic growth norm")?;
            lambda / (p - 2.0)
        }
        NormKind::Anisotropic => {
            if f.has_negative_part() {
                return Err(Error::arg(
                    "the anisotropic growth norm needs nonnegative data",
                ));
            }
            e.lambda / e.dim as f64
        }
    };

    let covers = |rho: f64, ext: &[f64]| -> bool {
        match kind {
            NormKind::Isotropic => rho >= ext.iter().map(|l| l * l).sum::<f64>().sqrt(),
            NormKind::Anisotropic => ext
                .iter()
                .enumerate()
                .all(|(i, &l)| e.anisotropic_box_half_width(i, rho) >= l),
        }
    };
    let extent = f.domain_half_extents();
    if let Some(ext) = &extent {
        if covers(r, ext) {
            return Err(Error::arg(format!(
                "domain is smaller than the norm radius r = {r}"
            )));
        }
    }

    let mut ladder = Vec::new();
    let mut rho = r;
    loop {
        ladder.push(rho);
        let done = match &extent {
            Some(ext) => covers(rho, ext),
            None => true,
        };
        if done || ladder.len() >= MAX_LADDER_LEN {
            break;
        }
        rho *= ladder_ratio;
    }

    let mut best = (f64::NEG_INFINITY, r);
    for &rho in &ladder {
        let mass = match kind {
            NormKind::Isotropic => f.mass_in_ball(rho),
            NormKind::Anisotropic => {
                let hw: Vec<f64> = (0..e.dim)
                    .map(|i| e.anisotropic_box_half_width(i, rho))
                    .collect();
                f.mass_in_box(&hw)
            }
        };
        let v = rho.powf(-weight_exponent) * mass;
        if v > best.0 {
            best = (v, rho);
        }
    }
    Ok(GrowthNorm {
        kind,
        r,
        value: best.0,
        argmax_rho: best.1,
        ladder,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MassRegime {
    VanishingMass,
    LargeMass,
    SmallMass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaitingTime {
    pub value: f64,
    pub regime: MassRegime,
    pub gamma_threshold: f64,
}

pub const DEFAULT_GAMMA_THRESHOLD: f64 = 1.0;

fn waiting_time_exponent(e: &ExponentSet, pj: f64) -> f64 {
    let n = e.dim as f64;
    (n * (e.p_bar - pj) + e.p_bar) / (e.p_bar * (pj - 2.0))
}

// The small-mass branch is printed without an explicit power in the source;
// it is read as `(M/γ)^{exponent}` like the large-mass branch.
fn small_mass_branch(ratio: f64, e: &ExponentSet) -> f64 {
    ratio.powf(waiting_time_exponent(e, e.p[0]))
}

fn large_mass_branch(ratio: f64, e: &ExponentSet) -> f64 {
    ratio.powf(waiting_time_exponent(e, e.p[e.dim - 1]))
}

/// Lifetime `T_*` over which the a-priori estimates hold, given the limit
/// `M_∞` of the anisotropic growth norm.
pub fn waiting_time(m_inf: f64, gamma: f64, e: &ExponentSet) -> Result<WaitingTime> {
    if !(m_inf >= 0.0) || !(gamma > 0.0) {
        return Err(Error::arg("waiting time needs M_inf >= 0 and gamma > 0"));
    }
    let (value, regime) = if m_inf == 0.0 {
        (f64::INFINITY, MassRegime::VanishingMass)
    } else if m_inf >= gamma {
        (large_mass_branch(m_inf / gamma, e), MassRegime::LargeMass)
    } else {
        (small_mass_branch(m_inf / gamma, e), MassRegime::SmallMass)
    };
    Ok(WaitingTime {
        value,
        regime,
        gamma_threshold: gamma,
    })
}

/// Existence time `C0 M_∞^{2-p}` for isotropic measure data, infinite when
/// the growth norm vanishes at infinity.
pub fn existence_time_isotropic(m_inf: f64, e: &ExponentSet, c0: f64) -> Result<f64> {
    let p = e.require_isotropic("existence_time_isotropic")?;
    if !(m_inf >= 0.0) || !(c0 > 0.0) {
        return Err(Error::arg("existence time needs M_inf >= 0 and C0 > 0"));
    }
    if m_inf == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(c0 * m_inf.powf(2.0 - p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn harmonic_mean_examples() {
        assert_relative_eq!(harmonic_mean(&[3.0, 3.0]).unwrap(), 3.0, epsilon = 1e-15);
        assert_relative_eq!(
            harmonic_mean(&[3.0, 4.0, 6.0]).unwrap(),
            4.0,
            epsilon = 1e-14
        );
        assert_relative_eq!(harmonic_mean(&[2.5, 10.0]).unwrap(), 4.0, epsilon = 1e-14);
    }

    #[test]
    fn harmonic_mean_rejects_bad_input() {
        assert!(harmonic_mean(&[]).is_err());
        let err = harmonic_mean(&[3.0, 2.0]).unwrap_err();
        assert!(err.to_string().contains("p_i must exceed 2"));
    }

    #[test]
    fn isotropic_planar_constants() {
        let e = ExponentSet::new(2, &[3.0, 3.0]).unwrap();
        assert_relative_eq!(e.lambda(), 5.0);
        assert_eq!(e.lambda_iso(), Some(5.0));
        assert_relative_eq!(e.beta(), 0.4);
        for &a in e.alpha() {
            assert_relative_eq!(a, -0.2, epsilon = 1e-15);
        }
        assert_relative_eq!(e.gamma_p().unwrap(), 0.2f64.sqrt() / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn one_dimensional_gamma() {
        let e = ExponentSet::isotropic(1, 3.0).unwrap();
        assert_relative_eq!(e.lambda(), 4.0);
        assert_relative_eq!(e.gamma_p().unwrap(), 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn sobolev_exponent_present_only_below_dimension() {
        let e = ExponentSet::isotropic(6, 4.0).unwrap();
        assert_relative_eq!(e.p_star().unwrap(), 12.0, epsilon = 1e-12);
        assert!(ExponentSet::isotropic(2, 3.0).unwrap().p_star().is_none());
    }

    #[test]
    fn rejects_mismatched_or_unordered() {
        assert!(ExponentSet::new(2, &[3.0]).is_err());
        assert!(ExponentSet::new(2, &[4.0, 3.0]).is_err());
        assert!(ExponentSet::new(1, &[2.0]).is_err());
        assert!(ExponentSet::new(0, &[]).is_err());
    }

    #[test]
    fn anisotropic_constants() {
        let e = ExponentSet::new(2, &[3.0, 4.0]).unwrap();
        assert_relative_eq!(e.p_bar(), 24.0 / 7.0, epsilon = 1e-14);
        assert_relative_eq!(e.lambda(), 44.0 / 7.0, epsilon = 1e-14);
        assert_relative_eq!(e.beta(), 7.0 / 22.0, epsilon = 1e-14);
        assert_relative_eq!(e.alpha()[0], -5.0 / 22.0, epsilon = 1e-14);
        assert_relative_eq!(e.alpha()[1], -1.0 / 11.0, epsilon = 1e-14);
        assert!(e.lambda_iso().is_none() && e.gamma_p().is_none());
        assert!(e.reaction_coefficient().abs() < 1e-14);
    }

    #[test]
    fn boundedness_examples() {
        let r = check_boundedness_condition(&ExponentSet::isotropic(3, 3.0).unwrap());
        assert!(!r.holds && !r.harmonic_mean_below_dimension);

        let r = check_boundedness_condition(&ExponentSet::isotropic(4, 3.0).unwrap());
        assert!(r.holds && r.failures.is_empty());

        // p̄ = 6/(5/4 + 1/13) ≈ 4.52 and p̄* ≈ 18.35 > 13: both hold.
        let e = ExponentSet::new(6, &[4.0, 4.0, 4.0, 4.0, 4.0, 13.0]).unwrap();
        let pb = 6.0 / (5.0 / 4.0 + 1.0 / 13.0);
        let ps = 6.0 * pb / (6.0 - pb);
        assert!(pb < 6.0 && 13.0 < ps);
        assert!(check_boundedness_condition(&e).holds);

        // p̄ ≈ 3.55 < 6 but p̄* ≈ 8.68 <= 40.
        let e = ExponentSet::new(6, &[3.0, 3.0, 3.0, 3.0, 3.0, 40.0]).unwrap();
        let r = check_boundedness_condition(&e);
        assert!(!r.holds && r.harmonic_mean_below_dimension && !r.max_exponent_below_sobolev);
        assert!(r.failures[0].contains("Sobolev"));
    }

    #[test]
    fn support_radius_examples() {
        let e = ExponentSet::isotropic(2, 3.0).unwrap();
        assert_relative_eq!(
            e.support_time_exponent(0),
            1.0 / e.lambda(),
            epsilon = 1e-15
        );
        assert_eq!(support_radius(&e, 1, 0.0, 0.3, 2.0, 1.0).unwrap(), 0.6);

        let e = ExponentSet::new(2, &[3.0, 4.0]).unwrap();
        let (a, b) = (e.support_time_exponent(0), e.support_time_exponent(1));
        assert_relative_eq!(a, 5.0 / 22.0, epsilon = 1e-14);
        assert_relative_eq!(b, 1.0 / 11.0, epsilon = 1e-14);
        assert!(a > b);
        // the support rates coincide with -α_j
        assert_relative_eq!(a, -e.alpha()[0], epsilon = 1e-14);
        assert!(support_radius(&e, 2, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(support_radius(&e, 0, -1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn decay_bound_examples() {
        let e = ExponentSet::isotropic(1, 3.0).unwrap();
        assert_relative_eq!(decay_bound(&e, 1.0, 1.0, 1.0).unwrap(), 1.0);
        let b1 = decay_bound(&e, 1.5, 0.7, 2.0).unwrap();
        let b4 = decay_bound(&e, 6.0, 0.7, 2.0).unwrap();
        assert_relative_eq!(b4 / b1, 4f64.powf(-e.beta()), epsilon = 1e-14);
        let m2 = decay_bound(&e, 1.5, 1.4, 2.0).unwrap();
        assert_relative_eq!(m2 / b1, 2f64.powf(e.p_bar() / e.lambda()), epsilon = 1e-14);
        assert!(decay_bound(&e, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn point_mass_norms() {
        let e = ExponentSet::isotropic(2, 3.0).unwrap();
        let m = PointMass { dim: 2, mass: 2.5 };
        let iso = triple_norm(&m, 0.5, NormKind::Isotropic, &e, 1.25).unwrap();
        assert_relative_eq!(iso.value, 2.5 * 0.5f64.powf(-5.0), epsilon = 1e-12);
        let an = triple_norm(&m, 0.5, NormKind::Anisotropic, &e, 1.25).unwrap();
        assert_relative_eq!(an.value, 2.5 * 0.5f64.powf(-2.5), epsilon = 1e-12);

        let ae = ExponentSet::new(2, &[3.0, 4.0]).unwrap();
        assert!(triple_norm(&m, 0.5, NormKind::Isotropic, &ae, 1.25).is_err());
        assert!(triple_norm(&m, 0.0, NormKind::Anisotropic, &ae, 1.25).is_err());
    }

    #[test]
    fn waiting_time_examples() {
        let e = ExponentSet::new(2, &[3.0, 4.0]).unwrap();
        let w = waiting_time(0.0, 1.0, &e).unwrap();
        assert!(w.value.is_infinite() && w.regime == MassRegime::VanishingMass);
        let w = waiting_time(1.0, 1.0, &e).unwrap();
        assert_eq!(w.regime, MassRegime::LargeMass);
        assert_relative_eq!(w.value, 1.0);
        let w = waiting_time(0.5, 1.0, &e).unwrap();
        assert_eq!(w.regime, MassRegime::SmallMass);
        assert_relative_eq!(
            w.value,
            0.5f64.powf(waiting_time_exponent(&e, 3.0)),
            epsilon = 1e-14
        );

        // isotropic: both branch exponents equal 1/(p-2)
        let iso = ExponentSet::isotropic(3, 3.5).unwrap();
        let lo = waiting_time_exponent(&iso, iso.p()[0]);
        let hi = waiting_time_exponent(&iso, iso.p()[2]);
        assert_relative_eq!(lo, hi);
        assert_relative_eq!(lo, 1.0 / 1.5, epsilon = 1e-14);
    }

    #[test]
    fn existence_time_examples() {
        let e = ExponentSet::isotropic(1, 3.0).unwrap();
        assert!(existence_time_isotropic(0.0, &e, 1.0)
            .unwrap()
            .is_infinite());
        assert_relative_eq!(existence_time_isotropic(1.0, &e, 1.0).unwrap(), 1.0);
        assert_relative_eq!(existence_time_isotropic(2.0, &e, 1.0).unwrap(), 0.5);
        let ae = ExponentSet::new(2, &[3.0, 4.0]).unwrap();
        assert!(existence_time_isotropic(1.0, &ae, 1.0).is_err());
    }

    fn sorted_exponents() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(2.05f64..12.0, 1..6).prop_map(|mut v| {
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v
        })
    }

    proptest! {
        #[test]
        fn isotropic_collapse(n in 1usize..8, p in 2.01f64..20.0) {
            let e = ExponentSet::isotropic(n, p).unwrap();
            let l = e.lambda_iso().unwrap();
            prop_assert!((e.lambda() - l).abs() <= 1e-13 * l);
            prop_assert!((e.p_bar() - p).abs() <= 1e-13 * p);
            for &a in e.alpha() {
                prop_assert!((a + 1.0 / l).abs() <= 1e-15);
            }
        }

        #[test]
        fn harmonic_mean_between_extremes(p in sorted_exponents()) {
            let m = harmonic_mean(&p).unwrap();
            let lo = p[0];
            let hi = p[p.len() - 1];
            prop_assert!(m >= lo * (1.0 - 1e-14) && m <= hi * (1.0 + 1e-14));
            if hi > lo * (1.0 + 1e-9) {
                prop_assert!(m > lo && m < hi);
            }
        }

        #[test]
        fn exponent_invariants(p in sorted_exponents()) {
            let e = ExponentSet::new(p.len(), &p).unwrap();
            prop_assert!(e.lambda() > 0.0 && e.beta() > 0.0);
            prop_assert!(e.reaction_coefficient().abs() < 1e-12);
            // α_i < 0 exactly when p_i < p̄ (1 + 1/N)
            let bound = e.p_bar() * (1.0 + 1.0 / e.dim() as f64);
            for (&a, &pi) in e.alpha().iter().zip(e.p()) {
                if (pi - bound).abs() > 1e-9 {
                    prop_assert_eq!(a < 0.0, pi < bound);
                }
            }
            prop_assert_eq!(e.rescaling_contracts(), e.p()[e.dim() - 1] < bound);
        }

        #[test]
        fn power_law_homogeneity(t in 0.01f64..100.0, s in 0.1f64..10.0) {
            let e = ExponentSet::new(2, &[3.0, 4.0]).unwrap();
            for axis in 0..2 {
                let a = support_radius(&e, axis, t, 0.1, 1.3, 0.7).unwrap() - 0.2;
                let b = support_radius(&e, axis, s * t, 0.1, 1.3, 0.7).unwrap() - 0.2;
                let expected = s.powf(e.support_time_exponent(axis));
                prop_assert!((b / a - expected).abs() < 1e-9 * expected);
            }
            let a = decay_bound(&e, t, 1.3, 0.7).unwrap();
            let b = decay_bound(&e, s * t, 1.3, 0.7).unwrap();
            prop_assert!((b / a - s.powf(-e.beta())).abs() < 1e-9 * s.powf(-e.beta()));
        }
    }
}
