//! Closed-form solutions of the prototype equation and the scaling group
//! acting on them.
//!
//! * the isotropic Barenblatt source solution and its shifted/scaled family
//!   `B_{k,ρ}`;
//! * the self-similar profile `C(η)` with the zero-flux identity it satisfies;
//! * separable power-type solutions that blow up at prescribed times;
//! * the heat kernel that Barenblatt solutions approach as `p ↓ 2`;
//! * the dilation group `u ↦ K u(x/L, t/T)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::scaling_laws::ExponentSet;

/// A function of `(x, t)`.
pub trait SpaceTimeFn {
    fn eval(&self, x: &[f64], t: f64) -> f64;
}

impl<F: Fn(&[f64], f64) -> f64> SpaceTimeFn for F {
    fn eval(&self, x: &[f64], t: f64) -> f64 {
        self(x, t)
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `{s}_+^m` with the positive part taken before the fractional power.
/// Brackets within a few ulps of zero count as zero, so a free boundary
/// computed in closed form evaluates to exactly 0.
#[inline]
fn positive_pow(s: f64, m: f64) -> f64 {
    if s <= 8.0 * f64::EPSILON {
        0.0
    } else {
        s.powf(m)
    }
}

/// Source solution `t^{-N/λ} {1 - γ_p (|x| t^{-1/λ})^{p/(p-1)}}_+^{(p-1)/(p-2)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Barenblatt {
    dim: usize,
    p: f64,
    lambda: f64,
    gamma: f64,
}

impl Barenblatt {
    pub fn new(e: &ExponentSet) -> Result<Self> {
        let (p, lambda, gamma) = e.isotropic_constants("the Barenblatt solution")?;
        Ok(Self {
            dim: e.dim(),
            p,
            lambda,
            gamma,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Value at `(x, t)`; zero for `t <= 0`.
    pub fn value(&self, x: &[f64], t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let xi = norm(x) * t.powf(-1.0 / self.lambda);
        t.powf(-(self.dim as f64) / self.lambda) * self.profile_value(xi)
    }

    /// `C(η) = {1 - γ_p η^{p/(p-1)}}_+^{(p-1)/(p-2)}`.
    pub fn profile_value(&self, eta: f64) -> f64 {
        let p = self.p;
        positive_pow(
            1.0 - self.gamma * eta.powf(p / (p - 1.0)),
            (p - 1.0) / (p - 2.0),
        )
    }

    /// Free boundary of the profile, `γ_p^{-(p-1)/p}`.
    pub fn profile_radius(&self) -> f64 {
        self.gamma.powf(-(self.p - 1.0) / self.p)
    }

    /// Radius of the support at time `t`.
    pub fn support_radius(&self, t: f64) -> f64 {
        t.max(0.0).powf(1.0 / self.lambda) * self.profile_radius()
    }

    /// `∫ B(x, t) dx` by adaptive quadrature over the support box.
    pub fn mass(&self, t: f64, tol: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::arg("Barenblatt mass needs t > 0"));
        }
        let r = self.support_radius(t);
        let lo = vec![-r; self.dim];
        let hi = vec![r; self.dim];
        quadrature::integrate_box(&|x| self.value(x, t), &lo, &hi, tol)
    }
}

impl SpaceTimeFn for Barenblatt {
    fn eval(&self, x: &[f64], t: f64) -> f64 {
        self.value(x, t)
    }
}

/// Checked evaluation of the source solution.
pub fn barenblatt(x: &[f64], t: f64, e: &ExponentSet) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::arg(format!(
            "Barenblatt solution needs t > 0, got {t}"
        )));
    }
    if x.len() != e.dim() {
        return Err(Error::arg(
            "point dimension does not match the exponent set",
        ));
    }
    Ok(Barenblatt::new(e)?.value(x, t))
}

/// Parameters of `B_{k,ρ}(x, t; x̄, t̄)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarenblattParams {
    pub k: f64,
    pub rho: f64,
    pub x_bar: Vec<f64>,
    pub t_bar: f64,
    pub exponents: ExponentSet,
}

impl BarenblattParams {
    pub fn new(k: f64, rho: f64, x_bar: Vec<f64>, t_bar: f64, e: &ExponentSet) -> Result<Self> {
        e.require_isotropic("B_{k,rho}")?;
        if !(k > 0.0 && rho > 0.0) {
            return Err(Error::arg("B_{k,rho} needs k > 0 and rho > 0"));
        }
        if x_bar.len() != e.dim() {
            return Err(Error::arg(
                "centre dimension does not match the exponent set",
            ));
        }
        Ok(Self {
            k,
            rho,
            x_bar,
            t_bar,
            exponents: e.clone(),
        })
    }

    /// Parameters under which `B_{k,ρ}` coincides with [`Barenblatt`] for
    /// every `t >= t̄`: `ρ = 1`, `S(t) = b t` with
    /// `b = (λ (p/(p-2))^{p-1})^{λ/p}`, `k = b^{N/λ}`, `t̄ = 1/b`.
    pub fn matching_source_solution(e: &ExponentSet) -> Result<Self> {
        let (p, lambda, _) = e.isotropic_constants("B_{k,rho}")?;
        let b = (lambda * (p / (p - 2.0)).powf(p - 1.0)).powf(lambda / p);
        let k = b.powf(e.dim() as f64 / lambda);
        Self::new(k, 1.0, vec![0.0; e.dim()], 1.0 / b, e)
    }

    /// `S(t) = λ (p/(p-2))^{p-1} k^{p-2} ρ^{N(p-2)} (t - t̄) + ρ^λ`.
    pub fn support_s(&self, t: f64) -> Result<f64> {
        if t < self.t_bar {
            return Err(Error::arg(format!(
                "B_{{k,rho}} is defined for t >= t_bar = {}, got {t}",
                self.t_bar
            )));
        }
        let p = self.exponents.p()[0];
        let lambda = self.exponents.lambda();
        let n = self.exponents.dim() as f64;
        Ok(lambda
            * (p / (p - 2.0)).powf(p - 1.0)
            * self.k.powf(p - 2.0)
            * self.rho.powf(n * (p - 2.0))
            * (t - self.t_bar)
            + self.rho.powf(lambda))
    }

    /// Support radius `S(t)^{1/λ}`.
    pub fn support_radius(&self, t: f64) -> Result<f64> {
        Ok(self.support_s(t)?.powf(1.0 / self.exponents.lambda()))
    }
}

/// `B_{k,ρ}(x, t; x̄, t̄)`.
pub fn general_barenblatt(params: &BarenblattParams, x: &[f64], t: f64) -> Result<f64> {
    let s = params.support_s(t)?;
    if x.len() != params.x_bar.len() {
        return Err(Error::arg("point dimension does not match the centre"));
    }
    let p = params.exponents.p()[0];
    let lambda = params.exponents.lambda();
    let n = params.exponents.dim() as f64;
    let r = x
        .iter()
        .zip(&params.x_bar)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let ratio = r / s.powf(1.0 / lambda);
    let shape = positive_pow(1.0 - ratio.powf(p / (p - 1.0)), (p - 1.0) / (p - 2.0));
    Ok(params.k * params.rho.powf(n) / s.powf(n / lambda) * shape)
}

impl SpaceTimeFn for BarenblattParams {
    fn eval(&self, x: &[f64], t: f64) -> f64 {
        general_barenblatt(self, x, t).unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub eta: f64,
    pub value: f64,
}

/// `C(η)` for an isotropic exponent set.
pub fn profile(eta: f64, e: &ExponentSet) -> Result<ProfilePoint> {
    if !(eta >= 0.0) {
        return Err(Error::arg("profile needs eta >= 0"));
    }
    let b = Barenblatt::new(e)?;
    Ok(ProfilePoint {
        eta,
        value: b.profile_value(eta),
    })
}

/// `C'(η)` by the chain rule; zero outside the support.
pub fn profile_derivative(eta: f64, e: &ExponentSet) -> Result<f64> {
    let b = Barenblatt::new(e)?;
    let p = b.p;
    let inner = 1.0 - b.gamma * eta.powf(p / (p - 1.0));
    if inner <= 0.0 || eta == 0.0 {
        return Ok(0.0);
    }
    let m = (p - 1.0) / (p - 2.0);
    let q = p / (p - 1.0);
    Ok(-m * inner.powf(m - 1.0) * b.gamma * q * eta.powf(q - 1.0))
}

/// Residual of `|C'|^{p-2} C' + η C / λ = 0`.
pub fn zero_flux_residual(eta: f64, e: &ExponentSet) -> Result<f64> {
    let c = profile(eta, e)?.value;
    let dc = profile_derivative(eta, e)?;
    let p = e.p()[0];
    Ok(dc.abs().powf(p - 2.0) * dc + eta * c / e.lambda())
}

/// The one-parameter family `w_c(y) = {c - γ_p |y|^{p/(p-1)}}_+^{(p-1)/(p-2)}`
/// of stationary solutions of the isotropic rescaled equation; `c` fixes the
/// mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryProfile {
    base: Barenblatt,
    pub level: f64,
}

impl StationaryProfile {
    pub fn new(e: &ExponentSet, level: f64) -> Result<Self> {
        if !(level > 0.0) {
            return Err(Error::arg("profile level must be positive"));
        }
        Ok(Self {
            base: Barenblatt::new(e)?,
            level,
        })
    }

    /// Member of the family carrying total mass `mass`.
    pub fn with_mass(e: &ExponentSet, mass: f64) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::arg("profile mass must be positive"));
        }
        let base = Barenblatt::new(e)?;
        let unit = base.mass(1.0, 1e-11)?;
        let p = base.p;
        let expo = (p - 1.0) * base.lambda / (p * (p - 2.0));
        Self::new(e, (mass / unit).powf(1.0 / expo))
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        let p = self.base.p;
        let m = (p - 1.0) / (p - 2.0);
        let q = p / (p - 1.0);
        let scale = self.level.powf(-1.0 / q);
        self.level.powf(m) * self.base.profile_value(norm(y) * scale)
    }

    pub fn radius(&self) -> f64 {
        self.base.profile_radius() * self.level.powf((self.base.p - 1.0) / self.base.p)
    }
}

/// Parameters of the separable solution `Σ_i κ_i (|x_i|^{p_i} / (T_i - t))^{1/(p_i-2)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparableParams {
    pub kappa: Vec<f64>,
    pub t_blowup: Vec<f64>,
    pub exponents: ExponentSet,
}

impl SeparableParams {
    pub fn new(kappa: Vec<f64>, t_blowup: Vec<f64>, e: &ExponentSet) -> Result<Self> {
        if kappa.len() != e.dim() || t_blowup.len() != e.dim() {
            return Err(Error::arg(
                "separable solution needs one kappa and one T per axis",
            ));
        }
        if kappa.iter().any(|&k| !(k > 0.0)) {
            return Err(Error::arg("kappa_i must be positive"));
        }
        Ok(Self {
            kappa,
            t_blowup,
            exponents: e.clone(),
        })
    }

    /// Uses [`default_kappa`] on every axis, which makes the sum an exact
    /// solution.
    pub fn with_default_kappa(t_blowup: Vec<f64>, e: &ExponentSet) -> Result<Self> {
        let kappa = e.p().iter().map(|&p| default_kappa(p)).collect();
        Self::new(kappa, t_blowup, e)
    }

    pub fn blowup_time(&self) -> f64 {
        self.t_blowup.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// `κ(p) = [2(p-1) (p/(p-2))^{p-1}]^{-1/(p-2)}`; the unique constant for which
/// `κ (|x|^p/(T-t))^{1/(p-2)}` solves the one-dimensional equation.
pub fn default_kappa(p: f64) -> f64 {
    (2.0 * (p - 1.0) * (p / (p - 2.0)).powf(p - 1.0)).powf(-1.0 / (p - 2.0))
}

pub fn separable_solution(params: &SeparableParams, x: &[f64], t: f64) -> Result<f64> {
    if t >= params.blowup_time() {
        return Err(Error::arg(format!(
            "separable solution blows up at t = {}, got t = {t}",
            params.blowup_time()
        )));
    }
    if x.len() != params.kappa.len() {
        return Err(Error::arg("point dimension does not match the parameters"));
    }
    Ok(params
        .exponents
        .p()
        .iter()
        .zip(&params.kappa)
        .zip(&params.t_blowup)
        .zip(x)
        .map(|(((&p, &k), &tb), &xi)| k * (xi.abs().powf(p) / (tb - t)).powf(1.0 / (p - 2.0)))
        .sum())
}

impl SpaceTimeFn for SeparableParams {
    fn eval(&self, x: &[f64], t: f64) -> f64 {
        separable_solution(self, x, t).unwrap_or(f64::NAN)
    }
}

/// `t^{-N/2} e^{-|x|^2/(4t)}`, the heat kernel scaled to value 1 at the
/// origin at `t = 1`.
pub fn heat_kernel(x: &[f64], t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::arg("heat kernel needs t > 0"));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    Ok(t.powf(-(x.len() as f64) / 2.0) * (-r2 / (4.0 * t)).exp())
}

/// `|B_p(x, t) - t^{-N/2} e^{-|x|^2/(4t)}|` in dimension `x.len()`.
pub fn heat_limit_gap(x: &[f64], t: f64, p: f64) -> Result<f64> {
    let e = ExponentSet::isotropic(x.len(), p)?;
    Ok((barenblatt(x, t, &e)? - heat_kernel(x, t)?).abs())
}

/// `(x, t) ↦ K u(x/L, t/T)`.
#[derive(Debug, Clone)]
pub struct Scaled<F> {
    inner: F,
    pub k: f64,
    pub l: f64,
    pub t: f64,
}

impl<F: SpaceTimeFn> SpaceTimeFn for Scaled<F> {
    fn eval(&self, x: &[f64], t: f64) -> f64 {
        let xs: Vec<f64> = x.iter().map(|v| v / self.l).collect();
        self.k * self.inner.eval(&xs, t / self.t)
    }
}

pub fn apply_scaling<F: SpaceTimeFn>(u: F, k: f64, l: f64, t: f64) -> Result<Scaled<F>> {
    if !(k > 0.0 && l > 0.0 && t > 0.0) {
        return Err(Error::arg("scaling factors K, L, T must be positive"));
    }
    Ok(Scaled { inner: u, k, l, t })
}

/// True when `(K, L, T)` maps solutions to solutions: `T K^{p-2} = L^p`
/// up to relative tolerance `tol`.
pub fn is_admissible(k: f64, l: f64, t: f64, p: f64, tol: f64) -> bool {
    let lp = l.powf(p);
    (t * k.powf(p - 2.0) - lp).abs() <= tol * lp
}

/// Amplitude `K = (L^p/T)^{1/(p-2)}` of the two-parameter group.
pub fn group_amplitude(p: f64, l: f64, t: f64) -> f64 {
    (l.powf(p) / t).powf(1.0 / (p - 2.0))
}

/// Mass-preserving member `(K, L) = (T^{-N/λ}, T^{1/λ})` of the group.
pub fn mass_preserving_factors(e: &ExponentSet, t: f64) -> Result<(f64, f64)> {
    let (_, lambda, _) = e.isotropic_constants("mass-preserving scaling")?;
    Ok((t.powf(-(e.dim() as f64) / lambda), t.powf(1.0 / lambda)))
}

/// A free-boundary point where `B` vanishes while the earlier slice
/// `B(·, t0 - ρ^p)` is positive somewhere in `B_ρ(x0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnackWitness {
    pub x0: Vec<f64>,
    pub t0: f64,
    pub value_at_x0: f64,
    pub earlier_time: f64,
    pub sup_value: f64,
    pub sup_point: Vec<f64>,
}

const WITNESS_SAMPLES: usize = 4001;

pub fn harnack_failure_witness(e: &ExponentSet, rho: f64, t0: f64) -> Result<HarnackWitness> {
    let b = Barenblatt::new(e)?;
    if !(rho > 0.0 && t0 > 0.0) {
        return Err(Error::arg("witness needs rho > 0 and t0 > 0"));
    }
    let earlier = t0 - rho.powf(b.p);
    if earlier <= 0.0 {
        return Err(Error::arg(format!(
            "rho = {rho} is too large: t0 - rho^p = {earlier} <= 0"
        )));
    }
    let mut x0 = vec![0.0; e.dim()];
    x0[0] = b.support_radius(t0);
    let value_at_x0 = b.value(&x0, t0);

    // B is radially decreasing, so the supremum over the ball lies on the
    // diameter through the origin.
    let mut best = (f64::NEG_INFINITY, x0.clone());
    for i in 0..WITNESS_SAMPLES {
        let s = -rho + 2.0 * rho * i as f64 / (WITNESS_SAMPLES - 1) as f64;
        let mut x = x0.clone();
        x[0] += s;
        let v = b.value(&x, earlier);
        if v > best.0 {
            best = (v, x);
        }
    }
    Ok(HarnackWitness {
        x0,
        t0,
        value_at_x0,
        earlier_time: earlier,
        sup_value: best.0,
        sup_point: best.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn iso(n: usize, p: f64) -> ExponentSet {
        ExponentSet::isotropic(n, p).unwrap()
    }

    #[test]
    fn barenblatt_center_and_free_boundary() {
        for (n, p) in [(1, 3.0), (2, 2.5), (3, 4.0)] {
            let e = iso(n, p);
            assert_relative_eq!(barenblatt(&vec![0.0; n], 1.0, &e).unwrap(), 1.0);
            let b = Barenblatt::new(&e).unwrap();
            let mut x = vec![0.0; n];
            for t in [0.5, 2.0] {
                x[0] = b.support_radius(t);
                assert_eq!(b.value(&x, t), 0.0);
                x[0] *= 0.999;
                assert!(b.value(&x, t) > 0.0);
            }
        }
        assert!(barenblatt(&[0.0], 0.0, &iso(1, 3.0)).is_err());
        let aniso = ExponentSet::new(2, &[3.0, 4.0]).unwrap();
        assert!(barenblatt(&[0.0, 0.0], 1.0, &aniso).is_err());
    }

    #[test]
    fn barenblatt_mass_is_conserved() {
        let b = Barenblatt::new(&iso(1, 3.0)).unwrap();
        let m1 = b.mass(1.0, 1e-9).unwrap();
        let m10 = b.mass(10.0, 1e-9).unwrap();
        // closed form for N=1, p=3: ∫(1-|x|^{3/2}/6)^2 = 0.9·6^{2/3}
        assert_relative_eq!(m1, 0.9 * 6f64.powf(2.0 / 3.0), epsilon = 1e-8);
        assert_relative_eq!(m1, m10, epsilon = 1e-8);
    }

    #[test]
    fn general_family_examples() {
        let e = iso(1, 3.0);
        let prm = BarenblattParams::new(1.0, 1.0, vec![0.0], 0.0, &e).unwrap();
        assert_relative_eq!(prm.support_s(0.0).unwrap(), 1.0);
        assert_relative_eq!(prm.support_s(0.5).unwrap(), 19.0, epsilon = 1e-12);
        assert_relative_eq!(general_barenblatt(&prm, &[0.0], 0.0).unwrap(), 1.0);
        assert_eq!(general_barenblatt(&prm, &[1.0], 0.0).unwrap(), 0.0);
        assert!(general_barenblatt(&prm, &[0.0], -0.1).is_err());

        let e2 = iso(2, 4.0);
        let prm = BarenblattParams::new(2.5, 0.7, vec![0.3, -0.2], 1.0, &e2).unwrap();
        assert_relative_eq!(prm.support_s(1.0).unwrap(), 0.7f64.powf(e2.lambda()));
        assert_relative_eq!(general_barenblatt(&prm, &[0.3, -0.2], 1.0).unwrap(), 2.5);
    }

    #[test]
    fn general_family_bounds_and_support() {
        let e = iso(2, 3.0);
        let prm = BarenblattParams::new(1.7, 0.4, vec![0.1, 0.2], 0.5, &e).unwrap();
        for t in [0.5, 0.6, 1.5, 4.0] {
            let r = prm.support_radius(t).unwrap();
            for i in 0..200 {
                let ang = i as f64 * 0.0314;
                for s in [0.0, 0.3, 0.9, 0.999, 1.0, 1.001, 1.5] {
                    let x = [0.1 + s * r * ang.cos(), 0.2 + s * r * ang.sin()];
                    let v = general_barenblatt(&prm, &x, t).unwrap();
                    assert!(v <= prm.k * (1.0 + 1e-14));
                    if s >= 1.0 {
                        assert_eq!(v, 0.0);
                    } else {
                        assert!(v > 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn general_family_reproduces_source_solution() {
        for (n, p) in [(1, 3.0), (2, 2.5), (3, 5.0)] {
            let e = iso(n, p);
            let prm = BarenblattParams::matching_source_solution(&e).unwrap();
            let b = Barenblatt::new(&e).unwrap();
            for t in [prm.t_bar, 0.7, 1.0, 3.0] {
                for i in 0..50 {
                    let mut x = vec![0.0; n];
                    x[0] = 1.2 * b.support_radius(t) * i as f64 / 49.0;
                    if n > 1 {
                        x[1] = 0.1 * x[0];
                    }
                    let a = general_barenblatt(&prm, &x, t).unwrap();
                    assert_relative_eq!(a, b.value(&x, t), epsilon = 1e-12, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn profile_and_zero_flux() {
        let e = iso(1, 3.0);
        assert_eq!(profile(0.0, &e).unwrap().value, 1.0);
        assert_eq!(zero_flux_residual(0.0, &e).unwrap(), 0.0);
        let edge = Barenblatt::new(&e).unwrap().profile_radius();
        assert_eq!(profile(edge, &e).unwrap().value, 0.0);
        assert_eq!(zero_flux_residual(edge, &e).unwrap(), 0.0);
        assert!(zero_flux_residual(0.5, &e).unwrap().abs() < 1e-12);
        assert!(profile(-1.0, &e).is_err());
    }

    #[test]
    fn profile_is_monotone_and_c1_at_the_edge() {
        for p in [2.5, 3.0, 4.0, 6.0] {
            let e = iso(2, p);
            let edge = Barenblatt::new(&e).unwrap().profile_radius();
            let mut prev = f64::INFINITY;
            for i in 0..=1000 {
                let v = profile(edge * i as f64 / 1000.0, &e).unwrap().value;
                assert!(v <= prev);
                prev = v;
            }
            let d: Vec<f64> = [1e-2, 1e-4, 1e-8, 1e-12]
                .iter()
                .map(|s| profile_derivative(edge * (1.0 - s), &e).unwrap().abs())
                .collect();
            assert!(d.windows(2).all(|w| w[1] < w[0]), "p = {p}: {d:?}");
            assert!(d[3] < 1e-2 * d[0]);
            assert_eq!(profile_derivative(edge, &e).unwrap(), 0.0);
        }
    }

    #[test]
    fn profile_derivative_matches_finite_differences() {
        let e = iso(1, 4.0);
        for eta in [0.3, 0.9, 1.7] {
            let h = 1e-6;
            let fd = (profile(eta + h, &e).unwrap().value - profile(eta - h, &e).unwrap().value)
                / (2.0 * h);
            assert_relative_eq!(profile_derivative(eta, &e).unwrap(), fd, epsilon = 1e-8);
        }
    }

    #[test]
    fn stationary_family_matches_requested_mass() {
        let e = iso(1, 3.0);
        let w = StationaryProfile::with_mass(&e, 1.0).unwrap();
        let r = w.radius();
        let m = quadrature::integrate(|y| w.value(&[y]), -r, r, 1e-11).unwrap();
        assert_relative_eq!(m, 1.0, epsilon = 1e-9);
        assert_eq!(w.value(&[r * 1.0001]), 0.0);
        let unit = StationaryProfile::new(&e, 1.0).unwrap();
        assert_relative_eq!(unit.value(&[0.4]), profile(0.4, &e).unwrap().value);
    }

    #[test]
    fn kappa_for_cubic_growth() {
        assert_relative_eq!(default_kappa(3.0), 1.0 / 36.0, epsilon = 1e-15);
    }

    /// Second-order finite-difference residual of `f_t - (|f_x|^{p-2} f_x)_x`.
    fn fd_residual(p: f64, t_blow: f64, x: f64, t: f64, h: f64) -> f64 {
        let e = ExponentSet::isotropic(1, p).unwrap();
        let prm = SeparableParams::with_default_kappa(vec![t_blow], &e).unwrap();
        let f = |x: f64, t: f64| separable_solution(&prm, &[x], t).unwrap();
        let ft = (f(x, t + h) - f(x, t - h)) / (2.0 * h);
        let flux = |a: f64, b: f64| {
            let g = (f(b, t) - f(a, t)) / h;
            g.abs().powf(p - 2.0) * g
        };
        let div = (flux(x, x + h) - flux(x - h, x)) / h;
        ft - div
    }

    #[test]
    fn separable_solution_solves_the_equation() {
        for p in [3.0, 3.5, 5.0] {
            let r1 = fd_residual(p, 1.0, 1.0, 0.0, 1e-3).abs();
            let r2 = fd_residual(p, 1.0, 1.0, 0.0, 5e-4).abs();
            // O(h²) truncation with no O(1) remainder
            assert!(r1 < 1e-4, "p = {p}: residual {r1}");
            assert!(r2 < 0.3 * r1 + 1e-9, "p = {p}: {r1} -> {r2}");
        }
    }

    #[test]
    fn separable_examples() {
        let e = ExponentSet::new(2, &[3.0, 4.0]).unwrap();
        let prm = SeparableParams::with_default_kappa(vec![1.0, 2.0], &e).unwrap();
        assert_eq!(separable_solution(&prm, &[0.0, 0.0], 0.5).unwrap(), 0.0);
        assert!(separable_solution(&prm, &[0.1, 0.1], 1.0).is_err());

        let one = |x0: f64, x1: f64| separable_solution(&prm, &[x0, x1], 0.3).unwrap();
        let f0 = one(0.7, 0.0);
        assert_relative_eq!(one(1.4, 0.0) / f0, 2f64.powf(3.0), epsilon = 1e-12);
        let f1 = one(0.0, 0.7);
        assert_relative_eq!(one(0.0, 1.4) / f1, 2f64.powf(2.0), epsilon = 1e-12);

        let e1 = ExponentSet::isotropic(1, 3.0).unwrap();
        let prm = SeparableParams::with_default_kappa(vec![1.0], &e1).unwrap();
        assert_relative_eq!(
            separable_solution(&prm, &[1.5], 0.5).unwrap(),
            1.5f64.powi(3) / 36.0 / 0.5,
            epsilon = 1e-14
        );
    }

    #[test]
    fn heat_limit_examples() {
        assert_eq!(heat_limit_gap(&[0.0], 1.0, 3.0).unwrap(), 0.0);
        let gaps: Vec<f64> = [3.0, 2.5, 2.1, 2.01]
            .iter()
            .map(|&p| heat_limit_gap(&[1.0], 1.0, p).unwrap())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        let far = [10.0];
        assert_eq!(barenblatt(&far, 1.0, &iso(1, 3.0)).unwrap(), 0.0);
        assert_relative_eq!(
            heat_limit_gap(&far, 1.0, 3.0).unwrap(),
            heat_kernel(&far, 1.0).unwrap()
        );
    }

    #[test]
    fn scaling_identity_and_admissibility() {
        let e = iso(1, 3.0);
        let b = Barenblatt::new(&e).unwrap();
        let same = apply_scaling(b.clone(), 1.0, 1.0, 1.0).unwrap();
        assert_eq!(same.eval(&[0.8], 1.3), b.value(&[0.8], 1.3));
        assert!(apply_scaling(b, 0.0, 1.0, 1.0).is_err());
        assert!(is_admissible(
            group_amplitude(3.0, 2.0, 5.0),
            2.0,
            5.0,
            3.0,
            1e-12
        ));
        assert!(!is_admissible(1.0, 2.0, 1.0, 3.0, 1e-6));
    }

    #[test]
    fn source_solution_is_self_similar() {
        for (n, p) in [(1, 3.0), (2, 4.0)] {
            let e = iso(n, p);
            let b = Barenblatt::new(&e).unwrap();
            for tt in [0.3f64, 2.0, 17.0] {
                let l = tt.powf(1.0 / e.lambda());
                let k = group_amplitude(p, l, tt);
                let (km, lm) = mass_preserving_factors(&e, tt).unwrap();
                assert_relative_eq!(k, km, max_relative = 1e-12);
                assert_relative_eq!(l, lm, max_relative = 1e-12);
                let s = apply_scaling(b.clone(), k, l, tt).unwrap();
                for i in 0..40 {
                    let x: Vec<f64> = (0..n).map(|a| 0.1 * (i as f64) - 0.7 * a as f64).collect();
                    let t = 0.25 + 0.1 * i as f64;
                    assert_relative_eq!(s.eval(&x, t), b.value(&x, t), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn harnack_witness_examples() {
        let e = iso(1, 3.0);
        let w = harnack_failure_witness(&e, 0.5, 1.0).unwrap();
        assert_relative_eq!(w.x0[0], (1.0f64 / 6.0).powf(-2.0 / 3.0), epsilon = 1e-12);
        assert_eq!(w.value_at_x0, 0.0);
        assert!(w.sup_value > 0.0);
        assert!(harnack_failure_witness(&e, 1.0, 1.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn mass_preserving_scaling_fixes_the_source_solution(
            n in 1usize..4,
            p in 2.1f64..6.0,
            tt in 0.05f64..20.0,
            x in proptest::collection::vec(-3.0f64..3.0, 3),
            t in 0.1f64..5.0,
        ) {
            let e = iso(n, p);
            let b = Barenblatt::new(&e).unwrap();
            let (k, l) = mass_preserving_factors(&e, tt).unwrap();
            proptest::prop_assert!(is_admissible(k, l, tt, p, 1e-12));
            proptest::prop_assert!((k * l.powi(n as i32) - 1.0).abs() <= 1e-12);
            let s = apply_scaling(b.clone(), k, l, tt).unwrap();
            let (a, c) = (s.eval(&x[..n], t), b.value(&x[..n], t));
            proptest::prop_assert!((a - c).abs() <= 1e-12 * c.max(1e-3), "{a} vs {c}");
        }
    }
}
