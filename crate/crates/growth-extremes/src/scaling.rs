//! Centering sequences, scaling constants, and limiting point-process
//! intensities.
//!
//! For a Gumbel-class fitness law with inverse hazard g, the centering
//! time sigma_t solves
//!
//! ```text
//! (ln g)'(lambda x) = 1 / (lambda (t - x)),        0 < x < t,
//! ```
//!
//! whose left side is strictly decreasing and right side strictly
//! increasing, so the root is unique; it is clamped below at 1. Around
//! sigma_t the rescaled family data (birth time, fitness, size) converge
//! to a Poisson point process with intensity
//!
//! ```text
//! lambda e^{-f} E nu(z E),   E = exp(s^2 a2 - f a3),
//! ```
//!
//! where nu is the density of the single-family martingale limit and the
//! constants are a1 = gamma/(2 lambda), a2 = gamma kappa / 2,
//! a3 = gamma/lambda. Weibull-class laws center at
//! (alpha/lambda) ln t - (1/lambda) ln ell(1/t) and lead to the intensity
//! alpha f^{alpha-1} lambda e^{lambda s} E nu(z E) with E = e^{gamma(s+f)}.
//! In both cases the largest rescaled size is Frechet with shape
//! lambda/gamma; the scale constants are exposed here in closed form.

use crate::fitness::{FitnessError, GumbelModel, SlowVariation, WeibullModel};
use crate::quad;
use crate::special::gamma as gamma_fn;

/// Clamp threshold: roots this close to 1 are reported as exact hits, not
/// clamps, so boundary cases are not flagged spuriously.
const CLAMP_SLACK: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum ScalingError {
    #[error(transparent)]
    Fitness(#[from] FitnessError),
    #[error("time horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("rate parameter `{name}` must be positive and finite, got {value}")]
    InvalidRate { name: &'static str, value: f64 },
    #[error("no sign change for the centering equation on (0, {t})")]
    NoBracket { t: f64 },
    #[error("centering equation residual {residual:e} exceeds tolerance")]
    NotConverged { residual: f64 },
}

/// Root of the centering equation, with solve diagnostics.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SigmaSolution {
    pub sigma: f64,
    /// True when the unconstrained root fell below 1 and was lifted to 1.
    pub clamped: bool,
    /// |(ln g)'(lambda sigma) * lambda (t - sigma) - 1| at the returned root
    /// (0 when clamped).
    pub residual: f64,
    pub iterations: u32,
}

/// Solves (ln g)'(lambda x) = 1/(lambda (t-x)) for x in (0, t), clamping
/// the result below at 1. Bisection brings the bracket down to ~1e-13
/// relative, then guarded Newton steps polish to machine precision.
pub fn solve_sigma(model: &GumbelModel, lambda: f64, t: f64) -> Result<SigmaSolution, ScalingError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(ScalingError::InvalidHorizon(t));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ScalingError::InvalidRate { name: "lambda", value: lambda });
    }
    let residual_of = |x: f64| model.log_g_prime(lambda * x) * lambda * (t - x) - 1.0;
    let mut lo = 1e-9 * t;
    let mut hi = t * (1.0 - 1e-9);
    if !(residual_of(lo) > 0.0 && residual_of(hi) < 0.0) {
        return Err(ScalingError::NoBracket { t });
    }
    let mut iterations = 0u32;
    while hi - lo > 1e-13 * hi.max(1.0) && iterations < 80 {
        let mid = 0.5 * (lo + hi);
        if residual_of(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..8 {
        // F(x) = (ln g)'(lambda x) - 1/(lambda (t-x)); F' in closed form.
        let f = model.log_g_prime(lambda * x) - 1.0 / (lambda * (t - x));
        let fp = lambda * model.log_g_second(lambda * x) - 1.0 / (lambda * (t - x) * (t - x));
        let next = x - f / fp;
        iterations += 1;
        if !(next > lo && next < hi) {
            break;
        }
        let moved = (next - x).abs();
        x = next;
        if moved <= 1e-15 * x.abs() {
            break;
        }
    }
    let residual = residual_of(x).abs();
    if residual > 1e-9 {
        return Err(ScalingError::NotConverged { residual });
    }
    if x < 1.0 - CLAMP_SLACK {
        Ok(SigmaSolution { sigma: 1.0, clamped: true, residual: 0.0, iterations })
    } else {
        Ok(SigmaSolution { sigma: x, clamped: false, residual, iterations })
    }
}

/// Closed-form centering time for the ratio hazard m(x) = x/(1-x):
/// sigma = (sqrt(1 + lambda t) - 1)/lambda, before the clamp at 1.
pub fn sigma_gnedenko_closed(lambda: f64, t: f64) -> f64 {
    ((1.0 + lambda * t).sqrt() - 1.0) / lambda
}

/// Leading-order centering time for the power hazard (1-x)^{-rho} - 1:
/// lambda^{-1/(rho+1)} rho^{-rho/(rho+1)} t^{rho/(rho+1)}.
pub fn sigma_asymptotic_power(rho: f64, lambda: f64, t: f64) -> f64 {
    let q = rho / (rho + 1.0);
    lambda.powf(-1.0 / (rho + 1.0)) * rho.powf(-q) * t.powf(q)
}

/// Leading-order Weibull-class centering:
/// (alpha/lambda) ln t - (1/lambda) ln ell(1/t).
pub fn sigma_weibull_leading(alpha: f64, lambda: f64, ell: &SlowVariation, t: f64) -> f64 {
    (alpha * t.ln() - ell.eval(1.0 / t).ln()) / lambda
}

/// Diagnostic ratios that certify the centering time sits in the
/// asymptotic regime where the point-process limit is accurate:
/// `r1 = lambda t g'(lambda sigma)` and
/// `r2 = sigma t g''(lambda sigma) lambda^2 / (-kappa)` should be near 1,
/// while `r3 = sigma g'(lambda sigma)` should be near 0.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RegimeCheck {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub pass: bool,
}

pub fn sanity_asymptotics(
    model: &GumbelModel,
    lambda: f64,
    t: f64,
) -> Result<RegimeCheck, ScalingError> {
    let kappa = model.kappa()?.value;
    let sigma = solve_sigma(model, lambda, t)?.sigma;
    let y = lambda * sigma;
    let r1 = lambda * t * model.g1(y);
    let r2 = sigma * t * model.g2(y) * lambda * lambda / (-kappa);
    let r3 = sigma * model.g1(y);
    let pass = (r1 - 1.0).abs() <= 0.1 && (r2 - 1.0).abs() <= 0.1 && r3.abs() <= 0.01;
    Ok(RegimeCheck { r1, r2, r3, pass })
}

/// Frechet scale for Gumbel-class tails:
/// (sqrt(2 pi lambda / kappa) * moment)^{gamma/lambda}, where `moment` is
/// E[xi^{lambda/gamma}] for the single-family martingale limit xi.
pub fn frechet_scale_gumbel(kappa: f64, lambda: f64, gamma: f64, moment: f64) -> f64 {
    ((2.0 * std::f64::consts::PI * lambda / kappa).sqrt() * moment).powf(gamma / lambda)
}

/// Frechet scale for Weibull-class tails:
/// (Gamma(alpha+1) lambda^{-alpha} * moment)^{gamma/lambda}.
pub fn frechet_scale_weibull(alpha: f64, lambda: f64, gamma: f64, moment: f64) -> f64 {
    (gamma_fn(alpha + 1.0) * lambda.powf(-alpha) * moment).powf(gamma / lambda)
}

/// E[xi^{lambda/gamma}] when xi is standard exponential (pure-birth
/// single-family growth): Gamma(1 + lambda/gamma).
pub fn exponential_limit_moment(lambda: f64, gamma: f64) -> f64 {
    gamma_fn(1.0 + lambda / gamma)
}

/// Limiting intensity near the centering time for Gumbel-class tails, in
/// the rescaled coordinates (s, f, z) = (birth time, fitness, size).
#[derive(Debug, Clone, Copy)]
pub struct GumbelIntensity {
    pub lambda: f64,
    pub a2: f64,
    pub a3: f64,
}

impl GumbelIntensity {
    pub fn density<N: Fn(f64) -> f64>(&self, s: f64, f: f64, z: f64, nu: N) -> f64 {
        let e = (s * s * self.a2 - f * self.a3).exp();
        self.lambda * (-f).exp() * e * nu(z * e)
    }

    /// Closed-form mass above x in the size coordinate:
    /// lambda sqrt(pi a3 / a2) E[xi^{1/a3}] x^{-1/a3}.
    pub fn tail_mass_closed(&self, x: f64, moment: f64) -> f64 {
        self.lambda
            * (std::f64::consts::PI * self.a3 / self.a2).sqrt()
            * moment
            * x.powf(-1.0 / self.a3)
    }

    /// Mass above x by direct triple quadrature of the density. `nu` must
    /// be a probability density on (0, inf) with a roughly unit-rate
    /// exponential-or-faster tail (true for the martingale limits this
    /// intensity describes).
    pub fn tail_mass_numeric<N: Fn(f64) -> f64 + Copy>(&self, x: f64, nu: N) -> f64 {
        // The s-marginal is Gaussian with variance a3/(2 a2); +-8 standard
        // deviations bound the truncation error around 1e-14 relative. The
        // integrand is even in s, so integrate half and double.
        let s_half = 8.0 * (self.a3 / (2.0 * self.a2)).sqrt();
        let value = quad::integrate(
            &|s: f64| {
                // Below f_lo the argument x E exceeds e^15, where the nu
                // tail has long underflowed; above 45 the e^{-f} factor is
                // below 3e-20.
                let f_lo = ((s * s * self.a2 + x.ln() - 15.0) / self.a3).min(44.0);
                quad::integrate(
                    &|f: f64| {
                        let e = (s * s * self.a2 - f * self.a3).exp();
                        // In z the integrand lives at scale 1/E; the exact
                        // reparametrization w = (z - x) E keeps the inner
                        // quadrature at unit scale for any E.
                        let inner =
                            quad::integrate_to_inf(&|w: f64| nu(x * e + w), 0.0, 1.0, 1e-6);
                        self.lambda * (-f).exp() * inner.value
                    },
                    f_lo,
                    45.0,
                    2e-6,
                    0.0,
                )
                .value
            },
            0.0,
            s_half,
            1e-5,
            0.0,
        )
        .value;
        2.0 * value
    }
}

/// Limiting intensity for Weibull-class tails in the rescaled coordinates
/// (s, f, z) = (birth time, endpoint distance of fitness, size), f > 0.
#[derive(Debug, Clone, Copy)]
pub struct WeibullIntensity {
    pub lambda: f64,
    pub gamma: f64,
    pub alpha: f64,
}

impl WeibullIntensity {
    pub fn density<N: Fn(f64) -> f64>(&self, s: f64, f: f64, z: f64, nu: N) -> f64 {
        if f <= 0.0 {
            return 0.0;
        }
        let e = (self.gamma * (s + f)).exp();
        self.alpha * f.powf(self.alpha - 1.0) * self.lambda * (self.lambda * s).exp() * e
            * nu(z * e)
    }

    /// Closed-form mass above x:
    /// Gamma(alpha+1) lambda^{-alpha} E[xi^{lambda/gamma}] x^{-lambda/gamma}.
    pub fn tail_mass_closed(&self, x: f64, moment: f64) -> f64 {
        gamma_fn(self.alpha + 1.0) * self.lambda.powf(-self.alpha) * moment
            * x.powf(-self.lambda / self.gamma)
    }
}

/// All scaling data needed to rescale one experiment at horizon t.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScalingBundle {
    pub lambda: f64,
    pub gamma: f64,
    pub t: f64,
    /// Curvature constant (Gumbel class only).
    pub kappa: Option<f64>,
    /// Tail exponent (Weibull class only).
    pub alpha: Option<f64>,
    pub sigma: SigmaSolution,
    pub a1: f64,
    /// gamma kappa / 2 (Gumbel class only).
    pub a2: Option<f64>,
    pub a3: f64,
    pub frechet_shape: f64,
    pub frechet_scale: f64,
    /// E[xi^{lambda/gamma}] used in the scale constant.
    pub xi_moment: f64,
}

impl ScalingBundle {
    /// Bundle for a Gumbel-class model. `xi_moment` defaults to the
    /// standard-exponential value Gamma(1 + lambda/gamma).
    pub fn for_gumbel(
        model: &GumbelModel,
        lambda: f64,
        gamma: f64,
        t: f64,
        xi_moment: Option<f64>,
    ) -> Result<Self, ScalingError> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(ScalingError::InvalidRate { name: "gamma", value: gamma });
        }
        let kappa = model.kappa()?.value;
        let sigma = solve_sigma(model, lambda, t)?;
        let moment = xi_moment.unwrap_or_else(|| exponential_limit_moment(lambda, gamma));
        Ok(Self {
            lambda,
            gamma,
            t,
            kappa: Some(kappa),
            alpha: None,
            sigma,
            a1: gamma / (2.0 * lambda),
            a2: Some(gamma * kappa / 2.0),
            a3: gamma / lambda,
            frechet_shape: lambda / gamma,
            frechet_scale: frechet_scale_gumbel(kappa, lambda, gamma, moment),
            xi_moment: moment,
        })
    }

    /// Bundle for a Weibull-class model; the centering time is the
    /// leading-order formula (no equation to solve).
    pub fn for_weibull(
        model: &WeibullModel,
        lambda: f64,
        gamma: f64,
        t: f64,
        xi_moment: Option<f64>,
    ) -> Result<Self, ScalingError> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(ScalingError::InvalidHorizon(t));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(ScalingError::InvalidRate { name: "lambda", value: lambda });
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(ScalingError::InvalidRate { name: "gamma", value: gamma });
        }
        let sigma = sigma_weibull_leading(model.alpha, lambda, &model.ell, t);
        let moment = xi_moment.unwrap_or_else(|| exponential_limit_moment(lambda, gamma));
        Ok(Self {
            lambda,
            gamma,
            t,
            kappa: None,
            alpha: Some(model.alpha),
            sigma: SigmaSolution { sigma, clamped: false, residual: 0.0, iterations: 0 },
            a1: gamma / (2.0 * lambda),
            a2: None,
            a3: gamma / lambda,
            frechet_shape: lambda / gamma,
            frechet_scale: frechet_scale_weibull(model.alpha, lambda, gamma, moment),
            xi_moment: moment,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQRT_PI: f64 = 1.7724538509055159;

    #[test]
    fn sigma_matches_closed_form_on_ratio_hazard() {
        let model = GumbelModel::Gnedenko;
        for lambda in [0.5, 1.0, 2.0] {
            for t in [10.0, 1e2, 1e4, 1e6] {
                let sol = solve_sigma(&model, lambda, t).unwrap();
                let want = sigma_gnedenko_closed(lambda, t);
                assert!(
                    (sol.sigma - want).abs() <= 1e-10 * want,
                    "lambda {lambda}, t {t}: {} vs {want}",
                    sol.sigma
                );
                assert!(!sol.clamped);
                assert!(sol.residual <= 1e-11, "residual {}", sol.residual);
            }
        }
    }

    #[test]
    fn sigma_clamps_below_one() {
        // At t = 1 the unconstrained root is sqrt(2) - 1 < 1.
        let sol = solve_sigma(&GumbelModel::Gnedenko, 1.0, 1.0).unwrap();
        assert!(sol.clamped);
        assert_eq!(sol.sigma, 1.0);
        // At t = 3 the root is exactly 1: reported as-is, not clamped.
        let sol = solve_sigma(&GumbelModel::Gnedenko, 1.0, 3.0).unwrap();
        assert!(!sol.clamped);
        assert!((sol.sigma - 1.0).abs() <= 1e-9, "sigma {}", sol.sigma);
    }

    #[test]
    fn sigma_power_hazard_reaches_asymptotic_regime() {
        let rho = 0.5;
        let model = GumbelModel::PowerRho { rho };
        let sol = solve_sigma(&model, 1.0, 1e6).unwrap();
        let leading = sigma_asymptotic_power(rho, 1.0, 1e6);
        let ratio = sol.sigma / leading;
        assert!((0.95..=1.05).contains(&ratio), "ratio {ratio}");
        let regime = sanity_asymptotics(&model, 1.0, 1e6).unwrap();
        assert!(regime.pass, "{regime:?}");
    }

    #[test]
    fn regime_check_fails_at_small_horizons() {
        let check = sanity_asymptotics(&GumbelModel::PowerRho { rho: 0.5 }, 1.0, 20.0).unwrap();
        assert!(!check.pass, "{check:?}");
    }

    #[test]
    fn solve_sigma_rejects_bad_inputs() {
        assert!(matches!(
            solve_sigma(&GumbelModel::Gnedenko, 1.0, -2.0),
            Err(ScalingError::InvalidHorizon(_))
        ));
        assert!(matches!(
            solve_sigma(&GumbelModel::Gnedenko, f64::NAN, 5.0),
            Err(ScalingError::InvalidRate { .. })
        ));
    }

    proptest! {
        #[test]
        fn sigma_is_monotone_in_horizon(t1 in 5.0f64..1e5, t2 in 5.0f64..1e5) {
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            prop_assume!(hi > lo * (1.0 + 1e-6));
            for model in [GumbelModel::Gnedenko, GumbelModel::PowerRho { rho: 0.5 }] {
                let a = solve_sigma(&model, 1.0, lo).unwrap().sigma;
                let b = solve_sigma(&model, 1.0, hi).unwrap().sigma;
                prop_assert!(b >= a, "{:?}: sigma({lo}) = {a} > sigma({hi}) = {b}", model);
            }
        }
    }

    #[test]
    fn gumbel_intensity_spot_values() {
        let intensity = GumbelIntensity { lambda: 1.0, a2: 1.0, a3: 1.0 };
        let nu = |w: f64| if w > 0.0 { (-w).exp() } else { 0.0 };
        // (0, 0, 1): E = 1, so lambda * nu(1) = e^{-1}.
        let direct = intensity.density(0.0, 0.0, 1.0, nu);
        assert!((direct - (-1.0f64).exp()).abs() < 1e-15);
        // (0, ln 2, 1): E = 1/2, so e^{-ln 2} * (1/2) * e^{-1/2} = 0.25 e^{-0.5}.
        let v = intensity.density(0.0, 2f64.ln(), 1.0, nu);
        assert!((v - 0.25 * (-0.5f64).exp()).abs() < 1e-15, "{v}");
    }

    #[test]
    fn gumbel_tail_mass_closed_form() {
        // lambda = gamma = 1, kappa = 2 gives mass sqrt(pi)/x.
        let intensity = GumbelIntensity { lambda: 1.0, a2: 1.0, a3: 1.0 };
        for x in [0.5, 1.0, 2.0] {
            let closed = intensity.tail_mass_closed(x, 1.0);
            assert!((closed - SQRT_PI / x).abs() < 1e-14);
        }
    }

    #[test]
    fn gumbel_tail_mass_numeric_matches_closed() {
        let intensity = GumbelIntensity { lambda: 1.0, a2: 1.0, a3: 1.0 };
        let nu = |w: f64| if w > 0.0 { (-w).exp() } else { 0.0 };
        let numeric = intensity.tail_mass_numeric(1.0, nu);
        let closed = intensity.tail_mass_closed(1.0, 1.0);
        assert!(
            (numeric - closed).abs() <= 5e-3 * closed,
            "numeric {numeric} vs closed {closed}"
        );
    }

    #[test]
    fn weibull_intensity_and_tail() {
        let intensity = WeibullIntensity { lambda: 1.0, gamma: 1.0, alpha: 1.0 };
        let nu = |w: f64| if w > 0.0 { (-w).exp() } else { 0.0 };
        // alpha = 1: density at (0, f, z) is e^{f} e^{-z e^{f}}.
        let v = intensity.density(0.0, 1.0, 1.0, nu);
        let e1 = 1f64.exp();
        assert!((v - e1 * (-e1).exp()).abs() < 1e-15);
        assert_eq!(intensity.density(0.0, -0.5, 1.0, nu), 0.0);
        // Mass above x: Gamma(2) * 1 * E[xi] * x^{-1} = 1/x.
        assert!((intensity.tail_mass_closed(2.0, 1.0) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn frechet_scale_examples() {
        // Ratio hazard, lambda = gamma = 1: scale sqrt(pi).
        let s = frechet_scale_gumbel(2.0, 1.0, 1.0, exponential_limit_moment(1.0, 1.0));
        assert!((s - SQRT_PI).abs() < 1e-12);
        // Same hazard at lambda = 2: (sqrt(2 pi) * Gamma(3))^{1/2}.
        let s = frechet_scale_gumbel(2.0, 2.0, 1.0, exponential_limit_moment(2.0, 1.0));
        assert!((s - 2.239030269840495).abs() < 1e-12, "{s}");
        // Weibull-class scales with exponential xi.
        let w = frechet_scale_weibull(1.0, 1.0, 1.0, 1.0);
        assert!((w - 1.0).abs() < 1e-12);
        let w = frechet_scale_weibull(2.0, 1.0, 1.0, 1.0);
        assert!((w - 2.0).abs() < 1e-12);
        let w = frechet_scale_weibull(1.0, 2.0, 1.0, exponential_limit_moment(2.0, 1.0));
        assert!((w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weibull_leading_centering() {
        let s = sigma_weibull_leading(2.0, 1.0, &SlowVariation::One, std::f64::consts::E);
        assert!((s - 2.0).abs() < 1e-12);
        // A constant slowly varying factor shifts by -(ln c)/lambda.
        let s =
            sigma_weibull_leading(2.0, 2.0, &SlowVariation::Const(0.5), std::f64::consts::E);
        assert!((s - (2.0 - 0.5f64.ln()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn bundles_carry_consistent_constants() {
        let g = ScalingBundle::for_gumbel(&GumbelModel::Gnedenko, 2.0, 1.0, 1e4, None).unwrap();
        assert!((g.kappa.unwrap() - 2.0).abs() < 1e-3);
        assert!((g.a1 - 0.25).abs() < 1e-12);
        assert!((g.a3 - 0.5).abs() < 1e-12);
        assert!((g.frechet_shape - 2.0).abs() < 1e-12);
        assert!(g.sigma.sigma > 1.0);

        let wm = WeibullModel::new(1.0, SlowVariation::One).unwrap();
        let w = ScalingBundle::for_weibull(&wm, 1.0, 1.0, 100.0, None).unwrap();
        assert!(w.kappa.is_none() && w.a2.is_none());
        assert!((w.sigma.sigma - 100f64.ln()).abs() < 1e-12);
        assert!((w.frechet_scale - 1.0).abs() < 1e-12);

        // Curvature divergence propagates as an error.
        assert!(ScalingBundle::for_gumbel(&GumbelModel::LogLog, 1.0, 1.0, 1e3, None).is_err());
    }
}
