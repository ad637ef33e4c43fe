//! Fitness distributions on (0,1), organized by max-domain of attraction.
//!
//! A fitness law mu is specified through its upper tail. Two families are
//! supported:
//!
//! * **Gumbel class** (fast-decaying tail, essential supremum 1): described
//!   by the integrated hazard `m(x) = -ln mu((x,1])`, strictly increasing
//!   with m(0)=0, together with its inverse `g = m^{-1}` and two
//!   derivatives. The catalog ships closed forms for m, m', m''; g' and g''
//!   come from the exact inverse-function identities g' = 1/(m' o g) and
//!   g'' = -(m'' o g)/(m' o g)^3, so no nested root-finding is needed
//!   downstream.
//! * **Weibull class** (polynomial tail at the right endpoint):
//!   `mu((1-eps,1]) = eps^alpha * ell(eps)` with `ell` slowly varying
//!   at 0.
//!
//! The hazards of the exponential-type examples overflow f64 well before
//! x = 1 - 1e-4, so the curvature diagnostics (`kappa`, `check_a5`) operate
//! on log-hazard values, which every model provides in stable form.

use serde::{Deserialize, Serialize};

use crate::quad;
use crate::rng::{exp_draw, unit_open};
use rand::Rng;

/// Curvature-ratio evaluation points x = 1 - 10^-k.
const PROBE_KS: [i32; 5] = [4, 5, 6, 7, 8];
/// Relative disagreement between the last two raw ratios that flags a
/// divergent curvature limit.
const KAPPA_DIVERGENCE_TOL: f64 = 0.10;

#[derive(Debug, thiserror::Error)]
pub enum FitnessError {
    #[error("unknown fitness model id `{0}`")]
    UnknownModel(String),
    #[error("model `{id}` requires parameter `{param}`")]
    MissingParameter { id: &'static str, param: &'static str },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("operation requires a Gumbel-class model")]
    NotGumbelClass,
    #[error("operation requires a Weibull-class model")]
    NotWeibullClass,
    #[error(
        "curvature ratio does not stabilize (raw values {r7:.6} and {r8:.6} at the last two probes)"
    )]
    KappaDiverged { r7: f64, r8: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailClass {
    Gumbel,
    Weibull,
}

/// Slowly varying factor in a Weibull-class tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SlowVariation {
    /// ell == 1 (pure power tail).
    One,
    /// Constant c > 0.
    Const(f64),
    /// c * (1 - ln eps)^p; requires p <= alpha so the tail stays monotone.
    LogPow { c: f64, p: f64 },
}

impl SlowVariation {
    pub fn eval(&self, eps: f64) -> f64 {
        match *self {
            SlowVariation::One => 1.0,
            SlowVariation::Const(c) => c,
            SlowVariation::LogPow { c, p } => c * (1.0 - eps.ln()).powf(p),
        }
    }
}

/// Gumbel-class catalog entries, identified by their integrated hazard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GumbelModel {
    /// m(x) = (1-x)^{-rho} - 1, rho > 0.
    PowerRho { rho: f64 },
    /// m(x) = exp(1/(1-x)) - e.
    ExpInv,
    /// m(x) = x/(1-x).
    Gnedenko,
    /// m(x) = exp(1/sqrt(1-x)) - e.
    ExpSqrt,
    /// m(x) = tan(pi x / 2).
    Tan,
    /// m(x) = L ln L with L = 1 - ln(1-x); curvature ratio diverges, so the
    /// point-process regularity conditions fail for this tail.
    LogLog,
}

impl GumbelModel {
    /// Integrated hazard m(x), x in [0,1). May overflow to +inf for the
    /// exponential-type tails; use `ln_m` in asymptotic regimes.
    pub fn m(&self, x: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&x));
        let h = 1.0 - x;
        match *self {
            GumbelModel::PowerRho { rho } => h.powf(-rho) - 1.0,
            GumbelModel::ExpInv => (1.0 / h).exp() - std::f64::consts::E,
            GumbelModel::Gnedenko => x / h,
            GumbelModel::ExpSqrt => (1.0 / h.sqrt()).exp() - std::f64::consts::E,
            GumbelModel::Tan => (std::f64::consts::FRAC_PI_2 * x).tan(),
            GumbelModel::LogLog => {
                let l = 1.0 - h.ln();
                l * l.ln()
            }
        }
    }

    /// First derivative m'(x).
    pub fn m1(&self, x: f64) -> f64 {
        let h = 1.0 - x;
        match *self {
            GumbelModel::PowerRho { rho } => rho * h.powf(-rho - 1.0),
            GumbelModel::ExpInv => (1.0 / h).exp() / (h * h),
            GumbelModel::Gnedenko => 1.0 / (h * h),
            GumbelModel::ExpSqrt => 0.5 * (1.0 / h.sqrt()).exp() * h.powf(-1.5),
            GumbelModel::Tan => {
                let c = (std::f64::consts::FRAC_PI_2 * x).cos();
                std::f64::consts::FRAC_PI_2 / (c * c)
            }
            GumbelModel::LogLog => {
                let l = 1.0 - h.ln();
                (l.ln() + 1.0) / h
            }
        }
    }

    /// Second derivative m''(x).
    pub fn m2(&self, x: f64) -> f64 {
        let h = 1.0 - x;
        match *self {
            GumbelModel::PowerRho { rho } => rho * (rho + 1.0) * h.powf(-rho - 2.0),
            GumbelModel::ExpInv => (1.0 / h).exp() * (1.0 + 2.0 * h) / h.powi(4),
            GumbelModel::Gnedenko => 2.0 / (h * h * h),
            GumbelModel::ExpSqrt => {
                0.25 * (1.0 / h.sqrt()).exp() * (1.0 + 3.0 * h.sqrt()) / h.powi(3)
            }
            GumbelModel::Tan => {
                let half_pi = std::f64::consts::FRAC_PI_2;
                let c = (half_pi * x).cos();
                let t = (half_pi * x).tan();
                2.0 * half_pi * half_pi * t / (c * c)
            }
            GumbelModel::LogLog => {
                let l = 1.0 - h.ln();
                (l.ln() + 1.0 + 1.0 / l) / (h * h)
            }
        }
    }

    /// ln m(1-h): stable for h down to f64 underflow.
    pub fn ln_m(&self, h: f64) -> f64 {
        match *self {
            GumbelModel::PowerRho { rho } => -rho * h.ln() + (-h.powf(rho)).ln_1p(),
            GumbelModel::ExpInv => {
                let u = 1.0 / h;
                u + (-(1.0 - u).exp()).ln_1p()
            }
            GumbelModel::Gnedenko => (1.0 - h).ln() - h.ln(),
            GumbelModel::ExpSqrt => {
                let v = 1.0 / h.sqrt();
                v + (-(1.0 - v).exp()).ln_1p()
            }
            GumbelModel::Tan => {
                let a = std::f64::consts::FRAC_PI_2 * h;
                a.cos().ln() - a.sin().ln()
            }
            GumbelModel::LogLog => {
                let l = 1.0 - h.ln();
                (l * l.ln()).ln()
            }
        }
    }

    /// ln m'(1-h).
    pub fn ln_m1(&self, h: f64) -> f64 {
        match *self {
            GumbelModel::PowerRho { rho } => rho.ln() - (rho + 1.0) * h.ln(),
            GumbelModel::ExpInv => 1.0 / h - 2.0 * h.ln(),
            GumbelModel::Gnedenko => -2.0 * h.ln(),
            GumbelModel::ExpSqrt => 1.0 / h.sqrt() - 2f64.ln() - 1.5 * h.ln(),
            GumbelModel::Tan => {
                let a = std::f64::consts::FRAC_PI_2 * h;
                std::f64::consts::FRAC_PI_2.ln() - 2.0 * a.sin().ln()
            }
            GumbelModel::LogLog => {
                let l = 1.0 - h.ln();
                (l.ln() + 1.0).ln() - h.ln()
            }
        }
    }

    /// ln m''(1-h).
    pub fn ln_m2(&self, h: f64) -> f64 {
        match *self {
            GumbelModel::PowerRho { rho } => (rho * (rho + 1.0)).ln() - (rho + 2.0) * h.ln(),
            GumbelModel::ExpInv => 1.0 / h + (2.0 * h).ln_1p() - 4.0 * h.ln(),
            GumbelModel::Gnedenko => 2f64.ln() - 3.0 * h.ln(),
            GumbelModel::ExpSqrt => {
                1.0 / h.sqrt() - 4f64.ln() - 3.0 * h.ln() + (3.0 * h.sqrt()).ln_1p()
            }
            GumbelModel::Tan => {
                let a = std::f64::consts::FRAC_PI_2 * h;
                (std::f64::consts::FRAC_PI_2 * std::f64::consts::PI).ln() - 3.0 * a.sin().ln()
                    + a.cos().ln()
            }
            GumbelModel::LogLog => {
                let l = 1.0 - h.ln();
                (l.ln() + 1.0 + 1.0 / l).ln() - 2.0 * h.ln()
            }
        }
    }

    /// Endpoint distance 1 - g(y) of the inverse hazard, computed without
    /// subtracting from 1 (except for `LogLog`, whose inverse is numeric):
    /// the tail integrands downstream divide by this quantity, and forming
    /// 1 - g in f64 would leave only ~1e-16/(1-g) relative accuracy.
    pub fn eps(&self, y: f64) -> f64 {
        debug_assert!(y >= 0.0);
        match *self {
            GumbelModel::PowerRho { rho } => (-y.ln_1p() / rho).exp(),
            GumbelModel::ExpInv => {
                let u = (y / std::f64::consts::E).ln_1p();
                1.0 / (1.0 + u)
            }
            GumbelModel::Gnedenko => 1.0 / (1.0 + y),
            GumbelModel::ExpSqrt => {
                let l = 1.0 + (y / std::f64::consts::E).ln_1p();
                1.0 / (l * l)
            }
            GumbelModel::Tan => {
                if y == 0.0 {
                    1.0
                } else {
                    std::f64::consts::FRAC_2_PI * (1.0 / y).atan()
                }
            }
            GumbelModel::LogLog => 1.0 - self.invert_m(y),
        }
    }

    /// Inverse hazard g = m^{-1}; closed form except for `LogLog`.
    pub fn g(&self, y: f64) -> f64 {
        debug_assert!(y >= 0.0);
        match *self {
            GumbelModel::PowerRho { rho } => -(-y.ln_1p() / rho).exp_m1(),
            GumbelModel::ExpInv => {
                // 1 - 1/ln(y+e) computed as u/(1+u) with u = ln1p(y/e).
                let u = (y / std::f64::consts::E).ln_1p();
                u / (1.0 + u)
            }
            GumbelModel::Gnedenko => y / (1.0 + y),
            GumbelModel::ExpSqrt => {
                let u = (y / std::f64::consts::E).ln_1p();
                let l = 1.0 + u;
                (2.0 * u + u * u) / (l * l)
            }
            GumbelModel::Tan => std::f64::consts::FRAC_2_PI * y.atan(),
            GumbelModel::LogLog => self.invert_m(y),
        }
    }

    /// g'(y) = 1/m'(g(y)) (exact inverse-function identity).
    pub fn g1(&self, y: f64) -> f64 {
        1.0 / self.m1(self.g(y))
    }

    /// g''(y) = -m''(g(y)) / m'(g(y))^3.
    pub fn g2(&self, y: f64) -> f64 {
        let x = self.g(y);
        let d1 = self.m1(x);
        -self.m2(x) / (d1 * d1 * d1)
    }

    /// (ln g)'(y) = g'(y)/g(y); decreasing, diverging at 0+.
    pub fn log_g_prime(&self, y: f64) -> f64 {
        let x = self.g(y);
        1.0 / (self.m1(x) * x)
    }

    /// (ln g)''(y) = g''/g - (g'/g)^2.
    pub fn log_g_second(&self, y: f64) -> f64 {
        let x = self.g(y);
        let d1 = self.m1(x);
        let lg1 = 1.0 / (d1 * x);
        -self.m2(x) / (d1 * d1 * d1 * x) - lg1 * lg1
    }

    /// Numeric inverse of m by bisection with Newton polish.
    fn invert_m(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, 1.0 - 1e-16);
        // m is increasing; shrink [lo,hi] around the root of m(x)=y.
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.m(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..4 {
            let step = (self.m(x) - y) / self.m1(x);
            let next = x - step;
            if next > lo && next < hi {
                x = next;
            }
        }
        x
    }

    /// Raw curvature ratios m''(x) m(x) x / m'(x)^2 at x = 1 - 10^-k,
    /// evaluated in log space.
    fn curvature_ratios(&self) -> [f64; 5] {
        let mut out = [0.0; 5];
        for (i, k) in PROBE_KS.iter().enumerate() {
            let h = 10f64.powi(-k);
            out[i] = (self.ln_m2(h) + self.ln_m(h) + (-h).ln_1p() - 2.0 * self.ln_m1(h)).exp();
        }
        out
    }

    /// Limiting curvature constant kappa = lim m''(x)m(x)x / m'(x)^2 as
    /// x -> 1, by two levels of Aitken extrapolation over the probe grid.
    /// Fails when the last two raw ratios disagree by more than 10%.
    pub fn kappa(&self) -> Result<KappaEstimate, FitnessError> {
        let raw = self.curvature_ratios();
        let (r7, r8) = (raw[3], raw[4]);
        if !r8.is_finite() || (r8 - r7).abs() > KAPPA_DIVERGENCE_TOL * r8.abs() {
            return Err(FitnessError::KappaDiverged { r7, r8 });
        }
        let a1 = aitken(&raw);
        let a2 = aitken(&a1);
        let value = *a2.last().unwrap_or_else(|| a1.last().unwrap());
        let spread = (value - a1[a1.len() - 1]).abs();
        Ok(KappaEstimate { value, raw, spread })
    }

    /// Reports the four tail-regularity conditions under which the
    /// point-process limits hold: positive hazard derivatives, vanishing
    /// m''/m'^2, a finite curvature constant, and vanishing m/m'.
    pub fn check_a5(&self) -> A5Report {
        // Interior grid uses direct derivatives; near the endpoint the
        // exponential-type hazards overflow, so positivity there is read
        // off finite log-derivatives instead.
        let grid: Vec<f64> = (1..=9).map(|i| 0.1 * i as f64).collect();
        let mut positive = grid
            .iter()
            .all(|&x| self.m1(x) > 0.0 && self.m2(x) > 0.0);
        positive &= PROBE_KS.iter().all(|k| {
            let h = 10f64.powi(-k);
            self.ln_m1(h).is_finite() && self.ln_m2(h).is_finite()
        });
        let derivative_positivity = ConditionCheck {
            values: grid.iter().map(|&x| self.m1(x)).collect(),
            pass: positive,
        };

        // m''/m'^2 along the probe grid, in log space.
        let curvature_decay = decay_check(
            PROBE_KS
                .iter()
                .map(|k| {
                    let h = 10f64.powi(-k);
                    (self.ln_m2(h) - 2.0 * self.ln_m1(h)).exp()
                })
                .collect(),
        );

        let kappa = self.kappa();
        let curvature_limit = ConditionCheck {
            values: self.curvature_ratios().to_vec(),
            pass: kappa.is_ok(),
        };

        // m/m' along the probe grid.
        let hazard_growth = decay_check(
            PROBE_KS
                .iter()
                .map(|k| {
                    let h = 10f64.powi(-k);
                    (self.ln_m(h) - self.ln_m1(h)).exp()
                })
                .collect(),
        );

        let pass = derivative_positivity.pass
            && curvature_decay.pass
            && curvature_limit.pass
            && hazard_growth.pass;
        A5Report {
            derivative_positivity,
            curvature_decay,
            curvature_limit,
            hazard_growth,
            kappa: kappa.ok().map(|k| k.value),
            pass,
        }
    }
}

fn aitken(seq: &[f64]) -> Vec<f64> {
    if seq.len() < 3 {
        return seq.to_vec();
    }
    seq.windows(3)
        .map(|w| {
            let d1 = w[1] - w[0];
            let d2 = w[2] - w[1];
            let den = d2 - d1;
            if den == 0.0 {
                w[2]
            } else {
                w[2] - d2 * d2 / den
            }
        })
        .collect()
}

/// Numeric verdict on a sequence that should tend to zero: non-increasing
/// (exponential-type ratios underflow to a flat 0) and either already
/// negligible or substantially decayed.
fn decay_check(values: Vec<f64>) -> ConditionCheck {
    let decreasing = values.windows(2).all(|w| w[1] <= w[0]);
    let first = values.first().copied().unwrap_or(f64::NAN);
    let last = values.last().copied().unwrap_or(f64::NAN);
    let pass = decreasing && (last <= 1e-6 || last <= 0.5 * first);
    ConditionCheck { values, pass }
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaEstimate {
    pub value: f64,
    /// Raw ratios at x = 1 - 10^-k, k = 4..8.
    pub raw: [f64; 5],
    /// Distance between the last two extrapolation levels.
    pub spread: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    pub values: Vec<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct A5Report {
    pub derivative_positivity: ConditionCheck,
    pub curvature_decay: ConditionCheck,
    pub curvature_limit: ConditionCheck,
    pub hazard_growth: ConditionCheck,
    pub kappa: Option<f64>,
    pub pass: bool,
}

/// Weibull-class model: tail eps^alpha * ell(eps) near the endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullModel {
    pub alpha: f64,
    pub ell: SlowVariation,
}

impl WeibullModel {
    pub fn new(alpha: f64, ell: SlowVariation) -> Result<Self, FitnessError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(FitnessError::InvalidParameter(format!(
                "tail exponent alpha must be positive and finite, got {alpha}"
            )));
        }
        match ell {
            SlowVariation::One => {}
            SlowVariation::Const(c) => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(FitnessError::InvalidParameter(format!(
                        "slowly varying constant must be positive, got {c}"
                    )));
                }
            }
            SlowVariation::LogPow { c, p } => {
                if !(c > 0.0 && c.is_finite()) || !p.is_finite() {
                    return Err(FitnessError::InvalidParameter(
                        "log-power slow variation needs finite c > 0 and finite p".into(),
                    ));
                }
                if p > alpha {
                    return Err(FitnessError::InvalidParameter(format!(
                        "log-power exponent p={p} exceeds alpha={alpha}; tail would not be monotone"
                    )));
                }
            }
        }
        Ok(Self { alpha, ell })
    }

    /// Tail mass mu((x,1]) clamped into [0,1].
    pub fn tail(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        if x >= 1.0 {
            return 0.0;
        }
        let eps = 1.0 - x;
        (eps.powf(self.alpha) * self.ell.eval(eps)).clamp(0.0, 1.0)
    }

    /// Inverse tail: the eps with eps^alpha ell(eps) = u. Newton in
    /// log coordinates, where ln T(eps) = alpha ln eps + ln ell(eps) has
    /// derivative alpha + eps ell'/ell, bounded away from 0 whenever the
    /// tail is monotone; converges in one step for pure power tails.
    fn invert_tail(&self, u: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&u));
        if u <= 0.0 {
            return 0.0;
        }
        // Mass the tail formula cannot reach (u above T(1)) sits in an
        // atom at fitness 0, i.e. eps = 1.
        if u >= self.ell.eval(1.0) {
            return 1.0;
        }
        let target = u.ln();
        let err_and_slope = |s: f64| {
            let (ln_ell, d) = match self.ell {
                SlowVariation::One => (0.0, self.alpha),
                SlowVariation::Const(c) => (c.ln(), self.alpha),
                SlowVariation::LogPow { c, p } => {
                    let l = 1.0 - s;
                    (c.ln() + p * l.ln(), self.alpha - p / l)
                }
            };
            (self.alpha * s + ln_ell - target, d)
        };
        // For non-increasing ell (p >= 0), s = (ln u - ln ell(1))/alpha
        // undershoots; for increasing ell walk further down until the
        // bracket is certain. The top end s = 0 always overshoots.
        let mut lo =
            ((target - self.ell.eval(1.0).ln()) / self.alpha).min(target / self.alpha);
        let mut guard = 0;
        while err_and_slope(lo).0 >= 0.0 && guard < 200 {
            lo = 2.0 * lo - 1.0;
            guard += 1;
        }
        let mut hi = 0.0f64;
        let mut s = (target / self.alpha).clamp(lo, hi);
        for _ in 0..80 {
            let (err, d) = err_and_slope(s);
            if err.abs() <= 1e-14 * target.abs().max(1.0) {
                break;
            }
            if err < 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            let newton = s - err / d;
            s = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
                break;
            }
        }
        s.exp()
    }
}

/// A fitness law on (0,1), dispatching on tail class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FitnessModel {
    Gumbel(GumbelModel),
    Weibull(WeibullModel),
}

impl FitnessModel {
    /// Catalog lookup. `params` are consumed in declaration order; models
    /// without parameters accept an empty slice.
    pub fn from_catalog(id: &str, params: &[f64]) -> Result<Self, FitnessError> {
        match id {
            "power_rho" => {
                let rho = *params
                    .first()
                    .ok_or(FitnessError::MissingParameter { id: "power_rho", param: "rho" })?;
                if !(rho > 0.0 && rho.is_finite()) {
                    return Err(FitnessError::InvalidParameter(format!(
                        "power_rho requires rho > 0, got {rho}"
                    )));
                }
                Ok(FitnessModel::Gumbel(GumbelModel::PowerRho { rho }))
            }
            "exp_inv" => Ok(FitnessModel::Gumbel(GumbelModel::ExpInv)),
            "gnedenko" => Ok(FitnessModel::Gumbel(GumbelModel::Gnedenko)),
            "exp_sqrt" => Ok(FitnessModel::Gumbel(GumbelModel::ExpSqrt)),
            "tan" => Ok(FitnessModel::Gumbel(GumbelModel::Tan)),
            "loglog_negative" => Ok(FitnessModel::Gumbel(GumbelModel::LogLog)),
            "weibull_alpha" => {
                let alpha = *params
                    .first()
                    .ok_or(FitnessError::MissingParameter { id: "weibull_alpha", param: "alpha" })?;
                let ell = match params.get(1) {
                    None => SlowVariation::One,
                    Some(&c) => SlowVariation::Const(c),
                };
                Ok(FitnessModel::Weibull(WeibullModel::new(alpha, ell)?))
            }
            other => Err(FitnessError::UnknownModel(other.to_string())),
        }
    }

    /// Every catalog identifier, in display order.
    pub const CATALOG_IDS: [&'static str; 7] = [
        "power_rho",
        "exp_inv",
        "gnedenko",
        "exp_sqrt",
        "tan",
        "loglog_negative",
        "weibull_alpha",
    ];

    pub fn class(&self) -> TailClass {
        match self {
            FitnessModel::Gumbel(_) => TailClass::Gumbel,
            FitnessModel::Weibull(_) => TailClass::Weibull,
        }
    }

    pub fn as_gumbel(&self) -> Result<&GumbelModel, FitnessError> {
        match self {
            FitnessModel::Gumbel(g) => Ok(g),
            FitnessModel::Weibull(_) => Err(FitnessError::NotGumbelClass),
        }
    }

    pub fn as_weibull(&self) -> Result<&WeibullModel, FitnessError> {
        match self {
            FitnessModel::Weibull(w) => Ok(w),
            FitnessModel::Gumbel(_) => Err(FitnessError::NotWeibullClass),
        }
    }

    /// Upper tail mu((x,1]).
    pub fn tail_prob(&self, x: f64) -> f64 {
        match self {
            FitnessModel::Gumbel(g) => {
                if x <= 0.0 {
                    1.0
                } else if x >= 1.0 {
                    0.0
                } else {
                    (-g.m(x)).exp()
                }
            }
            FitnessModel::Weibull(w) => w.tail(x),
        }
    }

    /// CDF on [0,1].
    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.tail_prob(x)
    }

    /// Quantile at level u in (0,1).
    pub fn quantile(&self, u: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&u));
        match self {
            FitnessModel::Gumbel(g) => g.g(-(1.0 - u).ln()),
            FitnessModel::Weibull(w) => 1.0 - w.invert_tail(1.0 - u),
        }
    }

    /// Draw one fitness value. Gumbel class uses the inverse-hazard path
    /// (E ~ Exp(1), fitness = g(E)); Weibull class inverts the tail
    /// numerically.
    pub fn sample_fitness<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            FitnessModel::Gumbel(g) => g.g(exp_draw(rng, 1.0)),
            FitnessModel::Weibull(w) => 1.0 - w.invert_tail(unit_open(rng)),
        }
    }

    /// Integral of `h` against the fitness law.
    ///
    /// Gumbel class substitutes x = g(y), reducing to an Exp(1)-weighted
    /// integral over y; Weibull class integrates h(quantile(u)) du. Both
    /// routes avoid needing a density for the tail parametrization.
    pub fn integrate<H: Fn(f64) -> f64>(&self, h: H, rel_tol: f64) -> f64 {
        match self {
            FitnessModel::Gumbel(g) => {
                quad::integrate_to_inf(&|y: f64| h(g.g(y)) * (-y).exp(), 0.0, 4.0, rel_tol).value
            }
            FitnessModel::Weibull(w) => {
                quad::integrate(&|u: f64| h(1.0 - w.invert_tail(1.0 - u)), 0.0, 1.0, rel_tol, 0.0)
                    .value
            }
        }
    }

    /// Integral of `h(eps)` against the law of the endpoint distance
    /// eps = 1 - fitness. Integrands that blow up (or cancel) near the
    /// essential supremum should use this entry point: eps reaches the
    /// integrand at full precision instead of through 1 - f, and the
    /// Weibull branch substitutes tail mass = t^alpha so that power-law
    /// blowups of h near eps = 0 are flattened before quadrature.
    pub fn integrate_eps<H: Fn(f64) -> f64>(&self, h: H, rel_tol: f64) -> f64 {
        match self {
            FitnessModel::Gumbel(g) => {
                quad::integrate_to_inf(&|y: f64| h(g.eps(y)) * (-y).exp(), 0.0, 4.0, rel_tol)
                    .value
            }
            FitnessModel::Weibull(w) => {
                let alpha = w.alpha;
                quad::integrate(
                    &|t: f64| {
                        h(w.invert_tail(t.powf(alpha))) * alpha * t.powf(alpha - 1.0)
                    },
                    0.0,
                    1.0,
                    rel_tol,
                    0.0,
                )
                .value
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ks_distance;
    use crate::rng::replicate_rng;
    use proptest::prelude::*;

    fn gumbel_catalog() -> Vec<(&'static str, GumbelModel)> {
        vec![
            ("power_0.5", GumbelModel::PowerRho { rho: 0.5 }),
            ("power_2", GumbelModel::PowerRho { rho: 2.0 }),
            ("exp_inv", GumbelModel::ExpInv),
            ("gnedenko", GumbelModel::Gnedenko),
            ("exp_sqrt", GumbelModel::ExpSqrt),
            ("tan", GumbelModel::Tan),
            ("loglog", GumbelModel::LogLog),
        ]
    }

    #[test]
    fn hazard_vanishes_at_zero() {
        for (name, m) in gumbel_catalog() {
            assert!(m.m(0.0).abs() < 1e-12, "{name}: m(0) = {}", m.m(0.0));
        }
    }

    #[test]
    fn inverse_identity() {
        for (name, model) in gumbel_catalog() {
            for i in 0..60 {
                let y = 1e-6 + (40.0 - 1e-6) * i as f64 / 59.0;
                let x = model.g(y);
                assert!((0.0..1.0).contains(&x), "{name}: g({y}) = {x}");
                let back = model.m(x);
                assert!(
                    (back - y).abs() <= 1e-8 * y.max(1.0),
                    "{name}: m(g({y})) = {back}"
                );
            }
        }
    }

    #[test]
    fn inverse_derivative_identity() {
        // g'(y) * m'(g(y)) == 1 is exact by construction; the point of the
        // check is that both factors are finite and positive on the range.
        for (name, model) in gumbel_catalog() {
            for y in [1e-4, 0.1, 1.0, 5.0, 20.0] {
                let p = model.g1(y) * model.m1(model.g(y));
                assert!((p - 1.0).abs() < 1e-8, "{name} at {y}: {p}");
                assert!(model.g1(y) > 0.0 && model.g2(y) < 0.0, "{name} at {y}");
            }
        }
    }

    #[test]
    fn log_hazard_matches_direct_where_finite() {
        for (name, model) in gumbel_catalog() {
            for h in [0.5, 0.1, 0.01] {
                let x = 1.0 - h;
                for (direct, logv) in [
                    (model.m(x), model.ln_m(h)),
                    (model.m1(x), model.ln_m1(h)),
                    (model.m2(x), model.ln_m2(h)),
                ] {
                    assert!(
                        (direct.ln() - logv).abs() < 1e-9 * logv.abs().max(1.0),
                        "{name} h={h}: ln {} vs {}",
                        direct.ln(),
                        logv
                    );
                }
            }
        }
    }

    #[test]
    fn kappa_limits() {
        let cases = [
            (GumbelModel::Gnedenko, 2.0, 1e-4),
            (GumbelModel::PowerRho { rho: 0.3 }, 1.3 / 0.3, 1e-3),
            (GumbelModel::PowerRho { rho: 0.5 }, 3.0, 1e-3),
            (GumbelModel::PowerRho { rho: 1.0 }, 2.0, 1e-3),
            (GumbelModel::PowerRho { rho: 2.0 }, 1.5, 1e-3),
            (GumbelModel::ExpInv, 1.0, 1e-3),
            (GumbelModel::ExpSqrt, 1.0, 1e-3),
            (GumbelModel::Tan, 2.0, 1e-3),
        ];
        for (model, want, tol) in cases {
            let est = model.kappa().expect("kappa should converge");
            assert!(
                (est.value - want).abs() <= tol,
                "{model:?}: kappa {} vs {want}",
                est.value
            );
        }
    }

    #[test]
    fn kappa_diverges_for_loglog() {
        assert!(matches!(
            GumbelModel::LogLog.kappa(),
            Err(FitnessError::KappaDiverged { .. })
        ));
    }

    #[test]
    fn regularity_report() {
        for model in [
            GumbelModel::PowerRho { rho: 0.5 },
            GumbelModel::PowerRho { rho: 0.3 },
            GumbelModel::Gnedenko,
            GumbelModel::ExpInv,
            GumbelModel::ExpSqrt,
            GumbelModel::Tan,
        ] {
            let rep = model.check_a5();
            assert!(rep.pass, "{model:?}: {rep:?}");
        }
        let rep = GumbelModel::LogLog.check_a5();
        assert!(!rep.pass);
        assert!(!rep.curvature_limit.pass);
    }

    #[test]
    fn catalog_ids_resolve() {
        for id in FitnessModel::CATALOG_IDS {
            let params: &[f64] = match id {
                "power_rho" => &[0.5],
                "weibull_alpha" => &[1.0],
                _ => &[],
            };
            FitnessModel::from_catalog(id, params).unwrap();
        }
        assert!(matches!(
            FitnessModel::from_catalog("nope", &[]),
            Err(FitnessError::UnknownModel(_))
        ));
        assert!(matches!(
            FitnessModel::from_catalog("power_rho", &[]),
            Err(FitnessError::MissingParameter { .. })
        ));
        assert!(FitnessModel::from_catalog("weibull_alpha", &[-1.0]).is_err());
    }

    #[test]
    fn weibull_validation() {
        assert!(WeibullModel::new(1.0, SlowVariation::One).is_ok());
        assert!(WeibullModel::new(0.0, SlowVariation::One).is_err());
        assert!(WeibullModel::new(1.0, SlowVariation::Const(-2.0)).is_err());
        assert!(WeibullModel::new(1.0, SlowVariation::LogPow { c: 1.0, p: 2.0 }).is_err());
        assert!(WeibullModel::new(3.0, SlowVariation::LogPow { c: 0.5, p: 1.0 }).is_ok());
    }

    #[test]
    fn uniform_is_weibull_alpha_one() {
        let m = FitnessModel::from_catalog("weibull_alpha", &[1.0]).unwrap();
        for u in [0.01, 0.3, 0.5, 0.77, 0.999] {
            assert!((m.quantile(u) - u).abs() < 1e-10, "quantile({u})");
            assert!((m.cdf(u) - u).abs() < 1e-12, "cdf({u})");
        }
    }

    #[test]
    fn sampling_matches_cdf() {
        // Inverse-CDF sampling vs. the model CDF for one model per class.
        let models = [
            FitnessModel::Gumbel(GumbelModel::Gnedenko),
            FitnessModel::Weibull(WeibullModel { alpha: 1.0, ell: SlowVariation::One }),
        ];
        for (i, m) in models.iter().enumerate() {
            let mut rng = replicate_rng(101 + i as u64, 0);
            let draws: Vec<f64> = (0..10_000).map(|_| m.sample_fitness(&mut rng)).collect();
            let d = ks_distance(&draws, |x| m.cdf(x)).unwrap();
            assert!(d <= 0.02, "model {i}: KS {d}");
        }
    }

    #[test]
    fn integrate_known_values() {
        // Mean of uniform = 1/2; mean of the alpha=2 pure power law = 1/3.
        let uni = FitnessModel::Weibull(WeibullModel { alpha: 1.0, ell: SlowVariation::One });
        assert!((uni.integrate(|x| x, 1e-11) - 0.5).abs() < 1e-9);
        let w2 = FitnessModel::Weibull(WeibullModel { alpha: 2.0, ell: SlowVariation::One });
        assert!((w2.integrate(|x| x, 1e-11) - 1.0 / 3.0).abs() < 1e-8);
        // Gnedenko: integral of 1/(1-x) dmu = int (1+y) e^-y dy = 2.
        let gn = FitnessModel::Gumbel(GumbelModel::Gnedenko);
        assert!((gn.integrate(|x| 1.0 / (1.0 - x), 1e-11) - 2.0).abs() < 1e-8);
        // Total mass is 1 for every catalog model.
        for id in FitnessModel::CATALOG_IDS {
            let params: &[f64] = match id {
                "power_rho" => &[0.7],
                "weibull_alpha" => &[1.5],
                _ => &[],
            };
            let m = FitnessModel::from_catalog(id, params).unwrap();
            let mass = m.integrate(|_| 1.0, 1e-11);
            assert!((mass - 1.0).abs() < 1e-8, "{id}: mass {mass}");
        }
    }

    proptest! {
        #[test]
        fn tail_prob_is_monotone_and_bounded(x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let m = FitnessModel::Gumbel(GumbelModel::PowerRho { rho: 0.8 });
            let (lo, hi) = if x < y { (x, y) } else { (y, x) };
            let (tl, th) = (m.tail_prob(lo), m.tail_prob(hi));
            prop_assert!((0.0..=1.0).contains(&tl));
            prop_assert!(th <= tl + 1e-15);
        }

        #[test]
        fn quantile_inverts_cdf(u in 0.25f64..0.999) {
            // The c < 1 slowly-varying constant leaves 1-c of the mass at
            // fitness 0 (the tail formula is taken as exact on all of
            // (0,1)), so the round-trip only holds above that atom.
            for m in [
                FitnessModel::Gumbel(GumbelModel::Tan),
                FitnessModel::Weibull(WeibullModel { alpha: 2.5, ell: SlowVariation::Const(0.8) }),
            ] {
                let x = m.quantile(u);
                prop_assert!((m.cdf(x) - u).abs() < 1e-8, "{:?}: cdf(q({u})) = {}", m, m.cdf(x));
            }
        }
    }
}
