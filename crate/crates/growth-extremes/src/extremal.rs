//! Extremal statistics of competing growth processes: rescaled point clouds,
//! an exact toy-model maximum, and Kolmogorov-Smirnov validation of the
//! limiting laws.
//!
//! A population snapshot lists families n = 1, 2, ... with birth times tau_n,
//! fitnesses F_n and sizes Z_n(t). Around the critical time sigma_t the
//! triples are rescaled so that, in the large-t limit, they form a Poisson
//! point process with an explicit intensity.
//!
//! For light-tailed (Gumbel-class) fitness laws with inverse integrated
//! hazard g the coordinates are
//!
//! ```text
//! s = (tau_n - sigma_t) / sqrt(sigma_t),
//! f = (F_n - g(log(n sqrt(sigma_t)))) / g'(log(n sqrt(sigma_t))),
//! z = exp(-gamma g(lambda sigma_t)(t - sigma_t)
//!         - a1 g(lambda sigma_t) log sigma_t + gamma T_hat) * Z_n(t),
//! ```
//!
//! with a1 = gamma/(2 lambda) and T_hat the (estimated) birth-time offset of
//! the family chart. For bounded-jump (Weibull-class) laws the window does
//! not contract and the coordinates are simply
//!
//! ```text
//! s = tau_n - sigma_t,     f = t (1 - F_n),     z = e^{-gamma (t - sigma_t)} Z_n(t).
//! ```
//!
//! In both cases the largest z converges to a Frechet law of shape
//! lambda/gamma, the birth fluctuation of the winning family is Gaussian with
//! variance 1/(lambda kappa) (Gumbel class), the fitness gap t(1 - F) of the
//! winner is Gamma(alpha, lambda) (Weibull class), and the ratio of the top
//! two sizes R satisfies P(R >= x) = x^{-lambda/gamma}.
//!
//! The toy model freezes each family at a deterministic birth time
//! tau_n = log(n)/lambda and grows it deterministically at its own fitness:
//! Z_n(t) = exp((t - tau_n) F_n) with F_n drawn from a law whose upper tail
//! is mu((1-x, 1]) = x^alpha. Then
//!
//! ```text
//! e^{-t} ((lambda t)^alpha / Gamma(alpha+1))^{1/lambda} * max_n Z_n(t)
//! ```
//!
//! converges to a Frechet law of shape lambda and scale 1. The maximum is
//! computed exactly over all families born before the truncation level
//! c * (alpha/lambda) log t by a prune: once t - tau_n drops below the
//! current second-largest log-size, no later family can alter the top two,
//! because log Z_n(t) = (t - tau_n) F_n < t - tau_n and tau_n is
//! non-decreasing in n.

use serde::Serialize;
use thiserror::Error;

use crate::dist::{DistError, Gaussian, GammaDist, Gumbel, ks_distance};
use crate::engines::PopulationSnapshot;
use crate::fitness::GumbelModel;
use crate::rng::IndexedUniforms;
use crate::scaling::ScalingBundle;
use crate::special::ln_gamma;

/// Errors from rescaling, extreme extraction and limit validation.
#[derive(Debug, Error)]
pub enum ExtremalError {
    /// The snapshot holds fewer than two families, so no ratio exists.
    #[error("at least two families are required, got {0}")]
    TooFewFamilies(usize),
    /// Too few replicate summaries to run a distributional test.
    #[error("at least {required} replicates are required, got {got}")]
    TooFewReplicates { required: usize, got: usize },
    #[error("parameter {name} must be positive and finite, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("horizon must exceed 1, got {0}")]
    HorizonTooSmall(f64),
    #[error("truncation multiplier must be at least 1, got {0}")]
    TruncationTooSmall(f64),
    #[error(transparent)]
    Distribution(#[from] DistError),
}

/// One family of a snapshot in the rescaled (s, f, z) chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RescaledPoint {
    /// Birth-time coordinate.
    pub s: f64,
    /// Fitness coordinate.
    pub f: f64,
    /// Size coordinate.
    pub z: f64,
}

/// Rescales a Gumbel-class snapshot into the (s, f, z) chart of the limiting
/// point process.
///
/// `bundle` must have been built for the same model at the snapshot's
/// horizon; its `t` and `sigma` drive the rescaling. `t_hat` is the
/// birth-time offset of the family chart (families born at
/// tau_n ~ log(n)/lambda + T_hat), typically estimated by
/// [`crate::engines::estimate_t_offset`].
///
/// The size coordinate is evaluated as exp(log-prefactor + log Z_n) so that
/// extreme prefactors cannot underflow before the multiplication; a family of
/// size zero maps to z = 0.
pub fn rescale_gumbel(
    snapshot: &PopulationSnapshot,
    model: &GumbelModel,
    bundle: &ScalingBundle,
    t_hat: f64,
) -> Vec<RescaledPoint> {
    let sigma = bundle.sigma.sigma;
    let t = bundle.t;
    let g_sigma = model.g(bundle.lambda * sigma);
    let ln_prefactor = -bundle.gamma * g_sigma * (t - sigma) - bundle.a1 * g_sigma * sigma.ln()
        + bundle.gamma * t_hat;
    let sqrt_sigma = sigma.sqrt();
    let half_ln_sigma = 0.5 * sigma.ln();
    snapshot
        .families
        .iter()
        .map(|fam| {
            let x = (fam.index as f64).ln() + half_ln_sigma;
            RescaledPoint {
                s: (fam.tau - sigma) / sqrt_sigma,
                f: (fam.fitness - model.g(x)) / model.g1(x),
                z: (ln_prefactor + (fam.size as f64).ln()).exp(),
            }
        })
        .collect()
}

/// Rescales a Weibull-class snapshot into the (s, f, z) chart of the limiting
/// point process. The horizon and critical time are taken from `bundle`.
pub fn rescale_weibull(snapshot: &PopulationSnapshot, bundle: &ScalingBundle) -> Vec<RescaledPoint> {
    let sigma = bundle.sigma.sigma;
    let t = bundle.t;
    let prefactor = (-bundle.gamma * (t - sigma)).exp();
    snapshot
        .families
        .iter()
        .map(|fam| RescaledPoint {
            s: fam.tau - sigma,
            f: t * (1.0 - fam.fitness),
            z: prefactor * fam.size as f64,
        })
        .collect()
}

/// The winning family of a snapshot together with the top-two size ratio.
#[derive(Debug, Clone, Copy)]
pub struct Extremes {
    /// Record of the largest family; ties resolve to the smaller index.
    pub argmax: crate::engines::FamilyRecord,
    /// Largest size divided by second-largest size (>= 1).
    pub top_ratio: f64,
}

/// Finds the largest family and the ratio of the two largest sizes.
///
/// Ties go to the family with the smaller index (the scan keeps the first
/// maximum it sees and snapshots list families in index order). Requires at
/// least two families.
///
/// ```
/// use growth_extremes::engines::{FamilyRecord, PopulationSnapshot};
/// use growth_extremes::extremal::extract_extremes;
///
/// let fam = |index, size| FamilyRecord { index, tau: 0.0, fitness: 0.5, size };
/// let snap = PopulationSnapshot {
///     clock: 1.0,
///     families: vec![fam(1, 5), fam(2, 3), fam(3, 5)],
///     total_size: 13,
///     family_count: 3,
///     total_rate: 6.5,
/// };
/// let ext = extract_extremes(&snap).unwrap();
/// assert_eq!(ext.argmax.index, 1);
/// assert_eq!(ext.top_ratio, 1.0);
/// ```
pub fn extract_extremes(snapshot: &PopulationSnapshot) -> Result<Extremes, ExtremalError> {
    top_two_records(&snapshot.families)
}

/// [`extract_extremes`] over a bare record slice, for network states whose
/// vertices play the role of families (size = degree or indegree).
pub fn top_two_records(
    families: &[crate::engines::FamilyRecord],
) -> Result<Extremes, ExtremalError> {
    if families.len() < 2 {
        return Err(ExtremalError::TooFewFamilies(families.len()));
    }
    let mut best = families[0];
    let mut second_size = 0u64;
    for fam in &families[1..] {
        if fam.size > best.size {
            second_size = best.size;
            best = *fam;
        } else if fam.size > second_size {
            second_size = fam.size;
        }
    }
    Ok(Extremes {
        argmax: best,
        top_ratio: best.size as f64 / second_size as f64,
    })
}

/// Rescales a raw toy-model log-maximum: log M - t + (alpha log(lambda t)
/// - log Gamma(alpha+1)) / lambda. With log M = t (a single family of
/// fitness one) this recovers log of ((lambda t)^alpha / Gamma(alpha+1))^{1/lambda}.
pub fn toy_rescale_log(log_max: f64, alpha: f64, lambda: f64, t: f64) -> f64 {
    log_max - t + (alpha * (lambda * t).ln() - ln_gamma(alpha + 1.0)) / lambda
}

/// Exact maximum of one toy-model replicate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ToySample {
    /// Logarithm of the rescaled maximum.
    pub rescaled_log: f64,
    /// The rescaled maximum itself (Frechet(lambda, 1) in the limit).
    pub rescaled: f64,
    /// Index of the winning family.
    pub argmax_index: u64,
    pub argmax_fitness: f64,
    /// Birth time log(argmax_index)/lambda of the winning family.
    pub argmax_birth: f64,
    /// Largest size over second-largest size (exact within the truncation).
    pub top_ratio: f64,
    /// Families actually evaluated before the prune fired.
    pub families_examined: u64,
    /// Upper bound on log Z for every family beyond the truncation level.
    pub excluded_log_bound: f64,
}

/// Computes the exact top two of max_n Z_n(t) in the toy model, where
/// tau_n = log(n)/lambda, Z_n(t) = exp((t - tau_n) F_n), and
/// F_n = 1 - U_n^{1/alpha} has upper-tail mass x^alpha.
///
/// Fitness draws come from `draws` indexed by the family rank n, so runs at
/// different horizons or truncation levels with the same key are coupled:
/// they see the same fitness sequence. Families are enumerated in birth
/// order up to the truncation level tau_n <= c (alpha/lambda) log t, i.e.
/// n <= t^{c alpha}, and enumeration stops early once t - tau_n is at most
/// the current second-largest log-size: every later family has
/// log Z = (t - tau) F < t - tau, so neither the maximum nor the runner-up
/// can change. The result is therefore exact over the truncated family set,
/// and `excluded_log_bound = t - c (alpha/lambda) log t` bounds the log-size
/// of anything excluded.
pub fn toy_model_oracle(
    alpha: f64,
    lambda: f64,
    t: f64,
    truncation_mult: f64,
    draws: &IndexedUniforms,
) -> Result<ToySample, ExtremalError> {
    for (name, value) in [("alpha", alpha), ("lambda", lambda)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(ExtremalError::NonPositiveParameter { name, value });
        }
    }
    if !(t > 1.0 && t.is_finite()) {
        return Err(ExtremalError::HorizonTooSmall(t));
    }
    if !(truncation_mult >= 1.0 && truncation_mult.is_finite()) {
        return Err(ExtremalError::TruncationTooSmall(truncation_mult));
    }
    let n_cap = t.powf(truncation_mult * alpha).min(1e15).floor() as u64;
    let alpha_inv = 1.0 / alpha;
    let mut best_log = f64::NEG_INFINITY;
    let mut second_log = f64::NEG_INFINITY;
    let mut best = (1u64, 0.0f64, 0.0f64);
    let mut examined = 0u64;
    let mut n = 1u64;
    while n <= n_cap {
        let tau = (n as f64).ln() / lambda;
        if tau >= t || t - tau <= second_log {
            break;
        }
        let fitness = 1.0 - draws.at(n).powf(alpha_inv);
        let log_size = (t - tau) * fitness;
        examined += 1;
        if log_size > best_log {
            second_log = best_log;
            best = (n, fitness, tau);
            best_log = log_size;
        } else if log_size > second_log {
            second_log = log_size;
        }
        n += 1;
    }
    let rescaled_log = toy_rescale_log(best_log, alpha, lambda, t);
    Ok(ToySample {
        rescaled_log,
        rescaled: rescaled_log.exp(),
        argmax_index: best.0,
        argmax_fitness: best.1,
        argmax_birth: best.2,
        top_ratio: (best_log - second_log).exp(),
        families_examined: examined,
        excluded_log_bound: t - truncation_mult * (alpha / lambda) * t.ln(),
    })
}

/// Per-replicate extremal summary, one CSV row per replicate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReplicateSummary {
    pub replicate: u64,
    /// Horizon t (continuous models) or arrival count n (discrete models).
    pub t_or_n: f64,
    /// Rescaled size of the largest family.
    pub max_size_rescaled: f64,
    pub argmax_fitness: f64,
    /// Rescaled birth time of the largest family.
    pub argmax_birth_rescaled: f64,
    pub top_ratio: f64,
    /// Birth-time offset used in the rescaling (0 when none applies).
    pub t_hat: f64,
}

/// Header for [`ReplicateSummary::csv_row`].
pub const SUMMARY_CSV_HEADER: &str =
    "replicate,t_or_n,max_size_rescaled,argmax_fitness,argmax_birth_rescaled,top_ratio,T_hat";

/// Shortest round-trip decimal for CSV cells, switching to scientific
/// notation outside the mid-range (rescaled sizes reach 1e-300 at long
/// horizons); non-finite values spell as `inf`/`NaN`.
pub fn csv_float(x: f64) -> String {
    if x.is_finite() {
        ryu::Buffer::new().format_finite(x).to_string()
    } else {
        x.to_string()
    }
}

impl ReplicateSummary {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.replicate,
            csv_float(self.t_or_n),
            csv_float(self.max_size_rescaled),
            csv_float(self.argmax_fitness),
            csv_float(self.argmax_birth_rescaled),
            csv_float(self.top_ratio),
            csv_float(self.t_hat)
        )
    }
}

/// Target parameters of the limiting laws checked by [`validate_limits`].
#[derive(Debug, Clone, Copy)]
pub struct LimitTargets {
    /// Shape of the Frechet law of the rescaled maximum (lambda/gamma).
    pub frechet_shape: f64,
    pub frechet_scale: f64,
    /// Variance 1/(lambda kappa) of the winner's birth fluctuation
    /// (Gumbel class only).
    pub gauss_variance: Option<f64>,
    /// Shape and rate (alpha, lambda) of the winner's fitness gap t(1 - F)
    /// (Weibull class only).
    pub gamma_fitness: Option<(f64, f64)>,
    /// Exponent of the top-two ratio law P(R >= x) = x^{-shape}.
    pub ratio_shape: f64,
}

impl LimitTargets {
    pub fn from_bundle(bundle: &ScalingBundle) -> Self {
        Self {
            frechet_shape: bundle.frechet_shape,
            frechet_scale: bundle.frechet_scale,
            gauss_variance: bundle.kappa.map(|k| 1.0 / (bundle.lambda * k)),
            gamma_fitness: bundle.alpha.map(|a| (a, bundle.lambda)),
            ratio_shape: bundle.frechet_shape,
        }
    }
}

/// One distributional check of a limit report.
#[derive(Debug, Clone, Serialize)]
pub struct LimitCheck {
    /// Which law was tested ("frechet-max", "gaussian-birth",
    /// "gamma-fitness-gap" or "ratio-power-law").
    pub law: String,
    pub n_replicates: usize,
    /// Kolmogorov-Smirnov distance (largest tail deviation for the ratio law).
    pub ks: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Target-law parameters actually used.
    pub params: serde_json::Value,
}

/// Outcome of [`validate_limits`], serializable as JSON.
#[derive(Debug, Clone, Serialize)]
pub struct LimitReport {
    pub checks: Vec<LimitCheck>,
    pub all_pass: bool,
}

impl LimitReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("limit report serializes")
    }
}

const KS_THRESHOLD: f64 = 0.05;
const RATIO_THRESHOLD: f64 = 0.05;
const MIN_REPLICATES: usize = 100;

/// Tests replicate summaries against the limiting laws named in `targets`.
///
/// Always checks the rescaled maximum against its Frechet law (via logs, as
/// a Gumbel check, so huge ratios cannot swamp the statistic) and the
/// top-two ratio against P(R >= x) = x^{-shape} on the grid
/// x in {1.5, 2, 3, 4}. When `gauss_variance` is set, the winner's rescaled
/// birth time is checked against a centered Gaussian; when `gamma_fitness`
/// is set, t(1 - F) of the winner is checked against the Gamma law. Requires
/// at least 100 replicates.
pub fn validate_limits(
    summaries: &[ReplicateSummary],
    targets: &LimitTargets,
) -> Result<LimitReport, ExtremalError> {
    if summaries.len() < MIN_REPLICATES {
        return Err(ExtremalError::TooFewReplicates {
            required: MIN_REPLICATES,
            got: summaries.len(),
        });
    }
    let n = summaries.len();
    let mut checks = Vec::new();

    let logs: Vec<f64> = summaries.iter().map(|s| s.max_size_rescaled.ln()).collect();
    let gumbel = Gumbel::new(targets.frechet_scale.ln(), 1.0 / targets.frechet_shape)?;
    let ks = ks_distance(&logs, |x| gumbel.cdf(x))?;
    checks.push(LimitCheck {
        law: "frechet-max".to_string(),
        n_replicates: n,
        ks,
        threshold: KS_THRESHOLD,
        pass: ks <= KS_THRESHOLD,
        params: serde_json::json!({
            "shape": targets.frechet_shape,
            "scale": targets.frechet_scale,
        }),
    });

    if let Some(variance) = targets.gauss_variance {
        let births: Vec<f64> = summaries.iter().map(|s| s.argmax_birth_rescaled).collect();
        let gauss = Gaussian::new(0.0, variance)?;
        let ks = ks_distance(&births, |x| gauss.cdf(x))?;
        checks.push(LimitCheck {
            law: "gaussian-birth".to_string(),
            n_replicates: n,
            ks,
            threshold: KS_THRESHOLD,
            pass: ks <= KS_THRESHOLD,
            params: serde_json::json!({ "mean": 0.0, "variance": variance }),
        });
    }

    if let Some((shape, rate)) = targets.gamma_fitness {
        let gaps: Vec<f64> = summaries
            .iter()
            .map(|s| s.t_or_n * (1.0 - s.argmax_fitness))
            .collect();
        let gamma = GammaDist::new(shape, rate)?;
        let ks = ks_distance(&gaps, |x| gamma.cdf(x))?;
        checks.push(LimitCheck {
            law: "gamma-fitness-gap".to_string(),
            n_replicates: n,
            ks,
            threshold: KS_THRESHOLD,
            pass: ks <= KS_THRESHOLD,
            params: serde_json::json!({ "shape": shape, "rate": rate }),
        });
    }

    let grid = [1.5, 2.0, 3.0, 4.0];
    let mut worst = 0.0f64;
    let mut tails = Vec::new();
    for &x in &grid {
        let hits = summaries.iter().filter(|s| s.top_ratio >= x).count();
        let empirical = hits as f64 / n as f64;
        let target = x.powf(-targets.ratio_shape);
        worst = worst.max((empirical - target).abs());
        tails.push(serde_json::json!({
            "x": x,
            "empirical": empirical,
            "target": target,
        }));
    }
    checks.push(LimitCheck {
        law: "ratio-power-law".to_string(),
        n_replicates: n,
        ks: worst,
        threshold: RATIO_THRESHOLD,
        pass: worst <= RATIO_THRESHOLD,
        params: serde_json::json!({ "shape": targets.ratio_shape, "tails": tails }),
    });

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(LimitReport { checks, all_pass })
}
