//! Pure-growth paths: Yule processes and continuous-time Galton-Watson
//! counts, the building blocks individual families grow by.
//!
//! A size-k state jumps at rate k * gamma. A Yule jump adds exactly one
//! individual; a Galton-Watson jump adds J individuals drawn from an
//! offspring table (J may be 0, so counts are non-decreasing and the
//! Yule process is the table {1 with probability 1}). Waiting times are
//! exact exponentials, so the sampled path has the exact law. Sizes
//! grow like e^{gamma t} in mean, hence a hard ceiling guards memory
//! and runtime.

use super::{EngineError, StoppedBy};
use crate::rng::{exp_draw, unit_open};
use rand::Rng;

/// Ceiling on pure-growth path sizes unless a caller overrides it.
pub const DEFAULT_SIZE_CAP: u64 = 100_000_000;

/// An exact jump path of a pure-growth count started at 1.
#[derive(Debug, Clone)]
pub struct GrowthPath {
    /// Every jump as (time, size after the jump), in time order.
    pub jumps: Vec<(f64, u64)>,
    /// Size at the end of the horizon.
    pub final_size: u64,
    /// The simulated horizon.
    pub t_end: f64,
    /// Always [`StoppedBy::Horizon`] on success; kept for symmetry with
    /// the event-driven engines.
    pub stopped_by: StoppedBy,
}

/// Yule process with birth rate `gamma` per individual, run to `t_end`
/// under the default size cap.
pub fn simulate_yule<R: Rng + ?Sized>(
    gamma: f64,
    t_end: f64,
    rng: &mut R,
) -> Result<GrowthPath, EngineError> {
    simulate_yule_capped(gamma, t_end, DEFAULT_SIZE_CAP, rng)
}

/// Yule process with an explicit size ceiling; exceeding it is an error
/// (the law has no finite-size version of the remaining path).
pub fn simulate_yule_capped<R: Rng + ?Sized>(
    gamma: f64,
    t_end: f64,
    cap: u64,
    rng: &mut R,
) -> Result<GrowthPath, EngineError> {
    check_growth_params(gamma, t_end)?;
    let mut size: u64 = 1;
    let mut clock = 0.0;
    let mut jumps = Vec::new();
    loop {
        let wait = exp_draw(rng, size as f64 * gamma);
        if clock + wait > t_end {
            break;
        }
        clock += wait;
        size += 1;
        if size > cap {
            return Err(EngineError::SizeCap { size, cap });
        }
        jumps.push((clock, size));
    }
    Ok(GrowthPath {
        jumps,
        final_size: size,
        t_end,
        stopped_by: StoppedBy::Horizon,
    })
}

/// Continuous-time Galton-Watson count: in state k the next jump comes
/// at rate k * `gamma_rate` and adds J drawn from `law`, a table of
/// (count, probability) entries. Runs under the default size cap.
pub fn simulate_ct_gw<R: Rng + ?Sized>(
    law: &[(u32, f64)],
    gamma_rate: f64,
    t_end: f64,
    rng: &mut R,
) -> Result<GrowthPath, EngineError> {
    simulate_ct_gw_capped(law, gamma_rate, t_end, DEFAULT_SIZE_CAP, rng)
}

/// Continuous-time Galton-Watson count with an explicit size ceiling.
pub fn simulate_ct_gw_capped<R: Rng + ?Sized>(
    law: &[(u32, f64)],
    gamma_rate: f64,
    t_end: f64,
    cap: u64,
    rng: &mut R,
) -> Result<GrowthPath, EngineError> {
    check_growth_params(gamma_rate, t_end)?;
    check_marginal_law(law)?;
    // A single-outcome table needs no selection draw; this keeps the
    // stream identical to the Yule path for the {1} table.
    let single = (law.len() == 1).then(|| law[0].0);
    let mut size: u64 = 1;
    let mut clock = 0.0;
    let mut jumps = Vec::new();
    loop {
        let wait = exp_draw(rng, size as f64 * gamma_rate);
        if clock + wait > t_end {
            break;
        }
        clock += wait;
        let added = match single {
            Some(j) => j,
            None => sample_marginal(law, unit_open(rng)),
        };
        size += added as u64;
        if size > cap {
            return Err(EngineError::SizeCap { size, cap });
        }
        jumps.push((clock, size));
    }
    Ok(GrowthPath {
        jumps,
        final_size: size,
        t_end,
        stopped_by: StoppedBy::Horizon,
    })
}

fn check_growth_params(gamma: f64, t_end: f64) -> Result<(), EngineError> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(EngineError::InvalidParameter(format!(
            "growth rate must be positive and finite, got {gamma}"
        )));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(EngineError::InvalidParameter(format!(
            "horizon must be positive and finite, got {t_end}"
        )));
    }
    Ok(())
}

fn check_marginal_law(law: &[(u32, f64)]) -> Result<(), EngineError> {
    if law.is_empty() {
        return Err(EngineError::InvalidParameter(
            "offspring table must not be empty".into(),
        ));
    }
    let mut total = 0.0;
    for &(k, p) in law {
        if !(p >= 0.0 && p.is_finite()) {
            return Err(EngineError::InvalidParameter(format!(
                "offspring count {k} has probability {p}"
            )));
        }
        total += p;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(EngineError::InvalidParameter(format!(
            "offspring probabilities sum to {total}"
        )));
    }
    Ok(())
}

fn sample_marginal(law: &[(u32, f64)], u: f64) -> u32 {
    let mut acc = 0.0;
    for &(k, p) in law {
        acc += p;
        if u < acc {
            return k;
        }
    }
    law.last().expect("law is never empty").0
}
