//! Malthusian parameters: the exponential rate lambda at which each
//! dynamics creates families, found as the root of a model-specific
//! integral equation.
//!
//! For a reinforced branching process whose events add i members to the
//! triggering family and j fresh-fitness families, with means
//! m1 = E[i] and m2 = E[j], lambda solves
//!
//! ```text
//! m2 * Int f / (lambda - f m1) dmu(f) = 1,        lambda > m1,
//! ```
//!
//! which has a (unique) root exactly when m2 * Int f/(1-f) dmu > m1; the
//! condition integral may diverge, which counts as satisfied, so it is
//! evaluated with fitness capped at 1 - 1e-10. Special cases: the
//! fitness-degree attachment tree is the deterministic law i = j = 1
//! (equation Int x/(lambda - x) dmu = 1, condition Int dmu/(1-x) > 2),
//! and selection-mutation with offspring mean m and mutation probability
//! beta is (m1, m2) = ((1-beta) m, beta m) (condition
//! beta Int dmu/(1-x) > 1). The weighted partition process balances
//! identically at rate 1: Int (1-w)/(1-w) dmu = 1 for every weight law.

use crate::fitness::{FitnessError, FitnessModel};
use crate::special::ln_gamma;
use std::collections::BTreeMap;

/// Fitness cap used when evaluating the (possibly divergent) existence
/// condition integral.
const CONDITION_CAP: f64 = 1.0 - 1e-10;
/// Quadrature tolerance for the defining and condition integrals.
const QUAD_REL_TOL: f64 = 1e-11;

#[derive(Debug, thiserror::Error)]
pub enum MalthusianError {
    #[error("invalid offspring law: {0}")]
    InvalidLaw(String),
    #[error(
        "no growth rate: existence condition {condition:.6} does not exceed threshold {threshold:.6}"
    )]
    NoRoot { condition: f64, threshold: f64 },
    #[error("root residual {residual:e} exceeds tolerance")]
    NotConverged { residual: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Fitness(#[from] FitnessError),
}

/// Offspring law of one reproduction event: entries (i, j, p) meaning
/// "with probability p, add i members to the triggering family and found
/// j new families". The no-op outcome (0, 0) is forbidden.
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringLaw {
    entries: Vec<(u32, u32, f64)>,
}

impl OffspringLaw {
    pub fn new(entries: Vec<(u32, u32, f64)>) -> Result<Self, MalthusianError> {
        if entries.is_empty() {
            return Err(MalthusianError::InvalidLaw("no outcomes".into()));
        }
        let mut total = 0.0;
        for &(i, j, p) in &entries {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(MalthusianError::InvalidLaw(format!(
                    "outcome ({i}, {j}) has probability {p}"
                )));
            }
            if i == 0 && j == 0 && p > 0.0 {
                return Err(MalthusianError::InvalidLaw(
                    "the (0, 0) outcome must have probability 0".into(),
                ));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(MalthusianError::InvalidLaw(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { entries })
    }

    /// Law that always adds `same` members and founds `new` families.
    pub fn deterministic(same: u32, new: u32) -> Self {
        Self { entries: vec![(same, new, 1.0)] }
    }

    /// Each of `total` offspring independently founds a new family with
    /// probability `beta` (mutation), otherwise joins the triggering
    /// family: the binomial split law.
    pub fn thinned(total: u32, beta: f64) -> Result<Self, MalthusianError> {
        if total == 0 {
            return Err(MalthusianError::InvalidLaw("total offspring must be >= 1".into()));
        }
        if !((0.0..=1.0).contains(&beta) && beta.is_finite()) {
            return Err(MalthusianError::InvalidParameter(format!(
                "mutation probability must lie in [0, 1], got {beta}"
            )));
        }
        let n = total as f64;
        let entries = (0..=total)
            .map(|j| {
                let k = j as f64;
                let ln_choose =
                    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0);
                let p = if beta == 0.0 {
                    if j == 0 { 1.0 } else { 0.0 }
                } else if beta == 1.0 {
                    if j == total { 1.0 } else { 0.0 }
                } else {
                    (ln_choose + k * beta.ln() + (n - k) * (1.0 - beta).ln()).exp()
                };
                (total - j, j, p)
            })
            .collect();
        Ok(Self { entries })
    }

    /// Binomial split applied to a random total: the event's offspring
    /// count is drawn from `totals` (entries (k, p_k)), then each of the
    /// k offspring independently founds a new family with probability
    /// `beta`. The zero count must have probability 0 so the no-op
    /// outcome stays impossible.
    pub fn thinned_table(totals: &[(u32, f64)], beta: f64) -> Result<Self, MalthusianError> {
        if totals.is_empty() {
            return Err(MalthusianError::InvalidLaw("no offspring counts".into()));
        }
        let mut mass = 0.0;
        for &(k, p) in totals {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(MalthusianError::InvalidLaw(format!(
                    "count {k} has probability {p}"
                )));
            }
            if k == 0 && p > 0.0 {
                return Err(MalthusianError::InvalidLaw(
                    "zero offspring per event is not allowed".into(),
                ));
            }
            mass += p;
        }
        if (mass - 1.0).abs() > 1e-12 {
            return Err(MalthusianError::InvalidLaw(format!(
                "count probabilities sum to {mass}"
            )));
        }
        let mut merged: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for &(k, p_k) in totals {
            if p_k == 0.0 {
                continue;
            }
            let split = Self::thinned(k, beta)?;
            for &(i, j, p) in split.entries() {
                if p > 0.0 {
                    *merged.entry((i, j)).or_insert(0.0) += p_k * p;
                }
            }
        }
        Ok(Self {
            entries: merged.into_iter().map(|((i, j), p)| (i, j, p)).collect(),
        })
    }

    pub fn entries(&self) -> &[(u32, u32, f64)] {
        &self.entries
    }

    /// m1 = mean number of members added to the triggering family.
    pub fn mean_same(&self) -> f64 {
        self.entries.iter().map(|&(i, _, p)| i as f64 * p).sum()
    }

    /// m2 = mean number of new families per event.
    pub fn mean_new(&self) -> f64 {
        self.entries.iter().map(|&(_, j, p)| j as f64 * p).sum()
    }

    /// Outcome at cumulative-probability position u in [0, 1).
    pub fn sample_at(&self, u: f64) -> (u32, u32) {
        let mut acc = 0.0;
        for &(i, j, p) in &self.entries {
            acc += p;
            if u < acc {
                return (i, j);
            }
        }
        let &(i, j, _) = self.entries.last().expect("law is never empty");
        (i, j)
    }
}

/// Root of a growth-rate equation, with the existence-condition values
/// that certified it.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MalthusianSolution {
    pub lambda: f64,
    /// |defining integral - 1| at the returned root.
    pub residual: f64,
    /// Capped existence-condition integral.
    pub condition: f64,
    /// Value the condition must strictly exceed.
    pub threshold: f64,
    pub iterations: u32,
}

/// Core solver for means (m1, m2); see the module docs for the equation.
pub fn malthusian_from_means(
    model: &FitnessModel,
    m1: f64,
    m2: f64,
) -> Result<MalthusianSolution, MalthusianError> {
    if !(m1 >= 0.0 && m1.is_finite() && m2 > 0.0 && m2.is_finite()) {
        return Err(MalthusianError::InvalidParameter(format!(
            "offspring means must satisfy m1 >= 0, m2 > 0; got ({m1}, {m2})"
        )));
    }
    // Existence: m2 * Int f/(1-f) dmu > m1, with the integrand capped so a
    // divergent integral still reports a large finite value. Everything is
    // evaluated through the endpoint distance eps = 1 - f. Laws sitting
    // exactly on the threshold must fail by the decisiveness margin rather
    // than float luck: near-singular capped integrands carry quadrature
    // noise up to ~1e-8, while genuinely supercritical laws clear the
    // threshold by many orders of magnitude more than 1e-7.
    let margin = 1e-7 * m1.max(1.0);
    let condition =
        m2 * model.integrate_eps(|eps| (1.0 - eps) / eps.max(1.0 - CONDITION_CAP), QUAD_REL_TOL);
    if condition <= m1 + margin {
        return Err(MalthusianError::NoRoot { condition, threshold: m1 });
    }
    let lhs = |lambda: f64| {
        let delta = lambda - m1;
        m2 * model.integrate_eps(|eps| (1.0 - eps) / (delta + m1 * eps), QUAD_REL_TOL)
    };

    // The left side decreases in lambda from >1 near m1 to <1 at m1 + m2
    // (the integrand is bounded by 1/(lambda - m1) there). Walk the lower
    // edge toward m1 until it decisively brackets.
    let hi = m1 + m2;
    let mut gap = 1e-9 * hi.max(1.0);
    let mut iterations = 0u32;
    while lhs(m1 + gap) <= 1.0 + 1e-7 {
        gap *= 0.125;
        iterations += 1;
        if gap < 1e-15 * hi.max(1.0) {
            return Err(MalthusianError::NoRoot { condition, threshold: m1 });
        }
    }
    let (mut lo, mut hi) = (m1 + gap, hi);
    while hi - lo > 1e-14 * hi.max(1.0) && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if lhs(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let lambda = 0.5 * (lo + hi);
    let residual = (lhs(lambda) - 1.0).abs();
    if residual > 1e-8 {
        return Err(MalthusianError::NotConverged { residual });
    }
    Ok(MalthusianSolution { lambda, residual, condition, threshold: m1, iterations })
}

/// Growth rate of the reinforced branching process with the given
/// offspring law.
pub fn malthusian_rbp(
    model: &FitnessModel,
    law: &OffspringLaw,
) -> Result<MalthusianSolution, MalthusianError> {
    malthusian_from_means(model, law.mean_same(), law.mean_new())
}

/// Growth rate of the fitness-degree attachment tree: every event adds
/// one member and one new family (Int x/(lambda - x) dmu = 1).
pub fn malthusian_bb(model: &FitnessModel) -> Result<MalthusianSolution, MalthusianError> {
    malthusian_from_means(model, 1.0, 1.0)
}

/// Growth rate of selection-mutation dynamics: `offspring_mean` children
/// per event, each independently a mutant (fresh fitness) with
/// probability `beta`.
pub fn malthusian_selection_mutation(
    model: &FitnessModel,
    beta: f64,
    offspring_mean: f64,
) -> Result<MalthusianSolution, MalthusianError> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(MalthusianError::InvalidParameter(format!(
            "mutation probability must lie in (0, 1], got {beta}"
        )));
    }
    if !(offspring_mean > 0.0 && offspring_mean.is_finite()) {
        return Err(MalthusianError::InvalidParameter(format!(
            "offspring mean must be positive, got {offspring_mean}"
        )));
    }
    malthusian_from_means(model, (1.0 - beta) * offspring_mean, beta * offspring_mean)
}

/// Balance check for the weighted partition process: the rate equation
/// Int (1-w)/(alpha - w) dmu = 1 holds identically at alpha = 1 for every
/// weight law on (0,1); returns the quadrature residual as evidence.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct PartitionBalance {
    pub alpha: f64,
    pub residual: f64,
}

pub fn malthusian_crp(model: &FitnessModel) -> Result<PartitionBalance, MalthusianError> {
    let integral = model.integrate(|w| (1.0 - w) / (1.0 - w), QUAD_REL_TOL);
    let residual = (integral - 1.0).abs();
    if residual > 1e-8 {
        return Err(MalthusianError::NotConverged { residual });
    }
    Ok(PartitionBalance { alpha: 1.0, residual })
}
