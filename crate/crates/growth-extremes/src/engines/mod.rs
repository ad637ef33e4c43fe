//! Stochastic engines for the competing-growth dynamics.
//!
//! Every engine produces an immutable [`PopulationSnapshot`]: the family
//! table (birth time tau_n, fitness F_n, size Z_n, numbered in birth
//! order from 1) together with the clock, the population total
//! N(t) = sum Z_n, the family count M(t), and the total reproduction
//! rate sum Z_n F_n that drives the event clock. Event-driven engines
//! can additionally log every reproduction event. Engines are
//! single-threaded and own their random stream; replicate-level
//! parallelism happens above them, and a snapshot is safe to hand
//! across threads once emitted.

use serde::Serialize;
use std::fmt::Write as _;
use thiserror::Error;

mod growth;
mod rbp;

pub use growth::{
    simulate_ct_gw, simulate_ct_gw_capped, simulate_yule, simulate_yule_capped, GrowthPath,
    DEFAULT_SIZE_CAP,
};
pub use rbp::{
    estimate_t_offset, simulate_rbp, simulate_selection_mutation, RbpOptions, RbpOutput, RbpSim,
    SamplerKind,
};

/// Failures of the stochastic engines.
#[derive(Debug, Error)]
pub enum EngineError {
    /// A pure-growth path outgrew its configured ceiling.
    #[error("population size {size} exceeded the cap {cap}")]
    SizeCap { size: u64, cap: u64 },
    /// The total event rate is no longer a positive finite number.
    #[error("total event rate degenerated to {rate}")]
    RateUnderflow { rate: f64 },
    /// A parameter fails its precondition.
    #[error("invalid engine parameter: {0}")]
    InvalidParameter(String),
    /// The offspring law is malformed.
    #[error(transparent)]
    Law(#[from] crate::malthusian::MalthusianError),
}

/// One family: birth time, fitness, and current size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyRecord {
    /// Birth-order number, starting at 1 for the founder.
    pub index: u64,
    /// Birth time tau_n.
    pub tau: f64,
    /// Fitness F_n, strictly inside (0, 1).
    pub fitness: f64,
    /// Current size Z_n, at least 1.
    pub size: u64,
}

/// State of a population at a fixed time.
#[derive(Debug, Clone, Serialize)]
pub struct PopulationSnapshot {
    /// The time the snapshot was taken.
    pub clock: f64,
    /// Families in birth order.
    pub families: Vec<FamilyRecord>,
    /// N(t) = sum of family sizes.
    pub total_size: u64,
    /// M(t) = number of families born by `clock`.
    pub family_count: u64,
    /// sum Z_n F_n, maintained incrementally by the engine.
    pub total_rate: f64,
}

impl PopulationSnapshot {
    /// The total rate recomputed from scratch; the incrementally
    /// maintained value must agree within 1e-9 relative.
    pub fn recomputed_rate(&self) -> f64 {
        self.families
            .iter()
            .map(|f| f.size as f64 * f.fitness)
            .sum()
    }

    /// CSV rendering with header `family_index,tau,fitness,size`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.families.len() + 1));
        out.push_str("family_index,tau,fitness,size\n");
        for f in &self.families {
            let _ = writeln!(out, "{},{},{},{}", f.index, f.tau, f.fitness, f.size);
        }
        out
    }
}

/// One reproduction event of an event-driven engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventRecord {
    /// 1-based event number.
    pub event_index: u64,
    /// Event time.
    pub time: f64,
    /// 1-based index of the family that reproduced.
    pub family_index: u64,
    /// Members added to the reproducing family.
    pub delta_same_family: u32,
    /// Fresh families founded by the event.
    pub new_families: u32,
}

/// CSV rendering of an event log, header
/// `event_index,time,family_index,delta_same_family,new_families`.
pub fn events_to_csv(events: &[EventRecord]) -> String {
    let mut out = String::with_capacity(32 * (events.len() + 1));
    out.push_str("event_index,time,family_index,delta_same_family,new_families\n");
    for e in events {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            e.event_index, e.time, e.family_index, e.delta_same_family, e.new_families
        );
    }
    out
}

/// When to stop an event-driven simulation. Supercritical growth makes
/// long horizons unaffordable, so a population ceiling is always armed
/// (default 1e7) and the reached time is reported in the snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    /// Stop the clock at this time.
    pub t_end: Option<f64>,
    /// Stop once N(t) reaches this many individuals.
    pub max_population: u64,
    /// Stop once M(t) reaches this many families.
    pub max_families: Option<u64>,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            t_end: None,
            max_population: 10_000_000,
            max_families: None,
        }
    }
}

impl StopRule {
    /// Stop at time `t` (population ceiling stays armed at the default).
    pub fn horizon(t: f64) -> Self {
        Self {
            t_end: Some(t),
            ..Self::default()
        }
    }

    /// Stop once the population reaches `n` individuals.
    pub fn population(n: u64) -> Self {
        Self {
            max_population: n,
            ..Self::default()
        }
    }

    /// Stop once `n` families exist.
    pub fn families(n: u64) -> Self {
        Self {
            max_families: Some(n),
            ..Self::default()
        }
    }

    pub(crate) fn validate(&self) -> Result<(), EngineError> {
        if let Some(t) = self.t_end {
            if !(t > 0.0 && t.is_finite()) {
                return Err(EngineError::InvalidParameter(format!(
                    "stop time must be positive and finite, got {t}"
                )));
            }
        }
        if self.max_population == 0 {
            return Err(EngineError::InvalidParameter(
                "population ceiling must be at least 1".into(),
            ));
        }
        if self.max_families == Some(0) {
            return Err(EngineError::InvalidParameter(
                "family ceiling must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Which stop condition ended a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StoppedBy {
    /// The time horizon was reached.
    Horizon,
    /// The population ceiling was reached.
    Population,
    /// The family ceiling was reached.
    Families,
}
