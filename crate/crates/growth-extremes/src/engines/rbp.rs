//! The reinforced branching process engine.
//!
//! Families carry a fitness F_n drawn once at birth; a family of size
//! Z_n reproduces at rate Z_n F_n. At a reproduction event the
//! offspring law picks an outcome (i, j): the triggering family grows
//! by i and j fresh families are founded at the event time, each with
//! an independent fitness. The scheme is the exact Gillespie
//! construction: waiting times are exponential in the total rate
//! R = sum Z_n F_n and the triggering family is chosen with probability
//! Z_n F_n / R. The selection-mutation dynamics is the same process
//! under the binomially thinned offspring law, where each of a birth
//! event's offspring mutates (founds a family) with probability beta.
//!
//! Two interchangeable family samplers implement the weighted choice:
//! a Fenwick tree (O(log M) per event, the default), and an
//! individual-indexed table with fitness rejection (O(1) per event
//! amortized, useful when event counts reach 1e7). Both sample the
//! exact law; they consume the stream differently, so seeds are only
//! comparable within one sampler kind.

use super::{EngineError, EventRecord, FamilyRecord, PopulationSnapshot, StopRule, StoppedBy};
use crate::fenwick::WeightedIndex;
use crate::fitness::FitnessModel;
use crate::malthusian::OffspringLaw;
use crate::rng::{exp_draw, unit_open, EngineRng};

/// Weighted family-selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplerKind {
    /// Fenwick (binary indexed) tree over family weights Z_n F_n.
    #[default]
    Fenwick,
    /// Uniform pick of an individual, accepted with probability equal
    /// to its family's fitness. Exact by Z_n F_n proportionality.
    IndividualTable,
}

/// Knobs of a reinforced-branching run.
#[derive(Debug, Clone, Copy)]
pub struct RbpOptions {
    pub stop: StopRule,
    /// Keep the full event log (memory scales with event count).
    pub record_events: bool,
    pub sampler: SamplerKind,
    /// Full weight rebuild period, in events, to stop floating-point
    /// drift in the incrementally maintained rates.
    pub rebuild_every: u64,
}

impl Default for RbpOptions {
    fn default() -> Self {
        Self {
            stop: StopRule::default(),
            record_events: false,
            sampler: SamplerKind::Fenwick,
            rebuild_every: 1 << 20,
        }
    }
}

/// Result of a finished run.
#[derive(Debug, Clone)]
pub struct RbpOutput {
    pub snapshot: PopulationSnapshot,
    /// Event log; empty unless `record_events` was set.
    pub events: Vec<EventRecord>,
    pub stopped_by: StoppedBy,
}

/// Table-sampler entry: the family id plus a copy of that family's
/// (immutable) fitness, packed so a rejection trial reads one cache line
/// instead of chasing a second pointer into the much larger family table.
#[derive(Debug, Clone, Copy)]
struct Individual {
    family: u32,
    fitness: f64,
}

/// A running reinforced branching process.
#[derive(Debug)]
pub struct RbpSim {
    model: FitnessModel,
    law: OffspringLaw,
    options: RbpOptions,
    rng: EngineRng,
    clock: f64,
    families: Vec<FamilyRecord>,
    /// Fenwick state (empty for the table sampler).
    weights: WeightedIndex,
    /// One entry per individual (empty for the Fenwick sampler).
    individuals: Vec<Individual>,
    total_rate: f64,
    total_size: u64,
    events_done: u64,
    events: Vec<EventRecord>,
}

impl RbpSim {
    /// Fresh process: one founder family of size 1 born at time 0 with
    /// fitness drawn from the model (the first stream consumption).
    pub fn new(
        model: &FitnessModel,
        law: OffspringLaw,
        options: RbpOptions,
        mut rng: EngineRng,
    ) -> Result<Self, EngineError> {
        let fitness = model.sample_fitness(&mut rng);
        Self::with_families(model, law, options, rng, &[(0.0, fitness, 1)])
    }

    /// Start from an explicit family table (tau, fitness, size), e.g. a
    /// frozen configuration in a selection-frequency test. Founders'
    /// fitnesses are taken as given and may sit on the closed upper
    /// boundary (model draws never do); the stream is consumed only by
    /// subsequent events.
    pub fn with_families(
        model: &FitnessModel,
        law: OffspringLaw,
        options: RbpOptions,
        rng: EngineRng,
        seed_families: &[(f64, f64, u64)],
    ) -> Result<Self, EngineError> {
        options.stop.validate()?;
        if seed_families.is_empty() {
            return Err(EngineError::InvalidParameter(
                "at least one founder family is required".into(),
            ));
        }
        let mut families = Vec::with_capacity(seed_families.len());
        let mut last_tau = f64::NEG_INFINITY;
        for (pos, &(tau, fitness, size)) in seed_families.iter().enumerate() {
            if !(fitness > 0.0 && fitness <= 1.0) {
                return Err(EngineError::InvalidParameter(format!(
                    "family fitness must lie in (0, 1], got {fitness}"
                )));
            }
            if size == 0 {
                return Err(EngineError::InvalidParameter(
                    "family sizes must be at least 1".into(),
                ));
            }
            if !tau.is_finite() || tau < last_tau {
                return Err(EngineError::InvalidParameter(
                    "family birth times must be finite and non-decreasing".into(),
                ));
            }
            last_tau = tau;
            families.push(FamilyRecord {
                index: pos as u64 + 1,
                tau,
                fitness,
                size,
            });
        }
        let clock = last_tau.max(0.0);
        let mut sim = Self {
            model: *model,
            law,
            options,
            rng,
            clock,
            families,
            weights: WeightedIndex::new(),
            individuals: Vec::new(),
            total_rate: 0.0,
            total_size: seed_families.iter().map(|&(_, _, s)| s).sum(),
            events_done: 0,
            events: Vec::new(),
        };
        sim.rebuild();
        if let SamplerKind::IndividualTable = sim.options.sampler {
            sim.individuals = Vec::with_capacity(sim.total_size as usize);
            for (pos, f) in sim.families.iter().enumerate() {
                for _ in 0..f.size {
                    sim.individuals.push(Individual {
                        family: pos as u32,
                        fitness: f.fitness,
                    });
                }
            }
        }
        Ok(sim)
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn total_size(&self) -> u64 {
        self.total_size
    }

    pub fn family_count(&self) -> u64 {
        self.families.len() as u64
    }

    pub fn total_rate(&self) -> f64 {
        self.total_rate
    }

    pub fn families(&self) -> &[FamilyRecord] {
        &self.families
    }

    /// Copy of the current state.
    pub fn snapshot(&self) -> PopulationSnapshot {
        PopulationSnapshot {
            clock: self.clock,
            families: self.families.clone(),
            total_size: self.total_size,
            family_count: self.families.len() as u64,
            total_rate: self.total_rate,
        }
    }

    /// One Gillespie event. `Ok(None)` means the waiting time crossed
    /// the stop horizon: the clock is now pinned at `t_end` and the
    /// state is final.
    pub fn step(&mut self) -> Result<Option<EventRecord>, EngineError> {
        if !(self.total_rate.is_finite() && self.total_rate > 0.0) {
            return Err(EngineError::RateUnderflow {
                rate: self.total_rate,
            });
        }
        let wait = exp_draw(&mut self.rng, self.total_rate);
        if let Some(t_end) = self.options.stop.t_end {
            if self.clock + wait > t_end {
                self.clock = t_end;
                return Ok(None);
            }
        }
        self.clock += wait;

        let chosen = self.select_family()?;
        let (same, new) = if self.law.entries().len() == 1 {
            let &(i, j, _) = &self.law.entries()[0];
            (i, j)
        } else {
            let u = unit_open(&mut self.rng);
            self.law.sample_at(u)
        };

        if same > 0 {
            let fitness = self.families[chosen].fitness;
            self.families[chosen].size += same as u64;
            self.total_size += same as u64;
            let delta = same as f64 * fitness;
            self.total_rate += delta;
            match self.options.sampler {
                SamplerKind::Fenwick => self.weights.add(chosen, delta),
                SamplerKind::IndividualTable => {
                    for _ in 0..same {
                        self.individuals.push(Individual {
                            family: chosen as u32,
                            fitness,
                        });
                    }
                }
            }
        }
        for _ in 0..new {
            if self.families.len() >= u32::MAX as usize {
                return Err(EngineError::InvalidParameter(
                    "family count exceeded the addressable range".into(),
                ));
            }
            let fitness = self.model.sample_fitness(&mut self.rng);
            let index = self.families.len() as u64 + 1;
            self.families.push(FamilyRecord {
                index,
                tau: self.clock,
                fitness,
                size: 1,
            });
            self.total_size += 1;
            self.total_rate += fitness;
            match self.options.sampler {
                SamplerKind::Fenwick => self.weights.push(fitness),
                SamplerKind::IndividualTable => self.individuals.push(Individual {
                    family: self.families.len() as u32 - 1,
                    fitness,
                }),
            }
        }

        self.events_done += 1;
        if self.options.rebuild_every > 0 && self.events_done % self.options.rebuild_every == 0 {
            self.rebuild();
        }
        let record = EventRecord {
            event_index: self.events_done,
            time: self.clock,
            family_index: chosen as u64 + 1,
            delta_same_family: same,
            new_families: new,
        };
        if self.options.record_events {
            self.events.push(record);
        }
        Ok(Some(record))
    }

    /// Run until a stop condition is met.
    pub fn run(&mut self) -> Result<StoppedBy, EngineError> {
        loop {
            if self.total_size >= self.options.stop.max_population {
                return Ok(StoppedBy::Population);
            }
            if let Some(max_families) = self.options.stop.max_families {
                if self.families.len() as u64 >= max_families {
                    return Ok(StoppedBy::Families);
                }
            }
            if self.step()?.is_none() {
                return Ok(StoppedBy::Horizon);
            }
        }
    }

    /// Package the final state.
    pub fn into_output(self, stopped_by: StoppedBy) -> RbpOutput {
        RbpOutput {
            snapshot: PopulationSnapshot {
                clock: self.clock,
                total_size: self.total_size,
                family_count: self.families.len() as u64,
                total_rate: self.total_rate,
                families: self.families,
            },
            events: self.events,
            stopped_by,
        }
    }

    fn select_family(&mut self) -> Result<usize, EngineError> {
        // With one family no randomness is needed; skipping the draw
        // keeps single-family runs on the same stream as a pure-growth
        // path of that family.
        if self.families.len() == 1 {
            return Ok(0);
        }
        match self.options.sampler {
            SamplerKind::Fenwick => {
                let u = unit_open(&mut self.rng);
                Ok(self.weights.sample(u))
            }
            SamplerKind::IndividualTable => {
                let n = self.individuals.len();
                for _ in 0..10_000_000u64 {
                    let u = unit_open(&mut self.rng);
                    let idx = ((u * n as f64) as usize).min(n - 1);
                    let entry = self.individuals[idx];
                    let accept = unit_open(&mut self.rng);
                    if accept < entry.fitness {
                        return Ok(entry.family as usize);
                    }
                }
                Err(EngineError::RateUnderflow {
                    rate: self.total_rate / self.total_size as f64,
                })
            }
        }
    }

    /// Recompute rates from the family table, erasing incremental
    /// floating-point drift.
    fn rebuild(&mut self) {
        match self.options.sampler {
            SamplerKind::Fenwick => {
                let weights: Vec<f64> = self
                    .families
                    .iter()
                    .map(|f| f.size as f64 * f.fitness)
                    .collect();
                self.total_rate = weights.iter().sum();
                self.weights = WeightedIndex::with_weights(&weights);
            }
            SamplerKind::IndividualTable => {
                self.total_rate = self
                    .families
                    .iter()
                    .map(|f| f.size as f64 * f.fitness)
                    .sum();
            }
        }
    }
}

/// Run a reinforced branching process to its stop condition.
pub fn simulate_rbp(
    model: &FitnessModel,
    law: OffspringLaw,
    options: RbpOptions,
    rng: EngineRng,
) -> Result<RbpOutput, EngineError> {
    let mut sim = RbpSim::new(model, law, options, rng)?;
    let stopped_by = sim.run()?;
    Ok(sim.into_output(stopped_by))
}

/// Selection-mutation dynamics: each reproduction event draws its
/// offspring count from `offspring_counts` (a (count, probability)
/// table) and every offspring independently founds a new family with
/// probability `beta`. Equivalent to the reinforced branching process
/// under the binomially thinned law.
pub fn simulate_selection_mutation(
    model: &FitnessModel,
    beta: f64,
    offspring_counts: &[(u32, f64)],
    options: RbpOptions,
    rng: EngineRng,
) -> Result<RbpOutput, EngineError> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(EngineError::InvalidParameter(format!(
            "mutation probability must lie in (0, 1], got {beta}"
        )));
    }
    let law = OffspringLaw::thinned_table(offspring_counts, beta)?;
    simulate_rbp(model, law, options, rng)
}

/// Estimate the birth-time offset T in the asymptotic law
/// tau_n = (1/lambda) log n + T + o(1): the median of
/// tau_n - (1/lambda) log n over the later half of families, where the
/// transient has died down. `None` if fewer than two families exist.
pub fn estimate_t_offset(snapshot: &PopulationSnapshot, lambda: f64) -> Option<f64> {
    if snapshot.families.len() < 2 || !(lambda > 0.0 && lambda.is_finite()) {
        return None;
    }
    let start = snapshot.families.len() / 2;
    let mut deviations: Vec<f64> = snapshot.families[start..]
        .iter()
        .map(|f| f.tau - (f.index as f64).ln() / lambda)
        .collect();
    // Selection instead of a full sort: snapshots can hold millions of
    // families and only the middle order statistics are needed.
    let n = deviations.len();
    let mid = n / 2;
    let (below, pivot, _) = deviations
        .select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).expect("finite deviations"));
    Some(if n % 2 == 1 {
        *pivot
    } else {
        let lower = below.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + *pivot)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::simulate_ct_gw;
    use crate::fitness::FitnessModel;
    use crate::rng::replicate_rng;

    fn uniform() -> FitnessModel {
        FitnessModel::from_catalog("weibull_alpha", &[1.0]).unwrap()
    }

    fn mixed_law() -> OffspringLaw {
        OffspringLaw::new(vec![(1, 1, 0.5), (2, 0, 0.3), (0, 2, 0.2)]).unwrap()
    }

    #[test]
    fn bookkeeping_identities_hold() {
        let options = RbpOptions {
            stop: StopRule::population(5_000),
            record_events: true,
            ..RbpOptions::default()
        };
        let out = simulate_rbp(&uniform(), mixed_law(), options, replicate_rng(0x71, 0)).unwrap();
        assert_eq!(out.stopped_by, StoppedBy::Population);
        let snap = &out.snapshot;
        assert!(snap.total_size >= 5_000);

        let same: u64 = out.events.iter().map(|e| e.delta_same_family as u64).sum();
        let new: u64 = out.events.iter().map(|e| e.new_families as u64).sum();
        assert_eq!(snap.total_size, 1 + same + new);
        assert_eq!(snap.family_count, 1 + new);
        assert_eq!(snap.total_size, snap.families.iter().map(|f| f.size).sum::<u64>());

        let mut last_time = 0.0;
        for (k, e) in out.events.iter().enumerate() {
            assert_eq!(e.event_index, k as u64 + 1);
            assert!(e.time > last_time, "event times strictly increase");
            last_time = e.time;
        }
        let mut last_tau = 0.0;
        for f in &snap.families {
            assert!(f.size >= 1);
            assert!(f.fitness > 0.0 && f.fitness < 1.0);
            assert!(f.tau >= last_tau);
            last_tau = f.tau;
        }
        let drift = (snap.total_rate - snap.recomputed_rate()).abs() / snap.recomputed_rate();
        assert!(drift <= 1e-9, "rate drift {drift}");
    }

    #[test]
    fn frozen_two_family_selection_frequency() {
        // Families (Z=2, F=0.5) and (Z=1, F=1.0) have equal rates, so
        // the first event hits family 1 with probability exactly 1/2.
        for sampler in [SamplerKind::Fenwick, SamplerKind::IndividualTable] {
            let trials = 100_000u64;
            let mut hits = 0u64;
            for trial in 0..trials {
                let options = RbpOptions {
                    sampler,
                    ..RbpOptions::default()
                };
                let mut sim = RbpSim::with_families(
                    &uniform(),
                    OffspringLaw::deterministic(1, 0),
                    options,
                    replicate_rng(0x72, trial),
                    &[(0.0, 0.5, 2), (0.0, 1.0, 1)],
                )
                .unwrap();
                let event = sim.step().unwrap().unwrap();
                if event.family_index == 1 {
                    hits += 1;
                }
            }
            let freq = hits as f64 / trials as f64;
            let se = (0.25f64 / trials as f64).sqrt();
            assert!(
                (freq - 0.5).abs() <= 3.0 * se,
                "{sampler:?}: frequency {freq}"
            );
        }
    }

    #[test]
    fn incremental_rate_survives_a_million_events() {
        // One event adds exactly one member and one family under the
        // (1,1) law, so a 2e6 population ceiling means 1e6 events; the
        // default rebuild period is larger, so drift goes unchecked.
        let options = RbpOptions {
            stop: StopRule::population(2_000_001),
            ..RbpOptions::default()
        };
        let out = simulate_rbp(
            &uniform(),
            OffspringLaw::deterministic(1, 1),
            options,
            replicate_rng(0x73, 0),
        )
        .unwrap();
        let snap = &out.snapshot;
        assert_eq!(snap.total_size, 2_000_001);
        assert_eq!(snap.family_count, 1_000_001);
        let drift = (snap.total_rate - snap.recomputed_rate()).abs() / snap.recomputed_rate();
        assert!(drift <= 1e-9, "rate drift {drift}");
    }

    #[test]
    fn single_family_run_is_a_time_changed_growth_path() {
        // With offspring (1, 0) the lone family grows as a Yule process
        // run at its own fitness: the same stream gives bitwise equal
        // jump times.
        let model = uniform();
        let mut oracle_rng = replicate_rng(0x74, 5);
        let fitness = model.sample_fitness(&mut oracle_rng);
        let t_end = 8.0;
        let oracle = simulate_ct_gw(&[(1, 1.0)], fitness, t_end, &mut oracle_rng).unwrap();

        let options = RbpOptions {
            stop: StopRule::horizon(t_end),
            record_events: true,
            ..RbpOptions::default()
        };
        let out = simulate_rbp(
            &model,
            OffspringLaw::deterministic(1, 0),
            options,
            replicate_rng(0x74, 5),
        )
        .unwrap();
        assert_eq!(out.stopped_by, StoppedBy::Horizon);
        assert_eq!(out.snapshot.total_size, oracle.final_size);
        assert_eq!(out.events.len(), oracle.jumps.len());
        for (event, &(jump_time, size)) in out.events.iter().zip(&oracle.jumps) {
            assert_eq!(event.time.to_bits(), jump_time.to_bits());
            assert_eq!(1 + event.event_index, size);
        }
    }

    #[test]
    fn selection_mutation_event_marginals() {
        // Two offspring per event, mutation probability 0.4: the mean
        // same-family increment is 1.2 and the mean family increment
        // 0.8 per event.
        let beta = 0.4;
        let options = RbpOptions {
            stop: StopRule::population(200_001),
            record_events: true,
            ..RbpOptions::default()
        };
        let out = simulate_selection_mutation(
            &uniform(),
            beta,
            &[(2, 1.0)],
            options,
            replicate_rng(0x75, 0),
        )
        .unwrap();
        let n = out.events.len() as f64;
        assert_eq!(out.events.len(), 100_000);
        let mean_same: f64 =
            out.events.iter().map(|e| e.delta_same_family as f64).sum::<f64>() / n;
        let mean_new: f64 = out.events.iter().map(|e| e.new_families as f64).sum::<f64>() / n;
        // Binomial(2, 0.4) variance is 0.48.
        let se = (0.48f64 / n).sqrt();
        assert!((mean_same - 1.2).abs() <= 3.0 * se, "mean same {mean_same}");
        assert!((mean_new - 0.8).abs() <= 3.0 * se, "mean new {mean_new}");
    }

    #[test]
    fn full_mutation_keeps_families_singletons() {
        let options = RbpOptions {
            stop: StopRule::families(500),
            ..RbpOptions::default()
        };
        let out = simulate_selection_mutation(
            &uniform(),
            1.0,
            &[(1, 1.0)],
            options,
            replicate_rng(0x76, 0),
        )
        .unwrap();
        assert_eq!(out.stopped_by, StoppedBy::Families);
        assert_eq!(out.snapshot.family_count, 500);
        assert!(out.snapshot.families.iter().all(|f| f.size == 1));
        assert!(simulate_selection_mutation(
            &uniform(),
            0.0,
            &[(1, 1.0)],
            RbpOptions::default(),
            replicate_rng(0x76, 1),
        )
        .is_err());
    }

    #[test]
    fn family_ceiling_stops_exactly() {
        let options = RbpOptions {
            stop: StopRule::families(1_000),
            ..RbpOptions::default()
        };
        let out = simulate_rbp(
            &uniform(),
            OffspringLaw::deterministic(1, 1),
            options,
            replicate_rng(0x77, 0),
        )
        .unwrap();
        assert_eq!(out.stopped_by, StoppedBy::Families);
        assert_eq!(out.snapshot.family_count, 1_000);
    }

    #[test]
    fn t_offset_estimate_is_stable() {
        let options = RbpOptions {
            stop: StopRule::families(4_000),
            ..RbpOptions::default()
        };
        let out = simulate_rbp(
            &uniform(),
            OffspringLaw::deterministic(1, 1),
            options,
            replicate_rng(0x78, 0),
        )
        .unwrap();
        let lambda = crate::malthusian::malthusian_bb(&uniform()).unwrap().lambda;
        let t_hat = estimate_t_offset(&out.snapshot, lambda).unwrap();
        assert!(t_hat.is_finite());
        assert!(t_hat.abs() < 10.0, "offset {t_hat}");
        // Degenerate inputs yield no estimate.
        let tiny = PopulationSnapshot {
            clock: 0.0,
            families: vec![FamilyRecord { index: 1, tau: 0.0, fitness: 0.5, size: 1 }],
            total_size: 1,
            family_count: 1,
            total_rate: 0.5,
        };
        assert!(estimate_t_offset(&tiny, lambda).is_none());
    }

    #[test]
    fn sampler_kinds_agree_in_distribution() {
        // Mean final family count over replicates must match between
        // samplers (same law, different streams).
        let mut means = [0.0f64; 2];
        for (slot, sampler) in [SamplerKind::Fenwick, SamplerKind::IndividualTable]
            .into_iter()
            .enumerate()
        {
            let reps = 200u64;
            let mut total = 0u64;
            for rep in 0..reps {
                let options = RbpOptions {
                    stop: StopRule::population(2_000),
                    sampler,
                    ..RbpOptions::default()
                };
                let out = simulate_rbp(
                    &uniform(),
                    mixed_law(),
                    options,
                    replicate_rng(0x79 + slot as u64, rep),
                )
                .unwrap();
                total += out.snapshot.family_count;
            }
            means[slot] = total as f64 / reps as f64;
        }
        let rel = (means[0] - means[1]).abs() / means[0];
        assert!(rel < 0.05, "family-count means {means:?}");
    }
}
