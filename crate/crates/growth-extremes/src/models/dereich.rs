//! Poisson multi-edge network growth.
//!
//! At step m an arriving vertex throws, towards every existing vertex
//! n <= m, an independent Poisson number of directed edges with mean
//! beta * F_n * (1 + indeg_n) / m. The fast path uses the
//! superposition identity: draw the step total from a single Poisson
//! with the summed mean, then split it multinomially over vertices
//! proportionally to F_n (1 + indeg_n), with all weights frozen at
//! step start. A naive per-vertex path (O(m) per step) serves as the
//! correctness oracle. The deterministic continuous embedding places
//! vertex n at time H_{n-1} / lambda with H the harmonic numbers,
//! which matches (log n + Euler-Mascheroni) / lambda up to O(1/n).

use super::NetworkState;
use crate::engines::{EngineError, FamilyRecord};
use crate::fenwick::WeightedIndex;
use crate::fitness::FitnessModel;
use crate::rng::{poisson_draw, unit_open, EngineRng};

/// The Euler-Mascheroni constant.
pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// A growing Poisson-edge network.
#[derive(Debug)]
pub struct DereichSim {
    model: FitnessModel,
    beta: f64,
    rng: EngineRng,
    fitnesses: Vec<f64>,
    indegrees: Vec<u64>,
    /// Per-vertex weights F_n (1 + indeg_n).
    weights: WeightedIndex,
    edges: Vec<(u64, u64, u64)>,
    edge_count: u64,
    completed_steps: u64,
}

impl DereichSim {
    /// One founder vertex with a model-drawn fitness and no edges.
    pub fn new(model: &FitnessModel, beta: f64, mut rng: EngineRng) -> Result<Self, EngineError> {
        check_beta(beta)?;
        let fitness = model.sample_fitness(&mut rng);
        Self::with_state(model, beta, rng, &[fitness], &[0])
    }

    /// Frozen-state constructor for step-law tests: explicit fitnesses
    /// and indegrees, the step counter set to the vertex count.
    pub fn with_state(
        model: &FitnessModel,
        beta: f64,
        rng: EngineRng,
        fitnesses: &[f64],
        indegrees: &[u64],
    ) -> Result<Self, EngineError> {
        check_beta(beta)?;
        if fitnesses.len() != indegrees.len() || fitnesses.is_empty() {
            return Err(EngineError::InvalidParameter(
                "fitness and indegree tables must be non-empty and of equal length".into(),
            ));
        }
        for &f in fitnesses {
            if !(f > 0.0 && f <= 1.0) {
                return Err(EngineError::InvalidParameter(format!(
                    "vertex fitness must lie in (0, 1], got {f}"
                )));
            }
        }
        let weights: Vec<f64> = fitnesses
            .iter()
            .zip(indegrees)
            .map(|(&f, &d)| f * (1.0 + d as f64))
            .collect();
        let edge_count = indegrees.iter().sum();
        Ok(Self {
            model: *model,
            beta,
            rng,
            fitnesses: fitnesses.to_vec(),
            indegrees: indegrees.to_vec(),
            weights: WeightedIndex::with_weights(&weights),
            edges: Vec::new(),
            edge_count,
            completed_steps: 0,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.fitnesses.len()
    }

    pub fn indegrees(&self) -> &[u64] {
        &self.indegrees
    }

    /// The per-vertex Poisson means of the next step.
    pub fn step_rates(&self) -> Vec<f64> {
        let m = self.fitnesses.len() as f64;
        self.fitnesses
            .iter()
            .zip(&self.indegrees)
            .map(|(&f, &d)| self.beta * f * (1.0 + d as f64) / m)
            .collect()
    }

    /// One growth step: the arriving vertex throws its edges, then
    /// joins with a fresh fitness. Returns the (1-based vertex, edge
    /// count) allocations of the step, zero counts omitted. `naive`
    /// selects the per-vertex oracle path; both paths sample the same
    /// law.
    pub fn advance(&mut self, naive: bool) -> Vec<(u64, u64)> {
        let m = self.fitnesses.len();
        let new_index = m as u64 + 1;
        let mut allocations: Vec<(u64, u64)> = Vec::new();
        if naive {
            let rates = self.step_rates();
            for (pos, &rate) in rates.iter().enumerate() {
                let count = poisson_draw(&mut self.rng, rate);
                if count > 0 {
                    allocations.push((pos as u64 + 1, count));
                }
            }
        } else {
            let total_mean = self.beta * self.weights.total() / m as f64;
            let total = poisson_draw(&mut self.rng, total_mean);
            // Step totals are small, so a linear scan over the hit
            // vertices beats a hash map.
            let mut hit: Vec<(usize, u64)> = Vec::new();
            for _ in 0..total {
                let u = unit_open(&mut self.rng);
                let pos = self.weights.sample(u);
                match hit.iter_mut().find(|(p, _)| *p == pos) {
                    Some((_, c)) => *c += 1,
                    None => hit.push((pos, 1)),
                }
            }
            hit.sort_by_key(|&(p, _)| p);
            allocations = hit
                .into_iter()
                .map(|(pos, count)| (pos as u64 + 1, count))
                .collect();
        }
        // Weight updates are deferred to here so every draw above saw
        // the step-start weights.
        for &(vertex, count) in &allocations {
            let pos = vertex as usize - 1;
            self.indegrees[pos] += count;
            self.weights.add(pos, self.fitnesses[pos] * count as f64);
            self.edges.push((new_index, vertex, count));
            self.edge_count += count;
        }
        let fitness = self.model.sample_fitness(&mut self.rng);
        self.fitnesses.push(fitness);
        self.indegrees.push(0);
        self.weights.push(fitness);
        self.completed_steps += 1;
        allocations
    }

    /// Package the network; `tau` fields carry the deterministic
    /// harmonic embedding at rate `lambda` when one is supplied,
    /// otherwise the arrival rank.
    pub fn into_state(self, lambda: Option<f64>) -> NetworkState {
        let taus: Vec<f64> = match lambda {
            Some(l) => dereich_embedding_times(self.fitnesses.len() as u64, l),
            None => (1..=self.fitnesses.len()).map(|n| n as f64).collect(),
        };
        let vertices = self
            .fitnesses
            .iter()
            .zip(&self.indegrees)
            .zip(taus)
            .enumerate()
            .map(|(pos, ((&fitness, &size), tau))| FamilyRecord {
                index: pos as u64 + 1,
                tau,
                fitness,
                size,
            })
            .collect();
        NetworkState {
            vertices,
            edges: self.edges,
            edge_count: self.edge_count,
            step: self.completed_steps,
        }
    }
}

fn check_beta(beta: f64) -> Result<(), EngineError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(EngineError::InvalidParameter(format!(
            "edge intensity must lie in (0, 1), got {beta}"
        )));
    }
    Ok(())
}

/// Grow the Poisson-edge network to `n_vertices` vertices with the
/// fast superposition path.
pub fn simulate_dereich(
    model: &FitnessModel,
    beta: f64,
    n_vertices: u64,
    rng: EngineRng,
) -> Result<NetworkState, EngineError> {
    run(model, beta, n_vertices, false, rng)
}

/// Grow the network with the per-vertex oracle path (quadratic cost;
/// for cross-validation on small sizes).
pub fn simulate_dereich_naive(
    model: &FitnessModel,
    beta: f64,
    n_vertices: u64,
    rng: EngineRng,
) -> Result<NetworkState, EngineError> {
    run(model, beta, n_vertices, true, rng)
}

fn run(
    model: &FitnessModel,
    beta: f64,
    n_vertices: u64,
    naive: bool,
    rng: EngineRng,
) -> Result<NetworkState, EngineError> {
    if n_vertices < 1 {
        return Err(EngineError::InvalidParameter(
            "the network needs at least one vertex".into(),
        ));
    }
    let mut sim = DereichSim::new(model, beta, rng)?;
    while sim.vertex_count() < n_vertices as usize {
        sim.advance(naive);
    }
    Ok(sim.into_state(None))
}

/// Deterministic continuous embedding: vertex n arrives at
/// H_{n-1} / lambda, the harmonic number divided by the growth rate.
pub fn dereich_embedding_times(n_vertices: u64, lambda: f64) -> Vec<f64> {
    let mut times = Vec::with_capacity(n_vertices as usize);
    let mut harmonic = 0.0;
    for n in 1..=n_vertices {
        if n > 1 {
            harmonic += 1.0 / (n as f64 - 1.0);
        }
        times.push(harmonic / lambda);
    }
    times
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::chi2_gof;
    use crate::rng::replicate_rng;

    fn uniform() -> FitnessModel {
        FitnessModel::from_catalog("weibull_alpha", &[1.0]).unwrap()
    }

    #[test]
    fn first_step_edge_count_has_poisson_mean() {
        // One vertex of fitness 0.8 and indegree 0: the first arrival
        // throws Poisson(beta * 0.8) edges at it.
        let beta = 0.6;
        let trials = 100_000u64;
        let mut total = 0u64;
        for trial in 0..trials {
            let mut sim = DereichSim::with_state(
                &uniform(),
                beta,
                replicate_rng(0x91, trial),
                &[0.8],
                &[0],
            )
            .unwrap();
            total += sim.advance(false).iter().map(|&(_, c)| c).sum::<u64>();
        }
        let mean = total as f64 / trials as f64;
        let target = beta * 0.8;
        let se = (target / trials as f64).sqrt();
        assert!((mean - target).abs() <= 3.0 * se, "mean {mean} vs {target}");
    }

    #[test]
    fn fast_path_matches_per_vertex_poisson_law() {
        // Frozen 3-vertex state; the fast path's per-vertex counts must
        // follow the independent Poisson laws of the naive oracle.
        let beta = 0.7;
        let fitnesses = [0.3, 0.9, 0.5];
        let indegrees = [2, 0, 1];
        let trials = 20_000u64;
        let mut histograms = vec![[0u64; 8]; 3];
        let mut rates = Vec::new();
        for trial in 0..trials {
            let mut sim = DereichSim::with_state(
                &uniform(),
                beta,
                replicate_rng(0x92, trial),
                &fitnesses,
                &indegrees,
            )
            .unwrap();
            if trial == 0 {
                rates = sim.step_rates();
            }
            let mut counts = [0u64; 3];
            for (vertex, count) in sim.advance(false) {
                counts[vertex as usize - 1] = count;
            }
            for (h, &c) in histograms.iter_mut().zip(&counts) {
                h[(c as usize).min(7)] += 1;
            }
        }
        // Pool the per-vertex chi-square statistics; under the law the
        // coordinates are independent Poissons, so the statistics add.
        let mut statistic = 0.0;
        let mut degrees = 0usize;
        for (h, &rate) in histograms.iter().zip(&rates) {
            let mut expected: Vec<f64> = Vec::new();
            let mut pmf = (-rate).exp();
            let mut cum = 0.0;
            for k in 0..7 {
                expected.push(trials as f64 * pmf);
                cum += pmf;
                pmf *= rate / (k as f64 + 1.0);
            }
            expected.push(trials as f64 * (1.0 - cum));
            // Merge the sparse tail so every bin expects >= 5 counts.
            let mut obs: Vec<u64> = h.to_vec();
            while expected.len() > 2 && expected[expected.len() - 1] < 5.0 {
                let e = expected.pop().unwrap();
                *expected.last_mut().unwrap() += e;
                let o = obs.pop().unwrap();
                *obs.last_mut().unwrap() += o;
            }
            let result = chi2_gof(&obs, &expected).unwrap();
            statistic += result.statistic;
            degrees += result.degrees;
        }
        let p = crate::special::gamma_q(degrees as f64 / 2.0, statistic / 2.0);
        assert!(p > 0.001, "pooled chi-square p-value {p}");
    }

    #[test]
    fn naive_and_fast_paths_agree_in_mean() {
        let beta = 0.7;
        let fitnesses = [0.3, 0.9, 0.5];
        let indegrees = [2, 0, 1];
        let trials = 20_000u64;
        let mut means = [[0.0f64; 3]; 2];
        for (slot, naive) in [false, true].into_iter().enumerate() {
            for trial in 0..trials {
                let mut sim = DereichSim::with_state(
                    &uniform(),
                    beta,
                    replicate_rng(0x93 + slot as u64, trial),
                    &fitnesses,
                    &indegrees,
                )
                .unwrap();
                for (vertex, count) in sim.advance(naive) {
                    means[slot][vertex as usize - 1] += count as f64;
                }
            }
        }
        let rates = DereichSim::with_state(
            &uniform(),
            beta,
            replicate_rng(0x94, 0),
            &fitnesses,
            &indegrees,
        )
        .unwrap()
        .step_rates();
        for v in 0..3 {
            let se = (rates[v] / trials as f64).sqrt();
            for slot in 0..2 {
                let mean = means[slot][v] / trials as f64;
                assert!(
                    (mean - rates[v]).abs() <= 4.0 * se,
                    "vertex {v} path {slot}: mean {mean} vs {}",
                    rates[v]
                );
            }
        }
    }

    #[test]
    fn indegree_bookkeeping_is_consistent() {
        let state = simulate_dereich(&uniform(), 0.5, 2_000, replicate_rng(0x95, 0)).unwrap();
        assert_eq!(state.vertices.len(), 2_000);
        assert_eq!(state.degree_sum(), state.edge_count);
        let from_edges: u64 = state.edges.iter().map(|&(_, _, m)| m).sum();
        assert_eq!(from_edges, state.edge_count);
        for &(from, to, multiplicity) in &state.edges {
            assert!(from > to && multiplicity >= 1);
        }
        // Bit-reproducible on the same stream.
        let again = simulate_dereich(&uniform(), 0.5, 2_000, replicate_rng(0x95, 0)).unwrap();
        assert_eq!(state.edges, again.edges);
    }

    #[test]
    fn harmonic_embedding_matches_log_plus_constant() {
        let lambda = 1.2550;
        let times = dereich_embedding_times(1_000, lambda);
        assert_eq!(times[0], 0.0);
        for (pos, &tau) in times.iter().enumerate().skip(1) {
            let n = pos as f64 + 1.0;
            let limit = (n.ln() + EULER_MASCHERONI) / lambda;
            assert!(
                (tau - limit).abs() <= 0.6 / (lambda * n),
                "n={n}: tau {tau} vs {limit}"
            );
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DereichSim::new(&uniform(), 0.0, replicate_rng(0x96, 0)).is_err());
        assert!(DereichSim::new(&uniform(), 1.0, replicate_rng(0x96, 1)).is_err());
        assert!(simulate_dereich(&uniform(), 0.5, 0, replicate_rng(0x96, 2)).is_err());
    }
}
