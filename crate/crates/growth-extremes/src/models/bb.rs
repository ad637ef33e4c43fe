//! Fitness-degree preferential attachment tree.
//!
//! Starting from two vertices joined by an edge, each arriving vertex
//! attaches to an existing vertex chosen with probability proportional
//! to fitness times degree, where fitnesses are i.i.d. draws from the
//! fitness model. The embedded variant runs the reinforced branching
//! process with the (1, 1) offspring law instead, which realizes the
//! same attachment chain in continuous time and yields exact birth
//! epochs; in that construction the founder's size carries one phantom
//! half-edge, so its structural degree is size - 1.

use super::NetworkState;
use crate::engines::{
    simulate_rbp, EngineError, FamilyRecord, RbpOptions, StopRule,
};
use crate::fenwick::WeightedIndex;
use crate::fitness::FitnessModel;
use crate::malthusian::OffspringLaw;
use crate::rng::{unit_open, EngineRng};

/// A growing attachment tree in its discrete-time form.
#[derive(Debug)]
pub struct BbSim {
    model: FitnessModel,
    rng: EngineRng,
    fitnesses: Vec<f64>,
    degrees: Vec<u64>,
    /// Per-vertex weights fitness * degree.
    weights: WeightedIndex,
    edges: Vec<(u64, u64, u64)>,
}

impl BbSim {
    /// The two-vertex seed: one edge, both degrees 1, fresh fitnesses.
    pub fn new(model: &FitnessModel, mut rng: EngineRng) -> Self {
        let f1 = model.sample_fitness(&mut rng);
        let f2 = model.sample_fitness(&mut rng);
        Self {
            model: *model,
            rng,
            fitnesses: vec![f1, f2],
            degrees: vec![1, 1],
            weights: WeightedIndex::with_weights(&[f1, f2]),
            edges: vec![(2, 1, 1)],
        }
    }

    /// Frozen-state constructor for selection-frequency tests: explicit
    /// degrees and fitnesses, no edges recorded for the seed.
    pub fn with_state(
        model: &FitnessModel,
        rng: EngineRng,
        fitnesses: &[f64],
        degrees: &[u64],
    ) -> Result<Self, EngineError> {
        if fitnesses.len() != degrees.len() || fitnesses.is_empty() {
            return Err(EngineError::InvalidParameter(
                "fitness and degree tables must be non-empty and of equal length".into(),
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
            .zip(degrees)
            .map(|(&f, &d)| f * d as f64)
            .collect();
        Ok(Self {
            model: *model,
            rng,
            fitnesses: fitnesses.to_vec(),
            degrees: degrees.to_vec(),
            weights: WeightedIndex::with_weights(&weights),
            edges: Vec::new(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    pub fn max_degree(&self) -> u64 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    /// Attach one arriving vertex; returns the 1-based index of the
    /// vertex it connected to.
    pub fn attach_once(&mut self) -> usize {
        let u = unit_open(&mut self.rng);
        let parent = self.weights.sample(u);
        let fitness = self.model.sample_fitness(&mut self.rng);
        self.degrees[parent] += 1;
        self.weights.add(parent, self.fitnesses[parent]);
        self.degrees.push(1);
        self.fitnesses.push(fitness);
        self.weights.push(fitness);
        self.edges
            .push((self.degrees.len() as u64, parent as u64 + 1, 1));
        parent + 1
    }

    /// Grow until the tree has `n_vertices` vertices.
    pub fn grow_to(&mut self, n_vertices: usize) {
        while self.degrees.len() < n_vertices {
            self.attach_once();
        }
    }

    /// Package the tree; `tau` is the arrival rank in this discrete
    /// form.
    pub fn into_state(self) -> NetworkState {
        let vertices = self
            .fitnesses
            .iter()
            .zip(&self.degrees)
            .enumerate()
            .map(|(pos, (&fitness, &size))| FamilyRecord {
                index: pos as u64 + 1,
                tau: pos as f64 + 1.0,
                fitness,
                size,
            })
            .collect();
        let edge_count = self.edges.len() as u64;
        let step = self.degrees.len() as u64;
        NetworkState {
            vertices,
            edges: self.edges,
            edge_count,
            step,
        }
    }
}

/// Grow a fitness-degree attachment tree to `n_vertices` vertices.
/// With `embed` the tree is realized through the continuous-time
/// branching construction, so vertex `tau` fields are exact birth
/// epochs; otherwise the discrete chain is run directly (about an
/// order of magnitude faster) and `tau` is the arrival rank.
pub fn simulate_bb_tree(
    model: &FitnessModel,
    n_vertices: u64,
    embed: bool,
    rng: EngineRng,
) -> Result<NetworkState, EngineError> {
    if n_vertices < 2 {
        return Err(EngineError::InvalidParameter(format!(
            "an attachment tree needs at least 2 vertices, got {n_vertices}"
        )));
    }
    if !embed {
        let mut sim = BbSim::new(model, rng);
        sim.grow_to(n_vertices as usize);
        return Ok(sim.into_state());
    }
    let options = RbpOptions {
        stop: StopRule {
            max_families: Some(n_vertices),
            max_population: u64::MAX,
            t_end: None,
        },
        record_events: true,
        ..RbpOptions::default()
    };
    let out = simulate_rbp(model, OffspringLaw::deterministic(1, 1), options, rng)?;
    let mut vertices = out.snapshot.families;
    // Strip the founder's phantom half-edge so sizes are structural
    // degrees and the tree identities hold.
    vertices[0].size -= 1;
    // Under the (1, 1) law, event k founds vertex k + 1 and its parent
    // is the family the event hit.
    let edges: Vec<(u64, u64, u64)> = out
        .events
        .iter()
        .map(|e| (e.event_index + 1, e.family_index, 1))
        .collect();
    let edge_count = edges.len() as u64;
    Ok(NetworkState {
        vertices,
        edges,
        edge_count,
        step: n_vertices,
    })
}
