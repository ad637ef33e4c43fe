//! The applied model zoo: a fitness-degree preferential attachment
//! tree, a Poisson multi-edge network growth model, and a
//! weighted-table seating process (a disordered Chinese restaurant
//! process). All three reuse the family bookkeeping of the engines
//! layer: a vertex or table is a family, and its degree, indegree, or
//! occupancy plays the role of the family size.

use crate::engines::FamilyRecord;
use std::fmt::Write as _;

mod bb;
mod crp;
mod dereich;

pub use bb::{simulate_bb_tree, BbSim};
pub use crp::{simulate_crp, CrpOptions, CrpOutput, TableRecord};
pub use dereich::{
    dereich_embedding_times, simulate_dereich, simulate_dereich_naive, DereichSim,
    EULER_MASCHERONI,
};

/// A growing multigraph: vertices in arrival order plus the edge list.
/// `size` on a vertex record is its structural degree in the tree
/// model and its indegree in the Poisson-edge model (which may be 0).
#[derive(Debug, Clone)]
pub struct NetworkState {
    /// Vertices in arrival order; `tau` is the continuous birth time
    /// when one exists, otherwise the arrival rank.
    pub vertices: Vec<FamilyRecord>,
    /// Edges as (from, to, multiplicity) with 1-based vertex indices.
    pub edges: Vec<(u64, u64, u64)>,
    /// Total edge count, multiplicities included.
    pub edge_count: u64,
    /// Number of growth steps performed.
    pub step: u64,
}

impl NetworkState {
    /// CSV rendering of the edge list, header `from,to,multiplicity`.
    pub fn edges_to_csv(&self) -> String {
        let mut out = String::with_capacity(16 * (self.edges.len() + 1));
        out.push_str("from,to,multiplicity\n");
        for &(from, to, multiplicity) in &self.edges {
            let _ = writeln!(out, "{from},{to},{multiplicity}");
        }
        out
    }

    /// CSV rendering of the vertex table, header
    /// `vertex_index,tau,fitness,degree`.
    pub fn vertices_to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.vertices.len() + 1));
        out.push_str("vertex_index,tau,fitness,degree\n");
        for v in &self.vertices {
            let _ = writeln!(out, "{},{},{},{}", v.index, v.tau, v.fitness, v.size);
        }
        out
    }

    /// Sum of vertex `size` fields (degrees or indegrees).
    pub fn degree_sum(&self) -> u64 {
        self.vertices.iter().map(|v| v.size).sum()
    }
}
