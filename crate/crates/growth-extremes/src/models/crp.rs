//! Weighted-table seating process (disordered Chinese restaurant
//! process).
//!
//! Tables carry i.i.d. weights W in (0, 1) from the fitness model.
//! With n customers seated, the next customer joins table j with
//! probability Z_j W_j / (n + theta) and otherwise opens a new table,
//! which happens with the residual probability
//! (theta + sum Z_j (1 - W_j)) / (n + theta). Forcing every weight to
//! 1 recovers the classical seating process with parameter theta. The
//! optional continuous embedding assigns arrival times with
//! independent Exp(n + theta) gaps, under which table occupancies grow
//! as rate-W_j pure-birth processes.

use crate::engines::EngineError;
use crate::fenwick::WeightedIndex;
use crate::fitness::FitnessModel;
use crate::rng::{exp_draw, unit_open, EngineRng};
use std::fmt::Write as _;

/// Parameters of a seating-process run.
#[derive(Debug, Clone, Copy)]
pub struct CrpOptions {
    /// New-table propensity, at least 0.
    pub theta: f64,
    /// Number of customers to seat, at least 1.
    pub n_customers: u64,
    /// Record continuous arrival times (off by default; the occupancy
    /// chain does not depend on them).
    pub embed: bool,
    /// Also record the two largest occupancies after this many
    /// customers, for coupled comparisons along one run.
    pub snapshot_at: Option<u64>,
    /// Force every table weight to this value instead of drawing from
    /// the model; 1.0 recovers the classical process.
    pub weight_override: Option<f64>,
    /// Weight-structure rebuild period (customers), controlling
    /// floating-point drift.
    pub rebuild_every: u64,
}

impl Default for CrpOptions {
    fn default() -> Self {
        Self {
            theta: 1.0,
            n_customers: 1,
            embed: false,
            snapshot_at: None,
            weight_override: None,
            rebuild_every: 1 << 20,
        }
    }
}

/// One table: weight, occupancy, and when it opened.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRecord {
    /// 1-based opening order.
    pub index: u64,
    /// The table's weight W_j.
    pub weight: f64,
    /// Current occupancy Z_j.
    pub size: u64,
    /// The arrival rank of the customer who opened the table.
    pub opened_at: u64,
    /// Continuous opening time when the run was embedded.
    pub tau: Option<f64>,
}

/// Final state of a seating-process run.
#[derive(Debug, Clone)]
pub struct CrpOutput {
    pub tables: Vec<TableRecord>,
    pub n_customers: u64,
    pub theta: f64,
    /// Two largest occupancies (largest first); `None` with fewer than
    /// two tables.
    pub top_two: Option<(u64, u64)>,
    /// Two largest occupancies at the `snapshot_at` checkpoint.
    pub mid_top_two: Option<(u64, u64)>,
    /// Arrival time of the last customer when embedded.
    pub final_time: Option<f64>,
}

impl CrpOutput {
    /// Ratio of the largest to the second largest occupancy.
    pub fn top_ratio(&self) -> Option<f64> {
        self.top_two.map(|(a, b)| a as f64 / b as f64)
    }

    /// CSV rendering, header `table_index,weight,size,tau_if_embedded`;
    /// the last field is empty for non-embedded runs.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.tables.len() + 1));
        out.push_str("table_index,weight,size,tau_if_embedded\n");
        for t in &self.tables {
            match t.tau {
                Some(tau) => {
                    let _ = writeln!(out, "{},{},{},{}", t.index, t.weight, t.size, tau);
                }
                None => {
                    let _ = writeln!(out, "{},{},{},", t.index, t.weight, t.size);
                }
            }
        }
        out
    }
}

fn top_two(tables: &[TableRecord]) -> Option<(u64, u64)> {
    if tables.len() < 2 {
        return None;
    }
    let mut first = 0u64;
    let mut second = 0u64;
    for t in tables {
        if t.size >= first {
            second = first;
            first = t.size;
        } else if t.size > second {
            second = t.size;
        }
    }
    Some((first, second))
}

/// Seat customers one by one and return the final table state.
pub fn simulate_crp(
    model: &FitnessModel,
    options: CrpOptions,
    mut rng: EngineRng,
) -> Result<CrpOutput, EngineError> {
    if !(options.theta >= 0.0 && options.theta.is_finite()) {
        return Err(EngineError::InvalidParameter(format!(
            "new-table propensity must be finite and non-negative, got {}",
            options.theta
        )));
    }
    if options.n_customers < 1 {
        return Err(EngineError::InvalidParameter(
            "at least one customer is required".into(),
        ));
    }
    if let Some(w) = options.weight_override {
        if !(w > 0.0 && w <= 1.0) {
            return Err(EngineError::InvalidParameter(format!(
                "forced table weight must lie in (0, 1], got {w}"
            )));
        }
    }
    if let Some(at) = options.snapshot_at {
        if at < 1 || at > options.n_customers {
            return Err(EngineError::InvalidParameter(format!(
                "checkpoint {at} outside 1..={}",
                options.n_customers
            )));
        }
    }

    let mut tables: Vec<TableRecord> = Vec::new();
    // Join masses Z_j W_j; the residual up to n + theta is the
    // new-table mass.
    let mut weights = WeightedIndex::new();
    let mut clock = 0.0;
    let mut mid_top_two = None;
    for arrival in 1..=options.n_customers {
        let seated = arrival - 1;
        if options.embed && arrival > 1 {
            clock += exp_draw(&mut rng, seated as f64 + options.theta);
        }
        let join = if seated == 0 {
            None
        } else {
            let u = unit_open(&mut rng);
            let target = u * (seated as f64 + options.theta);
            (target < weights.total()).then(|| weights.sample_mass(target))
        };
        match join {
            Some(j) => {
                tables[j].size += 1;
                weights.add(j, tables[j].weight);
            }
            None => {
                let weight = match options.weight_override {
                    Some(w) => w,
                    None => model.sample_fitness(&mut rng),
                };
                tables.push(TableRecord {
                    index: tables.len() as u64 + 1,
                    weight,
                    size: 1,
                    opened_at: arrival,
                    tau: options.embed.then_some(clock),
                });
                weights.push(weight);
            }
        }
        if options.snapshot_at == Some(arrival) {
            mid_top_two = top_two(&tables);
        }
        if options.rebuild_every > 0 && arrival % options.rebuild_every == 0 {
            let masses: Vec<f64> = tables.iter().map(|t| t.size as f64 * t.weight).collect();
            weights = WeightedIndex::with_weights(&masses);
        }
    }
    Ok(CrpOutput {
        top_two: top_two(&tables),
        mid_top_two,
        final_time: options.embed.then_some(clock),
        n_customers: options.n_customers,
        theta: options.theta,
        tables,
    })
}
