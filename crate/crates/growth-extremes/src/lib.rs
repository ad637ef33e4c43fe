//! Simulation and statistical validation toolkit for competing growth
//! processes with random fitness.
//!
//! A population of families grows in continuous time; each family carries
//! an i.i.d. fitness value in (0,1) that multiplies its reproduction rate,
//! and new families appear over time. After exponential rescaling the
//! family sizes converge to a Poisson point process whose intensity, and
//! hence the law of the largest family, is governed by the upper tail of
//! the fitness distribution: fast-decaying (Gumbel-class) tails and
//! polynomial (Weibull-class) tails lead to different centering sequences
//! but both end in Frechet-type extremes.
//!
//! The crate provides, layer by layer:
//!
//! * [`fitness`] — the catalog of fitness laws with hazard transforms,
//!   curvature diagnostics, and quadrature against the law;
//! * [`scaling`] — centering times, scaling constants, and the limiting
//!   point-process intensities;
//! * [`malthusian`] — growth-rate equations for the various dynamics;
//! * [`engines`] — event-driven simulators (pure birth, branching with
//!   immigration, selection with mutation);
//! * [`models`] — discrete network/partition models embedded in the same
//!   framework;
//! * [`extremal`] — rescaling of simulation output and limit-law
//!   validation;
//! * [`harness`] — experiment configuration, replication, and the
//!   acceptance scenarios behind the CLI.
//!
//! Supporting numerics (special functions, adaptive quadrature, weighted
//! sampling, reproducible RNG streams) live in their own small modules.

pub mod dist;
pub mod engines;
pub mod extremal;
pub mod fenwick;
pub mod fitness;
pub mod harness;
pub mod malthusian;
pub mod models;
pub mod quad;
pub mod rng;
pub mod scaling;
pub mod special;

pub use dist::DistError;
pub use fitness::{FitnessError, FitnessModel, GumbelModel, SlowVariation, TailClass, WeibullModel};
