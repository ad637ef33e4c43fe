//! Experiment configuration: a TOML document with nested sections, validated
//! into a fully resolved form with every default materialized.
//!
//! The schema (see the repository README for the annotated version):
//!
//! ```toml
//! model = "rbp"            # toy | rbp | selection_mutation | bb_tree | dereich | crp
//! replicates = 100
//! seed = 42                # optional; overridden by EXTREMAL_SEED, then --seed
//!
//! [fitness]
//! id = "gnedenko"          # catalog id
//! params = []              # e.g. [0.5] for power_rho, [1.0] for weibull_alpha
//!
//! [dynamics]               # only the fields the chosen model reads
//! beta = 0.7               # mutation probability / edge-rate dampening
//! theta = 1.0              # new-table propensity (crp)
//! lambda = 1.0             # family-arrival rate (toy)
//! truncation = 3.0         # toy truncation multiplier
//! offspring = [[1, 1, 1.0]]        # (same, new, prob) rows (rbp)
//! offspring_counts = [[1, 1.0]]    # (count, prob) rows (selection_mutation)
//! embed = false            # continuous arrival times (bb_tree, crp)
//!
//! [stop]                   # exactly the stop the model needs
//! t_end = 12.0
//! max_population = 10000000
//! n_vertices = 1000
//! n_customers = 100000
//!
//! [outputs]
//! dir = "out/experiment-1"
//! point_cloud = false      # also write per-family detail CSVs
//! ```
//!
//! Seed precedence: `--seed` flag, then the `EXTREMAL_SEED` environment
//! variable, then the file value, then 0.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fitness::{FitnessError, FitnessModel, TailClass};

/// Which simulation drives the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Deterministic exponential families with random fitness.
    Toy,
    /// Reinforced branching process (fitness-weighted family competition).
    Rbp,
    /// Selection-mutation dynamics (offspring mutate with probability beta).
    SelectionMutation,
    /// Fitness-degree preferential attachment tree.
    BbTree,
    /// Poissonian multi-edge preferential attachment network.
    Dereich,
    /// Chinese-restaurant partition with fitness-dampened tables.
    Crp,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Toy => "toy",
            ModelKind::Rbp => "rbp",
            ModelKind::SelectionMutation => "selection_mutation",
            ModelKind::BbTree => "bb_tree",
            ModelKind::Dereich => "dereich",
            ModelKind::Crp => "crp",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitnessConfig {
    /// Catalog identifier, e.g. "gnedenko" or "weibull_alpha".
    pub id: String,
    /// Positional parameters consumed by the catalog entry.
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    /// Mutation probability (selection_mutation) or edge-rate dampening
    /// (dereich).
    pub beta: Option<f64>,
    /// New-table propensity (crp).
    pub theta: Option<f64>,
    /// Family-arrival rate of the toy model.
    pub lambda: Option<f64>,
    /// Toy-model truncation multiplier.
    pub truncation: Option<f64>,
    /// Offspring rows (same_type, new_families, probability) for rbp.
    pub offspring: Option<Vec<(u32, u32, f64)>>,
    /// Offspring-count rows (count, probability) for selection_mutation.
    pub offspring_counts: Option<Vec<(u32, f64)>>,
    /// Record continuous arrival times (bb_tree, crp).
    pub embed: Option<bool>,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopConfig {
    pub t_end: Option<f64>,
    pub max_population: Option<u64>,
    pub n_vertices: Option<u64>,
    pub n_customers: Option<u64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    /// Experiment directory; may instead come from the --out flag.
    pub dir: Option<String>,
    /// Also write per-family detail CSVs (point cloud, tables, edges).
    #[serde(default)]
    pub point_cloud: bool,
}

/// The raw experiment document as parsed from TOML.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub fitness: FitnessConfig,
    #[serde(default)]
    pub dynamics: DynamicsConfig,
    #[serde(default)]
    pub stop: StopConfig,
    #[serde(default = "default_replicates")]
    pub replicates: u64,
    pub seed: Option<u64>,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

fn default_replicates() -> u64 {
    1
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    /// Validation failure located at a specific config field.
    #[error("config field `{field}`: {message}")]
    Field { field: String, message: String },
}

impl ConfigError {
    fn field(field: &str, message: impl Into<String>) -> Self {
        ConfigError::Field {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

/// A config with every default materialized, ready to run and to serialize
/// as `config.resolved.json` for provenance.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedExperiment {
    pub model: ModelKind,
    pub fitness: FitnessConfig,
    pub beta: Option<f64>,
    pub theta: Option<f64>,
    pub lambda: Option<f64>,
    pub truncation: Option<f64>,
    pub offspring: Option<Vec<(u32, u32, f64)>>,
    pub offspring_counts: Option<Vec<(u32, f64)>>,
    pub embed: bool,
    pub stop: StopConfig,
    pub replicates: u64,
    pub seed: u64,
    /// Execution parameter, not experiment identity: results are
    /// independent of the worker count, so it stays out of the artifacts.
    #[serde(skip)]
    pub threads: usize,
    pub point_cloud: bool,
    /// Delivery location; excluded so rerunning into a different directory
    /// still produces byte-identical artifacts.
    #[serde(skip)]
    pub output_dir: Option<String>,
    /// Parsed fitness law; reconstructible from `fitness`.
    #[serde(skip)]
    pub law: FitnessModel,
}

/// Resolves the seed from, in order of precedence, an explicit flag, the
/// `EXTREMAL_SEED` environment variable, the config file, and finally 0.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64, ConfigError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("EXTREMAL_SEED") {
        Ok(text) => text.parse().map_err(|_| {
            ConfigError::field(
                "EXTREMAL_SEED",
                format!("environment seed must be a 64-bit unsigned integer, got {text:?}"),
            )
        }),
        Err(_) => Ok(file.unwrap_or(0)),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Validates the document and materializes every default. `seed_flag`
    /// and `out_flag` are command-line overrides; `threads` of zero means
    /// the available parallelism.
    pub fn resolve(
        &self,
        seed_flag: Option<u64>,
        out_flag: Option<String>,
        threads: usize,
    ) -> Result<ResolvedExperiment, ConfigError> {
        if self.replicates < 1 {
            return Err(ConfigError::field("replicates", "must be at least 1"));
        }
        let law = FitnessModel::from_catalog(&self.fitness.id, &self.fitness.params)
            .map_err(fitness_field_error)?;
        let d = &self.dynamics;
        let s = &self.stop;

        let require_positive = |field: &str, value: Option<f64>| -> Result<f64, ConfigError> {
            match value {
                Some(v) if v > 0.0 && v.is_finite() => Ok(v),
                Some(v) => Err(ConfigError::field(
                    field,
                    format!("must be positive and finite, got {v}"),
                )),
                None => Err(ConfigError::field(
                    field,
                    format!("required for model `{}`", self.model.as_str()),
                )),
            }
        };

        let mut resolved = ResolvedExperiment {
            model: self.model,
            fitness: self.fitness.clone(),
            beta: None,
            theta: None,
            lambda: None,
            truncation: None,
            offspring: None,
            offspring_counts: None,
            embed: d.embed.unwrap_or(false),
            stop: *s,
            replicates: self.replicates,
            seed: resolve_seed(seed_flag, self.seed)?,
            threads: if threads == 0 {
                std::thread::available_parallelism().map_or(1, |n| n.get())
            } else {
                threads
            },
            point_cloud: self.outputs.point_cloud,
            output_dir: out_flag.or_else(|| self.outputs.dir.clone()),
            law,
        };

        match self.model {
            ModelKind::Toy => {
                if law.class() != TailClass::Weibull {
                    return Err(ConfigError::field(
                        "fitness.id",
                        "the toy model needs a bounded-jump (weibull_alpha) fitness law",
                    ));
                }
                let t_end = require_positive("stop.t_end", s.t_end)?;
                if t_end <= 1.0 {
                    return Err(ConfigError::field("stop.t_end", "must exceed 1"));
                }
                resolved.lambda = Some(match d.lambda {
                    None => 1.0,
                    Some(v) if v > 0.0 && v.is_finite() => v,
                    Some(v) => {
                        return Err(ConfigError::field(
                            "dynamics.lambda",
                            format!("must be positive and finite, got {v}"),
                        ));
                    }
                });
                let truncation = d.truncation.unwrap_or(3.0);
                if !(truncation >= 1.0 && truncation.is_finite()) {
                    return Err(ConfigError::field(
                        "dynamics.truncation",
                        format!("must be at least 1, got {truncation}"),
                    ));
                }
                resolved.truncation = Some(truncation);
            }
            ModelKind::Rbp => {
                require_continuous_stop(s)?;
                let offspring = d.offspring.clone().unwrap_or_else(|| vec![(1, 1, 1.0)]);
                validate_offspring_rows("dynamics.offspring", offspring.iter().map(|r| r.2))?;
                resolved.offspring = Some(offspring);
            }
            ModelKind::SelectionMutation => {
                require_continuous_stop(s)?;
                let beta = require_positive("dynamics.beta", d.beta)?;
                if beta > 1.0 {
                    return Err(ConfigError::field(
                        "dynamics.beta",
                        format!("mutation probability must lie in (0, 1], got {beta}"),
                    ));
                }
                resolved.beta = Some(beta);
                let counts = d.offspring_counts.clone().unwrap_or_else(|| vec![(1, 1.0)]);
                validate_offspring_rows("dynamics.offspring_counts", counts.iter().map(|r| r.1))?;
                resolved.offspring_counts = Some(counts);
            }
            ModelKind::BbTree => {
                let n = s.n_vertices.ok_or_else(|| {
                    ConfigError::field("stop.n_vertices", "required for model `bb_tree`")
                })?;
                if n < 2 {
                    return Err(ConfigError::field("stop.n_vertices", "must be at least 2"));
                }
            }
            ModelKind::Dereich => {
                let beta = require_positive("dynamics.beta", d.beta)?;
                if beta >= 1.0 {
                    return Err(ConfigError::field(
                        "dynamics.beta",
                        format!("edge-rate dampening must lie in (0, 1), got {beta}"),
                    ));
                }
                resolved.beta = Some(beta);
                let n = s.n_vertices.ok_or_else(|| {
                    ConfigError::field("stop.n_vertices", "required for model `dereich`")
                })?;
                if n < 2 {
                    return Err(ConfigError::field("stop.n_vertices", "must be at least 2"));
                }
            }
            ModelKind::Crp => {
                let theta = d.theta.unwrap_or(1.0);
                if !(theta >= 0.0 && theta.is_finite()) {
                    return Err(ConfigError::field(
                        "dynamics.theta",
                        format!("must be finite and non-negative, got {theta}"),
                    ));
                }
                resolved.theta = Some(theta);
                let n = s.n_customers.ok_or_else(|| {
                    ConfigError::field("stop.n_customers", "required for model `crp`")
                })?;
                if n < 1 {
                    return Err(ConfigError::field("stop.n_customers", "must be at least 1"));
                }
            }
        }
        Ok(resolved)
    }
}

fn require_continuous_stop(s: &StopConfig) -> Result<(), ConfigError> {
    if s.t_end.is_none() && s.max_population.is_none() {
        return Err(ConfigError::field(
            "stop",
            "continuous models need stop.t_end and/or stop.max_population",
        ));
    }
    if let Some(t) = s.t_end {
        if !(t > 0.0 && t.is_finite()) {
            return Err(ConfigError::field(
                "stop.t_end",
                format!("must be positive and finite, got {t}"),
            ));
        }
    }
    if let Some(0) = s.max_population {
        return Err(ConfigError::field("stop.max_population", "must be at least 1"));
    }
    Ok(())
}

fn validate_offspring_rows(
    field: &str,
    probabilities: impl Iterator<Item = f64>,
) -> Result<(), ConfigError> {
    let mut total = 0.0;
    let mut any = false;
    for p in probabilities {
        any = true;
        if !(p >= 0.0 && p.is_finite()) {
            return Err(ConfigError::field(
                field,
                format!("probabilities must be finite and non-negative, got {p}"),
            ));
        }
        total += p;
    }
    if !any {
        return Err(ConfigError::field(field, "needs at least one row"));
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(ConfigError::field(
            field,
            format!("probabilities must sum to 1, got {total}"),
        ));
    }
    Ok(())
}

fn fitness_field_error(err: FitnessError) -> ConfigError {
    let field = match err {
        FitnessError::UnknownModel(_) => "fitness.id",
        _ => "fitness.params",
    };
    ConfigError::field(field, err.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str) -> Result<ResolvedExperiment, ConfigError> {
        ExperimentConfig::from_toml(text)?.resolve(None, None, 1)
    }

    #[test]
    fn full_document_round_trips_with_defaults() {
        let resolved = resolve(
            r#"
                model = "rbp"
                replicates = 3
                seed = 9

                [fitness]
                id = "gnedenko"

                [stop]
                max_population = 500
            "#,
        )
        .unwrap();
        assert_eq!(resolved.model, ModelKind::Rbp);
        assert_eq!(resolved.replicates, 3);
        assert_eq!(resolved.seed, 9);
        assert_eq!(resolved.offspring.as_deref(), Some(&[(1, 1, 1.0)][..]));
        assert!(!resolved.point_cloud);
        let json = serde_json::to_string(&resolved).unwrap();
        assert!(json.contains("\"seed\":9"));
    }

    #[test]
    fn unknown_keys_and_fields_are_rejected() {
        assert!(matches!(
            ExperimentConfig::from_toml("model = \"rbp\"\nbogus = 1\n[fitness]\nid = \"gnedenko\""),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn dereich_beta_outside_unit_interval_names_the_field() {
        let err = resolve(
            r#"
                model = "dereich"
                [fitness]
                id = "weibull_alpha"
                params = [1.0]
                [dynamics]
                beta = 1.4
                [stop]
                n_vertices = 10
            "#,
        )
        .unwrap_err();
        match err {
            ConfigError::Field { field, .. } => assert_eq!(field, "dynamics.beta"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn toy_model_requires_a_bounded_jump_law_and_a_horizon() {
        let err = resolve(
            r#"
                model = "toy"
                [fitness]
                id = "gnedenko"
                [stop]
                t_end = 50.0
            "#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("fitness.id"));

        let resolved = resolve(
            r#"
                model = "toy"
                [fitness]
                id = "weibull_alpha"
                params = [1.0]
                [stop]
                t_end = 50.0
            "#,
        )
        .unwrap();
        assert_eq!(resolved.lambda, Some(1.0));
        assert_eq!(resolved.truncation, Some(3.0));
    }

    #[test]
    fn unresolvable_fitness_id_is_a_field_error() {
        let err = resolve(
            r#"
                model = "crp"
                [fitness]
                id = "nonexistent"
                [stop]
                n_customers = 10
            "#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("fitness.id"));
    }

    #[test]
    fn seed_precedence_flag_beats_file() {
        let config = ExperimentConfig::from_toml(
            r#"
                model = "crp"
                seed = 5
                [fitness]
                id = "weibull_alpha"
                params = [1.0]
                [stop]
                n_customers = 10
            "#,
        )
        .unwrap();
        let resolved = config.resolve(Some(77), None, 1).unwrap();
        assert_eq!(resolved.seed, 77);
        let resolved = config.resolve(None, None, 1).unwrap();
        assert_eq!(resolved.seed, 5);
    }
}
