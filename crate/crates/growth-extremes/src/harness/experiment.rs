//! Replicate orchestration: runs a resolved experiment over a worker pool,
//! merges results in replicate order, and persists the artifact files.
//!
//! Replicate k draws from a random stream derived from (seed, k), so the
//! output is a function of the config and seed alone — serial and parallel
//! execution produce identical bytes. An experiment directory holds
//! `config.resolved.json`, `replicates.csv` (one extremal summary per
//! replicate), `summary.json` (the resolved config plus the limit-law
//! report), and, when `point_cloud` is set, a per-model detail file
//! (`point_cloud.csv`, `edges.csv`, or `tables.csv`).

use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::engines::{
    FamilyRecord, PopulationSnapshot, RbpOptions, StopRule, estimate_t_offset,
    simulate_ct_gw_capped, simulate_rbp, simulate_selection_mutation,
};
use crate::extremal::{
    Extremes, LimitReport, LimitTargets, RescaledPoint, ReplicateSummary, SUMMARY_CSV_HEADER,
    csv_float, rescale_gumbel, rescale_weibull, top_two_records, toy_model_oracle, validate_limits,
};
use crate::fitness::FitnessModel;
use crate::malthusian::OffspringLaw;
use crate::models::{CrpOptions, simulate_bb_tree, simulate_crp, simulate_dereich};
use crate::rng::{IndexedUniforms, replicate_rng};
use crate::scaling::ScalingBundle;

use super::HarnessError;
use super::config::{ModelKind, ResolvedExperiment};

/// Stream salt separating the xi-moment estimation draws from replicate
/// streams.
const XI_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;
const XI_REPLICATES: u64 = 10_000;

/// In-memory result of a full experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub resolved: ResolvedExperiment,
    pub summaries: Vec<ReplicateSummary>,
    /// Limit-law validation; present when the model has reference laws and
    /// at least 100 replicates ran.
    pub report: Option<LimitReport>,
    /// Optional per-family detail file (name, content).
    pub detail: Option<(&'static str, String)>,
}

/// Companion JSON for an experiment: the resolved config echoed for
/// provenance, plus the limit-law report.
#[derive(Debug, Serialize)]
struct ExperimentSummary<'a> {
    config: &'a ResolvedExperiment,
    replicates_run: usize,
    limit_report: &'a Option<LimitReport>,
}

/// Immutable per-experiment context shared by all replicates.
struct RunContext {
    law: FitnessModel,
    /// Malthusian growth rate (continuous family models).
    lambda: Option<f64>,
    /// Effective per-fitness exponential rate of one family.
    gamma: f64,
    /// E[xi^{lambda/gamma}] override; `None` uses the pure-birth closed form.
    xi_moment: Option<f64>,
    offspring: Option<OffspringLaw>,
    targets: Option<LimitTargets>,
}

impl RunContext {
    fn bundle(&self, resolved: &ResolvedExperiment, t: f64) -> Result<ScalingBundle, HarnessError> {
        let lambda = self.lambda.expect("bundle requires a Malthusian rate");
        let bundle = match &self.law {
            FitnessModel::Gumbel(g) => {
                ScalingBundle::for_gumbel(g, lambda, self.gamma, t, self.xi_moment)?
            }
            FitnessModel::Weibull(w) => {
                ScalingBundle::for_weibull(w, lambda, self.gamma, t, self.xi_moment)?
            }
        };
        debug_assert_eq!(resolved.law.class(), self.law.class());
        Ok(bundle)
    }
}

fn build_context(resolved: &ResolvedExperiment) -> Result<RunContext, HarnessError> {
    let law = resolved.law;
    let mut ctx = RunContext {
        law,
        lambda: None,
        gamma: 1.0,
        xi_moment: None,
        offspring: None,
        targets: None,
    };
    match resolved.model {
        ModelKind::Toy => {
            let lambda = resolved.lambda.expect("resolved toy config has lambda");
            ctx.lambda = Some(lambda);
            ctx.targets = Some(LimitTargets {
                frechet_shape: lambda,
                frechet_scale: 1.0,
                gauss_variance: None,
                gamma_fitness: None,
                ratio_shape: lambda,
            });
        }
        ModelKind::Rbp => {
            let rows = resolved.offspring.clone().expect("resolved rbp config has offspring");
            let offspring = OffspringLaw::new(rows)?;
            let solution = crate::malthusian::malthusian_rbp(&law, &offspring)?;
            ctx.lambda = Some(solution.lambda);
            ctx.gamma = offspring.mean_same();
            ctx.xi_moment = xi_moment_for_marginal(
                &same_type_marginal_rbp(&offspring),
                ctx.gamma,
                solution.lambda,
                resolved.seed,
            )?;
            ctx.offspring = Some(offspring);
            ctx.targets = Some(LimitTargets::from_bundle(&ctx.bundle(resolved, 10.0)?));
        }
        ModelKind::SelectionMutation => {
            let beta = resolved.beta.expect("resolved selection-mutation config has beta");
            let counts = resolved
                .offspring_counts
                .clone()
                .expect("resolved selection-mutation config has offspring_counts");
            let mean: f64 = counts.iter().map(|&(k, p)| k as f64 * p).sum();
            let solution = crate::malthusian::malthusian_selection_mutation(&law, beta, mean)?;
            ctx.lambda = Some(solution.lambda);
            ctx.gamma = (1.0 - beta) * mean;
            ctx.xi_moment = xi_moment_for_marginal(
                &same_type_marginal_selmut(&counts, beta),
                ctx.gamma,
                solution.lambda,
                resolved.seed,
            )?;
            ctx.targets = Some(LimitTargets::from_bundle(&ctx.bundle(resolved, 10.0)?));
        }
        // The network and partition models are reported raw: their summary
        // rows carry unrescaled sizes and no reference-law report.
        ModelKind::BbTree | ModelKind::Dereich | ModelKind::Crp => {}
    }
    Ok(ctx)
}

/// Same-type size increments of one family per event, for rbp rows
/// (same, new, prob): the family grows by `same`.
fn same_type_marginal_rbp(law: &OffspringLaw) -> Vec<(u32, f64)> {
    let mut merged = std::collections::BTreeMap::new();
    for &(same, _, p) in law.entries() {
        *merged.entry(same).or_insert(0.0) += p;
    }
    merged.into_iter().collect()
}

/// Same-type size increments for selection-mutation counts (k, prob): each
/// of the k children independently mutates away with probability beta, so
/// the family gains Binomial(k, 1-beta).
fn same_type_marginal_selmut(counts: &[(u32, f64)], beta: f64) -> Vec<(u32, f64)> {
    let keep = 1.0 - beta;
    let mut merged = std::collections::BTreeMap::new();
    for &(k, p) in counts {
        // C(k,i) keep^i beta^(k-i), built by the ratio recurrence so no
        // factorials are needed.
        let mut term = beta.powi(k as i32);
        for i in 0..=k {
            *merged.entry(i).or_insert(0.0) += p * term;
            if i < k {
                term *= (keep / beta) * ((k - i) as f64 / (i + 1) as f64);
            }
        }
    }
    merged.into_iter().collect()
}

/// E[xi^{lambda/gamma}] for the family-size martingale limit. Families whose
/// per-event growth adds at most one individual are Yule processes after
/// thinning, so xi is standard exponential and the closed form applies
/// (`None`). Anything else is estimated by simulating e^{-gamma u} Y(u) at
/// gamma u = 8 over 10^4 auxiliary replicates.
fn xi_moment_for_marginal(
    marginal: &[(u32, f64)],
    gamma: f64,
    lambda: f64,
    seed: u64,
) -> Result<Option<f64>, HarnessError> {
    let pure_birth = marginal.iter().all(|&(k, _)| k <= 1);
    if pure_birth {
        return Ok(None);
    }
    let horizon = 8.0 / gamma;
    let exponent = lambda / gamma;
    let mut acc = 0.0;
    for k in 0..XI_REPLICATES {
        let mut rng = replicate_rng(seed ^ XI_SEED_SALT, k);
        let path = simulate_ct_gw_capped(marginal, 1.0, horizon, 10_000_000, &mut rng)?;
        acc += ((path.final_size as f64) * (-gamma * horizon).exp()).powf(exponent);
    }
    Ok(Some(acc / XI_REPLICATES as f64))
}

/// Runs every replicate of a resolved experiment on a pool of
/// `resolved.threads` workers and merges results in replicate order.
pub fn run_experiment(resolved: &ResolvedExperiment) -> Result<ExperimentOutput, HarnessError> {
    let ctx = build_context(resolved)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolved.threads)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let results: Result<Vec<(ReplicateSummary, Option<String>)>, HarnessError> = pool.install(|| {
        (0..resolved.replicates)
            .into_par_iter()
            .map(|k| run_replicate(resolved, &ctx, k))
            .collect()
    });
    let results = results?;
    let summaries: Vec<ReplicateSummary> = results.iter().map(|(s, _)| *s).collect();

    let report = match (&ctx.targets, summaries.len() >= 100) {
        (Some(targets), true) => Some(validate_limits(&summaries, targets)?),
        _ => None,
    };

    let detail = if resolved.point_cloud {
        detail_header(resolved.model).map(|(name, header)| {
            let mut content = String::from(header);
            content.push('\n');
            for (_, block) in &results {
                if let Some(block) = block {
                    content.push_str(block);
                }
            }
            (name, content)
        })
    } else {
        None
    };

    Ok(ExperimentOutput {
        resolved: resolved.clone(),
        summaries,
        report,
        detail,
    })
}

fn detail_header(model: ModelKind) -> Option<(&'static str, &'static str)> {
    match model {
        // The toy oracle prunes its family enumeration and retains no cloud.
        ModelKind::Toy => None,
        ModelKind::Rbp | ModelKind::SelectionMutation => {
            Some(("point_cloud.csv", "replicate,s,f,z"))
        }
        ModelKind::BbTree | ModelKind::Dereich => {
            Some(("edges.csv", "replicate,from,to,multiplicity"))
        }
        ModelKind::Crp => Some(("tables.csv", "replicate,table_index,weight,size,tau_if_embedded")),
    }
}

fn run_replicate(
    resolved: &ResolvedExperiment,
    ctx: &RunContext,
    k: u64,
) -> Result<(ReplicateSummary, Option<String>), HarnessError> {
    let rng = replicate_rng(resolved.seed, k);
    match resolved.model {
        ModelKind::Toy => {
            let draws = IndexedUniforms::new(resolved.seed, k);
            let t = resolved.stop.t_end.expect("resolved toy config has t_end");
            let sample = toy_model_oracle(
                resolved.fitness.params[0],
                resolved.lambda.expect("resolved toy config has lambda"),
                t,
                resolved.truncation.expect("resolved toy config has truncation"),
                &draws,
            )?;
            let summary = ReplicateSummary {
                replicate: k,
                t_or_n: t,
                max_size_rescaled: sample.rescaled,
                argmax_fitness: sample.argmax_fitness,
                argmax_birth_rescaled: sample.argmax_birth,
                top_ratio: sample.top_ratio,
                t_hat: 0.0,
            };
            Ok((summary, None))
        }
        ModelKind::Rbp | ModelKind::SelectionMutation => {
            let options = RbpOptions {
                stop: stop_rule(resolved),
                ..RbpOptions::default()
            };
            let output = match resolved.model {
                ModelKind::Rbp => {
                    let law = ctx.offspring_law()?;
                    simulate_rbp(&ctx.law, law, options, rng)?
                }
                _ => simulate_selection_mutation(
                    &ctx.law,
                    resolved.beta.expect("resolved selection-mutation config has beta"),
                    resolved
                        .offspring_counts
                        .as_deref()
                        .expect("resolved selection-mutation config has offspring_counts"),
                    options,
                    rng,
                )?,
            };
            summarize_family_snapshot(resolved, ctx, k, &output.snapshot)
        }
        ModelKind::BbTree => {
            let n = resolved.stop.n_vertices.expect("resolved bb_tree config has n_vertices");
            let state = simulate_bb_tree(&ctx.law, n, resolved.embed, rng)?;
            let extremes = loose_top_two(&state.vertices);
            let summary = network_summary(k, n as f64, &extremes);
            let detail = resolved.point_cloud.then(|| edge_rows(k, &state.edges));
            Ok((summary, detail))
        }
        ModelKind::Dereich => {
            let n = resolved.stop.n_vertices.expect("resolved dereich config has n_vertices");
            let state = simulate_dereich(
                &ctx.law,
                resolved.beta.expect("resolved dereich config has beta"),
                n,
                rng,
            )?;
            let extremes = loose_top_two(&state.vertices);
            let summary = network_summary(k, n as f64, &extremes);
            let detail = resolved.point_cloud.then(|| edge_rows(k, &state.edges));
            Ok((summary, detail))
        }
        ModelKind::Crp => {
            let n = resolved.stop.n_customers.expect("resolved crp config has n_customers");
            let options = CrpOptions {
                theta: resolved.theta.expect("resolved crp config has theta"),
                n_customers: n,
                embed: resolved.embed,
                ..CrpOptions::default()
            };
            let output = simulate_crp(&ctx.law, options, rng)?;
            let best = output
                .tables
                .iter()
                .max_by_key(|t| (t.size, std::cmp::Reverse(t.index)))
                .expect("at least one table is occupied");
            let summary = ReplicateSummary {
                replicate: k,
                t_or_n: n as f64,
                max_size_rescaled: best.size as f64,
                argmax_fitness: best.weight,
                argmax_birth_rescaled: best.tau.unwrap_or(best.opened_at as f64),
                top_ratio: output.top_ratio().unwrap_or(f64::INFINITY),
                t_hat: 0.0,
            };
            let detail = resolved.point_cloud.then(|| {
                let mut rows = String::new();
                for t in &output.tables {
                    let tau = t.tau.map_or(String::new(), csv_float);
                    rows.push_str(&format!(
                        "{},{},{},{},{}\n",
                        k,
                        t.index,
                        csv_float(t.weight),
                        t.size,
                        tau
                    ));
                }
                rows
            });
            Ok((summary, detail))
        }
    }
}

impl RunContext {
    fn offspring_law(&self) -> Result<OffspringLaw, HarnessError> {
        match &self.offspring {
            Some(law) => Ok(law.clone()),
            None => unreachable!("rbp context always carries an offspring law"),
        }
    }
}

fn stop_rule(resolved: &ResolvedExperiment) -> StopRule {
    let default = StopRule::default();
    StopRule {
        t_end: resolved.stop.t_end,
        max_population: resolved.stop.max_population.unwrap_or(default.max_population),
        ..default
    }
}

/// Extremal summary of a family snapshot: the argmax family is rescaled into
/// the limit chart (reusing the full rescaling on a one-family view so both
/// paths share the same arithmetic).
fn summarize_family_snapshot(
    resolved: &ResolvedExperiment,
    ctx: &RunContext,
    k: u64,
    snapshot: &PopulationSnapshot,
) -> Result<(ReplicateSummary, Option<String>), HarnessError> {
    let t = snapshot.clock;
    let bundle = ctx.bundle(resolved, t)?;
    let lambda = ctx.lambda.expect("family models have a Malthusian rate");
    let t_hat = estimate_t_offset(snapshot, lambda).unwrap_or(0.0);
    let extremes = loose_top_two(&snapshot.families);

    let argmax_view = PopulationSnapshot {
        clock: t,
        families: vec![extremes.argmax],
        total_size: extremes.argmax.size,
        family_count: 1,
        total_rate: 0.0,
    };
    let rescale = |view: &PopulationSnapshot| -> Vec<RescaledPoint> {
        match &ctx.law {
            FitnessModel::Gumbel(g) => rescale_gumbel(view, g, &bundle, t_hat),
            FitnessModel::Weibull(_) => rescale_weibull(view, &bundle),
        }
    };
    let point = rescale(&argmax_view)[0];

    let summary = ReplicateSummary {
        replicate: k,
        t_or_n: t,
        max_size_rescaled: point.z,
        argmax_fitness: extremes.argmax.fitness,
        argmax_birth_rescaled: point.s,
        top_ratio: extremes.top_ratio,
        t_hat,
    };
    let detail = resolved.point_cloud.then(|| {
        let mut rows = String::new();
        for p in rescale(snapshot) {
            rows.push_str(&format!(
                "{},{},{},{}\n",
                k,
                csv_float(p.s),
                csv_float(p.f),
                csv_float(p.z)
            ));
        }
        rows
    });
    Ok((summary, detail))
}

/// Top two by size, tolerating single-record states: a lone family reports
/// an infinite ratio rather than failing the whole experiment.
fn loose_top_two(families: &[FamilyRecord]) -> Extremes {
    match top_two_records(families) {
        Ok(extremes) => extremes,
        Err(_) => Extremes {
            argmax: families[0],
            top_ratio: f64::INFINITY,
        },
    }
}

fn network_summary(k: u64, n: f64, extremes: &Extremes) -> ReplicateSummary {
    ReplicateSummary {
        replicate: k,
        t_or_n: n,
        max_size_rescaled: extremes.argmax.size as f64,
        argmax_fitness: extremes.argmax.fitness,
        argmax_birth_rescaled: extremes.argmax.tau,
        top_ratio: extremes.top_ratio,
        t_hat: 0.0,
    }
}

fn edge_rows(k: u64, edges: &[(u64, u64, u64)]) -> String {
    let mut rows = String::new();
    for &(from, to, multiplicity) in edges {
        rows.push_str(&format!("{k},{from},{to},{multiplicity}\n"));
    }
    rows
}

/// Renders the per-replicate summary table.
pub fn replicates_csv(summaries: &[ReplicateSummary]) -> String {
    let mut out = String::from(SUMMARY_CSV_HEADER);
    out.push('\n');
    for s in summaries {
        out.push_str(&s.csv_row());
        out.push('\n');
    }
    out
}

/// Writes the experiment artifacts into `dir`, creating it as needed, and
/// returns the paths written.
pub fn write_experiment(
    output: &ExperimentOutput,
    dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut write = |name: &str, content: &str| -> Result<(), HarnessError> {
        let path = dir.join(name);
        let mut file = std::fs::File::create(&path)?;
        file.write_all(content.as_bytes())?;
        written.push(path);
        Ok(())
    };

    let config_json = serde_json::to_string_pretty(&output.resolved)
        .expect("resolved config serializes");
    write("config.resolved.json", &config_json)?;
    write("replicates.csv", &replicates_csv(&output.summaries))?;
    let summary = ExperimentSummary {
        config: &output.resolved,
        replicates_run: output.summaries.len(),
        limit_report: &output.report,
    };
    let summary_json =
        serde_json::to_string_pretty(&summary).expect("experiment summary serializes");
    write("summary.json", &summary_json)?;
    if let Some((name, content)) = &output.detail {
        write(name, content)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ExperimentConfig;

    fn resolved(text: &str, threads: usize) -> ResolvedExperiment {
        ExperimentConfig::from_toml(text)
            .unwrap()
            .resolve(None, None, threads)
            .unwrap()
    }

    const RBP_TOML: &str = r#"
        model = "rbp"
        replicates = 6
        seed = 11
        [fitness]
        id = "gnedenko"
        [dynamics]
        offspring = [[1, 3, 1.0]]
        [stop]
        max_population = 400
        [outputs]
        point_cloud = true
    "#;

    #[test]
    fn serial_and_parallel_runs_are_byte_identical() {
        let serial = run_experiment(&resolved(RBP_TOML, 1)).unwrap();
        let parallel = run_experiment(&resolved(RBP_TOML, 2)).unwrap();
        assert_eq!(
            replicates_csv(&serial.summaries),
            replicates_csv(&parallel.summaries)
        );
        assert_eq!(serial.detail, parallel.detail);
        let again = run_experiment(&resolved(RBP_TOML, 1)).unwrap();
        assert_eq!(
            replicates_csv(&serial.summaries),
            replicates_csv(&again.summaries)
        );
    }

    #[test]
    fn crp_single_run_detail_lists_every_table() {
        let output = run_experiment(&resolved(
            r#"
                model = "crp"
                replicates = 1
                [fitness]
                id = "weibull_alpha"
                params = [1.0]
                [stop]
                n_customers = 10
                [outputs]
                point_cloud = true
            "#,
            1,
        ))
        .unwrap();
        let (name, content) = output.detail.as_ref().unwrap();
        assert_eq!(*name, "tables.csv");
        let rows: Vec<&str> = content.trim_end().lines().collect();
        assert_eq!(rows[0], "replicate,table_index,weight,size,tau_if_embedded");
        let sizes: u64 = rows[1..]
            .iter()
            .map(|r| r.split(',').nth(3).unwrap().parse::<u64>().unwrap())
            .sum();
        assert_eq!(sizes, 10, "occupancies account for every customer");
    }

    #[test]
    fn toy_replicates_match_the_oracle_directly() {
        let config = resolved(
            r#"
                model = "toy"
                replicates = 5
                seed = 3
                [fitness]
                id = "weibull_alpha"
                params = [1.0]
                [stop]
                t_end = 30.0
            "#,
            1,
        );
        let output = run_experiment(&config).unwrap();
        for (k, summary) in output.summaries.iter().enumerate() {
            let draws = IndexedUniforms::new(3, k as u64);
            let direct = toy_model_oracle(1.0, 1.0, 30.0, 3.0, &draws).unwrap();
            assert_eq!(summary.max_size_rescaled, direct.rescaled);
        }
    }

    #[test]
    fn artifacts_land_in_the_experiment_directory() {
        let dir = tempfile::tempdir().unwrap();
        let output = run_experiment(&resolved(RBP_TOML, 1)).unwrap();
        let written = write_experiment(&output, dir.path()).unwrap();
        let names: Vec<String> = written
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(
            names,
            ["config.resolved.json", "replicates.csv", "summary.json", "point_cloud.csv"]
        );
        let csv = std::fs::read_to_string(dir.path().join("replicates.csv")).unwrap();
        assert!(csv.starts_with(SUMMARY_CSV_HEADER));
        assert_eq!(csv.trim_end().lines().count(), 7);
        let summary = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
        assert!(summary.contains("\"seed\": 11"));
    }
}
