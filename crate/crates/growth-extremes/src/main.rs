//! Command-line surface of the growth-extremes toolkit.
//!
//! `simulate` runs a TOML-configured experiment and writes its artifact
//! directory; `validate` executes named end-to-end scenarios and reports
//! pass/fail lines; `sigma`, `malthus`, and `kappa` expose the analytic
//! layer (centering times, growth rates, curvature constants); `catalog`
//! lists the fitness laws with their tail class and regularity status.
//!
//! Exit codes: 0 when everything requested succeeded, 1 when a validation
//! or simulation failed, 2 for configuration and usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use growth_extremes::FitnessModel;
use growth_extremes::harness::{
    ExperimentConfig, HarnessError, run_experiment, run_scenario, scenario_names, write_experiment,
};
use growth_extremes::malthusian::{
    OffspringLaw, malthusian_bb, malthusian_crp, malthusian_rbp, malthusian_selection_mutation,
};
use growth_extremes::scaling::{sanity_asymptotics, solve_sigma};

#[derive(Parser)]
#[command(
    name = "growth-extremes",
    version,
    about = "Simulation and validation toolkit for competing growth processes with random fitness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment and write its artifact directory.
    Simulate {
        /// TOML experiment document.
        #[arg(long)]
        config: PathBuf,
        /// Seed override (beats EXTREMAL_SEED and the config file).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 means all available cores.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Output directory override.
        #[arg(long)]
        out: Option<String>,
    },
    /// Run validation scenarios end-to-end and print one line per outcome.
    Validate {
        /// Scenario to run (repeatable); omit to run all.
        #[arg(long)]
        name: Vec<String>,
        /// List available scenario names and exit.
        #[arg(long)]
        list: bool,
    },
    /// Solve for the centering time of the largest family.
    Sigma {
        /// Fitness catalog id (Gumbel class).
        #[arg(long)]
        model: String,
        /// Base reproduction rate.
        #[arg(long)]
        lambda: f64,
        /// Time horizon.
        #[arg(long)]
        t: f64,
        /// Hazard exponent for power_rho.
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Solve a growth-rate equation for the given dynamics.
    Malthus {
        /// Which balance equation to solve.
        #[arg(long)]
        equation: Equation,
        /// Fitness catalog id.
        #[arg(long)]
        model: String,
        /// Tail exponent for weibull_alpha.
        #[arg(long)]
        alpha: Option<f64>,
        /// Hazard exponent for power_rho.
        #[arg(long)]
        rho: Option<f64>,
        /// Mutation probability (selection-mutation).
        #[arg(long)]
        beta: Option<f64>,
        /// Mean offspring per event (selection-mutation).
        #[arg(long)]
        mean: Option<f64>,
        /// Offspring table rows SAME:NEW:PROB (rbp); repeatable.
        #[arg(long, value_parser = parse_offspring)]
        offspring: Vec<(u32, u32, f64)>,
    },
    /// Curvature constant of a Gumbel-class law with extrapolation diagnostics.
    Kappa {
        /// Fitness catalog id (Gumbel class).
        #[arg(long)]
        model: String,
        /// Hazard exponent for power_rho.
        #[arg(long)]
        rho: Option<f64>,
    },
    /// List the fitness catalog with tail class and regularity status.
    Catalog,
}

#[derive(Clone, Copy, ValueEnum)]
enum Equation {
    /// Fitness-degree attachment tree: one member and one family per event.
    Bb,
    /// Branching with immigration from a joint offspring table.
    Rbp,
    /// Mutant children with probability beta, mean offspring per event.
    SelectionMutation,
    /// Fitness-biased partition balance.
    Crp,
}

fn parse_offspring(text: &str) -> Result<(u32, u32, f64), String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected SAME:NEW:PROB, got `{text}`"));
    }
    let same = parts[0].parse().map_err(|_| format!("bad count `{}`", parts[0]))?;
    let new = parts[1].parse().map_err(|_| format!("bad count `{}`", parts[1]))?;
    let prob = parts[2].parse().map_err(|_| format!("bad probability `{}`", parts[2]))?;
    Ok((same, new, prob))
}

/// Builds a catalog law from the id plus the optional shape flags.
fn resolve_law(model: &str, alpha: Option<f64>, rho: Option<f64>) -> Result<FitnessModel, String> {
    let params = match (alpha, rho) {
        (Some(_), Some(_)) => return Err("--alpha and --rho are mutually exclusive".into()),
        (Some(a), None) => vec![a],
        (None, Some(r)) => vec![r],
        (None, None) => vec![],
    };
    FitnessModel::from_catalog(model, &params).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Simulate { config, seed, threads, out } => simulate(config, seed, threads, out),
        Command::Validate { name, list } => validate(name, list),
        Command::Sigma { model, lambda, t, rho } => sigma(&model, lambda, t, rho),
        Command::Malthus { equation, model, alpha, rho, beta, mean, offspring } => {
            malthus(equation, &model, alpha, rho, beta, mean, offspring)
        }
        Command::Kappa { model, rho } => kappa(&model, rho),
        Command::Catalog => catalog(),
    }
}

const USAGE_ERROR: u8 = 2;
const FAILURE: u8 = 1;

fn usage_error(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(USAGE_ERROR)
}

fn simulate(config: PathBuf, seed: Option<u64>, threads: usize, out: Option<String>) -> ExitCode {
    let text = match std::fs::read_to_string(&config) {
        Ok(text) => text,
        Err(e) => return usage_error(format!("{}: {e}", config.display())),
    };
    let resolved = match ExperimentConfig::from_toml(&text).and_then(|c| c.resolve(seed, out, threads))
    {
        Ok(resolved) => resolved,
        Err(e) => return usage_error(e),
    };
    let dir = resolved
        .output_dir
        .clone()
        .unwrap_or_else(|| format!("{}-seed{}", resolved.model.as_str(), resolved.seed));
    let output = match run_experiment(&resolved) {
        Ok(output) => output,
        Err(HarnessError::Config(e)) => return usage_error(e),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(FAILURE);
        }
    };
    let written = match write_experiment(&output, dir.as_ref()) {
        Ok(paths) => paths,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(FAILURE);
        }
    };
    println!(
        "{} replicates of `{}` (seed {}) -> {dir}",
        resolved.replicates,
        resolved.model.as_str(),
        resolved.seed
    );
    for path in written {
        println!("  {}", path.display());
    }
    if let Some(report) = &output.report {
        println!(
            "limit-law validation: {}",
            if report.all_pass { "pass" } else { "FAIL" }
        );
        for check in &report.checks {
            println!(
                "  {}: statistic {:.4} (threshold {}) -> {}",
                check.law,
                check.ks,
                check.threshold,
                if check.pass { "pass" } else { "FAIL" }
            );
        }
    }
    ExitCode::SUCCESS
}

fn validate(names: Vec<String>, list: bool) -> ExitCode {
    if list {
        for name in scenario_names() {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    let requested: Vec<String> = if names.is_empty() {
        scenario_names().iter().map(|s| s.to_string()).collect()
    } else {
        names
    };
    let mut all_pass = true;
    for name in &requested {
        match run_scenario(name) {
            Ok(outcome) => {
                println!("{}", outcome.format_line());
                all_pass &= outcome.pass;
            }
            Err(HarnessError::UnknownScenario(name)) => {
                return usage_error(format!(
                    "unknown scenario `{name}` (see `validate --list`)"
                ));
            }
            Err(e) => {
                eprintln!("error: {name}: {e}");
                all_pass = false;
            }
        }
    }
    if all_pass { ExitCode::SUCCESS } else { ExitCode::from(FAILURE) }
}

fn sigma(model: &str, lambda: f64, t: f64, rho: Option<f64>) -> ExitCode {
    let law = match resolve_law(model, None, rho) {
        Ok(law) => law,
        Err(e) => return usage_error(e),
    };
    let gumbel = match law.as_gumbel() {
        Ok(g) => g.clone(),
        Err(e) => return usage_error(e),
    };
    let solution = match solve_sigma(&gumbel, lambda, t) {
        Ok(s) => s,
        Err(e) => return usage_error(e),
    };
    println!("sigma = {}", solution.sigma);
    println!(
        "residual = {:.2e} (clamped: {}, iterations: {})",
        solution.residual, solution.clamped, solution.iterations
    );
    match sanity_asymptotics(&gumbel, lambda, t) {
        Ok(check) => println!(
            "regime: r1 = {:.4}, r2 = {:.4}, r3 = {:.4} -> {}",
            check.r1,
            check.r2,
            check.r3,
            if check.pass { "asymptotic" } else { "pre-asymptotic" }
        ),
        Err(e) => println!("regime: unavailable ({e})"),
    }
    ExitCode::SUCCESS
}

fn malthus(
    equation: Equation,
    model: &str,
    alpha: Option<f64>,
    rho: Option<f64>,
    beta: Option<f64>,
    mean: Option<f64>,
    offspring: Vec<(u32, u32, f64)>,
) -> ExitCode {
    let law = match resolve_law(model, alpha, rho) {
        Ok(law) => law,
        Err(e) => return usage_error(e),
    };
    let solution = match equation {
        Equation::Bb => malthusian_bb(&law),
        Equation::Rbp => {
            let table = if offspring.is_empty() {
                Ok(OffspringLaw::deterministic(1, 1))
            } else {
                OffspringLaw::new(offspring)
            };
            match table {
                Ok(table) => malthusian_rbp(&law, &table),
                Err(e) => return usage_error(e),
            }
        }
        Equation::SelectionMutation => {
            let Some(beta) = beta else {
                return usage_error("--beta is required for selection-mutation");
            };
            malthusian_selection_mutation(&law, beta, mean.unwrap_or(1.0))
        }
        Equation::Crp => {
            return match malthusian_crp(&law) {
                Ok(balance) => {
                    println!(
                        "alpha = {} (residual {:.2e})",
                        balance.alpha, balance.residual
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => usage_error(e),
            };
        }
    };
    match solution {
        Ok(s) => {
            println!("lambda = {:.6}", s.lambda);
            println!(
                "residual = {:.2e} (existence condition {:.6} > {})",
                s.residual, s.condition, s.threshold
            );
            ExitCode::SUCCESS
        }
        Err(e) => usage_error(e),
    }
}

fn kappa(model: &str, rho: Option<f64>) -> ExitCode {
    let law = match resolve_law(model, None, rho) {
        Ok(law) => law,
        Err(e) => return usage_error(e),
    };
    let gumbel = match law.as_gumbel() {
        Ok(g) => g.clone(),
        Err(e) => return usage_error(e),
    };
    match gumbel.kappa() {
        Ok(estimate) => {
            println!("kappa = {:.6}", estimate.value);
            println!(
                "raw ratios at 1 - 10^-k, k = 4..8: {:?}",
                estimate.raw.map(|r| (r * 1e6).round() / 1e6)
            );
            println!("extrapolation spread = {:.2e}", estimate.spread);
            ExitCode::SUCCESS
        }
        Err(e) => usage_error(e),
    }
}

fn catalog() -> ExitCode {
    println!(
        "{:<16} {:<8} {:<22} {:<14} regularity",
        "id", "class", "parameters", "kappa"
    );
    for id in FitnessModel::CATALOG_IDS {
        // Parametric laws are shown at a representative shape value.
        let (params, shown): (&[f64], &str) = match id {
            "power_rho" => (&[1.0], "rho > 0 (shown: 1)"),
            "weibull_alpha" => (&[1.0], "alpha > 0 (shown: 1)"),
            _ => (&[], "none"),
        };
        let law = FitnessModel::from_catalog(id, params).expect("catalog ids resolve");
        let line = match law.as_gumbel() {
            Ok(gumbel) => {
                let report = gumbel.check_a5();
                let kappa = report
                    .kappa
                    .map_or_else(|| "n/a".to_string(), |k| format!("{k:.6}"));
                format!(
                    "{id:<16} {:<8} {shown:<22} {kappa:<14} {}",
                    "gumbel",
                    if report.pass { "pass" } else { "FAIL" }
                )
            }
            Err(_) => format!(
                "{id:<16} {:<8} {shown:<22} {:<14} n/a (polynomial tail)",
                "weibull", "-"
            ),
        };
        println!("{line}");
    }
    ExitCode::SUCCESS
}
