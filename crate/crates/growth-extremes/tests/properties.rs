//! Randomized invariants: the centering-time solver leaves machine-level
//! residuals across its whole parameter range, the pruned toy-model
//! enumeration is exactly equivalent to the full scan, CSV float cells
//! round-trip, and empirical-distribution distances stay in [0, 1].

use growth_extremes::GumbelModel;
use growth_extremes::dist::{Exponential, ks_distance};
use growth_extremes::extremal::{csv_float, toy_model_oracle};
use growth_extremes::rng::IndexedUniforms;
use growth_extremes::scaling::solve_sigma;
use proptest::prelude::*;

fn gumbel_models() -> impl Strategy<Value = GumbelModel> {
    prop_oneof![
        Just(GumbelModel::Gnedenko),
        Just(GumbelModel::ExpInv),
        (0.2f64..3.0).prop_map(|rho| GumbelModel::PowerRho { rho }),
    ]
}

proptest! {
    #[test]
    fn sigma_solver_residual_is_tiny(
        model in gumbel_models(),
        lambda in 0.1f64..5.0,
        t in 2.0f64..1e5,
    ) {
        let solution = solve_sigma(&model, lambda, t).unwrap();
        prop_assert!(solution.sigma >= 1.0);
        prop_assert!(solution.sigma < t);
        if !solution.clamped {
            prop_assert!(solution.residual <= 1e-9, "residual {}", solution.residual);
        }
    }

    #[test]
    fn sigma_is_monotone_in_the_horizon(
        model in gumbel_models(),
        lambda in 0.1f64..5.0,
        t in 10.0f64..1e4,
        factor in 1.1f64..4.0,
    ) {
        let near = solve_sigma(&model, lambda, t).unwrap().sigma;
        let far = solve_sigma(&model, lambda, t * factor).unwrap().sigma;
        prop_assert!(far >= near);
    }

    #[test]
    fn toy_prune_equals_full_scan(
        alpha in 0.5f64..1.5,
        lambda in 0.5f64..2.0,
        t in 5.0f64..25.0,
        key in 0u64..1000,
    ) {
        let truncation = 2.0;
        let draws = IndexedUniforms::new(0xABCD, key);
        let pruned = toy_model_oracle(alpha, lambda, t, truncation, &draws).unwrap();

        // Full scan over the same truncated family set, no early stop.
        let n_cap = t.powf(truncation * alpha).min(1e15).floor() as u64;
        let mut best_log = f64::NEG_INFINITY;
        let mut second_log = f64::NEG_INFINITY;
        let mut best_index = 1u64;
        for n in 1..=n_cap {
            let tau = (n as f64).ln() / lambda;
            if tau >= t {
                break;
            }
            let log_size = (t - tau) * (1.0 - draws.at(n).powf(1.0 / alpha));
            if log_size > best_log {
                second_log = best_log;
                best_log = log_size;
                best_index = n;
            } else if log_size > second_log {
                second_log = log_size;
            }
        }
        prop_assert_eq!(pruned.argmax_index, best_index);
        prop_assert_eq!(pruned.top_ratio, (best_log - second_log).exp());
    }

    #[test]
    fn csv_float_round_trips(value in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let text = csv_float(value);
        prop_assert_eq!(text.parse::<f64>().unwrap(), value);
        prop_assert!(text.len() <= 25, "cell `{}` is {} bytes", text, text.len());
    }

    #[test]
    fn ks_distance_is_a_probability(seed in 0u64..500, n in 10usize..400) {
        let draws = IndexedUniforms::new(seed, 0);
        let samples: Vec<f64> = (0..n as u64).map(|i| -(1.0 - draws.at(i)).ln()).collect();
        let exponential = Exponential::new(1.0).unwrap();
        let ks = ks_distance(&samples, |x| exponential.cdf(x)).unwrap();
        prop_assert!((0.0..=1.0).contains(&ks));
    }
}
