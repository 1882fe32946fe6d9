use relex_core::diagnostics::chi2_decay_experiment;
use relex_core::harness::{
    discretization_error_experiment, run_comparison, run_config, run_config_with, Execution,
    InitSpec, SimConfig,
};
use relex_core::langevin::run_chain;
use relex_core::objective::{benchmark_mixture, DoubleWell, Objective, ObjectiveSpec, Quadratic};
use relex_core::replica::{run_replica, Formulation, ReplicaState, ReplicaStreams, SwapPolicy};
use relex_core::rng::{Purpose, RngStream};
use relex_core::{acceptance, Algorithm, DEFAULT_SEED};

fn small_benchmark() -> SimConfig {
    SimConfig {
        steps: 2000,
        replicates: 6,
        ..SimConfig::benchmark()
    }
}

#[test]
fn summaries_replay_bitwise() {
    let config = small_benchmark();
    assert_eq!(run_config(&config).unwrap(), run_config(&config).unwrap());
}

#[test]
fn serial_and_parallel_agree() {
    let config = small_benchmark();
    assert_eq!(
        run_config_with(&config, Execution::Serial).unwrap(),
        run_config_with(&config, Execution::Parallel).unwrap()
    );
}

#[test]
fn uncoupled_replica_exchange_matches_low_temperature_chain() {
    let config = SimConfig {
        intensity: 0.0,
        ..small_benchmark()
    };
    let [lt, _, re] = run_comparison(&config).unwrap();
    assert_eq!(lt.curves, re.curves);
    assert_eq!(lt.final_best, re.final_best);
    assert!(re.swap_counts.iter().all(|&c| c == 0));
}

#[test]
fn comparison_curves_are_non_increasing() {
    for s in run_comparison(&small_benchmark()).unwrap() {
        for c in &s.curves {
            assert!(c.windows(2).all(|w| w[1] <= w[0]), "{}", s.algorithm);
        }
    }
}

#[test]
fn quadratic_chains_settle_near_minimizer() {
    let f = Quadratic::new(2, 1.0);
    let close = (0..100u64)
        .filter(|&c| {
            let mut rng = RngStream::for_chain(DEFAULT_SEED, Purpose::Noise1, c);
            let t = run_chain(&[3.0, -2.0], &f, 0.01, 0.01, 10_000, &mut rng).unwrap();
            let end = &t.records.last().unwrap().positions[0];
            end.iter().map(|v| v * v).sum::<f64>().sqrt() < 0.5
        })
        .count();
    assert!(close >= 95, "{close} of 100 chains within 0.5");
}

#[test]
fn low_temperature_chain_is_usually_trapped() {
    let f = benchmark_mixture(0.1).unwrap();
    let global = f.value(&[4.0, 4.0]);
    let config = SimConfig {
        algorithm: Algorithm::LowTemp,
        ..SimConfig::benchmark()
    };
    let s = run_config(&config).unwrap();
    let trapped = s.final_best.iter().filter(|&&b| b > global + 0.01).count();
    assert!(
        trapped * 2 > s.final_best.len(),
        "{trapped} of {} trapped",
        s.final_best.len()
    );
}

#[test]
fn most_benchmark_pairs_swap() {
    let f = benchmark_mixture(0.1).unwrap();
    let policy = SwapPolicy::new(1.0, 0.01).unwrap();
    let swapped = (0..100u64)
        .filter(|&c| {
            let mut streams = ReplicaStreams::for_chain(DEFAULT_SEED, c);
            let t = run_replica(
                ReplicaState::from_point(&[2.0, 2.0], 0.01, 1.0),
                &f,
                &policy,
                &mut streams,
                Formulation::TemperatureSwap,
                10_000,
                100,
            )
            .unwrap();
            t.swap_count() > 0
        })
        .count();
    // An independent vectorized simulation of the same setting swaps in 83 of
    // 100 runs; allow for binomial noise on both estimates.
    assert!(swapped >= 70, "{swapped} of 100 runs swapped");
}

#[test]
fn chi2_decays_up_to_bootstrap_noise() {
    let fit =
        chi2_decay_experiment(&DoubleWell, &acceptance::chi2_setup(5.0, DEFAULT_SEED)).unwrap();
    for k in 1..fit.chi2.len() {
        assert!(
            fit.chi2[k] <= fit.chi2[k - 1] + 3.0 * fit.bootstrap_std[k],
            "t = {}: {} after {}",
            fit.times[k],
            fit.chi2[k],
            fit.chi2[k - 1]
        );
    }
}

#[test]
fn discretization_without_swaps_converges_faster() {
    let setup = relex_core::harness::DiscretizationSetup {
        intensity: 0.0,
        ..acceptance::discretization_setup(DEFAULT_SEED)
    };
    let r = discretization_error_experiment(&DoubleWell, &setup).unwrap();
    assert!(r.points.windows(2).all(|w| w[1].mse < w[0].mse));
    assert!(r.slope.unwrap() >= 0.7, "slope {:?}", r.slope);
}

#[test]
fn uniform_initialization_runs() {
    let config = SimConfig {
        objective: ObjectiveSpec::DoubleWell,
        init: InitSpec::UniformBox {
            lower: -2.0,
            upper: 2.0,
        },
        tau1: 0.1,
        tau2: 1.0,
        steps: 500,
        replicates: 3,
        ..SimConfig::benchmark()
    };
    let s = run_config(&config).unwrap();
    assert_eq!(s.final_best.len(), 3);
}
