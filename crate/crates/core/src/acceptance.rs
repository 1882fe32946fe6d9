//! The acceptance suite: nine end-to-end checks of the dynamics and
//! diagnostics, each with a fixed tolerance.

use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::diagnostics::{
    chi2_decay_experiment, dirichlet_acceleration_term, empirical_histogram, gibbs_density,
    pair_gibbs_density, total_variation, DecayFit, DecaySetup, Interval,
};
use crate::error::Result;
use crate::harness::{
    discretization_error_experiment, run_comparison, Algorithm, DiscretizationSetup, SimConfig,
    REFINEMENT,
};
use crate::langevin::{advance, run_chain};
use crate::objective::{check_gradient, benchmark_mixture, DoubleWell, Objective};
use crate::replica::{
    advance_replica, low_temperature_position, run_replica, swap_rate, Formulation, ReplicaState,
    ReplicaStreams, SwapPolicy,
};
use crate::rng::{Purpose, RngStream};

/// Result of one criterion.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] AC{} {}: {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

type Check = fn(u64) -> Result<(bool, String)>;

/// `(id, name, check)` for every criterion, in order.
pub const CRITERIA: [(u8, &str, Check); 9] = [
    (1, "swap-rate exactness", swap_rate_exactness),
    (2, "null coupling is bitwise", null_coupling),
    (3, "stationarity of the Langevin chain", stationarity),
    (4, "acceleration of chi-square decay", chi2_acceleration),
    (5, "Dirichlet acceleration term", dirichlet_term),
    (6, "discretization-error slope", discretization_slope),
    (7, "mixture benchmark ordering", mixture_ordering),
    (8, "formulation equivalence", formulation_equivalence),
    (9, "gradient correctness", gradient_correctness),
];

/// Runs criterion `id` (1–9). An error inside the check counts as a failure.
pub fn run_criterion(id: u8, seed: u64) -> Option<Outcome> {
    let (id, name, check) = *CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let (passed, detail) = check(seed).unwrap_or_else(|e| (false, format!("error: {e}")));
    Some(Outcome {
        id,
        name,
        passed,
        detail,
        elapsed: start.elapsed(),
    })
}

/// Runs every criterion in order, calling `report` after each.
pub fn run_all(seed: u64, mut report: impl FnMut(&Outcome)) -> Vec<Outcome> {
    CRITERIA
        .iter()
        .filter_map(|c| {
            let o = run_criterion(c.0, seed)?;
            report(&o);
            Some(o)
        })
        .collect()
}

fn double_well_axis() -> Interval {
    Interval {
        lower: -3.0,
        upper: 3.0,
    }
}

/// One-sided sign test: `P(X ≥ wins)` for `X ~ Binomial(wins + losses, 1/2)`.
pub fn sign_test_p(wins: u64, losses: u64) -> f64 {
    let n = wins + losses;
    if n == 0 {
        return 1.0;
    }
    let ln_choose = |k: u64| -> f64 {
        (1..=k)
            .map(|i| ((n - k + i) as f64).ln() - (i as f64).ln())
            .sum()
    };
    (wins..=n)
        .map(|k| (ln_choose(k) - n as f64 * std::f64::consts::LN_2).exp())
        .sum::<f64>()
        .min(1.0)
}

pub fn swap_rate_exactness(seed: u64) -> Result<(bool, String)> {
    let mut rng = RngStream::for_chain(seed, Purpose::MonteCarlo, 1);
    let mut worst_balance: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..10_000 {
        let u1 = -5.0 + 10.0 * rng.uniform();
        let u2 = -5.0 + 10.0 * rng.uniform();
        let t1 = 0.05 + 1.95 * rng.uniform();
        let t2 = 0.05 + 1.95 * rng.uniform();
        let s = swap_rate(u1, u2, t1, t2)?;
        let back = swap_rate(u2, u1, t1, t2)?;
        if !(s > 0.0 && s <= 1.0)
            || swap_rate(u1, u1, t1, t2)? != 1.0
            || swap_rate(u1, u2, t1, t1)? != 1.0
        {
            failures += 1;
        }
        let forward = s * (-u1 / t1 - u2 / t2).exp();
        let reverse = back * (-u2 / t1 - u1 / t2).exp();
        worst_balance = worst_balance.max((forward - reverse).abs() / forward.max(reverse));
    }
    Ok((
        failures == 0 && worst_balance <= 1e-12,
        format!("{failures} range/identity violations, worst detailed-balance error {worst_balance:.2e} (limit 1e-12)"),
    ))
}

pub fn null_coupling(seed: u64) -> Result<(bool, String)> {
    let f = benchmark_mixture(0.1)?;
    let policy = SwapPolicy::new(0.0, 0.01)?;
    let init = [2.0, 2.0];
    let steps = 10_000;
    let mut mismatched = 0;
    for chain in 0..5 {
        let mut streams = ReplicaStreams::for_chain(seed, chain);
        let pair = run_replica(
            ReplicaState::from_point(&init, 0.01, 1.0),
            &f,
            &policy,
            &mut streams,
            Formulation::TemperatureSwap,
            steps,
            1,
        )?;
        let low = run_chain(
            &init,
            &f,
            0.01,
            0.01,
            steps,
            &mut RngStream::for_chain(seed, Purpose::Noise1, chain),
        )?;
        let high = run_chain(
            &init,
            &f,
            1.0,
            0.01,
            steps,
            &mut RngStream::for_chain(seed, Purpose::Noise2, chain),
        )?;
        let identical = pair.len() == low.len()
            && pair.swap_count() == 0
            && pair
                .records
                .iter()
                .zip(&low.records)
                .zip(&high.records)
                .all(|((p, l), h)| {
                    p.positions[0] == l.positions[0] && p.positions[1] == h.positions[0]
                });
        if !identical {
            mismatched += 1;
        }
    }
    Ok((
        mismatched == 0,
        format!("{mismatched} of 5 seeds differ from independent chains over {steps} steps"),
    ))
}

pub fn stationarity(seed: u64) -> Result<(bool, String)> {
    let (tau, eta, chains, steps) = (0.5, 0.001, 2000u64, 50_000u64);
    let f = DoubleWell;
    let finals: Vec<[f64; 1]> = (0..chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::for_chain(seed, Purpose::Noise1, c);
            let mut x = [0.0];
            for k in 1..=steps {
                advance(&mut x, &f, eta, tau, &mut rng, k)?;
            }
            Ok(x)
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<_>>()?;
    let axes = [double_well_axis()];
    let pi = gibbs_density(&f, tau, &axes, 60)?;
    let h = empirical_histogram(&finals, &axes, 60)?;
    let tv = total_variation(&h, &pi)?;
    Ok((tv < 0.05, format!("TV = {tv:.4} (limit 0.05)")))
}

/// Settings shared by both arms of the χ² decay comparison.
pub fn chi2_setup(intensity: f64, seed: u64) -> DecaySetup {
    DecaySetup {
        tau1: 0.1,
        tau2: 1.0,
        intensity,
        eta: 0.001,
        ensemble: 2000,
        sample_times: vec![0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0],
        axis: double_well_axis(),
        resolution: 12,
        seed,
        init: [-1.0, 1.0],
        bootstrap: 100,
    }
}

/// Checks the two conditions of the decay comparison; returns the failures.
pub fn compare_decay(slow: &DecayFit, fast: &DecayFit) -> Vec<String> {
    let mut problems = Vec::new();
    let rate_sigma = slow.rate_std.hypot(fast.rate_std);
    if fast.rate < slow.rate - rate_sigma {
        problems.push(format!(
            "rate {:.3} below {:.3} − σ {:.3}",
            fast.rate, slow.rate, rate_sigma
        ));
    }
    for k in 1..slow.times.len() {
        let sigma = slow.bootstrap_std[k].hypot(fast.bootstrap_std[k]);
        if fast.chi2[k] > slow.chi2[k] + 2.0 * sigma {
            problems.push(format!(
                "t = {}: χ² {:.4} above {:.4} + 2σ",
                slow.times[k], fast.chi2[k], slow.chi2[k]
            ));
        }
    }
    problems
}

pub fn chi2_acceleration(seed: u64) -> Result<(bool, String)> {
    let slow = chi2_decay_experiment(&DoubleWell, &chi2_setup(0.0, seed))?;
    let fast = chi2_decay_experiment(&DoubleWell, &chi2_setup(5.0, seed))?;
    let problems = compare_decay(&slow, &fast);
    let summary = format!(
        "rate(a=0) = {:.3} ± {:.3}, rate(a=5) = {:.3} ± {:.3}",
        slow.rate, slow.rate_std, fast.rate, fast.rate_std
    );
    if problems.is_empty() {
        Ok((true, summary))
    } else {
        Ok((false, format!("{summary}; {}", problems.join("; "))))
    }
}

/// Monte Carlo estimate of the acceleration term for `g(x₁, x₂) = x₁` with
/// `samples` draws from the product Gibbs law restricted to the axis.
pub fn dirichlet_monte_carlo(
    tau1: f64,
    tau2: f64,
    intensity: f64,
    axis: Interval,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let f = DoubleWell;
    let mut rng = RngStream::for_chain(seed, Purpose::MonteCarlo, 5);
    // Rejection from the uniform law on the axis; min U = 0.
    let mut draw = |tau: f64| loop {
        let x = axis.lower + axis.width() * rng.uniform();
        if rng.uniform() < (-f.value(&[x]) / tau).exp() {
            break x;
        }
    };
    let mut total = 0.0;
    for _ in 0..samples {
        let x1 = draw(tau1);
        let x2 = draw(tau2);
        let s = swap_rate(f.value(&[x1]), f.value(&[x2]), tau1, tau2)?;
        total += s * (x2 - x1).powi(2);
    }
    Ok(0.5 * intensity * total / samples as f64)
}

pub fn dirichlet_term(seed: u64) -> Result<(bool, String)> {
    let (tau1, tau2) = (0.1, 1.0);
    let axis = double_well_axis();
    let pi = pair_gibbs_density(&DoubleWell, tau1, tau2, axis, 240)?;
    let grid = dirichlet_acceleration_term(|a, _| a, &DoubleWell, tau1, tau2, 1.0, &pi)?;
    let mc = dirichlet_monte_carlo(tau1, tau2, 1.0, axis, 1_000_000, seed)?;
    let symmetric = dirichlet_acceleration_term(
        |a, b| a * b + (a + b).sin(),
        &DoubleWell,
        tau1,
        tau2,
        1.0,
        &pi,
    )?;
    let no_swap = dirichlet_acceleration_term(|a, _| a, &DoubleWell, tau1, tau2, 0.0, &pi)?;
    let rel = (grid - mc).abs() / mc;
    Ok((
        rel < 0.02 && symmetric == 0.0 && no_swap == 0.0 && grid > 0.0,
        format!(
            "grid {grid:.5}, Monte Carlo {mc:.5}, relative gap {rel:.4} (limit 0.02); symmetric {symmetric}, a=0 {no_swap}"
        ),
    ))
}

pub fn discretization_setup(seed: u64) -> DiscretizationSetup {
    DiscretizationSetup {
        tau1: 0.1,
        tau2: 1.0,
        intensity: 1.0,
        etas: vec![0.04, 0.02, 0.01, 0.005],
        horizon: 1.0,
        ensemble: 500,
        seed,
        init: [vec![-1.0], vec![1.0]],
        refinement: REFINEMENT,
    }
}

pub fn discretization_slope(seed: u64) -> Result<(bool, String)> {
    let r = discretization_error_experiment(&DoubleWell, &discretization_setup(seed))?;
    let monotone = r.points.windows(2).all(|w| w[1].mse < w[0].mse);
    let slope = r.slope.unwrap_or(f64::NAN);
    let mses: Vec<String> = r
        .points
        .iter()
        .map(|p| format!("{}:{:.3e}", p.eta, p.mse))
        .collect();
    Ok((
        (0.7..=1.3).contains(&slope) && monotone,
        format!(
            "slope {slope:.3} (window [0.7, 1.3]), monotone {monotone}, mse {}",
            mses.join(" ")
        ),
    ))
}

pub fn mixture_ordering(seed: u64) -> Result<(bool, String)> {
    let base = SimConfig {
        seed,
        ..SimConfig::benchmark()
    };
    let [lt, _, re] = run_comparison(&base)?;
    debug_assert_eq!(
        (lt.algorithm, re.algorithm),
        (Algorithm::LowTemp, Algorithm::ReplicaExchange)
    );
    let (mut wins, mut losses) = (0, 0);
    for (r, l) in re.final_best.iter().zip(&lt.final_best) {
        if r < l {
            wins += 1;
        } else if r > l {
            losses += 1;
        }
    }
    let p = sign_test_p(wins, losses);
    let (re_med, lt_med) = (re.median_final_best(), lt.median_final_best());
    Ok((
        re_med <= lt_med && p < 0.05,
        format!(
            "median final best RE {re_med:.5} vs LT {lt_med:.5}; RE better on {wins}, worse on {losses}, sign-test p = {p:.4}"
        ),
    ))
}

/// Low-temperature marginal of an ensemble after `steps` steps. Chains
/// `offset..offset + chains` are used.
pub fn low_temperature_ensemble(
    formulation: Formulation,
    intensity: f64,
    eta: f64,
    steps: u64,
    chains: u64,
    offset: u64,
    seed: u64,
) -> Result<Vec<[f64; 1]>> {
    let policy = SwapPolicy::new(intensity, eta)?;
    (offset..offset + chains)
        .into_par_iter()
        .map(|c| {
            let mut streams = ReplicaStreams::for_chain(seed, c);
            let init = ReplicaState::new(vec![-1.0], vec![1.0], 0.1, 1.0);
            let end =
                advance_replica(init, &DoubleWell, &policy, &mut streams, formulation, steps)?;
            let x = match formulation {
                Formulation::TemperatureSwap => low_temperature_position(&end)[0],
                Formulation::PositionSwap => end.pos1[0],
            };
            Ok([x])
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect()
}

pub fn formulation_equivalence(seed: u64) -> Result<(bool, String)> {
    let chains = 2000;
    let temps = low_temperature_ensemble(
        Formulation::TemperatureSwap,
        5.0,
        0.001,
        20_000,
        chains,
        0,
        seed,
    )?;
    let positions = low_temperature_ensemble(
        Formulation::PositionSwap,
        5.0,
        0.001,
        20_000,
        chains,
        chains,
        seed,
    )?;
    let axes = [double_well_axis()];
    let a = empirical_histogram(&temps, &axes, 12)?;
    let b = empirical_histogram(&positions, &axes, 12)?;
    let tv = total_variation(&a, &b)?;
    Ok((
        tv < 0.05,
        format!("TV = {tv:.4} between the two ensembles (limit 0.05)"),
    ))
}

pub fn gradient_correctness(seed: u64) -> Result<(bool, String)> {
    let f = benchmark_mixture(0.1)?;
    let mut rng = RngStream::for_chain(seed, Purpose::MonteCarlo, 9);
    let worst = (0..100)
        .map(|_| {
            let p = [-1.0 + 6.0 * rng.uniform(), -1.0 + 6.0 * rng.uniform()];
            check_gradient(&f, &p, 1e-5)
        })
        .fold(0.0, f64::max);
    Ok((
        worst < 1e-5,
        format!("worst relative error {worst:.2e} (limit 1e-5)"),
    ))
}
