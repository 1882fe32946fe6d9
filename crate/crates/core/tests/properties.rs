use proptest::prelude::*;

use relex_core::diagnostics::{
    best_so_far, chi_square_divergence, dirichlet_acceleration_term, empirical_histogram,
    gibbs_density, pair_gibbs_density, GridMeasure, Interval,
};
use relex_core::objective::{
    build_gaussian_mixture, check_gradient, benchmark_mixture, DoubleWell, FnObjective,
    GaussianMixtureSpec, Objective,
};
use relex_core::replica::{
    advance_replica, swap_rate, Formulation, ReplicaState, ReplicaStreams, SwapPolicy,
};
use relex_core::rng::{Purpose, RngStream};

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn mixture_spec() -> impl Strategy<Value = GaussianMixtureSpec> {
    (1usize..8).prop_flat_map(|n| {
        (
            prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), n),
            prop::collection::vec(0.01..1.0f64, n),
            0.05..1.0f64,
        )
            .prop_map(|(c, w, kappa)| GaussianMixtureSpec {
                centers: c.into_iter().map(|(x, y)| [x, y]).collect(),
                weights: w,
                kappa,
                confinement: 0.0,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mixture_is_permutation_invariant(spec in mixture_spec(), shift in 0usize..8, x in -4.0..6.0f64, y in -4.0..6.0f64) {
        let mut permuted = spec.clone();
        let k = shift % spec.centers.len();
        permuted.centers.rotate_left(k);
        permuted.weights.rotate_left(k);
        permuted.centers.reverse();
        permuted.weights.reverse();
        let a = build_gaussian_mixture(&spec).unwrap().value(&[x, y]);
        let b = build_gaussian_mixture(&permuted).unwrap().value(&[x, y]);
        prop_assert!(rel_close(a, b, 1e-12), "{} vs {}", a, b);
    }

    #[test]
    fn mixture_scales_with_weights(spec in mixture_spec(), c in 0.01..100.0f64, x in -4.0..6.0f64, y in -4.0..6.0f64) {
        let mut scaled = spec.clone();
        for w in &mut scaled.weights {
            *w *= c;
        }
        let a = build_gaussian_mixture(&spec).unwrap().value(&[x, y]);
        let b = build_gaussian_mixture(&scaled).unwrap().value(&[x, y]);
        prop_assert!(rel_close(c * a, b, 1e-12), "{} vs {}", c * a, b);
    }

    #[test]
    fn mixture_gradient_matches_finite_differences(x in -1.0..5.0f64, y in -1.0..5.0f64, kappa in prop::sample::select(vec![0.05, 0.1, 0.2, 0.3])) {
        let f = benchmark_mixture(kappa).unwrap();
        let err = check_gradient(&f, &[x, y], 1e-6);
        prop_assert!(err < 1e-5, "error {} at ({}, {})", err, x, y);
        prop_assert!(f.value(&[x, y]).is_finite());
    }

    #[test]
    fn swap_rate_in_unit_interval(u1 in -50.0..50.0f64, u2 in -50.0..50.0f64, t1 in 0.01..5.0f64, t2 in 0.01..5.0f64) {
        let s = swap_rate(u1, u2, t1, t2).unwrap();
        prop_assert!(s > 0.0 || (1.0 / t1 - 1.0 / t2) * (u1 - u2) < -700.0);
        prop_assert!(s <= 1.0);
        if u1 >= u2 && t1 < t2 {
            prop_assert_eq!(s, 1.0);
        }
    }

    #[test]
    fn swap_rate_is_monotone(u1 in -10.0..10.0f64, u2 in -10.0..10.0f64, du in 0.0..5.0f64, t1 in 0.01..1.0f64, gap in 0.01..2.0f64) {
        let t2 = t1 + gap;
        let base = swap_rate(u1, u2, t1, t2).unwrap();
        prop_assert!(swap_rate(u1 + du, u2, t1, t2).unwrap() >= base);
        prop_assert!(swap_rate(u1, u2 + du, t1, t2).unwrap() <= base);
    }

    #[test]
    fn swap_rate_satisfies_detailed_balance(u1 in -5.0..5.0f64, u2 in -5.0..5.0f64, t1 in 0.05..2.0f64, t2 in 0.05..2.0f64) {
        let forward = swap_rate(u1, u2, t1, t2).unwrap() * (-u1 / t1 - u2 / t2).exp();
        let reverse = swap_rate(u2, u1, t1, t2).unwrap() * (-u2 / t1 - u1 / t2).exp();
        prop_assert!(rel_close(forward, reverse, 1e-12), "{} vs {}", forward, reverse);
    }

    #[test]
    fn chi_square_of_measure_with_itself_is_zero(mass in prop::collection::vec(0.0..1.0f64, 16)) {
        let total: f64 = mass.iter().sum();
        prop_assume!(total > 0.0);
        let p = GridMeasure::from_masses(
            vec![Interval::new(0.0, 1.0).unwrap(), Interval::new(0.0, 1.0).unwrap()],
            4,
            mass.iter().map(|m| m / total).collect(),
        ).unwrap();
        prop_assert_eq!(chi_square_divergence(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn gibbs_density_ignores_constant_shift(c in -50.0..50.0f64, tau in 0.2..2.0f64) {
        let shifted = FnObjective::new(1, move |x| DoubleWell.value(x) + c, |x, g| DoubleWell.gradient(x, g));
        let axes = [Interval::new(-4.0, 4.0).unwrap()];
        let a = gibbs_density(&DoubleWell, tau, &axes, 80).unwrap();
        let b = gibbs_density(&shifted, tau, &axes, 80).unwrap();
        for (x, y) in a.mass().iter().zip(b.mass()) {
            prop_assert!(rel_close(*x, *y, 1e-12), "{} vs {}", x, y);
        }
        prop_assert!((a.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pair_density_is_outer_product(t1 in 0.1..1.0f64, t2 in 0.1..1.0f64) {
        let axis = Interval::new(-3.0, 3.0).unwrap();
        let r = 24;
        let pair = pair_gibbs_density(&DoubleWell, t1, t2, axis, r).unwrap();
        let m1 = gibbs_density(&DoubleWell, t1, &[axis], r).unwrap();
        let m2 = gibbs_density(&DoubleWell, t2, &[axis], r).unwrap();
        for i in 0..r {
            for j in 0..r {
                let outer = m1.mass()[i] * m2.mass()[j];
                prop_assume!(outer > 1e-250);
                prop_assert!(rel_close(pair.mass()[i * r + j], outer, 1e-12));
            }
        }
    }

    #[test]
    fn histogram_mass_and_overflow_sum_to_one(points in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 1..200)) {
        let pts: Vec<[f64; 2]> = points.into_iter().map(|(x, y)| [x, y]).collect();
        let axes = [Interval::new(-1.0, 1.0).unwrap(), Interval::new(-1.5, 1.0).unwrap()];
        let h = empirical_histogram(&pts, &axes, 5).unwrap();
        prop_assert!(h.overflow() >= 0.0);
        prop_assert!((h.total() + h.overflow() - 1.0).abs() < 1e-12);
        prop_assert!(h.mass().iter().all(|m| *m >= 0.0));
    }

    #[test]
    fn dirichlet_term_is_nonnegative(c in prop::collection::vec(-2.0..2.0f64, 4), a in 0.0..10.0f64) {
        let axis = Interval::new(-3.0, 3.0).unwrap();
        let pi = pair_gibbs_density(&DoubleWell, 0.2, 1.0, axis, 30).unwrap();
        let g = |x1: f64, x2: f64| c[0] * x1 + c[1] * x2 * x2 + c[2] * x1 * x2 + c[3] * (x1 - x2).sin();
        let v = dirichlet_acceleration_term(g, &DoubleWell, 0.2, 1.0, a, &pi).unwrap();
        prop_assert!(v >= 0.0);
        let sym = dirichlet_acceleration_term(|x1, x2| c[0] * (x1 + x2) + c[2] * (x1 * x2), &DoubleWell, 0.2, 1.0, a, &pi).unwrap();
        prop_assert_eq!(sym, 0.0);
    }

    #[test]
    fn best_so_far_is_running_minimum(values in prop::collection::vec(-100.0..100.0f64, 1..100)) {
        let b = best_so_far(&values).unwrap();
        prop_assert!(b.windows(2).all(|w| w[1] <= w[0]));
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(*b.last().unwrap(), min);
    }

    #[test]
    fn temperatures_are_only_exchanged(seed in any::<u64>(), a in 0.0..50.0f64, position_swap in any::<bool>()) {
        let formulation = if position_swap { Formulation::PositionSwap } else { Formulation::TemperatureSwap };
        let policy = SwapPolicy::new(a, 0.01).unwrap();
        let mut streams = ReplicaStreams::for_chain(seed, 0);
        let mut state = ReplicaState::new(vec![-1.0], vec![1.0], 0.1, 1.0);
        for _ in 0..20 {
            state = advance_replica(state, &DoubleWell, &policy, &mut streams, formulation, 10).unwrap();
            let mut t = [state.temp1, state.temp2];
            t.sort_by(f64::total_cmp);
            prop_assert_eq!(t, [0.1, 1.0]);
            prop_assert!(state.swap_count <= state.iteration);
        }
    }

    #[test]
    fn streams_replay(seed in any::<u64>(), chain in 0u64..1000) {
        let mut a = RngStream::for_chain(seed, Purpose::Noise1, chain);
        let mut b = RngStream::for_chain(seed, Purpose::Noise1, chain);
        for _ in 0..32 {
            prop_assert_eq!(a.gaussian().to_bits(), b.gaussian().to_bits());
        }
    }
}
