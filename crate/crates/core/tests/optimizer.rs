use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toi_core::optimizer::{
    self, random_instance, reference, run_baseline, solve_p1, solve_p3, verify_multiconvexity, Block, InstanceSpec,
    P1Options, Strategy,
};
use toi_core::{DeviceProfile, Error, SystemBudget};

fn spec() -> InstanceSpec {
    InstanceSpec::default()
}

fn spread(d: &[f64]) -> f64 {
    d.iter().cloned().fold(f64::MIN, f64::max) - d.iter().cloned().fold(f64::MAX, f64::min)
}

#[test]
fn allocations_respect_budgets_and_stability() {
    for m in [2, 5, 10] {
        for seed in 0..3 {
            let (ps, b) = random_instance(&spec(), m, seed);
            let a = solve_p1(&ps, &b, P1Options::default()).unwrap().allocation;
            assert!(a.beta.iter().sum::<f64>() <= 1.0 + 1e-9);
            assert!(a.f.iter().sum::<f64>() <= b.f_max * (1.0 + 1e-9));
            for i in 0..m {
                assert!(a.beta[i] >= 0.0 && a.f[i] >= 0.0 && a.lambda[i] > 0.0);
                let (mt, mc) = optimizer::service_rates(&ps[i], a.beta[i], a.f[i], &b).unwrap();
                assert!(a.lambda[i] < mt.min(mc));
            }
        }
    }
}

#[test]
fn history_descends_and_optimum_is_fair() {
    for m in [2, 3, 5, 10] {
        for seed in 0..3 {
            let (ps, b) = random_instance(&spec(), m, 100 + seed);
            let r = solve_p1(&ps, &b, P1Options::default()).unwrap();
            assert!(r.converged, "m={m} seed={seed}");
            assert!(r.history.windows(2).all(|w| w[1] <= w[0] + 1e-10), "{:?}", r.history);
            let a = &r.allocation;
            assert!(spread(&a.delta) <= 1e-4 * a.tau, "{:?}", a.delta);
        }
    }
}

#[test]
fn resource_block_matches_reference_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in [2, 3, 5] {
        for seed in 0..3 {
            let (ps, b) = random_instance(&spec(), m, 200 + seed);
            let a = solve_p1(&ps, &b, P1Options::default()).unwrap().allocation;
            // perturbed rates so that the check is not only at the joint optimum
            let lambda: Vec<f64> = a.lambda.iter().map(|l| l * rng.random_range(0.3..1.0)).collect();
            let fast = solve_p3(&lambda, &ps, &b).unwrap().tau;
            let slow = reference::reference_p3_tau(&lambda, &ps, &b).unwrap();
            assert!((fast - slow).abs() <= 1e-8 * slow, "{fast} vs {slow}");
        }
    }
}

#[test]
fn joint_optimum_matches_grid_search() {
    for (m, seed) in [(2, 0), (2, 1), (3, 2)] {
        let (ps, b) = random_instance(&spec(), m, 300 + seed);
        let tau = solve_p1(&ps, &b, P1Options::default()).unwrap().allocation.tau;
        let (grid, _) = reference::grid_search_p1(&ps, &b, 50, 4).unwrap();
        assert!((tau - grid).abs() <= 0.02 * grid, "{tau} vs {grid}");
        assert!(tau <= grid * (1.0 + 1e-6), "{tau} vs {grid}");
    }
}

#[test]
fn joint_optimum_dominates_baselines() {
    for m in [5, 10] {
        for seed in 0..2 {
            let (ps, b) = random_instance(&spec(), m, 400 + seed);
            let tau = solve_p1(&ps, &b, P1Options::default()).unwrap().allocation.tau;
            for s in Strategy::ALL {
                match run_baseline(s, &ps, &b) {
                    Ok(a) => assert!(tau <= a.tau + 1e-6, "{s:?}: {tau} vs {}", a.tau),
                    Err(Error::Infeasible { .. }) => {}
                    Err(e) => panic!("{s:?}: {e}"),
                }
            }
        }
    }
}

#[test]
fn uniform_computation_is_optimal_for_identical_devices() {
    let b = spec().budget();
    let p = DeviceProfile::new(0.25, 2e-6, 30.0, 150.0);
    let opt = solve_p1(&[p, p], &b, P1Options::default()).unwrap().allocation;
    let uni = run_baseline(Strategy::UniformComputation, &[p, p], &b).unwrap();
    assert!((opt.tau - uni.tau).abs() <= 1e-9 * opt.tau);
    assert!((uni.beta[0] - 0.5).abs() < 1e-9);
}

#[test]
fn scaling_sizes_and_budgets_together_changes_nothing() {
    let (ps, b) = random_instance(&spec(), 4, 7);
    let a = solve_p1(&ps, &b, P1Options::default()).unwrap().allocation;
    let s = 3.7;
    let ps2: Vec<DeviceProfile> = ps.iter().map(|p| DeviceProfile { d_bar: p.d_bar * s, ..*p }).collect();
    // SNR held fixed
    let b2 = SystemBudget {
        bandwidth: b.bandwidth * s,
        f_max: b.f_max * s,
        ..b
    };
    let a2 = solve_p1(&ps2, &b2, P1Options::default()).unwrap().allocation;
    assert!((a.tau - a2.tau).abs() <= 1e-6 * a.tau, "{} vs {}", a.tau, a2.tau);
    for i in 0..4 {
        assert!((a.lambda[i] - a2.lambda[i]).abs() <= 1e-6 * a.lambda[i]);
        assert!((a.beta[i] - a2.beta[i]).abs() <= 1e-6 * a.beta[i]);
        assert!((a.f[i] / b.f_max - a2.f[i] / b2.f_max).abs() <= 1e-6 * a.f[i] / b.f_max);
    }
}

#[test]
fn single_device_gets_everything() {
    let (ps, b) = random_instance(&spec(), 1, 3);
    let a = solve_p1(&ps, &b, P1Options::default()).unwrap().allocation;
    assert!((a.beta[0] - 1.0).abs() < 1e-12);
    assert!((a.f[0] - b.f_max).abs() < 1e-12 * b.f_max);
}

#[test]
fn worse_channel_gets_more_bandwidth_and_similar_rate() {
    let b = spec().budget();
    let strong = DeviceProfile::new(0.25, 4e-6, 30.0, 150.0);
    let se_strong = strong.spectral_efficiency(&b);
    for ratio in [1.25, 1.5, 2.0, 3.0, 4.0] {
        // weak device's spectral efficiency is se_strong / ratio
        let snr = (se_strong / ratio).exp2() - 1.0;
        let weak = DeviceProfile::new(0.25, (snr * b.noise / 0.25).sqrt(), 30.0, 150.0);
        let a = solve_p1(&[strong, weak], &b, P1Options::default()).unwrap().allocation;
        assert!(a.beta[1] > a.beta[0], "ratio {ratio}: {:?}", a.beta);
        let lr = a.lambda[0] / a.lambda[1];
        assert!((0.9..=1.1).contains(&lr), "ratio {ratio}: {lr}");
    }
}

#[test]
fn fixed_blocks_are_respected() {
    let (ps, b) = random_instance(&spec(), 3, 9);
    let beta = vec![0.2, 0.3, 0.5];
    let r = optimizer::block_descent(Block::Free, Block::Fixed(beta.clone()), Block::Free, &ps, &b, P1Options::default()).unwrap();
    assert_eq!(r.allocation.beta, beta);
    let bad = optimizer::block_descent(Block::Fixed(vec![1e9; 3]), Block::Free, Block::Free, &ps, &b, P1Options::default());
    assert!(matches!(bad, Err(Error::Infeasible { .. })));
}

#[test]
fn multiconvexity_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let mt: f64 = rng.random_range(1.0..20.0);
        let mc = rng.random_range(1.0..20.0);
        let l = rng.random_range(0.05..0.95) * mt.min(mc);
        let r = verify_multiconvexity(l, mt, mc).unwrap();
        assert!(r.all_ok(), "{r:?}");
    }
}
