use std::f64::consts::PI;

use maglattice::dynamics::{
    c_invariant, evolve_chain, evolve_two_mode, noninteracting_energy, uniform_couplings,
    ChainMode, ChainOptions, ChainState, TwoModeOptions, TwoModeSystem,
};
use maglattice::Error;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// h·1 kHz in J.
const KHZ: f64 = 6.626_070_15e-31;

fn options(t_end: f64) -> TwoModeOptions {
    TwoModeOptions {
        t_end,
        dt: 1e-3,
        decimation: 10,
    }
}

/// Ñ(t) for rescaled time and positive coupling, from the linear
/// oscillator Ñ'' = −Ñ with Ñ'(0) = √(1 − Ñ₀²) sin θ̃₀.
fn imbalance(n0: f64, theta0: f64, t: f64) -> f64 {
    n0 * t.cos() + (1.0 - n0 * n0).sqrt() * theta0.sin() * t.sin()
}

#[test]
fn integration_matches_the_rabi_solution() {
    let traj = evolve_two_mode(0.99, PI, KHZ, 0.0, options(20.0 * PI)).unwrap();
    let worst = traj
        .samples
        .iter()
        .map(|s| (s.n_tilde - 0.99 * s.t.cos()).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
    assert!((traj.samples.last().unwrap().t - 20.0 * PI).abs() < 1e-9);
}

#[test]
fn random_initial_conditions_follow_the_oscillator() {
    let mut rng = StdRng::seed_from_u64(21);
    for _ in 0..10 {
        let n0 = rng.random_range(-0.9..0.9);
        let theta0 = rng.random_range(-PI..PI);
        let traj = evolve_two_mode(n0, theta0, KHZ, 0.0, options(4.0 * PI)).unwrap();
        for s in &traj.samples {
            assert!((s.n_tilde - imbalance(n0, theta0, s.t)).abs() < 1e-8);
        }
    }
}

#[test]
fn energy_and_invariant_hold_over_a_hundred_periods() {
    let e0 = 3.0 * KHZ;
    for (n0, theta0) in [(0.99, PI), (0.5, 0.3), (-0.2, 2.0), (0.1, PI)] {
        let traj = evolve_two_mode(n0, theta0, KHZ, e0, options(200.0 * PI)).unwrap();
        let h0 = noninteracting_energy(n0, theta0, e0, KHZ).unwrap();
        let c0 = c_invariant(n0, theta0);
        for s in &traj.samples {
            assert!(
                (s.energy - h0).abs() <= 1e-9 * h0.abs(),
                "{} vs {h0}",
                s.energy
            );
            assert!((s.c - c0).abs() <= 1e-9, "C drifted to {}", s.c);
        }
        assert!(traj.max_c_drift <= 1e-9);
    }
}

#[test]
fn chain_norm_holds_for_one_two_and_eleven_sites() {
    for n in [1, 2, 11] {
        let couplings = uniform_couplings(n, 5.0 * KHZ, 0.01 * KHZ, KHZ);
        let init = ChainState::localized(n, n / 2).unwrap();
        for mode in [ChainMode::Frozen, ChainMode::SelfConsistent] {
            let opts = ChainOptions {
                // a hundred two-mode periods of 2π in rescaled time
                t_end: 100.0 * PI,
                dt: 1e-3,
                decimation: 1000,
                mode,
                energy_unit: Some(KHZ),
                energy_offset: 5.0 * KHZ,
            };
            let traj = evolve_chain(&couplings, &init, opts).unwrap();
            assert!(
                traj.max_norm_drift < 1e-9,
                "n = {n}: {}",
                traj.max_norm_drift
            );
            assert!(
                traj.max_energy_drift < 1e-9,
                "n = {n}: {}",
                traj.max_energy_drift
            );
        }
    }
}

#[test]
fn two_site_chain_reproduces_the_two_mode_imbalance() {
    let mut rng = StdRng::seed_from_u64(22);
    for _ in 0..10 {
        let n0 = rng.random_range(-0.95..0.95);
        let theta0 = rng.random_range(-PI..PI);
        let omega = if rng.random_bool(0.5) { KHZ } else { -KHZ };
        let two = evolve_two_mode(n0, theta0, omega, 0.0, options(6.0 * PI)).unwrap();
        let couplings = uniform_couplings(2, 7.0 * KHZ, 0.0, omega);
        let chain = evolve_chain(
            &couplings,
            &ChainState::pair(n0, theta0).unwrap(),
            ChainOptions {
                // chain time in ħ/|Ω| runs at half the rescaled two-mode time
                t_end: 3.0 * PI,
                dt: 5e-4,
                decimation: 10,
                mode: ChainMode::Frozen,
                energy_unit: Some(KHZ),
                energy_offset: 7.0 * KHZ,
            },
        )
        .unwrap();
        assert_eq!(two.samples.len(), chain.samples.len());
        for (a, b) in two.samples.iter().zip(&chain.samples) {
            assert!((a.t - 2.0 * b.t).abs() < 1e-9);
            let state = ChainState {
                amplitudes: b.amplitudes.clone(),
            };
            let (n, theta) = state.pair_observables(0).unwrap();
            assert!(
                (n - a.n_tilde).abs() < 1e-6,
                "t = {}: {n} vs {}",
                a.t,
                a.n_tilde
            );
            let dtheta = (theta - a.theta).rem_euclid(2.0 * PI);
            assert!(
                dtheta.min(2.0 * PI - dtheta) < 1e-5,
                "t = {}: θ {theta} vs {}",
                a.t,
                a.theta
            );
        }
    }
}

#[test]
fn stepping_backwards_retraces_the_path() {
    let sys = TwoModeSystem::new(KHZ).unwrap();
    let start = (0.6, 1.1);
    let h = 1e-3;
    let mut state = start;
    for i in 0..5000 {
        state = sys.rk4_step(i as f64 * h, state, h).unwrap();
    }
    for i in (0..5000).rev() {
        state = sys.rk4_step((i + 1) as f64 * h, state, -h).unwrap();
    }
    assert!(
        (state.0 - start.0).abs() < 1e-9 && (state.1 - start.1).abs() < 1e-9,
        "{state:?}"
    );
}

#[test]
fn mirrored_initial_state_mirrors_the_trajectory() {
    // (Ñ, θ̃) → (−Ñ, −θ̃) maps solutions onto solutions
    let a = evolve_two_mode(0.7, 0.9, KHZ, 0.0, options(10.0)).unwrap();
    let b = evolve_two_mode(-0.7, -0.9, KHZ, 0.0, options(10.0)).unwrap();
    for (p, q) in a.samples.iter().zip(&b.samples) {
        assert!((p.n_tilde + q.n_tilde).abs() < 1e-12);
        assert!((p.theta + q.theta).abs() < 1e-12);
    }
}

#[test]
fn reaching_full_imbalance_is_reported() {
    // θ̃₀ = π/2 drives Ñ to 1 at t = π/2 for Ñ₀ = 0
    let err = evolve_two_mode(0.0, PI / 2.0, KHZ, 0.0, options(PI)).unwrap_err();
    assert!(matches!(err, Error::Singularity { .. }), "{err:?}");
    assert!(evolve_two_mode(1.0, 0.0, KHZ, 0.0, options(1.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn invariant_is_conserved_from_any_start(n0 in -0.9..0.9f64, theta0 in -PI..PI) {
        // orbits with C → 0 graze |Ñ| = 1 where θ̃ is stiff; keep max |Ñ| ≤ 0.9987
        prop_assume!(c_invariant(n0, theta0).abs() >= 0.05);
        let traj = evolve_two_mode(n0, theta0, -KHZ, 0.0, options(2.0 * PI)).unwrap();
        prop_assert!(traj.max_c_drift < 1e-9);
    }

    #[test]
    fn chain_populations_sum_to_one(site in 0usize..7, n0 in 0.0..1.0f64) {
        let couplings = uniform_couplings(7, 0.0, 0.5 * KHZ, KHZ);
        let mut pops = vec![(1.0 - n0) / 6.0; 7];
        pops[site] = n0;
        let init = ChainState::from_populations(&pops, &[0.0; 7]).unwrap();
        let opts = ChainOptions { t_end: 5.0, mode: ChainMode::SelfConsistent, ..ChainOptions::default() };
        let traj = evolve_chain(&couplings, &init, opts).unwrap();
        for s in &traj.samples {
            let total: f64 = s.amplitudes.iter().map(|c| c.norm_sqr()).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
    }
}
