use std::f64::consts::PI;

use maglattice::constants::HBAR;
use maglattice::modes::{
    josephson_coupling, mode_norm, overlap_integral, self_interaction, self_interaction_quadrature,
    zero_point_energy, GaussianMode, HarmonicPotential,
};
use maglattice::quadrature::QuadratureRule;
use maglattice::RunConfig;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const RB87: f64 = 1.443_160_6e-25;

fn mode(center: [f64; 3], widths: [f64; 3]) -> GaussianMode {
    GaussianMode {
        center,
        widths,
        occupation: 1.0,
        phase: 0.0,
    }
}

/// −∫[ħ²/2M ∇χ_a·∇χ_b + χ_a U χ_b] from one-dimensional Gaussian moments.
/// Per axis the product χ_a χ_b is S·N(m, 1/(2p)) with
/// p = 1/(2σ_a²) + 1/(2σ_b²), m = (a/(2σ_a²) + b/(2σ_b²))/p and
/// S = √(2σ_aσ_b/(σ_a² + σ_b²)) exp(−(a − b)²/(2(σ_a² + σ_b²))).
fn coupling_oracle(a: &GaussianMode, b: &GaussianMode, u: &HarmonicPotential) -> f64 {
    let mut s = [0.0; 3];
    let mut kinetic = [0.0; 3];
    let mut potential = [0.0; 3];
    let mut mean = [0.0; 3];
    for k in 0..3 {
        let (sa, sb) = (a.widths[k], b.widths[k]);
        let (ca, cb) = (a.center[k], b.center[k]);
        let p = 0.5 / (sa * sa) + 0.5 / (sb * sb);
        let m = (ca * 0.5 / (sa * sa) + cb * 0.5 / (sb * sb)) / p;
        let var = 0.5 / p;
        s[k] = (2.0 * sa * sb / (sa * sa + sb * sb)).sqrt()
            * (-(ca - cb).powi(2) / (2.0 * (sa * sa + sb * sb))).exp();
        // ∂χ/∂x = −(x − c)/σ² χ, so the gradient product averages (x − a)(x − b)
        kinetic[k] =
            HBAR * HBAR / (2.0 * u.mass) * ((m - ca) * (m - cb) + var) / (sa * sa * sb * sb);
        potential[k] = 0.5 * u.mass * u.frequencies[k].powi(2) * ((m - u.center[k]).powi(2) + var);
        mean[k] = m;
    }
    let overlap = s[0] * s[1] * s[2];
    let per_axis: f64 = (0..3).map(|k| kinetic[k] + potential[k]).sum();
    -overlap * (per_axis + u.tilt * (mean[2] - u.center[2]))
}

fn harmonic(center: [f64; 3], frequencies: [f64; 3], tilt: f64) -> HarmonicPotential {
    HarmonicPotential::new(frequencies, center, tilt, RB87).unwrap()
}

#[test]
fn self_interaction_quadrature_matches_closed_form() {
    let species = RunConfig::default().species;
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..50 {
        let widths = [
            rng.random_range(1e-8..1e-5),
            rng.random_range(1e-8..1e-5),
            rng.random_range(1e-8..1e-5),
        ];
        let m = mode([rng.random_range(-1e-5..1e-5), 0.0, 2e-6], widths);
        let g = 4.0 * PI * HBAR * HBAR * species.scattering_length / species.mass;
        let expect = g / ((2.0 * PI).powf(1.5) * widths[0] * widths[1] * widths[2]);
        let quad = self_interaction_quadrature(&m, &species, QuadratureRule::default()).unwrap();
        assert!((quad - expect).abs() < 1e-6 * expect, "{quad} vs {expect}");
        assert!((self_interaction(&m, &species) - expect).abs() < 1e-12 * expect);
    }
}

#[test]
fn matched_mode_zero_point_energy_is_half_the_quanta() {
    let mut rng = StdRng::seed_from_u64(12);
    for _ in 0..30 {
        let w = [
            rng.random_range(1e2..1e6),
            rng.random_range(1e2..1e6),
            rng.random_range(1e2..1e6),
        ];
        let c = [
            rng.random_range(-1e-5..1e-5),
            rng.random_range(-1e-5..1e-5),
            3e-6,
        ];
        let m = GaussianMode::harmonic_ground_state(c, w, RB87).unwrap();
        let e = zero_point_energy(&m, &harmonic(c, w, 0.0), QuadratureRule::default()).unwrap();
        let expect = 0.5 * HBAR * (w[0] + w[1] + w[2]);
        assert!((e - expect).abs() < 1e-6 * expect, "{e} vs {expect}");
        let norm = mode_norm(&m, QuadratureRule::default()).unwrap();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn two_centre_coupling_matches_gaussian_moments() {
    let mut rng = StdRng::seed_from_u64(13);
    for _ in 0..50 {
        let w = [
            rng.random_range(1e3..1e5),
            rng.random_range(1e3..1e5),
            rng.random_range(1e3..1e5),
        ];
        let a = GaussianMode::harmonic_ground_state([0.0, 0.0, 2e-6], w, RB87).unwrap();
        let sigma = a.widths[0];
        let shift = [
            rng.random_range(0.0..4.0) * sigma,
            rng.random_range(-1.0..1.0) * sigma,
            0.0,
        ];
        let mut b = a.translated(shift);
        b.widths[2] *= rng.random_range(0.8..1.25);
        let tilt = if rng.random_bool(0.5) {
            rng.random_range(-1e-24..1e-24)
        } else {
            0.0
        };
        let u = harmonic(a.center, w, tilt);
        let quad = josephson_coupling(&a, &b, &u, QuadratureRule::default()).unwrap();
        let expect = coupling_oracle(&a, &b, &u);
        assert!(
            (quad - expect).abs() < 1e-6 * expect.abs(),
            "{quad} vs {expect}"
        );
    }
}

#[test]
fn matched_isotropic_coupling_decays_as_a_gaussian() {
    let w = [2e4; 3];
    let a = GaussianMode::harmonic_ground_state([0.0; 3], w, RB87).unwrap();
    let u = harmonic([0.0; 3], w, 0.0);
    let e0 = zero_point_energy(&a, &u, QuadratureRule::default()).unwrap();
    let sigma = a.widths[0];
    let mut previous = f64::INFINITY;
    for i in 0..40 {
        let d = (2.0 + 0.25 * i as f64) * sigma;
        let om = josephson_coupling(
            &a,
            &a.translated([d, 0.0, 0.0]),
            &u,
            QuadratureRule::default(),
        )
        .unwrap();
        let expect = -e0 * (-d * d / (4.0 * sigma * sigma)).exp();
        assert!(
            (om - expect).abs() <= 1e-6 * expect.abs(),
            "d = {d}: {om} vs {expect}"
        );
        assert!(om.abs() < previous, "|Ω| must fall with separation");
        previous = om.abs();
    }
}

#[test]
fn widely_separated_sites_decouple() {
    let w = [2e4; 3];
    let a = GaussianMode::harmonic_ground_state([0.0; 3], w, RB87).unwrap();
    let u = harmonic([0.0; 3], w, 0.0);
    let e0 = zero_point_energy(&a, &u, QuadratureRule::default()).unwrap();
    let om = josephson_coupling(
        &a,
        &a.translated([12.0 * a.widths[0], 0.0, 0.0]),
        &u,
        QuadratureRule::default(),
    )
    .unwrap();
    assert!(om.abs() < 1e-12 * e0);
}

#[test]
fn trapezoid_rule_agrees_with_gauss_hermite() {
    let w = [1e4, 2e4, 3e4];
    let a = GaussianMode::harmonic_ground_state([0.0; 3], w, RB87).unwrap();
    let b = a.translated([1.5 * a.widths[0], 0.0, 0.0]);
    let u = harmonic([0.0; 3], w, 0.0);
    let gh = josephson_coupling(&a, &b, &u, QuadratureRule::default()).unwrap();
    let tz = josephson_coupling(
        &a,
        &b,
        &u,
        QuadratureRule::Trapezoid {
            points: 64,
            half_width: 8.0,
        },
    )
    .unwrap();
    assert!((gh - tz).abs() < 1e-8 * gh.abs());
}

proptest! {
    #[test]
    fn overlap_is_symmetric_and_bounded(
        dx in -5.0..5.0f64, dy in -5.0..5.0f64,
        s1 in 0.5..2.0f64, s2 in 0.5..2.0f64,
    ) {
        let a = mode([0.0; 3], [1e-7, 1e-7 * s1, 1e-7]);
        let b = mode([dx * 1e-7, dy * 1e-7, 0.0], [1e-7 * s2, 1e-7, 1e-7]);
        let ab = overlap_integral(&a, &b, QuadratureRule::GaussHermite { nodes: 32 }).unwrap();
        let ba = overlap_integral(&b, &a, QuadratureRule::GaussHermite { nodes: 32 }).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);
        // Cauchy–Schwarz
        prop_assert!(ab > 0.0 && ab <= 1.0 + 1e-12);
    }
}
