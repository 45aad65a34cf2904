//! Gaussian site modes and the energies of the two-mode model: zero-point
//! energy E^o, self-interaction Γ and Josephson coupling Ω^J.
//!
//! Each mode is the harmonic ground state of its site. All integrals are
//! products of two Gaussians times a low-order polynomial, so they are
//! evaluated with Gauss–Hermite weights matched to the Gaussian product.
//!
//! The pair potential for Ω^J(i, j) is centred on site i. Centring it at
//! the midpoint makes Ω^J change sign near d = √12 σ, which is not the
//! decay the two-mode picture relies on; anchored at site i,
//! Ω^J = −E^o e^{−d²/4σ²} for matched isotropic modes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{AtomSpecies, FrequencyMode, RunConfig};
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::export::{csv_number, csv_row};
use crate::quadrature::{integrate_checked, QuadratureRule, CONVERGENCE_TOLERANCE};
use crate::trap::TrapSite;
use crate::units;

/// U(x) = ½ M Σ ω_k² (x_k − c_k)² + δ (z − c_z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicPotential {
    /// rad/s
    pub frequencies: [f64; 3],
    /// m
    pub center: [f64; 3],
    /// J/m
    pub tilt: f64,
    /// kg
    pub mass: f64,
}

impl HarmonicPotential {
    pub fn new(frequencies: [f64; 3], center: [f64; 3], tilt: f64, mass: f64) -> Result<Self> {
        check_positive("trap frequency", &frequencies)?;
        if !(mass > 0.0) {
            return Err(Error::NonPositive {
                what: "mass",
                value: mass,
            });
        }
        Ok(HarmonicPotential {
            frequencies,
            center,
            tilt,
            mass,
        })
    }

    pub fn value(&self, x: [f64; 3]) -> f64 {
        let mut u = 0.0;
        for ((xk, ck), wk) in x.iter().zip(&self.center).zip(&self.frequencies) {
            u += (wk * (xk - ck)).powi(2);
        }
        0.5 * self.mass * u + self.tilt * (x[2] - self.center[2])
    }
}

fn check_positive(what: &'static str, values: &[f64; 3]) -> Result<()> {
    for &v in values {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositive { what, value: v });
        }
    }
    Ok(())
}

/// χ(x) = Π_k (πσ_k²)^{−1/4} exp(−(x_k − c_k)²/(2σ_k²)), with occupation
/// and phase carried alongside for the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMode {
    pub center: [f64; 3],
    pub widths: [f64; 3],
    pub occupation: f64,
    pub phase: f64,
}

impl GaussianMode {
    /// Ground state of a harmonic well: σ_k = √(ħ/(M ω_k)).
    pub fn harmonic_ground_state(
        center: [f64; 3],
        frequencies: [f64; 3],
        mass: f64,
    ) -> Result<Self> {
        check_positive("trap frequency", &frequencies)?;
        if !(mass > 0.0) {
            return Err(Error::NonPositive {
                what: "mass",
                value: mass,
            });
        }
        Ok(GaussianMode {
            center,
            widths: frequencies.map(|w| (HBAR / (mass * w)).sqrt()),
            occupation: 1.0,
            phase: 0.0,
        })
    }

    pub fn value(&self, x: [f64; 3]) -> f64 {
        (0..3)
            .map(|k| {
                let s = self.widths[k];
                let d = x[k] - self.center[k];
                (std::f64::consts::PI * s * s).powf(-0.25) * (-d * d / (2.0 * s * s)).exp()
            })
            .product()
    }

    pub fn translated(&self, shift: [f64; 3]) -> Self {
        let mut out = *self;
        for (c, s) in out.center.iter_mut().zip(shift) {
            *c += s;
        }
        out
    }
}

/// Mode for a located site, using its frequencies in `mode`.
pub fn gaussian_mode(
    site: &TrapSite,
    species: &AtomSpecies,
    mode: FrequencyMode,
) -> Result<GaussianMode> {
    GaussianMode::harmonic_ground_state(site.center, site.frequencies.get(mode), species.mass)
}

/// Per-axis Gaussian-product data for χ_a χ_b: the product equals
/// `log_prefactor`-scaled exp(−((x − center)/scale)²).
struct Overlap {
    center: [f64; 3],
    scale: [f64; 3],
    log_prefactor: f64,
}

fn overlap(a: &GaussianMode, b: &GaussianMode) -> Overlap {
    let mut center = [0.0; 3];
    let mut scale = [0.0; 3];
    let mut log_prefactor = 0.0;
    for k in 0..3 {
        let (sa2, sb2) = (a.widths[k].powi(2), b.widths[k].powi(2));
        let p = 0.5 / sa2 + 0.5 / sb2;
        center[k] = (a.center[k] * 0.5 / sa2 + b.center[k] * 0.5 / sb2) / p;
        scale[k] = 1.0 / p.sqrt();
        let d = a.center[k] - b.center[k];
        log_prefactor += -0.25 * (std::f64::consts::PI * sa2).ln()
            - 0.25 * (std::f64::consts::PI * sb2).ln()
            - d * d / (2.0 * (sa2 + sb2));
    }
    Overlap {
        center,
        scale,
        log_prefactor,
    }
}

/// ∫ χ_a χ_b dx by quadrature.
pub fn overlap_integral(a: &GaussianMode, b: &GaussianMode, rule: QuadratureRule) -> Result<f64> {
    let o = overlap(a, b);
    let c = o.log_prefactor.exp();
    integrate_checked(rule, o.center, o.scale, 0.0, CONVERGENCE_TOLERANCE, |_| c)
}

/// ∫|χ|² dx by quadrature; 1 for a well-formed mode.
pub fn mode_norm(mode: &GaussianMode, rule: QuadratureRule) -> Result<f64> {
    overlap_integral(mode, mode, rule)
}

/// ∫ [ħ²/2M ∇χ_a·∇χ_b + χ_a U χ_b] dx.
pub fn pair_energy(
    a: &GaussianMode,
    b: &GaussianMode,
    u: &HarmonicPotential,
    rule: QuadratureRule,
) -> Result<f64> {
    let o = overlap(a, b);
    let c = o.log_prefactor.exp();
    if c == 0.0 {
        return Ok(0.0);
    }
    let kin = HBAR * HBAR / (2.0 * u.mass);
    let sa2 = a.widths.map(|s| s * s);
    let sb2 = b.widths.map(|s| s * s);
    // ∇χ/χ = −(x − c)/σ² along each axis
    let integrand = |x: [f64; 3]| {
        let mut k_term = 0.0;
        for k in 0..3 {
            k_term += (x[k] - a.center[k]) * (x[k] - b.center[k]) / (sa2[k] * sb2[k]);
        }
        c * (kin * k_term + u.value(x))
    };
    let magnitude = c
        * (0..3)
            .map(|k| {
                kin / (a.widths[k] * b.widths[k])
                    + 0.5 * u.mass * (u.frequencies[k] * o.scale[k]).powi(2)
            })
            .sum::<f64>()
        * (o.scale[0] * o.scale[1] * o.scale[2])
        * std::f64::consts::PI.powf(1.5);
    integrate_checked(
        rule,
        o.center,
        o.scale,
        magnitude,
        CONVERGENCE_TOLERANCE,
        integrand,
    )
}

/// E^o = ∫ [ħ²/2M |∇χ|² + |χ|² U] dx.
pub fn zero_point_energy(
    mode: &GaussianMode,
    u: &HarmonicPotential,
    rule: QuadratureRule,
) -> Result<f64> {
    pair_energy(mode, mode, u, rule)
}

/// Ω^J = −∫ [ħ²/2M ∇χ_i·∇χ_j + χ_i U χ_j] dx.
pub fn josephson_coupling(
    mode_i: &GaussianMode,
    mode_j: &GaussianMode,
    u: &HarmonicPotential,
    rule: QuadratureRule,
) -> Result<f64> {
    Ok(-pair_energy(mode_i, mode_j, u, rule)?)
}

/// Γ = g_o ∫|χ|⁴ dx = g_o / ((2π)^{3/2} σ_x σ_y σ_z).
pub fn self_interaction(mode: &GaussianMode, species: &AtomSpecies) -> f64 {
    let w = mode.widths;
    species.interaction_strength() / ((2.0 * std::f64::consts::PI).powf(1.5) * w[0] * w[1] * w[2])
}

/// Γ by quadrature of g_o |χ|⁴.
pub fn self_interaction_quadrature(
    mode: &GaussianMode,
    species: &AtomSpecies,
    rule: QuadratureRule,
) -> Result<f64> {
    // |χ|⁴ = Π (πσ²)^{−1} exp(−2(x − c)²/σ²)
    let scale = mode.widths.map(|s| s / std::f64::consts::SQRT_2);
    let c: f64 = mode
        .widths
        .iter()
        .map(|s| 1.0 / (std::f64::consts::PI * s * s))
        .product();
    let g = species.interaction_strength();
    integrate_checked(rule, mode.center, scale, 0.0, CONVERGENCE_TOLERANCE, |_| {
        g * c
    })
}

/// Energies for a chain of sites along x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCouplings {
    /// E_i^o (J), one per site.
    pub zero_point: Vec<f64>,
    /// Γ_i (J), one per site.
    pub self_interaction: Vec<f64>,
    /// Ω^J_{i,i+1} (J), one per adjacent pair.
    pub josephson: Vec<f64>,
}

impl ModeCouplings {
    pub fn len(&self) -> usize {
        self.zero_point.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zero_point.is_empty()
    }

    /// Γ_i / |Ω^J_{i,i+1}|; the two-mode reduction wants this ≪ 1.
    pub fn weak_coupling_ratio(&self, i: usize) -> Option<f64> {
        self.josephson
            .get(i)
            .map(|o| self.self_interaction[i] / o.abs())
    }

    /// Site table with energies in J and in h·kHz.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "site,E0_J,Gamma_J,OmegaJ_J,Gamma_over_OmegaJ,E0_kHz,Gamma_kHz,OmegaJ_kHz\n",
        );
        for i in 0..self.len() {
            let om = self.josephson.get(i).copied().unwrap_or(f64::NAN);
            let ratio = self.weak_coupling_ratio(i).unwrap_or(f64::NAN);
            let fields = [
                i.to_string(),
                csv_number(self.zero_point[i]),
                csv_number(self.self_interaction[i]),
                csv_number(om),
                csv_number(ratio),
                csv_number(units::joule_to_khz(self.zero_point[i])),
                csv_number(units::joule_to_khz(self.self_interaction[i])),
                csv_number(units::joule_to_khz(om)),
            ];
            out.push_str(&csv_row(&fields));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let sites: Vec<_> = (0..self.len())
            .map(|i| {
                serde_json::json!({
                    "site": i,
                    "E0_J": self.zero_point[i],
                    "Gamma_J": self.self_interaction[i],
                    "OmegaJ_J": self.josephson.get(i),
                    "Gamma_over_OmegaJ": self.weak_coupling_ratio(i),
                    "E0_kHz": units::joule_to_khz(self.zero_point[i]),
                    "Gamma_kHz": units::joule_to_khz(self.self_interaction[i]),
                    "OmegaJ_kHz": self.josephson.get(i).map(|o| units::joule_to_khz(*o)),
                })
            })
            .collect();
        serde_json::json!({ "sites": sites })
    }
}

/// Couplings for `n` sites spaced one lattice period along x from `site`.
/// Site i's energies use its own potential; pair (i, i+1) uses the
/// potential of site i.
pub fn chain_couplings(
    run: &RunConfig,
    site: &TrapSite,
    n: usize,
    rule: QuadratureRule,
) -> Result<ModeCouplings> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "chain needs at least one site".into(),
        ));
    }
    let mode = run.settings.frequency_mode;
    let freqs = site.frequencies.get(mode);
    let period = run.lattice.period();
    let base = gaussian_mode(site, &run.species, mode)?;
    let modes: Vec<GaussianMode> = (0..n)
        .map(|i| base.translated([i as f64 * period, 0.0, 0.0]))
        .collect();
    let potentials: Vec<HarmonicPotential> = modes
        .iter()
        .map(|m| HarmonicPotential::new(freqs, m.center, run.settings.tilt, run.species.mass))
        .collect::<Result<_>>()?;
    let zero_point = modes
        .par_iter()
        .zip(&potentials)
        .map(|(m, u)| zero_point_energy(m, u, rule))
        .collect::<Result<Vec<_>>>()?;
    let self_interaction = modes
        .iter()
        .map(|m| self_interaction(m, &run.species))
        .collect();
    let josephson = (0..n - 1)
        .into_par_iter()
        .map(|i| josephson_coupling(&modes[i], &modes[i + 1], &potentials[i], rule))
        .collect::<Result<Vec<_>>>()?;
    Ok(ModeCouplings {
        zero_point,
        self_interaction,
        josephson,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::HBAR;
    use approx::assert_relative_eq;

    const GH: QuadratureRule = QuadratureRule::GaussHermite { nodes: 64 };

    fn rb() -> AtomSpecies {
        AtomSpecies::rubidium87()
    }

    fn matched(freqs: [f64; 3]) -> (GaussianMode, HarmonicPotential) {
        let m = rb().mass;
        let mode = GaussianMode::harmonic_ground_state([1e-6, -2e-6, 5e-6], freqs, m).unwrap();
        let u = HarmonicPotential::new(freqs, mode.center, 0.0, m).unwrap();
        (mode, u)
    }

    #[test]
    fn widths_follow_frequency() {
        let m = rb().mass;
        let a = GaussianMode::harmonic_ground_state([0.0; 3], [100.0, 200.0, 300.0], m).unwrap();
        let b = GaussianMode::harmonic_ground_state([0.0; 3], [200.0, 400.0, 600.0], m).unwrap();
        for k in 0..3 {
            assert_relative_eq!(b.widths[k], a.widths[k] / 2f64.sqrt(), max_relative = 1e-15);
        }
        let iso = GaussianMode::harmonic_ground_state([0.0; 3], [50.0; 3], m).unwrap();
        assert_eq!(iso.widths[0], iso.widths[2]);
        assert!(GaussianMode::harmonic_ground_state([0.0; 3], [1.0, 0.0, 1.0], m).is_err());
    }

    #[test]
    fn modes_are_normalized() {
        let (mode, _) = matched([2e3, 3e3, 7e3]);
        assert!((mode_norm(&mode, GH).unwrap() - 1.0).abs() < 1e-8);
        let trap = QuadratureRule::Trapezoid {
            points: 61,
            half_width: 7.0,
        };
        assert!((mode_norm(&mode, trap).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn matched_mode_zero_point() {
        let freqs = [2e3, 3e3, 7e3];
        let (mode, u) = matched(freqs);
        let e = zero_point_energy(&mode, &u, GH).unwrap();
        assert_relative_eq!(
            e,
            0.5 * HBAR * freqs.iter().sum::<f64>(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn tilt_has_no_first_order_effect_on_centred_mode() {
        let freqs = [2e3, 3e3, 7e3];
        let (mode, mut u) = matched(freqs);
        let e0 = zero_point_energy(&mode, &u, GH).unwrap();
        u.tilt = rb().mass * 9.8;
        let e1 = zero_point_energy(&mode, &u, GH).unwrap();
        assert_relative_eq!(e0, e1, max_relative = 1e-12);
    }

    #[test]
    fn displaced_mode_gains_potential_energy() {
        let freqs = [2e3, 3e3, 7e3];
        let (mode, u) = matched(freqs);
        let e0 = zero_point_energy(&mode, &u, GH).unwrap();
        let delta = 0.3 * mode.widths[0];
        let e1 = zero_point_energy(&mode.translated([delta, 0.0, 0.0]), &u, GH).unwrap();
        assert_relative_eq!(
            e1 - e0,
            0.5 * rb().mass * freqs[0].powi(2) * delta * delta,
            max_relative = 1e-8
        );
    }

    #[test]
    fn self_interaction_two_ways() {
        let sp = rb();
        let mut mode = GaussianMode::harmonic_ground_state([0.0; 3], [1e3; 3], sp.mass).unwrap();
        mode.widths = [0.5e-6; 3];
        let closed = self_interaction(&mode, &sp);
        let quad = self_interaction_quadrature(&mode, &sp, GH).unwrap();
        assert_relative_eq!(closed, quad, max_relative = 1e-10);
        let mut wide = mode;
        wide.widths = [1e-6; 3];
        assert_relative_eq!(
            closed / self_interaction(&wide, &sp),
            8.0,
            max_relative = 1e-14
        );
        let mut dry = sp;
        dry.scattering_length = 0.0;
        assert_eq!(self_interaction(&mode, &dry), 0.0);
    }

    #[test]
    fn coincident_modes_give_minus_zero_point() {
        let (mode, u) = matched([2e3, 3e3, 7e3]);
        let e = zero_point_energy(&mode, &u, GH).unwrap();
        assert_relative_eq!(
            josephson_coupling(&mode, &mode, &u, GH).unwrap(),
            -e,
            max_relative = 1e-14
        );
    }

    #[test]
    fn anchored_coupling_is_gaussian_in_separation() {
        let (mode, u) = matched([5e3; 3]);
        let e = zero_point_energy(&mode, &u, GH).unwrap();
        let s = mode.widths[0];
        for ratio in [0.5, 1.0, 2.0, 4.0, 6.0] {
            let d = ratio * s;
            let om = josephson_coupling(&mode, &mode.translated([d, 0.0, 0.0]), &u, GH).unwrap();
            assert_relative_eq!(om, -e * (-d * d / (4.0 * s * s)).exp(), max_relative = 1e-9);
        }
    }

    #[test]
    fn far_modes_decouple() {
        let (mode, u) = matched([5e3; 3]);
        let om = josephson_coupling(&mode, &mode.translated([1e-3, 0.0, 0.0]), &u, GH).unwrap();
        assert_eq!(om, 0.0);
    }
}
