//! Physical constants in SI units (CODATA 2018 recommended values).

/// Bohr magneton μ_B (J/T)
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;

/// Boltzmann constant k_B (J/K), exact
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Planck constant h (J·s), exact
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Reduced Planck constant ħ = h/2π (J·s)
pub const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum magnetic permeability μ_0 (T·m/A)
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;

/// Standard acceleration of gravity (m/s²), exact by convention
pub const STANDARD_GRAVITY: f64 = 9.806_65;

/// Atomic mass constant (kg)
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Bundle of the constants used by the trap formulas, for callers that want
/// to carry them as a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub bohr_magneton: f64,
    pub boltzmann: f64,
    pub hbar: f64,
    pub vacuum_permeability: f64,
}

/// The CODATA 2018 set.
pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    bohr_magneton: BOHR_MAGNETON,
    boltzmann: BOLTZMANN,
    hbar: HBAR,
    vacuum_permeability: VACUUM_PERMEABILITY,
};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hbar_matches_planck() {
        let derived = PLANCK / (2.0 * std::f64::consts::PI);
        assert!((derived - HBAR).abs() / HBAR < 1e-9);
    }

    #[test]
    fn bohr_magneton_over_boltzmann() {
        // μ_B/k_B = 0.671 713 815 63 K/T
        let ratio = BOHR_MAGNETON / BOLTZMANN;
        assert!((ratio - 0.671_713_815_63).abs() < 1e-10);
    }
}
