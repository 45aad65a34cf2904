//! Lattice geometry, atomic species and analysis settings, plus the plain
//! `key = value` configuration format.
//!
//! Configuration documents use laboratory units (micrometres, gauss,
//! kilogauss). Values are converted to SI when the document is parsed; every
//! struct in this module stores SI.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::constants::{BOHR_MAGNETON, HBAR, PLANCK, STANDARD_GRAVITY};
use crate::error::{Error, Result};
use crate::units;

/// Geometry and magnetic parameters of the patterned film plus the external
/// bias field. All quantities in SI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    /// Side of the square holes α_h (m).
    pub hole_size: f64,
    /// Width of the film strips between holes α_s (m).
    pub separation: f64,
    /// Film thickness τ (m). The film top sits at z = τ.
    pub film_thickness: f64,
    /// Magnetization expressed as the field μ_0·M_z (T).
    pub magnetization: f64,
    /// External bias field (B_x, B_y, B_z) (T).
    pub bias: Vector3<f64>,
    /// Number of sites along one side of the lattice.
    pub sites_per_side: usize,
}

/// The derived constants of the analytic field model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceField {
    /// B_o = μ_0 M_z / π (T)
    pub b_o: f64,
    /// B_ref = B_o (1 − e^{−βτ}) (T)
    pub b_ref: f64,
    /// β = π/α (1/m)
    pub beta: f64,
}

impl LatticeConfig {
    /// Builds a configuration from laboratory units: lengths in µm,
    /// magnetization in kG, bias components in G.
    pub fn from_lab_units(
        hole_um: f64,
        separation_um: f64,
        thickness_um: f64,
        magnetization_kg: f64,
        bias_g: [f64; 3],
        sites_per_side: usize,
    ) -> Result<Self> {
        let cfg = LatticeConfig {
            hole_size: units::um_to_m(hole_um),
            separation: units::um_to_m(separation_um),
            film_thickness: units::um_to_m(thickness_um),
            magnetization: units::kilogauss_to_tesla(magnetization_kg),
            bias: Vector3::from(bias_g.map(units::gauss_to_tesla)),
            sites_per_side,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// 1 µm holes and strips, 2 µm film, 3 kG.
    pub fn lattice_1um() -> Self {
        Self::from_lab_units(1.0, 1.0, 2.0, 3.0, [0.0; 3], 11).expect("valid preset")
    }

    /// 3.5 µm holes and strips, 2 µm film, 2.8 kG, 11 sites per side.
    pub fn lattice_3p5um() -> Self {
        Self::from_lab_units(3.5, 3.5, 2.0, 2.8, [0.0; 3], 11).expect("valid preset")
    }

    pub fn with_bias_gauss(mut self, bias_g: [f64; 3]) -> Self {
        self.bias = Vector3::from(bias_g.map(units::gauss_to_tesla));
        self
    }

    /// Checks the invariants that hold for any field model.
    pub fn validate(&self) -> Result<()> {
        positive_finite("hole_size", self.hole_size)?;
        positive_finite("separation", self.separation)?;
        positive_finite("film_thickness", self.film_thickness)?;
        positive_finite("magnetization", self.magnetization)?;
        if self.bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("bias", "components must be finite"));
        }
        if self.sites_per_side == 0 {
            return Err(Error::invalid("sites_per_side", "must be at least 1"));
        }
        Ok(())
    }

    /// Checks the extra requirement of the analytic model, α_h = α_s.
    pub fn validate_analytic(&self) -> Result<()> {
        self.validate()?;
        if self.hole_size != self.separation {
            return Err(Error::UnequalHoleSeparation {
                hole_um: units::m_to_um(self.hole_size),
                separation_um: units::m_to_um(self.separation),
            });
        }
        Ok(())
    }

    /// The common length α = α_h = α_s.
    pub fn alpha(&self) -> f64 {
        self.hole_size
    }

    /// Lattice wavenumber β = π/α.
    pub fn beta(&self) -> f64 {
        PI / self.alpha()
    }

    /// Spatial period of the field pattern, 2α = 2π/β.
    pub fn period(&self) -> f64 {
        2.0 * self.alpha()
    }

    /// Returns (B_o, B_ref, β) in SI units.
    pub fn reference_field(&self) -> ReferenceField {
        let beta = self.beta();
        let b_o = self.magnetization / PI;
        // 1 - e^{-x} without cancellation for thin films
        let b_ref = -b_o * (-beta * self.film_thickness).exp_m1();
        ReferenceField { b_o, b_ref, beta }
    }
}

fn positive_finite(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::invalid(
            name,
            format!("must be positive and finite, got {v}"),
        ));
    }
    Ok(())
}

/// Atomic constants of the trapped species.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpecies {
    /// Atomic mass M (kg).
    pub mass: f64,
    /// s-wave scattering length a_s (m).
    pub scattering_length: f64,
    /// Landé factor g_F.
    pub lande_g: f64,
    /// Magnetic quantum number m_F.
    pub m_f: f64,
}

impl AtomSpecies {
    /// ⁸⁷Rb in |F = 2, m_F = 2⟩.
    pub fn rubidium87() -> Self {
        AtomSpecies {
            mass: 1.443_16e-25,
            scattering_length: 5.29e-9,
            lande_g: 0.5,
            m_f: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive_finite("mass", self.mass)?;
        if !self.scattering_length.is_finite() {
            return Err(Error::invalid("scattering_length", "must be finite"));
        }
        let gm = self.lande_g * self.m_f;
        if !(gm.is_finite() && gm > 0.0) {
            return Err(Error::invalid(
                "lande_g * m_f",
                format!("must be positive for a weak-field-seeking state, got {gm}"),
            ));
        }
        Ok(())
    }

    /// g_F·m_F
    pub fn gf_mf(&self) -> f64 {
        self.lande_g * self.m_f
    }

    /// μ_B g_F m_F (J/T)
    pub fn magnetic_moment(&self) -> f64 {
        BOHR_MAGNETON * self.gf_mf()
    }

    /// Contact interaction strength g_o = 4πħ²a_s/M (J·m³).
    pub fn interaction_strength(&self) -> f64 {
        4.0 * PI * HBAR * HBAR * self.scattering_length / self.mass
    }
}

impl Default for AtomSpecies {
    fn default() -> Self {
        Self::rubidium87()
    }
}

/// How trap curvatures are turned into frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyMode {
    /// ω_k = (β/2π)·√(μ_B g_F m_F ∂²B/∂k²), taken as written.
    #[default]
    Scaled,
    /// ω_k = √(μ_B g_F m_F (∂²B/∂k²) / M), the harmonic-oscillator form.
    Physical,
}

impl FromStr for FrequencyMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "scaled" => Ok(FrequencyMode::Scaled),
            "physical" => Ok(FrequencyMode::Physical),
            other => Err(Error::invalid(
                "frequency_mode",
                format!("expected `scaled` or `physical`, got `{other}`"),
            )),
        }
    }
}

impl fmt::Display for FrequencyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrequencyMode::Scaled => f.write_str("scaled"),
            FrequencyMode::Physical => f.write_str("physical"),
        }
    }
}

/// Numerical and modelling knobs that are not properties of the lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSettings {
    pub frequency_mode: FrequencyMode,
    /// Offset field B_off (T) used for curvatures: ∂²/∂k² √(B² + B_off²).
    /// Zero means bare |B|, which is singular at field zeros.
    pub curvature_offset: f64,
    /// Sites with B_min below this (T) carry a spin-flip warning.
    pub majorana_threshold: f64,
    /// Height above the film (m) used when the minimum is degenerate along z.
    /// `None` means one hole size.
    pub fallback_height: Option<f64>,
    /// Linear tilt δ of the trapping potential (J/m).
    pub tilt: f64,
    /// Gauss–Hermite nodes per axis for the mode integrals.
    pub quadrature_nodes: usize,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            frequency_mode: FrequencyMode::Scaled,
            curvature_offset: units::gauss_to_tesla(0.1),
            majorana_threshold: units::gauss_to_tesla(0.1),
            fallback_height: None,
            tilt: 0.0,
            quadrature_nodes: 64,
        }
    }
}

/// Everything a configuration document describes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub lattice: LatticeConfig,
    pub species: AtomSpecies,
    pub settings: AnalysisSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lattice: LatticeConfig::lattice_3p5um(),
            species: AtomSpecies::rubidium87(),
            settings: AnalysisSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn fallback_height(&self) -> f64 {
        self.settings
            .fallback_height
            .unwrap_or(self.lattice.alpha())
    }
}

/// Keys understood by [`parse_config`], with their units.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("preset", "lattice-1um | lattice-3p5um"),
    ("hole_size_um", "um"),
    ("separation_um", "um"),
    ("film_thickness_um", "um"),
    ("magnetization_kG", "kG (field equivalent mu0*M)"),
    ("bias_x_G", "G"),
    ("bias_y_G", "G"),
    ("bias_z_G", "G"),
    ("sites_per_side", "count"),
    ("field_model", "analytic"),
    ("species", "rb87"),
    ("mass_kg", "kg"),
    ("mass_amu", "u"),
    ("scattering_length_nm", "nm"),
    ("lande_g", "-"),
    ("m_f", "-"),
    ("frequency_mode", "scaled | physical"),
    ("curvature_offset_G", "G"),
    ("majorana_threshold_G", "G"),
    ("fallback_height_um", "um"),
    ("tilt_hz_per_um", "Hz/um (delta/h)"),
    ("tilt_gravity", "multiples of M*g"),
    ("quadrature_nodes", "count"),
];

/// An ordered `key = value` document. Later assignments replace earlier ones,
/// which is how command-line overrides are layered on top of a file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigDocument {
    entries: BTreeMap<String, (String, usize)>,
}

impl ConfigDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = ConfigDocument::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || value.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "empty key or value".into(),
                });
            }
            doc.insert(key, value, line)?;
        }
        Ok(doc)
    }

    /// Applies a single `key=value` override (line number 0).
    pub fn set_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("override `{assignment}` is not `key=value`"),
        })?;
        self.insert(key.trim(), value.trim(), 0)
    }

    fn insert(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        if !CONFIG_KEYS.iter().any(|(k, _)| *k == key) {
            return Err(Error::Parse {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        self.entries
            .insert(key.to_string(), (value.to_string(), line));
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<f64>().map(Some).map_err(|_| Error::Parse {
                line: *line,
                message: format!("`{key}` expects a number, got `{v}`"),
            }),
        }
    }

    /// Resolves the document into a validated [`RunConfig`].
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut run = RunConfig::default();
        if let Some(preset) = self.get("preset") {
            run.lattice = match preset {
                "lattice-1um" => LatticeConfig::lattice_1um(),
                "lattice-3p5um" => LatticeConfig::lattice_3p5um(),
                other => {
                    return Err(Error::invalid(
                        "preset",
                        format!("unknown preset `{other}`"),
                    ))
                }
            };
        }
        let lat = &mut run.lattice;
        if let Some(v) = self.number("hole_size_um")? {
            lat.hole_size = units::um_to_m(v);
        }
        if let Some(v) = self.number("separation_um")? {
            lat.separation = units::um_to_m(v);
        }
        if let Some(v) = self.number("film_thickness_um")? {
            lat.film_thickness = units::um_to_m(v);
        }
        if let Some(v) = self.number("magnetization_kG")? {
            lat.magnetization = units::kilogauss_to_tesla(v);
        }
        for (i, key) in ["bias_x_G", "bias_y_G", "bias_z_G"].iter().enumerate() {
            if let Some(v) = self.number(key)? {
                lat.bias[i] = units::gauss_to_tesla(v);
            }
        }
        if let Some(v) = self.number("sites_per_side")? {
            if v.fract() != 0.0 || v < 1.0 {
                return Err(Error::invalid(
                    "sites_per_side",
                    "must be a positive integer",
                ));
            }
            lat.sites_per_side = v as usize;
        }

        if let Some(species) = self.get("species") {
            run.species = match species.to_ascii_lowercase().as_str() {
                "rb87" | "87rb" => AtomSpecies::rubidium87(),
                other => {
                    return Err(Error::invalid(
                        "species",
                        format!("unknown species `{other}`"),
                    ))
                }
            };
        }
        let sp = &mut run.species;
        match (self.number("mass_kg")?, self.number("mass_amu")?) {
            (Some(_), Some(_)) => {
                return Err(Error::invalid(
                    "mass",
                    "give either mass_kg or mass_amu, not both",
                ))
            }
            (Some(kg), None) => sp.mass = kg,
            (None, Some(amu)) => sp.mass = amu * crate::constants::ATOMIC_MASS_UNIT,
            (None, None) => {}
        }
        if let Some(v) = self.number("scattering_length_nm")? {
            sp.scattering_length = units::nm_to_m(v);
        }
        if let Some(v) = self.number("lande_g")? {
            sp.lande_g = v;
        }
        if let Some(v) = self.number("m_f")? {
            sp.m_f = v;
        }

        let st = &mut run.settings;
        if let Some(v) = self.get("frequency_mode") {
            st.frequency_mode = v.parse()?;
        }
        if let Some(v) = self.number("curvature_offset_G")? {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid("curvature_offset_G", "must be >= 0"));
            }
            st.curvature_offset = units::gauss_to_tesla(v);
        }
        if let Some(v) = self.number("majorana_threshold_G")? {
            st.majorana_threshold = units::gauss_to_tesla(v);
        }
        if let Some(v) = self.number("fallback_height_um")? {
            positive_finite("fallback_height_um", v)?;
            st.fallback_height = Some(units::um_to_m(v));
        }
        match (self.number("tilt_hz_per_um")?, self.number("tilt_gravity")?) {
            (Some(_), Some(_)) => {
                return Err(Error::invalid(
                    "tilt",
                    "give either tilt_hz_per_um or tilt_gravity",
                ))
            }
            (Some(hz_per_um), None) => st.tilt = PLANCK * hz_per_um / units::MICROMETER,
            (None, Some(g)) => st.tilt = g * sp.mass * STANDARD_GRAVITY,
            (None, None) => {}
        }
        if let Some(v) = self.number("quadrature_nodes")? {
            if v.fract() != 0.0 || !(2.0..=512.0).contains(&v) {
                return Err(Error::invalid(
                    "quadrature_nodes",
                    "must be an integer in 2..=512",
                ));
            }
            st.quadrature_nodes = v as usize;
        }

        match self.get("field_model") {
            None | Some("analytic") => run.lattice.validate_analytic()?,
            Some(other) => {
                return Err(Error::invalid(
                    "field_model",
                    format!("unsupported model `{other}`"),
                ))
            }
        }
        run.species.validate()?;
        Ok(run)
    }
}

/// Parses a configuration document and validates it against the analytic
/// field model. Omitted keys keep the defaults of [`RunConfig::default`].
pub fn parse_config(text: &str) -> Result<RunConfig> {
    ConfigDocument::parse(text)?.resolve()
}
