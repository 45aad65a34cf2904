//! Josephson dynamics: the reduced two-mode system in (Ñ, θ̃) and the n-site
//! amplitude chain.
//!
//! The two-mode equations are integrated in rescaled time τ = 2|Ω^J| t/ħ:
//!
//! ```text
//! dÑ/dτ = s √(1 − Ñ²) sin θ̃
//! dθ̃/dτ = −s Ñ cos θ̃ / √(1 − Ñ²)
//! ```
//!
//! with s = sign(Ω^J), so a negative coupling runs the same orbit backwards.
//! C = √(1 − Ñ²) cos θ̃ is conserved and Ñ obeys Ñ'' = −Ñ exactly.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::export::{csv_number, csv_row};
use crate::modes::ModeCouplings;

/// How close |Ñ| may come to 1 before the two-mode integration aborts.
pub const SINGULARITY_GUARD: f64 = 1e-12;
/// Chain norm drift that aborts an integration.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// H(Ñ, θ̃) = E^o + Ω^J √(1 − Ñ²) cos θ̃ (J).
pub fn noninteracting_energy(n_tilde: f64, theta: f64, e0: f64, omega_j: f64) -> Result<f64> {
    check_population(n_tilde)?;
    Ok(e0 + omega_j * (1.0 - n_tilde * n_tilde).sqrt() * theta.cos())
}

fn check_population(n: f64) -> Result<()> {
    if !(n.abs() <= 1.0) {
        return Err(Error::PopulationOutOfRange { value: n });
    }
    Ok(())
}

fn check_open_population(n: f64) -> Result<()> {
    if !(n.abs() < 1.0) {
        return Err(Error::PopulationOutOfRange { value: n });
    }
    Ok(())
}

/// C = √(1 − Ñ²) cos θ̃.
pub fn c_invariant(n_tilde: f64, theta: f64) -> f64 {
    (1.0 - n_tilde * n_tilde).sqrt() * theta.cos()
}

/// Exact two-mode solution at rescaled time `t` for unit positive
/// coupling: Ñ(t) = Ñ₀ cos t + √(1 − Ñ₀²) sin θ̃₀ sin t, and θ̃ from
/// √(1 − Ñ²)(sin θ̃, cos θ̃) = (Ñ', C), continued from θ̃₀.
pub fn rabi_oracle(n0: f64, theta0: f64, t: f64) -> Result<(f64, f64)> {
    check_open_population(n0)?;
    if t == 0.0 {
        return Ok((n0, theta0));
    }
    let v0 = (1.0 - n0 * n0).sqrt() * theta0.sin();
    let c = c_invariant(n0, theta0);
    let (s, co) = t.sin_cos();
    let n = n0 * co + v0 * s;
    let v = -n0 * s + v0 * co;
    // the branch stays on one side of the (v, C) plane origin for C ≠ 0
    let angle = |v: f64| {
        if c < 0.0 {
            PI - v.atan2(-c)
        } else {
            v.atan2(c)
        }
    };
    let shift = TAU * ((theta0 - angle(v0)) / TAU).round();
    Ok((n, angle(v) + shift))
}

/// Closed-form amplitude √(1 − C²) of the Ñ oscillation.
pub fn rabi_amplitude(n0: f64, theta0: f64) -> f64 {
    let c = c_invariant(n0, theta0);
    (1.0 - c * c).max(0.0).sqrt()
}

/// Settings for a two-mode integration; times are rescaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeOptions {
    pub t_end: f64,
    /// Largest step; the step is shrunk so the grid ends exactly at t_end.
    pub dt: f64,
    /// Keep every k-th step.
    pub decimation: usize,
}

impl Default for TwoModeOptions {
    fn default() -> Self {
        TwoModeOptions {
            t_end: 20.0 * PI,
            dt: 1e-3,
            decimation: 10,
        }
    }
}

fn step_count(t_end: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::NonPositive {
            what: "time step",
            value: dt,
        });
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "end time must be >= 0, got {t_end}"
        )));
    }
    let n = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    Ok(if n == 0 {
        (0, dt)
    } else {
        (n, t_end / n as f64)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeSample {
    /// Rescaled time τ = 2|Ω^J| t/ħ.
    pub t: f64,
    pub n_tilde: f64,
    pub theta: f64,
    /// H (J).
    pub energy: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoModeTrajectory {
    pub n0: f64,
    pub theta0: f64,
    pub omega_j: f64,
    pub e0: f64,
    pub options: TwoModeOptions,
    /// Actual step used.
    pub step: f64,
    /// Seconds per rescaled time unit, ħ/(2|Ω^J|).
    pub time_unit: f64,
    pub samples: Vec<TwoModeSample>,
    /// max |H(t) − H(0)|/|Ω^J| over every step.
    pub max_energy_drift: f64,
    /// max |C(t) − C(0)| over every step.
    pub max_c_drift: f64,
}

/// The reduced equations with the sign of Ω^J folded in.
#[derive(Debug, Clone, Copy)]
pub struct TwoModeSystem {
    sign: f64,
}

impl TwoModeSystem {
    pub fn new(omega_j: f64) -> Result<Self> {
        if omega_j == 0.0 || !omega_j.is_finite() {
            return Err(Error::InvalidArgument(
                "two-mode dynamics needs a nonzero coupling to define rescaled time".into(),
            ));
        }
        Ok(TwoModeSystem {
            sign: omega_j.signum(),
        })
    }

    fn rhs(&self, t: f64, n: f64, th: f64) -> Result<(f64, f64)> {
        if !(1.0 - n.abs() >= SINGULARITY_GUARD) {
            return Err(Error::Singularity {
                time: t,
                n_tilde: n,
                theta: th,
            });
        }
        let r = (1.0 - n * n).sqrt();
        let (s, c) = th.sin_cos();
        Ok((self.sign * r * s, -self.sign * n * c / r))
    }

    /// One classical RK4 step of size `h` (negative steps run backwards).
    pub fn rk4_step(&self, t: f64, state: (f64, f64), h: f64) -> Result<(f64, f64)> {
        let (n, th) = state;
        let k1 = self.rhs(t, n, th)?;
        let k2 = self.rhs(t, n + 0.5 * h * k1.0, th + 0.5 * h * k1.1)?;
        let k3 = self.rhs(t, n + 0.5 * h * k2.0, th + 0.5 * h * k2.1)?;
        let k4 = self.rhs(t, n + h * k3.0, th + h * k3.1)?;
        Ok((
            n + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            th + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        ))
    }
}

/// Integrates the two-mode equations from (Ñ₀, θ̃₀). On a singularity the
/// error carries the last good state.
pub fn evolve_two_mode(
    n0: f64,
    theta0: f64,
    omega_j: f64,
    e0: f64,
    options: TwoModeOptions,
) -> Result<TwoModeTrajectory> {
    check_open_population(n0)?;
    let system = TwoModeSystem::new(omega_j)?;
    let (steps, h) = step_count(options.t_end, options.dt)?;
    let k = options.decimation.max(1);
    let c0 = c_invariant(n0, theta0);
    let sample = |t: f64, n: f64, th: f64| {
        let c = c_invariant(n, th);
        TwoModeSample {
            t,
            n_tilde: n,
            theta: th,
            energy: e0 + omega_j * c,
            c,
        }
    };
    let mut samples = Vec::with_capacity(steps / k + 2);
    samples.push(sample(0.0, n0, theta0));
    let mut state = (n0, theta0);
    let mut max_c_drift: f64 = 0.0;
    for i in 1..=steps {
        let t_prev = (i - 1) as f64 * h;
        state = system.rk4_step(t_prev, state, h).map_err(|e| match e {
            Error::Singularity { .. } => Error::Singularity {
                time: t_prev,
                n_tilde: state.0,
                theta: state.1,
            },
            other => other,
        })?;
        let c = c_invariant(state.0, state.1);
        max_c_drift = max_c_drift.max((c - c0).abs());
        if i % k == 0 || i == steps {
            samples.push(sample(i as f64 * h, state.0, state.1));
        }
    }
    Ok(TwoModeTrajectory {
        n0,
        theta0,
        omega_j,
        e0,
        options,
        step: h,
        time_unit: HBAR / (2.0 * omega_j.abs()),
        samples,
        max_energy_drift: max_c_drift,
        max_c_drift,
    })
}

/// Runs one trajectory per initial Ñ₀ in parallel; results keep input
/// order.
pub fn sweep_two_mode(
    n0s: &[f64],
    theta0: f64,
    omega_j: f64,
    e0: f64,
    options: TwoModeOptions,
) -> Vec<Result<TwoModeTrajectory>> {
    n0s.par_iter()
        .map(|&n0| evolve_two_mode(n0, theta0, omega_j, e0, options))
        .collect()
}

impl TwoModeTrajectory {
    /// Columns t_rescaled, t_s, N_tilde, theta_tilde, H_J, C and, with
    /// `oracle`, the closed-form Ñ.
    pub fn to_csv(&self, oracle: bool) -> String {
        let mut out = String::from("t_rescaled,t_s,N_tilde,theta_tilde,H_J,C");
        if oracle {
            out.push_str(",N_tilde_exact");
        }
        out.push('\n');
        for s in &self.samples {
            let mut f = vec![
                csv_number(s.t),
                csv_number(s.t * self.time_unit),
                csv_number(s.n_tilde),
                csv_number(s.theta),
                csv_number(s.energy),
                csv_number(s.c),
            ];
            if oracle {
                let t = s.t * self.omega_j.signum();
                let exact = rabi_oracle(self.n0, self.theta0, t)
                    .map(|r| r.0)
                    .unwrap_or(f64::NAN);
                f.push(csv_number(exact));
            }
            out.push_str(&csv_row(&f));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("trajectory serializes")
    }
}

/// Real symmetric tridiagonal Hamiltonian (J).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TridiagonalHamiltonian {
    pub diagonal: Vec<f64>,
    /// Entry (i, i+1) and (i+1, i), i.e. −Ω^J_{i,i+1}.
    pub off_diagonal: Vec<f64>,
}

impl TridiagonalHamiltonian {
    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diagonal[i];
        }
        for (i, &o) in self.off_diagonal.iter().enumerate() {
            m[(i, i + 1)] = o;
            m[(i + 1, i)] = o;
        }
        m
    }

    /// H·c with `diag_shift` subtracted from the diagonal and everything
    /// divided by `unit`.
    fn apply_scaled(&self, c: &[Complex64], diag_shift: f64, unit: f64, out: &mut [Complex64]) {
        let n = c.len();
        for i in 0..n {
            let mut v = c[i] * ((self.diagonal[i] - diag_shift) / unit);
            if i > 0 {
                v += c[i - 1] * (self.off_diagonal[i - 1] / unit);
            }
            if i + 1 < n {
                v += c[i + 1] * (self.off_diagonal[i] / unit);
            }
            out[i] = v;
        }
    }
}

fn check_couplings(c: &ModeCouplings) -> Result<usize> {
    let n = c.zero_point.len();
    if n == 0 {
        return Err(Error::DimensionMismatch(
            "chain needs at least one site".into(),
        ));
    }
    if c.self_interaction.len() != n || c.josephson.len() + 1 != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} sites need {n} self-interactions and {} couplings, got {} and {}",
            n - 1,
            c.self_interaction.len(),
            c.josephson.len()
        )));
    }
    Ok(n)
}

/// Diagonal E_i^o + Γ_i N_i, off-diagonals −Ω^J_{i,i+1} on both sides.
pub fn build_hamiltonian(
    couplings: &ModeCouplings,
    occupations: &[f64],
) -> Result<TridiagonalHamiltonian> {
    let n = check_couplings(couplings)?;
    if occupations.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} sites but {} occupations",
            occupations.len()
        )));
    }
    Ok(TridiagonalHamiltonian {
        diagonal: (0..n)
            .map(|i| couplings.zero_point[i] + couplings.self_interaction[i] * occupations[i])
            .collect(),
        off_diagonal: couplings.josephson.iter().map(|o| -o).collect(),
    })
}

/// Whether Γ_i N_i follows the instantaneous populations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainMode {
    /// Diagonal fixed at the initial populations (linear).
    #[default]
    Frozen,
    /// Diagonal rebuilt from |c_i|² at every stage (nonlinear).
    SelfConsistent,
}

impl std::str::FromStr for ChainMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frozen" => Ok(ChainMode::Frozen),
            "self-consistent" => Ok(ChainMode::SelfConsistent),
            other => Err(Error::InvalidArgument(format!(
                "unknown chain mode `{other}` (expected frozen or self-consistent)"
            ))),
        }
    }
}

/// Amplitudes c_i with N_i = |c_i|², θ_i = arg c_i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub amplitudes: Vec<Complex64>,
}

impl ChainState {
    /// All population on `site`.
    pub fn localized(n: usize, site: usize) -> Result<Self> {
        if site >= n {
            return Err(Error::InvalidArgument(format!(
                "site {site} outside a chain of {n}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
        amplitudes[site] = Complex64::new(1.0, 0.0);
        Ok(ChainState { amplitudes })
    }

    /// c_i = √N_i e^{iθ_i}.
    pub fn from_populations(populations: &[f64], phases: &[f64]) -> Result<Self> {
        if populations.len() != phases.len() {
            return Err(Error::DimensionMismatch(
                "populations and phases differ in length".into(),
            ));
        }
        if let Some(&bad) = populations.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::PopulationOutOfRange { value: bad });
        }
        Ok(ChainState {
            amplitudes: populations
                .iter()
                .zip(phases)
                .map(|(&p, &th)| Complex64::from_polar(p.sqrt(), th))
                .collect(),
        })
    }

    /// Two sites with fractional imbalance Ñ and phase difference θ̃ =
    /// θ₁ − θ₂.
    pub fn pair(n_tilde: f64, theta: f64) -> Result<Self> {
        check_population(n_tilde)?;
        Self::from_populations(
            &[(1.0 + n_tilde) / 2.0, (1.0 - n_tilde) / 2.0],
            &[theta, 0.0],
        )
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.arg()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// (Ñ, θ̃) of sites (i, i+1), normalized by their joint population.
    pub fn pair_observables(&self, i: usize) -> Option<(f64, f64)> {
        let (a, b) = (self.amplitudes.get(i)?, self.amplitudes.get(i + 1)?);
        let total = a.norm_sqr() + b.norm_sqr();
        (total > 0.0).then(|| ((a.norm_sqr() - b.norm_sqr()) / total, (a * b.conj()).arg()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainOptions {
    /// End time in units of ħ/energy_unit.
    pub t_end: f64,
    pub dt: f64,
    pub decimation: usize,
    pub mode: ChainMode,
    /// Energy unit (J); `None` uses the largest |Ω^J|, or the largest
    /// |diagonal| when there is no coupling.
    pub energy_unit: Option<f64>,
    /// Constant removed from the diagonal (J); only shifts the global phase.
    pub energy_offset: f64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            t_end: 20.0,
            dt: 1e-3,
            decimation: 10,
            mode: ChainMode::Frozen,
            energy_unit: None,
            energy_offset: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSample {
    /// Time in units of ħ/energy_unit.
    pub t: f64,
    pub amplitudes: Vec<Complex64>,
    pub norm: f64,
    /// Energy functional (J), see [`chain_energy`].
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainTrajectory {
    pub options: ChainOptions,
    pub energy_unit: f64,
    /// Seconds per time unit, ħ/energy_unit.
    pub time_unit: f64,
    pub step: f64,
    pub samples: Vec<ChainSample>,
    pub max_norm_drift: f64,
    /// max |E(t) − E(0)| / energy_unit over every step.
    pub max_energy_drift: f64,
}

/// Conserved functional of the chain (J): Σ (E_i N_i + ½ Γ_i N_i²) −
/// Σ Ω_{i,i+1} 2 Re(c_i* c_{i+1}) self-consistently, or ⟨c|H|c⟩ with the
/// frozen diagonal.
pub fn chain_energy(
    h_frozen: &TridiagonalHamiltonian,
    couplings: &ModeCouplings,
    c: &[Complex64],
    mode: ChainMode,
) -> f64 {
    let mut e = 0.0;
    for (i, ci) in c.iter().enumerate() {
        let n = ci.norm_sqr();
        e += match mode {
            ChainMode::Frozen => h_frozen.diagonal[i] * n,
            ChainMode::SelfConsistent => {
                couplings.zero_point[i] * n + 0.5 * couplings.self_interaction[i] * n * n
            }
        };
    }
    for (i, &o) in h_frozen.off_diagonal.iter().enumerate() {
        e += o * 2.0 * (c[i].conj() * c[i + 1]).re;
    }
    e
}

/// Integrates iħ ċ = Ĥ c with RK4 in units of ħ/energy_unit.
pub fn evolve_chain(
    couplings: &ModeCouplings,
    initial: &ChainState,
    options: ChainOptions,
) -> Result<ChainTrajectory> {
    let n = check_couplings(couplings)?;
    if initial.amplitudes.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} sites but {} amplitudes",
            initial.amplitudes.len()
        )));
    }
    let norm0 = initial.norm();
    if (norm0 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "initial state must be normalized, norm = {norm0}"
        )));
    }
    let (steps, h) = step_count(options.t_end, options.dt)?;
    let frozen = build_hamiltonian(couplings, &initial.populations())?;
    let unit = match options.energy_unit {
        Some(u) if u > 0.0 && u.is_finite() => u,
        Some(u) => {
            return Err(Error::NonPositive {
                what: "energy unit",
                value: u,
            })
        }
        None => {
            let om = couplings
                .josephson
                .iter()
                .fold(0.0f64, |m, o| m.max(o.abs()));
            if om > 0.0 {
                om
            } else {
                let d = frozen
                    .diagonal
                    .iter()
                    .fold(0.0f64, |m, v| m.max((v - options.energy_offset).abs()));
                if d > 0.0 {
                    d
                } else {
                    1.0
                }
            }
        }
    };
    let shift = options.energy_offset;
    let k = options.decimation.max(1);

    let mut ham = frozen.clone();
    let deriv = |c: &[Complex64], ham: &mut TridiagonalHamiltonian, out: &mut [Complex64]| {
        if options.mode == ChainMode::SelfConsistent {
            for (i, (d, ci)) in ham.diagonal.iter_mut().zip(c).enumerate() {
                *d = couplings.zero_point[i] + couplings.self_interaction[i] * ci.norm_sqr();
            }
        }
        ham.apply_scaled(c, shift, unit, out);
        for v in out.iter_mut() {
            *v *= Complex64::new(0.0, -1.0);
        }
    };
    let energy = |c: &[Complex64]| chain_energy(&frozen, couplings, c, options.mode);

    let e0 = energy(&initial.amplitudes);
    let mut c = initial.amplitudes.clone();
    let mut samples = vec![ChainSample {
        t: 0.0,
        amplitudes: c.clone(),
        norm: norm0,
        energy: e0,
    }];
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut tmp = vec![zero; n];
    let mut max_norm_drift: f64 = 0.0;
    let mut max_energy_drift: f64 = 0.0;
    for i in 1..=steps {
        deriv(&c, &mut ham, &mut k1);
        for j in 0..n {
            tmp[j] = c[j] + k1[j] * (0.5 * h);
        }
        deriv(&tmp, &mut ham, &mut k2);
        for j in 0..n {
            tmp[j] = c[j] + k2[j] * (0.5 * h);
        }
        deriv(&tmp, &mut ham, &mut k3);
        for j in 0..n {
            tmp[j] = c[j] + k3[j] * h;
        }
        deriv(&tmp, &mut ham, &mut k4);
        for j in 0..n {
            c[j] += (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (h / 6.0);
        }
        let norm: f64 = c.iter().map(|v| v.norm_sqr()).sum();
        let drift = (norm - norm0).abs();
        max_norm_drift = max_norm_drift.max(drift);
        if drift > NORM_DRIFT_LIMIT {
            return Err(Error::NormDrift {
                time: i as f64 * h,
                drift,
            });
        }
        let e = energy(&c);
        max_energy_drift = max_energy_drift.max((e - e0).abs() / unit);
        if i % k == 0 || i == steps {
            samples.push(ChainSample {
                t: i as f64 * h,
                amplitudes: c.clone(),
                norm,
                energy: e,
            });
        }
    }
    Ok(ChainTrajectory {
        options,
        energy_unit: unit,
        time_unit: HBAR / unit,
        step: h,
        samples,
        max_norm_drift,
        max_energy_drift,
    })
}

impl ChainTrajectory {
    /// Columns t, t_s, Re c_i…, Im c_i…, N_i…, norm, energy_J.
    pub fn to_csv(&self) -> String {
        let n = self.samples.first().map_or(0, |s| s.amplitudes.len());
        let mut header = vec!["t".to_string(), "t_s".to_string()];
        header.extend((0..n).map(|i| format!("re_c{i}")));
        header.extend((0..n).map(|i| format!("im_c{i}")));
        header.extend((0..n).map(|i| format!("N{i}")));
        header.push("norm".into());
        header.push("energy_J".into());
        let mut out = csv_row(&header);
        out.push('\n');
        for s in &self.samples {
            let mut f = vec![csv_number(s.t), csv_number(s.t * self.time_unit)];
            f.extend(s.amplitudes.iter().map(|c| csv_number(c.re)));
            f.extend(s.amplitudes.iter().map(|c| csv_number(c.im)));
            f.extend(s.amplitudes.iter().map(|c| csv_number(c.norm_sqr())));
            f.push(csv_number(s.norm));
            f.push(csv_number(s.energy));
            out.push_str(&csv_row(&f));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("trajectory serializes")
    }
}

/// Uniform couplings for a chain of `n` sites (J).
pub fn uniform_couplings(n: usize, e0: f64, gamma: f64, omega_j: f64) -> ModeCouplings {
    ModeCouplings {
        zero_point: vec![e0; n],
        self_interaction: vec![gamma; n],
        josephson: vec![omega_j; n.saturating_sub(1)],
    }
}
