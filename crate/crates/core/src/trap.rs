//! Trap sites of the lattice: minimum location, curvatures, trap frequencies,
//! barrier heights and depths, and bias scans.
//!
//! Minima are searched on |B|², which stays smooth where |B| vanishes. Every
//! biased site of this lattice is a field zero (the bias cancels the lattice
//! field vector somewhere), so curvatures are taken of √(B² + B_off²) with
//! the offset from [`AnalysisSettings::curvature_offset`]; at B_min ≫ B_off
//! this is the curvature of |B| itself.

use std::f64::consts::{PI, TAU};

use nalgebra::{DVector, Matrix2, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::config::{AnalysisSettings, AtomSpecies, FrequencyMode, LatticeConfig, RunConfig};
use crate::constants::BOLTZMANN;
use crate::error::{Error, Result};
use crate::export::{csv_number, csv_row};
use crate::field::{field_hessian_diag, LatticeField, RegularizedField};
use crate::optimize::{minimize, MinimizeOptions};
use crate::units;

/// Gradient tolerance on the normalized objective (|B|²/|b|² in lattice
/// phase coordinates).
const GRADIENT_TOLERANCE: f64 = 1e-9;
/// Height cap for the search, in units of 1/β above the film.
const MAX_PHASE_HEIGHT: f64 = 80.0;
/// Smallest/largest Hessian eigenvalue ratio below which a minimum counts as
/// degenerate.
const DEGENERACY_RATIO: f64 = 1e-8;
/// Relative x/y curvature mismatch tolerated without a warning.
pub const CURVATURE_SYMMETRY_TOLERANCE: f64 = 1e-6;
/// Samples along the straight path between two sites.
pub const BARRIER_PATH_SAMPLES: usize = 201;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrapWarning {
    /// B_min below the spin-flip threshold (T).
    WeakField { b_min: f64, threshold: f64 },
    /// ∂²/∂x² and ∂²/∂y² differ by more than the symmetry tolerance.
    CurvatureAsymmetry { relative: f64 },
    /// The minimum is degenerate along z; the site was located at a fixed
    /// height instead.
    HeightConstrained { height: f64 },
}

/// Trap frequencies in both conventions (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapFrequencies {
    pub scaled: [f64; 3],
    pub physical: [f64; 3],
}

impl TrapFrequencies {
    pub fn get(&self, mode: FrequencyMode) -> [f64; 3] {
        match mode {
            FrequencyMode::Scaled => self.scaled,
            FrequencyMode::Physical => self.physical,
        }
    }
}

/// A located field minimum and its harmonic characterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapSite {
    /// Centre (x, y, z) in m; z is absolute (film top at z = τ).
    pub center: [f64; 3],
    /// Height of the minimum above the film top (m).
    pub d_min: f64,
    /// |B| at the centre (T).
    pub b_min: f64,
    /// (∂²B̃/∂x², ∂²B̃/∂y², ∂²B̃/∂z²) with B̃ = √(B² + B_off²) (T/m²).
    pub curvature: [f64; 3],
    /// Offset B_off used for the curvatures (T).
    pub curvature_offset: f64,
    pub frequencies: TrapFrequencies,
    /// ‖∇|B|²‖ at the centre (T²/m).
    pub stationarity: f64,
    /// True when located at a fixed height because the minimum is
    /// degenerate along z.
    pub height_constrained: bool,
    /// Barrier ΔB to the +x neighbour (T), once characterized.
    pub barrier: Option<f64>,
    /// Depth Λ (K), once characterized.
    pub depth: Option<f64>,
    pub warnings: Vec<TrapWarning>,
}

impl TrapSite {
    pub fn center(&self) -> Vector3<f64> {
        Vector3::from(self.center)
    }

    /// This site moved by `shift`; all other properties are lattice
    /// invariant.
    pub fn translated(&self, shift: Vector3<f64>) -> TrapSite {
        let mut out = self.clone();
        out.center = (self.center() + shift).into();
        out
    }
}

/// ω_k for the given curvatures (T/m²).
///
/// Scaled mode: ω_k = (β/2π)·√(μ_B g_F m_F ∂²B/∂k²).
/// Physical mode: ω_k = √(μ_B g_F m_F (∂²B/∂k²) / M).
pub fn trap_frequencies(
    curvature: [f64; 3],
    species: &AtomSpecies,
    beta: f64,
    mode: FrequencyMode,
) -> Result<[f64; 3]> {
    let mu = species.magnetic_moment();
    let mut out = [0.0; 3];
    for (w, &c) in out.iter_mut().zip(&curvature) {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::NonPositive {
                what: "trap curvature",
                value: c,
            });
        }
        *w = match mode {
            FrequencyMode::Scaled => beta / TAU * (mu * c).sqrt(),
            FrequencyMode::Physical => (mu * c / species.mass).sqrt(),
        };
    }
    Ok(out)
}

/// Λ = μ_B g_F m_F ΔB / k_B (K).
pub fn trap_depth(delta_b: f64, species: &AtomSpecies) -> Result<f64> {
    if !(delta_b >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "barrier height must be >= 0, got {delta_b}"
        )));
    }
    Ok(species.magnetic_moment() * delta_b / BOLTZMANN)
}

/// Maps lattice phase coordinates q = (βx, βy, β(z − τ)) to positions.
struct PhaseFrame {
    beta: f64,
    film_top: f64,
}

impl PhaseFrame {
    fn position(&self, q: &[f64]) -> Vector3<f64> {
        Vector3::new(
            q[0] / self.beta,
            q[1] / self.beta,
            self.film_top + q[2] / self.beta,
        )
    }

    fn phase(&self, p: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(
            p.x * self.beta,
            p.y * self.beta,
            (p.z - self.film_top) * self.beta,
        )
    }
}

struct Locator<'a> {
    field: LatticeField,
    frame: PhaseFrame,
    norm: f64,
    species: &'a AtomSpecies,
    settings: &'a AnalysisSettings,
}

impl<'a> Locator<'a> {
    fn new(
        lattice: &LatticeConfig,
        species: &'a AtomSpecies,
        settings: &'a AnalysisSettings,
    ) -> Result<Self> {
        let field = LatticeField::new(lattice)?;
        let b = field.bias().norm();
        let norm = if b > 0.0 {
            b * b
        } else {
            field.b_ref().powi(2)
        };
        Ok(Locator {
            frame: PhaseFrame {
                beta: field.beta(),
                film_top: field.film_top(),
            },
            field,
            norm,
            species,
            settings,
        })
    }

    /// |B|²/norm and its phase-space gradient, or `None` off the domain.
    fn objective(&self, q: &Vector3<f64>) -> Option<(f64, Vector3<f64>)> {
        if !(0.0..=MAX_PHASE_HEIGHT).contains(&q.z) {
            return None;
        }
        let p = self.frame.position(q.as_slice());
        let (r, g) = self.field.squared_magnitude_with_gradient(&p).ok()?;
        Some((r / self.norm, g / (self.frame.beta * self.norm)))
    }

    fn phase_hessian(&self, q: &Vector3<f64>) -> Result<Matrix3<f64>> {
        let h = 1e-5;
        let mut m = Matrix3::zeros();
        for k in 0..3 {
            let mut plus = *q;
            let mut minus = *q;
            plus[k] += h;
            // one-sided at the film surface
            minus[k] -= if k == 2 && q.z < h { 0.0 } else { h };
            let step = plus[k] - minus[k];
            let gp = self.objective(&plus).ok_or(Error::OutsideDomain {
                z: self.frame.position(plus.as_slice()).z,
                film_top: self.frame.film_top,
            })?;
            let gm = self.objective(&minus).ok_or(Error::OutsideDomain {
                z: self.frame.position(minus.as_slice()).z,
                film_top: self.frame.film_top,
            })?;
            m.set_column(k, &((gp.1 - gm.1) / step));
        }
        Ok((m + m.transpose()) * 0.5)
    }

    /// A few Newton steps on the analytic gradient; BFGS stalls at the
    /// rounding floor of |B|² well before the gradient does. `dims` = 2 keeps
    /// z fixed.
    fn polish(&self, mut q: Vector3<f64>, dims: usize) -> Vector3<f64> {
        let grad = |q: &Vector3<f64>| {
            self.objective(q).map(|(_, g)| {
                if dims == 2 {
                    Vector3::new(g.x, g.y, 0.0)
                } else {
                    g
                }
            })
        };
        let Some(mut g) = grad(&q) else { return q };
        for _ in 0..4 {
            let Ok(mut h) = self.phase_hessian(&q) else {
                break;
            };
            if dims == 2 {
                h.fixed_view_mut::<1, 3>(2, 0).fill(0.0);
                h.fixed_view_mut::<3, 1>(0, 2).fill(0.0);
                h[(2, 2)] = 1.0;
            }
            let Some(step) = h.lu().solve(&(-g)) else {
                break;
            };
            let trial = q + step;
            match grad(&trial) {
                Some(gt) if gt.norm() < g.norm() => {
                    q = trial;
                    g = gt;
                }
                _ => break,
            }
        }
        q
    }

    fn require_stationary(&self, q: &Vector3<f64>, dims: usize, iterations: usize) -> Result<()> {
        let g = self
            .objective(q)
            .map(|(_, g)| g)
            .unwrap_or(Vector3::repeat(f64::NAN));
        let norm = if dims == 2 { g.xy().norm() } else { g.norm() };
        if norm <= GRADIENT_TOLERANCE {
            Ok(())
        } else {
            Err(Error::NoConvergence {
                iterations,
                gradient_norm: norm,
            })
        }
    }

    fn check_nondegenerate(eigen: &[f64], what: &str) -> Result<()> {
        let max = eigen.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = eigen.iter().cloned().fold(f64::INFINITY, f64::min);
        if max <= 0.0 || min < -DEGENERACY_RATIO * max {
            return Err(Error::NotAMinimum {
                curvature: [
                    eigen[0],
                    eigen.get(1).copied().unwrap_or(0.0),
                    eigen.get(2).copied().unwrap_or(0.0),
                ],
            });
        }
        if min <= DEGENERACY_RATIO * max {
            return Err(Error::DegenerateMinimum {
                reason: format!(
                    "flat direction in |B|^2 ({what} eigenvalue ratio {:.2e})",
                    min / max
                ),
            });
        }
        Ok(())
    }

    fn locate_3d(&self, seed: &Vector3<f64>) -> Result<TrapSite> {
        if self.field.bias().norm() == 0.0 {
            return Err(Error::DegenerateMinimum {
                reason:
                    "zero bias: the field only decays along z, the minimum has no z confinement"
                        .into(),
            });
        }
        let q0 = self.frame.phase(seed);
        if self.objective(&q0).is_none() {
            return Err(Error::OutsideDomain {
                z: seed.z,
                film_top: self.frame.film_top,
            });
        }
        let f = |q: &DVector<f64>| {
            self.objective(&Vector3::new(q[0], q[1], q[2]))
                .map(|(v, g)| (v, DVector::from_column_slice(g.as_slice())))
        };
        let opts = MinimizeOptions {
            gradient_tolerance: GRADIENT_TOLERANCE,
            ..MinimizeOptions::default()
        };
        let min = minimize(f, DVector::from_column_slice(q0.as_slice()), opts)?;
        let q = self.polish(Vector3::new(min.x[0], min.x[1], min.x[2]), 3);
        self.require_stationary(&q, 3, min.iterations)?;
        let hess = self.phase_hessian(&q)?;
        let eig = hess.symmetric_eigenvalues();
        Self::check_nondegenerate(eig.as_slice(), "3D")?;
        self.characterize(&q, false)
    }

    fn locate_at_height(&self, seed_xy: (f64, f64), height: f64) -> Result<TrapSite> {
        let qz = height * self.frame.beta;
        let f = |q: &DVector<f64>| {
            self.objective(&Vector3::new(q[0], q[1], qz))
                .map(|(v, g)| (v, DVector::from_vec(vec![g.x, g.y])))
        };
        let opts = MinimizeOptions {
            gradient_tolerance: GRADIENT_TOLERANCE,
            ..MinimizeOptions::default()
        };
        let start = DVector::from_vec(vec![
            seed_xy.0 * self.frame.beta,
            seed_xy.1 * self.frame.beta,
        ]);
        let min = minimize(f, start, opts)?;
        let q = self.polish(Vector3::new(min.x[0], min.x[1], qz), 2);
        self.require_stationary(&q, 2, min.iterations)?;
        let h3 = self.phase_hessian(&q)?;
        let h2 = Matrix2::new(h3[(0, 0)], h3[(0, 1)], h3[(1, 0)], h3[(1, 1)]);
        let eig = h2.symmetric_eigenvalues();
        Self::check_nondegenerate(eig.as_slice(), "in-plane")?;
        let mut site = self.characterize(&q, true)?;
        site.warnings
            .push(TrapWarning::HeightConstrained { height });
        Ok(site)
    }

    fn characterize(&self, q: &Vector3<f64>, height_constrained: bool) -> Result<TrapSite> {
        let p = self.frame.position(q.as_slice());
        let (r, stationarity) = self.field.squared_magnitude_with_gradient(&p)?;
        let b_min = r.sqrt();
        let stationarity = if height_constrained {
            stationarity.xy().norm()
        } else {
            stationarity.norm()
        };
        let offset = self.settings.curvature_offset;
        let reg = RegularizedField::new(&self.field, offset);
        let curv = field_hessian_diag(&reg, &p)?;
        let curvature: [f64; 3] = curv.into();
        if height_constrained && curvature[0] > 0.0 && curvature[1] > 0.0 && !(curvature[2] > 0.0) {
            return Err(Error::DegenerateMinimum {
                reason: format!(
                    "no z confinement at the constrained height (z curvature {:.3e} T/m^2)",
                    curvature[2]
                ),
            });
        }
        if curvature.iter().any(|c| !(*c > 0.0)) {
            return Err(Error::NotAMinimum { curvature });
        }
        let frequencies = TrapFrequencies {
            scaled: trap_frequencies(
                curvature,
                self.species,
                self.frame.beta,
                FrequencyMode::Scaled,
            )?,
            physical: trap_frequencies(
                curvature,
                self.species,
                self.frame.beta,
                FrequencyMode::Physical,
            )?,
        };
        let mut warnings = Vec::new();
        if b_min < self.settings.majorana_threshold {
            warnings.push(TrapWarning::WeakField {
                b_min,
                threshold: self.settings.majorana_threshold,
            });
        }
        let asym = (curvature[0] - curvature[1]).abs() / curvature[0];
        if asym > CURVATURE_SYMMETRY_TOLERANCE {
            warnings.push(TrapWarning::CurvatureAsymmetry { relative: asym });
        }
        Ok(TrapSite {
            center: p.into(),
            d_min: p.z - self.frame.film_top,
            b_min,
            curvature,
            curvature_offset: offset,
            frequencies,
            stationarity,
            height_constrained,
            barrier: None,
            depth: None,
            warnings,
        })
    }

    fn default_seed(&self) -> Vector3<f64> {
        const N: usize = 24;
        let mut best = (f64::INFINITY, Vector3::zeros());
        for k in 0..=32 {
            let qz = 0.25 * k as f64;
            for j in 0..N {
                for i in 0..N {
                    let q = Vector3::new(TAU * i as f64 / N as f64, TAU * j as f64 / N as f64, qz);
                    if let Some((v, _)) = self.objective(&q) {
                        if v < best.0 {
                            best = (v, q);
                        }
                    }
                }
            }
        }
        self.frame.position(best.1.as_slice())
    }

    fn default_seed_at_height(&self, height: f64) -> (f64, f64) {
        const N: usize = 48;
        let qz = height * self.frame.beta;
        let mut best = (f64::INFINITY, (0.0, 0.0));
        for j in 0..N {
            for i in 0..N {
                let (qx, qy) = (TAU * i as f64 / N as f64, TAU * j as f64 / N as f64);
                if let Some((v, _)) = self.objective(&Vector3::new(qx, qy, qz)) {
                    if v < best.0 {
                        best = (v, (qx / self.frame.beta, qy / self.frame.beta));
                    }
                }
            }
        }
        best.1
    }
}

/// Coarse search over one unit cell for the lowest |B|, used as a seed.
pub fn default_seed(run: &RunConfig) -> Result<Vector3<f64>> {
    Ok(Locator::new(&run.lattice, &run.species, &run.settings)?.default_seed())
}

/// Converges from `seed` to a local minimum of |B|² and characterizes it.
/// The returned site has no depth yet; see [`characterize_depth`].
pub fn locate_minimum(run: &RunConfig, seed: &Vector3<f64>) -> Result<TrapSite> {
    Locator::new(&run.lattice, &run.species, &run.settings)?.locate_3d(seed)
}

/// Minimum of |B|² in the plane at `height` above the film, seeded at
/// `seed_xy` (m).
pub fn locate_at_height(run: &RunConfig, seed_xy: (f64, f64), height: f64) -> Result<TrapSite> {
    Locator::new(&run.lattice, &run.species, &run.settings)?.locate_at_height(seed_xy, height)
}

/// Locates the site of the unit cell nearest the origin cell. When the
/// minimum is degenerate along z and `allow_fallback` is set, the site is
/// located in the plane at the configured fallback height instead.
pub fn locate_site(run: &RunConfig, allow_fallback: bool) -> Result<TrapSite> {
    let loc = Locator::new(&run.lattice, &run.species, &run.settings)?;
    match loc.locate_3d(&loc.default_seed()) {
        Err(Error::DegenerateMinimum { .. }) if allow_fallback => {
            let h = run.fallback_height();
            loc.locate_at_height(loc.default_seed_at_height(h), h)
        }
        other => other,
    }
}

/// Barrier between two sites along the straight in-plane path joining them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub from: [f64; 3],
    pub to: [f64; 3],
    /// Largest z-relaxed |B| along the path (T).
    pub b_max: f64,
    /// B_min of the starting site (T).
    pub b_min: f64,
    /// ΔB = B_max − B_min (T).
    pub delta_b: f64,
    /// Path parameter in [0, 1] of the maximum.
    pub argmax: f64,
    /// Location of the maximum; z is `None` when the relaxed minimum lies at
    /// infinite height (|B| → |b|).
    pub saddle: [Option<f64>; 3],
    pub path_samples: usize,
}

/// Minimum of |B| over z ≥ τ at fixed (x, y). Returns (|B|, z) with z =
/// `None` for the limit z → ∞.
///
/// |B|² is a quadratic in the lattice amplitude A = B_ref e^{−β(z−τ)} ∈
/// (0, B_ref], so the relaxation is exact.
pub fn relaxed_magnitude(field: &LatticeField, x: f64, y: f64) -> (f64, Option<f64>) {
    let (q2, q1, q0) = field.amplitude_polynomial(x, y);
    let a_max = field.b_ref();
    let value = |a: f64| (q2 * a * a + q1 * a + q0).max(0.0);
    let a_star = if q2 > 0.0 {
        (-q1 / (2.0 * q2)).clamp(0.0, a_max)
    } else if q1 < 0.0 {
        a_max
    } else {
        0.0
    };
    // A = 0 is the z → ∞ limit; compare with the film surface end too
    let candidates = [a_star, a_max];
    let (a, r) = candidates
        .iter()
        .map(|&a| (a, value(a)))
        .fold(
            (0.0, value(0.0)),
            |best, c| if c.1 < best.1 { c } else { best },
        );
    let z = (a > 0.0).then(|| field.height_for_amplitude(a));
    (r.sqrt(), z)
}

/// ΔB between `site_a` and `site_b`.
pub fn barrier_height(
    lattice: &LatticeConfig,
    site_a: &TrapSite,
    site_b: &TrapSite,
) -> Result<BarrierReport> {
    let field = LatticeField::new(lattice)?;
    let a = site_a.center();
    let b = site_b.center();
    let sep = (b - a).xy().norm();
    let limit = 1.5 * lattice.period();
    if sep > limit {
        return Err(Error::NonAdjacentSites {
            separation: sep,
            limit,
        });
    }
    let base = BarrierReport {
        from: site_a.center,
        to: site_b.center,
        b_max: site_a.b_min,
        b_min: site_a.b_min,
        delta_b: 0.0,
        argmax: 0.0,
        saddle: [Some(a.x), Some(a.y), Some(a.z)],
        path_samples: BARRIER_PATH_SAMPLES,
    };
    if sep == 0.0 {
        return Ok(base);
    }
    let at = |t: f64| {
        let p = a + (b - a) * t;
        relaxed_magnitude(&field, p.x, p.y).0
    };
    let n = BARRIER_PATH_SAMPLES;
    let (mut i_best, mut v_best) = (0, f64::NEG_INFINITY);
    for i in 0..n {
        let v = at(i as f64 / (n - 1) as f64);
        if v > v_best {
            i_best = i;
            v_best = v;
        }
    }
    // golden-section refinement inside the bracketing samples
    let h = 1.0 / (n - 1) as f64;
    let (mut lo, mut hi) = (
        ((i_best as f64) - 1.0).max(0.0) * h,
        ((i_best as f64) + 1.0).min((n - 1) as f64) * h,
    );
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - invphi * (hi - lo);
    let mut d = lo + invphi * (hi - lo);
    let (mut fc, mut fd) = (at(c), at(d));
    while hi - lo > 1e-12 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - invphi * (hi - lo);
            fc = at(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + invphi * (hi - lo);
            fd = at(d);
        }
    }
    let t_ref = 0.5 * (lo + hi);
    let (t_star, b_path) = if at(t_ref) > v_best {
        (t_ref, at(t_ref))
    } else {
        (i_best as f64 * h, v_best)
    };
    let p = a + (b - a) * t_star;
    let (_, z) = relaxed_magnitude(&field, p.x, p.y);
    let b_max = b_path.max(site_a.b_min);
    Ok(BarrierReport {
        b_max,
        delta_b: b_max - site_a.b_min,
        argmax: t_star,
        saddle: [Some(p.x), Some(p.y), z],
        ..base
    })
}

/// Fills `barrier` and `depth` using the +x neighbour one period away.
pub fn characterize_depth(run: &RunConfig, site: &mut TrapSite) -> Result<BarrierReport> {
    let neighbour = site.translated(Vector3::new(run.lattice.period(), 0.0, 0.0));
    let report = barrier_height(&run.lattice, site, &neighbour)?;
    site.barrier = Some(report.delta_b);
    site.depth = Some(trap_depth(report.delta_b, &run.species)?);
    Ok(report)
}

/// Which bias component a scan varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasAxis {
    X,
    Y,
    Z,
}

impl BiasAxis {
    pub fn index(self) -> usize {
        match self {
            BiasAxis::X => 0,
            BiasAxis::Y => 1,
            BiasAxis::Z => 2,
        }
    }
}

impl std::str::FromStr for BiasAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" | "bx" => Ok(BiasAxis::X),
            "y" | "by" => Ok(BiasAxis::Y),
            "z" | "bz" => Ok(BiasAxis::Z),
            other => Err(Error::InvalidArgument(format!(
                "unknown bias axis `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    /// Bias value along the scanned axis (T).
    pub bias: f64,
    /// The characterized site, or the failure message for a lost trap.
    pub site: std::result::Result<TrapSite, String>,
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
pub fn scan_values(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| {
                if i + 1 == steps {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (steps - 1) as f64
                }
            })
            .collect(),
    }
}

/// Locates and characterizes the site for each bias value along `axis`
/// (T), warm-starting each search from the previous centre. Failed rows are
/// recorded and the scan continues.
pub fn bias_scan(run: &RunConfig, axis: BiasAxis, values: &[f64]) -> Result<Vec<ScanRow>> {
    let mut rows = Vec::with_capacity(values.len());
    let mut seed: Option<Vector3<f64>> = None;
    for &value in values {
        let mut cfg = run.clone();
        cfg.lattice.bias[axis.index()] = value;
        let loc = Locator::new(&cfg.lattice, &cfg.species, &cfg.settings)?;
        let start = seed.unwrap_or_else(|| loc.default_seed());
        let result = loc.locate_3d(&start).and_then(|mut site| {
            characterize_depth(&cfg, &mut site)?;
            Ok(site)
        });
        match result {
            Ok(site) => {
                seed = Some(site.center());
                rows.push(ScanRow {
                    bias: value,
                    site: Ok(site),
                });
            }
            Err(e) => rows.push(ScanRow {
                bias: value,
                site: Err(e.to_string()),
            }),
        }
    }
    Ok(rows)
}

/// Closed-form trap height for a pure z bias b > 0:
/// d_min = ln(2B_ref/b)/β, valid while 0 < b < 2B_ref.
pub fn z_bias_trap_height(lattice: &LatticeConfig, bz: f64) -> Option<f64> {
    let rf = lattice.reference_field();
    (bz > 0.0 && bz < 2.0 * rf.b_ref).then(|| (2.0 * rf.b_ref / bz).ln() / rf.beta)
}

pub const TRAP_COLUMNS: &str = "status,x_um,y_um,z_um,d_min_um,B_min_G,curv_x_T_per_m2,curv_y_T_per_m2,curv_z_T_per_m2,omega_x_rad_s,omega_y_rad_s,omega_z_rad_s,omega_phys_x_rad_s,omega_phys_y_rad_s,omega_phys_z_rad_s,delta_B_G,depth_uK";

/// The TRAP_COLUMNS fields for one site (or a failure placeholder).
pub fn trap_csv_fields(site: &std::result::Result<TrapSite, String>) -> Vec<String> {
    match site {
        Ok(s) => {
            let mut f = vec![if s.height_constrained {
                "height_constrained"
            } else {
                "ok"
            }
            .to_string()];
            f.extend(s.center.iter().map(|c| csv_number(units::m_to_um(*c))));
            f.push(csv_number(units::m_to_um(s.d_min)));
            f.push(csv_number(units::tesla_to_gauss(s.b_min)));
            f.extend(s.curvature.iter().map(|c| csv_number(*c)));
            f.extend(s.frequencies.scaled.iter().map(|w| csv_number(*w)));
            f.extend(s.frequencies.physical.iter().map(|w| csv_number(*w)));
            f.push(
                s.barrier
                    .map_or("nan".into(), |b| csv_number(units::tesla_to_gauss(b))),
            );
            f.push(
                s.depth
                    .map_or("nan".into(), |d| csv_number(d / units::MICROKELVIN)),
            );
            f
        }
        Err(_) => {
            let mut f = vec!["lost".to_string()];
            f.extend(std::iter::repeat_n(
                "nan".to_string(),
                TRAP_COLUMNS.split(',').count() - 1,
            ));
            f
        }
    }
}

/// Scan table with a leading `bias_G` column. With `closed_form`, a last
/// column carries ln(2B_ref/b)/β for each bias (pure z-bias scans).
pub fn scan_csv(rows: &[ScanRow], closed_form: Option<&LatticeConfig>) -> String {
    let mut out = format!("bias_G,{TRAP_COLUMNS}");
    if closed_form.is_some() {
        out.push_str(",d_min_closed_form_um");
    }
    out.push('\n');
    for row in rows {
        let mut fields = vec![csv_number(units::tesla_to_gauss(row.bias))];
        fields.extend(trap_csv_fields(&row.site));
        if let Some(lat) = closed_form {
            fields.push(
                z_bias_trap_height(lat, row.bias)
                    .map_or("nan".into(), |d| csv_number(units::m_to_um(d))),
            );
        }
        out.push_str(&csv_row(&fields));
        out.push('\n');
    }
    out
}

/// Closed-form position of the z-bias trap centre in phase coordinates:
/// (π, π) mod 2π in-plane.
pub fn z_bias_center_phase() -> (f64, f64) {
    (PI, PI)
}
