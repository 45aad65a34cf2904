//! Analytic trapping field of the patterned film.
//!
//! With `E = exp(−β(z − τ))`, `c_x = cos βx`, `s_x = sin βx` (same for y) and
//! bias `b = (b_x, b_y, b_z)` the field magnitude is the square root of
//!
//! ```text
//! R = |b|² + 2B_ref²(1 + c_x c_y) E² + 2B_ref E (s_x b_x + s_y b_y + (c_x + c_y) b_z)
//! ```
//!
//! R is exactly `|B_lat + b|²` for the lattice field vector
//! `B_lat = B_ref E (s_x, s_y, c_x + c_y)`; [`LatticeField::field_vector`]
//! exposes that decomposition so callers can cross-check the radicand.
//!
//! Evaluation is restricted to the half space above the film, z ≥ τ.

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::LatticeConfig;
use crate::error::{Error, Result};
use crate::export::{csv_number, csv_row};
use crate::units;

/// Radicands in (−RADICAND_GUARD, 0) are rounding noise and clamp to zero (T²).
pub const RADICAND_GUARD: f64 = 1e-18;

/// Anything that can report a scalar field magnitude and its gradient.
///
/// The lattice field is the main implementor; the curvature code is generic
/// so it can be driven by synthetic fields in tests.
pub trait ScalarField {
    fn magnitude(&self, p: &Vector3<f64>) -> Result<f64>;
    fn gradient(&self, p: &Vector3<f64>) -> Result<Vector3<f64>>;
    /// Distance over which the field changes appreciably near `p` (m).
    fn length_scale(&self, p: &Vector3<f64>) -> f64;
}

/// Analytic field of an infinite lattice with α_h = α_s.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    b_ref: f64,
    beta: f64,
    film_top: f64,
    bias: Vector3<f64>,
}

struct Trig {
    cx: f64,
    sx: f64,
    cy: f64,
    sy: f64,
    envelope: f64,
}

impl LatticeField {
    pub fn new(cfg: &LatticeConfig) -> Result<Self> {
        cfg.validate_analytic()?;
        let rf = cfg.reference_field();
        Ok(LatticeField {
            b_ref: rf.b_ref,
            beta: rf.beta,
            film_top: cfg.film_thickness,
            bias: cfg.bias,
        })
    }

    pub fn b_ref(&self) -> f64 {
        self.b_ref
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn film_top(&self) -> f64 {
        self.film_top
    }

    pub fn bias(&self) -> Vector3<f64> {
        self.bias
    }

    /// Field scale used for relative tolerances: B_ref + |b|.
    pub fn field_scale(&self) -> f64 {
        self.b_ref + self.bias.norm()
    }

    fn check_domain(&self, p: &Vector3<f64>) -> Result<()> {
        if !(p.z >= self.film_top) || !p.x.is_finite() || !p.y.is_finite() {
            return Err(Error::OutsideDomain {
                z: p.z,
                film_top: self.film_top,
            });
        }
        Ok(())
    }

    fn trig(&self, p: &Vector3<f64>) -> Trig {
        let (sx, cx) = (self.beta * p.x).sin_cos();
        let (sy, cy) = (self.beta * p.y).sin_cos();
        Trig {
            cx,
            sx,
            cy,
            sy,
            envelope: (-self.beta * (p.z - self.film_top)).exp(),
        }
    }

    /// The radicand R of the field magnitude, exactly as the closed form is
    /// written (no clamping). T².
    pub fn radicand(&self, p: &Vector3<f64>) -> Result<f64> {
        self.check_domain(p)?;
        let t = self.trig(p);
        let b = &self.bias;
        let br = self.b_ref;
        Ok(b.norm_squared()
            + 2.0 * br * br * (1.0 + t.cx * t.cy) * t.envelope * t.envelope
            + 2.0 * br * t.envelope * (t.sx * b.x + t.sy * b.y + (t.cx + t.cy) * b.z))
    }

    /// ∇R, differentiated by hand. T²/m.
    pub fn radicand_gradient(&self, p: &Vector3<f64>) -> Result<Vector3<f64>> {
        self.check_domain(p)?;
        let t = self.trig(p);
        let b = &self.bias;
        let (br, beta, e) = (self.b_ref, self.beta, t.envelope);
        let quad = 2.0 * br * br * e * e;
        let lin = 2.0 * br * e;
        let cross = t.sx * b.x + t.sy * b.y + (t.cx + t.cy) * b.z;
        Ok(Vector3::new(
            quad * (-beta * t.sx * t.cy) + lin * beta * (t.cx * b.x - t.sx * b.z),
            quad * (-beta * t.cx * t.sy) + lin * beta * (t.cy * b.y - t.sy * b.z),
            -2.0 * beta * quad * (1.0 + t.cx * t.cy) - beta * lin * cross,
        ))
    }

    /// |B|² with the rounding guard applied.
    pub fn magnitude_squared(&self, p: &Vector3<f64>) -> Result<f64> {
        let r = self.radicand(p)?;
        if r >= 0.0 {
            Ok(r)
        } else if r > -RADICAND_GUARD {
            Ok(0.0)
        } else {
            Err(Error::NegativeRadicand { value: r })
        }
    }

    /// Total field vector B_lat + b (T). Independent route to |B|.
    pub fn field_vector(&self, p: &Vector3<f64>) -> Result<Vector3<f64>> {
        self.check_domain(p)?;
        let t = self.trig(p);
        let a = self.b_ref * t.envelope;
        Ok(Vector3::new(a * t.sx, a * t.sy, a * (t.cx + t.cy)) + self.bias)
    }

    /// |B|² and its gradient from the field vector v = B_lat + b, as
    /// (|v|², 2 Jᵀv). Near a field zero this keeps full relative accuracy,
    /// where the expanded radicand cancels O(|b|²) terms.
    pub fn squared_magnitude_with_gradient(&self, p: &Vector3<f64>) -> Result<(f64, Vector3<f64>)> {
        self.check_domain(p)?;
        let t = self.trig(p);
        let a = self.b_ref * t.envelope;
        let lat = Vector3::new(a * t.sx, a * t.sy, a * (t.cx + t.cy));
        let v = lat + self.bias;
        let ab = a * self.beta;
        let grad = Vector3::new(
            ab * (t.cx * v.x - t.sx * v.z),
            ab * (t.cy * v.y - t.sy * v.z),
            -self.beta * lat.dot(&v),
        ) * 2.0;
        Ok((v.norm_squared(), grad))
    }

    /// Coefficients (q2, q1, q0) with R = q2·A² + q1·A + q0 where
    /// A = B_ref·exp(−β(z − τ)) is the height-dependent lattice amplitude.
    pub fn amplitude_polynomial(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let (sx, cx) = (self.beta * x).sin_cos();
        let (sy, cy) = (self.beta * y).sin_cos();
        let b = &self.bias;
        (
            2.0 * (1.0 + cx * cy),
            2.0 * (sx * b.x + sy * b.y + (cx + cy) * b.z),
            b.norm_squared(),
        )
    }

    /// Inverse of the amplitude map: the z at which the lattice amplitude
    /// equals `amplitude` (0 < amplitude ≤ B_ref).
    pub fn height_for_amplitude(&self, amplitude: f64) -> f64 {
        self.film_top + (self.b_ref / amplitude).ln() / self.beta
    }

    fn singular_threshold(&self) -> f64 {
        1e-12 * self.field_scale()
    }
}

impl ScalarField for LatticeField {
    fn magnitude(&self, p: &Vector3<f64>) -> Result<f64> {
        Ok(self.magnitude_squared(p)?.sqrt())
    }

    fn gradient(&self, p: &Vector3<f64>) -> Result<Vector3<f64>> {
        let b = self.magnitude(p)?;
        if b <= self.singular_threshold() {
            return Err(Error::SingularPoint { magnitude: b });
        }
        Ok(self.radicand_gradient(p)? / (2.0 * b))
    }

    fn length_scale(&self, p: &Vector3<f64>) -> f64 {
        regularized_length_scale(self, p, 0.0)
    }
}

/// ∇|B_lat| bounds how fast |B| can change; near a zero the relevant length
/// is |B|/|∇B_lat|, otherwise the lattice length 1/β.
fn regularized_length_scale(field: &LatticeField, p: &Vector3<f64>, offset: f64) -> f64 {
    let lattice = 1.0 / field.beta;
    let (Ok(v), Ok(r)) = (field.field_vector(p), field.magnitude_squared(p)) else {
        return lattice;
    };
    let lat_amp = (v - field.bias).norm();
    // |∂_k B_lat| ≤ √2 β |B_lat|-ish; use the envelope amplitude to stay finite at zeros
    let t = field.trig(p);
    let grad_scale = field.beta * (field.b_ref * t.envelope).max(lat_amp) * 2.0;
    let b = (r + offset * offset).sqrt();
    if grad_scale <= 0.0 {
        lattice
    } else {
        lattice.min(b / grad_scale)
    }
}

/// √(B² + B_off²): the lattice field with a constant transverse offset, which
/// removes the cusp of |B| at field zeros. With `offset = 0` it reproduces
/// the bare magnitude.
#[derive(Debug, Clone)]
pub struct RegularizedField<'a> {
    field: &'a LatticeField,
    offset: f64,
}

impl<'a> RegularizedField<'a> {
    pub fn new(field: &'a LatticeField, offset: f64) -> Self {
        RegularizedField { field, offset }
    }
}

impl ScalarField for RegularizedField<'_> {
    fn magnitude(&self, p: &Vector3<f64>) -> Result<f64> {
        Ok((self.field.magnitude_squared(p)? + self.offset * self.offset).sqrt())
    }

    fn gradient(&self, p: &Vector3<f64>) -> Result<Vector3<f64>> {
        let b = self.magnitude(p)?;
        if b <= self.field.singular_threshold() {
            return Err(Error::SingularPoint { magnitude: b });
        }
        Ok(self.field.radicand_gradient(p)? / (2.0 * b))
    }

    fn length_scale(&self, p: &Vector3<f64>) -> f64 {
        regularized_length_scale(self.field, p, self.offset)
    }
}

/// |B| at `p` for configuration `cfg`.
pub fn field_magnitude(cfg: &LatticeConfig, p: &Vector3<f64>) -> Result<f64> {
    LatticeField::new(cfg)?.magnitude(p)
}

/// Analytic ∇|B| at `p`. Fails at field zeros.
pub fn field_gradient(cfg: &LatticeConfig, p: &Vector3<f64>) -> Result<Vector3<f64>> {
    LatticeField::new(cfg)?.gradient(p)
}

/// Relative step of the first central difference in [`field_hessian_diag`].
const HESSIAN_STEP: f64 = 0.05;
/// Number of step halvings in the Richardson table.
const RICHARDSON_LEVELS: usize = 4;

/// Diagonal second derivatives (∂²F/∂x², ∂²F/∂y², ∂²F/∂z²) by Richardson
/// extrapolation of central differences of the analytic gradient.
pub fn field_hessian_diag<F: ScalarField + ?Sized>(
    field: &F,
    p: &Vector3<f64>,
) -> Result<Vector3<f64>> {
    hessian_diag_with_step(field, p, HESSIAN_STEP * field.length_scale(p))
}

/// As [`field_hessian_diag`] with an explicit initial step (m).
pub fn hessian_diag_with_step<F: ScalarField + ?Sized>(
    field: &F,
    p: &Vector3<f64>,
    h0: f64,
) -> Result<Vector3<f64>> {
    // surface the singular-point error at p itself
    field.gradient(p)?;
    let mut out = Vector3::zeros();
    for axis in 0..3 {
        let mut table = [0.0; RICHARDSON_LEVELS];
        let mut h = h0;
        for entry in table.iter_mut() {
            let mut plus = *p;
            let mut minus = *p;
            plus[axis] += h;
            minus[axis] -= h;
            *entry = (field.gradient(&plus)?[axis] - field.gradient(&minus)?[axis]) / (2.0 * h);
            h *= 0.5;
        }
        // eliminate h², h⁴, h⁶ in turn
        let mut factor = 4.0;
        for level in 1..RICHARDSON_LEVELS {
            for i in (level..RICHARDSON_LEVELS).rev() {
                table[i] = (factor * table[i] - table[i - 1]) / (factor - 1.0);
            }
            factor *= 4.0;
        }
        out[axis] = table[RICHARDSON_LEVELS - 1];
    }
    Ok(out)
}

/// Axis-aligned evaluation plane. The two in-plane axes are (u, v); samples
/// are stored with u varying fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "plane", rename_all = "lowercase")]
pub enum Plane {
    /// u = x, v = y at fixed z (m, absolute).
    Xy { z: f64 },
    /// u = x, v = z at fixed y (m).
    Zx { y: f64 },
    /// u = y, v = z at fixed x (m).
    Yz { x: f64 },
}

impl Plane {
    /// Indices of the (u, v) axes.
    pub fn axes(&self) -> (usize, usize) {
        match self {
            Plane::Xy { .. } => (0, 1),
            Plane::Zx { .. } => (0, 2),
            Plane::Yz { .. } => (1, 2),
        }
    }

    fn fixed(&self) -> (usize, f64) {
        match *self {
            Plane::Xy { z } => (2, z),
            Plane::Zx { y } => (1, y),
            Plane::Yz { x } => (0, x),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Plane::Xy { .. } => "xy",
            Plane::Zx { .. } => "zx",
            Plane::Yz { .. } => "yz",
        }
    }
}

/// Description of a rectangular sampling grid in one plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceSpec {
    pub plane: Plane,
    /// Inclusive range along u (m).
    pub u_range: (f64, f64),
    /// Inclusive range along v (m).
    pub v_range: (f64, f64),
    /// Samples along (u, v), each ≥ 2.
    pub resolution: (usize, usize),
}

impl SliceSpec {
    pub fn validate(&self, film_top: f64) -> Result<()> {
        let (nu, nv) = self.resolution;
        if nu < 2 || nv < 2 {
            return Err(Error::InvalidArgument(format!(
                "slice resolution must be at least 2 per axis, got {nu}x{nv}"
            )));
        }
        for (lo, hi) in [self.u_range, self.v_range] {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidArgument(format!(
                    "invalid axis range [{lo}, {hi}]"
                )));
            }
        }
        let (u_axis, v_axis) = self.plane.axes();
        let (fixed_axis, fixed) = self.plane.fixed();
        let z_min = if fixed_axis == 2 {
            fixed
        } else if v_axis == 2 {
            self.v_range.0
        } else {
            debug_assert_ne!(u_axis, 2);
            f64::INFINITY
        };
        if z_min < film_top {
            return Err(Error::OutsideDomain { z: z_min, film_top });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.resolution.0 * self.resolution.1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn coordinate(range: (f64, f64), n: usize, i: usize) -> f64 {
        if i + 1 == n {
            range.1
        } else {
            range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
        }
    }

    /// Position of sample `index` (u fastest).
    pub fn position(&self, index: usize) -> Vector3<f64> {
        let (nu, nv) = self.resolution;
        let (i, j) = (index % nu, index / nu);
        let (u_axis, v_axis) = self.plane.axes();
        let (fixed_axis, fixed) = self.plane.fixed();
        let mut p = Vector3::zeros();
        p[u_axis] = Self::coordinate(self.u_range, nu, i);
        p[v_axis] = Self::coordinate(self.v_range, nv, j);
        p[fixed_axis] = fixed;
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldPoint {
    /// (x, y, z) in m.
    pub position: [f64; 3],
    /// |B| in T.
    pub magnitude: f64,
}

/// Dense field magnitudes over a [`SliceSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSlice {
    pub spec: SliceSpec,
    pub samples: Vec<FieldPoint>,
}

/// Rows (fixed v) evaluated together per parallel chunk.
const ROWS_PER_CHUNK: usize = 64;

/// Evaluates the slice chunk by chunk, handing each chunk of complete rows to
/// `sink` in order. Memory use is bounded by the chunk size.
pub fn for_each_slice_chunk<S>(field: &LatticeField, spec: &SliceSpec, mut sink: S) -> Result<()>
where
    S: FnMut(&[FieldPoint]) -> Result<()>,
{
    spec.validate(field.film_top())?;
    let (nu, nv) = spec.resolution;
    let mut row = 0;
    while row < nv {
        let rows = ROWS_PER_CHUNK.min(nv - row);
        let start = row * nu;
        let chunk: Result<Vec<FieldPoint>> = (start..start + rows * nu)
            .into_par_iter()
            .map(|idx| {
                let p = spec.position(idx);
                Ok(FieldPoint {
                    position: p.into(),
                    magnitude: field.magnitude(&p)?,
                })
            })
            .collect();
        sink(&chunk?)?;
        row += rows;
    }
    Ok(())
}

/// Evaluates |B| on every grid point of `spec`.
pub fn field_map_slice(cfg: &LatticeConfig, spec: &SliceSpec) -> Result<GridSlice> {
    let field = LatticeField::new(cfg)?;
    let mut samples = Vec::with_capacity(spec.len());
    for_each_slice_chunk(&field, spec, |chunk| {
        samples.extend_from_slice(chunk);
        Ok(())
    })?;
    Ok(GridSlice {
        spec: spec.clone(),
        samples,
    })
}

pub const SLICE_CSV_HEADER: &str = "x_um,y_um,z_um,B_G";

/// One CSV line per sample, lengths in µm and field in gauss.
pub fn slice_csv_line(pt: &FieldPoint) -> String {
    csv_row(&[
        csv_number(units::m_to_um(pt.position[0])),
        csv_number(units::m_to_um(pt.position[1])),
        csv_number(units::m_to_um(pt.position[2])),
        csv_number(units::tesla_to_gauss(pt.magnitude)),
    ])
}

impl GridSlice {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(48 * (self.samples.len() + 1));
        out.push_str(SLICE_CSV_HEADER);
        out.push('\n');
        for pt in &self.samples {
            out.push_str(&slice_csv_line(pt));
            out.push('\n');
        }
        out
    }

    /// Metadata plus a flat array of |B| in gauss (u fastest).
    pub fn to_json(&self) -> serde_json::Value {
        let (u_axis, v_axis) = self.spec.plane.axes();
        let axis = ["x", "y", "z"];
        let (fixed_axis, fixed) = self.spec.plane.fixed();
        serde_json::json!({
            "plane": self.spec.plane.name(),
            "u_axis": axis[u_axis],
            "v_axis": axis[v_axis],
            "fixed_axis": axis[fixed_axis],
            "fixed_um": units::m_to_um(fixed),
            "u_range_um": [units::m_to_um(self.spec.u_range.0), units::m_to_um(self.spec.u_range.1)],
            "v_range_um": [units::m_to_um(self.spec.v_range.0), units::m_to_um(self.spec.v_range.1)],
            "resolution": [self.spec.resolution.0, self.spec.resolution.1],
            "order": "u fastest",
            "B_G": self.samples.iter().map(|s| units::tesla_to_gauss(s.magnitude)).collect::<Vec<_>>(),
        })
    }
}
