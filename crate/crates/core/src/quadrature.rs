//! Quadrature rules for the mode integrals.
//!
//! Gauss–Hermite integrates ∫ e^{−t²} f(t) dt; the 3D tensor form is used
//! with the Gaussian weight matched to the product of two modes, so the
//! remaining factor is a low-order polynomial and the rule is exact or
//! spectrally accurate. The trapezoid rule on a bounded box handles
//! integrands without a Gaussian envelope.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes and weights for ∫ e^{−t²} f(t) dt ≈ Σ w_i f(t_i).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Rule with `n` nodes, found by Newton iteration on the orthonormal
    /// Hermite recurrence (stable up to a few hundred nodes).
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "Gauss-Hermite rule needs at least one node".into(),
            ));
        }
        let pim4 = PI.powf(-0.25);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        let mut z = 0.0;
        for i in 0..m {
            // initial guesses for the largest roots, then extrapolate inward
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            let mut converged = false;
            for _ in 0..100 {
                let (p1, dp) = hermite_orthonormal(n, z, pim4);
                pp = dp;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 3e-15 * z.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NoConvergence {
                    iterations: 100,
                    gradient_norm: f64::NAN,
                });
            }
            let (_, dp) = hermite_orthonormal(n, z, pim4);
            pp = if dp.is_finite() { dp } else { pp };
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        // ascending order
        nodes.reverse();
        weights.reverse();
        Ok(GaussHermite { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// Orthonormal Hermite value p_n(z) and derivative via the three-term
/// recurrence.
fn hermite_orthonormal(n: usize, z: f64, pim4: f64) -> (f64, f64) {
    let mut p1 = pim4;
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    let dp = (2.0 * n as f64).sqrt() * p2;
    (p1, dp)
}

/// ∫ exp(−Σ_k ((x_k − c_k)/s_k)²) f(x) d³x on the tensor-product rule.
pub fn gaussian_weighted_3d<F>(rule: &GaussHermite, center: [f64; 3], scale: [f64; 3], f: F) -> f64
where
    F: Fn([f64; 3]) -> f64,
{
    let t = rule.nodes();
    let w = rule.weights();
    let mut sum = 0.0;
    for (&ti, &wi) in t.iter().zip(w) {
        let x = center[0] + scale[0] * ti;
        let mut sy = 0.0;
        for (&tj, &wj) in t.iter().zip(w) {
            let y = center[1] + scale[1] * tj;
            let mut sz = 0.0;
            for (&tk, &wk) in t.iter().zip(w) {
                sz += wk * f([x, y, center[2] + scale[2] * tk]);
            }
            sy += wj * sz;
        }
        sum += wi * sy;
    }
    sum * scale[0] * scale[1] * scale[2]
}

/// Composite trapezoid rule for ∫ f over the box `lo..hi` with `points`
/// samples per axis.
pub fn trapezoid_3d<F>(lo: [f64; 3], hi: [f64; 3], points: usize, f: F) -> Result<f64>
where
    F: Fn([f64; 3]) -> f64,
{
    if points < 2 {
        return Err(Error::InvalidArgument(
            "trapezoid rule needs at least 2 points per axis".into(),
        ));
    }
    let h: Vec<f64> = (0..3)
        .map(|k| (hi[k] - lo[k]) / (points - 1) as f64)
        .collect();
    let weight = |i: usize| if i == 0 || i == points - 1 { 0.5 } else { 1.0 };
    let mut sum = 0.0;
    for i in 0..points {
        let x = lo[0] + h[0] * i as f64;
        for j in 0..points {
            let y = lo[1] + h[1] * j as f64;
            for k in 0..points {
                let z = lo[2] + h[2] * k as f64;
                sum += weight(i) * weight(j) * weight(k) * f([x, y, z]);
            }
        }
    }
    Ok(sum * h[0] * h[1] * h[2])
}

/// Which rule the mode integrals use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum QuadratureRule {
    /// Matched-weight Gauss–Hermite with this many nodes per axis.
    GaussHermite { nodes: usize },
    /// Trapezoid on a box of ± `half_width` envelope widths around the
    /// Gaussian centre, `points` samples per axis.
    Trapezoid { points: usize, half_width: f64 },
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule::GaussHermite { nodes: 64 }
    }
}

impl QuadratureRule {
    /// The same rule at half resolution, for the convergence check.
    pub fn coarsened(&self) -> QuadratureRule {
        match *self {
            QuadratureRule::GaussHermite { nodes } => QuadratureRule::GaussHermite {
                nodes: (nodes / 2).max(1),
            },
            QuadratureRule::Trapezoid { points, half_width } => QuadratureRule::Trapezoid {
                points: (points / 2).max(2),
                half_width,
            },
        }
    }

    /// ∫ exp(−Σ((x−c)/s)²) f(x) d³x with this rule.
    pub fn integrate_weighted<F>(&self, center: [f64; 3], scale: [f64; 3], f: F) -> Result<f64>
    where
        F: Fn([f64; 3]) -> f64,
    {
        match *self {
            QuadratureRule::GaussHermite { nodes } => {
                let rule = GaussHermite::new(nodes)?;
                Ok(gaussian_weighted_3d(&rule, center, scale, f))
            }
            QuadratureRule::Trapezoid { points, half_width } => {
                let lo = [0, 1, 2].map(|k| center[k] - half_width * scale[k]);
                let hi = [0, 1, 2].map(|k| center[k] + half_width * scale[k]);
                trapezoid_3d(lo, hi, points, |x| {
                    let e: f64 = (0..3)
                        .map(|k| ((x[k] - center[k]) / scale[k]).powi(2))
                        .sum();
                    (-e).exp() * f(x)
                })
            }
        }
    }
}

/// Relative change allowed between a rule and its coarsened twin.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-8;

/// Integrates with `rule` and with its coarsened twin; fails when they
/// disagree by more than `tolerance` relative (absolute near zero, scaled
/// by `magnitude`).
pub fn integrate_checked<F>(
    rule: QuadratureRule,
    center: [f64; 3],
    scale: [f64; 3],
    magnitude: f64,
    tolerance: f64,
    f: F,
) -> Result<f64>
where
    F: Fn([f64; 3]) -> f64,
{
    let fine = rule.integrate_weighted(center, scale, &f)?;
    let coarse = rule.coarsened().integrate_weighted(center, scale, &f)?;
    let denom = fine.abs().max(magnitude.abs());
    let change = if denom > 0.0 {
        (fine - coarse).abs() / denom
    } else {
        0.0
    };
    if !(change <= tolerance) {
        return Err(Error::QuadratureNotConverged {
            value: fine,
            coarse,
            relative_change: change,
        });
    }
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// ∫ t^{2k} e^{−t²} dt = Γ(k + ½) = (2k−1)!!·√π / 2^k.
    fn even_moment(k: u32) -> f64 {
        let mut v = PI.sqrt();
        for j in 0..k {
            v *= (2 * j + 1) as f64 / 2.0;
        }
        v
    }

    #[test]
    fn exact_for_polynomials() {
        for n in [1, 2, 5, 16, 64, 100] {
            let rule = GaussHermite::new(n).unwrap();
            for k in 0..n as u32 {
                if 2 * k >= 2 * n as u32 {
                    break;
                }
                let got = rule.integrate(|t| t.powi(2 * k as i32));
                assert_relative_eq!(got, even_moment(k), max_relative = 1e-11);
                let odd = rule.integrate(|t| t.powi(2 * k as i32 + 1));
                assert!(
                    odd.abs() < 1e-10 * even_moment(k + 1),
                    "n={n} k={k} odd={odd}"
                );
            }
        }
    }

    #[test]
    fn nodes_sorted_and_symmetric() {
        let rule = GaussHermite::new(64).unwrap();
        assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
        for i in 0..64 {
            assert_relative_eq!(rule.nodes()[i], -rule.nodes()[63 - i], max_relative = 1e-14);
            assert!(rule.weights()[i] > 0.0);
        }
        assert_relative_eq!(
            rule.weights().iter().sum::<f64>(),
            PI.sqrt(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn shifted_gaussian_3d() {
        // ∫ exp(−Σ((x−c)/s)²) x² = π^{3/2} s_x s_y s_z (c_x² + s_x²/2)
        let rule = GaussHermite::new(20).unwrap();
        let c = [0.3, -1.0, 2.0];
        let s = [0.5, 2.0, 1.5];
        let v = gaussian_weighted_3d(&rule, c, s, |x| x[0] * x[0]);
        let expected = PI.powf(1.5) * s[0] * s[1] * s[2] * (c[0] * c[0] + s[0] * s[0] / 2.0);
        assert_relative_eq!(v, expected, max_relative = 1e-13);
    }

    #[test]
    fn trapezoid_agrees_with_hermite() {
        let rule = QuadratureRule::Trapezoid {
            points: 81,
            half_width: 8.0,
        };
        let v = rule
            .integrate_weighted([0.0; 3], [1.0, 0.5, 2.0], |x| 1.0 + x[2] * x[2])
            .unwrap();
        let expected = PI.powf(1.5) * 1.0 * (1.0 + 2.0);
        assert_relative_eq!(v, expected, max_relative = 1e-10);
    }

    #[test]
    fn convergence_check_flags_coarse_rule() {
        let rough = |x: [f64; 3]| (3.0 * x[0]).cos();
        let err = integrate_checked(
            QuadratureRule::GaussHermite { nodes: 8 },
            [0.0; 3],
            [1.0; 3],
            0.0,
            1e-8,
            rough,
        );
        assert!(matches!(err, Err(Error::QuadratureNotConverged { .. })));
        let ok = integrate_checked(
            QuadratureRule::GaussHermite { nodes: 64 },
            [0.0; 3],
            [1.0; 3],
            0.0,
            1e-8,
            rough,
        )
        .unwrap();
        assert_relative_eq!(ok, PI.powf(1.5) * (-2.25f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn zero_nodes_rejected() {
        assert!(GaussHermite::new(0).is_err());
    }
}
