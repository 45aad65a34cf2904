//! Small dense minimizers for the trap locator: BFGS with backtracking line
//! search, falling back to Nelder–Mead when the line search stalls.
//!
//! Objectives return `None` outside their domain; both methods treat that
//! as +∞.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub(crate) struct MinimizeOptions {
    pub max_iterations: usize,
    /// Converged once ‖∇f‖ falls below this.
    pub gradient_tolerance: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            max_iterations: 500,
            gradient_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Minimum {
    /// Best point reached, converged or not.
    pub x: DVector<f64>,
    #[allow(dead_code)] // read by the tests; callers re-check at their own tolerance
    pub gradient_norm: f64,
    pub iterations: usize,
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

pub(crate) fn minimize<F>(f: F, x0: DVector<f64>, opts: MinimizeOptions) -> Result<Minimum>
where
    F: Fn(&DVector<f64>) -> Option<(f64, DVector<f64>)>,
{
    let n = x0.len();
    let (mut fx, mut g) = f(&x0).ok_or_else(|| {
        Error::InvalidArgument("minimizer started outside the objective's domain".into())
    })?;
    let mut x = x0;
    let mut h_inv = DMatrix::<f64>::identity(n, n);
    let mut used_fallback = false;
    let mut first_step = true;

    for iter in 0..opts.max_iterations {
        let gnorm = g.norm();
        if gnorm <= opts.gradient_tolerance {
            return Ok(Minimum {
                x,
                gradient_norm: gnorm,
                iterations: iter,
            });
        }
        let mut d = -(&h_inv * &g);
        if g.dot(&d) >= 0.0 {
            h_inv = DMatrix::identity(n, n);
            d = -g.clone();
        }
        let slope = g.dot(&d);

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial = &x + step * &d;
            if let Some((ft, gt)) = f(&trial) {
                if ft <= fx + ARMIJO * step * slope {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            step *= 0.5;
        }

        let Some((x_new, f_new, g_new)) = accepted else {
            if used_fallback {
                // both methods are stuck; hand back the best point
                return Ok(Minimum {
                    x,
                    gradient_norm: gnorm,
                    iterations: iter,
                });
            }
            used_fallback = true;
            let simplex_size = (1e-3 * x.norm()).max(1e-3);
            let nm = nelder_mead(&f, &x, simplex_size, opts.max_iterations)?;
            let (fv, gv) = f(&nm).expect("Nelder-Mead keeps points in the domain");
            if fv <= fx {
                x = nm;
                fx = fv;
                g = gv;
            }
            h_inv = DMatrix::identity(n, n);
            first_step = true;
            continue;
        };

        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 0.0 {
            if first_step {
                h_inv *= sy / y.dot(&y);
                first_step = false;
            }
            let rho = 1.0 / sy;
            let hy = &h_inv * &y;
            let yhy = y.dot(&hy);
            // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ, expanded
            h_inv += (rho * rho * yhy + rho) * (&s * s.transpose())
                - rho * (&hy * s.transpose() + &s * hy.transpose());
        }
        x = x_new;
        fx = f_new;
        g = g_new;
    }
    Ok(Minimum {
        gradient_norm: g.norm(),
        x,
        iterations: opts.max_iterations,
    })
}

/// Derivative-free Nelder–Mead from `x0` with an initial simplex of edge
/// `size`. Returns the best vertex found.
pub(crate) fn nelder_mead<F>(
    f: &F,
    x0: &DVector<f64>,
    size: f64,
    max_iterations: usize,
) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Option<(f64, DVector<f64>)>,
{
    let value = |p: &DVector<f64>| f(p).map(|(v, _)| v).unwrap_or(f64::INFINITY);
    let n = x0.len();
    let mut simplex: Vec<(DVector<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.clone(), value(x0)));
    if !simplex[0].1.is_finite() {
        return Err(Error::InvalidArgument(
            "Nelder-Mead started outside the domain".into(),
        ));
    }
    for i in 0..n {
        let mut p = x0.clone();
        p[i] += size;
        let mut v = value(&p);
        if !v.is_finite() {
            p[i] = x0[i] - size;
            v = value(&p);
        }
        simplex.push((p, v));
    }

    for _ in 0..max_iterations * 4 {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= 1e-15 * best.abs().max(1e-300) {
            break;
        }
        let centroid = simplex[..n]
            .iter()
            .fold(DVector::zeros(n), |acc, (p, _)| acc + p)
            / n as f64;
        let worst_pt = simplex[n].0.clone();
        let reflected = &centroid + (&centroid - &worst_pt);
        let fr = value(&reflected);
        if fr < best {
            let expanded = &centroid + 2.0 * (&centroid - &worst_pt);
            let fe = value(&expanded);
            simplex[n] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let contracted = if fr < worst {
                &centroid + 0.5 * (&reflected - &centroid)
            } else {
                &centroid + 0.5 * (&worst_pt - &centroid)
            };
            let fc = value(&contracted);
            if fc < worst.min(fr) {
                simplex[n] = (contracted, fc);
            } else {
                let best_pt = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let p = &best_pt + 0.5 * (&vertex.0 - &best_pt);
                    let v = value(&p);
                    *vertex = (p, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(simplex.swap_remove(0).0)
}
