//! Weighted nonlinear least squares (Levenberg-Marquardt) with a parameter
//! covariance estimate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Converged when an accepted step changes the weighted RSS by less than
    /// this fraction.
    pub rel_tol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmFit {
    pub params: Vec<f64>,
    /// Scaled by the reduced chi-square. `None` when `J^T W J` is singular.
    pub covariance: Option<DMatrix<f64>>,
    /// Weighted residual sum of squares.
    pub rss: f64,
    pub iterations: usize,
    pub dof: usize,
}

impl LmFit {
    pub fn std_error(&self, i: usize) -> f64 {
        self.covariance
            .as_ref()
            .map_or(f64::NAN, |c| c[(i, i)].max(0.0).sqrt())
    }

    pub fn reduced_chi2(&self) -> f64 {
        if self.dof == 0 {
            f64::NAN
        } else {
            self.rss / self.dof as f64
        }
    }
}

fn weighted_rss<F: Fn(f64, &[f64]) -> f64>(f: &F, x: &[f64], y: &[f64], w: &[f64], p: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .zip(w)
        .map(|((&xi, &yi), &wi)| wi * (yi - f(xi, p)).powi(2))
        .sum()
}

fn jacobian<F: Fn(f64, &[f64]) -> f64>(f: &F, x: &[f64], p: &[f64]) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(x.len(), p.len());
    let mut pp = p.to_vec();
    for k in 0..p.len() {
        let h = 1e-7 * p[k].abs().max(1e-6);
        pp[k] = p[k] + h;
        let up: Vec<f64> = x.iter().map(|&xi| f(xi, &pp)).collect();
        pp[k] = p[k] - h;
        for (i, &xi) in x.iter().enumerate() {
            jac[(i, k)] = (up[i] - f(xi, &pp)) / (2.0 * h);
        }
        pp[k] = p[k];
    }
    jac
}

/// Minimizes `sum w_i (y_i - f(x_i, p))^2` from `p0`. Weights default to one.
pub fn levenberg_marquardt<F>(
    f: F,
    x: &[f64],
    y: &[f64],
    weights: Option<&[f64]>,
    p0: &[f64],
    opts: LmOptions,
) -> Result<LmFit>
where
    F: Fn(f64, &[f64]) -> f64,
{
    if x.len() != y.len() || weights.is_some_and(|w| w.len() != x.len()) {
        return Err(Error::InvalidArgument("fit inputs have mismatched lengths".into()));
    }
    if x.len() < p0.len() {
        return Err(Error::DegenerateData(format!(
            "{} points for {} parameters",
            x.len(),
            p0.len()
        )));
    }
    let ones = vec![1.0; x.len()];
    let w = weights.unwrap_or(&ones);
    let scale: f64 = y.iter().zip(w).map(|(yi, wi)| wi * yi * yi).sum::<f64>().max(f64::MIN_POSITIVE);

    let mut p = p0.to_vec();
    let mut rss = weighted_rss(&f, x, y, w, &p);
    let mut lambda = 1e-3;
    let mut last_rel_change = f64::INFINITY;
    let mut converged = rss <= 1e-30 * scale;
    let mut iterations = 0;

    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let jac = jacobian(&f, x, &p);
        let resid = DVector::from_iterator(
            x.len(),
            x.iter().zip(y).zip(w).map(|((&xi, &yi), &wi)| wi * (yi - f(xi, &p))),
        );
        let mut jtw = jac.transpose();
        for (i, wi) in w.iter().enumerate() {
            jtw.column_mut(i).scale_mut(*wi);
        }
        let jtj = &jtw * &jac;
        let grad = jac.transpose() * &resid;

        let mut accepted = false;
        for _ in 0..60 {
            let mut a = jtj.clone();
            for k in 0..p.len() {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = a.clone().cholesky().map(|c| c.solve(&grad)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let trial_rss = weighted_rss(&f, x, y, w, &trial);
            if trial_rss.is_finite() && trial_rss <= rss {
                last_rel_change = (rss - trial_rss) / rss.max(f64::MIN_POSITIVE);
                let step_small = step
                    .iter()
                    .zip(&p)
                    .all(|(s, pk)| s.abs() <= 1e-12 * pk.abs().max(1e-12));
                p = trial;
                rss = trial_rss;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if last_rel_change < opts.rel_tol || rss <= 1e-30 * scale || step_small {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No downhill step at any damping: a stationary point.
            converged = true;
        }
    }
    if !converged || !rss.is_finite() {
        return Err(Error::FitNonConvergence {
            iterations,
            rss,
            last_rel_change,
        });
    }

    let dof = x.len() - p.len();
    let jac = jacobian(&f, x, &p);
    let mut jtw = jac.transpose();
    for (i, wi) in w.iter().enumerate() {
        jtw.column_mut(i).scale_mut(*wi);
    }
    let covariance = (&jtw * &jac).try_inverse().map(|inv| {
        let s2 = if dof > 0 { rss / dof as f64 } else { 0.0 };
        inv * s2
    });
    Ok(LmFit {
        params: p,
        covariance,
        rss,
        iterations,
        dof,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exponential_exactly() {
        let f = |x: f64, p: &[f64]| p[0] * p[1].powf(x) + p[2];
        let x: Vec<f64> = (1..=10).map(|k| (1u32 << k) as f64).collect();
        let y: Vec<f64> = x.iter().map(|&xi| f(xi, &[0.5, 0.997, 0.5])).collect();
        let fit = levenberg_marquardt(f, &x, &y, None, &[0.4, 0.99, 0.55], LmOptions::default()).unwrap();
        assert!((fit.params[1] - 0.997).abs() < 1e-9);
        assert!((fit.params[0] - 0.5).abs() < 1e-7);
    }

    #[test]
    fn covariance_matches_linear_regression() {
        // Straight line: the covariance has a closed form.
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, &xi)| 2.0 + 0.5 * xi + if i % 2 == 0 { 0.1 } else { -0.1 })
            .collect();
        let fit = levenberg_marquardt(|x, p| p[0] + p[1] * x, &x, &y, None, &[0.0, 0.0], LmOptions::default()).unwrap();
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
        let s2 = fit.rss / (n - 2.0);
        assert!((fit.std_error(1) - (s2 / sxx).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let r = levenberg_marquardt(|x, p| p[0] * x, &[1.0, 2.0], &[1.0], None, &[1.0], LmOptions::default());
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let x: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|&t| (3.0 * t).sin()).collect();
        let opts = LmOptions { max_iter: 1, rel_tol: 1e-15 };
        let r = levenberg_marquardt(|t, p| (p[0] * t).sin(), &x, &y, None, &[2.5], opts);
        assert!(matches!(r, Err(Error::FitNonConvergence { .. })));
    }
}
