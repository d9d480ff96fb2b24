//! Damped Gauss-Newton (Levenberg-Marquardt) least-squares engine.
//!
//! Works on a generic residual problem so both curve fits (y vs. x data)
//! and structured fits (the Zeeman calibration) share one implementation.
//! Deterministic: identical inputs produce identical iterates.

// Indexed loops mirror the normal-equations algebra more directly than
// iterator chains would.
#![allow(clippy::needless_range_loop)]

use super::models::CurveModel;
use super::{FitError, FitResult, FittedParam, SpectrumSeries};

/// Convergence controls. Defaults implement the documented contract:
/// relative rss change below 1e-10 or step norm below 1e-12, at most 200
/// iterations.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iterations: usize,
    pub rss_relative_tolerance: f64,
    pub step_tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            rss_relative_tolerance: 1e-10,
            step_tolerance: 1e-12,
        }
    }
}

/// A residual-vector problem. `residuals` and `jacobian` return `false`
/// when the parameter point is infeasible (e.g. a domain error); the
/// engine then rejects the trial step and increases damping.
///
/// Jacobian convention: entries are ∂(fitted function)/∂p, so that a
/// first-order residual change is r(p+δ) ≈ r(p) − Jδ.
pub(crate) trait LeastSquaresProblem {
    fn n_residuals(&self) -> usize;
    fn n_params(&self) -> usize;
    fn residuals(&self, params: &[f64], out: &mut [f64]) -> bool;
    fn jacobian(&self, params: &[f64], out: &mut [f64]) -> bool;
}

#[derive(Debug, Clone)]
pub(crate) struct EngineOutput {
    pub params: Vec<f64>,
    /// k×k covariance: (JᵀJ)⁻¹ scaled by rss/(m−k).
    pub covariance: Vec<Vec<f64>>,
    pub rss: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn clamp_into(params: &mut [f64], bounds: Option<&[(f64, f64)]>) {
    if let Some(bounds) = bounds {
        for (p, &(lo, hi)) in params.iter_mut().zip(bounds) {
            *p = p.clamp(lo, hi);
        }
    }
}

fn rss_of(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Solve the k×k system `a·x = rhs` by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot degenerates.
fn solve_linear(a: &mut [Vec<f64>], rhs: &mut [f64]) -> Option<Vec<f64>> {
    let k = rhs.len();
    for col in 0..k {
        let pivot_row = (col..k)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() < f64::MIN_POSITIVE.sqrt() {
            return None;
        }
        a.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for row in (col + 1)..k {
            let factor = a[row][col] / a[col][col];
            for c in col..k {
                a[row][c] -= factor * a[col][c];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let mut acc = rhs[row];
        for col in (row + 1)..k {
            acc -= a[row][col] * x[col];
        }
        x[row] = acc / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Invert a symmetric positive semi-definite k×k matrix by Gauss-Jordan
/// elimination with partial pivoting.
fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let k = a.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter().map(|v| v.abs()))
        .fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return None;
    }
    let mut aug: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..k).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..k {
        let pivot_row = (col..k)
            .max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))
            .unwrap();
        if aug[pivot_row][col].abs() < 1e-14 * scale {
            return None;
        }
        aug.swap(col, pivot_row);
        let pivot = aug[col][col];
        for v in aug[col].iter_mut() {
            *v /= pivot;
        }
        for row in 0..k {
            if row != col {
                let factor = aug[row][col];
                if factor != 0.0 {
                    for c in 0..2 * k {
                        let sub = factor * aug[col][c];
                        aug[row][c] -= sub;
                    }
                }
            }
        }
    }
    Some(aug.into_iter().map(|mut row| row.split_off(k)).collect())
}

/// Column norms of a row-major m×k Jacobian.
fn column_norms(j: &[f64], m: usize, k: usize) -> Vec<f64> {
    let mut norms = vec![0.0; k];
    for row in 0..m {
        for col in 0..k {
            let v = j[row * k + col];
            norms[col] += v * v;
        }
    }
    norms.iter_mut().for_each(|v| *v = v.sqrt());
    norms
}

fn degenerate_columns(norms: &[f64]) -> Vec<usize> {
    let max = norms.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return (0..norms.len()).collect();
    }
    norms
        .iter()
        .enumerate()
        .filter(|(_, &n)| n <= 1e-12 * max)
        .map(|(i, _)| i)
        .collect()
}

pub(crate) fn solve(
    problem: &dyn LeastSquaresProblem,
    init: &[f64],
    bounds: Option<&[(f64, f64)]>,
    param_names: &[String],
    options: &FitOptions,
) -> Result<EngineOutput, FitError> {
    let m = problem.n_residuals();
    let k = problem.n_params();
    assert_eq!(init.len(), k, "init length must match parameter count");
    if m < k + 1 {
        return Err(FitError::TooFewPoints {
            needed: k + 1,
            params: k,
            got: m,
        });
    }
    if let Some(b) = bounds {
        assert_eq!(b.len(), k, "bounds length must match parameter count");
    }

    let mut params = init.to_vec();
    clamp_into(&mut params, bounds);

    let mut residuals = vec![0.0; m];
    if !problem.residuals(&params, &mut residuals) || residuals.iter().any(|v| !v.is_finite()) {
        return Err(FitError::InvalidInput(
            "residuals are not finite at the initial parameters".into(),
        ));
    }
    let mut rss = rss_of(&residuals);

    let mut jac = vec![0.0; m * k];
    let mut trial_residuals = vec![0.0; m];
    let mut mu = 0.0; // initialized from the first JᵀJ diagonal
    let mut growth = 2.0;
    let mut converged = false;
    let mut iterations = 0;

    for iteration in 1..=options.max_iterations {
        iterations = iteration;
        if !problem.jacobian(&params, &mut jac) || jac.iter().any(|v| !v.is_finite()) {
            return Err(FitError::InvalidInput(
                "Jacobian is not finite at the current parameters".into(),
            ));
        }
        // Identifiability is checked once, at the starting point. A column
        // that degenerates mid-iteration (a parameter pinned at a bound)
        // is merely frozen by the damping floor below.
        if iteration == 1 {
            let norms = column_norms(&jac, m, k);
            let degenerate = degenerate_columns(&norms);
            if !degenerate.is_empty() {
                let names: Vec<&str> = degenerate
                    .iter()
                    .map(|&i| param_names.get(i).map(String::as_str).unwrap_or("?"))
                    .collect();
                return Err(FitError::SingularCurvature {
                    param: names.join(", "),
                });
            }
        }

        // Normal equations JᵀJ and gradient Jᵀr.
        let mut jtj = vec![vec![0.0; k]; k];
        let mut jtr = vec![0.0; k];
        for row in 0..m {
            for a in 0..k {
                let ja = jac[row * k + a];
                jtr[a] += ja * residuals[row];
                for b in a..k {
                    jtj[a][b] += ja * jac[row * k + b];
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                jtj[a][b] = jtj[b][a];
            }
        }
        let max_diag = (0..k).map(|i| jtj[i][i]).fold(0.0_f64, f64::max);
        // Marquardt (relative) damping: the diagonal is inflated by a
        // factor (1 + mu), so mu is dimensionless.
        if mu == 0.0 {
            mu = 1e-3;
        }

        // Inner damping loop: grow mu until a step reduces the rss.
        let mut accepted = false;
        loop {
            let mut damped = jtj.clone();
            for i in 0..k {
                // The floor keeps the solve nonsingular when a column
                // vanishes (its gradient entry is then zero too, so the
                // parameter simply does not move).
                damped[i][i] += mu * jtj[i][i].max(1e-12 * max_diag);
            }
            let mut rhs = jtr.clone();
            let step = match solve_linear(&mut damped, &mut rhs) {
                Some(s) => s,
                None => {
                    mu = (mu * growth).max(1e-15);
                    growth *= 2.0;
                    if growth > 1e12 {
                        break;
                    }
                    continue;
                }
            };

            let mut trial = params.clone();
            for i in 0..k {
                trial[i] += step[i];
            }
            clamp_into(&mut trial, bounds);
            let step_norm: f64 = trial
                .iter()
                .zip(&params)
                .map(|(t, p)| (t - p) * (t - p))
                .sum::<f64>()
                .sqrt();
            let param_norm: f64 = params.iter().map(|p| p * p).sum::<f64>().sqrt();
            if step_norm <= options.step_tolerance * (param_norm + options.step_tolerance) {
                converged = true;
                break;
            }

            let feasible = problem.residuals(&trial, &mut trial_residuals)
                && trial_residuals.iter().all(|v| v.is_finite());
            let trial_rss = if feasible {
                rss_of(&trial_residuals)
            } else {
                f64::INFINITY
            };

            if trial_rss < rss {
                // Predicted reduction of the damped quadratic model,
                // δᵀ(μDδ + Jᵀr); convergence requires both the actual and
                // the predicted reduction to be negligible, so heavy
                // damping cannot masquerade as convergence.
                let mut predicted = 0.0;
                for i in 0..k {
                    predicted += step[i] * (mu * jtj[i][i] * step[i] + jtr[i]);
                }
                let improvement = rss - trial_rss;
                let scale = rss.max(f64::MIN_POSITIVE);
                params = trial;
                residuals.copy_from_slice(&trial_residuals);
                rss = trial_rss;
                mu /= 3.0;
                growth = 2.0;
                accepted = true;
                if improvement <= options.rss_relative_tolerance * scale
                    && predicted.abs() <= options.rss_relative_tolerance * scale
                {
                    converged = true;
                }
                break;
            }
            mu = (mu * growth).max(1e-15);
            growth *= 2.0;
            if growth > 1e12 {
                // Damping exhausted without improvement: stationary within
                // floating-point resolution.
                converged = true;
                break;
            }
        }

        if converged {
            break;
        }
        if !accepted {
            // Damping exhausted without any improving step.
            converged = true;
            break;
        }
    }

    // Curvature and standard errors at the solution.
    if !problem.jacobian(&params, &mut jac) {
        return Err(FitError::InvalidInput(
            "Jacobian is not finite at the solution".into(),
        ));
    }
    let mut jtj = vec![vec![0.0; k]; k];
    for row in 0..m {
        for a in 0..k {
            for b in a..k {
                jtj[a][b] += jac[row * k + a] * jac[row * k + b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            jtj[a][b] = jtj[b][a];
        }
    }
    let covariance = match invert(&jtj) {
        Some(inv) => {
            let reduced = rss / (m - k) as f64;
            inv.into_iter()
                .map(|row| row.into_iter().map(|v| v * reduced).collect())
                .collect()
        }
        None => {
            let norms = column_norms(&jac, m, k);
            let degenerate = degenerate_columns(&norms);
            let names: Vec<&str> = if degenerate.is_empty() {
                param_names.iter().map(String::as_str).collect()
            } else {
                degenerate
                    .iter()
                    .map(|&i| param_names.get(i).map(String::as_str).unwrap_or("?"))
                    .collect()
            };
            return Err(FitError::SingularCurvature {
                param: names.join(", "),
            });
        }
    };

    Ok(EngineOutput {
        params,
        covariance,
        rss,
        converged,
        iterations,
    })
}

/// Adapter presenting (x, y, σ) curve data as a residual problem.
pub(crate) struct CurveProblem<'a, M: CurveModel> {
    pub model: &'a M,
    pub data: &'a SpectrumSeries,
}

impl<M: CurveModel> LeastSquaresProblem for CurveProblem<'_, M> {
    fn n_residuals(&self) -> usize {
        self.data.len()
    }

    fn n_params(&self) -> usize {
        self.model.n_params()
    }

    fn residuals(&self, params: &[f64], out: &mut [f64]) -> bool {
        for (i, (&x, &y)) in self.data.x.iter().zip(&self.data.y).enumerate() {
            let w = self.data.sigma.as_ref().map_or(1.0, |s| 1.0 / s[i]);
            out[i] = (y - self.model.eval(params, x)) * w;
        }
        true
    }

    fn jacobian(&self, params: &[f64], out: &mut [f64]) -> bool {
        let k = self.model.n_params();
        for (i, &x) in self.data.x.iter().enumerate() {
            let w = self.data.sigma.as_ref().map_or(1.0, |s| 1.0 / s[i]);
            let row = &mut out[i * k..(i + 1) * k];
            self.model.partials(params, x, row);
            if w != 1.0 {
                row.iter_mut().for_each(|v| *v *= w);
            }
        }
        true
    }
}

pub(crate) fn run_curve_fit<M: CurveModel>(
    model: &M,
    data: &SpectrumSeries,
    init: &[f64],
    bounds: Option<&[(f64, f64)]>,
    options: &FitOptions,
) -> Result<(FitResult, EngineOutput), FitError> {
    data.validate()?;
    let problem = CurveProblem { model, data };
    let names = model.param_names();
    let output = solve(&problem, init, bounds, &names, options)?;
    let params = names
        .iter()
        .enumerate()
        .map(|(i, name)| FittedParam {
            name: name.clone(),
            value: output.params[i],
            std_error: output.covariance[i][i].max(0.0).sqrt(),
        })
        .collect();
    let result = FitResult {
        params,
        rss: output.rss,
        converged: output.converged,
        iterations: output.iterations,
        warnings: Vec::new(),
    };
    Ok((result, output))
}

/// Fit a parametric curve model to data by damped least squares.
///
/// Returns the best parameters found even when the iteration cap is hit
/// (`converged = false` in that case). Fails with
/// [`FitError::SingularCurvature`] when some parameter has no effect on
/// the residuals.
pub fn least_squares<M: CurveModel>(
    model: &M,
    data: &SpectrumSeries,
    init: &[f64],
    bounds: Option<&[(f64, f64)]>,
) -> Result<FitResult, FitError> {
    run_curve_fit(model, data, init, bounds, &FitOptions::default()).map(|(result, _)| result)
}
