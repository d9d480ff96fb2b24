//! Second-order photon autocorrelation: model evaluation, fitting, and the
//! lifetime-limited linewidth utility.

use std::f64::consts::PI;

use super::engine::{run_curve_fit, FitOptions};
use super::models::{CurveModel, G2Model};
use super::{FitError, FitResult, FittedParam, SpectrumSeries};

/// Parameters of the shelving-state autocorrelation model
/// g²(τ) = 1 − c·((1+b)·e^(−|τ|/τ₁) − b·e^(−|τ|/τ₂)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G2Params {
    /// Bunching amplitude (dimensionless, ≥ 0 for a shelving state).
    pub b: f64,
    /// Antibunching depth; g²(0) = 1 − c.
    pub c: f64,
    /// Antibunching time constant, ns; estimates the excited-state lifetime.
    pub tau1_ns: f64,
    /// Bunching decay time constant, ns; set by the shelving state.
    pub tau2_ns: f64,
}

impl G2Params {
    pub fn validate(&self) -> Result<(), FitError> {
        if !(self.tau1_ns.is_finite() && self.tau1_ns > 0.0)
            || !(self.tau2_ns.is_finite() && self.tau2_ns > 0.0)
        {
            return Err(FitError::InvalidInput(
                "tau1 and tau2 must be finite and positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.c) {
            return Err(FitError::InvalidInput("c must lie in [0, 1]".into()));
        }
        if !self.b.is_finite() {
            return Err(FitError::InvalidInput("b must be finite".into()));
        }
        Ok(())
    }

    fn as_array(&self) -> [f64; 4] {
        [self.b, self.c, self.tau1_ns, self.tau2_ns]
    }
}

/// Evaluate the autocorrelation model at delay `tau_ns`. Even in τ.
pub fn eval_g2(params: &G2Params, tau_ns: f64) -> f64 {
    G2Model.eval(&params.as_array(), tau_ns)
}

/// Lifetime-limited linewidth 1/(2π·τ₁) of an emitter with excited-state
/// lifetime `tau1_ns`, in MHz.
pub fn lifetime_limited_linewidth(tau1_ns: f64) -> f64 {
    assert!(tau1_ns > 0.0, "lifetime must be positive");
    1e3 / (2.0 * PI * tau1_ns)
}

/// Fit the autocorrelation model to a delay histogram.
///
/// Initialization is automatic: the baseline from the tail of the trace,
/// c from the dip depth, τ₁ from the dip width at half depth, and (b, τ₂)
/// from the bunching shoulder. The result additionally carries the derived
/// `g2_zero` = 1 − c with its propagated error.
///
/// When the trace shows no bunching shoulder at all the τ₂ direction is
/// flat and the fit fails with [`FitError::SingularCurvature`] rather than
/// returning an arbitrary τ₂.
pub fn fit_g2(data: &SpectrumSeries) -> Result<FitResult, FitError> {
    fit_g2_with(data, &FitOptions::default())
}

/// [`fit_g2`] with explicit solver controls.
pub fn fit_g2_with(data: &SpectrumSeries, options: &FitOptions) -> Result<FitResult, FitError> {
    data.validate()?;
    if !data.x_strictly_monotone() {
        return Err(FitError::InvalidInput(
            "delay axis must be strictly monotone".into(),
        ));
    }

    let abs_max = data.x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if abs_max <= 0.0 {
        return Err(FitError::InitGuessFailed(
            "delay axis spans zero range".into(),
        ));
    }

    // Baseline and noise scale from the outer 25% of delays.
    let tail: Vec<f64> = data
        .x
        .iter()
        .zip(&data.y)
        .filter(|(x, _)| x.abs() >= 0.75 * abs_max)
        .map(|(_, &y)| y)
        .collect();
    if tail.len() < 2 {
        return Err(FitError::InitGuessFailed(
            "not enough samples in the tail to estimate the baseline".into(),
        ));
    }
    let baseline = tail.iter().sum::<f64>() / tail.len() as f64;
    let noise = (tail
        .iter()
        .map(|v| (v - baseline) * (v - baseline))
        .sum::<f64>()
        / tail.len() as f64)
        .sqrt();

    // The dip: global minimum, expected near zero delay.
    let (min_index, &y_min) = data
        .y
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let dip_center = data.x[min_index];
    let depth = baseline - y_min;
    if dip_center.abs() > 0.25 * abs_max || depth <= 3.0 * noise.max(1e-12 * baseline.abs()) {
        return Err(FitError::InitGuessFailed(
            "could not bracket an antibunching dip near zero delay".into(),
        ));
    }

    // τ₁ from the half-depth recovery distance.
    let half_level = y_min + depth / 2.0;
    let mut half_distance = None;
    for (i, &y) in data.y.iter().enumerate() {
        if i > min_index && y >= half_level {
            half_distance = Some((data.x[i] - dip_center).abs());
            break;
        }
    }
    if half_distance.is_none() {
        for (i, &y) in data.y.iter().enumerate().rev() {
            if i < min_index && y >= half_level {
                half_distance = Some((data.x[i] - dip_center).abs());
                break;
            }
        }
    }
    let half_distance = half_distance
        .ok_or_else(|| FitError::InitGuessFailed("dip has no half-depth recovery".into()))?;
    let tau1 = (half_distance / 2.0_f64.ln()).max(1e-6 * abs_max);

    let c_init = (depth / baseline.max(f64::MIN_POSITIVE)).clamp(0.01, 0.99);

    // Bunching shoulder: excess above baseline beyond the dip region.
    let mut excess_peak = 0.0_f64;
    let mut excess_tau = 0.0_f64;
    for (&x, &y) in data.x.iter().zip(&data.y) {
        if x.abs() > 5.0 * tau1 && y - baseline > excess_peak {
            excess_peak = y - baseline;
            excess_tau = x.abs();
        }
    }
    let (b_init, tau2_init) = if excess_peak > 2.0 * noise.max(1e-12) {
        // Decay of the shoulder toward the tail gives τ₂: walk outward in
        // |delay| from the shoulder peak to its half-excess crossing.
        let half_excess = baseline + excess_peak / 2.0;
        let mut by_abs: Vec<usize> = (0..data.len()).collect();
        by_abs.sort_by(|&a, &b| data.x[a].abs().total_cmp(&data.x[b].abs()));
        let mut tau2 = 10.0 * tau1;
        for &i in &by_abs {
            if data.x[i].abs() > excess_tau && data.y[i] <= half_excess {
                tau2 = ((data.x[i].abs() - excess_tau) / 2.0_f64.ln()).max(2.0 * tau1);
                break;
            }
        }
        ((excess_peak / c_init).max(0.01), tau2)
    } else {
        // No visible shoulder: start at b = 0 so an unconstrained τ₂ is
        // detected as singular curvature instead of fit noise.
        (0.0, 10.0 * tau1)
    };

    let init = [b_init, c_init, tau1, tau2_init];
    let bounds = [(0.0, 1e6), (1e-6, 1.0), (1e-9, 1e9), (1e-9, 1e9)];
    let (mut result, output) = run_curve_fit(&G2Model, data, &init, Some(&bounds), options)?;

    // g²(0) = 1 − c, with σ equal to σ_c exactly.
    let c_index = 1;
    result.params.push(FittedParam {
        name: "g2_zero".into(),
        value: 1.0 - output.params[c_index],
        std_error: output.covariance[c_index][c_index].max(0.0).sqrt(),
    });
    Ok(result)
}
