//! Malus-law polarization fits for emission behind a rotating half-wave
//! plate, and the orthogonality check between two dipole projections.

use super::engine::{run_curve_fit, FitOptions};
use super::models::MalusModel;
use super::{FitError, FitResult, FittedParam, SpectrumSeries};

/// Fit I(θ) = A·cos²(2(θ − θ₀)) + I₀ to intensities sampled at half-wave
/// plate angles θ (degrees).
///
/// Requires at least 8 samples spanning at least 90° (one full pattern
/// period). Returns θ₀ folded into [0°, 90°) plus the derived visibility
/// A/(A + 2 I₀). Fails with [`FitError::DegenerateModulation`] when the
/// fitted amplitude is consistent with zero.
pub fn fit_polarization(data: &SpectrumSeries) -> Result<FitResult, FitError> {
    fit_polarization_with(data, &FitOptions::default())
}

/// [`fit_polarization`] with explicit solver controls.
pub fn fit_polarization_with(
    data: &SpectrumSeries,
    options: &FitOptions,
) -> Result<FitResult, FitError> {
    data.validate()?;
    if !data.x_strictly_monotone() {
        return Err(FitError::InvalidInput(
            "angle axis must be strictly monotone".into(),
        ));
    }
    if data.len() < 8 {
        return Err(FitError::InsufficientData(format!(
            "need at least 8 angle samples, got {}",
            data.len()
        )));
    }
    let span = (data.x.last().unwrap() - data.x.first().unwrap()).abs();
    if span < 90.0 - 1e-9 {
        return Err(FitError::InsufficientData(format!(
            "angle samples span {span:.1}°, need at least 90° of half-wave plate rotation"
        )));
    }

    let y_min = data.y.iter().cloned().fold(f64::INFINITY, f64::min);
    let y_max = data.y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if y_max <= y_min {
        return Err(FitError::DegenerateModulation);
    }
    let argmax = data
        .y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();

    let init = [y_max - y_min, data.x[argmax].rem_euclid(90.0), y_min];
    let bounds = [
        (0.0, f64::INFINITY),
        (f64::NEG_INFINITY, f64::INFINITY),
        (f64::NEG_INFINITY, f64::INFINITY),
    ];
    let (mut result, output) = run_curve_fit(&MalusModel, data, &init, Some(&bounds), options)?;

    let amplitude = output.params[0];
    let sigma_amplitude = output.covariance[0][0].max(0.0).sqrt();
    if amplitude <= 2.0 * sigma_amplitude {
        return Err(FitError::DegenerateModulation);
    }

    // Fold θ₀ into [0, 90): the pattern period under a half-wave plate.
    let theta = result
        .params
        .iter_mut()
        .find(|p| p.name == "theta0_deg")
        .expect("malus model has theta0_deg");
    theta.value = theta.value.rem_euclid(90.0);

    let offset = output.params[2];
    let denom = amplitude + 2.0 * offset;
    let visibility = amplitude / denom;
    // First-order propagation over the (A, I₀) covariance block.
    let d_a = 2.0 * offset / (denom * denom);
    let d_o = -2.0 * amplitude / (denom * denom);
    let var = d_a * d_a * output.covariance[0][0]
        + d_o * d_o * output.covariance[2][2]
        + 2.0 * d_a * d_o * output.covariance[0][2];
    result.params.push(FittedParam {
        name: "visibility".into(),
        value: visibility,
        std_error: var.max(0.0).sqrt(),
    });
    Ok(result)
}

/// Verdict on whether two fitted pattern angles correspond to orthogonal
/// dipole projections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalityReport {
    /// Half-wave plate angle separation folded into [0°, 90°).
    pub hwp_separation_deg: f64,
    /// Polarization-plane separation = 2 × HWP separation, in [0°, 180°).
    pub polarization_separation_deg: f64,
    /// |HWP separation − 45°|; zero for exactly perpendicular dipoles.
    pub deviation_deg: f64,
    pub perpendicular: bool,
}

/// Compare two Malus pattern angles (degrees). Perpendicular dipoles sit
/// 45° apart in half-wave plate angle (90° in polarization angle); the
/// verdict allows `tolerance_deg` of deviation.
pub fn polarization_orthogonality(
    theta0_a_deg: f64,
    theta0_b_deg: f64,
    tolerance_deg: f64,
) -> OrthogonalityReport {
    let separation = (theta0_a_deg - theta0_b_deg).rem_euclid(90.0);
    let deviation = (separation - 45.0).abs();
    OrthogonalityReport {
        hwp_separation_deg: separation,
        polarization_separation_deg: 2.0 * separation,
        deviation_deg: deviation,
        perpendicular: deviation <= tolerance_deg,
    }
}
