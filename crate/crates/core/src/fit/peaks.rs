//! Lorentzian and Gaussian peak fits with automatic initialization.
//!
//! Initial guesses come from the data: the background from the sample
//! minimum, peak centers from (masked) maxima, and widths from half-maximum
//! crossings. Double-peak fits fall back to a single peak with a warning
//! when the second peak is unresolvable (separation below half the larger
//! FWHM) or absent.

use super::engine::{run_curve_fit, FitOptions};
use super::models::{CurveModel, MultiPeakModel, PeakShape};
use super::{FitError, FitResult, FittedParam, SpectrumSeries};

struct PeakGuess {
    center: f64,
    fwhm: f64,
    amplitude: f64,
}

/// Indices sorted so that x is ascending.
fn ascending_order(x: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    order
}

/// Estimate one peak from the samples whose indices pass `allowed`.
fn guess_peak(
    x: &[f64],
    y: &[f64],
    order: &[usize],
    background: f64,
    span: f64,
    allowed: impl Fn(f64) -> bool,
) -> Option<PeakGuess> {
    let mut best: Option<usize> = None;
    for (pos, &i) in order.iter().enumerate() {
        if !allowed(x[i]) {
            continue;
        }
        if best.is_none_or(|b: usize| y[i] > y[order[b]]) {
            best = Some(pos);
        }
    }
    let peak_pos = best?;
    let peak_index = order[peak_pos];
    let amplitude = y[peak_index] - background;
    if amplitude <= 0.0 {
        return None;
    }
    let half = background + amplitude / 2.0;

    // Walk outward along the ascending grid to the half-maximum crossings.
    let mut left = None;
    for pos in (0..peak_pos).rev() {
        if y[order[pos]] <= half {
            left = Some(x[order[pos]]);
            break;
        }
    }
    let mut right = None;
    for pos in (peak_pos + 1)..order.len() {
        if y[order[pos]] <= half {
            right = Some(x[order[pos]]);
            break;
        }
    }
    let center = x[peak_index];
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (center - l),
        (None, Some(r)) => 2.0 * (r - center),
        (None, None) => span / 4.0,
    };
    Some(PeakGuess {
        center,
        fwhm: fwhm.max(span * 1e-6),
        amplitude,
    })
}

fn fit_peaks(
    data: &SpectrumSeries,
    shape: PeakShape,
    n_peaks: usize,
    options: &FitOptions,
) -> Result<FitResult, FitError> {
    if !(1..=2).contains(&n_peaks) {
        return Err(FitError::InvalidInput("n_peaks must be 1 or 2".into()));
    }
    data.validate()?;
    if !data.x_strictly_monotone() {
        return Err(FitError::InvalidInput(
            "spectrum x axis must be strictly monotone".into(),
        ));
    }

    let order = ascending_order(&data.x);
    let x_min = data.x[order[0]];
    let x_max = data.x[*order.last().unwrap()];
    let span = x_max - x_min;
    let background = data.y.iter().cloned().fold(f64::INFINITY, f64::min);

    let first = guess_peak(&data.x, &data.y, &order, background, span, |_| true)
        .ok_or(FitError::PeakNotFound)?;

    let mut warnings = Vec::new();
    let mut guesses = vec![first];
    if n_peaks == 2 {
        let c1 = guesses[0].center;
        let w1 = guesses[0].fwhm;
        let second = guess_peak(&data.x, &data.y, &order, background, span, |x| {
            (x - c1).abs() > 1.5 * w1
        });
        match second {
            Some(second)
                if second.amplitude > 0.05 * guesses[0].amplitude
                    && (second.center - c1).abs() > 0.5 * w1.max(second.fwhm) =>
            {
                guesses.push(second);
            }
            _ => {
                warnings
                    .push("second peak unresolvable; fell back to a single-peak fit".to_string());
            }
        }
    }
    let n_fit = guesses.len();
    // Keep a deterministic parameter order: leftmost peak first.
    guesses.sort_by(|a, b| a.center.total_cmp(&b.center));

    let model = MultiPeakModel::new(shape, n_fit);
    let mut init = Vec::with_capacity(model.n_params());
    let mut bounds = Vec::with_capacity(model.n_params());
    for g in &guesses {
        init.extend([g.center, g.fwhm, g.amplitude]);
        bounds.push((x_min - span, x_max + span));
        bounds.push((span * 1e-9, 8.0 * span));
        bounds.push((0.0, f64::INFINITY));
    }
    init.push(background);
    bounds.push((f64::NEG_INFINITY, f64::INFINITY));

    let (mut result, output) = run_curve_fit(&model, data, &init, Some(&bounds), options)?;
    result.warnings = warnings;

    // Derived areas with first-order error propagation over the
    // (fwhm, amplitude) covariance block.
    for i in 0..n_fit {
        let fwhm = output.params[3 * i + 1];
        let amplitude = output.params[3 * i + 2];
        let area = amplitude * shape.unit_area(fwhm);
        let d_fwhm = amplitude * shape.unit_area(1.0);
        let d_amp = shape.unit_area(fwhm);
        let var = d_fwhm * d_fwhm * output.covariance[3 * i + 1][3 * i + 1]
            + d_amp * d_amp * output.covariance[3 * i + 2][3 * i + 2]
            + 2.0 * d_fwhm * d_amp * output.covariance[3 * i + 1][3 * i + 2];
        result.params.push(FittedParam {
            name: format!("area_{i}"),
            value: area,
            std_error: var.max(0.0).sqrt(),
        });
    }
    Ok(result)
}

/// Fit `n_peaks` (1 or 2) Lorentzian lines plus a constant background.
///
/// Per peak the result carries `center_i`, `fwhm_i` (= 2γ), `amplitude_i`
/// (peak height) and the derived `area_i` = π·amplitude·γ.
pub fn fit_lorentzian(data: &SpectrumSeries, n_peaks: usize) -> Result<FitResult, FitError> {
    fit_peaks(data, PeakShape::Lorentzian, n_peaks, &FitOptions::default())
}

/// [`fit_lorentzian`] with explicit solver controls.
pub fn fit_lorentzian_with(
    data: &SpectrumSeries,
    n_peaks: usize,
    options: &FitOptions,
) -> Result<FitResult, FitError> {
    fit_peaks(data, PeakShape::Lorentzian, n_peaks, options)
}

/// Fit `n_peaks` (1 or 2) Gaussian lines plus a constant background.
///
/// Per peak the result carries `center_i`, `fwhm_i` (= 2√(2 ln 2)σ),
/// `amplitude_i` and the derived `area_i` = amplitude·σ·√(2π).
pub fn fit_gaussian(data: &SpectrumSeries, n_peaks: usize) -> Result<FitResult, FitError> {
    fit_peaks(data, PeakShape::Gaussian, n_peaks, &FitOptions::default())
}

/// [`fit_gaussian`] with explicit solver controls.
pub fn fit_gaussian_with(
    data: &SpectrumSeries,
    n_peaks: usize,
    options: &FitOptions,
) -> Result<FitResult, FitError> {
    fit_peaks(data, PeakShape::Gaussian, n_peaks, options)
}
