//! Parametric curve models with analytic partial derivatives.
//!
//! Every model's `partials` must agree with central finite differences of
//! `eval`; the test suites enforce this at random parameter points.

use std::f64::consts::PI;

/// A scalar model y = f(params, x) with analytic parameter derivatives.
pub trait CurveModel {
    fn n_params(&self) -> usize;
    fn param_names(&self) -> Vec<String>;
    fn eval(&self, params: &[f64], x: f64) -> f64;
    /// Writes ∂f/∂params at (params, x) into `out` (length `n_params`).
    fn partials(&self, params: &[f64], x: f64, out: &mut [f64]);
}

/// y = slope · x. Used as a regression oracle and for quick calibrations.
pub struct LinearModel;

impl CurveModel for LinearModel {
    fn n_params(&self) -> usize {
        1
    }

    fn param_names(&self) -> Vec<String> {
        vec!["slope".into()]
    }

    fn eval(&self, params: &[f64], x: f64) -> f64 {
        params[0] * x
    }

    fn partials(&self, _params: &[f64], x: f64, out: &mut [f64]) {
        out[0] = x;
    }
}

/// Spectral line shape of a peak model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakShape {
    /// Peak value `amplitude` at `center`; FWHM = 2γ.
    Lorentzian,
    /// Peak value `amplitude` at `center`; FWHM = 2√(2 ln 2)·σ.
    Gaussian,
}

impl PeakShape {
    pub fn label(self) -> &'static str {
        match self {
            PeakShape::Lorentzian => "lorentzian",
            PeakShape::Gaussian => "gaussian",
        }
    }

    /// Area under one unit-amplitude peak of the given FWHM.
    pub fn unit_area(self, fwhm: f64) -> f64 {
        match self {
            // ∫ γ²/((x−c)² + γ²) dx = π γ
            PeakShape::Lorentzian => PI * fwhm / 2.0,
            // ∫ exp(−(x−c)²/2σ²) dx = σ √(2π)
            PeakShape::Gaussian => fwhm / GAUSSIAN_FWHM_PER_SIGMA * (2.0 * PI).sqrt(),
        }
    }
}

/// FWHM / σ for a Gaussian: 2√(2 ln 2) ≈ 2.3548.
pub const GAUSSIAN_FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

/// Sum of `n_peaks` identical-shape peaks plus a constant background.
///
/// Parameter layout: [center_0, fwhm_0, amplitude_0, …, background].
pub struct MultiPeakModel {
    shape: PeakShape,
    n_peaks: usize,
}

impl MultiPeakModel {
    pub fn new(shape: PeakShape, n_peaks: usize) -> Self {
        assert!(n_peaks >= 1);
        Self { shape, n_peaks }
    }

    pub fn shape(&self) -> PeakShape {
        self.shape
    }

    pub fn n_peaks(&self) -> usize {
        self.n_peaks
    }

    fn peak_value(&self, center: f64, fwhm: f64, amplitude: f64, x: f64) -> f64 {
        let dx = x - center;
        match self.shape {
            PeakShape::Lorentzian => {
                let gamma = fwhm / 2.0;
                amplitude * gamma * gamma / (dx * dx + gamma * gamma)
            }
            PeakShape::Gaussian => {
                let sigma = fwhm / GAUSSIAN_FWHM_PER_SIGMA;
                amplitude * (-dx * dx / (2.0 * sigma * sigma)).exp()
            }
        }
    }
}

impl CurveModel for MultiPeakModel {
    fn n_params(&self) -> usize {
        3 * self.n_peaks + 1
    }

    fn param_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.n_params());
        for i in 0..self.n_peaks {
            names.push(format!("center_{i}"));
            names.push(format!("fwhm_{i}"));
            names.push(format!("amplitude_{i}"));
        }
        names.push("background".into());
        names
    }

    fn eval(&self, params: &[f64], x: f64) -> f64 {
        let mut y = params[3 * self.n_peaks];
        for i in 0..self.n_peaks {
            y += self.peak_value(params[3 * i], params[3 * i + 1], params[3 * i + 2], x);
        }
        y
    }

    fn partials(&self, params: &[f64], x: f64, out: &mut [f64]) {
        for i in 0..self.n_peaks {
            let (center, fwhm, amplitude) = (params[3 * i], params[3 * i + 1], params[3 * i + 2]);
            let dx = x - center;
            match self.shape {
                PeakShape::Lorentzian => {
                    let gamma = fwhm / 2.0;
                    let denom = dx * dx + gamma * gamma;
                    let shape = gamma * gamma / denom;
                    out[3 * i] = amplitude * gamma * gamma * 2.0 * dx / (denom * denom);
                    // ∂/∂γ = 2Aγ dx²/denom², fwhm = 2γ
                    out[3 * i + 1] = amplitude * gamma * dx * dx / (denom * denom);
                    out[3 * i + 2] = shape;
                }
                PeakShape::Gaussian => {
                    let sigma = fwhm / GAUSSIAN_FWHM_PER_SIGMA;
                    let shape = (-dx * dx / (2.0 * sigma * sigma)).exp();
                    out[3 * i] = amplitude * shape * dx / (sigma * sigma);
                    let d_sigma = amplitude * shape * dx * dx / (sigma * sigma * sigma);
                    out[3 * i + 1] = d_sigma / GAUSSIAN_FWHM_PER_SIGMA;
                    out[3 * i + 2] = shape;
                }
            }
        }
        out[3 * self.n_peaks] = 1.0;
    }
}

/// Second-order photon autocorrelation with one shelving state:
/// g²(τ) = 1 − c·((1+b)·e^(−|τ|/τ₁) − b·e^(−|τ|/τ₂)).
///
/// Parameter layout: [b, c, tau1, tau2] with τ in the same unit as x (ns).
pub struct G2Model;

impl CurveModel for G2Model {
    fn n_params(&self) -> usize {
        4
    }

    fn param_names(&self) -> Vec<String> {
        vec!["b".into(), "c".into(), "tau1_ns".into(), "tau2_ns".into()]
    }

    fn eval(&self, params: &[f64], x: f64) -> f64 {
        let (b, c, tau1, tau2) = (params[0], params[1], params[2], params[3]);
        let t = x.abs();
        1.0 - c * ((1.0 + b) * (-t / tau1).exp() - b * (-t / tau2).exp())
    }

    fn partials(&self, params: &[f64], x: f64, out: &mut [f64]) {
        let (b, c, tau1, tau2) = (params[0], params[1], params[2], params[3]);
        let t = x.abs();
        let e1 = (-t / tau1).exp();
        let e2 = (-t / tau2).exp();
        out[0] = -c * (e1 - e2);
        out[1] = -((1.0 + b) * e1 - b * e2);
        out[2] = -c * (1.0 + b) * e1 * t / (tau1 * tau1);
        out[3] = c * b * e2 * t / (tau2 * tau2);
    }
}

/// Malus-law intensity behind a rotating half-wave plate:
/// I(θ) = A·cos²(2(θ − θ₀)) + I₀, with θ and θ₀ in degrees.
/// The half-wave plate doubles the polarization rotation, so the pattern
/// period is 90° in θ.
///
/// Parameter layout: [amplitude, theta0_deg, offset].
pub struct MalusModel;

const DEG: f64 = PI / 180.0;

impl CurveModel for MalusModel {
    fn n_params(&self) -> usize {
        3
    }

    fn param_names(&self) -> Vec<String> {
        vec!["amplitude".into(), "theta0_deg".into(), "offset".into()]
    }

    fn eval(&self, params: &[f64], x: f64) -> f64 {
        let (a, theta0, offset) = (params[0], params[1], params[2]);
        let u = 2.0 * (x - theta0) * DEG;
        a * u.cos() * u.cos() + offset
    }

    fn partials(&self, params: &[f64], x: f64, out: &mut [f64]) {
        let (a, theta0, _) = (params[0], params[1], params[2]);
        let u = 2.0 * (x - theta0) * DEG;
        out[0] = u.cos() * u.cos();
        out[1] = 2.0 * a * (2.0 * u).sin() * DEG;
        out[2] = 1.0;
    }
}
